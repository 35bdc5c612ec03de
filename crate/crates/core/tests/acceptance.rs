//! The nine acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 1, 6 and 7 are expected to fail: the reference bracket table has
//! a sign error, two families of cup products that should be nontrivial are
//! coboundaries, and the closed-form integrability conditions are stricter
//! than solvability of the obstruction. Each is still run exactly as stated.
//! The harness exits nonzero when any outcome differs from this expectation.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superdeform_core::catalog::{build, omega_cup, phi, phi_with, verify_cup_relations, verify_cup_relations_with, CocycleId, Family};
use superdeform_core::cohomology::{delta1, is_2cocycle, is_cocycle, solve_coboundary, AnsatzSpec, CoboundaryProblem, CupConvention};
use superdeform_core::contact::{basis_triples, jacobi_check, verify_structure_constants, BracketTable, OspElement};
use superdeform_core::deformation::{
    check_integrability, homomorphism_report, obstruction2, solvability, verify_flat, window_slots, DeformationParams, ObstructionBasis,
    TruncatedSymbolModule,
};
use superdeform_core::grassmann::{Parity, SuperFunction, Theta};
use superdeform_core::rational::{frac, int, sign};

const KNOWN_RED: [usize; 3] = [1, 6, 7];

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion1() -> Outcome {
    let printed = verify_structure_constants(&BracketTable::printed());
    let table_jacobi = BracketTable::printed().jacobi_report();
    let jacobi = jacobi_check(&basis_triples());
    let corrected = verify_structure_constants(&BracketTable::standard());
    let wrong: Vec<String> = printed.mismatches.iter().map(|m| m.pair.clone()).collect();
    outcome(
        printed.passed() && jacobi.passed(),
        format!(
            "{}/{} brackets match the reference table (differ: {}); Jacobi on {} triples of the realized bracket: {}; \
             Jacobi violations of the reference table: {}; corrected table matches: {}",
            printed.checked - printed.mismatches.len(),
            printed.checked,
            wrong.join(" "),
            jacobi.checked,
            if jacobi.passed() { "holds" } else { "fails" },
            table_jacobi.mismatches.len(),
            corrected.passed(),
        ),
    )
}

fn monomials(max_degree: usize) -> Vec<SuperFunction> {
    (0..=max_degree)
        .flat_map(|p| common::MONOMIALS.map(|m| SuperFunction::monomial(int(1), p, m)))
        .collect()
}

fn parity_of(f: &SuperFunction) -> Parity {
    f.parity().unwrap_or(Parity::Even)
}

/// Failures among the algebra laws for one pair/triple of homogeneous
/// functions.
fn law_failures(a: &SuperFunction, b: &SuperFunction, c: &SuperFunction) -> Vec<&'static str> {
    let mut failed = Vec::new();
    let (pa, pb) = (parity_of(a), parity_of(b));
    if a * b != (b * a).scale(&sign(pa.is_odd() && pb.is_odd())) {
        failed.push("supercommutativity");
    }
    if &(a * b) * c != a * &(b * c) {
        failed.push("associativity");
    }
    if (a * b).d_x() != &(&a.d_x() * b) + &(a * &b.d_x()) {
        failed.push("Leibniz d_x");
    }
    for i in [Theta::One, Theta::Two] {
        let s = sign(pa.is_odd());
        if (a * b).d_theta(i) != &(&a.d_theta(i) * b) + &(a * &b.d_theta(i)).scale(&s) {
            failed.push("Leibniz d_i");
        }
        if (a * b).eta_bar(i) != &(&a.eta_bar(i) * b) + &(a * &b.eta_bar(i)).scale(&s) {
            failed.push("Leibniz eta_i");
        }
        if a.eta_bar(i).eta_bar(i) != -a.d_x() {
            failed.push("eta_i^2 = -d_x");
        }
        if !a.d_theta(i).d_theta(i).is_zero() {
            failed.push("d_i^2 = 0");
        }
    }
    failed
}

fn criterion2() -> Outcome {
    let basis = monomials(3);
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut exhaustive = 0;
    for a in &basis {
        for b in &basis {
            for c in &basis {
                exhaustive += 1;
                for f in law_failures(a, b, c) {
                    *failures.entry(f).or_default() += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let random = 1000;
    for _ in 0..random {
        let (pa, pb, pc) = (common::parity(&mut rng), common::parity(&mut rng), common::parity(&mut rng));
        let a = common::homogeneous(&mut rng, pa, 3);
        let b = common::homogeneous(&mut rng, pb, 3);
        let c = common::homogeneous(&mut rng, pc, 3);
        for f in law_failures(&a, &b, &c) {
            *failures.entry(f).or_default() += 1;
        }
    }
    outcome(
        failures.is_empty(),
        format!("{exhaustive} monomial triples (degree <= 3) and {random} random triples at seed 0; failures: {failures:?}"),
    )
}

fn criterion3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut bad = 0;
    for _ in 0..100 {
        let (s, t) = common::weights(&mut rng);
        let p = common::parity(&mut rng);
        let w = common::cochain1(&mut rng, &s, &t, p, 3, 4);
        if !is_2cocycle(&delta1(&w)) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("δ2∘δ1 ≠ 0 on {bad} of 100 random 1-cochains (order <= 3, degree <= 4)"))
}

fn catalog_ids() -> Vec<CocycleId> {
    let mut ids = Vec::new();
    for d in [frac(1, 3), frac(5, 6), frac(7, 5)] {
        for k in 0..=5 {
            ids.push(CocycleId::omega(Family::Omega, k, d.clone()));
            ids.push(CocycleId::omega(Family::OmegaTilde, k, d.clone()));
        }
    }
    // The gamma families sit on F_{k/2} whatever m is; m only decides which
    // k occur in a given module.
    for _m in [2, 4] {
        for k in 0..=5 {
            ids.push(CocycleId::new(Family::Gamma, k));
            ids.push(CocycleId::new(Family::GammaTilde, k));
        }
    }
    for k in 1..=4 {
        for f in [Family::BigGamma, Family::BigGammaTilde, Family::BigGammaBar] {
            ids.push(CocycleId::new(f, k));
        }
    }
    ids
}

fn criterion4() -> Outcome {
    let ids = catalog_ids();
    let failed: Vec<String> = ids
        .iter()
        .filter(|id| !is_cocycle(&build(id).expect("valid catalog parameters")))
        .map(|id| id.to_string())
        .collect();
    outcome(failed.is_empty(), format!("{} cocycles checked; failing: {failed:?}", ids.len()))
}

fn criterion5() -> Outcome {
    let mut failed = Vec::new();
    let mut checked = 0;
    for k in 1..=3 {
        let r = verify_cup_relations(k).expect("k >= 1");
        checked += r.checked;
        failed.extend(r.mismatches.into_iter().map(|m| format!("{} (k = {k})", m.pair)));
    }
    for d in [frac(1, 3), frac(5, 6), frac(7, 5)] {
        for k in 0..=3 {
            checked += 1;
            if !omega_cup(0, k, &d).expect("generic weight").is_zero() {
                failed.push(format!("omega_{k} v omega_{k} (d = {d})"));
            }
        }
    }
    outcome(failed.is_empty(), format!("{checked} identities; failing: {failed:?}"))
}

fn criterion6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, k) in [(frac(1, 3), 1), (frac(7, 5), 2)] {
        let targets = vec![
            ("a".to_string(), omega_cup(1, k, &d).unwrap()),
            ("b".to_string(), omega_cup(2, k, &d).unwrap()),
        ];
        let cert = solve_coboundary(&CoboundaryProblem::combination(targets).unwrap(), &AnsatzSpec::for_k(k as usize)).unwrap();
        let forced: BTreeSet<_> = cert.forced_zero.iter().cloned().collect();
        let ok = forced == BTreeSet::from(["a".to_string(), "b".to_string()]) && cert.verified;
        pass &= ok;
        parts.push(format!(
            "Omega at (d, k) = ({d}, {k}): forced zero {:?}, {:?}, verified {}",
            cert.forced_zero, cert.status, cert.verified
        ));
    }
    for k in 1..=2 {
        let targets = (1..=6).map(|i| (format!("a{i}"), phi(i, k).unwrap())).collect();
        let cert = solve_coboundary(&CoboundaryProblem::combination(targets).unwrap(), &AnsatzSpec::for_k(k as usize)).unwrap();
        let ok = cert.forced_zero.len() == 6 && cert.verified;
        pass &= ok;
        let relations: Vec<String> = cert
            .scalar_relations
            .iter()
            .map(|row| row.iter().map(|(n, c)| format!("{c}*{n}")).collect::<Vec<_>>().join(" + ") + " = 0")
            .collect();
        parts.push(format!(
            "Phi1..6 at m = 4, k = {k}: forced zero {:?}, relations [{}], verified {}",
            cert.forced_zero,
            relations.join("; "),
            cert.verified
        ));
    }
    outcome(pass, parts.join(" | "))
}

fn sample_params(rng: &mut ChaCha8Rng, module: &TruncatedSymbolModule) -> DeformationParams {
    let mut p = DeformationParams::new(module.d.clone());
    for slot in window_slots(module) {
        if rng.gen_bool(0.25) {
            let v = [-2, -1, 1, 2][rng.gen_range(0..4)];
            p.set(slot.name, slot.k, int(v));
        }
    }
    p
}

fn criterion7() -> Outcome {
    let module = TruncatedSymbolModule::new(int(1), 6).unwrap();
    let basis = ObstructionBasis::compute(&module).unwrap();
    let table = basis.certificates(None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut counts: BTreeMap<(bool, bool), usize> = BTreeMap::new();
    let mut first_disagreement = None;
    let mut engine_errors = Vec::new();
    for n in 0..200 {
        let p = sample_params(&mut rng, &module);
        let conditions = check_integrability(&p).unwrap().is_integrable();
        let solvable = table.solvable(&basis, &p);
        let direct = obstruction2(&p, &module).unwrap();
        let symbolic = basis.obstruction(&p).unwrap();
        let keys: BTreeSet<_> = direct.blocks.keys().chain(symbolic.keys()).collect();
        let same = keys.into_iter().all(|b| match (direct.blocks.get(b), symbolic.get(b)) {
            (Some(x), Some(y)) => x.equals(y).unwrap_or(false),
            (Some(z), None) | (None, Some(z)) => z.is_zero(),
            (None, None) => true,
        });
        if !same {
            engine_errors.push(format!("vector {n}: assembled obstruction differs from the product expansion"));
        }
        if n % 25 == 0 && solvability(&p, &module, None).unwrap().solvable != solvable {
            engine_errors.push(format!("vector {n}: direct solve disagrees with the block certificates"));
        }
        if conditions != solvable && first_disagreement.is_none() {
            first_disagreement = Some(p.to_json());
        }
        *counts.entry((conditions, solvable)).or_default() += 1;
    }
    let disagreements: usize = counts.iter().filter(|((a, b), _)| a != b).map(|(_, n)| n).sum();
    let split: Vec<String> = counts
        .iter()
        .map(|((c, s), n)| format!("conditions {} / solvable {}: {n}", if *c { "integrable" } else { "obstructed" }, s))
        .collect();
    outcome(
        disagreements == 0 && engine_errors.is_empty() && table.all_verified(),
        format!(
            "200 vectors at m = 2, K = 6, seed 0; {disagreements} disagreements [{}]; certificates verified {}; engine errors {:?}; first disagreement {}",
            split.join(", "),
            table.all_verified(),
            engine_errors,
            first_disagreement.unwrap_or_else(|| "none".into())
        ),
    )
}

fn criterion8() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let example = DeformationParams::example(2, 6);
    let module = TruncatedSymbolModule::new(int(1), 6).unwrap();
    match verify_flat(&example, &module) {
        Ok(r) => {
            pass &= r.passed();
            parts.push(r.summary_line());
        }
        Err(e) => {
            pass = false;
            parts.push(format!("example refused: {e}"));
        }
    }
    let d = frac(1, 3);
    let mut generic = DeformationParams::new(d.clone());
    for k in 0..=6 {
        generic.set('a', k, int(k + 1));
    }
    let module = TruncatedSymbolModule::new(d, 6).unwrap();
    match verify_flat(&generic, &module) {
        Ok(r) => {
            pass &= r.passed();
            parts.push(r.summary_line());
        }
        Err(e) => {
            pass = false;
            parts.push(format!("generic deformation refused: {e}"));
        }
    }
    outcome(pass, parts.join(" | "))
}

fn criterion9() -> Outcome {
    let mut table = BracketTable::standard();
    let wrong = {
        let mut v = table.expected(OspElement::A1, OspElement::B1);
        v.add(OspElement::C, int(1));
        v
    };
    table.set(OspElement::A1, OspElement::B1, wrong);
    let table_caught = !verify_structure_constants(&table).passed();

    let mut c = build(&CocycleId::new(Family::BigGammaTilde, 2)).unwrap();
    let target = OspElement::ALL.into_iter().find(|g| !c.value(*g).is_zero()).expect("nonzero cocycle");
    let perturbed = c.value(target).scale(&frac(3, 2));
    c.set(target, perturbed).unwrap();
    let cocycle_caught = !is_cocycle(&c);

    let flipped = verify_cup_relations_with(2, CupConvention::FlipSecondTerm).unwrap();
    let flipped_not_closed = !is_2cocycle(&phi_with(1, 2, CupConvention::FlipSecondTerm).unwrap());
    let cup_caught = !flipped.passed() || flipped_not_closed;

    let controls = verify_structure_constants(&BracketTable::standard()).passed()
        && is_cocycle(&build(&CocycleId::new(Family::BigGammaTilde, 2)).unwrap())
        && verify_cup_relations(2).unwrap().passed();

    let h = homomorphism_report(&DeformationParams::example(2, 6).with('b', 1, int(1)), &TruncatedSymbolModule::new(int(1), 6).unwrap()).unwrap();
    outcome(
        table_caught && cocycle_caught && cup_caught && controls,
        format!(
            "corrupted table detected {table_caught}; perturbed Gamma_tilde_2({target}) detected {cocycle_caught}; \
             sign-flipped cup detected {cup_caught} ({} relation mismatches, Phi1 not closed {flipped_not_closed}); \
             unperturbed controls pass {controls}; homomorphism check on an obstructed vector reports {} mismatches",
            flipped.mismatches.len(),
            h.mismatches.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("structure constants", criterion1, Duration::from_secs(1)),
        ("algebra laws", criterion2, Duration::from_secs(10)),
        ("delta squared", criterion3, Duration::from_secs(30)),
        ("cocycle suite", criterion4, Duration::from_secs(120)),
        ("cup relations", criterion5, Duration::from_secs(120)),
        ("nontriviality certificates", criterion6, Duration::from_secs(600)),
        ("integrability equivalence", criterion7, Duration::from_secs(600)),
        ("flat deformation", criterion8, Duration::from_secs(120)),
        ("fault injection", criterion9, Duration::from_secs(60)),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= *budget;
        println!(
            "criterion {n} ({name}): {} [{:.2} s of {} s] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            result.detail
        );
        if pass == KNOWN_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?} (expected FAIL exactly for {KNOWN_RED:?})");
        std::process::exit(1);
    }
}
