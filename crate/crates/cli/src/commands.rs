use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use superdeform_core::catalog::{
    build_checked, crosscheck_printed_expansions, omega_cup, phi, verify_cup_relations, CocycleId, Family,
};
use superdeform_core::cohomology::{delta1, is_2cocycle, solve_coboundary, AnsatzSpec, CoboundaryProblem, CohomologyError, LinearCertificate};
use superdeform_core::contact::{basis_triples, jacobi_check, poisson, verify_structure_constants, BracketTable, ContactElement, OspElement};
use superdeform_core::deformation::{
    check_integrability, homomorphism_report, obstruction_coefficients, solvability, verify_flat, DeformationError, DeformationParams,
    TruncatedSymbolModule, RESONANT_CONDITIONS,
};
use superdeform_core::grassmann::{Parity, SuperFunction, Theta};
use superdeform_core::rational::{format_rational, frac, sign, twice_natural, Rational};
use superdeform_core::report::VerificationReport;

use crate::sample;
use crate::{Case, TableChoice};

/// Input or configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn fail(msg: impl Into<String>) -> CliError {
    CliError(msg.into())
}

pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<String>,
    pub details: Value,
}

/// Inclusive index range, written `a..b` or `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KRange {
    pub lo: i64,
    pub hi: i64,
}

impl KRange {
    pub fn parse(s: &str) -> Result<Self, String> {
        let bad = || format!("expected an index range like 0..5, got {s:?}");
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let k = s.trim().parse().map_err(|_| bad())?;
                (k, k)
            }
        };
        if lo > hi {
            return Err(format!("empty index range {s:?}"));
        }
        Ok(KRange { lo, hi })
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

const SHOWN_MISMATCHES: usize = 20;

fn report_lines(r: &VerificationReport) -> Vec<String> {
    let mut out = vec![r.summary_line()];
    for m in r.mismatches.iter().take(SHOWN_MISMATCHES) {
        out.push(format!("  {}: expected {}, computed {}", m.pair, m.expected, m.computed));
    }
    if r.mismatches.len() > SHOWN_MISMATCHES {
        out.push(format!("  ... {} more", r.mismatches.len() - SHOWN_MISMATCHES));
    }
    out.extend(r.notes.iter().map(|n| format!("  note: {n}")));
    out
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

pub fn verify_structure(fixture: Option<&Path>, choice: TableChoice) -> Result<Outcome, CliError> {
    let (source, table) = match fixture {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
            (path.display().to_string(), BracketTable::parse(&text)?)
        }
        None => match choice {
            TableChoice::Standard => ("standard".to_string(), BracketTable::standard()),
            TableChoice::Printed => ("printed".to_string(), BracketTable::printed()),
        },
    };
    let constants = verify_structure_constants(&table);
    let mut table_jacobi = table.jacobi_report();
    table_jacobi.name = "graded Jacobi of the table".into();
    let mut realized = jacobi_check(&basis_triples());
    realized.name = "graded Jacobi of the Poisson bracket".into();
    let passed = constants.passed() && table_jacobi.passed() && realized.passed();
    let mut summary = vec![format!("table: {source}")];
    for r in [&constants, &table_jacobi, &realized] {
        summary.extend(report_lines(r));
    }
    Ok(Outcome {
        passed,
        summary,
        details: json!({
            "table": source,
            "structure_constants": to_value(&constants),
            "table_jacobi": to_value(&table_jacobi),
            "bracket_jacobi": to_value(&realized),
        }),
    })
}

const OMEGA: [Family; 2] = [Family::Omega, Family::OmegaTilde];
const RESONANT: [Family; 5] = [
    Family::Gamma,
    Family::GammaTilde,
    Family::BigGamma,
    Family::BigGammaTilde,
    Family::BigGammaBar,
];

/// Omega families use `d`, or `m/2` when only `m` is given. With `m`, the
/// gamma and Gamma families are limited to `k ≤ m`.
pub fn verify_cocycles(d: Option<Rational>, m: Option<u32>, range: KRange, families: &[Family]) -> Result<Outcome, CliError> {
    let explicit = !families.is_empty();
    let families: Vec<Family> = if explicit {
        families.to_vec()
    } else if d.is_some() {
        OMEGA.to_vec()
    } else if m.is_some() {
        RESONANT.to_vec()
    } else {
        return Err(fail("give --d, --m or --family"));
    };
    let d = d.or_else(|| m.map(|m| frac(m as i64, 2)));
    let mut ids = Vec::new();
    let mut skipped = Vec::new();
    for f in families {
        for k in range.lo..=range.hi {
            let id = match (&d, OMEGA.contains(&f)) {
                (Some(d), true) => CocycleId::omega(f, k, d.clone()),
                _ => CocycleId::new(f, k),
            };
            let problem = match (id.weights(), m) {
                (Err(e), _) => Some(e.to_string()),
                (Ok(_), Some(m)) if !OMEGA.contains(&f) && k > m as i64 => Some(format!("{id} does not occur for m = {m}")),
                _ => None,
            };
            match problem {
                None => ids.push(id),
                Some(reason) if explicit => return Err(fail(reason)),
                Some(_) => skipped.push(id.to_string()),
            }
        }
    }
    if ids.is_empty() {
        return Err(fail(format!("no applicable cocycles for k in {range}")));
    }
    let results: Vec<(String, bool)> = ids
        .par_iter()
        .map(|id| build_checked(id).map(|(_, ok)| (id.to_string(), ok)))
        .collect::<Result<_, _>>()?;
    let mut report = VerificationReport::new("cocycle condition");
    for (name, ok) in &results {
        report.record(*ok, name, "0", if *ok { "0" } else { "nonzero" });
    }
    if !skipped.is_empty() {
        report.note(format!("skipped (not applicable): {}", skipped.join(", ")));
    }
    Ok(Outcome {
        passed: report.passed(),
        summary: report_lines(&report),
        details: json!({
            "k": range.to_string(),
            "cocycles": results.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            "report": to_value(&report),
        }),
    })
}

fn law_failures(a: &SuperFunction, pa: Parity, b: &SuperFunction, pb: Parity, c: &SuperFunction) -> Vec<&'static str> {
    let mut failed = Vec::new();
    if a * b != (b * a).scale(&sign(pa.is_odd() && pb.is_odd())) {
        failed.push("supercommutativity");
    }
    if &(a * b) * c != a * &(b * c) {
        failed.push("associativity");
    }
    if a * &(b + c) != &(a * b) + &(a * c) {
        failed.push("distributivity");
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
    let (f, g, h) = (
        ContactElement::new(a.clone()).expect("homogeneous"),
        ContactElement::new(b.clone()).expect("homogeneous"),
        ContactElement::new(c.clone()).expect("homogeneous"),
    );
    let (fg, gf) = (poisson(&f, &g), poisson(&g, &f));
    if *fg.function() != gf.function().scale(&-sign(pa.is_odd() && pb.is_odd())) {
        failed.push("Poisson antisymmetry");
    }
    let term = |x: &ContactElement, y: &ContactElement, z: &ContactElement| {
        poisson(x, &poisson(y, z)).function().scale(&sign(x.parity().is_odd() && z.parity().is_odd()))
    };
    if !(&(&term(&f, &g, &h) + &term(&g, &h, &f)) + &term(&h, &f, &g)).is_zero() {
        failed.push("Poisson Jacobi");
    }
    failed
}

/// Samples are drawn sequentially from one seeded stream and checked in
/// parallel, so the report does not depend on the worker count.
pub fn verify_laws(seed: u64, cases: usize, cochains: usize) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<_> = (0..cases)
        .map(|_| {
            let (pa, pb, pc) = (sample::parity(&mut rng), sample::parity(&mut rng), sample::parity(&mut rng));
            (
                (sample::homogeneous(&mut rng, pa, 3), pa),
                (sample::homogeneous(&mut rng, pb, 3), pb),
                sample::homogeneous(&mut rng, pc, 2),
            )
        })
        .collect();
    let ws: Vec<_> = (0..cochains).map(|_| sample::cochain1(&mut rng, 2, 2)).collect();
    let law_results: Vec<Vec<&'static str>> = triples
        .par_iter()
        .map(|((a, pa), (b, pb), c)| law_failures(a, *pa, b, *pb, c))
        .collect();
    let delta_results: Vec<bool> = ws.par_iter().map(|w| is_2cocycle(&delta1(w))).collect();

    let mut laws = VerificationReport::new(format!("algebra laws on {cases} random triples (seed {seed})"));
    for (n, failed) in law_results.iter().enumerate() {
        laws.record(failed.is_empty(), format!("case {n}"), "all laws", failed.join(", "));
    }
    let mut delta = VerificationReport::new(format!("δ∘δ = 0 on {cochains} random 1-cochains (seed {seed})"));
    for (n, ok) in delta_results.iter().enumerate() {
        delta.record(*ok, format!("cochain {n}"), "0", if *ok { "0" } else { "nonzero" });
    }
    let mut summary = report_lines(&laws);
    summary.extend(report_lines(&delta));
    Ok(Outcome {
        passed: laws.passed() && delta.passed(),
        summary,
        details: json!({ "seed": seed, "laws": to_value(&laws), "delta_squared": to_value(&delta) }),
    })
}

fn render_relation(row: &BTreeMap<String, superdeform_core::rational::RationalString>) -> String {
    let lhs: Vec<String> = row.iter().map(|(name, c)| format!("{c}*{name}")).collect();
    format!("{} = 0", lhs.join(" + "))
}

fn certificate_lines(cert: &LinearCertificate) -> Vec<String> {
    let mut out = vec![format!(
        "status {:?}, {} unknowns, {} equations, rank {}, bounds ({}, {}){}",
        cert.status,
        cert.num_unknowns,
        cert.num_equations,
        cert.rank,
        cert.bounds.max_dx_order,
        cert.bounds.max_coeff_degree,
        if cert.escalated_from.is_some() { " after escalation" } else { "" }
    )];
    out.push(format!("scalars: {}", cert.scalars.join(", ")));
    out.push(format!("forced zero: {}", if cert.forced_zero.is_empty() { "none".into() } else { cert.forced_zero.join(", ") }));
    for row in &cert.scalar_relations {
        out.push(format!("relation: {}", render_relation(row)));
    }
    out.push(format!("independently verified: {}", cert.verified));
    out
}

/// Exit 0 iff every scalar is forced to zero; exit 2 if the certificate
/// could not be verified.
pub fn nontrivial(
    case: Case,
    d: Option<Rational>,
    m: Option<u32>,
    k: i64,
    bounds: Option<usize>,
    prune: bool,
    escalate: bool,
) -> Result<Outcome, CliError> {
    let mut spec = match bounds {
        Some(0) => return Err(CohomologyError::EmptyAnsatz.into()),
        Some(b) => AnsatzSpec::new(b, b),
        None => AnsatzSpec::for_k(k.max(0) as usize),
    };
    if prune {
        spec = spec.pruned();
    }
    if !escalate {
        spec = spec.without_escalation();
    }
    let (targets, setting) = match case {
        Case::Generic => {
            if m.is_some() {
                return Err(fail("--m belongs to the resonant case"));
            }
            let d = d.ok_or_else(|| fail("the generic case needs --d"))?;
            if twice_natural(&d).is_some() {
                return Err(fail(format!("d = {} is resonant (2d is a natural number)", format_rational(&d))));
            }
            if k < 0 {
                return Err(fail("the generic case needs k ≥ 0"));
            }
            let targets = vec![("a".to_string(), omega_cup(1, k, &d)?), ("b".to_string(), omega_cup(2, k, &d)?)];
            (targets, json!({ "case": "generic", "d": format_rational(&d), "k": k }))
        }
        Case::Resonant => {
            if d.is_some() {
                return Err(fail("the resonant case takes --m, not --d"));
            }
            let m = m.ok_or_else(|| fail("the resonant case needs --m"))?;
            if k < 1 || k > m as i64 {
                return Err(fail(format!("the resonant case needs 1 ≤ k ≤ m, got k = {k}, m = {m}")));
            }
            let targets = (1..=6).map(|i| Ok((format!("a{i}"), phi(i, k)?))).collect::<Result<Vec<_>, CliError>>()?;
            (targets, json!({ "case": "resonant", "m": m, "k": k }))
        }
    };
    let cert = solve_coboundary(&CoboundaryProblem::combination(targets)?, &spec)?;
    if !cert.verified {
        return Err(fail("no verified certificate within the ansatz bounds"));
    }
    Ok(Outcome {
        passed: cert.is_nontrivial(),
        summary: certificate_lines(&cert),
        details: json!({ "setting": setting, "certificate": to_value(&cert) }),
    })
}

fn load_params(path: &Path) -> Result<DeformationParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
    let p = DeformationParams::from_json(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    p.validate()?;
    Ok(p)
}

fn module_for(p: &DeformationParams, k: Option<usize>) -> Result<TruncatedSymbolModule, CliError> {
    Ok(match k {
        Some(k) => TruncatedSymbolModule::new(p.d.clone(), k)?,
        None => TruncatedSymbolModule::default_for(p),
    })
}

fn params_value(p: &DeformationParams) -> Value {
    serde_json::from_str(&p.to_json()).expect("parameters serialize")
}

pub fn deform_check(path: &Path, solve: bool, k: Option<usize>) -> Result<Outcome, CliError> {
    let p = load_params(path)?;
    let verdict = check_integrability(&p)?;
    let mut summary = vec![match &verdict {
        superdeform_core::deformation::Integrability::Integrable => "conditions: integrable".to_string(),
        superdeform_core::deformation::Integrability::Obstructed(v) => format!("conditions: obstructed ({})", v.join("; ")),
    }];
    let mut details = json!({ "params": params_value(&p), "integrability": to_value(&verdict) });
    if let Some(m) = p.resonance() {
        let mut table = serde_json::Map::new();
        for k in 1..=m as i64 {
            let row: serde_json::Map<String, Value> = RESONANT_CONDITIONS
                .iter()
                .zip(obstruction_coefficients(&p, k))
                .map(|(name, c)| (name.to_string(), Value::String(format_rational(&c))))
                .collect();
            table.insert(k.to_string(), Value::Object(row));
        }
        details["coefficients"] = Value::Object(table);
    }
    if solve {
        let module = module_for(&p, k)?;
        let s = solvability(&p, &module, None)?;
        summary.push(format!(
            "second-order obstruction on K = {}: {} nonzero blocks, coboundary: {}",
            module.k,
            s.blocks.len(),
            s.solvable
        ));
        for b in &s.blocks {
            summary.push(format!(
                "  block {} -> {}: {:?}, verified {}",
                b.source, b.target, b.certificate.status, b.certificate.verified
            ));
        }
        details["solvability"] = to_value(&s);
    }
    Ok(Outcome {
        passed: verdict.is_integrable(),
        summary,
        details,
    })
}

pub fn deform_verify(path: &Path, k: Option<usize>, force: bool) -> Result<Outcome, CliError> {
    let p = load_params(path)?;
    let module = module_for(&p, k)?;
    let result = if force { homomorphism_report(&p, &module) } else { verify_flat(&p, &module) };
    match result {
        Ok(report) => Ok(Outcome {
            passed: report.passed(),
            summary: report_lines(&report),
            details: json!({ "params": params_value(&p), "k": module.k, "report": to_value(&report) }),
        }),
        Err(DeformationError::Obstructed(v)) => Ok(Outcome {
            passed: false,
            summary: vec![format!("obstructed: {}", v.join("; "))],
            details: json!({ "params": params_value(&p), "k": module.k, "obstructed": v }),
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn catalog_dump(family: Family, k: i64, d: Option<Rational>) -> Result<Outcome, CliError> {
    let id = match d {
        Some(d) => CocycleId::omega(family, k, d),
        None => CocycleId::new(family, k),
    };
    let (s, t) = id.weights()?;
    let (c, ok) = build_checked(&id)?;
    let values: serde_json::Map<String, Value> = OspElement::ALL
        .iter()
        .map(|g| (g.to_string(), Value::String(c.value(*g).to_string())))
        .collect();
    let mut summary = vec![format!("{id}: F_{} -> F_{}", format_rational(&s), format_rational(&t))];
    summary.extend(OspElement::ALL.iter().map(|g| format!("{g} = {}: {}", g.hamiltonian(), c.value(*g))));
    summary.push(format!("cocycle: {ok}"));
    Ok(Outcome {
        passed: ok,
        summary,
        details: json!({
            "cocycle": id.to_string(),
            "source": format_rational(&s),
            "target": format_rational(&t),
            "is_cocycle": ok,
            "values": values,
        }),
    })
}

pub fn catalog_relations(k: i64) -> Result<Outcome, CliError> {
    let report = verify_cup_relations(k)?;
    Ok(Outcome {
        passed: report.passed(),
        summary: report_lines(&report),
        details: to_value(&report),
    })
}

/// Passes only when the literal transcription matches the cup product.
pub fn catalog_phi(i: usize, k: i64) -> Result<Outcome, CliError> {
    let r = crosscheck_printed_expansions(i, k)?;
    let mut summary = vec![
        format!("Phi{i} at k = {k}: transcription matches cup product: {}", r.matches),
        format!("transcription is a 2-cocycle: {}", r.printed_is_cocycle),
    ];
    summary.extend(r.discrepancies.iter().take(SHOWN_MISMATCHES).map(|d| format!("  {}: difference {}", d.pair, d.difference)));
    summary.extend(r.readings.iter().map(|x| format!("reading: {x}")));
    summary.extend(r.corrections.iter().map(|x| format!("correction: {x}")));
    if !r.corrections.is_empty() {
        summary.push(format!("corrected transcription matches: {}", r.corrected_matches));
    }
    Ok(Outcome {
        passed: r.matches,
        summary,
        details: to_value(&r),
    })
}
