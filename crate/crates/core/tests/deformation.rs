//! Infinitesimal deformations, the second-order obstruction and flatness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superdeform_core::cohomology::is_cocycle;
use superdeform_core::deformation::{
    build_l1, check_integrability, crosscheck_obstruction, homomorphism_report, obstruction2, obstruction_coefficients, solvability,
    verify_flat, window_slots, DeformationError, DeformationParams, Integrability, TruncatedSymbolModule,
};
use superdeform_core::rational::{frac, int, Rational};

fn resonant(m: u32) -> (DeformationParams, TruncatedSymbolModule) {
    let d = frac(m as i64, 2);
    (DeformationParams::new(d.clone()), TruncatedSymbolModule::new(d, 2 * m as usize + 2).unwrap())
}

fn violated(v: Integrability) -> Vec<String> {
    match v {
        Integrability::Integrable => Vec::new(),
        Integrability::Obstructed(list) => list,
    }
}

#[test]
fn zero_parameters_give_the_zero_map() {
    let (p, module) = resonant(2);
    let l1 = build_l1(&p, &module).unwrap();
    assert!(l1.blocks.is_empty() && l1.is_zero());
    assert!(obstruction2(&p, &module).unwrap().is_zero());
}

#[test]
fn a0_sits_on_component_zero() {
    let d = frac(1, 3);
    let p = DeformationParams::new(d.clone()).with('a', 0, int(1));
    let l1 = build_l1(&p, &TruncatedSymbolModule::new(d, 4).unwrap()).unwrap();
    assert_eq!(l1.blocks.keys().copied().collect::<Vec<_>>(), vec![(0, 0)]);
}

#[test]
fn c1_is_one_block_from_component_3_to_1() {
    let (p, module) = resonant(2);
    let l1 = build_l1(&p.with('c', 1, int(1)), &module).unwrap();
    assert_eq!(l1.blocks.keys().copied().collect::<Vec<_>>(), vec![(3, 1)]);
}

#[test]
fn blocks_outside_the_window_are_reported() {
    let d = frac(1, 3);
    let p = DeformationParams::new(d.clone()).with('a', 5, int(1));
    let l1 = build_l1(&p, &TruncatedSymbolModule::new(d, 3).unwrap()).unwrap();
    assert!(l1.blocks.is_empty());
    assert_eq!(l1.losses.len(), 1);
    assert_eq!(l1.losses[0].parameter, "a_5");
    assert_eq!(l1.losses[0].min_k, 5);
}

#[test]
fn truncation_must_reach_the_gamma_sources() {
    assert!(matches!(
        TruncatedSymbolModule::new(int(2), 3),
        Err(DeformationError::Truncation { k: 3, min: 8 })
    ));
    assert_eq!(TruncatedSymbolModule::default_for(&DeformationParams::new(int(1))).k, 6);
}

#[test]
fn index_sets_are_validated() {
    let generic = DeformationParams::new(frac(1, 3));
    assert!(generic.clone().with('a', -1, int(1)).validate().is_err());
    assert!(generic.clone().with('c', 1, int(1)).validate().is_err());
    let (p, module) = resonant(2);
    assert!(p.clone().with('b', 3, int(1)).validate().is_err());
    assert!(p.clone().with('e', 0, int(1)).validate().is_err());
    assert!(p.clone().with('a', -7, int(1)).validate().is_ok());
    let wrong_weight = DeformationParams::new(frac(3, 2));
    assert!(matches!(build_l1(&wrong_weight, &module), Err(DeformationError::WeightMismatch { .. })));
}

#[test]
fn first_order_term_is_a_cocycle_blockwise() {
    let p = DeformationParams::example(3, 8).with('b', 2, int(3)).with('d', 1, frac(1, 2));
    let l1 = build_l1(&p, &TruncatedSymbolModule::new(frac(3, 2), 8).unwrap()).unwrap();
    for (b, c) in &l1.blocks {
        assert!(is_cocycle(c), "block {b:?}");
    }
}

#[test]
fn generic_obstruction_vanishes_without_b() {
    let d = frac(7, 5);
    let module = TruncatedSymbolModule::new(d.clone(), 5).unwrap();
    let mut p = DeformationParams::new(d);
    for k in 0..=5 {
        p.set('a', k, frac(k + 1, 2));
    }
    assert!(obstruction2(&p, &module).unwrap().is_zero());
    let with_b = p.with('b', 2, int(1));
    assert!(!obstruction2(&with_b, &module).unwrap().is_zero());
}

#[test]
fn generic_conditions() {
    let p = DeformationParams::new(frac(1, 3)).with('b', 3, int(1));
    assert_eq!(violated(check_integrability(&p).unwrap()), vec!["b_3 ≠ 0".to_string()]);
    let p = DeformationParams::new(frac(1, 3)).with('b', 0, int(1));
    assert!(!check_integrability(&p).unwrap().is_integrable());
    let p = DeformationParams::new(frac(1, 3)).with('a', 4, int(9));
    assert_eq!(check_integrability(&p).unwrap(), Integrability::Integrable);
}

#[test]
fn resonant_conditions() {
    let (p, _) = resonant(2);
    let p = p.with('a', 1, int(1)).with('d', 1, int(1));
    assert_eq!(obstruction_coefficients(&p, 1), [int(1), int(0), int(0), int(0), int(0), int(0)]);
    let v = violated(check_integrability(&p).unwrap());
    assert_eq!(v, vec!["a_k d_k − c_k b_{−k} ≠ 0 (k = 1)".to_string()]);
    assert_eq!(check_integrability(&DeformationParams::example(2, 6)).unwrap(), Integrability::Integrable);
}

#[test]
fn example_has_zero_obstruction_and_is_flat() {
    for m in 1..=3u32 {
        let k = 2 * m as usize + 2;
        let p = DeformationParams::example(m, k);
        let module = TruncatedSymbolModule::new(frac(m as i64, 2), k).unwrap();
        assert!(obstruction2(&p, &module).unwrap().is_zero(), "m = {m}");
        let report = verify_flat(&p, &module).unwrap();
        assert!(report.passed(), "m = {m}: {:?}", report.mismatches.first());
    }
}

#[test]
fn verify_flat_refuses_obstructed_parameters() {
    let (p, module) = resonant(2);
    let p = p.with('a', 1, int(1)).with('d', 1, int(1));
    assert!(matches!(verify_flat(&p, &module), Err(DeformationError::Obstructed(_))));
}

fn sample(rng: &mut ChaCha8Rng, module: &TruncatedSymbolModule, density: f64) -> DeformationParams {
    let mut p = DeformationParams::new(module.d.clone());
    for slot in window_slots(module) {
        if rng.gen_bool(density) {
            p.set(slot.name, slot.k, int([-2, -1, 1, 2][rng.gen_range(0..4)]));
        }
    }
    p
}

/// With `L^{≥2} = 0`, the homomorphism identity holds exactly when
/// `½ L¹∨L¹` vanishes.
#[test]
fn flat_iff_obstruction_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut flat, mut not_flat) = (0, 0);
    for m in 1..=3u32 {
        let (_, module) = resonant(m);
        for _ in 0..12 {
            let p = sample(&mut rng, &module, 0.15);
            let zero = obstruction2(&p, &module).unwrap().is_zero();
            let report = homomorphism_report(&p, &module).unwrap();
            assert_eq!(report.passed(), zero, "m = {m}, {}", p.to_json());
            if zero {
                flat += 1;
            } else {
                not_flat += 1;
            }
        }
    }
    assert!(flat > 0 && not_flat > 0, "both outcomes sampled ({flat}, {not_flat})");
}

/// Accepted vectors with `b_k = 0` for `k ≠ 0`: `b = d = 0`, `c = e`,
/// `a_k = 2a_{−k}` where `c_k ≠ 0`, everything else random.
#[test]
fn accepted_vectors_without_off_zero_b_are_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in 1..=3u32 {
        let (p0, module) = resonant(m);
        for _ in 0..4 {
            let mut p = p0.clone();
            let mi = m as i64;
            for k in (mi - module.k as i64)..=mi {
                p.set('a', k, frac(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
            }
            p.set('b', 0, int(rng.gen_range(-2..=2)));
            for k in 1..=mi {
                if mi + k <= module.k as i64 && rng.gen_bool(0.7) {
                    let c = int(rng.gen_range(1..=3));
                    p.set('c', k, c.clone());
                    p.set('e', k, c);
                    let a = p.get('a', -k) * int(2);
                    p.set('a', k, a);
                }
            }
            assert!(check_integrability(&p).unwrap().is_integrable(), "{}", p.to_json());
            let report = verify_flat(&p, &module).unwrap();
            assert!(report.passed(), "{}: {:?}", p.to_json(), report.mismatches.first());
        }
    }
}

/// `b_{−1} = 1` passes the conditions, yet `½ L¹∨L¹ ≠ 0`: a flat deformation
/// needs a nonzero second-order term there. The obstruction is a coboundary.
#[test]
fn accepted_vector_that_is_not_flat_at_first_order() {
    let (p, module) = resonant(2);
    let p = p.with('b', -1, int(1));
    assert!(check_integrability(&p).unwrap().is_integrable());
    let obs = obstruction2(&p, &module).unwrap();
    assert!(!obs.is_zero());
    assert!(!verify_flat(&p, &module).unwrap().passed());
    assert!(solvability(&p, &module, None).unwrap().solvable);
}

/// `b_1 = d_1 = 1` fails the conditions (only `Φ_3` appears), but `Φ_3` is a
/// coboundary, so the obstruction is solvable.
#[test]
fn rejected_vector_with_solvable_obstruction() {
    let (p, module) = resonant(2);
    let p = p.with('b', 1, int(1)).with('d', 1, int(1));
    let coefs = obstruction_coefficients(&p, 1);
    assert_eq!(coefs[2], int(1));
    assert!(coefs.iter().enumerate().all(|(i, c)| i == 2 || *c == Rational::from(0)));
    assert!(!check_integrability(&p).unwrap().is_integrable());
    let s = solvability(&p, &module, None).unwrap();
    assert!(s.solvable);
    assert!(s.blocks.iter().all(|b| b.certificate.verified));
}

#[test]
fn non_solvable_obstruction_is_certified() {
    let (p, module) = resonant(2);
    let p = p.with('a', 1, int(1)).with('d', 1, int(1));
    let s = solvability(&p, &module, None).unwrap();
    assert!(!s.solvable);
    assert!(s.blocks.iter().all(|b| b.certificate.verified));
}

#[test]
fn obstruction_matches_the_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in [1u32, 2] {
        let (_, module) = resonant(m);
        for _ in 0..5 {
            let p = sample(&mut rng, &module, 0.3);
            let report = crosscheck_obstruction(&p, &module).unwrap();
            assert!(report.passed(), "{}: {:?}", p.to_json(), report.mismatches);
        }
    }
    let d = frac(5, 6);
    let module = TruncatedSymbolModule::new(d.clone(), 4).unwrap();
    let p = DeformationParams::new(d).with('a', 2, int(3)).with('b', 2, int(-1)).with('b', 1, int(2));
    assert!(crosscheck_obstruction(&p, &module).unwrap().passed());
}

#[test]
fn documented_json_example_parses() {
    let text = r#"{"d": "3/2", "a": {"0": "1"}, "b": {}, "c": {"1": "2"}, "d": {}, "e": {"1": "2"}}"#;
    let p = DeformationParams::from_json(text).unwrap();
    assert_eq!(p.d, frac(3, 2));
    assert_eq!(p.get('a', 0), int(1));
    assert_eq!(p.get('c', 1), int(2));
    assert_eq!(p.get('e', 1), int(2));
    assert!(p.validate().is_ok());
}

#[test]
fn json_round_trips_byte_for_byte() {
    let p = DeformationParams::example(2, 6).with('d', 2, frac(-3, 7)).with('b', 0, frac(1, 2));
    let json = p.to_json();
    let back = DeformationParams::from_json(&json).unwrap();
    assert_eq!(back, p);
    assert_eq!(back.to_json(), json);
    assert_eq!(DeformationParams::from_json(&p.to_json_pretty()).unwrap(), p);
}

#[test]
fn malformed_json_is_rejected() {
    for bad in [
        r#"{"d": "1", "a": {"0": "1.5"}}"#,
        r#"{"a": {"0": "1"}}"#,
        r#"{"d": "1", "f": {}}"#,
        r#"{"d": "1", "a": {"x": "1"}}"#,
        r#"{"d": "1", "d": "2"}"#,
        r#"{"d": "1", "d": {}, "d_k": {}}"#,
        r#"{"d": 0.5}"#,
    ] {
        assert!(DeformationParams::from_json(bad).is_err(), "{bad}");
    }
}
