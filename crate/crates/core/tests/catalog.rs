//! The cocycle catalog: cocycle conditions, weights, readings of the tilde
//! families, cup-product relations and the transcribed expansions.

use superdeform_core::catalog::{
    build, build_with, crosscheck_printed_expansions, dump, phi, printed_phi, verify_catalog, verify_cup_relations, CatalogError,
    CocycleId, Family, TildeReading, Transcription,
};
use superdeform_core::cohomology::{is_2cocycle, is_cocycle};
use superdeform_core::contact::OspElement;
use superdeform_core::grassmann::Parity;
use superdeform_core::rational::{frac, int};

#[test]
fn gamma_families_are_cocycles_for_negative_indices_too() {
    let ids: Vec<CocycleId> = (-4..=0)
        .flat_map(|k| [CocycleId::new(Family::Gamma, k), CocycleId::new(Family::GammaTilde, k)])
        .collect();
    let report = verify_catalog(&ids).unwrap();
    assert!(report.passed(), "{:?}", report.mismatches);
    assert_eq!(report.checked, 10);
}

#[test]
fn big_gamma_families_are_cocycles_up_to_k5() {
    for f in [Family::BigGamma, Family::BigGammaTilde, Family::BigGammaBar] {
        assert!(is_cocycle(&build(&CocycleId::new(f, 5)).unwrap()), "{f}_5");
    }
}

#[test]
fn every_catalog_cocycle_is_even() {
    for k in 1..=3 {
        for f in Family::ALL {
            let id = if matches!(f, Family::Omega | Family::OmegaTilde) {
                CocycleId::omega(f, k, frac(1, 3))
            } else {
                CocycleId::new(f, k)
            };
            assert_eq!(build(&id).unwrap().parity(), Parity::Even, "{id}");
        }
    }
}

#[test]
fn weights_of_each_family() {
    let id = CocycleId::omega(Family::Omega, 2, frac(1, 3));
    assert_eq!(id.weights().unwrap(), (frac(-2, 3), frac(-2, 3)));
    assert_eq!(CocycleId::new(Family::GammaTilde, -3).weights().unwrap(), (frac(-3, 2), frac(-3, 2)));
    assert_eq!(CocycleId::new(Family::BigGammaBar, 3).weights().unwrap(), (frac(-3, 2), frac(3, 2)));
}

#[test]
fn parameter_errors() {
    let gamma0 = CocycleId::new(Family::BigGamma, 0).weights();
    assert!(matches!(gamma0, Err(CatalogError::InvalidParameters { family: "Gamma", .. })));
    let no_d = CocycleId::new(Family::Omega, 1).weights();
    assert!(matches!(no_d, Err(CatalogError::InvalidParameters { .. })));
    let negative = CocycleId::omega(Family::OmegaTilde, -1, frac(1, 3)).weights();
    assert!(matches!(negative, Err(CatalogError::InvalidParameters { .. })));
    assert!(matches!("Delta".parse::<Family>(), Err(CatalogError::UnknownFamily(_))));
    assert!(matches!(phi(13, 1), Err(CatalogError::UnknownPhi(13))));
}

#[test]
fn tilde_prefactor_applies_to_the_zeroth_order_term_only() {
    let cases = [
        CocycleId::omega(Family::OmegaTilde, 0, frac(1, 3)),
        CocycleId::omega(Family::OmegaTilde, 2, frac(7, 5)),
        CocycleId::new(Family::GammaTilde, 2),
        CocycleId::new(Family::GammaTilde, -1),
    ];
    for id in cases {
        assert!(is_cocycle(&build_with(&id, TildeReading::Local).unwrap()), "{id} local");
        assert!(!is_cocycle(&build_with(&id, TildeReading::Global).unwrap()), "{id} global");
    }
    // With prefactor 1 the readings coincide.
    let unit = CocycleId::new(Family::GammaTilde, 1);
    let (local, global) = (
        build_with(&unit, TildeReading::Local).unwrap(),
        build_with(&unit, TildeReading::Global).unwrap(),
    );
    assert_eq!(local, global);
}

#[test]
fn cup_relations_hold_at_k4() {
    let report = verify_cup_relations(4).unwrap();
    assert!(report.passed(), "{:?}", report.mismatches);
    assert_eq!(report.checked, 6);
    assert!(verify_cup_relations(0).is_err());
}

#[test]
fn phi_lives_on_the_gamma_block() {
    let c = phi(2, 3).unwrap();
    assert_eq!(c.source_weight(), &frac(-3, 2));
    assert_eq!(c.target_weight(), &frac(3, 2));
    assert!(!c.is_zero());
    assert!(phi(7, 3).unwrap().is_zero());
}

#[test]
fn transcribed_expansions_agree_with_cup_products() {
    for k in 1..=3 {
        for i in [1, 2, 4, 6] {
            let r = crosscheck_printed_expansions(i, k).unwrap();
            assert!(r.matches, "Phi{i} at k = {k}: {:?}", r.discrepancies);
            assert!(r.printed_is_cocycle);
        }
        for i in [3, 5] {
            let r = crosscheck_printed_expansions(i, k).unwrap();
            assert!(!r.matches, "Phi{i} at k = {k} should need a correction");
            assert!(r.corrected_matches, "Phi{i} at k = {k}: corrected transcription");
            assert!(!r.corrections.is_empty());
            assert!(!r.printed_is_cocycle);
        }
    }
}

#[test]
fn corrected_transcription_is_a_2cocycle() {
    for i in 1..=6 {
        let (c, _) = printed_phi(i, 2, Transcription::Corrected).unwrap();
        assert!(is_2cocycle(&c), "Phi{i}");
        assert!(c.equals(&phi(i, 2).unwrap()).unwrap(), "Phi{i}");
    }
}

#[test]
fn discrepancy_report_serializes_rationals_as_strings() {
    let r = crosscheck_printed_expansions(3, 1).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["phi"], 3);
    assert!(json["discrepancies"].as_array().is_some_and(|a| !a.is_empty()));
    if let Some(p) = json.get("proportional") {
        assert!(p.is_string());
    }
}

#[test]
fn dump_lists_every_basis_element() {
    let text = dump(&CocycleId::new(Family::BigGammaTilde, 1)).unwrap();
    assert!(text.starts_with("Gamma_tilde_1: F_-1/2 -> F_1/2"));
    for g in OspElement::ALL {
        assert!(text.contains(&format!("  {g} = ")), "{g}");
    }
}

#[test]
fn scaling_a_cocycle_keeps_it_closed() {
    let c = build(&CocycleId::new(Family::BigGammaBar, 2)).unwrap();
    assert!(is_cocycle(&c.scale(&int(-7))));
}
