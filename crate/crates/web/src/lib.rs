//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every entry point takes strings and returns a JSON document; rationals are
//! `"p/q"` strings. The `*_json` functions hold the logic and are plain Rust,
//! the exported wrappers only convert errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use superdeform_core::catalog::{build_checked, CocycleId, Family};
use superdeform_core::contact::{decompose, poisson, ContactElement};
use superdeform_core::deformation::{
    check_integrability, homomorphism_report, obstruction2, obstruction_coefficients, DeformationParams, TruncatedSymbolModule,
    RESONANT_CONDITIONS,
};
use superdeform_core::grassmann::{Parity, SuperFunction};
use superdeform_core::rational::{format_rational, parse_rational};

fn parity_name(p: Parity) -> &'static str {
    if p.is_odd() {
        "odd"
    } else {
        "even"
    }
}

fn element(text: &str) -> Result<ContactElement, String> {
    let f: SuperFunction = text.parse().map_err(|e| format!("{e}"))?;
    ContactElement::new(f).map_err(|e| format!("{text}: {e}"))
}

/// `{f, g}` for homogeneous `f`, `g`, with its osp(2|2) coordinates when the
/// result lies in the span of the basis.
pub fn poisson_json(f: &str, g: &str) -> Result<String, String> {
    let (f, g) = (element(f)?, element(g)?);
    let b = poisson(&f, &g);
    let coords = decompose(b.function()).map(|v| {
        v.iter()
            .map(|(e, c)| (e.to_string(), Value::String(format_rational(c))))
            .collect::<serde_json::Map<_, _>>()
    });
    let out = json!({
        "f": f.to_string(),
        "g": g.to_string(),
        "bracket": b.to_string(),
        "parity": if b.function().is_zero() { "even" } else { parity_name(b.parity()) },
        "osp_coordinates": coords,
    });
    Ok(out.to_string())
}

/// Values of a catalog cocycle on the eight basis elements and the result of
/// the cocycle check. `d` is only read by the omega families.
pub fn cocycle_json(family: &str, k: i64, d: &str) -> Result<String, String> {
    let family: Family = family.parse().map_err(|e| format!("{e}"))?;
    let id = if matches!(family, Family::Omega | Family::OmegaTilde) {
        CocycleId::omega(family, k, parse_rational(d).map_err(|e| e.to_string())?)
    } else {
        CocycleId::new(family, k)
    };
    let (s, t) = id.weights().map_err(|e| e.to_string())?;
    let (c, ok) = build_checked(&id).map_err(|e| e.to_string())?;
    let values: Vec<Value> = superdeform_core::contact::OspElement::ALL
        .iter()
        .map(|g| json!({ "element": g.to_string(), "hamiltonian": g.hamiltonian().to_string(), "value": c.value(*g).to_string() }))
        .collect();
    Ok(json!({
        "cocycle": id.to_string(),
        "source": format_rational(&s),
        "target": format_rational(&t),
        "is_cocycle": ok,
        "values": values,
    })
    .to_string())
}

/// Integrability verdict for a parameter document; with `flat`, also the
/// second-order obstruction and the homomorphism check on the default
/// truncation.
pub fn deformation_json(params: &str, flat: bool) -> Result<String, String> {
    let p = DeformationParams::from_json(params).map_err(|e| e.to_string())?;
    let verdict = check_integrability(&p).map_err(|e| e.to_string())?;
    let mut out = json!({
        "params": serde_json::from_str::<Value>(&p.to_json()).map_err(|e| e.to_string())?,
        "integrability": serde_json::to_value(&verdict).map_err(|e| e.to_string())?,
    });
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
        out["coefficients"] = Value::Object(table);
    }
    if flat {
        let module = TruncatedSymbolModule::default_for(&p);
        let obs = obstruction2(&p, &module).map_err(|e| e.to_string())?;
        let report = homomorphism_report(&p, &module).map_err(|e| e.to_string())?;
        out["truncation"] = json!(module.k);
        out["obstruction_nonzero_blocks"] = json!(obs.nonzero_blocks());
        out["homomorphism"] = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    }
    Ok(out.to_string())
}

#[wasm_bindgen]
pub fn poisson_bracket(f: &str, g: &str) -> Result<String, JsError> {
    poisson_json(f, g).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn catalog_cocycle(family: &str, k: i32, d: &str) -> Result<String, JsError> {
    cocycle_json(family, k as i64, d).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn check_deformation(params: &str, flat: bool) -> Result<String, JsError> {
    deformation_json(params, flat).map_err(|e| JsError::new(&e))
}
