//! The explicit 1-cocycles on density modules and the 2-cocycles obtained
//! from them by cup products.
//!
//! Juxtaposition in the cocycle formulas is read as follows: a factor built
//! from `f` alone (`f'`, `∂_2 f`, `η̄_2η̄_1 f`, …) is a multiplication
//! operator, and trailing `η̄_i` or `∂` symbols are composed derivations. In
//! `ω̃_k` the prefactor `2d − k` multiplies only the zeroth-order term
//! `η̄_1∂_2 f`; the alternative reading is kept as [`TildeReading::Global`]
//! and fails the cocycle test.

mod printed;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cohomology::{cup_with, is_cocycle, Cochain1, Cochain2, CohomologyError, CupConvention};
use crate::contact::OspElement;
use crate::grassmann::{Parity, SuperFunction, Theta};
use crate::operators::{eta_power, DiffOperator};
use crate::rational::{format_rational, frac, int, sign, twice_natural, Rational};
use crate::report::VerificationReport;

pub use printed::{crosscheck_printed_expansions, printed_phi, DiscrepancyReport, PairDiscrepancy, Transcription, PRINTED_PHI};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error("unknown cocycle family {0:?}")]
    UnknownFamily(String),
    #[error("{family} needs {requirement}")]
    InvalidParameters { family: &'static str, requirement: String },
    #[error("no 2-cocycle Φ_{0} (expected 1..=12)")]
    UnknownPhi(usize),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "omega_tilde")]
    OmegaTilde,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "gamma_tilde")]
    GammaTilde,
    #[serde(rename = "Gamma")]
    BigGamma,
    #[serde(rename = "Gamma_tilde")]
    BigGammaTilde,
    #[serde(rename = "Gamma_bar")]
    BigGammaBar,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Omega,
        Family::OmegaTilde,
        Family::Gamma,
        Family::GammaTilde,
        Family::BigGamma,
        Family::BigGammaTilde,
        Family::BigGammaBar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Omega => "omega",
            Family::OmegaTilde => "omega_tilde",
            Family::Gamma => "gamma",
            Family::GammaTilde => "gamma_tilde",
            Family::BigGamma => "Gamma",
            Family::BigGammaTilde => "Gamma_tilde",
            Family::BigGammaBar => "Gamma_bar",
        }
    }

    /// Families on a single density space `F_λ → F_λ`.
    pub fn is_diagonal(self) -> bool {
        !matches!(self, Family::BigGamma | Family::BigGammaTilde | Family::BigGammaBar)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CatalogError::UnknownFamily(s.to_string()))
    }
}

/// Which scope of the prefactor in `ω̃_k` / `γ̃_k` to use.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TildeReading {
    /// The prefactor multiplies only `η̄_1∂_2 f`.
    Local,
    /// The prefactor multiplies the whole expression.
    Global,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CocycleId {
    pub family: Family,
    pub k: i64,
    /// Only for the `omega` families.
    pub d: Option<Rational>,
}

impl CocycleId {
    pub fn new(family: Family, k: i64) -> Self {
        Self { family, k, d: None }
    }

    pub fn omega(family: Family, k: i64, d: Rational) -> Self {
        Self { family, k, d: Some(d) }
    }

    /// `(source, target)` weights.
    pub fn weights(&self) -> Result<(Rational, Rational), CatalogError> {
        let half_k = frac(self.k, 2);
        match self.family {
            Family::Omega | Family::OmegaTilde => {
                let d = self.d.clone().ok_or(CatalogError::InvalidParameters {
                    family: self.family.name(),
                    requirement: "a weight d".into(),
                })?;
                if twice_natural(&d).is_some() {
                    return Err(CatalogError::InvalidParameters {
                        family: self.family.name(),
                        requirement: format!("2d not a natural number (d = {})", format_rational(&d)),
                    });
                }
                if self.k < 0 {
                    return Err(CatalogError::InvalidParameters {
                        family: self.family.name(),
                        requirement: "k >= 0".into(),
                    });
                }
                let w = d - half_k;
                Ok((w.clone(), w))
            }
            Family::Gamma | Family::GammaTilde => Ok((half_k.clone(), half_k)),
            Family::BigGamma | Family::BigGammaTilde | Family::BigGammaBar => {
                if self.k < 1 {
                    return Err(CatalogError::InvalidParameters {
                        family: self.family.name(),
                        requirement: "k >= 1".into(),
                    });
                }
                Ok((-half_k.clone(), half_k))
            }
        }
    }

    /// The prefactor `2λ` of the tilde families (`2d − k`, resp. `k`).
    fn tilde_prefactor(&self) -> Rational {
        match &self.d {
            Some(d) => int(2) * d - int(self.k),
            None => int(self.k),
        }
    }
}

impl fmt::Display for CocycleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.family, self.k)?;
        if let Some(d) = &self.d {
            write!(f, " (d = {})", format_rational(d))?;
        }
        Ok(())
    }
}

fn mult(f: SuperFunction, s: &Rational, t: &Rational) -> DiffOperator {
    DiffOperator::multiplication(f, s.clone(), t.clone())
}

fn eta_pow(i: Theta, n: usize, s: &Rational, t: &Rational) -> DiffOperator {
    eta_power(i, n, s.clone(), t.clone())
}

fn then(a: DiffOperator, b: DiffOperator) -> DiffOperator {
    a.compose(&b).expect("same weights throughout")
}

/// `A_f ∘ η̄_1 ∘ η̄_2^n`.
fn with_eta12(a: DiffOperator, n: usize, s: &Rational, t: &Rational) -> DiffOperator {
    then(then(a, eta_pow(Theta::One, 1, s, t)), eta_pow(Theta::Two, n, s, t))
}

/// The value of a catalog cocycle on one homogeneous function `f`.
fn value_on(id: &CocycleId, reading: TildeReading, f: &SuperFunction, odd: bool, s: &Rational, t: &Rational) -> DiffOperator {
    // Weights are fixed by the caller; operators are built on (s, s) and
    // relabelled, since only the block matters for composition here.
    let (w, _) = (s, t);
    let sgn = sign(odd);
    let (one, two) = (Theta::One, Theta::Two);
    match id.family {
        Family::Omega | Family::Gamma => mult(f.d_x(), w, w),
        Family::GammaTilde if id.k == 0 => mult(f.eta_bar(two).eta_bar(one), w, w),
        Family::OmegaTilde | Family::GammaTilde => {
            let c = id.tilde_prefactor();
            let zeroth = mult(f.d_theta(two).eta_bar(one), w, w);
            let tail = &then(mult(f.d_theta(two), w, w), eta_pow(one, 1, w, w))
                + &then(
                    mult(&SuperFunction::theta(two) * &f.eta_bar(one).eta_bar(two), w, w),
                    eta_pow(two, 1, w, w),
                );
            match reading {
                TildeReading::Local => &zeroth.scale(&c) - &tail.scale(&sgn),
                TildeReading::Global => (&zeroth - &tail.scale(&sgn)).scale(&c),
            }
        }
        Family::BigGamma => {
            let n = 2 * id.k as usize - 1;
            with_eta12(mult(f.d_x(), w, w), n, w, w)
        }
        Family::BigGammaTilde => {
            let k = id.k as usize;
            let d2f = f.d_theta(two);
            let first = with_eta12(mult(d2f.eta_bar(one), w, w), 2 * k - 1, w, w).scale(&int(id.k));
            let second = then(mult(d2f.clone(), w, w), eta_pow(two, 2 * k + 1, w, w));
            let third = then(
                mult((&SuperFunction::theta(two) * &d2f).eta_bar(one), w, w),
                eta_pow(one, 2 * k + 1, w, w),
            );
            &first - &(&second - &third).scale(&sgn)
        }
        Family::BigGammaBar => {
            let k = id.k as usize;
            let fp = f.d_x();
            let mut op = (&then(mult(fp.eta_bar(two), w, w), eta_pow(one, 2 * k - 1, w, w))
                - &then(mult(fp.eta_bar(one), w, w), eta_pow(two, 2 * k - 1, w, w)))
                .scale(&sgn);
            if k >= 2 {
                let lead = with_eta12(mult(fp.d_x(), w, w), 2 * k - 3, w, w).scale(&int(id.k - 1));
                op = &lead + &op;
            }
            op
        }
    }
}

/// Builds a catalog cocycle with the standard reading.
pub fn build(id: &CocycleId) -> Result<Cochain1, CatalogError> {
    build_with(id, TildeReading::Local)
}

pub fn build_with(id: &CocycleId, reading: TildeReading) -> Result<Cochain1, CatalogError> {
    let (source, target) = id.weights()?;
    let mut out = Cochain1::zero(source.clone(), target.clone(), Parity::Even);
    for g in OspElement::ALL {
        let f = g.hamiltonian();
        let op = value_on(id, reading, &f, g.parity().is_odd(), &source, &source);
        out.set(g, op.with_weights(source.clone(), target.clone()))?;
    }
    Ok(out)
}

/// Builds and checks the cocycle condition.
pub fn build_checked(id: &CocycleId) -> Result<(Cochain1, bool), CatalogError> {
    let c = build(id)?;
    let ok = is_cocycle(&c);
    Ok((c, ok))
}

/// The factors `(a, b)` of `Φ_i = a ∨ b` at parameter `k`.
pub fn phi_factors(i: usize, k: i64) -> Result<(CocycleId, CocycleId), CatalogError> {
    use Family::*;
    let (a, ka, b, kb) = match i {
        1 => (Gamma, k, BigGammaTilde, k),
        2 => (Gamma, k, BigGammaBar, k),
        3 => (GammaTilde, k, BigGammaTilde, k),
        4 => (GammaTilde, k, BigGammaBar, k),
        5 => (BigGammaTilde, k, Gamma, -k),
        6 => (BigGammaBar, k, GammaTilde, -k),
        7 => (Gamma, k, BigGamma, k),
        8 => (BigGamma, k, GammaTilde, -k),
        9 => (BigGammaTilde, k, GammaTilde, -k),
        10 => (BigGamma, k, Gamma, -k),
        11 => (BigGammaBar, k, Gamma, -k),
        12 => (GammaTilde, k, BigGamma, k),
        _ => return Err(CatalogError::UnknownPhi(i)),
    };
    Ok((CocycleId::new(a, ka), CocycleId::new(b, kb)))
}

/// `Φ_i` at parameter `k`, computed as a cup product.
pub fn phi(i: usize, k: i64) -> Result<Cochain2, CatalogError> {
    phi_with(i, k, CupConvention::Standard)
}

pub fn phi_with(i: usize, k: i64, convention: CupConvention) -> Result<Cochain2, CatalogError> {
    let (a, b) = phi_factors(i, k)?;
    Ok(cup_with(&build(&a)?, &build(&b)?, convention)?)
}

/// `Ω_1 = ω_k ∨ ω̃_k` (`which = 1`) or `Ω_2 = ω̃_k ∨ ω̃_k` (`which = 2`).
pub fn omega_cup(which: usize, k: i64, d: &Rational) -> Result<Cochain2, CatalogError> {
    let w = build(&CocycleId::omega(Family::Omega, k, d.clone()))?;
    let wt = build(&CocycleId::omega(Family::OmegaTilde, k, d.clone()))?;
    let c = match which {
        1 => cup_with(&w, &wt, CupConvention::Standard)?,
        2 => cup_with(&wt, &wt, CupConvention::Standard)?,
        0 => cup_with(&w, &w, CupConvention::Standard)?,
        _ => return Err(CatalogError::UnknownPhi(which)),
    };
    Ok(c)
}

/// The relations among the twelve cup products:
/// `Φ7 = 0, Φ8 = −Φ1, Φ10 = −Φ2, Φ11 = −Φ2, Φ9 = −Φ3, Φ12 = Φ4 + Φ5`.
pub fn verify_cup_relations(k: i64) -> Result<VerificationReport, CatalogError> {
    verify_cup_relations_with(k, CupConvention::Standard)
}

pub fn verify_cup_relations_with(k: i64, convention: CupConvention) -> Result<VerificationReport, CatalogError> {
    if k < 1 {
        return Err(CatalogError::InvalidParameters {
            family: "Gamma",
            requirement: "k >= 1".into(),
        });
    }
    let phis: Vec<Cochain2> = (1..=12)
        .map(|i| phi_with(i, k, convention))
        .collect::<Result<_, _>>()?;
    let p = |i: usize| &phis[i - 1];
    let neg = |c: &Cochain2| c.scale(&int(-1));
    let zero = Cochain2::zero(
        p(1).source_weight().clone(),
        p(1).target_weight().clone(),
        Parity::Even,
    );
    let relations: Vec<(&str, &Cochain2, Cochain2)> = vec![
        ("Phi7 = 0", p(7), zero),
        ("Phi8 = -Phi1", p(8), neg(p(1))),
        ("Phi10 = -Phi2", p(10), neg(p(2))),
        ("Phi11 = -Phi2", p(11), neg(p(2))),
        ("Phi9 = -Phi3", p(9), neg(p(3))),
        ("Phi12 = Phi4 + Phi5", p(12), p(4).checked_add(p(5))?),
    ];
    let mut report = VerificationReport::new(format!("cup relations, k = {k}"));
    for (name, lhs, rhs) in relations {
        let ok = lhs.equals(&rhs)?;
        let diff = lhs.checked_sub(&rhs)?;
        let shown = if ok {
            "0".to_string()
        } else {
            format!("difference on {} pairs", diff.support().len())
        };
        report.record(ok, name, "0", shown);
    }
    Ok(report)
}

/// Checks the cocycle condition for every family on a parameter grid.
pub fn verify_catalog(ids: &[CocycleId]) -> Result<VerificationReport, CatalogError> {
    let mut report = VerificationReport::new("catalog cocycles");
    for id in ids {
        let (c, ok) = build_checked(id)?;
        let detail = if ok { "0".to_string() } else { format!("delta = nonzero on {}", c.source_weight()) };
        report.record(ok, id.to_string(), "0", detail);
    }
    Ok(report)
}

/// Renders the values on all eight basis elements.
pub fn dump(id: &CocycleId) -> Result<String, CatalogError> {
    let c = build(id)?;
    let (s, t) = id.weights()?;
    let mut out = format!(
        "{id}: F_{} -> F_{}\n",
        format_rational(&s),
        format_rational(&t)
    );
    for g in OspElement::ALL {
        out.push_str(&format!("  {g} = {}: {}\n", g.hamiltonian(), c.value(g)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{eta_word, WordLetter};

    #[test]
    fn gamma_on_h_is_minus_one() {
        let c = build(&CocycleId::new(Family::Gamma, 2)).unwrap();
        let w = int(1);
        assert_eq!(c.value(OspElement::H), &mult(SuperFunction::constant(int(-1)), &w, &w));
        assert!(c.value(OspElement::X).is_zero());
    }

    #[test]
    fn big_gamma_one_on_y() {
        let c = build(&CocycleId::new(Family::BigGamma, 1)).unwrap();
        let (s, t) = (frac(-1, 2), frac(1, 2));
        let expected = eta_word(
            &[
                WordLetter::Mult("-2*x".parse().unwrap()),
                WordLetter::EtaBar(Theta::One),
                WordLetter::EtaBar(Theta::Two),
            ],
            s,
            t,
        );
        assert_eq!(c.value(OspElement::Y), &expected);
        assert!(c.value(OspElement::X).is_zero());
    }

    #[test]
    fn omega_family_rejects_resonant_weight() {
        let id = CocycleId::omega(Family::Omega, 1, frac(3, 2));
        assert!(build(&id).is_err());
        assert!(build(&CocycleId::new(Family::BigGamma, 0)).is_err());
    }

    #[test]
    fn families_round_trip_names() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
    }
}
