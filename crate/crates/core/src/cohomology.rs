//! Cochains of osp(2|2) with values in differential operators, their
//! coboundaries, the cup product, and the exact coboundary solver.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::{basis_bracket, BasisVector, OspElement};
use crate::grassmann::{koszul, Parity, SuperFunction, ThetaMonomial};
use crate::linalg::LinearSystem;
use crate::operators::{coordinates, module_action, DiffOperator, MultiIndex, OperatorError};
use crate::rational::{format_rational, int, sign, Rational, RationalString};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohomologyError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("value at {element} has weights {found}, cochain has {expected}")]
    WeightMismatch {
        element: String,
        expected: String,
        found: String,
    },
    #[error("value at {element} has parity {found:?}, expected {expected:?}")]
    ParityMismatch {
        element: String,
        expected: Parity,
        found: Parity,
    },
    #[error("cup product of {a} and {b} is undefined: no composition of the value operators is defined")]
    Incomposable { a: String, b: String },
    #[error("cochains live on different blocks: {0}")]
    BlockMismatch(String),
    #[error("the ansatz is empty (no unknowns within the bounds)")]
    EmptyAnsatz,
}

fn weights_label(source: &Rational, target: &Rational) -> String {
    format!("{} -> {}", format_rational(source), format_rational(target))
}

/// All 64 brackets of basis elements, computed once from the Poisson bracket.
fn bracket_of(g: OspElement, h: OspElement) -> &'static BasisVector {
    static TABLE: OnceLock<Vec<BasisVector>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(64);
        for u in OspElement::ALL {
            for v in OspElement::ALL {
                out.push(basis_bracket(u, v));
            }
        }
        out
    });
    &table[8 * g.index() + h.index()]
}

fn bracket_coefficient(g: OspElement, h: OspElement, e: OspElement) -> Rational {
    bracket_of(g, h)
        .0
        .get(&e)
        .cloned()
        .unwrap_or_else(Rational::zero)
}

/// `(−x, 1, −x², 2θ_i, 2xθ_i, θ1θ2)` have x-degrees `(1, 0, 2, 0, 1, 0)`.
pub fn x_degree(g: OspElement) -> usize {
    match g {
        OspElement::H | OspElement::B1 | OspElement::B2 => 1,
        OspElement::Y => 2,
        _ => 0,
    }
}

/// Twice the eigenvalue of `ad H` on a basis element, up to the overall sign
/// convention: `x ↦ 1`, `θ ↦ 1/2`.
fn twice_degree(g: OspElement) -> i64 {
    match g {
        OspElement::X => 0,
        OspElement::A1 | OspElement::A2 => 1,
        OspElement::H | OspElement::C => 2,
        OspElement::B1 | OspElement::B2 => 3,
        OspElement::Y => 4,
    }
}

/// Twice the grading of the operator term `x^p θ^ε ∂^β` (`∂_x ↦ −1`,
/// `∂_i ↦ −1/2`).
fn twice_term_degree(beta: MultiIndex, mono: ThetaMonomial, power: usize) -> i64 {
    let theta = match mono {
        ThetaMonomial::One => 0,
        ThetaMonomial::T1 | ThetaMonomial::T2 => 1,
        ThetaMonomial::T12 => 2,
    };
    2 * power as i64 + theta - 2 * beta.dx as i64 - beta.d1 as i64 - beta.d2 as i64
}

/// Canonical pairs `(g, h)` with `g <= h` in the basis order.
pub fn canonical_pairs() -> impl Iterator<Item = (OspElement, OspElement)> {
    OspElement::ALL
        .into_iter()
        .flat_map(|g| OspElement::ALL.into_iter().filter(move |h| g <= *h).map(move |h| (g, h)))
}

fn pair_index(g: OspElement, h: OspElement) -> usize {
    let (i, j) = (g.index(), h.index());
    debug_assert!(i <= j);
    // Rows before i hold 8, 7, …, 8−i+1 entries.
    i * 8 - i * (i.saturating_sub(1)) / 2 + (j - i)
}

/// A homogeneous 1-cochain `ω: osp(2|2) → D_{λ,μ}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cochain1 {
    source: Rational,
    target: Rational,
    parity: Parity,
    values: Vec<DiffOperator>,
}

impl Cochain1 {
    pub fn zero(source: Rational, target: Rational, parity: Parity) -> Self {
        let values = vec![DiffOperator::zero(source.clone(), target.clone()); 8];
        Self {
            source,
            target,
            parity,
            values,
        }
    }

    /// Builds a cochain from its values, checking weights and that the value
    /// at `g` has parity `|ω| + |g|`.
    pub fn from_fn(
        source: Rational,
        target: Rational,
        parity: Parity,
        mut value: impl FnMut(OspElement) -> DiffOperator,
    ) -> Result<Self, CohomologyError> {
        let mut out = Self::zero(source, target, parity);
        for g in OspElement::ALL {
            out.set(g, value(g))?;
        }
        Ok(out)
    }

    pub fn set(&mut self, g: OspElement, op: DiffOperator) -> Result<(), CohomologyError> {
        if op.source_weight() != &self.source || op.target_weight() != &self.target {
            return Err(CohomologyError::WeightMismatch {
                element: g.label().to_string(),
                expected: weights_label(&self.source, &self.target),
                found: weights_label(op.source_weight(), op.target_weight()),
            });
        }
        let expected = self.parity.plus(g.parity());
        if !op.is_zero() {
            let found = op.parity()?;
            if found != expected {
                return Err(CohomologyError::ParityMismatch {
                    element: g.label().to_string(),
                    expected,
                    found,
                });
            }
        }
        self.values[g.index()] = op;
        Ok(())
    }

    pub fn value(&self, g: OspElement) -> &DiffOperator {
        &self.values[g.index()]
    }

    pub fn source_weight(&self) -> &Rational {
        &self.source
    }

    pub fn target_weight(&self) -> &Rational {
        &self.target
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(DiffOperator::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            parity: self.parity,
            values: self.values.iter().map(|v| v.scale(c)).collect(),
        }
    }

    pub fn checked_add(&self, other: &Cochain1) -> Result<Cochain1, CohomologyError> {
        self.check_block(&other.source, &other.target, other.parity)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    fn check_block(&self, source: &Rational, target: &Rational, parity: Parity) -> Result<(), CohomologyError> {
        if &self.source != source || &self.target != target || self.parity != parity {
            return Err(CohomologyError::BlockMismatch(format!(
                "{} ({:?}) vs {} ({:?})",
                weights_label(&self.source, &self.target),
                self.parity,
                weights_label(source, target),
                parity
            )));
        }
        Ok(())
    }

    /// The same values read between other density spaces.
    pub fn with_weights(&self, source: Rational, target: Rational) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|v| v.with_weights(source.clone(), target.clone()))
                .collect(),
            source,
            target,
            parity: self.parity,
        }
    }
}

impl fmt::Display for Cochain1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in OspElement::ALL {
            writeln!(f, "{g}: {}", self.value(g))?;
        }
        Ok(())
    }
}

/// A homogeneous, graded-antisymmetric 2-cochain; values are stored on the
/// pairs `g <= h` and the rest follow from `c(h,g) = −(−1)^{|g||h|} c(g,h)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cochain2 {
    source: Rational,
    target: Rational,
    parity: Parity,
    values: Vec<DiffOperator>,
}

impl Cochain2 {
    pub fn zero(source: Rational, target: Rational, parity: Parity) -> Self {
        let values = vec![DiffOperator::zero(source.clone(), target.clone()); 36];
        Self {
            source,
            target,
            parity,
            values,
        }
    }

    /// Builds the cochain from its values on canonical pairs.
    pub fn from_canonical(
        source: Rational,
        target: Rational,
        parity: Parity,
        mut value: impl FnMut(OspElement, OspElement) -> DiffOperator,
    ) -> Self {
        let mut out = Self::zero(source, target, parity);
        for (g, h) in canonical_pairs() {
            out.values[pair_index(g, h)] = value(g, h);
        }
        out
    }

    pub fn value(&self, g: OspElement, h: OspElement) -> DiffOperator {
        if g <= h {
            self.values[pair_index(g, h)].clone()
        } else {
            let s = -sign(koszul(g.parity(), h.parity()));
            self.values[pair_index(h, g)].scale(&s)
        }
    }

    pub fn canonical_value(&self, g: OspElement, h: OspElement) -> &DiffOperator {
        &self.values[pair_index(g, h)]
    }

    pub fn source_weight(&self) -> &Rational {
        &self.source
    }

    pub fn target_weight(&self) -> &Rational {
        &self.target
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(DiffOperator::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            values: self.values.iter().map(|v| v.scale(c)).collect(),
            ..self.clone()
        }
    }

    pub fn checked_add(&self, other: &Cochain2) -> Result<Cochain2, CohomologyError> {
        if self.source != other.source || self.target != other.target {
            return Err(CohomologyError::BlockMismatch(format!(
                "{} vs {}",
                weights_label(&self.source, &self.target),
                weights_label(&other.source, &other.target)
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn checked_sub(&self, other: &Cochain2) -> Result<Cochain2, CohomologyError> {
        self.checked_add(&other.scale(&-Rational::one()))
    }

    /// Pairwise `op_equals` on all canonical pairs.
    pub fn equals(&self, other: &Cochain2) -> Result<bool, CohomologyError> {
        let mut all = true;
        for (a, b) in self.values.iter().zip(&other.values) {
            all &= a.op_equals(b)?;
        }
        Ok(all)
    }

    /// Canonical pairs with a nonzero value.
    pub fn support(&self) -> Vec<(OspElement, OspElement)> {
        canonical_pairs()
            .filter(|&(g, h)| !self.canonical_value(g, h).is_zero())
            .collect()
    }
}

impl fmt::Display for Cochain2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, h) in canonical_pairs() {
            let v = self.canonical_value(g, h);
            if !v.is_zero() {
                writeln!(f, "({g},{h}): {v}")?;
            }
        }
        Ok(())
    }
}

/// `δA(g) = (−1)^{|g||A|} g·A`.
pub fn delta0(a: &DiffOperator) -> Result<Cochain1, CohomologyError> {
    let pa = a.parity()?;
    Cochain1::from_fn(a.source_weight().clone(), a.target_weight().clone(), pa, |g| {
        module_action(&g.element(), a).scale(&sign(koszul(g.parity(), pa)))
    })
}

/// `δω(g,h) = (−1)^{|g||ω|} g·ω(h) − (−1)^{|h|(|g|+|ω|)} h·ω(g) − ω([g,h])`
/// for any ordered pair.
pub fn delta1_value(w: &Cochain1, g: OspElement, h: OspElement) -> DiffOperator {
    let (pw, pg, ph) = (w.parity, g.parity(), h.parity());
    let first = module_action(&g.element(), w.value(h)).scale(&sign(koszul(pg, pw)));
    let second = module_action(&h.element(), w.value(g)).scale(&sign(koszul(ph, pg.plus(pw))));
    let mut out = &first - &second;
    for (e, c) in bracket_of(g, h).iter() {
        out = &out - &w.value(e).scale(c);
    }
    out
}

pub fn delta1(w: &Cochain1) -> Cochain2 {
    let pairs: Vec<_> = canonical_pairs().collect();
    let values: Vec<DiffOperator> = pairs.par_iter().map(|&(g, h)| delta1_value(w, g, h)).collect();
    Cochain2 {
        source: w.source.clone(),
        target: w.target.clone(),
        parity: w.parity,
        values,
    }
}

pub fn is_cocycle(w: &Cochain1) -> bool {
    delta1(w).is_zero()
}

fn value_on(c: &Cochain2, v: &BasisVector, h: OspElement) -> DiffOperator {
    let mut out = DiffOperator::zero(c.source.clone(), c.target.clone());
    for (e, coef) in v.iter() {
        out = &out + &c.value(e, h).scale(coef);
    }
    out
}

/// Degree-2 coboundary on one ordered triple:
///
/// ```text
/// δc(x,y,z) = (−1)^{|x||c|} x·c(y,z) − (−1)^{|y|(|x|+|c|)} y·c(x,z)
///           + (−1)^{|z|(|x|+|y|+|c|)} z·c(x,y) − c([x,y],z)
///           + (−1)^{|y||z|} c([x,z],y) − (−1)^{|x|(|y|+|z|)} c([y,z],x)
/// ```
pub fn delta2_value(c: &Cochain2, x: OspElement, y: OspElement, z: OspElement) -> DiffOperator {
    let (pc, px, py, pz) = (c.parity, x.parity(), y.parity(), z.parity());
    let act = |g: OspElement, a: OspElement, b: OspElement, odd: bool| {
        module_action(&g.element(), &c.value(a, b)).scale(&sign(odd))
    };
    let mut out = act(x, y, z, koszul(px, pc));
    out = &out - &act(y, x, z, koszul(py, px.plus(pc)));
    out = &out + &act(z, x, y, koszul(pz, px.plus(py).plus(pc)));
    out = &out - &value_on(c, bracket_of(x, y), z);
    out = &out + &value_on(c, bracket_of(x, z), y).scale(&sign(koszul(py, pz)));
    out = &out - &value_on(c, bracket_of(y, z), x).scale(&sign(koszul(px, py.plus(pz))));
    out
}

/// Checks `δc = 0` on every non-decreasing triple (enough by graded
/// antisymmetry of `δc`).
pub fn is_2cocycle(c: &Cochain2) -> bool {
    let mut triples = Vec::new();
    for x in OspElement::ALL {
        for y in OspElement::ALL.into_iter().filter(|y| *y >= x) {
            for z in OspElement::ALL.into_iter().filter(|z| *z >= y) {
                triples.push((x, y, z));
            }
        }
    }
    triples
        .par_iter()
        .all(|&(x, y, z)| delta2_value(c, x, y, z).is_zero())
}

/// Sign convention of the cup product; anything but `Standard` exists for
/// fault-injection tests.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CupConvention {
    Standard,
    FlipSecondTerm,
}

/// `(a∨b)(x,y) = (−1)^{|x||b|}[a(x),b(y)] + (−1)^{|a|(|x|+|b|)}[b(x),a(y)]`.
///
/// Values may live on different blocks; inside a supercommutator a
/// composition that is not defined contributes zero. At least one of `a∘b`,
/// `b∘a` must be defined.
pub fn cup(a: &Cochain1, b: &Cochain1) -> Result<Cochain2, CohomologyError> {
    cup_with(a, b, CupConvention::Standard)
}

pub fn cup_with(a: &Cochain1, b: &Cochain1, convention: CupConvention) -> Result<Cochain2, CohomologyError> {
    let ab = a.source == b.target;
    let ba = b.source == a.target;
    let (source, target) = match (ab, ba) {
        (false, false) => {
            return Err(CohomologyError::Incomposable {
                a: weights_label(&a.source, &a.target),
                b: weights_label(&b.source, &b.target),
            })
        }
        (true, false) => (b.source.clone(), a.target.clone()),
        (false, true) => (a.source.clone(), b.target.clone()),
        (true, true) => {
            if a.source != b.source {
                return Err(CohomologyError::BlockMismatch(format!(
                    "both compositions defined but land on different blocks: {} and {}",
                    weights_label(&a.source, &a.target),
                    weights_label(&b.source, &b.target)
                )));
            }
            (a.source.clone(), a.target.clone())
        }
    };
    let parity = a.parity.plus(b.parity);
    let flip = convention == CupConvention::FlipSecondTerm;
    let pairs: Vec<_> = canonical_pairs().collect();
    let values: Vec<DiffOperator> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let mut out = DiffOperator::zero(source.clone(), target.clone());
            // [P,Q] = P∘Q − (−1)^{|P||Q|} Q∘P, where P∘Q needs P.src = Q.tgt.
            let mut bracket = |p: &DiffOperator, pp: Parity, q: &DiffOperator, pq: Parity, outer: Rational| {
                if p.source_weight() == q.target_weight() {
                    let t = p.compose(q).expect("weights checked");
                    out = &out + &t.scale(&outer);
                }
                if q.source_weight() == p.target_weight() {
                    let t = q.compose(p).expect("weights checked");
                    out = &out - &t.scale(&(&outer * sign(koszul(pp, pq))));
                }
            };
            let (pa, pb, px, py) = (a.parity, b.parity, x.parity(), y.parity());
            bracket(
                a.value(x),
                pa.plus(px),
                b.value(y),
                pb.plus(py),
                sign(koszul(px, pb)),
            );
            let second = sign(koszul(pa, px.plus(pb))) * sign(flip);
            bracket(b.value(x), pb.plus(px), a.value(y), pa.plus(py), second);
            out
        })
        .collect();
    Ok(Cochain2 {
        source,
        target,
        parity,
        values,
    })
}

/// Finite slice of the coboundary ansatz: each `B(g)` is a sum of
/// `x^p θ^ε ∂^β` with `β_x <= max_dx_order` and
/// `p <= max_coeff_degree + deg_x(g)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub max_dx_order: usize,
    pub max_coeff_degree: usize,
    /// Keep only unknowns in the `ad H`-weight spaces met by the targets.
    /// The system splits along these weights, so this changes cost, not the
    /// answer.
    #[serde(default)]
    pub weight_pruning: bool,
    /// Retry once with larger bounds when the outcome is negative.
    #[serde(default = "default_true")]
    pub escalate: bool,
}

fn default_true() -> bool {
    true
}

impl AnsatzSpec {
    pub fn new(max_dx_order: usize, max_coeff_degree: usize) -> Self {
        Self {
            max_dx_order,
            max_coeff_degree,
            weight_pruning: false,
            escalate: true,
        }
    }

    /// Bounds `(k+3, k+3)`.
    pub fn for_k(k: usize) -> Self {
        Self::new(k + 3, k + 3)
    }

    pub fn pruned(mut self) -> Self {
        self.weight_pruning = true;
        self
    }

    pub fn without_escalation(mut self) -> Self {
        self.escalate = false;
        self
    }

    pub fn escalated(&self) -> Self {
        Self {
            max_dx_order: self.max_dx_order + 2,
            max_coeff_degree: self.max_coeff_degree + 2,
            ..*self
        }
    }
}

/// `δB = fixed + Σ s_i·targets_i` for an unknown 1-cochain `B` on the block
/// `source → target` and symbolic scalars `s_i`.
#[derive(Clone, Debug)]
pub struct CoboundaryProblem {
    pub source: Rational,
    pub target: Rational,
    pub parity: Parity,
    pub fixed: Option<Cochain2>,
    pub symbolic: Vec<(String, Cochain2)>,
}

impl CoboundaryProblem {
    /// Is `c` a coboundary?
    pub fn single(c: &Cochain2) -> Self {
        Self {
            source: c.source.clone(),
            target: c.target.clone(),
            parity: c.parity,
            fixed: Some(c.clone()),
            symbolic: Vec::new(),
        }
    }

    /// Which combinations `Σ s_i c_i` are coboundaries? All `c_i` must live
    /// on one block with one parity.
    pub fn combination(targets: Vec<(String, Cochain2)>) -> Result<Self, CohomologyError> {
        let first = targets.first().ok_or(CohomologyError::EmptyAnsatz)?.1.clone();
        for (_, c) in &targets {
            if c.source != first.source || c.target != first.target || c.parity != first.parity {
                return Err(CohomologyError::BlockMismatch(format!(
                    "{} vs {}",
                    weights_label(&first.source, &first.target),
                    weights_label(&c.source, &c.target)
                )));
            }
        }
        Ok(Self {
            source: first.source,
            target: first.target,
            parity: first.parity,
            fixed: None,
            symbolic: targets,
        })
    }

    fn targets(&self) -> impl Iterator<Item = &Cochain2> {
        self.fixed.iter().chain(self.symbolic.iter().map(|(_, c)| c))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum CertificateStatus {
    Solved,
    SolvedUnderdetermined,
    Inconsistent,
}

/// Outcome of [`solve_coboundary`], serializable to JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearCertificate {
    pub status: CertificateStatus,
    pub bounds: AnsatzSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escalated_from: Option<AnsatzSpec>,
    pub num_unknowns: usize,
    pub num_equations: usize,
    pub rank: usize,
    pub scalars: Vec<String>,
    pub forced_zero: Vec<String>,
    /// Linear relations the scalars satisfy in every solution; the key `"1"`
    /// is the constant term.
    pub scalar_relations: Vec<BTreeMap<String, RationalString>>,
    /// Scalar values used by the witness.
    pub scalar_values: BTreeMap<String, RationalString>,
    /// Witness rendered per basis element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, String>>,
    /// The witness reproduces the target, or every dual certificate checks
    /// out against independently recomputed coboundaries.
    pub verified: bool,
    #[serde(skip)]
    pub witness_cochain: Option<Cochain1>,
}

impl LinearCertificate {
    /// `true` when the combination can only be a coboundary with all scalars
    /// zero (or, with no scalars, when the fixed target is not one).
    pub fn is_nontrivial(&self) -> bool {
        match self.status {
            CertificateStatus::Inconsistent => true,
            _ => !self.scalars.is_empty() && self.forced_zero.len() == self.scalars.len(),
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.status != CertificateStatus::Inconsistent
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Coord {
    pair: usize,
    beta: MultiIndex,
    mono: ThetaMonomial,
    power: usize,
}

#[derive(Clone, Copy, Debug)]
struct Unit {
    g: OspElement,
    beta: MultiIndex,
    mono: ThetaMonomial,
    power: usize,
}

impl Unit {
    fn operator(&self, source: &Rational, target: &Rational) -> DiffOperator {
        DiffOperator::from_terms(
            source.clone(),
            target.clone(),
            [(self.beta, SuperFunction::monomial(Rational::one(), self.power, self.mono))],
        )
    }
}

fn cochain_coords(c: &Cochain2) -> Vec<(Coord, Rational)> {
    let mut out = Vec::new();
    for (g, h) in canonical_pairs() {
        let pair = pair_index(g, h);
        for ((beta, mono, power), v) in coordinates(c.canonical_value(g, h)) {
            out.push((Coord { pair, beta, mono, power }, v.clone()));
        }
    }
    out
}

fn twice_coord_weight(c: &Coord) -> i64 {
    let (g, h) = canonical_pairs().nth(c.pair).expect("pair index in range");
    twice_term_degree(c.beta, c.mono, c.power) - twice_degree(g) - twice_degree(h) + 2
}

fn enumerate_units(problem: &CoboundaryProblem, spec: &AnsatzSpec, weights: Option<&[i64]>) -> Vec<Unit> {
    let mut units = Vec::new();
    for g in OspElement::ALL {
        let wanted = problem.parity.plus(g.parity());
        for beta in MultiIndex::up_to(spec.max_dx_order) {
            for mono in ThetaMonomial::ALL {
                if mono.parity().plus(beta.parity()) != wanted {
                    continue;
                }
                for power in 0..=spec.max_coeff_degree + x_degree(g) {
                    if let Some(ws) = weights {
                        let w = twice_term_degree(beta, mono, power) - twice_degree(g);
                        if !ws.contains(&w) {
                            continue;
                        }
                    }
                    units.push(Unit { g, beta, mono, power });
                }
            }
        }
    }
    units
}

/// `δu` for the cochain with a single monomial `u` at one basis element,
/// as sparse coordinates.
fn unit_coboundary(u: &Unit, problem: &CoboundaryProblem) -> Vec<(Coord, Rational)> {
    let op = u.operator(&problem.source, &problem.target);
    let pw = problem.parity;
    let actions: Vec<DiffOperator> = OspElement::ALL
        .iter()
        .map(|g| module_action(&g.element(), &op))
        .collect();
    let mut out = Vec::new();
    for (g, h) in canonical_pairs() {
        let mut value = DiffOperator::zero(problem.source.clone(), problem.target.clone());
        if h == u.g {
            value = &value + &actions[g.index()].scale(&sign(koszul(g.parity(), pw)));
        }
        if g == u.g {
            value = &value - &actions[h.index()].scale(&sign(koszul(h.parity(), g.parity().plus(pw))));
        }
        let c = bracket_coefficient(g, h, u.g);
        if !c.is_zero() {
            value = &value - &op.scale(&c);
        }
        let pair = pair_index(g, h);
        for ((beta, mono, power), v) in coordinates(&value) {
            out.push((Coord { pair, beta, mono, power }, v.clone()));
        }
    }
    out
}

struct Assembled {
    units: Vec<Unit>,
    coords: Vec<Coord>,
    system: LinearSystem,
}

fn assemble(problem: &CoboundaryProblem, spec: &AnsatzSpec) -> Result<Assembled, CohomologyError> {
    let target_coords: Vec<Vec<(Coord, Rational)>> = problem.targets().map(cochain_coords).collect();
    let weights: Option<Vec<i64>> = spec.weight_pruning.then(|| {
        let mut ws: Vec<i64> = target_coords
            .iter()
            .flatten()
            .map(|(c, _)| twice_coord_weight(c))
            .collect();
        ws.sort_unstable();
        ws.dedup();
        ws
    });
    let units = enumerate_units(problem, spec, weights.as_deref());
    if units.is_empty() {
        return Err(CohomologyError::EmptyAnsatz);
    }
    let columns: Vec<Vec<(Coord, Rational)>> = units.par_iter().map(|u| unit_coboundary(u, problem)).collect();

    let n = units.len();
    let mut system = LinearSystem::new(n, problem.symbolic.len()).with_provenance();
    let mut rows: BTreeMap<Coord, Vec<(usize, Rational)>> = BTreeMap::new();
    for (j, col) in columns.into_iter().enumerate() {
        for (c, v) in col {
            rows.entry(c).or_default().push((j, v));
        }
    }
    let mut k = 0;
    if problem.fixed.is_some() {
        let constant = system.constant_column();
        for (c, v) in &target_coords[0] {
            rows.entry(*c).or_default().push((constant, -v));
        }
        k = 1;
    }
    for (s, coords) in target_coords[k..].iter().enumerate() {
        let col = system.scalar_column(s);
        for (c, v) in coords {
            rows.entry(*c).or_default().push((col, -v));
        }
    }
    let mut coords = Vec::with_capacity(rows.len());
    for (c, entries) in rows {
        system.add_equation(entries);
        coords.push(c);
    }
    Ok(Assembled { units, coords, system })
}

fn combination_of(problem: &CoboundaryProblem, scalars: &[Rational]) -> Cochain2 {
    let mut out = problem
        .fixed
        .clone()
        .unwrap_or_else(|| Cochain2::zero(problem.source.clone(), problem.target.clone(), problem.parity));
    for ((_, c), s) in problem.symbolic.iter().zip(scalars) {
        out = out.checked_add(&c.scale(s)).expect("targets share a block");
    }
    out
}

/// `Σ_e y_e · coord_e(c)`.
fn pair_functional(y: &BTreeMap<usize, Rational>, coords: &[Coord], value: impl Fn(usize) -> DiffOperator) -> Rational {
    let mut by_pair: BTreeMap<usize, Vec<(&Coord, &Rational)>> = BTreeMap::new();
    for (e, w) in y {
        by_pair.entry(coords[*e].pair).or_default().push((&coords[*e], w));
    }
    let mut total = Rational::zero();
    for (pair, entries) in by_pair {
        let op = value(pair);
        for (c, w) in entries {
            if let Some(coef) = op.coefficient(c.beta) {
                total += w * coef.component(c.mono).coeff(c.power);
            }
        }
    }
    total
}

/// Re-checks a dual certificate `y` with coboundaries recomputed through
/// [`delta1_value`]: `y` must annihilate `δ` of every unknown, and pair with
/// the targets as `expect` prescribes (`expect[i]` nonzero or zero).
fn verify_dual(
    y: &BTreeMap<usize, Rational>,
    assembled: &Assembled,
    problem: &CoboundaryProblem,
    expect_nonzero: &[bool],
) -> bool {
    let pairs: Vec<(OspElement, OspElement)> = canonical_pairs().collect();
    let annihilates = assembled.units.par_iter().all(|u| {
        let mut w = Cochain1::zero(problem.source.clone(), problem.target.clone(), problem.parity);
        w.values[u.g.index()] = u.operator(&problem.source, &problem.target);
        pair_functional(y, &assembled.coords, |p| {
            let (g, h) = pairs[p];
            delta1_value(&w, g, h)
        })
        .is_zero()
    });
    annihilates
        && problem.targets().zip(expect_nonzero).all(|(c, nonzero)| {
            let v = pair_functional(y, &assembled.coords, |p| c.values[p].clone());
            v.is_zero() != *nonzero
        })
}

/// One solve at fixed bounds.
pub fn solve_at(problem: &CoboundaryProblem, spec: &AnsatzSpec) -> Result<LinearCertificate, CohomologyError> {
    let assembled = assemble(problem, spec)?;
    let system = &assembled.system;
    let sol = system.solve();
    let names: Vec<String> = problem.symbolic.iter().map(|(n, _)| n.clone()).collect();
    let has_fixed = problem.fixed.is_some();
    let num_targets = names.len() + has_fixed as usize;

    let mut cert = LinearCertificate {
        status: CertificateStatus::Inconsistent,
        bounds: *spec,
        escalated_from: None,
        num_unknowns: system.num_unknowns(),
        num_equations: system.num_equations(),
        rank: sol.rank,
        scalars: names.clone(),
        forced_zero: sol.forced_zero.iter().map(|&s| names[s].clone()).collect(),
        scalar_relations: sol
            .scalar_relations
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(&s, v)| {
                        let key = names.get(s).cloned().unwrap_or_else(|| "1".to_string());
                        (key, RationalString(v.clone()))
                    })
                    .collect()
            })
            .collect(),
        scalar_values: BTreeMap::new(),
        witness: None,
        verified: false,
        witness_cochain: None,
    };

    if !sol.consistent {
        let mut expect = vec![false; num_targets];
        expect[0] = true;
        cert.verified = sol
            .infeasibility
            .as_ref()
            .is_some_and(|y| has_fixed && verify_dual(y, &assembled, problem, &expect));
        return Ok(cert);
    }

    let mut witness = Cochain1::zero(problem.source.clone(), problem.target.clone(), problem.parity);
    for (u, x) in assembled.units.iter().zip(&sol.unknowns) {
        if !x.is_zero() {
            let i = u.g.index();
            witness.values[i] = &witness.values[i] + &u.operator(&problem.source, &problem.target).scale(x);
        }
    }
    let expected = combination_of(problem, &sol.scalars);
    let mut verified = delta1(&witness).equals(&expected)?;
    for s in &sol.forced_zero {
        let mut expect = vec![false; num_targets];
        expect[*s + has_fixed as usize] = true;
        verified &= sol
            .forced_zero_certificates
            .get(s)
            .is_some_and(|y| verify_dual(y, &assembled, problem, &expect));
    }

    cert.status = if sol.free_unknowns == 0 {
        CertificateStatus::Solved
    } else {
        CertificateStatus::SolvedUnderdetermined
    };
    cert.scalar_values = names
        .iter()
        .zip(&sol.scalars)
        .map(|(n, v)| (n.clone(), RationalString(v.clone())))
        .collect();
    cert.witness = Some(
        OspElement::ALL
            .iter()
            .map(|g| (g.label().to_string(), witness.value(*g).to_string()))
            .collect(),
    );
    cert.witness_cochain = Some(witness);
    cert.verified = verified;
    Ok(cert)
}

/// Solves `δB = fixed + Σ s_i T_i` within `spec`. A negative outcome
/// (inconsistent, or some scalar forced to zero) is re-derived once with
/// larger bounds when `spec.escalate` is set; the larger-bound certificate is
/// returned.
pub fn solve_coboundary(problem: &CoboundaryProblem, spec: &AnsatzSpec) -> Result<LinearCertificate, CohomologyError> {
    let cert = solve_at(problem, spec)?;
    let negative = cert.status == CertificateStatus::Inconsistent || !cert.forced_zero.is_empty();
    if !(negative && spec.escalate) {
        return Ok(cert);
    }
    let mut bigger = solve_at(problem, &spec.escalated())?;
    bigger.escalated_from = Some(*spec);
    Ok(bigger)
}

/// Scalar vectors satisfying all relations of a certificate: the combination
/// with these scalars is a coboundary within the certificate's ansatz.
pub fn satisfies_relations(cert: &LinearCertificate, values: &BTreeMap<String, Rational>) -> bool {
    cert.scalar_relations.iter().all(|row| {
        row.iter()
            .map(|(name, c)| {
                let v = if name == "1" {
                    int(1)
                } else {
                    values.get(name).cloned().unwrap_or_else(Rational::zero)
                };
                &c.0 * v
            })
            .sum::<Rational>()
            .is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::Theta;
    use crate::operators::{eta_word, WordLetter};
    use crate::rational::frac;

    fn sf(s: &str) -> SuperFunction {
        s.parse().unwrap()
    }

    #[test]
    fn pair_indexing_is_dense() {
        let idx: Vec<usize> = canonical_pairs().map(|(g, h)| pair_index(g, h)).collect();
        assert_eq!(idx, (0..36).collect::<Vec<_>>());
    }

    #[test]
    fn delta0_of_identity_vanishes() {
        let l = frac(1, 3);
        assert!(delta0(&DiffOperator::identity(l)).unwrap().is_zero());
    }

    #[test]
    fn delta0_of_mult_x_at_one() {
        let l = frac(2, 5);
        let a = DiffOperator::multiplication(SuperFunction::x(), l.clone(), l.clone());
        let w = delta0(&a).unwrap();
        // X = 1 acts by ∂_x, so X·x = [∂_x, x] = 1.
        assert_eq!(w.value(OspElement::X), &DiffOperator::identity(l));
    }

    #[test]
    fn delta_squared_vanishes_on_samples() {
        let l = frac(1, 3);
        let m = frac(-1, 2);
        for a in [
            DiffOperator::multiplication(sf("x^2*t1t2 + 3"), l.clone(), m.clone()),
            eta_word(&[WordLetter::Mult(sf("x*t1")), WordLetter::EtaBar(Theta::Two)], l.clone(), m.clone()),
            DiffOperator::derivative(MultiIndex::new(2, true, false), l.clone(), m.clone()),
        ] {
            let w = delta0(&a).unwrap();
            assert!(is_cocycle(&w), "δδ({a}) ≠ 0");
        }
    }

    #[test]
    fn delta1_is_graded_antisymmetric() {
        let l = frac(1, 3);
        let w = Cochain1::from_fn(l.clone(), l.clone(), Parity::Even, |g| {
            let f = g.hamiltonian();
            DiffOperator::multiplication(f.d_x(), l.clone(), l.clone())
        })
        .unwrap();
        for g in OspElement::ALL {
            for h in OspElement::ALL {
                let s = -sign(koszul(g.parity(), h.parity()));
                assert_eq!(delta1_value(&w, g, h), delta1_value(&w, h, g).scale(&s));
            }
        }
    }

    #[test]
    fn incomposable_cup_is_an_error() {
        let a = Cochain1::zero(int(0), int(1), Parity::Even);
        let b = Cochain1::zero(int(2), int(3), Parity::Even);
        assert!(matches!(cup(&a, &b), Err(CohomologyError::Incomposable { .. })));
    }

    #[test]
    fn coboundary_round_trip() {
        let l = frac(1, 3);
        // A genuine coboundary of a non-cocycle.
        let b = Cochain1::from_fn(l.clone(), l.clone(), Parity::Even, |g| {
            if g == OspElement::Y {
                DiffOperator::derivative(MultiIndex::new(1, false, false), l.clone(), l.clone())
            } else {
                DiffOperator::zero(l.clone(), l.clone())
            }
        })
        .unwrap();
        let target = delta1(&b);
        assert!(!target.is_zero());
        let cert = solve_coboundary(&CoboundaryProblem::single(&target), &AnsatzSpec::new(2, 2)).unwrap();
        assert!(cert.is_consistent());
        assert!(cert.verified);
    }
}
