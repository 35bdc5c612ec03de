//! Weighted densities and differential operators between them.
//!
//! Operators are kept in the normal form `Σ a_α(x,θ) ∂^α` with coefficients
//! on the left and `∂^α = ∂_x^i ∂_1^j ∂_2^k` on the right. Applying `∂^α` to
//! a function means `∂_x^i(∂_1^j(∂_2^k f))`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Zero};

use crate::contact::ContactElement;
use crate::grassmann::{koszul, Parity, SuperFunction, Theta, ThetaMonomial};
use crate::rational::{binomial, format_rational, frac, int, sign, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OperatorError {
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: String, found: String },
    #[error("operator is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("normal-form and evaluation equality disagree for {0}")]
    EqualityDisagreement(String),
}

fn mismatch(expected: &Rational, found: &Rational) -> OperatorError {
    OperatorError::WeightMismatch {
        expected: format_rational(expected),
        found: format_rational(found),
    }
}

/// Exponents of `∂_x^i ∂_1^j ∂_2^k`; `j, k ∈ {0, 1}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct MultiIndex {
    pub dx: usize,
    pub d1: bool,
    pub d2: bool,
}

impl MultiIndex {
    pub const IDENTITY: MultiIndex = MultiIndex {
        dx: 0,
        d1: false,
        d2: false,
    };

    pub fn new(dx: usize, d1: bool, d2: bool) -> Self {
        Self { dx, d1, d2 }
    }

    pub fn parity(self) -> Parity {
        Parity::from_odd(self.d1 != self.d2)
    }

    /// Every index with `dx <= max_dx`, in lexicographic order.
    pub fn up_to(max_dx: usize) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(4 * (max_dx + 1));
        for dx in 0..=max_dx {
            for d1 in [false, true] {
                for d2 in [false, true] {
                    out.push(MultiIndex { dx, d1, d2 });
                }
            }
        }
        out
    }

    /// `∂^α f`.
    pub fn apply(self, f: &SuperFunction) -> SuperFunction {
        let mut g = f.clone();
        if self.d2 {
            g = g.d_theta(Theta::Two);
        }
        if self.d1 {
            g = g.d_theta(Theta::One);
        }
        for _ in 0..self.dx {
            g = g.d_x();
        }
        g
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dx^{} d1^{} d2^{}", self.dx, self.d1 as u8, self.d2 as u8)
    }
}

/// Elementary derivations used when normal-ordering.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Elementary {
    Dx,
    DTheta(Theta),
}

type Terms = BTreeMap<MultiIndex, SuperFunction>;

fn add_term(terms: &mut Terms, alpha: MultiIndex, c: SuperFunction) {
    if c.is_zero() {
        return;
    }
    match terms.get_mut(&alpha) {
        Some(existing) => {
            *existing += &c;
            if existing.is_zero() {
                terms.remove(&alpha);
            }
        }
        None => {
            terms.insert(alpha, c);
        }
    }
}

/// `D ∘ ∂^γ` in normal form, as `(sign, index)`; `None` when it vanishes.
fn prepend(d: Elementary, gamma: MultiIndex) -> Option<(bool, MultiIndex)> {
    match d {
        Elementary::Dx => Some((false, MultiIndex { dx: gamma.dx + 1, ..gamma })),
        Elementary::DTheta(Theta::One) => (!gamma.d1).then_some((false, MultiIndex { d1: true, ..gamma })),
        // ∂_2 ∂_1^j = (−1)^j ∂_1^j ∂_2
        Elementary::DTheta(Theta::Two) => (!gamma.d2).then_some((gamma.d1, MultiIndex { d2: true, ..gamma })),
    }
}

/// `D ∘ (Σ c_γ ∂^γ)` in normal form.
fn left_derive(d: Elementary, terms: &Terms) -> Terms {
    let mut out = Terms::new();
    for (&gamma, c) in terms {
        match d {
            Elementary::Dx => {
                add_term(&mut out, gamma, c.d_x());
                let (_, idx) = prepend(d, gamma).unwrap();
                add_term(&mut out, idx, c.clone());
            }
            Elementary::DTheta(i) => {
                add_term(&mut out, gamma, c.d_theta(i));
                if let Some((neg, idx)) = prepend(d, gamma) {
                    // Passing an odd derivation over the odd part of c flips sign.
                    let passed = &c.even_part() - &c.odd_part();
                    add_term(&mut out, idx, if neg { -passed } else { passed });
                }
            }
        }
    }
    out
}

fn compose_terms(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (&alpha, coef) in a {
        let mut inner = b.clone();
        if alpha.d2 {
            inner = left_derive(Elementary::DTheta(Theta::Two), &inner);
        }
        if alpha.d1 {
            inner = left_derive(Elementary::DTheta(Theta::One), &inner);
        }
        for _ in 0..alpha.dx {
            inner = left_derive(Elementary::Dx, &inner);
        }
        for (gamma, c) in inner {
            add_term(&mut out, gamma, coef * &c);
        }
    }
    out
}

/// A λ-density `f·α^λ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightedDensity {
    pub weight: Rational,
    pub f: SuperFunction,
}

impl WeightedDensity {
    pub fn new(weight: Rational, f: SuperFunction) -> Self {
        Self { weight, f }
    }
}

/// Differential operator from `F_λ` (source) to `F_μ` (target).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffOperator {
    source_weight: Rational,
    target_weight: Rational,
    terms: Terms,
}

impl DiffOperator {
    pub fn zero(source: Rational, target: Rational) -> Self {
        Self {
            source_weight: source,
            target_weight: target,
            terms: Terms::new(),
        }
    }

    pub fn from_terms(
        source: Rational,
        target: Rational,
        terms: impl IntoIterator<Item = (MultiIndex, SuperFunction)>,
    ) -> Self {
        let mut out = Self::zero(source, target);
        for (alpha, c) in terms {
            add_term(&mut out.terms, alpha, c);
        }
        out
    }

    pub fn identity(weight: Rational) -> Self {
        Self::multiplication(SuperFunction::one(), weight.clone(), weight)
    }

    pub fn multiplication(f: SuperFunction, source: Rational, target: Rational) -> Self {
        Self::from_terms(source, target, [(MultiIndex::IDENTITY, f)])
    }

    pub fn derivative(alpha: MultiIndex, source: Rational, target: Rational) -> Self {
        Self::from_terms(source, target, [(alpha, SuperFunction::one())])
    }

    /// `η̄_i = ∂_i − θ_i ∂_x`.
    pub fn eta_bar(i: Theta, source: Rational, target: Rational) -> Self {
        let d = match i {
            Theta::One => MultiIndex::new(0, true, false),
            Theta::Two => MultiIndex::new(0, false, true),
        };
        Self::from_terms(
            source,
            target,
            [
                (d, SuperFunction::one()),
                (MultiIndex::new(1, false, false), -SuperFunction::theta(i)),
            ],
        )
    }

    pub fn source_weight(&self) -> &Rational {
        &self.source_weight
    }

    pub fn target_weight(&self) -> &Rational {
        &self.target_weight
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, SuperFunction> {
        &self.terms
    }

    pub fn coefficient(&self, alpha: MultiIndex) -> Option<&SuperFunction> {
        self.terms.get(&alpha)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_dx_order(&self) -> usize {
        self.terms.keys().map(|a| a.dx).max().unwrap_or(0)
    }

    pub fn max_coeff_degree(&self) -> usize {
        self.terms
            .values()
            .filter_map(SuperFunction::max_x_degree)
            .max()
            .unwrap_or(0)
    }

    /// Same operator, relabelled between other density spaces.
    pub fn with_weights(&self, source: Rational, target: Rational) -> Self {
        Self {
            source_weight: source,
            target_weight: target,
            terms: self.terms.clone(),
        }
    }

    /// Parity of a homogeneous operator; zero counts as even.
    pub fn parity(&self) -> Result<Parity, OperatorError> {
        let mut found: Option<Parity> = None;
        for (alpha, c) in &self.terms {
            for (mono, _, _) in c.terms() {
                let p = mono.parity().plus(alpha.parity());
                match found {
                    None => found = Some(p),
                    Some(q) if q != p => return Err(OperatorError::NotHomogeneous(self.to_string())),
                    _ => {}
                }
            }
        }
        Ok(found.unwrap_or(Parity::Even))
    }

    /// Even and odd parts.
    pub fn split_parity(&self) -> (DiffOperator, DiffOperator) {
        let mut even = Self::zero(self.source_weight.clone(), self.target_weight.clone());
        let mut odd = even.clone();
        for (&alpha, c) in &self.terms {
            let (ce, co) = (c.even_part(), c.odd_part());
            if alpha.parity().is_odd() {
                add_term(&mut even.terms, alpha, co);
                add_term(&mut odd.terms, alpha, ce);
            } else {
                add_term(&mut even.terms, alpha, ce);
                add_term(&mut odd.terms, alpha, co);
            }
        }
        (even, odd)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.source_weight.clone(), self.target_weight.clone());
        if !c.is_zero() {
            for (&alpha, coef) in &self.terms {
                add_term(&mut out.terms, alpha, coef.scale(c));
            }
        }
        out
    }

    /// Left multiplication by a function: `f ∘ A`.
    pub fn premultiply(&self, f: &SuperFunction) -> Self {
        let mut out = Self::zero(self.source_weight.clone(), self.target_weight.clone());
        for (&alpha, coef) in &self.terms {
            add_term(&mut out.terms, alpha, f * coef);
        }
        out
    }

    fn check_same_weights(&self, other: &DiffOperator) -> Result<(), OperatorError> {
        if self.source_weight != other.source_weight {
            return Err(mismatch(&self.source_weight, &other.source_weight));
        }
        if self.target_weight != other.target_weight {
            return Err(mismatch(&self.target_weight, &other.target_weight));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &DiffOperator) -> Result<DiffOperator, OperatorError> {
        self.check_same_weights(other)?;
        let mut out = self.clone();
        for (&alpha, c) in &other.terms {
            add_term(&mut out.terms, alpha, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &DiffOperator) -> Result<DiffOperator, OperatorError> {
        self.checked_add(&-other)
    }

    /// `A(φ) = Σ a_α ∂^α(f)`, landing in the target weight.
    pub fn apply(&self, phi: &WeightedDensity) -> Result<WeightedDensity, OperatorError> {
        if phi.weight != self.source_weight {
            return Err(mismatch(&self.source_weight, &phi.weight));
        }
        Ok(WeightedDensity::new(self.target_weight.clone(), self.apply_fn(&phi.f)))
    }

    /// Application ignoring weights.
    pub fn apply_fn(&self, f: &SuperFunction) -> SuperFunction {
        let mut out = SuperFunction::zero();
        for (alpha, c) in &self.terms {
            out += &(c * &alpha.apply(f));
        }
        out
    }

    /// `self ∘ other`; requires `other.target == self.source`.
    pub fn compose(&self, other: &DiffOperator) -> Result<DiffOperator, OperatorError> {
        if other.target_weight != self.source_weight {
            return Err(mismatch(&self.source_weight, &other.target_weight));
        }
        Ok(DiffOperator {
            source_weight: other.source_weight.clone(),
            target_weight: self.target_weight.clone(),
            terms: compose_terms(&self.terms, &other.terms),
        })
    }

    /// Supercommutator `[A,B] = A∘B − (−1)^{|A||B|} B∘A` of operators on a
    /// single density space.
    pub fn supercommutator(&self, other: &DiffOperator) -> Result<DiffOperator, OperatorError> {
        let (pa, pb) = (self.parity()?, other.parity()?);
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.checked_sub(&ba.scale(&sign(koszul(pa, pb))))
    }

    /// Normal-form equality, cross-checked by evaluation on basis densities.
    pub fn op_equals(&self, other: &DiffOperator) -> Result<bool, OperatorError> {
        self.check_same_weights(other)?;
        let normal = self.terms == other.terms;
        let evaluated = self.evaluation_equals(other);
        if normal != evaluated {
            return Err(OperatorError::EqualityDisagreement(format!("{self} vs {other}")));
        }
        Ok(normal)
    }

    /// Equality by applying both operators to `x^p θ^ε` for every `p` up to
    /// operator order plus coefficient degree plus one.
    pub fn evaluation_equals(&self, other: &DiffOperator) -> bool {
        let bound = self.max_dx_order().max(other.max_dx_order())
            + self.max_coeff_degree().max(other.max_coeff_degree())
            + 1;
        basis_densities(bound)
            .iter()
            .all(|f| self.apply_fn(f) == other.apply_fn(f))
    }
}

/// `x^p θ^ε` for `p <= max_power` and all four θ-monomials.
pub fn basis_densities(max_power: usize) -> Vec<SuperFunction> {
    let mut out = Vec::with_capacity(4 * (max_power + 1));
    for p in 0..=max_power {
        for mono in ThetaMonomial::ALL {
            out.push(SuperFunction::monomial(Rational::one(), p, mono));
        }
    }
    out
}

impl Add for &DiffOperator {
    type Output = DiffOperator;
    /// Panics on a weight mismatch; use [`DiffOperator::checked_add`] to get
    /// an error instead.
    fn add(self, rhs: &DiffOperator) -> DiffOperator {
        self.checked_add(rhs).expect("adding operators between different weights")
    }
}

impl Sub for &DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: &DiffOperator) -> DiffOperator {
        self.checked_sub(rhs).expect("subtracting operators between different weights")
    }
}

impl Neg for &DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(alpha, c)| format!("({c}) * {alpha}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// The Lie derivative `𝔏^λ_f = f∂_x − ½(−1)^{|f|} Σ η̄_i(f) η̄_i + λ f'` on
/// `F_λ`, as an operator.
pub fn lie_operator(f: &ContactElement, weight: &Rational) -> DiffOperator {
    let h = f.function();
    let w = weight.clone();
    let mut op = DiffOperator::from_terms(
        w.clone(),
        w.clone(),
        [
            (MultiIndex::new(1, false, false), h.clone()),
            (MultiIndex::IDENTITY, h.d_x().scale(weight)),
        ],
    );
    let half = frac(-1, 2) * sign(f.parity().is_odd());
    for i in Theta::BOTH {
        let eta = DiffOperator::eta_bar(i, w.clone(), w.clone()).premultiply(&h.eta_bar(i).scale(&half));
        op = &op + &eta;
    }
    op
}

/// `𝔏^λ_f(g) = f g' − ½(−1)^{|f|} Σ η̄_i(f) η̄_i(g) + λ f' g`.
pub fn lie_density(f: &ContactElement, phi: &WeightedDensity) -> WeightedDensity {
    let h = f.function();
    let g = &phi.f;
    let mut out = &(h * &g.d_x()) + &(&h.d_x() * g).scale(&phi.weight);
    let half = frac(-1, 2) * sign(f.parity().is_odd());
    for i in Theta::BOTH {
        out += &(&h.eta_bar(i) * &g.eta_bar(i)).scale(&half);
    }
    WeightedDensity::new(phi.weight.clone(), out)
}

/// `f·A = 𝔏^μ_f ∘ A − (−1)^{|f||A|} A ∘ 𝔏^λ_f`, extended linearly over the
/// parity components of `A`.
pub fn module_action(f: &ContactElement, a: &DiffOperator) -> DiffOperator {
    let lie_src = lie_operator(f, &a.source_weight);
    let lie_tgt = lie_operator(f, &a.target_weight);
    let (even, odd) = a.split_parity();
    let mut out = DiffOperator::zero(a.source_weight.clone(), a.target_weight.clone());
    for (part, parity) in [(even, Parity::Even), (odd, Parity::Odd)] {
        if part.is_zero() {
            continue;
        }
        let left = lie_tgt.compose(&part).expect("weights line up");
        let right = part.compose(&lie_src).expect("weights line up");
        out = &out + &(&left - &right.scale(&sign(koszul(f.parity(), parity))));
    }
    out
}

/// Letters accepted by [`eta_word`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum WordLetter {
    EtaBar(Theta),
    Dx,
    DTheta(Theta),
    Mult(SuperFunction),
}

fn letter_terms(letter: &WordLetter) -> Terms {
    let zero = int(0);
    match letter {
        WordLetter::EtaBar(i) => DiffOperator::eta_bar(*i, zero.clone(), zero).terms,
        WordLetter::Dx => [(MultiIndex::new(1, false, false), SuperFunction::one())].into(),
        WordLetter::DTheta(Theta::One) => [(MultiIndex::new(0, true, false), SuperFunction::one())].into(),
        WordLetter::DTheta(Theta::Two) => [(MultiIndex::new(0, false, true), SuperFunction::one())].into(),
        WordLetter::Mult(f) => {
            let mut t = Terms::new();
            add_term(&mut t, MultiIndex::IDENTITY, f.clone());
            t
        }
    }
}

/// `η̄_i^n` via `η̄_i^{2m} = (−1)^m ∂_x^m`, `η̄_i^{2m+1} = (−1)^m ∂_x^m η̄_i`.
fn eta_power_terms(i: Theta, n: usize) -> Terms {
    let m = n / 2;
    let s = sign(m % 2 == 1);
    let dx = Terms::from([(MultiIndex::new(m, false, false), SuperFunction::constant(s))]);
    if n.is_multiple_of(2) {
        dx
    } else {
        compose_terms(&dx, &letter_terms(&WordLetter::EtaBar(i)))
    }
}

/// Normal-orders the product `w_1 ∘ w_2 ∘ … ∘ w_n`; runs of the same `η̄_i`
/// are reduced by the power rule before composing.
pub fn eta_word(word: &[WordLetter], source: Rational, target: Rational) -> DiffOperator {
    let mut acc = Terms::from([(MultiIndex::IDENTITY, SuperFunction::one())]);
    let mut idx = 0;
    while idx < word.len() {
        let piece = if let WordLetter::EtaBar(i) = word[idx] {
            let run = word[idx..]
                .iter()
                .take_while(|l| **l == WordLetter::EtaBar(i))
                .count();
            idx += run;
            eta_power_terms(i, run)
        } else {
            idx += 1;
            letter_terms(&word[idx - 1])
        };
        acc = compose_terms(&acc, &piece);
    }
    DiffOperator {
        source_weight: source,
        target_weight: target,
        terms: acc,
    }
}

/// `η̄_i^n` as an operator.
pub fn eta_power(i: Theta, n: usize, source: Rational, target: Rational) -> DiffOperator {
    DiffOperator {
        source_weight: source,
        target_weight: target,
        terms: eta_power_terms(i, n),
    }
}

/// Coefficient extraction used by the linear solver: `(α, θ-monomial, x^p)`.
pub fn coordinates(op: &DiffOperator) -> impl Iterator<Item = ((MultiIndex, ThetaMonomial, usize), &Rational)> {
    op.terms
        .iter()
        .flat_map(|(alpha, c)| c.terms().map(move |(m, p, v)| ((*alpha, m, p), v)))
}

/// `∂_x^n` acting on `x^p`: `p!/(p−n)! x^{p−n}`; exposed for tests.
pub fn falling_factorial(p: usize, n: usize) -> Rational {
    if n > p {
        return Rational::zero();
    }
    binomial(p, n) * (1..=n).fold(Rational::one(), |acc, v| acc * int(v as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::OspElement;

    fn sf(s: &str) -> SuperFunction {
        s.parse().unwrap()
    }

    fn ce(s: &str) -> ContactElement {
        ContactElement::new(sf(s)).unwrap()
    }

    fn lam() -> Rational {
        frac(1, 3)
    }

    #[test]
    fn lie_density_examples() {
        let l = frac(2, 5);
        let phi = WeightedDensity::new(l.clone(), sf("x"));
        assert_eq!(lie_density(&ce("1"), &phi).f, SuperFunction::one());
        let phi = WeightedDensity::new(l.clone(), sf("1"));
        assert_eq!(lie_density(&ce("x^2"), &phi).f, SuperFunction::x().scale(&(int(2) * &l)));
        assert!(lie_density(&ce("1"), &phi).f.is_zero());
        assert_eq!(lie_density(&ce("1"), &phi).weight, l);
    }

    #[test]
    fn lie_operator_matches_density_action() {
        for e in OspElement::ALL {
            let op = lie_operator(&e.element(), &lam());
            for f in basis_densities(4) {
                let phi = WeightedDensity::new(lam(), f);
                assert_eq!(op.apply(&phi).unwrap(), lie_density(&e.element(), &phi));
            }
        }
    }

    #[test]
    fn apply_examples() {
        let mu = frac(5, 2);
        let dx = DiffOperator::derivative(MultiIndex::new(1, false, false), lam(), mu.clone());
        let out = dx.apply(&WeightedDensity::new(lam(), sf("x^2"))).unwrap();
        assert_eq!(out, WeightedDensity::new(mu.clone(), sf("2*x")));

        let a = DiffOperator::from_terms(lam(), mu.clone(), [(MultiIndex::new(0, true, false), sf("t2"))]);
        let out = a.apply(&WeightedDensity::new(lam(), sf("t1"))).unwrap();
        assert_eq!(out.f, sf("t2"));

        assert!(matches!(
            a.apply(&WeightedDensity::new(mu, sf("t1"))),
            Err(OperatorError::WeightMismatch { .. })
        ));
    }

    #[test]
    fn compose_examples() {
        let l = lam();
        let d1 = DiffOperator::derivative(MultiIndex::new(0, true, false), l.clone(), l.clone());
        assert!(d1.compose(&d1).unwrap().is_zero());

        let eta = DiffOperator::eta_bar(Theta::One, l.clone(), l.clone());
        let minus_dx = DiffOperator::from_terms(l.clone(), l.clone(), [(MultiIndex::new(1, false, false), sf("-1"))]);
        assert_eq!(eta.compose(&eta).unwrap(), minus_dx);

        // θ1∘∂1 + ∂1∘θ1 = 1 (anticommutator of odd operators)
        let t1 = DiffOperator::multiplication(sf("t1"), l.clone(), l.clone());
        let a = t1.compose(&d1).unwrap();
        let b = d1.compose(&t1).unwrap();
        assert_ne!(a, b);
        assert_eq!(&a + &b, DiffOperator::identity(l.clone()));
        assert_eq!(t1.supercommutator(&d1).unwrap(), DiffOperator::identity(l));
    }

    #[test]
    fn compose_weight_check() {
        let a = DiffOperator::identity(int(1));
        let b = DiffOperator::identity(int(2));
        assert!(a.compose(&b).is_err());
    }

    #[test]
    fn eta_word_examples() {
        let z = int(0);
        let w = eta_word(&[WordLetter::EtaBar(Theta::One), WordLetter::EtaBar(Theta::One)], z.clone(), z.clone());
        assert_eq!(w, DiffOperator::from_terms(z.clone(), z.clone(), [(MultiIndex::new(1, false, false), sf("-1"))]));

        let cube = eta_word(&vec![WordLetter::EtaBar(Theta::Two); 3], z.clone(), z.clone());
        let dx = DiffOperator::derivative(MultiIndex::new(1, false, false), z.clone(), z.clone());
        let eta2 = DiffOperator::eta_bar(Theta::Two, z.clone(), z.clone());
        assert_eq!(cube, -&dx.compose(&eta2).unwrap());
        let naive = eta2.compose(&eta2).unwrap().compose(&eta2).unwrap();
        assert_eq!(cube, naive);

        let w = eta_word(&[WordLetter::Mult(sf("t1")), WordLetter::DTheta(Theta::Two)], z.clone(), z.clone());
        assert_eq!(w, DiffOperator::from_terms(z.clone(), z, [(MultiIndex::new(0, false, true), sf("t1"))]));
    }

    #[test]
    fn equality_examples() {
        let l = lam();
        let eta = DiffOperator::eta_bar(Theta::One, l.clone(), l.clone());
        let minus_dx = DiffOperator::from_terms(l.clone(), l.clone(), [(MultiIndex::new(1, false, false), sf("-1"))]);
        assert!(eta.op_equals(&eta).unwrap());
        assert!(eta.compose(&eta).unwrap().op_equals(&minus_dx).unwrap());

        let d1 = DiffOperator::derivative(MultiIndex::new(0, true, false), l.clone(), l.clone());
        let d2 = DiffOperator::derivative(MultiIndex::new(0, false, true), l.clone(), l.clone());
        let d12 = d1.compose(&d2).unwrap();
        let d21 = d2.compose(&d1).unwrap();
        assert!(!d12.op_equals(&d21).unwrap());
        assert_eq!(d12.apply_fn(&sf("t1t2")), sf("-1"));
        assert_eq!(d21.apply_fn(&sf("t1t2")), sf("1"));
        assert!(d12.op_equals(&DiffOperator::identity(int(0))).is_err());
    }

    #[test]
    fn module_action_examples() {
        let l = lam();
        // 1·mult(x) = [∂_x, x] = 1
        let mx = DiffOperator::multiplication(sf("x"), l.clone(), l.clone());
        let out = module_action(&ce("1"), &mx);
        assert_eq!(out, DiffOperator::identity(l.clone()));

        for e in OspElement::ALL {
            assert!(module_action(&e.element(), &DiffOperator::identity(l.clone())).is_zero());
        }

        // x·∂_x between equal weights, compared pointwise.
        let dx = DiffOperator::derivative(MultiIndex::new(1, false, false), l.clone(), l.clone());
        let f = ce("x");
        let out = module_action(&f, &dx);
        for g in basis_densities(5) {
            let phi = WeightedDensity::new(l.clone(), g);
            let lhs = out.apply(&phi).unwrap();
            let rhs = &lie_density(&f, &dx.apply(&phi).unwrap()).f - &dx.apply(&lie_density(&f, &phi)).unwrap().f;
            assert_eq!(lhs.f, rhs);
        }
        assert_eq!(out, -&dx);
    }

    #[test]
    fn parity_of_operators() {
        let l = lam();
        assert_eq!(DiffOperator::eta_bar(Theta::One, l.clone(), l.clone()).parity().unwrap(), Parity::Odd);
        let mixed = &DiffOperator::eta_bar(Theta::One, l.clone(), l.clone()) + &DiffOperator::identity(l);
        assert!(mixed.parity().is_err());
        let (e, o) = mixed.split_parity();
        assert_eq!(e.parity().unwrap(), Parity::Even);
        assert_eq!(o.parity().unwrap(), Parity::Odd);
    }

    #[test]
    fn rendering_is_lexicographic() {
        let l = lam();
        let op = DiffOperator::eta_bar(Theta::Two, l.clone(), l);
        assert_eq!(op.to_string(), "(1) * dx^0 d1^0 d2^1 + (-t2) * dx^1 d1^0 d2^0");
        assert_eq!(falling_factorial(5, 2), int(20));
    }
}
