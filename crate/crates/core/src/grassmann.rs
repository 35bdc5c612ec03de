//! Supercommutative functions on R^{1|2} with polynomial coefficients.
//!
//! A [`SuperFunction`] is `f0 + f1*t1 + f2*t2 + f12*t1t2` where each
//! component is an [`XPoly`] in the even coordinate `x` and `t1`, `t2` are the
//! odd coordinates. Monomials are always kept in the order `t1t2`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, int, parse_rational, Rational};

/// Univariate polynomial in `x` with exact rational coefficients, lowest
/// degree first. Never carries trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct XPoly {
    coeffs: Vec<Rational>,
}

impl XPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn monomial(c: Rational, power: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); power + 1];
        coeffs[power] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> Rational {
        self.coeffs.get(power).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, c)| c * int(p as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }
}

impl Add for &XPoly {
    type Output = XPoly;
    fn add(self, rhs: &XPoly) -> XPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        XPoly::from_coeffs((0..n).map(|p| self.coeff(p) + rhs.coeff(p)).collect())
    }
}

impl Sub for &XPoly {
    type Output = XPoly;
    fn sub(self, rhs: &XPoly) -> XPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        XPoly::from_coeffs((0..n).map(|p| self.coeff(p) - rhs.coeff(p)).collect())
    }
}

impl Neg for &XPoly {
    type Output = XPoly;
    fn neg(self) -> XPoly {
        XPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &XPoly {
    type Output = XPoly;
    fn mul(self, rhs: &XPoly) -> XPoly {
        if self.is_zero() || rhs.is_zero() {
            return XPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        XPoly::from_coeffs(out)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_odd(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Sum in Z/2.
    pub fn plus(self, other: Parity) -> Parity {
        Parity::from_odd(self.is_odd() != other.is_odd())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// `(-1)^{|a||b|}` as a boolean "is negative".
pub fn koszul(a: Parity, b: Parity) -> bool {
    a.is_odd() && b.is_odd()
}

/// One of the two odd coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Theta {
    One,
    Two,
}

impl Theta {
    pub const BOTH: [Theta; 2] = [Theta::One, Theta::Two];

    pub fn index(self) -> usize {
        match self {
            Theta::One => 1,
            Theta::Two => 2,
        }
    }
}

impl TryFrom<usize> for Theta {
    type Error = GrassmannError;
    fn try_from(i: usize) -> Result<Self, Self::Error> {
        match i {
            1 => Ok(Theta::One),
            2 => Ok(Theta::Two),
            other => Err(GrassmannError::BadThetaIndex(other)),
        }
    }
}

/// Basis of the exterior part: `1, t1, t2, t1t2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum ThetaMonomial {
    One,
    T1,
    T2,
    T12,
}

impl ThetaMonomial {
    pub const ALL: [ThetaMonomial; 4] = [
        ThetaMonomial::One,
        ThetaMonomial::T1,
        ThetaMonomial::T2,
        ThetaMonomial::T12,
    ];

    pub fn parity(self) -> Parity {
        match self {
            ThetaMonomial::One | ThetaMonomial::T12 => Parity::Even,
            ThetaMonomial::T1 | ThetaMonomial::T2 => Parity::Odd,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ThetaMonomial::One => "1",
            ThetaMonomial::T1 => "t1",
            ThetaMonomial::T2 => "t2",
            ThetaMonomial::T12 => "t1t2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrassmannError {
    #[error("parity of a non-homogeneous function: {0}")]
    NotHomogeneous(String),
    #[error("odd coordinate index {0} out of range (expected 1 or 2)")]
    BadThetaIndex(usize),
    #[error("cannot parse superfunction {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct SuperFunction {
    pub f0: XPoly,
    pub f1: XPoly,
    pub f2: XPoly,
    pub f12: XPoly,
}

impl SuperFunction {
    pub fn new(f0: XPoly, f1: XPoly, f2: XPoly, f12: XPoly) -> Self {
        Self { f0, f1, f2, f12 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, ThetaMonomial::One)
    }

    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1, ThetaMonomial::One)
    }

    pub fn theta(i: Theta) -> Self {
        let mono = match i {
            Theta::One => ThetaMonomial::T1,
            Theta::Two => ThetaMonomial::T2,
        };
        Self::monomial(Rational::one(), 0, mono)
    }

    pub fn theta12() -> Self {
        Self::monomial(Rational::one(), 0, ThetaMonomial::T12)
    }

    /// `c * x^power * mono`.
    pub fn monomial(c: Rational, power: usize, mono: ThetaMonomial) -> Self {
        let mut f = Self::zero();
        *f.component_mut(mono) = XPoly::monomial(c, power);
        f
    }

    pub fn component(&self, mono: ThetaMonomial) -> &XPoly {
        match mono {
            ThetaMonomial::One => &self.f0,
            ThetaMonomial::T1 => &self.f1,
            ThetaMonomial::T2 => &self.f2,
            ThetaMonomial::T12 => &self.f12,
        }
    }

    pub fn component_mut(&mut self, mono: ThetaMonomial) -> &mut XPoly {
        match mono {
            ThetaMonomial::One => &mut self.f0,
            ThetaMonomial::T1 => &mut self.f1,
            ThetaMonomial::T2 => &mut self.f2,
            ThetaMonomial::T12 => &mut self.f12,
        }
    }

    pub fn is_zero(&self) -> bool {
        ThetaMonomial::ALL.iter().all(|&m| self.component(m).is_zero())
    }

    pub fn max_x_degree(&self) -> Option<usize> {
        ThetaMonomial::ALL
            .iter()
            .filter_map(|&m| self.component(m).degree())
            .max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|p| p.scale(c))
    }

    fn map(&self, mut op: impl FnMut(&XPoly) -> XPoly) -> Self {
        Self {
            f0: op(&self.f0),
            f1: op(&self.f1),
            f2: op(&self.f2),
            f12: op(&self.f12),
        }
    }

    pub fn even_part(&self) -> Self {
        Self::new(self.f0.clone(), XPoly::zero(), XPoly::zero(), self.f12.clone())
    }

    pub fn odd_part(&self) -> Self {
        Self::new(XPoly::zero(), self.f1.clone(), self.f2.clone(), XPoly::zero())
    }

    /// Parity of a homogeneous function. Zero counts as even.
    pub fn parity(&self) -> Result<Parity, GrassmannError> {
        let has_even = !self.f0.is_zero() || !self.f12.is_zero();
        let has_odd = !self.f1.is_zero() || !self.f2.is_zero();
        match (has_even, has_odd) {
            (true, true) => Err(GrassmannError::NotHomogeneous(self.to_string())),
            (false, true) => Ok(Parity::Odd),
            _ => Ok(Parity::Even),
        }
    }

    /// `∂/∂x`, componentwise.
    pub fn d_x(&self) -> Self {
        self.map(XPoly::derivative)
    }

    /// Left derivative `∂/∂θ_i`.
    pub fn d_theta(&self, i: Theta) -> Self {
        match i {
            Theta::One => Self::new(self.f1.clone(), XPoly::zero(), self.f12.clone(), XPoly::zero()),
            Theta::Two => Self::new(self.f2.clone(), -&self.f12, XPoly::zero(), XPoly::zero()),
        }
    }

    /// `η̄_i = ∂_i − θ_i ∂_x`.
    pub fn eta_bar(&self, i: Theta) -> Self {
        &self.d_theta(i) - &(&Self::theta(i) * &self.d_x())
    }

    /// Evaluation of the even body at a point: only meaningful for tests.
    pub fn eval_component(&self, mono: ThetaMonomial, x: &Rational) -> Rational {
        self.component(mono).eval(x)
    }

    /// Iterates over nonzero `(mono, power, coeff)` triples.
    pub fn terms(&self) -> impl Iterator<Item = (ThetaMonomial, usize, &Rational)> + '_ {
        ThetaMonomial::ALL.into_iter().flat_map(move |m| {
            self.component(m)
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(p, c)| (m, p, c))
        })
    }
}

impl Add for &SuperFunction {
    type Output = SuperFunction;
    fn add(self, rhs: &SuperFunction) -> SuperFunction {
        SuperFunction::new(
            &self.f0 + &rhs.f0,
            &self.f1 + &rhs.f1,
            &self.f2 + &rhs.f2,
            &self.f12 + &rhs.f12,
        )
    }
}

impl Add for SuperFunction {
    type Output = SuperFunction;
    fn add(self, rhs: SuperFunction) -> SuperFunction {
        &self + &rhs
    }
}

impl AddAssign<&SuperFunction> for SuperFunction {
    fn add_assign(&mut self, rhs: &SuperFunction) {
        *self = &*self + rhs;
    }
}

impl Sub for &SuperFunction {
    type Output = SuperFunction;
    fn sub(self, rhs: &SuperFunction) -> SuperFunction {
        SuperFunction::new(
            &self.f0 - &rhs.f0,
            &self.f1 - &rhs.f1,
            &self.f2 - &rhs.f2,
            &self.f12 - &rhs.f12,
        )
    }
}

impl Sub for SuperFunction {
    type Output = SuperFunction;
    fn sub(self, rhs: SuperFunction) -> SuperFunction {
        &self - &rhs
    }
}

impl Neg for &SuperFunction {
    type Output = SuperFunction;
    fn neg(self) -> SuperFunction {
        self.map(|p| -p)
    }
}

impl Neg for SuperFunction {
    type Output = SuperFunction;
    fn neg(self) -> SuperFunction {
        -&self
    }
}

impl Mul for &SuperFunction {
    type Output = SuperFunction;
    fn mul(self, rhs: &SuperFunction) -> SuperFunction {
        let (a, b) = (self, rhs);
        SuperFunction::new(
            &a.f0 * &b.f0,
            &(&a.f0 * &b.f1) + &(&a.f1 * &b.f0),
            &(&a.f0 * &b.f2) + &(&a.f2 * &b.f0),
            // θ2θ1 = −θ1θ2
            &(&(&a.f0 * &b.f12) + &(&a.f12 * &b.f0)) + &(&(&a.f1 * &b.f2) - &(&a.f2 * &b.f1)),
        )
    }
}

impl Mul for SuperFunction {
    type Output = SuperFunction;
    fn mul(self, rhs: SuperFunction) -> SuperFunction {
        &self * &rhs
    }
}

impl fmt::Display for SuperFunction {
    /// Grouped by θ-monomial (`1, t1, t2, t1t2`), descending x-degree inside a
    /// group, e.g. `3/2*x^2 + x*t1 - t1t2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for mono in ThetaMonomial::ALL {
            let poly = self.component(mono);
            for (p, c) in poly.coeffs().iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let negative = c.is_negative();
                if first {
                    if negative {
                        f.write_str("-")?;
                    }
                } else {
                    f.write_str(if negative { " - " } else { " + " })?;
                }
                first = false;
                let abs = c.abs();
                let mut factors: Vec<String> = Vec::new();
                let bare = p == 0 && mono == ThetaMonomial::One;
                if !abs.is_one() || bare {
                    factors.push(format_rational(&abs));
                }
                match p {
                    0 => {}
                    1 => factors.push("x".into()),
                    _ => factors.push(format!("x^{p}")),
                }
                if mono != ThetaMonomial::One {
                    factors.push(mono.label().into());
                }
                f.write_str(&factors.join("*"))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SuperFunction {
    type Err = GrassmannError;

    /// Accepts the rendering format plus arbitrary factor order, e.g.
    /// `2*x*t1 - 1/2*t2*t1 + 3`.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| GrassmannError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(fail("empty input"));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        for (idx, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && !(idx > 0 && compact[..idx].ends_with('^')) {
                if !current.is_empty() {
                    terms.push((negative, std::mem::take(&mut current)));
                } else if idx > 0 {
                    return Err(fail("dangling sign"));
                }
                negative = ch == '-';
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(fail("trailing sign"));
        }
        terms.push((negative, current));

        let mut total = SuperFunction::zero();
        for (negative, term) in terms {
            let mut value = SuperFunction::one();
            for factor in term.split('*') {
                let piece = match factor {
                    "" => return Err(fail("empty factor")),
                    "x" => SuperFunction::x(),
                    "t1" => SuperFunction::theta(Theta::One),
                    "t2" => SuperFunction::theta(Theta::Two),
                    "t1t2" => SuperFunction::theta12(),
                    "t2t1" => -SuperFunction::theta12(),
                    other => {
                        if let Some(exp) = other.strip_prefix("x^") {
                            let power: usize = exp.parse().map_err(|_| fail("bad exponent"))?;
                            SuperFunction::monomial(Rational::one(), power, ThetaMonomial::One)
                        } else {
                            let c = parse_rational(other).map_err(|e| fail(&e.to_string()))?;
                            SuperFunction::constant(c)
                        }
                    }
                };
                value = &value * &piece;
            }
            if negative {
                value = -value;
            }
            total += &value;
        }
        Ok(total)
    }
}
