//! Random generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use superdeform_core::cohomology::Cochain1;
use superdeform_core::contact::OspElement;
use superdeform_core::grassmann::{Parity, SuperFunction, ThetaMonomial, XPoly};
use superdeform_core::operators::{DiffOperator, MultiIndex};
use superdeform_core::rational::{frac, int, Rational};

pub const MONOMIALS: [ThetaMonomial; 4] = [ThetaMonomial::One, ThetaMonomial::T1, ThetaMonomial::T2, ThetaMonomial::T12];

pub fn rational(rng: &mut ChaCha8Rng) -> Rational {
    let den = [1, 1, 1, 2, 3][rng.gen_range(0..5)];
    frac(rng.gen_range(-4..=4), den)
}

pub fn xpoly(rng: &mut ChaCha8Rng, max_degree: usize) -> XPoly {
    let coeffs = (0..=max_degree)
        .map(|_| if rng.gen_bool(0.5) { rational(rng) } else { int(0) })
        .collect();
    XPoly::from_coeffs(coeffs)
}

pub fn superfunction(rng: &mut ChaCha8Rng, max_degree: usize) -> SuperFunction {
    SuperFunction::new(
        xpoly(rng, max_degree),
        xpoly(rng, max_degree),
        xpoly(rng, max_degree),
        xpoly(rng, max_degree),
    )
}

pub fn homogeneous(rng: &mut ChaCha8Rng, parity: Parity, max_degree: usize) -> SuperFunction {
    let f = superfunction(rng, max_degree);
    match parity {
        Parity::Even => f.even_part(),
        Parity::Odd => f.odd_part(),
    }
}

pub fn parity(rng: &mut ChaCha8Rng) -> Parity {
    Parity::from_odd(rng.gen_bool(0.5))
}

/// A random operator of the given parity with `∂_x` order `<= order` and
/// coefficient degree `<= degree`.
pub fn operator(rng: &mut ChaCha8Rng, source: &Rational, target: &Rational, p: Parity, order: usize, degree: usize) -> DiffOperator {
    let terms: Vec<(MultiIndex, SuperFunction)> = MultiIndex::up_to(order)
        .into_iter()
        .filter_map(|alpha| {
            if rng.gen_bool(0.4) {
                Some((alpha, homogeneous(rng, p.plus(alpha.parity()), degree)))
            } else {
                None
            }
        })
        .collect();
    DiffOperator::from_terms(source.clone(), target.clone(), terms)
}

pub fn cochain1(rng: &mut ChaCha8Rng, source: &Rational, target: &Rational, p: Parity, order: usize, degree: usize) -> Cochain1 {
    Cochain1::from_fn(source.clone(), target.clone(), p, |g: OspElement| {
        operator(rng, source, target, p.plus(g.parity()), order, degree)
    })
    .expect("parity-correct values")
}

pub fn weights(rng: &mut ChaCha8Rng) -> (Rational, Rational) {
    const W: [(i64, i64); 5] = [(1, 3), (5, 6), (7, 5), (-1, 2), (1, 2)];
    let (a, b) = W[rng.gen_range(0..W.len())];
    let (c, e) = W[rng.gen_range(0..W.len())];
    (frac(a, b), frac(c, e))
}
