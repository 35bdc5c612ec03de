//! Seeded random superfunctions, operators and cochains.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use superdeform_core::cohomology::Cochain1;
use superdeform_core::contact::OspElement;
use superdeform_core::grassmann::{Parity, SuperFunction, XPoly};
use superdeform_core::operators::{DiffOperator, MultiIndex};
use superdeform_core::rational::{frac, int, Rational};

pub fn rational(rng: &mut ChaCha8Rng) -> Rational {
    let den = [1, 1, 1, 2, 3][rng.gen_range(0..5)];
    frac(rng.gen_range(-4..=4), den)
}

fn xpoly(rng: &mut ChaCha8Rng, max_degree: usize) -> XPoly {
    let coeffs = (0..=max_degree)
        .map(|_| if rng.gen_bool(0.5) { rational(rng) } else { int(0) })
        .collect();
    XPoly::from_coeffs(coeffs)
}

pub fn parity(rng: &mut ChaCha8Rng) -> Parity {
    Parity::from_odd(rng.gen_bool(0.5))
}

pub fn homogeneous(rng: &mut ChaCha8Rng, p: Parity, max_degree: usize) -> SuperFunction {
    let f = SuperFunction::new(
        xpoly(rng, max_degree),
        xpoly(rng, max_degree),
        xpoly(rng, max_degree),
        xpoly(rng, max_degree),
    );
    match p {
        Parity::Even => f.even_part(),
        Parity::Odd => f.odd_part(),
    }
}

fn operator(rng: &mut ChaCha8Rng, source: &Rational, target: &Rational, p: Parity, order: usize, degree: usize) -> DiffOperator {
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

/// A 1-cochain of random parity between two weights drawn from a small list.
pub fn cochain1(rng: &mut ChaCha8Rng, order: usize, degree: usize) -> Cochain1 {
    const W: [(i64, i64); 5] = [(1, 3), (5, 6), (7, 5), (-1, 2), (1, 2)];
    let (a, b) = W[rng.gen_range(0..W.len())];
    let (c, d) = W[rng.gen_range(0..W.len())];
    let (s, t) = (frac(a, b), frac(c, d));
    let p = parity(rng);
    Cochain1::from_fn(s.clone(), t.clone(), p, |g: OspElement| {
        operator(rng, &s, &t, p.plus(g.parity()), order, degree)
    })
    .expect("parity-correct values")
}
