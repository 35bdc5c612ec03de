//! Transcribed expansions of `Φ_1..Φ_6` and their comparison with the cup
//! products. The transcription is only ever diffed against, never used to
//! compute anything else.

use serde::Serialize;

use crate::cohomology::{canonical_pairs, is_2cocycle, Cochain2};
use crate::contact::OspElement;
use crate::grassmann::{Parity, SuperFunction, Theta};
use crate::operators::{DiffOperator, MultiIndex};
use crate::rational::{frac, int, sign, Rational, RationalString};

use super::{phi, CatalogError};

pub const PRINTED_PHI: &str = include_str!("../../fixtures/phi_printed.txt");

/// Which lines of the transcription to use.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Transcription {
    /// The expansions as displayed.
    Literal,
    /// With the misprints marked `~` in the fixture corrected.
    Corrected,
}

#[derive(Clone, Debug)]
struct Term {
    variant: Option<Transcription>,
    phi: usize,
    coefficient: String,
    signs: Vec<char>,
    factors: Vec<String>,
    dx: String,
    d1: bool,
    d2: bool,
    note: Option<String>,
}

fn parse_line(line: &str) -> Result<Term, String> {
    let (variant, line) = match line.split_at(1) {
        ("=", rest) => (Some(Transcription::Literal), rest),
        ("~", rest) => (Some(Transcription::Corrected), rest),
        _ => (None, line),
    };
    let (body, note) = match line.split_once('!') {
        Some((b, n)) => (b, Some(n.trim().to_string())),
        None => (line, None),
    };
    let cols: Vec<&str> = body.split('|').map(str::trim).collect();
    if cols.len() != 5 {
        return Err(format!("expected 5 columns in {line:?}"));
    }
    let phi = cols[0].parse().map_err(|_| format!("bad index in {line:?}"))?;
    let signs = cols[2].split_whitespace().map(|s| s.chars().next().unwrap_or('?')).collect();
    let mut factors = Vec::new();
    let (mut depth, mut current) = (0usize, String::new());
    for ch in cols[3].chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ => {}
        }
        if ch == ' ' && depth == 0 {
            if !current.is_empty() {
                factors.push(std::mem::take(&mut current));
            }
        } else {
            current.push(ch);
        }
    }
    if !current.is_empty() {
        factors.push(current);
    }
    let (mut dx, mut d1, mut d2) = ("0".to_string(), false, false);
    for tok in cols[4].split_whitespace() {
        match tok {
            "d1" => d1 = true,
            "d2" => d2 = true,
            t if t.starts_with("dx^(") && t.ends_with(')') => dx = t[4..t.len() - 1].to_string(),
            t => return Err(format!("bad operator token {t:?}")),
        }
    }
    Ok(Term {
        variant,
        phi,
        coefficient: cols[1].to_string(),
        signs,
        factors,
        dx,
        d1,
        d2,
        note,
    })
}

fn parse_terms() -> Vec<Term> {
    PRINTED_PHI
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse_line(l).expect("transcription fixture is well formed"))
        .collect()
}

/// Evaluates `"-(k+1)*(k-1)"`, `"k"`, `"2"` and the like at `k`.
fn eval_k(expr: &str, k: i64) -> i64 {
    let (neg, body) = match expr.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, expr),
    };
    let value: i64 = body
        .split('*')
        .map(|f| {
            let f = f.trim().trim_start_matches('(').trim_end_matches(')');
            if f == "k" {
                k
            } else if let Some(c) = f.strip_prefix("k+") {
                k + c.parse::<i64>().expect("integer offset")
            } else if let Some(c) = f.strip_prefix("k-") {
                k - c.parse::<i64>().expect("integer offset")
            } else {
                f.parse().expect("integer factor")
            }
        })
        .product();
    if neg {
        -value
    } else {
        value
    }
}

fn eval_factor(token: &str, g: &SuperFunction, h: &SuperFunction) -> SuperFunction {
    let (chain, base) = match token.find('(') {
        Some(open) => {
            let inner = &token[open + 1..token.len() - 1];
            let product = inner
                .split_whitespace()
                .map(|t| eval_factor(t, g, h))
                .fold(SuperFunction::one(), |acc, f| &acc * &f);
            (token[..open].trim_end_matches('.'), product)
        }
        None => {
            let (chain, leaf) = token.rsplit_once('.').unwrap_or(("", token));
            let base = match leaf {
                "g" => g.clone(),
                "h" => h.clone(),
                "t1" => SuperFunction::theta(Theta::One),
                "t2" => SuperFunction::theta(Theta::Two),
                other => panic!("unknown factor {other:?}"),
            };
            (chain, base)
        }
    };
    chain.split('.').filter(|s| !s.is_empty()).rev().fold(base, |f, op| match op {
        "dx" => f.d_x(),
        "d1" => f.d_theta(Theta::One),
        "d2" => f.d_theta(Theta::Two),
        "e1" => f.eta_bar(Theta::One),
        "e2" => f.eta_bar(Theta::Two),
        other => panic!("unknown derivation {other:?}"),
    })
}

/// `E(g,h)` for the transcribed terms of one expansion; terms whose
/// `∂_x` exponent is negative at this `k` are dropped and reported.
fn half_expansion(terms: &[&Term], k: i64, g: OspElement, h: OspElement, dropped: &mut Vec<String>) -> DiffOperator {
    let (s, t) = (frac(-k, 2), frac(k, 2));
    let (fg, fh) = (g.hamiltonian(), h.hamiltonian());
    let mut out = DiffOperator::zero(s.clone(), t.clone());
    for term in terms {
        let c = eval_k(&term.coefficient, k);
        if c == 0 {
            continue;
        }
        let dx = eval_k(&term.dx, k);
        if dx < 0 {
            dropped.push(format!("{} {} at k = {k}", term.factors.join(" "), term.dx));
            continue;
        }
        let odd = term.signs.iter().filter(|&&c| match c {
            'k' => k % 2 != 0,
            'g' => g.parity().is_odd(),
            'h' => h.parity().is_odd(),
            _ => false,
        });
        let scalar = int(c) * sign(odd.count() % 2 == 1);
        let coeff = term
            .factors
            .iter()
            .map(|f| eval_factor(f, &fg, &fh))
            .fold(SuperFunction::one(), |acc, f| &acc * &f)
            .scale(&scalar);
        let alpha = MultiIndex::new(dx as usize, term.d1, term.d2);
        out = &out + &DiffOperator::from_terms(s.clone(), t.clone(), [(alpha, coeff)]);
    }
    out
}

fn selected(i: usize, which: Transcription) -> Vec<Term> {
    parse_terms()
        .into_iter()
        .filter(|t| t.phi == i && t.variant.is_none_or(|v| v == which))
        .collect()
}

/// The transcribed `Φ_i` at `k`, with the `−(−1)^{|g||h|}(g ↔ h)` completion.
pub fn printed_phi(i: usize, k: i64, which: Transcription) -> Result<(Cochain2, Vec<String>), CatalogError> {
    if !(1..=6).contains(&i) {
        return Err(CatalogError::UnknownPhi(i));
    }
    let all = selected(i, which);
    let terms: Vec<&Term> = all.iter().collect();
    let mut dropped = Vec::new();
    let c = Cochain2::from_canonical(frac(-k, 2), frac(k, 2), Parity::Even, |g, h| {
        let direct = half_expansion(&terms, k, g, h, &mut dropped);
        let swapped = half_expansion(&terms, k, h, g, &mut dropped);
        let flip = -sign(g.parity().is_odd() && h.parity().is_odd());
        &direct + &swapped.scale(&flip)
    });
    dropped.sort();
    dropped.dedup();
    Ok((c, dropped))
}

/// One basis pair on which the transcription and the cup product differ.
#[derive(Clone, Debug, Serialize)]
pub struct PairDiscrepancy {
    pub pair: String,
    pub computed: String,
    pub printed: String,
    pub difference: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub phi: usize,
    pub k: i64,
    pub matches: bool,
    /// `c` with `printed = c · computed`, when such a scalar exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proportional: Option<RationalString>,
    pub printed_is_cocycle: bool,
    pub discrepancies: Vec<PairDiscrepancy>,
    /// Readings of ambiguous printed symbols.
    pub readings: Vec<String>,
    /// Misprint corrections, and whether the corrected transcription
    /// agrees with the cup product.
    pub corrections: Vec<String>,
    pub corrected_matches: bool,
    /// Terms left out because their `∂_x` exponent is negative.
    pub dropped_terms: Vec<String>,
}

/// The scalar `c` with `a = c·b` coordinatewise, if any.
fn ratio(a: &Cochain2, b: &Cochain2) -> Option<Rational> {
    let mut found: Option<Rational> = None;
    for (g, h) in canonical_pairs() {
        let (x, y) = (a.canonical_value(g, h), b.canonical_value(g, h));
        let keys: std::collections::BTreeSet<_> = x.terms().keys().chain(y.terms().keys()).copied().collect();
        for alpha in keys {
            let zero = SuperFunction::zero();
            let (fx, fy) = (x.coefficient(alpha).unwrap_or(&zero), y.coefficient(alpha).unwrap_or(&zero));
            for (mono, p, vy) in fy.terms() {
                let vx = fx.component(mono).coeff(p);
                let c = vx / vy;
                match &found {
                    Some(f) if *f != c => return None,
                    _ => found = Some(c),
                }
            }
            if found.is_some() && fx != &fy.scale(found.as_ref().unwrap()) {
                return None;
            }
            if found.is_none() && !fx.is_zero() {
                return None;
            }
        }
    }
    found
}

fn diff(computed: &Cochain2, printed: &Cochain2) -> Vec<PairDiscrepancy> {
    canonical_pairs()
        .filter_map(|(g, h)| {
            let (c, p) = (computed.canonical_value(g, h), printed.canonical_value(g, h));
            (!c.op_equals(p).unwrap_or(false)).then(|| PairDiscrepancy {
                pair: format!("({g},{h})"),
                computed: c.to_string(),
                printed: p.to_string(),
                difference: (p - c).to_string(),
            })
        })
        .collect()
}

fn notes(i: usize, pick: impl Fn(&Term) -> bool) -> Vec<String> {
    parse_terms()
        .into_iter()
        .filter(|t| t.phi == i && pick(t))
        .filter_map(|t| t.note)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Diffs the literal transcription of `Φ_i` against the cup product, which
/// is taken as correct, and reports whether the corrected transcription
/// agrees.
pub fn crosscheck_printed_expansions(i: usize, k: i64) -> Result<DiscrepancyReport, CatalogError> {
    let computed = phi(i, k)?;
    let (printed, dropped) = printed_phi(i, k, Transcription::Literal)?;
    let (corrected, _) = printed_phi(i, k, Transcription::Corrected)?;
    let discrepancies = diff(&computed, &printed);
    let proportional = if discrepancies.is_empty() || computed.is_zero() {
        None
    } else {
        ratio(&printed, &computed).map(RationalString)
    };
    Ok(DiscrepancyReport {
        phi: i,
        k,
        matches: discrepancies.is_empty(),
        proportional,
        printed_is_cocycle: is_2cocycle(&printed),
        discrepancies,
        readings: notes(i, |t| t.variant.is_none()),
        corrections: notes(i, |t| t.variant == Some(Transcription::Corrected)),
        corrected_matches: diff(&computed, &corrected).is_empty(),
        dropped_terms: dropped,
    })
}
