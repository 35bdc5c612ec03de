//! The Poisson (contact) bracket on R^{1|2} and the realization of osp(2|2)
//! inside it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::grassmann::{koszul, GrassmannError, Parity, SuperFunction, Theta, ThetaMonomial};
use crate::linalg::LinearSystem;
use crate::rational::{format_rational, frac, int, parse_rational, sign, Rational};
use crate::report::VerificationReport;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContactError {
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error("unknown osp(2|2) basis label {0:?}")]
    UnknownLabel(String),
    #[error("bracket table line {line}: {reason}")]
    Table { line: usize, reason: String },
    #[error("osp(1|2) copy index {0} out of range (expected 1 or 2)")]
    CopyIndex(usize),
}

/// Hamiltonian of a contact vector field; always homogeneous.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContactElement {
    f: SuperFunction,
    parity: Parity,
}

impl ContactElement {
    pub fn new(f: SuperFunction) -> Result<Self, ContactError> {
        let parity = f.parity()?;
        Ok(Self { f, parity })
    }

    pub fn function(&self) -> &SuperFunction {
        &self.f
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }
}

impl fmt::Display for ContactElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.f.fmt(f)
    }
}

/// `{f,g} = f g' − f' g − ½(−1)^{|f|} Σ_i η̄_i(f) η̄_i(g)` on homogeneous `f`.
pub fn poisson_raw(f: &SuperFunction, f_parity: Parity, g: &SuperFunction) -> SuperFunction {
    let mut out = &(f * &g.d_x()) - &(&f.d_x() * g);
    let half = frac(-1, 2) * sign(f_parity.is_odd());
    for i in Theta::BOTH {
        out += &(&f.eta_bar(i) * &g.eta_bar(i)).scale(&half);
    }
    out
}

pub fn poisson(f: &ContactElement, g: &ContactElement) -> ContactElement {
    ContactElement {
        f: poisson_raw(&f.f, f.parity, &g.f),
        parity: f.parity.plus(g.parity),
    }
}

/// Basis of osp(2|2) in the fixed order used for all cochain indexing.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum OspElement {
    H,
    X,
    Y,
    A1,
    A2,
    B1,
    B2,
    C,
}

impl OspElement {
    pub const ALL: [OspElement; 8] = [
        OspElement::H,
        OspElement::X,
        OspElement::Y,
        OspElement::A1,
        OspElement::A2,
        OspElement::B1,
        OspElement::B2,
        OspElement::C,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            OspElement::H => "H",
            OspElement::X => "X",
            OspElement::Y => "Y",
            OspElement::A1 => "A1",
            OspElement::A2 => "A2",
            OspElement::B1 => "B1",
            OspElement::B2 => "B2",
            OspElement::C => "C",
        }
    }

    pub fn parity(self) -> Parity {
        match self {
            OspElement::A1 | OspElement::A2 | OspElement::B1 | OspElement::B2 => Parity::Odd,
            _ => Parity::Even,
        }
    }

    /// `(H, X, Y, A_i, B_i, C) = (−x, 1, −x², 2θ_i, 2xθ_i, θ1θ2)`.
    pub fn hamiltonian(self) -> SuperFunction {
        use ThetaMonomial::*;
        let (c, p, m) = match self {
            OspElement::H => (int(-1), 1, One),
            OspElement::X => (int(1), 0, One),
            OspElement::Y => (int(-1), 2, One),
            OspElement::A1 => (int(2), 0, T1),
            OspElement::A2 => (int(2), 0, T2),
            OspElement::B1 => (int(2), 1, T1),
            OspElement::B2 => (int(2), 1, T2),
            OspElement::C => (int(1), 0, T12),
        };
        SuperFunction::monomial(c, p, m)
    }

    pub fn element(self) -> ContactElement {
        ContactElement {
            f: self.hamiltonian(),
            parity: self.parity(),
        }
    }
}

impl fmt::Display for OspElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for OspElement {
    type Err = ContactError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OspElement::ALL
            .into_iter()
            .find(|e| e.label() == s)
            .ok_or_else(|| ContactError::UnknownLabel(s.to_string()))
    }
}

/// Coordinates in the osp(2|2) basis.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BasisVector(pub BTreeMap<OspElement, Rational>);

impl BasisVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(e: OspElement, c: Rational) -> Self {
        let mut v = Self::zero();
        v.add(e, c);
        v
    }

    pub fn add(&mut self, e: OspElement, c: Rational) {
        let entry = self.0.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&e);
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.0 {
            out.add(*e, v * c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OspElement, &Rational)> {
        self.0.iter().map(|(e, c)| (*e, c))
    }

    pub fn to_function(&self) -> SuperFunction {
        self.0
            .iter()
            .fold(SuperFunction::zero(), |acc, (e, c)| &acc + &e.hamiltonian().scale(c))
    }
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(e, c)| {
                if c.is_one() {
                    e.label().to_string()
                } else {
                    format!("{}*{}", format_rational(c), e.label())
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Expresses `f` in the span of `elements` by solving the exact linear
/// system obtained from matching every `x^p θ^ε` coefficient.
pub fn decompose_in_span(f: &SuperFunction, elements: &[SuperFunction]) -> Option<Vec<Rational>> {
    let n = elements.len();
    let mut sys = LinearSystem::new(n, 0);
    let constant = sys.constant_column();
    let mut keys: Vec<(ThetaMonomial, usize)> = Vec::new();
    for g in elements.iter().chain(std::iter::once(f)) {
        for (m, p, _) in g.terms() {
            if !keys.contains(&(m, p)) {
                keys.push((m, p));
            }
        }
    }
    for (m, p) in keys {
        let mut row: Vec<(usize, Rational)> = elements
            .iter()
            .enumerate()
            .map(|(j, g)| (j, g.component(m).coeff(p)))
            .collect();
        row.push((constant, -f.component(m).coeff(p)));
        sys.add_equation(row);
    }
    let sol = sys.solve();
    sol.consistent.then_some(sol.unknowns)
}

/// Coordinates of `f` in the osp(2|2) basis, or `None` outside the span.
pub fn decompose(f: &SuperFunction) -> Option<BasisVector> {
    let basis: Vec<SuperFunction> = OspElement::ALL.iter().map(|e| e.hamiltonian()).collect();
    let coords = decompose_in_span(f, &basis)?;
    let mut v = BasisVector::zero();
    for (e, c) in OspElement::ALL.into_iter().zip(coords) {
        v.add(e, c);
    }
    Some(v)
}

/// Bracket of two basis elements, in basis coordinates.
pub fn basis_bracket(u: OspElement, v: OspElement) -> BasisVector {
    let f = poisson(&u.element(), &v.element());
    decompose(f.function()).expect("osp(2|2) is closed under the Poisson bracket")
}

/// The bracket table held as data, independent of [`poisson`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketTable {
    entries: BTreeMap<(OspElement, OspElement), BasisVector>,
}

pub const DEFAULT_BRACKET_TABLE: &str = include_str!("../fixtures/osp22_brackets.txt");
pub const PRINTED_BRACKET_TABLE: &str = include_str!("../fixtures/osp22_brackets_printed.txt");

impl BracketTable {
    pub fn standard() -> Self {
        Self::parse(DEFAULT_BRACKET_TABLE).expect("bundled bracket table parses")
    }

    /// The uncorrected table (sign error on `[A_i,B_i]`, mixed `[A_i,B_j]`
    /// omitted).
    pub fn printed() -> Self {
        Self::parse(PRINTED_BRACKET_TABLE).expect("bundled bracket table parses")
    }

    /// Lines of the form `[U,V] = c1*W1 + c2*W2`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ContactError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| ContactError::Table {
                line: n + 1,
                reason: reason.to_string(),
            };
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| err("missing '='"))?;
            let inner = lhs
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| err("left side must look like [U,V]"))?;
            let (u, v) = inner.split_once(',').ok_or_else(|| err("missing ','"))?;
            let u: OspElement = u.trim().parse()?;
            let v: OspElement = v.trim().parse()?;
            let value = parse_combination(rhs).map_err(|r| err(&r))?;
            if entries.insert((u, v), value).is_some() {
                return Err(err("duplicate entry"));
            }
        }
        Ok(Self { entries })
    }

    /// Expected `[u,v]`, using graded antisymmetry for reversed entries.
    pub fn expected(&self, u: OspElement, v: OspElement) -> BasisVector {
        if let Some(val) = self.entries.get(&(u, v)) {
            return val.clone();
        }
        if let Some(val) = self.entries.get(&(v, u)) {
            return val.scale(&-sign(koszul(u.parity(), v.parity())));
        }
        BasisVector::zero()
    }

    /// Bracket of two basis vectors, extended bilinearly from the table.
    pub fn bracket(&self, a: &BasisVector, b: &BasisVector) -> BasisVector {
        let mut out = BasisVector::zero();
        for (u, cu) in a.iter() {
            for (v, cv) in b.iter() {
                for (w, c) in self.expected(u, v).iter() {
                    out.add(w, c * cu * cv);
                }
            }
        }
        out
    }

    /// Graded Jacobi on all 8³ basis triples, computed from the table data
    /// alone.
    pub fn jacobi_report(&self) -> VerificationReport {
        let mut report = VerificationReport::new("graded Jacobi (table)");
        let one = |e: OspElement| BasisVector::single(e, Rational::one());
        for u in OspElement::ALL {
            for v in OspElement::ALL {
                for w in OspElement::ALL {
                    let term = |a: OspElement, b: OspElement, c: OspElement| {
                        self.bracket(&one(a), &self.bracket(&one(b), &one(c)))
                            .scale(&sign(koszul(a.parity(), c.parity())))
                    };
                    let mut total = term(u, v, w);
                    for (e, c) in term(v, w, u).iter().chain(term(w, u, v).iter()) {
                        total.add(e, c.clone());
                    }
                    report.record(total.is_zero(), format!("({u},{v},{w})"), "0", &total);
                }
            }
        }
        report
    }

    /// Overwrites one entry; used to inject faults in tests.
    pub fn set(&mut self, u: OspElement, v: OspElement, value: BasisVector) {
        self.entries.remove(&(v, u));
        self.entries.insert((u, v), value);
    }
}

fn parse_combination(text: &str) -> Result<BasisVector, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = BasisVector::zero();
    if compact == "0" {
        return Ok(out);
    }
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    for ch in compact.chars() {
        if ch == '+' || ch == '-' {
            if !cur.is_empty() {
                pieces.push((neg, std::mem::take(&mut cur)));
            }
            neg = ch == '-';
        } else {
            cur.push(ch);
        }
    }
    if cur.is_empty() {
        return Err("empty term".into());
    }
    pieces.push((neg, cur));
    for (neg, piece) in pieces {
        let (coef, label) = match piece.rsplit_once('*') {
            Some((c, l)) => (parse_rational(c).map_err(|e| e.to_string())?, l),
            None => (Rational::one(), piece.as_str()),
        };
        let e: OspElement = label.parse().map_err(|e: ContactError| e.to_string())?;
        out.add(e, if neg { -coef } else { coef });
    }
    Ok(out)
}

/// Compares all 36 unordered basis brackets computed by [`poisson`] with the
/// table.
pub fn verify_structure_constants(table: &BracketTable) -> VerificationReport {
    let mut report = VerificationReport::new("structure constants");
    for (i, &u) in OspElement::ALL.iter().enumerate() {
        for &v in &OspElement::ALL[i..] {
            let computed = basis_bracket(u, v);
            let expected = table.expected(u, v);
            report.record(computed == expected, format!("[{u},{v}]"), &expected, &computed);
        }
    }
    report
}

/// Generators `1, x, x², xθ_i, θ_i` of the i-th osp(1|2) copy.
pub fn osp12_copy(i: usize) -> Result<Vec<ContactElement>, ContactError> {
    let theta = Theta::try_from(i).map_err(|_| ContactError::CopyIndex(i))?;
    let t = SuperFunction::theta(theta);
    [
        SuperFunction::one(),
        SuperFunction::x(),
        SuperFunction::monomial(Rational::one(), 2, ThetaMonomial::One),
        &SuperFunction::x() * &t,
        t.clone(),
    ]
    .into_iter()
    .map(ContactElement::new)
    .collect()
}

/// Checks that every pairwise bracket stays in the span of `elements`.
pub fn closure_check(elements: &[ContactElement]) -> VerificationReport {
    let mut report = VerificationReport::new("bracket closure");
    let span: Vec<SuperFunction> = elements.iter().map(|e| e.function().clone()).collect();
    for (i, f) in elements.iter().enumerate() {
        for g in &elements[i..] {
            let b = poisson(f, g);
            let inside = decompose_in_span(b.function(), &span).is_some();
            report.record(inside, format!("{{{f}, {g}}}"), "in span", b.function());
        }
    }
    report
}

/// Graded Jacobi identity
/// `(−1)^{|f||h|}{f,{g,h}} + (−1)^{|g||f|}{g,{h,f}} + (−1)^{|h||g|}{h,{f,g}} = 0`.
pub fn jacobi_check(triples: &[(ContactElement, ContactElement, ContactElement)]) -> VerificationReport {
    let mut report = VerificationReport::new("graded Jacobi");
    for (f, g, h) in triples {
        let term = |a: &ContactElement, b: &ContactElement, c: &ContactElement| {
            poisson(a, &poisson(b, c))
                .function()
                .scale(&sign(koszul(a.parity(), c.parity())))
        };
        let total = &(&term(f, g, h) + &term(g, h, f)) + &term(h, f, g);
        report.record(total.is_zero(), format!("({f}, {g}, {h})"), "0", &total);
    }
    report
}

/// All 8³ ordered basis triples.
pub fn basis_triples() -> Vec<(ContactElement, ContactElement, ContactElement)> {
    let mut out = Vec::with_capacity(512);
    for a in OspElement::ALL {
        for b in OspElement::ALL {
            for c in OspElement::ALL {
                out.push((a.element(), b.element(), c.element()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ce(s: &str) -> ContactElement {
        ContactElement::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(poisson(&ce("-x"), &ce("1")).function(), &SuperFunction::one());
        assert_eq!(poisson(&ce("2*t1"), &ce("2*t1")).function(), &"2".parse().unwrap());
        assert_eq!(poisson(&ce("t1t2"), &ce("2*t1")).function(), &"-t2".parse().unwrap());
    }

    #[test]
    fn table_matches() {
        let report = verify_structure_constants(&BracketTable::standard());
        assert_eq!(report.checked, 36);
        assert!(report.passed(), "{:?}", report.mismatches);
        let bb = basis_bracket(OspElement::B1, OspElement::B1);
        assert_eq!(bb, BasisVector::single(OspElement::Y, int(-2)));
    }

    #[test]
    fn printed_table_is_not_a_lie_superalgebra() {
        let printed = BracketTable::printed();
        let report = verify_structure_constants(&printed);
        let pairs: Vec<&str> = report.mismatches.iter().map(|m| m.pair.as_str()).collect();
        assert_eq!(pairs, ["[A1,B1]", "[A1,B2]", "[A2,B1]", "[A2,B2]"]);
        let jacobi = printed.jacobi_report();
        assert!(jacobi.mismatches.iter().any(|m| m.pair == "(A1,A1,B1)"));
        assert!(BracketTable::standard().jacobi_report().passed());
    }

    #[test]
    fn injected_fault_is_reported() {
        let mut table = BracketTable::standard();
        table.set(OspElement::H, OspElement::X, BasisVector::single(OspElement::X, int(2)));
        let report = verify_structure_constants(&table);
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].pair, "[H,X]");
    }

    #[test]
    fn reversed_entries_use_graded_antisymmetry() {
        let table = BracketTable::standard();
        assert_eq!(table.expected(OspElement::X, OspElement::H), BasisVector::single(OspElement::X, int(-1)));
        assert_eq!(table.expected(OspElement::C, OspElement::A1), BasisVector::single(OspElement::A2, frac(-1, 2)));
    }

    #[test]
    fn osp12_copies() {
        let first = osp12_copy(1).unwrap();
        let rendered: Vec<String> = first.iter().map(|e| e.to_string()).collect();
        assert_eq!(rendered, ["1", "x", "x^2", "x*t1", "t1"]);
        let second = osp12_copy(2).unwrap();
        let report = closure_check(&second);
        assert_eq!(report.checked, 15);
        assert!(report.passed());
        assert!(matches!(osp12_copy(3), Err(ContactError::CopyIndex(3))));
    }

    #[test]
    fn jacobi_on_basis_and_repeats() {
        assert!(jacobi_check(&basis_triples()).passed());
        let f = ce("x*t1 + 3*t2");
        assert!(jacobi_check(&[(f.clone(), f.clone(), f)]).passed());
    }

    #[test]
    fn table_parse_errors() {
        assert!(BracketTable::parse("[H,Q] = X").is_err());
        assert!(BracketTable::parse("[H,X] X").is_err());
        assert!(BracketTable::parse("[H,X] = 1.5*X").is_err());
    }
}
