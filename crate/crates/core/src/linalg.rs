//! Exact sparse linear systems over the rationals.
//!
//! Rows are cleared to primitive integer vectors and reduced with
//! fraction-free updates `p·row − c·pivot`, followed by division by the row
//! content. Elimination is online: each incoming row is reduced against the
//! current echelon basis in increasing column order, so the pivot choice is a
//! function of the column order alone.
//!
//! Column layout of a [`LinearSystem`]: `unknowns ++ scalars ++ [constant]`.
//! An equation reads `Σ a_u·x_u + Σ b_s·s + c = 0`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

type IntRow = Vec<(usize, BigInt)>;
type Provenance = BTreeMap<usize, Rational>;

#[derive(Clone, Debug)]
struct PivotRow {
    entries: IntRow,
    provenance: Option<Provenance>,
}

impl PivotRow {
    fn lead(&self) -> usize {
        self.entries[0].0
    }
}

/// Outcome of [`LinearSystem::solve`].
#[derive(Clone, Debug)]
pub struct Solution {
    pub consistent: bool,
    /// Values for unknowns (free unknowns set to zero) when consistent.
    pub unknowns: Vec<Rational>,
    /// Values chosen for the scalar columns.
    pub scalars: Vec<Rational>,
    /// Scalar columns that vanish in every solution.
    pub forced_zero: Vec<usize>,
    /// Number of unknown columns without a pivot.
    pub free_unknowns: usize,
    pub rank: usize,
    /// Dual certificates: for an inconsistent system a combination of the
    /// original equations reading `0 = c ≠ 0`; for each forced scalar `s` a
    /// combination reading `s = 0` (keyed by scalar index).
    pub infeasibility: Option<Provenance>,
    pub forced_zero_certificates: BTreeMap<usize, Provenance>,
    /// Reduced relations the scalars must satisfy, keyed by scalar index;
    /// key `num_scalars` holds the constant term.
    pub scalar_relations: Vec<BTreeMap<usize, Rational>>,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    num_unknowns: usize,
    num_scalars: usize,
    track_provenance: bool,
    num_equations: usize,
    pivots: BTreeMap<usize, PivotRow>,
}

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    values.fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()))
}

fn primitive(mut row: IntRow) -> (IntRow, BigInt) {
    row.retain(|(_, v)| !v.is_zero());
    if row.is_empty() {
        return (row, BigInt::one());
    }
    let mut g = row
        .iter()
        .fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if row[0].1.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
    (row, g)
}

impl LinearSystem {
    pub fn new(num_unknowns: usize, num_scalars: usize) -> Self {
        Self {
            num_unknowns,
            num_scalars,
            track_provenance: false,
            num_equations: 0,
            pivots: BTreeMap::new(),
        }
    }

    /// Record, for every pivot row, which input equations it combines.
    pub fn with_provenance(mut self) -> Self {
        self.track_provenance = true;
        self
    }

    pub fn num_unknowns(&self) -> usize {
        self.num_unknowns
    }

    pub fn num_scalars(&self) -> usize {
        self.num_scalars
    }

    pub fn num_equations(&self) -> usize {
        self.num_equations
    }

    pub fn constant_column(&self) -> usize {
        self.num_unknowns + self.num_scalars
    }

    pub fn scalar_column(&self, s: usize) -> usize {
        self.num_unknowns + s
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Adds one equation given as sparse `(column, coefficient)` pairs.
    /// Repeated columns are summed. Returns the equation's index.
    pub fn add_equation(&mut self, entries: impl IntoIterator<Item = (usize, Rational)>) -> usize {
        let index = self.num_equations;
        self.num_equations += 1;

        let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
        for (col, v) in entries {
            assert!(col <= self.constant_column(), "column {col} out of range");
            *merged.entry(col).or_insert_with(Rational::zero) += v;
        }
        merged.retain(|_, v| !v.is_zero());
        if merged.is_empty() {
            return index;
        }
        let scale = lcm_of_denominators(merged.values());
        let row: IntRow = merged
            .iter()
            .map(|(&c, v)| (c, (v * Rational::from_integer(scale.clone())).to_integer()))
            .collect();
        let (row, g) = primitive(row);
        let provenance = self.track_provenance.then(|| {
            let mut p = Provenance::new();
            p.insert(index, Rational::new(scale.clone(), g.clone()));
            p
        });
        self.insert(PivotRow {
            entries: row,
            provenance,
        });
        index
    }

    fn insert(&mut self, mut row: PivotRow) {
        loop {
            if row.entries.is_empty() {
                return;
            }
            let lead = row.lead();
            let Some(pivot) = self.pivots.get(&lead) else {
                self.pivots.insert(lead, row);
                return;
            };
            row = reduce(&row, pivot);
        }
    }

    pub fn solve(&self) -> Solution {
        self.solve_with_scalar_choice(|_| Rational::one())
    }

    /// `choose_free(s)` gives the value assigned to each scalar that is not
    /// determined by the others.
    pub fn solve_with_scalar_choice(&self, choose_free: impl Fn(usize) -> Rational) -> Solution {
        let constant = self.constant_column();
        let first_scalar = self.num_unknowns;

        if let Some(bad) = self.pivots.get(&constant) {
            return Solution {
                consistent: false,
                unknowns: Vec::new(),
                scalars: Vec::new(),
                forced_zero: Vec::new(),
                free_unknowns: 0,
                rank: self.rank(),
                infeasibility: bad.provenance.clone(),
                forced_zero_certificates: BTreeMap::new(),
                scalar_relations: Vec::new(),
            };
        }

        // Rows living purely on scalar (and constant) columns: reduce them to
        // RREF to read off forced scalars and a consistent scalar assignment.
        let scalar_rows: Vec<&PivotRow> = self
            .pivots
            .range(first_scalar..constant)
            .map(|(_, r)| r)
            .collect();
        let (rref, rref_prov) = self.scalar_rref(&scalar_rows);

        let mut forced_zero = Vec::new();
        let mut forced_zero_certificates = BTreeMap::new();
        for (row, prov) in rref.iter().zip(&rref_prov) {
            let (lead, _) = row.iter().next().expect("nonempty rref row");
            let only_lead = row.len() == 1;
            if only_lead && *lead < constant {
                let s = lead - first_scalar;
                forced_zero.push(s);
                if let Some(p) = prov {
                    forced_zero_certificates.insert(s, p.clone());
                }
            }
        }

        // Scalar assignment: free scalars get `choose_free`, pivots follow.
        let mut values: Vec<Rational> = vec![Rational::zero(); constant + 1];
        values[constant] = Rational::one();
        let lead_cols: Vec<usize> = rref.iter().map(|r| *r.keys().next().unwrap()).collect();
        for s in 0..self.num_scalars {
            if !lead_cols.contains(&(first_scalar + s)) {
                values[first_scalar + s] = choose_free(s);
            }
        }
        for row in &rref {
            let mut it = row.iter();
            let (&lead, _) = it.next().unwrap();
            let rest: Rational = it.map(|(&c, v)| v * &values[c]).sum();
            values[lead] = -rest;
        }

        // Back substitution through the echelon rows on unknown columns.
        for (&lead, pivot) in self.pivots.range(..first_scalar).rev() {
            let mut it = pivot.entries.iter();
            let (_, lead_coef) = it.next().unwrap();
            let rest: Rational = it
                .map(|(c, v)| Rational::from_integer(v.clone()) * &values[*c])
                .sum();
            values[lead] = -rest / Rational::from_integer(lead_coef.clone());
        }

        let scalar_relations = rref
            .iter()
            .map(|row| row.iter().map(|(&c, v)| (c - first_scalar, v.clone())).collect())
            .collect();
        let pivot_unknowns = self.pivots.range(..first_scalar).count();
        Solution {
            consistent: true,
            unknowns: values[..first_scalar].to_vec(),
            scalars: values[first_scalar..constant].to_vec(),
            forced_zero,
            free_unknowns: self.num_unknowns - pivot_unknowns,
            rank: self.rank(),
            infeasibility: None,
            forced_zero_certificates,
            scalar_relations,
        }
    }

    fn scalar_rref(
        &self,
        rows: &[&PivotRow],
    ) -> (Vec<BTreeMap<usize, Rational>>, Vec<Option<Provenance>>) {
        let mut mat: Vec<BTreeMap<usize, Rational>> = rows
            .iter()
            .map(|r| {
                r.entries
                    .iter()
                    .map(|(c, v)| (*c, Rational::from_integer(v.clone())))
                    .collect()
            })
            .collect();
        let mut prov: Vec<Option<Provenance>> = rows.iter().map(|r| r.provenance.clone()).collect();
        // Rows arrive in increasing lead order from the echelon basis; make
        // leads monic and clear each lead from every other row.
        for i in 0..mat.len() {
            let (&lead, lead_val) = mat[i].iter().next().unwrap();
            let inv = Rational::one() / lead_val;
            for v in mat[i].values_mut() {
                *v *= &inv;
            }
            if let Some(p) = prov[i].as_mut() {
                for v in p.values_mut() {
                    *v *= &inv;
                }
            }
            for j in 0..mat.len() {
                if j == i {
                    continue;
                }
                let Some(factor) = mat[j].get(&lead).cloned() else {
                    continue;
                };
                let src = mat[i].clone();
                axpy(&mut mat[j], &src, &-factor.clone());
                if let (Some(src_p), true) = (prov[i].clone(), prov[j].is_some()) {
                    axpy(prov[j].as_mut().unwrap(), &src_p, &-factor);
                }
            }
        }
        (mat, prov)
    }
}

fn axpy<K: Ord + Copy>(dst: &mut BTreeMap<K, Rational>, src: &BTreeMap<K, Rational>, factor: &Rational) {
    for (k, v) in src {
        let e = dst.entry(*k).or_insert_with(Rational::zero);
        *e += v * factor;
        if e.is_zero() {
            dst.remove(k);
        }
    }
}

/// `p·row − c·pivot` made primitive, where `p` is the pivot's lead and `c` the
/// row's entry in that column.
fn reduce(row: &PivotRow, pivot: &PivotRow) -> PivotRow {
    let p = &pivot.entries[0].1;
    let c = &row.entries[0].1;
    let g = p.gcd(c);
    let (p, c) = (p / &g, c / &g);

    let mut out: IntRow = Vec::with_capacity(row.entries.len() + pivot.entries.len());
    let (mut i, mut j) = (1, 1);
    while i < row.entries.len() || j < pivot.entries.len() {
        let take_row = j >= pivot.entries.len()
            || (i < row.entries.len() && row.entries[i].0 < pivot.entries[j].0);
        let take_pivot = i >= row.entries.len()
            || (j < pivot.entries.len() && pivot.entries[j].0 < row.entries[i].0);
        if take_row {
            out.push((row.entries[i].0, &p * &row.entries[i].1));
            i += 1;
        } else if take_pivot {
            out.push((pivot.entries[j].0, -(&c * &pivot.entries[j].1)));
            j += 1;
        } else {
            let v = &p * &row.entries[i].1 - &c * &pivot.entries[j].1;
            out.push((row.entries[i].0, v));
            i += 1;
            j += 1;
        }
    }
    let (entries, content) = primitive(out);
    let provenance = match (&row.provenance, &pivot.provenance) {
        (Some(rp), Some(pp)) => {
            let mut merged: Provenance = rp
                .iter()
                .map(|(k, v)| (*k, v * Rational::from_integer(p.clone())))
                .collect();
            axpy(&mut merged, pp, &Rational::from_integer(-c.clone()));
            let inv = Rational::one() / Rational::from_integer(content);
            for v in merged.values_mut() {
                *v *= &inv;
            }
            Some(merged)
        }
        _ => None,
    };
    PivotRow {
        entries,
        provenance,
    }
}
