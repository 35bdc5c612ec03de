//! Deformations of the osp(2|2) action on a truncated symbol module
//! `⊕_{j=0..K} F_{d−j/2}`.
//!
//! A first-order term `L¹` is a sum of catalog cocycles placed on blocks of
//! the module; its second-order obstruction is `½ L¹∨L¹`, assembled block by
//! block. With `L^{≥2} = 0` the deformed action is a homomorphism exactly
//! when that obstruction vanishes, which [`verify_flat`] checks directly.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{build, phi, CatalogError, CocycleId, Family};
use crate::cohomology::{
    cup, solve_coboundary, AnsatzSpec, CertificateStatus, Cochain1, Cochain2, CoboundaryProblem, CohomologyError,
    LinearCertificate, satisfies_relations,
};
use crate::contact::{basis_bracket, OspElement};
use crate::grassmann::{koszul, Parity};
use crate::operators::{lie_operator, DiffOperator};
use crate::rational::{format_rational, frac, int, parse_rational, sign, twice_natural, Rational, RationalString};
use crate::report::VerificationReport;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeformationError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error("parameter {name}_{k} is not allowed: {reason}")]
    IncompatibleIndex { name: &'static str, k: i64, reason: String },
    #[error("module and parameters disagree on d ({module} vs {params})")]
    WeightMismatch { module: String, params: String },
    #[error("truncation K = {k} too small, need at least {min}")]
    Truncation { k: usize, min: usize },
    #[error("obstructed parameters: {}", .0.join("; "))]
    Obstructed(Vec<String>),
}

/// `⊕_{j=0..K} F_{d−j/2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSymbolModule {
    pub d: Rational,
    pub k: usize,
}

impl TruncatedSymbolModule {
    /// In the resonant case `2d = m` the window must reach weight `−m/2`,
    /// so `K ≥ 2m`.
    pub fn new(d: Rational, k: usize) -> Result<Self, DeformationError> {
        if let Some(m) = twice_natural(&d) {
            let min = 2 * m as usize;
            if k < min {
                return Err(DeformationError::Truncation { k, min });
            }
        }
        Ok(Self { d, k })
    }

    /// `K = 2m + 2` when `2d = m`, otherwise two past the largest index used.
    pub fn default_for(p: &DeformationParams) -> Self {
        let k = match p.resonance() {
            Some(m) => 2 * m as usize + 2,
            None => {
                let top = p.a.keys().chain(p.b.keys()).copied().max().unwrap_or(0).max(0);
                top as usize + 2
            }
        };
        Self { d: p.d.clone(), k }
    }

    pub fn resonance(&self) -> Option<u32> {
        twice_natural(&self.d)
    }

    pub fn weight(&self, j: usize) -> Rational {
        &self.d - frac(j as i64, 2)
    }

    pub fn weights(&self) -> Vec<Rational> {
        (0..=self.k).map(|j| self.weight(j)).collect()
    }

    /// The component index `j` with `d − j/2 = w`, if inside the window.
    pub fn component_of(&self, w: &Rational) -> Option<usize> {
        let j = (&self.d - w) * int(2);
        if !j.is_integer() || j < Rational::zero() {
            return None;
        }
        let j: usize = j.to_integer().try_into().ok()?;
        (j <= self.k).then_some(j)
    }
}

/// The parameters `a_k, b_k` (and `c_k, d_k, e_k` when `2d = m`) of a
/// first-order deformation. Absent entries are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeformationParams {
    pub d: Rational,
    pub a: BTreeMap<i64, Rational>,
    pub b: BTreeMap<i64, Rational>,
    pub c: BTreeMap<i64, Rational>,
    pub d_: BTreeMap<i64, Rational>,
    pub e: BTreeMap<i64, Rational>,
}

/// One parameter `name_k` together with the cocycle it multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub name: char,
    pub k: i64,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.name, self.k)
    }
}

const NAMES: [char; 5] = ['a', 'b', 'c', 'd', 'e'];

impl DeformationParams {
    pub fn new(d: Rational) -> Self {
        Self {
            d,
            ..Default::default()
        }
    }

    pub fn resonance(&self) -> Option<u32> {
        twice_natural(&self.d)
    }

    fn map(&self, name: char) -> &BTreeMap<i64, Rational> {
        match name {
            'a' => &self.a,
            'b' => &self.b,
            'c' => &self.c,
            'd' => &self.d_,
            'e' => &self.e,
            _ => panic!("unknown parameter family {name}"),
        }
    }

    fn map_mut(&mut self, name: char) -> &mut BTreeMap<i64, Rational> {
        match name {
            'a' => &mut self.a,
            'b' => &mut self.b,
            'c' => &mut self.c,
            'd' => &mut self.d_,
            'e' => &mut self.e,
            _ => panic!("unknown parameter family {name}"),
        }
    }

    /// Sets `name_k`; `name` is one of `a b c d e`.
    pub fn set(&mut self, name: char, k: i64, value: Rational) -> &mut Self {
        self.map_mut(name).insert(k, value);
        self
    }

    pub fn with(mut self, name: char, k: i64, value: Rational) -> Self {
        self.set(name, k, value);
        self
    }

    pub fn get(&self, name: char, k: i64) -> Rational {
        self.map(name).get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero parameters in a fixed order.
    pub fn nonzero(&self) -> Vec<(Slot, Rational)> {
        NAMES
            .iter()
            .flat_map(|&name| {
                self.map(name)
                    .iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(move |(&k, v)| (Slot { name, k }, v.clone()))
            })
            .collect()
    }

    /// The family index sets: `k ≥ 0` for `a, b` when `2d ∉ ℕ` (and no
    /// `c, d, e`); `k ≤ m` for `a, b` and `1 ≤ k ≤ m` for `c, d, e` when
    /// `2d = m`.
    pub fn validate(&self) -> Result<(), DeformationError> {
        let bad = |name: &'static str, k: i64, reason: String| Err(DeformationError::IncompatibleIndex { name, k, reason });
        match self.resonance() {
            None => {
                for (name, map) in [("a", &self.a), ("b", &self.b)] {
                    if let Some((&k, _)) = map.iter().find(|(&k, _)| k < 0) {
                        return bad(name, k, "k >= 0 when 2d is not a natural number".into());
                    }
                }
                for (name, map) in [("c", &self.c), ("d", &self.d_), ("e", &self.e)] {
                    if let Some((&k, _)) = map.iter().next() {
                        return bad(name, k, "only present when 2d is a natural number".into());
                    }
                }
            }
            Some(m) => {
                let m = m as i64;
                for (name, map) in [("a", &self.a), ("b", &self.b)] {
                    if let Some((&k, _)) = map.iter().find(|(&k, _)| k > m) {
                        return bad(name, k, format!("k <= m = {m}"));
                    }
                }
                for (name, map) in [("c", &self.c), ("d", &self.d_), ("e", &self.e)] {
                    if let Some((&k, _)) = map.iter().find(|(&k, _)| k < 1 || k > m) {
                        return bad(name, k, format!("1 <= k <= m = {m}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The example family at `2d = m`: `b = d = 0`, `c_k = e_k`, and
    /// `a_k = 2a_{−k}` wherever `c_k ≠ 0`. The free values are taken as
    /// `a_{−k} = 1` for `k ≥ 0` down to `m − K`, `c_k = e_k = k`.
    pub fn example(m: u32, k_max: usize) -> Self {
        let m_i = m as i64;
        let mut p = Self::new(frac(m_i, 2));
        for k in (m_i - k_max as i64)..=0 {
            p.set('a', k, int(1));
        }
        for k in 1..=m_i {
            p.set('a', k, int(2));
            p.set('c', k, int(k));
            p.set('e', k, int(k));
        }
        p
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("parameters serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameters serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

// Wire format: `{"d": "3/2", "a": {"0": "1"}, …, "d_k": {...}, "e": {...}}`.
// On input a second `"d"` key whose value is an object is read as the
// `d_k` family, so documents that use `"d"` for both parse as well.
impl Serialize for DeformationParams {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let render = |m: &BTreeMap<i64, Rational>| -> BTreeMap<String, RationalString> {
            m.iter().map(|(k, v)| (k.to_string(), RationalString(v.clone()))).collect()
        };
        let mut map = s.serialize_map(Some(6))?;
        map.serialize_entry("d", &format_rational(&self.d))?;
        map.serialize_entry("a", &render(&self.a))?;
        map.serialize_entry("b", &render(&self.b))?;
        map.serialize_entry("c", &render(&self.c))?;
        map.serialize_entry("d_k", &render(&self.d_))?;
        map.serialize_entry("e", &render(&self.e))?;
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarOrFamily {
    Scalar(String),
    Family(BTreeMap<String, String>),
}

fn parse_family<E: de::Error>(raw: BTreeMap<String, String>) -> Result<BTreeMap<i64, Rational>, E> {
    raw.into_iter()
        .map(|(k, v)| {
            let k: i64 = k
                .trim()
                .parse()
                .map_err(|_| E::custom(format!("index {k:?} is not an integer")))?;
            let v = parse_rational(&v).map_err(E::custom)?;
            Ok((k, v))
        })
        .collect()
}

impl<'de> Deserialize<'de> for DeformationParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ParamsVisitor;

        impl<'de> Visitor<'de> for ParamsVisitor {
            type Value = DeformationParams;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object with the weight \"d\" and the families a, b, c, d_k, e")
            }

            fn visit_map<M: MapAccess<'de>>(self, mut map: M) -> Result<Self::Value, M::Error> {
                let mut weight: Option<Rational> = None;
                let mut families: BTreeMap<char, BTreeMap<i64, Rational>> = BTreeMap::new();
                let mut put = |name: char, raw: BTreeMap<String, String>| -> Result<(), M::Error> {
                    if families.contains_key(&name) {
                        return Err(de::Error::custom(format!("family {name} given twice")));
                    }
                    families.insert(name, parse_family(raw)?);
                    Ok(())
                };
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "d" => match map.next_value::<ScalarOrFamily>()? {
                            ScalarOrFamily::Scalar(s) => {
                                if weight.is_some() {
                                    return Err(de::Error::custom("weight d given twice"));
                                }
                                weight = Some(parse_rational(&s).map_err(de::Error::custom)?);
                            }
                            ScalarOrFamily::Family(raw) => put('d', raw)?,
                        },
                        "d_k" => put('d', map.next_value()?)?,
                        "a" | "b" | "c" | "e" => {
                            let name = key.chars().next().expect("nonempty key");
                            put(name, map.next_value()?)?
                        }
                        other => return Err(de::Error::unknown_field(other, &["d", "a", "b", "c", "d_k", "e"])),
                    }
                }
                let mut p = DeformationParams::new(weight.ok_or_else(|| de::Error::missing_field("d"))?);
                for (name, fam) in families {
                    *p.map_mut(name) = fam;
                }
                Ok(p)
            }
        }

        deserializer.deserialize_map(ParamsVisitor)
    }
}

/// `(source component, target component)`.
pub type Block = (usize, usize);

/// A block of the deformation that falls outside the truncation window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationLoss {
    pub parameter: String,
    pub source: usize,
    pub target: usize,
    /// The smallest `K` that keeps the block.
    pub min_k: usize,
}

/// An endomorphism of the truncated module, stored block by block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockEndomorphism {
    pub blocks: BTreeMap<Block, DiffOperator>,
}

impl BlockEndomorphism {
    pub fn add_block(&mut self, block: Block, op: &DiffOperator) {
        let entry = self.blocks.entry(block);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(op.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + op;
                o.insert(sum);
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            blocks: self.blocks.iter().map(|(b, op)| (*b, op.scale(c))).collect(),
        }
    }

    pub fn add(&self, other: &BlockEndomorphism) -> Self {
        let mut out = self.clone();
        for (b, op) in &other.blocks {
            out.add_block(*b, op);
        }
        out
    }

    /// `self ∘ other`: block `(s, t)` collects `self(c → t) ∘ other(s → c)`.
    pub fn compose(&self, other: &BlockEndomorphism) -> Self {
        let mut out = Self::default();
        for (&(s, c), q) in &other.blocks {
            for (&(c2, t), p) in self.blocks.range((c, 0)..=(c, usize::MAX)) {
                debug_assert_eq!(c, c2);
                out.add_block((s, t), &p.compose(q).expect("blocks share the middle weight"));
            }
        }
        out
    }

    /// `[P, Q] = P∘Q − (−1)^{|P||Q|} Q∘P` for homogeneous `P, Q`.
    pub fn supercommutator(&self, p_parity: Parity, other: &BlockEndomorphism, q_parity: Parity) -> Self {
        let pq = self.compose(other);
        let qp = other.compose(self);
        pq.add(&qp.scale(&-sign(koszul(p_parity, q_parity))))
    }

    /// Blocks where `self` and `other` differ, with both sides rendered.
    pub fn differences(&self, other: &BlockEndomorphism) -> Vec<(Block, String, String)> {
        let mut keys: Vec<Block> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .filter_map(|b| {
                let (x, y) = (self.blocks.get(&b), other.blocks.get(&b));
                let same = match (x, y) {
                    (Some(x), Some(y)) => x.op_equals(y).unwrap_or(false),
                    (Some(x), None) => x.is_zero(),
                    (None, Some(y)) => y.is_zero(),
                    (None, None) => true,
                };
                (!same).then(|| {
                    let show = |o: Option<&DiffOperator>| o.map(|o| o.to_string()).unwrap_or_else(|| "0".into());
                    (b, show(x), show(y))
                })
            })
            .collect()
    }
}

/// The cocycle multiplying a parameter, with the block it occupies.
fn slot_cocycle(module: &TruncatedSymbolModule, slot: Slot) -> (CocycleId, i64, i64) {
    let k = slot.k;
    match module.resonance() {
        None => {
            let family = if slot.name == 'a' { Family::Omega } else { Family::OmegaTilde };
            (CocycleId::omega(family, k, module.d.clone()), k, k)
        }
        Some(m) => {
            let m = m as i64;
            let family = match slot.name {
                'a' => Family::Gamma,
                'b' => Family::GammaTilde,
                'c' => Family::BigGamma,
                'd' => Family::BigGammaTilde,
                _ => Family::BigGammaBar,
            };
            match slot.name {
                'a' | 'b' => (CocycleId::new(family, k), m - k, m - k),
                _ => (CocycleId::new(family, k), m + k, m - k),
            }
        }
    }
}

/// Every parameter slot whose cocycle fits in the window.
pub fn window_slots(module: &TruncatedSymbolModule) -> Vec<Slot> {
    let mut out = Vec::new();
    match module.resonance() {
        None => {
            for name in ['a', 'b'] {
                out.extend((0..=module.k as i64).map(|k| Slot { name, k }));
            }
        }
        Some(m) => {
            let m = m as i64;
            for name in ['a', 'b'] {
                out.extend((m - module.k as i64..=m).map(|k| Slot { name, k }));
            }
            for name in ['c', 'd', 'e'] {
                out.extend((1..=m).filter(|k| m + k <= module.k as i64).map(|k| Slot { name, k }));
            }
        }
    }
    out
}

/// The first-order term `L¹` placed on the blocks of a truncated module.
#[derive(Clone, Debug)]
pub struct FirstOrder {
    pub module: TruncatedSymbolModule,
    pub blocks: BTreeMap<Block, Cochain1>,
    pub losses: Vec<TruncationLoss>,
}

impl FirstOrder {
    /// `L¹(g)` as an endomorphism of the module.
    pub fn at(&self, g: OspElement) -> BlockEndomorphism {
        let mut out = BlockEndomorphism::default();
        for (b, c) in &self.blocks {
            let v = c.value(g);
            if !v.is_zero() {
                out.add_block(*b, v);
            }
        }
        out
    }

    pub fn endomorphisms(&self) -> BTreeMap<OspElement, BlockEndomorphism> {
        OspElement::ALL.iter().map(|&g| (g, self.at(g))).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Cochain1::is_zero)
    }
}

fn check_module(p: &DeformationParams, module: &TruncatedSymbolModule) -> Result<(), DeformationError> {
    p.validate()?;
    if p.d != module.d {
        return Err(DeformationError::WeightMismatch {
            module: format_rational(&module.d),
            params: format_rational(&p.d),
        });
    }
    Ok(())
}

/// `L¹ = Σ(a_kω_k + b_kω̃_k)` when `2d ∉ ℕ`, and
/// `Σ(a_kγ_k + b_kγ̃_k) + Σ(c_kΓ_k + d_kΓ̃_k + e_kΓ̄_k)` when `2d = m`.
/// Diagonal terms sit on component `k` (resp. `m − k`), the `Γ` terms on
/// `m + k → m − k`.
pub fn build_l1(p: &DeformationParams, module: &TruncatedSymbolModule) -> Result<FirstOrder, DeformationError> {
    check_module(p, module)?;
    let mut blocks: BTreeMap<Block, Cochain1> = BTreeMap::new();
    let mut losses = Vec::new();
    for (slot, value) in p.nonzero() {
        let (id, source, target) = slot_cocycle(module, slot);
        if source > module.k as i64 {
            losses.push(TruncationLoss {
                parameter: slot.to_string(),
                source: source as usize,
                target: target as usize,
                min_k: source as usize,
            });
            continue;
        }
        let block = (source as usize, target as usize);
        let term = build(&id)?.scale(&value);
        let sum = match blocks.remove(&block) {
            Some(prev) => prev.checked_add(&term)?,
            None => term,
        };
        blocks.insert(block, sum);
    }
    Ok(FirstOrder {
        module: module.clone(),
        blocks,
        losses,
    })
}

/// `½ L¹∨L¹` as a map from blocks to 2-cochains.
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub module: TruncatedSymbolModule,
    pub blocks: BTreeMap<Block, Cochain2>,
    pub losses: Vec<TruncationLoss>,
}

impl Obstruction {
    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Cochain2::is_zero)
    }

    pub fn nonzero_blocks(&self) -> Vec<Block> {
        self.blocks.iter().filter(|(_, c)| !c.is_zero()).map(|(b, _)| *b).collect()
    }
}

fn block_of(module: &TruncatedSymbolModule, c: &Cochain2) -> Block {
    let s = module.component_of(c.source_weight()).expect("cup of window blocks stays in the window");
    let t = module.component_of(c.target_weight()).expect("cup of window blocks stays in the window");
    (s, t)
}

fn accumulate(into: &mut BTreeMap<Block, Cochain2>, block: Block, c: &Cochain2) -> Result<(), CohomologyError> {
    let sum = match into.remove(&block) {
        Some(prev) => prev.checked_add(c)?,
        None => c.clone(),
    };
    into.insert(block, sum);
    Ok(())
}

/// `P∨Q` for two blocks, `None` when neither composition is defined.
fn block_cup(p: &Cochain1, q: &Cochain1) -> Result<Option<Cochain2>, CohomologyError> {
    match cup(p, q) {
        Ok(c) => Ok(Some(c)),
        Err(CohomologyError::Incomposable { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `½ L¹∨L¹`, summed over ordered pairs of blocks.
pub fn obstruction2(p: &DeformationParams, module: &TruncatedSymbolModule) -> Result<Obstruction, DeformationError> {
    let l1 = build_l1(p, module)?;
    let blocks: Vec<&Cochain1> = l1.blocks.values().collect();
    let half = frac(1, 2);
    let pairs: Vec<(usize, usize)> = (0..blocks.len())
        .flat_map(|i| (0..blocks.len()).map(move |j| (i, j)))
        .collect();
    let products: Vec<Option<Cochain2>> = pairs
        .par_iter()
        .map(|&(i, j)| block_cup(blocks[i], blocks[j]))
        .collect::<Result<_, _>>()?;
    let mut out = BTreeMap::new();
    for c in products.into_iter().flatten() {
        accumulate(&mut out, block_of(module, &c), &c.scale(&half))?;
    }
    Ok(Obstruction {
        module: module.clone(),
        blocks: out,
        losses: l1.losses,
    })
}

/// The six coefficients multiplying `Φ_1..Φ_6` in the `Γ_k` block of
/// `½ L¹∨L¹`, as given by the cup-product relations (no overall `½`).
pub fn obstruction_coefficients(p: &DeformationParams, k: i64) -> [Rational; 6] {
    let g = |n: char, i: i64| p.get(n, i);
    let (ak, bk, ck, dk, ek) = (g('a', k), g('b', k), g('c', k), g('d', k), g('e', k));
    let (am, bm) = (g('a', -k), g('b', -k));
    [
        &ak * &dk - &ck * &bm,
        &ak * &ek - &ck * &am - &ek * &am,
        &bk * &dk - &dk * &bm,
        &bk * &ck + &bk * &ek,
        &bk * &ck + &dk * &am,
        &ek * &bm,
    ]
}

/// Compares each obstruction block with its closed form: `Σ coefficient_i Φ_i`
/// on the `Γ_k` blocks and `½a²ω∨ω + ab ω∨ω̃ + ½b² ω̃∨ω̃` (resp. with `γ`) on
/// the diagonal. Divergences from the `½`-weighted forms are noted, not
/// counted as mismatches.
pub fn crosscheck_obstruction(p: &DeformationParams, module: &TruncatedSymbolModule) -> Result<VerificationReport, DeformationError> {
    let obs = obstruction2(p, module)?;
    let mut report = VerificationReport::new("obstruction closed forms");
    let half = frac(1, 2);
    let zero_like = |c: &Cochain2| Cochain2::zero(c.source_weight().clone(), c.target_weight().clone(), Parity::Even);
    let mut expected: BTreeMap<Block, (Cochain2, Cochain2)> = BTreeMap::new();

    let diagonal = |k: i64| -> Result<(Cochain1, Cochain1), DeformationError> {
        let (a, _, _) = slot_cocycle(module, Slot { name: 'a', k });
        let (b, _, _) = slot_cocycle(module, Slot { name: 'b', k });
        Ok((build(&a)?, build(&b)?))
    };
    let diag_ks: Vec<i64> = match module.resonance() {
        None => (0..=module.k as i64).collect(),
        Some(m) => (m as i64 - module.k as i64..=m as i64).collect(),
    };
    for k in diag_ks {
        let (a, b) = (p.get('a', k), p.get('b', k));
        if a.is_zero() && b.is_zero() {
            continue;
        }
        let (_, s, t) = slot_cocycle(module, Slot { name: 'a', k });
        let (w, wt) = diagonal(k)?;
        let ww = cup(&w, &w)?;
        let wwt = cup(&w, &wt)?;
        let wtwt = cup(&wt, &wt)?;
        let derived = ww
            .scale(&(&half * &a * &a))
            .checked_add(&wwt.scale(&(&a * &b)))?
            .checked_add(&wtwt.scale(&(&half * &b * &b)))?;
        // Displayed: ½(a b Ω1 + b² Ω2) when 2d ∉ ℕ, nothing when 2d = m.
        let displayed = match module.resonance() {
            None => wwt.scale(&(&half * &a * &b)).checked_add(&wtwt.scale(&(&half * &b * &b)))?,
            Some(_) => zero_like(&ww),
        };
        expected.insert((s as usize, t as usize), (derived, displayed));
    }
    if let Some(m) = module.resonance() {
        for k in 1..=m as i64 {
            if m as i64 + k > module.k as i64 {
                continue;
            }
            let coeffs = obstruction_coefficients(p, k);
            if coeffs.iter().all(Zero::is_zero) {
                continue;
            }
            let mut derived: Option<Cochain2> = None;
            for (i, c) in coeffs.iter().enumerate() {
                let term = phi(i + 1, k)?.scale(c);
                derived = Some(match derived {
                    Some(d) => d.checked_add(&term)?,
                    None => term,
                });
            }
            let derived = derived.expect("six terms");
            let displayed = derived.scale(&half);
            expected.insert(((m as i64 + k) as usize, (m as i64 - k) as usize), (derived, displayed));
        }
    }

    let mut keys: Vec<Block> = obs.blocks.keys().chain(expected.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    for b in keys {
        let computed = obs.blocks.get(&b);
        let label = format!("block {} -> {}", b.0, b.1);
        match (computed, expected.get(&b)) {
            (Some(c), Some((derived, displayed))) => {
                report.record(c.equals(derived)?, &label, derived, c);
                if !c.equals(displayed)? {
                    report.note(format!("{label}: the ½-weighted displayed form differs from the computed block"));
                }
            }
            (Some(c), None) => report.record(c.is_zero(), &label, "0", c),
            (None, Some((derived, _))) => report.record(derived.is_zero(), &label, derived, "0"),
            (None, None) => {}
        }
    }
    Ok(report)
}

/// Verdict of the closed-form integrability conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "violated")]
pub enum Integrability {
    Integrable,
    Obstructed(Vec<String>),
}

impl Integrability {
    pub fn is_integrable(&self) -> bool {
        matches!(self, Integrability::Integrable)
    }
}

/// The condition names for the `Γ_k` blocks, in coefficient order.
pub const RESONANT_CONDITIONS: [&str; 6] = [
    "a_k d_k − c_k b_{−k}",
    "a_k e_k − c_k a_{−k} − e_k a_{−k}",
    "b_k d_k − d_k b_{−k}",
    "b_k c_k + b_k e_k",
    "b_k c_k + d_k a_{−k}",
    "e_k b_{−k}",
];

/// `b_k = 0` for all `k` when `2d ∉ ℕ`; when `2d = m`, the six
/// coefficients of [`obstruction_coefficients`] vanish for `1 ≤ k ≤ m`.
pub fn check_integrability(p: &DeformationParams) -> Result<Integrability, DeformationError> {
    p.validate()?;
    let mut violated = Vec::new();
    match p.resonance() {
        None => {
            for (k, v) in &p.b {
                if !v.is_zero() {
                    violated.push(format!("b_{k} ≠ 0"));
                }
            }
        }
        Some(m) => {
            for k in 1..=m as i64 {
                for (name, c) in RESONANT_CONDITIONS.iter().zip(obstruction_coefficients(p, k)) {
                    if !c.is_zero() {
                        violated.push(format!("{name} ≠ 0 (k = {k})"));
                    }
                }
            }
        }
    }
    Ok(if violated.is_empty() {
        Integrability::Integrable
    } else {
        Integrability::Obstructed(violated)
    })
}

/// One block of the obstruction together with its coboundary certificate.
#[derive(Clone, Debug, Serialize)]
pub struct BlockSolvability {
    pub source: usize,
    pub target: usize,
    pub certificate: LinearCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Solvability {
    /// Every nonzero block is a coboundary.
    pub solvable: bool,
    pub blocks: Vec<BlockSolvability>,
}

fn block_spec(module: &TruncatedSymbolModule, block: Block) -> AnsatzSpec {
    let (s, t) = block;
    let k = match module.resonance() {
        Some(m) => (m as i64 - t as i64).unsigned_abs().max((s as i64 - m as i64).unsigned_abs()),
        None => s as u64,
    };
    AnsatzSpec::for_k(k as usize)
}

/// Decides, block by block, whether `½ L¹∨L¹` is a coboundary.
pub fn solvability(p: &DeformationParams, module: &TruncatedSymbolModule, spec: Option<AnsatzSpec>) -> Result<Solvability, DeformationError> {
    let obs = obstruction2(p, module)?;
    let mut blocks = Vec::new();
    for b in obs.nonzero_blocks() {
        let spec = spec.unwrap_or_else(|| block_spec(module, b));
        let certificate = solve_coboundary(&CoboundaryProblem::single(&obs.blocks[&b]), &spec)?;
        blocks.push(BlockSolvability {
            source: b.0,
            target: b.1,
            certificate,
        });
    }
    Ok(Solvability {
        solvable: blocks.iter().all(|b| b.certificate.is_consistent()),
        blocks,
    })
}

/// `½ L¹∨L¹` expanded in the products of the window cocycles: for every
/// block, the list of `(monomial, product)` with `monomial = p_α p_β`.
#[derive(Clone, Debug)]
pub struct ObstructionBasis {
    pub module: TruncatedSymbolModule,
    pub blocks: BTreeMap<Block, Vec<(Slot, Slot, Cochain2)>>,
}

fn monomial_label(x: Slot, y: Slot) -> String {
    if x == y {
        format!("{x}^2")
    } else {
        format!("{x}*{y}")
    }
}

impl ObstructionBasis {
    /// Products `C_α∨C_β` (`α < β`) and `½ C_α∨C_α` over the window slots;
    /// zero products are dropped.
    pub fn compute(module: &TruncatedSymbolModule) -> Result<Self, DeformationError> {
        let slots = window_slots(module);
        let cocycles: Vec<Cochain1> = slots
            .iter()
            .map(|&s| build(&slot_cocycle(module, s).0))
            .collect::<Result<_, _>>()?;
        let pairs: Vec<(usize, usize)> = (0..slots.len())
            .flat_map(|i| (i..slots.len()).map(move |j| (i, j)))
            .collect();
        let half = frac(1, 2);
        let products: Vec<Option<Cochain2>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                Ok(block_cup(&cocycles[i], &cocycles[j])?.map(|c| if i == j { c.scale(&half) } else { c }))
            })
            .collect::<Result<_, CohomologyError>>()?;
        let mut blocks: BTreeMap<Block, Vec<(Slot, Slot, Cochain2)>> = BTreeMap::new();
        for (&(i, j), c) in pairs.iter().zip(products) {
            if let Some(c) = c.filter(|c| !c.is_zero()) {
                blocks.entry(block_of(module, &c)).or_default().push((slots[i], slots[j], c));
            }
        }
        Ok(Self {
            module: module.clone(),
            blocks,
        })
    }

    fn monomial_values(&self, p: &DeformationParams, block: Block) -> BTreeMap<String, Rational> {
        self.blocks
            .get(&block)
            .into_iter()
            .flatten()
            .map(|(x, y, _)| (monomial_label(*x, *y), p.get(x.name, x.k) * p.get(y.name, y.k)))
            .collect()
    }

    /// `½ L¹∨L¹` from the precomputed products.
    pub fn obstruction(&self, p: &DeformationParams) -> Result<BTreeMap<Block, Cochain2>, DeformationError> {
        let mut out = BTreeMap::new();
        for (b, terms) in &self.blocks {
            for (x, y, c) in terms {
                let v = p.get(x.name, x.k) * p.get(y.name, y.k);
                if !v.is_zero() {
                    accumulate(&mut out, *b, &c.scale(&v))?;
                }
            }
        }
        Ok(out)
    }

    /// One symbolic coboundary solve per block, over the monomials.
    pub fn certificates(&self, spec: Option<AnsatzSpec>) -> Result<SolvabilityTable, DeformationError> {
        let mut certificates = BTreeMap::new();
        for (b, terms) in &self.blocks {
            let targets = terms.iter().map(|(x, y, c)| (monomial_label(*x, *y), c.clone())).collect();
            let spec = spec.unwrap_or_else(|| block_spec(&self.module, *b));
            let cert = solve_coboundary(&CoboundaryProblem::combination(targets)?, &spec)?;
            certificates.insert(*b, cert);
        }
        Ok(SolvabilityTable { certificates })
    }
}

/// Per-block certificates for the symbolic obstruction: a parameter vector
/// gives a coboundary on a block exactly when its monomials satisfy the
/// block's scalar relations.
#[derive(Clone, Debug, Serialize)]
pub struct SolvabilityTable {
    #[serde(serialize_with = "serialize_block_map")]
    pub certificates: BTreeMap<Block, LinearCertificate>,
}

fn serialize_block_map<S: Serializer>(m: &BTreeMap<Block, LinearCertificate>, s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(m.len()))?;
    for ((src, tgt), c) in m {
        map.serialize_entry(&format!("{src}->{tgt}"), c)?;
    }
    map.end()
}

impl SolvabilityTable {
    /// Blocks whose relations fail for `p`.
    pub fn failing_blocks(&self, basis: &ObstructionBasis, p: &DeformationParams) -> Vec<Block> {
        self.certificates
            .iter()
            .filter(|(b, cert)| {
                let values = basis.monomial_values(p, **b);
                let consistent = cert.status != CertificateStatus::Inconsistent || values.values().all(Zero::is_zero);
                !(consistent && satisfies_relations(cert, &values))
            })
            .map(|(b, _)| *b)
            .collect()
    }

    pub fn solvable(&self, basis: &ObstructionBasis, p: &DeformationParams) -> bool {
        self.failing_blocks(basis, p).is_empty()
    }

    pub fn all_verified(&self) -> bool {
        self.certificates.values().all(|c| c.verified)
    }
}

/// `L̃_g = L_g + L¹(g)` on every component of the window.
fn deformed_action(l1: &FirstOrder) -> BTreeMap<OspElement, BlockEndomorphism> {
    let module = &l1.module;
    OspElement::ALL
        .iter()
        .map(|&g| {
            let mut op = l1.at(g);
            let el = g.element();
            for j in 0..=module.k {
                op.add_block((j, j), &lie_operator(&el, &module.weight(j)));
            }
            (g, op)
        })
        .collect()
}

/// Pair label, blocks compared, and the differing blocks.
type PairCheck = (String, usize, Vec<(Block, String, String)>);

/// Checks `L̃_{[f,g]} = [L̃_f, L̃_g]` exactly for all 64 ordered basis pairs,
/// with `L^{≥2} = 0`. Refuses parameters that fail
/// [`check_integrability`].
pub fn verify_flat(p: &DeformationParams, module: &TruncatedSymbolModule) -> Result<VerificationReport, DeformationError> {
    if let Integrability::Obstructed(v) = check_integrability(p)? {
        return Err(DeformationError::Obstructed(v));
    }
    homomorphism_report(p, module)
}

/// The homomorphism check behind [`verify_flat`], without the
/// integrability precondition.
pub fn homomorphism_report(p: &DeformationParams, module: &TruncatedSymbolModule) -> Result<VerificationReport, DeformationError> {
    let l1 = build_l1(p, module)?;
    let action = deformed_action(&l1);
    let pairs: Vec<(OspElement, OspElement)> = OspElement::ALL
        .iter()
        .flat_map(|&f| OspElement::ALL.iter().map(move |&g| (f, g)))
        .collect();
    let results: Vec<PairCheck> = pairs
        .par_iter()
        .map(|&(f, g)| {
            let mut lhs = BlockEndomorphism::default();
            for (h, c) in basis_bracket(f, g).iter() {
                lhs = lhs.add(&action[&h].scale(c));
            }
            let rhs = action[&f].supercommutator(f.parity(), &action[&g], g.parity());
            let mut keys: Vec<Block> = lhs.blocks.keys().chain(rhs.blocks.keys()).copied().collect();
            keys.sort_unstable();
            keys.dedup();
            (format!("[{f},{g}]"), keys.len().max(1), lhs.differences(&rhs))
        })
        .collect();
    let mut report = VerificationReport::new(format!(
        "flat deformation on K = {} (d = {})",
        module.k,
        format_rational(&module.d)
    ));
    for (pair, blocks, diffs) in results {
        let clean = blocks - diffs.len();
        for _ in 0..clean {
            report.record(true, &pair, "", "");
        }
        for (b, expected, computed) in diffs {
            report.record(false, format!("{pair} block {} -> {}", b.0, b.1), expected, computed);
        }
    }
    for loss in &l1.losses {
        report.note(format!(
            "{} on block {} -> {} lies outside the window; K >= {} keeps it",
            loss.parameter, loss.source, loss.target, loss.min_k
        ));
    }
    Ok(report)
}
