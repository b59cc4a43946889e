//! Multi-indices over a finite ordered variable set, their partial order,
//! finite co-ideals, and the partition enumerations behind every
//! coefficient formula.
//!
//! A multi-index is a finitely supported exponent map on a variable set;
//! a co-ideal is a downward closed set of multi-indices and serves as the
//! support universe of a truncated series ring. Ordered partitions of a
//! multi-index drive unit inversion; indexed partitions drive the
//! substitution coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// A finite ordered set of distinct variable names.
///
/// The order is fixed at construction and is the tie-breaker for every
/// deterministic enumeration and serialization in the crate. The empty
/// variable set is allowed; the monoid of multi-indices over it is `{0}`.
#[derive(Clone, Debug, Eq, Hash)]
pub struct VarSet {
    names: Arc<Vec<String>>,
}

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        Ok(VarSet { names: Arc::new(names) })
    }

    pub fn empty() -> Self {
        VarSet { names: Arc::new(Vec::new()) }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, pos: usize) -> &str {
        &self.names[pos]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Disjoint union `s ⊔ t`, keeping `self`'s names first.
    pub fn union_disjoint(&self, other: &VarSet) -> Result<VarSet> {
        let mut names = self.names.as_ref().clone();
        for n in other.names.iter() {
            if names.contains(n) {
                return Err(Error::NameCollision(n.clone()));
            }
            names.push(n.clone());
        }
        Ok(VarSet { names: Arc::new(names) })
    }
}

impl PartialEq for VarSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.names, &other.names) || self.names == other.names
    }
}

/// An element of the free commutative monoid on a [`VarSet`]: a sparse
/// exponent vector with no stored zeros.
#[derive(Clone, Debug, Eq, PartialEq, Hash)]
pub struct MultiIndex {
    vars: VarSet,
    exps: BTreeMap<u32, u32>,
}

impl MultiIndex {
    pub fn zero(vars: &VarSet) -> Self {
        MultiIndex { vars: vars.clone(), exps: BTreeMap::new() }
    }

    /// The canonical basis element with exponent 1 at `pos`.
    pub fn unit(vars: &VarSet, pos: usize) -> Self {
        let mut exps = BTreeMap::new();
        exps.insert(pos as u32, 1);
        MultiIndex { vars: vars.clone(), exps }
    }

    pub fn from_exps(vars: &VarSet, pairs: &[(usize, u32)]) -> Result<Self> {
        let mut exps = BTreeMap::new();
        for &(pos, e) in pairs {
            if pos >= vars.len() {
                return Err(Error::Precondition(format!(
                    "variable position {pos} out of range"
                )));
            }
            if e > 0 {
                *exps.entry(pos as u32).or_insert(0) += e;
            }
        }
        Ok(MultiIndex { vars: vars.clone(), exps })
    }

    pub fn from_names(vars: &VarSet, pairs: &[(&str, u32)]) -> Result<Self> {
        let mut resolved = Vec::with_capacity(pairs.len());
        for &(name, e) in pairs {
            let pos = vars
                .index_of(name)
                .ok_or_else(|| Error::Precondition(format!("unknown variable `{name}`")))?;
            resolved.push((pos, e));
        }
        Self::from_exps(vars, &resolved)
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn get(&self, pos: usize) -> u32 {
        self.exps.get(&(pos as u32)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty()
    }

    /// `|α|`, the sum of all exponents.
    pub fn norm(&self) -> u32 {
        self.exps.values().sum()
    }

    /// Variable positions with nonzero exponent, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.exps.keys().map(|&k| k as usize).collect()
    }

    pub fn exps(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps.iter().map(|(&k, &v)| (k as usize, v))
    }

    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.vars != other.vars {
            return Err(Error::AmbientMismatch);
        }
        let mut exps = self.exps.clone();
        for (&k, &v) in &other.exps {
            *exps.entry(k).or_insert(0) += v;
        }
        Ok(MultiIndex { vars: self.vars.clone(), exps })
    }

    /// `self − other`, defined exactly when `other ≤ self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if self.vars != other.vars {
            return None;
        }
        let mut exps = self.exps.clone();
        for (&k, &v) in &other.exps {
            let cur = exps.get(&k).copied().unwrap_or(0);
            if cur < v {
                return None;
            }
            if cur == v {
                exps.remove(&k);
            } else {
                exps.insert(k, cur - v);
            }
        }
        Some(MultiIndex { vars: self.vars.clone(), exps })
    }

    /// The componentwise partial order: `a ≤ b` iff `b = a + γ` for some γ.
    pub fn leq(&self, other: &MultiIndex) -> Result<bool> {
        if self.vars != other.vars {
            return Err(Error::AmbientMismatch);
        }
        Ok(self
            .exps
            .iter()
            .all(|(&k, &v)| other.exps.get(&k).copied().unwrap_or(0) >= v))
    }

    /// Componentwise maximum `α ∨ β`.
    pub fn join(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.vars != other.vars {
            return Err(Error::AmbientMismatch);
        }
        let mut exps = self.exps.clone();
        for (&k, &v) in &other.exps {
            let e = exps.entry(k).or_insert(0);
            *e = (*e).max(v);
        }
        Ok(MultiIndex { vars: self.vars.clone(), exps })
    }

    /// Componentwise product `να` by a family of positive integers.
    pub fn scale(&self, nu: &[u32]) -> MultiIndex {
        let mut exps = BTreeMap::new();
        for (&k, &v) in &self.exps {
            let f = nu.get(k as usize).copied().unwrap_or(1);
            if f * v > 0 {
                exps.insert(k, f * v);
            }
        }
        MultiIndex { vars: self.vars.clone(), exps }
    }

    /// Re-index into a variable set containing all of `self`'s variables
    /// by name. Coefficient-preserving inclusion.
    pub fn embed_into(&self, target: &VarSet) -> Result<MultiIndex> {
        let mut exps = BTreeMap::new();
        for (pos, e) in self.exps() {
            let name = self.vars.name(pos);
            let tpos = target
                .index_of(name)
                .ok_or_else(|| Error::Precondition(format!("variable `{name}` missing in target")))?;
            exps.insert(tpos as u32, e);
        }
        Ok(MultiIndex { vars: target.clone(), exps })
    }

    /// Restrict to the variables of `target` (a subset by name), failing if
    /// any exponent lives outside it.
    pub fn project_onto(&self, target: &VarSet) -> Result<MultiIndex> {
        let mut exps = BTreeMap::new();
        for (pos, e) in self.exps() {
            let name = self.vars.name(pos);
            let tpos = target
                .index_of(name)
                .ok_or_else(|| Error::Precondition(format!("variable `{name}` missing in target")))?;
            exps.insert(tpos as u32, e);
        }
        Ok(MultiIndex { vars: target.clone(), exps })
    }

    fn dense(&self) -> Vec<u32> {
        (0..self.vars.len()).map(|i| self.get(i)).collect()
    }
}

/// Graded order: first by norm, then earlier-variable-heavy first, so that
/// over `{x, y}` the ascending sequence reads `1, x, y, x², xy, y², …`.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.vars != other.vars {
            return self.vars.names().cmp(other.vars.names());
        }
        match self.norm().cmp(&other.norm()) {
            Ordering::Equal => {}
            o => return o,
        }
        for i in 0..self.vars.len() {
            match self.get(i).cmp(&other.get(i)) {
                Ordering::Equal => continue,
                o => return o.reverse(),
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "1");
        }
        let mut first = true;
        for (pos, e) in self.exps() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", self.vars.name(pos))?;
            } else {
                write!(f, "{}^{}", self.vars.name(pos), e)?;
            }
        }
        Ok(())
    }
}

/// All `α ≤ b`, ascending in the graded order. Cardinality `Π (b_i + 1)`.
pub fn below(b: &MultiIndex) -> Vec<MultiIndex> {
    let dense = b.dense();
    let mut out = vec![BTreeMap::new()];
    for (pos, &cap) in dense.iter().enumerate() {
        if cap == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * (cap as usize + 1));
        for partial in &out {
            for e in 0..=cap {
                let mut p = partial.clone();
                if e > 0 {
                    p.insert(pos as u32, e);
                }
                next.push(p);
            }
        }
        out = next;
    }
    let mut all: Vec<MultiIndex> = out
        .into_iter()
        .map(|exps| MultiIndex { vars: b.vars.clone(), exps })
        .collect();
    all.sort();
    all
}

/// Remembers how a co-ideal was built, for bit-exact serialization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoIdealRepr {
    Tm(u32),
    NBeta(MultiIndex),
    Explicit,
}

/// A finite downward closed subset of the multi-index monoid containing 0.
///
/// Co-ideals are the truncation universes of series rings: the series ring
/// over `Δ` keeps exactly the monomials `s^α` with `α ∈ Δ`.
#[derive(Clone, Debug)]
pub struct CoIdeal {
    vars: VarSet,
    members: BTreeSet<MultiIndex>,
    repr: CoIdealRepr,
}

impl PartialEq for CoIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.members == other.members
    }
}

impl Eq for CoIdeal {}

impl CoIdeal {
    /// `t_m`: all indices of norm at most `m`.
    pub fn tm(vars: &VarSet, m: u32) -> CoIdeal {
        let mut members = BTreeSet::new();
        let mut frontier = vec![MultiIndex::zero(vars)];
        members.insert(MultiIndex::zero(vars));
        for _ in 0..m {
            let mut next = Vec::new();
            for alpha in frontier {
                for pos in 0..vars.len() {
                    let bumped = alpha.add(&MultiIndex::unit(vars, pos)).unwrap();
                    if members.insert(bumped.clone()) {
                        next.push(bumped);
                    }
                }
            }
            frontier = next;
        }
        CoIdeal { vars: vars.clone(), members, repr: CoIdealRepr::Tm(m) }
    }

    /// `n_β`: all indices `α ≤ β`.
    pub fn nbeta(beta: &MultiIndex) -> CoIdeal {
        let members: BTreeSet<MultiIndex> = below(beta).into_iter().collect();
        CoIdeal {
            vars: beta.vars().clone(),
            members,
            repr: CoIdealRepr::NBeta(beta.clone()),
        }
    }

    /// An explicit member set; errors unless it is downward closed and
    /// contains the zero index.
    pub fn explicit(vars: &VarSet, members: BTreeSet<MultiIndex>) -> Result<CoIdeal> {
        if !members.contains(&MultiIndex::zero(vars)) {
            return Err(Error::MissingZero);
        }
        for alpha in &members {
            if alpha.vars() != vars {
                return Err(Error::AmbientMismatch);
            }
            for b in below(alpha) {
                if !members.contains(&b) {
                    return Err(Error::NotDownwardClosed(format!("{b}")));
                }
            }
        }
        Ok(CoIdeal { vars: vars.clone(), members, repr: CoIdealRepr::Explicit })
    }

    /// The smallest co-ideal containing the given generators.
    pub fn generated_by(vars: &VarSet, gens: &[MultiIndex]) -> CoIdeal {
        let mut members: BTreeSet<MultiIndex> = BTreeSet::new();
        members.insert(MultiIndex::zero(vars));
        for g in gens {
            members.extend(below(g));
        }
        CoIdeal { vars: vars.clone(), members, repr: CoIdealRepr::Explicit }
    }

    pub(crate) fn from_members_unchecked(vars: &VarSet, members: BTreeSet<MultiIndex>) -> CoIdeal {
        debug_assert!(members.contains(&MultiIndex::zero(vars)));
        CoIdeal { vars: vars.clone(), members, repr: CoIdealRepr::Explicit }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn repr(&self) -> &CoIdealRepr {
        &self.repr
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.members.contains(alpha)
    }

    /// Members ascending in the graded order.
    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    pub fn max_norm(&self) -> u32 {
        self.members.iter().map(|a| a.norm()).max().unwrap_or(0)
    }

    pub fn intersect(&self, other: &CoIdeal) -> Result<CoIdeal> {
        if self.vars != other.vars {
            return Err(Error::AmbientMismatch);
        }
        let members: BTreeSet<MultiIndex> =
            self.members.intersection(&other.members).cloned().collect();
        Ok(CoIdeal { vars: self.vars.clone(), members, repr: CoIdealRepr::Explicit })
    }

    pub fn union(&self, other: &CoIdeal) -> Result<CoIdeal> {
        if self.vars != other.vars {
            return Err(Error::AmbientMismatch);
        }
        let members: BTreeSet<MultiIndex> =
            self.members.union(&other.members).cloned().collect();
        Ok(CoIdeal { vars: self.vars.clone(), members, repr: CoIdealRepr::Explicit })
    }

    /// The slice `Δ^m = Δ ∩ t_m`.
    pub fn slice(&self, m: u32) -> CoIdeal {
        let members: BTreeSet<MultiIndex> =
            self.members.iter().filter(|a| a.norm() <= m).cloned().collect();
        CoIdeal { vars: self.vars.clone(), members, repr: CoIdealRepr::Explicit }
    }

    /// True when `self ⊆ other` as sets (same ambient).
    pub fn subset_of(&self, other: &CoIdeal) -> bool {
        self.vars == other.vars && self.members.is_subset(&other.members)
    }

    /// Whether this co-ideal equals `t_m` for its max norm.
    pub fn is_full_tm(&self) -> bool {
        *self == CoIdeal::tm(&self.vars, self.max_norm())
    }

    /// The product co-ideal `∇ × Δ` over the disjoint union of variables.
    pub fn product(&self, other: &CoIdeal) -> Result<CoIdeal> {
        let union = self.vars.union_disjoint(&other.vars)?;
        let mut members = BTreeSet::new();
        for a in &self.members {
            let ea = a.embed_into(&union)?;
            for b in &other.members {
                let eb = b.embed_into(&union)?;
                members.insert(ea.add(&eb)?);
            }
        }
        Ok(CoIdeal { vars: union, members, repr: CoIdealRepr::Explicit })
    }
}

/// The `≤`-minimal elements of the complement ideal `Δ^c` with norm at most
/// `norm_cap`. Every element of `Δ^c` of norm within the cap dominates one
/// of them.
pub fn minimal_outside(delta: &CoIdeal, norm_cap: u32) -> Vec<MultiIndex> {
    let vars = delta.vars().clone();
    let mut out = Vec::new();
    // An element of the complement is minimal iff decrementing any one
    // coordinate lands back in the co-ideal.
    let mut stack: Vec<MultiIndex> = vec![MultiIndex::zero(&vars)];
    let mut seen: BTreeSet<MultiIndex> = stack.iter().cloned().collect();
    while let Some(alpha) = stack.pop() {
        if alpha.norm() > norm_cap {
            continue;
        }
        if !delta.contains(&alpha) {
            let minimal = alpha.support().iter().all(|&pos| {
                let down = alpha
                    .checked_sub(&MultiIndex::unit(&vars, pos))
                    .expect("support position");
                delta.contains(&down)
            });
            if minimal {
                out.push(alpha);
            }
            continue; // everything above is dominated
        }
        for pos in 0..vars.len() {
            let up = alpha.add(&MultiIndex::unit(&vars, pos)).unwrap();
            if seen.insert(up.clone()) {
                stack.push(up);
            }
        }
    }
    out.sort();
    out
}

/// A `d`-tuple of nonzero multi-indices with a prescribed sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    pub parts: Vec<MultiIndex>,
}

/// All ordered partitions of `alpha` into exactly `d` nonzero parts, in
/// lexicographic order on the part sequence. Empty when `d > |alpha|`;
/// `Par(0, 0)` is the single empty tuple.
pub fn enum_ordered_partitions(alpha: &MultiIndex, d: u32) -> Vec<OrderedPartition> {
    let mut out = Vec::new();
    if d as u64 > alpha.norm() as u64 {
        return out;
    }
    let mut parts: Vec<MultiIndex> = Vec::with_capacity(d as usize);
    rec_partitions(alpha, d, &mut parts, &mut out);
    out
}

fn rec_partitions(
    rest: &MultiIndex,
    d: u32,
    parts: &mut Vec<MultiIndex>,
    out: &mut Vec<OrderedPartition>,
) {
    if d == 0 {
        if rest.is_zero() {
            out.push(OrderedPartition { parts: parts.clone() });
        }
        return;
    }
    if d == 1 {
        if !rest.is_zero() {
            parts.push(rest.clone());
            out.push(OrderedPartition { parts: parts.clone() });
            parts.pop();
        }
        return;
    }
    for cand in below(rest) {
        if cand.is_zero() {
            continue;
        }
        let remaining = rest.checked_sub(&cand).expect("cand <= rest");
        if remaining.norm() < d - 1 {
            continue;
        }
        parts.push(cand);
        rec_partitions(&remaining, d - 1, parts, out);
        parts.pop();
    }
}

/// A map from the slot set `[α] = {(t, r) | 1 ≤ r ≤ α_t}` to nonzero
/// multi-indices over a second variable set, with a prescribed value sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedPartition {
    /// The shape multi-index `α` whose slots are being filled.
    pub shape: MultiIndex,
    /// The prescribed total `e` of all assigned values.
    pub total: MultiIndex,
    /// Slot `(variable position, repetition 1..=α_t)` to assigned value,
    /// in canonical slot order.
    pub assignment: Vec<((usize, u32), MultiIndex)>,
}

/// All indexed partitions in `Par(e, α)`, each exactly once, in a
/// deterministic order. Empty when `|α| > |e|`; `Par(0, 0)` is the single
/// empty assignment.
pub fn enum_indexed_partitions(e: &MultiIndex, alpha: &MultiIndex) -> Vec<IndexedPartition> {
    let mut slots = Vec::new();
    for (pos, mult) in alpha.exps() {
        for r in 1..=mult {
            slots.push((pos, r));
        }
    }
    enum_ordered_partitions(e, slots.len() as u32)
        .into_iter()
        .map(|op| IndexedPartition {
            shape: alpha.clone(),
            total: e.clone(),
            assignment: slots.iter().cloned().zip(op.parts).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> VarSet {
        VarSet::new(["x", "y"]).unwrap()
    }

    fn mi(vars: &VarSet, pairs: &[(&str, u32)]) -> MultiIndex {
        MultiIndex::from_names(vars, pairs).unwrap()
    }

    #[test]
    fn add_and_norm() {
        let v = xy();
        let a = mi(&v, &[("x", 1)]);
        let b = mi(&v, &[("y", 2)]);
        let s = a.add(&b).unwrap();
        assert_eq!(s, mi(&v, &[("x", 1), ("y", 2)]));
        assert_eq!(s.norm(), 3);
        assert_eq!(a.add(&MultiIndex::zero(&v)).unwrap(), a);
        let two = mi(&v, &[("x", 2)]);
        let three = mi(&v, &[("x", 3)]);
        assert_eq!(two.add(&three).unwrap(), mi(&v, &[("x", 5)]));
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let v = xy();
        let w = VarSet::new(["s"]).unwrap();
        let a = mi(&v, &[("x", 1)]);
        let b = MultiIndex::unit(&w, 0);
        assert!(matches!(a.add(&b), Err(Error::AmbientMismatch)));
        assert!(matches!(a.leq(&b), Err(Error::AmbientMismatch)));
        assert!(matches!(a.join(&b), Err(Error::AmbientMismatch)));
    }

    #[test]
    fn leq_examples() {
        let v = xy();
        assert!(mi(&v, &[("x", 1)]).leq(&mi(&v, &[("x", 1), ("y", 1)])).unwrap());
        assert!(!mi(&v, &[("x", 2)]).leq(&mi(&v, &[("y", 2)])).unwrap());
        let a = mi(&v, &[("x", 1), ("y", 3)]);
        assert!(a.leq(&a).unwrap());
    }

    #[test]
    fn join_examples() {
        let v = xy();
        let a = mi(&v, &[("x", 1), ("y", 3)]);
        let b = mi(&v, &[("x", 2)]);
        assert_eq!(a.join(&b).unwrap(), mi(&v, &[("x", 2), ("y", 3)]));
        assert_eq!(a.join(&MultiIndex::zero(&v)).unwrap(), a);
        assert_eq!(a.join(&a).unwrap(), a);
    }

    #[test]
    fn below_counts() {
        let v = xy();
        let b = mi(&v, &[("x", 1), ("y", 1)]);
        let under = below(&b);
        assert_eq!(under.len(), 4);
        assert_eq!(below(&MultiIndex::zero(&v)), vec![MultiIndex::zero(&v)]);
        assert_eq!(below(&mi(&v, &[("x", 2)])).len(), 3);
        // cardinality is the product of (exponent + 1)
        let big = mi(&v, &[("x", 2), ("y", 3)]);
        assert_eq!(below(&big).len(), 12);
    }

    #[test]
    fn tm_counts() {
        let x = VarSet::new(["x"]).unwrap();
        assert_eq!(CoIdeal::tm(&x, 0).len(), 1);
        assert_eq!(CoIdeal::tm(&x, 2).len(), 3);
        // direct enumeration oracle: all (i, j) with i + j <= 2
        let mut count = 0;
        for i in 0..=2u32 {
            for j in 0..=2u32 {
                if i + j <= 2 {
                    count += 1;
                }
            }
        }
        assert_eq!(CoIdeal::tm(&xy(), 2).len(), count);
        assert_eq!(count, 6);
    }

    #[test]
    fn coideal_ops() {
        let x = VarSet::new(["x"]).unwrap();
        let t3 = CoIdeal::tm(&x, 3);
        let t2 = CoIdeal::tm(&x, 2);
        assert_eq!(t3.intersect(&t2).unwrap(), t2);
        assert_eq!(t2.union(&CoIdeal::tm(&x, 0)).unwrap(), t2);
        let v = xy();
        let n = CoIdeal::nbeta(&mi(&v, &[("x", 2)]));
        let sliced = n.intersect(&CoIdeal::tm(&v, 1)).unwrap();
        let expect: BTreeSet<MultiIndex> =
            [MultiIndex::zero(&v), mi(&v, &[("x", 1)])].into_iter().collect();
        assert_eq!(sliced, CoIdeal::explicit(&v, expect).unwrap());
        assert_eq!(n.slice(1), sliced);
    }

    #[test]
    fn explicit_rejects_non_closed() {
        let v = xy();
        let members: BTreeSet<MultiIndex> =
            [MultiIndex::zero(&v), mi(&v, &[("x", 2)])].into_iter().collect();
        assert!(matches!(
            CoIdeal::explicit(&v, members),
            Err(Error::NotDownwardClosed(_))
        ));
        let no_zero: BTreeSet<MultiIndex> = BTreeSet::new();
        assert!(matches!(CoIdeal::explicit(&v, no_zero), Err(Error::MissingZero)));
    }

    #[test]
    fn downward_closure_exhaustive_scan() {
        // every constructed co-ideal is downward closed
        let v = xy();
        for coideal in [
            CoIdeal::tm(&v, 3),
            CoIdeal::nbeta(&mi(&v, &[("x", 2), ("y", 1)])),
            CoIdeal::tm(&v, 2).union(&CoIdeal::nbeta(&mi(&v, &[("y", 3)]))).unwrap(),
        ] {
            for alpha in coideal.iter() {
                for b in below(alpha) {
                    assert!(coideal.contains(&b));
                }
            }
        }
    }

    #[test]
    fn minimal_outside_examples() {
        let x = VarSet::new(["x"]).unwrap();
        let got = minimal_outside(&CoIdeal::tm(&x, 1), 3);
        assert_eq!(got, vec![mi(&x, &[("x", 2)])]);

        // oracle: enumerate the complement up to norm 3, keep elements with
        // no strictly smaller complement element
        let v = xy();
        let delta = CoIdeal::tm(&v, 1);
        let mut oracle = Vec::new();
        for i in 0..=3u32 {
            for j in 0..=3 - i {
                let a = mi(&v, &[("x", i), ("y", j)]);
                if delta.contains(&a) {
                    continue;
                }
                if below(&a).into_iter().filter(|b| *b != a).all(|b| delta.contains(&b)) {
                    oracle.push(a);
                }
            }
        }
        oracle.sort();
        let got = minimal_outside(&delta, 3);
        assert_eq!(got, oracle);
        assert_eq!(
            got,
            vec![
                mi(&v, &[("x", 2)]),
                mi(&v, &[("x", 1), ("y", 1)]),
                mi(&v, &[("y", 2)])
            ]
        );

        let n11 = CoIdeal::nbeta(&mi(&v, &[("x", 1), ("y", 1)]));
        assert_eq!(
            minimal_outside(&n11, 3),
            vec![mi(&v, &[("x", 2)]), mi(&v, &[("y", 2)])]
        );
    }

    #[test]
    fn ordered_partition_examples() {
        let x = VarSet::new(["x"]).unwrap();
        let p = enum_ordered_partitions(&mi(&x, &[("x", 2)]), 2);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].parts, vec![mi(&x, &[("x", 1)]), mi(&x, &[("x", 1)])]);

        let v = xy();
        let p = enum_ordered_partitions(&mi(&v, &[("x", 1), ("y", 1)]), 2);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].parts, vec![mi(&v, &[("x", 1)]), mi(&v, &[("y", 1)])]);
        assert_eq!(p[1].parts, vec![mi(&v, &[("y", 1)]), mi(&v, &[("x", 1)])]);

        assert!(enum_ordered_partitions(&mi(&x, &[("x", 1)]), 2).is_empty());
        // Par(0, 0) is a single empty tuple
        let z = enum_ordered_partitions(&MultiIndex::zero(&x), 0);
        assert_eq!(z.len(), 1);
        assert!(z[0].parts.is_empty());
    }

    #[test]
    fn indexed_partition_examples() {
        let u = VarSet::new(["u"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let e2 = mi(&u, &[("u", 2)]);
        let p = enum_indexed_partitions(&e2, &mi(&t, &[("t", 1)]));
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].assignment, vec![((0, 1), e2.clone())]);

        let p = enum_indexed_partitions(&e2, &mi(&t, &[("t", 2)]));
        assert_eq!(p.len(), 1);
        let u1 = mi(&u, &[("u", 1)]);
        assert_eq!(p[0].assignment, vec![((0, 1), u1.clone()), ((0, 2), u1)]);

        let e1 = mi(&u, &[("u", 1)]);
        assert!(enum_indexed_partitions(&e1, &mi(&t, &[("t", 2)])).is_empty());
    }

    #[test]
    fn enumeration_is_deterministic() {
        let v = xy();
        let alpha = mi(&v, &[("x", 2), ("y", 1)]);
        assert_eq!(enum_ordered_partitions(&alpha, 2), enum_ordered_partitions(&alpha, 2));
        let e = mi(&v, &[("x", 1), ("y", 2)]);
        let t = VarSet::new(["t"]).unwrap();
        let shape = mi(&t, &[("t", 2)]);
        assert_eq!(enum_indexed_partitions(&e, &shape), enum_indexed_partitions(&e, &shape));
    }

    #[test]
    fn partition_counting_bijection() {
        // |Par(e, μ+ν)| = Σ_{β+γ=e, |β|≥|μ|, |γ|≥|ν|} |Par(β,μ)|·|Par(γ,ν)|
        let s = xy();
        let t = VarSet::new(["t", "u"]).unwrap();
        let idxs: Vec<MultiIndex> = CoIdeal::tm(&t, 2).iter().cloned().collect();
        let es: Vec<MultiIndex> = CoIdeal::tm(&s, 4).iter().cloned().collect();
        for mu in &idxs {
            for nu in &idxs {
                let sum = mu.add(nu).unwrap();
                for e in &es {
                    if sum.norm() > e.norm() {
                        continue;
                    }
                    let lhs = enum_indexed_partitions(e, &sum).len();
                    let mut rhs = 0usize;
                    for beta in below(e) {
                        let gamma = e.checked_sub(&beta).unwrap();
                        if beta.norm() >= mu.norm() && gamma.norm() >= nu.norm() {
                            rhs += enum_indexed_partitions(&beta, mu).len()
                                * enum_indexed_partitions(&gamma, nu).len();
                        }
                    }
                    assert_eq!(lhs, rhs, "e={e} mu={mu} nu={nu}");
                }
            }
        }
    }

    #[test]
    fn empty_varset_degenerates() {
        let v = VarSet::empty();
        let z = MultiIndex::zero(&v);
        assert_eq!(below(&z), vec![z.clone()]);
        let t = CoIdeal::tm(&v, 5);
        assert_eq!(t.len(), 1);
        assert!(minimal_outside(&t, 4).is_empty());
    }

    #[test]
    fn order_is_graded_and_respects_example_listing() {
        let v = xy();
        let seq = [
            MultiIndex::zero(&v),
            mi(&v, &[("x", 1)]),
            mi(&v, &[("y", 1)]),
            mi(&v, &[("x", 2)]),
            mi(&v, &[("x", 1), ("y", 1)]),
            mi(&v, &[("y", 2)]),
        ];
        for w in seq.windows(2) {
            assert!(w[0] < w[1], "{} should precede {}", w[0], w[1]);
        }
    }
}
