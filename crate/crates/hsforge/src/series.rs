//! The truncated power series ring `A[[s]]_Δ` over a finite co-ideal:
//! arithmetic, truncations, order and support, the unit group with both
//! inversion procedures, and the external product.
//!
//! A series is a sparse map from the co-ideal into the polynomial algebra;
//! multiplication is the Cauchy product with every exponent outside `Δ`
//! discarded. The series variables must be disjoint from the coefficient
//! ring's generators.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{Poly, PolyRing};
use crate::multiindex::{below, enum_ordered_partitions, CoIdeal, MultiIndex, VarSet};
use crate::{Error, Result};

/// A sparse element of `A[[s]]_Δ`: support contained in `Δ`, no stored
/// zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    ring: PolyRing,
    trunc: CoIdeal,
    coeffs: BTreeMap<MultiIndex, Poly>,
}

impl Series {
    fn check_universe(ring: &PolyRing, trunc: &CoIdeal) -> Result<()> {
        for name in trunc.vars().names() {
            if ring.gen_index(name).is_some() {
                return Err(Error::NameCollision(name.clone()));
            }
        }
        Ok(())
    }

    pub fn zero(ring: &PolyRing, trunc: &CoIdeal) -> Result<Series> {
        Self::check_universe(ring, trunc)?;
        Ok(Series { ring: ring.clone(), trunc: trunc.clone(), coeffs: BTreeMap::new() })
    }

    pub fn constant(ring: &PolyRing, trunc: &CoIdeal, value: Poly) -> Result<Series> {
        if value.ring() != ring {
            return Err(Error::RingMismatch);
        }
        let mut s = Series::zero(ring, trunc)?;
        if !value.is_zero() {
            s.coeffs.insert(MultiIndex::zero(trunc.vars()), value);
        }
        Ok(s)
    }

    pub fn one(ring: &PolyRing, trunc: &CoIdeal) -> Result<Series> {
        Series::constant(ring, trunc, Poly::one(ring))
    }

    /// The monomial series `c·s^α`; errors when `α ∉ Δ`.
    pub fn monomial(
        ring: &PolyRing,
        trunc: &CoIdeal,
        alpha: &MultiIndex,
        c: Poly,
    ) -> Result<Series> {
        if !trunc.contains(alpha) {
            return Err(Error::IndexOutsideTruncation);
        }
        let mut s = Series::zero(ring, trunc)?;
        if !c.is_zero() {
            s.coeffs.insert(alpha.clone(), c);
        }
        Ok(s)
    }

    pub fn from_coeffs(
        ring: &PolyRing,
        trunc: &CoIdeal,
        coeffs: Vec<(MultiIndex, Poly)>,
    ) -> Result<Series> {
        let mut s = Series::zero(ring, trunc)?;
        for (alpha, c) in coeffs {
            if alpha.vars() != trunc.vars() {
                return Err(Error::AmbientMismatch);
            }
            if !trunc.contains(&alpha) {
                return Err(Error::IndexOutsideTruncation);
            }
            if c.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if c.is_zero() {
                continue;
            }
            match s.coeffs.get_mut(&alpha) {
                Some(acc) => {
                    *acc = acc.add(&c)?;
                    if acc.is_zero() {
                        s.coeffs.remove(&alpha);
                    }
                }
                None => {
                    s.coeffs.insert(alpha, c);
                }
            }
        }
        Ok(s)
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn vars(&self) -> &VarSet {
        self.trunc.vars()
    }

    pub fn trunc(&self) -> &CoIdeal {
        &self.trunc
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Poly {
        self.coeffs.get(alpha).cloned().unwrap_or_else(|| Poly::zero(&self.ring))
    }

    pub fn constant_term(&self) -> Poly {
        self.coeff(&MultiIndex::zero(self.trunc.vars()))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &Poly)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> Vec<MultiIndex> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `ord`: the smallest norm in the support, `None` (infinity) for 0.
    pub fn ord(&self) -> Option<u32> {
        self.coeffs.keys().map(|a| a.norm()).min()
    }

    fn same_universe(&self, other: &Series) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.trunc != other.trunc {
            return Err(Error::UniverseMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.same_universe(other)?;
        let mut coeffs = self.coeffs.clone();
        for (a, c) in &other.coeffs {
            match coeffs.get_mut(a) {
                Some(acc) => {
                    *acc = acc.add(c)?;
                    if acc.is_zero() {
                        coeffs.remove(a);
                    }
                }
                None => {
                    coeffs.insert(a.clone(), c.clone());
                }
            }
        }
        Ok(Series { ring: self.ring.clone(), trunc: self.trunc.clone(), coeffs })
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        Series {
            ring: self.ring.clone(),
            trunc: self.trunc.clone(),
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), c.neg())).collect(),
        }
    }

    /// Truncated Cauchy product: support pairs whose sum leaves `Δ` are
    /// discarded.
    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.same_universe(other)?;
        let mut coeffs: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let sum = a.add(b)?;
                if !self.trunc.contains(&sum) {
                    continue;
                }
                let prod = ca.mul(cb)?;
                if prod.is_zero() {
                    continue;
                }
                match coeffs.get_mut(&sum) {
                    Some(acc) => {
                        *acc = acc.add(&prod)?;
                        if acc.is_zero() {
                            coeffs.remove(&sum);
                        }
                    }
                    None => {
                        coeffs.insert(sum, prod);
                    }
                }
            }
        }
        Ok(Series { ring: self.ring.clone(), trunc: self.trunc.clone(), coeffs })
    }

    /// Multiply every coefficient by `a ∈ A` (the A-module action).
    pub fn poly_mul(&self, a: &Poly) -> Result<Series> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let mut coeffs = BTreeMap::new();
        for (alpha, c) in &self.coeffs {
            let prod = c.mul(a)?;
            if !prod.is_zero() {
                coeffs.insert(alpha.clone(), prod);
            }
        }
        Ok(Series { ring: self.ring.clone(), trunc: self.trunc.clone(), coeffs })
    }

    /// Shift by a monomial: `s^γ · self`, truncating outside `Δ`.
    pub fn monomial_shift(&self, gamma: &MultiIndex) -> Result<Series> {
        let mut coeffs = BTreeMap::new();
        for (alpha, c) in &self.coeffs {
            let shifted = alpha.add(gamma)?;
            if self.trunc.contains(&shifted) {
                coeffs.insert(shifted, c.clone());
            }
        }
        Ok(Series { ring: self.ring.clone(), trunc: self.trunc.clone(), coeffs })
    }

    pub fn pow(&self, e: u32) -> Result<Series> {
        let mut acc = Series::one(&self.ring, &self.trunc)?;
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Truncation `τ_{Δ→Δ'}` onto a sub-co-ideal; the augmentation is the
    /// special case `Δ' = {0}`.
    pub fn truncate(&self, delta2: &CoIdeal) -> Result<Series> {
        if !delta2.subset_of(&self.trunc) {
            return Err(Error::NotSubCoIdeal);
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(a, _)| delta2.contains(a))
            .map(|(a, c)| (a.clone(), c.clone()))
            .collect();
        Ok(Series { ring: self.ring.clone(), trunc: delta2.clone(), coeffs })
    }

    /// Reinterpret over a larger co-ideal (coefficient-preserving scission).
    pub fn include_into(&self, bigger: &CoIdeal) -> Result<Series> {
        if !self.trunc.subset_of(bigger) {
            return Err(Error::NotSubCoIdeal);
        }
        Ok(Series {
            ring: self.ring.clone(),
            trunc: bigger.clone(),
            coeffs: self.coeffs.clone(),
        })
    }

    /// Re-index the series variables into a superset variable set, landing
    /// in the given co-ideal over it. Every support index must embed inside.
    pub fn embed_into(&self, target: &CoIdeal) -> Result<Series> {
        let mut coeffs = BTreeMap::new();
        for (alpha, c) in &self.coeffs {
            let e = alpha.embed_into(target.vars())?;
            if !target.contains(&e) {
                return Err(Error::IndexOutsideTruncation);
            }
            coeffs.insert(e, c.clone());
        }
        Ok(Series { ring: self.ring.clone(), trunc: target.clone(), coeffs })
    }

    /// A unit of `A[[s]]_Δ`: the constant term is a unit of `A`, i.e. a
    /// nonzero scalar of `k` over a polynomial coefficient ring.
    pub fn is_unit(&self) -> bool {
        self.constant_term().is_unit_scalar()
    }

    /// Invert a unit degree by degree:
    /// `r*_α = −r_0^{-1} Σ_{β+γ=α, β≠0} r_β r*_γ`.
    pub fn invert_recursive(&self) -> Result<Series> {
        let c0 = self.constant_term();
        let u = c0.as_constant().filter(|c| !c.is_zero()).ok_or(Error::NonUnit)?;
        let u_inv = Poly::constant(&self.ring, u.inv()?);
        let mut inv: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
        inv.insert(MultiIndex::zero(self.trunc.vars()), u_inv.clone());
        // ascending graded order: every γ < α has already been computed
        for alpha in self.trunc.iter() {
            if alpha.is_zero() {
                continue;
            }
            let mut acc = Poly::zero(&self.ring);
            for beta in below(alpha) {
                if beta.is_zero() {
                    continue;
                }
                let a_beta = match self.coeffs.get(&beta) {
                    Some(p) => p,
                    None => continue,
                };
                let gamma = alpha.checked_sub(&beta).expect("beta <= alpha");
                if let Some(r_gamma) = inv.get(&gamma) {
                    acc = acc.add(&a_beta.mul(r_gamma)?)?;
                }
            }
            let entry = acc.neg().mul(&u_inv)?;
            if !entry.is_zero() {
                inv.insert(alpha.clone(), entry);
            }
        }
        Ok(Series { ring: self.ring.clone(), trunc: self.trunc.clone(), coeffs: inv })
    }

    /// The closed-form inverse for constant term exactly 1:
    /// `r*_α = Σ_{d=1}^{|α|} (−1)^d Σ_{Par(α,d)} r_{α¹} ⋯ r_{α^d}`.
    pub fn invert_partition(&self) -> Result<Series> {
        if self.constant_term() != Poly::one(&self.ring) {
            return Err(Error::ConstantTermNotOne);
        }
        let mut coeffs: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
        coeffs.insert(MultiIndex::zero(self.trunc.vars()), Poly::one(&self.ring));
        for alpha in self.trunc.iter() {
            if alpha.is_zero() {
                continue;
            }
            let mut total = Poly::zero(&self.ring);
            for d in 1..=alpha.norm() {
                let mut layer = Poly::zero(&self.ring);
                for part in enum_ordered_partitions(alpha, d) {
                    let mut prod = Poly::one(&self.ring);
                    for piece in &part.parts {
                        match self.coeffs.get(piece) {
                            Some(c) => prod = prod.mul(c)?,
                            None => {
                                prod = Poly::zero(&self.ring);
                                break;
                            }
                        }
                    }
                    layer = layer.add(&prod)?;
                }
                total = if d % 2 == 1 { total.sub(&layer)? } else { total.add(&layer)? };
            }
            if !total.is_zero() {
                coeffs.insert(alpha.clone(), total);
            }
        }
        Ok(Series { ring: self.ring.clone(), trunc: self.trunc.clone(), coeffs })
    }

    /// External product `r ⊠ r'` over the disjoint union of variables, with
    /// truncation `∇ × Δ`; the coefficient at `(α, β)` is `r_α · r'_β`.
    pub fn external_product(&self, other: &Series) -> Result<Series> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let trunc = self.trunc.product(&other.trunc)?;
        let union = trunc.vars().clone();
        let mut coeffs = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            let ea = a.embed_into(&union)?;
            for (b, cb) in &other.coeffs {
                let eb = b.embed_into(&union)?;
                let prod = ca.mul(cb)?;
                if !prod.is_zero() {
                    coeffs.insert(ea.add(&eb)?, prod);
                }
            }
        }
        Ok(Series { ring: self.ring.clone(), trunc, coeffs })
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coef = if c.num_terms() > 1 { format!("({c})") } else { c.to_string() };
            if alpha.is_zero() {
                write!(f, "{coef}")?;
            } else if coef == "1" {
                write!(f, "{alpha}")?;
            } else {
                write!(f, "{coef}*{alpha}")?;
            }
        }
        Ok(())
    }
}
