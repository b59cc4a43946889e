//! Substitution maps `φ: A[[s]]_∇ → A[[t]]_Δ`: construction with exact
//! well-definedness validation, the coefficient family `C_e(φ,α)`,
//! evaluation, composition, addition, tensor product, the combinatorial and
//! power-map special cases, and the multiplicativity criterion on
//! coefficient tables.
//!
//! A substitution map is determined by variable images with zero constant
//! term; it is well defined on the source truncation exactly when every
//! monomial outside `∇` maps to zero, which is checked on the finitely many
//! minimal indices outside `∇` of norm at most `max|Δ|` (higher norms map
//! to zero automatically since `ord φ(s^α) ≥ |α|`).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::algebra::{Poly, PolyRing};
use crate::multiindex::{
    below, enum_indexed_partitions, minimal_outside, CoIdeal, MultiIndex, VarSet,
};
use crate::series::Series;
use crate::{Error, Result};

/// A substitution map, stored as its family of variable images over the
/// target universe.
#[derive(Clone)]
pub struct SubstMap {
    ring: PolyRing,
    src: CoIdeal,
    dst: CoIdeal,
    images: Vec<Series>,
    coeff_cache: Arc<Mutex<HashMap<(MultiIndex, MultiIndex), Poly>>>,
    image_cache: Arc<Mutex<HashMap<MultiIndex, Series>>>,
}

impl fmt::Debug for SubstMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubstMap")
            .field("src", &self.src)
            .field("dst", &self.dst)
            .field("images", &self.images)
            .finish()
    }
}

impl PartialEq for SubstMap {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.src == other.src
            && self.dst == other.dst
            && self.images == other.images
    }
}

impl Eq for SubstMap {}

impl SubstMap {
    /// Structural construction: checks image count, universes, and the
    /// zero-constant-term condition, but not annihilation of the source
    /// truncation. Use [`SubstMap::new`] for a fully validated map.
    pub fn new_unchecked(
        ring: &PolyRing,
        src: &CoIdeal,
        dst: &CoIdeal,
        images: Vec<Series>,
    ) -> Result<SubstMap> {
        if images.len() != src.vars().len() {
            return Err(Error::Precondition(format!(
                "expected {} images, got {}",
                src.vars().len(),
                images.len()
            )));
        }
        for name in src.vars().names() {
            if ring.gen_index(name).is_some() {
                return Err(Error::NameCollision(name.clone()));
            }
        }
        for im in &images {
            if im.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if im.trunc() != dst {
                return Err(Error::UniverseMismatch);
            }
            if !im.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm);
            }
        }
        Ok(SubstMap {
            ring: ring.clone(),
            src: src.clone(),
            dst: dst.clone(),
            images,
            coeff_cache: Arc::new(Mutex::new(HashMap::new())),
            image_cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Construct and validate: the returned map provably annihilates the
    /// source truncation.
    pub fn new(
        ring: &PolyRing,
        src: &CoIdeal,
        dst: &CoIdeal,
        images: Vec<Series>,
    ) -> Result<SubstMap> {
        let map = Self::new_unchecked(ring, src, dst, images)?;
        if !map.validate() {
            return Err(Error::ValidationFailed);
        }
        Ok(map)
    }

    /// The trivial map `𝟎` sending every variable to zero.
    pub fn trivial(ring: &PolyRing, src: &CoIdeal, dst: &CoIdeal) -> Result<SubstMap> {
        let images = (0..src.vars().len())
            .map(|_| Series::zero(ring, dst))
            .collect::<Result<Vec<_>>>()?;
        Self::new_unchecked(ring, src, dst, images)
    }

    /// A combinatorial map determined by a variable-to-variable assignment;
    /// validated against the given universes.
    pub fn combinatorial(
        ring: &PolyRing,
        src: &CoIdeal,
        dst: &CoIdeal,
        assignment: &[usize],
    ) -> Result<SubstMap> {
        if assignment.len() != src.vars().len() {
            return Err(Error::Precondition("assignment length mismatch".into()));
        }
        let images = assignment
            .iter()
            .map(|&tpos| {
                if tpos >= dst.vars().len() {
                    return Err(Error::Precondition("target variable out of range".into()));
                }
                let unit = MultiIndex::unit(dst.vars(), tpos);
                if dst.contains(&unit) {
                    Series::monomial(ring, dst, &unit, Poly::one(ring))
                } else {
                    // the variable class is zero in the target quotient
                    Series::zero(ring, dst)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ring, src, dst, images)
    }

    /// The identity substitution map on a universe.
    pub fn identity(ring: &PolyRing, universe: &CoIdeal) -> Result<SubstMap> {
        let assignment: Vec<usize> = (0..universe.vars().len()).collect();
        Self::combinatorial(ring, universe, universe, &assignment)
    }

    /// The power map `[ν](s) = s^{ν_s}`, targeting the co-ideal
    /// `ν∇ = {γ | ∃α ∈ ∇, γ ≤ να}`.
    pub fn power_map(ring: &PolyRing, nu: &[u32], src: &CoIdeal) -> Result<SubstMap> {
        if nu.len() != src.vars().len() || nu.iter().any(|&n| n == 0) {
            return Err(Error::Precondition(
                "power map needs one positive exponent per source variable".into(),
            ));
        }
        let scaled: Vec<MultiIndex> = src.iter().map(|a| a.scale(nu)).collect();
        let dst = CoIdeal::generated_by(src.vars(), &scaled);
        let images = (0..src.vars().len())
            .map(|j| {
                let target = MultiIndex::from_exps(src.vars(), &[(j, nu[j])])?;
                Series::monomial(ring, &dst, &target, Poly::one(ring))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ring, src, &dst, images)
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn src(&self) -> &CoIdeal {
        &self.src
    }

    pub fn dst(&self) -> &CoIdeal {
        &self.dst
    }

    pub fn src_vars(&self) -> &VarSet {
        self.src.vars()
    }

    pub fn dst_vars(&self) -> &VarSet {
        self.dst.vars()
    }

    /// The image `c^s` of the source variable at `pos`.
    pub fn image(&self, pos: usize) -> &Series {
        &self.images[pos]
    }

    pub fn images(&self) -> &[Series] {
        &self.images
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|im| im.is_zero())
    }

    /// Exact well-definedness on the source truncation: every minimal index
    /// outside `∇` of norm at most `max|Δ|` maps to zero.
    pub fn validate(&self) -> bool {
        let cap = self.dst.max_norm();
        for alpha in minimal_outside(&self.src, cap) {
            if !self.monomial_image(&alpha).is_zero() {
                return false;
            }
        }
        true
    }

    /// `φ(s^α)` as a product of image powers, memoized per map.
    pub fn monomial_image(&self, alpha: &MultiIndex) -> Series {
        if alpha.is_zero() {
            return Series::one(&self.ring, &self.dst).expect("valid universe");
        }
        if let Some(hit) = self.image_cache.lock().unwrap().get(alpha) {
            return hit.clone();
        }
        let pos = *alpha.support().first().expect("nonzero index");
        let down = alpha
            .checked_sub(&MultiIndex::unit(alpha.vars(), pos))
            .expect("support position");
        let out = self
            .monomial_image(&down)
            .mul(&self.images[pos])
            .expect("same universe");
        self.image_cache.lock().unwrap().insert(alpha.clone(), out.clone());
        out
    }

    /// The coefficient `C_e(φ,α)` by the indexed-partition formula, with
    /// norm and membership preconditions enforced.
    pub fn coeff(&self, alpha: &MultiIndex, e: &MultiIndex) -> Result<Poly> {
        if !self.src.contains(alpha) || !self.dst.contains(e) {
            return Err(Error::IndexOutsideTruncation);
        }
        if alpha.norm() > e.norm() {
            return Err(Error::NormViolation);
        }
        Ok(self.coeff_raw(alpha, e))
    }

    /// Total version of [`SubstMap::coeff`]: zero outside the norm range.
    pub(crate) fn coeff_raw(&self, alpha: &MultiIndex, e: &MultiIndex) -> Poly {
        if alpha.norm() > e.norm() {
            return Poly::zero(&self.ring);
        }
        let key = (alpha.clone(), e.clone());
        if let Some(hit) = self.coeff_cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let mut total = Poly::zero(&self.ring);
        for part in enum_indexed_partitions(e, alpha) {
            let mut prod = Poly::one(&self.ring);
            for ((pos, _), beta) in &part.assignment {
                let c = self.images[*pos].coeff(beta);
                if c.is_zero() {
                    prod = Poly::zero(&self.ring);
                    break;
                }
                prod = prod.mul(&c).expect("same ring");
            }
            total = total.add(&prod).expect("same ring");
        }
        self.coeff_cache.lock().unwrap().insert(key, total.clone());
        total
    }

    /// Evaluate on a series of the source universe. An `A`-algebra map: it
    /// fixes `A` and is compatible with the augmentations.
    pub fn apply(&self, a: &Series) -> Result<Series> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        if a.trunc() != &self.src {
            return Err(Error::UniverseMismatch);
        }
        let mut out = Series::zero(&self.ring, &self.dst)?;
        for (alpha, c) in a.coeffs() {
            out = out.add(&self.monomial_image(alpha).poly_mul(c)?)?;
        }
        Ok(out)
    }

    /// `ψ ∘ φ`, requiring `φ`'s target universe to equal `ψ`'s source.
    pub fn compose(psi: &SubstMap, phi: &SubstMap) -> Result<SubstMap> {
        if phi.ring != psi.ring {
            return Err(Error::RingMismatch);
        }
        if phi.dst != psi.src {
            return Err(Error::UniverseMismatch);
        }
        let images = phi
            .images
            .iter()
            .map(|im| psi.apply(im))
            .collect::<Result<Vec<_>>>()?;
        SubstMap::new(&phi.ring, &phi.src, &psi.dst, images)
    }

    /// Imagewise addition; only generator images add, not general values.
    /// The sum is re-validated because annihilation of the source truncation
    /// is not preserved by addition in general.
    pub fn add(&self, other: &SubstMap) -> Result<SubstMap> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.src != other.src || self.dst != other.dst {
            return Err(Error::UniverseMismatch);
        }
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        SubstMap::new(&self.ring, &self.src, &self.dst, images)
    }

    /// Tensor product on disjoint unions of sources and targets.
    pub fn tensor(&self, other: &SubstMap) -> Result<SubstMap> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let src = self.src.product(&other.src)?;
        let dst = self.dst.product(&other.dst)?;
        let mut images = Vec::with_capacity(src.vars().len());
        for im in &self.images {
            images.push(im.embed_into(&dst)?);
        }
        for im in &other.images {
            images.push(im.embed_into(&dst)?);
        }
        SubstMap::new(&self.ring, &src, &dst, images)
    }

    /// True when every image coefficient lies in `k`.
    pub fn has_constant_coeffs(&self) -> bool {
        self.images
            .iter()
            .all(|im| im.coeffs().all(|(_, c)| c.as_constant().is_some()))
    }

    /// The induced map on norm-`n` slices, with images truncated to norm `n`.
    pub fn truncate(&self, n: u32) -> SubstMap {
        let src = self.src.slice(n);
        let dst = self.dst.slice(n);
        let images = self
            .images
            .iter()
            .map(|im| im.truncate(&dst).expect("slice is a sub-co-ideal"))
            .collect();
        SubstMap::new_unchecked(&self.ring, &src, &dst, images)
            .expect("structure preserved by truncation")
    }
}

impl fmt::Display for SubstMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, im) in self.images.iter().enumerate() {
            if j > 0 {
                writeln!(f)?;
            }
            write!(f, "{} -> {}", self.src.vars().name(j), im)?;
        }
        Ok(())
    }
}

/// A finite table of coefficients `K_{e,α}` for `|α| ≤ |e|`, with
/// `K_{0,0} = 1`. Tables arise by tabulating a substitution map and are the
/// subject of the multiplicativity criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffTable {
    ring: PolyRing,
    src: CoIdeal,
    dst: CoIdeal,
    entries: BTreeMap<(MultiIndex, MultiIndex), Poly>,
}

impl CoeffTable {
    /// Tabulate every coefficient of a substitution map.
    pub fn from_subst(phi: &SubstMap) -> CoeffTable {
        let mut entries = BTreeMap::new();
        for e in phi.dst().iter() {
            for alpha in phi.src().iter() {
                if alpha.norm() > e.norm() {
                    continue;
                }
                let c = phi.coeff_raw(alpha, e);
                if !c.is_zero() {
                    entries.insert((e.clone(), alpha.clone()), c);
                }
            }
        }
        CoeffTable {
            ring: phi.ring().clone(),
            src: phi.src().clone(),
            dst: phi.dst().clone(),
            entries,
        }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn src(&self) -> &CoIdeal {
        &self.src
    }

    pub fn dst(&self) -> &CoIdeal {
        &self.dst
    }

    pub fn get(&self, e: &MultiIndex, alpha: &MultiIndex) -> Poly {
        self.entries
            .get(&(e.clone(), alpha.clone()))
            .cloned()
            .unwrap_or_else(|| Poly::zero(&self.ring))
    }

    /// Overwrite one entry; used for perturbation controls.
    pub fn set(&mut self, e: &MultiIndex, alpha: &MultiIndex, value: Poly) {
        if value.is_zero() {
            self.entries.remove(&(e.clone(), alpha.clone()));
        } else {
            self.entries.insert((e.clone(), alpha.clone()), value);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &Poly)> {
        self.entries.iter()
    }

    /// The multiplicativity criterion: `K_{0,0} = 1` and
    /// `K_{e,μ+ν} = Σ_{β+γ=e, |μ|≤|β|, |ν|≤|γ|} K_{β,μ} K_{γ,ν}` for all
    /// in-range `(μ, ν, e)`. When true, the induced linear map is a
    /// substitution map with images read off the rows `K_{e, s^u}`.
    pub fn check_multiplicativity(&self) -> bool {
        let zero_s = MultiIndex::zero(self.src.vars());
        let zero_t = MultiIndex::zero(self.dst.vars());
        if self.get(&zero_t, &zero_s) != Poly::one(&self.ring) {
            return false;
        }
        for mu in self.src.iter() {
            for nu in self.src.iter() {
                let sum = mu.add(nu).expect("same ambient");
                if !self.src.contains(&sum) {
                    continue;
                }
                for e in self.dst.iter() {
                    if sum.norm() > e.norm() {
                        continue;
                    }
                    let mut rhs = Poly::zero(&self.ring);
                    for beta in below(e) {
                        let gamma = e.checked_sub(&beta).expect("beta <= e");
                        if beta.norm() < mu.norm() || gamma.norm() < nu.norm() {
                            continue;
                        }
                        let prod = self
                            .get(&beta, mu)
                            .mul(&self.get(&gamma, nu))
                            .expect("same ring");
                        rhs = rhs.add(&prod).expect("same ring");
                    }
                    if self.get(e, &sum) != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The continuous linear map determined by the table.
    pub fn linear_apply(&self, a: &Series) -> Result<Series> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        if a.trunc() != &self.src {
            return Err(Error::UniverseMismatch);
        }
        let mut coeffs = Vec::new();
        for e in self.dst.iter() {
            let mut acc = Poly::zero(&self.ring);
            for (alpha, c) in a.coeffs() {
                if alpha.norm() > e.norm() {
                    continue;
                }
                acc = acc.add(&self.get(e, alpha).mul(c)?)?;
            }
            coeffs.push((e.clone(), acc));
        }
        Series::from_coeffs(&self.ring, &self.dst, coeffs)
    }

    /// Reconstruct the substitution map with images `Σ_{0<|e|} K_{e,s^u} t^e`.
    /// Structural construction only; validity follows from the criterion.
    pub fn to_subst(&self) -> Result<SubstMap> {
        let mut images = Vec::with_capacity(self.src.vars().len());
        for u in 0..self.src.vars().len() {
            let unit = MultiIndex::unit(self.src.vars(), u);
            let mut coeffs = Vec::new();
            for e in self.dst.iter() {
                if e.is_zero() {
                    continue;
                }
                let c = self.get(e, &unit);
                if !c.is_zero() {
                    coeffs.push((e.clone(), c));
                }
            }
            images.push(Series::from_coeffs(&self.ring, &self.dst, coeffs)?);
        }
        SubstMap::new_unchecked(&self.ring, &self.src, &self.dst, images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Scalar;

    fn setup() -> (PolyRing, VarSet, VarSet) {
        (
            PolyRing::rational(["x"]).unwrap(),
            VarSet::new(["s"]).unwrap(),
            VarSet::new(["t"]).unwrap(),
        )
    }

    fn t_pow(vars: &VarSet, e: u32) -> MultiIndex {
        MultiIndex::from_exps(vars, &[(0, e)]).unwrap()
    }

    /// s -> t + t^2 from t_2({s}) to t_2({t})
    fn sample_map() -> SubstMap {
        let (ring, s, t) = setup();
        let src = CoIdeal::tm(&s, 2);
        let dst = CoIdeal::tm(&t, 2);
        let img = Series::from_coeffs(
            &ring,
            &dst,
            vec![
                (t_pow(&t, 1), Poly::one(&ring)),
                (t_pow(&t, 2), Poly::one(&ring)),
            ],
        )
        .unwrap();
        SubstMap::new(&ring, &src, &dst, vec![img]).unwrap()
    }

    #[test]
    fn trivial_map_is_valid() {
        let (ring, s, t) = setup();
        let src = CoIdeal::tm(&s, 3);
        let dst = CoIdeal::tm(&t, 1);
        let phi = SubstMap::trivial(&ring, &src, &dst).unwrap();
        assert!(phi.validate());
        assert!(phi.is_trivial());
    }

    #[test]
    fn constructor_rejects_nonzero_constant_term() {
        let (ring, s, t) = setup();
        let src = CoIdeal::tm(&s, 1);
        let dst = CoIdeal::tm(&t, 1);
        let img = Series::one(&ring, &dst).unwrap();
        assert!(matches!(
            SubstMap::new(&ring, &src, &dst, vec![img]),
            Err(Error::NonzeroConstantTerm)
        ));
    }

    #[test]
    fn validation_examples() {
        let (ring, s, t) = setup();
        // s -> t from t_1 to t_2 is ill-defined: s^2 -> t^2 != 0
        let src = CoIdeal::tm(&s, 1);
        let dst = CoIdeal::tm(&t, 2);
        let img = Series::monomial(&ring, &dst, &t_pow(&t, 1), Poly::one(&ring)).unwrap();
        assert!(matches!(
            SubstMap::new(&ring, &src, &dst, vec![img]),
            Err(Error::ValidationFailed)
        ));
        // s -> t^2 from t_1 to t_2 is fine: s^2 -> t^4 = 0 in t_2
        let img = Series::monomial(&ring, &dst, &t_pow(&t, 2), Poly::one(&ring)).unwrap();
        let phi = SubstMap::new(&ring, &src, &dst, vec![img]).unwrap();
        assert!(phi.validate());
        // full truncations of equal order always validate
        assert!(sample_map().validate());
    }

    #[test]
    fn coeff_formula_examples() {
        // phi(s) = c1 t + c2 t^2: C_{t^3}(phi, s^2) = 2 c1 c2
        let ring = PolyRing::rational(["c1", "c2"]).unwrap();
        let s = VarSet::new(["s"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let src = CoIdeal::tm(&s, 3);
        let dst = CoIdeal::tm(&t, 3);
        let c1 = Poly::gen(&ring, 0);
        let c2 = Poly::gen(&ring, 1);
        let img = Series::from_coeffs(
            &ring,
            &dst,
            vec![(t_pow(&t, 1), c1.clone()), (t_pow(&t, 2), c2.clone())],
        )
        .unwrap();
        let phi = SubstMap::new(&ring, &src, &dst, vec![img]).unwrap();

        let got = phi.coeff(&t_pow(&s, 2), &t_pow(&t, 3)).unwrap();
        let want = Poly::from_i64(&ring, 2).mul(&c1).unwrap().mul(&c2).unwrap();
        assert_eq!(got, want);

        // |alpha| = 1 reads off the image coefficient
        let got = phi.coeff(&t_pow(&s, 1), &t_pow(&t, 2)).unwrap();
        assert_eq!(got, c2);

        // C_0(phi, 0) = 1 and C_e(phi, 0) = 0 for e != 0
        let z_s = MultiIndex::zero(&s);
        let z_t = MultiIndex::zero(&t);
        assert_eq!(phi.coeff(&z_s, &z_t).unwrap(), Poly::one(&ring));
        assert!(phi.coeff(&z_s, &t_pow(&t, 2)).unwrap().is_zero());

        // norm violation is an error
        assert!(matches!(
            phi.coeff(&t_pow(&s, 2), &t_pow(&t, 1)),
            Err(Error::NormViolation)
        ));
    }

    #[test]
    fn apply_examples() {
        let phi = sample_map();
        let ring = phi.ring().clone();
        let s = phi.src_vars().clone();
        let t = phi.dst_vars().clone();
        // constants are fixed
        let c = Series::constant(&ring, phi.src(), Poly::gen(&ring, 0)).unwrap();
        let out = phi.apply(&c).unwrap();
        assert_eq!(out.constant_term(), Poly::gen(&ring, 0));
        assert_eq!(out.support().len(), 1);
        // 1 + s -> 1 + t + t^2
        let a = Series::from_coeffs(
            &ring,
            phi.src(),
            vec![
                (MultiIndex::zero(&s), Poly::one(&ring)),
                (t_pow(&s, 1), Poly::one(&ring)),
            ],
        )
        .unwrap();
        let out = phi.apply(&a).unwrap();
        let want = Series::from_coeffs(
            &ring,
            phi.dst(),
            vec![
                (MultiIndex::zero(&t), Poly::one(&ring)),
                (t_pow(&t, 1), Poly::one(&ring)),
                (t_pow(&t, 2), Poly::one(&ring)),
            ],
        )
        .unwrap();
        assert_eq!(out, want);
        // trivial map evaluates to the constant term
        let triv = SubstMap::trivial(&ring, phi.src(), phi.dst()).unwrap();
        let out = triv.apply(&a).unwrap();
        assert_eq!(out, Series::one(&ring, phi.dst()).unwrap());
    }

    #[test]
    fn apply_is_multiplicative() {
        let phi = sample_map();
        let ring = phi.ring().clone();
        let s = phi.src_vars().clone();
        let x = Poly::gen(&ring, 0);
        let a = Series::from_coeffs(
            &ring,
            phi.src(),
            vec![
                (MultiIndex::zero(&s), Poly::one(&ring)),
                (t_pow(&s, 1), x.clone()),
            ],
        )
        .unwrap();
        let b = Series::from_coeffs(
            &ring,
            phi.src(),
            vec![
                (MultiIndex::zero(&s), x.clone()),
                (t_pow(&s, 2), Poly::from_i64(&ring, -2)),
            ],
        )
        .unwrap();
        let lhs = phi.apply(&a.mul(&b).unwrap()).unwrap();
        let rhs = phi.apply(&a).unwrap().mul(&phi.apply(&b).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn composition_with_trivial_is_trivial() {
        let phi = sample_map();
        let ring = phi.ring().clone();
        let u = VarSet::new(["u"]).unwrap();
        let omega = CoIdeal::tm(&u, 2);
        let psi = SubstMap::trivial(&ring, phi.dst(), &omega).unwrap();
        let comp = SubstMap::compose(&psi, &phi).unwrap();
        assert!(comp.is_trivial());
    }

    #[test]
    fn combinatorial_composition_chains() {
        let (ring, s, t) = setup();
        let u = VarSet::new(["u"]).unwrap();
        let phi = SubstMap::combinatorial(
            &ring,
            &CoIdeal::tm(&s, 2),
            &CoIdeal::tm(&t, 2),
            &[0],
        )
        .unwrap();
        let psi = SubstMap::combinatorial(
            &ring,
            &CoIdeal::tm(&t, 2),
            &CoIdeal::tm(&u, 2),
            &[0],
        )
        .unwrap();
        let comp = SubstMap::compose(&psi, &phi).unwrap();
        let direct = SubstMap::combinatorial(
            &ring,
            &CoIdeal::tm(&s, 2),
            &CoIdeal::tm(&u, 2),
            &[0],
        )
        .unwrap();
        assert_eq!(comp, direct);
    }

    #[test]
    fn power_maps_compose() {
        let (ring, s, _) = setup();
        let src = CoIdeal::tm(&s, 1);
        let p3 = SubstMap::power_map(&ring, &[3], &src).unwrap();
        // target co-ideal of [2] on t_1 is {0, s, s^2}
        let p2_small = SubstMap::power_map(&ring, &[2], &src).unwrap();
        let expect: std::collections::BTreeSet<MultiIndex> =
            [t_pow(&s, 0), t_pow(&s, 1), t_pow(&s, 2)].into_iter().collect();
        assert_eq!(*p2_small.dst(), CoIdeal::explicit(&s, expect).unwrap());
        // [2] ∘ [3] = [6]
        let p2 = SubstMap::power_map(&ring, &[2], p3.dst()).unwrap();
        let comp = SubstMap::compose(&p2, &p3).unwrap();
        let p6 = SubstMap::power_map(&ring, &[6], &src).unwrap();
        assert_eq!(comp, p6);
        // nu = 1 is the identity
        let p1 = SubstMap::power_map(&ring, &[1], &src).unwrap();
        assert_eq!(p1, SubstMap::identity(&ring, &src).unwrap());
    }

    #[test]
    fn addition_examples() {
        let (ring, s, t) = setup();
        let src = CoIdeal::tm(&s, 2);
        let dst = CoIdeal::tm(&t, 2);
        let a = SubstMap::new(
            &ring,
            &src,
            &dst,
            vec![Series::monomial(&ring, &dst, &t_pow(&t, 1), Poly::one(&ring)).unwrap()],
        )
        .unwrap();
        let b = SubstMap::new(
            &ring,
            &src,
            &dst,
            vec![Series::monomial(&ring, &dst, &t_pow(&t, 2), Poly::one(&ring)).unwrap()],
        )
        .unwrap();
        let sum = a.add(&b).unwrap();
        assert_eq!(sum, sample_map());
        let triv = SubstMap::trivial(&ring, &src, &dst).unwrap();
        assert_eq!(a.add(&triv).unwrap(), a);
    }

    #[test]
    fn left_composition_distributes_over_addition() {
        let (ring, s, t) = setup();
        let u = VarSet::new(["u"]).unwrap();
        let src = CoIdeal::tm(&s, 2);
        let mid = CoIdeal::tm(&t, 2);
        let dst = CoIdeal::tm(&u, 2);
        let phi1 = SubstMap::new(
            &ring,
            &src,
            &mid,
            vec![Series::monomial(&ring, &mid, &t_pow(&t, 1), Poly::gen(&ring, 0)).unwrap()],
        )
        .unwrap();
        let phi2 = SubstMap::new(
            &ring,
            &src,
            &mid,
            vec![Series::monomial(&ring, &mid, &t_pow(&t, 2), Poly::from_i64(&ring, 2)).unwrap()],
        )
        .unwrap();
        let psi = SubstMap::new(
            &ring,
            &mid,
            &dst,
            vec![Series::monomial(&ring, &dst, &t_pow(&u, 1), Poly::one(&ring)).unwrap()],
        )
        .unwrap();
        let lhs = SubstMap::compose(&psi, &phi1.add(&phi2).unwrap()).unwrap();
        let rhs = SubstMap::compose(&psi, &phi1)
            .unwrap()
            .add(&SubstMap::compose(&psi, &phi2).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn tensor_examples() {
        let (ring, s, t) = setup();
        let u = VarSet::new(["u"]).unwrap();
        let v = VarSet::new(["v"]).unwrap();
        let phi = SubstMap::combinatorial(
            &ring,
            &CoIdeal::tm(&s, 1),
            &CoIdeal::tm(&t, 1),
            &[0],
        )
        .unwrap();
        let psi = SubstMap::combinatorial(
            &ring,
            &CoIdeal::tm(&u, 1),
            &CoIdeal::tm(&v, 1),
            &[0],
        )
        .unwrap();
        let tens = phi.tensor(&psi).unwrap();
        assert_eq!(tens.src_vars().names(), &["s", "u"]);
        assert_eq!(tens.dst_vars().names(), &["t", "v"]);
        // s -> t, u -> v
        assert_eq!(
            tens.image(0).support(),
            vec![MultiIndex::from_names(tens.dst_vars(), &[("t", 1)]).unwrap()]
        );
        assert_eq!(
            tens.image(1).support(),
            vec![MultiIndex::from_names(tens.dst_vars(), &[("v", 1)]).unwrap()]
        );
        // trivial ⊗ trivial = trivial
        let t1 = SubstMap::trivial(&ring, &CoIdeal::tm(&s, 1), &CoIdeal::tm(&t, 1)).unwrap();
        let t2 = SubstMap::trivial(&ring, &CoIdeal::tm(&u, 1), &CoIdeal::tm(&v, 1)).unwrap();
        assert!(t1.tensor(&t2).unwrap().is_trivial());
        // coefficient factorization
        let pair = MultiIndex::from_names(tens.src_vars(), &[("s", 1), ("u", 1)]).unwrap();
        let epair = MultiIndex::from_names(tens.dst_vars(), &[("t", 1), ("v", 1)]).unwrap();
        let got = tens.coeff(&pair, &epair).unwrap();
        assert_eq!(got, Poly::one(&ring));
    }

    #[test]
    fn constant_coefficient_detection() {
        let phi = sample_map();
        assert!(phi.has_constant_coeffs());
        let (ring, s, t) = setup();
        let dst = CoIdeal::tm(&t, 1);
        let xim = Series::monomial(&ring, &dst, &t_pow(&t, 1), Poly::gen(&ring, 0)).unwrap();
        let psi = SubstMap::new(&ring, &CoIdeal::tm(&s, 1), &dst, vec![xim]).unwrap();
        assert!(!psi.has_constant_coeffs());
        let triv = SubstMap::trivial(&ring, &CoIdeal::tm(&s, 1), &dst).unwrap();
        assert!(triv.has_constant_coeffs());
    }

    #[test]
    fn truncation_of_maps() {
        let phi = sample_map();
        let t1 = phi.truncate(1);
        assert_eq!(t1.src(), &phi.src().slice(1));
        assert_eq!(
            t1.image(0).support(),
            vec![t_pow(phi.dst_vars(), 1)]
        );
        let full = phi.truncate(2);
        assert_eq!(full, phi);
        // splitting at the top norm: phi = phi_m + phi_{<m} on images
        let top: Vec<Series> = phi
            .images()
            .iter()
            .map(|im| {
                let keep: Vec<_> = im
                    .coeffs()
                    .filter(|(a, _)| a.norm() == 2)
                    .map(|(a, c)| (a.clone(), c.clone()))
                    .collect();
                Series::from_coeffs(phi.ring(), phi.dst(), keep).unwrap()
            })
            .collect();
        let lower: Vec<Series> = phi
            .images()
            .iter()
            .map(|im| {
                let keep: Vec<_> = im
                    .coeffs()
                    .filter(|(a, _)| a.norm() < 2)
                    .map(|(a, c)| (a.clone(), c.clone()))
                    .collect();
                Series::from_coeffs(phi.ring(), phi.dst(), keep).unwrap()
            })
            .collect();
        let phi_m = SubstMap::new(phi.ring(), phi.src(), phi.dst(), top).unwrap();
        let phi_lt = SubstMap::new(phi.ring(), phi.src(), phi.dst(), lower).unwrap();
        assert_eq!(phi_m.add(&phi_lt).unwrap(), phi);
    }

    #[test]
    fn multiplicativity_criterion_roundtrip() {
        let phi = sample_map();
        let table = CoeffTable::from_subst(&phi);
        assert!(table.check_multiplicativity());

        // K_{e,0} = 0 for |e| > 0
        let z = MultiIndex::zero(phi.src_vars());
        for e in phi.dst().iter() {
            if !e.is_zero() {
                assert!(table.get(e, &z).is_zero());
            }
        }

        // reconstruction agrees with the original map
        let rebuilt = table.to_subst().unwrap();
        assert_eq!(rebuilt, phi);

        // the linear map of the table equals apply
        let ring = phi.ring().clone();
        let s = phi.src_vars().clone();
        let a = Series::from_coeffs(
            &ring,
            phi.src(),
            vec![
                (MultiIndex::zero(&s), Poly::gen(&ring, 0)),
                (t_pow(&s, 1), Poly::from_i64(&ring, 2)),
                (t_pow(&s, 2), Poly::one(&ring)),
            ],
        )
        .unwrap();
        assert_eq!(table.linear_apply(&a).unwrap(), phi.apply(&a).unwrap());

        // perturbing one decomposable entry breaks the criterion
        let mut bad = table.clone();
        let e2 = t_pow(phi.dst_vars(), 2);
        let s2 = t_pow(phi.src_vars(), 2);
        let bumped = bad.get(&e2, &s2).add(&Poly::one(&ring)).unwrap();
        bad.set(&e2, &s2, bumped);
        assert!(!bad.check_multiplicativity());
    }

    #[test]
    fn trivial_table_passes() {
        let (ring, s, t) = setup();
        let triv =
            SubstMap::trivial(&ring, &CoIdeal::tm(&s, 2), &CoIdeal::tm(&t, 2)).unwrap();
        let table = CoeffTable::from_subst(&triv);
        assert!(table.check_multiplicativity());
        assert_eq!(table.entries().count(), 1); // only K_{0,0} = 1
    }

    #[test]
    fn quasi_homogeneity_of_coefficients() {
        // with weight |β| on c^t_β, C_e(phi, α) has weight |e|; over the
        // ring Q[c1, c2] with c_i the coefficient of t^i this reads: every
        // term c1^a c2^b of C satisfies a + 2 b = |e|
        let ring = PolyRing::rational(["c1", "c2"]).unwrap();
        let s = VarSet::new(["s"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let src = CoIdeal::tm(&s, 4);
        let dst = CoIdeal::tm(&t, 4);
        let img = Series::from_coeffs(
            &ring,
            &dst,
            vec![
                (t_pow(&t, 1), Poly::gen(&ring, 0)),
                (t_pow(&t, 2), Poly::gen(&ring, 1)),
            ],
        )
        .unwrap();
        let phi = SubstMap::new(&ring, &src, &dst, vec![img]).unwrap();
        for alpha in phi.src().iter() {
            for e in phi.dst().iter() {
                if alpha.norm() > e.norm() {
                    continue;
                }
                let c = phi.coeff(alpha, e).unwrap();
                for (mono, _) in c.terms() {
                    let weight: u32 = mono.0[0] + 2 * mono.0[1];
                    assert_eq!(weight, e.norm());
                }
            }
        }
    }

    #[test]
    fn apply_respects_augmentation() {
        let phi = sample_map();
        let ring = phi.ring().clone();
        let s = phi.src_vars().clone();
        let a = Series::from_coeffs(
            &ring,
            phi.src(),
            vec![
                (MultiIndex::zero(&s), Poly::constant(&ring, Scalar::parse(&crate::algebra::FieldKind::Q, "5/3").unwrap())),
                (t_pow(&s, 1), Poly::gen(&ring, 0)),
            ],
        )
        .unwrap();
        assert_eq!(phi.apply(&a).unwrap().constant_term(), a.constant_term());
    }
}
