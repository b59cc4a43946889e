//! Multivariate Hasse-Schmidt derivations of `A = k[x_1..x_n]` over `k`,
//! stored by generator images, with the group law, inversion, the
//! `ℓ`-order, external products, the substitution action `φ•D`, the twisted
//! map `φ^D`, `D(φ)`, iterativity, and witness-based differential operator
//! order checks.
//!
//! A derivation `D` is kept as the images `Φ_D(x_i) ∈ A[[s]]_Δ` of the ring
//! generators under its associated algebra map. Over a polynomial `A` this
//! representation is faithful: a family of components satisfying the
//! Leibniz identities that vanishes on all generators below some norm
//! vanishes identically there (induction on the norm via Leibniz), so
//! equality of generator images is equality of HS-derivations. Every
//! operation below reduces to exact series arithmetic on the images.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::algebra::{Derivation, Poly, PolyRing};
use crate::multiindex::{below, CoIdeal, MultiIndex, VarSet};
use crate::series::Series;
use crate::substitution::SubstMap;
use crate::{Error, Result};

/// A `(s, Δ)`-variate Hasse-Schmidt derivation in the generator image
/// representation: `images[i] = Φ_D(x_i)` with constant term `x_i`.
#[derive(Clone)]
pub struct HSDeriv {
    ring: PolyRing,
    trunc: CoIdeal,
    images: Vec<Series>,
    pow_cache: Arc<Mutex<HashMap<(usize, u32), Series>>>,
}

impl fmt::Debug for HSDeriv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HSDeriv")
            .field("trunc", &self.trunc)
            .field("images", &self.images)
            .finish()
    }
}

impl PartialEq for HSDeriv {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.trunc == other.trunc && self.images == other.images
    }
}

impl Eq for HSDeriv {}

impl HSDeriv {
    /// The identity derivation `𝕀` (every generator maps to itself).
    pub fn identity(ring: &PolyRing, trunc: &CoIdeal) -> Result<HSDeriv> {
        let images = (0..ring.ngens())
            .map(|i| Series::constant(ring, trunc, Poly::gen(ring, i)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(ring, trunc, images)
    }

    /// Build from generator images; the constant term of `images[i]` must
    /// be the generator `x_i`. Over a free commutative `A` any such family
    /// determines an HS-derivation.
    pub fn from_images(ring: &PolyRing, trunc: &CoIdeal, images: Vec<Series>) -> Result<HSDeriv> {
        if images.len() != ring.ngens() {
            return Err(Error::Precondition(format!(
                "expected {} generator images, got {}",
                ring.ngens(),
                images.len()
            )));
        }
        for (i, im) in images.iter().enumerate() {
            if im.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if im.trunc() != trunc {
                return Err(Error::UniverseMismatch);
            }
            if im.constant_term() != Poly::gen(ring, i) {
                return Err(Error::Precondition(format!(
                    "image {i} must have constant term {}",
                    ring.gens()[i]
                )));
            }
        }
        Ok(HSDeriv {
            ring: ring.clone(),
            trunc: trunc.clone(),
            images,
            pow_cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn trunc(&self) -> &CoIdeal {
        &self.trunc
    }

    pub fn vars(&self) -> &VarSet {
        self.trunc.vars()
    }

    pub fn images(&self) -> &[Series] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &Series {
        &self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, im)| *im == Series::constant(&self.ring, &self.trunc, Poly::gen(&self.ring, i)).unwrap())
    }

    fn image_power(&self, i: usize, e: u32) -> Result<Series> {
        if e == 0 {
            return Series::one(&self.ring, &self.trunc);
        }
        if e == 1 {
            return Ok(self.images[i].clone());
        }
        if let Some(hit) = self.pow_cache.lock().unwrap().get(&(i, e)) {
            return Ok(hit.clone());
        }
        let out = self.image_power(i, e - 1)?.mul(&self.images[i])?;
        self.pow_cache.lock().unwrap().insert((i, e), out.clone());
        Ok(out)
    }

    /// `Φ_D(a)`: the multiplicative extension of the generator images.
    /// The constant term is always `a`.
    pub fn phi_apply(&self, a: &Poly) -> Result<Series> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let mut out = Series::zero(&self.ring, &self.trunc)?;
        for (mono, c) in a.terms() {
            let mut term = Series::constant(
                &self.ring,
                &self.trunc,
                Poly::constant(&self.ring, c.clone()),
            )?;
            for (i, &e) in mono.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&self.image_power(i, e)?)?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// The component `D_α(a)`, the coefficient of `s^α` in `Φ_D(a)`.
    pub fn component(&self, alpha: &MultiIndex, a: &Poly) -> Result<Poly> {
        if !self.trunc.contains(alpha) {
            return Err(Error::IndexOutsideTruncation);
        }
        Ok(self.phi_apply(a)?.coeff(alpha))
    }

    /// The component operator `D_α` as a handle.
    pub fn component_operator(&self, alpha: &MultiIndex) -> Result<OperatorHandle> {
        if !self.trunc.contains(alpha) {
            return Err(Error::IndexOutsideTruncation);
        }
        Ok(OperatorHandle { source: self.clone(), index: alpha.clone() })
    }

    /// The degree-one components as classical derivations, one per series
    /// variable in order.
    pub fn degree_one_derivations(&self) -> Result<Vec<Derivation>> {
        let vars = self.vars().clone();
        (0..vars.len())
            .map(|j| {
                let unit = MultiIndex::unit(&vars, j);
                let images = (0..self.ring.ngens())
                    .map(|i| self.images[i].coeff(&unit))
                    .collect::<Vec<_>>();
                Derivation::new(&self.ring, images)
            })
            .collect()
    }

    /// `D̃`: the ring automorphism of `A[[s]]_Δ` applying `Φ_D`
    /// coefficientwise, `D̃(Σ a_α s^α) = Σ Φ_D(a_α) s^α`.
    pub fn tilde_apply(&self, f: &Series) -> Result<Series> {
        if f.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        if f.trunc() != &self.trunc {
            return Err(Error::UniverseMismatch);
        }
        let mut out = Series::zero(&self.ring, &self.trunc)?;
        for (alpha, c) in f.coeffs() {
            out = out.add(&self.phi_apply(c)?.monomial_shift(alpha)?)?;
        }
        Ok(out)
    }

    /// Group law `D ∘ E`, computed through `Φ_{D∘E} = D̃ ∘ Φ_E`.
    pub fn compose(&self, other: &HSDeriv) -> Result<HSDeriv> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.trunc != other.trunc {
            return Err(Error::UniverseMismatch);
        }
        let images = other
            .images
            .iter()
            .map(|im| self.tilde_apply(im))
            .collect::<Result<Vec<_>>>()?;
        HSDeriv::from_images(&self.ring, &self.trunc, images)
    }

    /// The group inverse `D*`, built degree by degree from
    /// `E_α(x_i) = −Σ_{β+γ=α, β≠0} D_β(E_γ(x_i))`.
    pub fn invert(&self) -> HSDeriv {
        let vars = self.vars().clone();
        let zero = MultiIndex::zero(&vars);
        let n = self.ring.ngens();
        let mut images = Vec::with_capacity(n);
        for i in 0..n {
            let mut img: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
            img.insert(zero.clone(), Poly::gen(&self.ring, i));
            // Φ_D of each accumulated coefficient, computed once
            let mut phi_of: BTreeMap<MultiIndex, Series> = BTreeMap::new();
            phi_of.insert(
                zero.clone(),
                self.phi_apply(&Poly::gen(&self.ring, i)).expect("same ring"),
            );
            for alpha in self.trunc.iter() {
                if alpha.is_zero() {
                    continue;
                }
                let mut acc = Poly::zero(&self.ring);
                for beta in below(alpha) {
                    if beta.is_zero() {
                        continue;
                    }
                    let gamma = alpha.checked_sub(&beta).expect("beta <= alpha");
                    if let Some(series) = phi_of.get(&gamma) {
                        acc = acc.add(&series.coeff(&beta)).expect("same ring");
                    }
                }
                let val = acc.neg();
                if !val.is_zero() {
                    phi_of.insert(alpha.clone(), self.phi_apply(&val).expect("same ring"));
                    img.insert(alpha.clone(), val);
                }
            }
            let series =
                Series::from_coeffs(&self.ring, &self.trunc, img.into_iter().collect())
                    .expect("constructed in universe");
            images.push(series);
        }
        HSDeriv::from_images(&self.ring, &self.trunc, images)
            .expect("inverse keeps generator constant terms")
    }

    /// `ℓ(D) = ord(D − 𝕀)`: the norm of the first deviation of any
    /// generator image; `None` means infinity and happens only for `𝕀`.
    pub fn ell(&self) -> Option<u32> {
        self.images
            .iter()
            .enumerate()
            .filter_map(|(i, im)| {
                im.sub(
                    &Series::constant(&self.ring, &self.trunc, Poly::gen(&self.ring, i))
                        .expect("valid universe"),
                )
                .expect("same universe")
                .ord()
            })
            .min()
    }

    /// The group commutator `[D, E] = D ∘ E ∘ D* ∘ E*`.
    pub fn commutator(&self, other: &HSDeriv) -> Result<HSDeriv> {
        self.compose(other)?
            .compose(&self.invert())?
            .compose(&other.invert())
    }

    /// External product over disjoint variable sets: the component at
    /// `(α, β)` is `D_α ∘ E_β`.
    pub fn external(&self, other: &HSDeriv) -> Result<HSDeriv> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let prod = self.trunc.product(&other.trunc)?;
        let union = prod.vars().clone();
        let mut images = Vec::with_capacity(self.ring.ngens());
        for i in 0..self.ring.ngens() {
            let mut acc = Series::zero(&self.ring, &prod)?;
            for (beta, e_beta) in other.images[i].coeffs() {
                let lifted = self.phi_apply(e_beta)?.embed_into(&prod)?;
                let shift = beta.embed_into(&union)?;
                acc = acc.add(&lifted.monomial_shift(&shift)?)?;
            }
            images.push(acc);
        }
        HSDeriv::from_images(&self.ring, &prod, images)
    }

    /// Truncate onto a sub-co-ideal.
    pub fn truncate(&self, delta2: &CoIdeal) -> Result<HSDeriv> {
        let images = self
            .images
            .iter()
            .map(|im| im.truncate(delta2))
            .collect::<Result<Vec<_>>>()?;
        HSDeriv::from_images(&self.ring, delta2, images)
    }
}

impl fmt::Display for HSDeriv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, im) in self.images.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} -> {}", self.ring.gens()[i], im)?;
        }
        Ok(())
    }
}

/// The action `φ•D` of a substitution map on an HS-derivation, through
/// `Φ_{φ•D} = φ ∘ Φ_D`. The trivial map and the identity derivation both
/// act to `𝕀`.
pub fn act(phi: &SubstMap, d: &HSDeriv) -> Result<HSDeriv> {
    if phi.ring() != d.ring() {
        return Err(Error::RingMismatch);
    }
    if phi.src() != d.trunc() {
        return Err(Error::UniverseMismatch);
    }
    let images = d
        .images()
        .iter()
        .map(|im| phi.apply(im))
        .collect::<Result<Vec<_>>>()?;
    HSDeriv::from_images(d.ring(), phi.dst(), images)
}

/// The twisted substitution map `φ^D`: the unique substitution map with
/// `(φ•D)~ ∘ φ^D = φ ∘ D̃`, computed as `φ^D(s) = Ẽ*(φ(s))` for `E = φ•D`.
pub fn phi_upper_d(phi: &SubstMap, d: &HSDeriv) -> Result<SubstMap> {
    let e = act(phi, d)?;
    let e_star = e.invert();
    let images = phi
        .images()
        .iter()
        .map(|im| e_star.tilde_apply(im))
        .collect::<Result<Vec<_>>>()?;
    SubstMap::new(phi.ring(), phi.src(), phi.dst(), images)
}

/// `D(φ)`: the substitution map with images `D̃(φ(s))`, for `D` living on
/// `φ`'s target universe.
pub fn d_of_phi(d: &HSDeriv, phi: &SubstMap) -> Result<SubstMap> {
    if phi.ring() != d.ring() {
        return Err(Error::RingMismatch);
    }
    if phi.dst() != d.trunc() {
        return Err(Error::UniverseMismatch);
    }
    let images = phi
        .images()
        .iter()
        .map(|im| d.tilde_apply(im))
        .collect::<Result<Vec<_>>>()?;
    SubstMap::new(phi.ring(), phi.src(), phi.dst(), images)
}

/// The doubled universe used by the iterativity test: fresh primed copies
/// of the variables and the co-ideal of all splittings `(β, γ)` with
/// `β + γ ∈ Δ`.
pub(crate) fn doubled_universe(trunc: &CoIdeal) -> Result<(CoIdeal, VarSet)> {
    let vars = trunc.vars();
    let mut primed_names: Vec<String> = Vec::with_capacity(vars.len());
    for n in vars.names() {
        let mut p = format!("{n}'");
        while vars.names().contains(&p) || primed_names.contains(&p) {
            p.push('\'');
        }
        primed_names.push(p);
    }
    let primed = VarSet::new(primed_names)?;
    let union = vars.union_disjoint(&primed)?;
    let mut members = BTreeSet::new();
    for total in trunc.iter() {
        for beta in below(total) {
            let gamma = total.checked_sub(&beta).expect("beta <= total");
            let eb = beta.embed_into(&union)?;
            let eg_pairs: Vec<(usize, u32)> =
                gamma.exps().map(|(pos, e)| (vars.len() + pos, e)).collect();
            let eg = MultiIndex::from_exps(&union, &eg_pairs)?;
            members.insert(eb.add(&eg)?);
        }
    }
    Ok((CoIdeal::from_members_unchecked(&union, members), primed))
}

/// Iterativity: `D` is iterative exactly when
/// `(ι+ι')•D = (ι•D) ∘ (ι'•D)` over the doubled variable set, compared
/// exactly on generator images.
pub fn is_iterative(d: &HSDeriv) -> Result<bool> {
    let ring = d.ring().clone();
    let n = d.vars().len();
    let (doubled, _primed) = doubled_universe(d.trunc())?;

    // ι + ι': s_j -> s_j + s'_j, dropping classes that are zero in the
    // doubled quotient
    let sum_images = (0..n)
        .map(|j| {
            let coeffs = [MultiIndex::unit(doubled.vars(), j), MultiIndex::unit(doubled.vars(), n + j)]
                .into_iter()
                .filter(|idx| doubled.contains(idx))
                .map(|idx| (idx, Poly::one(&ring)))
                .collect();
            Series::from_coeffs(&ring, &doubled, coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    let sum_map = SubstMap::new(&ring, d.trunc(), &doubled, sum_images)?;

    let incl_first: Vec<usize> = (0..n).collect();
    let incl_second: Vec<usize> = (0..n).map(|j| n + j).collect();
    let iota = SubstMap::combinatorial(&ring, d.trunc(), &doubled, &incl_first)?;
    let iota_p = SubstMap::combinatorial(&ring, d.trunc(), &doubled, &incl_second)?;

    let lhs = act(&sum_map, d)?;
    let rhs = act(&iota, d)?.compose(&act(&iota_p, d)?)?;
    Ok(lhs == rhs)
}

/// A `k`-linear operator on the coefficient ring, for order checks.
pub trait PolyOperator {
    fn apply_op(&self, a: &Poly) -> Result<Poly>;
    fn op_ring(&self) -> &PolyRing;
}

/// The component `D_α` of an HS-derivation as an operator on `A`.
#[derive(Clone, Debug)]
pub struct OperatorHandle {
    source: HSDeriv,
    index: MultiIndex,
}

impl OperatorHandle {
    pub fn source(&self) -> &HSDeriv {
        &self.source
    }

    pub fn index(&self) -> &MultiIndex {
        &self.index
    }

    /// Witness-based order check, delegating to [`op_order_at_most`].
    pub fn order_at_most(&self, n: i64, witnesses: &[Poly]) -> Result<bool> {
        op_order_at_most(self, n, witnesses)
    }
}

impl PolyOperator for OperatorHandle {
    fn apply_op(&self, a: &Poly) -> Result<Poly> {
        self.source.component(&self.index, a)
    }

    fn op_ring(&self) -> &PolyRing {
        self.source.ring()
    }
}

/// An arbitrary operator given by a closure, for combinations like
/// `D*_α − (−1)^{|α|} D_α`.
pub struct FnOperator<'a> {
    ring: &'a PolyRing,
    f: Box<dyn Fn(&Poly) -> Result<Poly> + 'a>,
}

impl<'a> FnOperator<'a> {
    pub fn new(ring: &'a PolyRing, f: impl Fn(&Poly) -> Result<Poly> + 'a) -> Self {
        FnOperator { ring, f: Box::new(f) }
    }
}

impl PolyOperator for FnOperator<'_> {
    fn apply_op(&self, a: &Poly) -> Result<Poly> {
        (self.f)(a)
    }

    fn op_ring(&self) -> &PolyRing {
        self.ring
    }
}

fn bracket_eval(op: &dyn PolyOperator, seq: &[&Poly], x: &Poly) -> Result<Poly> {
    match seq.split_last() {
        None => op.apply_op(x),
        Some((a, rest)) => {
            let left = bracket_eval(op, rest, &a.mul(x)?)?;
            let right = a.mul(&bracket_eval(op, rest, x)?)?;
            left.sub(&right)
        }
    }
}

/// Witness-based differential operator order check: true iff every
/// `(n+1)`-fold nested commutator `[[…[P, a_0], …], a_n]` vanishes on every
/// witness, with the `a_i` ranging over the ring generators and the witness
/// multipliers. A sound sampling check, not a proof. `n = −1` asks whether
/// the operator itself vanishes on the witnesses.
pub fn op_order_at_most(op: &dyn PolyOperator, n: i64, witnesses: &[Poly]) -> Result<bool> {
    if witnesses.is_empty() {
        return Err(Error::Precondition("witness set must be non-empty".into()));
    }
    let ring = op.op_ring().clone();
    if n < 0 {
        for w in witnesses {
            if !op.apply_op(w)?.is_zero() {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let mut slots: Vec<Poly> = (0..ring.ngens()).map(|i| Poly::gen(&ring, i)).collect();
    slots.extend(witnesses.iter().cloned());
    let depth = (n + 1) as usize;
    let mut counter = vec![0usize; depth];
    loop {
        let seq: Vec<&Poly> = counter.iter().map(|&i| &slots[i]).collect();
        for w in witnesses {
            if !bracket_eval(op, &seq, w)?.is_zero() {
                return Ok(false);
            }
        }
        let mut pos = 0;
        loop {
            if pos == depth {
                return Ok(true);
            }
            counter[pos] += 1;
            if counter[pos] < slots.len() {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
    }
}

/// The default witness set for order checks: all monomials of total degree
/// at most `max_degree`.
pub fn standard_witnesses(ring: &PolyRing, max_degree: u32) -> Vec<Poly> {
    fn rec(ring: &PolyRing, exps: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Poly>) {
        if pos == exps.len() {
            out.push(
                Poly::monomial(ring, exps.clone(), crate::algebra::Scalar::one(ring.field()))
                    .expect("lengths match"),
            );
            return;
        }
        for e in 0..=left {
            exps[pos] = e;
            rec(ring, exps, pos + 1, left - e, out);
        }
        exps[pos] = 0;
    }
    let mut out = Vec::new();
    if ring.ngens() == 0 {
        return vec![Poly::one(ring)];
    }
    let mut exps = vec![0u32; ring.ngens()];
    rec(ring, &mut exps, 0, max_degree, &mut out);
    out
}
