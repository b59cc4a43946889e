//! Exact coefficient arithmetic: the base field `k` (rationals or a prime
//! field) and the polynomial algebra `A = k[x_1..x_n]` with its derivations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// The base field: exact rationals or the prime field `GF(p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Q,
    Gf(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldKind {
    pub fn gf(p: u64) -> Result<FieldKind> {
        if is_prime(p) {
            Ok(FieldKind::Gf(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }
}

/// An exact field element: a reduced rational with positive denominator, or
/// a residue in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Mod { p: u64, v: u64 },
}

fn powmod(b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb: u128 = (b % p) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % p as u128;
        }
        bb = bb * bb % p as u128;
        e >>= 1;
    }
    acc as u64
}

impl Scalar {
    pub fn zero(field: &FieldKind) -> Scalar {
        match field {
            FieldKind::Q => Scalar::Rat(BigRational::zero()),
            FieldKind::Gf(p) => Scalar::Mod { p: *p, v: 0 },
        }
    }

    pub fn one(field: &FieldKind) -> Scalar {
        match field {
            FieldKind::Q => Scalar::Rat(BigRational::one()),
            FieldKind::Gf(p) => Scalar::Mod { p: *p, v: 1 },
        }
    }

    pub fn from_i64(field: &FieldKind, n: i64) -> Scalar {
        match field {
            FieldKind::Q => Scalar::Rat(BigRational::from(BigInt::from(n))),
            FieldKind::Gf(p) => {
                let m = n.rem_euclid(*p as i64) as u64;
                Scalar::Mod { p: *p, v: m }
            }
        }
    }

    pub fn field(&self) -> FieldKind {
        match self {
            Scalar::Rat(_) => FieldKind::Q,
            Scalar::Mod { p, .. } => FieldKind::Gf(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod { v, .. } => *v == 0,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Mod { p, v: a }, Scalar::Mod { p: q, v: b }) => {
                assert_eq!(p, q, "mixed prime fields");
                Scalar::Mod { p: *p, v: (a + b) % p }
            }
            _ => panic!("mixed scalar kinds"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Mod { p, v: a }, Scalar::Mod { p: q, v: b }) => {
                assert_eq!(p, q, "mixed prime fields");
                Scalar::Mod { p: *p, v: ((*a as u128 * *b as u128) % *p as u128) as u64 }
            }
            _ => panic!("mixed scalar kinds"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Mod { p, v } => Scalar::Mod { p: *p, v: if *v == 0 { 0 } else { p - v } },
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::NonUnit);
        }
        Ok(match self {
            Scalar::Rat(a) => Scalar::Rat(a.recip()),
            Scalar::Mod { p, v } => Scalar::Mod { p: *p, v: powmod(*v, p - 2, *p) },
        })
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one(&self.field());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Canonical text form: reduced `n/d` (no `/1`) for Q, the residue for
    /// GF(p).
    pub fn canonical_string(&self) -> String {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Mod { v, .. } => v.to_string(),
        }
    }

    pub fn parse(field: &FieldKind, text: &str) -> Result<Scalar> {
        match field {
            FieldKind::Q => {
                let (n, d) = match text.split_once('/') {
                    Some((n, d)) => (n, d),
                    None => (text, "1"),
                };
                let numer: BigInt =
                    n.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{text}`")))?;
                let denom: BigInt =
                    d.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{text}`")))?;
                if denom.is_zero() {
                    return Err(Error::Parse("zero denominator".into()));
                }
                Ok(Scalar::Rat(BigRational::new(numer, denom)))
            }
            FieldKind::Gf(p) => {
                let n: i64 =
                    text.trim().parse().map_err(|_| Error::Parse(format!("bad residue `{text}`")))?;
                Ok(Scalar::from_i64(&FieldKind::Gf(*p), n))
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_string())
    }
}

/// The polynomial algebra `A = k[x_1..x_n]` with a fixed generator order.
#[derive(Clone, Debug, Eq, Hash)]
pub struct PolyRing {
    field: FieldKind,
    gens: Arc<Vec<String>>,
}

impl PolyRing {
    pub fn new<I, S>(field: FieldKind, gens: I) -> Result<PolyRing>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if let FieldKind::Gf(p) = field {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        let gens: Vec<String> = gens.into_iter().map(Into::into).collect();
        for (i, g) in gens.iter().enumerate() {
            if gens[..i].contains(g) {
                return Err(Error::DuplicateName(g.clone()));
            }
        }
        Ok(PolyRing { field, gens: Arc::new(gens) })
    }

    pub fn rational<I, S>(gens: I) -> Result<PolyRing>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PolyRing::new(FieldKind::Q, gens)
    }

    pub fn field(&self) -> &FieldKind {
        &self.field
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }
}

impl PartialEq for PolyRing {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && (Arc::ptr_eq(&self.gens, &other.gens) || self.gens == other.gens)
    }
}

/// A dense exponent vector over the ring generators, ordered graded then
/// earlier-generator-heavy first (`1, x, y, x², xy, y², …` ascending).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(n: usize) -> Mono {
        Mono(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o.reverse(),
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse exact polynomial in canonical form: no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    ring: PolyRing,
    terms: BTreeMap<Mono, Scalar>,
}

impl Poly {
    pub fn zero(ring: &PolyRing) -> Poly {
        Poly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ring: &PolyRing) -> Poly {
        Poly::constant(ring, Scalar::one(ring.field()))
    }

    pub fn constant(ring: &PolyRing, c: Scalar) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(ring.ngens()), c);
        }
        Poly { ring: ring.clone(), terms }
    }

    pub fn from_i64(ring: &PolyRing, n: i64) -> Poly {
        Poly::constant(ring, Scalar::from_i64(ring.field(), n))
    }

    /// The generator `x_i`.
    pub fn gen(ring: &PolyRing, i: usize) -> Poly {
        let mut exps = vec![0; ring.ngens()];
        exps[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(Mono(exps), Scalar::one(ring.field()));
        Poly { ring: ring.clone(), terms }
    }

    pub fn monomial(ring: &PolyRing, exps: Vec<u32>, c: Scalar) -> Result<Poly> {
        if exps.len() != ring.ngens() {
            return Err(Error::Precondition("exponent vector length mismatch".into()));
        }
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(exps), c);
        }
        Ok(Poly { ring: ring.clone(), terms })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// `Some(c)` when the polynomial is the constant `c` (possibly zero).
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero(self.ring.field())),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.degree() == 0 {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// A unit of `A`: a nonzero scalar of `k`.
    pub fn is_unit_scalar(&self) -> bool {
        self.as_constant().map(|c| !c.is_zero()).unwrap_or(false)
    }

    fn check_ring(&self, other: &Poly) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_ring(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(acc) => {
                    *acc = acc.add(c);
                    if acc.is_zero() {
                        terms.remove(m);
                    }
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        Ok(Poly { ring: self.ring.clone(), terms })
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.check_ring(other)?;
        let mut terms: BTreeMap<Mono, Scalar> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.mul(cb);
                match terms.get_mut(&m) {
                    Some(acc) => {
                        *acc = acc.add(&c);
                        if acc.is_zero() {
                            terms.remove(&m);
                        }
                    }
                    None => {
                        if !c.is_zero() {
                            terms.insert(m, c);
                        }
                    }
                }
            }
        }
        Ok(Poly { ring: self.ring.clone(), terms })
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.ring);
        }
        Poly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v.mul(c))).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(&self.ring);
        for _ in 0..e {
            acc = acc.mul(self).expect("same ring");
        }
        acc
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // leading term first
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    if e == 1 {
                        self.ring.gens()[j].clone()
                    } else {
                        format!("{}^{}", self.ring.gens()[j], e)
                    }
                })
                .collect::<Vec<_>>()
                .join("*");
            let cs = c.canonical_string();
            let (sign, mag) = match cs.strip_prefix('-') {
                Some(rest) => ("-", rest.to_string()),
                None => ("+", cs),
            };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == "1" {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// A `k`-derivation of `A`, stored by its values on the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    ring: PolyRing,
    images: Vec<Poly>,
}

impl Derivation {
    pub fn new(ring: &PolyRing, images: Vec<Poly>) -> Result<Derivation> {
        if images.len() != ring.ngens() {
            return Err(Error::Precondition(
                "derivation image count must equal generator count".into(),
            ));
        }
        for im in &images {
            if im.ring() != ring {
                return Err(Error::RingMismatch);
            }
        }
        Ok(Derivation { ring: ring.clone(), images })
    }

    /// The coordinate partial `∂/∂x_i`.
    pub fn partial(ring: &PolyRing, i: usize) -> Derivation {
        let images = (0..ring.ngens())
            .map(|j| if i == j { Poly::one(ring) } else { Poly::zero(ring) })
            .collect();
        Derivation { ring: ring.clone(), images }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn images(&self) -> &[Poly] {
        &self.images
    }

    /// Evaluate the unique `k`-derivation extending the generator images.
    pub fn apply(&self, a: &Poly) -> Result<Poly> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let mut out = Poly::zero(&self.ring);
        for (m, c) in a.terms() {
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 || self.images[i].is_zero() {
                    continue;
                }
                let mut exps = m.0.clone();
                exps[i] -= 1;
                let factor = c.mul(&Scalar::from_i64(self.ring.field(), e as i64));
                let part = Poly::monomial(&self.ring, exps, factor)?;
                out = out.add(&part.mul(&self.images[i])?)?;
            }
        }
        Ok(out)
    }
}

fn minor(m: &[Vec<Poly>], skip_row: usize, skip_col: usize) -> Vec<Vec<Poly>> {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != skip_row)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| *c != skip_col)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect()
}

fn determinant(ring: &PolyRing, m: &[Vec<Poly>]) -> Result<Poly> {
    let n = m.len();
    if n == 0 {
        return Ok(Poly::one(ring));
    }
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut det = Poly::zero(ring);
    for (col, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let sub = determinant(ring, &minor(m, 0, col))?;
        let term = entry.mul(&sub)?;
        det = if col % 2 == 0 { det.add(&term)? } else { det.sub(&term)? };
    }
    Ok(det)
}

/// Express `delta` in a generating family of derivations whose generator
/// matrix has unit determinant, solving exactly by adjugate over `A`.
///
/// The matrix `M_ij = basis_j(x_i)` must be square (one basis element per
/// ring generator) with determinant a nonzero element of `k`; anything else
/// is reported as an unsupported generating set.
pub fn solve_in_derivation_basis(
    delta: &Derivation,
    basis: &[Derivation],
) -> Result<Vec<Poly>> {
    let ring = delta.ring().clone();
    let n = ring.ngens();
    if basis.len() != n {
        return Err(Error::UnsupportedGeneratingSet(format!(
            "need exactly {n} basis derivations, got {}",
            basis.len()
        )));
    }
    for b in basis {
        if b.ring() != &ring {
            return Err(Error::RingMismatch);
        }
    }
    let m: Vec<Vec<Poly>> = (0..n)
        .map(|i| (0..n).map(|j| basis[j].images()[i].clone()).collect())
        .collect();
    let det = determinant(&ring, &m)?;
    let det_scalar = det
        .as_constant()
        .filter(|c| !c.is_zero())
        .ok_or_else(|| {
            Error::UnsupportedGeneratingSet("generator matrix determinant is not a unit of k".into())
        })?;
    let det_inv = det_scalar.inv()?;

    let v: Vec<Poly> = (0..n).map(|i| delta.images()[i].clone()).collect();
    // adjugate solve: c_j = det^{-1} Σ_i cof_ij v_i, cof_ij the (i,j) cofactor
    let mut coords = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Poly::zero(&ring);
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            let cof = determinant(&ring, &minor(&m, i, j))?;
            let signed = if (i + j) % 2 == 0 { cof } else { cof.neg() };
            acc = acc.add(&signed.mul(vi)?)?;
        }
        coords.push(acc.scalar_mul(&det_inv));
    }

    // defensive reconstruction check
    for i in 0..n {
        let mut recon = Poly::zero(&ring);
        for (j, c) in coords.iter().enumerate() {
            recon = recon.add(&c.mul(&basis[j].images()[i])?)?;
        }
        if recon != delta.images()[i] {
            return Err(Error::SolverFailure("adjugate solve failed to reconstruct".into()));
        }
    }
    Ok(coords)
}

/// Signature of a pluggable coordinate solver for generating families that
/// are not bases.
pub type DerivationSolver = dyn Fn(&Derivation, &[Derivation]) -> Result<Vec<Poly>>;

#[cfg(test)]
mod tests {
    use super::*;

    fn qxy() -> PolyRing {
        PolyRing::rational(["x", "y"]).unwrap()
    }

    fn x(ring: &PolyRing) -> Poly {
        Poly::gen(ring, 0)
    }

    fn y(ring: &PolyRing) -> Poly {
        Poly::gen(ring, 1)
    }

    #[test]
    fn product_of_conjugates() {
        let r = PolyRing::rational(["x"]).unwrap();
        let xp1 = Poly::gen(&r, 0).add(&Poly::one(&r)).unwrap();
        let xm1 = Poly::gen(&r, 0).sub(&Poly::one(&r)).unwrap();
        let got = xp1.mul(&xm1).unwrap();
        let want = Poly::gen(&r, 0).pow(2).sub(&Poly::one(&r)).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn frobenius_in_characteristic_two() {
        let r = PolyRing::new(FieldKind::gf(2).unwrap(), ["x"]).unwrap();
        let xp1 = Poly::gen(&r, 0).add(&Poly::one(&r)).unwrap();
        let sq = xp1.pow(2);
        let want = Poly::gen(&r, 0).pow(2).add(&Poly::one(&r)).unwrap();
        assert_eq!(sq, want);
    }

    #[test]
    fn additive_identity() {
        let r = qxy();
        let a = x(&r).mul(&y(&r)).unwrap().add(&Poly::from_i64(&r, 3)).unwrap();
        assert_eq!(a.add(&Poly::zero(&r)).unwrap(), a);
    }

    #[test]
    fn ring_mismatch_detected() {
        let r = qxy();
        let s = PolyRing::rational(["x"]).unwrap();
        assert!(matches!(x(&r).add(&Poly::gen(&s, 0)), Err(Error::RingMismatch)));
    }

    #[test]
    fn partial_derivative() {
        let r = qxy();
        let d = Derivation::partial(&r, 0);
        let a = x(&r).pow(2).mul(&y(&r)).unwrap();
        let got = d.apply(&a).unwrap();
        let want = Poly::from_i64(&r, 2).mul(&x(&r)).unwrap().mul(&y(&r)).unwrap();
        assert_eq!(got, want);
        assert!(d.apply(&Poly::from_i64(&r, 7)).unwrap().is_zero());
    }

    #[test]
    fn swap_derivation_by_hand_oracle() {
        // d with images (y, x) on xy -> y^2 + x^2 by the Leibniz expansion
        let r = qxy();
        let d = Derivation::new(&r, vec![y(&r), x(&r)]).unwrap();
        let got = d.apply(&x(&r).mul(&y(&r)).unwrap()).unwrap();
        let want = y(&r).pow(2).add(&x(&r).pow(2)).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn leibniz_on_samples() {
        let r = qxy();
        let d = Derivation::new(
            &r,
            vec![x(&r).mul(&y(&r)).unwrap(), Poly::from_i64(&r, -2)],
        )
        .unwrap();
        let samples = [
            Poly::one(&r),
            x(&r),
            y(&r).pow(3),
            x(&r).add(&y(&r)).unwrap().pow(2),
        ];
        for a in &samples {
            for b in &samples {
                let lhs = d.apply(&a.mul(b).unwrap()).unwrap();
                let rhs = d
                    .apply(a)
                    .unwrap()
                    .mul(b)
                    .unwrap()
                    .add(&a.mul(&d.apply(b).unwrap()).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn solve_coordinate_basis() {
        let r = qxy();
        let dx = Derivation::partial(&r, 0);
        let dy = Derivation::partial(&r, 1);
        let basis = [dx.clone(), dy.clone()];
        let c = solve_in_derivation_basis(&dx, &basis).unwrap();
        assert_eq!(c, vec![Poly::one(&r), Poly::zero(&r)]);

        let delta = Derivation::new(&r, vec![x(&r).pow(2), y(&r)]).unwrap();
        let c = solve_in_derivation_basis(&delta, &basis).unwrap();
        assert_eq!(c, vec![x(&r).pow(2), y(&r)]);
    }

    #[test]
    fn solve_skew_basis() {
        // delta images (y, 0) against basis (d/dx + d/dy, d/dy) -> (y, -y)
        let r = qxy();
        let b1 = Derivation::new(&r, vec![Poly::one(&r), Poly::one(&r)]).unwrap();
        let b2 = Derivation::partial(&r, 1);
        let delta = Derivation::new(&r, vec![y(&r), Poly::zero(&r)]).unwrap();
        let c = solve_in_derivation_basis(&delta, &[b1, b2]).unwrap();
        assert_eq!(c, vec![y(&r), y(&r).neg()]);
    }

    #[test]
    fn solve_rejects_non_unit_determinant() {
        let r = qxy();
        let b1 = Derivation::new(&r, vec![x(&r), Poly::zero(&r)]).unwrap();
        let b2 = Derivation::partial(&r, 1);
        let delta = Derivation::partial(&r, 0);
        assert!(matches!(
            solve_in_derivation_basis(&delta, &[b1, b2]),
            Err(Error::UnsupportedGeneratingSet(_))
        ));
    }

    #[test]
    fn gf_requires_prime() {
        assert!(FieldKind::gf(6).is_err());
        assert!(FieldKind::gf(5).is_ok());
        assert!(PolyRing::new(FieldKind::Gf(9), ["x"]).is_err());
    }

    #[test]
    fn scalar_canonical_strings() {
        let half = Scalar::parse(&FieldKind::Q, "2/4").unwrap();
        assert_eq!(half.canonical_string(), "1/2");
        let neg = Scalar::parse(&FieldKind::Q, "3/-6").unwrap();
        assert_eq!(neg.canonical_string(), "-1/2");
        let three = Scalar::parse(&FieldKind::Q, "3").unwrap();
        assert_eq!(three.canonical_string(), "3");
        let m = Scalar::parse(&FieldKind::Gf(5), "-1").unwrap();
        assert_eq!(m.canonical_string(), "4");
    }

    #[test]
    fn display_readable() {
        let r = qxy();
        let p = x(&r)
            .pow(2)
            .sub(&Poly::constant(&r, Scalar::parse(&FieldKind::Q, "1/2").unwrap()))
            .unwrap();
        assert_eq!(p.to_string(), "x^2 - 1/2");
    }
}
