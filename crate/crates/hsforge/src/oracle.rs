//! Independent brute-force implementations of every closed formula, and the
//! seeded self-check suite that pits them against the optimized paths.
//!
//! Three oracles carry the load: `direct_c` expands substitution images by
//! repeated series multiplication and reads off one coefficient,
//! `hs_inverse_partition` computes inverse components by the signed ordered
//! partition sum, and `phi_d_recursive_coeff` evaluates the twisted-map
//! coefficients by their recursion. The suite wires these and the
//! cross-module identities into named checks with deterministic seeding and
//! a mandatory negative control per check: a suite that cannot fail
//! verifies nothing.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    solve_in_derivation_basis, Derivation, FieldKind, Poly, PolyRing, Scalar,
};
use crate::generate::{
    canonical_hs, generate_subst, top_action_law, verify_uniqueness, GenerationProblem,
};
use crate::hsderiv::{
    act, d_of_phi, is_iterative, op_order_at_most, phi_upper_d, standard_witnesses, FnOperator,
    HSDeriv,
};
use crate::multiindex::{below, enum_ordered_partitions, CoIdeal, MultiIndex, VarSet};
use crate::series::Series;
use crate::substitution::{CoeffTable, SubstMap};
use crate::{Error, Result};

/// The substitution coefficient computed the slow way: expand
/// `φ(s^α) = Π_t (c^t)^{α_t}` by repeated series multiplication and read
/// the coefficient of `t^e`.
pub fn direct_c(phi: &SubstMap, alpha: &MultiIndex, e: &MultiIndex) -> Result<Poly> {
    if !phi.src().contains(alpha) || !phi.dst().contains(e) {
        return Err(Error::IndexOutsideTruncation);
    }
    let mut prod = Series::one(phi.ring(), phi.dst())?;
    for (pos, exp) in alpha.exps() {
        for _ in 0..exp {
            prod = prod.mul(phi.image(pos))?;
        }
    }
    Ok(prod.coeff(e))
}

/// The inverse component by the closed signed partition sum:
/// `D*_α(a) = Σ_{d=1}^{|α|} (−1)^d Σ_{Par(α,d)} (D_{α¹} ∘ ⋯ ∘ D_{α^d})(a)`,
/// with `D*_0 = Id`.
pub fn hs_inverse_partition(d: &HSDeriv, alpha: &MultiIndex, a: &Poly) -> Result<Poly> {
    if !d.trunc().contains(alpha) {
        return Err(Error::IndexOutsideTruncation);
    }
    if alpha.is_zero() {
        return Ok(a.clone());
    }
    let mut total = Poly::zero(d.ring());
    for parts in 1..=alpha.norm() {
        let mut layer = Poly::zero(d.ring());
        for part in enum_ordered_partitions(alpha, parts) {
            let mut val = a.clone();
            for piece in part.parts.iter().rev() {
                val = d.component(piece, &val)?;
            }
            layer = layer.add(&val)?;
        }
        total = if parts % 2 == 1 { total.sub(&layer)? } else { total.add(&layer)? };
    }
    Ok(total)
}

/// The twisted-map coefficient by its recursion, seeded with
/// `C_0(φ^D, 0) = 1`:
/// `C_e(φ^D,ν) = C_e(φ,ν) − Σ_{β+γ=e, |g|≤|β|, |ν|≤|γ|<|e|} C_β(φ,g) D_g(C_γ(φ^D,ν))`.
pub fn phi_d_recursive_coeff(
    phi: &SubstMap,
    d: &HSDeriv,
    nu: &MultiIndex,
    e: &MultiIndex,
) -> Result<Poly> {
    if phi.src() != d.trunc() {
        return Err(Error::UniverseMismatch);
    }
    if nu.norm() > e.norm() {
        return Err(Error::NormViolation);
    }
    let mut memo: HashMap<(MultiIndex, MultiIndex), Poly> = HashMap::new();
    phi_d_rec(phi, d, nu, e, &mut memo)
}

fn phi_d_rec(
    phi: &SubstMap,
    d: &HSDeriv,
    nu: &MultiIndex,
    e: &MultiIndex,
    memo: &mut HashMap<(MultiIndex, MultiIndex), Poly>,
) -> Result<Poly> {
    if nu.norm() > e.norm() {
        return Ok(Poly::zero(phi.ring()));
    }
    if e.is_zero() {
        return Ok(Poly::one(phi.ring()));
    }
    let key = (e.clone(), nu.clone());
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }
    let mut acc = phi.coeff(nu, e)?;
    for beta in below(e) {
        let gamma = e.checked_sub(&beta).expect("beta <= e");
        if gamma.norm() >= e.norm() || nu.norm() > gamma.norm() {
            continue;
        }
        let inner = phi_d_rec(phi, d, nu, &gamma, memo)?;
        if inner.is_zero() {
            continue;
        }
        for g in phi.src().iter() {
            if g.norm() > beta.norm() {
                continue;
            }
            let cb = phi.coeff(g, &beta)?;
            if cb.is_zero() {
                continue;
            }
            acc = acc.sub(&cb.mul(&d.component(g, &inner)?)?)?;
        }
    }
    memo.insert(key, acc.clone());
    Ok(acc)
}

/// One recorded disagreement.
#[derive(Clone, Debug)]
pub struct Failure {
    pub input: String,
    pub expected: String,
    pub got: String,
}

/// Outcome of one named check: pass exactly when `failures` is empty.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub failures: Vec<Failure>,
}

impl CheckReport {
    fn new(name: &str) -> CheckReport {
        CheckReport { name: name.to_string(), instances: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn expect_eq<T: PartialEq + std::fmt::Debug>(&mut self, input: &str, expected: &T, got: &T) {
        self.instances += 1;
        if expected != got {
            self.failures.push(Failure {
                input: input.to_string(),
                expected: format!("{expected:?}"),
                got: format!("{got:?}"),
            });
        }
    }

    fn expect_true(&mut self, input: &str, got: bool) {
        self.instances += 1;
        if !got {
            self.failures.push(Failure {
                input: input.to_string(),
                expected: "true".to_string(),
                got: "false".to_string(),
            });
        }
    }

    /// Negative control: a deliberately corrupted comparison must disagree.
    fn expect_ne<T: PartialEq + std::fmt::Debug>(&mut self, input: &str, a: &T, b: &T) {
        self.instances += 1;
        if a == b {
            self.failures.push(Failure {
                input: format!("negative control failed to fail: {input}"),
                expected: "disagreement".to_string(),
                got: format!("{a:?}"),
            });
        }
    }

    fn fail(&mut self, input: &str, err: &Error) {
        self.instances += 1;
        self.failures.push(Failure {
            input: input.to_string(),
            expected: "no error".to_string(),
            got: format!("{err}"),
        });
    }
}

/// Deterministic random data shared by the checks. Coefficients come from a
/// small pool to keep expression swell bounded while still exercising
/// non-constant coefficients.
pub mod gen {
    use super::*;

    pub fn standard_rings() -> Vec<PolyRing> {
        vec![
            PolyRing::rational(["x"]).unwrap(),
            PolyRing::rational(["x", "y"]).unwrap(),
            PolyRing::new(FieldKind::Gf(5), ["x"]).unwrap(),
            PolyRing::new(FieldKind::Gf(5), ["x", "y"]).unwrap(),
        ]
    }

    pub fn rand_ring(rng: &mut ChaCha8Rng) -> PolyRing {
        let rings = standard_rings();
        rings[rng.gen_range(0..rings.len())].clone()
    }

    /// The coefficient pool `{0, ±1, ±2, x, y, x+1}` (clipped to the
    /// generators that exist).
    pub fn pool(ring: &PolyRing) -> Vec<Poly> {
        let mut out = vec![
            Poly::zero(ring),
            Poly::one(ring),
            Poly::from_i64(ring, -1),
            Poly::from_i64(ring, 2),
            Poly::from_i64(ring, -2),
        ];
        for i in 0..ring.ngens() {
            out.push(Poly::gen(ring, i));
        }
        out.push(Poly::gen(ring, 0).add(&Poly::one(ring)).unwrap());
        out
    }

    pub fn rand_poly(rng: &mut ChaCha8Rng, ring: &PolyRing) -> Poly {
        let pool = pool(ring);
        pool[rng.gen_range(0..pool.len())].clone()
    }

    pub fn rand_nonzero_poly(rng: &mut ChaCha8Rng, ring: &PolyRing) -> Poly {
        loop {
            let p = rand_poly(rng, ring);
            if !p.is_zero() {
                return p;
            }
        }
    }

    pub fn rand_vars(rng: &mut ChaCha8Rng, names: &[&str]) -> VarSet {
        let k = rng.gen_range(1..=2.min(names.len()));
        VarSet::new(names[..k].iter().map(|s| s.to_string())).unwrap()
    }

    /// A random series over the given universe, with roughly half the
    /// indices populated from the pool.
    pub fn rand_series(rng: &mut ChaCha8Rng, ring: &PolyRing, trunc: &CoIdeal) -> Series {
        let mut coeffs = Vec::new();
        for alpha in trunc.iter() {
            if rng.gen_bool(0.5) {
                coeffs.push((alpha.clone(), rand_poly(rng, ring)));
            }
        }
        Series::from_coeffs(ring, trunc, coeffs).unwrap()
    }

    /// A random unit with constant term exactly 1.
    pub fn rand_unit(rng: &mut ChaCha8Rng, ring: &PolyRing, trunc: &CoIdeal) -> Series {
        let mut s = rand_series(rng, ring, trunc);
        let ct = s.constant_term();
        s = s
            .sub(&Series::constant(ring, trunc, ct).unwrap())
            .unwrap()
            .add(&Series::one(ring, trunc).unwrap())
            .unwrap();
        s
    }

    /// A random substitution map between full `t_m` universes (always
    /// well defined).
    pub fn rand_subst(
        rng: &mut ChaCha8Rng,
        ring: &PolyRing,
        src_vars: &VarSet,
        dst_vars: &VarSet,
        m: u32,
    ) -> SubstMap {
        let src = CoIdeal::tm(src_vars, m);
        let dst = CoIdeal::tm(dst_vars, m);
        let images = (0..src_vars.len())
            .map(|_| {
                let mut coeffs = Vec::new();
                for e in dst.iter() {
                    if e.is_zero() {
                        continue;
                    }
                    if rng.gen_bool(0.5) {
                        coeffs.push((e.clone(), rand_poly(rng, ring)));
                    }
                }
                Series::from_coeffs(ring, &dst, coeffs).unwrap()
            })
            .collect();
        SubstMap::new(ring, &src, &dst, images).unwrap()
    }

    /// A random substitution map with constant coefficients.
    pub fn rand_const_subst(
        rng: &mut ChaCha8Rng,
        ring: &PolyRing,
        src_vars: &VarSet,
        dst_vars: &VarSet,
        m: u32,
    ) -> SubstMap {
        let src = CoIdeal::tm(src_vars, m);
        let dst = CoIdeal::tm(dst_vars, m);
        let images = (0..src_vars.len())
            .map(|_| {
                let mut coeffs = Vec::new();
                for e in dst.iter() {
                    if e.is_zero() {
                        continue;
                    }
                    if rng.gen_bool(0.5) {
                        let c = Scalar::from_i64(ring.field(), rng.gen_range(-2..=2));
                        coeffs.push((e.clone(), Poly::constant(ring, c)));
                    }
                }
                Series::from_coeffs(ring, &dst, coeffs).unwrap()
            })
            .collect();
        SubstMap::new(ring, &src, &dst, images).unwrap()
    }

    /// A random HS-derivation over the given universe.
    pub fn rand_hs(rng: &mut ChaCha8Rng, ring: &PolyRing, trunc: &CoIdeal) -> HSDeriv {
        let images = (0..ring.ngens())
            .map(|i| {
                let mut coeffs = vec![(
                    MultiIndex::zero(trunc.vars()),
                    Poly::gen(ring, i),
                )];
                for alpha in trunc.iter() {
                    if alpha.is_zero() {
                        continue;
                    }
                    if rng.gen_bool(0.5) {
                        coeffs.push((alpha.clone(), rand_poly(rng, ring)));
                    }
                }
                Series::from_coeffs(ring, trunc, coeffs).unwrap()
            })
            .collect();
        HSDeriv::from_images(ring, trunc, images).unwrap()
    }
}

use gen::*;

type CheckFn = fn(&mut ChaCha8Rng, usize, bool) -> CheckReport;

fn check_unit_inverse(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("unit-inverse");
    for k in 0..n {
        let ring = rand_ring(rng);
        let vars = rand_vars(rng, &["s", "t"]);
        let m = rng.gen_range(1..=if vars.len() == 2 { 3 } else { 4 });
        let trunc = CoIdeal::tm(&vars, m);
        let r = rand_unit(rng, &ring, &trunc);
        let rec = r.invert_recursive().unwrap();
        let mut part = r.invert_partition().unwrap();
        if perturb && k == 0 {
            part = part.add(&Series::one(&ring, &trunc).unwrap()).unwrap();
        }
        let tag = format!("unit {k}: {r}");
        rep.expect_eq(&tag, &rec, &part);
        let one = Series::one(&ring, &trunc).unwrap();
        rep.expect_eq(&tag, &one, &r.mul(&rec).unwrap());
        rep.expect_eq(&tag, &one, &rec.mul(&r).unwrap());
        if k == 0 && !perturb {
            // negative control: a shifted inverse must disagree
            let bad = rec.add(&one).unwrap();
            rep.expect_ne(&tag, &bad, &part);
        }
    }
    rep
}

fn check_coeff_formula(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("coeff-formula");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s", "u"]);
        let t = rand_vars(rng, &["t", "v"]);
        let m = rng.gen_range(1..=if s.len().max(t.len()) == 2 { 3 } else { 4 });
        let phi = rand_subst(rng, &ring, &s, &t, m);
        // every in-range pair
        for alpha in phi.src().iter() {
            for e in phi.dst().iter() {
                if alpha.norm() > e.norm() {
                    continue;
                }
                let fast = phi.coeff(alpha, e).unwrap();
                let mut slow = direct_c(&phi, alpha, e).unwrap();
                if perturb && k == 0 && alpha.norm() == 1 {
                    slow = slow.add(&Poly::one(&ring)).unwrap();
                }
                rep.expect_eq(&format!("instance {k}: C_{e}(phi, {alpha})"), &slow, &fast);
            }
        }
        if k == 0 && !perturb {
            let alpha = phi.src().iter().find(|a| a.norm() == 1).unwrap().clone();
            let e = phi.dst().iter().find(|x| x.norm() == 1).unwrap().clone();
            let bad = direct_c(&phi, &alpha, &e).unwrap().add(&Poly::one(&ring)).unwrap();
            rep.expect_ne("coeff perturbation", &bad, &phi.coeff(&alpha, &e).unwrap());
        }
    }
    rep
}

fn check_composition_law(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("composition-law");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s"]);
        let t = rand_vars(rng, &["t", "v"]);
        let u = rand_vars(rng, &["u", "w"]);
        let m = rng.gen_range(1..=3);
        let phi = rand_subst(rng, &ring, &s, &t, m);
        let psi = rand_subst(rng, &ring, &t, &u, m);
        let comp = SubstMap::compose(&psi, &phi).unwrap();
        for alpha in phi.src().iter() {
            for f in psi.dst().iter() {
                if alpha.norm() > f.norm() {
                    continue;
                }
                let direct = comp.coeff(alpha, f).unwrap();
                let mut law = Poly::zero(&ring);
                for e in phi.dst().iter() {
                    if e.norm() < alpha.norm() || e.norm() > f.norm() {
                        continue;
                    }
                    law = law
                        .add(&phi.coeff(alpha, e).unwrap().mul(&psi.coeff(e, f).unwrap()).unwrap())
                        .unwrap();
                }
                if perturb && k == 0 && alpha.norm() == 1 && f.norm() == 1 {
                    law = law.add(&Poly::one(&ring)).unwrap();
                }
                rep.expect_eq(&format!("pair {k}: C_{f}(psi.phi, {alpha})"), &law, &direct);
            }
        }
        // composition with the trivial map is trivial
        let triv = SubstMap::trivial(&ring, phi.dst(), psi.dst()).unwrap();
        rep.expect_true(
            &format!("pair {k}: trivial composition"),
            SubstMap::compose(&triv, &phi).unwrap().is_trivial(),
        );
        let triv_src = SubstMap::trivial(&ring, phi.src(), phi.dst()).unwrap();
        rep.expect_true(
            &format!("pair {k}: composition with trivial"),
            SubstMap::compose(&psi, &triv_src).unwrap().is_trivial(),
        );
        if k == 0 && !perturb {
            let alpha = phi.src().iter().find(|a| a.norm() == 1).unwrap().clone();
            let f = psi.dst().iter().find(|x| x.norm() == 1).unwrap().clone();
            let bad = comp.coeff(&alpha, &f).unwrap().add(&Poly::one(&ring)).unwrap();
            rep.expect_ne("composition perturbation", &bad, &comp.coeff(&alpha, &f).unwrap());
        }
    }
    rep
}

fn check_multiplicativity(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("multiplicativity");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s", "u"]);
        let t = rand_vars(rng, &["t", "v"]);
        let m = rng.gen_range(2..=3);
        let phi = rand_subst(rng, &ring, &s, &t, m);
        let table = CoeffTable::from_subst(&phi);
        let forward = table.check_multiplicativity();
        rep.expect_true(&format!("map {k}: forward criterion"), forward != (perturb && k == 0));
        // backward: reconstruct and compare against apply on random series
        let rebuilt = table.to_subst().unwrap();
        for _ in 0..20 {
            let a = rand_series(rng, &ring, phi.src());
            let via_table = table.linear_apply(&a).unwrap();
            let via_map = rebuilt.apply(&a).unwrap();
            let direct = phi.apply(&a).unwrap();
            rep.expect_eq(&format!("map {k}: table vs rebuilt"), &via_table, &via_map);
            rep.expect_eq(&format!("map {k}: rebuilt vs original"), &direct, &via_map);
        }
        // perturbed negative control per map
        let mut bad = table.clone();
        let e = phi.dst().iter().find(|x| x.norm() == m).unwrap().clone();
        let alpha = phi.src().iter().find(|a| a.norm() == 2).unwrap().clone();
        bad.set(&e, &alpha, bad.get(&e, &alpha).add(&Poly::one(&ring)).unwrap());
        rep.expect_true(
            &format!("map {k}: perturbed table fails"),
            !bad.check_multiplicativity(),
        );
    }
    rep
}

fn check_hs_group(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("hs-group");
    for k in 0..n {
        let ring = rand_ring(rng);
        let vars = rand_vars(rng, &["s", "t"]);
        let m = rng.gen_range(1..=if vars.len() == 2 { 2 } else { 3 });
        let trunc = CoIdeal::tm(&vars, m);
        let d = rand_hs(rng, &ring, &trunc);
        let e = rand_hs(rng, &ring, &trunc);
        let f = rand_hs(rng, &ring, &trunc);
        let tag = format!("instance {k}");
        // associativity and the two-sided inverse
        let assoc_l = d.compose(&e).unwrap().compose(&f).unwrap();
        let assoc_r = d.compose(&e.compose(&f).unwrap()).unwrap();
        rep.expect_eq(&tag, &assoc_l, &assoc_r);
        let id = HSDeriv::identity(&ring, &trunc).unwrap();
        let inv = d.invert();
        rep.expect_eq(&tag, &id, &d.compose(&inv).unwrap());
        rep.expect_eq(&tag, &id, &inv.compose(&d).unwrap());
        // Leibniz and dual Leibniz on pool samples
        let a = rand_poly(rng, &ring);
        let b = rand_poly(rng, &ring);
        for alpha in trunc.iter() {
            let lhs = d.component(alpha, &a.mul(&b).unwrap()).unwrap();
            let mut rhs = Poly::zero(&ring);
            for beta in below(alpha) {
                let gamma = alpha.checked_sub(&beta).unwrap();
                rhs = rhs
                    .add(
                        &d.component(&beta, &a)
                            .unwrap()
                            .mul(&d.component(&gamma, &b).unwrap())
                            .unwrap(),
                    )
                    .unwrap();
            }
            rep.expect_eq(&format!("{tag}: leibniz at {alpha}"), &rhs, &lhs);
            // dual Leibniz: a·D_α(w) = Σ D_β(D*_γ(a)·w)
            let w = rand_poly(rng, &ring);
            let dual_lhs = a.mul(&d.component(alpha, &w).unwrap()).unwrap();
            let mut dual_rhs = Poly::zero(&ring);
            for beta in below(alpha) {
                let gamma = alpha.checked_sub(&beta).unwrap();
                let scaled = inv.component(&gamma, &a).unwrap().mul(&w).unwrap();
                dual_rhs = dual_rhs.add(&d.component(&beta, &scaled).unwrap()).unwrap();
            }
            rep.expect_eq(&format!("{tag}: dual leibniz at {alpha}"), &dual_rhs, &dual_lhs);
            // partition-inverse oracle
            let mut part = hs_inverse_partition(&d, alpha, &a).unwrap();
            if perturb && k == 0 {
                part = part.add(&Poly::one(&ring)).unwrap();
            }
            rep.expect_eq(
                &format!("{tag}: partition inverse at {alpha}"),
                &part,
                &inv.component(alpha, &a).unwrap(),
            );
        }
        // symbol restatement: D*_α − (−1)^{|α|} D_α has order ≤ |α| − 1
        if ring.ngens() == 1 {
            let witnesses = standard_witnesses(&ring, m + 2);
            for alpha in trunc.iter() {
                if alpha.is_zero() || alpha.norm() > 3 {
                    continue;
                }
                let sign = if alpha.norm() % 2 == 0 { 1 } else { -1 };
                let op = FnOperator::new(&ring, |p| {
                    let main = inv.component(alpha, p)?;
                    let corr = d.component(alpha, p)?.scalar_mul(&Scalar::from_i64(ring.field(), sign));
                    main.sub(&corr)
                });
                rep.expect_true(
                    &format!("{tag}: symbol drop at {alpha}"),
                    op_order_at_most(&op, alpha.norm() as i64 - 1, &witnesses).unwrap(),
                );
            }
        }
        if k == 0 && !perturb {
            let alpha = trunc.iter().find(|a| a.norm() == 1).unwrap().clone();
            let x0 = Poly::gen(&ring, 0);
            let bad = hs_inverse_partition(&d, &alpha, &x0)
                .unwrap()
                .add(&Poly::one(&ring))
                .unwrap();
            rep.expect_ne(&tag, &bad, &inv.component(&alpha, &x0).unwrap());
        }
    }
    rep
}

fn check_ell_calculus(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("ell-calculus");
    let big = u32::MAX;
    for k in 0..n {
        let ring = rand_ring(rng);
        let vars = rand_vars(rng, &["s", "t"]);
        let m = rng.gen_range(1..=if vars.len() == 2 { 3 } else { 4 });
        let trunc = CoIdeal::tm(&vars, m);
        let d = rand_hs(rng, &ring, &trunc);
        let e = rand_hs(rng, &ring, &trunc);
        let tag = format!("pair {k}");
        let ld = d.ell().unwrap_or(big);
        let le = e.ell().unwrap_or(big);
        let lcomp = d.compose(&e).unwrap().ell().unwrap_or(big);
        rep.expect_true(&format!("{tag}: subadditivity"), lcomp >= ld.min(le));
        rep.expect_eq(&format!("{tag}: inverse preserves ell"), &ld, &d.invert().ell().unwrap_or(big));
        // strict case: compose with a strictly deeper deviation
        if ld <= m && ld < big {
            // E' := lift(τ_ld(D))^{-1} ∘ D has ℓ > ℓ(D) when nontrivial
            let deeper = d.truncate(&trunc.slice(ld)).unwrap();
            let lifted_images = deeper
                .images()
                .iter()
                .map(|im| im.include_into(&trunc).unwrap())
                .collect();
            let lifted = HSDeriv::from_images(&ring, &trunc, lifted_images).unwrap();
            let shifted = lifted.invert().compose(&d).unwrap();
            let ls = shifted.ell().unwrap_or(big);
            if ls > ld {
                let combined = d.compose(&shifted).unwrap().ell().unwrap_or(big);
                let mut expected = ld;
                if perturb && k == 0 {
                    expected += 1;
                }
                rep.expect_eq(&format!("{tag}: strict case"), &expected, &combined);
            }
        }
        // commutator bound
        let lbracket = d.commutator(&e).unwrap().ell().unwrap_or(big);
        let bound = ld.saturating_add(le);
        rep.expect_true(&format!("{tag}: commutator bound"), lbracket >= bound);
    }
    // derived nilpotency at m = 3: 4-fold iterated commutators vanish
    let ring = PolyRing::rational(["x"]).unwrap();
    let vars = VarSet::new(["s"]).unwrap();
    let trunc = CoIdeal::tm(&vars, 3);
    let id = HSDeriv::identity(&ring, &trunc).unwrap();
    for k in 0..5usize {
        let d1 = rand_hs(rng, &ring, &trunc);
        let d2 = rand_hs(rng, &ring, &trunc);
        let d3 = rand_hs(rng, &ring, &trunc);
        let d4 = rand_hs(rng, &ring, &trunc);
        let word = d1
            .commutator(&d2)
            .unwrap()
            .commutator(&d3)
            .unwrap()
            .commutator(&d4)
            .unwrap();
        rep.expect_eq(&format!("nilpotency word {k}"), &id, &word);
    }
    rep
}

fn check_phi_upper_d(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("phi-upper-d");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s"]);
        let t = rand_vars(rng, &["t", "v"]);
        let u = rand_vars(rng, &["u"]);
        let m = rng.gen_range(1..=if t.len() == 2 { 2 } else { 3 });
        let phi = rand_subst(rng, &ring, &s, &t, m);
        let d = rand_hs(rng, &ring, phi.src());
        let e = rand_hs(rng, &ring, phi.src());
        let tag = format!("instance {k}");
        let twisted = phi_upper_d(&phi, &d).unwrap();
        let acted = act(&phi, &d).unwrap();
        // defining identity on a random series
        let sample = rand_series(rng, &ring, phi.src());
        let lhs = acted.tilde_apply(&twisted.apply(&sample).unwrap()).unwrap();
        let mut rhs = phi.apply(&d.tilde_apply(&sample).unwrap()).unwrap();
        if perturb && k == 0 {
            rhs = rhs.add(&Series::one(&ring, phi.dst()).unwrap()).unwrap();
        }
        rep.expect_eq(&format!("{tag}: defining identity"), &rhs, &lhs);
        // (φ•D)* = φ^D • D*
        rep.expect_eq(
            &format!("{tag}: inverse action"),
            &acted.invert(),
            &act(&twisted, &d.invert()).unwrap(),
        );
        // φ•(D∘E) = (φ•D) ∘ (φ^D•E)
        rep.expect_eq(
            &format!("{tag}: product action"),
            &act(&phi, &d.compose(&e).unwrap()).unwrap(),
            &acted.compose(&act(&twisted, &e).unwrap()).unwrap(),
        );
        // (φ^D)^{D*} = φ
        rep.expect_eq(
            &format!("{tag}: involution"),
            &phi,
            &phi_upper_d(&twisted, &d.invert()).unwrap(),
        );
        // (φ∘ψ)^D = φ^{ψ•D} ∘ ψ^D for a composable ψ
        let psi = rand_subst(rng, &ring, &t, &u, m);
        let lhs = phi_upper_d(&SubstMap::compose(&psi, &phi).unwrap(), &d).unwrap();
        let rhs = SubstMap::compose(
            &phi_upper_d(&psi, &act(&phi, &d).unwrap()).unwrap(),
            &phi_upper_d(&phi, &d).unwrap(),
        )
        .unwrap();
        rep.expect_eq(&format!("{tag}: composition cocycle"), &lhs, &rhs);
        // constant-coefficient fixed point
        let cphi = rand_const_subst(rng, &ring, &s, &t, m);
        rep.expect_eq(
            &format!("{tag}: constant coefficients"),
            &cphi,
            &phi_upper_d(&cphi, &d).unwrap(),
        );
        // φ^𝕀 = φ
        let id = HSDeriv::identity(&ring, phi.src()).unwrap();
        rep.expect_eq(&format!("{tag}: identity twist"), &phi, &phi_upper_d(&phi, &id).unwrap());
        // truncation compatibility
        if m >= 2 {
            rep.expect_eq(
                &format!("{tag}: truncation"),
                &twisted.truncate(m - 1),
                &phi_upper_d(&phi.truncate(m - 1), &d.truncate(&d.trunc().slice(m - 1)).unwrap())
                    .unwrap(),
            );
        }
        // recursion vs definition on all in-range pairs
        for nu in phi.src().iter() {
            for e_idx in phi.dst().iter() {
                if nu.norm() > e_idx.norm() {
                    continue;
                }
                let direct = twisted.coeff(nu, e_idx).unwrap();
                let recursive = phi_d_recursive_coeff(&phi, &d, nu, e_idx).unwrap();
                rep.expect_eq(&format!("{tag}: recursion at ({nu},{e_idx})"), &recursive, &direct);
            }
        }
        if k == 0 && !perturb {
            let bad = twisted
                .image(0)
                .add(&Series::monomial(
                    &ring,
                    phi.dst(),
                    phi.dst().iter().find(|x| x.norm() == 1).unwrap(),
                    Poly::one(&ring),
                ).unwrap())
                .unwrap();
            rep.expect_ne(&tag, &bad, twisted.image(0));
        }
    }
    rep
}

fn check_inverse_action_corollary(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("inverse-action-corollary");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s"]);
        let t = rand_vars(rng, &["t"]);
        let m = rng.gen_range(1..=3);
        let phi = rand_subst(rng, &ring, &s, &t, m);
        let d = rand_hs(rng, &ring, phi.src());
        let twisted = phi_upper_d(&phi, &d).unwrap();
        let inv_acted = act(&phi, &d).unwrap().invert();
        let d_star = d.invert();
        let w = rand_poly(rng, &ring);
        for e in phi.dst().iter() {
            let mut lhs = inv_acted.component(e, &w).unwrap();
            if perturb && k == 0 && e.norm() == 1 {
                lhs = lhs.add(&Poly::one(&ring)).unwrap();
            }
            // Σ_{|μ+ν|≤|e|} D*_μ ( D_ν(C_e(φ^D, μ+ν)) · w )
            let mut rhs = Poly::zero(&ring);
            for mu in phi.src().iter() {
                for nu in phi.src().iter() {
                    let sum = mu.add(nu).unwrap();
                    if sum.norm() > e.norm() || !phi.src().contains(&sum) {
                        continue;
                    }
                    let c = twisted.coeff(&sum, e).unwrap();
                    if c.is_zero() {
                        continue;
                    }
                    let scaled = d.component(nu, &c).unwrap().mul(&w).unwrap();
                    rhs = rhs.add(&d_star.component(mu, &scaled).unwrap()).unwrap();
                }
            }
            rep.expect_eq(&format!("instance {k}: at {e}"), &rhs, &lhs);
        }
    }
    rep
}

fn check_act_component_law(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("act-component-law");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s", "u"]);
        let t = rand_vars(rng, &["t", "v"]);
        let m = rng.gen_range(1..=if s.len().max(t.len()) == 2 { 2 } else { 3 });
        let phi = rand_subst(rng, &ring, &s, &t, m);
        let d = rand_hs(rng, &ring, phi.src());
        let acted = act(&phi, &d).unwrap();
        let w = rand_poly(rng, &ring);
        for e in phi.dst().iter() {
            if e.is_zero() {
                continue;
            }
            let mut lhs = acted.component(e, &w).unwrap();
            if perturb && k == 0 && e.norm() == 1 {
                lhs = lhs.add(&Poly::one(&ring)).unwrap();
            }
            let mut rhs = Poly::zero(&ring);
            for alpha in phi.src().iter() {
                if alpha.norm() > e.norm() || alpha.is_zero() {
                    continue;
                }
                rhs = rhs
                    .add(
                        &phi.coeff(alpha, e)
                            .unwrap()
                            .mul(&d.component(alpha, &w).unwrap())
                            .unwrap(),
                    )
                    .unwrap();
            }
            rep.expect_eq(&format!("instance {k}: at {e}"), &rhs, &lhs);
        }
        // τ-compatibility
        if m >= 2 {
            let lhs = acted.truncate(&acted.trunc().slice(m - 1)).unwrap();
            let rhs = act(
                &phi.truncate(m - 1),
                &d.truncate(&d.trunc().slice(m - 1)).unwrap(),
            )
            .unwrap();
            rep.expect_eq(&format!("instance {k}: truncation"), &rhs, &lhs);
        }
        // the trivial action
        let triv = SubstMap::trivial(&ring, phi.src(), phi.dst()).unwrap();
        rep.expect_true(&format!("instance {k}: trivial"), act(&triv, &d).unwrap().is_identity());
    }
    rep
}

fn check_d_of_phi(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("d-of-phi");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s"]);
        let t = rand_vars(rng, &["t"]);
        let m = rng.gen_range(1..=3);
        let phi = rand_subst(rng, &ring, &s, &t, m);
        let d = rand_hs(rng, &ring, phi.dst());
        let tag = format!("instance {k}");
        let dphi = d_of_phi(&d, &phi).unwrap();
        // factorization: D̃ ∘ φ = (D(φ) ⊗ π) ∘ (κ•D)~ ∘ ι on random series
        let iota = SubstMap::combinatorial(
            &ring,
            phi.src(),
            &phi.src().product(phi.dst()).unwrap(),
            &(0..s.len()).collect::<Vec<_>>(),
        )
        .unwrap();
        let kappa = SubstMap::combinatorial(
            &ring,
            phi.dst(),
            iota.dst(),
            &(0..t.len()).map(|j| s.len() + j).collect::<Vec<_>>(),
        )
        .unwrap();
        let kd = act(&kappa, &d).unwrap();
        let empty = CoIdeal::tm(&VarSet::empty(), 0);
        let pi = SubstMap::trivial(&ring, phi.dst(), &empty).unwrap();
        let tensor = dphi.tensor(&pi).unwrap();
        let sample = rand_series(rng, &ring, phi.src());
        let mut lhs = d.tilde_apply(&phi.apply(&sample).unwrap()).unwrap();
        if perturb && k == 0 {
            lhs = lhs.add(&Series::one(&ring, phi.dst()).unwrap()).unwrap();
        }
        let rhs = tensor
            .apply(&kd.tilde_apply(&iota.apply(&sample).unwrap()).unwrap())
            .unwrap();
        // the tensor target is (t ⊔ ∅, Δ × {0}) ≅ (t, Δ)
        let rhs = rhs.embed_into(phi.dst()).unwrap();
        rep.expect_eq(&format!("{tag}: factorization"), &lhs, &rhs);
        // remark: φ^D = (φ•D)*(φ) for D on the source side
        let d_src = rand_hs(rng, &ring, phi.src());
        let lhs = phi_upper_d(&phi, &d_src).unwrap();
        let rhs = d_of_phi(&act(&phi, &d_src).unwrap().invert(), &phi).unwrap();
        rep.expect_eq(&format!("{tag}: remark"), &lhs, &rhs);
        // 𝕀(φ) = φ and D(𝟎) = 𝟎
        let id = HSDeriv::identity(&ring, phi.dst()).unwrap();
        rep.expect_eq(&format!("{tag}: identity"), &phi, &d_of_phi(&id, &phi).unwrap());
        let triv = SubstMap::trivial(&ring, phi.src(), phi.dst()).unwrap();
        rep.expect_true(&format!("{tag}: trivial"), d_of_phi(&d, &triv).unwrap().is_trivial());
    }
    rep
}

fn check_generation(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("generation");
    let rings = [
        PolyRing::rational(["x", "y"]).unwrap(),
        PolyRing::new(FieldKind::Gf(5), ["x"]).unwrap(),
    ];
    for k in 0..n {
        let ring = rings[rng.gen_range(0..rings.len())].clone();
        let m = rng.gen_range(1..=if ring.ngens() == 2 { 2 } else { 3 });
        let d = canonical_hs(&ring, m).unwrap();
        let t = rand_vars(rng, &["t", "v"]);
        let dst = CoIdeal::tm(&t, m);
        let g = rand_hs(rng, &ring, &dst);
        let tag = format!("instance {k}");
        let phi = generate_subst(&GenerationProblem::new(d.clone(), g.clone())).unwrap();
        let mut acted = act(&phi, &d).unwrap();
        if perturb && k == 0 {
            acted = acted.invert();
            if acted == g {
                // an involutive target: force a mismatch differently
                acted = act(&SubstMap::trivial(&ring, d.trunc(), &dst).unwrap(), &d).unwrap();
            }
        }
        rep.expect_eq(&format!("{tag}: round trip"), &g, &acted);
        rep.expect_true(
            &format!("{tag}: regeneration fixed point"),
            verify_uniqueness(&d, &phi, &phi).unwrap(),
        );
        rep.expect_true(&format!("{tag}: top action law"), top_action_law(&phi, &d).unwrap());
    }
    // integration round trips
    for k in 0..3usize {
        let ring = rings[rng.gen_range(0..rings.len())].clone();
        let vars = rand_vars(rng, &["s"]);
        let n0 = rng.gen_range(1..=2);
        let m = n0 + rng.gen_range(1..=2);
        let trunc = CoIdeal::tm(&vars, n0);
        let e = rand_hs(rng, &ring, &trunc);
        let lifted = crate::generate::integrate(&e, m).unwrap();
        rep.expect_eq(
            &format!("integration {k}"),
            &e,
            &lifted.truncate(&lifted.trunc().slice(n0)).unwrap(),
        );
    }
    rep
}

fn check_iterativity(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("iterativity");
    for k in 0..n {
        let ring = rand_ring(rng);
        let m = rng.gen_range(1..=if ring.ngens() == 2 { 3 } else { 4 });
        let d = canonical_hs(&ring, m).unwrap();
        let mut expected = true;
        if perturb && k == 0 {
            expected = false;
        }
        rep.expect_eq(&format!("canonical {k}"), &expected, &is_iterative(&d).unwrap());
    }
    // a hand-built non-iterative example fails
    let ring = PolyRing::rational(["x"]).unwrap();
    let vars = VarSet::new(["s"]).unwrap();
    let trunc = CoIdeal::tm(&vars, 2);
    let img = Series::constant(&ring, &trunc, Poly::gen(&ring, 0))
        .unwrap()
        .add(&Series::monomial(&ring, &trunc, &MultiIndex::unit(&vars, 0), Poly::one(&ring)).unwrap())
        .unwrap()
        .add(
            &Series::monomial(
                &ring,
                &trunc,
                &MultiIndex::from_exps(&vars, &[(0, 2)]).unwrap(),
                Poly::one(&ring),
            )
            .unwrap(),
        )
        .unwrap();
    let bad = HSDeriv::from_images(&ring, &trunc, vec![img]).unwrap();
    rep.expect_true("non-iterative example fails", !is_iterative(&bad).unwrap());
    rep
}

fn check_phi_linearity(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("phi-linearity");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s", "u"]);
        let t = rand_vars(rng, &["t", "v"]);
        let m = rng.gen_range(1..=3);
        let phi = rand_subst(rng, &ring, &s, &t, m);
        let a = rand_series(rng, &ring, phi.src());
        let r = rand_series(rng, &ring, phi.src());
        let mut lhs = phi.apply(&a.mul(&r).unwrap()).unwrap();
        if perturb && k == 0 {
            lhs = lhs.add(&Series::one(&ring, phi.dst()).unwrap()).unwrap();
        }
        let rhs = phi.apply(&a).unwrap().mul(&phi.apply(&r).unwrap()).unwrap();
        rep.expect_eq(&format!("instance {k}: multiplicative"), &rhs, &lhs);
        // unital and augmentation-compatible
        rep.expect_eq(
            &format!("instance {k}: unital"),
            &Series::one(&ring, phi.dst()).unwrap(),
            &phi.apply(&Series::one(&ring, phi.src()).unwrap()).unwrap(),
        );
        rep.expect_eq(
            &format!("instance {k}: augmentation"),
            &r.constant_term(),
            &phi.apply(&r).unwrap().constant_term(),
        );
        // A-linearity on coefficients
        let c = rand_poly(rng, &ring);
        rep.expect_eq(
            &format!("instance {k}: A-linear"),
            &phi.apply(&r.poly_mul(&c).unwrap()).unwrap(),
            &phi.apply(&r).unwrap().poly_mul(&c).unwrap(),
        );
    }
    rep
}

fn check_const_coeff_commutation(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("const-coeff-commutation");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s"]);
        let t = rand_vars(rng, &["t", "v"]);
        let m = rng.gen_range(1..=2);
        let phi = rand_const_subst(rng, &ring, &s, &t, m);
        let d = rand_hs(rng, &ring, phi.src());
        let e = rand_series(rng, &ring, phi.src());
        // ⟨φ•D, φ(e)⟩ = φ(⟨D, e⟩) with ⟨r, e⟩ = r̃(e)
        let mut lhs = act(&phi, &d)
            .unwrap()
            .tilde_apply(&phi.apply(&e).unwrap())
            .unwrap();
        if perturb && k == 0 {
            lhs = lhs.add(&Series::one(&ring, phi.dst()).unwrap()).unwrap();
        }
        let rhs = phi.apply(&d.tilde_apply(&e).unwrap()).unwrap();
        rep.expect_eq(&format!("instance {k}"), &rhs, &lhs);
        // with constant coefficients the action respects products
        let d2 = rand_hs(rng, &ring, phi.src());
        rep.expect_eq(
            &format!("instance {k}: product action"),
            &act(&phi, &d.compose(&d2).unwrap()).unwrap(),
            &act(&phi, &d).unwrap().compose(&act(&phi, &d2).unwrap()).unwrap(),
        );
    }
    rep
}

fn check_external_interplay(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("external-interplay");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = VarSet::new(["s"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let u = VarSet::new(["u"]).unwrap();
        let m = rng.gen_range(1..=3);
        let nabla = CoIdeal::tm(&s, m);
        let delta = CoIdeal::tm(&t, m);
        let r = rand_series(rng, &ring, &nabla);
        let rp = rand_series(rng, &ring, &delta);
        let tag = format!("instance {k}");
        // product through the co-diagonal: r r' = Σ • (r ⊠ r'')
        // with both factors over the same variables
        let r2 = rand_series(rng, &ring, &nabla);
        let boxed = r.external_product(&r2.embed_into(&CoIdeal::tm(&t, m)).ok().unwrap_or_else(|| {
            // relabel r2 onto t-variables by position
            let coeffs = r2
                .coeffs()
                .map(|(a, c)| {
                    let pairs: Vec<(usize, u32)> = a.exps().collect();
                    (MultiIndex::from_exps(&t, &pairs).unwrap(), c.clone())
                })
                .collect();
            Series::from_coeffs(&ring, &delta, coeffs).unwrap()
        }));
        let boxed = boxed.unwrap();
        let codiag = SubstMap::combinatorial(
            &ring,
            boxed.trunc(),
            &nabla,
            &vec![0; 2],
        )
        .unwrap();
        let mut lhs = r.mul(&r2).unwrap();
        if perturb && k == 0 {
            lhs = lhs.add(&Series::one(&ring, &nabla).unwrap()).unwrap();
        }
        rep.expect_eq(&format!("{tag}: co-diagonal product"), &codiag.apply(&boxed).unwrap(), &lhs);
        // (φ•r) ⊠ r' = (φ⊗Id)•(r ⊠ r')
        let phi = rand_subst(rng, &ring, &s, &u, m);
        let ident = SubstMap::identity(&ring, &delta).unwrap();
        let lhs2 = phi.apply(&r).unwrap().external_product(&rp).unwrap();
        let rhs2 = phi
            .tensor(&ident)
            .unwrap()
            .apply(&r.external_product(&rp).unwrap())
            .unwrap();
        rep.expect_eq(&format!("{tag}: tensor action"), &lhs2, &rhs2);
        // truncation compatibility
        if m >= 2 {
            let boxed_rt = r.external_product(&rp).unwrap();
            let product_small = CoIdeal::tm(&s, m - 1)
                .product(&CoIdeal::tm(&t, m - 1))
                .unwrap();
            let lhs3 = boxed_rt.truncate(&product_small).unwrap();
            let rhs3 = r
                .truncate(&nabla.slice(m - 1))
                .unwrap()
                .external_product(&rp.truncate(&delta.slice(m - 1)).unwrap())
                .unwrap();
            rep.expect_eq(&format!("{tag}: truncation"), &rhs3, &lhs3);
        }
        // unit inversion across ⊠ (coefficients commute, so both orders)
        let ru = rand_unit(rng, &ring, &nabla);
        let rpu = rand_unit(rng, &ring, &delta);
        let boxed_u = ru.external_product(&rpu).unwrap();
        let inv_boxed = boxed_u.invert_recursive().unwrap();
        let paired = ru
            .invert_recursive()
            .unwrap()
            .external_product(&rpu.invert_recursive().unwrap())
            .unwrap();
        rep.expect_eq(&format!("{tag}: inverse across external"), &paired, &inv_boxed);
        // the swapped form (r ⊠ r')* = r'* ⊠ r*, compared after relabeling
        let swapped = rpu
            .invert_recursive()
            .unwrap()
            .external_product(&ru.invert_recursive().unwrap())
            .unwrap();
        let mut ok = true;
        for (alpha, c) in swapped.coeffs() {
            let relabeled = alpha.embed_into(boxed_u.vars()).unwrap();
            if inv_boxed.coeff(&relabeled) != *c {
                ok = false;
            }
        }
        rep.expect_true(&format!("{tag}: swapped inverse"), ok);
    }
    rep
}

fn check_hs_external(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("hs-external");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = VarSet::new(["s"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let m = rng.gen_range(1..=2);
        let d = rand_hs(rng, &ring, &CoIdeal::tm(&s, m));
        let e = rand_hs(rng, &ring, &CoIdeal::tm(&t, m));
        let ext = d.external(&e).unwrap();
        let w = rand_poly(rng, &ring);
        let tag = format!("instance {k}");
        for alpha in d.trunc().iter() {
            for beta in e.trunc().iter() {
                let pairs: Vec<(usize, u32)> = alpha
                    .exps()
                    .chain(beta.exps().map(|(p, v)| (1 + p, v)))
                    .collect();
                let pair = MultiIndex::from_exps(ext.vars(), &pairs).unwrap();
                if !ext.trunc().contains(&pair) {
                    continue;
                }
                let mut lhs = ext.component(&pair, &w).unwrap();
                if perturb && k == 0 && pair.norm() == 1 {
                    lhs = lhs.add(&Poly::one(&ring)).unwrap();
                }
                let rhs = d.component(alpha, &e.component(beta, &w).unwrap()).unwrap();
                rep.expect_eq(&format!("{tag}: at ({alpha},{beta})"), &rhs, &lhs);
            }
        }
        let ids = HSDeriv::identity(&ring, d.trunc()).unwrap();
        let idt = HSDeriv::identity(&ring, e.trunc()).unwrap();
        rep.expect_true(&format!("{tag}: identity"), ids.external(&idt).unwrap().is_identity());
    }
    rep
}

fn check_subst_add(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("subst-add");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s", "u"]);
        let t = rand_vars(rng, &["t", "v"]);
        let w = rand_vars(rng, &["w"]);
        let m = rng.gen_range(1..=3);
        let phi1 = rand_subst(rng, &ring, &s, &t, m);
        let phi2 = rand_subst(rng, &ring, &s, &t, m);
        let psi = rand_subst(rng, &ring, &t, &w, m);
        let tag = format!("instance {k}");
        // ψ∘(φ+φ') = ψ∘φ + ψ∘φ'
        let mut lhs = SubstMap::compose(&psi, &phi1.add(&phi2).unwrap()).unwrap();
        if perturb && k == 0 {
            let bump = SubstMap::combinatorial(&ring, lhs.src(), lhs.dst(), &vec![0; s.len()])
                .unwrap();
            lhs = lhs.add(&bump).unwrap();
        }
        let rhs = SubstMap::compose(&psi, &phi1)
            .unwrap()
            .add(&SubstMap::compose(&psi, &phi2).unwrap())
            .unwrap();
        rep.expect_eq(&format!("{tag}: distribution"), &rhs, &lhs);
        // abelian group basics
        let triv = SubstMap::trivial(&ring, phi1.src(), phi1.dst()).unwrap();
        rep.expect_eq(&format!("{tag}: zero"), &phi1, &phi1.add(&triv).unwrap());
        rep.expect_eq(&format!("{tag}: commutative"), &phi1.add(&phi2).unwrap(), &phi2.add(&phi1).unwrap());
    }
    rep
}

fn check_power_maps(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("power-maps");
    for k in 0..n {
        let ring = rand_ring(rng);
        let s = rand_vars(rng, &["s", "t"]);
        let m = rng.gen_range(1..=2);
        let src = CoIdeal::tm(&s, m);
        let nu: Vec<u32> = (0..s.len()).map(|_| rng.gen_range(1..=3)).collect();
        let nu2: Vec<u32> = (0..s.len()).map(|_| rng.gen_range(1..=2)).collect();
        let inner = SubstMap::power_map(&ring, &nu2, &src).unwrap();
        let outer = SubstMap::power_map(&ring, &nu, inner.dst()).unwrap();
        let composed = SubstMap::compose(&outer, &inner).unwrap();
        let product: Vec<u32> = nu.iter().zip(&nu2).map(|(a, b)| a * b).collect();
        let mut direct = SubstMap::power_map(&ring, &product, &src).unwrap();
        if perturb && k == 0 {
            let bump: Vec<u32> = product.iter().map(|v| v + 1).collect();
            direct = SubstMap::power_map(&ring, &bump, &src).unwrap();
        }
        rep.expect_eq(&format!("instance {k}"), &direct, &composed);
    }
    rep
}

fn check_derivation_solve(rng: &mut ChaCha8Rng, n: usize, perturb: bool) -> CheckReport {
    let mut rep = CheckReport::new("derivation-solve");
    for k in 0..n {
        let ring = rand_ring(rng);
        let ngen = ring.ngens();
        // a unit-determinant basis: coordinate partials plus a shear
        let mut basis = Vec::with_capacity(ngen);
        for i in 0..ngen {
            let mut images = vec![Poly::zero(&ring); ngen];
            images[i] = Poly::one(&ring);
            if i + 1 < ngen {
                images[i + 1] = rand_poly(rng, &ring);
            }
            basis.push(Derivation::new(&ring, images).unwrap());
        }
        let coords: Vec<Poly> = (0..ngen).map(|_| rand_poly(rng, &ring)).collect();
        let mut delta_imgs = vec![Poly::zero(&ring); ngen];
        for (j, c) in coords.iter().enumerate() {
            for i in 0..ngen {
                delta_imgs[i] = delta_imgs[i]
                    .add(&c.mul(&basis[j].images()[i]).unwrap())
                    .unwrap();
            }
        }
        let delta = Derivation::new(&ring, delta_imgs).unwrap();
        let mut got = solve_in_derivation_basis(&delta, &basis).unwrap();
        if perturb && k == 0 {
            got[0] = got[0].add(&Poly::one(&ring)).unwrap();
        }
        rep.expect_eq(&format!("instance {k}"), &coords, &got);
        // Leibniz for derivation_apply
        let a = rand_poly(rng, &ring);
        let b = rand_poly(rng, &ring);
        let lhs = delta.apply(&a.mul(&b).unwrap()).unwrap();
        let rhs = delta
            .apply(&a)
            .unwrap()
            .mul(&b)
            .unwrap()
            .add(&a.mul(&delta.apply(&b).unwrap()).unwrap())
            .unwrap();
        rep.expect_eq(&format!("instance {k}: leibniz"), &rhs, &lhs);
        // characteristic p: (a+b)^p = a^p + b^p
        if let FieldKind::Gf(p) = *ring.field() {
            let lhs = a.add(&b).unwrap().pow(p as u32);
            let rhs = a.pow(p as u32).add(&b.pow(p as u32)).unwrap();
            rep.expect_eq(&format!("instance {k}: frobenius"), &rhs, &lhs);
        }
    }
    rep
}

/// The registry of named checks with their default instance counts.
fn registry() -> Vec<(&'static str, usize, CheckFn)> {
    vec![
        ("act-component-law", 10, check_act_component_law),
        ("coeff-formula", 40, check_coeff_formula),
        ("composition-law", 15, check_composition_law),
        ("const-coeff-commutation", 10, check_const_coeff_commutation),
        ("d-of-phi", 8, check_d_of_phi),
        ("derivation-solve", 20, check_derivation_solve),
        ("ell-calculus", 25, check_ell_calculus),
        ("external-interplay", 10, check_external_interplay),
        ("generation", 8, check_generation),
        ("hs-external", 6, check_hs_external),
        ("hs-group", 8, check_hs_group),
        ("inverse-action-corollary", 6, check_inverse_action_corollary),
        ("iterativity", 4, check_iterativity),
        ("multiplicativity", 8, check_multiplicativity),
        ("phi-linearity", 15, check_phi_linearity),
        ("phi-upper-d", 6, check_phi_upper_d),
        ("power-maps", 10, check_power_maps),
        ("subst-add", 10, check_subst_add),
        ("unit-inverse", 40, check_unit_inverse),
    ]
}

/// The default check names and instance counts.
pub fn default_sizes() -> Vec<(String, usize)> {
    registry().into_iter().map(|(n, c, _)| (n.to_string(), c)).collect()
}

fn fnv(name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Run the named checks with the given instance counts. Deterministic for a
/// fixed seed: every check draws from its own stream derived from the seed
/// and the check name. An empty size list yields an empty report.
pub fn run_suite(seed: u64, sizes: &[(String, usize)]) -> Vec<CheckReport> {
    run_suite_mode(seed, sizes, false)
}

/// As [`run_suite`]; with `perturb` set, each check corrupts one comparison
/// so that the suite must fail — the harness-level negative control.
pub fn run_suite_mode(seed: u64, sizes: &[(String, usize)], perturb: bool) -> Vec<CheckReport> {
    let reg = registry();
    let mut reports = Vec::new();
    for (name, count) in sizes {
        match reg.iter().find(|(n, _, _)| n == name) {
            Some((n, _, f)) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(n));
                reports.push(f(&mut rng, *count, perturb));
            }
            None => {
                let mut rep = CheckReport::new(name);
                rep.fail(name, &Error::Precondition(format!("unknown check `{name}`")));
                reports.push(rep);
            }
        }
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_c_base_cases() {
        let ring = PolyRing::rational(["x"]).unwrap();
        let s = VarSet::new(["s"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let src = CoIdeal::tm(&s, 2);
        let dst = CoIdeal::tm(&t, 2);
        let img = Series::from_coeffs(
            &ring,
            &dst,
            vec![
                (MultiIndex::unit(&t, 0), Poly::gen(&ring, 0)),
                (MultiIndex::from_exps(&t, &[(0, 2)]).unwrap(), Poly::from_i64(&ring, 2)),
            ],
        )
        .unwrap();
        let phi = SubstMap::new(&ring, &src, &dst, vec![img.clone()]).unwrap();
        // |alpha| = 1 reads the image coefficient
        for e in dst.iter() {
            if e.is_zero() {
                continue;
            }
            assert_eq!(
                direct_c(&phi, &MultiIndex::unit(&s, 0), e).unwrap(),
                img.coeff(e)
            );
        }
        // alpha = e = 0 gives 1
        assert_eq!(
            direct_c(&phi, &MultiIndex::zero(&s), &MultiIndex::zero(&t)).unwrap(),
            Poly::one(&ring)
        );
    }

    #[test]
    fn hs_inverse_partition_base_cases() {
        let ring = PolyRing::rational(["x"]).unwrap();
        let s = VarSet::new(["s"]).unwrap();
        let trunc = CoIdeal::tm(&s, 2);
        let x = Poly::gen(&ring, 0);
        let img = Series::constant(&ring, &trunc, x.clone())
            .unwrap()
            .add(&Series::monomial(&ring, &trunc, &MultiIndex::unit(&s, 0), x.pow(2)).unwrap())
            .unwrap();
        let d = HSDeriv::from_images(&ring, &trunc, vec![img]).unwrap();
        let a = x.pow(2);
        // |alpha| = 1: single d = 1 term −D_α(a)
        let alpha = MultiIndex::unit(&s, 0);
        assert_eq!(
            hs_inverse_partition(&d, &alpha, &a).unwrap(),
            d.component(&alpha, &a).unwrap().neg()
        );
        // alpha = 0 is the identity
        assert_eq!(
            hs_inverse_partition(&d, &MultiIndex::zero(&s), &a).unwrap(),
            a
        );
        // agreement with the recursive inverse at norm 2
        let s2 = MultiIndex::from_exps(&s, &[(0, 2)]).unwrap();
        assert_eq!(
            hs_inverse_partition(&d, &s2, &a).unwrap(),
            d.invert().component(&s2, &a).unwrap()
        );
    }

    #[test]
    fn recursive_coeff_with_identity_is_plain_coeff() {
        let ring = PolyRing::rational(["x"]).unwrap();
        let s = VarSet::new(["s"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let src = CoIdeal::tm(&s, 2);
        let dst = CoIdeal::tm(&t, 2);
        let img = Series::from_coeffs(
            &ring,
            &dst,
            vec![
                (MultiIndex::unit(&t, 0), Poly::gen(&ring, 0)),
                (MultiIndex::from_exps(&t, &[(0, 2)]).unwrap(), Poly::one(&ring)),
            ],
        )
        .unwrap();
        let phi = SubstMap::new(&ring, &src, &dst, vec![img]).unwrap();
        let id = HSDeriv::identity(&ring, &src).unwrap();
        for nu in src.iter() {
            for e in dst.iter() {
                if nu.norm() > e.norm() {
                    continue;
                }
                assert_eq!(
                    phi_d_recursive_coeff(&phi, &id, nu, e).unwrap(),
                    phi.coeff(nu, e).unwrap()
                );
            }
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let sizes: Vec<(String, usize)> =
            vec![("unit-inverse".into(), 5), ("coeff-formula".into(), 3)];
        let a = run_suite(7, &sizes);
        let b = run_suite(7, &sizes);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.instances, y.instances);
            assert_eq!(x.failures.len(), y.failures.len());
        }
        // reports are ordered by name
        assert!(a.windows(2).all(|w| w[0].name <= w[1].name));
    }

    #[test]
    fn empty_sizes_empty_report() {
        assert!(run_suite(0, &[]).is_empty());
    }

    #[test]
    fn perturbation_mode_fails() {
        let sizes: Vec<(String, usize)> = vec![("unit-inverse".into(), 3)];
        let reports = run_suite_mode(0, &sizes, true);
        assert!(reports.iter().any(|r| !r.passed()));
    }

    #[test]
    fn default_suite_passes_smoke() {
        // tiny instance counts across every check
        let sizes: Vec<(String, usize)> =
            default_sizes().into_iter().map(|(n, _)| (n, 2)).collect();
        let reports = run_suite(0, &sizes);
        for r in &reports {
            assert!(r.passed(), "{}: {:?}", r.name, r.failures.first());
        }
    }

    #[test]
    fn unknown_check_is_reported() {
        let sizes: Vec<(String, usize)> = vec![("no-such-check".into(), 1)];
        let reports = run_suite(0, &sizes);
        assert_eq!(reports.len(), 1);
        assert!(!reports[0].passed());
    }
}
