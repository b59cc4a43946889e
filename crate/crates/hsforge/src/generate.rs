//! Expressing HS-derivations through a fixed one: splitting a substitution
//! map into its top and lower parts, the inductive generation algorithm
//! producing `φ` with `G = φ•D`, uniqueness in the basis case, the
//! canonical Taylor derivation, and `m`-integration of truncated
//! derivations.
//!
//! Everything here works over full truncations `t_m`: the generation
//! algorithm lifts a stage-`(m−1)` solution by zero extension, composes
//! away the known part, reads the fresh norm-`m` components as classical
//! derivations, and solves their coordinates in the degree-one components
//! of `D`.

use crate::algebra::{solve_in_derivation_basis, Derivation, Poly, PolyRing};
use crate::hsderiv::{act, HSDeriv};
use crate::multiindex::{CoIdeal, MultiIndex, VarSet};
use crate::series::Series;
use crate::substitution::SubstMap;
use crate::{Error, Result};

/// Split a substitution map on `t_m` universes into its norm-`m` part and
/// its lower part, with `φ = φ_m + φ_{<m}`.
pub fn split_top(phi: &SubstMap, m: u32) -> Result<(SubstMap, SubstMap)> {
    let tm_src = CoIdeal::tm(phi.src_vars(), m);
    let tm_dst = CoIdeal::tm(phi.dst_vars(), m);
    if *phi.src() != tm_src || *phi.dst() != tm_dst {
        return Err(Error::ShapeMismatch(format!(
            "split_top expects full t_{m} truncations on both sides"
        )));
    }
    let mut top = Vec::with_capacity(phi.images().len());
    let mut low = Vec::with_capacity(phi.images().len());
    for im in phi.images() {
        let (t, l): (Vec<_>, Vec<_>) = im
            .coeffs()
            .map(|(a, c)| (a.clone(), c.clone()))
            .partition(|(a, _)| a.norm() == m);
        top.push(Series::from_coeffs(phi.ring(), phi.dst(), t)?);
        low.push(Series::from_coeffs(phi.ring(), phi.dst(), l)?);
    }
    let phi_m = SubstMap::new(phi.ring(), phi.src(), phi.dst(), top)?;
    let phi_low = SubstMap::new(phi.ring(), phi.src(), phi.dst(), low)?;
    Ok((phi_m, phi_low))
}

/// Build the HS-derivation whose only nonzero components above the identity
/// sit at norm `m` and are the combinations `Σ_t c^t_e D_{s^t}` read from
/// the top part of `phi`.
fn top_combination(phi: &SubstMap, d: &HSDeriv, m: u32) -> Result<HSDeriv> {
    let ring = phi.ring();
    let basis = d.degree_one_derivations()?;
    let mut images = Vec::with_capacity(ring.ngens());
    for i in 0..ring.ngens() {
        let mut coeffs = vec![(
            MultiIndex::zero(phi.dst_vars()),
            Poly::gen(ring, i),
        )];
        for e in phi.dst().iter() {
            if e.norm() != m {
                continue;
            }
            let mut acc = Poly::zero(ring);
            for (t, bt) in basis.iter().enumerate() {
                let c = phi.image(t).coeff(e);
                if c.is_zero() {
                    continue;
                }
                acc = acc.add(&c.mul(&bt.images()[i])?)?;
            }
            if !acc.is_zero() {
                coeffs.push((e.clone(), acc));
            }
        }
        images.push(Series::from_coeffs(ring, phi.dst(), coeffs)?);
    }
    HSDeriv::from_images(ring, phi.dst(), images)
}

/// Check the two clauses of the top-part action law and the factorization
/// through the split:
/// `(φ_m•D)_e = 0` for `0 < |e| < m`, `(φ_m•D)_e = Σ_t c^t_e D_{s^t}` at
/// `|e| = m`, and `φ•D = (φ_m•D)∘(φ_{<m}•D) = (φ_{<m}•D)∘(φ_m•D)`.
pub fn top_action_law(phi: &SubstMap, d: &HSDeriv) -> Result<bool> {
    let m = phi.dst().max_norm();
    let (phi_m, phi_low) = split_top(phi, m)?;
    let top_act = act(&phi_m, d)?;
    // both clauses at once: φ_m•D equals the norm-m combination derivation
    if top_act != top_combination(&phi_m, d, m)? {
        return Ok(false);
    }
    let full = act(phi, d)?;
    let low_act = act(&phi_low, d)?;
    Ok(full == top_act.compose(&low_act)? && full == low_act.compose(&top_act)?)
}

/// A generation instance: a base derivation `D` whose degree-one components
/// generate the derivation module, the target `G`, and the coordinate
/// solver (defaults to the exact basis solver).
pub struct GenerationProblem {
    d: HSDeriv,
    g: HSDeriv,
    solver: Box<dyn Fn(&Derivation, &[Derivation]) -> Result<Vec<Poly>>>,
}

impl GenerationProblem {
    pub fn new(d: HSDeriv, g: HSDeriv) -> GenerationProblem {
        GenerationProblem { d, g, solver: Box::new(|delta, basis| solve_in_derivation_basis(delta, basis)) }
    }

    pub fn with_solver(
        d: HSDeriv,
        g: HSDeriv,
        solver: impl Fn(&Derivation, &[Derivation]) -> Result<Vec<Poly>> + 'static,
    ) -> GenerationProblem {
        GenerationProblem { d, g, solver: Box::new(solver) }
    }

    pub fn base(&self) -> &HSDeriv {
        &self.d
    }

    pub fn target(&self) -> &HSDeriv {
        &self.g
    }
}

/// The generation algorithm: a substitution map `φ` with `act(φ, D) = G`,
/// built stage by stage. Returns the final map; see
/// [`generate_subst_with_stages`] for the intermediate maps.
pub fn generate_subst(problem: &GenerationProblem) -> Result<SubstMap> {
    Ok(generate_subst_with_stages(problem)?.0)
}

/// As [`generate_subst`], also returning the stage-`r` maps for
/// `r = 1..=m` (the last stage equals the result).
pub fn generate_subst_with_stages(
    problem: &GenerationProblem,
) -> Result<(SubstMap, Vec<SubstMap>)> {
    let d = &problem.d;
    let g = &problem.g;
    let ring = d.ring().clone();
    if g.ring() != &ring {
        return Err(Error::RingMismatch);
    }
    let m = d.trunc().max_norm();
    if *d.trunc() != CoIdeal::tm(d.vars(), m) {
        return Err(Error::ShapeMismatch("base derivation must live on a full t_m".into()));
    }
    if *g.trunc() != CoIdeal::tm(g.vars(), m) {
        return Err(Error::ShapeMismatch("target derivation must live on a full t_m".into()));
    }
    if g.trunc().max_norm() != m {
        return Err(Error::ShapeMismatch("lengths differ".into()));
    }

    let basis = d.degree_one_derivations()?;
    let src = d.trunc().clone();
    let dst = g.trunc().clone();

    // accumulated image coefficients c^s_beta, per source variable
    let mut coeffs: Vec<Vec<(MultiIndex, Poly)>> = vec![Vec::new(); src.vars().len()];
    let mut stages = Vec::with_capacity(m as usize);
    let mut current = SubstMap::trivial(&ring, &src, &dst)?;

    for r in 1..=m {
        // zero-extension lift of the stage-(r−1) map
        let lifted = current.clone();
        let f = act(&lifted, d)?;
        let h = g.compose(&f.invert())?;
        // defense: everything strictly below norm r must already match
        for e in dst.iter() {
            if e.is_zero() || e.norm() >= r {
                continue;
            }
            for i in 0..ring.ngens() {
                if !h.image(i).coeff(e).is_zero() {
                    return Err(Error::SolverFailure(format!(
                        "stage {r}: residue at {e} should vanish"
                    )));
                }
            }
        }
        // read the fresh norm-r components as derivations and solve
        for e in dst.iter() {
            if e.norm() != r {
                continue;
            }
            let images: Vec<Poly> = (0..ring.ngens()).map(|i| h.image(i).coeff(e)).collect();
            let h_e = Derivation::new(&ring, images)?;
            // Leibniz spot-check on generator pairs before solving
            for i in 0..ring.ngens() {
                for j in 0..ring.ngens() {
                    let xi = Poly::gen(&ring, i);
                    let xj = Poly::gen(&ring, j);
                    let lhs = h.component(e, &xi.mul(&xj)?)?;
                    let rhs = xi
                        .mul(&h_e.images()[j])?
                        .add(&h_e.images()[i].mul(&xj)?)?;
                    if lhs != rhs {
                        return Err(Error::SolverFailure(format!(
                            "stage {r}: top component at {e} is not a derivation"
                        )));
                    }
                }
            }
            let coords = (problem.solver)(&h_e, &basis)?;
            for (s_pos, c) in coords.into_iter().enumerate() {
                if !c.is_zero() {
                    coeffs[s_pos].push((e.clone(), c));
                }
            }
        }
        let images = coeffs
            .iter()
            .map(|cs| Series::from_coeffs(&ring, &dst, cs.clone()))
            .collect::<Result<Vec<_>>>()?;
        current = SubstMap::new(&ring, &src, &dst, images)?;
        stages.push(current.clone());
    }

    if act(&current, d)? != *g {
        return Err(Error::SolverFailure("generated map does not reproduce the target".into()));
    }
    Ok((current, stages))
}

/// Uniqueness in the basis case, checked by regeneration: maps with equal
/// action regenerate to themselves from that common action.
pub fn verify_uniqueness(d: &HSDeriv, phi: &SubstMap, psi: &SubstMap) -> Result<bool> {
    let act_phi = act(phi, d)?;
    let act_psi = act(psi, d)?;
    if act_phi != act_psi {
        return Ok(true); // nothing to distinguish
    }
    let regen = generate_subst(&GenerationProblem::new(d.clone(), act_phi))?;
    Ok(regen == *phi && regen == *psi)
}

fn fresh_var_names(ring: &PolyRing, count: usize, avoid: &[String]) -> Vec<String> {
    let mut names = Vec::with_capacity(count);
    for i in 0..count {
        let mut name = format!("s{}", i + 1);
        while ring.gen_index(&name).is_some()
            || avoid.contains(&name)
            || names.contains(&name)
        {
            name.push('_');
        }
        names.push(name);
    }
    names
}

/// The canonical Taylor derivation at length `m`: one series variable per
/// ring generator, `Φ_D(x_i) = x_i + s_i`. Its degree-one components are
/// the coordinate partials and it is iterative; its components are the
/// divided-power partials `D_α(x^β) = C(β,α) x^{β−α}`.
pub fn canonical_hs(ring: &PolyRing, m: u32) -> Result<HSDeriv> {
    canonical_hs_avoiding(ring, m, &[])
}

/// As [`canonical_hs`], avoiding the given variable names.
pub fn canonical_hs_avoiding(ring: &PolyRing, m: u32, avoid: &[String]) -> Result<HSDeriv> {
    let names = fresh_var_names(ring, ring.ngens(), avoid);
    let vars = VarSet::new(names)?;
    let trunc = CoIdeal::tm(&vars, m);
    let images = (0..ring.ngens())
        .map(|i| {
            let base = Series::constant(ring, &trunc, Poly::gen(ring, i))?;
            let unit = MultiIndex::unit(&vars, i);
            if trunc.contains(&unit) {
                base.add(&Series::monomial(ring, &trunc, &unit, Poly::one(ring))?)
            } else {
                Ok(base)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    HSDeriv::from_images(ring, &trunc, images)
}

/// Extend a derivation on `t_n` to length `m > n`: an `m`-integral whose
/// truncation back to `t_n` is the input. Built by generating the input
/// from the canonical derivation at length `n`, lifting the generating map
/// by zero extension, and acting on the canonical derivation at length `m`.
pub fn integrate(e: &HSDeriv, m: u32) -> Result<HSDeriv> {
    let ring = e.ring().clone();
    let n = e.trunc().max_norm();
    if *e.trunc() != CoIdeal::tm(e.vars(), n) {
        return Err(Error::ShapeMismatch("integrate expects a full t_n truncation".into()));
    }
    if m <= n {
        return Err(Error::Precondition(format!(
            "target length {m} must exceed the current length {n}"
        )));
    }
    let avoid: Vec<String> = e.vars().names().to_vec();
    let canonical_m = canonical_hs_avoiding(&ring, m, &avoid)?;
    let canonical_n = canonical_m.truncate(&canonical_m.trunc().slice(n))?;
    let phi = generate_subst(&GenerationProblem::new(canonical_n, e.clone()))?;
    // zero-extension lift to length m
    let big_src = CoIdeal::tm(phi.src_vars(), m);
    let big_dst = CoIdeal::tm(phi.dst_vars(), m);
    let lifted_images = phi
        .images()
        .iter()
        .map(|im| im.include_into(&big_dst))
        .collect::<Result<Vec<_>>>()?;
    let lifted = SubstMap::new(&ring, &big_src, &big_dst, lifted_images)?;
    let out = act(&lifted, &canonical_m)?;
    if out.truncate(&out.trunc().slice(n))? != *e {
        return Err(Error::SolverFailure("integration lost the original truncation".into()));
    }
    Ok(out)
}
