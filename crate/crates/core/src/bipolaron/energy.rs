//! Energy functional, Euler–Lagrange operator and residual, and the
//! two-field (wave function + potential) reformulation.
//!
//! For a state u(r,s,t) with coupling U ≥ 0 the energy splits as
//! total = kinetic + repel − attract, with
//!   kinetic = 8π² ∭ (|∂_r u|² + |∂_s u|² + (1/r² + 1/s²)(1−t²)|∂_t u|²) r²s²,
//!   repel   = U · 8π² ∭ (r² + s² − 2rst)^{-1/2} u² r²s²,
//!   attract = D[ρ_u, ρ_u].

use super::{density_rst_unchecked, RstFunction, MEASURE_ANGULAR};
use crate::coulomb::{poisson_potential, CoulombError, RadialPotential};
use crate::grid::legendre_analyze;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub attract: f64,
    pub repel: f64,
    pub total: f64,
}

/// Energy of a (not necessarily normalized) state; no implicit
/// normalization is applied.
pub fn energy_rst(u: &RstFunction, coupling: f64) -> Result<EnergyParts, CoulombError> {
    if coupling < 0.0 {
        return Err(CoulombError::NegativeCoupling { value: coupling });
    }
    let kinetic = kinetic_energy(u);
    let repel = coupling * repulsion_form(u);
    let rho = density_rst_unchecked(u);
    let phi = poisson_potential(&rho)?;
    let attract = half_phi_rho(&rho, &phi);
    Ok(EnergyParts {
        kinetic,
        attract,
        repel,
        total: kinetic + repel - attract,
    })
}

/// D[ρ, ρ] as ½ ∫ Φ ρ for the self-consistent pair.
pub(crate) fn half_phi_rho(rho: &crate::grid::RadialFunction, phi: &RadialPotential) -> f64 {
    let w = rho.grid().weights();
    let s: f64 = (0..rho.grid().n())
        .map(|i| w[i] * phi.values()[i] * rho.values()[i])
        .sum();
    0.5 * 4.0 * std::f64::consts::PI * s
}

/// ∫ Φ ρ over ℝ³.
pub(crate) fn phi_rho(rho: &crate::grid::RadialFunction, phi: &RadialPotential) -> f64 {
    2.0 * half_phi_rho(rho, phi)
}

/// Repulsion quadratic form at unit coupling.
pub fn repulsion_form(u: &RstFunction) -> f64 {
    let space = u.space();
    let n = space.n();
    let m = space.m();
    let mf = 2 * m;
    let w = space.grid().weights();
    let vf = space.fine().weights();
    let partial: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row_kernel = vec![0.0; mf];
            let mut uf = vec![0.0; mf];
            let mut acc = 0.0;
            for j in 0..n {
                let urow = &u.values()[(i * n + j) * m..(i * n + j + 1) * m];
                for tau in 0..mf {
                    let p = space.prolong_row(tau);
                    let mut x = 0.0;
                    for c in 0..m {
                        x += p[c] * urow[c];
                    }
                    uf[tau] = x;
                }
                space.kernel_row_into(i, j, &mut row_kernel);
                let mut e = 0.0;
                for tau in 0..mf {
                    e += vf[tau] * row_kernel[tau] * uf[tau] * uf[tau];
                }
                acc += w[j] * e;
            }
            w[i] * acc
        })
        .collect();
    MEASURE_ANGULAR * partial.iter().sum::<f64>()
}

/// Repulsion operator at unit coupling: the gradient of ½·repulsion_form in
/// the discrete L²(ℝ⁶) metric.
pub(crate) fn repulsion_apply(u: &RstFunction) -> RstFunction {
    let space = u.space().clone();
    let n = space.n();
    let m = space.m();
    let mf = 2 * m;
    let vc = space.tq().weights();
    let vf = space.fine().weights();
    let mut out = RstFunction::zeros(space.clone());
    out.values_mut()
        .par_chunks_mut(n * m)
        .enumerate()
        .for_each(|(i, slab)| {
            let mut row_kernel = vec![0.0; mf];
            let mut uf = vec![0.0; mf];
            for j in 0..n {
                let urow = &u.values()[(i * n + j) * m..(i * n + j + 1) * m];
                for tau in 0..mf {
                    let p = space.prolong_row(tau);
                    let mut x = 0.0;
                    for c in 0..m {
                        x += p[c] * urow[c];
                    }
                    uf[tau] = x;
                }
                space.kernel_row_into(i, j, &mut row_kernel);
                for tau in 0..mf {
                    uf[tau] *= vf[tau] * row_kernel[tau];
                }
                let dst = &mut slab[j * m..(j + 1) * m];
                for tau in 0..mf {
                    let p = space.prolong_row(tau);
                    let x = uf[tau];
                    for c in 0..m {
                        dst[c] += p[c] * x;
                    }
                }
                for c in 0..m {
                    dst[c] /= vc[c];
                }
            }
        });
    out
}

/// Reorganize a state into per-Legendre-mode radial slabs c_k(r_i, s_j),
/// returned as m matrices of n² entries (row-major in (i, j)).
pub(crate) fn mode_slabs(u: &RstFunction) -> Vec<Vec<f64>> {
    let space = u.space();
    let n = space.n();
    let m = space.m();
    let coeffs: Vec<Vec<f64>> = u
        .values()
        .par_chunks(n * m)
        .map(|slab| {
            let mut out = vec![0.0; n * m];
            for j in 0..n {
                let c = legendre_analyze(&slab[j * m..(j + 1) * m], space.tq(), m - 1).unwrap();
                out[j * m..(j + 1) * m].copy_from_slice(&c);
            }
            out
        })
        .collect();
    let mut modes = vec![vec![0.0; n * n]; m];
    for (i, slab) in coeffs.iter().enumerate() {
        for j in 0..n {
            for k in 0..m {
                modes[k][i * n + j] = slab[j * m + k];
            }
        }
    }
    modes
}

/// Kinetic energy 8π² ∭ (|∂_r u|² + |∂_s u|² + (1/r²+1/s²)(1−t²)|∂_t u|²) r²s².
/// Radial derivatives act on nodal values in the Dirichlet space; the
/// angular part is diagonal in Legendre coefficients,
/// ∫(1−t²)|∂_t u|² dt = Σ_k k(k+1)·2/(2k+1)·c_k².
pub fn kinetic_energy(u: &RstFunction) -> f64 {
    let space = u.space();
    let n = space.n();
    let m = space.m();
    let w = space.grid().weights();
    let v = space.tq().weights();
    let nodes = space.grid().nodes();
    let deriv = space.grid().deriv_bc();

    let mut dr = vec![0.0; space.len()];
    deriv.apply_axis0(u.values(), n * m, &mut dr);
    let t_r: f64 = dr
        .par_chunks(n * m)
        .enumerate()
        .map(|(i, slab)| {
            let mut acc = 0.0;
            for j in 0..n {
                let mut tj = 0.0;
                for k in 0..m {
                    let x = slab[j * m + k];
                    tj += v[k] * x * x;
                }
                acc += w[j] * tj;
            }
            w[i] * acc
        })
        .sum();
    drop(dr);

    let t_s: f64 = u
        .values()
        .par_chunks(n * m)
        .enumerate()
        .map(|(i, slab)| {
            let mut ds = vec![0.0; n * m];
            deriv.apply_axis0(slab, m, &mut ds);
            let mut acc = 0.0;
            for j in 0..n {
                let mut tj = 0.0;
                for k in 0..m {
                    let x = ds[j * m + k];
                    tj += v[k] * x * x;
                }
                acc += w[j] * tj;
            }
            w[i] * acc
        })
        .sum();

    let tq = space.tq();
    let t_t: f64 = u
        .values()
        .par_chunks(n * m)
        .enumerate()
        .map(|(i, slab)| {
            let mut acc = 0.0;
            for j in 0..n {
                let c = legendre_analyze(&slab[j * m..(j + 1) * m], tq, m - 1).unwrap();
                let mut tj = 0.0;
                for (k, ck) in c.iter().enumerate() {
                    let kf = k as f64;
                    tj += kf * (kf + 1.0) * 2.0 / (2.0 * kf + 1.0) * ck * ck;
                }
                acc += w[j] * tj * (1.0 / (nodes[i] * nodes[i]) + 1.0 / (nodes[j] * nodes[j]));
            }
            w[i] * acc
        })
        .sum();

    MEASURE_ANGULAR * (t_r + t_s + t_t)
}

/// Kinetic operator −Δ_x − Δ_y in (r,s,t) coordinates, self-adjoint in the
/// discrete measure so that ⟨u, K u⟩ = kinetic_energy(u).
pub(crate) fn kinetic_apply(u: &RstFunction) -> RstFunction {
    let space = u.space().clone();
    let n = space.n();
    let m = space.m();
    let w = space.grid().weights();
    let nodes = space.grid().nodes();
    let deriv = space.grid().deriv_bc();
    let tq = space.tq();

    let mut out = vec![0.0; space.len()];

    // -Δ_r: (1/w_i) Dᵀ (w_i (D u)) along axis 0
    {
        let mut dr = vec![0.0; space.len()];
        deriv.apply_axis0(u.values(), n * m, &mut dr);
        dr.par_chunks_mut(n * m).enumerate().for_each(|(i, slab)| {
            slab.iter_mut().for_each(|x| *x *= w[i]);
        });
        deriv.apply_transpose_add_axis0(&dr, n * m, &mut out);
        out.par_chunks_mut(n * m).enumerate().for_each(|(i, slab)| {
            slab.iter_mut().for_each(|x| *x /= w[i]);
        });
    }

    // -Δ_s per i-slab, plus the angular term
    out.par_chunks_mut(n * m)
        .zip(u.values().par_chunks(n * m))
        .enumerate()
        .for_each(|(i, (oslab, uslab))| {
            let mut ds = vec![0.0; n * m];
            deriv.apply_axis0(uslab, m, &mut ds);
            for j in 0..n {
                for k in 0..m {
                    ds[j * m + k] *= w[j];
                }
            }
            let mut acc = vec![0.0; n * m];
            deriv.apply_transpose_add_axis0(&ds, m, &mut acc);
            for j in 0..n {
                let inv = 1.0 / w[j];
                let cent = 1.0 / (nodes[i] * nodes[i]) + 1.0 / (nodes[j] * nodes[j]);
                let urow = &uslab[j * m..(j + 1) * m];
                let c = legendre_analyze(urow, tq, m - 1).unwrap();
                let orow = &mut oslab[j * m..(j + 1) * m];
                for k in 0..m {
                    orow[k] += acc[j * m + k] * inv;
                }
                for (kk, ck) in c.iter().enumerate() {
                    let lam = (kk * (kk + 1)) as f64;
                    if lam == 0.0 {
                        continue;
                    }
                    let p = tq.p_row(kk);
                    for k in 0..m {
                        orow[k] += cent * lam * ck * p[k];
                    }
                }
            }
        });

    RstFunction::new(space, out)
}

/// Full Euler–Lagrange operator
/// A u = (−Δ_x − Δ_y + U/|x−y| − Φ(r) − Φ(s)) u for a given radial Φ.
pub(crate) fn el_apply(u: &RstFunction, coupling: f64, phi: &RadialPotential) -> RstFunction {
    let mut out = kinetic_apply(u);
    if coupling > 0.0 {
        let rep = repulsion_apply(u);
        out.axpy(coupling, &rep);
    }
    let n = u.space().n();
    let m = u.space().m();
    let pv = phi.values();
    out.values_mut()
        .par_chunks_mut(n * m)
        .enumerate()
        .for_each(|(i, slab)| {
            for j in 0..n {
                let c = pv[i] + pv[j];
                let urow = &u.values()[(i * n + j) * m..(i * n + j + 1) * m];
                let orow = &mut slab[j * m..(j + 1) * m];
                for k in 0..m {
                    orow[k] -= c * urow[k];
                }
            }
        });
    out
}

/// L²-norm of (A − μ_n) u with μ_n = ⟨u, A u⟩, evaluated with the
/// self-consistent potential of u. Also returns μ_n and A u.
pub(crate) fn el_residual_full(
    u: &RstFunction,
    coupling: f64,
) -> Result<(f64, f64, RstFunction), CoulombError> {
    let phi = super::self_consistent_potential(u)?;
    let au = el_apply(u, coupling, &phi);
    let mu = u.inner(&au);
    let mut defect = au.clone();
    defect.axpy(-mu, u);
    Ok((defect.norm(), mu, au))
}

/// L²-norm of the Euler–Lagrange defect of a normalized state.
pub fn el_residual(u: &RstFunction, coupling: f64) -> Result<f64, CoulombError> {
    if coupling < 0.0 {
        return Err(CoulombError::NegativeCoupling { value: coupling });
    }
    Ok(el_residual_full(u, coupling)?.0)
}

/// Two-field energy: kinetic + repulsion − ∫Φρ_u + ‖u‖²(1/8π)∫|∇Φ|².
///
/// The field term integrates the gradient on the grid and adds the exact
/// exterior tail q²/(2 r_max) of a potential behaving like q/r beyond the
/// domain, with q read off the last node. Minimizing over Φ at fixed u
/// recovers the ordinary energy, with equality at Φ = ρ_{u/‖u‖} ∗ |x|⁻¹.
pub fn two_field_energy(
    u: &RstFunction,
    phi: &RadialPotential,
    coupling: f64,
) -> Result<f64, CoulombError> {
    if coupling < 0.0 {
        return Err(CoulombError::NegativeCoupling { value: coupling });
    }
    let kinetic = kinetic_energy(u);
    let repel = coupling * repulsion_form(u);
    let rho = density_rst_unchecked(u);
    let coupling_term = phi_rho(&rho, phi);

    let grid = u.space().grid();
    let dphi = grid.deriv().apply(phi.values());
    let mut field = 0.0;
    for i in 0..grid.n() {
        field += grid.weights()[i] * dphi[i] * dphi[i];
    }
    field *= 0.5;
    let q_tail = phi.values()[grid.n() - 1] * grid.nodes()[grid.n() - 1];
    field += q_tail * q_tail / (2.0 * grid.r_max());

    let norm_sq = u.norm_sq();
    Ok(kinetic + repel - coupling_term + field * norm_sq)
}

#[cfg(test)]
mod tests {
    use super::super::tests::small_space;
    use super::super::{random_state, RstFunction};
    use super::*;
    use crate::grid::RadialFunction;

    #[test]
    fn kinetic_form_matches_operator() {
        let space = small_space();
        let u = random_state(&space, 3, 5);
        let ku = kinetic_apply(&u);
        let quad = u.inner(&ku);
        let form = kinetic_energy(&u);
        assert!(
            (quad - form).abs() < 1e-11 * form.abs().max(1.0),
            "{quad} vs {form}"
        );
        assert!(form > 0.0);
    }

    #[test]
    fn t_independent_state_has_no_angular_kinetic_energy() {
        let space = small_space();
        let g = RadialFunction::from_fn(space.grid().clone(), |r| (-r).exp());
        let mut gv = g.values().to_vec();
        let nrm = g.norm3d();
        gv.iter_mut().for_each(|x| *x /= nrm);
        let u = RstFunction::symmetric_product(space.clone(), &gv, &gv);
        // compare against the separable 1D value with the same derivative
        // operator: T = 2 ∫|∇g|² for ‖g‖=1
        let dg = space.grid().deriv_bc().apply(&gv);
        let t1: f64 = 4.0
            * std::f64::consts::PI
            * space
                .grid()
                .weights()
                .iter()
                .zip(dg.iter())
                .map(|(w, d)| w * d * d)
                .sum::<f64>();
        let parts = energy_rst(&u, 0.0).unwrap();
        assert!(
            (parts.kinetic - 2.0 * t1).abs() < 1e-10 * parts.kinetic,
            "{} vs {}",
            parts.kinetic,
            2.0 * t1
        );
    }

    #[test]
    fn repulsion_form_matches_operator_and_is_positive() {
        let space = small_space();
        let u = random_state(&space, 11, 5);
        let ru = repulsion_apply(&u);
        let quad = u.inner(&ru);
        let form = repulsion_form(&u);
        assert!((quad - form).abs() < 1e-11 * form.abs());
        assert!(form > 0.0);

        // affine in U
        let e1 = energy_rst(&u, 0.3).unwrap();
        let e2 = energy_rst(&u, 1.1).unwrap();
        let dr = e2.total - e1.total;
        assert!((dr - 0.8 * form).abs() < 1e-12 * form.abs().max(1.0));
        assert!(energy_rst(&u, -0.5).is_err());
    }

    #[test]
    fn repulsion_of_separated_bumps_is_coulombic() {
        // mass near (r,s) ≈ (1,2) concentrated at t ≈ 1: |x-y| ≈ 1
        let space = small_space();
        let mut u = RstFunction::from_fn(space.clone(), |r, s, t| {
            let bump = |x: f64, c: f64| (-((x - c) / 0.08).powi(2)).exp();
            (bump(r, 1.0) * bump(s, 2.0) + bump(r, 2.0) * bump(s, 1.0)) * ((t - 1.0) / 0.05).exp()
        });
        u.normalize();
        let rep = repulsion_form(&u);
        // collinear distance |2 - 1| = 1, so the form ≈ ‖u‖² = 1
        assert!((rep - 1.0).abs() < 0.05, "rep = {rep}");
    }

    #[test]
    fn two_field_equality_and_lower_bound() {
        // equality-case agreement is discretization-limited; use a
        // realistic radial resolution
        let grid = crate::grid::RadialGrid::build(200, 30.0, crate::grid::Mapping::exponential())
            .unwrap();
        let tq = crate::grid::TQuadrature::build(8).unwrap();
        let space = super::super::RstSpace::build(grid, tq).unwrap();
        let u = random_state(&space, 21, 4);
        let coupling = 0.4;
        let parts = energy_rst(&u, coupling).unwrap();
        let rho = super::super::density_rst(&u).unwrap();
        let phi = crate::coulomb::newton_potential(&rho).unwrap();
        let tf = two_field_energy(&u, &phi, coupling).unwrap();
        assert!(
            (tf - parts.total).abs() < 1e-8,
            "two-field {tf} vs energy {}",
            parts.total
        );

        // Φ = 0 drops the attraction
        let zero = poisson_potential(&RadialFunction::zeros(space.grid().clone())).unwrap();
        let tf0 = two_field_energy(&u, &zero, coupling).unwrap();
        assert!((tf0 - (parts.kinetic + parts.repel)).abs() < 1e-10);
        assert!(tf0 >= parts.total);

        // perturbing Φ raises the value quadratically
        let grid = space.grid();
        let delta: Vec<f64> = grid.nodes().iter().map(|r| (-r).exp()).collect();
        let value_at = |eps: f64| {
            let vals: Vec<f64> = phi
                .values()
                .iter()
                .zip(delta.iter())
                .map(|(p, d)| p + eps * d)
                .collect();
            let pert = RadialPotential::from_values(grid.clone(), vals, phi.total_charge());
            two_field_energy(&u, &pert, coupling).unwrap()
        };
        let up = value_at(0.05) - tf;
        let down = value_at(-0.05) - tf;
        assert!(up > 0.0 && down > 0.0);
        // quadratic: quarter the step, quarter the increase
        let up_small = value_at(0.025) - tf;
        assert!((up_small / up - 0.25).abs() < 0.05);
    }

    #[test]
    fn residual_positive_away_from_critical_points() {
        let space = small_space();
        let u = random_state(&space, 5, 4);
        let res = el_residual(&u, 0.2).unwrap();
        assert!(res > 1e-3, "generic state should not be critical: {res}");
    }
}
