//! Energy minimization over the unit sphere of (r,s,t) states: projected,
//! preconditioned gradient descent with a spectral step and monotone line
//! search, positivity enforced by taking the modulus of each iterate.

use super::energy::{el_apply, kinetic_energy, repulsion_form};
use super::{
    density_rst_unchecked, energy_rst, EnergyParts, RstFunction, RstSpace,
};
use crate::coulomb::{poisson_potential, CoulombError};
use crate::grid::legendre_analyze;
use ndarray::Array2;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy)]
pub struct SolverOpts {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverOpts {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 4000,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        energy_history: Vec<f64>,
    },
    #[error(transparent)]
    Coulomb(#[from] CoulombError),
}

/// Converged minimizer with its energy breakdown.
#[derive(Debug, Clone)]
pub struct BipolaronSolution {
    pub u: RstFunction,
    pub coupling: f64,
    pub energy: f64,
    pub parts: EnergyParts,
    pub mu_n: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Per-mode separable inverse of (−Δ_r − Δ_s + centrifugal + 1), built from
/// one-dimensional eigendecompositions in the weighted metric.
struct ModePrecond {
    /// w-orthonormal eigenvectors, columns
    v: Array2<f64>,
    /// diag(w) · v
    vhat: Array2<f64>,
    lam: Vec<f64>,
}

pub struct BipolaronSolver {
    space: Arc<RstSpace>,
    modes: Vec<ModePrecond>,
}

impl BipolaronSolver {
    pub fn new(space: Arc<RstSpace>) -> Self {
        let grid = space.grid();
        let n = grid.n();
        let w = grid.weights();
        let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let dense_d = grid.deriv_bc().to_dense();
        // G = S D S⁻¹ with S = diag(√w); B_k = GᵀG + diag(k(k+1)/r²)
        let mut g = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = sqrt_w[i] * dense_d[i * n + j] / sqrt_w[j];
            }
        }
        let gtg = g.transpose() * &g;
        let modes: Vec<ModePrecond> = (0..space.m())
            .into_par_iter()
            .map(|k| {
                let mut b = gtg.clone();
                let ll = (k * (k + 1)) as f64;
                for i in 0..n {
                    b[(i, i)] += ll / (grid.nodes()[i] * grid.nodes()[i]);
                }
                let eig = b.symmetric_eigen();
                let mut v = Array2::<f64>::zeros((n, n));
                let mut vhat = Array2::<f64>::zeros((n, n));
                for a in 0..n {
                    for i in 0..n {
                        let val = eig.eigenvectors[(i, a)] / sqrt_w[i];
                        v[(i, a)] = val;
                        vhat[(i, a)] = val * w[i];
                    }
                }
                ModePrecond {
                    v,
                    vhat,
                    lam: eig.eigenvalues.iter().cloned().collect(),
                }
            })
            .collect();
        Self { space, modes }
    }

    pub fn space(&self) -> &Arc<RstSpace> {
        &self.space
    }

    /// z = (−Δ_r − Δ_s + centrifugal + 1)⁻¹ g, mode by mode in t.
    fn precondition(&self, g: &RstFunction) -> RstFunction {
        let space = &self.space;
        let n = space.n();
        let m = space.m();
        let tq = space.tq();

        // Legendre coefficients per mode: mode_data[k][(i,j)]
        let mut mode_data: Vec<Array2<f64>> =
            (0..m).map(|_| Array2::<f64>::zeros((n, n))).collect();
        let coeffs: Vec<Vec<f64>> = g
            .values()
            .par_chunks(n * m)
            .map(|slab| {
                let mut out = vec![0.0; n * m];
                for j in 0..n {
                    let c = legendre_analyze(&slab[j * m..(j + 1) * m], tq, m - 1).unwrap();
                    out[j * m..(j + 1) * m].copy_from_slice(&c);
                }
                out
            })
            .collect();
        for (i, slab) in coeffs.iter().enumerate() {
            for j in 0..n {
                for k in 0..m {
                    mode_data[k][(i, j)] = slab[j * m + k];
                }
            }
        }

        let solved: Vec<Array2<f64>> = mode_data
            .into_par_iter()
            .enumerate()
            .map(|(k, gk)| {
                let p = &self.modes[k];
                let mut c = p.vhat.t().dot(&gk).dot(&p.vhat);
                for a in 0..n {
                    for b in 0..n {
                        c[(a, b)] /= p.lam[a] + p.lam[b] + 1.0;
                    }
                }
                p.v.dot(&c).dot(&p.v.t())
            })
            .collect();

        let mut out = RstFunction::zeros(space.clone());
        out.values_mut()
            .par_chunks_mut(n * m)
            .enumerate()
            .for_each(|(i, slab)| {
                for j in 0..n {
                    let dst = &mut slab[j * m..(j + 1) * m];
                    for (k, zk) in solved.iter().enumerate() {
                        let c = zk[(i, j)];
                        let prow = tq.p_row(k);
                        for t in 0..m {
                            dst[t] += c * prow[t];
                        }
                    }
                }
            });
        out
    }

    /// Minimize the energy at the given coupling over normalized positive
    /// states, optionally warm-starting from a previous minimizer.
    pub fn minimize(
        &self,
        coupling: f64,
        opts: &SolverOpts,
        warm: Option<&RstFunction>,
    ) -> Result<BipolaronSolution, SolveError> {
        if coupling < 0.0 {
            return Err(SolveError::Coulomb(CoulombError::NegativeCoupling {
                value: coupling,
            }));
        }
        let space = &self.space;
        let mut u = match warm {
            Some(w) => {
                let mut u = w.clone();
                u.values_mut().iter_mut().for_each(|x| *x = x.abs());
                u.normalize();
                u
            }
            None => {
                let mut u = RstFunction::from_fn(space.clone(), |r, s, _| (-(r + s)).exp());
                u.normalize();
                u
            }
        };

        let mut energy = total_energy(&u, coupling)?;
        let mut history = vec![energy];
        let mut tau = 1.0;
        let mut prev: Option<(RstFunction, RstFunction)> = None; // (u, precond grad)
        let mut residual = f64::INFINITY;

        for iter in 0..opts.max_iter {
            let phi = poisson_potential(&density_rst_unchecked(&u))?;
            let au = el_apply(&u, coupling, &phi);
            let mu = u.inner(&au);
            let mut grad = au;
            grad.axpy(-mu, &u);
            residual = grad.norm();
            if residual <= opts.tol {
                let parts = energy_rst(&u, coupling)?;
                return Ok(BipolaronSolution {
                    mu_n: parts.total - parts.attract,
                    energy: parts.total,
                    parts,
                    residual,
                    iterations: iter,
                    coupling,
                    u,
                });
            }

            let mut dir = self.precondition(&grad);
            let overlap = dir.inner(&u);
            dir.axpy(-overlap, &u);
            let slope = grad.inner(&dir);

            if let Some((pu, pd)) = &prev {
                let mut du = u.clone();
                du.axpy(-1.0, pu);
                let mut dd = dir.clone();
                dd.axpy(-1.0, pd);
                let num = du.inner(&du);
                let den = du.inner(&dd).abs().max(1e-300);
                let bb = num / den;
                if bb.is_finite() && bb > 0.0 {
                    tau = bb.clamp(1e-6, 1e6);
                }
            }

            let mut accepted = false;
            for _ in 0..40 {
                let mut trial = u.clone();
                trial.axpy(-tau, &dir);
                trial.values_mut().iter_mut().for_each(|x| *x = x.abs());
                trial.normalize();
                let e_trial = total_energy(&trial, coupling)?;
                if e_trial <= energy - 1e-4 * tau * slope.max(0.0) || e_trial < energy {
                    prev = Some((u.clone(), dir.clone()));
                    u = trial;
                    energy = e_trial;
                    history.push(energy);
                    accepted = true;
                    tau *= 1.2;
                    break;
                }
                tau *= 0.4;
            }
            if !accepted {
                // flat to line-search resolution: re-measure residual next pass
                prev = None;
                tau = 1.0;
            }
        }

        Err(SolveError::NonConvergence {
            residual,
            iterations: opts.max_iter,
            energy_history: history,
        })
    }
}

fn total_energy(u: &RstFunction, coupling: f64) -> Result<f64, CoulombError> {
    let kin = kinetic_energy(u);
    let rep = if coupling > 0.0 {
        coupling * repulsion_form(u)
    } else {
        0.0
    };
    let rho = density_rst_unchecked(u);
    let phi = poisson_potential(&rho)?;
    let att = super::energy::half_phi_rho(&rho, &phi);
    Ok(kin + rep - att)
}

/// One-call entry point used by tests and the command-line front end.
pub fn minimize_rst(
    coupling: f64,
    space: &Arc<RstSpace>,
    opts: &SolverOpts,
    warm: Option<&RstFunction>,
) -> Result<BipolaronSolution, SolveError> {
    BipolaronSolver::new(space.clone()).minimize(coupling, opts, warm)
}
