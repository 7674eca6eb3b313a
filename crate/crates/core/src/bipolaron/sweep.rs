//! Coupling sweeps with warm starts and bisection of the coupling where the
//! rotation-invariant two-electron energy meets the one-electron benchmark.

use super::minimize::{BipolaronSolver, SolveError, SolverOpts};
use super::RstFunction;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub coupling: f64,
    pub energy: f64,
    pub mu_n: f64,
    pub residual: f64,
    pub iterations: usize,
    pub e_single: f64,
    pub gap_to_e: f64,
    pub gap_to_2e: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOpts {
    pub solver: SolverOpts,
}

impl Default for SweepOpts {
    fn default() -> Self {
        Self {
            solver: SolverOpts::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("coupling values must be nonnegative and sorted ascending")]
    BadCouplingList,
    #[error("[{lo}, {hi}] does not bracket the crossing: gap(lo) = {glo:.3e}, gap(hi) = {ghi:.3e}")]
    NoBracket { lo: f64, hi: f64, glo: f64, ghi: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Minimize along the given couplings, warm-starting each point from its
/// predecessor. Failed points are recorded with their last residual instead
/// of aborting the sweep.
pub fn sweep_u(
    couplings: &[f64],
    solver: &BipolaronSolver,
    e_single: f64,
    opts: &SweepOpts,
) -> Result<Vec<SweepRow>, SweepError> {
    if couplings.iter().any(|&u| u < 0.0) || couplings.windows(2).any(|p| p[0] > p[1]) {
        return Err(SweepError::BadCouplingList);
    }
    let mut rows = Vec::with_capacity(couplings.len());
    let mut warm: Option<RstFunction> = None;
    for &coupling in couplings {
        match solver.minimize(coupling, &opts.solver, warm.as_ref()) {
            Ok(sol) => {
                rows.push(SweepRow {
                    coupling,
                    energy: sol.energy,
                    mu_n: sol.mu_n,
                    residual: sol.residual,
                    iterations: sol.iterations,
                    e_single,
                    gap_to_e: sol.energy - e_single,
                    gap_to_2e: sol.energy - 2.0 * e_single,
                    converged: true,
                });
                warm = Some(sol.u);
            }
            Err(SolveError::NonConvergence {
                residual,
                iterations,
                energy_history,
            }) => {
                let energy = energy_history.last().copied().unwrap_or(f64::NAN);
                rows.push(SweepRow {
                    coupling,
                    energy,
                    mu_n: f64::NAN,
                    residual,
                    iterations,
                    e_single,
                    gap_to_e: energy - e_single,
                    gap_to_2e: energy - 2.0 * e_single,
                    converged: false,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

/// Bisection for the coupling at which the constrained two-electron energy
/// crosses the one-electron benchmark `e_single`, to within `tol_u`.
/// Requires gap(lo) < 0 ≤ gap(hi); each evaluation warm-starts from the
/// current lower edge.
pub fn bisect_uc_symm(
    lo: f64,
    hi: f64,
    tol_u: f64,
    solver: &BipolaronSolver,
    e_single: f64,
    opts: &SolverOpts,
) -> Result<f64, SweepError> {
    assert!(lo < hi && tol_u > 0.0);
    let sol_lo = solver.minimize(lo, opts, None)?;
    let mut glo = sol_lo.energy - e_single;
    let sol_hi = solver.minimize(hi, opts, Some(&sol_lo.u))?;
    let ghi = sol_hi.energy - e_single;
    if !(glo < 0.0 && ghi >= -1e-10) {
        return Err(SweepError::NoBracket { lo, hi, glo, ghi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut warm = sol_lo.u;
    while b - a > tol_u {
        let mid = 0.5 * (a + b);
        let sol = solver.minimize(mid, opts, Some(&warm))?;
        let g = sol.energy - e_single;
        if g < 0.0 {
            a = mid;
            glo = g;
            warm = sol.u;
        } else {
            b = mid;
        }
    }
    let _ = glo;
    Ok(0.5 * (a + b))
}
