//! Two-polaron shell trial state: one electron in the ground profile cut off
//! at a radius R, the other in a thin radial shell far outside, symmetrized.
//! By the exterior Newton law the cross interaction reduces to
//! (U − 1) ∫ η²/|y| dy, so for U < 1 and large R the trial undercuts the
//! one-electron benchmark.

use super::energy::energy_rst;
use super::{EnergyParts, RstFunction, RstSpace};
use crate::coulomb::CoulombError;
use crate::grid::RadialFunction;
use crate::polaron::PolaronSolution;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrialError {
    #[error("shell outer radius {outer} exceeds the domain r_max = {r_max}")]
    ShellExceedsDomain { outer: f64, r_max: f64 },
    #[error("trial space and solution live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Coulomb(#[from] CoulombError),
}

#[derive(Debug, Clone)]
pub struct TrialReport {
    pub state: RstFunction,
    pub energy: f64,
    pub parts: EnergyParts,
    /// ∫ η² / |y| dy of the normalized shell factor.
    pub shell_coulomb: f64,
    /// kinetic energy of the shell factor alone
    pub shell_kinetic: f64,
    pub r_shell: f64,
}

/// C² quintic step: 0 at 0, 1 at 1.
fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// Build the symmetrized shell trial [f_R ⊗ η_R + η_R ⊗ f_R]/√2 and evaluate
/// its energy exactly on the discrete functional.
///
/// `f_sol` is the 2T − 4D ground profile; the one-electron benchmark profile
/// it is dilated from (the T − D minimizer) is 2^{-3/2} f(x/2). The cutoff
/// is 1 on [0, R/2] and 0 beyond R; η is a C² plateau bump on [10R, 11R].
pub fn zhislin_trial(
    f_sol: &PolaronSolution,
    space: &Arc<RstSpace>,
    r_shell: f64,
    coupling: f64,
) -> Result<TrialReport, TrialError> {
    if coupling < 0.0 {
        return Err(TrialError::Coulomb(CoulombError::NegativeCoupling {
            value: coupling,
        }));
    }
    let grid = space.grid();
    if !grid.compatible(f_sol.grid()) {
        return Err(TrialError::GridMismatch);
    }
    let outer = 11.0 * r_shell;
    if outer > grid.r_max() {
        return Err(TrialError::ShellExceedsDomain {
            outer,
            r_max: grid.r_max(),
        });
    }

    // one-electron benchmark profile by exact dilation, smoothly cut at R
    let fgrid = f_sol.grid().clone();
    let fvals = f_sol.f.values().to_vec();
    let scale = 0.5f64.powf(1.5);
    let mut f_cut = RadialFunction::from_fn(grid.clone(), |r| {
        let base = scale * fgrid.interpolate(&fvals, 0.5 * r);
        let cut = 1.0 - smoothstep((r - 0.5 * r_shell) / (0.5 * r_shell));
        base * cut
    });
    let nf = f_cut.norm3d();
    f_cut.values_mut().iter_mut().for_each(|v| *v /= nf);

    // C² plateau bump supported on [10R, 11R]
    let mut eta = RadialFunction::from_fn(grid.clone(), |r| {
        let x = (r - 10.0 * r_shell) / r_shell;
        if !(0.0..=1.0).contains(&x) {
            0.0
        } else if x < 0.25 {
            smoothstep(4.0 * x)
        } else if x > 0.75 {
            smoothstep(4.0 * (1.0 - x))
        } else {
            1.0
        }
    });
    let ne = eta.norm3d();
    eta.values_mut().iter_mut().for_each(|v| *v /= ne);

    let shell_coulomb = 4.0
        * std::f64::consts::PI
        * grid
            .weights()
            .iter()
            .zip(eta.values().iter().zip(grid.nodes().iter()))
            .map(|(w, (e, r))| w * e * e / r)
            .sum::<f64>();
    let shell_kinetic = 4.0 * std::f64::consts::PI * grid.kinetic_form(0, eta.values());

    let mut state = RstFunction::symmetric_product(space.clone(), f_cut.values(), eta.values());
    state.normalize();
    let parts = energy_rst(&state, coupling)?;
    Ok(TrialReport {
        energy: parts.total,
        parts,
        shell_coulomb,
        shell_kinetic,
        r_shell,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Mapping, RadialGrid, TQuadrature};
    use crate::polaron::{solve_single_polaron, PolaronOpts};

    #[test]
    fn trial_is_normalized_symmetric_and_shell_bounds_hold() {
        let grid = RadialGrid::build(300, 13.2 * 2.0, Mapping::exponential()).unwrap();
        let sol = solve_single_polaron(&grid, &PolaronOpts::default()).unwrap();
        let tq = TQuadrature::build(8).unwrap();
        let space = RstSpace::build(grid.clone(), tq).unwrap();
        let report = zhislin_trial(&sol, &space, 2.0, 0.5).unwrap();
        assert!((report.state.norm_sq() - 1.0).abs() < 1e-10);
        assert!(report.state.asymmetry() < 1e-13);
        // 1/(11R) ≤ ∫η²/r ≤ 1/(10R)
        assert!(report.shell_coulomb >= 1.0 / (11.0 * 2.0) - 1e-6);
        assert!(report.shell_coulomb <= 1.0 / (10.0 * 2.0) + 1e-6);
        assert!(report.shell_kinetic > 0.0);

        // shell beyond the domain is rejected
        assert!(matches!(
            zhislin_trial(&sol, &space, 3.0, 0.5),
            Err(TrialError::ShellExceedsDomain { .. })
        ));
    }
}
