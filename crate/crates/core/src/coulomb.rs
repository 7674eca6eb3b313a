//! Newton-theorem potentials, Coulomb energies and the multipole kernel.
//!
//! Conventions: densities are radial profiles ρ(r) with total charge
//! Q = 4π ∫ ρ r² dr, potentials are Φ = ρ ∗ |x|⁻¹, and
//! D[ρ, ρ′] = ½ ∬ ρ(x) ρ′(x′) / |x − x′| dx dx′.

use crate::grid::{GridError, RadialFunction, RadialGrid};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoulombError {
    #[error("density has negative entry {value:.3e} at node {index}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("coupling U must be nonnegative, got {value}")]
    NegativeCoupling { value: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Radial electrostatic potential together with the discrete total charge of
/// the source it came from. Beyond the source's numerical support the values
/// satisfy Φ(r) = Q/r exactly, because the cumulative integrals are local.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    total_charge: f64,
}

impl RadialPotential {
    /// Assemble a potential from explicit values (deserialized data or
    /// hand-built fields); `total_charge` is the exterior-law charge.
    pub fn from_values(grid: Arc<RadialGrid>, values: Vec<f64>, total_charge: f64) -> Self {
        assert_eq!(values.len(), grid.n());
        Self {
            grid,
            values,
            total_charge,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_charge(&self) -> f64 {
        self.total_charge
    }

    pub fn as_radial_function(&self) -> RadialFunction {
        RadialFunction::new(self.grid.clone(), self.values.clone())
    }
}

/// Tolerance below which slightly negative density entries (roundoff from
/// squaring and mixing) are accepted and clipped.
pub const DENSITY_FLOOR: f64 = -1e-12;

/// Φ(r) = 4π [ (1/r) ∫₀^r ρ s² ds + ∫_r^∞ ρ s ds ] for a nonnegative radial
/// density, by interval-local prefix/suffix integration on the grid.
pub fn newton_potential(rho: &RadialFunction) -> Result<RadialPotential, CoulombError> {
    for (index, &value) in rho.values().iter().enumerate() {
        if value < DENSITY_FLOOR || !value.is_finite() {
            return Err(CoulombError::NegativeDensity { index, value });
        }
    }
    let grid = rho.grid().clone();
    let vals: Vec<f64> = rho.values().iter().map(|v| v.max(0.0)).collect();
    let (values, total_charge) = kernel_integral(&grid, 0, &vals);
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(RadialPotential {
        grid,
        values: values.iter().map(|v| four_pi * v).collect(),
        total_charge: four_pi * total_charge,
    })
}

/// Radial multipole integral of degree l with the kink split at r:
/// (K_l ρ)(r) = r^{-(l+1)} ∫₀^r ρ s^{l+2} ds + r^l ∫_r^∞ ρ s^{1-l} ds,
/// which is ∫ multipole_kernel(l, r, s) ρ(s) s² ds. Also returns the
/// monopole charge integral ∫ ρ s^{l+2} ds over the whole domain.
pub fn kernel_integral(grid: &RadialGrid, l: u32, rho: &[f64]) -> (Vec<f64>, f64) {
    let n = grid.n();
    let nodes = grid.nodes();
    let li = l as i32;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        a[i] = rho[i] * nodes[i].powi(li + 2);
        b[i] = rho[i] * nodes[i].powi(1 - li);
    }
    let (pa, _sa, ta) = grid.cumint().prefix_suffix(&a);
    let (_pb, sb, _tb) = grid.cumint().prefix_suffix(&b);
    let out: Vec<f64> = (0..n)
        .map(|i| pa[i] * nodes[i].powi(-(li + 1)) + sb[i] * nodes[i].powi(li))
        .collect();
    (out, ta)
}

/// Adjoint of `kernel_integral` in the grid-weighted metric, assembled by
/// scattering suffix/prefix contractions back through the interval rows.
pub fn kernel_integral_adjoint(grid: &RadialGrid, l: u32, sigma: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let nodes = grid.nodes();
    let w = grid.weights();
    let li = l as i32;
    // per-interval factors: G_iv = Σ_{i ≥ iv} wσ r^{-(l+1)}, H_iv = Σ_{i < iv} wσ r^l
    let mut g = vec![0.0; n + 1];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += w[i] * sigma[i] * nodes[i].powi(-(li + 1));
        g[i] = acc;
    }
    let mut h = vec![0.0; n + 1];
    let mut acc = 0.0;
    for i in 0..n {
        acc += w[i] * sigma[i] * nodes[i].powi(li);
        h[i + 1] = acc;
    }
    let mut sa = vec![0.0; n];
    grid.cumint().scatter_rows(&g, &mut sa);
    let mut sb = vec![0.0; n];
    grid.cumint().scatter_rows(&h, &mut sb);
    (0..n)
        .map(|j| (nodes[j].powi(li + 2) * sa[j] + nodes[j].powi(1 - li) * sb[j]) / w[j])
        .collect()
}

/// Symmetrized multipole integral: exactly self-adjoint in the weighted
/// metric. Pointwise it differs from the forward route only at nodes of
/// negligible quadrature weight, so weighted norms and forms are unaffected.
pub fn kernel_integral_sym(grid: &RadialGrid, l: u32, rho: &[f64]) -> Vec<f64> {
    let (fwd, _) = kernel_integral(grid, l, rho);
    let adj = kernel_integral_adjoint(grid, l, rho);
    fwd.iter().zip(adj.iter()).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// Self-adjoint variant of the Newton potential: agrees with
/// `newton_potential` to discretization accuracy, and the map ρ ↦ Φ is
/// exactly symmetric, so Coulomb-energy gradients are exact.
pub fn poisson_potential(rho: &RadialFunction) -> Result<RadialPotential, CoulombError> {
    for (index, &value) in rho.values().iter().enumerate() {
        if value < DENSITY_FLOOR || !value.is_finite() {
            return Err(CoulombError::NegativeDensity { index, value });
        }
    }
    let grid = rho.grid().clone();
    let vals: Vec<f64> = rho.values().iter().map(|v| v.max(0.0)).collect();
    let sym = kernel_integral_sym(&grid, 0, &vals);
    let (_, total) = kernel_integral(&grid, 0, &vals);
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(RadialPotential {
        grid,
        values: sym.iter().map(|v| four_pi * v).collect(),
        total_charge: four_pi * total,
    })
}

/// D[ρ, ρ′] evaluated as ½ ∫ Φ_{ρ′} ρ dx, symmetrized over the two routes so
/// the result is exactly symmetric in its arguments.
pub fn coulomb_energy(rho: &RadialFunction, rho2: &RadialFunction) -> Result<f64, CoulombError> {
    if !rho.grid().compatible(rho2.grid()) {
        return Err(CoulombError::Grid(GridError::GridMismatch));
    }
    let phi2 = newton_potential(rho2)?;
    let phi1 = newton_potential(rho)?;
    let w = rho.grid().weights();
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..rho.grid().n() {
        a += w[i] * phi2.values()[i] * rho.values()[i];
        b += w[i] * phi1.values()[i] * rho2.values()[i];
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(0.25 * four_pi * (a + b))
}

/// Multipole kernel r_<^k / r_>^{k+1}; the Legendre expansion of the Coulomb
/// kernel is 1/|x−y| = Σ_k kernel(k, r, s) P_k(x̂·ŷ).
#[inline]
pub fn multipole_kernel(k: usize, r: f64, rp: f64) -> f64 {
    let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
    (lo / hi).powi(k as i32) / hi
}
