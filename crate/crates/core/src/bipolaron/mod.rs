//! The rotation-invariant two-electron problem in (r, s, t) coordinates,
//! r = |x|, s = |y|, t = x·y/(|x||y|): state representation, energy
//! functional, Euler–Lagrange residual, minimization, rearrangement and
//! trial states.
//!
//! A state u(r, s, t) lives on a tensor grid (radial × radial × Gauss-t) and
//! carries the L²(ℝ⁶) measure 8π² r² s² dr ds dt.

mod energy;
mod minimize;
mod shape;
mod sweep;
mod trial;

pub use energy::{el_residual, energy_rst, two_field_energy, EnergyParts};
pub use minimize::{minimize_rst, BipolaronSolution, BipolaronSolver, SolveError, SolverOpts};
pub use shape::{rearrange_t, symmetrize};
pub use sweep::{bisect_uc_symm, sweep_u, SweepOpts, SweepRow};
pub use trial::{zhislin_trial, TrialError};

use crate::coulomb::{poisson_potential, CoulombError, RadialPotential};
use crate::grid::{legendre_analyze, GridError, RadialFunction, RadialGrid, TQuadrature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::{Arc, OnceLock};

pub const TWO_PI_SQ: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
/// Full angular measure factor of the (r,s,t) reduction: 8π².
pub const MEASURE_ANGULAR: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Shared discretization for RstFunctions. Holds the coarse t-quadrature the
/// state lives on, a doubled "fine" quadrature on which products of states
/// are band-limited, the prolongation between them, and the multipole
/// expansion of the interparticle kernel on the fine nodes.
#[derive(Debug)]
pub struct RstSpace {
    grid: Arc<RadialGrid>,
    tq: Arc<TQuadrature>,
    fine: Arc<TQuadrature>,
    /// (2m × m), fine values of the degree-(m-1) interpolant
    prolong: Vec<f64>,
    /// lazily built kernel table Σ_k K_k(r_i, s_j) P_k(τ), (n² × 2m)
    kernel: OnceLock<Vec<f64>>,
}

/// Above this table size the repulsion kernel is recomputed row-wise instead
/// of cached (keeps very large grids usable).
const KERNEL_TABLE_MAX: usize = 24_000_000;

impl RstSpace {
    pub fn build(grid: Arc<RadialGrid>, tq: Arc<TQuadrature>) -> Result<Arc<Self>, GridError> {
        let m = tq.order();
        let fine = TQuadrature::build(2 * m)?;
        // prolong = P_fine · analysis: exact on the degree-(m-1) interpolant
        let mut prolong = vec![0.0; 2 * m * m];
        for k in 0..m {
            let scale = (2.0 * k as f64 + 1.0) / 2.0;
            let p_fine = fine.p_row(k);
            let p_coarse = tq.p_row(k);
            for tau in 0..2 * m {
                for c in 0..m {
                    prolong[tau * m + c] += p_fine[tau] * scale * tq.weights()[c] * p_coarse[c];
                }
            }
        }
        Ok(Arc::new(Self {
            grid,
            tq,
            fine,
            prolong,
            kernel: OnceLock::new(),
        }))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn tq(&self) -> &Arc<TQuadrature> {
        &self.tq
    }

    pub fn fine(&self) -> &Arc<TQuadrature> {
        &self.fine
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn m(&self) -> usize {
        self.tq.order()
    }

    pub fn len(&self) -> usize {
        self.n() * self.n() * self.m()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn compatible(&self, other: &RstSpace) -> bool {
        std::ptr::eq(self, other)
            || (self.grid.compatible(&other.grid) && self.tq.compatible(&other.tq))
    }

    #[inline]
    pub fn prolong_row(&self, tau: usize) -> &[f64] {
        let m = self.m();
        &self.prolong[tau * m..(tau + 1) * m]
    }

    /// Kernel values Σ_{k ≤ 2m-2} K_k(r_i, s_j) P_k(τ) on the fine t nodes.
    /// Contracting this against fine-node products integrates the exact
    /// Coulomb kernel against the t-interpolant of the product.
    pub fn kernel_row_into(&self, i: usize, j: usize, out: &mut [f64]) {
        if let Some(table) = self.kernel_table() {
            let mf = 2 * self.m();
            out.copy_from_slice(&table[(i * self.n() + j) * mf..(i * self.n() + j + 1) * mf]);
            return;
        }
        self.compute_kernel_row(i, j, out);
    }

    fn compute_kernel_row(&self, i: usize, j: usize, out: &mut [f64]) {
        let r = self.grid.nodes()[i];
        let s = self.grid.nodes()[j];
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        let q = lo / hi;
        let kmax = 2 * self.m() - 2;
        for (tau, o) in out.iter_mut().enumerate() {
            let t = self.fine.nodes()[tau];
            // Σ_k q^k P_k(t) / hi by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = t;
            let mut acc = p0 + q * p1;
            let mut qk = q;
            for k in 2..=kmax {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                qk *= q;
                acc += qk * p2;
                p0 = p1;
                p1 = p2;
            }
            *o = acc / hi;
        }
    }

    fn kernel_table(&self) -> Option<&Vec<f64>> {
        let n = self.n();
        let mf = 2 * self.m();
        if n * n * mf > KERNEL_TABLE_MAX {
            return None;
        }
        Some(self.kernel.get_or_init(|| {
            let mut table = vec![0.0; n * n * mf];
            table
                .par_chunks_mut(n * mf)
                .enumerate()
                .for_each(|(i, slab)| {
                    for j in 0..n {
                        let mut row = vec![0.0; mf];
                        self.compute_kernel_row(i, j, &mut row);
                        slab[j * mf..(j + 1) * mf].copy_from_slice(&row);
                    }
                });
            table
        }))
    }
}

/// Rotation-invariant two-body state u(r_i, s_j, t_k), stored row-major with
/// t fastest. Physical states are permutation symmetric: u[i,j,k] = u[j,i,k].
#[derive(Debug, Clone)]
pub struct RstFunction {
    space: Arc<RstSpace>,
    values: Vec<f64>,
}

impl RstFunction {
    pub fn new(space: Arc<RstSpace>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), space.len());
        Self { space, values }
    }

    pub fn zeros(space: Arc<RstSpace>) -> Self {
        let len = space.len();
        Self::new(space, vec![0.0; len])
    }

    pub fn from_fn(space: Arc<RstSpace>, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = space.n();
        let m = space.m();
        let mut values = vec![0.0; space.len()];
        for i in 0..n {
            let r = space.grid().nodes()[i];
            for j in 0..n {
                let s = space.grid().nodes()[j];
                for k in 0..m {
                    values[(i * n + j) * m + k] = f(r, s, space.tq().nodes()[k]);
                }
            }
        }
        Self::new(space, values)
    }

    /// Product state g(r) h(s), symmetrized, t-independent.
    pub fn symmetric_product(space: Arc<RstSpace>, g: &[f64], h: &[f64]) -> Self {
        let n = space.n();
        let m = space.m();
        assert_eq!(g.len(), n);
        assert_eq!(h.len(), n);
        let mut values = vec![0.0; space.len()];
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for j in 0..n {
                let v = if std::ptr::eq(g, h) {
                    g[i] * h[j]
                } else {
                    (g[i] * h[j] + h[i] * g[j]) * inv_sqrt2
                };
                for k in 0..m {
                    values[(i * n + j) * m + k] = v;
                }
            }
        }
        Self::new(space, values)
    }

    pub fn space(&self) -> &Arc<RstSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.space.n() + j) * self.space.m() + k]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest deviation from permutation symmetry, relative to the sup norm.
    pub fn asymmetry(&self) -> f64 {
        let n = self.space.n();
        let m = self.space.m();
        let sup = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if sup == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                for k in 0..m {
                    let d = (self.values[(i * n + j) * m + k] - self.values[(j * n + i) * m + k])
                        .abs();
                    worst = worst.max(d);
                }
            }
        }
        worst / sup
    }

    /// ⟨u, v⟩ with the 8π² r² s² measure.
    pub fn inner(&self, other: &RstFunction) -> f64 {
        debug_assert!(self.space.compatible(&other.space));
        let n = self.space.n();
        let m = self.space.m();
        let w = self.space.grid().weights();
        let v = self.space.tq().weights();
        let partial: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    let base = (i * n + j) * m;
                    let mut tj = 0.0;
                    for k in 0..m {
                        tj += v[k] * self.values[base + k] * other.values[base + k];
                    }
                    acc += w[j] * tj;
                }
                acc * w[i]
            })
            .collect();
        MEASURE_ANGULAR * partial.iter().sum::<f64>()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n);
        }
        n
    }

    pub fn axpy(&mut self, a: f64, other: &RstFunction) {
        self.values
            .iter_mut()
            .zip(other.values.iter())
            .for_each(|(x, y)| *x += a * y);
    }

    /// Legendre coefficients c_k(i, j) of the t-profile, k = 0..k_max,
    /// stored as [(i*n + j)*(k_max+1) + k].
    pub fn legendre_coeffs(&self, k_max: usize) -> Result<Vec<f64>, GridError> {
        let n = self.space.n();
        let m = self.space.m();
        if k_max >= m {
            return Err(GridError::Aliasing { k_max, m });
        }
        let tq = self.space.tq();
        let mut out = vec![0.0; n * n * (k_max + 1)];
        out.par_chunks_mut(n * (k_max + 1))
            .enumerate()
            .for_each(|(i, slab)| {
                for j in 0..n {
                    let base = (i * n + j) * m;
                    let c = legendre_analyze(&self.values[base..base + m], tq, k_max).unwrap();
                    slab[j * (k_max + 1)..(j + 1) * (k_max + 1)].copy_from_slice(&c);
                }
            });
        Ok(out)
    }
}

/// One-body density ρ(r_i) of a permutation-symmetric state; total charge
/// 4π ∫ ρ r² dr equals 2 ‖u‖².
pub fn density_rst(u: &RstFunction) -> Result<RadialFunction, GridError> {
    if u.asymmetry() > 1e-10 {
        return Err(GridError::GridMismatch);
    }
    Ok(density_rst_unchecked(u))
}

pub(crate) fn density_rst_unchecked(u: &RstFunction) -> RadialFunction {
    let n = u.space().n();
    let m = u.space().m();
    let w = u.space().grid().weights();
    let v = u.space().tq().weights();
    // both particle orderings contribute, so asymmetric states still get
    // the physical one-body density
    let rho: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                let b1 = (i * n + j) * m;
                let b2 = (j * n + i) * m;
                let mut tj = 0.0;
                for k in 0..m {
                    let x = u.values()[b1 + k];
                    let y = u.values()[b2 + k];
                    tj += v[k] * (x * x + y * y);
                }
                acc += w[j] * tj;
            }
            2.0 * std::f64::consts::PI * acc
        })
        .collect();
    RadialFunction::new(u.space().grid().clone(), rho)
}

pub(crate) fn self_consistent_potential(u: &RstFunction) -> Result<RadialPotential, CoulombError> {
    poisson_potential(&density_rst_unchecked(u))
}

/// Smooth seeded random state: symmetric, positive-density by construction,
/// band-limited in t, normalized. Used by property suites and the CLI
/// rearrangement check.
pub fn random_state(space: &Arc<RstSpace>, seed: u64, k_band: usize) -> RstFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.n();
    let m = space.m();
    let k_band = k_band.min(m - 1);
    let n_radial = 4;
    // random symmetric coefficient tensor over (a, b, k) radial/angular modes
    let mut coef = vec![0.0; n_radial * n_radial * (k_band + 1)];
    for a in 0..n_radial {
        for b in 0..=a {
            for k in 0..=k_band {
                let c: f64 = rng.gen_range(-1.0..1.0);
                coef[(a * n_radial + b) * (k_band + 1) + k] = c;
                coef[(b * n_radial + a) * (k_band + 1) + k] = c;
            }
        }
    }
    let profile = |a: usize, r: f64| -> f64 {
        let alpha = 0.6 + 0.35 * a as f64;
        r.powi(a as i32 % 2) * (-alpha * r).exp()
    };
    let grid = space.grid().clone();
    let radial: Vec<Vec<f64>> = (0..n_radial)
        .map(|a| grid.nodes().iter().map(|&r| profile(a, r)).collect())
        .collect();
    let mut values = vec![0.0; space.len()];
    let mut pk = vec![0.0; m];
    for k in 0..=k_band {
        pk[k] = 1.0;
    }
    for i in 0..n {
        for j in 0..n {
            let base = (i * n + j) * m;
            for k_node in 0..m {
                let t = space.tq().nodes()[k_node];
                let mut pvals = vec![0.0; k_band + 1];
                crate::grid::legendre_values(k_band, t, &mut pvals);
                let mut acc = 0.0;
                for a in 0..n_radial {
                    for b in 0..n_radial {
                        let ra = radial[a][i] * radial[b][j];
                        for k in 0..=k_band {
                            acc += coef[(a * n_radial + b) * (k_band + 1) + k]
                                * ra
                                * pvals[k]
                                / (1.0 + k as f64).powi(2);
                        }
                    }
                }
                values[base + k_node] = acc;
            }
        }
    }
    let mut u = RstFunction::new(space.clone(), values);
    u.normalize();
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mapping;

    pub(crate) fn small_space() -> Arc<RstSpace> {
        let grid = RadialGrid::build(48, 25.0, Mapping::exponential()).unwrap();
        let tq = TQuadrature::build(12).unwrap();
        RstSpace::build(grid, tq).unwrap()
    }

    #[test]
    fn product_state_norm_and_density() {
        let space = small_space();
        let grid = space.grid().clone();
        let f = RadialFunction::from_fn(grid.clone(), |r| (-r).exp());
        let nrm = f.norm3d();
        let fv: Vec<f64> = f.values().iter().map(|v| v / nrm).collect();
        let u = RstFunction::symmetric_product(space.clone(), &fv, &fv);
        assert!((u.norm_sq() - 1.0).abs() < 1e-10);

        let rho = density_rst(&u).unwrap();
        let total = 4.0 * std::f64::consts::PI * grid.integrate(rho.values());
        assert!((total - 2.0).abs() < 1e-9);
        // ρ = 2 f² for a normalized product state
        for i in 0..grid.n() {
            assert!((rho.values()[i] - 2.0 * fv[i] * fv[i]).abs() < 1e-10);
        }

        let z = RstFunction::zeros(space);
        let rho0 = density_rst(&z).unwrap();
        assert!(rho0.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn density_rejects_asymmetric_states() {
        let space = small_space();
        let mut u = random_state(&space, 7, 4);
        let m = space.m();
        let n = space.n();
        u.values_mut()[(3 * n + 5) * m] += 0.5;
        assert!(density_rst(&u).is_err());
    }

    #[test]
    fn random_states_are_symmetric_and_normalized() {
        let space = small_space();
        for seed in 0..5 {
            let u = random_state(&space, seed, 5);
            assert!(u.asymmetry() < 1e-12);
            assert!((u.norm_sq() - 1.0).abs() < 1e-12);
            assert!(u.is_finite());
        }
    }

    #[test]
    fn kernel_row_matches_closed_form_off_diagonal() {
        let space = small_space();
        let n = space.n();
        let mf = 2 * space.m();
        // pick well separated radii: truncated multipole sum converges fast
        let i = 10;
        let j = 40;
        let r = space.grid().nodes()[i];
        let s = space.grid().nodes()[j];
        let mut row = vec![0.0; mf];
        space.kernel_row_into(i, j, &mut row);
        for (tau, &t) in space.fine().nodes().iter().enumerate() {
            let exact = 1.0 / (r * r + s * s - 2.0 * r * s * t).sqrt();
            assert!(
                (row[tau] - exact).abs() < 1e-10 * exact,
                "tau={tau}: {} vs {exact}",
                row[tau]
            );
        }
        let _ = n;
    }
}
