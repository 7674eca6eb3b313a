//! Radial and angular discretizations shared by every solver: a radial
//! quadrature grid on (0, r_max] with the r² dr measure, Gauss–Legendre
//! quadrature in the angle variable t ∈ [-1, 1], and Legendre transforms.

mod fd;

pub use fd::{gauss_legendre, legendre_values, Banded, BandedCholesky, BandedLu, CumulativeIntegrator};

use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("node count {n} is below the minimum of {min}")]
    TooFewNodes { n: usize, min: usize },
    #[error("r_max must be positive and finite, got {value}")]
    BadRadius { value: f64 },
    #[error("mapping parameter sigma must be positive and finite, got {value}")]
    BadSigma { value: f64 },
    #[error("quadrature order {m} is below the minimum of {min}")]
    QuadratureOrderTooSmall { m: usize, min: usize },
    #[error("degree {k_max} would alias on a quadrature of order {m}")]
    Aliasing { k_max: usize, m: usize },
    #[error("operands live on different grids")]
    GridMismatch,
}

/// Node placement rule for the radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Mapping {
    /// Gauss nodes mapped linearly onto (0, r_max].
    Uniform,
    /// r(x) = r_max (e^{σx} - 1)/(e^σ - 1): clusters nodes near the origin.
    Exponential { sigma: f64 },
}

impl Mapping {
    pub fn exponential() -> Self {
        Mapping::Exponential { sigma: 4.0 }
    }
}

/// Radial quadrature grid: nodes r_i ∈ (0, r_max], weights w_i such that
/// Σ w_i g(r_i) ≈ ∫₀^{r_max} g(r) r² dr, a banded first-derivative operator
/// and an interval-wise cumulative integrator on the same nodes.
#[derive(Debug)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
    mapping: Mapping,
    deriv: Banded,
    deriv_bc: Banded,
    deriv_even: Banded,
    deriv_odd: Banded,
    second_even: Banded,
    second_odd: Banded,
    cumint: CumulativeIntegrator,
}

pub const MIN_RADIAL_NODES: usize = 8;

impl RadialGrid {
    pub fn build(n: usize, r_max: f64, mapping: Mapping) -> Result<Arc<Self>, GridError> {
        if n < MIN_RADIAL_NODES {
            return Err(GridError::TooFewNodes {
                n,
                min: MIN_RADIAL_NODES,
            });
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(GridError::BadRadius { value: r_max });
        }
        if let Mapping::Exponential { sigma } = mapping {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(GridError::BadSigma { value: sigma });
            }
        }
        let (gx, gw) = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (x, w) in gx.iter().zip(gw.iter()) {
            // map [-1,1] -> [0,1]
            let u = 0.5 * (x + 1.0);
            let wu = 0.5 * w;
            let (r, dr) = match mapping {
                Mapping::Uniform => (r_max * u, r_max),
                Mapping::Exponential { sigma } => {
                    let den = sigma.exp_m1();
                    let e = (sigma * u).exp();
                    (r_max * (e - 1.0) / den, r_max * sigma * e / den)
                }
            };
            nodes.push(r);
            weights.push(wu * dr * r * r);
        }
        // pin the measure total to the exact ∫ r² dr
        let total: f64 = weights.iter().sum();
        let scale = (r_max * r_max * r_max / 3.0) / total;
        for w in weights.iter_mut() {
            *w *= scale;
        }
        let deriv = Banded::derivative(&nodes);
        let deriv_bc = Banded::derivative_dirichlet(&nodes, r_max);
        let deriv_even = Banded::derivative_radial(&nodes, r_max, false);
        let deriv_odd = Banded::derivative_radial(&nodes, r_max, true);
        let second_even = Banded::radial_stencils(&nodes, r_max, false, 2);
        let second_odd = Banded::radial_stencils(&nodes, r_max, true, 2);
        let cumint = CumulativeIntegrator::build(&nodes, r_max);
        Ok(Arc::new(Self {
            nodes,
            weights,
            r_max,
            mapping,
            deriv,
            deriv_bc,
            deriv_even,
            deriv_odd,
            second_even,
            second_odd,
            cumint,
        }))
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn mapping(&self) -> Mapping {
        self.mapping
    }

    /// Derivative for arbitrary nodal data (no boundary condition).
    pub fn deriv(&self) -> &Banded {
        &self.deriv
    }

    /// Derivative for functions that vanish at r_max (the wave-function
    /// space); used by the two-body kinetic forms.
    pub fn deriv_bc(&self) -> &Banded {
        &self.deriv_bc
    }

    /// Sector derivative: parity-folded through the origin (g ~ r^l, so
    /// even sectors extend evenly, odd sectors oddly), Dirichlet at r_max.
    pub fn deriv_sector(&self, l: u32) -> &Banded {
        if l % 2 == 0 {
            &self.deriv_even
        } else {
            &self.deriv_odd
        }
    }

    pub fn cumint(&self) -> &CumulativeIntegrator {
        &self.cumint
    }

    /// Σ w_i g_i ≈ ∫ g r² dr.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(g.iter().zip(self.weights.iter()))
            .map(|(_, (g, w))| g * w)
            .sum()
    }

    /// Structural compatibility; functions on compatible grids may be mixed.
    pub fn compatible(&self, other: &RadialGrid) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        self.n() == other.n()
            && (self.r_max - other.r_max).abs() <= 1e-12 * self.r_max
            && self
                .nodes
                .iter()
                .zip(other.nodes.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-12 * self.r_max)
    }

    /// -Δ_l g at the nodes: M⁻¹ Dᵀ M D g + l(l+1)/r² g, self-adjoint in the
    /// w-weighted inner product, so (g, -Δ_l g) equals the kinetic form.
    pub fn neg_laplacian_into(&self, l: u32, g: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(g.len(), n);
        let d = self.deriv_sector(l);
        d.apply_into(g, scratch);
        for i in 0..n {
            scratch[i] *= self.weights[i];
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        d.apply_transpose_add(scratch, out);
        let ll = (l * (l + 1)) as f64;
        for i in 0..n {
            out[i] /= self.weights[i];
            if ll != 0.0 {
                out[i] += ll / (self.nodes[i] * self.nodes[i]) * g[i];
            }
        }
    }

    /// Strong-form sector Laplacian −g'' − (2/r) g' + l(l+1) g/r², pointwise
    /// consistent at every node (parity-folded stencils at the origin,
    /// Dirichlet ghost at r_max). Self-adjoint only up to discretization;
    /// used where pointwise operator values matter.
    pub fn strong_laplacian_into(&self, l: u32, g: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(g.len(), n);
        let odd = l % 2 == 1;
        let d2 = if odd { &self.second_odd } else { &self.second_even };
        d2.apply_into(g, out);
        self.deriv_sector(l).apply_into(g, scratch);
        let ll = (l * (l + 1)) as f64;
        for i in 0..n {
            let r = self.nodes[i];
            out[i] = -out[i] - 2.0 / r * scratch[i] + ll / (r * r) * g[i];
        }
    }

    /// ∫ (g'² + l(l+1) g²/r²) r² dr for g in the sector-l Dirichlet space.
    pub fn kinetic_form(&self, l: u32, g: &[f64]) -> f64 {
        let dg = self.deriv_sector(l).apply(g);
        let ll = (l * (l + 1)) as f64;
        let mut t = 0.0;
        for i in 0..self.n() {
            let mut v = dg[i] * dg[i];
            if ll != 0.0 {
                v += ll * g[i] * g[i] / (self.nodes[i] * self.nodes[i]);
            }
            t += self.weights[i] * v;
        }
        t
    }

    /// Value of the degree-six local interpolant of `values` at radius `r`.
    /// Returns 0 beyond r_max.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        if r > self.r_max {
            return 0.0;
        }
        let n = self.n();
        let idx = self.nodes.partition_point(|&x| x < r);
        let base = idx.saturating_sub(fd::STENCIL / 2).min(n - fd::STENCIL);
        let window = &self.nodes[base..base + fd::STENCIL];
        let mut acc = 0.0;
        for k in 0..fd::STENCIL {
            let mut p = 1.0;
            for (j, &xj) in window.iter().enumerate() {
                if j != k {
                    p *= (r - xj) / (window[k] - xj);
                }
            }
            acc += p * values[base + k];
        }
        acc
    }
}

/// One-particle radial profile on a grid, with an optional angular-momentum
/// label carried for bookkeeping.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    pub l: Option<u32>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n());
        Self {
            grid,
            values,
            l: None,
        }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        Self::new(grid, vec![0.0; n])
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// ∫ f² r² dr (no angular factor).
    pub fn norm_sq_r2(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter())
            .map(|(w, v)| w * v * v)
            .sum()
    }

    /// Full L²(ℝ³) norm of the radial profile, 4π included.
    pub fn norm3d(&self) -> f64 {
        (4.0 * std::f64::consts::PI * self.norm_sq_r2()).sqrt()
    }
}

/// Σ w_i g_i h_i ≈ ∫ g h r² dr.
pub fn inner_radial(g: &RadialFunction, h: &RadialFunction) -> Result<f64, GridError> {
    if !g.grid().compatible(h.grid()) {
        return Err(GridError::GridMismatch);
    }
    Ok(g.grid()
        .weights()
        .iter()
        .zip(g.values().iter().zip(h.values().iter()))
        .map(|(w, (a, b))| w * a * b)
        .sum())
}

/// Full L²(ℝ³) inner product of radial profiles: 4π ∫ g h r² dr.
pub fn inner3d(g: &RadialFunction, h: &RadialFunction) -> Result<f64, GridError> {
    Ok(4.0 * std::f64::consts::PI * inner_radial(g, h)?)
}

pub const MIN_T_ORDER: usize = 4;

/// Gauss–Legendre quadrature on t ∈ [-1, 1] with cached Legendre tables.
#[derive(Debug)]
pub struct TQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    m: usize,
    /// ptable[k][j] = P_k(t_j), k = 0..m-1
    ptable: Vec<Vec<f64>>,
    /// dptable[k][j] = P'_k(t_j)
    dptable: Vec<Vec<f64>>,
}

impl TQuadrature {
    pub fn build(m: usize) -> Result<Arc<Self>, GridError> {
        if m < MIN_T_ORDER {
            return Err(GridError::QuadratureOrderTooSmall { m, min: MIN_T_ORDER });
        }
        let (nodes, weights) = gauss_legendre(m);
        let mut ptable = vec![vec![0.0; m]; m];
        let mut dptable = vec![vec![0.0; m]; m];
        let mut col = vec![0.0; m];
        for (j, &t) in nodes.iter().enumerate() {
            legendre_values(m - 1, t, &mut col);
            for k in 0..m {
                ptable[k][j] = col[k];
            }
            for k in 0..m {
                // (1 - t²) P'_k = k (P_{k-1} - t P_k)
                dptable[k][j] = if k == 0 {
                    0.0
                } else {
                    k as f64 * (col[k - 1] - t * col[k]) / (1.0 - t * t)
                };
            }
        }
        Ok(Arc::new(Self {
            nodes,
            weights,
            m,
            ptable,
            dptable,
        }))
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn p_row(&self, k: usize) -> &[f64] {
        &self.ptable[k]
    }

    pub fn dp_row(&self, k: usize) -> &[f64] {
        &self.dptable[k]
    }

    pub fn integrate(&self, g: &[f64]) -> f64 {
        self.weights.iter().zip(g.iter()).map(|(w, g)| w * g).sum()
    }

    pub fn compatible(&self, other: &TQuadrature) -> bool {
        std::ptr::eq(self, other) || self.m == other.m
    }
}

/// Legendre coefficients c_k = (2k+1)/2 Σ_j v_j u(t_j) P_k(t_j), k = 0..k_max.
pub fn legendre_analyze(u: &[f64], tq: &TQuadrature, k_max: usize) -> Result<Vec<f64>, GridError> {
    if k_max >= tq.order() {
        return Err(GridError::Aliasing {
            k_max,
            m: tq.order(),
        });
    }
    debug_assert_eq!(u.len(), tq.order());
    let mut c = vec![0.0; k_max + 1];
    for k in 0..=k_max {
        let p = tq.p_row(k);
        let mut acc = 0.0;
        for j in 0..tq.order() {
            acc += tq.weights()[j] * p[j] * u[j];
        }
        c[k] = (2.0 * k as f64 + 1.0) / 2.0 * acc;
    }
    Ok(c)
}

/// Values Σ_k c_k P_k(t_j) at the quadrature nodes.
pub fn legendre_synthesize(c: &[f64], tq: &TQuadrature) -> Vec<f64> {
    let m = tq.order();
    let mut u = vec![0.0; m];
    for (k, ck) in c.iter().enumerate() {
        let p = tq.p_row(k);
        for j in 0..m {
            u[j] += ck * p[j];
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arguments() {
        assert!(RadialGrid::build(4, 30.0, Mapping::exponential()).is_err());
        assert!(RadialGrid::build(64, -1.0, Mapping::exponential()).is_err());
        assert!(RadialGrid::build(64, 30.0, Mapping::Exponential { sigma: 0.0 }).is_err());
        assert!(TQuadrature::build(3).is_err());
    }

    #[test]
    fn exponential_grid_clusters_near_origin() {
        let g = RadialGrid::build(200, 30.0, Mapping::exponential()).unwrap();
        assert!(g.nodes()[0] < 0.1);
        assert!(*g.nodes().last().unwrap() <= 30.0);
        assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(g.nodes().iter().all(|&r| r > 0.0));
        assert!(g.weights().iter().all(|&w| w > 0.0 && w.is_finite()));
    }

    #[test]
    fn weight_total_matches_volume_integral() {
        for mapping in [Mapping::Uniform, Mapping::exponential()] {
            let g = RadialGrid::build(200, 3.0, mapping).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert!((total - 9.0).abs() < 1e-10, "total {total}");
        }
        // minimum size still pinned to the exact mass
        let g = RadialGrid::build(8, 3.0, Mapping::exponential()).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 9.0).abs() < 1e-12 * 9.0);
    }

    #[test]
    fn integrates_exponential_decay() {
        let g = RadialGrid::build(200, 40.0, Mapping::exponential()).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|r| (-2.0 * r).exp()).collect();
        // ∫₀^∞ r² e^{-2r} dr = 1/4
        assert!((g.integrate(&vals) - 0.25).abs() < 1e-8);
    }

    #[test]
    fn refinement_converges() {
        let value = |n: usize| {
            let g = RadialGrid::build(n, 25.0, Mapping::exponential()).unwrap();
            let vals: Vec<f64> = g.nodes().iter().map(|r| (-r).exp() * (1.0 + r)).collect();
            g.integrate(&vals)
        };
        let v1 = value(100);
        let v2 = value(200);
        assert!((v1 - v2).abs() < 1e-10);
    }

    #[test]
    fn t_quadrature_basics() {
        let q4 = TQuadrature::build(4).unwrap();
        let t2: f64 = q4
            .nodes()
            .iter()
            .zip(q4.weights().iter())
            .map(|(t, v)| v * t * t)
            .sum();
        assert!((t2 - 2.0 / 3.0).abs() < 1e-14);

        let q16 = TQuadrature::build(16).unwrap();
        let s: f64 = q16.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);

        // endpoint square-root singularity: plain Gauss converges at O(m⁻³)
        let half_circle = |m: usize| {
            let q = TQuadrature::build(m).unwrap();
            let v: f64 = q
                .nodes()
                .iter()
                .zip(q.weights().iter())
                .map(|(t, v)| v * (1.0 - t * t).sqrt())
                .sum();
            (v - std::f64::consts::PI / 2.0).abs()
        };
        assert!(half_circle(32) < 3e-5);
        assert!(half_circle(128) < 1e-6);
        assert!(half_circle(32) / half_circle(128) > 40.0);
    }

    #[test]
    fn legendre_analyze_matches_known_expansions() {
        let tq = TQuadrature::build(16).unwrap();
        let ones = vec![1.0; 16];
        let c = legendre_analyze(&ones, &tq, 5).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));

        let t: Vec<f64> = tq.nodes().to_vec();
        let c = legendre_analyze(&t, &tq, 5).unwrap();
        assert!((c[1] - 1.0).abs() < 1e-14);

        let t2: Vec<f64> = tq.nodes().iter().map(|t| t * t).collect();
        let c = legendre_analyze(&t2, &tq, 5).unwrap();
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((c[2] - 2.0 / 3.0).abs() < 1e-14);

        assert!(legendre_analyze(&t2, &tq, 16).is_err());
    }

    #[test]
    fn legendre_round_trip_on_band_limited_data() {
        let tq = TQuadrature::build(24).unwrap();
        let u: Vec<f64> = tq
            .nodes()
            .iter()
            .map(|t| 0.3 - 1.2 * t + 0.7 * t * t * t - 0.2 * t.powi(6))
            .collect();
        let c = legendre_analyze(&u, &tq, 10).unwrap();
        let back = legendre_synthesize(&c, &tq);
        for (a, b) in u.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn inner_radial_contract() {
        let g = RadialGrid::build(200, 40.0, Mapping::exponential()).unwrap();
        let z = RadialFunction::zeros(g.clone());
        assert_eq!(inner_radial(&z, &z).unwrap(), 0.0);

        let e = RadialFunction::from_fn(g.clone(), |r| (-r).exp());
        let v = inner_radial(&e, &e).unwrap();
        assert!((v - 0.25).abs() < 1e-8);

        let mut e2 = e.clone();
        for v in e2.values_mut() {
            *v *= 3.5;
        }
        let lhs = inner_radial(&e2, &e).unwrap();
        assert!((lhs - 3.5 * v).abs() < 1e-15 * lhs.abs().max(1.0));

        let other = RadialGrid::build(100, 40.0, Mapping::exponential()).unwrap();
        let h = RadialFunction::zeros(other);
        assert!(inner_radial(&e, &h).is_err());
    }

    #[test]
    fn laplacian_is_consistent_with_kinetic_form() {
        let g = RadialGrid::build(150, 30.0, Mapping::exponential()).unwrap();
        let f = RadialFunction::from_fn(g.clone(), |r| (-0.7 * r).exp());
        let mut out = vec![0.0; g.n()];
        let mut scratch = vec![0.0; g.n()];
        g.neg_laplacian_into(0, f.values(), &mut out, &mut scratch);
        let quad: f64 = g
            .weights()
            .iter()
            .zip(f.values().iter().zip(out.iter()))
            .map(|(w, (a, b))| w * a * b)
            .sum();
        let form = g.kinetic_form(0, f.values());
        assert!((quad - form).abs() < 1e-12 * form.abs());
    }

    #[test]
    fn interpolation_reproduces_smooth_profiles() {
        let g = RadialGrid::build(200, 30.0, Mapping::exponential()).unwrap();
        let f = RadialFunction::from_fn(g.clone(), |r| (-0.6 * r).exp() * (1.0 + 0.3 * r));
        for &r in &[0.05, 0.9, 3.7, 11.0, 24.0] {
            let exact = (-0.6f64 * r).exp() * (1.0 + 0.3 * r);
            assert!((g.interpolate(f.values(), r) - exact).abs() < 1e-9);
        }
        assert_eq!(g.interpolate(f.values(), 31.0), 0.0);
    }
}
