//! Finite-difference machinery on arbitrary node sets: Fornberg stencil
//! weights, banded derivative operators, and interval-wise cumulative
//! integration used by the Newton-potential prefix sums.

/// Width of the local stencils. Seven nodes give sixth-order interior
/// derivatives, comfortably above the fourth-order floor the radial
/// operators need.
pub const STENCIL: usize = 7;

/// Fornberg weights for the `order`-th derivative at evaluation point `z`
/// from the nodes `x`. Returns one weight per node.
pub fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > order, "need more nodes than the derivative order");
    let m = order;
    // c[node][k] holds the weight of node for the k-th derivative.
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Banded operator with a fixed stencil width per row. Row `i` acts on
/// entries `start[i] .. start[i] + STENCIL`.
#[derive(Debug, Clone)]
pub struct Banded {
    pub n: usize,
    starts: Vec<usize>,
    rows: Vec<[f64; STENCIL]>,
}

impl Banded {
    /// First-derivative operator on the given nodes (seven-point stencils,
    /// one-sided near the ends).
    pub fn derivative(nodes: &[f64]) -> Self {
        let n = nodes.len();
        assert!(n >= STENCIL, "need at least {STENCIL} nodes");
        let mut starts = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let start = i
                .saturating_sub(STENCIL / 2)
                .min(n - STENCIL);
            let w = fornberg_weights(nodes[i], &nodes[start..start + STENCIL], 1);
            let mut row = [0.0; STENCIL];
            row.copy_from_slice(&w);
            starts.push(start);
            rows.push(row);
        }
        Self { n, starts, rows }
    }

    /// Sector-aware radial derivative: near the origin the stencils extend
    /// through r = 0 onto mirrored nodes with g(-r) = ±g(r) (even sectors
    /// fold with +, odd with −), and near r_end a ghost node carries the
    /// Dirichlet value 0. Interior rows are untouched. This keeps pointwise
    /// consistency of composed operators at both ends.
    pub fn derivative_radial(nodes: &[f64], r_end: f64, odd: bool) -> Self {
        Self::radial_stencils(nodes, r_end, odd, 1)
    }

    /// As `derivative_radial` for an arbitrary derivative order.
    pub fn radial_stencils(nodes: &[f64], r_end: f64, odd: bool, order: usize) -> Self {
        let n = nodes.len();
        assert!(n >= STENCIL, "need at least {STENCIL} nodes");
        const MIRROR: usize = 5;
        let mut ext = Vec::with_capacity(n + MIRROR + 1);
        for p in 0..MIRROR {
            ext.push(-nodes[MIRROR - 1 - p]);
        }
        ext.extend_from_slice(nodes);
        ext.push(r_end);
        let sign = if odd { -1.0 } else { 1.0 };
        let mut starts = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        let mut folded = vec![0.0; n];
        for i in 0..n {
            let ei = i + MIRROR;
            let ws = (ei - STENCIL / 2).min(ext.len() - STENCIL);
            let w = fornberg_weights(nodes[i], &ext[ws..ws + STENCIL], order);
            folded.iter_mut().for_each(|v| *v = 0.0);
            let mut lo = n;
            let mut hi = 0;
            for (k, &wk) in w.iter().enumerate() {
                let p = ws + k;
                if p == n + MIRROR {
                    continue; // ghost carries 0
                }
                let (j, c) = if p < MIRROR {
                    (MIRROR - 1 - p, sign * wk)
                } else {
                    (p - MIRROR, wk)
                };
                folded[j] += c;
                lo = lo.min(j);
                hi = hi.max(j);
            }
            debug_assert!(hi - lo < STENCIL);
            let start = lo.min(n - STENCIL);
            let mut row = [0.0; STENCIL];
            for k in 0..STENCIL {
                row[k] = folded[start + k];
            }
            starts.push(start);
            rows.push(row);
        }
        Self { n, starts, rows }
    }

    /// Derivative operator for functions vanishing at `r_end`: rows near the
    /// right end use a stencil that includes r_end as a ghost node carrying
    /// the value 0, which imposes the Dirichlet condition variationally.
    pub fn derivative_dirichlet(nodes: &[f64], r_end: f64) -> Self {
        let n = nodes.len();
        assert!(n >= STENCIL, "need at least {STENCIL} nodes");
        let mut ext = nodes.to_vec();
        ext.push(r_end);
        let mut starts = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let start = i
                .saturating_sub(STENCIL / 2)
                .min(n + 1 - STENCIL);
            let w = fornberg_weights(nodes[i], &ext[start..start + STENCIL], 1);
            let mut row = [0.0; STENCIL];
            if start + STENCIL > n {
                // window includes the ghost: shift into the last real slots
                // and drop the ghost coefficient (its value is 0)
                row[0] = 0.0;
                row[1..STENCIL].copy_from_slice(&w[..STENCIL - 1]);
                starts.push(start - 1);
            } else {
                row.copy_from_slice(&w);
                starts.push(start);
            }
            rows.push(row);
        }
        Self { n, starts, rows }
    }

    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let s = self.starts[i];
            let row = &self.rows[i];
            let mut acc = 0.0;
            for k in 0..STENCIL {
                acc += row[k] * x[s + k];
            }
            out[i] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_into(x, &mut out);
        out
    }

    /// Scatter-style transpose application: out += Dᵀ z.
    #[inline]
    pub fn apply_transpose_add(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let s = self.starts[i];
            let row = &self.rows[i];
            let zi = z[i];
            for k in 0..STENCIL {
                out[s + k] += row[k] * zi;
            }
        }
    }

    /// Apply along the first axis of an (n × plane) array.
    pub fn apply_axis0(&self, x: &[f64], plane: usize, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n * plane);
        debug_assert_eq!(out.len(), self.n * plane);
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let s = self.starts[i];
            let row = &self.rows[i];
            let dst = &mut out[i * plane..(i + 1) * plane];
            for k in 0..STENCIL {
                let c = row[k];
                let src = &x[(s + k) * plane..(s + k + 1) * plane];
                for (d, v) in dst.iter_mut().zip(src.iter()) {
                    *d += c * v;
                }
            }
        }
    }

    /// out += Dᵀ z along the first axis of an (n × plane) array.
    pub fn apply_transpose_add_axis0(&self, z: &[f64], plane: usize, out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.n * plane);
        debug_assert_eq!(out.len(), self.n * plane);
        for i in 0..self.n {
            let s = self.starts[i];
            let row = &self.rows[i];
            let src = &z[i * plane..(i + 1) * plane];
            for k in 0..STENCIL {
                let c = row[k];
                let dst = &mut out[(s + k) * plane..(s + k + 1) * plane];
                for (d, v) in dst.iter_mut().zip(src.iter()) {
                    *d += c * v;
                }
            }
        }
    }

    /// Row accessor: (start, coefficients).
    pub fn row(&self, i: usize) -> (usize, &[f64; STENCIL]) {
        (self.starts[i], &self.rows[i])
    }

    /// Dense copy of the operator, row-major n×n.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let s = self.starts[i];
            for k in 0..STENCIL {
                dense[i * self.n + s + k] = self.rows[i][k];
            }
        }
        dense
    }
}

/// Symmetric positive-definite band matrix stored by diagonals (lower part),
/// with a Cholesky factorization for repeated solves. Bandwidth here means
/// the number of sub-diagonals.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // factor[d][i] = L[i+d, i] for d = 0..=bw
    factor: Vec<Vec<f64>>,
}

impl BandedCholesky {
    /// Factor a symmetric band matrix given by `diag[d][i] = A[i+d, i]`.
    /// Returns None if the matrix is not positive definite.
    pub fn factor(n: usize, bw: usize, diag: &[Vec<f64>]) -> Option<Self> {
        assert_eq!(diag.len(), bw + 1);
        let mut l: Vec<Vec<f64>> = (0..=bw).map(|d| vec![0.0; n.saturating_sub(d)]).collect();
        for j in 0..n {
            let mut sum = diag[0][j];
            let kmin = j.saturating_sub(bw);
            for k in kmin..j {
                let d = j - k;
                sum -= l[d][k] * l[d][k];
            }
            if sum <= 0.0 || !sum.is_finite() {
                return None;
            }
            let ljj = sum.sqrt();
            l[0][j] = ljj;
            let imax = (j + bw).min(n - 1);
            for i in j + 1..=imax {
                let mut s = diag[i - j][j];
                let kmin = i.saturating_sub(bw).max(0);
                for k in kmin..j {
                    let di = i - k;
                    let dj = j - k;
                    if di <= bw {
                        s -= l[di][k] * l[dj][k];
                    }
                }
                l[i - j][j] = s / ljj;
            }
        }
        Some(Self { n, bw, factor: l })
    }

    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        out.copy_from_slice(b);
        // forward: L y = b
        for i in 0..self.n {
            let kmin = i.saturating_sub(self.bw);
            let mut s = out[i];
            for k in kmin..i {
                s -= self.factor[i - k][k] * out[k];
            }
            out[i] = s / self.factor[0][i];
        }
        // backward: Lᵀ x = y
        for i in (0..self.n).rev() {
            let imax = (i + self.bw).min(self.n - 1);
            let mut s = out[i];
            for k in i + 1..=imax {
                s -= self.factor[k - i][i] * out[k];
            }
            out[i] = s / self.factor[0][i];
        }
    }
}

/// General banded LU with partial pivoting (LAPACK gbtrf layout): for a
/// matrix with kl sub- and ku super-diagonals, stored with fill-in space.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// (2kl + ku + 1) × n, column-major bands: ab[(kl + ku + i - j) + j*ldab]
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factor a banded matrix given as closures over (i, j) within the band.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entry: impl Fn(usize, usize) -> f64,
    ) -> Option<Self> {
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[(kl + ku + i - j) + j * ldab] = entry(i, j);
            }
        }
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            // pivot search in column k among rows k..=min(k+kl, n-1)
            let hi = (k + kl).min(n - 1);
            let mut p = k;
            let mut pmax = ab[(kl + ku) + k * ldab].abs();
            for i in k + 1..=hi {
                let v = ab[(kl + ku + i - k) + k * ldab].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 || !pmax.is_finite() {
                return None;
            }
            pivots[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = (kl + ku + k).wrapping_sub(j) + j * ldab;
                    let b = (kl + ku + p).wrapping_sub(j) + j * ldab;
                    ab.swap(a, b);
                }
            }
            let piv = ab[(kl + ku) + k * ldab];
            for i in k + 1..=hi {
                let idx = (kl + ku + i - k) + k * ldab;
                let m = ab[idx] / piv;
                ab[idx] = m;
                for j in k + 1..=jmax {
                    let src = (kl + ku + k).wrapping_sub(j) + j * ldab;
                    let dst = (kl + ku + i).wrapping_sub(j) + j * ldab;
                    let u = ab[src];
                    if u != 0.0 {
                        ab[dst] -= m * u;
                    }
                }
            }
        }
        Some(Self {
            n,
            kl,
            ku,
            ab,
            pivots,
        })
    }

    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = 2 * kl + ku + 1;
        out.copy_from_slice(b);
        // forward with pivoting
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                out.swap(k, p);
            }
            let hi = (k + kl).min(n - 1);
            let xk = out[k];
            for i in k + 1..=hi {
                out[i] -= self.ab[(kl + ku + i - k) + k * ldab] * xk;
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let lo = k.saturating_sub(kl + ku);
            let xk = out[k] / self.ab[(kl + ku) + k * ldab];
            out[k] = xk;
            for i in lo..k {
                out[i] -= self.ab[(kl + ku + i).wrapping_sub(k) + k * ldab] * xk;
            }
        }
    }
}

/// Interval-wise cumulative integrator: prefix integrals ∫₀^{r_i} g(s) ds of
/// the local degree-six interpolant of nodal values, plus the tail piece up
/// to `r_max`. Increments are exactly local, so prefix values are constant
/// beyond the support of `g`.
#[derive(Debug, Clone)]
pub struct CumulativeIntegrator {
    n: usize,
    starts: Vec<usize>,
    // one coefficient row per interval: [0,r_0], [r_0,r_1], .., [r_{n-1}, r_max]
    rows: Vec<[f64; STENCIL]>,
}

impl CumulativeIntegrator {
    pub fn build(nodes: &[f64], r_max: f64) -> Self {
        let n = nodes.len();
        assert!(n >= STENCIL);
        // 4-point Gauss rule is exact through degree 7 on each interval
        let (gx, gw) = gauss_legendre(4);
        let mut starts = Vec::with_capacity(n + 1);
        let mut rows = Vec::with_capacity(n + 1);
        for iv in 0..=n {
            let (a, b) = if iv == 0 {
                (0.0, nodes[0])
            } else if iv < n {
                (nodes[iv - 1], nodes[iv])
            } else {
                (nodes[n - 1], r_max)
            };
            let base = iv.saturating_sub(STENCIL / 2 + 1).min(n - STENCIL);
            let window = &nodes[base..base + STENCIL];
            let mut row = [0.0; STENCIL];
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in gx.iter().zip(gw.iter()) {
                let p = mid + half * x;
                for k in 0..STENCIL {
                    row[k] += w * half * lagrange_basis(window, k, p);
                }
            }
            starts.push(base);
            rows.push(row);
        }
        Self { n, starts, rows }
    }

    /// Contract interval coefficients against per-interval factors:
    /// out_j += Σ_{iv, k : start_iv + k = j} rows_iv[k] · coef_iv,
    /// the adjoint scatter of the prefix map (`coef` has n + 1 entries).
    pub fn scatter_rows(&self, coef: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coef.len(), self.n + 1);
        debug_assert_eq!(out.len(), self.n);
        for iv in 0..=self.n {
            let c = coef[iv];
            if c == 0.0 {
                continue;
            }
            let s = self.starts[iv];
            let row = &self.rows[iv];
            for k in 0..STENCIL {
                out[s + k] += row[k] * c;
            }
        }
    }

    /// Per-interval integrals of the interpolant of `g` (n + 1 of them).
    pub fn increments(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.n);
        (0..=self.n)
            .map(|iv| {
                let s = self.starts[iv];
                let row = &self.rows[iv];
                let mut inc = 0.0;
                for k in 0..STENCIL {
                    inc += row[k] * g[s + k];
                }
                inc
            })
            .collect()
    }

    /// Prefix values at the nodes and the full-domain total.
    pub fn prefix(&self, g: &[f64]) -> (Vec<f64>, f64) {
        let inc = self.increments(g);
        let mut acc = 0.0;
        let mut out = vec![0.0; self.n];
        for iv in 0..self.n {
            acc += inc[iv];
            out[iv] = acc;
        }
        (out, acc + inc[self.n])
    }

    /// Prefix ∫₀^{r_i} and suffix ∫_{r_i}^{r_max}, each accumulated in its
    /// own direction so neither suffers cancellation, plus the total.
    pub fn prefix_suffix(&self, g: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let inc = self.increments(g);
        let mut prefix = vec![0.0; self.n];
        let mut acc = 0.0;
        for iv in 0..self.n {
            acc += inc[iv];
            prefix[iv] = acc;
        }
        let mut suffix = vec![0.0; self.n];
        let mut tail = inc[self.n];
        for i in (0..self.n).rev() {
            suffix[i] = tail;
            tail += inc[i];
        }
        (prefix, suffix, tail)
    }
}

fn lagrange_basis(nodes: &[f64], k: usize, x: f64) -> f64 {
    let mut p = 1.0;
    for (j, &xj) in nodes.iter().enumerate() {
        if j != k {
            p *= (x - xj) / (nodes[k] - xj);
        }
    }
    p
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Legendre polynomial values P_0..P_kmax at x.
pub fn legendre_values(kmax: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() > kmax);
    out[0] = 1.0;
    if kmax == 0 {
        return;
    }
    out[1] = x;
    for k in 2..=kmax {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_uniform_central_weights() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg_weights(0.0, &x, 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn derivative_is_sixth_order_on_smooth_function() {
        let err = |n: usize| {
            let nodes: Vec<f64> = (0..n).map(|i| 0.1 + 2.0 * i as f64 / (n - 1) as f64).collect();
            let d = Banded::derivative(&nodes);
            let f: Vec<f64> = nodes.iter().map(|r| (-r).exp() * r.sin()).collect();
            let df = d.apply(&f);
            nodes
                .iter()
                .zip(df.iter())
                .map(|(r, v)| {
                    let exact = (-r).exp() * (r.cos() - r.sin());
                    (v - exact).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let e1 = err(41);
        let e2 = err(81);
        // order p means error ratio ~ 2^p; demand comfortably above 4th order
        assert!(e1 / e2 > 2f64.powi(5), "ratio {}", e1 / e2);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 15 monomial has exact integral 2/16? x^14: 2/15
        let t: f64 = x.iter().zip(w.iter()).map(|(x, w)| w * x.powi(14)).sum();
        assert!((t - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_integrator_is_exact_on_low_degree_and_local() {
        let (gx, gw) = gauss_legendre(24);
        let nodes: Vec<f64> = gx.iter().map(|x| 2.0 * (x + 1.0) / 2.0).collect();
        let _ = gw;
        let ci = CumulativeIntegrator::build(&nodes, 2.0);
        let g: Vec<f64> = nodes.iter().map(|r| r * r * r).collect();
        let (prefix, total) = ci.prefix(&g);
        for (i, r) in nodes.iter().enumerate() {
            assert!((prefix[i] - r.powi(4) / 4.0).abs() < 1e-12);
        }
        assert!((total - 4.0).abs() < 1e-12);
        // locality: zero tail stays identical beyond support
        let h: Vec<f64> = nodes.iter().map(|r| if *r < 0.5 { 1.0 } else { 0.0 }).collect();
        let (p, tot) = ci.prefix(&h);
        let last = *p.last().unwrap();
        assert_eq!(last, tot);
    }

    #[test]
    fn banded_lu_matches_dense_solve() {
        let n = 20;
        let (kl, ku) = (3, 2);
        let entry = |i: usize, j: usize| -> f64 {
            let d = i as isize - j as isize;
            if d == 0 {
                2.0 + (i as f64 * 0.37).sin() * 0.5
            } else if (-(ku as isize)..=kl as isize).contains(&d) {
                0.8 / (1.0 + (d * d) as f64) * ((i + 2 * j) as f64 * 0.61).cos()
            } else {
                0.0
            }
        };
        let lu = BandedLu::factor(n, kl, ku, entry).unwrap();
        let b: Vec<f64> = (0..n).map(|i| ((i * i) as f64 * 0.13).sin()).collect();
        let mut x = vec![0.0; n];
        lu.solve_into(&b, &mut x);
        // residual against the dense matrix
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += entry(i, j) * x[j];
            }
            assert!((acc - b[i]).abs() < 1e-11, "row {i}: {acc} vs {}", b[i]);
        }
    }

    #[test]
    fn banded_cholesky_solves_spd_system() {
        let n = 12;
        let bw = 2;
        // diag-dominant test band
        let mut diag = vec![vec![0.0; n], vec![0.0; n - 1], vec![0.0; n - 2]];
        for i in 0..n {
            diag[0][i] = 4.0 + i as f64 * 0.1;
        }
        for i in 0..n - 1 {
            diag[1][i] = -1.0;
        }
        for i in 0..n - 2 {
            diag[2][i] = 0.3;
        }
        let ch = BandedCholesky::factor(n, bw, &diag).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut x = vec![0.0; n];
        ch.solve_into(&b, &mut x);
        // verify A x = b
        for i in 0..n {
            let mut s = diag[0][i] * x[i];
            if i >= 1 {
                s += diag[1][i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += diag[1][i] * x[i + 1];
            }
            if i >= 2 {
                s += diag[2][i - 2] * x[i - 2];
            }
            if i + 2 < n {
                s += diag[2][i] * x[i + 2];
            }
            assert!((s - b[i]).abs() < 1e-11);
        }
    }
}
