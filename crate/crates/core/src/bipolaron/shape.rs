//! Pointwise shaping operations on two-body states: permutation
//! symmetrization and the decreasing rearrangement in t at fixed radii.

use super::RstFunction;

/// ũ(r,s,t) = sqrt((u(r,s,t)² + u(s,r,t)²)/2). Leaves the norm, the density
/// and the repulsion unchanged; never increases the kinetic energy.
pub fn symmetrize(u: &RstFunction) -> RstFunction {
    let space = u.space().clone();
    let n = space.n();
    let m = space.m();
    let mut out = RstFunction::zeros(space);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                let a = u.values()[(i * n + j) * m + k];
                let b = u.values()[(j * n + i) * m + k];
                out.values_mut()[(i * n + j) * m + k] = (0.5 * (a * a + b * b)).sqrt();
            }
        }
    }
    out
}

/// Weighted decreasing rearrangement of |u| in t at fixed (r, s).
///
/// The nodal values with their Gauss weights are treated as a step function
/// on [-1, 1]; its exact decreasing rearrangement is laid out from t = -1
/// upward and re-sampled on the cells as root-mean-square cell averages, so
/// the L² norm is preserved exactly and nodal profiles already nonincreasing
/// in t are fixed points.
pub fn rearrange_t(u: &RstFunction) -> RstFunction {
    let space = u.space().clone();
    let n = space.n();
    let m = space.m();
    let weights = space.tq().weights().to_vec();
    let mut out = RstFunction::zeros(space);
    let mut order: Vec<usize> = (0..m).collect();
    let mut cell = vec![0.0; m];
    for i in 0..n {
        for j in 0..n {
            let row = &u.values()[(i * n + j) * m..(i * n + j + 1) * m];
            order.sort_by(|&a, &b| row[b].abs().partial_cmp(&row[a].abs()).unwrap());
            cell.iter_mut().for_each(|c| *c = 0.0);
            // pour sorted mass (value², weight) into t-ascending cells
            let mut k_cell = 0usize;
            let mut room = weights[0];
            for &idx in order.iter() {
                let v2 = row[idx] * row[idx];
                let mut left = weights[idx];
                while left > 0.0 && k_cell < m {
                    let take = left.min(room);
                    cell[k_cell] += v2 * take;
                    left -= take;
                    room -= take;
                    if room <= 1e-15 * weights[k_cell] {
                        k_cell += 1;
                        if k_cell < m {
                            room = weights[k_cell];
                        }
                    }
                }
            }
            let dst = &mut out.values_mut()[(i * n + j) * m..(i * n + j + 1) * m];
            for k in 0..m {
                dst[k] = (cell[k] / weights[k]).sqrt();
            }
        }
    }
    out
}

/// Largest increase of u along ascending t over all (r, s) pairs; zero for
/// profiles nonincreasing in t.
pub fn t_monotonicity_defect(u: &RstFunction) -> f64 {
    let n = u.space().n();
    let m = u.space().m();
    let mut worst = 0.0f64;
    for ij in 0..n * n {
        let row = &u.values()[ij * m..(ij + 1) * m];
        for k in 1..m {
            worst = worst.max(row[k] - row[k - 1]);
        }
    }
    worst
}
