//! Numerical laboratory for polaron and bipolaron energy functionals in
//! rotation-invariant coordinates: radial quadrature grids, Coulomb
//! machinery, one- and two-particle variational solvers, and second-order
//! (Hessian) stability analysis across the repulsion coupling U.

pub mod bipolaron;
pub mod coulomb;
pub mod eigen;
pub mod grid;
pub mod polaron;

pub use grid::{GridError, Mapping, RadialFunction, RadialGrid, TQuadrature};
