//! Ball quadrature, sampled fields, and the finite-difference oracle.

pub mod fd;
pub mod field;
pub mod grid;
pub mod interp;

pub use fd::{FdOracle, ProbeLattice, ScalarFn, StencilOrder, VectorFn};
pub use field::{ScalarField, VectorField};
pub use grid::{BallGrid, GridSpec, SurfaceGrid, DEFAULT_NPHI, DEFAULT_NR, DEFAULT_NTHETA};
pub use interp::{ScalarInterpolant, VectorInterpolant};

use crate::error::Result;

pub fn inner_product(a: &VectorField, b: &VectorField) -> Result<f64> {
    a.inner_product(b)
}

pub fn scalar_inner_product(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.inner_product(b)
}

/// Finite-difference gradient of an analytic or interpolated scalar, sampled on `grid`.
pub fn fd_gradient<S: ScalarFn + ?Sized>(oracle: &FdOracle, h: &S, grid: &BallGrid) -> VectorField {
    VectorField::from_fn(grid, |p| oracle.gradient(h, p))
}

pub fn fd_divergence<V: VectorFn + ?Sized>(oracle: &FdOracle, v: &V, grid: &BallGrid) -> ScalarField {
    ScalarField::from_fn(grid, |p| oracle.divergence(v, p))
}

pub fn fd_curl<V: VectorFn + ?Sized>(oracle: &FdOracle, v: &V, grid: &BallGrid) -> VectorField {
    VectorField::from_fn(grid, |p| oracle.curl(v, p))
}

/// `∇div v` on `grid` by composing the gradient and divergence stencils.
pub fn grad_div_apply<V: VectorFn + ?Sized>(oracle: &FdOracle, v: &V, grid: &BallGrid) -> VectorField {
    VectorField::from_fn(grid, |p| oracle.grad_div(v, p))
}
