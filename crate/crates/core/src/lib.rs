//! Truncated Toeplitz operators on finite-dimensional model spaces.
//!
//! The crate builds finite Blaschke products, an orthonormal rational basis of
//! the model space `K_B = H² ⊖ BH²`, the atomic Clark measures of `B`, and the
//! operator matrices living on `K_B`: truncated Toeplitz operators, modified
//! compressed shifts, elements of the Sedlock algebras, the diagonal Clark
//! weight operators `Δ_B^α`, and circulant approximants. The [`szego`] module
//! runs the trace-asymptotic experiments on top of them and [`harness`] wires
//! everything to JSON configs, CSV tables and the self-test ledger.

pub mod blaschke;
pub mod clark;
mod error;
pub mod harness;
pub mod modelspace;
mod parallel;
pub mod szego;
pub mod tto;

pub use blaschke::{mobius, BlaschkeProduct, DEFAULT_BOUNDARY_GUARD};
pub use clark::{clark_measure, level_set, ClarkMeasure, Reference};
pub use error::{Error, Result};
pub use modelspace::{inner_product, reproducing_kernel, tm_basis, Expansion, ModelBasis};
pub use num_complex::Complex64;
pub use tto::{OperatorMatrix, StandardSymbol};

/// Unit-modulus complex number `e^{it}`.
#[inline]
pub fn unit(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

/// Principal argument mapped into `[0, 2π)`.
#[inline]
pub fn arg_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}
