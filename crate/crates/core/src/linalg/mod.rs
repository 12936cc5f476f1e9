//! Dense complex linear algebra: matrices, Hermitian eigendecomposition,
//! polar decomposition, Schatten norms, tensor products and partial traces.
//!
//! Everything in this crate is built on [`ComplexMatrix`] and the Hermitian
//! Jacobi eigensolver in [`eigen`]; singular values, polar factors and
//! fractional powers are all derived from that one kernel.

mod eigen;
mod matrix;

pub use eigen::{
    frac_power_psd, hermitian_eigen, min_positive_eigenvalue, nearest_unitary, polar_decompose,
    schatten_norm, singular_values, HermitianEigen, PolarData,
};
pub use matrix::ComplexMatrix;

use num_complex::Complex64;

/// Default absolute tolerance (Frobenius) for the numerical checks in this crate.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Hard cap on the side length of any matrix produced by a tensor product.
pub const MAX_TENSOR_SIDE: usize = 1 << 14;

/// Whether traces are taken as plain sums (`tr`) or divided by the dimension
/// (`tr/n`, the normalized trace of a matrix algebra).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    Standard,
    Normalized,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("entry count {len} does not match shape {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, len: usize },
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
    #[error("non-finite entry at ({row},{col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("tensor product side {side} exceeds cap {cap}")]
    TensorTooLarge { side: usize, cap: usize },
    #[error("product of slot dimensions {product} does not match matrix side {side}")]
    SlotProductMismatch { product: usize, side: usize },
    #[error("slot index {slot} out of range for {slots} slots")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("Schatten exponent must satisfy p >= 1, got {p}")]
    InvalidExponent { p: f64 },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },
}

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
