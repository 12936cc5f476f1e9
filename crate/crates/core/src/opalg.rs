//! Operator-algebra machinery behind the factorization proofs, at a level
//! where every statement is checkable in floating point: matrix-unit
//! systems, the block isomorphism induced by a system of matrix units, the
//! unitary conjugating one system onto another, norming functionals on
//! Schatten classes, and the injectivity modulus of two-sided compression
//! by a positive element.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    frac_power_psd, hermitian_eigen, min_positive_eigenvalue, polar_decompose, schatten_norm,
    ComplexMatrix, LinalgError, TraceMode,
};

/// Eigenvalues of a putative projection below this count as null directions.
const RANK_THRESHOLD: f64 = 1e-10;
/// Eigenvalues this far from 1 are still accepted as range directions.
const RANGE_BAND: f64 = 1e-4;
/// Largest matrix-unit defect tolerated by operations that assume valid
/// input systems.
const SYSTEM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpalgError {
    #[error("matrix-unit system is malformed: {reason}")]
    BadSystem { reason: String },
    #[error("{which} system fails the matrix-unit axioms (worst defect {defect:e})")]
    SystemInvalid { which: &'static str, defect: f64 },
    #[error("systems are incompatible: {reason}")]
    IncompatibleSystems { reason: String },
    #[error("corner projection has numerically ambiguous rank: eigenvalue {eigenvalue} is neither 0 nor 1")]
    AmbiguousRank { eigenvalue: f64 },
    #[error("input is {rows}x{cols} but this operation expects {want}x{want}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        want: usize,
    },
    #[error("input matrix is zero")]
    ZeroInput,
    #[error("exponent p = {p} is outside (1, inf)")]
    InvalidExponent { p: f64 },
    #[error("input is not PSD within tolerance: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A family w_ij (i, j < n) of N×N matrices satisfying the matrix-unit
/// axioms: w_ij^* = w_ji, w_ij·w_kl = δ_jk·w_il, Σ_i w_ii = I.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixUnitSystem {
    n: usize,
    ambient_dim: usize,
    w: Vec<ComplexMatrix>,
}

impl MatrixUnitSystem {
    /// Wraps an n×n array (row-major) of N×N matrices. Shapes are checked;
    /// the axioms are checked separately by `verify_matrix_units`.
    pub fn new(n: usize, w: Vec<ComplexMatrix>) -> Result<Self, OpalgError> {
        if n == 0 {
            return Err(OpalgError::BadSystem {
                reason: "system size must be positive".into(),
            });
        }
        if w.len() != n * n {
            return Err(OpalgError::BadSystem {
                reason: format!("expected {} matrices, got {}", n * n, w.len()),
            });
        }
        let ambient_dim = w[0].rows();
        for (pos, m) in w.iter().enumerate() {
            if m.rows() != ambient_dim || m.cols() != ambient_dim {
                return Err(OpalgError::BadSystem {
                    reason: format!(
                        "matrix {pos} is {}x{}, expected {ambient_dim}x{ambient_dim}",
                        m.rows(),
                        m.cols()
                    ),
                });
            }
        }
        Ok(Self { n, ambient_dim, w })
    }

    /// The standard units e_ij of M_n.
    pub fn standard(n: usize) -> Self {
        let w = (0..n)
            .flat_map(|i| (0..n).map(move |j| ComplexMatrix::unit(n, i, j)))
            .collect();
        Self {
            n,
            ambient_dim: n,
            w,
        }
    }

    /// The units e_ij ⊗ I_k inside M_n ⊗ M_k.
    pub fn tensor_with_identity(n: usize, k: usize) -> Result<Self, OpalgError> {
        let id = ComplexMatrix::identity(k);
        let mut w = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                w.push(ComplexMatrix::unit(n, i, j).kron(&id)?);
            }
        }
        Ok(Self {
            n,
            ambient_dim: n * k,
            w,
        })
    }

    /// The conjugated system u·w_ij·u^*.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self, OpalgError> {
        if u.rows() != self.ambient_dim || u.cols() != self.ambient_dim {
            return Err(OpalgError::DimensionMismatch {
                rows: u.rows(),
                cols: u.cols(),
                want: self.ambient_dim,
            });
        }
        let ustar = u.adjoint();
        let w = self.w.iter().map(|m| &(u * m) * &ustar).collect();
        Ok(Self {
            n: self.n,
            ambient_dim: self.ambient_dim,
            w,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn unit(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.w[i * self.n + j]
    }
}

/// Worst-case Frobenius defects of the three matrix-unit axioms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixUnitReport {
    pub adjoint_defect: f64,
    pub product_defect: f64,
    pub sum_defect: f64,
    pub pass: bool,
}

pub fn verify_matrix_units(sys: &MatrixUnitSystem, tol: f64) -> MatrixUnitReport {
    let n = sys.n;
    let mut adjoint_defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            adjoint_defect = adjoint_defect.max(sys.unit(i, j).adjoint().distance(sys.unit(j, i)));
        }
    }
    let mut product_defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let prod = sys.unit(i, j) * sys.unit(k, l);
                    let expected = if j == k {
                        sys.unit(i, l).clone()
                    } else {
                        ComplexMatrix::zeros(sys.ambient_dim, sys.ambient_dim)
                    };
                    product_defect = product_defect.max(prod.distance(&expected));
                }
            }
        }
    }
    let mut sum = ComplexMatrix::zeros(sys.ambient_dim, sys.ambient_dim);
    for i in 0..n {
        sum = &sum + sys.unit(i, i);
    }
    let sum_defect = sum.distance(&ComplexMatrix::identity(sys.ambient_dim));
    let pass = adjoint_defect <= tol && product_defect <= tol && sum_defect <= tol;
    MatrixUnitReport {
        adjoint_defect,
        product_defect,
        sum_defect,
        pass,
    }
}

/// Orthonormal basis (as columns) of the range of a projection-like matrix.
/// Eigenvalues must split cleanly into a null cluster below `RANK_THRESHOLD`
/// and a range cluster within `RANGE_BAND` of 1; anything in between makes
/// the rank ambiguous.
fn corner_basis(p: &ComplexMatrix) -> Result<ComplexMatrix, OpalgError> {
    let eig = hermitian_eigen(p)?;
    let mut range_cols = Vec::new();
    for (pos, &lambda) in eig.values.iter().enumerate() {
        if lambda <= RANK_THRESHOLD {
            continue;
        }
        if (lambda - 1.0).abs() <= RANGE_BAND {
            range_cols.push(pos);
        } else {
            return Err(OpalgError::AmbiguousRank { eigenvalue: lambda });
        }
    }
    if range_cols.is_empty() {
        return Err(OpalgError::AmbiguousRank { eigenvalue: 0.0 });
    }
    let rows = p.rows();
    Ok(ComplexMatrix::from_fn(rows, range_cols.len(), |r, c| {
        eig.v[(r, range_cols[c])]
    }))
}

/// The trace-preserving *-isomorphism induced by a matrix-unit system:
/// ρ(x) = Σ_ij e_ij ⊗ (w_1i · x · w_j1 compressed to the range of w_11).
/// Output lives in M_n ⊗ M_r with r the rank of w_11.
pub fn takesaki_iso(
    sys: &MatrixUnitSystem,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix, OpalgError> {
    let nn = sys.ambient_dim;
    if x.rows() != nn || x.cols() != nn {
        return Err(OpalgError::DimensionMismatch {
            rows: x.rows(),
            cols: x.cols(),
            want: nn,
        });
    }
    let q = corner_basis(sys.unit(0, 0))?;
    let qstar = q.adjoint();
    let r = q.cols();
    let n = sys.n;
    let mut blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mid = &(sys.unit(0, i) * x) * sys.unit(j, 0);
            blocks.push(&(&qstar * &mid) * &q);
        }
    }
    Ok(ComplexMatrix::from_fn(n * r, n * r, |row, col| {
        let (bi, ri) = (row / r, row % r);
        let (bj, rj) = (col / r, col % r);
        blocks[bi * n + bj][(ri, rj)]
    }))
}

/// A unitary u with u·f_ij·u^* = g_ij for two matrix-unit systems of the
/// same shape. Built as u = Σ_k g_k1·m·f_1k where m maps the range of f_11
/// onto the range of g_11 isometrically; any such m yields a conjugator, and
/// different corner bases change u only by a commutant factor. The result is
/// re-unitarized by its polar factor to absorb input defects.
pub fn conjugating_unitary(
    f: &MatrixUnitSystem,
    g: &MatrixUnitSystem,
) -> Result<ComplexMatrix, OpalgError> {
    if f.n != g.n {
        return Err(OpalgError::IncompatibleSystems {
            reason: format!("sizes differ: {} vs {}", f.n, g.n),
        });
    }
    if f.ambient_dim != g.ambient_dim {
        return Err(OpalgError::IncompatibleSystems {
            reason: format!(
                "ambient dimensions differ: {} vs {}",
                f.ambient_dim, g.ambient_dim
            ),
        });
    }
    for (which, sys) in [("first", f), ("second", g)] {
        let report = verify_matrix_units(sys, SYSTEM_TOL);
        if !report.pass {
            let defect = report
                .adjoint_defect
                .max(report.product_defect)
                .max(report.sum_defect);
            return Err(OpalgError::SystemInvalid { which, defect });
        }
    }
    let qf = corner_basis(f.unit(0, 0))?;
    let qg = corner_basis(g.unit(0, 0))?;
    if qf.cols() != qg.cols() {
        return Err(OpalgError::IncompatibleSystems {
            reason: format!("corner ranks differ: {} vs {}", qf.cols(), qg.cols()),
        });
    }
    let m = &qg * &qf.adjoint();
    let mut u = ComplexMatrix::zeros(f.ambient_dim, f.ambient_dim);
    for k in 0..f.n {
        u = &u + &(&(g.unit(k, 0) * &m) * f.unit(0, k));
    }
    Ok(polar_decompose(&u)?.u)
}

/// A norming pair: x together with the y of unit dual norm that attains
/// tr(x·y) = ‖x‖_p. Traces here are the standard (unnormalized) ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormingPair {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub p: f64,
    pub q: f64,
}

/// The norming functional of x in S^p: with x̂ = x/‖x‖_p = u|x̂|,
/// y = |x̂|^{p−1}·u^*. Then ‖y‖_q = 1 and tr(x̂·y) = 1; moreover
/// |y| = u|x̂|^{p−1}u^* and y = u^*·|y| is the polar decomposition of y.
pub fn norming_functional(x: &ComplexMatrix, p: f64) -> Result<NormingPair, OpalgError> {
    if !x.is_square() {
        return Err(OpalgError::DimensionMismatch {
            rows: x.rows(),
            cols: x.cols(),
            want: x.rows(),
        });
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(OpalgError::InvalidExponent { p });
    }
    if x.frobenius_norm() == 0.0 {
        return Err(OpalgError::ZeroInput);
    }
    let q = p / (p - 1.0);
    let norm_p = schatten_norm(x, p, TraceMode::Standard)?;
    let xhat = x.scale(Complex64::new(1.0 / norm_p, 0.0));
    let polar = polar_decompose(&xhat)?;
    let power = frac_power_psd(&polar.absx, p - 1.0)?;
    let y = &power * &polar.u.adjoint();
    if cfg!(debug_assertions) {
        let pairing = (&xhat * &y).trace();
        debug_assert!(
            (pairing - Complex64::new(1.0, 0.0)).norm() <= 1e-8,
            "norming pairing off: {pairing}"
        );
        let dual = schatten_norm(&y, q, TraceMode::Standard).expect("q > 1");
        debug_assert!((dual - 1.0).abs() <= 1e-8, "dual norm off: {dual}");
    }
    Ok(NormingPair {
        x: x.clone(),
        y,
        p,
        q,
    })
}

/// Injectivity modulus of z ↦ x·z·x on the corner s(x)·M·s(x) cut out by
/// the support projection of a PSD x. Always strictly positive; numerically
/// it is the square of the smallest nonzero eigenvalue of x.
pub fn support_compression_injectivity(x: &ComplexMatrix) -> Result<f64, OpalgError> {
    if !x.is_square() {
        return Err(OpalgError::DimensionMismatch {
            rows: x.rows(),
            cols: x.cols(),
            want: x.rows(),
        });
    }
    let scale = x.frobenius_norm();
    if scale == 0.0 {
        return Err(OpalgError::ZeroInput);
    }
    let guard = 1e-10 * (1.0 + scale);
    if x.hermitian_defect() > guard {
        return Err(OpalgError::NotPsd {
            min_eigenvalue: f64::NEG_INFINITY,
        });
    }
    let eig = hermitian_eigen(x)?;
    let min = eig.values[0];
    if min < -guard {
        return Err(OpalgError::NotPsd {
            min_eigenvalue: min,
        });
    }
    let lambda = min_positive_eigenvalue(x)?;
    Ok(lambda * lambda)
}
