//! Multiplier symbols: validation of the positivity/unitality conditions,
//! entrywise application, and the Choi-matrix positivity oracle.
//!
//! A symbol matrix M acts on n-by-n matrices entrywise, a ↦ (m_ij a_ij). The
//! map is (completely) positive exactly when M is positive semi-definite and
//! unital exactly when the diagonal of M is all ones; both conditions are
//! checked numerically here and cross-checked through the Choi matrix.

use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, ComplexMatrix, LinalgError, ONE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchurError {
    #[error("symbol must be square, got {rows}x{cols}")]
    NonSquareSymbol { rows: usize, cols: usize },
    #[error("input is {rows}x{cols} but the symbol acts on {n}x{n}")]
    DimensionMismatch { rows: usize, cols: usize, n: usize },
    #[error("amplification factor must be positive")]
    ZeroAmplification,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Validity flags of a symbol at a given tolerance, plus the smallest
/// eigenvalue of its Hermitian part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub hermitian: bool,
    pub psd: bool,
    pub unit_diagonal: bool,
    pub min_eigenvalue: f64,
}

impl ValidityReport {
    /// All three conditions required of a certifiable symbol.
    pub fn is_valid(&self) -> bool {
        self.hermitian && self.psd && self.unit_diagonal
    }
}

/// The symbol matrix of an entrywise multiplier, with its validity data
/// computed once at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolWire", into = "SymbolWire")]
pub struct SchurSymbol {
    n: usize,
    m: ComplexMatrix,
    hermitian_defect: f64,
    min_eigenvalue: f64,
    diagonal_defect: f64,
}

#[derive(Serialize, Deserialize)]
struct SymbolWire {
    n: usize,
    m: ComplexMatrix,
}

impl From<SchurSymbol> for SymbolWire {
    fn from(s: SchurSymbol) -> SymbolWire {
        SymbolWire { n: s.n, m: s.m }
    }
}

impl TryFrom<SymbolWire> for SchurSymbol {
    type Error = SchurError;

    fn try_from(w: SymbolWire) -> Result<SchurSymbol, SchurError> {
        let s = SchurSymbol::new(w.m)?;
        if s.n != w.n {
            return Err(SchurError::DimensionMismatch {
                rows: s.n,
                cols: s.n,
                n: w.n,
            });
        }
        Ok(s)
    }
}

impl SchurSymbol {
    pub fn new(m: ComplexMatrix) -> Result<Self, SchurError> {
        if !m.is_square() {
            return Err(SchurError::NonSquareSymbol {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let hermitian_defect = m.hermitian_defect();
        // The spectrum of the Hermitian part; for Hermitian input this is the
        // spectrum of m itself.
        let eig = hermitian_eigen(&m)?;
        let min_eigenvalue = eig.values.first().copied().unwrap_or(0.0);
        let diagonal_defect = (0..n)
            .map(|i| (m[(i, i)] - ONE).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            n,
            m,
            hermitian_defect,
            min_eigenvalue,
            diagonal_defect,
        })
    }

    /// The all-ones symbol (the identity multiplier).
    pub fn all_ones(n: usize) -> Self {
        Self::new(ComplexMatrix::from_fn(n, n, |_, _| ONE)).expect("all-ones symbol is valid")
    }

    /// The identity symbol (the diagonal-truncation multiplier).
    pub fn identity(n: usize) -> Self {
        Self::new(ComplexMatrix::identity(n)).expect("identity symbol is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    /// Flags at tolerance `tol`. The underlying defects are cached, so this
    /// only compares against the tolerance.
    pub fn validate_symbol(&self, tol: f64) -> ValidityReport {
        ValidityReport {
            hermitian: self.hermitian_defect <= tol,
            psd: self.min_eigenvalue >= -tol,
            unit_diagonal: self.diagonal_defect <= tol,
            min_eigenvalue: self.min_eigenvalue,
        }
    }

    /// Entrywise product with the symbol. Defined for arbitrary square input
    /// of matching size; positivity of the map needs a valid symbol.
    pub fn apply_multiplier(&self, a: &ComplexMatrix) -> Result<ComplexMatrix, SchurError> {
        if a.rows() != self.n || a.cols() != self.n {
            return Err(SchurError::DimensionMismatch {
                rows: a.rows(),
                cols: a.cols(),
                n: self.n,
            });
        }
        Ok(self.m.hadamard(a))
    }

    /// The k-fold amplification T ⊗ id_k, acting on (nk)x(nk) input by
    /// scaling each k x k block (i,j) with m_ij.
    pub fn apply_amplified(&self, a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix, SchurError> {
        if k == 0 {
            return Err(SchurError::ZeroAmplification);
        }
        let side = self.n * k;
        if a.rows() != side || a.cols() != side {
            return Err(SchurError::DimensionMismatch {
                rows: a.rows(),
                cols: a.cols(),
                n: side,
            });
        }
        Ok(ComplexMatrix::from_fn(side, side, |r, c| {
            self.m[(r / k, c / k)] * a[(r, c)]
        }))
    }

    /// Choi matrix Σ_ij m_ij · e_ij ⊗ e_ij of size n² x n². It is positive
    /// semi-definite exactly when the symbol is, which gives an independent
    /// route to the positivity decision.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                out[(i * n + i, j * n + j)] = self.m[(i, j)];
            }
        }
        out
    }
}
