use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{LinalgError, TraceMode, MAX_TENSOR_SIDE, ONE, ZERO};

/// Dense complex matrix with row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                rows,
                cols,
                len: entries.len(),
            });
        }
        let m = Self {
            rows,
            cols,
            entries,
        };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(LinalgError::EntryCount {
                rows: nrows,
                cols: ncols,
                len: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(nrows, ncols, rows.concat())
    }

    /// Real matrix helper, mostly for tests and fixtures.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let lifted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&lifted)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Standard matrix unit e_ij of size n (single 1 at row i, column j).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub(crate) fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    fn check_finite(&self) -> Result<(), LinalgError> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LinalgError::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Trace divided by the side length (the normalized trace tr/n).
    pub fn normalized_trace(&self) -> Complex64 {
        self.trace() / self.rows as f64
    }

    pub fn trace_in(&self, mode: TraceMode) -> Complex64 {
        match mode {
            TraceMode::Standard => self.trace(),
            TraceMode::Normalized => self.normalized_trace(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius norm of A - A^*, zero exactly when Hermitian.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut sum = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                sum += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// Frobenius norm of A^*A - I, zero exactly when the columns are orthonormal.
    pub fn unitarity_defect(&self) -> f64 {
        let mut gram = &self.adjoint() * self;
        for i in 0..gram.rows {
            gram[(i, i)] -= ONE;
        }
        gram.frobenius_norm()
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Kronecker product with left-major indexing:
    /// entry ((i1*rb + i2), (j1*cb + j2)) = a[i1,j1] * b[i2,j2].
    pub fn kron(&self, other: &Self) -> Result<Self, LinalgError> {
        let rows = self.rows.checked_mul(other.rows).unwrap_or(usize::MAX);
        let cols = self.cols.checked_mul(other.cols).unwrap_or(usize::MAX);
        let side = rows.max(cols);
        if side > MAX_TENSOR_SIDE {
            return Err(LinalgError::TensorTooLarge {
                side,
                cap: MAX_TENSOR_SIDE,
            });
        }
        let mut out = Self::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Traces out one tensor slot of a square matrix living on a product of
    /// slots with the given dimensions. Normalized mode divides by the traced
    /// slot's dimension.
    pub fn partial_trace_slot(
        &self,
        dims: &[usize],
        slot: usize,
        mode: TraceMode,
    ) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let product: usize = dims.iter().product();
        if product != self.rows || dims.is_empty() {
            return Err(LinalgError::SlotProductMismatch {
                product,
                side: self.rows,
            });
        }
        if slot >= dims.len() {
            return Err(LinalgError::SlotOutOfRange {
                slot,
                slots: dims.len(),
            });
        }
        // Row-major composite index: stride of slot s is the product of the
        // dimensions to its right.
        let d_slot = dims[slot];
        let right: usize = dims[slot + 1..].iter().product();
        let left: usize = dims[..slot].iter().product();
        let out_side = left * right;
        let mut out = Self::zeros(out_side, out_side);
        for la in 0..left {
            for ra in 0..right {
                for lb in 0..left {
                    for rb in 0..right {
                        let mut sum = ZERO;
                        for k in 0..d_slot {
                            let a = (la * d_slot + k) * right + ra;
                            let b = (lb * d_slot + k) * right + rb;
                            sum += self[(a, b)];
                        }
                        out[(la * right + ra, lb * right + rb)] = sum;
                    }
                }
            }
        }
        if mode == TraceMode::Normalized {
            out = out.scale(ONE / d_slot as f64);
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow_start = i * rhs.cols;
            for (k, &aik) in arow.iter().enumerate() {
                if aik == ZERO {
                    continue;
                }
                let brow = rhs.row(k);
                let orow = &mut out.entries[orow_start..orow_start + rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// JSON wire format: a matrix is a row-major nested array and each complex
// scalar is a two-element array [re, im]. Deserialization also accepts bare
// numbers as real scalars; emission is always the canonical pair form.

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ScalarRepr> for Complex64 {
    fn from(s: ScalarRepr) -> Complex64 {
        match s {
            ScalarRepr::Real(x) => Complex64::new(x, 0.0),
            ScalarRepr::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<ScalarRepr>> = Deserialize::deserialize(deserializer)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(Complex64::from).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}
