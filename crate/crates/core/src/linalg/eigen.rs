use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, TraceMode, ZERO};

const MAX_JACOBI_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix: a = v * diag(values) * v^*.
/// Eigenvalues are ascending and the columns of `v` are the eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl HermitianEigen {
    /// Reassembles v * f(diag) * v^* for an entrywise function of the spectrum.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = ComplexMatrix::zeros(n, n);
        // scaled = v * diag(f(values)), column scaling.
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] = self.v[(i, j)] * f(self.values[j]);
            }
        }
        &scaled * &self.v.adjoint()
    }
}

/// Polar decomposition x = u * |x| with |x| = (x^* x)^{1/2} positive
/// semi-definite and u a partial isometry extended by zero off the support.
#[derive(Debug, Clone)]
pub struct PolarData {
    pub u: ComplexMatrix,
    pub absx: ComplexMatrix,
}

/// Cyclic-Jacobi eigendecomposition for Hermitian input. The working copy is
/// symmetrized first, so only the Hermitian part of `a` is seen.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut w = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);

    let scale = w.frobenius_norm().max(1.0);
    let stop = scale * 1e-15;
    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&w);
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&w) > stop {
        return Err(LinalgError::EigenNoConvergence {
            sweeps: MAX_JACOBI_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, v: vectors })
}

fn off_diagonal_norm(w: &ComplexMatrix) -> f64 {
    let n = w.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += w[(p, q)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One complex Jacobi rotation zeroing w[p,q]. The rotation first applies the
/// phase that makes w[p,q] real, then the classical real Givens angle, so the
/// combined similarity keeps w Hermitian.
fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{i psi}
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Column rotation matrix R restricted to the (p,q) plane:
    //   R_pp = c, R_pq = s, R_qp = -s * conj(phase), R_qq = c * conj(phase).
    let rpp = Complex64::new(c, 0.0);
    let rpq = Complex64::new(s, 0.0);
    let rqp = -s * phase.conj();
    let rqq = c * phase.conj();

    let n = w.rows();
    // w <- R^* w R: columns first, then rows (conjugate coefficients).
    for i in 0..n {
        let wip = w[(i, p)];
        let wiq = w[(i, q)];
        w[(i, p)] = wip * rpp + wiq * rqp;
        w[(i, q)] = wip * rpq + wiq * rqq;
    }
    for j in 0..n {
        let wpj = w[(p, j)];
        let wqj = w[(q, j)];
        w[(p, j)] = rpp.conj() * wpj + rqp.conj() * wqj;
        w[(q, j)] = rpq.conj() * wpj + rqq.conj() * wqj;
    }
    // Clean the pivots: the rotation is exact there by construction.
    let zeroed = (w[(p, q)] + w[(q, p)].conj()) * 0.5;
    debug_assert!(zeroed.norm() <= 1e-10 * (1.0 + w.frobenius_norm()));
    w[(p, q)] = ZERO;
    w[(q, p)] = ZERO;
    w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);

    // v <- v R accumulates the eigenvector basis.
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * rpp + viq * rqp;
        v[(i, q)] = vip * rpq + viq * rqq;
    }
}

/// Singular values in descending order, from the spectrum of a^* a.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    let gram = &a.adjoint() * a;
    let eig = hermitian_eigen(&gram)?;
    let mut s: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    s.reverse();
    Ok(s)
}

/// Schatten p-norm (sum of p-th powers of singular values, p-th root).
/// `p = f64::INFINITY` gives the operator norm. Normalized mode divides the
/// trace by the side length, i.e. the norm of (M_n, tr/n).
pub fn schatten_norm(a: &ComplexMatrix, p: f64, mode: TraceMode) -> Result<f64, LinalgError> {
    if !(p >= 1.0) {
        return Err(LinalgError::InvalidExponent { p });
    }
    let s = singular_values(a)?;
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    let sum: f64 = s.iter().map(|&x| x.powf(p)).sum();
    let scaled = match mode {
        TraceMode::Standard => sum,
        TraceMode::Normalized => sum / a.rows().max(a.cols()) as f64,
    };
    Ok(scaled.powf(1.0 / p))
}

/// Polar decomposition of a square matrix. The isometric factor is supported
/// on the singular directions above `n * eps * s_max` (floored at 1e-12), so
/// `u` is a genuine unitary exactly when `a` is invertible and otherwise acts
/// as zero off the support.
pub fn polar_decompose(a: &ComplexMatrix) -> Result<PolarData, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let gram = &a.adjoint() * a;
    let eig = hermitian_eigen(&gram)?;
    let s_max = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let thr = (n as f64 * f64::EPSILON * s_max).max(1e-12);
    let absx = eig.apply(|x| x.max(0.0).sqrt());
    let pinv_abs = eig.apply(|x| {
        let s = x.max(0.0).sqrt();
        if s > thr {
            1.0 / s
        } else {
            0.0
        }
    });
    let u = a * &pinv_abs;
    Ok(PolarData { u, absx })
}

/// v f(diag)^t v^* powers of a positive semi-definite matrix; negative parts
/// of the computed spectrum are clamped to zero before the power is taken.
pub fn frac_power_psd(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eigen(a)?;
    Ok(eig.apply(|x| {
        let x = x.max(0.0);
        if x == 0.0 && t <= 0.0 {
            0.0
        } else {
            x.powf(t)
        }
    }))
}

/// Nearest unitary to `a` in Frobenius distance (the polar isometric factor,
/// which is unitary when `a` is invertible).
pub fn nearest_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    Ok(polar_decompose(a)?.u)
}

/// Smallest strictly positive eigenvalue of a PSD matrix, with the same
/// support threshold as the polar decomposition. Zero matrix gives 0.
pub fn min_positive_eigenvalue(a: &ComplexMatrix) -> Result<f64, LinalgError> {
    let eig = hermitian_eigen(a)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let thr = (a.rows() as f64 * f64::EPSILON * top).max(1e-12);
    Ok(eig
        .values
        .iter()
        .copied()
        .filter(|&x| x > thr)
        .fold(f64::INFINITY, f64::min)
        .min(top)
        .max(0.0))
}
