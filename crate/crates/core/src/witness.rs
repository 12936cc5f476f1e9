//! Unitary Gram witnesses: unitaries v_1..v_n of size d whose normalized
//! pairwise traces (1/d)·tr(v_i^* v_j) reproduce a given symbol matrix.
//!
//! Finding such a family certifies the factorizability condition for the
//! multiplier, restricted to the matrix algebras (M_d, tr/d) with d up to a
//! configured bound. The search minimizes the squared Frobenius distance of
//! the Gram matrix to the target over the product of unitary groups by
//! Riemannian gradient descent with multi-start; a miss is inconclusive, a
//! hit is a genuine certificate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{nearest_unitary, ComplexMatrix, LinalgError, ONE, ZERO};
use crate::schur::{SchurSymbol, ValidityReport};

/// Residual at which the search declares success by default.
pub const DEFAULT_TARGET_RESIDUAL: f64 = 1e-8;
/// Step size used by the fixed step rule. The objective is quartic in the
/// entries, so this is only safe for well-conditioned targets; backtracking
/// is the default for a reason.
pub const FIXED_STEP: f64 = 0.02;

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 45;
const INITIAL_STEP: f64 = 0.1;
const MAX_STEP: f64 = 16.0;
// A restart is abandoned when the squared gradient norm is this small
// relative to the remaining gap f − target²: closing the gap would then take
// far more iterations than any sane budget. On a genuine descent to zero the
// gradient scales with f itself, so this never fires spuriously.
const STALL_GRAD_RATIO: f64 = 1e-6;
const STALL_GRAD_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WitnessError {
    #[error("symbol is not a valid certification target: {report:?}")]
    InvalidSymbol { report: ValidityReport },
    #[error("witness has n = {witness_n} but the symbol has n = {symbol_n}")]
    DimensionMismatch { witness_n: usize, symbol_n: usize },
    #[error("witness matrices must be square of a common dimension")]
    MalformedWitness,
    #[error("search config rejected: {reason}")]
    BadConfig { reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A family of unitaries certifying (or approximating) a symbol. `residual`
/// is the producer's claim about ‖gram − target‖_F; it is not serialized and
/// is recomputed by consumers that need it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WitnessWire", into = "WitnessWire")]
pub struct UnitaryWitness {
    n: usize,
    d: usize,
    v: Vec<ComplexMatrix>,
    residual: f64,
}

#[derive(Serialize, Deserialize)]
struct WitnessWire {
    d: usize,
    v: Vec<ComplexMatrix>,
}

impl From<UnitaryWitness> for WitnessWire {
    fn from(w: UnitaryWitness) -> WitnessWire {
        WitnessWire { d: w.d, v: w.v }
    }
}

impl TryFrom<WitnessWire> for UnitaryWitness {
    type Error = WitnessError;

    fn try_from(w: WitnessWire) -> Result<UnitaryWitness, WitnessError> {
        let parsed = UnitaryWitness::new(w.v)?;
        if parsed.d != w.d {
            return Err(WitnessError::MalformedWitness);
        }
        Ok(parsed)
    }
}

impl UnitaryWitness {
    /// Wraps a family of d×d matrices. Shape is validated here; unitarity is
    /// the caller's claim, checked separately by [`verify_witness`].
    pub fn new(v: Vec<ComplexMatrix>) -> Result<Self, WitnessError> {
        let d = match v.first() {
            Some(m) if m.is_square() => m.rows(),
            _ => return Err(WitnessError::MalformedWitness),
        };
        if d == 0 || v.iter().any(|m| m.rows() != d || m.cols() != d) {
            return Err(WitnessError::MalformedWitness);
        }
        Ok(Self {
            n: v.len(),
            d,
            v,
            residual: 0.0,
        })
    }

    pub fn with_residual(mut self, residual: f64) -> Self {
        self.residual = residual;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.v
    }

    pub fn residual_claim(&self) -> f64 {
        self.residual
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed,
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub d_min: usize,
    pub d_max: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub target_residual: f64,
    pub seed: u64,
    pub step_rule: StepRule,
    pub diagonal_only: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            d_min: 1,
            d_max: 8,
            restarts: 50,
            max_iters: 2000,
            target_residual: DEFAULT_TARGET_RESIDUAL,
            seed: 0,
            step_rule: StepRule::Backtracking,
            diagonal_only: false,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<(), WitnessError> {
        let reason = if self.d_min == 0 {
            "d_min must be at least 1"
        } else if self.d_min > self.d_max {
            "d_min exceeds d_max"
        } else if self.restarts == 0 {
            "restarts must be positive"
        } else if self.max_iters == 0 {
            "max_iters must be positive"
        } else if !(self.target_residual > 0.0) {
            "target_residual must be positive"
        } else {
            return Ok(());
        };
        Err(WitnessError::BadConfig {
            reason: reason.to_string(),
        })
    }
}

/// Search result: either a witness meeting the target residual, or the best
/// approximation found across the whole sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { witness: UnitaryWitness },
    NotFound {
        best_residual: f64,
        best_witness: UnitaryWitness,
    },
}

impl SearchOutcome {
    pub fn witness(&self) -> &UnitaryWitness {
        match self {
            SearchOutcome::Found { witness } => witness,
            SearchOutcome::NotFound { best_witness, .. } => best_witness,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }
}

/// Gram matrix g_ij = (1/d)·tr(v_i^* v_j), computed through the adjoint and
/// the matrix product.
pub fn gram_of(w: &UnitaryWitness) -> ComplexMatrix {
    let d = w.d as f64;
    ComplexMatrix::from_fn(w.n, w.n, |i, j| {
        (&w.v[i].adjoint() * &w.v[j]).trace() / d
    })
}

/// ‖gram_of(w) − M‖_F.
pub fn residual(w: &UnitaryWitness, sym: &SchurSymbol) -> Result<f64, WitnessError> {
    if w.n != sym.n() {
        return Err(WitnessError::DimensionMismatch {
            witness_n: w.n,
            symbol_n: sym.n(),
        });
    }
    Ok(gram_of(w).distance(sym.matrix()))
}

/// The explicit diagonal witness for the identity symbol: v_i has k-th
/// diagonal entry ω^{ik} with ω = exp(2πi/n). Its Gram matrix is I_n by the
/// geometric sum of n-th roots of unity.
pub fn fourier_witness(n: usize) -> UnitaryWitness {
    assert!(n >= 1, "fourier witness needs n >= 1");
    // Root of unity e^{2πi·num/n}, exact at quarter turns so that small
    // cases come out bit-exact (n = 2 gives ±1, n = 4 gives ±1, ±i).
    let root = |num: usize| -> Complex64 {
        if 4 * num % n == 0 {
            match 4 * num / n {
                0 => ONE,
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            }
        } else {
            Complex64::cis(2.0 * std::f64::consts::PI * num as f64 / n as f64)
        }
    };
    let v: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            let phases: Vec<Complex64> = (0..n).map(|k| root((i * k) % n)).collect();
            ComplexMatrix::diagonal(&phases)
        })
        .collect();
    let w = UnitaryWitness::new(v).expect("fourier construction is well formed");
    let r = gram_of(&w).distance(SchurSymbol::identity(n).matrix());
    w.with_residual(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub unitarity_defect: f64,
    pub residual: f64,
    pub pass: bool,
}

/// Independent re-check of a witness against a symbol. The Gram entries and
/// unitarity defects are accumulated by direct entry loops, sharing no code
/// with the optimizer or with [`gram_of`]. Pass policy is strict: defects
/// must be strictly below `tol`, so an exact witness fails at tol = 0.
pub fn verify_witness(
    w: &UnitaryWitness,
    sym: &SchurSymbol,
    tol: f64,
) -> Result<WitnessReport, WitnessError> {
    if w.n != sym.n() {
        return Err(WitnessError::DimensionMismatch {
            witness_n: w.n,
            symbol_n: sym.n(),
        });
    }
    let d = w.d;
    // Unitarity: the worst ‖v^*v − I‖_F over the family, entry by entry.
    let mut unitarity_defect: f64 = 0.0;
    for vi in &w.v {
        let mut defect_sq = 0.0;
        for a in 0..d {
            for b in 0..d {
                let mut s = ZERO;
                for k in 0..d {
                    s += vi[(k, a)].conj() * vi[(k, b)];
                }
                if a == b {
                    s -= ONE;
                }
                defect_sq += s.norm_sqr();
            }
        }
        unitarity_defect = unitarity_defect.max(defect_sq.sqrt());
    }
    // Gram residual, accumulating the traces directly.
    let mut residual_sq = 0.0;
    for i in 0..w.n {
        for j in 0..w.n {
            let mut tr = ZERO;
            for a in 0..d {
                for b in 0..d {
                    tr += w.v[i][(a, b)].conj() * w.v[j][(a, b)];
                }
            }
            residual_sq += (tr / d as f64 - sym.matrix()[(i, j)]).norm_sqr();
        }
    }
    let residual = residual_sq.sqrt();
    Ok(WitnessReport {
        unitarity_defect,
        residual,
        pass: unitarity_defect < tol && residual < tol,
    })
}

/// Multi-start Riemannian gradient descent over all dimensions in the sweep.
/// Deterministic for a fixed config: restarts are seeded individually and
/// reduced in index order, ties broken by smallest d then lowest restart.
pub fn search_witness(
    sym: &SchurSymbol,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, WitnessError> {
    cfg.validate()?;
    let report = sym.validate_symbol(crate::linalg::DEFAULT_TOL);
    if !report.is_valid() {
        return Err(WitnessError::InvalidSymbol { report });
    }
    let n = sym.n();
    let mut best: Option<(f64, usize, Vec<ComplexMatrix>)> = None;
    for d in cfg.d_min..=cfg.d_max {
        let runs: Vec<RestartRun> = (0..cfg.restarts)
            .into_par_iter()
            .map(|r| run_restart(sym.matrix(), n, d, r, cfg))
            .collect();
        if let Some(run) = runs.iter().find(|r| r.success) {
            let witness = UnitaryWitness::new(run.v.clone())?.with_residual(run.residual);
            return Ok(SearchOutcome::Found { witness });
        }
        for run in runs {
            let improved = match &best {
                Some((r, _, _)) => run.residual < *r,
                None => true,
            };
            if improved {
                best = Some((run.residual, d, run.v));
            }
        }
    }
    let (best_residual, _, v) = best.expect("at least one restart ran");
    let best_witness = UnitaryWitness::new(v)?.with_residual(best_residual);
    Ok(SearchOutcome::NotFound {
        best_residual,
        best_witness,
    })
}

/// As [`search_witness`] but restricted to diagonal unitaries, i.e. the
/// torus of phase vectors.
pub fn diagonal_witness_search(
    sym: &SchurSymbol,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, WitnessError> {
    let cfg = SearchConfig {
        diagonal_only: true,
        ..cfg.clone()
    };
    search_witness(sym, &cfg)
}

struct RestartRun {
    success: bool,
    residual: f64,
    v: Vec<ComplexMatrix>,
}

/// Real Hilbert-Schmidt inner product of two stacked families.
fn family_inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.entries()
                .iter()
                .zip(y.entries())
                .map(|(p, q)| (p.conj() * q).re)
                .sum::<f64>()
        })
        .sum()
}

/// Objective f = ‖gram(v) − m‖_F² together with the Gram matrix, using a
/// direct entrywise trace accumulation (the optimizer's hot path).
fn objective(v: &[ComplexMatrix], d: usize, m: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let n = v.len();
    let mut g = ComplexMatrix::zeros(n, n);
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut tr = ZERO;
            for (a, b) in v[i].entries().iter().zip(v[j].entries()) {
                tr += a.conj() * b;
            }
            let gij = tr / d as f64;
            g[(i, j)] = gij;
            f += (gij - m[(i, j)]).norm_sqr();
        }
    }
    (g, f)
}

fn seed_for(seed: u64, d: usize, restart: usize, i: usize) -> [u8; 32] {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&(d as u64).to_le_bytes());
    bytes[16..24].copy_from_slice(&(restart as u64).to_le_bytes());
    bytes[24..32].copy_from_slice(&(i as u64).to_le_bytes());
    bytes
}

fn complex_gaussian(rng: &mut ChaCha12Rng) -> Complex64 {
    // Box-Muller on two uniforms; the radial part is clamped away from 0.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// Haar-like starting point: polar factor of a complex Gaussian matrix, or a
/// uniform phase vector in diagonal mode.
fn random_start(d: usize, diagonal: bool, seed: [u8; 32]) -> ComplexMatrix {
    let mut rng = ChaCha12Rng::from_seed(seed);
    if diagonal {
        let phases: Vec<Complex64> = (0..d)
            .map(|_| Complex64::cis(2.0 * std::f64::consts::PI * rng.gen::<f64>()))
            .collect();
        ComplexMatrix::diagonal(&phases)
    } else {
        let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(&mut rng));
        nearest_unitary(&g).expect("polar of a finite matrix")
    }
}

/// Projects the Euclidean gradient at v_i to the tangent space of the
/// unitary group (skew-Hermitian directions), restricted further to diagonal
/// directions in diagonal mode.
fn tangent_direction(vi: &ComplexMatrix, grad: &ComplexMatrix, diagonal: bool) -> ComplexMatrix {
    let vg = &vi.adjoint() * grad;
    let d = vg.rows();
    let mut skew = ComplexMatrix::from_fn(d, d, |a, b| (vg[(a, b)] - vg[(b, a)].conj()) * 0.5);
    if diagonal {
        for a in 0..d {
            for b in 0..d {
                if a != b {
                    skew[(a, b)] = ZERO;
                }
            }
        }
    }
    vi * &skew
}

/// Moves v_i along −step·xi and projects back to the manifold. Along exact
/// tangent directions v·(I − step·s) with s skew-Hermitian the factor
/// I − step·s is never singular, so the polar projection is a true unitary.
fn retract(vi: &ComplexMatrix, xi: &ComplexMatrix, step: f64, diagonal: bool) -> ComplexMatrix {
    let moved = vi - &xi.scale(Complex64::new(step, 0.0));
    if diagonal {
        let d = moved.rows();
        let phases: Vec<Complex64> = (0..d)
            .map(|k| {
                let z = moved[(k, k)];
                let r = z.norm();
                if r > 0.0 {
                    z / r
                } else {
                    ONE
                }
            })
            .collect();
        ComplexMatrix::diagonal(&phases)
    } else {
        nearest_unitary(&moved).expect("polar of a finite matrix")
    }
}

fn run_restart(
    m: &ComplexMatrix,
    n: usize,
    d: usize,
    restart: usize,
    cfg: &SearchConfig,
) -> RestartRun {
    let mut v: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            if i == 0 {
                // Gauge: the Gram matrix is invariant under a global left
                // unitary factor, so the first matrix is pinned.
                ComplexMatrix::identity(d)
            } else {
                random_start(d, cfg.diagonal_only, seed_for(cfg.seed, d, restart, i))
            }
        })
        .collect();
    let target_sq = cfg.target_residual * cfg.target_residual;
    let (mut g, mut f) = objective(&v, d, m);
    let mut best_f = f;
    let mut best_v = v.clone();
    let mut eta = INITIAL_STEP;
    // Previous iterate and its Riemannian gradient, for the spectral step.
    let mut prev: Option<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> = None;

    for _ in 0..cfg.max_iters {
        if f <= target_sq {
            break;
        }
        // Euclidean gradient of f at v_i: (4/d)·Σ_j conj(Δ_ij)·v_j, with
        // Δ = gram − m Hermitian for Hermitian targets.
        let scale = 4.0 / d as f64;
        let mut xi: Vec<ComplexMatrix> = Vec::with_capacity(n.saturating_sub(1));
        let mut grad_sq = 0.0;
        for i in 1..n {
            let mut grad = ComplexMatrix::zeros(d, d);
            for (j, vj) in v.iter().enumerate() {
                let coeff = (g[(i, j)] - m[(i, j)]).conj() * scale;
                if coeff == ZERO {
                    continue;
                }
                grad = &grad + &vj.scale(coeff);
            }
            let dir = tangent_direction(&v[i], &grad, cfg.diagonal_only);
            grad_sq += dir.entries().iter().map(Complex64::norm_sqr).sum::<f64>();
            xi.push(dir);
        }
        if grad_sq <= STALL_GRAD_FLOOR || grad_sq <= STALL_GRAD_RATIO * (f - target_sq) {
            break;
        }

        let mut accepted = false;
        match cfg.step_rule {
            StepRule::Fixed => {
                let cand: Vec<ComplexMatrix> = std::iter::once(v[0].clone())
                    .chain(
                        xi.iter()
                            .zip(&v[1..])
                            .map(|(x, vi)| retract(vi, x, FIXED_STEP, cfg.diagonal_only)),
                    )
                    .collect();
                let (gc, fc) = objective(&cand, d, m);
                v = cand;
                g = gc;
                f = fc;
                accepted = true;
            }
            StepRule::Backtracking => {
                // Barzilai-Borwein trial step <s,s>/<s,y> from the previous
                // displacement; it adapts to valley curvature far better
                // than plain doubling. Armijo halving safeguards it.
                let mut step = eta;
                if let Some((pv, pxi)) = &prev {
                    let s: Vec<ComplexMatrix> =
                        v[1..].iter().zip(&pv[1..]).map(|(a, b)| a - b).collect();
                    let y: Vec<ComplexMatrix> =
                        xi.iter().zip(pxi.iter()).map(|(a, b)| a - b).collect();
                    let ss = family_inner(&s, &s);
                    let sy = family_inner(&s, &y);
                    if sy > 0.0 && ss > 0.0 {
                        step = (ss / sy).clamp(1e-10, MAX_STEP);
                    }
                }
                for _ in 0..MAX_HALVINGS {
                    let cand: Vec<ComplexMatrix> = std::iter::once(v[0].clone())
                        .chain(
                            xi.iter()
                                .zip(&v[1..])
                                .map(|(x, vi)| retract(vi, x, step, cfg.diagonal_only)),
                        )
                        .collect();
                    let (gc, fc) = objective(&cand, d, m);
                    if fc <= f - ARMIJO_C * step * grad_sq {
                        prev = Some((std::mem::take(&mut v), xi.clone()));
                        v = cand;
                        g = gc;
                        f = fc;
                        eta = (step * 2.0).min(MAX_STEP);
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
            }
        }
        if !accepted {
            // Line search exhausted: no descent direction at float scale.
            break;
        }
        if f < best_f {
            best_f = f;
            best_v = v.clone();
        }
    }
    RestartRun {
        success: best_f <= target_sq,
        residual: best_f.sqrt(),
        v: best_v,
    }
}
