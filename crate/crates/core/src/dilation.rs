//! Truncated dilation systems: the explicit construction that realizes the
//! powers of one or several commuting entrywise multipliers as
//! E ∘ U_1^{k_1}…U_L^{k_L} ∘ J on a single finite algebra.
//!
//! The ambient algebra is M_n ⊗ M_D^{⊗K} with D = d_1·…·d_L the product of
//! the witness dimensions. J tensors with the identity, U_l shifts and then
//! conjugates by a block unitary assembled from witness l, and E is the
//! normalized partial trace back onto the n×n slot.
//!
//! The K blocks decompose into L interleaved chains: chain l collects the
//! slot-l factor of every block. Each U_l uses the cyclic right shift S_l of
//! its own chain, leaving the other chains fixed. This is what makes the
//! U_l commute exactly: the u^l pairwise commute (shared diagonal over the
//! n×n slot, witness factors in disjoint slots), each S_l commutes with the
//! u^m for m ≠ l (disjoint legs), and the S_l commute among themselves.
//! Shifting whole blocks instead would drag every multiplier's slots along
//! and the order of U_1, U_2 would leave witness factors in swapped blocks.
//! The whole-block shift S = S_1∘…∘S_L is still exposed as `shift_s`; for a
//! single multiplier it coincides with S_1.
//!
//! The identity holds for all multi-indices with total degree at most K;
//! beyond that the cyclic wraparound breaks it, which is checked by a
//! dedicated fixture rather than assumed.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, LinalgError, TraceMode, ZERO};
use crate::schur::SchurSymbol;
use crate::witness::{gram_of, UnitaryWitness};

/// Largest allowed side of the dilation algebra; dense matrices beyond this
/// stop being desk-scale.
pub const DIM_CAP: usize = 4096;
/// Default truncation depth.
pub const DEFAULT_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DilationError {
    #[error("dilation needs at least one witness")]
    EmptyFamily,
    #[error("depth must be at least 1")]
    BadDepth,
    #[error("witness {index} has n = {got}, expected {want}")]
    MismatchedN {
        index: usize,
        got: usize,
        want: usize,
    },
    #[error("total dimension {total_dim} exceeds the cap {cap} ({entries} matrix entries)")]
    DimensionCap {
        total_dim: usize,
        cap: usize,
        entries: u128,
    },
    #[error("witness {index} is not unitary enough for a dilation: implied defect {defect:e}")]
    NonUnitaryWitness { index: usize, defect: f64 },
    #[error("input is {rows}x{cols} but this operation expects {want}x{want}")]
    InputDim {
        rows: usize,
        cols: usize,
        want: usize,
    },
    #[error("multiplier index {index} out of range ({count} multipliers)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error(
        "symbol {index} is {distance:e} away from the witness Gram matrix (allowed {allowed:e})"
    )]
    GramMismatch {
        index: usize,
        distance: f64,
        allowed: f64,
    },
    #[error("expected {want} symbols, got {got}")]
    SymbolCount { got: usize, want: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Exponent vector (k_1, …, k_L), one entry per multiplier. The dilation
/// identity is claimed only for Σ k_l ≤ depth.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultiIndex {
    pub k: Vec<usize>,
}

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.k.iter().sum()
    }

    /// Stable text form used as report key: "k_1,k_2,...".
    pub fn label(&self) -> String {
        self.k
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// All exponent vectors of length `l` with total degree ≤ `max_degree`,
/// ordered by degree then lexicographically.
pub fn multi_indices(l: usize, max_degree: usize) -> Vec<MultiIndex> {
    fn fill(out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>, slots: usize, left: usize) {
        if slots == 0 {
            if left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for take in 0..=left {
            prefix.push(take);
            fill(out, prefix, slots - 1, left - take);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    for degree in 0..=max_degree {
        fill(&mut raw, &mut Vec::new(), l, degree);
    }
    raw.into_iter().map(|k| MultiIndex { k }).collect()
}

/// The materialized truncated dilation system.
#[derive(Debug, Clone)]
pub struct TruncatedDilation {
    n: usize,
    witnesses: Vec<UnitaryWitness>,
    depth: usize,
    block_dim: usize,
    total_dim: usize,
    u: Vec<ComplexMatrix>,
    /// Convention marker for the tensor-slot traces in E; the n×n slot always
    /// carries the standard trace. Fixed to Normalized by construction.
    trace_mode: TraceMode,
    /// Cached index permutation of the whole-block cyclic right shift.
    block_perm: Vec<usize>,
    /// Cached index permutation of each per-chain shift S_l.
    chain_perms: Vec<Vec<usize>>,
}

/// Embedding of a single witness matrix into the block algebra
/// M_{d_1} ⊗ … ⊗ M_{d_L}, acting on slot `slot`.
fn slot_embed(
    v: &ComplexMatrix,
    dims: &[usize],
    slot: usize,
) -> Result<ComplexMatrix, LinalgError> {
    let mut out = ComplexMatrix::identity(1);
    for (s, &ds) in dims.iter().enumerate() {
        out = if s == slot {
            out.kron(v)?
        } else {
            out.kron(&ComplexMatrix::identity(ds))?
        };
    }
    Ok(out)
}

/// Builds the dilation for a family of witnesses over a common n at the
/// given truncation depth.
pub fn build_dilation(
    witnesses: &[UnitaryWitness],
    depth: usize,
) -> Result<TruncatedDilation, DilationError> {
    let first = witnesses.first().ok_or(DilationError::EmptyFamily)?;
    if depth == 0 {
        return Err(DilationError::BadDepth);
    }
    let n = first.n();
    for (index, w) in witnesses.iter().enumerate() {
        if w.n() != n {
            return Err(DilationError::MismatchedN {
                index,
                got: w.n(),
                want: n,
            });
        }
    }
    let dims: Vec<usize> = witnesses.iter().map(UnitaryWitness::d).collect();
    let block_dim: usize = dims.iter().product();
    let mut total: u128 = n as u128;
    for _ in 0..depth {
        total = total.saturating_mul(block_dim as u128);
    }
    if total > DIM_CAP as u128 {
        return Err(DilationError::DimensionCap {
            total_dim: total.min(u128::from(u64::MAX)) as usize,
            cap: DIM_CAP,
            entries: total.saturating_mul(total),
        });
    }
    let total_dim = total as usize;

    // Unitarity of u^l follows from unitarity of the witness matrices; the
    // implied Frobenius defect of u^l is the witness defect amplified by the
    // square root of the identity multiplicity.
    let dk1 = block_dim.pow(depth as u32 - 1);
    for (index, w) in witnesses.iter().enumerate() {
        let mult = ((block_dim / w.d()) * dk1) as f64;
        let worst = w
            .matrices()
            .iter()
            .map(ComplexMatrix::unitarity_defect)
            .fold(0.0, f64::max);
        let implied = worst * mult.sqrt() * (n as f64).sqrt();
        if implied > 1e-10 {
            return Err(DilationError::NonUnitaryWitness {
                index,
                defect: implied,
            });
        }
    }

    // u^l = Σ_j e_jj ⊗ (slot-l embedding of v^l_j) ⊗ I^{⊗(depth−1)},
    // written by direct index placement.
    let mut u = Vec::with_capacity(witnesses.len());
    for (l, w) in witnesses.iter().enumerate() {
        let mut ul = ComplexMatrix::zeros(total_dim, total_dim);
        for (j, vj) in w.matrices().iter().enumerate() {
            let wj = slot_embed(vj, &dims, l)?;
            let base = j * block_dim * dk1;
            for b in 0..block_dim {
                for bp in 0..block_dim {
                    let val = wj[(b, bp)];
                    if val == ZERO {
                        continue;
                    }
                    for r in 0..dk1 {
                        ul[(base + b * dk1 + r, base + bp * dk1 + r)] = val;
                    }
                }
            }
        }
        let _ = l;
        u.push(ul);
    }

    // Index permutations of the shifts, on composite indices
    // (a, b_1, …, b_K) with each block digit b_t further decomposed into L
    // slot digits. The whole-block shift rotates the b_t; the chain-l shift
    // rotates only the slot-l digit across blocks.
    let mut slot_stride = vec![1usize; dims.len()];
    for l in (0..dims.len().saturating_sub(1)).rev() {
        slot_stride[l] = slot_stride[l + 1] * dims[l + 1];
    }
    let mut block_perm = vec![0usize; total_dim];
    let mut chain_perms = vec![vec![0usize; total_dim]; witnesses.len()];
    for idx in 0..total_dim {
        let mut rest = idx;
        let mut blocks = vec![0usize; depth];
        for t in (0..depth).rev() {
            blocks[t] = rest % block_dim;
            rest /= block_dim;
        }
        let a = rest;
        let rebuild = |blocks: &[usize]| -> usize {
            let mut out = a;
            for &b in blocks {
                out = out * block_dim + b;
            }
            out
        };
        let mut rotated = vec![0usize; depth];
        rotated[0] = blocks[depth - 1];
        rotated[1..depth].copy_from_slice(&blocks[..depth - 1]);
        block_perm[idx] = rebuild(&rotated);
        for (l, perm) in chain_perms.iter_mut().enumerate() {
            let stride = slot_stride[l];
            let digits: Vec<usize> = blocks.iter().map(|b| (b / stride) % dims[l]).collect();
            let mut moved = blocks.clone();
            for t in 0..depth {
                let src = digits[(t + depth - 1) % depth];
                moved[t] = moved[t] - digits[t] * stride + src * stride;
            }
            perm[idx] = rebuild(&moved);
        }
    }

    Ok(TruncatedDilation {
        n,
        witnesses: witnesses.to_vec(),
        depth,
        block_dim,
        total_dim,
        u,
        trace_mode: TraceMode::Normalized,
        block_perm,
        chain_perms,
    })
}

impl TruncatedDilation {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn multiplier_count(&self) -> usize {
        self.u.len()
    }

    pub fn witnesses(&self) -> &[UnitaryWitness] {
        &self.witnesses
    }

    pub fn block_unitary(&self, l: usize) -> Result<&ComplexMatrix, DilationError> {
        self.u.get(l).ok_or(DilationError::IndexOutOfRange {
            index: l,
            count: self.u.len(),
        })
    }

    fn check_total(&self, y: &ComplexMatrix) -> Result<(), DilationError> {
        if y.rows() != self.total_dim || y.cols() != self.total_dim {
            return Err(DilationError::InputDim {
                rows: y.rows(),
                cols: y.cols(),
                want: self.total_dim,
            });
        }
        Ok(())
    }

    /// J(x) = x ⊗ I on the tensor blocks.
    pub fn embed_j(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, DilationError> {
        if x.rows() != self.n || x.cols() != self.n {
            return Err(DilationError::InputDim {
                rows: x.rows(),
                cols: x.cols(),
                want: self.n,
            });
        }
        let id = ComplexMatrix::identity(self.total_dim / self.n);
        Ok(x.kron(&id)?)
    }

    fn permuted(&self, perm: &[usize], y: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.total_dim, self.total_dim);
        for r in 0..self.total_dim {
            for c in 0..self.total_dim {
                let val = y[(r, c)];
                if val != ZERO {
                    out[(perm[r], perm[c])] = val;
                }
            }
        }
        out
    }

    /// The cyclic right shift of the K tensor blocks, applied as an index
    /// permutation (conjugation by the permutation matrix of `block_perm`).
    /// Equal to the composition of all per-chain shifts S_1∘…∘S_L.
    pub fn shift_s(&self, y: &ComplexMatrix) -> Result<ComplexMatrix, DilationError> {
        self.check_total(y)?;
        Ok(self.permuted(&self.block_perm, y))
    }

    /// The cyclic right shift S_l of chain l alone: the slot-l factor of
    /// block t moves to block t+1, everything else stays.
    pub fn shift_chain(&self, l: usize, y: &ComplexMatrix) -> Result<ComplexMatrix, DilationError> {
        self.check_total(y)?;
        let perm = self
            .chain_perms
            .get(l)
            .ok_or(DilationError::IndexOutOfRange {
                index: l,
                count: self.chain_perms.len(),
            })?;
        Ok(self.permuted(perm, y))
    }

    /// U_l(y) = (u^l)^* · S_l(y) · u^l with S_l the shift of witness l's own
    /// slot chain. For a single multiplier S_1 is the block shift.
    pub fn apply_u(&self, l: usize, y: &ComplexMatrix) -> Result<ComplexMatrix, DilationError> {
        let ul = self.block_unitary(l)?;
        let shifted = self.shift_chain(l, y)?;
        Ok(&(&ul.adjoint() * &shifted) * ul)
    }

    /// E(y): normalized partial trace over all K tensor blocks, landing back
    /// in M_n.
    pub fn expect_e(&self, y: &ComplexMatrix) -> Result<ComplexMatrix, DilationError> {
        self.check_total(y)?;
        let mut cur = y.clone();
        let mut dims: Vec<usize> = Vec::with_capacity(self.depth + 1);
        dims.push(self.n);
        dims.extend(std::iter::repeat(self.block_dim).take(self.depth));
        while dims.len() > 1 {
            let slot = dims.len() - 1;
            cur = cur.partial_trace_slot(&dims, slot, self.trace_mode)?;
            dims.pop();
        }
        Ok(cur)
    }
}

/// Verification record for a dilation against its family of symbols. The
/// per-index map holds, for each exponent vector, the worst deviation over
/// the matrix-unit basis of both the operator identity and the closed-form
/// entrywise power law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub max_deviation: f64,
    pub per_index: BTreeMap<String, f64>,
    pub commutator_norm: f64,
    pub trace_defect: f64,
    pub duality_defect: f64,
    pub pass: bool,
}

fn seeded_matrix(rng: &mut ChaCha12Rng, side: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(side, side, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

/// Checks every claimed identity of the dilation at tolerance `tol`:
/// T_{M_1}^{k_1}…T_{M_L}^{k_L}(e_ij) = E U_1^{k_1}…U_L^{k_L} J(e_ij) for all
/// Σ k_l ≤ depth over the matrix-unit basis, the entrywise power law, the
/// pairwise commutation of the U_l, trace preservation of J and the U_l, and
/// the trace duality τ_n(T(x)·y) = τ_total(U(J(x))·J(y)).
pub fn verify_dilation(
    dil: &TruncatedDilation,
    symbols: &[SchurSymbol],
    tol: f64,
) -> Result<DilationReport, DilationError> {
    let count = dil.multiplier_count();
    if symbols.len() != count {
        return Err(DilationError::SymbolCount {
            got: symbols.len(),
            want: count,
        });
    }
    for (index, sym) in symbols.iter().enumerate() {
        if sym.n() != dil.n {
            return Err(DilationError::MismatchedN {
                index,
                got: sym.n(),
                want: dil.n,
            });
        }
        let distance = gram_of(&dil.witnesses[index]).distance(sym.matrix());
        let allowed = 10.0 * tol;
        if distance > allowed {
            return Err(DilationError::GramMismatch {
                index,
                distance,
                allowed,
            });
        }
    }
    let n = dil.n;
    let indices = multi_indices(count, dil.depth);

    // Identities over the matrix-unit basis, fanned out per basis element.
    // Each worker walks the exponent lattice once, reusing the state of the
    // parent index (first nonzero exponent decremented).
    let basis: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    let per_basis: Vec<Result<Vec<f64>, DilationError>> = basis
        .par_iter()
        .map(|&(i, j)| {
            let e_ij = ComplexMatrix::unit(n, i, j);
            let mut states: BTreeMap<Vec<usize>, ComplexMatrix> = BTreeMap::new();
            let mut devs = Vec::with_capacity(indices.len());
            for idx in &indices {
                let state = match idx.k.iter().position(|&x| x > 0) {
                    None => dil.embed_j(&e_ij)?,
                    Some(l) => {
                        let mut parent = idx.k.clone();
                        parent[l] -= 1;
                        let prev = states.get(&parent).expect("parent precedes child");
                        dil.apply_u(l, prev)?
                    }
                };
                let compressed = dil.expect_e(&state)?;
                // Route 1: iterated entrywise application of the symbols.
                let mut applied = e_ij.clone();
                for (l, sym) in symbols.iter().enumerate() {
                    for _ in 0..idx.k[l] {
                        applied = sym
                            .apply_multiplier(&applied)
                            .expect("dimension checked above");
                    }
                }
                // Route 2: closed-form power law (Π_l m_l[i,j]^{k_l})·e_ij.
                let mut coeff = Complex64::new(1.0, 0.0);
                for (l, sym) in symbols.iter().enumerate() {
                    coeff *= sym.matrix()[(i, j)].powu(idx.k[l] as u32);
                }
                let power = e_ij.scale(coeff);
                let dev = compressed.distance(&applied).max(compressed.distance(&power));
                devs.push(dev);
                states.insert(idx.k.clone(), state);
            }
            Ok(devs)
        })
        .collect();

    let mut per_index = BTreeMap::new();
    let mut max_deviation: f64 = 0.0;
    let mut acc = vec![0.0f64; indices.len()];
    for devs in per_basis {
        let devs = devs?;
        for (slot, d) in acc.iter_mut().zip(devs) {
            *slot = slot.max(d);
        }
    }
    for (idx, dev) in indices.iter().zip(acc) {
        max_deviation = max_deviation.max(dev);
        per_index.insert(idx.label(), dev);
    }

    // Deterministic random probes for the automorphism-level checks.
    let mut rng = ChaCha12Rng::seed_from_u64(0x5c1ff7ed);
    let probes: Vec<ComplexMatrix> = (0..3).map(|_| seeded_matrix(&mut rng, dil.total_dim)).collect();
    let small_probes: Vec<ComplexMatrix> = (0..3).map(|_| seeded_matrix(&mut rng, n)).collect();

    let mut commutator_norm: f64 = 0.0;
    for l in 0..count {
        for m in l + 1..count {
            for y in &probes {
                let lm = dil.apply_u(l, &dil.apply_u(m, y)?)?;
                let ml = dil.apply_u(m, &dil.apply_u(l, y)?)?;
                commutator_norm = commutator_norm.max(lm.distance(&ml));
            }
        }
    }

    let mut trace_defect: f64 = 0.0;
    for x in &small_probes {
        let jx = dil.embed_j(x)?;
        trace_defect = trace_defect.max((jx.normalized_trace() - x.normalized_trace()).norm());
    }
    for l in 0..count {
        for y in &probes {
            let uy = dil.apply_u(l, y)?;
            trace_defect = trace_defect.max((uy.normalized_trace() - y.normalized_trace()).norm());
        }
    }

    let mut duality_defect: f64 = 0.0;
    for l in 0..count {
        for pair in small_probes.windows(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let lhs = (&symbols[l].apply_multiplier(x).expect("dims checked") * y)
                .normalized_trace();
            let rhs = (&dil.apply_u(l, &dil.embed_j(x)?)? * &dil.embed_j(y)?).normalized_trace();
            duality_defect = duality_defect.max((lhs - rhs).norm());
        }
    }

    let pass = max_deviation <= tol
        && commutator_norm <= tol
        && trace_defect <= tol
        && duality_defect <= tol;
    Ok(DilationReport {
        max_deviation,
        per_index,
        commutator_norm,
        trace_defect,
        duality_defect,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use crate::witness::fourier_witness;
    use num_complex::Complex64;
    use rand::rngs::StdRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, side: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(side, side, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
        crate::linalg::nearest_unitary(&random_matrix(rng, d)).unwrap()
    }

    fn scalar_ones_witness(n: usize) -> UnitaryWitness {
        UnitaryWitness::new(vec![ComplexMatrix::identity(1); n]).unwrap()
    }

    #[test]
    fn trivial_scalar_witness_dilates_the_identity_map() {
        let dil = build_dilation(&[scalar_ones_witness(2)], 2).unwrap();
        assert_eq!(dil.total_dim(), 2);
        assert!(dil.block_unitary(0).unwrap().distance(&ComplexMatrix::identity(2)) == 0.0);
        let report = verify_dilation(&dil, &[SchurSymbol::all_ones(2)], 1e-12).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.max_deviation <= 1e-14);
    }

    #[test]
    fn fourier_dilation_is_unitary_and_verifies() {
        let dil = build_dilation(&[fourier_witness(2)], 3).unwrap();
        assert_eq!(dil.total_dim(), 16);
        assert!(dil.block_unitary(0).unwrap().unitarity_defect() <= 1e-14);
        let report = verify_dilation(&dil, &[SchurSymbol::identity(2)], 1e-10).unwrap();
        assert!(report.pass, "{report:?}");
        // k ranges over 0..=3.
        assert_eq!(report.per_index.len(), 4);
    }

    #[test]
    fn embed_j_is_a_trace_preserving_homomorphism() {
        let mut rng = StdRng::seed_from_u64(4);
        let dil = build_dilation(&[fourier_witness(2)], 2).unwrap();
        for _ in 0..10 {
            let x = random_matrix(&mut rng, 2);
            let y = random_matrix(&mut rng, 2);
            let jx = dil.embed_j(&x).unwrap();
            let jy = dil.embed_j(&y).unwrap();
            assert!((&jx * &jy).distance(&dil.embed_j(&(&x * &y)).unwrap()) <= 1e-12);
            assert!(jx.adjoint().distance(&dil.embed_j(&x.adjoint()).unwrap()) <= 1e-15);
            assert!((jx.normalized_trace() - x.normalized_trace()).norm() <= 1e-12);
        }
        let id = dil.embed_j(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(id, ComplexMatrix::identity(dil.total_dim()));
    }

    #[test]
    fn expectation_inverts_the_embedding() {
        let mut rng = StdRng::seed_from_u64(5);
        let dil = build_dilation(&[fourier_witness(3)], 2).unwrap();
        for _ in 0..5 {
            let x = random_matrix(&mut rng, 3);
            let back = dil.expect_e(&dil.embed_j(&x).unwrap()).unwrap();
            assert!(back.distance(&x) <= 1e-14);
        }
    }

    #[test]
    fn expectation_on_elementary_tensors_takes_normalized_traces() {
        let mut rng = StdRng::seed_from_u64(6);
        // n=2, one witness with d=2, K=2: y = x ⊗ a ⊗ I.
        let w = UnitaryWitness::new(vec![random_unitary(&mut rng, 2); 2]).unwrap();
        let dil = build_dilation(&[w], 2).unwrap();
        let x = random_matrix(&mut rng, 2);
        let a = random_matrix(&mut rng, 2);
        let y = x
            .kron(&a)
            .unwrap()
            .kron(&ComplexMatrix::identity(2))
            .unwrap();
        let expected = x.scale(a.trace() / 2.0);
        assert!(dil.expect_e(&y).unwrap().distance(&expected) <= 1e-13);
    }

    #[test]
    fn expectation_preserves_positivity() {
        let mut rng = StdRng::seed_from_u64(7);
        let dil = build_dilation(&[fourier_witness(2)], 2).unwrap();
        for _ in 0..5 {
            let b = random_matrix(&mut rng, dil.total_dim());
            let psd = &b * &b.adjoint();
            let out = dil.expect_e(&psd).unwrap();
            let min = hermitian_eigen(&out).unwrap().values[0];
            assert!(min >= -1e-10, "min {min}");
        }
    }

    #[test]
    fn shift_moves_the_first_block_right_and_is_cyclic() {
        let mut rng = StdRng::seed_from_u64(8);
        let w = UnitaryWitness::new(vec![random_unitary(&mut rng, 2); 2]).unwrap();
        let dil = build_dilation(&[w], 3).unwrap();
        let x = random_matrix(&mut rng, 2);
        let a = random_matrix(&mut rng, 2);
        let id = ComplexMatrix::identity(2);
        let y = x.kron(&a).unwrap().kron(&id).unwrap().kron(&id).unwrap();
        let expect = x.kron(&id).unwrap().kron(&a).unwrap().kron(&id).unwrap();
        assert_eq!(dil.shift_s(&y).unwrap(), expect);

        let z = random_matrix(&mut rng, dil.total_dim());
        let mut cycled = z.clone();
        for _ in 0..3 {
            cycled = dil.shift_s(&cycled).unwrap();
        }
        assert_eq!(cycled, z);
        assert!((dil.shift_s(&z).unwrap().normalized_trace() - z.normalized_trace()).norm() == 0.0);
    }

    #[test]
    fn chain_shifts_move_single_slots_and_compose_to_the_block_shift() {
        let mut rng = StdRng::seed_from_u64(11);
        let w1 = UnitaryWitness::new(vec![random_unitary(&mut rng, 2); 2]).unwrap();
        let w2 = UnitaryWitness::new(vec![random_unitary(&mut rng, 3); 2]).unwrap();
        let dil = build_dilation(&[w1, w2], 2).unwrap();
        assert_eq!(dil.total_dim(), 72);

        // y = x ⊗ (p⊗q) ⊗ (r⊗s) with p, r in the d=2 slots and q, s in the
        // d=3 slots of the two blocks.
        let x = random_matrix(&mut rng, 2);
        let p = random_matrix(&mut rng, 2);
        let q = random_matrix(&mut rng, 3);
        let r = random_matrix(&mut rng, 2);
        let s = random_matrix(&mut rng, 3);
        let build = |s1: [&ComplexMatrix; 2], s2: [&ComplexMatrix; 2]| {
            x.kron(s1[0])
                .unwrap()
                .kron(s2[0])
                .unwrap()
                .kron(s1[1])
                .unwrap()
                .kron(s2[1])
                .unwrap()
        };
        // Entry products associate differently between the two kron orders,
        // so compare up to rounding rather than bit-exactly.
        let y = build([&p, &r], [&q, &s]);
        let moved0 = dil.shift_chain(0, &y).unwrap();
        let moved1 = dil.shift_chain(1, &y).unwrap();
        assert!(moved0.distance(&build([&r, &p], [&q, &s])) <= 1e-14);
        assert!(moved1.distance(&build([&p, &r], [&s, &q])) <= 1e-14);

        let z = random_matrix(&mut rng, dil.total_dim());
        let both = dil.shift_chain(0, &dil.shift_chain(1, &z).unwrap()).unwrap();
        let swapped = dil.shift_chain(1, &dil.shift_chain(0, &z).unwrap()).unwrap();
        let block = dil.shift_s(&z).unwrap();
        assert_eq!(both, block);
        assert_eq!(swapped, block);
    }

    #[test]
    fn apply_u_is_a_unital_star_automorphism() {
        let mut rng = StdRng::seed_from_u64(9);
        let dil = build_dilation(&[fourier_witness(2)], 2).unwrap();
        let id = ComplexMatrix::identity(dil.total_dim());
        assert!(dil.apply_u(0, &id).unwrap().distance(&id) <= 1e-14);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, dil.total_dim());
            let b = random_matrix(&mut rng, dil.total_dim());
            let uab = dil.apply_u(0, &(&a * &b)).unwrap();
            let ua_ub = &dil.apply_u(0, &a).unwrap() * &dil.apply_u(0, &b).unwrap();
            assert!(uab.distance(&ua_ub) <= 1e-11);
            let ua_star = dil.apply_u(0, &a.adjoint()).unwrap();
            assert!(ua_star.distance(&dil.apply_u(0, &a).unwrap().adjoint()) <= 1e-12);
        }
    }

    #[test]
    fn single_step_kills_off_diagonal_for_identity_symbol() {
        // M = I_2: m_01 = 0, so E U J(e_01) must vanish.
        let dil = build_dilation(&[fourier_witness(2)], 2).unwrap();
        let e01 = ComplexMatrix::unit(2, 0, 1);
        let out = dil
            .expect_e(&dil.apply_u(0, &dil.embed_j(&e01).unwrap()).unwrap())
            .unwrap();
        assert!(out.frobenius_norm() <= 1e-14);
    }

    #[test]
    fn two_witness_dilation_commutes_and_verifies_mixed_indices() {
        let mut rng = StdRng::seed_from_u64(10);
        let w1 = UnitaryWitness::new((0..2).map(|_| random_unitary(&mut rng, 2)).collect()).unwrap();
        let w2 = UnitaryWitness::new((0..2).map(|_| random_unitary(&mut rng, 2)).collect()).unwrap();
        let s1 = SchurSymbol::new(gram_of(&w1)).unwrap();
        let s2 = SchurSymbol::new(gram_of(&w2)).unwrap();
        let dil = build_dilation(&[w1, w2], 2).unwrap();
        assert_eq!(dil.block_dim(), 4);
        assert_eq!(dil.total_dim(), 32);
        let report = verify_dilation(&dil, &[s1, s2], 1e-10).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.commutator_norm <= 1e-12, "{report:?}");
        // Indices of degree ≤ 2 in two variables: 6 of them.
        assert_eq!(report.per_index.len(), 6);
        assert!(report.per_index.contains_key("1,1"));
    }

    #[test]
    fn verification_window_is_sharp_beyond_the_depth() {
        // Frozen fixture: witness v_0 = I, v_1 = diag(1, i) has Gram entry
        // m_01 = (1+i)/2. At K = 2 and k = 3 the wrapped shift reuses block
        // 1, and E U³ J(e_01) = τ(A²)·τ(A)·e_01 = 0 with A = diag(1, i),
        // while T³(e_01) = ((1+i)/2)³·e_01. The deviation is the modulus
        // (√2/2)³ = 2^{-3/2}.
        let w = UnitaryWitness::new(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 1.0)]),
        ])
        .unwrap();
        let sym = SchurSymbol::new(gram_of(&w)).unwrap();
        let dil = build_dilation(&[w], 2).unwrap();
        // Inside the window everything holds.
        let report = verify_dilation(&dil, &[sym.clone()], 1e-10).unwrap();
        assert!(report.pass, "{report:?}");
        // One step past the window the identity genuinely fails.
        let e01 = ComplexMatrix::unit(2, 0, 1);
        let mut state = dil.embed_j(&e01).unwrap();
        for _ in 0..3 {
            state = dil.apply_u(0, &state).unwrap();
        }
        let compressed = dil.expect_e(&state).unwrap();
        let m01 = sym.matrix()[(0, 1)];
        let claimed = e01.scale(m01.powu(3));
        let deviation = compressed.distance(&claimed);
        assert!(
            (deviation - 2.0f64.powf(-1.5)).abs() <= 1e-12,
            "deviation {deviation}"
        );
    }

    #[test]
    fn verify_rejects_a_symbol_far_from_the_witness_gram() {
        let dil = build_dilation(&[fourier_witness(2)], 2).unwrap();
        let err = verify_dilation(&dil, &[SchurSymbol::all_ones(2)], 1e-10).unwrap_err();
        assert!(matches!(err, DilationError::GramMismatch { .. }));
    }

    #[test]
    fn build_rejects_oversized_and_mismatched_families() {
        let w8 = UnitaryWitness::new(vec![ComplexMatrix::identity(8); 2]).unwrap();
        let err = build_dilation(&[w8], 4).unwrap_err();
        assert!(matches!(err, DilationError::DimensionCap { .. }));

        let err = build_dilation(&[fourier_witness(2), fourier_witness(3)], 2).unwrap_err();
        assert!(matches!(err, DilationError::MismatchedN { .. }));

        let err = build_dilation(&[], 2).unwrap_err();
        assert!(matches!(err, DilationError::EmptyFamily));
    }

    #[test]
    fn multi_index_enumeration_is_graded() {
        let idx = multi_indices(2, 2);
        let labels: Vec<String> = idx.iter().map(MultiIndex::label).collect();
        assert_eq!(labels, ["0,0", "0,1", "1,0", "0,2", "1,1", "2,0"]);
        assert_eq!(multi_indices(1, 4).len(), 5);
    }
}
