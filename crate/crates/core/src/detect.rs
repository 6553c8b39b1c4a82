//! Detectors: brute-force ML over an enumerated signal set, complex-valued
//! greedy sparse recovery (OMP, CoSaMP, SP), and the sparsity-exploiting
//! detection loop that validates the recovered activation pattern and maps
//! slot subvectors to the nearest signal-set member.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bitcore::ActivationPattern;
use crate::error::{Error, Result};
use crate::schemes::{
    decode_frame, enumerate_signal_set, frame_bit_budget, Frame, SchemeConfig,
};

pub const SR_MAX_ITER: usize = 50;
pub const SR_TOL: f64 = 1e-6;
const LS_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrKind {
    Omp,
    Cosamp,
    Sp,
}

impl SrKind {
    pub fn label(&self) -> &'static str {
        match self {
            SrKind::Omp => "omp",
            SrKind::Cosamp => "cosamp",
            SrKind::Sp => "sp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Ml,
    Alg1(SrKind),
}

impl DetectorKind {
    pub fn label(&self) -> String {
        match self {
            DetectorKind::Ml => "ml".into(),
            DetectorKind::Alg1(sr) => format!("alg1-{}", sr.label()),
        }
    }
}

/// Output of a sparse-recovery solver.
#[derive(Debug, Clone)]
pub struct SparseEstimate {
    pub values: DVector<Complex64>,
    pub support: Vec<usize>,
    pub residual_norm: f64,
}

/// Output of a frame detector: always a valid signal-set member.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub frame: Frame,
    pub bits: Vec<bool>,
    pub method: DetectorKind,
    pub sr_iterations: usize,
}

/// Minimum-norm least squares on the selected columns.
///
/// Thin QR with back-substitution on the well-conditioned path; falls back to
/// an SVD pseudo-inverse solve when the triangular factor is rank deficient
/// or the system is underdetermined.
fn least_squares_on(
    a: &DMatrix<Complex64>,
    support: &[usize],
    y: &DVector<Complex64>,
) -> DVector<Complex64> {
    let m = a.nrows();
    let k = support.len();
    let mut sub = DMatrix::zeros(m, k);
    for (j, &col) in support.iter().enumerate() {
        sub.column_mut(j).copy_from(&a.column(col));
    }
    if m >= k {
        let qr = sub.clone().qr();
        let r = qr.r();
        let diag_max = (0..k).map(|i| r[(i, i)].norm()).fold(0.0f64, f64::max);
        let well_conditioned =
            k == 0 || (0..k).all(|i| r[(i, i)].norm() > LS_RANK_TOL * diag_max.max(1e-300));
        if well_conditioned {
            let rhs = qr.q().adjoint() * y;
            if let Some(z) = r.solve_upper_triangular(&rhs) {
                return z;
            }
        }
    }
    let svd = sub.svd(true, true);
    svd.solve(y, LS_RANK_TOL).expect("svd solve with u,v computed")
}

fn residual(
    a: &DMatrix<Complex64>,
    support: &[usize],
    coef: &DVector<Complex64>,
    y: &DVector<Complex64>,
) -> DVector<Complex64> {
    let mut r = y.clone();
    for (j, &col) in support.iter().enumerate() {
        r.axpy(-coef[j], &a.column(col), Complex64::new(1.0, 0.0));
    }
    r
}

fn estimate_from(
    n: usize,
    support: Vec<usize>,
    coef: &DVector<Complex64>,
    residual_norm: f64,
) -> SparseEstimate {
    let mut values = DVector::zeros(n);
    for (j, &col) in support.iter().enumerate() {
        values[col] = coef[j];
    }
    SparseEstimate {
        values,
        support,
        residual_norm,
    }
}

/// Indices of the `k` largest-magnitude entries, ties to the lowest index.
fn top_k_indices(v: &DVector<Complex64>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| {
        v[b].norm_sqr()
            .partial_cmp(&v[a].norm_sqr())
            .unwrap()
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

fn check_sr_args(a: &DMatrix<Complex64>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("sparsity must be >= 1".into()));
    }
    if k > a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "sparsity {k} exceeds {} columns",
            a.ncols()
        )));
    }
    Ok(())
}

/// Orthogonal matching pursuit: k greedy selections by maximal conjugate
/// correlation with the residual, least-squares re-fit each iteration.
pub fn omp(y: &DVector<Complex64>, a: &DMatrix<Complex64>, k: usize) -> Result<SparseEstimate> {
    check_sr_args(a, k)?;
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut in_support = vec![false; a.ncols()];
    let mut r = y.clone();
    let mut coef = DVector::zeros(0);
    for _ in 0..k {
        let proxy = a.adjoint() * &r;
        let mut best = usize::MAX;
        let mut best_mag = -1.0;
        for i in 0..proxy.len() {
            if !in_support[i] && proxy[i].norm_sqr() > best_mag {
                best_mag = proxy[i].norm_sqr();
                best = i;
            }
        }
        support.push(best);
        in_support[best] = true;
        coef = least_squares_on(a, &support, y);
        r = residual(a, &support, &coef, y);
    }
    Ok(estimate_from(a.ncols(), support, &coef, r.norm()))
}

/// Compressed-sampling matching pursuit: merge the top-2k proxy indices with
/// the current support, least-squares on the merge, prune to the top k.
pub fn cosamp(
    y: &DVector<Complex64>,
    a: &DMatrix<Complex64>,
    k: usize,
    max_iter: usize,
    tol: f64,
) -> Result<SparseEstimate> {
    check_sr_args(a, k)?;
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
    }
    let n = a.ncols();
    let mut support: Vec<usize> = Vec::new();
    let mut coef = DVector::zeros(0);
    let mut r = y.clone();
    let mut prev_norm = r.norm();
    for _ in 0..max_iter {
        let proxy = a.adjoint() * &r;
        let mut merged = top_k_indices(&proxy, (2 * k).min(n));
        for &s in &support {
            if !merged.contains(&s) {
                merged.push(s);
            }
        }
        merged.sort_unstable();
        let merged_coef = least_squares_on(a, &merged, y);
        let mut full = DVector::zeros(n);
        for (j, &col) in merged.iter().enumerate() {
            full[col] = merged_coef[j];
        }
        support = top_k_indices(&full, k);
        support.sort_unstable();
        coef = least_squares_on(a, &support, y);
        r = residual(a, &support, &coef, y);
        let norm = r.norm();
        let change = (prev_norm - norm).abs() / prev_norm.max(1e-300);
        prev_norm = norm;
        if change < tol {
            break;
        }
    }
    Ok(estimate_from(n, support, &coef, prev_norm))
}

/// Subspace pursuit: expand the support with the top-k proxy indices,
/// least-squares, keep the top-k coefficients, re-fit; stop when the
/// residual norm stops decreasing.
pub fn subspace_pursuit(
    y: &DVector<Complex64>,
    a: &DMatrix<Complex64>,
    k: usize,
    max_iter: usize,
) -> Result<SparseEstimate> {
    check_sr_args(a, k)?;
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
    }
    let n = a.ncols();
    let proxy = a.adjoint() * y;
    let mut support = top_k_indices(&proxy, k);
    support.sort_unstable();
    let mut coef = least_squares_on(a, &support, y);
    let mut r = residual(a, &support, &coef, y);
    let mut best_norm = r.norm();
    for _ in 0..max_iter {
        let proxy = a.adjoint() * &r;
        let mut candidate = top_k_indices(&proxy, k);
        for &s in &support {
            if !candidate.contains(&s) {
                candidate.push(s);
            }
        }
        candidate.sort_unstable();
        let cand_coef = least_squares_on(a, &candidate, y);
        let mut full = DVector::zeros(n);
        for (j, &col) in candidate.iter().enumerate() {
            full[col] = cand_coef[j];
        }
        let mut new_support = top_k_indices(&full, k);
        new_support.sort_unstable();
        let new_coef = least_squares_on(a, &new_support, y);
        let new_r = residual(a, &new_support, &new_coef, y);
        let new_norm = new_r.norm();
        if new_norm >= best_norm {
            break;
        }
        support = new_support;
        coef = new_coef;
        r = new_r;
        best_norm = new_norm;
    }
    Ok(estimate_from(n, support, &coef, best_norm))
}

pub fn run_sr(
    kind: SrKind,
    y: &DVector<Complex64>,
    a: &DMatrix<Complex64>,
    k: usize,
) -> Result<SparseEstimate> {
    match kind {
        SrKind::Omp => omp(y, a, k),
        SrKind::Cosamp => cosamp(y, a, k, SR_MAX_ITER, SR_TOL),
        SrKind::Sp => subspace_pursuit(y, a, k, SR_MAX_ITER),
    }
}

/// A precomputed candidate list for brute-force ML over sparse vectors.
///
/// Scoring uses ||y - Hx||^2 = ||y||^2 - 2 Re(x^H H^H y) + x^H (H^H H) x with
/// the Gram matrix computed once per received vector, so each candidate costs
/// O(nnz^2) instead of O(m * nnz).
pub struct MlCandidates {
    dim: usize,
    supports: Vec<Vec<(usize, Complex64)>>,
}

impl MlCandidates {
    pub fn new(dim: usize, supports: Vec<Vec<(usize, Complex64)>>) -> Self {
        Self { dim, supports }
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn supports(&self) -> &[Vec<(usize, Complex64)>] {
        &self.supports
    }

    /// Index of the candidate minimizing ||y - Hx||^2; ties go to the lowest
    /// enumeration index.
    pub fn detect_index(&self, y: &DVector<Complex64>, h: &DMatrix<Complex64>) -> usize {
        assert_eq!(h.ncols(), self.dim, "channel width mismatch");
        let hy = h.adjoint() * y;
        let gram = h.adjoint() * h;
        let mut best = 0usize;
        let mut best_score = f64::INFINITY;
        for (ci, support) in self.supports.iter().enumerate() {
            let mut quad = Complex64::new(0.0, 0.0);
            let mut lin = Complex64::new(0.0, 0.0);
            for &(i, vi) in support {
                lin += vi.conj() * hy[i];
                for &(j, vj) in support {
                    quad += vi.conj() * gram[(i, j)] * vj;
                }
            }
            let score = quad.re - 2.0 * lin.re;
            if score < best_score {
                best_score = score;
                best = ci;
            }
        }
        best
    }
}

/// Brute-force ML detector for an index-modulation scheme; candidates are
/// enumerated once at construction.
pub struct MlDetector {
    cfg: SchemeConfig,
    candidates: MlCandidates,
    frames: Vec<Frame>,
}

impl MlDetector {
    pub fn new(cfg: &SchemeConfig) -> Result<Self> {
        let frames: Vec<Frame> = enumerate_signal_set(cfg)?.collect();
        let supports = frames.iter().map(|f| f.support().to_vec()).collect();
        Ok(Self {
            cfg: cfg.clone(),
            candidates: MlCandidates::new(cfg.frame_dim(), supports),
            frames,
        })
    }

    pub fn detect(&self, y: &DVector<Complex64>, h: &DMatrix<Complex64>) -> DetectionResult {
        let idx = self.candidates.detect_index(y, h);
        let frame = self.frames[idx].clone();
        let bits = crate::bitcore::bits_msb(idx as u128, frame_bit_budget(&self.cfg));
        DetectionResult {
            frame,
            bits,
            method: DetectorKind::Ml,
            sr_iterations: 0,
        }
    }
}

/// One-shot ML detection; builds the candidate list on every call, so prefer
/// [`MlDetector`] inside Monte Carlo loops. Refuses sets above the
/// enumeration cap (use the sparsity-exploiting detector instead).
pub fn ml_detect(
    y: &DVector<Complex64>,
    h: &DMatrix<Complex64>,
    cfg: &SchemeConfig,
) -> Result<DetectionResult> {
    Ok(MlDetector::new(cfg)?.detect(y, h))
}

/// Nearest per-slot signal vector: the slot alphabet has one nonzero, so the
/// best position/symbol pair minimizes |v_p - s|^2 - |v_p|^2 over positions p
/// and alphabet points s. Ties go to the lowest (position, label).
pub fn nearest_slot_vector(subvec: &[Complex64], cfg: &SchemeConfig) -> (usize, usize) {
    let alphabet = cfg.alphabet();
    let mut best_pos = 0usize;
    let mut best_label = 0usize;
    let mut best_score = f64::INFINITY;
    for (p, &v) in subvec.iter().enumerate() {
        for (label, &s) in alphabet.points().iter().enumerate() {
            let score = (v - s).norm_sqr() - v.norm_sqr();
            if score < best_score {
                best_score = score;
                best_pos = p;
                best_label = label;
            }
        }
    }
    (best_pos, best_label)
}

fn slot_subvec(values: &DVector<Complex64>, slot: usize, d: usize) -> Vec<Complex64> {
    (0..d).map(|i| values[slot * d + i]).collect()
}

fn tap_of_estimate(est: &SparseEstimate, n_slots: usize, d: usize) -> ActivationPattern {
    let mut active = vec![false; n_slots];
    for &i in &est.support {
        if est.values[i].norm_sqr() > 0.0 {
            active[i / d] = true;
        }
    }
    ActivationPattern::new(active)
}

/// Maps the recovered vector onto a valid frame given an accepted TAP:
/// active slots go to the nearest slot-alphabet vector, inactive slots to
/// zero. Returns the frame and its decoded bits.
fn map_to_frame(
    est: &SparseEstimate,
    tap: &ActivationPattern,
    cfg: &SchemeConfig,
) -> (Frame, Vec<bool>) {
    let d = cfg.slot_dim();
    let mut support = Vec::with_capacity(cfg.k_active());
    for slot in tap.active_indices() {
        let sub = slot_subvec(&est.values, slot, d);
        let (pos, label) = nearest_slot_vector(&sub, cfg);
        support.push((slot * d + pos, cfg.alphabet().point(label)));
    }
    let frame = Frame::new(cfg.frame_dim(), support, tap.clone());
    let bits = decode_frame(cfg, &frame).expect("mapped frame is a valid codeword");
    (frame, bits)
}

/// Sparsity-exploiting detection: run the sparse-recovery solver with target
/// sparsity K+j, extract the activation pattern (a slot is active iff its
/// subvector has a nonzero entry), and accept once the pattern has weight K
/// and is a valid codebook member; otherwise increment j and retry.
///
/// The sparsity ramp stops at min(ND, m) rather than the nominal ND - K
/// bound: recovery with more nonzeros than measurements is ill-posed and the
/// accepted pattern never materializes past that point. On exhaustion the
/// fallback picks the valid TAP with the largest summed slot energy in the
/// last recovered vector.
pub fn algorithm1_detect(
    y: &DVector<Complex64>,
    h: &DMatrix<Complex64>,
    cfg: &SchemeConfig,
    sr: SrKind,
) -> Result<DetectionResult> {
    let k = cfg.k_active();
    let d = cfg.slot_dim();
    let nd = cfg.frame_dim();
    let max_sparsity = nd.min(y.len());
    let mut last_est: Option<SparseEstimate> = None;
    let mut j = 0usize;
    while k + j <= max_sparsity {
        let est = run_sr(sr, y, h, k + j)?;
        let tap = tap_of_estimate(&est, cfg.n_slots(), d);
        if tap.weight() == k && cfg.tap_codebook().contains(&tap) {
            let (frame, bits) = map_to_frame(&est, &tap, cfg);
            return Ok(DetectionResult {
                frame,
                bits,
                method: DetectorKind::Alg1(sr),
                sr_iterations: j,
            });
        }
        last_est = Some(est);
        j += 1;
    }

    // fallback: energy-ranked valid TAP over the last recovered vector
    let est = match last_est {
        Some(e) => e,
        None => run_sr(sr, y, h, k.min(max_sparsity.max(1)))?,
    };
    let mut best_tap = 0usize;
    let mut best_energy = -1.0;
    for (ti, tap) in cfg.tap_codebook().patterns().iter().enumerate() {
        let energy: f64 = tap
            .active_indices()
            .iter()
            .map(|&slot| {
                slot_subvec(&est.values, slot, d)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        if energy > best_energy {
            best_energy = energy;
            best_tap = ti;
        }
    }
    let tap = cfg.tap_codebook().pattern(best_tap).clone();
    let (frame, bits) = map_to_frame(&est, &tap, cfg);
    Ok(DetectionResult {
        frame,
        bits,
        method: DetectorKind::Alg1(sr),
        sr_iterations: j,
    })
}
