//! Load-modulation alphabets on the complex hypersphere (uniform sampling
//! plus spherical k-means), spatially- and time-indexed LM encoding, the
//! spatially-multiplexed baseline, and PASPR diagnostics.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::Rng;

use crate::bitcore::{
    bits_msb, build_pattern_codebook, floor_log2, uint_from_bits, PatternCodebook,
};
use crate::channel::complex_gaussian;
use crate::error::{Error, Result};

/// Default clustering settings for alphabet design.
pub const KMEANS_SAMPLES_PER_CENTROID: usize = 200;
pub const KMEANS_MAX_ITER: usize = 200;
pub const KMEANS_TOL: f64 = 1e-6;
pub const KMEANS_RESTARTS: usize = 3;

/// n_M complex n_t-vectors, all on the radius-sqrt(P) hypersphere.
#[derive(Debug, Clone)]
pub struct LmAlphabet {
    n_t: usize,
    p: f64,
    vectors: Vec<Vec<Complex64>>,
}

impl LmAlphabet {
    pub fn new(n_t: usize, p: f64, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if vectors.is_empty() || !vectors.len().is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "alphabet size {} is not a power of two",
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.len() != n_t {
                return Err(Error::InvalidConfig("alphabet vector dimension mismatch".into()));
            }
            let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if (norm2 - p).abs() > 1e-9 * p.max(1.0) {
                return Err(Error::InvalidConfig(format!(
                    "alphabet vector norm^2 {norm2} is off the radius-sqrt({p}) sphere"
                )));
            }
        }
        Ok(Self { n_t, p, vectors })
    }

    /// Constructs without the on-sphere check, for alphabets that are not
    /// constant-power by design (e.g. per-antenna BPSK baselines).
    pub fn new_unchecked(n_t: usize, p: f64, vectors: Vec<Vec<Complex64>>) -> Self {
        Self { n_t, p, vectors }
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn len(&self) -> usize {
        self.vectors.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
    pub fn bits_per_vector(&self) -> usize {
        floor_log2(self.vectors.len() as u128) as usize
    }
    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }
    pub fn vector(&self, label: usize) -> &[Complex64] {
        &self.vectors[label]
    }

    pub fn label_of(&self, v: &[Complex64]) -> Option<usize> {
        self.vectors.iter().position(|c| {
            c.iter()
                .zip(v)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                < 1e-18
        })
    }
}

/// Peak-to-average sum power ratio over the alphabet; exactly 1 for
/// constant-power (hypersphere) alphabets.
pub fn paspr(alphabet: &LmAlphabet) -> f64 {
    let norms: Vec<f64> = alphabet
        .vectors()
        .iter()
        .map(|v| v.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let peak = norms.iter().cloned().fold(f64::MIN, f64::max);
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    peak / mean
}

/// Uniform samples on the radius-sqrt(P) complex hypersphere: isotropic
/// Gaussian draws rescaled to the sphere.
pub fn sample_hypersphere<R: Rng + ?Sized>(
    n_t: usize,
    p: f64,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<Complex64> = (0..n_t).map(|_| complex_gaussian(rng, 1.0)).collect();
            let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if norm2 > 0.0 {
                let s = (p / norm2).sqrt();
                return v.into_iter().map(|z| z * s).collect();
            }
        })
        .collect()
}

fn dist2(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

fn project_to_sphere(v: &[Complex64], p: f64) -> Option<Vec<Complex64>> {
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm2 <= 1e-300 {
        return None;
    }
    let s = (p / norm2).sqrt();
    Some(v.iter().map(|z| z * s).collect())
}

/// k-means++ seeding from the sample set.
fn kmeanspp_init<R: Rng + ?Sized>(
    samples: &[Vec<Complex64>],
    k: usize,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(samples[rng.random_range(0..samples.len())].clone());
    let mut d2: Vec<f64> = samples.iter().map(|s| dist2(s, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.random_range(0..samples.len())
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut pick = samples.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        };
        centroids.push(samples[next].clone());
        let last = centroids.last().unwrap();
        for (i, s) in samples.iter().enumerate() {
            let d = dist2(s, last);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

/// One spherical k-means run; returns the centroids, final distortion, and
/// the per-iteration distortion trace.
pub fn spherical_kmeans_traced<R: Rng + ?Sized>(
    samples: &[Vec<Complex64>],
    n_m: usize,
    p: f64,
    max_iter: usize,
    tol: f64,
    rng: &mut R,
) -> Result<(Vec<Vec<Complex64>>, f64, Vec<f64>)> {
    if n_m == 0 || n_m > samples.len() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n_M <= sample count, got n_M={n_m}, count={}",
            samples.len()
        )));
    }
    let n_t = samples[0].len();
    let mut centroids = kmeanspp_init(samples, n_m, rng);
    let mut trace = Vec::new();
    let mut distortion = f64::INFINITY;
    for _ in 0..max_iter {
        // assign
        let mut sums = vec![vec![Complex64::new(0.0, 0.0); n_t]; n_m];
        let mut counts = vec![0usize; n_m];
        let mut new_distortion = 0.0;
        let mut farthest = (0usize, -1.0f64);
        for (si, s) in samples.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (ci, c) in centroids.iter().enumerate() {
                let d = dist2(s, c);
                if d < best_d {
                    best_d = d;
                    best = ci;
                }
            }
            new_distortion += best_d;
            if best_d > farthest.1 {
                farthest = (si, best_d);
            }
            counts[best] += 1;
            for (acc, z) in sums[best].iter_mut().zip(s) {
                *acc += z;
            }
        }
        trace.push(new_distortion);
        // update: mean re-projected to the sphere; empty or degenerate
        // clusters reseeded from the farthest sample
        let mut movement = 0.0f64;
        for ci in 0..n_m {
            let new_c = if counts[ci] == 0 {
                Some(samples[farthest.0].clone())
            } else {
                let mean: Vec<Complex64> = sums[ci]
                    .iter()
                    .map(|z| z / counts[ci] as f64)
                    .collect();
                project_to_sphere(&mean, p).or_else(|| Some(samples[farthest.0].clone()))
            };
            let new_c = new_c.unwrap();
            movement = movement.max(dist2(&new_c, &centroids[ci]).sqrt());
            centroids[ci] = new_c;
        }
        let converged = distortion.is_finite()
            && (distortion - new_distortion).abs() <= tol * distortion.max(1e-300);
        distortion = new_distortion;
        if movement < tol || converged {
            break;
        }
    }
    Ok((centroids, distortion, trace))
}

/// Spherical k-means clustering of on-sphere samples into an n_M-ary alphabet.
pub fn spherical_kmeans<R: Rng + ?Sized>(
    samples: &[Vec<Complex64>],
    n_m: usize,
    max_iter: usize,
    tol: f64,
    rng: &mut R,
) -> Result<LmAlphabet> {
    let p: f64 = samples
        .first()
        .map(|s| s.iter().map(|z| z.norm_sqr()).sum())
        .ok_or_else(|| Error::InvalidArgument("empty sample set".into()))?;
    let (centroids, _, _) = spherical_kmeans_traced(samples, n_m, p, max_iter, tol, rng)?;
    let n_t = samples[0].len();
    LmAlphabet::new(n_t, p, centroids)
}

/// End-to-end alphabet design: sample the sphere, cluster with restarts, keep
/// the lowest-distortion run.
pub fn design_lm_alphabet<R: Rng + ?Sized>(
    n_t: usize,
    n_m: usize,
    p: f64,
    rng: &mut R,
) -> Result<LmAlphabet> {
    let samples = sample_hypersphere(n_t, p, KMEANS_SAMPLES_PER_CENTROID * n_m, rng);
    let mut best: Option<(Vec<Vec<Complex64>>, f64)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let (c, d, _) =
            spherical_kmeans_traced(&samples, n_m, p, KMEANS_MAX_ITER, KMEANS_TOL, rng)?;
        if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
            best = Some((c, d));
        }
    }
    LmAlphabet::new(n_t, p, best.unwrap().0)
}

/// Per-antenna BPSK over n_t antennas, normalized to total power P: the
/// conventional spatial-multiplexing baseline expressed as a 2^n_t-ary
/// constant-power alphabet.
pub fn smp_bpsk_alphabet(n_t: usize, p: f64) -> LmAlphabet {
    let amp = (p / n_t as f64).sqrt();
    let vectors = (0..(1usize << n_t))
        .map(|label| {
            (0..n_t)
                .map(|a| {
                    // MSB-first: bit for antenna 0 is the highest bit
                    let bit = (label >> (n_t - 1 - a)) & 1;
                    Complex64::new(if bit == 0 { amp } else { -amp }, 0.0)
                })
                .collect()
        })
        .collect();
    LmAlphabet::new(n_t, p, vectors).expect("constant-power by construction")
}

/// Which indexed-LM arrangement a configuration realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmSchemeKind {
    /// n_K of n_L LM-TUs active per channel use, flat fading.
    SiLm,
    /// All n_L LM-TUs active with independent vectors, flat fading.
    SmpLm,
    /// Single LM-TU, flat fading.
    ConventionalLm,
    /// K of N time slots active, one LM-TU, frequency-selective.
    TiLm,
}

impl LmSchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            LmSchemeKind::SiLm => "si-lm",
            LmSchemeKind::SmpLm => "smp-lm",
            LmSchemeKind::ConventionalLm => "conv-lm",
            LmSchemeKind::TiLm => "ti-lm",
        }
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self, LmSchemeKind::TiLm)
    }
}

/// Parameters for the indexed load-modulation schemes.
#[derive(Debug, Clone)]
pub struct LmConfig {
    n_units: usize,
    n_active: usize,
    alphabet: LmAlphabet,
    lap_codebook: PatternCodebook,
    n_slots: usize,
    k_slots: usize,
    l_paths: usize,
    n_rx: usize,
    tap_codebook: PatternCodebook,
}

impl LmConfig {
    /// Flat-fading spatial configuration (SI-LM, SMP-LM, conventional LM).
    pub fn spatial(n_units: usize, n_active: usize, alphabet: LmAlphabet, n_rx: usize) -> Result<Self> {
        if n_active == 0 || n_active > n_units {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= n_K <= n_L, got n_K={n_active}, n_L={n_units}"
            )));
        }
        let lap_codebook = build_pattern_codebook(n_units, n_active, None)?;
        Ok(Self {
            n_units,
            n_active,
            alphabet,
            lap_codebook,
            n_slots: 1,
            k_slots: 1,
            l_paths: 1,
            n_rx,
            tap_codebook: build_pattern_codebook(1, 1, None)?,
        })
    }

    /// Frequency-selective time-indexed configuration (TI-LM; K = N is the
    /// conventional no-indexing case).
    pub fn time(
        n_slots: usize,
        k_slots: usize,
        l_paths: usize,
        alphabet: LmAlphabet,
        n_rx: usize,
    ) -> Result<Self> {
        if k_slots == 0 || k_slots > n_slots {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= K <= N, got K={k_slots}, N={n_slots}"
            )));
        }
        if l_paths == 0 || l_paths > n_slots {
            return Err(Error::InvalidConfig("need 1 <= L <= N".into()));
        }
        let tap_codebook = build_pattern_codebook(n_slots, k_slots, None)?;
        Ok(Self {
            n_units: 1,
            n_active: 1,
            alphabet,
            lap_codebook: build_pattern_codebook(1, 1, None)?,
            n_slots,
            k_slots,
            l_paths,
            n_rx,
            tap_codebook,
        })
    }

    pub fn with_n_rx(mut self, n_rx: usize) -> Self {
        self.n_rx = n_rx.max(1);
        self
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }
    pub fn n_active(&self) -> usize {
        self.n_active
    }
    pub fn n_t(&self) -> usize {
        self.alphabet.n_t()
    }
    pub fn alphabet(&self) -> &LmAlphabet {
        &self.alphabet
    }
    pub fn lap_codebook(&self) -> &PatternCodebook {
        &self.lap_codebook
    }
    pub fn tap_codebook(&self) -> &PatternCodebook {
        &self.tap_codebook
    }
    pub fn n_slots(&self) -> usize {
        self.n_slots
    }
    pub fn k_slots(&self) -> usize {
        self.k_slots
    }
    pub fn l_paths(&self) -> usize {
        self.l_paths
    }
    pub fn n_rx(&self) -> usize {
        self.n_rx
    }
}

/// Bits per channel use for the spatially-indexed scheme.
pub fn si_lm_rate(cfg: &LmConfig) -> f64 {
    si_lm_bit_budget(cfg) as f64
}

pub fn si_lm_bit_budget(cfg: &LmConfig) -> usize {
    cfg.lap_codebook().index_bits() + cfg.n_active() * cfg.alphabet().bits_per_vector()
}

/// Bits per channel use for the time-indexed scheme, counting CP slots.
pub fn ti_lm_rate(cfg: &LmConfig) -> f64 {
    ti_lm_bit_budget(cfg) as f64 / (cfg.n_slots() + cfg.l_paths() - 1) as f64
}

pub fn ti_lm_bit_budget(cfg: &LmConfig) -> usize {
    cfg.tap_codebook().index_bits() + cfg.k_slots() * cfg.alphabet().bits_per_vector()
}

/// Encodes spatial-index bits plus per-active-unit LM bits into a dense
/// n_L*n_t transmit vector.
pub fn si_lm_encode(cfg: &LmConfig, bits: &[bool]) -> Result<Vec<Complex64>> {
    let support = si_lm_encode_support(cfg, bits)?;
    let mut v = vec![Complex64::new(0.0, 0.0); cfg.n_units() * cfg.n_t()];
    for (i, z) in support {
        v[i] = z;
    }
    Ok(v)
}

pub fn si_lm_encode_support(cfg: &LmConfig, bits: &[bool]) -> Result<Vec<(usize, Complex64)>> {
    block_encode(
        bits,
        cfg.lap_codebook(),
        cfg.alphabet(),
        si_lm_bit_budget(cfg),
        cfg.n_t(),
    )
}

pub fn si_lm_decode(cfg: &LmConfig, v: &[Complex64]) -> Result<Vec<bool>> {
    block_decode(v, cfg.n_units(), cfg.lap_codebook(), cfg.alphabet())
}

/// Encodes time-index bits plus per-active-slot LM bits into a dense
/// N*n_t transmit vector.
pub fn ti_lm_encode(cfg: &LmConfig, bits: &[bool]) -> Result<Vec<Complex64>> {
    let support = ti_lm_encode_support(cfg, bits)?;
    let mut v = vec![Complex64::new(0.0, 0.0); cfg.n_slots() * cfg.n_t()];
    for (i, z) in support {
        v[i] = z;
    }
    Ok(v)
}

pub fn ti_lm_encode_support(cfg: &LmConfig, bits: &[bool]) -> Result<Vec<(usize, Complex64)>> {
    block_encode(
        bits,
        cfg.tap_codebook(),
        cfg.alphabet(),
        ti_lm_bit_budget(cfg),
        cfg.n_t(),
    )
}

pub fn ti_lm_decode(cfg: &LmConfig, v: &[Complex64]) -> Result<Vec<bool>> {
    block_decode(v, cfg.n_slots(), cfg.tap_codebook(), cfg.alphabet())
}

/// Shared block encoder: pattern bits pick the active blocks, then each
/// active block (in increasing index) carries one alphabet vector.
fn block_encode(
    bits: &[bool],
    codebook: &PatternCodebook,
    alphabet: &LmAlphabet,
    budget: usize,
    n_t: usize,
) -> Result<Vec<(usize, Complex64)>> {
    if bits.len() != budget {
        return Err(Error::InvalidArgument(format!(
            "expected {budget} bits, got {}",
            bits.len()
        )));
    }
    let ib = codebook.index_bits();
    let pattern = codebook.pattern(uint_from_bits(&bits[..ib]) as usize);
    let vb = alphabet.bits_per_vector();
    let mut cursor = ib;
    let mut support = Vec::new();
    for block in pattern.active_indices() {
        let label = uint_from_bits(&bits[cursor..cursor + vb]) as usize;
        cursor += vb;
        for (a, &z) in alphabet.vector(label).iter().enumerate() {
            support.push((block * n_t + a, z));
        }
    }
    Ok(support)
}

fn block_decode(
    v: &[Complex64],
    n_blocks: usize,
    codebook: &PatternCodebook,
    alphabet: &LmAlphabet,
) -> Result<Vec<bool>> {
    let n_t = alphabet.n_t();
    if v.len() != n_blocks * n_t {
        return Err(Error::Decode(format!(
            "vector length {} does not match {n_blocks} blocks of {n_t}",
            v.len()
        )));
    }
    let active: Vec<bool> = (0..n_blocks)
        .map(|b| v[b * n_t..(b + 1) * n_t].iter().any(|z| z.norm_sqr() > 0.0))
        .collect();
    let pattern = crate::bitcore::ActivationPattern::new(active);
    let index = codebook
        .index_of(&pattern)
        .ok_or_else(|| Error::Decode("activation pattern is not in the codebook".into()))?;
    let mut bits = bits_msb(index as u128, codebook.index_bits());
    for block in pattern.active_indices() {
        let label = alphabet
            .label_of(&v[block * n_t..(block + 1) * n_t])
            .ok_or_else(|| Error::Decode("block is not an alphabet vector".into()))?;
        bits.extend(bits_msb(label as u128, alphabet.bits_per_vector()));
    }
    Ok(bits)
}

/// Bit budget of one channel use (flat) or one frame (TI-LM) for a scheme tag.
pub fn lm_bit_budget(cfg: &LmConfig, scheme: LmSchemeKind) -> usize {
    match scheme {
        LmSchemeKind::TiLm => ti_lm_bit_budget(cfg),
        _ => si_lm_bit_budget(cfg),
    }
}

/// Enumerates the scheme's transmit vectors as supports, in the bit-string
/// order of the corresponding encoder.
pub fn enumerate_lm_set(
    cfg: &LmConfig,
    scheme: LmSchemeKind,
    cap_bits: usize,
) -> Result<Vec<Vec<(usize, Complex64)>>> {
    match scheme {
        LmSchemeKind::SmpLm if cfg.n_active() != cfg.n_units() => {
            return Err(Error::InvalidConfig("SMP-LM requires n_K = n_L".into()))
        }
        LmSchemeKind::ConventionalLm if cfg.n_units() != 1 => {
            return Err(Error::InvalidConfig("conventional LM requires n_L = 1".into()))
        }
        _ => {}
    }
    let budget = lm_bit_budget(cfg, scheme);
    if budget > cap_bits {
        return Err(Error::SetTooLarge {
            size: 1u128 << budget.min(127),
            cap: 1u128 << cap_bits,
        });
    }
    (0..(1u64 << budget))
        .map(|v| {
            let bits = bits_msb(v as u128, budget);
            match scheme {
                LmSchemeKind::TiLm => ti_lm_encode_support(cfg, &bits),
                _ => si_lm_encode_support(cfg, &bits),
            }
        })
        .collect()
}

/// Writes an alphabet as `n_t n_M P seed` followed by row-major `re im`
/// pairs with 17 significant digits.
pub fn export_alphabet<W: Write>(alphabet: &LmAlphabet, seed: u64, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {:.17e} {}",
        alphabet.n_t(),
        alphabet.len(),
        alphabet.p(),
        seed
    )?;
    for v in alphabet.vectors() {
        for z in v {
            writeln!(out, "{:.17e} {:.17e}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn import_alphabet<R: BufRead>(input: R) -> Result<(LmAlphabet, u64)> {
    let err = |msg: &str| Error::Parse {
        path: "<alphabet file>".into(),
        msg: msg.into(),
    };
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| err("missing header"))?
        .map_err(|e| err(&e.to_string()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 {
        return Err(err("header must be: n_t n_M P seed"));
    }
    let n_t: usize = toks[0].parse().map_err(|_| err("bad n_t"))?;
    let n_m: usize = toks[1].parse().map_err(|_| err("bad n_M"))?;
    let p: f64 = toks[2].parse().map_err(|_| err("bad P"))?;
    let seed: u64 = toks[3].parse().map_err(|_| err("bad seed"))?;
    let mut vectors = Vec::with_capacity(n_m);
    for _ in 0..n_m {
        let mut v = Vec::with_capacity(n_t);
        for _ in 0..n_t {
            let line = lines
                .next()
                .ok_or_else(|| err("truncated file"))?
                .map_err(|e| err(&e.to_string()))?;
            let mut t = line.split_whitespace();
            let re: f64 = t
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad entry"))?;
            let im: f64 = t
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad entry"))?;
            v.push(Complex64::new(re, im));
        }
        vectors.push(v);
    }
    Ok((LmAlphabet::new(n_t, p, vectors)?, seed))
}
