//! Bit-level plumbing shared by every scheme: combinadic ranking/unranking of
//! K-subsets, activation-pattern codebooks, and unit-energy QAM/PSK alphabets.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    acc
}

/// floor(log2 v) for v >= 1.
pub fn floor_log2(v: u128) -> u32 {
    127 - v.leading_zeros()
}

/// Most-significant-bit-first expansion of `value` into `nbits` booleans.
pub fn bits_msb(value: u128, nbits: usize) -> Vec<bool> {
    (0..nbits).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Inverse of [`bits_msb`].
pub fn uint_from_bits(bits: &[bool]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128)
}

/// Active/inactive status of the slots (or units) in one frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern {
    slots: Vec<bool>,
}

impl ActivationPattern {
    pub fn new(slots: Vec<bool>) -> Self {
        Self { slots }
    }

    pub fn from_active_indices(len: usize, active: &[usize]) -> Self {
        let mut slots = vec![false; len];
        for &i in active {
            slots[i] = true;
        }
        Self { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.slots.iter().filter(|&&b| b).count()
    }

    pub fn is_active(&self, slot: usize) -> bool {
        self.slots[slot]
    }

    pub fn slots(&self) -> &[bool] {
        &self.slots
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.slots.len()).filter(|&i| self.slots[i]).collect()
    }
}

/// Returns the `rank`-th K-subset of {0..n-1} in lexicographic order of the
/// active-index sets, as a boolean activation pattern.
pub fn combinadic_unrank(rank: u128, n: usize, k: usize) -> Result<ActivationPattern> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "unrank requires 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let total = binomial(n, k);
    if rank >= total {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} out of range for C({n},{k}) = {total}"
        )));
    }
    let mut remaining = rank;
    let mut active = Vec::with_capacity(k);
    let mut next = 0usize;
    for pos in 0..k {
        let mut c = next;
        loop {
            // patterns that start with `c` at this position
            let count = binomial(n - c - 1, k - pos - 1);
            if count <= remaining {
                remaining -= count;
                c += 1;
            } else {
                active.push(c);
                next = c + 1;
                break;
            }
        }
    }
    Ok(ActivationPattern::from_active_indices(n, &active))
}

/// Inverse of [`combinadic_unrank`].
pub fn combinadic_rank(pattern: &ActivationPattern) -> u128 {
    let n = pattern.len();
    let active = pattern.active_indices();
    let k = active.len();
    let mut rank = 0u128;
    for (pos, &c) in active.iter().enumerate() {
        let start = if pos == 0 { 0 } else { active[pos - 1] + 1 };
        for j in start..c {
            rank += binomial(n - j - 1, k - pos - 1);
        }
    }
    rank
}

/// The ordered set of valid activation patterns plus the implied index width.
#[derive(Debug, Clone)]
pub struct PatternCodebook {
    patterns: Vec<ActivationPattern>,
    index_bits: usize,
    index_of: HashMap<Vec<bool>, usize>,
}

impl PatternCodebook {
    pub fn patterns(&self) -> &[ActivationPattern] {
        &self.patterns
    }

    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, index: usize) -> &ActivationPattern {
        &self.patterns[index]
    }

    pub fn index_of(&self, pattern: &ActivationPattern) -> Option<usize> {
        self.index_of.get(pattern.slots()).copied()
    }

    pub fn contains(&self, pattern: &ActivationPattern) -> bool {
        self.index_of(pattern).is_some()
    }
}

/// Builds the codebook of valid patterns for choosing `k` of `n` slots.
///
/// The default is the first 2^floor(log2 C(n,k)) patterns in combinadic
/// (lexicographic) order; an explicit `override_patterns` list replaces the
/// default verbatim.
pub fn build_pattern_codebook(
    n: usize,
    k: usize,
    override_patterns: Option<Vec<ActivationPattern>>,
) -> Result<PatternCodebook> {
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "codebook requires 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let index_bits = floor_log2(binomial(n, k)) as usize;
    let size = 1usize << index_bits;
    let patterns = match override_patterns {
        Some(list) => {
            if list.len() != size {
                return Err(Error::InvalidConfig(format!(
                    "override codebook has {} patterns, expected {size}",
                    list.len()
                )));
            }
            for p in &list {
                if p.len() != n || p.weight() != k {
                    return Err(Error::InvalidConfig(format!(
                        "override pattern {:?} is not a weight-{k} pattern of length {n}",
                        p.slots()
                    )));
                }
            }
            list
        }
        None => (0..size as u128)
            .map(|r| combinadic_unrank(r, n, k))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut index_of = HashMap::with_capacity(size);
    for (i, p) in patterns.iter().enumerate() {
        if index_of.insert(p.slots().to_vec(), i).is_some() {
            return Err(Error::InvalidConfig(format!(
                "duplicate pattern {:?} in codebook",
                p.slots()
            )));
        }
    }
    Ok(PatternCodebook {
        patterns,
        index_bits,
        index_of,
    })
}

/// A unit-average-energy modulation alphabet with a bits <-> point bijection.
///
/// `points[label]` is the constellation point carrying the bit label `label`
/// read MSB-first, so the label lookup is the inverse of indexing.
#[derive(Debug, Clone)]
pub struct ComplexAlphabet {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl ComplexAlphabet {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Label of the alphabet point nearest to `z`; ties go to the lowest label.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Exact label of a point known to be in the alphabet.
    pub fn label_of(&self, z: Complex64) -> Option<usize> {
        self.points
            .iter()
            .position(|p| (z - p).norm_sqr() < 1e-18)
    }
}

fn gray_encode(v: usize) -> usize {
    v ^ (v >> 1)
}

fn gray_decode(mut g: usize) -> usize {
    let mut v = 0usize;
    while g != 0 {
        v ^= g;
        g >>= 1;
    }
    v
}

/// Gray-coded PAM levels for `bits` bits per axis: the label selects one of
/// the odd-integer amplitudes -(L-1), ..., L-1 so that adjacent amplitudes
/// differ in one label bit.
fn gray_pam(bits: usize) -> Vec<f64> {
    let levels = 1usize << bits;
    (0..levels)
        .map(|label| {
            let idx = gray_decode(label);
            (2 * idx) as f64 - (levels - 1) as f64
        })
        .collect()
}

fn normalize_unit_energy(points: &mut [Complex64]) {
    let mean: f64 = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
    let scale = mean.sqrt().recip();
    for p in points.iter_mut() {
        *p *= scale;
    }
}

/// Builds a Gray-mapped, unit-average-energy QAM alphabet.
///
/// Supported orders: 2 (BPSK), 4, 8 (4x2 rectangular), 16, 32 (cross), 64.
pub fn make_qam(order: usize) -> Result<ComplexAlphabet> {
    let points = match order {
        2 => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        4 | 16 | 64 => {
            let half = order.trailing_zeros() as usize / 2;
            rect_qam(half, half)
        }
        8 => rect_qam(2, 1),
        32 => cross_qam_32(),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "unsupported modulation order {order}"
            )))
        }
    };
    let mut points = points;
    normalize_unit_energy(&mut points);
    Ok(ComplexAlphabet {
        bits_per_symbol: points.len().trailing_zeros() as usize,
        points,
    })
}

/// Rectangular QAM with per-axis Gray labels; I bits are the high bits.
fn rect_qam(i_bits: usize, q_bits: usize) -> Vec<Complex64> {
    let i_pam = gray_pam(i_bits);
    let q_pam = gray_pam(q_bits);
    let q_count = 1usize << q_bits;
    (0..(1usize << (i_bits + q_bits)))
        .map(|label| {
            let i_label = label >> q_bits;
            let q_label = label & (q_count - 1);
            Complex64::new(i_pam[i_label], q_pam[q_label])
        })
        .collect()
}

/// 32-point cross constellation: the 6x6 odd-integer grid minus its corners,
/// labeled along a row-major scan with binary-reflected Gray sequencing.
fn cross_qam_32() -> Vec<Complex64> {
    let axis = [-5.0f64, -3.0, -1.0, 1.0, 3.0, 5.0];
    let mut scan = Vec::with_capacity(32);
    for &im in axis.iter().rev() {
        for &re in &axis {
            if re.abs() == 5.0 && im.abs() == 5.0 {
                continue;
            }
            scan.push(Complex64::new(re, im));
        }
    }
    let mut points = vec![Complex64::new(0.0, 0.0); 32];
    for (seq, &p) in scan.iter().enumerate() {
        points[gray_encode(seq)] = p;
    }
    points
}
