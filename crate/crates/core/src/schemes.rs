//! Unified encoder/decoder and signal-set enumeration for the time-, antenna-,
//! and mirror-indexed schemes, plus rate accounting.
//!
//! A frame spans `N` data slots; each slot carries a `D = n_t * M` subvector
//! with at most one nonzero, where `M = 2^m_rf` counts the mirror activation
//! patterns. The flat index of the nonzero in an active slot is
//! `slot * D + j * M + k` for active unit `j` and mirror pattern `k`
//! (antenna-major layout).

use num_complex::Complex64;

use crate::bitcore::{
    bits_msb, build_pattern_codebook, floor_log2, make_qam, uint_from_bits,
    ActivationPattern, ComplexAlphabet, PatternCodebook,
};
use crate::error::{Error, Result};

/// Default cap on signal-set enumeration (2^22 frames).
pub const ENUMERATION_CAP_BITS: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    TiSm,
    TiMbm,
    SmMbm,
    TiSmMbm,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::TiSm => "ti-sm",
            SchemeKind::TiMbm => "ti-mbm",
            SchemeKind::SmMbm => "sm-mbm",
            SchemeKind::TiSmMbm => "ti-sm-mbm",
        }
    }
}

/// SNR normalization convention for comparing K<N schemes against K=N ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyNorm {
    /// Each transmitted slot vector has unit average energy (default).
    PerSlot,
    /// Whole-frame average energy is held at one unit per slot, i.e. the
    /// active slots are boosted by N/K.
    PerFrame,
}

/// Complete description of one index-modulation scheme instance.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    kind: SchemeKind,
    n_slots: usize,
    k_active: usize,
    l_paths: usize,
    n_tx: usize,
    m_rf: usize,
    n_rx: usize,
    alphabet: ComplexAlphabet,
    tap_codebook: PatternCodebook,
    energy_norm: EnergyNorm,
}

impl SchemeConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: SchemeKind,
        n_slots: usize,
        k_active: usize,
        l_paths: usize,
        n_tx: usize,
        m_rf: usize,
        mod_order: usize,
        n_rx: usize,
    ) -> Result<Self> {
        Self::with_codebook(
            kind, n_slots, k_active, l_paths, n_tx, m_rf, mod_order, n_rx, None,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_codebook(
        kind: SchemeKind,
        n_slots: usize,
        k_active: usize,
        l_paths: usize,
        n_tx: usize,
        m_rf: usize,
        mod_order: usize,
        n_rx: usize,
        tap_override: Option<Vec<ActivationPattern>>,
    ) -> Result<Self> {
        if k_active == 0 || k_active > n_slots {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= K <= N, got K={k_active}, N={n_slots}"
            )));
        }
        if l_paths == 0 || n_tx == 0 || n_rx == 0 {
            return Err(Error::InvalidConfig(
                "L, n_t, and n_r must all be at least 1".into(),
            ));
        }
        match kind {
            SchemeKind::TiSm if m_rf != 0 => {
                return Err(Error::InvalidConfig("TI-SM requires m_rf = 0".into()))
            }
            SchemeKind::TiMbm if n_tx != 1 => {
                return Err(Error::InvalidConfig("TI-MBM requires n_t = 1".into()))
            }
            SchemeKind::SmMbm if k_active != n_slots => {
                return Err(Error::InvalidConfig("SM-MBM requires K = N".into()))
            }
            _ => {}
        }
        let alphabet = make_qam(mod_order)?;
        let tap_codebook = build_pattern_codebook(n_slots, k_active, tap_override)?;
        Ok(Self {
            kind,
            n_slots,
            k_active,
            l_paths,
            n_tx,
            m_rf,
            n_rx,
            alphabet,
            tap_codebook,
            energy_norm: EnergyNorm::PerSlot,
        })
    }

    pub fn with_n_rx(mut self, n_rx: usize) -> Self {
        self.n_rx = n_rx.max(1);
        self
    }

    pub fn with_energy_norm(mut self, norm: EnergyNorm) -> Self {
        self.energy_norm = norm;
        self
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }
    pub fn n_slots(&self) -> usize {
        self.n_slots
    }
    pub fn k_active(&self) -> usize {
        self.k_active
    }
    pub fn l_paths(&self) -> usize {
        self.l_paths
    }
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }
    pub fn m_rf(&self) -> usize {
        self.m_rf
    }
    pub fn n_rx(&self) -> usize {
        self.n_rx
    }
    pub fn alphabet(&self) -> &ComplexAlphabet {
        &self.alphabet
    }
    pub fn tap_codebook(&self) -> &PatternCodebook {
        &self.tap_codebook
    }
    pub fn energy_norm(&self) -> EnergyNorm {
        self.energy_norm
    }

    /// Number of mirror activation patterns, M = 2^m_rf.
    pub fn n_maps(&self) -> usize {
        1usize << self.m_rf
    }

    /// Per-slot dimension D = n_t * M.
    pub fn slot_dim(&self) -> usize {
        self.n_tx * self.n_maps()
    }

    /// Full transmit-vector length N * D.
    pub fn frame_dim(&self) -> usize {
        self.n_slots * self.slot_dim()
    }

    pub fn antenna_bits(&self) -> usize {
        floor_log2(self.n_tx as u128) as usize
    }

    pub fn symbol_bits(&self) -> usize {
        self.alphabet.bits_per_symbol()
    }

    /// Bits carried by one active slot: antenna + mirror + symbol bits.
    pub fn bits_per_slot(&self) -> usize {
        self.antenna_bits() + self.m_rf + self.symbol_bits()
    }
}

/// Total bits carried by one frame.
pub fn frame_bit_budget(cfg: &SchemeConfig) -> usize {
    cfg.tap_codebook().index_bits() + cfg.k_active() * cfg.bits_per_slot()
}

/// Achieved rate in bpcu, counting the L-1 cyclic-prefix slots.
pub fn scheme_rate(cfg: &SchemeConfig) -> f64 {
    frame_bit_budget(cfg) as f64 / (cfg.n_slots() + cfg.l_paths() - 1) as f64
}

/// Fraction of nonzero entries in a transmit vector, K / (N n_t M).
pub fn sparsity_factor(cfg: &SchemeConfig) -> f64 {
    cfg.k_active() as f64 / cfg.frame_dim() as f64
}

/// A sparse length-ND transmit vector: support indices with values, plus the
/// time-slot activation pattern it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    len: usize,
    support: Vec<(usize, Complex64)>,
    tap: ActivationPattern,
}

impl Frame {
    pub fn new(len: usize, support: Vec<(usize, Complex64)>, tap: ActivationPattern) -> Self {
        Self { len, support, tap }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn support(&self) -> &[(usize, Complex64)] {
        &self.support
    }

    pub fn tap(&self) -> &ActivationPattern {
        &self.tap
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.len];
        for &(i, z) in &self.support {
            v[i] = z;
        }
        v
    }
}

/// Maps a frame's worth of information bits onto a sparse transmit vector.
///
/// Bit order: TAP index bits first, then per active slot (in increasing slot
/// index) the antenna bits, mirror bits, and Gray-mapped symbol bits.
pub fn encode_frame(cfg: &SchemeConfig, bits: &[bool]) -> Result<Frame> {
    let budget = frame_bit_budget(cfg);
    if bits.len() != budget {
        return Err(Error::InvalidArgument(format!(
            "expected {budget} bits, got {}",
            bits.len()
        )));
    }
    let index_bits = cfg.tap_codebook().index_bits();
    let tap_index = uint_from_bits(&bits[..index_bits]) as usize;
    let tap = cfg.tap_codebook().pattern(tap_index).clone();

    let d = cfg.slot_dim();
    let m = cfg.n_maps();
    let ab = cfg.antenna_bits();
    let sb = cfg.symbol_bits();
    let mut cursor = index_bits;
    let mut support = Vec::with_capacity(cfg.k_active());
    for slot in tap.active_indices() {
        let unit = uint_from_bits(&bits[cursor..cursor + ab]) as usize;
        cursor += ab;
        let map = uint_from_bits(&bits[cursor..cursor + cfg.m_rf()]) as usize;
        cursor += cfg.m_rf();
        let label = uint_from_bits(&bits[cursor..cursor + sb]) as usize;
        cursor += sb;
        let value = cfg.alphabet().point(label);
        support.push((slot * d + unit * m + map, value));
    }
    Ok(Frame::new(cfg.frame_dim(), support, tap))
}

/// Exact inverse of [`encode_frame`]; fails on frames outside the signal set.
pub fn decode_frame(cfg: &SchemeConfig, frame: &Frame) -> Result<Vec<bool>> {
    let tap_index = cfg
        .tap_codebook()
        .index_of(frame.tap())
        .ok_or_else(|| Error::Decode("frame TAP is not in the codebook".into()))?;
    let mut bits = bits_msb(tap_index as u128, cfg.tap_codebook().index_bits());

    let d = cfg.slot_dim();
    let m = cfg.n_maps();
    let mut by_slot = vec![None; cfg.n_slots()];
    for &(idx, z) in frame.support() {
        let slot = idx / d;
        if !frame.tap().is_active(slot) || by_slot[slot].is_some() {
            return Err(Error::Decode(format!(
                "support index {idx} violates the one-nonzero-per-active-slot structure"
            )));
        }
        by_slot[slot] = Some((idx % d, z));
    }
    for slot in frame.tap().active_indices() {
        let (offset, z) = by_slot[slot]
            .ok_or_else(|| Error::Decode(format!("active slot {slot} carries no value")))?;
        let unit = offset / m;
        let map = offset % m;
        let label = cfg
            .alphabet()
            .label_of(z)
            .ok_or_else(|| Error::Decode(format!("value {z} is not an alphabet point")))?;
        bits.extend(bits_msb(unit as u128, cfg.antenna_bits()));
        bits.extend(bits_msb(map as u128, cfg.m_rf()));
        bits.extend(bits_msb(label as u128, cfg.symbol_bits()));
    }
    Ok(bits)
}

/// Iterator over the full signal set in the bit-string order of
/// [`encode_frame`]. Refuses sets above the enumeration cap.
pub fn enumerate_signal_set(cfg: &SchemeConfig) -> Result<SignalSetIter<'_>> {
    enumerate_signal_set_capped(cfg, ENUMERATION_CAP_BITS)
}

pub fn enumerate_signal_set_capped(
    cfg: &SchemeConfig,
    cap_bits: usize,
) -> Result<SignalSetIter<'_>> {
    let budget = frame_bit_budget(cfg);
    if budget > cap_bits {
        return Err(Error::SetTooLarge {
            size: 1u128 << budget.min(127),
            cap: 1u128 << cap_bits,
        });
    }
    Ok(SignalSetIter {
        cfg,
        budget,
        next: 0,
        total: 1u64 << budget,
    })
}

#[derive(Debug)]
pub struct SignalSetIter<'a> {
    cfg: &'a SchemeConfig,
    budget: usize,
    next: u64,
    total: u64,
}

impl Iterator for SignalSetIter<'_> {
    type Item = Frame;

    fn next(&mut self) -> Option<Frame> {
        if self.next >= self.total {
            return None;
        }
        let bits = bits_msb(self.next as u128, self.budget);
        self.next += 1;
        // encode_frame cannot fail on an in-range bit string
        Some(encode_frame(self.cfg, &bits).expect("enumeration bit string must encode"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.total - self.next) as usize;
        (rem, Some(rem))
    }
}
