//! Config-driven Monte Carlo BER engine: experiment descriptions, a
//! batch-parallel trial loop with schedule-independent seeding, CSV/JSON
//! result emission, flat key=value experiment files, and named presets.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitcore::{binomial, bits_msb, floor_log2};
use crate::channel::{
    draw_flat_channel, draw_selective_channel, snr_to_sigma2, transmit_sparse, NoiseSpec,
};
use crate::detect::{algorithm1_detect, DetectorKind, MlCandidates, MlDetector, SrKind};
use crate::error::{Error, Result};
use crate::loadmod::{
    design_lm_alphabet, enumerate_lm_set, import_alphabet, lm_bit_budget, si_lm_encode_support,
    smp_bpsk_alphabet, ti_lm_encode_support, LmAlphabet, LmConfig, LmSchemeKind,
};
use crate::schemes::{
    encode_frame, frame_bit_budget, scheme_rate, EnergyNorm, SchemeConfig, SchemeKind,
};

/// Trials between stop-rule checks; fixed so that results do not depend on
/// worker scheduling.
const TRIAL_BATCH: u64 = 256;

pub const DEFAULT_MIN_ERRORS: u64 = 200;
pub const DEFAULT_MAX_FRAMES: u64 = 200_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_ALPHABET_SEED: u64 = 1234;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed derived from (master, SNR/grid index, trial index) so that
/// trials are reproducible independent of execution order.
pub fn trial_seed(master_seed: u64, point_index: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ point_index) ^ trial_index)
}

/// Where an LM alphabet comes from when the experiment is materialized.
#[derive(Debug, Clone)]
pub enum AlphabetSource {
    /// Designed by hypersphere sampling + spherical k-means from this seed.
    Design { seed: u64 },
    /// Loaded from an alphabet text file.
    File(String),
    /// Fully specified up front (e.g. the per-antenna BPSK baseline).
    Fixed(LmAlphabet),
}

/// A load-modulation experiment arm, kept in parameter form so that rates
/// print instantly; the (possibly expensive) alphabet design happens once,
/// on first use.
#[derive(Debug, Clone)]
pub struct LmPlan {
    pub kind: LmSchemeKind,
    pub label: String,
    pub n_units: usize,
    pub n_active: usize,
    pub n_slots: usize,
    pub k_slots: usize,
    pub l_paths: usize,
    pub n_t: usize,
    pub n_m: usize,
    pub power: f64,
    pub n_rx: usize,
    pub source: AlphabetSource,
    /// SNR normalization for the time-indexed variant: per-frame equalizes
    /// total frame energy with schemes that keep all N slots active, so a
    /// K-of-N scheme is not charged for its silent slots. No-op for the
    /// flat single-use schemes (N = K = 1).
    pub energy_norm: EnergyNorm,
    cache: Arc<OnceLock<LmAlphabet>>,
}

impl LmPlan {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: LmSchemeKind,
        label: String,
        n_units: usize,
        n_active: usize,
        n_slots: usize,
        k_slots: usize,
        l_paths: usize,
        n_t: usize,
        n_m: usize,
        power: f64,
        n_rx: usize,
        source: AlphabetSource,
    ) -> Result<Self> {
        if !n_m.is_power_of_two() || n_m < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_M must be a power of two >= 2, got {n_m}"
            )));
        }
        if power <= 0.0 {
            return Err(Error::InvalidConfig("power must be positive".into()));
        }
        let plan = Self {
            kind,
            label,
            n_units,
            n_active,
            n_slots,
            k_slots,
            l_paths,
            n_t,
            n_m,
            power,
            n_rx,
            source,
            energy_norm: EnergyNorm::PerSlot,
            cache: Arc::new(OnceLock::new()),
        };
        // validate the index parameters early, without the alphabet
        if kind == LmSchemeKind::TiLm {
            if plan.k_slots == 0 || plan.k_slots > plan.n_slots {
                return Err(Error::InvalidConfig("need 1 <= K <= N".into()));
            }
        } else if plan.n_active == 0 || plan.n_active > plan.n_units {
            return Err(Error::InvalidConfig("need 1 <= n_K <= n_L".into()));
        }
        if kind == LmSchemeKind::SmpLm && plan.n_active != plan.n_units {
            return Err(Error::InvalidConfig("SMP-LM requires n_K = n_L".into()));
        }
        if kind == LmSchemeKind::ConventionalLm && plan.n_units != 1 {
            return Err(Error::InvalidConfig("conventional LM requires n_L = 1".into()));
        }
        Ok(plan)
    }

    fn index_bits(&self) -> usize {
        let (n, k) = match self.kind {
            LmSchemeKind::TiLm => (self.n_slots, self.k_slots),
            _ => (self.n_units, self.n_active),
        };
        floor_log2(binomial(n, k)) as usize
    }

    pub fn bit_budget(&self) -> usize {
        let per_vector = floor_log2(self.n_m as u128) as usize;
        let vectors = match self.kind {
            LmSchemeKind::TiLm => self.k_slots,
            _ => self.n_active,
        };
        self.index_bits() + vectors * per_vector
    }

    /// Channel uses per codeword (CP overhead included for TI-LM).
    pub fn channel_uses(&self) -> usize {
        match self.kind {
            LmSchemeKind::TiLm => self.n_slots + self.l_paths - 1,
            _ => 1,
        }
    }

    pub fn rate(&self) -> f64 {
        self.bit_budget() as f64 / self.channel_uses() as f64
    }

    pub fn alphabet(&self) -> Result<&LmAlphabet> {
        if self.cache.get().is_none() {
            let built = match &self.source {
                AlphabetSource::Fixed(a) => a.clone(),
                AlphabetSource::Design { seed } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    design_lm_alphabet(self.n_t, self.n_m, self.power, &mut rng)?
                }
                AlphabetSource::File(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    let (a, _) = import_alphabet(text.as_bytes())?;
                    a
                }
            };
            if built.n_t() != self.n_t || built.len() != self.n_m {
                return Err(Error::InvalidConfig(format!(
                    "alphabet is {}x{}, experiment wants n_t={}, n_M={}",
                    built.len(),
                    built.n_t(),
                    self.n_t,
                    self.n_m
                )));
            }
            let _ = self.cache.set(built);
        }
        Ok(self.cache.get().unwrap())
    }

    pub fn config(&self) -> Result<LmConfig> {
        let alphabet = self.alphabet()?.clone();
        match self.kind {
            LmSchemeKind::TiLm => {
                LmConfig::time(self.n_slots, self.k_slots, self.l_paths, alphabet, self.n_rx)
            }
            _ => LmConfig::spatial(self.n_units, self.n_active, alphabet, self.n_rx),
        }
    }

    pub fn with_n_rx(&self, n_rx: usize) -> Self {
        let mut p = self.clone();
        p.n_rx = n_rx.max(1);
        p
    }

    pub fn with_energy_norm(mut self, norm: EnergyNorm) -> Self {
        self.energy_norm = norm;
        self
    }
}

/// One scheme under test: an index-modulation config or an LM plan.
#[derive(Clone)]
pub enum SchemeInstance {
    Im(SchemeConfig),
    Lm(LmPlan),
}

impl SchemeInstance {
    pub fn label(&self) -> String {
        match self {
            SchemeInstance::Im(cfg) => cfg.kind().label().to_string(),
            SchemeInstance::Lm(plan) => plan.label.clone(),
        }
    }

    pub fn bit_budget(&self) -> usize {
        match self {
            SchemeInstance::Im(cfg) => frame_bit_budget(cfg),
            SchemeInstance::Lm(plan) => plan.bit_budget(),
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            SchemeInstance::Im(cfg) => scheme_rate(cfg),
            SchemeInstance::Lm(plan) => plan.rate(),
        }
    }

    pub fn n_rx(&self) -> usize {
        match self {
            SchemeInstance::Im(cfg) => cfg.n_rx(),
            SchemeInstance::Lm(plan) => plan.n_rx,
        }
    }

    pub fn with_n_rx(&self, n_rx: usize) -> Self {
        match self {
            SchemeInstance::Im(cfg) => SchemeInstance::Im(cfg.clone().with_n_rx(n_rx)),
            SchemeInstance::Lm(plan) => SchemeInstance::Lm(plan.with_n_rx(n_rx)),
        }
    }
}

/// A complete experiment: scheme, detector, SNR grid, stop rule, seed.
#[derive(Clone)]
pub struct Experiment {
    pub name: String,
    pub scheme: SchemeInstance,
    pub detector: DetectorKind,
    pub snr_grid_db: Vec<f64>,
    pub nr_grid: Vec<usize>,
    pub min_errors: u64,
    pub max_frames: u64,
    pub master_seed: u64,
    pub sigma2_override: Option<f64>,
}

impl Experiment {
    pub fn new(name: String, scheme: SchemeInstance, detector: DetectorKind) -> Self {
        Self {
            name,
            scheme,
            detector,
            snr_grid_db: vec![0.0],
            nr_grid: Vec::new(),
            min_errors: DEFAULT_MIN_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
            master_seed: DEFAULT_SEED,
            sigma2_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_errors == 0 || self.max_frames == 0 {
            return Err(Error::InvalidConfig("stop rule must be positive".into()));
        }
        if matches!(self.detector, DetectorKind::Alg1(_))
            && matches!(self.scheme, SchemeInstance::Lm(_))
        {
            return Err(Error::InvalidConfig(
                "sparsity-exploiting detection is defined for the index-modulation schemes; \
                 LM schemes use ml"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// One measured BER point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub scheme: String,
    pub detector: String,
    pub snr_db: f64,
    pub n_r: usize,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub seed: u64,
    pub elapsed_seconds: f64,
}

/// Detection machinery built once per BER point and shared across trials.
enum Machine {
    MlIm(MlDetector),
    MlLm {
        cands: MlCandidates,
        budget: usize,
    },
    Alg1 {
        cfg: SchemeConfig,
        sr: SrKind,
    },
}

enum ChannelPlan {
    /// Block-circulant: (n_rx, block_dim, n_blocks, l_paths).
    Selective(usize, usize, usize, usize),
    /// Flat: (n_rx, dim).
    Flat(usize, usize),
}

enum Encoder {
    Im(SchemeConfig),
    Lm { cfg: LmConfig, kind: LmSchemeKind },
}

struct PointRunner {
    encoder: Encoder,
    machine: Machine,
    channel: ChannelPlan,
    budget: usize,
}

impl PointRunner {
    fn build(exp: &Experiment) -> Result<Self> {
        exp.validate()?;
        match &exp.scheme {
            SchemeInstance::Im(cfg) => {
                let machine = match exp.detector {
                    DetectorKind::Ml => Machine::MlIm(MlDetector::new(cfg)?),
                    DetectorKind::Alg1(sr) => Machine::Alg1 {
                        cfg: cfg.clone(),
                        sr,
                    },
                };
                Ok(Self {
                    encoder: Encoder::Im(cfg.clone()),
                    machine,
                    channel: ChannelPlan::Selective(
                        cfg.n_rx(),
                        cfg.slot_dim(),
                        cfg.n_slots(),
                        cfg.l_paths(),
                    ),
                    budget: frame_bit_budget(cfg),
                })
            }
            SchemeInstance::Lm(plan) => {
                let cfg = plan.config()?;
                let budget = lm_bit_budget(&cfg, plan.kind);
                let supports =
                    enumerate_lm_set(&cfg, plan.kind, crate::schemes::ENUMERATION_CAP_BITS)?;
                let (channel, dim) = if plan.kind == LmSchemeKind::TiLm {
                    (
                        ChannelPlan::Selective(
                            cfg.n_rx(),
                            cfg.n_t(),
                            cfg.n_slots(),
                            cfg.l_paths(),
                        ),
                        cfg.n_slots() * cfg.n_t(),
                    )
                } else {
                    let dim = cfg.n_units() * cfg.n_t();
                    (ChannelPlan::Flat(cfg.n_rx(), dim), dim)
                };
                Ok(Self {
                    encoder: Encoder::Lm {
                        cfg,
                        kind: plan.kind,
                    },
                    machine: Machine::MlLm {
                        cands: MlCandidates::new(dim, supports),
                        budget,
                    },
                    channel,
                    budget,
                })
            }
        }
    }

    /// One trial: random bits -> encode -> channel -> detect -> bit errors.
    fn run_trial(&self, noise: &NoiseSpec, seed: u64) -> Result<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tx_bits: Vec<bool> = (0..self.budget).map(|_| rng.random()).collect();
        let support = match &self.encoder {
            Encoder::Im(cfg) => encode_frame(cfg, &tx_bits)?.support().to_vec(),
            Encoder::Lm { cfg, kind } => match kind {
                LmSchemeKind::TiLm => ti_lm_encode_support(cfg, &tx_bits)?,
                _ => si_lm_encode_support(cfg, &tx_bits)?,
            },
        };
        let h: DMatrix<_> = match self.channel {
            ChannelPlan::Selective(n_rx, dim, n_blocks, l) => {
                draw_selective_channel(n_rx, dim, n_blocks, l, &mut rng)?.assemble()
            }
            ChannelPlan::Flat(n_rx, dim) => draw_flat_channel(n_rx, dim, &mut rng),
        };
        let y: DVector<_> = transmit_sparse(&h, &support, noise, &mut rng)?;
        let rx_bits = match &self.machine {
            Machine::MlIm(det) => det.detect(&y, &h).bits,
            Machine::MlLm { cands, budget } => {
                bits_msb(cands.detect_index(&y, &h) as u128, *budget)
            }
            Machine::Alg1 { cfg, sr } => algorithm1_detect(&y, &h, cfg, *sr)?.bits,
        };
        Ok(tx_bits
            .iter()
            .zip(&rx_bits)
            .filter(|(a, b)| a != b)
            .count() as u64)
    }
}

/// Runs trials at one SNR point until the stop rule fires. `point_index`
/// keys the seed stream so grid points are independent.
pub fn run_ber_point(exp: &Experiment, snr_db: f64, point_index: u64) -> Result<BerRecord> {
    let start = Instant::now();
    let runner = PointRunner::build(exp)?;
    let noise = match exp.sigma2_override {
        Some(s2) => NoiseSpec {
            sigma2: s2,
            snr_db,
        },
        None => match &exp.scheme {
            SchemeInstance::Im(cfg) => {
                snr_to_sigma2(snr_db, cfg.energy_norm(), cfg.n_slots(), cfg.k_active())
            }
            SchemeInstance::Lm(plan) => {
                snr_to_sigma2(snr_db, plan.energy_norm, plan.n_slots, plan.k_slots)
            }
        },
    };

    let mut frames = 0u64;
    let mut bit_errors = 0u64;
    while bit_errors < exp.min_errors && frames < exp.max_frames {
        let batch = TRIAL_BATCH.min(exp.max_frames - frames);
        let errs: Result<u64> = (0..batch)
            .into_par_iter()
            .map(|i| runner.run_trial(&noise, trial_seed(exp.master_seed, point_index, frames + i)))
            .try_reduce(|| 0, |a, b| Ok(a + b));
        bit_errors += errs?;
        frames += batch;
    }
    let bits = frames * runner.budget as u64;
    Ok(BerRecord {
        scheme: exp.scheme.label(),
        detector: exp.detector.label(),
        snr_db,
        n_r: exp.scheme.n_rx(),
        frames,
        bits,
        bit_errors,
        ber: bit_errors as f64 / bits as f64,
        seed: exp.master_seed,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One record per SNR grid point.
pub fn run_sweep(exp: &Experiment) -> Result<Vec<BerRecord>> {
    exp.validate()?;
    exp.snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| run_ber_point(exp, snr, i as u64))
        .collect()
}

/// One record per receive-antenna count at a fixed SNR.
pub fn run_nr_sweep(exp: &Experiment, snr_db: f64) -> Result<Vec<BerRecord>> {
    exp.validate()?;
    exp.nr_grid
        .iter()
        .enumerate()
        .map(|(i, &nr)| {
            let mut e = exp.clone();
            e.scheme = exp.scheme.with_n_rx(nr);
            run_ber_point(&e, snr_db, i as u64)
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "scheme,detector,snr_db,n_r,frames,bits,bit_errors,ber,seed,elapsed_seconds";

pub fn records_to_csv(records: &[BerRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.3}\n",
            r.scheme,
            r.detector,
            r.snr_db,
            r.n_r,
            r.frames,
            r.bits,
            r.bit_errors,
            r.ber,
            r.seed,
            r.elapsed_seconds
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BerRecord>> {
    let err = |msg: String| Error::Parse {
        path: "<csv>".into(),
        msg,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(err(format!("bad header: {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(err(format!("expected 10 fields, got {}", f.len())));
            }
            let bad = |what: &str| err(format!("bad {what} in row: {line}"));
            Ok(BerRecord {
                scheme: f[0].to_string(),
                detector: f[1].to_string(),
                snr_db: f[2].parse().map_err(|_| bad("snr_db"))?,
                n_r: f[3].parse().map_err(|_| bad("n_r"))?,
                frames: f[4].parse().map_err(|_| bad("frames"))?,
                bits: f[5].parse().map_err(|_| bad("bits"))?,
                bit_errors: f[6].parse().map_err(|_| bad("bit_errors"))?,
                ber: f[7].parse().map_err(|_| bad("ber"))?,
                seed: f[8].parse().map_err(|_| bad("seed"))?,
                elapsed_seconds: f[9].parse().map_err(|_| bad("elapsed_seconds"))?,
            })
        })
        .collect()
}

/// Writes the CSV, plus an optional JSON mirror of the same records.
pub fn emit_results(
    records: &[BerRecord],
    csv_path: &Path,
    json_path: Option<&Path>,
) -> Result<()> {
    let io_err = |path: &Path, e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    fs::write(csv_path, records_to_csv(records)).map_err(|e| io_err(csv_path, e))?;
    if let Some(jp) = json_path {
        let json = serde_json::to_string_pretty(records)
            .map_err(|e| Error::Parse {
                path: jp.display().to_string(),
                msg: e.to_string(),
            })?;
        fs::write(jp, json).map_err(|e| io_err(jp, e))?;
    }
    Ok(())
}

/// Parses `a`, `a:b` (step 1), or `a:b:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("bad grid spec {spec:?}, want a[:b[:step]]"));
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = match nums[..] {
        [a] => (a, a, 1.0),
        [a, b] => (a, b, 1.0),
        [a, b, s] => (a, b, s),
        _ => return Err(bad()),
    };
    if step <= 0.0 || b < a {
        return Err(bad());
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let v = a + step * i as f64;
        if v > b + 1e-9 {
            break;
        }
        grid.push(v);
        i += 1;
    }
    Ok(grid)
}

pub fn parse_nr_grid(spec: &str) -> Result<Vec<usize>> {
    parse_grid(spec)?
        .into_iter()
        .map(|v| {
            let n = v.round();
            if (v - n).abs() > 1e-9 || n < 1.0 {
                Err(Error::InvalidArgument(format!(
                    "antenna grid must be positive integers, got {v}"
                )))
            } else {
                Ok(n as usize)
            }
        })
        .collect()
}

fn parse_kv(src: &str, origin: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (lineno, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.into(),
            msg: format!("line {}: expected key = value", lineno + 1),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Parses a flat key=value experiment description.
///
/// Common keys: `scheme`, `detector`, `nr`, `snr`, `nr_grid`, `min_errors`,
/// `max_frames`, `seed`, `sigma2`, `label`. Index-modulation keys: `n`, `k`,
/// `l`, `nt`, `mrf`, `mod`, `energy_norm`. LM keys: `nl`, `nk`, `nm`, `nt`,
/// `power`, `alphabet_seed`, `alphabet_file` (+ `n`, `k`, `l` for ti-lm).
pub fn parse_experiment_str(src: &str, origin: &str) -> Result<Experiment> {
    let map = parse_kv(src, origin)?;
    let perr = |msg: String| Error::Parse {
        path: origin.into(),
        msg,
    };
    let get = |k: &str| map.get(k).map(|s| s.as_str());
    let req = |k: &str| get(k).ok_or_else(|| perr(format!("missing key {k:?}")));
    let num = |k: &str| -> Result<Option<usize>> {
        get(k)
            .map(|v| v.parse::<usize>().map_err(|_| perr(format!("bad {k}: {v}"))))
            .transpose()
    };
    let num_or = |k: &str, d: usize| -> Result<usize> { Ok(num(k)?.unwrap_or(d)) };
    let u64_or = |k: &str, d: u64| -> Result<u64> {
        get(k)
            .map(|v| v.parse::<u64>().map_err(|_| perr(format!("bad {k}: {v}"))))
            .transpose()
            .map(|o| o.unwrap_or(d))
    };

    const KNOWN: &[&str] = &[
        "scheme", "detector", "nr", "snr", "nr_grid", "min_errors", "max_frames", "seed",
        "sigma2", "label", "name", "n", "k", "l", "nt", "mrf", "mod", "energy_norm", "nl", "nk",
        "nm", "power", "alphabet_seed", "alphabet_file",
    ];
    for k in map.keys() {
        if !KNOWN.contains(&k.as_str()) {
            return Err(perr(format!("unknown key {k:?}")));
        }
    }

    let scheme_name = req("scheme")?;
    let nr = num_or("nr", 1)?;
    let label = get("label").unwrap_or(scheme_name).to_string();

    let scheme = match scheme_name {
        "ti-sm" | "ti-mbm" | "sm-mbm" | "ti-sm-mbm" => {
            let kind = match scheme_name {
                "ti-sm" => SchemeKind::TiSm,
                "ti-mbm" => SchemeKind::TiMbm,
                "sm-mbm" => SchemeKind::SmMbm,
                _ => SchemeKind::TiSmMbm,
            };
            let n = num_or("n", 1)?;
            let k = match kind {
                SchemeKind::SmMbm => num_or("k", n)?,
                _ => num_or("k", 1)?,
            };
            let nt = match kind {
                SchemeKind::TiMbm => num_or("nt", 1)?,
                _ => num("nt")?.ok_or_else(|| perr("missing key \"nt\"".into()))?,
            };
            let mrf = match kind {
                SchemeKind::TiSm => num_or("mrf", 0)?,
                _ => num("mrf")?.ok_or_else(|| perr("missing key \"mrf\"".into()))?,
            };
            let l = num_or("l", 1)?;
            let order: usize = req("mod")?
                .parse()
                .map_err(|_| perr("bad mod".into()))?;
            let mut cfg = SchemeConfig::new(kind, n, k, l, nt, mrf, order, nr)?;
            if let Some(norm) = get("energy_norm") {
                cfg = cfg.with_energy_norm(match norm {
                    "per_slot" => crate::schemes::EnergyNorm::PerSlot,
                    "per_frame" => crate::schemes::EnergyNorm::PerFrame,
                    other => return Err(perr(format!("bad energy_norm: {other}"))),
                });
            }
            SchemeInstance::Im(cfg)
        }
        "si-lm" | "smp-lm" | "conv-lm" | "ti-lm" | "smp-bpsk" => {
            let nt = num("nt")?.ok_or_else(|| perr("missing key \"nt\"".into()))?;
            let (kind, nl, nk, n, k, l, nm) = match scheme_name {
                "si-lm" => (
                    LmSchemeKind::SiLm,
                    num("nl")?.ok_or_else(|| perr("missing key \"nl\"".into()))?,
                    num("nk")?.ok_or_else(|| perr("missing key \"nk\"".into()))?,
                    1,
                    1,
                    1,
                    num("nm")?.ok_or_else(|| perr("missing key \"nm\"".into()))?,
                ),
                "smp-lm" => {
                    let nl = num("nl")?.ok_or_else(|| perr("missing key \"nl\"".into()))?;
                    (
                        LmSchemeKind::SmpLm,
                        nl,
                        num_or("nk", nl)?,
                        1,
                        1,
                        1,
                        num("nm")?.ok_or_else(|| perr("missing key \"nm\"".into()))?,
                    )
                }
                "conv-lm" => (
                    LmSchemeKind::ConventionalLm,
                    1,
                    1,
                    1,
                    1,
                    1,
                    num("nm")?.ok_or_else(|| perr("missing key \"nm\"".into()))?,
                ),
                "ti-lm" => {
                    let n = num("n")?.ok_or_else(|| perr("missing key \"n\"".into()))?;
                    (
                        LmSchemeKind::TiLm,
                        1,
                        1,
                        n,
                        num_or("k", n)?,
                        num_or("l", 1)?,
                        num("nm")?.ok_or_else(|| perr("missing key \"nm\"".into()))?,
                    )
                }
                // per-antenna BPSK baseline: a single unit whose alphabet is
                // the product of n_t BPSK streams
                _ => (LmSchemeKind::ConventionalLm, 1, 1, 1, 1, 1, 1usize << nt),
            };
            let default_power = if scheme_name == "smp-lm" {
                1.0 / nl as f64
            } else {
                1.0
            };
            let power: f64 = get("power")
                .map(|v| v.parse().map_err(|_| perr(format!("bad power: {v}"))))
                .transpose()?
                .unwrap_or(default_power);
            let source = if scheme_name == "smp-bpsk" {
                AlphabetSource::Fixed(smp_bpsk_alphabet(nt, power))
            } else if let Some(path) = get("alphabet_file") {
                AlphabetSource::File(path.to_string())
            } else {
                AlphabetSource::Design {
                    seed: u64_or("alphabet_seed", DEFAULT_ALPHABET_SEED)?,
                }
            };
            let mut plan = LmPlan::new(
                kind, label.clone(), nl, nk, n, k, l, nt, nm, power, nr, source,
            )?;
            if let Some(norm) = get("energy_norm") {
                plan = plan.with_energy_norm(match norm {
                    "per_slot" => EnergyNorm::PerSlot,
                    "per_frame" => EnergyNorm::PerFrame,
                    other => return Err(perr(format!("bad energy_norm: {other}"))),
                });
            }
            SchemeInstance::Lm(plan)
        }
        other => return Err(perr(format!("unknown scheme {other:?}"))),
    };

    let detector = match get("detector").unwrap_or("ml") {
        "ml" => DetectorKind::Ml,
        "alg1-omp" => DetectorKind::Alg1(SrKind::Omp),
        "alg1-cosamp" => DetectorKind::Alg1(SrKind::Cosamp),
        "alg1-sp" => DetectorKind::Alg1(SrKind::Sp),
        other => return Err(perr(format!("unknown detector {other:?}"))),
    };

    let mut exp = Experiment::new(
        get("name").unwrap_or(&label).to_string(),
        scheme,
        detector,
    );
    if let Some(snr) = get("snr") {
        exp.snr_grid_db = parse_grid(snr)?;
    }
    if let Some(nrg) = get("nr_grid") {
        exp.nr_grid = parse_nr_grid(nrg)?;
    }
    exp.min_errors = u64_or("min_errors", DEFAULT_MIN_ERRORS)?;
    exp.max_frames = u64_or("max_frames", DEFAULT_MAX_FRAMES)?;
    exp.master_seed = u64_or("seed", DEFAULT_SEED)?;
    exp.sigma2_override = get("sigma2")
        .map(|v| v.parse().map_err(|_| perr(format!("bad sigma2: {v}"))))
        .transpose()?;
    exp.validate()?;
    Ok(exp)
}

pub fn load_experiment(path: &Path) -> Result<Experiment> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_experiment_str(&text, &path.display().to_string())
}

/// Named presets shipped with the binary; each figure maps to one experiment
/// per curve.
pub fn preset_names() -> &'static [&'static str] {
    &["fig2", "fig3", "fig4", "fig5", "fig7", "fig8"]
}

pub fn preset_sources(name: &str) -> Result<Vec<(&'static str, &'static str)>> {
    macro_rules! p {
        ($($file:literal),+) => {
            vec![$(($file, include_str!(concat!("../../../presets/", $file, ".cfg")))),+]
        };
    }
    Ok(match name {
        "fig2" => p!("fig2-ti-sm", "fig2-ti-mbm", "fig2-sm-mbm", "fig2-ti-sm-mbm"),
        "fig3" => p!("fig3-omp", "fig3-cosamp", "fig3-sp"),
        "fig4" => p!("fig4-ti-sm", "fig4-ti-mbm", "fig4-sm-mbm", "fig4-ti-sm-mbm"),
        "fig5" => p!("fig5-ti-sm", "fig5-ti-mbm", "fig5-sm-mbm", "fig5-ti-sm-mbm"),
        "fig7" => p!("fig7-si-lm", "fig7-smp-lm", "fig7-conv-lm", "fig7-smp-bpsk"),
        "fig8" => p!("fig8-ti-lm", "fig8-conv-lm"),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown preset {other:?}; available: {}",
                preset_names().join(", ")
            )))
        }
    })
}

pub fn preset_experiments(name: &str) -> Result<Vec<Experiment>> {
    preset_sources(name)?
        .into_iter()
        .map(|(file, src)| parse_experiment_str(src, file))
        .collect()
}
