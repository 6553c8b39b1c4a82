//! Link-level simulation toolkit for multidimensional index modulation
//! (TI-SM, TI-MBM, SM-MBM, TI-SM-MBM), sparsity-exploiting detection, and
//! indexed load modulation with hypersphere alphabets, plus a reproducible
//! Monte Carlo BER harness.

pub mod bitcore;
pub mod channel;
pub mod detect;
pub mod error;
pub mod harness;
pub mod loadmod;
pub mod schemes;

pub use bitcore::{
    binomial, build_pattern_codebook, combinadic_rank, combinadic_unrank, make_qam,
    ActivationPattern, ComplexAlphabet, PatternCodebook,
};
pub use channel::{
    draw_flat_channel, draw_selective_channel, snr_to_sigma2, transmit_dense, transmit_sparse,
    ChannelRealization, NoiseSpec,
};
pub use detect::{
    algorithm1_detect, cosamp, ml_detect, omp, run_sr, subspace_pursuit, DetectionResult,
    DetectorKind, MlDetector, SparseEstimate, SrKind,
};
pub use error::{Error, Result};
pub use harness::{
    emit_results, load_experiment, parse_experiment_str, preset_experiments, preset_names,
    run_ber_point, run_nr_sweep, run_sweep, BerRecord, Experiment, SchemeInstance,
};
pub use loadmod::{
    design_lm_alphabet, enumerate_lm_set, export_alphabet, import_alphabet, paspr,
    sample_hypersphere, si_lm_decode, si_lm_encode, smp_bpsk_alphabet, spherical_kmeans,
    ti_lm_decode, ti_lm_encode, LmAlphabet, LmConfig, LmSchemeKind,
};
pub use schemes::{
    decode_frame, encode_frame, enumerate_signal_set, frame_bit_budget, scheme_rate,
    sparsity_factor, EnergyNorm, Frame, SchemeConfig, SchemeKind,
};
