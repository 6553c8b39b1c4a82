//! Python bindings for the core simulator: scheme configs with
//! encode/decode, combinadics, QAM tables, LM alphabet design, PASPR, and a
//! single-point Monte Carlo runner driven by experiment-file text.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use imsim::bitcore::ActivationPattern;
use imsim::harness::{parse_experiment_str, run_ber_point};
use imsim::schemes::Frame;
use imsim::{frame_bit_budget, scheme_rate, LmAlphabet, SchemeConfig, SchemeKind};

fn conv(e: imsim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "SchemeConfig")]
struct PySchemeConfig {
    inner: SchemeConfig,
}

#[pymethods]
impl PySchemeConfig {
    #[new]
    #[pyo3(signature = (kind, n, k, l, nt, mrf, modulation, nr))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        kind: &str,
        n: usize,
        k: usize,
        l: usize,
        nt: usize,
        mrf: usize,
        modulation: usize,
        nr: usize,
    ) -> PyResult<Self> {
        let kind = match kind {
            "ti-sm" => SchemeKind::TiSm,
            "ti-mbm" => SchemeKind::TiMbm,
            "sm-mbm" => SchemeKind::SmMbm,
            "ti-sm-mbm" => SchemeKind::TiSmMbm,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown scheme kind {other:?}"
                )))
            }
        };
        Ok(Self {
            inner: SchemeConfig::new(kind, n, k, l, nt, mrf, modulation, nr).map_err(conv)?,
        })
    }

    fn rate(&self) -> f64 {
        scheme_rate(&self.inner)
    }

    fn bit_budget(&self) -> usize {
        frame_bit_budget(&self.inner)
    }

    fn frame_dim(&self) -> usize {
        self.inner.frame_dim()
    }

    /// Encodes a bit list into the sparse frame as (index, value) pairs.
    fn encode(&self, bits: Vec<bool>) -> PyResult<Vec<(usize, Complex64)>> {
        Ok(imsim::encode_frame(&self.inner, &bits)
            .map_err(conv)?
            .support()
            .to_vec())
    }

    /// Decodes a sparse frame given as (index, value) pairs back to bits.
    fn decode(&self, support: Vec<(usize, Complex64)>) -> PyResult<Vec<bool>> {
        let d = self.inner.slot_dim();
        let mut slots = vec![false; self.inner.n_slots()];
        for &(i, _) in &support {
            if i >= self.inner.frame_dim() {
                return Err(PyValueError::new_err(format!("index {i} out of range")));
            }
            slots[i / d] = true;
        }
        let frame = Frame::new(self.inner.frame_dim(), support, ActivationPattern::new(slots));
        imsim::decode_frame(&self.inner, &frame).map_err(conv)
    }
}

/// Rank of an activation pattern in lexicographic K-subset order.
#[pyfunction]
fn combinadic_rank(slots: Vec<bool>) -> u128 {
    imsim::combinadic_rank(&ActivationPattern::new(slots))
}

/// The rank-th weight-k activation pattern over n slots.
#[pyfunction]
fn combinadic_unrank(rank: u128, n: usize, k: usize) -> PyResult<Vec<bool>> {
    Ok(imsim::combinadic_unrank(rank, n, k)
        .map_err(conv)?
        .slots()
        .to_vec())
}

/// Unit-energy Gray-labelled QAM points, indexed by bit label.
#[pyfunction]
fn qam(order: usize) -> PyResult<Vec<Complex64>> {
    Ok(imsim::make_qam(order).map_err(conv)?.points().to_vec())
}

/// Designs an n_M-ary LM alphabet on the radius-sqrt(power) hypersphere.
#[pyfunction]
#[pyo3(signature = (nt, nm, power=1.0, seed=1234))]
fn design_alphabet(nt: usize, nm: usize, power: f64, seed: u64) -> PyResult<Vec<Vec<Complex64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(imsim::design_lm_alphabet(nt, nm, power, &mut rng)
        .map_err(conv)?
        .vectors()
        .to_vec())
}

/// Peak-to-average sum power ratio of an alphabet given as vector list.
#[pyfunction]
fn paspr(vectors: Vec<Vec<Complex64>>) -> PyResult<f64> {
    if vectors.is_empty() {
        return Err(PyValueError::new_err("empty alphabet"));
    }
    let nt = vectors[0].len();
    Ok(imsim::paspr(&LmAlphabet::new_unchecked(nt, 1.0, vectors)))
}

/// Runs one Monte Carlo BER point for an experiment given as key=value text.
/// Returns (frames, bits, bit_errors, ber).
#[pyfunction]
#[pyo3(signature = (config, snr_db, min_errors=None, max_frames=None, seed=None))]
fn simulate_point(
    config: &str,
    snr_db: f64,
    min_errors: Option<u64>,
    max_frames: Option<u64>,
    seed: Option<u64>,
) -> PyResult<(u64, u64, u64, f64)> {
    let mut exp = parse_experiment_str(config, "<python>").map_err(conv)?;
    if let Some(m) = min_errors {
        exp.min_errors = m;
    }
    if let Some(m) = max_frames {
        exp.max_frames = m;
    }
    if let Some(s) = seed {
        exp.master_seed = s;
    }
    let rec = run_ber_point(&exp, snr_db, 0).map_err(conv)?;
    Ok((rec.frames, rec.bits, rec.bit_errors, rec.ber))
}

/// Rate (bpcu) of an experiment given as key=value text.
#[pyfunction]
fn experiment_rate(config: &str) -> PyResult<f64> {
    Ok(parse_experiment_str(config, "<python>")
        .map_err(conv)?
        .scheme
        .rate())
}

#[pymodule]
fn imsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchemeConfig>()?;
    m.add_function(wrap_pyfunction!(combinadic_rank, m)?)?;
    m.add_function(wrap_pyfunction!(combinadic_unrank, m)?)?;
    m.add_function(wrap_pyfunction!(qam, m)?)?;
    m.add_function(wrap_pyfunction!(design_alphabet, m)?)?;
    m.add_function(wrap_pyfunction!(paspr, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_point, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_rate, m)?)?;
    Ok(())
}
