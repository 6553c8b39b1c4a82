//! Random channel generation (frequency-selective block-circulant and flat),
//! AWGN injection, and SNR bookkeeping.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::schemes::EnergyNorm;

/// One CN(0, var) draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// L tap matrices H_0..H_{L-1} of an N-block frequency-selective channel.
///
/// The taps are canonical; the N n_r x N D block-circulant matrix is
/// materialized on demand by [`ChannelRealization::assemble`].
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    taps: Vec<DMatrix<Complex64>>,
    n_blocks: usize,
    n_rx: usize,
    dim: usize,
}

impl ChannelRealization {
    pub fn from_taps(taps: Vec<DMatrix<Complex64>>, n_blocks: usize) -> Result<Self> {
        if taps.is_empty() || taps.len() > n_blocks {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= L <= N, got L={}, N={n_blocks}",
                taps.len()
            )));
        }
        let n_rx = taps[0].nrows();
        let dim = taps[0].ncols();
        if taps.iter().any(|t| t.nrows() != n_rx || t.ncols() != dim) {
            return Err(Error::InvalidConfig("tap matrices differ in shape".into()));
        }
        Ok(Self {
            taps,
            n_blocks,
            n_rx,
            dim,
        })
    }

    pub fn taps(&self) -> &[DMatrix<Complex64>] {
        &self.taps
    }
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }
    pub fn l_paths(&self) -> usize {
        self.taps.len()
    }
    pub fn n_rx(&self) -> usize {
        self.n_rx
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Assembles the block-circulant matrix: block (r, c) is H_{(r-c) mod N}
    /// when that lag is below L, and zero otherwise.
    pub fn assemble(&self) -> DMatrix<Complex64> {
        let n = self.n_blocks;
        let l = self.taps.len();
        let mut h = DMatrix::zeros(n * self.n_rx, n * self.dim);
        for rb in 0..n {
            for cb in 0..n {
                let lag = (n + rb - cb) % n;
                if lag < l {
                    h.view_mut((rb * self.n_rx, cb * self.dim), (self.n_rx, self.dim))
                        .copy_from(&self.taps[lag]);
                }
            }
        }
        h
    }
}

/// Draws an L-tap channel with uniform power delay profile: every tap entry
/// is i.i.d. CN(0, 1/L).
pub fn draw_selective_channel<R: Rng + ?Sized>(
    n_rx: usize,
    dim: usize,
    n_blocks: usize,
    l_paths: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if l_paths == 0 || l_paths > n_blocks {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= L <= N, got L={l_paths}, N={n_blocks}"
        )));
    }
    if n_rx == 0 || dim == 0 {
        return Err(Error::InvalidConfig("channel dimensions must be >= 1".into()));
    }
    let var = 1.0 / l_paths as f64;
    let taps = (0..l_paths)
        .map(|_| DMatrix::from_fn(n_rx, dim, |_, _| complex_gaussian(rng, var)))
        .collect();
    ChannelRealization::from_taps(taps, n_blocks)
}

/// Flat-fading matrix with i.i.d. CN(0, 1) entries.
pub fn draw_flat_channel<R: Rng + ?Sized>(
    n_rx: usize,
    n_cols: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(n_rx, n_cols, |_, _| complex_gaussian(rng, 1.0))
}

/// Per-dimension noise variance together with the SNR that produced it.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub sigma2: f64,
    pub snr_db: f64,
}

/// Converts an SNR in dB to a noise variance under the given normalization.
///
/// Per-slot: active slot vectors carry unit average energy, so
/// sigma^2 = 10^(-snr/10). Per-frame: transmit vectors are boosted by
/// sqrt(N/K), folded in here as an equivalent sigma^2 scaling by K/N.
pub fn snr_to_sigma2(snr_db: f64, norm: EnergyNorm, n_slots: usize, k_active: usize) -> NoiseSpec {
    let mut sigma2 = 10f64.powf(-snr_db / 10.0);
    if norm == EnergyNorm::PerFrame {
        sigma2 *= k_active as f64 / n_slots as f64;
    }
    NoiseSpec { sigma2, snr_db }
}

/// y = Hx + n for a sparse x given as (index, value) support.
pub fn transmit_sparse<R: Rng + ?Sized>(
    h: &DMatrix<Complex64>,
    support: &[(usize, Complex64)],
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<DVector<Complex64>> {
    let mut y = DVector::zeros(h.nrows());
    for &(col, v) in support {
        if col >= h.ncols() {
            return Err(Error::InvalidArgument(format!(
                "support index {col} out of range for {} columns",
                h.ncols()
            )));
        }
        y.axpy(v, &h.column(col), Complex64::new(1.0, 0.0));
    }
    add_noise(&mut y, noise, rng);
    Ok(y)
}

/// y = Hx + n for a dense x.
pub fn transmit_dense<R: Rng + ?Sized>(
    h: &DMatrix<Complex64>,
    x: &DVector<Complex64>,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<DVector<Complex64>> {
    if x.len() != h.ncols() {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match {} columns",
            x.len(),
            h.ncols()
        )));
    }
    let mut y = h * x;
    add_noise(&mut y, noise, rng);
    Ok(y)
}

fn add_noise<R: Rng + ?Sized>(y: &mut DVector<Complex64>, noise: &NoiseSpec, rng: &mut R) {
    if noise.sigma2 > 0.0 {
        for v in y.iter_mut() {
            *v += complex_gaussian(rng, noise.sigma2);
        }
    }
}

/// Writes the tap matrices as a debugging dump: a header line
/// `N L n_r D seed` followed by row-major `re im` pairs, one tap per block.
pub fn dump_channel<W: Write>(
    ch: &ChannelRealization,
    seed: u64,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {} {} {}",
        ch.n_blocks(),
        ch.l_paths(),
        ch.n_rx(),
        ch.dim(),
        seed
    )?;
    for tap in ch.taps() {
        for r in 0..tap.nrows() {
            for c in 0..tap.ncols() {
                let z = tap[(r, c)];
                writeln!(out, "{:.17e} {:.17e}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

/// Reads a dump produced by [`dump_channel`]. Returns the realization and seed.
pub fn load_channel<R: BufRead>(input: R) -> Result<(ChannelRealization, u64)> {
    let err = |msg: &str| Error::Parse {
        path: "<channel dump>".into(),
        msg: msg.into(),
    };
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| err("missing header"))?
        .map_err(|e| err(&e.to_string()))?;
    let fields: Vec<u64> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err("bad header field")))
        .collect::<Result<_>>()?;
    if fields.len() != 5 {
        return Err(err("header must have 5 fields"));
    }
    let (n, l, n_rx, dim, seed) = (
        fields[0] as usize,
        fields[1] as usize,
        fields[2] as usize,
        fields[3] as usize,
        fields[4],
    );
    let mut taps = Vec::with_capacity(l);
    for _ in 0..l {
        let mut tap = DMatrix::zeros(n_rx, dim);
        for r in 0..n_rx {
            for c in 0..dim {
                let line = lines
                    .next()
                    .ok_or_else(|| err("truncated dump"))?
                    .map_err(|e| err(&e.to_string()))?;
                let mut toks = line.split_whitespace();
                let re: f64 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("bad entry"))?;
                let im: f64 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("bad entry"))?;
                tap[(r, c)] = Complex64::new(re, im);
            }
        }
        taps.push(tap);
    }
    Ok((ChannelRealization::from_taps(taps, n)?, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_tap_circulant_is_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = draw_selective_channel(1, 1, 4, 1, &mut rng).unwrap();
        let h = ch.assemble();
        for r in 0..4 {
            for c in 0..4 {
                if r == c {
                    assert_eq!(h[(r, c)], ch.taps()[0][(0, 0)]);
                } else {
                    assert_eq!(h[(r, c)].norm_sqr(), 0.0);
                }
            }
        }
    }

    #[test]
    fn block_circulant_structure_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (n_rx, d, n, l) = (3, 2, 5, 3);
        let ch = draw_selective_channel(n_rx, d, n, l, &mut rng).unwrap();
        let h = ch.assemble();
        assert_eq!(h.nrows(), n * n_rx);
        assert_eq!(h.ncols(), n * d);
        for rb in 0..n {
            for cb in 0..n {
                let lag = (n + rb - cb) % n;
                let block = h.view((rb * n_rx, cb * d), (n_rx, d));
                if lag < l {
                    assert_eq!(block, ch.taps()[lag].view((0, 0), (n_rx, d)));
                } else {
                    assert!(block.iter().all(|z| z.norm_sqr() == 0.0));
                }
            }
        }
        // top-right wrap: row-block 0 column-block N-1 holds H_1 for L=2
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = draw_selective_channel(2, 2, 4, 2, &mut rng).unwrap();
        let h = ch.assemble();
        assert_eq!(h.view((0, 6), (2, 2)), ch.taps()[1].view((0, 0), (2, 2)));
        assert_eq!(h.view((0, 0), (2, 2)), ch.taps()[0].view((0, 0), (2, 2)));
    }

    #[test]
    fn rejects_more_paths_than_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(draw_selective_channel(1, 1, 2, 3, &mut rng).is_err());
    }

    #[test]
    fn tap_energy_sums_to_one_per_link() {
        // E[sum_l |h_l|^2] = 1 under the uniform power delay profile
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 100_000;
        let l = 4;
        let mut acc = 0.0;
        for _ in 0..trials {
            let var = 1.0 / l as f64;
            acc += (0..l)
                .map(|_| complex_gaussian(&mut rng, var).norm_sqr())
                .sum::<f64>();
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn flat_channel_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = draw_flat_channel(2, 3, &mut rng);
        assert_eq!((h.nrows(), h.ncols()), (2, 3));

        let n = 100_000;
        let mut e2 = 0.0;
        let mut cross = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let a = complex_gaussian(&mut rng, 1.0);
            let b = complex_gaussian(&mut rng, 1.0);
            e2 += a.norm_sqr();
            cross += a * b.conj();
        }
        assert!((e2 / n as f64 - 1.0).abs() < 0.02);
        assert!((cross / n as f64).norm() < 0.02);
    }

    #[test]
    fn snr_conversion() {
        let s = snr_to_sigma2(0.0, EnergyNorm::PerSlot, 4, 2);
        assert!((s.sigma2 - 1.0).abs() < 1e-15);
        let s = snr_to_sigma2(10.0, EnergyNorm::PerSlot, 4, 2);
        assert!((s.sigma2 - 0.1).abs() < 1e-15);
        // per-frame differs by K/N in effective noise power
        let a = snr_to_sigma2(7.0, EnergyNorm::PerSlot, 4, 2);
        let b = snr_to_sigma2(7.0, EnergyNorm::PerFrame, 4, 2);
        assert!((b.sigma2 / a.sigma2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noiseless_transmit_is_exact_and_sparse_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = draw_selective_channel(2, 3, 4, 2, &mut rng).unwrap();
        let h = ch.assemble();
        let support = vec![
            (1usize, Complex64::new(0.3, -0.7)),
            (9usize, Complex64::new(-1.1, 0.2)),
        ];
        let noise = NoiseSpec { sigma2: 0.0, snr_db: f64::INFINITY };
        let y = transmit_sparse(&h, &support, &noise, &mut rng).unwrap();
        let mut x = DVector::zeros(h.ncols());
        for &(i, v) in &support {
            x[i] = v;
        }
        let y_dense = transmit_dense(&h, &x, &noise, &mut rng).unwrap();
        assert!((y.clone() - h * x).norm() < 1e-14);
        assert!((y - y_dense).norm() < 1e-12);
    }

    #[test]
    fn zero_input_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = DMatrix::<Complex64>::zeros(1, 1);
        let noise = NoiseSpec { sigma2: 0.25, snr_db: 6.0 };
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let y = transmit_sparse(&h, &[], &noise, &mut rng).unwrap();
            acc += y[0].norm_sqr();
        }
        let var = acc / n as f64;
        assert!((var - 0.25).abs() < 0.25 * 0.02, "var {var}");
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = draw_selective_channel(2, 4, 4, 2, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = draw_selective_channel(2, 4, 4, 2, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a.assemble(), b.assemble());
    }

    #[test]
    fn dump_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = draw_selective_channel(2, 3, 4, 2, &mut rng).unwrap();
        let mut buf = Vec::new();
        dump_channel(&ch, 1234, &mut buf).unwrap();
        let (back, seed) = load_channel(&buf[..]).unwrap();
        assert_eq!(seed, 1234);
        assert_eq!(back.assemble(), ch.assemble());
    }
}
