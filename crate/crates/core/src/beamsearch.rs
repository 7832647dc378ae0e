//! Optimal beam-pair search and noisy beam-sweep measurements.
//!
//! `fft_search` exploits the DFT structure of both codebooks: `Φ·f` for every
//! BS beam comes from a 2-D FFT over each row of `Φ` (on the BS grid), and
//! every IRS beam response to that vector from one 2-D FFT on the IRS grid.
//! Both transforms are unnormalized inverse DFTs, matching the `exp(+j…)`
//! beam phases.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::channel::{beam_amplitude, beam_gain, CascadedChannel};
use crate::codebook::{BeamPair, Codebook, CodebookKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub pair: BeamPair,
    /// Noise-free `|vᵀΦf|²` of `pair`.
    pub gain: f64,
}

fn check_dims(phi: &CascadedChannel, irs: &Codebook, bs: &Codebook) -> Result<()> {
    if irs.dim() != phi.irs_len() {
        return Err(Error::DimensionMismatch {
            what: "IRS codebook vs Φ rows",
            expected: phi.irs_len(),
            actual: irs.dim(),
        });
    }
    if bs.dim() != phi.bs_len() {
        return Err(Error::DimensionMismatch {
            what: "BS codebook vs Φ columns",
            expected: phi.bs_len(),
            actual: bs.dim(),
        });
    }
    Ok(())
}

/// Larger gain wins; equal gains go to the lexicographically smaller pair.
fn better(a: (f64, BeamPair), b: (f64, BeamPair)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn reduce_best(items: impl IntoIterator<Item = (f64, BeamPair)>) -> Option<(f64, BeamPair)> {
    items
        .into_iter()
        .fold(None, |acc, it| match acc {
            Some(best) if !better(it, best) => Some(best),
            _ => Some(it),
        })
}

/// Brute-force argmax of `|vᵀΦf|²` over every pair.
pub fn exhaustive_search(phi: &CascadedChannel, irs: &Codebook, bs: &Codebook) -> Result<SearchResult> {
    check_dims(phi, irs, bs)?;
    let irs_beams: Vec<Array1<Complex64>> = irs.iter().collect();
    let per_bs: Vec<(f64, BeamPair)> = (0..bs.len())
        .into_par_iter()
        .map(|m| {
            let f = bs.beam(m)?;
            let a = phi.apply_bs_beam(f.view())?;
            let best = irs_beams
                .iter()
                .enumerate()
                .map(|(k, v)| (v.dot(&a).norm_sqr(), BeamPair::new(k, m)));
            Ok(reduce_best(best).expect("non-empty IRS codebook"))
        })
        .collect::<Result<_>>()?;
    let (_, pair) = reduce_best(per_bs).ok_or(Error::EmptyCandidateSet)?;
    Ok(SearchResult {
        pair,
        gain: pair_gain(phi, irs, bs, pair)?,
    })
}

/// Noise-free gain of a pair on `phi`.
pub fn pair_gain(phi: &CascadedChannel, irs: &Codebook, bs: &Codebook, pair: BeamPair) -> Result<f64> {
    let v = irs.beam(pair.irs_index)?;
    let f = bs.beam(pair.bs_index)?;
    beam_gain(phi, v.view(), f.view())
}

/// 2-D inverse DFT over a row-major `rows × cols` grid, unnormalized.
#[derive(Clone)]
pub struct GridTransform {
    rows: usize,
    cols: usize,
    row_fft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridTransform")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl GridTransform {
    /// Transform matching a DFT codebook's beam grid.
    pub fn for_codebook(cb: &Codebook) -> Result<Self> {
        if !cb.is_dft() {
            return Err(Error::UnsupportedCodebook);
        }
        let g = cb.geometry();
        let mut planner = FftPlanner::new();
        Ok(Self {
            rows: g.n_rows,
            cols: g.n_cols,
            row_fft: planner.plan_fft_inverse(g.n_cols),
            col_fft: planner.plan_fft_inverse(g.n_rows),
        })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out[k1·cols + k2] = Σ x[n1·cols + n2]·exp(j2π(n1k1/rows + n2k2/cols))`.
    pub fn apply(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        self.row_fft.process(data);
        if self.rows > 1 {
            let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
            transpose(data, &mut t, self.rows, self.cols);
            self.col_fft.process(&mut t);
            transpose(&t, data, self.cols, self.rows);
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// `bₖᵀ·a` for every beam of a DFT codebook, by flat index.
pub fn dft_beam_amplitudes(a: &Array1<Complex64>, cb: &Codebook) -> Result<Vec<Complex64>> {
    let t = GridTransform::for_codebook(cb)?;
    if a.len() != t.len() {
        return Err(Error::DimensionMismatch {
            what: "amplitude vector",
            expected: t.len(),
            actual: a.len(),
        });
    }
    let mut buf = a.to_vec();
    t.apply(&mut buf);
    if cb.kind() == CodebookKind::BsActive {
        let s = 1.0 / (t.len() as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= s);
    }
    Ok(buf)
}

/// `bₖᵀ·a` for any codebook, via FFT when possible.
pub fn all_beam_amplitudes(a: &Array1<Complex64>, cb: &Codebook) -> Result<Vec<Complex64>> {
    if cb.is_dft() {
        return dft_beam_amplitudes(a, cb);
    }
    Ok(cb.iter().map(|v| v.dot(a)).collect())
}

/// Columns are `A·f_m` for every beam `m` of a DFT BS codebook.
pub fn apply_all_bs_beams(mat: &Array2<Complex64>, bs: &Codebook) -> Result<Array2<Complex64>> {
    let t = GridTransform::for_codebook(bs)?;
    if mat.ncols() != t.len() {
        return Err(Error::DimensionMismatch {
            what: "BS codebook vs matrix columns",
            expected: mat.ncols(),
            actual: t.len(),
        });
    }
    let scale = 1.0 / (t.len() as f64).sqrt();
    let mut out = mat.clone();
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .for_each(|mut row| {
            let mut buf = row.to_vec();
            t.apply(&mut buf);
            for (dst, src) in row.iter_mut().zip(buf) {
                *dst = src * scale;
            }
        });
    Ok(out)
}

/// Same argmax as [`exhaustive_search`], via 2-D FFTs on both grids.
pub fn fft_search(phi: &CascadedChannel, irs: &Codebook, bs: &Codebook) -> Result<SearchResult> {
    check_dims(phi, irs, bs)?;
    if !irs.is_dft() || !bs.is_dft() {
        return Err(Error::UnsupportedCodebook);
    }
    let t = GridTransform::for_codebook(irs)?;
    let per_f = apply_all_bs_beams(&phi.0, bs)?;
    let per_bs: Vec<(f64, BeamPair)> = (0..bs.len())
        .into_par_iter()
        .map(|m| {
            let mut buf = per_f.column(m).to_vec();
            t.apply(&mut buf);
            let best = buf
                .iter()
                .enumerate()
                .map(|(k, z)| (z.norm_sqr(), BeamPair::new(k, m)));
            reduce_best(best).expect("non-empty IRS codebook")
        })
        .collect();
    let (_, pair) = reduce_best(per_bs).ok_or(Error::EmptyCandidateSet)?;
    Ok(SearchResult {
        pair,
        gain: pair_gain(phi, irs, bs, pair)?,
    })
}

/// AWGN of variance `noise_power` (linear mW) on single-symbol measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub noise_power: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(noise_power: f64, seed: u64) -> Result<Self> {
        if !(noise_power >= 0.0 && noise_power.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "noise power {noise_power} must be non-negative"
            )));
        }
        Ok(Self { noise_power, seed })
    }

    pub fn stream(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// One draw of `CN(0, σ²)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let s = (0.5 * self.noise_power).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    }
}

/// `|√P·g + z|²` for a known noise-free amplitude `g` (pilot `x = 1`).
///
/// With `σ² = 0` this is exactly `P·|g|²` and draws nothing from `rng`.
pub fn noisy_power<R: Rng + ?Sized>(amplitude: Complex64, power: f64, noise: &NoiseModel, rng: &mut R) -> f64 {
    if noise.noise_power == 0.0 {
        return power * amplitude.norm_sqr();
    }
    (amplitude * power.sqrt() + noise.sample(rng)).norm_sqr()
}

pub fn noisy_measure<R: Rng + ?Sized>(
    phi: &CascadedChannel,
    v: &Array1<Complex64>,
    f: &Array1<Complex64>,
    power: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<f64> {
    if power.is_nan() || power <= 0.0 {
        return Err(Error::InvalidValue(format!("transmit power {power} must be positive")));
    }
    let g = beam_amplitude(phi, v.view(), f.view())?;
    Ok(noisy_power(g, power, noise, rng))
}

/// Index of the largest value; the earliest wins ties.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Measures each candidate once and returns the strongest measurement.
pub fn sweep_candidates<R: Rng + ?Sized>(
    phi: &CascadedChannel,
    candidates: &[BeamPair],
    irs: &Codebook,
    bs: &Codebook,
    power: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<BeamPair> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let mut measured = Vec::with_capacity(candidates.len());
    for p in candidates {
        let v = irs.beam(p.irs_index)?;
        let f = bs.beam(p.bs_index)?;
        measured.push(noisy_measure(phi, &v, &f, power, noise, rng)?);
    }
    let best = argmax_first(&measured).expect("non-empty");
    Ok(candidates[best])
}
