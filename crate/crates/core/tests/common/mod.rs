//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use irs_beamsim::channel::CascadedChannel;
use irs_beamsim::codebook::BeamPair;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vec(n: usize, rng: &mut impl Rng) -> Array1<Complex64> {
    Array1::from_shape_fn(n, |_| cn(rng))
}

pub fn random_mat(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<Complex64> {
    Array2::from_shape_fn((rows, cols), |_| cn(rng))
}

pub fn random_phi(n: usize, m: usize, rng: &mut impl Rng) -> CascadedChannel {
    CascadedChannel(random_mat(n, m, rng))
}

pub fn unit_modulus(n: usize, rng: &mut impl Rng) -> Array1<Complex64> {
    Array1::from_shape_fn(n, |_| Complex64::from_polar(1.0, rng.random_range(-PI..PI)))
}

pub fn unit_norm(m: usize, rng: &mut impl Rng) -> Array1<Complex64> {
    let f = random_vec(m, rng);
    let n = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    f.mapv(|z| z / n)
}

/// DFT beam written out element by element.
pub fn dft_beam(rows: usize, cols: usize, k: usize, scale: f64) -> Vec<Complex64> {
    let (k1, k2) = (k / cols, k % cols);
    let mut out = Vec::with_capacity(rows * cols);
    for n1 in 0..rows {
        for n2 in 0..cols {
            let t = (n1 * k1) as f64 / rows as f64 + (n2 * k2) as f64 / cols as f64;
            out.push(Complex64::from_polar(scale, 2.0 * PI * t));
        }
    }
    out
}

/// Triple loop over IRS beam, BS beam and matrix entries.
pub fn brute_force(
    phi: &Array2<Complex64>,
    irs: (usize, usize),
    bs: (usize, usize),
) -> (BeamPair, f64) {
    let n = irs.0 * irs.1;
    let m = bs.0 * bs.1;
    let irs_beams: Vec<_> = (0..n).map(|k| dft_beam(irs.0, irs.1, k, 1.0)).collect();
    let bs_beams: Vec<_> = (0..m)
        .map(|k| dft_beam(bs.0, bs.1, k, 1.0 / (m as f64).sqrt()))
        .collect();
    let mut best = (BeamPair::new(0, 0), f64::NEG_INFINITY);
    for (i, v) in irs_beams.iter().enumerate() {
        for (j, f) in bs_beams.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..n {
                for c in 0..m {
                    acc += v[r] * phi[[r, c]] * f[c];
                }
            }
            let g = acc.norm_sqr();
            if g > best.1 {
                best = (BeamPair::new(i, j), g);
            }
        }
    }
    best
}

/// `|hᴴ·diag(v)·G·f|²` evaluated term by term.
pub fn two_hop_gain(
    h: &Array1<Complex64>,
    g: &Array2<Complex64>,
    v: &Array1<Complex64>,
    f: &Array1<Complex64>,
) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..h.len() {
        let mut gf = Complex64::new(0.0, 0.0);
        for m in 0..f.len() {
            gf += g[[n, m]] * f[m];
        }
        acc += h[n].conj() * v[n] * gf;
    }
    acc.norm_sqr()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
