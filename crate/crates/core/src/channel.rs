//! Array responses and the narrowband BS–IRS–UE channel.
//!
//! Convention: `h` is the IRS–UE vector with the received amplitude given by
//! `hᴴ·diag(v)·G·f`. The cascaded channel is `Φ = diag(conj(h))·G`, so the
//! same amplitude reads `vᵀ·Φ·f`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::env::PathComponent;
use crate::error::{Error, Result};

/// Uniform planar array with `n_rows × n_cols` elements, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpaConfig {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Element separation in wavelengths.
    #[serde(default = "half_wavelength")]
    pub spacing: f64,
}

fn half_wavelength() -> f64 {
    0.5
}

impl UpaConfig {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            spacing: 0.5,
        }
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::config(field, "n_rows and n_cols must be >= 1"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::config(format!("{field}.spacing"), "must be positive"));
        }
        Ok(())
    }
}

/// Response of the array toward (`zenith`, `azimuth`) in its local frame.
pub fn upa_response(cfg: &UpaConfig, zenith: f64, azimuth: f64) -> Array1<Complex64> {
    let (s, c) = (zenith.sin(), azimuth.cos());
    let u = s * c;
    let w = s * azimuth.sin();
    let k = 2.0 * PI * cfg.spacing;
    Array1::from_shape_fn(cfg.len(), |i| {
        let (n1, n2) = ((i / cfg.n_cols) as f64, (i % cfg.n_cols) as f64);
        Complex64::from_polar(1.0, k * (n1 * u + n2 * w))
    })
}

/// Antenna arrangement at one end of a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Antenna {
    Single,
    Upa(UpaConfig),
}

impl Antenna {
    pub fn len(&self) -> usize {
        match self {
            Antenna::Single => 1,
            Antenna::Upa(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn response(&self, zenith: f64, azimuth: f64) -> Array1<Complex64> {
        match self {
            Antenna::Single => Array1::from_elem(1, Complex64::new(1.0, 0.0)),
            Antenna::Upa(c) => upa_response(c, zenith, azimuth),
        }
    }
}

/// `Σ gain·a_rx(arrival)·a_tx(departure)ᴴ`, shaped `rx × tx`.
pub fn synth_channel(paths: &[PathComponent], tx: Antenna, rx: Antenna) -> Array2<Complex64> {
    let mut out = Array2::<Complex64>::zeros((rx.len(), tx.len()));
    for p in paths {
        let ar = rx.response(p.arrive_zenith, p.arrive_azimuth) * p.gain;
        let at = tx.response(p.depart_zenith, p.depart_azimuth).mapv(|z| z.conj());
        for (i, mut row) in out.outer_iter_mut().enumerate() {
            row.scaled_add(ar[i], &at);
        }
    }
    out
}

/// BS–IRS channel `G`, `N × M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelG(pub Array2<Complex64>);

/// IRS–UE channel vector `h` of length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelH(pub Array1<Complex64>);

impl ChannelG {
    pub fn from_paths(paths: &[PathComponent], bs: &UpaConfig, irs: &UpaConfig) -> Self {
        ChannelG(synth_channel(paths, Antenna::Upa(*bs), Antenna::Upa(*irs)))
    }

    pub fn irs_len(&self) -> usize {
        self.0.nrows()
    }

    pub fn bs_len(&self) -> usize {
        self.0.ncols()
    }
}

impl ChannelH {
    /// The IRS→UE paths give the row `hᴴ`; this stores its conjugate.
    pub fn from_paths(paths: &[PathComponent], irs: &UpaConfig) -> Self {
        let row = synth_channel(paths, Antenna::Upa(*irs), Antenna::Single);
        ChannelH(row.row(0).mapv(|z| z.conj()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Φ = diag(conj(h))·G`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel(pub Array2<Complex64>);

impl CascadedChannel {
    pub fn irs_len(&self) -> usize {
        self.0.nrows()
    }

    pub fn bs_len(&self) -> usize {
        self.0.ncols()
    }

    /// `Φ·f`, the per-element amplitude seen by the IRS codebook.
    pub fn apply_bs_beam(&self, f: ArrayView1<'_, Complex64>) -> Result<Array1<Complex64>> {
        if f.len() != self.bs_len() {
            return Err(Error::DimensionMismatch {
                what: "BS beam length",
                expected: self.bs_len(),
                actual: f.len(),
            });
        }
        Ok(self.0.dot(&f))
    }
}

pub fn cascade(h: &ChannelH, g: &ChannelG) -> Result<CascadedChannel> {
    if h.len() != g.irs_len() {
        return Err(Error::DimensionMismatch {
            what: "IRS elements in h vs G",
            expected: g.irs_len(),
            actual: h.len(),
        });
    }
    let mut phi = g.0.clone();
    for (mut row, hn) in phi.outer_iter_mut().zip(h.0.iter()) {
        let c = hn.conj();
        row.mapv_inplace(|z| z * c);
    }
    Ok(CascadedChannel(phi))
}

/// Complex amplitude `vᵀ·Φ·f`.
pub fn beam_amplitude(
    phi: &CascadedChannel,
    v: ArrayView1<'_, Complex64>,
    f: ArrayView1<'_, Complex64>,
) -> Result<Complex64> {
    if v.len() != phi.irs_len() {
        return Err(Error::DimensionMismatch {
            what: "IRS beam length",
            expected: phi.irs_len(),
            actual: v.len(),
        });
    }
    let a = phi.apply_bs_beam(f)?;
    Ok(v.dot(&a))
}

/// `|vᵀ·Φ·f|²`.
pub fn beam_gain(
    phi: &CascadedChannel,
    v: ArrayView1<'_, Complex64>,
    f: ArrayView1<'_, Complex64>,
) -> Result<f64> {
    beam_amplitude(phi, v, f).map(|a| a.norm_sqr())
}
