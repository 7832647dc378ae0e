//! DFT beam codebooks for the BS (active) and IRS (passive) arrays.
//!
//! Beam `(k1, k2)` has flat index `k1·n_cols + k2` and element `(n1, n2)`
//! equal to `exp(j·2π·(n1·k1/n_rows + n2·k2/n_cols))`. BS beams carry an
//! extra `1/√M` so each has unit norm; IRS beams are phase-only.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::UpaConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    BsActive,
    IrsPassive,
}

/// An (IRS beam, BS beam) selection. Ordering is lexicographic on
/// `(irs_index, bs_index)`, which is the tie-break used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BeamPair {
    pub irs_index: usize,
    pub bs_index: usize,
}

impl BeamPair {
    pub const fn new(irs_index: usize, bs_index: usize) -> Self {
        Self {
            irs_index,
            bs_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Beams {
    /// Generated on demand from the geometry.
    Dft,
    Explicit(Vec<Array1<Complex64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    geometry: UpaConfig,
    kind: CodebookKind,
    beams: Beams,
}

pub fn make_irs_codebook(cfg: &UpaConfig) -> Codebook {
    Codebook {
        geometry: *cfg,
        kind: CodebookKind::IrsPassive,
        beams: Beams::Dft,
    }
}

pub fn make_bs_codebook(cfg: &UpaConfig) -> Codebook {
    Codebook {
        geometry: *cfg,
        kind: CodebookKind::BsActive,
        beams: Beams::Dft,
    }
}

impl Codebook {
    /// Arbitrary beam set; checked against the unit-norm / unit-modulus rule
    /// for `kind`. Such codebooks are not eligible for FFT search.
    pub fn from_vectors(
        kind: CodebookKind,
        geometry: UpaConfig,
        beams: Vec<Array1<Complex64>>,
    ) -> Result<Self> {
        let n = geometry.len();
        for (i, b) in beams.iter().enumerate() {
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "codebook beam length",
                    expected: n,
                    actual: b.len(),
                });
            }
            let ok = match kind {
                CodebookKind::BsActive => {
                    (b.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-9
                }
                CodebookKind::IrsPassive => b.iter().all(|z| (z.norm() - 1.0).abs() < 1e-9),
            };
            if !ok {
                return Err(Error::InvalidValue(format!(
                    "beam {i} violates the {kind:?} normalization"
                )));
            }
        }
        Ok(Self {
            geometry,
            kind,
            beams: Beams::Explicit(beams),
        })
    }

    pub fn geometry(&self) -> &UpaConfig {
        &self.geometry
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn is_dft(&self) -> bool {
        matches!(self.beams, Beams::Dft)
    }

    pub fn len(&self) -> usize {
        match &self.beams {
            Beams::Dft => self.geometry.len(),
            Beams::Explicit(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of every beam vector (the element count).
    pub fn dim(&self) -> usize {
        self.geometry.len()
    }

    pub fn beam(&self, idx: usize) -> Result<Array1<Complex64>> {
        if idx >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: idx,
                size: self.len(),
            });
        }
        match &self.beams {
            Beams::Explicit(b) => Ok(b[idx].clone()),
            Beams::Dft => {
                let (rows, cols) = (self.geometry.n_rows, self.geometry.n_cols);
                let (k1, k2) = (idx / cols, idx % cols);
                let scale = match self.kind {
                    CodebookKind::BsActive => 1.0 / (self.geometry.len() as f64).sqrt(),
                    CodebookKind::IrsPassive => 1.0,
                };
                Ok(Array1::from_shape_fn(rows * cols, |i| {
                    let (n1, n2) = (i / cols, i % cols);
                    // reduce the integer products first to keep phases exact
                    let p1 = ((n1 * k1) % rows) as f64 / rows as f64;
                    let p2 = ((n2 * k2) % cols) as f64 / cols as f64;
                    Complex64::from_polar(scale, 2.0 * PI * (p1 + p2))
                }))
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Array1<Complex64>> + '_ {
        (0..self.len()).map(move |i| self.beam(i).expect("index in range"))
    }
}
