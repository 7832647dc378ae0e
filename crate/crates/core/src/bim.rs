//! Beam index map: training locations labelled with their best beam pair,
//! queried by K-nearest-neighbour vote.
//!
//! File format (`bim-v1`):
//!
//! ```text
//! bim-v1,<irs_rows>x<irs_cols>,<bs_rows>x<bs_cols>
//! x,y,z,irs_index,bs_index
//! ...
//! ```
//!
//! Coordinates are written with shortest round-trip formatting, so a save
//! followed by a load reproduces every value bit-for-bit.

use std::cmp::Ordering;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::channel::UpaConfig;
use crate::codebook::BeamPair;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const BIM_FORMAT_VERSION: &str = "bim-v1";

/// Array geometry of both codebooks a database was labelled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub irs_rows: usize,
    pub irs_cols: usize,
    pub bs_rows: usize,
    pub bs_cols: usize,
}

impl Fingerprint {
    pub fn new(irs: &UpaConfig, bs: &UpaConfig) -> Self {
        Self {
            irs_rows: irs.n_rows,
            irs_cols: irs.n_cols,
            bs_rows: bs.n_rows,
            bs_cols: bs.n_cols,
        }
    }

    fn irs_len(&self) -> usize {
        self.irs_rows * self.irs_cols
    }

    fn bs_len(&self) -> usize {
        self.bs_rows * self.bs_cols
    }

    fn parse(irs: &str, bs: &str) -> Option<Self> {
        fn dims(s: &str) -> Option<(usize, usize)> {
            let (r, c) = s.trim().split_once('x')?;
            Some((r.parse().ok()?, c.parse().ok()?))
        }
        let (irs_rows, irs_cols) = dims(irs)?;
        let (bs_rows, bs_cols) = dims(bs)?;
        Some(Self {
            irs_rows,
            irs_cols,
            bs_rows,
            bs_cols,
        })
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{},{}x{}",
            self.irs_rows, self.irs_cols, self.bs_rows, self.bs_cols
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimEntry {
    pub location: Vec3,
    pub pair: BeamPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BimDatabase {
    fingerprint: Fingerprint,
    entries: Vec<BimEntry>,
}

/// One neighbour returned by [`BimDatabase::knn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// Position of the entry in the database (insertion order).
    pub entry: usize,
    pub pair: BeamPair,
    pub distance: f64,
}

/// K nearest entries, sorted by non-decreasing distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet(Vec<Candidate>);

impl CandidateSet {
    pub fn as_slice(&self) -> &[Candidate] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct pairs in order of first appearance.
    pub fn distinct_pairs(&self) -> Vec<BeamPair> {
        let mut out: Vec<BeamPair> = Vec::with_capacity(self.0.len());
        for c in &self.0 {
            if !out.contains(&c.pair) {
                out.push(c.pair);
            }
        }
        out
    }
}

impl From<Vec<Candidate>> for CandidateSet {
    /// Wraps pre-computed candidates, sorting them by distance (stable).
    fn from(mut v: Vec<Candidate>) -> Self {
        v.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        CandidateSet(v)
    }
}

impl BimDatabase {
    pub fn new(fingerprint: Fingerprint, entries: Vec<BimEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        for e in &entries {
            if e.pair.irs_index >= fingerprint.irs_len() {
                return Err(Error::IndexOutOfRange {
                    index: e.pair.irs_index,
                    size: fingerprint.irs_len(),
                });
            }
            if e.pair.bs_index >= fingerprint.bs_len() {
                return Err(Error::IndexOutOfRange {
                    index: e.pair.bs_index,
                    size: fingerprint.bs_len(),
                });
            }
            if !e.location.is_finite() {
                return Err(Error::InvalidValue("non-finite BIM location".into()));
            }
        }
        Ok(Self {
            fingerprint,
            entries,
        })
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn entries(&self) -> &[BimEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check_fingerprint(&self, expected: &Fingerprint) -> Result<()> {
        if self.fingerprint != *expected {
            return Err(Error::FingerprintMismatch {
                expected: expected.to_string(),
                found: self.fingerprint.to_string(),
            });
        }
        Ok(())
    }

    /// Exact linear-scan KNN; ties in distance keep insertion order.
    pub fn knn(&self, q: Vec3, k: usize) -> Result<CandidateSet> {
        if k > self.entries.len() {
            return Err(Error::KTooLarge {
                k,
                available: self.entries.len(),
            });
        }
        if k == 0 {
            return Err(Error::InvalidValue("K must be at least 1".into()));
        }
        let mut all: Vec<Candidate> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| Candidate {
                entry: i,
                pair: e.pair,
                distance: e.location.distance(q),
            })
            .collect();
        let by_distance =
            |a: &Candidate, b: &Candidate| a.distance.total_cmp(&b.distance).then(a.entry.cmp(&b.entry));
        if k < all.len() {
            all.select_nth_unstable_by(k - 1, by_distance);
            all.truncate(k);
        }
        all.sort_by(by_distance);
        Ok(CandidateSet(all))
    }
}

/// Labels every location with `labeler` (in parallel; order preserved).
pub fn build_bim<F>(fingerprint: Fingerprint, locations: &[Vec3], labeler: F) -> Result<BimDatabase>
where
    F: Fn(Vec3) -> Result<BeamPair> + Sync,
{
    if locations.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let entries = locations
        .par_iter()
        .map(|&q| {
            Ok(BimEntry {
                location: q,
                pair: labeler(q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BimDatabase::new(fingerprint, entries)
}

struct Group {
    pair: BeamPair,
    count: usize,
    inverse_distances: Vec<f64>,
}

impl Group {
    fn inverse_distance_sum(&self) -> f64 {
        // ascending order so the sum is independent of candidate order
        let mut v = self.inverse_distances.clone();
        v.sort_by(f64::total_cmp);
        v.iter().sum()
    }
}

/// Most frequent pair; tied counts go to the largest inverse-distance sum
/// (a zero distance counts as infinite), then to the smaller pair.
pub fn vote(candidates: &CandidateSet) -> Result<BeamPair> {
    let mut groups: Vec<Group> = Vec::new();
    for c in candidates.as_slice() {
        let inv = if c.distance == 0.0 {
            f64::INFINITY
        } else {
            1.0 / c.distance
        };
        match groups.iter_mut().find(|g| g.pair == c.pair) {
            Some(g) => {
                g.count += 1;
                g.inverse_distances.push(inv);
            }
            None => groups.push(Group {
                pair: c.pair,
                count: 1,
                inverse_distances: vec![inv],
            }),
        }
    }
    let scored: Vec<(usize, f64, BeamPair)> = groups
        .iter()
        .map(|g| (g.count, g.inverse_distance_sum(), g.pair))
        .collect();
    scored
        .into_iter()
        .max_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
                .then(b.2.cmp(&a.2))
        })
        .map(|(_, _, p)| p)
        .ok_or(Error::EmptyCandidateSet)
}

pub fn write_bim<W: Write>(db: &BimDatabase, mut out: W) -> Result<()> {
    writeln!(out, "{BIM_FORMAT_VERSION},{}", db.fingerprint)?;
    for e in &db.entries {
        let p = e.location;
        writeln!(
            out,
            "{},{},{},{},{}",
            p.x, p.y, p.z, e.pair.irs_index, e.pair.bs_index
        )?;
    }
    Ok(())
}

pub fn save_bim(db: &BimDatabase, file: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(file)?);
    write_bim(db, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Parses a BIM file; with `expected`, also checks its fingerprint.
pub fn read_bim<R: Read>(input: R, expected: Option<&Fingerprint>) -> Result<BimDatabase> {
    let mut lines = BufReader::new(input).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::FormatVersionMismatch("empty file".into())),
    };
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.first() != Some(&BIM_FORMAT_VERSION) {
        return Err(Error::FormatVersionMismatch(format!(
            "expected {BIM_FORMAT_VERSION}, found {:?}",
            fields.first().copied().unwrap_or("")
        )));
    }
    let fingerprint = match fields.as_slice() {
        [_, irs, bs] => Fingerprint::parse(irs, bs),
        _ => None,
    }
    .ok_or_else(|| Error::Parse {
        line: 1,
        msg: format!("malformed header {header:?}"),
    })?;
    if let Some(want) = expected {
        if *want != fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: want.to_string(),
                found: fingerprint.to_string(),
            });
        }
    }
    let mut entries = Vec::new();
    for (i, row) in lines.enumerate() {
        let line = i + 2;
        let row = row?;
        if row.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = row.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 5 columns, found {}", cols.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("{e} ({s:?})"),
            })
        };
        let idx = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line,
                msg: format!("{e} ({s:?})"),
            })
        };
        entries.push(BimEntry {
            location: Vec3::new(num(cols[0])?, num(cols[1])?, num(cols[2])?),
            pair: BeamPair::new(idx(cols[3])?, idx(cols[4])?),
        });
    }
    BimDatabase::new(fingerprint, entries)
}

pub fn load_bim(file: &Path, expected: Option<&Fingerprint>) -> Result<BimDatabase> {
    read_bim(File::open(file)?, expected)
}
