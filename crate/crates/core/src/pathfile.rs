//! CSV import/export of traced path sets, one file per UE location.
//!
//! ```text
//! link,power_db,phase_deg,depart_zenith_rad,depart_azimuth_rad,arrive_zenith_rad,arrive_azimuth_rad,delay_s
//! bs_irs,-60.0,45.0,1.3962,0.0,1.5708,3.1415,3.3e-7
//! ```
//!
//! `power_db` is `20·log10|gain|` and `phase_deg` the gain argument in
//! degrees. A zero gain is written as `-inf`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::env::{PathComponent, PathSet};
use crate::error::{Error, Result};

pub const PATH_CSV_HEADER: &str = "link,power_db,phase_deg,depart_zenith_rad,depart_azimuth_rad,\
arrive_zenith_rad,arrive_azimuth_rad,delay_s";

// rounding slack on the angle range checks
const ANGLE_SLACK: f64 = 1e-9;

pub fn write_paths<W: Write>(paths: &PathSet, mut out: W) -> Result<()> {
    writeln!(out, "{PATH_CSV_HEADER}")?;
    let links = [("bs_irs", &paths.bs_irs_paths), ("irs_ue", &paths.irs_ue_paths)];
    for (link, list) in links {
        for p in list {
            let power_db = 20.0 * p.gain.norm().log10();
            let phase_deg = p.gain.arg().to_degrees();
            writeln!(
                out,
                "{link},{power_db},{phase_deg},{},{},{},{},{}",
                p.depart_zenith, p.depart_azimuth, p.arrive_zenith, p.arrive_azimuth, p.delay
            )?;
        }
    }
    Ok(())
}

pub fn export_paths(paths: &PathSet, file: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(file)?);
    write_paths(paths, &mut w)?;
    w.flush()?;
    Ok(())
}

fn parse_field(raw: &str, line: usize, name: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        msg: format!("{name}: {e} ({raw:?})"),
    })
}

fn check_zenith(v: f64, line: usize, name: &str) -> Result<f64> {
    if !(-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&v) {
        return Err(Error::Unit {
            line,
            msg: format!("{name} = {v} outside [0, π]"),
        });
    }
    Ok(v.clamp(0.0, PI))
}

fn check_azimuth(v: f64, line: usize, name: &str) -> Result<f64> {
    if !(-PI - ANGLE_SLACK..PI + ANGLE_SLACK).contains(&v) {
        return Err(Error::Unit {
            line,
            msg: format!("{name} = {v} outside [-π, π)"),
        });
    }
    Ok(v)
}

pub fn read_paths<R: Read>(input: R) -> Result<PathSet> {
    let mut set = PathSet::default();
    let mut lines = BufReader::new(input).lines();
    match lines.next() {
        Some(h) => {
            let h = h?;
            if h.trim() != PATH_CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("unexpected header {h:?}"),
                });
            }
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header".into(),
            })
        }
    }
    for (i, row) in lines.enumerate() {
        let line = i + 2;
        let row = row?;
        if row.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 8 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 8 columns, found {}", cols.len()),
            });
        }
        let power_db = parse_field(cols[1], line, "power_db")?;
        if power_db.is_nan() || power_db == f64::INFINITY {
            return Err(Error::Unit {
                line,
                msg: format!("power_db = {power_db} is not a finite attenuation"),
            });
        }
        let phase_deg = parse_field(cols[2], line, "phase_deg")?;
        if !phase_deg.is_finite() {
            return Err(Error::Unit {
                line,
                msg: "phase_deg must be finite".into(),
            });
        }
        let delay = parse_field(cols[7], line, "delay_s")?;
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::Unit {
                line,
                msg: format!("delay_s = {delay} must be non-negative"),
            });
        }
        let path = PathComponent {
            gain: Complex64::from_polar(10f64.powf(power_db / 20.0), phase_deg.to_radians()),
            depart_zenith: check_zenith(parse_field(cols[3], line, "depart_zenith_rad")?, line, "depart_zenith_rad")?,
            depart_azimuth: check_azimuth(parse_field(cols[4], line, "depart_azimuth_rad")?, line, "depart_azimuth_rad")?,
            arrive_zenith: check_zenith(parse_field(cols[5], line, "arrive_zenith_rad")?, line, "arrive_zenith_rad")?,
            arrive_azimuth: check_azimuth(parse_field(cols[6], line, "arrive_azimuth_rad")?, line, "arrive_azimuth_rad")?,
            delay,
        };
        match cols[0].trim() {
            "bs_irs" => set.bs_irs_paths.push(path),
            "irs_ue" => set.irs_ue_paths.push(path),
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown link {other:?}"),
                })
            }
        }
    }
    Ok(set)
}

pub fn import_paths(file: &Path) -> Result<PathSet> {
    read_paths(File::open(file)?)
}
