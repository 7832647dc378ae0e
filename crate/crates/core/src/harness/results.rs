//! Result CSVs and the plotting script written next to them.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::experiment::{ExperimentResult, RateSummary, Scheme};

pub const RATES_FILE: &str = "rates.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const PLOT_FILE: &str = "plot_rates.py";

const RATES_HEADER: &str = "scheme,power_dbm,mean_rate_bpshz,trials";
const TRIALS_HEADER: &str = "scheme,power_dbm,trial,ue_x,ue_y,ue_z,est_x,est_y,est_z,\
irs_index,bs_index,gain,training_symbols,rate_bpshz";

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Average effective rate versus BS transmit power, one curve per scheme."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
src = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "rates.csv")
curves = {}
with open(src, newline="") as fh:
    for row in csv.DictReader(fh):
        curves.setdefault(row["scheme"], []).append(
            (float(row["power_dbm"]), float(row["mean_rate_bpshz"]))
        )

styles = {
    "perfect_csi": "k-",
    "bim_light_training": "r-o",
    "bim_training_free": "b-s",
    "two_time_scale": "g-^",
    "location_based": "m-v",
    "full_training_bound": "c--",
}
fig, ax = plt.subplots(figsize=(6, 4.5))
for name, pts in curves.items():
    pts.sort()
    ax.plot([p for p, _ in pts], [r for _, r in pts], styles.get(name, "-"), label=name)
ax.set_xlabel("BS transmit power (dBm)")
ax.set_ylabel("Average effective rate (bps/Hz)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
out = os.path.join(os.path.dirname(os.path.abspath(src)), "rates.png")
fig.savefig(out, dpi=150)
print(out)
"#;

/// Writes `rates.csv`, `trials.csv` and `plot_rates.py` into `out_dir`.
pub fn write_results(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let rates_path = out_dir.join(RATES_FILE);
    let mut w = BufWriter::new(File::create(&rates_path)?);
    writeln!(w, "{RATES_HEADER}")?;
    for r in &result.rates {
        writeln!(
            w,
            "{},{},{},{}",
            r.scheme.name(),
            r.power_dbm,
            r.mean_rate,
            r.trials
        )?;
    }
    w.flush()?;

    let trials_path = out_dir.join(TRIALS_FILE);
    let mut w = BufWriter::new(File::create(&trials_path)?);
    writeln!(w, "{TRIALS_HEADER}")?;
    for t in &result.trials {
        let o = &t.outcome;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.scheme.name(),
            t.power_dbm,
            t.trial,
            t.ue.x,
            t.ue.y,
            t.ue.z,
            t.ue_estimate.x,
            t.ue_estimate.y,
            t.ue_estimate.z,
            o.pair.irs_index,
            o.pair.bs_index,
            o.gain,
            o.training_symbols,
            o.rate
        )?;
    }
    w.flush()?;

    let plot_path = out_dir.join(PLOT_FILE);
    fs::write(&plot_path, PLOT_SCRIPT)?;
    Ok(vec![rates_path, trials_path, plot_path])
}

pub fn read_rates(file: &Path) -> Result<Vec<RateSummary>> {
    let mut lines = BufReader::new(File::open(file)?).lines();
    let header = lines.next().transpose()?;
    match header {
        Some(h) if h.trim() == RATES_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {RATES_HEADER:?}"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, row) in lines.enumerate() {
        let line = i + 2;
        let row = row?;
        if row.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line, msg };
        let cols: Vec<&str> = row.split(',').collect();
        let [scheme, power, rate, trials] = cols.as_slice() else {
            return Err(bad(format!("expected 4 columns, found {}", cols.len())));
        };
        out.push(RateSummary {
            scheme: Scheme::from_name(scheme).ok_or_else(|| bad(format!("unknown scheme {scheme:?}")))?,
            power_dbm: power.parse().map_err(|e| bad(format!("power_dbm: {e}")))?,
            mean_rate: rate.parse().map_err(|e| bad(format!("mean_rate_bpshz: {e}")))?,
            trials: trials.parse().map_err(|e| bad(format!("trials: {e}")))?,
        });
    }
    Ok(out)
}

/// Plain-text table: one row per power level, one column per scheme.
pub fn format_report(rates: &[RateSummary]) -> String {
    let mut schemes: Vec<Scheme> = rates.iter().map(|r| r.scheme).collect();
    schemes.sort();
    schemes.dedup();
    let mut powers: Vec<f64> = rates.iter().map(|r| r.power_dbm).collect();
    powers.sort_by(f64::total_cmp);
    powers.dedup();

    let mut s = format!("{:>10}", "P (dBm)");
    for sc in &schemes {
        s.push_str(&format!(" {:>20}", sc.name()));
    }
    s.push('\n');
    for p in powers {
        s.push_str(&format!("{p:>10.1}"));
        for sc in &schemes {
            match rates.iter().find(|r| r.scheme == *sc && r.power_dbm == p) {
                Some(r) => s.push_str(&format!(" {:>20.4}", r.mean_rate)),
                None => s.push_str(&format!(" {:>20}", "-")),
            }
        }
        s.push('\n');
    }
    s
}
