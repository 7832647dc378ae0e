use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use irs_beamsim::bim::{load_bim, save_bim, build_bim};
use irs_beamsim::env::trace_paths;
use irs_beamsim::harness::{
    format_report, read_rates, run_experiment, run_experiment_with_bim, write_results, Preset,
    Scenario, ScenarioConfig,
};
use irs_beamsim::pathfile::{export_paths, import_paths};
use irs_beamsim::beamsearch::fft_search;
use irs_beamsim::{Error, Result, Vec3};

#[derive(Parser)]
#[command(name = "irs-beamsim", version, about = "Beam-index-map beam selection for IRS-aided links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Scenario JSON; fields not given fall back to the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base preset: `full` or `desk`.
    #[arg(long, default_value = "full")]
    preset: String,
}

impl ConfigArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let preset: Preset = self.preset.parse()?;
        match &self.config {
            Some(p) => ScenarioConfig::from_json(&fs::read_to_string(p)?, preset),
            None => Ok(ScenarioConfig::preset(preset)),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the full configuration (preset plus overrides) as JSON.
    Config {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Trace the training locations and write one path CSV per location.
    Trace {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a beam index map from path CSVs written by `trace` or an external tracer.
    ImportPaths {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Directory holding `locations.csv` and the per-location path files.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label the training locations on the traced site and save the map.
    BuildBim {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the scheme comparison and write result CSVs.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Use a saved map instead of building one.
        #[arg(long)]
        bim: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the mean-rate table of a results directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

const LOCATIONS_FILE: &str = "locations.csv";

fn path_file_name(i: usize) -> String {
    format!("ue_{i:05}.csv")
}

fn trace(cfg: &ScenarioConfig, out: &Path) -> Result<()> {
    let scenario = Scenario::new(cfg.clone())?;
    fs::create_dir_all(out)?;
    let locations = scenario.training_locations();
    let mut index = BufWriter::new(File::create(out.join(LOCATIONS_FILE))?);
    writeln!(index, "file,x,y,z")?;
    for (i, q) in locations.iter().enumerate() {
        let name = path_file_name(i);
        export_paths(&trace_paths(&cfg.layout, *q)?, &out.join(&name))?;
        writeln!(index, "{name},{},{},{}", q.x, q.y, q.z)?;
    }
    index.flush()?;
    eprintln!("traced {} locations into {}", locations.len(), out.display());
    Ok(())
}

fn read_locations(dir: &Path) -> Result<Vec<(PathBuf, Vec3)>> {
    let mut out = Vec::new();
    let reader = BufReader::new(File::open(dir.join(LOCATIONS_FILE))?);
    for (i, row) in reader.lines().enumerate().skip(1) {
        let row = row?;
        if row.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: format!("{LOCATIONS_FILE}: {msg}"),
        };
        let cols: Vec<&str> = row.split(',').map(str::trim).collect();
        let [file, x, y, z] = cols.as_slice() else {
            return Err(bad("expected file,x,y,z"));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad coordinate"));
        out.push((dir.join(file), Vec3::new(num(x)?, num(y)?, num(z)?)));
    }
    Ok(out)
}

fn import(cfg: &ScenarioConfig, input: &Path, out: &Path) -> Result<()> {
    let scenario = Scenario::new(cfg.clone())?;
    let rows = read_locations(input)?;
    let locations: Vec<Vec3> = rows.iter().map(|(_, q)| *q).collect();
    let db = build_bim(scenario.fingerprint(), &locations, |q| {
        let (file, _) = rows.iter().find(|(_, p)| *p == q).expect("listed location");
        let phi = scenario.cascaded_from_paths(&import_paths(file)?)?;
        Ok(fft_search(&phi, &scenario.irs, &scenario.bs)?.pair)
    })?;
    save_bim(&db, out)?;
    eprintln!("wrote {} entries to {}", db.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Config { cfg } => {
            println!("{}", cfg.load()?.to_json());
        }
        Command::Trace { cfg, out } => trace(&cfg.load()?, &out)?,
        Command::ImportPaths { cfg, input, out } => import(&cfg.load()?, &input, &out)?,
        Command::BuildBim { cfg, out } => {
            let scenario = Scenario::new(cfg.load()?)?;
            let db = scenario.build_bim(&scenario.training_locations())?;
            save_bim(&db, &out)?;
            eprintln!("wrote {} entries to {}", db.len(), out.display());
        }
        Command::Run { cfg, bim, out } => {
            let cfg = cfg.load()?;
            let result = match bim {
                Some(path) => {
                    let scenario = Scenario::new(cfg.clone())?;
                    let db = load_bim(&path, Some(&scenario.fingerprint()))?;
                    run_experiment_with_bim(&cfg, &db)?
                }
                None => run_experiment(&cfg)?,
            };
            write_results(&result, &out)?;
            print!("{}", format_report(&result.rates));
        }
        Command::Report { input } => {
            let rates = read_rates(&input.join("rates.csv"))?;
            print!("{}", format_report(&rates));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } => 2,
                Error::Io(_) => 3,
                _ => 1,
            })
        }
    }
}
