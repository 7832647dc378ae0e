//! Monte Carlo comparison of the selection schemes over a power sweep.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::beamsearch::{fft_search, pair_gain, NoiseModel, SearchResult};
use crate::bim::{build_bim, vote, BimDatabase, Fingerprint};
use crate::channel::{cascade, CascadedChannel, ChannelG, ChannelH};
use crate::codebook::{make_bs_codebook, make_irs_codebook, BeamPair, Codebook};
use crate::env::{trace_bs_irs, trace_irs_ue, PathSet};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::harness::config::ScenarioConfig;
use crate::schemes::{
    location_based_pair, select_bim_light_training, select_two_time_scale_with_bs_beam,
    two_time_scale_bs_beam, CoherenceBlock, Link, LinkBudget, SchemeOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    PerfectCsi,
    BimTrainingFree,
    BimLightTraining,
    LocationBased,
    TwoTimeScale,
    /// `(1 − MN/S)⁺` times the perfect-CSI rate: what explicit estimation of
    /// every entry of `Φ` could at best deliver.
    FullTrainingBound,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::PerfectCsi,
        Scheme::BimTrainingFree,
        Scheme::BimLightTraining,
        Scheme::LocationBased,
        Scheme::TwoTimeScale,
        Scheme::FullTrainingBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::PerfectCsi => "perfect_csi",
            Scheme::BimTrainingFree => "bim_training_free",
            Scheme::BimLightTraining => "bim_light_training",
            Scheme::LocationBased => "location_based",
            Scheme::TwoTimeScale => "two_time_scale",
            Scheme::FullTrainingBound => "full_training_bound",
        }
    }

    pub fn from_name(s: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|x| x.name() == s)
    }

    fn stream_id(self) -> u64 {
        self as u64
    }
}

/// Thermal noise power in mW for a PSD in dBm/Hz over `bandwidth` Hz.
pub fn noise_power(psd_dbm_hz: f64, bandwidth: f64) -> Result<f64> {
    if bandwidth.is_nan() || bandwidth <= 0.0 {
        return Err(Error::InvalidValue(format!("bandwidth {bandwidth} must be positive")));
    }
    Ok(10f64.powf((psd_dbm_hz + 10.0 * bandwidth.log10()) / 10.0))
}

/// Horizontal offset with Rayleigh magnitude of the given mean and a uniform
/// direction.
pub fn apply_location_error<R: Rng + ?Sized>(q: Vec3, mean_error: f64, rng: &mut R) -> Vec3 {
    if mean_error == 0.0 {
        return q;
    }
    // Rayleigh(σ) has mean σ·√(π/2)
    let sigma = mean_error * (2.0 / PI).sqrt();
    let dx: f64 = rng.sample(StandardNormal);
    let dy: f64 = rng.sample(StandardNormal);
    Vec3::new(q.x + sigma * dx, q.y + sigma * dy, q.z)
}

/// SplitMix64 finalizer over the words, giving independent stream seeds.
pub(crate) fn derive_seed(master: u64, words: &[u64]) -> u64 {
    let mut s = master;
    for w in words {
        s ^= w.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(s << 6).wrapping_add(s >> 2);
        let mut z = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        s = z ^ (z >> 31);
    }
    s
}

/// Codebooks and the fixed BS–IRS channel of a validated configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub irs: Codebook,
    pub bs: Codebook,
    pub g: ChannelG,
    /// BS beam chosen from `G` by the two-time-scale benchmark.
    pub two_time_scale_bs: usize,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let irs = make_irs_codebook(&config.irs_cfg);
        let bs = make_bs_codebook(&config.bs_cfg);
        let g = ChannelG::from_paths(&trace_bs_irs(&config.layout)?, &config.bs_cfg, &config.irs_cfg);
        let two_time_scale_bs = two_time_scale_bs_beam(&g, &bs)?;
        Ok(Self {
            config,
            irs,
            bs,
            g,
            two_time_scale_bs,
        })
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::new(&self.config.irs_cfg, &self.config.bs_cfg)
    }

    pub fn noise_power(&self) -> Result<f64> {
        noise_power(self.config.noise_psd, self.config.bandwidth)
    }

    /// True cascaded channel for a UE at `q`.
    pub fn cascaded(&self, q: Vec3) -> Result<CascadedChannel> {
        let h = ChannelH::from_paths(&trace_irs_ue(&self.config.layout, q)?, &self.config.irs_cfg);
        cascade(&h, &self.g)
    }

    /// Cascaded channel from an externally supplied path set.
    pub fn cascaded_from_paths(&self, paths: &PathSet) -> Result<CascadedChannel> {
        let g = ChannelG::from_paths(&paths.bs_irs_paths, &self.config.bs_cfg, &self.config.irs_cfg);
        let h = ChannelH::from_paths(&paths.irs_ue_paths, &self.config.irs_cfg);
        cascade(&h, &g)
    }

    /// Best pair at `q` on the traced channel.
    pub fn label(&self, q: Vec3) -> Result<SearchResult> {
        fft_search(&self.cascaded(q)?, &self.irs, &self.bs)
    }

    fn usable(&self, q: Vec3) -> bool {
        !self.config.layout.blockers.iter().any(|b| b.contains(q))
    }

    /// `n` uniform UE locations outside every blocker, skipping any in `exclude`.
    pub fn sample_locations(&self, n: usize, seed: u64, exclude: &[Vec3]) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let area = self.config.layout.ue_area;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let q = area.sample(&mut rng);
            if self.usable(q) && !exclude.contains(&q) {
                out.push(q);
            }
        }
        out
    }

    pub fn training_locations(&self) -> Vec<Vec3> {
        self.sample_locations(self.config.n_train, self.config.seeds.sampling, &[])
    }

    pub fn test_locations(&self, exclude: &[Vec3]) -> Vec<Vec3> {
        let seed = derive_seed(self.config.seeds.sampling, &[0x7e57]);
        self.sample_locations(self.config.n_test, seed, exclude)
    }

    pub fn build_bim(&self, locations: &[Vec3]) -> Result<BimDatabase> {
        build_bim(self.fingerprint(), locations, |q| Ok(self.label(q)?.pair))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub scheme: Scheme,
    pub power_dbm: f64,
    pub trial: usize,
    pub ue: Vec3,
    /// Location handed to location-aware schemes.
    pub ue_estimate: Vec3,
    pub outcome: SchemeOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSummary {
    pub scheme: Scheme,
    pub power_dbm: f64,
    pub mean_rate: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Ordered by trial, then power, then scheme.
    pub trials: Vec<TrialRecord>,
    /// Ordered by scheme, then power.
    pub rates: Vec<RateSummary>,
    pub n_test: usize,
}

impl ExperimentResult {
    pub fn mean_rate(&self, scheme: Scheme, power_dbm: f64) -> Option<f64> {
        self.rates
            .iter()
            .find(|r| r.scheme == scheme && r.power_dbm == power_dbm)
            .map(|r| r.mean_rate)
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        let mut s: Vec<Scheme> = self.rates.iter().map(|r| r.scheme).collect();
        s.dedup();
        s
    }
}

fn run_trial(
    scenario: &Scenario,
    db: &BimDatabase,
    noise_mw: f64,
    trial: usize,
    q: Vec3,
) -> Result<Vec<TrialRecord>> {
    let cfg = &scenario.config;
    let phi = scenario.cascaded(q)?;
    let (irs, bs) = (&scenario.irs, &scenario.bs);
    let best = fft_search(&phi, irs, bs)?;

    let mut err_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seeds.location_error, &[trial as u64]));
    let q_est = apply_location_error(q, cfg.location_error_mean, &mut err_rng);

    let block = CoherenceBlock::new(cfg.block_symbols)?;
    let tf_pair = vote(&db.knn(q_est, cfg.neighbors)?)?;
    let tf_gain = pair_gain(&phi, irs, bs, tf_pair)?;
    let one = Complex64::new(1.0, 0.0);
    let lb_pair = location_based_pair(&cfg.layout, q_est, irs, bs, one, one)?;
    let lb_gain = pair_gain(&phi, irs, bs, lb_pair)?;
    let full_training = ((irs.dim() * bs.dim()) as u64).min(cfg.block_symbols);

    let mut out = Vec::with_capacity(cfg.power_sweep.len() * Scheme::ALL.len());
    for (pi, &power_dbm) in cfg.power_sweep.iter().enumerate() {
        let link = Link {
            phi: &phi,
            irs,
            bs,
            budget: LinkBudget::from_dbm(power_dbm, noise_mw)?,
            block,
        };
        let stream = |s: Scheme| {
            let seed = derive_seed(cfg.seeds.noise, &[trial as u64, s.stream_id(), pi as u64]);
            (NoiseModel { noise_power: noise_mw, seed }, ChaCha8Rng::seed_from_u64(seed))
        };
        for scheme in Scheme::ALL {
            let outcome = match scheme {
                Scheme::PerfectCsi => link.outcome_with_gain(best.pair, best.gain, 0)?,
                Scheme::BimTrainingFree => link.outcome_with_gain(tf_pair, tf_gain, 0)?,
                Scheme::BimLightTraining => {
                    let (noise, mut rng) = stream(scheme);
                    select_bim_light_training(&link, db, q_est, cfg.neighbors, &noise, &mut rng)?
                }
                Scheme::LocationBased => link.outcome_with_gain(lb_pair, lb_gain, 0)?,
                Scheme::TwoTimeScale => {
                    let (noise, mut rng) = stream(scheme);
                    select_two_time_scale_with_bs_beam(&link, scenario.two_time_scale_bs, &noise, &mut rng)?
                }
                Scheme::FullTrainingBound => {
                    link.outcome_with_gain(best.pair, best.gain, full_training)?
                }
            };
            out.push(TrialRecord {
                scheme,
                power_dbm,
                trial,
                ue: q,
                ue_estimate: q_est,
                outcome,
            });
        }
    }
    Ok(out)
}

/// Evaluates every scheme at each test location and power level.
pub fn run_trials(scenario: &Scenario, db: &BimDatabase, test_locations: &[Vec3]) -> Result<ExperimentResult> {
    db.check_fingerprint(&scenario.fingerprint())?;
    if test_locations.is_empty() {
        return Err(Error::config("n_test", "no test locations"));
    }
    let noise_mw = scenario.noise_power()?;
    let per_trial: Vec<Vec<TrialRecord>> = test_locations
        .par_iter()
        .enumerate()
        .map(|(t, &q)| run_trial(scenario, db, noise_mw, t, q))
        .collect::<Result<_>>()?;
    let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();

    let n = test_locations.len();
    let mut rates = Vec::new();
    for scheme in Scheme::ALL {
        for &power_dbm in &scenario.config.power_sweep {
            let sum: f64 = trials
                .iter()
                .filter(|r| r.scheme == scheme && r.power_dbm == power_dbm)
                .map(|r| r.outcome.rate)
                .sum();
            rates.push(RateSummary {
                scheme,
                power_dbm,
                mean_rate: sum / n as f64,
                trials: n,
            });
        }
    }
    Ok(ExperimentResult {
        trials,
        rates,
        n_test: n,
    })
}

/// Runs the experiment against an existing map (e.g. loaded from disk).
pub fn run_experiment_with_bim(config: &ScenarioConfig, db: &BimDatabase) -> Result<ExperimentResult> {
    let scenario = Scenario::new(config.clone())?;
    let exclude: Vec<Vec3> = db.entries().iter().map(|e| e.location).collect();
    let tests = scenario.test_locations(&exclude);
    run_trials(&scenario, db, &tests)
}

/// Samples training points, builds the map, then evaluates every scheme.
pub fn run_experiment(config: &ScenarioConfig) -> Result<ExperimentResult> {
    let scenario = Scenario::new(config.clone())?;
    let train = scenario.training_locations();
    let db = scenario.build_bim(&train)?;
    let tests = scenario.test_locations(&train);
    run_trials(&scenario, &db, &tests)
}

/// Pair chosen by each scheme, keyed for quick lookup in tests and reports.
pub fn pairs_for(result: &ExperimentResult, scheme: Scheme, power_dbm: f64) -> Vec<BeamPair> {
    result
        .trials
        .iter()
        .filter(|r| r.scheme == scheme && r.power_dbm == power_dbm)
        .map(|r| r.outcome.pair)
        .collect()
}
