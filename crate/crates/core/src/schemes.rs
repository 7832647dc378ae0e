//! The beam-selection schemes and their effective-rate accounting.
//!
//! Every scheme reports the noise-free gain of the pair it picked on the
//! true cascaded channel, and a rate
//! `((S − S_tr)/S)·log2(1 + P̄·gain)` where `S_tr` is the number of pilot
//! symbols the scheme spent inside the coherence block.

use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;

use crate::beamsearch::{
    all_beam_amplitudes, apply_all_bs_beams, argmax_first, fft_search, noisy_power, pair_gain,
    sweep_candidates, NoiseModel, SearchResult,
};
use crate::bim::{vote, BimDatabase};
use crate::channel::{upa_response, CascadedChannel, ChannelG};
use crate::codebook::{BeamPair, Codebook};
use crate::env::SiteLayout;
use crate::error::{Error, Result};
use crate::geometry::{Vec3, COINCIDENT_EPS};

/// Transmit and noise power in linear mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    transmit_power: f64,
    noise_power: f64,
}

impl LinkBudget {
    pub fn new(transmit_power: f64, noise_power: f64) -> Result<Self> {
        if !(transmit_power > 0.0 && transmit_power.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "transmit power {transmit_power} mW must be positive"
            )));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "noise power {noise_power} mW must be positive"
            )));
        }
        Ok(Self {
            transmit_power,
            noise_power,
        })
    }

    pub fn from_dbm(transmit_dbm: f64, noise_power: f64) -> Result<Self> {
        Self::new(dbm_to_mw(transmit_dbm), noise_power)
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// `P̄ = P/σ²`.
    pub fn transmit_snr(&self) -> f64 {
        self.transmit_power / self.noise_power
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Number of symbols `S` over which the channel stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoherenceBlock {
    pub symbols: u64,
}

impl CoherenceBlock {
    pub fn new(symbols: u64) -> Result<Self> {
        if symbols == 0 {
            return Err(Error::InvalidValue("coherence block needs S >= 1".into()));
        }
        Ok(Self { symbols })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOutcome {
    pub pair: BeamPair,
    /// `|vᵀΦf|²` on the true channel.
    pub gain: f64,
    pub training_symbols: u64,
    /// bps/Hz after the training overhead.
    pub rate: f64,
}

/// `(S − S_tr)/S`.
pub fn overhead_prefactor(symbols: u64, training_symbols: u64) -> Result<f64> {
    if training_symbols > symbols {
        return Err(Error::OverheadExceedsBlock {
            training: training_symbols,
            block: symbols,
        });
    }
    if symbols == 0 {
        return Err(Error::InvalidValue("coherence block needs S >= 1".into()));
    }
    Ok((symbols - training_symbols) as f64 / symbols as f64)
}

pub fn effective_rate(gain: f64, budget: &LinkBudget, symbols: u64, training_symbols: u64) -> Result<f64> {
    let pre = overhead_prefactor(symbols, training_symbols)?;
    Ok(pre * (1.0 + budget.transmit_snr() * gain).log2())
}

/// The true channel, codebooks and link parameters for one coherence block.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub phi: &'a CascadedChannel,
    pub irs: &'a Codebook,
    pub bs: &'a Codebook,
    pub budget: LinkBudget,
    pub block: CoherenceBlock,
}

impl Link<'_> {
    /// Rate bookkeeping for a pair whose true gain is already known.
    pub fn outcome_with_gain(&self, pair: BeamPair, gain: f64, training_symbols: u64) -> Result<SchemeOutcome> {
        Ok(SchemeOutcome {
            pair,
            gain,
            training_symbols,
            rate: effective_rate(gain, &self.budget, self.block.symbols, training_symbols)?,
        })
    }

    pub fn outcome(&self, pair: BeamPair, training_symbols: u64) -> Result<SchemeOutcome> {
        let gain = pair_gain(self.phi, self.irs, self.bs, pair)?;
        self.outcome_with_gain(pair, gain, training_symbols)
    }
}

/// Genie-aided optimum with zero training overhead.
pub fn select_perfect_csi(link: &Link<'_>) -> Result<SchemeOutcome> {
    let SearchResult { pair, gain } = fft_search(link.phi, link.irs, link.bs)?;
    link.outcome_with_gain(pair, gain, 0)
}

/// Majority vote among the `k` nearest map entries; no training.
pub fn select_bim_training_free(link: &Link<'_>, db: &BimDatabase, q: Vec3, k: usize) -> Result<SchemeOutcome> {
    let pair = vote(&db.knn(q, k)?)?;
    link.outcome(pair, 0)
}

/// Sweeps the distinct pairs among the `k` nearest entries, one pilot each.
pub fn select_bim_light_training<R: Rng + ?Sized>(
    link: &Link<'_>,
    db: &BimDatabase,
    q: Vec3,
    k: usize,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    let candidates = db.knn(q, k)?.distinct_pairs();
    let pair = sweep_candidates(
        link.phi,
        &candidates,
        link.irs,
        link.bs,
        link.budget.transmit_power(),
        noise,
        rng,
    )?;
    link.outcome(pair, candidates.len() as u64)
}

/// Relative slack under which two objective values count as tied.
const LOCATION_TIE_TOLERANCE: f64 = 1e-9;

fn argmax_tolerant(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = max * (1.0 - LOCATION_TIE_TOLERANCE);
    values.iter().position(|&v| v >= floor).unwrap_or(0)
}

/// Location-only selection assuming pure line of sight.
///
/// Builds `G_loc = α·a_r(AoA)·a_t(AoD)ᴴ` and `h_loc = β·a_r(AoD')` from the
/// BS, IRS and `q` positions, then picks `f` maximizing `|a_tᴴf|²` and `v`
/// maximizing `|vᵀ·diag(conj(h_loc))·α·a_r|²` independently. Objective values
/// within a relative `1e-9` of the maximum are treated as ties and resolved
/// to the smallest index, so the choice does not depend on `α`, `β`.
pub fn location_based_pair(
    layout: &SiteLayout,
    q: Vec3,
    irs: &Codebook,
    bs: &Codebook,
    alpha: Complex64,
    beta: Complex64,
) -> Result<BeamPair> {
    if alpha.norm() == 0.0 || beta.norm() == 0.0 {
        return Err(Error::InvalidValue("α and β must be nonzero".into()));
    }
    let (bs_pos, irs_pos) = (layout.bs_position, layout.irs_position);
    for (a, b, what) in [
        (bs_pos, irs_pos, "BS and IRS"),
        (irs_pos, q, "IRS and UE"),
        (bs_pos, q, "BS and UE"),
    ] {
        if a.distance(b) < COINCIDENT_EPS {
            return Err(Error::DegenerateGeometry(format!("{what} coincide")));
        }
    }
    let bs_frame = layout.bs_frame()?;
    let irs_frame = layout.irs_frame()?;
    let (aod_z, aod_a) = bs_frame.angles_of(irs_pos - bs_pos)?;
    let (aoa_z, aoa_a) = irs_frame.angles_of(bs_pos - irs_pos)?;
    let (dep_z, dep_a) = irs_frame.angles_of(q - irs_pos)?;

    let a_t = upa_response(bs.geometry(), aod_z, aod_a);
    let a_r = upa_response(irs.geometry(), aoa_z, aoa_a);
    let h_loc = upa_response(irs.geometry(), dep_z, dep_a) * beta;

    let irs_target: Array1<Complex64> = h_loc
        .iter()
        .zip(a_r.iter())
        .map(|(h, a)| h.conj() * alpha * a)
        .collect();
    let irs_obj: Vec<f64> = all_beam_amplitudes(&irs_target, irs)?
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    // a_tᴴ·f for every f
    let bs_obj: Vec<f64> = all_beam_amplitudes(&a_t.mapv(|z| z.conj()), bs)?
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    Ok(BeamPair::new(argmax_tolerant(&irs_obj), argmax_tolerant(&bs_obj)))
}

pub fn select_location_based(link: &Link<'_>, layout: &SiteLayout, q: Vec3) -> Result<SchemeOutcome> {
    let one = Complex64::new(1.0, 0.0);
    let pair = location_based_pair(layout, q, link.irs, link.bs, one, one)?;
    link.outcome(pair, 0)
}

/// BS beam maximizing `‖G·f‖²` (earliest index on ties).
pub fn two_time_scale_bs_beam(g: &ChannelG, bs: &Codebook) -> Result<usize> {
    if g.bs_len() != bs.dim() {
        return Err(Error::DimensionMismatch {
            what: "BS codebook vs G columns",
            expected: g.bs_len(),
            actual: bs.dim(),
        });
    }
    let power: Vec<f64> = if bs.is_dft() {
        let all = apply_all_bs_beams(&g.0, bs)?;
        all.columns()
            .into_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    } else {
        bs.iter()
            .map(|f| g.0.dot(&f).iter().map(|z| z.norm_sqr()).sum())
            .collect()
    };
    argmax_first(&power).ok_or(Error::EmptyCandidateSet)
}

/// Sweeps every IRS beam once with the BS beam held at `bs_index`.
pub fn select_two_time_scale_with_bs_beam<R: Rng + ?Sized>(
    link: &Link<'_>,
    bs_index: usize,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    let f = link.bs.beam(bs_index)?;
    let a = link.phi.apply_bs_beam(f.view())?;
    let amplitudes = all_beam_amplitudes(&a, link.irs)?;
    let p = link.budget.transmit_power();
    let measured: Vec<f64> = amplitudes
        .iter()
        .map(|g| noisy_power(*g, p, noise, rng))
        .collect();
    let v = argmax_first(&measured).ok_or(Error::EmptyCandidateSet)?;
    link.outcome(BeamPair::new(v, bs_index), link.irs.len() as u64)
}

/// BS beam from the known `G`, then an exhaustive noisy IRS sweep.
pub fn select_two_time_scale<R: Rng + ?Sized>(
    link: &Link<'_>,
    g: &ChannelG,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    let f_hat = two_time_scale_bs_beam(g, link.bs)?;
    select_two_time_scale_with_bs_beam(link, f_hat, noise, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bim::{BimEntry, Fingerprint};
    use crate::channel::UpaConfig;
    use crate::codebook::{make_bs_codebook, make_irs_codebook};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn rand_matrix(n: usize, m: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, m), |_| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    #[test]
    fn prefactors() {
        assert_eq!(overhead_prefactor(20_000, 0).unwrap(), 1.0);
        assert_eq!(overhead_prefactor(20_000, 3).unwrap(), 0.99985);
        assert_eq!(overhead_prefactor(20_000, 10_000).unwrap(), 0.5);
        assert!(matches!(
            overhead_prefactor(10, 11),
            Err(Error::OverheadExceedsBlock { training: 11, block: 10 })
        ));
    }

    #[test]
    fn zero_overhead_rate_is_shannon() {
        let b = LinkBudget::new(2.0, 0.5).unwrap();
        assert_eq!(b.transmit_snr(), 4.0);
        // log2(1 + 4·0.75) = 2
        assert_eq!(effective_rate(0.75, &b, 100, 0).unwrap(), 2.0);
        assert_eq!(effective_rate(0.75, &b, 100, 50).unwrap(), 1.0);
        assert!(LinkBudget::new(0.0, 1.0).is_err());
        assert!(LinkBudget::new(1.0, 0.0).is_err());
    }

    #[test]
    fn perfect_csi_on_zero_channel() {
        let (irs, bs) = (make_irs_codebook(&UpaConfig::new(2, 2)), make_bs_codebook(&UpaConfig::new(1, 2)));
        let phi = CascadedChannel(Array2::zeros((4, 2)));
        let link = Link {
            phi: &phi,
            irs: &irs,
            bs: &bs,
            budget: LinkBudget::new(1.0, 1.0).unwrap(),
            block: CoherenceBlock::new(10).unwrap(),
        };
        let o = select_perfect_csi(&link).unwrap();
        assert_eq!(o.rate, 0.0);
        assert_eq!(o.training_symbols, 0);
    }

    #[test]
    fn rank_one_g_picks_matching_bs_beam() {
        let bs = make_bs_codebook(&UpaConfig::new(2, 2));
        let a = Array1::from_shape_fn(6, |i| Complex64::new(1.0 + i as f64, -0.5));
        let b = bs.beam(2).unwrap();
        let g = ChannelG(Array2::from_shape_fn((6, 4), |(i, j)| a[i] * b[j].conj()));
        assert_eq!(two_time_scale_bs_beam(&g, &bs).unwrap(), 2);
    }

    #[test]
    fn two_time_scale_noiseless_is_conditional_optimum() {
        let irs = make_irs_codebook(&UpaConfig::new(4, 4));
        let bs = make_bs_codebook(&UpaConfig::new(2, 2));
        let phi = CascadedChannel(rand_matrix(16, 4, 9));
        let g = ChannelG(rand_matrix(16, 4, 10));
        let link = Link {
            phi: &phi,
            irs: &irs,
            bs: &bs,
            budget: LinkBudget::new(1.0, 1.0).unwrap(),
            block: CoherenceBlock::new(20_000).unwrap(),
        };
        let noise = NoiseModel::new(0.0, 0).unwrap();
        let o = select_two_time_scale(&link, &g, &noise, &mut noise.stream()).unwrap();
        let f_hat = two_time_scale_bs_beam(&g, &bs).unwrap();
        assert_eq!(o.pair.bs_index, f_hat);
        assert_eq!(o.training_symbols, 16);
        let best = (0..16)
            .map(|k| pair_gain(&phi, &irs, &bs, BeamPair::new(k, f_hat)).unwrap())
            .fold(0.0, f64::max);
        assert!((o.gain - best).abs() <= 1e-12 * best);
    }

    #[test]
    fn light_training_with_shared_pair_sweeps_once() {
        let irs = make_irs_codebook(&UpaConfig::new(2, 2));
        let bs = make_bs_codebook(&UpaConfig::new(1, 2));
        let phi = CascadedChannel(rand_matrix(4, 2, 3));
        let fp = Fingerprint::new(irs.geometry(), bs.geometry());
        let shared = BeamPair::new(3, 1);
        let entries = (0..5)
            .map(|i| BimEntry {
                location: Vec3::new(i as f64, 0.0, 0.0),
                pair: shared,
            })
            .collect();
        let db = BimDatabase::new(fp, entries).unwrap();
        let link = Link {
            phi: &phi,
            irs: &irs,
            bs: &bs,
            budget: LinkBudget::new(1.0, 0.1).unwrap(),
            block: CoherenceBlock::new(20_000).unwrap(),
        };
        let q = Vec3::new(1.2, 0.0, 0.0);
        let noise = NoiseModel::new(0.1, 5).unwrap();
        let lt = select_bim_light_training(&link, &db, q, 3, &noise, &mut noise.stream()).unwrap();
        let tf = select_bim_training_free(&link, &db, q, 3).unwrap();
        assert_eq!(lt.pair, tf.pair);
        assert_eq!(lt.training_symbols, 1);
        assert_eq!(lt.gain, tf.gain);
        assert!(matches!(
            select_bim_training_free(&link, &db, q, 6),
            Err(Error::KTooLarge { .. })
        ));
    }
}
