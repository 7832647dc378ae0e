//! Scenario configuration, presets and JSON loading.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::UpaConfig;
use crate::env::{Blocker, Scatterer, SiteLayout, UeArea, DEFAULT_WAVELENGTH};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub sampling: u64,
    pub noise: u64,
    pub location_error: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            sampling: 1,
            noise: 2,
            location_error: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub layout: SiteLayout,
    pub bs_cfg: UpaConfig,
    pub irs_cfg: UpaConfig,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Transmit powers, dBm.
    pub power_sweep: Vec<f64>,
    /// Symbols per coherence block.
    #[serde(rename = "S")]
    pub block_symbols: u64,
    /// Neighbours consulted per BIM query.
    #[serde(rename = "K")]
    pub neighbors: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Mean of the Rayleigh-distributed horizontal location error, meters.
    pub location_error_mean: f64,
    pub seeds: Seeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 100×100 IRS, 8×8 BS, 984 training points.
    Full,
    /// 8×8 IRS, 4×4 BS, 200 training points.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Preset::Full),
            "desk" => Ok(Preset::Desk),
            other => Err(Error::config("preset", format!("unknown preset {other:?}"))),
        }
    }
}

/// Seed of the pseudo-random clutter in the preset site.
pub const SITE_SEED: u64 = 2024;

/// The synthetic site used by both presets.
///
/// A 10 m × 10 m UE area with the IRS on a wall at its north edge and the BS
/// to the south-west with a clear view of the IRS. A large building shadows
/// the direct BS–UE link, a second one east of the area carries facade
/// scatterers, and small blockers and scatterers are dropped in and around
/// the area.
pub fn default_site(seed: u64) -> SiteLayout {
    let irs_position = Vec3::new(5.0, 13.0, 5.0);
    let bs_position = Vec3::new(9.0, 7.0, 9.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut blockers = vec![
        // west of the area
        Blocker {
            min_corner: Vec3::new(-10.0, -6.0, 0.0),
            max_corner: Vec3::new(-6.0, 2.0, 9.0),
        },
        // east of the area
        Blocker {
            min_corner: Vec3::new(13.0, -2.0, 0.0),
            max_corner: Vec3::new(19.0, 12.0, 15.0),
        },
    ];
    for _ in 0..SMALL_BLOCKERS {
        let (cx, cy) = (rng.random_range(0.5..9.5), rng.random_range(1.0..10.5));
        let (hx, hy) = (rng.random_range(0.3..0.9), rng.random_range(0.3..0.9));
        let h = rng.random_range(3.0..6.0);
        blockers.push(Blocker {
            min_corner: Vec3::new(cx - hx, cy - hy, 0.0),
            max_corner: Vec3::new(cx + hx, cy + hy, h),
        });
    }

    let mut scatterers = Vec::new();
    for _ in 0..FACADE_SCATTERERS {
        scatterers.push(Scatterer {
            position: Vec3::new(
                12.99,
                rng.random_range(-1.0..11.0),
                rng.random_range(1.0..8.0),
            ),
            reflectivity: rng.random_range(0.4..0.9),
        });
    }
    for _ in 0..AREA_SCATTERERS {
        scatterers.push(Scatterer {
            position: Vec3::new(
                rng.random_range(-2.0..12.0),
                rng.random_range(-2.0..12.0),
                rng.random_range(1.0..6.0),
            ),
            reflectivity: rng.random_range(0.3..0.8),
        });
    }

    SiteLayout {
        bs_position,
        bs_orientation: (irs_position - bs_position)
            .normalized()
            .expect("BS and IRS are apart"),
        irs_position,
        irs_orientation: Vec3::new(0.0, -1.0, 0.0),
        blockers,
        scatterers,
        carrier_wavelength: DEFAULT_WAVELENGTH,
        ue_area: UeArea::square(0.0, 0.0, 10.0),
        require_bs_irs_los: true,
    }
}

const SMALL_BLOCKERS: usize = 8;
const FACADE_SCATTERERS: usize = 6;
const AREA_SCATTERERS: usize = 6;

impl ScenarioConfig {
    pub fn preset(p: Preset) -> Self {
        let base = Self {
            layout: default_site(SITE_SEED),
            bs_cfg: UpaConfig::new(8, 8),
            irs_cfg: UpaConfig::new(100, 100),
            noise_psd: -174.0,
            bandwidth: 10.0e6,
            power_sweep: vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            block_symbols: 20_000,
            neighbors: 3,
            n_train: 984,
            n_test: 100,
            location_error_mean: 0.0,
            seeds: Seeds::default(),
        };
        match p {
            Preset::Full => base,
            Preset::Desk => Self {
                bs_cfg: UpaConfig::new(4, 4),
                irs_cfg: UpaConfig::new(8, 8),
                n_train: 200,
                ..base
            },
        }
    }

    /// Parses a JSON document whose fields override those of `base`.
    ///
    /// An optional top-level `"preset": "full" | "desk"` replaces `base`.
    pub fn from_json(text: &str, base: Preset) -> Result<Self> {
        let mut overrides: Value =
            serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let obj = overrides
            .as_object_mut()
            .ok_or_else(|| Error::config("<document>", "expected a JSON object"))?;
        let preset = match obj.remove("preset") {
            Some(Value::String(s)) => s.parse()?,
            Some(_) => return Err(Error::config("preset", "expected a string")),
            None => base,
        };
        let mut merged = serde_json::to_value(Self::preset(preset))
            .map_err(|e| Error::config("<document>", e.to_string()))?;
        merge(&mut merged, overrides);
        let cfg: Self = serde_path_to_error::deserialize(merged)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        self.bs_cfg.validate("bs_cfg")?;
        self.irs_cfg.validate("irs_cfg")?;
        if !self.noise_psd.is_finite() {
            return Err(Error::config("noise_psd", "must be finite"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::config("bandwidth", "must be positive"));
        }
        if self.power_sweep.is_empty() {
            return Err(Error::config("power_sweep", "needs at least one power level"));
        }
        if let Some(i) = self.power_sweep.iter().position(|p| !p.is_finite()) {
            return Err(Error::config(format!("power_sweep[{i}]"), "must be finite"));
        }
        if self.block_symbols == 0 {
            return Err(Error::config("S", "must be >= 1"));
        }
        if self.neighbors == 0 {
            return Err(Error::config("K", "must be >= 1"));
        }
        if self.n_train == 0 {
            return Err(Error::config("n_train", "must be >= 1"));
        }
        if self.neighbors > self.n_train {
            return Err(Error::config("K", "must not exceed n_train"));
        }
        if self.n_test == 0 {
            return Err(Error::config("n_test", "must be >= 1"));
        }
        if !(self.location_error_mean >= 0.0 && self.location_error_mean.is_finite()) {
            return Err(Error::config("location_error_mean", "must be >= 0"));
        }
        Ok(())
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(Preset::Full)
    }
}

/// Recursively overlays `patch` onto `base`; non-object values replace.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_defaults() {
        let c = ScenarioConfig::preset(Preset::Full);
        assert_eq!(c.noise_psd, -174.0);
        assert_eq!(c.bandwidth, 1e7);
        assert_eq!(c.power_sweep, vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]);
        assert_eq!(c.block_symbols, 20_000);
        assert_eq!(c.neighbors, 3);
        assert_eq!(c.n_train, 984);
        assert_eq!(c.n_test, 100);
        assert_eq!((c.irs_cfg.n_rows, c.irs_cfg.n_cols), (100, 100));
        assert_eq!((c.bs_cfg.n_rows, c.bs_cfg.n_cols), (8, 8));
        c.validate().unwrap();
        ScenarioConfig::preset(Preset::Desk).validate().unwrap();
    }

    #[test]
    fn json_overrides_merge_into_preset() {
        let c = ScenarioConfig::from_json(
            r#"{"preset": "desk", "K": 5, "irs_cfg": {"n_rows": 16}, "seeds": {"noise": 99}}"#,
            Preset::Full,
        )
        .unwrap();
        assert_eq!(c.neighbors, 5);
        assert_eq!((c.irs_cfg.n_rows, c.irs_cfg.n_cols), (16, 8));
        assert_eq!(c.seeds.noise, 99);
        assert_eq!(c.seeds.sampling, Seeds::default().sampling);
        assert_eq!(c.n_train, 200);
    }

    #[test]
    fn round_trips_through_json() {
        let c = ScenarioConfig::preset(Preset::Desk);
        assert_eq!(ScenarioConfig::from_json(&c.to_json(), Preset::Full).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let path = |text: &str| match ScenarioConfig::from_json(text, Preset::Desk) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        assert_eq!(path(r#"{"power_sweep": []}"#), "power_sweep");
        assert_eq!(path(r#"{"bs_cfg": {"n_rows": "x"}}"#), "bs_cfg.n_rows");
        assert_eq!(path(r#"{"irs_cfg": {"n_cols": 0}}"#), "irs_cfg");
        assert_eq!(path(r#"{"bandwith": 1}"#), "bandwith");
        assert_eq!(path(r#"{"layout": {"carrier_wavelength": -1}}"#), "layout.carrier_wavelength");
        assert_eq!(path(r#"{"preset": "huge"}"#), "preset");
    }
}
