//! Site description and a deterministic single-bounce path tracer.
//!
//! The tracer produces, for the BS–IRS and IRS–UE links, the line-of-sight
//! component (if the segment is unobstructed) plus one single-bounce
//! component per point scatterer whose two legs are both unobstructed. Amplitudes follow the free-space law `λ / (4π·L)` over the
//! total unfolded length `L`, scaled by the scatterer reflectivity, and the
//! phase is `-2π·L/λ`. Blockage is binary.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayFrame, Vec3, COINCIDENT_EPS};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength at the default 28 GHz carrier.
pub const DEFAULT_WAVELENGTH: f64 = SPEED_OF_LIGHT / 28.0e9;

pub const DEFAULT_UE_HEIGHT: f64 = 1.5;

/// Axis-aligned box obstructing every path segment that enters its interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blocker {
    pub min_corner: Vec3,
    pub max_corner: Vec3,
}

impl Blocker {
    pub fn new(min_corner: Vec3, max_corner: Vec3) -> Result<Self> {
        let b = Self {
            min_corner,
            max_corner,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.min_corner, self.max_corner);
        if !(lo.is_finite() && hi.is_finite()) || lo.x > hi.x || lo.y > hi.y || lo.z > hi.z {
            return Err(Error::InvalidValue(format!(
                "blocker corners {lo:?} / {hi:?} are not ordered"
            )));
        }
        Ok(())
    }

    /// True if `p` lies strictly inside the box.
    pub fn contains(&self, p: Vec3) -> bool {
        let (lo, hi) = (self.min_corner, self.max_corner);
        lo.x < p.x && p.x < hi.x && lo.y < p.y && p.y < hi.y && lo.z < p.z && p.z < hi.z
    }

    /// Whether the open segment `(p1, p2)` passes through the box interior.
    fn cuts(&self, p1: Vec3, p2: Vec3) -> bool {
        let d = p2 - p1;
        let mut enter = 0.0_f64;
        let mut exit = 1.0_f64;
        let axes = [
            (p1.x, d.x, self.min_corner.x, self.max_corner.x),
            (p1.y, d.y, self.min_corner.y, self.max_corner.y),
            (p1.z, d.z, self.min_corner.z, self.max_corner.z),
        ];
        for (o, dir, lo, hi) in axes {
            if dir == 0.0 {
                if !(lo < o && o < hi) {
                    return false;
                }
                continue;
            }
            let (mut t0, mut t1) = ((lo - o) / dir, (hi - o) / dir);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            enter = enter.max(t0);
            exit = exit.min(t1);
            if enter >= exit {
                return false;
            }
        }
        enter < exit
    }
}

/// Point scatterer re-radiating with a real amplitude factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Vec3,
    pub reflectivity: f64,
}

/// The region Q in which the UE moves, at a fixed height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeArea {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
    #[serde(default = "default_ue_height")]
    pub height: f64,
}

fn default_ue_height() -> f64 {
    DEFAULT_UE_HEIGHT
}

impl UeArea {
    pub fn square(min_x: f64, min_y: f64, side: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x: min_x + side,
            max_y: min_y + side,
            height: DEFAULT_UE_HEIGHT,
        }
    }

    pub fn contains_xy(&self, p: Vec3) -> bool {
        (self.min_x..=self.max_x).contains(&p.x) && (self.min_y..=self.max_y).contains(&p.y)
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(
            0.5 * (self.min_x + self.max_x),
            0.5 * (self.min_y + self.max_y),
            self.height,
        )
    }

    /// One uniform draw over the rectangle.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let u: f64 = rng.random();
        let w: f64 = rng.random();
        Vec3::new(
            self.min_x + u * (self.max_x - self.min_x),
            self.min_y + w * (self.max_y - self.min_y),
            self.height,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteLayout {
    pub bs_position: Vec3,
    pub bs_orientation: Vec3,
    pub irs_position: Vec3,
    pub irs_orientation: Vec3,
    #[serde(default)]
    pub blockers: Vec<Blocker>,
    #[serde(default)]
    pub scatterers: Vec<Scatterer>,
    #[serde(default = "default_wavelength")]
    pub carrier_wavelength: f64,
    pub ue_area: UeArea,
    /// Reject layouts whose BS–IRS segment is obstructed.
    #[serde(default = "default_true")]
    pub require_bs_irs_los: bool,
}

fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH
}

fn default_true() -> bool {
    true
}

impl SiteLayout {
    pub fn bs_frame(&self) -> Result<ArrayFrame> {
        ArrayFrame::from_boresight(self.bs_orientation)
    }

    pub fn irs_frame(&self) -> Result<ArrayFrame> {
        ArrayFrame::from_boresight(self.irs_orientation)
    }

    /// Checks the layout invariants; `Err` names the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_wavelength > 0.0 && self.carrier_wavelength.is_finite()) {
            return Err(Error::config(
                "layout.carrier_wavelength",
                "must be positive and finite",
            ));
        }
        for (name, v) in [
            ("layout.bs_orientation", self.bs_orientation),
            ("layout.irs_orientation", self.irs_orientation),
        ] {
            if !v.is_finite() || (v.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::config(name, "must be a unit vector"));
            }
        }
        for (name, v) in [
            ("layout.bs_position", self.bs_position),
            ("layout.irs_position", self.irs_position),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        if self.bs_position.distance(self.irs_position) < COINCIDENT_EPS {
            return Err(Error::config("layout.irs_position", "coincides with the BS"));
        }
        for (i, b) in self.blockers.iter().enumerate() {
            b.validate()
                .map_err(|e| Error::config(format!("layout.blockers[{i}]"), e.to_string()))?;
        }
        for (i, s) in self.scatterers.iter().enumerate() {
            if !(s.reflectivity > 0.0 && s.reflectivity <= 1.0) || !s.position.is_finite() {
                return Err(Error::config(
                    format!("layout.scatterers[{i}]"),
                    "reflectivity must lie in (0, 1] and position be finite",
                ));
            }
        }
        let a = &self.ue_area;
        if !(a.min_x <= a.max_x && a.min_y <= a.max_y && a.height.is_finite()) {
            return Err(Error::config("layout.ue_area", "corners are not ordered"));
        }
        if self.require_bs_irs_los
            && segment_blocked(self.bs_position, self.irs_position, &self.blockers)
        {
            return Err(Error::config(
                "layout.blockers",
                "BS-IRS line of sight is obstructed",
            ));
        }
        Ok(())
    }
}

/// One propagation path between two terminals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: Complex64,
    pub depart_zenith: f64,
    pub depart_azimuth: f64,
    pub arrive_zenith: f64,
    pub arrive_azimuth: f64,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet {
    pub bs_irs_paths: Vec<PathComponent>,
    pub irs_ue_paths: Vec<PathComponent>,
}

/// True iff the open segment `(p1, p2)` enters the interior of any blocker.
pub fn segment_blocked(p1: Vec3, p2: Vec3, blockers: &[Blocker]) -> bool {
    blockers.iter().any(|b| b.cuts(p1, p2))
}

struct Terminal {
    position: Vec3,
    frame: ArrayFrame,
}

fn free_space_path(
    amplitude_scale: f64,
    length: f64,
    wavelength: f64,
    depart: (f64, f64),
    arrive: (f64, f64),
) -> PathComponent {
    let amp = amplitude_scale * wavelength / (4.0 * PI * length);
    let phase = -2.0 * PI * (length / wavelength).fract();
    PathComponent {
        gain: Complex64::from_polar(amp, phase),
        depart_zenith: depart.0,
        depart_azimuth: depart.1,
        arrive_zenith: arrive.0,
        arrive_azimuth: arrive.1,
        delay: length / SPEED_OF_LIGHT,
    }
}

fn trace_link(
    tx: &Terminal,
    rx: &Terminal,
    blockers: &[Blocker],
    scatterers: &[Scatterer],
    wavelength: f64,
) -> Result<Vec<PathComponent>> {
    let mut paths = Vec::with_capacity(1 + scatterers.len());
    if !segment_blocked(tx.position, rx.position, blockers) {
        let d = tx.position.distance(rx.position);
        let depart = tx.frame.angles_of(rx.position - tx.position)?;
        let arrive = rx.frame.angles_of(tx.position - rx.position)?;
        paths.push(free_space_path(1.0, d, wavelength, depart, arrive));
    }
    for s in scatterers {
        if segment_blocked(tx.position, s.position, blockers)
            || segment_blocked(s.position, rx.position, blockers)
        {
            continue;
        }
        let d1 = tx.position.distance(s.position);
        let d2 = s.position.distance(rx.position);
        let depart = tx.frame.angles_of(s.position - tx.position)?;
        let arrive = rx.frame.angles_of(s.position - rx.position)?;
        paths.push(free_space_path(s.reflectivity, d1 + d2, wavelength, depart, arrive));
    }
    Ok(paths)
}

fn check_distinct(points: &[(&str, Vec3)]) -> Result<()> {
    for (i, (na, a)) in points.iter().enumerate() {
        for (nb, b) in &points[i + 1..] {
            if a.distance(*b) < COINCIDENT_EPS {
                return Err(Error::DegenerateGeometry(format!("{na} coincides with {nb}")));
            }
        }
    }
    Ok(())
}

fn scatterer_points(layout: &SiteLayout) -> Vec<(&'static str, Vec3)> {
    layout
        .scatterers
        .iter()
        .map(|s| ("scatterer", s.position))
        .collect()
}

/// Paths of the fixed BS–IRS link.
pub fn trace_bs_irs(layout: &SiteLayout) -> Result<Vec<PathComponent>> {
    let mut pts = vec![("BS", layout.bs_position), ("IRS", layout.irs_position)];
    pts.extend(scatterer_points(layout));
    check_distinct(&pts)?;
    let bs = Terminal {
        position: layout.bs_position,
        frame: layout.bs_frame()?,
    };
    let irs = Terminal {
        position: layout.irs_position,
        frame: layout.irs_frame()?,
    };
    trace_link(
        &bs,
        &irs,
        &layout.blockers,
        &layout.scatterers,
        layout.carrier_wavelength,
    )
}

/// Paths from the IRS to a single-antenna UE at `ue`.
///
/// Arrival angles at the UE are expressed in the site frame.
pub fn trace_irs_ue(layout: &SiteLayout, ue: Vec3) -> Result<Vec<PathComponent>> {
    let mut pts = vec![("IRS", layout.irs_position), ("UE", ue)];
    pts.extend(scatterer_points(layout));
    check_distinct(&pts)?;
    let irs = Terminal {
        position: layout.irs_position,
        frame: layout.irs_frame()?,
    };
    let ue = Terminal {
        position: ue,
        frame: ArrayFrame::GLOBAL,
    };
    trace_link(
        &irs,
        &ue,
        &layout.blockers,
        &layout.scatterers,
        layout.carrier_wavelength,
    )
}

pub fn trace_paths(layout: &SiteLayout, ue: Vec3) -> Result<PathSet> {
    if layout.carrier_wavelength.is_nan() || layout.carrier_wavelength <= 0.0 {
        return Err(Error::InvalidValue("wavelength must be positive".into()));
    }
    check_distinct(&[
        ("BS", layout.bs_position),
        ("IRS", layout.irs_position),
        ("UE", ue),
    ])?;
    Ok(PathSet {
        bs_irs_paths: trace_bs_irs(layout)?,
        irs_ue_paths: trace_irs_ue(layout, ue)?,
    })
}

/// `n` points uniform over the area at its UE height; reproducible per seed.
pub fn sample_ue_locations(area: &UeArea, n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| area.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Blocker {
        Blocker::new(Vec3::new(4.0, -1.0, 0.0), Vec3::new(6.0, 1.0, 2.0)).unwrap()
    }

    fn open_layout() -> SiteLayout {
        SiteLayout {
            bs_position: Vec3::new(0.0, 0.0, 10.0),
            bs_orientation: Vec3::new(1.0, 0.0, 0.0),
            irs_position: Vec3::new(20.0, 0.0, 10.0),
            irs_orientation: Vec3::new(-1.0, 0.0, 0.0),
            blockers: vec![],
            scatterers: vec![],
            carrier_wavelength: 0.0107,
            ue_area: UeArea::square(5.0, -5.0, 10.0),
            require_bs_irs_los: true,
        }
    }

    #[test]
    fn segment_through_box_is_blocked() {
        let b = [unit_box()];
        assert!(segment_blocked(Vec3::new(0., 0., 1.), Vec3::new(10., 0., 1.), &b));
        assert!(!segment_blocked(Vec3::new(0., 0., 5.), Vec3::new(10., 0., 5.), &b));
        assert!(!segment_blocked(Vec3::new(0., 0., 1.), Vec3::new(3., 0., 1.), &b));
    }

    #[test]
    fn touching_a_face_is_not_blocked() {
        let b = [unit_box()];
        // ends exactly on the x = 4 face
        assert!(!segment_blocked(Vec3::new(0., 0., 1.), Vec3::new(4., 0., 1.), &b));
        // grazes along the top face
        assert!(!segment_blocked(Vec3::new(0., 0., 2.), Vec3::new(10., 0., 2.), &b));
        // starts on a face and goes inward
        assert!(segment_blocked(Vec3::new(4., 0., 1.), Vec3::new(5., 0., 1.), &b));
    }

    #[test]
    fn bad_blocker_corners_rejected() {
        assert!(Blocker::new(Vec3::new(1., 0., 0.), Vec3::new(0., 1., 1.)).is_err());
    }

    #[test]
    fn los_only_gain_matches_free_space() {
        let l = open_layout();
        let ps = trace_paths(&l, Vec3::new(10.0, 0.0, 1.5)).unwrap();
        assert_eq!(ps.bs_irs_paths.len(), 1);
        let want = l.carrier_wavelength / (4.0 * PI * 20.0);
        assert!((ps.bs_irs_paths[0].gain.norm() - want).abs() < 1e-15);
        // BS looks straight at the IRS
        assert!(ps.bs_irs_paths[0].depart_zenith.abs() < 1e-12);
        assert!(ps.bs_irs_paths[0].arrive_zenith.abs() < 1e-12);
        assert!((ps.bs_irs_paths[0].delay - 20.0 / SPEED_OF_LIGHT).abs() < 1e-18);
    }

    #[test]
    fn blocked_irs_ue_link_is_empty() {
        let mut l = open_layout();
        let ue = Vec3::new(10.0, 0.0, 1.5);
        l.blockers
            .push(Blocker::new(Vec3::new(14.0, -1.0, 0.0), Vec3::new(15.0, 1.0, 20.0)).unwrap());
        l.require_bs_irs_los = false;
        let ps = trace_paths(&l, ue).unwrap();
        assert!(ps.irs_ue_paths.is_empty());
    }

    #[test]
    fn scatterer_amplitude_uses_unfolded_length() {
        // IRS at origin, scatterer 5 m away, UE 3 m beyond it at a right angle
        let mut l = open_layout();
        l.irs_position = Vec3::new(0.0, 0.0, 0.0);
        l.irs_orientation = Vec3::new(1.0, 0.0, 0.0);
        l.bs_position = Vec3::new(-30.0, 0.0, 0.0);
        l.bs_orientation = Vec3::new(1.0, 0.0, 0.0);
        let scat = Vec3::new(5.0, 0.0, 0.0);
        let ue = Vec3::new(5.0, 3.0, 0.0);
        l.scatterers.push(Scatterer {
            position: scat,
            reflectivity: 0.3,
        });
        // block only the direct IRS-UE segment
        l.blockers
            .push(Blocker::new(Vec3::new(2.0, 1.0, -1.0), Vec3::new(3.0, 1.5, 1.0)).unwrap());
        l.require_bs_irs_los = false;
        let paths = trace_irs_ue(&l, ue).unwrap();
        assert_eq!(paths.len(), 1);
        let want = 0.3 * 0.0107 / (4.0 * PI * 8.0);
        assert!((paths[0].gain.norm() - want).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let l = open_layout();
        assert!(matches!(
            trace_paths(&l, l.irs_position),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn sampler_edge_cases() {
        let a = UeArea::square(2.0, 3.0, 0.0);
        let pts = sample_ue_locations(&a, 1, 9);
        assert_eq!(pts, vec![Vec3::new(2.0, 3.0, DEFAULT_UE_HEIGHT)]);

        let a = UeArea::square(0.0, 0.0, 10.0);
        let p1 = sample_ue_locations(&a, 984, 42);
        assert_eq!(p1.len(), 984);
        assert_eq!(p1, sample_ue_locations(&a, 984, 42));
        assert!(p1.iter().all(|p| a.contains_xy(*p) && p.z == a.height));
    }

    #[test]
    fn sample_mean_is_area_center() {
        let a = UeArea::square(0.0, 0.0, 10.0);
        let pts = sample_ue_locations(&a, 100_000, 7);
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
        assert!((mx - 5.0).abs() < 0.1 && (my - 5.0).abs() < 0.1);
    }

    #[test]
    fn layout_validation_rejects_blocked_backhaul() {
        let mut l = open_layout();
        l.validate().unwrap();
        l.blockers
            .push(Blocker::new(Vec3::new(9.0, -1.0, 0.0), Vec3::new(11.0, 1.0, 20.0)).unwrap());
        match l.validate() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "layout.blockers"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
