//! Points, directions and the local coordinate frame of a planar array.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this are treated as coincident points.
pub const COINCIDENT_EPS: f64 = 1e-9;

/// A point or direction in the site frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > COINCIDENT_EPS && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Right-handed orthonormal frame attached to an array.
///
/// `boresight` is the local z axis. Array rows run along `x_axis`, columns
/// along `y_axis`. For a non-vertical boresight, `x_axis` is horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayFrame {
    pub x_axis: Vec3,
    pub y_axis: Vec3,
    pub boresight: Vec3,
}

impl ArrayFrame {
    /// Frame aligned with the site axes (zenith measured from +z).
    pub const GLOBAL: ArrayFrame = ArrayFrame {
        x_axis: Vec3::new(1.0, 0.0, 0.0),
        y_axis: Vec3::new(0.0, 1.0, 0.0),
        boresight: Vec3::new(0.0, 0.0, 1.0),
    };

    pub fn from_boresight(boresight: Vec3) -> Result<Self> {
        let z = boresight.normalized().ok_or_else(|| {
            Error::DegenerateGeometry(format!("zero-length boresight {boresight:?}"))
        })?;
        let up = Vec3::new(0.0, 0.0, 1.0);
        let x = match up.cross(z).normalized() {
            Some(x) => x,
            // vertical boresight: pick site x as the row axis
            None => Vec3::new(1.0, 0.0, 0.0)
                .cross(z)
                .cross(z)
                .normalized()
                .map(|v| -v)
                .expect("site x axis is orthogonal to a vertical boresight"),
        };
        let y = z.cross(x);
        Ok(Self {
            x_axis: x,
            y_axis: y,
            boresight: z,
        })
    }

    /// Zenith (from boresight) and azimuth (from the row axis) of `dir`.
    ///
    /// Zenith lies in `[0, π]`, azimuth in `[-π, π)`.
    pub fn angles_of(&self, dir: Vec3) -> Result<(f64, f64)> {
        let u = dir
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("zero-length direction".into()))?;
        let lx = u.dot(self.x_axis);
        let ly = u.dot(self.y_axis);
        let lz = u.dot(self.boresight).clamp(-1.0, 1.0);
        let zenith = lz.acos();
        let mut azimuth = ly.atan2(lx);
        if azimuth >= PI {
            azimuth = -PI;
        }
        Ok((zenith, azimuth))
    }
}
