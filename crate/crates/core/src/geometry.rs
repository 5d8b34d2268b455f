//! Coordinate machinery for equirectangular (ERP) panoramas.
//!
//! Pixel `(row, col)` of a `W x H` panorama represents the direction with
//! colatitude `pi * (row + 0.5) / H` and longitude `2 * pi * (col + 0.5) / W`.
//! Directions are unit vectors `(sin t cos p, sin t sin p, cos t)`, so the
//! north pole is `+z` and longitude zero is `+x`.
//!
//! All geometry is carried out in `f64`.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use crate::error::{invalid, Result};

/// Tolerance accepted on the norm of vectors passed in as "unit".
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Geometry of an ERP panorama. Width must be exactly twice the height so
/// that pixels subtend the same angle along rows and along meridians.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProjectionConfig {
    width: usize,
    height: usize,
}

impl ProjectionConfig {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if height < 1 || width < 2 {
            return Err(invalid(format!(
                "ERP dimensions {width}x{height} too small (need width >= 2, height >= 1)"
            )));
        }
        if width != 2 * height {
            return Err(invalid(format!(
                "ERP width must be twice the height, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Angular size of one pixel, `2 pi / W` radians.
    pub fn pitch(&self) -> f64 {
        TAU / self.width as f64
    }
}

/// A direction on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVec {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVec {
    pub const NORTH_POLE: UnitVec = UnitVec {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Accepts a vector whose norm is within [`UNIT_TOLERANCE`] of one and
    /// renormalizes it.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(invalid(format!("non-finite direction ({x}, {y}, {z})")));
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(invalid(format!(
                "direction ({x}, {y}, {z}) is not unit length (norm {norm})"
            )));
        }
        Ok(Self::from_raw(x / norm, y / norm, z / norm))
    }

    /// Normalizes an arbitrary nonzero finite vector.
    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(invalid(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(Self::from_raw(x / norm, y / norm, z / norm))
    }

    /// Direction at the given colatitude and longitude (radians).
    pub fn from_angles(colatitude: f64, longitude: f64) -> Self {
        let (st, ct) = colatitude.sin_cos();
        let (sp, cp) = longitude.sin_cos();
        Self::from_raw(st * cp, st * sp, ct)
    }

    pub(crate) const fn from_raw(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &UnitVec) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &UnitVec) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }

    /// Colatitude in `[0, pi]`.
    pub fn colatitude(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    /// Longitude in `(-pi, pi]`.
    pub fn longitude(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Great-circle distance in radians. Uses `atan2(|a x b|, a . b)`, which
    /// stays accurate for nearly parallel and nearly antipodal pairs.
    pub fn angle_to(&self, other: &UnitVec) -> f64 {
        let [cx, cy, cz] = self.cross(other);
        (cx * cx + cy * cy + cz * cz).sqrt().atan2(self.dot(other))
    }

    /// Rotates about the `z` axis by `angle` radians.
    pub fn rotate_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_raw(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

/// Continuous ERP coordinate in pixel-index space: `u` is a column position
/// taken modulo `W`, `v` a row position that does not wrap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErpCoord {
    pub u: f64,
    pub v: f64,
}

/// Proper rotation stored as a row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_cos_sin_y(c, s)
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_cos_sin_z(c, s)
    }

    fn from_cos_sin_y(c: f64, s: f64) -> Self {
        Self {
            m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        }
    }

    fn from_cos_sin_z(c: f64, s: f64) -> Self {
        Self {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn determinant(&self) -> f64 {
        let m = self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn apply(&self, v: &UnitVec) -> UnitVec {
        let m = &self.m;
        let p = v.to_array();
        let row = |r: &[f64; 3]| r[0] * p[0] + r[1] * p[1] + r[2] * p[2];
        UnitVec::from_raw(row(&m[0]), row(&m[1]), row(&m[2]))
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Rotation { m }
    }
}

/// Wraps a column coordinate into `[0, width)`.
pub fn wrap_column(u: f64, width: f64) -> f64 {
    let r = u.rem_euclid(width);
    // rem_euclid can round up to exactly `width` for tiny negative inputs.
    if r >= width {
        0.0
    } else {
        r
    }
}

/// Direction at the (possibly fractional) pixel position `(row, col)`.
pub fn pixel_to_dir(cfg: &ProjectionConfig, row: f64, col: f64) -> Result<UnitVec> {
    if !row.is_finite() || !col.is_finite() {
        return Err(invalid(format!("non-finite pixel position ({row}, {col})")));
    }
    let colatitude = PI * (row + 0.5) / cfg.height as f64;
    let longitude = TAU * (wrap_column(col, cfg.width as f64) + 0.5) / cfg.width as f64;
    Ok(UnitVec::from_angles(colatitude, longitude))
}

/// Back-projects a direction onto the panorama.
///
/// The angle-space coordinates `u' = W/(2 pi) atan2(y, x)` and
/// `v' = H/pi arccos(z)` are shifted by half a pixel into pixel-index space,
/// with `u` wrapped into `[0, W)`. `v` lands in `[-0.5, H - 0.5]`.
pub fn dir_to_erp(cfg: &ProjectionConfig, d: &UnitVec) -> ErpCoord {
    let w = cfg.width as f64;
    let h = cfg.height as f64;
    let u_angle = w / TAU * d.y.atan2(d.x);
    let v_angle = h / PI * d.z.clamp(-1.0, 1.0).acos();
    ErpCoord {
        u: wrap_column(u_angle - 0.5, w),
        v: v_angle - 0.5,
    }
}

/// Rotation `Rz(lon) * Ry(colat)` carrying the north pole onto `center`.
///
/// The template's local `+x` axis ends up pointing "south" (towards
/// increasing rows) at the center and local `+y` towards increasing columns.
/// The matrix is assembled from the center's components rather than from
/// recovered angles, so `R * north_pole == center` to rounding.
pub fn rotation_to_center(center: &UnitVec) -> Rotation {
    let sin_colat = center.x.hypot(center.y);
    let cos_colat = center.z;
    let (cos_lon, sin_lon) = if sin_colat > 0.0 {
        (center.x / sin_colat, center.y / sin_colat)
    } else {
        (1.0, 0.0)
    };
    Rotation::from_cos_sin_z(cos_lon, sin_lon) * Rotation::from_cos_sin_y(cos_colat, sin_colat)
}

/// `n` points on the circle of angular `radius` around the north pole, at
/// longitudes `azimuth_offset + 2 pi k / n` for `k = 0..n`.
pub fn circle_points(radius: f64, n: usize, azimuth_offset: f64) -> Result<Vec<UnitVec>> {
    if n == 0 {
        return Err(invalid("circle needs at least one point"));
    }
    if !(radius > 0.0 && radius < PI) || !azimuth_offset.is_finite() {
        return Err(invalid(format!(
            "circle radius {radius} outside (0, pi) or non-finite offset"
        )));
    }
    Ok((0..n)
        .map(|k| UnitVec::from_angles(radius, azimuth_offset + TAU * k as f64 / n as f64))
        .collect())
}
