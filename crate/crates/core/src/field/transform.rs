use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use super::FieldError;
use crate::geometry::PointCloud;

/// Uniform scale plus translation: `model = grid · scale + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridTransform {
    /// Model units per grid unit.
    pub scale: f64,
    pub translation: Vector3<f64>,
}

impl GridTransform {
    pub const IDENTITY: GridTransform = GridTransform {
        scale: 1.0,
        translation: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn new(scale: f64, translation: Vector3<f64>) -> Result<Self, FieldError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(FieldError::InvalidArgument(format!(
                "transform scale must be positive, got {scale}"
            )));
        }
        Ok(GridTransform { scale, translation })
    }

    pub fn to_model(&self, grid: &Vector3<f64>) -> Vector3<f64> {
        grid * self.scale + self.translation
    }

    pub fn to_grid(&self, model: &Vector3<f64>) -> Vector3<f64> {
        (model - self.translation) / self.scale
    }
}

/// `scale=…` and `tx=… ty=… tz=…` lines, one per line, exact for `f64`.
impl fmt::Display for GridTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.translation;
        writeln!(f, "scale={}", self.scale)?;
        writeln!(f, "tx={}", t.x)?;
        writeln!(f, "ty={}", t.y)?;
        writeln!(f, "tz={}", t.z)
    }
}

impl FromStr for GridTransform {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut vals = [None; 4];
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            let Some((key, val)) = line.split_once('=') else {
                continue;
            };
            let slot = match key.trim() {
                "scale" => 0,
                "tx" => 1,
                "ty" => 2,
                "tz" => 3,
                _ => continue,
            };
            let v: f64 = val
                .trim()
                .parse()
                .map_err(|_| FieldError::InvalidArgument(format!("bad transform value {val:?}")))?;
            vals[slot] = Some(v);
        }
        match vals {
            [Some(s), Some(x), Some(y), Some(z)] => GridTransform::new(s, Vector3::new(x, y, z)),
            _ => Err(FieldError::InvalidArgument(
                "transform needs scale, tx, ty and tz".into(),
            )),
        }
    }
}

/// Fits a cubic `resolution³` grid around a point cloud.
///
/// The bounding box grows by `margin` times its largest extent on every
/// side, and the largest axis then spans voxel centers `0..=resolution-1`.
/// Shorter axes are centered. Coincident points fall back to a unit box
/// centered on the point.
pub fn fit_transform(
    points: &PointCloud,
    resolution: usize,
    margin: f64,
) -> Result<(GridTransform, [usize; 3]), FieldError> {
    if resolution < 8 {
        return Err(FieldError::InvalidArgument(format!(
            "resolution must be at least 8, got {resolution}"
        )));
    }
    if !(0.0..0.5).contains(&margin) {
        return Err(FieldError::InvalidArgument(format!(
            "margin must be in [0, 0.5), got {margin}"
        )));
    }
    let (lo, hi) = points
        .bounds()
        .ok_or_else(|| FieldError::InvalidArgument("cannot fit a grid to zero points".into()))?;
    let center = (lo + hi) / 2.0;
    let mut extent = (hi - lo).max();
    if !(extent > 0.0) {
        extent = 1.0;
    }
    let span = extent * (1.0 + 2.0 * margin);
    let scale = span / (resolution - 1) as f64;
    let mid = (resolution - 1) as f64 / 2.0;
    let translation = center - Vector3::repeat(mid * scale);
    Ok((GridTransform::new(scale, translation)?, [resolution; 3]))
}
