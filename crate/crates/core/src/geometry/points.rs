//! Plain-text point lists: one point per line as `x y z`, optionally
//! followed by a normal `nx ny nz` and then a weight. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::{parse_f64, tokens, GeometryError, PointCloud};

pub fn load_points(path: impl AsRef<Path>) -> Result<PointCloud, GeometryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GeometryError::io(path, e))?;

    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut weights = Vec::new();
    let mut columns = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let vals: Vec<&str> = tokens(line).collect();
        if vals.is_empty() {
            continue;
        }
        if !matches!(vals.len(), 3 | 6 | 7) {
            return Err(GeometryError::parse(path, lineno, "expected 3, 6 or 7 columns"));
        }
        if *columns.get_or_insert(vals.len()) != vals.len() {
            return Err(GeometryError::parse(path, lineno, "inconsistent column count"));
        }
        let v: Vec<f64> = vals
            .iter()
            .map(|t| parse_f64(path, lineno, Some(t)))
            .collect::<Result<_, _>>()?;
        points.push(Vector3::new(v[0], v[1], v[2]));
        if v.len() >= 6 {
            let n = Vector3::new(v[3], v[4], v[5])
                .try_normalize(1e-12)
                .ok_or_else(|| GeometryError::parse(path, lineno, "zero-length normal"))?;
            normals.push(n);
        }
        if v.len() == 7 {
            if !(v[6] >= 0.0) {
                return Err(GeometryError::parse(path, lineno, "negative weight"));
            }
            weights.push(v[6]);
        }
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyGeometry(path.to_path_buf()));
    }

    let mut cloud = PointCloud::new(points);
    if !normals.is_empty() {
        cloud = cloud.with_normals(normals)?;
    }
    if !weights.is_empty() {
        cloud = cloud.with_weights(weights)?;
    }
    Ok(cloud)
}

/// Writes `x y z [nx ny nz weight]` lines with round-trippable precision.
pub fn write_points(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<(), GeometryError> {
    let path = path.as_ref();
    let mut out = String::new();
    for (i, p) in cloud.points.iter().enumerate() {
        write!(out, "{} {} {}", p.x, p.y, p.z).unwrap();
        if let Some(n) = &cloud.normals {
            write!(out, " {} {} {} {}", n[i].x, n[i].y, n[i].z, cloud.weights[i]).unwrap();
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| GeometryError::io(path, e))
}
