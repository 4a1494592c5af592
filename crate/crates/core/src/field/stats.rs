use std::fmt;

use super::ScalarField3D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub min: f32,
    pub max: f32,
    pub total: f64,
    pub nonzero_count: usize,
    pub p50: f32,
    pub p99: f32,
}

impl fmt::Display for FieldStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "min={}", self.min)?;
        writeln!(f, "max={}", self.max)?;
        writeln!(f, "total={}", self.total)?;
        writeln!(f, "nonzero={}", self.nonzero_count)?;
        writeln!(f, "p50={}", self.p50)?;
        writeln!(f, "p99={}", self.p99)
    }
}

/// Nearest-rank percentile of `values` (reordered in place).
fn nearest_rank(values: &mut [f32], p: f64) -> f32 {
    let n = values.len();
    let rank = ((p / 100.0) * n as f64).ceil().clamp(1.0, n as f64) as usize;
    *values.select_nth_unstable_by(rank - 1, f32::total_cmp).1
}

pub fn field_stats(field: &ScalarField3D) -> FieldStats {
    let data = field.data();
    if data.is_empty() {
        return FieldStats {
            min: 0.0,
            max: 0.0,
            total: 0.0,
            nonzero_count: 0,
            p50: 0.0,
            p99: 0.0,
        };
    }
    let (mut min, mut max) = (f32::INFINITY, f32::NEG_INFINITY);
    let mut nonzero_count = 0;
    for &v in data {
        min = min.min(v);
        max = max.max(v);
        nonzero_count += (v != 0.0) as usize;
    }
    let mut sorted = data.to_vec();
    let p50 = nearest_rank(&mut sorted, 50.0);
    let p99 = nearest_rank(&mut sorted, 99.0);
    FieldStats {
        min,
        max,
        total: field.total(),
        nonzero_count,
        p50,
        p99,
    }
}

/// Nearest-rank percentile over the nonzero voxels only; `None` when the
/// field is all zero.
pub fn percentile_nonzero(field: &ScalarField3D, p: f64) -> Option<f32> {
    let mut nz: Vec<f32> = field.data().iter().copied().filter(|&v| v != 0.0).collect();
    (!nz.is_empty()).then(|| nearest_rank(&mut nz, p))
}
