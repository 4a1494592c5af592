//! Network quality against a minimum-spanning-tree baseline.
//!
//! The grown network's material is approximated by the volume of voxels at
//! or above a threshold. Dividing it by the MST length times one voxel
//! cross-section gives the efficiency ratio: a one-voxel tube laid exactly
//! along the MST scores about 1, and redundant or wandering material raises it.

use std::fmt;

use nalgebra::Vector3;

use crate::field::{GridTransform, ScalarField3D};
use crate::geometry::PointCloud;
use crate::mcpm::{connectivity, FoodSources};

/// Header of the single-row CSV form of a [`NetworkReport`].
pub const CSV_HEADER: &str = "mst_length,volume,voxels,connectivity,efficiency_ratio";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkReport {
    /// Model units.
    pub mst_length: f64,
    /// Model units cubed.
    pub network_voxel_volume: f64,
    pub supra_threshold_voxel_count: usize,
    /// In `[0, 1]`.
    pub connectivity_fraction: f64,
    /// `volume / (mst_length · voxel_size²)`, or 0 when the MST is empty.
    pub efficiency_ratio: f64,
}

impl NetworkReport {
    /// Header line plus one data row, newline terminated.
    pub fn to_csv(&self) -> String {
        format!(
            "{CSV_HEADER}\n{},{},{},{},{}\n",
            self.mst_length,
            self.network_voxel_volume,
            self.supra_threshold_voxel_count,
            self.connectivity_fraction,
            self.efficiency_ratio
        )
    }
}

/// Plain-text mirror of the CSV, one `key=value` per line.
impl fmt::Display for NetworkReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mst_length={}", self.mst_length)?;
        writeln!(f, "volume={}", self.network_voxel_volume)?;
        writeln!(f, "voxels={}", self.supra_threshold_voxel_count)?;
        writeln!(f, "connectivity={}", self.connectivity_fraction)?;
        write!(f, "efficiency_ratio={}", self.efficiency_ratio)
    }
}

/// Total length of the Euclidean minimum spanning tree; 0 for fewer than
/// two points.
pub fn mst_length(points: &PointCloud) -> f64 {
    mst_length_of(&points.points)
}

/// Dense Prim: O(n²) time, O(n) memory, no edge list.
fn mst_length_of(points: &[Vector3<f64>]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    // squared distance from each unattached point to the tree
    let mut best = vec![f64::INFINITY; n];
    let mut attached = vec![false; n];
    let mut current = 0;
    let mut total = 0.0;
    for _ in 1..n {
        attached[current] = true;
        let p = points[current];
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for (i, q) in points.iter().enumerate() {
            if attached[i] {
                continue;
            }
            best[i] = best[i].min((q - p).norm_squared());
            if next == usize::MAX || best[i] < next_d {
                next = i;
                next_d = best[i];
            }
        }
        total += next_d.sqrt();
        current = next;
    }
    total
}

/// Measures the network in `trace` (grid space) that joins `food` (grid
/// space). Lengths and volumes are reported in the model units of
/// `transform`.
pub fn network_report(
    trace: &ScalarField3D,
    food: &FoodSources,
    threshold: f64,
    transform: &GridTransform,
) -> NetworkReport {
    debug_assert!(threshold >= 0.0);
    let model: Vec<Vector3<f64>> = food.positions.iter().map(|p| transform.to_model(p)).collect();
    let mst = mst_length_of(&model);
    let voxels = trace.data().iter().filter(|&&v| v as f64 >= threshold).count();
    let s = transform.scale;
    let volume = voxels as f64 * s * s * s;
    let efficiency_ratio = if mst > 0.0 { volume / (mst * s * s) } else { 0.0 };
    NetworkReport {
        mst_length: mst,
        network_voxel_volume: volume,
        supra_threshold_voxel_count: voxels,
        connectivity_fraction: connectivity(trace, food, threshold),
        efficiency_ratio,
    }
}
