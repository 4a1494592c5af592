//! Isosurface extraction with Marching Cubes.
//!
//! The field is treated as if surrounded by one layer of voxels just below
//! the iso value, so every extracted surface is closed. Each vertex is
//! identified by the grid edge it lies on, which lets neighbouring cubes
//! share vertices exactly; together with a face-consistent case table the
//! output is watertight by construction.

mod mesh;
mod table;

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{GridTransform, ScalarField3D};
pub use mesh::{
    is_watertight, mesh_stats, EdgeIssue, IsoSurfaceMesh, MeshStats, WatertightReport, MAX_REPORTED_ISSUES,
};
pub use table::{validate_case_table, CaseTable, CaseTableReport, Face, EDGES};

#[derive(Debug, Error, PartialEq)]
pub enum ReconstructError {
    #[error("iso value must be positive and finite, got {0}")]
    InvalidIso(f64),
}

const NONE: u32 = u32::MAX;

/// Offset below `iso` used for the padding layer and above it for nudging
/// values that sit exactly on it.
pub fn iso_delta(iso: f64) -> f64 {
    (1e-6 * iso).max(1e-6)
}

/// Extracts the `iso` level set of `field` as a closed triangle mesh in the
/// model space of `transform`, normals pointing from high to low values.
///
/// If no voxel reaches `iso` the mesh is empty; see
/// [`IsoSurfaceMesh::is_empty`]. Output is identical for any thread count.
pub fn marching_cubes(
    field: &ScalarField3D,
    iso: f64,
    transform: &GridTransform,
) -> Result<IsoSurfaceMesh, ReconstructError> {
    if !(iso > 0.0 && iso.is_finite()) {
        return Err(ReconstructError::InvalidIso(iso));
    }
    let padded = Padded::new(field, iso);
    let table = CaseTable::shared();
    let [px, py, pz] = padded.dims;
    let slab = py * pz * 3;

    // vertex ids per (padded corner, axis); each x-slab numbers its own
    // vertices first and the offsets are fixed up afterwards
    let mut ids = vec![NONE; px * slab];
    let per_slab: Vec<Vec<Vector3<f64>>> = ids
        .par_chunks_mut(slab)
        .enumerate()
        .map(|(i, ids)| padded.slab_vertices(i, ids))
        .collect();
    let mut offsets = Vec::with_capacity(px);
    let mut total = 0u32;
    for v in &per_slab {
        offsets.push(total);
        total = total
            .checked_add(v.len() as u32)
            .filter(|&t| t != NONE)
            .expect("vertex count exceeds u32 range");
    }
    ids.par_chunks_mut(slab).zip(&offsets).for_each(|(ids, &off)| {
        ids.iter_mut().filter(|v| **v != NONE).for_each(|v| *v += off);
    });
    let vertices: Vec<Vector3<f64>> = per_slab.into_iter().flatten().map(|p| transform.to_model(&p)).collect();

    let triangles: Vec<[u32; 3]> = (0..px - 1)
        .into_par_iter()
        .map(|i| padded.slab_triangles(i, &ids, table))
        .collect::<Vec<_>>()
        .concat();

    Ok(IsoSurfaceMesh { vertices, triangles })
}

/// Read-only view of the field with the padding layer and nudging applied.
struct Padded<'a> {
    field: &'a ScalarField3D,
    /// Field dims plus two.
    dims: [usize; 3],
    iso: f64,
    below: f64,
    above: f64,
}

impl<'a> Padded<'a> {
    fn new(field: &'a ScalarField3D, iso: f64) -> Self {
        let d = iso_delta(iso);
        Padded {
            field,
            dims: field.dims().map(|n| n + 2),
            iso,
            below: iso - d,
            above: iso + d,
        }
    }

    /// Value at padded corner `(i, j, k)`; NaN reads as outside.
    #[inline]
    fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        let [px, py, pz] = self.dims;
        if i == 0 || j == 0 || k == 0 || i == px - 1 || j == py - 1 || k == pz - 1 {
            return self.below;
        }
        let v = self.field.get(i - 1, j - 1, k - 1) as f64;
        if v == self.iso {
            self.above
        } else if v.is_nan() {
            self.below
        } else {
            v
        }
    }

    /// Creates the vertices on edges starting at padded x-index `i`, in
    /// (j, k, axis) order, writing slab-local ids into `ids`.
    fn slab_vertices(&self, i: usize, ids: &mut [u32]) -> Vec<Vector3<f64>> {
        let [px, py, pz] = self.dims;
        let mut out = Vec::new();
        for j in 0..py {
            for k in 0..pz {
                let v0 = self.value(i, j, k);
                let c = [i, j, k];
                for axis in 0..3 {
                    let mut n = c;
                    n[axis] += 1;
                    if n[axis] >= [px, py, pz][axis] {
                        continue;
                    }
                    let v1 = self.value(n[0], n[1], n[2]);
                    if (v0 >= self.iso) == (v1 >= self.iso) {
                        continue;
                    }
                    let t = (self.iso - v0) / (v1 - v0);
                    let mut p = Vector3::new(i as f64 - 1.0, j as f64 - 1.0, k as f64 - 1.0);
                    p[axis] += t;
                    ids[(j * pz + k) * 3 + axis] = out.len() as u32;
                    out.push(p);
                }
            }
        }
        out
    }

    /// Triangles of the cubes whose lower padded x-index is `i`.
    fn slab_triangles(&self, i: usize, ids: &[u32], table: &CaseTable) -> Vec<[u32; 3]> {
        let [_, py, pz] = self.dims;
        let id = |c: [usize; 3], axis: usize| ids[((c[0] * py + c[1]) * pz + c[2]) * 3 + axis];
        let mut out = Vec::new();
        for j in 0..py - 1 {
            for k in 0..pz - 1 {
                let mut mask = 0u8;
                for c in 0..8u8 {
                    let [dx, dy, dz] = table::corner_offset(c);
                    mask |= ((self.value(i + dx, j + dy, k + dz) >= self.iso) as u8) << c;
                }
                for tri in table.triangles(mask) {
                    let t = tri.map(|e| {
                        let (lo, _) = EDGES[e as usize];
                        let [dx, dy, dz] = table::corner_offset(lo);
                        let v = id([i + dx, j + dy, k + dz], table::edge_axis(e as usize));
                        debug_assert_ne!(v, NONE);
                        v
                    });
                    // distinct edges give distinct ids, so this never fires;
                    // it guards the no-zero-area-collapse contract all the same
                    if t[0] == t[1] && t[1] == t[2] {
                        continue;
                    }
                    out.push(t);
                }
            }
        }
        out
    }
}
