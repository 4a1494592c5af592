//! Dense voxel scalar fields.
//!
//! A [`ScalarField3D`] stores `nx · ny · nz` non-negative `f32` values in C
//! order (x slowest, z fastest). Grid coordinates put voxel `(i, j, k)` at
//! the point `(i, j, k)`; the attached [`GridTransform`] maps grid space to
//! model space.

mod diffuse;
mod image;
mod stats;
mod transform;

use nalgebra::Vector3;
use thiserror::Error;

pub use image::{encode_slice_pgm, slice_to_image, Axis};
pub use stats::{field_stats, percentile_nonzero, FieldStats};
pub use transform::{fit_transform, GridTransform};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("data length {len} does not match dims {dims:?}")]
    ShapeMismatch { dims: [usize; 3], len: usize },
    #[error("slice index {index} out of range for axis of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3D {
    dims: [usize; 3],
    /// Model units per voxel.
    pub voxel_size: f64,
    /// Model-space position of the center of voxel `(0, 0, 0)`.
    pub origin: Vector3<f64>,
    data: Vec<f32>,
}

impl ScalarField3D {
    pub fn zeros(dims: [usize; 3]) -> Self {
        ScalarField3D {
            dims,
            voxel_size: 1.0,
            origin: Vector3::zeros(),
            data: vec![0.0; dims.iter().product()],
        }
    }

    pub fn from_data(dims: [usize; 3], data: Vec<f32>) -> Result<Self, FieldError> {
        if data.len() != dims.iter().product::<usize>() {
            return Err(FieldError::ShapeMismatch { dims, len: data.len() });
        }
        Ok(ScalarField3D {
            dims,
            voxel_size: 1.0,
            origin: Vector3::zeros(),
            data,
        })
    }

    /// Builds a field by evaluating `f(i, j, k)` at every voxel.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        ScalarField3D::from_data(dims, data).unwrap()
    }

    pub fn with_transform(mut self, t: GridTransform) -> Self {
        self.voxel_size = t.scale;
        self.origin = t.translation;
        self
    }

    pub fn transform(&self) -> GridTransform {
        GridTransform {
            scale: self.voxel_size,
            translation: self.origin,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f32) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    pub fn contains_index(&self, i: isize, j: isize, k: isize) -> bool {
        let [nx, ny, nz] = self.dims.map(|d| d as isize);
        (0..nx).contains(&i) && (0..ny).contains(&j) && (0..nz).contains(&k)
    }

    /// Sum of all voxels accumulated in `f64`.
    pub fn total(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }

    pub fn fill(&mut self, v: f32) {
        self.data.fill(v);
    }

    /// Trilinear interpolation between the 8 voxel centers around `pos`.
    ///
    /// Voxels beyond the grid read as zero, and any position farther than one
    /// voxel outside the grid returns 0. This makes sampling the exact adjoint
    /// of [`splat_trilinear`](Self::splat_trilinear).
    #[inline]
    pub fn sample_trilinear(&self, pos: Vector3<f64>) -> f64 {
        match Stencil::new(self.dims, pos) {
            Some(st) => st.sample(self),
            None => 0.0,
        }
    }

    /// Distributes `amount` over the 8 voxels around `pos` with trilinear
    /// weights; weights that land outside the grid are dropped.
    #[inline]
    pub fn splat_trilinear(&mut self, pos: Vector3<f64>, amount: f64) {
        if let Some(st) = Stencil::new(self.dims, pos) {
            st.splat(self, amount);
        }
    }

    /// One pass of the separable (¼, ½, ¼) binomial filter along each axis.
    /// Mass that would leave the grid folds back onto the source voxel, so
    /// the total is conserved and uniform fields are fixed points.
    pub fn diffuse(&self) -> ScalarField3D {
        let mut out = self.clone();
        let mut scratch = Vec::new();
        out.diffuse_scaled(1.0, &mut scratch);
        out
    }

    /// In-place diffusion followed by multiplication with `scale`.
    /// `scratch` is resized as needed and can be reused across calls.
    pub fn diffuse_scaled(&mut self, scale: f32, scratch: &mut Vec<f32>) {
        diffuse::diffuse_scaled(self.dims, &mut self.data, scratch, scale);
    }

    /// Multiplies every voxel by `rho`.
    pub fn decay(&mut self, rho: f32) {
        self.data.iter_mut().for_each(|v| *v *= rho);
    }
}

/// Trilinear weights of one position, reusable across fields of equal dims.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    dims: [usize; 3],
    base: [isize; 3],
    frac: [f64; 3],
    interior: bool,
}

impl Stencil {
    /// `None` when `pos` lies a voxel or more outside the grid (or is NaN).
    #[inline]
    pub fn new(dims: [usize; 3], pos: Vector3<f64>) -> Option<Stencil> {
        let mut base = [0isize; 3];
        let mut frac = [0.0; 3];
        let mut interior = true;
        for a in 0..3 {
            let p = pos[a];
            let n = dims[a] as isize;
            // NaN fails both comparisons and is rejected here as well
            if !(p > -1.0 && p < n as f64) {
                return None;
            }
            // p > -1, so truncating p + 1 is a floor without a libm call
            let b = (p + 1.0) as isize - 1;
            base[a] = b;
            frac[a] = p - b as f64;
            interior &= b >= 0 && b + 1 < n;
        }
        Some(Stencil {
            dims,
            base,
            frac,
            interior,
        })
    }

    #[inline]
    fn origin(&self) -> usize {
        let [bx, by, bz] = self.base.map(|b| b as usize);
        (bx * self.dims[1] + by) * self.dims[2] + bz
    }

    #[inline]
    pub fn sample(&self, field: &ScalarField3D) -> f64 {
        debug_assert_eq!(self.dims, field.dims);
        if !self.interior {
            let mut acc = 0.0;
            self.for_each_clipped(|i, w| acc += w * field.data[i] as f64);
            return acc;
        }
        let (s, r) = (self.dims[1] * self.dims[2], self.dims[2]);
        let i = self.origin();
        let d = &field.data[i..i + s + r + 2];
        let [fx, fy, fz] = self.frac;
        let lerp = |a: f32, b: f32| a as f64 + fz * (b as f64 - a as f64);
        let c00 = lerp(d[0], d[1]);
        let c01 = lerp(d[r], d[r + 1]);
        let c10 = lerp(d[s], d[s + 1]);
        let c11 = lerp(d[s + r], d[s + r + 1]);
        let c0 = c00 + fy * (c01 - c00);
        let c1 = c10 + fy * (c11 - c10);
        c0 + fx * (c1 - c0)
    }

    #[inline]
    pub fn splat(&self, field: &mut ScalarField3D, amount: f64) {
        debug_assert_eq!(self.dims, field.dims);
        if !self.interior {
            let data = &mut field.data;
            self.for_each_clipped(|i, w| data[i] += (w * amount) as f32);
            return;
        }
        let (s, r) = (self.dims[1] * self.dims[2], self.dims[2]);
        let i = self.origin();
        let d = &mut field.data[i..i + s + r + 2];
        let [fx, fy, fz] = self.frac;
        for (off, wx) in [(0, (1.0 - fx) * amount), (s, fx * amount)] {
            for (off, w) in [(off, wx * (1.0 - fy)), (off + r, wx * fy)] {
                d[off] += (w * (1.0 - fz)) as f32;
                d[off + 1] += (w * fz) as f32;
            }
        }
    }

    /// Visits the in-grid corners with their weights, skipping zero weights.
    fn for_each_clipped(&self, mut f: impl FnMut(usize, f64)) {
        let [nx, ny, nz] = self.dims.map(|d| d as isize);
        let [bx, by, bz] = self.base;
        let [fx, fy, fz] = self.frac;
        for (i, wx) in [(bx, 1.0 - fx), (bx + 1, fx)] {
            if i < 0 || i >= nx || wx == 0.0 {
                continue;
            }
            for (j, wy) in [(by, 1.0 - fy), (by + 1, fy)] {
                if j < 0 || j >= ny || wy == 0.0 {
                    continue;
                }
                let row = (i * ny + j) * nz;
                for (k, wz) in [(bz, 1.0 - fz), (bz + 1, fz)] {
                    if k < 0 || k >= nz || wz == 0.0 {
                        continue;
                    }
                    f((row + k) as usize, wx * wy * wz);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_pcg::Pcg64Mcg;

    fn random_field(dims: [usize; 3], seed: u64) -> ScalarField3D {
        let mut rng = Pcg64Mcg::seed_from_u64(seed);
        ScalarField3D::from_fn(dims, |_, _, _| rng.random::<f32>())
    }

    #[test]
    fn from_data_checks_length() {
        assert!(ScalarField3D::from_data([2, 2, 2], vec![0.0; 7]).is_err());
    }

    #[test]
    fn c_order_x_slowest() {
        let f = ScalarField3D::zeros([2, 3, 4]);
        assert_eq!(f.index(1, 0, 0), 12);
        assert_eq!(f.index(0, 1, 0), 4);
        assert_eq!(f.index(0, 0, 1), 1);
    }

    #[test]
    fn sample_constant_field() {
        let mut f = ScalarField3D::zeros([4, 4, 4]);
        f.fill(5.0);
        assert_relative_eq!(f.sample_trilinear(Vector3::new(1.3, 2.7, 0.4)), 5.0, epsilon = 1e-6);
    }

    #[test]
    fn sample_is_exact_at_voxel_centers() {
        let f = random_field([5, 4, 3], 1);
        for (i, j, k) in [(0, 0, 0), (4, 3, 2), (2, 1, 1)] {
            let p = Vector3::new(i as f64, j as f64, k as f64);
            assert_eq!(f.sample_trilinear(p), f.get(i, j, k) as f64);
        }
    }

    #[test]
    fn sample_corner_weight() {
        let mut f = ScalarField3D::zeros([2, 2, 2]);
        f.set(0, 0, 0, 1.0);
        assert_relative_eq!(f.sample_trilinear(Vector3::repeat(0.5)), 0.125);
    }

    #[test]
    fn sample_far_outside_is_zero() {
        let mut f = ScalarField3D::zeros([3, 3, 3]);
        f.fill(1.0);
        assert_eq!(f.sample_trilinear(Vector3::new(-1.0, 1.0, 1.0)), 0.0);
        assert_eq!(f.sample_trilinear(Vector3::new(1.0, 3.0, 1.0)), 0.0);
        assert_eq!(f.sample_trilinear(Vector3::new(f64::NAN, 1.0, 1.0)), 0.0);
        // half a voxel out: the missing neighbor reads as zero
        assert_relative_eq!(f.sample_trilinear(Vector3::new(2.5, 1.0, 1.0)), 0.5);
    }

    #[test]
    fn splat_at_center_and_midpoint() {
        let mut f = ScalarField3D::zeros([3, 3, 3]);
        f.splat_trilinear(Vector3::new(1.0, 1.0, 1.0), 1.0);
        assert_eq!(f.get(1, 1, 1), 1.0);
        assert_eq!(f.total(), 1.0);

        let mut g = ScalarField3D::zeros([3, 3, 3]);
        g.splat_trilinear(Vector3::repeat(0.5), 8.0);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(g.get(i, j, k), 1.0);
                }
            }
        }
    }

    #[test]
    fn splat_clips_at_boundary() {
        let mut f = ScalarField3D::zeros([3, 3, 3]);
        f.splat_trilinear(Vector3::new(-0.5, 1.0, 1.0), 1.0);
        assert_relative_eq!(f.total(), 0.5);
    }

    #[test]
    fn many_interior_splats_conserve_mass() {
        let mut rng = Pcg64Mcg::seed_from_u64(7);
        let mut f = ScalarField3D::zeros([16, 16, 16]);
        for _ in 0..10_000 {
            let p = Vector3::from_fn(|_, _| rng.random_range(0.0..15.0));
            f.splat_trilinear(p, 1.0);
        }
        assert_relative_eq!(f.total(), 1e4, max_relative = 1e-6);
    }

    #[test]
    fn diffuse_single_voxel_tensor_weights() {
        let mut f = ScalarField3D::zeros([5, 5, 5]);
        f.set(2, 2, 2, 64.0);
        let g = f.diffuse();
        for di in 0..3usize {
            for dj in 0..3usize {
                for dk in 0..3usize {
                    let off = [di, dj, dk].iter().filter(|&&d| d != 1).count();
                    let expect = 8.0 / (1 << off) as f32;
                    assert_eq!(g.get(1 + di, 1 + dj, 1 + dk), expect);
                }
            }
        }
        assert_eq!(g.total(), 64.0);
    }

    #[test]
    fn diffuse_keeps_uniform_fields() {
        let mut f = ScalarField3D::zeros([6, 1, 2]);
        f.fill(3.0);
        let g = f.diffuse();
        for v in g.data() {
            assert_relative_eq!(*v, 3.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn diffuse_conserves_random_mass() {
        for (dims, seed) in [([7, 5, 9], 1), ([2, 2, 2], 2), ([1, 8, 3], 3), ([32, 32, 32], 4)] {
            let f = random_field(dims, seed);
            assert_relative_eq!(f.diffuse().total(), f.total(), max_relative = 1e-5);
        }
    }

    #[test]
    fn decay_composition() {
        let mut f = random_field([4, 4, 4], 9);
        let before = f.clone();
        f.decay(1.0);
        assert_eq!(f, before);
        f.decay(0.5);
        f.decay(0.5);
        for (a, b) in f.data().iter().zip(before.data()) {
            assert_eq!(*a, b * 0.25);
        }
        let mut g = before.clone();
        g.decay(0.9);
        assert_relative_eq!(g.total(), 0.9 * before.total(), max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn sample_is_adjoint_of_splat(
            x in -1.5f64..6.5, y in -1.5f64..4.5, z in -1.5f64..5.5, seed in 0u64..1000,
        ) {
            let dims = [6, 4, 5];
            let a = random_field(dims, seed);
            let p = Vector3::new(x, y, z);
            let mut unit = ScalarField3D::zeros(dims);
            unit.splat_trilinear(p, 1.0);
            let inner: f64 = unit.data().iter().zip(a.data()).map(|(u, v)| *u as f64 * *v as f64).sum();
            prop_assert!((inner - a.sample_trilinear(p)).abs() < 1e-6);
        }

        #[test]
        fn sample_is_bounded_by_neighbors(x in 0.0f64..5.0, y in 0.0f64..3.0, z in 0.0f64..4.0, seed in 0u64..1000) {
            let a = random_field([6, 4, 5], seed);
            let (i, j, k) = (x.floor() as usize, y.floor() as usize, z.floor() as usize);
            let corners: Vec<f32> = (0..8).map(|c| a.get(i + (c & 1), j + ((c >> 1) & 1), k + (c >> 2))).collect();
            let lo = corners.iter().cloned().fold(f32::INFINITY, f32::min) as f64;
            let hi = corners.iter().cloned().fold(0.0, f32::max) as f64;
            let s = a.sample_trilinear(Vector3::new(x, y, z));
            prop_assert!(s >= lo - 1e-6 && s <= hi + 1e-6);
        }

        #[test]
        fn diffuse_conserves_boundary_heavy_mass(nx in 1usize..5, ny in 1usize..5, nz in 1usize..5, seed in 0u64..1000) {
            let f = random_field([nx, ny, nz], seed);
            let g = f.diffuse();
            prop_assert!((g.total() - f.total()).abs() <= 1e-5 * f.total().max(1e-12));
            prop_assert!(g.data().iter().all(|v| *v >= 0.0));
        }
    }
}
