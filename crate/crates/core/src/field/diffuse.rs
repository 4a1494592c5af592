//! Separable binomial smoothing with mass-conserving boundaries.
//!
//! Along an axis of length `n ≥ 2` every source voxel sends ½ to itself and
//! ¼ to each neighbor; a quarter that would leave the grid stays on the
//! source instead. In gather form:
//!
//! ```text
//! out[0]   = ¾ s[0]   + ¼ s[1]
//! out[a]   = ¼ s[a-1] + ½ s[a] + ¼ s[a+1]
//! out[n-1] = ¼ s[n-2] + ¾ s[n-1]
//! ```
//!
//! Each output is computed from a fixed expression, so results do not depend
//! on how the work is split across threads.

use rayon::prelude::*;

/// Rows of at least this many elements are processed as one parallel task.
const MIN_TASK: usize = 1 << 14;

pub(super) fn diffuse_scaled(dims: [usize; 3], data: &mut Vec<f32>, scratch: &mut Vec<f32>, scale: f32) {
    let [nx, ny, nz] = dims;
    if data.is_empty() {
        return;
    }
    scratch.resize(data.len(), 0.0);
    // x pass: data -> scratch, planes of ny·nz
    blur_rows(data, scratch, 1, nx, ny * nz, 1.0);
    // y pass: scratch -> data, rows of nz inside each x plane
    blur_rows(scratch, data, nx, ny, nz, 1.0);
    // z pass: data -> scratch along contiguous lines
    blur_lines(data, scratch, nz, scale);
    std::mem::swap(data, scratch);
}

/// Blurs along the middle axis of a `[outer][axis][inner]` layout.
fn blur_rows(src: &[f32], dst: &mut [f32], outer: usize, n: usize, inner: usize, scale: f32) {
    let block = n * inner;
    let per_task = (MIN_TASK / block.max(1)).max(1) * block;
    debug_assert_eq!(src.len(), outer * block);
    dst.par_chunks_mut(per_task)
        .zip(src.par_chunks(per_task))
        .for_each(|(dst, src)| {
            for (d, s) in dst.chunks_exact_mut(block).zip(src.chunks_exact(block)) {
                blur_block(s, d, n, inner, scale);
            }
        });
}

fn blur_block(s: &[f32], d: &mut [f32], n: usize, inner: usize, scale: f32) {
    let row = |a: usize| &s[a * inner..(a + 1) * inner];
    if n == 1 {
        d.iter_mut().zip(s).for_each(|(d, s)| *d = scale * s);
        return;
    }
    let (q, h, tq) = (0.25 * scale, 0.5 * scale, 0.75 * scale);
    for a in 0..n {
        let out = &mut d[a * inner..(a + 1) * inner];
        let mid = row(a);
        if a == 0 {
            for ((o, m), r) in out.iter_mut().zip(mid).zip(row(1)) {
                *o = tq * m + q * r;
            }
        } else if a == n - 1 {
            for ((o, l), m) in out.iter_mut().zip(row(a - 1)).zip(mid) {
                *o = q * l + tq * m;
            }
        } else {
            for (((o, l), m), r) in out.iter_mut().zip(row(a - 1)).zip(mid).zip(row(a + 1)) {
                *o = q * l + h * m + q * r;
            }
        }
    }
}

/// Blurs each contiguous line of length `n`.
fn blur_lines(src: &[f32], dst: &mut [f32], n: usize, scale: f32) {
    let per_task = (MIN_TASK / n).max(1) * n;
    dst.par_chunks_mut(per_task)
        .zip(src.par_chunks(per_task))
        .for_each(|(dst, src)| {
            for (d, s) in dst.chunks_exact_mut(n).zip(src.chunks_exact(n)) {
                blur_line(s, d, scale);
            }
        });
}

fn blur_line(s: &[f32], d: &mut [f32], scale: f32) {
    let n = s.len();
    if n == 1 {
        d[0] = scale * s[0];
        return;
    }
    let (q, h, tq) = (0.25 * scale, 0.5 * scale, 0.75 * scale);
    d[0] = tq * s[0] + q * s[1];
    for a in 1..n - 1 {
        d[a] = q * s[a - 1] + h * s[a] + q * s[a + 1];
    }
    d[n - 1] = q * s[n - 2] + tq * s[n - 1];
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scatter form of the same operator, written independently.
    fn scatter_axis(src: &[f32], n: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; n];
        for (a, &v) in src.iter().enumerate() {
            let v = v as f64;
            let mut kept = 0.5;
            for t in [a as isize - 1, a as isize + 1] {
                if t >= 0 && (t as usize) < n {
                    out[t as usize] += 0.25 * v;
                } else {
                    kept += 0.25;
                }
            }
            out[a] += kept * v;
        }
        out
    }

    #[test]
    fn gather_matches_scatter_on_lines() {
        for n in 1..7 {
            let s: Vec<f32> = (0..n).map(|i| (i * i + 1) as f32).collect();
            let mut d = vec![0.0; n];
            blur_line(&s, &mut d, 1.0);
            let expect = scatter_axis(&s, n);
            for (a, b) in d.iter().zip(&expect) {
                assert!((*a as f64 - b).abs() < 1e-5, "n={n}: {d:?} vs {expect:?}");
            }
        }
    }

    #[test]
    fn scale_is_applied_once() {
        let dims = [3, 3, 3];
        let mut data = vec![1.0f32; 27];
        let mut scratch = Vec::new();
        diffuse_scaled(dims, &mut data, &mut scratch, 0.9);
        assert!(data.iter().all(|v| (*v - 0.9).abs() < 1e-6));
    }
}
