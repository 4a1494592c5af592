use std::collections::VecDeque;

use super::FoodSources;
use crate::field::ScalarField3D;

/// Fraction of food points that share the largest 26-connected component of
/// `trace ≥ threshold`.
///
/// Each food point claims its nearest voxel, and claimed voxels count as
/// supra-threshold. Components are measured by how many food points they
/// hold, so several points in one voxel all count.
pub fn connectivity(trace: &ScalarField3D, food: &FoodSources, threshold: f64) -> f64 {
    if food.is_empty() {
        return 0.0;
    }
    let dims = trace.dims();
    let [_, ny, nz] = dims;
    let food_voxels: Vec<usize> = food
        .positions
        .iter()
        .map(|p| {
            let c = |a: usize| (p[a].round().max(0.0) as usize).min(dims[a] - 1);
            trace.index(c(0), c(1), c(2))
        })
        .collect();

    let mut food_count = vec![0u32; trace.len()];
    for &v in &food_voxels {
        food_count[v] += 1;
    }
    let solid = |idx: usize| food_count[idx] > 0 || trace.data()[idx] as f64 >= threshold;

    let mut visited = vec![false; trace.len()];
    let mut queue = VecDeque::new();
    let mut best = 0u64;
    for &start in &food_voxels {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let mut held = 0u64;
        while let Some(idx) = queue.pop_front() {
            held += food_count[idx] as u64;
            let (i, j, k) = (idx / (ny * nz), (idx / nz) % ny, idx % nz);
            for di in -1isize..=1 {
                for dj in -1isize..=1 {
                    for dk in -1isize..=1 {
                        let (a, b, c) = (i as isize + di, j as isize + dj, k as isize + dk);
                        if !trace.contains_index(a, b, c) {
                            continue;
                        }
                        let n = (a as usize * ny + b as usize) * nz + c as usize;
                        if !visited[n] && solid(n) {
                            visited[n] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
        best = best.max(held);
    }
    best as f64 / food.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn food(points: &[[f64; 3]]) -> FoodSources {
        FoodSources::from_positions(points.iter().map(|p| Vector3::from(*p)).collect())
    }

    #[test]
    fn isolated_seeds() {
        let trace = ScalarField3D::zeros([10, 10, 10]);
        let f = food(&[
            [0.0, 0.0, 0.0],
            [9.0, 9.0, 9.0],
            [5.0, 0.0, 0.0],
            [0.0, 5.0, 0.0],
            [0.0, 0.0, 5.0],
        ]);
        assert_eq!(connectivity(&trace, &f, 1.0), 0.2);
    }

    #[test]
    fn fully_supra_threshold() {
        let mut trace = ScalarField3D::zeros([6, 6, 6]);
        trace.fill(1.0);
        let f = food(&[[0.0, 0.0, 0.0], [5.0, 5.0, 5.0], [2.0, 4.0, 1.0]]);
        assert_eq!(connectivity(&trace, &f, 0.5), 1.0);
    }

    #[test]
    fn drawn_line_joins_two_of_three() {
        let mut trace = ScalarField3D::zeros([12, 12, 12]);
        // diagonal steps exercise the 26-neighborhood
        for t in 1..9 {
            trace.set(1 + t, 1 + t, 3, 5.0);
        }
        let f = food(&[[1.2, 0.9, 3.0], [10.0, 10.0, 3.4], [1.0, 10.0, 10.0]]);
        assert!((connectivity(&trace, &f, 5.0) - 2.0 / 3.0).abs() < 1e-12);
        // above the line value the path breaks
        assert!((connectivity(&trace, &f, 5.5) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shared_voxel_counts_each_point() {
        let trace = ScalarField3D::zeros([4, 4, 4]);
        let f = food(&[[1.0, 1.0, 1.0], [1.1, 0.9, 1.0], [3.0, 3.0, 3.0]]);
        assert!((connectivity(&trace, &f, 1.0) - 2.0 / 3.0).abs() < 1e-12);
    }
}
