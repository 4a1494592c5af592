use nalgebra::{UnitQuaternion, Vector3};
use petgraph::algo::min_spanning_tree;
use petgraph::data::Element;
use petgraph::graph::UnGraph;
use proptest::prelude::*;
use scaffold_core::eval::{mst_length, network_report};
use scaffold_core::field::{GridTransform, ScalarField3D};
use scaffold_core::geometry::PointCloud;
use scaffold_core::mcpm::FoodSources;

fn kruskal(points: &[Vector3<f64>]) -> f64 {
    let mut g = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<_> = points.iter().map(|_| g.add_node(())).collect();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            g.add_edge(nodes[i], nodes[j], (points[i] - points[j]).norm());
        }
    }
    min_spanning_tree(&g)
        .filter_map(|e| match e {
            Element::Edge { weight, .. } => Some(weight),
            _ => None,
        })
        .sum()
}

/// Minimum over every labelled tree on `n` vertices, enumerated by Prüfer
/// sequence.
fn brute_force_mst(points: &[Vector3<f64>]) -> f64 {
    let n = points.len();
    let mut seq = vec![0usize; n - 2];
    let mut best = f64::INFINITY;
    loop {
        let mut degree = vec![1usize; n];
        seq.iter().for_each(|&v| degree[v] += 1);
        let mut len = 0.0;
        for &v in &seq {
            let leaf = (0..n).find(|&u| degree[u] == 1).unwrap();
            len += (points[leaf] - points[v]).norm();
            degree[leaf] -= 1;
            degree[v] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
        len += (points[rest[0]] - points[rest[1]]).norm();
        best = best.min(len);

        let mut i = 0;
        while i < seq.len() && seq[i] == n - 1 {
            seq[i] = 0;
            i += 1;
        }
        if i == seq.len() {
            return best;
        }
        seq[i] += 1;
    }
}

fn cube_corners(side: f64) -> Vec<Vector3<f64>> {
    (0..8)
        .map(|c| Vector3::new((c & 1) as f64, (c >> 1 & 1) as f64, (c >> 2 & 1) as f64) * side)
        .collect()
}

#[test]
fn cube_corners_match_exhaustive_search() {
    let pts = cube_corners(1.0);
    let brute = brute_force_mst(&pts);
    assert!((brute - 7.0).abs() < 1e-12);
    assert_eq!(mst_length(&PointCloud::new(pts)), brute);
}

#[test]
fn scattered_six_points_match_exhaustive_search() {
    let pts: Vec<Vector3<f64>> = [
        [0.3, 2.0, -1.0],
        [4.0, 0.1, 0.0],
        [2.2, 2.2, 2.2],
        [-1.0, 0.0, 3.0],
        [0.0, -2.5, 0.5],
        [3.0, 3.0, -2.0],
    ]
    .iter()
    .map(|p| Vector3::from(*p))
    .collect();
    let m = mst_length(&PointCloud::new(pts.clone()));
    assert!((m - brute_force_mst(&pts)).abs() < 1e-12);
}

#[test]
fn straight_tube_scores_about_one() {
    for len in [5usize, 20, 40] {
        let mut trace = ScalarField3D::zeros([len + 5, 7, 7]);
        for i in 2..=len + 2 {
            trace.set(i, 3, 3, 1.0);
        }
        let food = FoodSources::from_positions(vec![
            Vector3::new(2.0, 3.0, 3.0),
            Vector3::new((len + 2) as f64, 3.0, 3.0),
        ]);
        let t = GridTransform::new(0.5, Vector3::new(10.0, -4.0, 2.0)).unwrap();
        let r = network_report(&trace, &food, 0.5, &t);
        assert_eq!(r.supra_threshold_voxel_count, len + 1);
        assert!((r.mst_length - 0.5 * len as f64).abs() < 1e-12);
        assert!((r.network_voxel_volume - (len + 1) as f64 * 0.125).abs() < 1e-12);
        // one extra voxel from the closing end
        assert!((r.efficiency_ratio - (len + 1) as f64 / len as f64).abs() < 1e-12);
        assert_eq!(r.connectivity_fraction, 1.0);
    }
}

fn points_strategy(max: usize) -> impl Strategy<Value = Vec<Vector3<f64>>> {
    prop::collection::vec(prop::array::uniform3(-100.0f64..100.0), 1..max)
        .prop_map(|v| v.into_iter().map(Vector3::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn prim_matches_kruskal(points in points_strategy(300)) {
        let prim = mst_length(&PointCloud::new(points.clone()));
        let oracle = kruskal(&points);
        prop_assert!((prim - oracle).abs() <= 1e-9 * oracle.max(1.0), "{prim} vs {oracle}");
    }

    #[test]
    fn rigid_motion_invariance(
        points in points_strategy(200),
        axis in prop::array::uniform3(-1.0f64..1.0),
        shift in prop::array::uniform3(-1e3f64..1e3),
    ) {
        let rot = UnitQuaternion::from_scaled_axis(Vector3::from(axis) * 3.0);
        let moved: Vec<_> = points.iter().map(|p| rot * p + Vector3::from(shift)).collect();
        let a = mst_length(&PointCloud::new(points));
        let b = mst_length(&PointCloud::new(moved));
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-9));
    }

    #[test]
    fn volume_never_grows_with_threshold(
        data in prop::collection::vec(0.0f32..10.0, 216),
        lo in 0.0f64..10.0,
        step in 0.0f64..5.0,
    ) {
        let trace = ScalarField3D::from_data([6, 6, 6], data).unwrap();
        let food = FoodSources::from_positions(cube_corners(5.0));
        let t = GridTransform::IDENTITY;
        let a = network_report(&trace, &food, lo, &t);
        let b = network_report(&trace, &food, lo + step, &t);
        prop_assert!(b.network_voxel_volume <= a.network_voxel_volume);
        prop_assert!(a.efficiency_ratio >= 0.0 && (0.0..=1.0).contains(&a.connectivity_fraction));
    }
}
