//! The 256-entry Marching Cubes case table, derived from cube geometry
//! rather than transcribed.
//!
//! Corner `c` sits at `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`; bit `c` of a
//! configuration mask is set when that corner is inside (value ≥ iso).
//! Edges 0–3 run along x, 4–7 along y and 8–11 along z.
//!
//! For every face the crossing edges are paired into segments using only
//! the face's four corners; on an ambiguous face each inside corner is cut
//! off on its own. Both cubes sharing a face therefore agree on its
//! segments, which is what makes the extracted surface crack-free. The
//! segments of a cube chain into closed loops that are then triangulated.

use std::sync::OnceLock;

use nalgebra::Vector3;

/// Corner pair `(lower, upper)` of each edge.
pub const EDGES: [(u8, u8); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Axis (0 = x, 1 = y, 2 = z) an edge runs along.
#[inline]
pub const fn edge_axis(e: usize) -> usize {
    e / 4
}

#[inline]
pub fn corner_offset(c: u8) -> [usize; 3] {
    [(c & 1) as usize, ((c >> 1) & 1) as usize, ((c >> 2) & 1) as usize]
}

fn corner_pos(c: u8) -> Vector3<f64> {
    let [x, y, z] = corner_offset(c);
    Vector3::new(x as f64, y as f64, z as f64)
}

fn edge_mid(e: usize) -> Vector3<f64> {
    let (a, b) = EDGES[e];
    (corner_pos(a) + corner_pos(b)) * 0.5
}

/// A cube face: the plane `coord[axis] == side`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub side: u8,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face { axis: 0, side: 0 },
        Face { axis: 0, side: 1 },
        Face { axis: 1, side: 0 },
        Face { axis: 1, side: 1 },
        Face { axis: 2, side: 0 },
        Face { axis: 2, side: 1 },
    ];

    pub fn index(self) -> usize {
        2 * self.axis + self.side as usize
    }

    pub fn normal(self) -> Vector3<f64> {
        let mut n = Vector3::zeros();
        n[self.axis] = if self.side == 1 { 1.0 } else { -1.0 };
        n
    }

    /// The same plane seen from the neighbouring cube.
    pub fn opposite(self) -> Face {
        Face {
            axis: self.axis,
            side: 1 - self.side,
        }
    }

    pub fn contains_corner(self, c: u8) -> bool {
        corner_offset(c)[self.axis] == self.side as usize
    }

    pub fn contains_edge(self, e: usize) -> bool {
        let (a, b) = EDGES[e];
        self.contains_corner(a) && self.contains_corner(b)
    }

    /// Corners counter-clockwise as seen from outside the cube.
    pub fn corners(self) -> [u8; 4] {
        let (u, v) = ((self.axis + 1) % 3, (self.axis + 2) % 3);
        // e_u × e_v = e_axis, so this (u, v) order is CCW about +axis
        let uv: [(u8, u8); 4] = if self.side == 1 {
            [(0, 0), (1, 0), (1, 1), (0, 1)]
        } else {
            [(0, 0), (0, 1), (1, 1), (1, 0)]
        };
        uv.map(|(a, b)| (self.side << self.axis) | (a << u) | (b << v))
    }

    /// Edge joining corners `i` and `i + 1` of [`corners`](Self::corners).
    pub fn edges(self) -> [usize; 4] {
        let c = self.corners();
        std::array::from_fn(|i| edge_between(c[i], c[(i + 1) % 4]))
    }

    /// Corner of the neighbouring cube that coincides with corner `c` of
    /// this face.
    pub fn mirror_corner(self, c: u8) -> u8 {
        c ^ (1 << self.axis)
    }

    /// Edge of the neighbouring cube that coincides with face edge `e`.
    pub fn mirror_edge(self, e: usize) -> usize {
        let (a, b) = EDGES[e];
        edge_between(self.mirror_corner(a), self.mirror_corner(b))
    }
}

fn edge_between(a: u8, b: u8) -> usize {
    EDGES
        .iter()
        .position(|&(p, q)| (p, q) == (a, b) || (p, q) == (b, a))
        .expect("corners are not adjacent")
}

fn inside(mask: u8, c: u8) -> bool {
    mask >> c & 1 == 1
}

/// Oriented iso-line segments on one face of configuration `mask`.
///
/// A segment `(a, b)` runs so that the inside corners are on the
/// `(b − a) × n` side, `n` being the outward face normal; with this rule the
/// segments of a cube chain head to tail into outward-facing loops.
pub fn face_segments(mask: u8, face: Face) -> Vec<(usize, usize)> {
    let corners = face.corners();
    let edges = face.edges();
    let crossing: Vec<usize> = (0..4)
        .filter(|&i| inside(mask, corners[i]) != inside(mask, corners[(i + 1) % 4]))
        .collect();
    let pairs: Vec<(usize, usize, u8)> = match crossing.len() {
        0 => vec![],
        2 => {
            let c = *corners.iter().find(|&&c| inside(mask, c)).unwrap();
            vec![(edges[crossing[0]], edges[crossing[1]], c)]
        }
        4 => (0..4)
            .filter(|&i| inside(mask, corners[i]))
            // face edge i - 1 ends at corner i and edge i starts there
            .map(|i| (edges[(i + 3) % 4], edges[i], corners[i]))
            .collect(),
        _ => unreachable!("a 4-cycle has an even number of sign changes"),
    };
    let n = face.normal();
    pairs
        .into_iter()
        .map(|(a, b, c)| {
            let (pa, pb) = (edge_mid(a), edge_mid(b));
            if (pb - pa).cross(&n).dot(&(corner_pos(c) - pa)) > 0.0 {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

/// Triangles (as local edge triples) for every configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseTable {
    cases: Vec<Vec<[u8; 3]>>,
}

impl CaseTable {
    /// The table used by extraction, built once on first use.
    pub fn shared() -> &'static CaseTable {
        static TABLE: OnceLock<CaseTable> = OnceLock::new();
        TABLE.get_or_init(CaseTable::build)
    }

    pub fn build() -> CaseTable {
        CaseTable {
            cases: (0..=255u8).map(build_case).collect(),
        }
    }

    /// Wraps arbitrary entries, e.g. to validate a hand-edited table.
    pub fn from_cases(cases: Vec<Vec<[u8; 3]>>) -> Option<CaseTable> {
        (cases.len() == 256).then_some(CaseTable { cases })
    }

    #[inline]
    pub fn triangles(&self, mask: u8) -> &[[u8; 3]] {
        &self.cases[mask as usize]
    }
}

fn build_case(mask: u8) -> Vec<[u8; 3]> {
    let mut next = [usize::MAX; 12];
    for face in Face::ALL {
        for (a, b) in face_segments(mask, face) {
            assert_eq!(next[a], usize::MAX, "mask {mask}: edge {a} leaves twice");
            next[a] = b;
        }
    }
    let mut seen = [false; 12];
    let mut tris = Vec::new();
    for start in 0..12 {
        if next[start] == usize::MAX || seen[start] {
            continue;
        }
        let mut lp = vec![];
        let mut e = start;
        while !seen[e] {
            seen[e] = true;
            lp.push(e);
            e = next[e];
        }
        assert_eq!(e, start, "mask {mask}: open chain");
        triangulate(&lp, &mut tris);
    }
    tris
}

fn share_face(a: usize, b: usize) -> bool {
    Face::ALL.iter().any(|f| f.contains_edge(a) && f.contains_edge(b))
}

/// Triangulates a loop without any diagonal joining two vertices on a common
/// cube face: such a diagonal could coincide with one chosen by the
/// neighbouring cube and give an edge four triangles. Among the admissible
/// triangulations the one with the shortest total diagonal length is used.
fn triangulate(lp: &[usize], out: &mut Vec<[u8; 3]>) {
    let k = lp.len();
    assert!(k >= 3);
    let allowed = |i: usize, j: usize| j == i + 1 || (i == 0 && j == k - 1) || !share_face(lp[i], lp[j]);
    let len = |i: usize, j: usize| {
        if j == i + 1 || (i == 0 && j == k - 1) {
            0.0
        } else {
            (edge_mid(lp[i]) - edge_mid(lp[j])).norm()
        }
    };
    // cost[i][j]: best triangulation of the sub-polygon i..=j
    let mut cost = vec![vec![f64::INFINITY; k]; k];
    let mut apex = vec![vec![usize::MAX; k]; k];
    for i in 0..k - 1 {
        cost[i][i + 1] = 0.0;
    }
    for gap in 2..k {
        for i in 0..k - gap {
            let j = i + gap;
            if !allowed(i, j) {
                continue;
            }
            for m in i + 1..j {
                let c = cost[i][m] + cost[m][j] + len(i, m) + len(m, j);
                if c < cost[i][j] - 1e-12 {
                    cost[i][j] = c;
                    apex[i][j] = m;
                }
            }
        }
    }
    assert!(
        cost[0][k - 1].is_finite(),
        "loop {lp:?} has no admissible triangulation"
    );
    let mut stack = vec![(0, k - 1)];
    while let Some((i, j)) = stack.pop() {
        if j <= i + 1 {
            continue;
        }
        let m = apex[i][j];
        out.push([lp[i] as u8, lp[m] as u8, lp[j] as u8]);
        stack.push((i, m));
        stack.push((m, j));
    }
}

/// Outcome of [`validate_case_table`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaseTableReport {
    /// Number of (configuration, face) pairs examined.
    pub faces_checked: usize,
    pub mismatches: Vec<String>,
}

impl CaseTableReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks that every configuration closes up internally and agrees with
/// each of its neighbours on the shared face.
///
/// Per configuration: internal triangle edges are used exactly twice in
/// opposite directions, and face edges exactly once. Per face: the crossed
/// edges referenced by triangles equal those implied by the four face
/// corners, and the directed face segments are the exact reverse of the
/// segments of every configuration that can sit on the other side.
pub fn validate_case_table(table: &CaseTable) -> CaseTableReport {
    let mut report = CaseTableReport::default();
    let segments: Vec<[Vec<(usize, usize)>; 6]> = (0..=255u8)
        .map(|m| Face::ALL.map(|f| table_face_segments(table, m, f)))
        .collect();

    for mask in 0..=255u8 {
        let tris = table.triangles(mask);
        if let Some(err) = closure_error(tris) {
            report.mismatches.push(format!("mask {mask}: {err}"));
        }
        for face in Face::ALL {
            report.faces_checked += 1;
            let implied: Vec<usize> = face
                .edges()
                .into_iter()
                .filter(|&e| {
                    let (a, b) = EDGES[e];
                    inside(mask, a) != inside(mask, b)
                })
                .collect();
            let mut used: Vec<usize> = tris
                .iter()
                .flatten()
                .map(|&e| e as usize)
                .filter(|&e| face.contains_edge(e))
                .collect();
            used.sort_unstable();
            used.dedup();
            let mut implied_sorted = implied.clone();
            implied_sorted.sort_unstable();
            if used != implied_sorted {
                report.mismatches.push(format!(
                    "mask {mask} face {face:?}: triangles cross {used:?}, corners imply {implied_sorted:?}"
                ));
            }

            let mut ours: Vec<(usize, usize)> = segments[mask as usize][face.index()].clone();
            ours.sort_unstable();
            let other = face.opposite();
            for rest in 0..16u8 {
                let neighbour = neighbour_mask(mask, face, rest);
                let mut theirs: Vec<(usize, usize)> = segments[neighbour as usize][other.index()]
                    .iter()
                    .map(|&(a, b)| (other.mirror_edge(b), other.mirror_edge(a)))
                    .collect();
                theirs.sort_unstable();
                if ours != theirs {
                    report.mismatches.push(format!(
                        "mask {mask} face {face:?} vs neighbour {neighbour}: segments {ours:?} != reversed {theirs:?}"
                    ));
                }
            }
        }
    }
    report
}

/// A configuration whose `face.opposite()` corners match the `face` corners
/// of `mask`; its four remaining corners are taken from the bits of `rest`.
fn neighbour_mask(mask: u8, face: Face, rest: u8) -> u8 {
    let other = face.opposite();
    let mut out = 0u8;
    let mut r = 0;
    for c in 0..8u8 {
        let bit = if other.contains_corner(c) {
            inside(mask, face.mirror_corner(c))
        } else {
            r += 1;
            rest >> (r - 1) & 1 == 1
        };
        out |= (bit as u8) << c;
    }
    out
}

/// Directed triangle edges lying entirely on `face`.
fn table_face_segments(table: &CaseTable, mask: u8, face: Face) -> Vec<(usize, usize)> {
    table
        .triangles(mask)
        .iter()
        .flat_map(|t| (0..3).map(move |i| (t[i] as usize, t[(i + 1) % 3] as usize)))
        .filter(|&(a, b)| face.contains_edge(a) && face.contains_edge(b))
        .collect()
}

fn closure_error(tris: &[[u8; 3]]) -> Option<String> {
    let mut directed = std::collections::BTreeMap::<(usize, usize), usize>::new();
    for t in tris {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Some(format!("degenerate triangle {t:?}"));
        }
        for i in 0..3 {
            *directed.entry((t[i] as usize, t[(i + 1) % 3] as usize)).or_default() += 1;
        }
    }
    for (&(a, b), &n) in &directed {
        let back = directed.get(&(b, a)).copied().unwrap_or(0);
        let on_face = share_face(a, b);
        match (on_face, n, back) {
            (true, 1, 0) => {}
            (false, 1, 1) => {}
            _ => return Some(format!("edge {a}->{b} used {n} times forward, {back} backward")),
        }
    }
    None
}
