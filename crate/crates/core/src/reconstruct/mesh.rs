use std::collections::HashMap;
use std::fmt;

use nalgebra::Vector3;

use crate::geometry::TriangleMesh;

/// Indexed triangle mesh produced by extraction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IsoSurfaceMesh {
    /// Model-space positions.
    pub vertices: Vec<Vector3<f64>>,
    /// Counter-clockwise seen from the low-value side.
    pub triangles: Vec<[u32; 3]>,
}

impl IsoSurfaceMesh {
    /// True when nothing reached the iso value.
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Signed enclosed volume; positive when normals face outward.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn into_triangle_mesh(self) -> TriangleMesh {
        TriangleMesh::new(self.vertices, self.triangles).expect("extraction only emits valid indices")
    }

    /// Indexes a triangle soup (as loaded from STL) by merging vertices with
    /// bit-identical coordinates. Triangles that collapse onto a repeated
    /// vertex are dropped.
    pub fn weld(mesh: &TriangleMesh) -> IsoSurfaceMesh {
        let mut slot: HashMap<[u64; 3], u32> = HashMap::new();
        let mut vertices = Vec::new();
        let remap: Vec<u32> = mesh
            .vertices
            .iter()
            .map(|v| {
                // +0.0 and -0.0 are the same point
                let key = [v.x, v.y, v.z].map(|c| (c + 0.0).to_bits());
                *slot.entry(key).or_insert_with(|| {
                    vertices.push(*v);
                    vertices.len() as u32 - 1
                })
            })
            .collect();
        let triangles = mesh
            .triangles
            .iter()
            .map(|t| t.map(|i| remap[i as usize]))
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
        IsoSurfaceMesh { vertices, triangles }
    }
}

/// Structural counts of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub vertex_count: usize,
    pub triangle_count: usize,
    /// Distinct undirected edges.
    pub edge_count: usize,
    /// Edges not shared by exactly two triangles.
    pub boundary_edge_count: usize,
    /// V − E + F.
    pub euler_characteristic: i64,
    /// Components of the triangle adjacency graph; unused vertices are ignored.
    pub connected_component_count: usize,
    /// Model units squared.
    pub surface_area: f64,
}

impl fmt::Display for MeshStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices={}", self.vertex_count)?;
        writeln!(f, "triangles={}", self.triangle_count)?;
        writeln!(f, "edges={}", self.edge_count)?;
        writeln!(f, "boundary_edges={}", self.boundary_edge_count)?;
        writeln!(f, "euler={}", self.euler_characteristic)?;
        writeln!(f, "components={}", self.connected_component_count)?;
        write!(f, "area={}", self.surface_area)
    }
}

/// One edge violating the closed-and-oriented condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIssue {
    /// Endpoints, smaller index first.
    pub edge: (u32, u32),
    /// Triangles traversing it from the smaller to the larger index.
    pub forward: usize,
    pub backward: usize,
}

impl fmt::Display for EdgeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "edge {}-{}: {} forward, {} backward",
            self.edge.0, self.edge.1, self.forward, self.backward
        )
    }
}

/// Result of [`is_watertight`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatertightReport {
    pub watertight: bool,
    /// Total number of offending edges.
    pub offending_edges: usize,
    /// The first offenders, in edge order.
    pub issues: Vec<EdgeIssue>,
}

/// Offending edges listed in a [`WatertightReport`].
pub const MAX_REPORTED_ISSUES: usize = 100;

/// Undirected edge key plus direction, sorted so equal edges are adjacent.
fn sorted_edges(mesh: &IsoSurfaceMesh) -> Vec<(u64, bool)> {
    let mut edges: Vec<(u64, bool)> = mesh
        .triangles
        .iter()
        .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
        .map(|(a, b)| ((a.min(b) as u64) << 32 | a.max(b) as u64, a < b))
        .collect();
    edges.sort_unstable();
    edges
}

/// Groups of equal undirected edges as `(key, forward, backward)`.
fn edge_groups(edges: &[(u64, bool)]) -> impl Iterator<Item = (u64, usize, usize)> + '_ {
    edges.chunk_by(|a, b| a.0 == b.0).map(|g| {
        let forward = g.iter().filter(|e| e.1).count();
        (g[0].0, forward, g.len() - forward)
    })
}

pub fn mesh_stats(mesh: &IsoSurfaceMesh) -> MeshStats {
    let edges = sorted_edges(mesh);
    let (mut edge_count, mut boundary) = (0, 0);
    for (_, f, b) in edge_groups(&edges) {
        edge_count += 1;
        boundary += (f + b != 2) as usize;
    }

    let mut uf = UnionFind::new(mesh.vertices.len());
    for t in &mesh.triangles {
        uf.union(t[0] as usize, t[1] as usize);
        uf.union(t[1] as usize, t[2] as usize);
    }
    let mut used = vec![false; mesh.vertices.len()];
    mesh.triangles.iter().flatten().for_each(|&v| used[v as usize] = true);
    let components = (0..mesh.vertices.len()).filter(|&v| used[v] && uf.find(v) == v).count();

    let surface_area = mesh
        .triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
            0.5 * (b - a).cross(&(c - a)).norm()
        })
        .sum();

    let (v, e, f) = (mesh.vertices.len(), edge_count, mesh.triangles.len());
    MeshStats {
        vertex_count: v,
        triangle_count: f,
        edge_count: e,
        boundary_edge_count: boundary,
        euler_characteristic: v as i64 - e as i64 + f as i64,
        connected_component_count: components,
        surface_area,
    }
}

/// True iff every undirected edge is used by exactly two triangles, once in
/// each direction.
pub fn is_watertight(mesh: &IsoSurfaceMesh) -> WatertightReport {
    let edges = sorted_edges(mesh);
    let mut issues = Vec::new();
    let mut offending = 0;
    for (key, forward, backward) in edge_groups(&edges) {
        if forward == 1 && backward == 1 {
            continue;
        }
        offending += 1;
        if issues.len() < MAX_REPORTED_ISSUES {
            issues.push(EdgeIssue {
                edge: ((key >> 32) as u32, key as u32),
                forward,
                backward,
            });
        }
    }
    WatertightReport {
        watertight: offending == 0,
        offending_edges: offending,
        issues,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // the smaller root wins so the result is order independent
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
