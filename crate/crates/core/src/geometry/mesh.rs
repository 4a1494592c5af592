use std::collections::HashMap;

use nalgebra::Vector3;

use super::GeometryError;

/// Indexed triangle mesh in model units (millimeters).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    /// Unit per-vertex normals, parallel to `vertices`.
    pub normals: Option<Vec<Vector3<f64>>>,
}

impl TriangleMesh {
    /// Builds a mesh after checking every index against the vertex count.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(GeometryError::Invalid(format!(
                "triangle {t:?} references a vertex beyond {n}"
            )));
        }
        Ok(TriangleMesh {
            vertices,
            triangles,
            normals: None,
        })
    }

    /// Unnormalized face normal; its length is twice the triangle area.
    pub fn face_cross(&self, t: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i as usize]);
        (b - a).cross(&(c - a))
    }

    pub fn degenerate_triangle_count(&self) -> usize {
        (0..self.triangles.len())
            .filter(|&t| self.face_cross(t).norm_squared() == 0.0)
            .count()
    }

    /// Area-weighted average of incident face normals. Vertices with no
    /// usable incident face fall back to +z so every normal stays unit length.
    pub fn compute_vertex_normals(&mut self) {
        let mut acc = vec![Vector3::zeros(); self.vertices.len()];
        for t in 0..self.triangles.len() {
            let n = self.face_cross(t);
            for &i in &self.triangles[t] {
                acc[i as usize] += n;
            }
        }
        let normals = acc
            .into_iter()
            .map(|n| n.try_normalize(0.0).unwrap_or_else(Vector3::z))
            .collect();
        self.normals = Some(normals);
    }

    pub(crate) fn ensure_normals(&mut self) {
        if self.normals.is_none() {
            self.compute_vertex_normals();
        }
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| 0.5 * self.face_cross(t).norm()).sum()
    }
}

/// Food-source positions with optional normals and per-point weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vector3<f64>>,
    pub normals: Option<Vec<Vector3<f64>>>,
    pub weights: Vec<f64>,
}

impl PointCloud {
    /// Unit-weight cloud without normals.
    pub fn new(points: Vec<Vector3<f64>>) -> Self {
        let weights = vec![1.0; points.len()];
        PointCloud {
            points,
            normals: None,
            weights,
        }
    }

    pub fn with_normals(mut self, normals: Vec<Vector3<f64>>) -> Result<Self, GeometryError> {
        if normals.len() != self.points.len() {
            return Err(GeometryError::Invalid(format!(
                "{} normals for {} points",
                normals.len(),
                self.points.len()
            )));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, GeometryError> {
        if weights.len() != self.points.len() {
            return Err(GeometryError::Invalid(format!(
                "{} weights for {} points",
                weights.len(),
                self.points.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(GeometryError::Invalid(format!("negative weight {w}")));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounds `(min, max)`, or `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Vector3<f64>, Vector3<f64>)> {
        let first = *self.points.first()?;
        Some(
            self.points
                .iter()
                .fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))),
        )
    }
}

/// Reduces a mesh to one point per distinct vertex.
///
/// Vertices are merged when they quantize to the same cell of a grid with
/// spacing `dedup_epsilon`; the first vertex seen keeps its position and the
/// merged normals are averaged. An epsilon of zero disables merging.
pub fn mesh_to_points(mesh: &TriangleMesh, dedup_epsilon: f64) -> PointCloud {
    let mut mesh = mesh.clone();
    mesh.ensure_normals();
    let normals = mesh.normals.as_deref().unwrap_or_default();

    if !(dedup_epsilon > 0.0) {
        return PointCloud::new(mesh.vertices.clone())
            .with_normals(normals.to_vec())
            .expect("parallel normals");
    }

    let mut slot: HashMap<[i64; 3], usize> = HashMap::new();
    let mut points = Vec::new();
    let mut sums: Vec<Vector3<f64>> = Vec::new();
    for (v, n) in mesh.vertices.iter().zip(normals) {
        let key = v.map(|c| (c / dedup_epsilon).round() as i64);
        let key = [key.x, key.y, key.z];
        match slot.get(&key) {
            Some(&i) => sums[i] += n,
            None => {
                slot.insert(key, points.len());
                points.push(*v);
                sums.push(*n);
            }
        }
    }
    let normals = sums
        .into_iter()
        .map(|n| n.try_normalize(1e-12).unwrap_or_else(Vector3::z))
        .collect();
    PointCloud::new(points).with_normals(normals).expect("parallel normals")
}

/// Offsets every point along its normal in both directions, doubling the
/// cloud: point `i` becomes `p + offset·n` at `2i` and `p − offset·n` at `2i + 1`.
pub fn thicken_points(cloud: &PointCloud, offset: f64) -> Result<PointCloud, GeometryError> {
    if !(offset > 0.0) || !offset.is_finite() {
        return Err(GeometryError::InvalidOffset(offset));
    }
    let normals = cloud.normals.as_ref().ok_or(GeometryError::MissingNormals)?;
    let n = cloud.len();
    let mut points = Vec::with_capacity(2 * n);
    let mut out_normals = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(2 * n);
    for ((p, nrm), w) in cloud.points.iter().zip(normals).zip(&cloud.weights) {
        points.push(p + nrm * offset);
        points.push(p - nrm * offset);
        out_normals.extend([*nrm, *nrm]);
        weights.extend([*w, *w]);
    }
    Ok(PointCloud {
        points,
        normals: Some(out_normals),
        weights,
    })
}
