use std::path::Path;

use nalgebra::Vector3;

use super::{parse_f64, tokens, GeometryError, TriangleMesh};

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

/// Binary when the byte length matches the triangle count in the preamble.
pub(super) fn looks_binary(bytes: &[u8]) -> bool {
    if bytes.len() < HEADER_LEN + 4 {
        return false;
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    bytes.len() == HEADER_LEN + 4 + RECORD_LEN * count
}

/// Every facet contributes three fresh vertices; nothing is welded here.
pub(super) fn parse_binary(path: &Path, bytes: &[u8]) -> Result<TriangleMesh, GeometryError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(GeometryError::parse(path, 0, "truncated binary STL preamble"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN + 4..];
    if body.len() != count * RECORD_LEN {
        return Err(GeometryError::parse(
            path,
            0,
            format!(
                "expected {count} facets ({} bytes), found {} bytes",
                count * RECORD_LEN,
                body.len()
            ),
        ));
    }
    let mut vertices = Vec::with_capacity(3 * count);
    for rec in body.chunks_exact(RECORD_LEN) {
        let f = |i: usize| f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap()) as f64;
        for v in 1..4 {
            vertices.push(Vector3::new(f(3 * v), f(3 * v + 1), f(3 * v + 2)));
        }
    }
    finish(vertices)
}

pub(super) fn parse_ascii(path: &Path, text: &str) -> Result<TriangleMesh, GeometryError> {
    let mut vertices = Vec::new();
    let mut in_loop = 0usize;
    let mut saw_solid = false;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let mut tok = tokens(line);
        match tok.next() {
            Some("solid") => saw_solid = true,
            Some("outer") => in_loop = 0,
            Some("vertex") => {
                let x = parse_f64(path, lineno, tok.next())?;
                let y = parse_f64(path, lineno, tok.next())?;
                let z = parse_f64(path, lineno, tok.next())?;
                vertices.push(Vector3::new(x, y, z));
                in_loop += 1;
            }
            Some("endloop") if in_loop != 3 => {
                return Err(GeometryError::parse(
                    path,
                    lineno,
                    format!("facet with {in_loop} vertices"),
                ));
            }
            Some("facet" | "endloop" | "endfacet" | "endsolid") | None => {}
            Some(other) => {
                return Err(GeometryError::parse(
                    path,
                    lineno,
                    format!("unexpected keyword {other:?}"),
                ));
            }
        }
    }
    if !saw_solid {
        return Err(GeometryError::parse(path, 1, "missing `solid` header"));
    }
    if vertices.len() % 3 != 0 {
        return Err(GeometryError::parse(path, 0, "vertex count is not a multiple of 3"));
    }
    finish(vertices)
}

fn finish(vertices: Vec<Vector3<f64>>) -> Result<TriangleMesh, GeometryError> {
    let triangles = (0..vertices.len() as u32 / 3)
        .map(|t| [3 * t, 3 * t + 1, 3 * t + 2])
        .collect();
    let mut mesh = TriangleMesh::new(vertices, triangles)?;
    mesh.compute_vertex_normals();
    Ok(mesh)
}

/// Serializes a mesh as binary STL: zeroed 80-byte header, facet count, then
/// per facet the recomputed unit normal, three vertices and a zero attribute.
pub fn encode_stl_binary(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * mesh.triangles.len());
    out.extend_from_slice(&[0u8; HEADER_LEN]);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let normal = mesh.face_cross(t).try_normalize(0.0).unwrap_or_else(Vector3::zeros);
        let mut put = |v: &Vector3<f64>| {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        };
        put(&normal);
        for &i in tri {
            put(&mesh.vertices[i as usize]);
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

/// Writes binary STL and returns the number of bytes written
/// (always `84 + 50 · triangles`).
pub fn write_stl_binary(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<u64, GeometryError> {
    let path = path.as_ref();
    if mesh.triangles.is_empty() {
        return Err(GeometryError::EmptyGeometry(path.to_path_buf()));
    }
    let bytes = encode_stl_binary(mesh);
    std::fs::write(path, &bytes).map_err(|e| GeometryError::io(path, e))?;
    Ok(bytes.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_FACET: &str = "solid t
  facet normal 0 0 1
    outer loop
      vertex 0 0 0
      vertex 1 0 0
      vertex 0 1 0
    endloop
  endfacet
endsolid t
";

    #[test]
    fn ascii_single_facet() {
        let m = parse_ascii(Path::new("a.stl"), ONE_FACET).unwrap();
        assert_eq!(m.vertices.len(), 3);
        assert_eq!(m.triangles.len(), 1);
    }

    #[test]
    fn ascii_rejects_short_facet() {
        let bad = ONE_FACET.replace("      vertex 0 1 0\n", "");
        assert!(parse_ascii(Path::new("a.stl"), &bad).is_err());
    }

    #[test]
    fn one_triangle_is_134_bytes() {
        let m = parse_ascii(Path::new("a.stl"), ONE_FACET).unwrap();
        let bytes = encode_stl_binary(&m);
        assert_eq!(bytes.len(), 134);
        assert!(looks_binary(&bytes));
        // facet normal (0,0,1) right after the count
        assert_eq!(&bytes[84..96], &[0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0x80, 0x3f]);
    }

    #[test]
    fn degenerate_facet_gets_zero_normal() {
        let m = TriangleMesh::new(vec![Vector3::x(); 3], vec![[0, 1, 2]]).unwrap();
        let bytes = encode_stl_binary(&m);
        assert!(bytes[84..96].iter().all(|&b| b == 0));
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let m = parse_ascii(Path::new("a.stl"), ONE_FACET).unwrap();
        let bytes = encode_stl_binary(&m);
        assert!(parse_binary(Path::new("b.stl"), &bytes[..120]).is_err());
    }
}
