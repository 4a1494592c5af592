use std::path::Path;

use nalgebra::Vector3;

use super::{parse_f64, tokens, GeometryError, TriangleMesh};

/// Parses `v`, `vn` and `f` records; everything else is ignored. Polygons are
/// fan-triangulated and negative (relative) indices are resolved.
pub(super) fn parse(path: &Path, text: &str) -> Result<TriangleMesh, GeometryError> {
    let mut vertices = Vec::new();
    let mut file_normals = Vec::new();
    let mut corner_normals: Vec<(usize, usize)> = Vec::new();
    let mut all_corners_have_normals = true;
    let mut triangles = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let mut tok = tokens(line);
        match tok.next() {
            Some("v") => {
                let x = parse_f64(path, lineno, tok.next())?;
                let y = parse_f64(path, lineno, tok.next())?;
                let z = parse_f64(path, lineno, tok.next())?;
                vertices.push(Vector3::new(x, y, z));
            }
            Some("vn") => {
                let x = parse_f64(path, lineno, tok.next())?;
                let y = parse_f64(path, lineno, tok.next())?;
                let z = parse_f64(path, lineno, tok.next())?;
                file_normals.push(Vector3::new(x, y, z));
            }
            Some("f") => {
                let mut face = Vec::new();
                for corner in tok {
                    let mut parts = corner.split('/');
                    let v = resolve(path, lineno, parts.next(), vertices.len())?;
                    let _texcoord = parts.next();
                    match parts.next().filter(|s| !s.is_empty()) {
                        Some(n) => {
                            let n = resolve(path, lineno, Some(n), file_normals.len())?;
                            corner_normals.push((v, n));
                        }
                        None => all_corners_have_normals = false,
                    }
                    face.push(v as u32);
                }
                if face.len() < 3 {
                    return Err(GeometryError::parse(path, lineno, "face with fewer than 3 vertices"));
                }
                for i in 1..face.len() - 1 {
                    triangles.push([face[0], face[i], face[i + 1]]);
                }
            }
            _ => {}
        }
    }

    let mut mesh = TriangleMesh::new(vertices, triangles)?;
    if all_corners_have_normals && !corner_normals.is_empty() {
        let mut acc = vec![Vector3::zeros(); mesh.vertices.len()];
        for (v, n) in corner_normals {
            acc[v] += file_normals[n];
        }
        // vertices without a usable file normal force a full recompute
        let normals: Option<Vec<_>> = acc.iter().map(|n| n.try_normalize(1e-12)).collect();
        mesh.normals = normals;
    }
    mesh.ensure_normals();
    Ok(mesh)
}

fn resolve(path: &Path, line: usize, tok: Option<&str>, count: usize) -> Result<usize, GeometryError> {
    let tok = tok
        .filter(|s| !s.is_empty())
        .ok_or_else(|| GeometryError::parse(path, line, "missing index"))?;
    let i: i64 = tok
        .parse()
        .map_err(|_| GeometryError::parse(path, line, format!("bad index {tok:?}")))?;
    let idx = match i {
        i if i > 0 => i - 1,
        i if i < 0 => count as i64 + i,
        _ => -1,
    };
    if idx < 0 || idx as usize >= count {
        return Err(GeometryError::parse(path, line, format!("index {i} out of range")));
    }
    Ok(idx as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(s: &str) -> Result<TriangleMesh, GeometryError> {
        parse(Path::new("t.obj"), s)
    }

    #[test]
    fn single_triangle() {
        let m = parse_str("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(m.vertices.len(), 3);
        assert_eq!(m.triangles, vec![[0, 1, 2]]);
        for n in m.normals.unwrap() {
            assert_eq!(n, Vector3::z());
        }
    }

    #[test]
    fn quad_with_slashes_and_negative_indices() {
        let m = parse_str("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf -4//1 -3//1 -2//1 -1//1\n").unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn file_normals_are_used() {
        let m = parse_str("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 -1\nf 1//1 2//1 3//1\n").unwrap();
        assert_eq!(m.normals.unwrap()[0], -Vector3::z());
    }

    #[test]
    fn out_of_range_index_is_parse_error() {
        let err = parse_str("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n").unwrap_err();
        assert!(matches!(err, GeometryError::Parse { line: 4, .. }));
    }

    #[test]
    fn malformed_number() {
        assert!(parse_str("v 0 zero 0\n").is_err());
    }
}
