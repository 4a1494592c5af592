use std::path::Path;

use nalgebra::Vector3;

use super::{parse_f64, tokens, GeometryError, TriangleMesh};

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

/// ASCII PLY with `vertex` (x, y, z and optional nx, ny, nz) and `face`
/// (vertex index list) elements. Other elements are skipped.
pub(super) fn parse(path: &Path, text: &str) -> Result<TriangleMesh, GeometryError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(GeometryError::parse(path, 1, "missing `ply` magic")),
    }

    let mut elements: Vec<Element> = Vec::new();
    loop {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| GeometryError::parse(path, 0, "header ends without end_header"))?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    return Err(GeometryError::UnsupportedFormat(path.to_path_buf()));
                }
            }
            Some("element") => {
                let name = tok.next().unwrap_or_default().to_string();
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| GeometryError::parse(path, lineno, "bad element count"))?;
                elements.push(Element {
                    name,
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| GeometryError::parse(path, lineno, "property before element"))?;
                // `property <type> <name>` or `property list <ct> <it> <name>`
                let name = line.split_whitespace().last().unwrap_or_default();
                el.properties.push(name.to_string());
            }
            Some("end_header") => break,
            Some("comment" | "obj_info") | None => {}
            Some(other) => {
                return Err(GeometryError::parse(
                    path,
                    lineno,
                    format!("unexpected header keyword {other:?}"),
                ))
            }
        }
    }

    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut triangles = Vec::new();
    for el in &elements {
        let col = |name: &str| el.properties.iter().position(|p| p == name);
        for _ in 0..el.count {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| GeometryError::parse(path, 0, format!("too few {} records", el.name)))?;
            match el.name.as_str() {
                "vertex" => {
                    let vals: Vec<&str> = tokens(line).collect();
                    let get = |name: &str| parse_f64(path, lineno, col(name).and_then(|i| vals.get(i).copied()));
                    vertices.push(Vector3::new(get("x")?, get("y")?, get("z")?));
                    if col("nx").is_some() {
                        normals.push(Vector3::new(get("nx")?, get("ny")?, get("nz")?));
                    }
                }
                "face" => {
                    let mut tok = tokens(line);
                    let n: usize = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| GeometryError::parse(path, lineno, "bad face list length"))?;
                    let idx: Vec<u32> = tok
                        .take(n)
                        .map(|t| t.parse::<u32>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| GeometryError::parse(path, lineno, "bad face index"))?;
                    if idx.len() != n || n < 3 {
                        return Err(GeometryError::parse(path, lineno, "face needs at least 3 indices"));
                    }
                    if let Some(i) = idx.iter().find(|&&i| i as usize >= vertex_count(&elements)) {
                        return Err(GeometryError::parse(path, lineno, format!("index {i} out of range")));
                    }
                    for k in 1..n - 1 {
                        triangles.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut mesh = TriangleMesh::new(vertices, triangles).map_err(|e| GeometryError::parse(path, 0, e.to_string()))?;
    if !normals.is_empty() {
        let unit: Option<Vec<_>> = normals.iter().map(|n| n.try_normalize(1e-12)).collect();
        mesh.normals = unit;
    }
    mesh.ensure_normals();
    Ok(mesh)
}

fn vertex_count(elements: &[Element]) -> usize {
    elements.iter().find(|e| e.name == "vertex").map_or(0, |e| e.count)
}
