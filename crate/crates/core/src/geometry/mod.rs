//! Input geometry and on-disk artifacts.
//!
//! Meshes come in as OBJ, STL (ASCII or binary) or ASCII PLY and are reduced
//! to a [`PointCloud`] of food sources. Outputs leave as binary STL and NPY.

mod mesh;
mod npy;
mod obj;
mod ply;
mod points;
mod stl;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use mesh::{mesh_to_points, thicken_points, PointCloud, TriangleMesh};
pub use npy::{read_npy, write_npy, write_npy_to};
pub use points::{load_points, write_points};
pub use stl::{encode_stl_binary, write_stl_binary};

/// Errors raised while reading or writing geometry and field files.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("{path}: parse error at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}: unsupported format")]
    UnsupportedFormat(PathBuf),
    #[error("{0}: geometry has no triangles")]
    EmptyGeometry(PathBuf),
    #[error("point cloud has no normals")]
    MissingNormals,
    #[error("thickening offset must be positive, got {0}")]
    InvalidOffset(f64),
    #[error("invalid geometry: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GeometryError {
    pub(crate) fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        GeometryError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        GeometryError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Mesh file formats understood by [`load_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    StlBinary,
    StlAscii,
    PlyAscii,
    /// Pick by extension; STL is sniffed for binary vs ASCII.
    Auto,
}

/// Loads a triangle mesh, validating indices and filling in vertex normals
/// when the file does not provide them.
pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh, GeometryError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| GeometryError::io(path, e))?;
    let format = match format {
        MeshFormat::Auto => detect_format(path, &bytes)?,
        f => f,
    };
    let mesh = match format {
        MeshFormat::Obj => obj::parse(path, text(path, &bytes)?)?,
        MeshFormat::StlBinary => stl::parse_binary(path, &bytes)?,
        MeshFormat::StlAscii => stl::parse_ascii(path, text(path, &bytes)?)?,
        MeshFormat::PlyAscii => ply::parse(path, text(path, &bytes)?)?,
        MeshFormat::Auto => unreachable!(),
    };
    if mesh.triangles.is_empty() {
        return Err(GeometryError::EmptyGeometry(path.to_path_buf()));
    }
    Ok(mesh)
}

fn text<'a>(path: &Path, bytes: &'a [u8]) -> Result<&'a str, GeometryError> {
    std::str::from_utf8(bytes).map_err(|_| GeometryError::parse(path, 0, "file is not valid UTF-8 text"))
}

fn detect_format(path: &Path, bytes: &[u8]) -> Result<MeshFormat, GeometryError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("obj") => Ok(MeshFormat::Obj),
        Some("ply") => Ok(MeshFormat::PlyAscii),
        Some("stl") => Ok(if stl::looks_binary(bytes) {
            MeshFormat::StlBinary
        } else {
            MeshFormat::StlAscii
        }),
        _ => Err(GeometryError::UnsupportedFormat(path.to_path_buf())),
    }
}

/// Splits a line into whitespace tokens after stripping a `#` comment.
pub(crate) fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split('#').next().unwrap_or("").split_whitespace()
}

pub(crate) fn parse_f64(path: &Path, line: usize, tok: Option<&str>) -> Result<f64, GeometryError> {
    let tok = tok.ok_or_else(|| GeometryError::parse(path, line, "missing number"))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| GeometryError::parse(path, line, format!("bad number {tok:?}")))?;
    if !v.is_finite() {
        return Err(GeometryError::parse(path, line, format!("non-finite number {tok:?}")));
    }
    Ok(v)
}
