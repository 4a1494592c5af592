//! NPY v1.0 for 3-D little-endian `f32` fields.
//!
//! The writer emits exactly what numpy itself would: the dictionary
//! `{'descr': '<f4', 'fortran_order': False, 'shape': (nx, ny, nz), }`
//! padded with spaces and a trailing newline so the preamble length is a
//! multiple of 64. Data follows in C order with x slowest.

use std::io::Write;
use std::path::Path;

use super::GeometryError;
use crate::field::ScalarField3D;

const MAGIC: &[u8; 6] = b"\x93NUMPY";

fn header(dims: [usize; 3]) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<f4', 'fortran_order': False, 'shape': ({}, {}, {}), }}",
        dims[0], dims[1], dims[2]
    );
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    let pad = (64 - unpadded % 64) % 64;
    let header_len = dict.len() + pad + 1;

    let mut out = Vec::with_capacity(unpadded + pad);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.resize(out.len() + pad, b' ');
    out.push(b'\n');
    out
}

/// Streams a field as NPY into any writer; returns bytes written.
pub fn write_npy_to<W: Write>(field: &ScalarField3D, mut w: W) -> std::io::Result<u64> {
    let head = header(field.dims());
    w.write_all(&head)?;
    let mut buf = Vec::with_capacity(4 * 4096);
    for chunk in field.data().chunks(4096) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok((head.len() + 4 * field.len()) as u64)
}

/// Writes a field to `path` as NPY and returns the file size in bytes.
pub fn write_npy(field: &ScalarField3D, path: impl AsRef<Path>) -> Result<u64, GeometryError> {
    let path = path.as_ref();
    if field.is_empty() {
        return Err(GeometryError::Invalid("cannot write an empty field".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| GeometryError::io(path, e))?;
    write_npy_to(field, std::io::BufWriter::new(file)).map_err(|e| GeometryError::io(path, e))
}

/// Reads a 3-D `<f4` or `<f8` C-order array. Spacing and origin are not
/// stored in NPY, so the returned field has unit voxels at the origin.
pub fn read_npy(path: impl AsRef<Path>) -> Result<ScalarField3D, GeometryError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| GeometryError::io(path, e))?;
    let bad = |msg: &str| GeometryError::parse(path, 0, msg.to_string());

    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(bad("missing NPY magic"));
    }
    let (header_len, start) = match bytes[6] {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 if bytes.len() >= 12 => (u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize, 12),
        _ => return Err(bad("unsupported NPY version")),
    };
    let dict = bytes
        .get(start..start + header_len)
        .and_then(|h| std::str::from_utf8(h).ok())
        .ok_or_else(|| bad("truncated NPY header"))?;

    let descr = dict_value(dict, "descr").ok_or_else(|| bad("header lacks descr"))?;
    let width = match descr.trim_matches(|c| c == '\'' || c == '"') {
        "<f4" => 4,
        "<f8" => 8,
        other => return Err(bad(&format!("unsupported dtype {other}"))),
    };
    if dict_value(dict, "fortran_order").map(str::trim) != Some("False") {
        return Err(bad("only C-order arrays are supported"));
    }
    let shape = dict_value(dict, "shape").ok_or_else(|| bad("header lacks shape"))?;
    let dims: Vec<usize> = shape
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| bad("bad shape"))?;
    let dims: [usize; 3] = dims.try_into().map_err(|_| bad("expected a 3-D array"))?;

    let body = &bytes[start + header_len..];
    let n = dims.iter().product::<usize>();
    if body.len() != n * width {
        return Err(bad("data length does not match shape"));
    }
    let data: Vec<f32> = if width == 4 {
        body.chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    } else {
        body.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()) as f32)
            .collect()
    };
    ScalarField3D::from_data(dims, data).map_err(|e| bad(&e.to_string()))
}

/// Raw text of `'key': value` in a numpy header dict. Handles the tuple
/// in `shape` by stopping at the closing parenthesis.
fn dict_value<'a>(dict: &'a str, key: &str) -> Option<&'a str> {
    let at = dict.find(&format!("'{key}'"))?;
    let rest = dict[at + key.len() + 2..].trim_start().strip_prefix(':')?.trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')')? + 1
    } else {
        rest.find([',', '}'])?
    };
    Some(&rest[..end])
}
