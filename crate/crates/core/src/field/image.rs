use std::path::Path;
use std::str::FromStr;

use super::{field_stats, FieldError, ScalarField3D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(FieldError::InvalidArgument(format!(
                "axis must be x, y or z, got {s:?}"
            ))),
        }
    }
}

/// Renders one axis-aligned slice as binary PGM (P5, maxval 255).
///
/// Values are divided by the field-wide 99th percentile and clamped, so a
/// few hot voxels do not wash out the rest. Image columns follow the first
/// remaining axis and rows the second: a z slice is `nx` wide and `ny` tall.
pub fn encode_slice_pgm(field: &ScalarField3D, axis: Axis, index: usize) -> Result<Vec<u8>, FieldError> {
    let [nx, ny, nz] = field.dims();
    let (len, width, height) = match axis {
        Axis::X => (nx, ny, nz),
        Axis::Y => (ny, nx, nz),
        Axis::Z => (nz, nx, ny),
    };
    if index >= len {
        return Err(FieldError::IndexOutOfRange { index, len });
    }
    let stats = field_stats(field);
    let norm = if stats.p99 > 0.0 {
        stats.p99
    } else if stats.max > 0.0 {
        stats.max
    } else {
        1.0
    };

    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for row in 0..height {
        for col in 0..width {
            let v = match axis {
                Axis::X => field.get(index, col, row),
                Axis::Y => field.get(col, index, row),
                Axis::Z => field.get(col, row, index),
            };
            out.push(((v / norm).clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    Ok(out)
}

pub fn slice_to_image(
    field: &ScalarField3D,
    axis: Axis,
    index: usize,
    path: impl AsRef<Path>,
) -> Result<(), FieldError> {
    let bytes = encode_slice_pgm(field, axis, index)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixels(bytes: &[u8]) -> &[u8] {
        // skip the three header lines
        let mut seen = 0;
        let start = bytes.iter().position(|&b| {
            seen += (b == b'\n') as usize;
            seen == 3
        });
        &bytes[start.unwrap() + 1..]
    }

    #[test]
    fn zero_field_is_black() {
        let f = ScalarField3D::zeros([4, 5, 6]);
        let img = encode_slice_pgm(&f, Axis::Y, 2).unwrap();
        assert!(img.starts_with(b"P5\n4 6\n255\n"));
        assert!(pixels(&img).iter().all(|&p| p == 0));
        assert_eq!(pixels(&img).len(), 24);
    }

    #[test]
    fn p99_pixel_saturates() {
        let f = ScalarField3D::from_fn([10, 10, 10], |i, j, k| (i + j + k) as f32);
        let img = encode_slice_pgm(&f, Axis::X, 9).unwrap();
        assert!(pixels(&img).contains(&255));
    }

    #[test]
    fn header_for_64_cubed() {
        let f = ScalarField3D::zeros([64, 64, 64]);
        let img = encode_slice_pgm(&f, Axis::Z, 32).unwrap();
        assert!(img.starts_with(b"P5\n64 64\n255\n"));
        assert_eq!(img.len(), "P5\n64 64\n255\n".len() + 64 * 64);
    }

    #[test]
    fn index_out_of_range() {
        let f = ScalarField3D::zeros([4, 4, 4]);
        assert!(matches!(
            encode_slice_pgm(&f, Axis::Z, 4),
            Err(FieldError::IndexOutOfRange { index: 4, len: 4 })
        ));
    }

    #[test]
    fn sparse_field_falls_back_to_max() {
        let mut f = ScalarField3D::zeros([10, 10, 10]);
        f.set(3, 3, 3, 2.0);
        let img = encode_slice_pgm(&f, Axis::Z, 3).unwrap();
        assert_eq!(pixels(&img)[3 * 10 + 3], 255);
    }
}
