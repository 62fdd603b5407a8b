//! Binary greyscale PGM (P5) export of the Δ matrix.

use std::path::Path;

use crate::error::{Error, Result};
use crate::observables::DistanceMatrix;

/// Encodes Δ as an 8-bit P5 image: row `t1`, column `t2`, black for 0 and
/// white for the largest entry. An all-zero matrix yields a black image.
pub fn encode_distance_image(delta: &DistanceMatrix) -> Vec<u8> {
    let n = delta.size();
    let max = delta.max();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.reserve(n * n);
    for row in delta.rows() {
        out.extend(row.iter().map(|&v| {
            if max > 0.0 {
                (255.0 * v / max).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        }));
    }
    out
}

pub fn save_distance_image(delta: &DistanceMatrix, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, encode_distance_image(delta)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::distance_matrix;

    fn pixels(bytes: &[u8], n: usize) -> &[u8] {
        &bytes[bytes.len() - n * n..]
    }

    #[test]
    fn zero_matrix_is_black() {
        let img = encode_distance_image(&distance_matrix(&[0.3, 0.3, 0.3]).unwrap());
        assert!(img.starts_with(b"P5\n3 3\n255\n"));
        assert!(pixels(&img, 3).iter().all(|&p| p == 0));
    }

    #[test]
    fn maximum_is_white_and_symmetric() {
        let img = encode_distance_image(&distance_matrix(&[0.0, 0.25, 1.0]).unwrap());
        let px = pixels(&img, 3);
        assert_eq!(px[2], 255);
        assert_eq!(px[1], 64);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(px[i * 3 + j], px[j * 3 + i]);
            }
        }
    }
}
