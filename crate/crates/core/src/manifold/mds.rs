//! Classical (Torgerson) multidimensional scaling.

use super::linalg::{DenseMatrix, SymmetricEigen};
use crate::error::{Error, Result};

/// Relative cutoff below which an eigenvalue counts as zero.
const EIGEN_CUTOFF: f64 = 1e-12;

/// Spectral embedding of a distance matrix. Coordinates for any dimension
/// `d` are the first `d` columns of `coords`, so embeddings are nested.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// Points as rows, `max_dimension` columns.
    pub coords: DenseMatrix,
    /// Leading eigenvalues of the centred Gram matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Number of trailing axes that were padded with zeros.
    pub padded: usize,
}

impl Embedding {
    pub fn dimension(&self) -> usize {
        self.coords.cols()
    }

    /// The embedding restricted to its first `d` axes.
    pub fn truncated(&self, d: usize) -> DenseMatrix {
        self.coords.leading_columns(d)
    }
}

/// Double-centred Gram matrix `-1/2 J D^2 J`.
pub fn centered_gram(distances: &DenseMatrix) -> DenseMatrix {
    let n = distances.rows();
    let sq = DenseMatrix::from_fn(n, n, |i, j| distances[(i, j)] * distances[(i, j)]);
    let row_means: Vec<f64> = (0..n)
        .map(|i| sq.row(i).iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    // D^2 is symmetric, so column means equal row means
    let mut b = DenseMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    // remove rounding asymmetry before the eigensolver sees it
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = m;
            b[(j, i)] = m;
        }
    }
    b
}

/// Embeds the points of a symmetric, zero-diagonal distance matrix in `d`
/// dimensions.
pub fn classical_mds(distances: &DenseMatrix, d: usize) -> Result<Embedding> {
    let n = distances.rows();
    if !distances.is_square() {
        return Err(Error::Manifold(format!(
            "distance matrix must be square, got {}x{}",
            distances.rows(),
            distances.cols()
        )));
    }
    if n == 0 {
        return Err(Error::Manifold("distance matrix is empty".into()));
    }
    if d == 0 {
        return Err(Error::Manifold("embedding dimension must be positive".into()));
    }
    let scale = distances.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if distances.asymmetry() > 1e-9 * scale.max(1.0) {
        return Err(Error::Manifold("distance matrix is not symmetric".into()));
    }
    if (0..n).any(|i| distances[(i, i)] != 0.0) {
        return Err(Error::Manifold("distance matrix has a nonzero diagonal".into()));
    }

    let eigen = SymmetricEigen::new(&centered_gram(distances))?;
    let top = eigen.values.first().copied().unwrap_or(0.0).max(0.0);
    let positive = eigen
        .values
        .iter()
        .take_while(|&&v| v > EIGEN_CUTOFF * top && v > 0.0)
        .count();
    let padded = d.saturating_sub(positive);
    if padded > 0 {
        log::warn!(
            "requested {d} embedding axes but only {positive} positive eigenvalues; padding with zeros"
        );
    }
    let usable = d.min(positive);
    let mut coords = DenseMatrix::zeros(n, d);
    for k in 0..usable {
        let s = eigen.values[k].sqrt();
        for i in 0..n {
            coords[(i, k)] = s * eigen.vectors[(i, k)];
        }
    }
    let eigenvalues = (0..d)
        .map(|k| eigen.values.get(k).copied().unwrap_or(0.0))
        .collect();
    Ok(Embedding {
        coords,
        eigenvalues,
        padded,
    })
}
