//! Isomap: neighbour graph, geodesic distances, classical MDS and the
//! residual-variance dimensionality estimate.

pub mod graph;
pub mod linalg;
pub mod mds;

pub use graph::{geodesic_distances, knn_graph, knn_graph_from_distances, NeighborGraph};
pub use linalg::{DenseMatrix, SymmetricEigen};
pub use mds::{classical_mds, Embedding};

use crate::dataset::Configuration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsomapParams {
    pub k: usize,
    pub max_dimension: usize,
    pub threshold: f64,
}

impl Default for IsomapParams {
    fn default() -> Self {
        IsomapParams {
            k: 7,
            max_dimension: 10,
            threshold: 0.1,
        }
    }
}

impl IsomapParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k", "must be a positive integer"));
        }
        if self.max_dimension == 0 {
            return Err(Error::config("dmax", "must be a positive integer"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config(
                "threshold",
                format!("must lie in (0, 1), got {}", self.threshold),
            ));
        }
        Ok(())
    }
}

/// `1 - rho^2` between the upper triangles of the two matrices, clamped
/// to `[0, 1]`. Zero variance in either input counts as a perfect fit.
pub fn residual_variance(geodesic: &DenseMatrix, embedded: &DenseMatrix) -> Result<f64> {
    let n = geodesic.rows();
    if !geodesic.is_square() || embedded.rows() != n || embedded.cols() != n {
        return Err(Error::Manifold(format!(
            "residual variance needs two matching square matrices, got {}x{} and {}x{}",
            geodesic.rows(),
            geodesic.cols(),
            embedded.rows(),
            embedded.cols()
        )));
    }
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs == 0 {
        return Err(Error::Manifold("residual variance needs at least 2 points".into()));
    }
    let upper = |m: &DenseMatrix| -> Vec<f64> {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)])
            .collect()
    };
    let a = upper(geodesic);
    let b = upper(embedded);
    let mean_a = a.iter().sum::<f64>() / pairs as f64;
    let mean_b = b.iter().sum::<f64>() / pairs as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        log::warn!("zero-variance distances in residual variance; reporting 0");
        return Ok(0.0);
    }
    let rho = sab / (saa.sqrt() * sbb.sqrt());
    Ok((1.0 - rho * rho).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionEstimate {
    pub dimension: usize,
    /// False when no dimension met the threshold and `d_max` was returned.
    pub reached_threshold: bool,
}

/// Smallest `d` (1-based) with `r(d) <= threshold`, else the last `d`.
pub fn estimate_dimension(curve: &[f64], threshold: f64) -> Result<DimensionEstimate> {
    if curve.is_empty() {
        return Err(Error::Manifold("residual variance curve is empty".into()));
    }
    match curve.iter().position(|&r| r <= threshold) {
        Some(i) => Ok(DimensionEstimate {
            dimension: i + 1,
            reached_threshold: true,
        }),
        None => {
            log::warn!(
                "residual variance never fell to {threshold}; using d_max = {}",
                curve.len()
            );
            Ok(DimensionEstimate {
                dimension: curve.len(),
                reached_threshold: false,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport {
    pub geodesic: DenseMatrix,
    pub embedding: Embedding,
    /// `residuals[d - 1]` is r(d).
    pub residuals: Vec<f64>,
    pub dimension: usize,
    pub reached_threshold: bool,
    /// Neighbour count after connectivity enforcement.
    pub k: usize,
    pub threshold: f64,
}

impl EmbeddingReport {
    pub fn point_count(&self) -> usize {
        self.geodesic.rows()
    }

    pub fn max_dimension(&self) -> usize {
        self.residuals.len()
    }

    /// Coordinates of the `d`-dimensional embedding, points as rows.
    pub fn coordinates(&self, d: usize) -> DenseMatrix {
        self.embedding.truncated(d)
    }
}

/// Runs Isomap over points given as matrix rows.
pub fn isomap(points: &DenseMatrix, params: &IsomapParams) -> Result<EmbeddingReport> {
    params.validate()?;
    let n = points.rows();
    if n < 3 {
        return Err(Error::Manifold(format!("isomap needs at least 3 points, got {n}")));
    }
    let graph = knn_graph(points, params.k)?;
    let geodesic = geodesic_distances(&graph)?;
    let d_max = params.max_dimension.min(n - 1);
    if d_max < params.max_dimension {
        log::debug!("d_max capped at {d_max} for {n} points");
    }
    let embedding = classical_mds(&geodesic, d_max)?;
    let mut residuals = Vec::with_capacity(d_max);
    for d in 1..=d_max {
        let embedded = embedding.truncated(d).pairwise_row_distances();
        residuals.push(residual_variance(&geodesic, &embedded)?);
    }
    for (d, w) in residuals.windows(2).enumerate() {
        if w[1] > w[0] + 1e-9 {
            log::debug!("residual variance rises from d = {} to d = {}", d + 1, d + 2);
        }
    }
    let estimate = estimate_dimension(&residuals, params.threshold)?;
    Ok(EmbeddingReport {
        geodesic,
        embedding,
        residuals,
        dimension: estimate.dimension,
        reached_threshold: estimate.reached_threshold,
        k: graph.k,
        threshold: params.threshold,
    })
}

/// Stacks configurations into matrix rows (one 2N-vector per row).
pub fn configuration_matrix(frames: &[Configuration]) -> Result<DenseMatrix> {
    let rows: Vec<Vec<f64>> = frames.iter().map(Configuration::to_vector).collect();
    DenseMatrix::from_rows(&rows)
}

/// Isomap over a sequence of configurations.
pub fn isomap_configurations(frames: &[Configuration], params: &IsomapParams) -> Result<EmbeddingReport> {
    isomap(&configuration_matrix(frames)?, params)
}
