//! k-nearest-neighbour graphs and all-pairs geodesic distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::linalg::DenseMatrix;
use crate::error::{Error, Result};
use crate::observables::UnionFind;

/// Weighted undirected graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    /// Neighbour count actually used (may exceed the requested one).
    pub k: usize,
}

impl NeighborGraph {
    /// Builds a graph from an explicit undirected edge list.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b, w) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::Manifold(format!("edge ({a}, {b}) out of range")));
            }
            if !(w >= 0.0) {
                return Err(Error::Manifold(format!("edge ({a}, {b}) has invalid weight {w}")));
            }
            if a != b {
                adjacency[a].push((b, w));
                adjacency[b].push((a, w));
            }
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            list.dedup_by_key(|e| e.0);
        }
        Ok(NeighborGraph { adjacency, k: 0 })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.vertex_count());
        for (a, list) in self.adjacency.iter().enumerate() {
            for &(b, _) in list {
                uf.union(a, b);
            }
        }
        uf.set_count()
    }
}

/// Symmetrized k-NN graph over the rows of a distance matrix. If the graph
/// is disconnected, `k` grows until it is connected.
pub fn knn_graph_from_distances(distances: &DenseMatrix, k: usize) -> Result<NeighborGraph> {
    let n = distances.rows();
    if n < 2 {
        return Err(Error::Manifold(format!(
            "neighbour graph needs at least 2 points, got {n}"
        )));
    }
    if k == 0 {
        return Err(Error::Manifold("neighbour count k must be positive".into()));
    }
    // per-vertex neighbour ranking, nearest first (ties: lowest index)
    let ranked: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| distances[(i, a)].total_cmp(&distances[(i, b)]).then(a.cmp(&b)));
            others
        })
        .collect();

    let mut k = k.min(n - 1);
    loop {
        let mut edges = Vec::with_capacity(n * k);
        for (i, list) in ranked.iter().enumerate() {
            for &j in &list[..k] {
                edges.push((i, j, distances[(i, j)]));
            }
        }
        let mut graph = NeighborGraph::from_edges(n, &edges)?;
        graph.k = k;
        if graph.component_count() == 1 {
            return Ok(graph);
        }
        // k = n - 1 is the complete graph, which is always connected
        k += 1;
        log::debug!("neighbour graph disconnected; retrying with k = {k}");
    }
}

/// Symmetrized k-NN graph over points given as rows.
pub fn knn_graph(points: &DenseMatrix, k: usize) -> Result<NeighborGraph> {
    knn_graph_from_distances(&points.pairwise_row_distances(), k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    vertex: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path lengths (Dijkstra).
pub fn shortest_paths_from(graph: &NeighborGraph, source: usize) -> Vec<f64> {
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        vertex: source,
    });
    while let Some(Frontier { dist: d, vertex: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in graph.neighbors(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier { dist: nd, vertex: v });
            }
        }
    }
    dist
}

/// All-pairs geodesic distances. The result is exactly symmetric: entry
/// `(i, j)` with `i < j` comes from the search rooted at `i`.
pub fn geodesic_distances(graph: &NeighborGraph) -> Result<DenseMatrix> {
    let n = graph.vertex_count();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| shortest_paths_from(graph, s))
        .collect();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = rows[i][j];
            if !d.is_finite() {
                return Err(Error::Manifold(format!(
                    "graph is disconnected: no path between {i} and {j}"
                )));
            }
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_points(xs: &[f64]) -> DenseMatrix {
        DenseMatrix::from_rows(&xs.iter().map(|&x| vec![x, 0.0]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn collinear_k1_is_path() {
        let g = knn_graph(&line_points(&[0.0, 1.0, 2.0]), 1).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.k, 1);
        let geo = geodesic_distances(&g).unwrap();
        assert_eq!(geo[(0, 2)], 2.0);
    }

    #[test]
    fn separated_clusters_force_larger_k() {
        let g = knn_graph(&line_points(&[0.0, 0.1, 0.2, 10.0, 10.1, 10.2]), 1).unwrap();
        assert_eq!(g.component_count(), 1);
        assert!(g.k > 1);
    }

    #[test]
    fn large_k_is_complete() {
        let pts = line_points(&[0.0, 1.5, 2.0, 7.0]);
        let g = knn_graph(&pts, 10).unwrap();
        assert_eq!(g.edge_count(), 6);
        let geo = geodesic_distances(&g).unwrap();
        let direct = pts.pairwise_row_distances();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(geo[(i, j)], direct[(i, j)]);
            }
        }
    }

    #[test]
    fn too_few_points() {
        assert!(knn_graph(&line_points(&[1.0]), 1).is_err());
        assert!(knn_graph(&line_points(&[1.0, 2.0]), 0).is_err());
    }

    #[test]
    fn disconnected_geodesics_error() {
        let g = NeighborGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert!(geodesic_distances(&g).is_err());
    }
}
