//! Static 2-D kd-tree for nearest-neighbour and fixed-radius queries.
//!
//! Distances are compared as squared Euclidean norms computed exactly as
//! [`Vec2::dist_sq`] does, so results agree bit-for-bit with a brute-force
//! scan. Ties resolve to the lowest point index.

use crate::geom::Vec2;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec2>,
    // permutation of point indices; leaves own contiguous ranges
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

impl Neighbor {
    fn beats(&self, dist_sq: f64, index: usize) -> bool {
        dist_sq < self.dist_sq || (dist_sq == self.dist_sq && index < self.index)
    }
}

fn coord(p: Vec2, axis: usize) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn new(points: &[Vec2]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len(), 0);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = depth % 2;
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coord(points[a], axis).total_cmp(&coord(points[b], axis))
        });
        let value = coord(self.points[self.order[mid]], axis);
        self.nodes.push(Node::Split {
            axis,
            value,
            left: 0,
            right: 0,
        });
        let left = self.build(start, mid, depth + 1);
        let right = self.build(mid, end, depth + 1);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id]
        {
            *l = left;
            *r = right;
        }
        id
    }

    /// Closest point to `query`; `None` only for an empty tree.
    pub fn nearest(&self, query: Vec2) -> Option<Neighbor> {
        self.nearest_filtered(query, usize::MAX)
    }

    /// Closest point other than the one with index `exclude`.
    pub fn nearest_excluding(&self, query: Vec2, exclude: usize) -> Option<Neighbor> {
        self.nearest_filtered(query, exclude)
    }

    fn nearest_filtered(&self, query: Vec2, exclude: usize) -> Option<Neighbor> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: f64::INFINITY,
        };
        self.nearest_rec(0, query, exclude, &mut best);
        (best.index != usize::MAX).then_some(best)
    }

    fn nearest_rec(&self, node: usize, query: Vec2, exclude: usize, best: &mut Neighbor) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if i == exclude {
                        continue;
                    }
                    let d = self.points[i].dist_sq(query);
                    if best.beats(d, i) {
                        *best = Neighbor { index: i, dist_sq: d };
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = coord(query, axis) - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, query, exclude, best);
                // `<=` keeps equal-distance candidates with lower indices reachable
                if delta * delta <= best.dist_sq {
                    self.nearest_rec(far, query, exclude, best);
                }
            }
        }
    }

    /// Indices of all points with squared distance `<= radius²`, ascending.
    pub fn within(&self, query: Vec2, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.within_rec(0, query, radius * radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_rec(&self, node: usize, query: Vec2, r2: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                out.extend(
                    self.order[start..end]
                        .iter()
                        .copied()
                        .filter(|&i| self.points[i].dist_sq(query) <= r2),
                );
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = coord(query, axis) - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.within_rec(near, query, r2, out);
                if delta * delta <= r2 {
                    self.within_rec(far, query, r2, out);
                }
            }
        }
    }
}
