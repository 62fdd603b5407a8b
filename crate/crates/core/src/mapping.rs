//! Frame-to-frame agent correspondence from positions alone.
//!
//! Every agent at frame `t` is first paired with its nearest neighbour at
//! frame `t + 1`. Where several sources claim the same target only the one
//! with the smallest displacement keeps it; those conflict-free pairs form
//! the bijective domain. The remaining sources are then matched, in index
//! order, to the free target whose displacement is closest to the mean
//! velocity of the bijective domain. The union of both stages is a
//! permutation of the agents.

use rayon::prelude::*;

use crate::dataset::{Configuration, TrajectoryDataset};
use crate::error::Result;
use crate::geom::{Boundary, Vec2};
use crate::spatial::KdTree;

/// How displacements between frames are measured.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// Minimum-image displacement, for data folded into a periodic box.
    MinImage(Boundary),
}

impl Metric {
    pub fn displacement(&self, from: Vec2, to: Vec2) -> Vec2 {
        match self {
            Metric::Euclidean => to - from,
            Metric::MinImage(b) => b.min_image(from, to),
        }
    }

    fn dist_sq(&self, a: Vec2, b: Vec2) -> f64 {
        match self {
            Metric::Euclidean => a.dist_sq(b),
            Metric::MinImage(boundary) => boundary.min_image_dist_sq(a, b),
        }
    }
}

/// Nearest target for one source agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub target: usize,
    pub dist_sq: f64,
}

/// For each agent in `from`, its nearest agent in `to` (ties: lowest index).
pub fn nearest_neighbor_map(from: &Configuration, to: &Configuration, metric: Metric) -> Vec<Candidate> {
    let tree = KdTree::new(to.positions());
    from.positions()
        .iter()
        .map(|&p| match metric {
            Metric::Euclidean => {
                let nn = tree.nearest(p).expect("target frame is non-empty");
                Candidate {
                    target: nn.index,
                    dist_sq: nn.dist_sq,
                }
            }
            Metric::MinImage(b) => {
                let (w, h) = (2.0 * b.half_width, 2.0 * b.half_height);
                let mut best: Option<Candidate> = None;
                for sx in [-w, 0.0, w] {
                    for sy in [-h, 0.0, h] {
                        let nn = tree.nearest(p + Vec2::new(sx, sy)).expect("non-empty");
                        let d = metric.dist_sq(p, to.get(nn.index));
                        let better = best.is_none_or(|c| d < c.dist_sq || (d == c.dist_sq && nn.index < c.target));
                        if better {
                            best = Some(Candidate {
                                target: nn.index,
                                dist_sq: d,
                            });
                        }
                    }
                }
                best.expect("nine queries ran")
            }
        })
        .collect()
}

/// Conflict-free part of the nearest-neighbour map.
#[derive(Debug, Clone, PartialEq)]
pub struct BijectiveDomain {
    /// `pairs[i] = Some(j)` when source `i` keeps its candidate `j`.
    pub pairs: Vec<Option<usize>>,
}

impl BijectiveDomain {
    pub fn contains(&self, i: usize) -> bool {
        self.pairs[i].is_some()
    }

    pub fn size(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_some()).count()
    }

    pub fn unmatched_sources(&self) -> Vec<usize> {
        (0..self.pairs.len()).filter(|&i| self.pairs[i].is_none()).collect()
    }

    /// Targets not claimed by any retained pair, ascending.
    pub fn unmatched_targets(&self, target_count: usize) -> Vec<usize> {
        let mut claimed = vec![false; target_count];
        for &j in self.pairs.iter().flatten() {
            claimed[j] = true;
        }
        (0..target_count).filter(|&j| !claimed[j]).collect()
    }
}

/// Keeps, for every claimed target, the source with the smallest
/// displacement (ties: lowest source index).
pub fn extract_bijective_domain(candidates: &[Candidate]) -> BijectiveDomain {
    let n = candidates.len();
    let mut winner: Vec<Option<usize>> = vec![None; n];
    for (i, c) in candidates.iter().enumerate() {
        let slot = &mut winner[c.target];
        match *slot {
            Some(w) if candidates[w].dist_sq <= c.dist_sq => {}
            _ => *slot = Some(i),
        }
    }
    let mut pairs = vec![None; n];
    for (j, w) in winner.iter().enumerate() {
        if let Some(i) = *w {
            pairs[i] = Some(j);
        }
    }
    BijectiveDomain { pairs }
}

/// Greedy matching of leftover sources to leftover targets: in ascending
/// source order, each source takes the free target whose displacement is
/// closest to `mean_velocity` (ties: lowest target index).
pub fn residual_match(
    from: &Configuration,
    to: &Configuration,
    sources: &[usize],
    targets: &[usize],
    mean_velocity: Vec2,
    metric: Metric,
) -> Vec<(usize, usize)> {
    debug_assert_eq!(sources.len(), targets.len());
    let mut free: Vec<usize> = targets.to_vec();
    let mut out = Vec::with_capacity(sources.len());
    let mut sorted = sources.to_vec();
    sorted.sort_unstable();
    for i in sorted {
        let a = from.get(i);
        let (slot, _) = free
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let d = metric.displacement(a, to.get(j)) - mean_velocity;
                (k, (d.norm_sq(), j))
            })
            .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0).then(x.1 .1.cmp(&y.1 .1)))
            .expect("as many free targets as sources");
        out.push((i, free.remove(slot)));
    }
    out
}

/// Bijective correspondence between frames `t` and `t + 1` with velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMap {
    /// 1-based index of the source frame.
    pub step: usize,
    /// `permutation[i] = j`: agent `i` at `t` is agent `j` at `t + 1`.
    pub permutation: Vec<usize>,
    /// Membership in the bijective (nearest-neighbour) domain.
    pub in_domain: Vec<bool>,
    pub velocities: Vec<Vec2>,
    /// Mean velocity over the bijective domain.
    pub domain_mean: Vec2,
    /// Mean velocity over all agents.
    pub group_mean: Vec2,
}

impl CorrespondenceMap {
    pub fn domain_size(&self) -> usize {
        self.in_domain.iter().filter(|&&b| b).count()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.permutation.len()];
        for &j in &self.permutation {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return false;
            }
        }
        true
    }
}

fn mean(vs: impl ExactSizeIterator<Item = Vec2>) -> Option<Vec2> {
    let n = vs.len();
    (n > 0).then(|| vs.fold(Vec2::ZERO, |acc, v| acc + v) / n as f64)
}

/// Full correspondence for one pair of frames.
///
/// `fallback` replaces the domain mean velocity when the bijective domain is
/// empty, which only happens for empty frames.
pub fn correspond(
    from: &Configuration,
    to: &Configuration,
    step: usize,
    metric: Metric,
    fallback: Vec2,
) -> CorrespondenceMap {
    let n = from.len();
    let candidates = nearest_neighbor_map(from, to, metric);
    let domain = extract_bijective_domain(&candidates);

    let mut permutation = vec![usize::MAX; n];
    let mut velocities = vec![Vec2::ZERO; n];
    for (i, j) in domain.pairs.iter().enumerate() {
        if let Some(j) = *j {
            permutation[i] = j;
            velocities[i] = metric.displacement(from.get(i), to.get(j));
        }
    }
    let domain_mean = mean(
        (0..n)
            .filter(|&i| domain.contains(i))
            .map(|i| velocities[i])
            .collect::<Vec<_>>()
            .into_iter(),
    )
    .unwrap_or(fallback);

    let sources = domain.unmatched_sources();
    let targets = domain.unmatched_targets(n);
    for (i, j) in residual_match(from, to, &sources, &targets, domain_mean, metric) {
        permutation[i] = j;
        velocities[i] = metric.displacement(from.get(i), to.get(j));
    }
    let group_mean = mean(velocities.iter().copied()).unwrap_or(Vec2::ZERO);

    CorrespondenceMap {
        step,
        permutation,
        in_domain: domain.pairs.iter().map(Option::is_some).collect(),
        velocities,
        domain_mean,
        group_mean,
    }
}

/// Correspondences for every consecutive frame pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracking {
    pub maps: Vec<CorrespondenceMap>,
    /// Steps whose bijective domain covers fewer than half the agents.
    pub low_confidence: Vec<usize>,
}

impl Tracking {
    /// Agent orderings that follow identities through the chained
    /// permutations: `orders[t][k]` is the index, within frame `t`, of the
    /// agent that sits at index `k` in the first frame.
    pub fn identity_orders(&self) -> Vec<Vec<usize>> {
        let n = self.maps.first().map_or(0, |m| m.permutation.len());
        let mut current: Vec<usize> = (0..n).collect();
        let mut orders = vec![current.clone()];
        for m in &self.maps {
            current = current.iter().map(|&i| m.permutation[i]).collect();
            orders.push(current.clone());
        }
        orders
    }

    /// Frames reordered so agent identities stay in fixed slots.
    pub fn canonical_frames(&self, dataset: &TrajectoryDataset) -> Vec<Configuration> {
        if self.maps.is_empty() {
            return dataset.frames().to_vec();
        }
        dataset
            .frames()
            .iter()
            .zip(self.identity_orders())
            .map(|(frame, order)| frame.reordered(&order))
            .collect()
    }
}

/// Runs [`correspond`] on every consecutive frame pair (in parallel).
pub fn track(dataset: &TrajectoryDataset, metric: Metric) -> Result<Tracking> {
    dataset.require_frames(2)?;
    let frames = dataset.frames();
    let mut maps: Vec<CorrespondenceMap> = (0..frames.len() - 1)
        .into_par_iter()
        .map(|k| correspond(&frames[k], &frames[k + 1], k + 1, metric, Vec2::ZERO))
        .collect();

    // the domain is never empty for non-empty frames, so this only matters in
    // degenerate input; keep the documented fallback to the previous group mean
    for k in 1..maps.len() {
        if maps[k].domain_size() == 0 {
            let prev = maps[k - 1].group_mean;
            maps[k] = correspond(&frames[k], &frames[k + 1], k + 1, metric, prev);
        }
    }

    let n = dataset.agent_count();
    let low_confidence: Vec<usize> = maps
        .iter()
        .filter(|m| 2 * m.domain_size() < n)
        .map(|m| m.step)
        .collect();
    for &t in &low_confidence {
        log::warn!("step {t}: bijective domain covers under half the agents; matching is low-confidence");
    }
    Ok(Tracking {
        maps,
        low_confidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pts: &[(f64, f64)]) -> Configuration {
        Configuration::new(pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    #[test]
    fn identical_frames_map_to_self() {
        let a = cfg(&[(0.0, 0.0), (1.0, 0.5), (-2.0, 3.0)]);
        let c = nearest_neighbor_map(&a, &a, Metric::Euclidean);
        assert_eq!(c.iter().map(|c| c.target).collect::<Vec<_>>(), vec![0, 1, 2]);
        let m = correspond(&a, &a, 1, Metric::Euclidean, Vec2::ZERO);
        assert_eq!(m.permutation, vec![0, 1, 2]);
        assert!(m.velocities.iter().all(|v| v.is_zero()));
        assert!(m.group_mean.is_zero());
    }

    #[test]
    fn running_two_agent_example() {
        let a = cfg(&[(0.0, 0.0), (0.5, 0.0)]);
        let b = cfg(&[(0.2, 0.0), (0.9, 0.0)]);
        let c = nearest_neighbor_map(&a, &b, Metric::Euclidean);
        assert_eq!(c[0].target, 0);
        assert_eq!(c[1].target, 0);

        let d = extract_bijective_domain(&c);
        assert_eq!(d.pairs, vec![Some(0), None]);
        assert_eq!(d.unmatched_sources(), vec![1]);
        assert_eq!(d.unmatched_targets(2), vec![1]);

        let h = residual_match(&a, &b, &[1], &[1], Vec2::new(0.2, 0.0), Metric::Euclidean);
        assert_eq!(h, vec![(1, 1)]);

        let m = correspond(&a, &b, 1, Metric::Euclidean, Vec2::ZERO);
        assert_eq!(m.permutation, vec![0, 1]);
        assert_eq!(m.in_domain, vec![true, false]);
        assert!((m.velocities[0].x - 0.2).abs() < 1e-15);
        assert!((m.velocities[1].x - 0.4).abs() < 1e-15);
        assert!((m.group_mean.x - 0.3).abs() < 1e-15);
        assert!((m.domain_mean.x - 0.2).abs() < 1e-15);
    }

    #[test]
    fn all_sources_share_one_target() {
        let a = cfg(&[(0.0, 0.0), (0.1, 0.0), (0.2, 0.0), (0.3, 0.0)]);
        let b = cfg(&[(0.15, 0.0), (10.0, 0.0), (11.0, 0.0), (12.0, 0.0)]);
        let d = extract_bijective_domain(&nearest_neighbor_map(&a, &b, Metric::Euclidean));
        assert_eq!(d.size(), 1);
        // 0.1 and 0.2 tie at distance 0.05; the lower source index wins
        assert_eq!(d.pairs[1], Some(0));
        let m = correspond(&a, &b, 1, Metric::Euclidean, Vec2::ZERO);
        assert!(m.is_permutation());
    }

    #[test]
    fn no_conflicts_gives_total_domain() {
        let a = cfg(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let b = cfg(&[(0.1, 0.0), (1.1, 0.0), (2.1, 0.0)]);
        let d = extract_bijective_domain(&nearest_neighbor_map(&a, &b, Metric::Euclidean));
        assert_eq!(d.pairs, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn single_leftover_is_forced() {
        let a = cfg(&[(0.0, 0.0)]);
        let b = cfg(&[(5.0, -3.0)]);
        let h = residual_match(&a, &b, &[0], &[0], Vec2::new(-100.0, 100.0), Metric::Euclidean);
        assert_eq!(h, vec![(0, 0)]);
    }

    #[test]
    fn rigid_translation() {
        let a = cfg(&[(0.0, 0.0), (0.5, 0.3), (1.0, -0.4), (-0.6, 0.2)]);
        let shift = Vec2::new(0.1, 0.0);
        let b = Configuration::new(a.positions().iter().map(|&p| p + shift).collect());
        let m = correspond(&a, &b, 1, Metric::Euclidean, Vec2::ZERO);
        assert_eq!(m.permutation, vec![0, 1, 2, 3]);
        for v in &m.velocities {
            assert!((*v - shift).norm() < 1e-15);
        }
    }

    #[test]
    fn residual_match_recovers_translation() {
        // no bijective domain at all: every pairing comes from the mean velocity
        let a = cfg(&[(0.0, 0.0), (0.4, 0.1), (0.9, -0.2), (1.3, 0.3)]);
        let mu = Vec2::new(0.35, 0.05);
        let order = [2usize, 0, 3, 1];
        let b = Configuration::new(order.iter().map(|&i| a.get(i) + mu).collect());
        let h = residual_match(&a, &b, &[3, 1, 0, 2], &[0, 1, 2, 3], mu, Metric::Euclidean);
        assert_eq!(h, vec![(0, 1), (1, 3), (2, 0), (3, 2)]);
    }

    #[test]
    fn collisions_resolved_like_brute_force() {
        // two far-apart clusters, each with one nearest-neighbour conflict:
        // agent 1 (resp. 3) lands closer to agent 0's (resp. 2's) target
        let a = cfg(&[(0.0, 0.0), (0.25, 0.0), (5.0, 0.0), (5.25, 0.0), (9.0, 3.0)]);
        let mu = Vec2::new(0.3, 0.0);
        let b = Configuration::new(a.positions().iter().map(|&p| p + mu).collect());
        let m = correspond(&a, &b, 1, Metric::Euclidean, Vec2::ZERO);
        assert_eq!(m.in_domain, vec![false, true, false, true, true]);
        assert!(m.is_permutation());
        assert_eq!(m.permutation, brute_force_assignment(&a, &b, m.domain_mean, &m));
        // leftovers stay inside their own cluster
        assert_eq!(m.permutation, vec![1, 0, 3, 2, 4]);
    }

    // optimal assignment of the leftover agents minimising Σ‖d_ij − μ‖
    fn brute_force_assignment(a: &Configuration, b: &Configuration, mu: Vec2, m: &CorrespondenceMap) -> Vec<usize> {
        let sources: Vec<usize> = (0..a.len()).filter(|&i| !m.in_domain[i]).collect();
        let mut targets: Vec<usize> = (0..b.len())
            .filter(|j| !(0..a.len()).any(|i| m.in_domain[i] && m.permutation[i] == *j))
            .collect();
        let mut best = (f64::INFINITY, Vec::new());
        permute(&mut targets, 0, &mut |perm| {
            let cost: f64 = sources
                .iter()
                .zip(perm)
                .map(|(&i, &j)| (b.get(j) - a.get(i) - mu).norm())
                .sum();
            if cost < best.0 {
                best = (cost, perm.to_vec());
            }
        });
        let mut out = m.permutation.clone();
        for (&i, &j) in sources.iter().zip(&best.1) {
            out[i] = j;
        }
        out
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn min_image_matching_across_edge() {
        let b = Boundary::new(5.0, 5.0);
        let from = cfg(&[(4.95, 0.0), (0.0, 0.0)]);
        let to = cfg(&[(0.05, 0.0), (-4.95, 0.0)]);
        let m = correspond(&from, &to, 1, Metric::MinImage(b), Vec2::ZERO);
        assert_eq!(m.permutation, vec![1, 0]);
        assert!((m.velocities[0].x - 0.1).abs() < 1e-12);
        assert!((m.velocities[1].x - 0.05).abs() < 1e-12);
    }

    #[test]
    fn identity_orders_chain_permutations() {
        let f0 = cfg(&[(0.0, 0.0), (3.0, 0.0)]);
        let f1 = cfg(&[(3.1, 0.0), (0.1, 0.0)]);
        let f2 = cfg(&[(0.2, 0.0), (3.2, 0.0)]);
        let ds = TrajectoryDataset::new(vec![f0, f1, f2], None, false).unwrap();
        let tr = track(&ds, Metric::Euclidean).unwrap();
        assert_eq!(tr.identity_orders(), vec![vec![0, 1], vec![1, 0], vec![0, 1]]);
        let canon = tr.canonical_frames(&ds);
        assert_eq!(canon[1].get(0), Vec2::new(0.1, 0.0));
        assert!(tr.low_confidence.is_empty());
    }

    #[test]
    fn track_needs_two_frames() {
        let ds = TrajectoryDataset::new(vec![cfg(&[(0.0, 0.0)])], None, false).unwrap();
        assert!(track(&ds, Metric::Euclidean).is_err());
    }
}
