//! Group speed, polarization, connectivity and the coarse observable X.
//!
//! `X = ξ1·speed + ξ2·P + (1 − ξ1 − ξ2)·C/N` collapses each step into a
//! single number in `[0, 1]`; `Δ(t1, t2) = |X(t1) − X(t2)|` is the metric
//! used to tell behavioural phases apart.

use std::str::FromStr;

use crate::dataset::{Configuration, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mapping::{CorrespondenceMap, Tracking};
use crate::spatial::KdTree;

/// How the connectivity radius ε is derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsilonMode {
    /// Mean distance over every unordered agent pair and every frame.
    #[default]
    AllPairs,
    /// Mean over agents and frames of the distance to the nearest other agent.
    NearestNeighbor,
}

impl FromStr for EpsilonMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all_pairs" | "all-pairs" => Ok(EpsilonMode::AllPairs),
            "nearest_neighbor" | "nearest-neighbor" => Ok(EpsilonMode::NearestNeighbor),
            other => Err(Error::config(
                "epsilon_mode",
                format!("expected `all_pairs` or `nearest_neighbor`, got `{other}`"),
            )),
        }
    }
}

impl EpsilonMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EpsilonMode::AllPairs => "all_pairs",
            EpsilonMode::NearestNeighbor => "nearest_neighbor",
        }
    }
}

/// Weights of the speed and polarization terms; connectivity gets the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableWeights {
    pub speed: f64,
    pub polarization: f64,
}

impl Default for ObservableWeights {
    fn default() -> Self {
        ObservableWeights {
            speed: 1.0 / 3.0,
            polarization: 1.0 / 3.0,
        }
    }
}

impl ObservableWeights {
    pub fn new(speed: f64, polarization: f64) -> Result<Self> {
        let w = ObservableWeights { speed, polarization };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed >= 0.0) {
            return Err(Error::config("xi1", format!("must be >= 0, got {}", self.speed)));
        }
        if !(self.polarization >= 0.0) {
            return Err(Error::config("xi2", format!("must be >= 0, got {}", self.polarization)));
        }
        // small slack so 1/3 + 1/3 + 1/3 style inputs are accepted
        if self.speed + self.polarization > 1.0 + 1e-12 {
            return Err(Error::config(
                "xi2",
                format!("xi1 + xi2 must not exceed 1, got {}", self.speed + self.polarization),
            ));
        }
        Ok(())
    }

    pub fn structure(&self) -> f64 {
        (1.0 - self.speed - self.polarization).max(0.0)
    }
}

/// Normalization of the group speed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SpeedScale {
    /// Divide by the largest group speed in the series (needs the whole run).
    #[default]
    SeriesMax,
    /// Divide by a caller-supplied constant; values above it clamp to 1.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSeries {
    pub values: Vec<f64>,
    /// Set when every group velocity is zero and the series is all zeros.
    pub degenerate: bool,
}

/// `‖μ_V(t)‖` scaled into `[0, 1]`.
pub fn group_speed_series(maps: &[CorrespondenceMap], scale: SpeedScale) -> SpeedSeries {
    let raw: Vec<f64> = maps.iter().map(|m| m.group_mean.norm()).collect();
    let denom = match scale {
        SpeedScale::SeriesMax => raw.iter().copied().fold(0.0, f64::max),
        SpeedScale::Fixed(c) => c,
    };
    if !(denom > 0.0) {
        log::warn!("group speed is zero at every step; normalized speed set to 0");
        return SpeedSeries {
            values: vec![0.0; raw.len()],
            degenerate: true,
        };
    }
    SpeedSeries {
        values: raw.iter().map(|&s| (s / denom).min(1.0)).collect(),
        degenerate: false,
    }
}

/// Length of the mean unit heading over agents that actually moved.
///
/// Headings come from `atan2` of each velocity. Zero velocities carry no
/// heading and are left out of both the sum and the count; if nobody moved
/// the result is 0.
pub fn polarization(velocities: &[Vec2]) -> f64 {
    let mut sum = Vec2::ZERO;
    let mut count = 0usize;
    for v in velocities.iter().filter(|v| !v.is_zero()) {
        sum += Vec2::from_angle(v.angle());
        count += 1;
    }
    if count == 0 {
        log::warn!("all velocities are zero; polarization set to 0");
        return 0.0;
    }
    (sum.norm() / count as f64).min(1.0)
}

/// Interaction radius ε used to build the connectivity graph.
pub fn interaction_epsilon(dataset: &TrajectoryDataset, mode: EpsilonMode) -> Result<f64> {
    epsilon_from_frames(dataset.frames(), mode)
}

pub fn epsilon_from_frames(frames: &[Configuration], mode: EpsilonMode) -> Result<f64> {
    let n = frames.first().map_or(0, Configuration::len);
    if n < 2 {
        return Err(Error::Observables(format!(
            "interaction radius needs at least 2 agents, found {n}"
        )));
    }
    let per_frame = |frame: &Configuration| -> f64 {
        let p = frame.positions();
        match mode {
            EpsilonMode::AllPairs => {
                let mut sum = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        sum += p[i].dist(p[j]);
                    }
                }
                sum / (n * (n - 1) / 2) as f64
            }
            EpsilonMode::NearestNeighbor => {
                let tree = KdTree::new(p);
                let sum: f64 = (0..n)
                    .map(|i| tree.nearest_excluding(p[i], i).expect("n >= 2").dist_sq.sqrt())
                    .sum();
                sum / n as f64
            }
        }
    };
    Ok(frames.iter().map(per_frame).sum::<f64>() / frames.len() as f64)
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }
}

/// Number of connected components of the graph linking agents at distance `<= epsilon`.
pub fn connected_components(config: &Configuration, epsilon: f64) -> usize {
    let p = config.positions();
    let tree = KdTree::new(p);
    let mut uf = UnionFind::new(p.len());
    for (i, &q) in p.iter().enumerate() {
        for j in tree.within(q, epsilon) {
            if j > i {
                uf.union(i, j);
            }
        }
    }
    uf.set_count()
}

/// `ξ1·speed + ξ2·P + (1 − ξ1 − ξ2)·C/N`.
pub fn coarse_observable(speed: f64, polarization: f64, components: usize, agents: usize, weights: ObservableWeights) -> Result<f64> {
    weights.validate()?;
    if agents == 0 {
        return Err(Error::Observables("agent count must be positive".into()));
    }
    let x = weights.speed * speed
        + weights.polarization * polarization
        + weights.structure() * components as f64 / agents as f64;
    Ok(x.clamp(0.0, 1.0))
}

/// Per-step observables; entry `k` describes step `t = k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub speed: Vec<f64>,
    pub polarization: Vec<f64>,
    pub components: Vec<usize>,
    pub x: Vec<f64>,
    pub weights: ObservableWeights,
    pub epsilon: f64,
    pub agent_count: usize,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObservableParams {
    pub weights: ObservableWeights,
    pub epsilon_mode: EpsilonMode,
    pub speed_scale: SpeedScale,
}

/// Computes the observable series for every step of `tracking`. Polarization
/// and components are evaluated at the source frame of each step; the last
/// frame has no outgoing velocity and is dropped.
pub fn observe(dataset: &TrajectoryDataset, tracking: &Tracking, params: &ObservableParams) -> Result<ObservableSeries> {
    params.weights.validate()?;
    let epsilon = interaction_epsilon(dataset, params.epsilon_mode)?;
    let n = dataset.agent_count();
    let speed = group_speed_series(&tracking.maps, params.speed_scale).values;
    let polarization: Vec<f64> = tracking.maps.iter().map(|m| polarization(&m.velocities)).collect();
    let components: Vec<usize> = tracking
        .maps
        .iter()
        .map(|m| connected_components(&dataset.frames()[m.step - 1], epsilon))
        .collect();
    let x = (0..tracking.maps.len())
        .map(|k| coarse_observable(speed[k], polarization[k], components[k], n, params.weights))
        .collect::<Result<Vec<_>>>()?;
    Ok(ObservableSeries {
        speed,
        polarization,
        components,
        x,
        weights: params.weights,
        epsilon,
        agent_count: n,
    })
}

/// Dense symmetric matrix of `|X(t1) − X(t2)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.size.max(1))
    }
}

pub fn distance_matrix(x: &[f64]) -> Result<DistanceMatrix> {
    if x.is_empty() {
        return Err(Error::Observables("distance matrix of an empty series".into()));
    }
    let n = x.len();
    let mut data = Vec::with_capacity(n * n);
    for &a in x {
        data.extend(x.iter().map(|&b| (a - b).abs()));
    }
    Ok(DistanceMatrix { size: n, data })
}
