//! Augmented Vicsek simulation.
//!
//! Each agent's heading relaxes to the mean of its neighbours' rotated unit
//! headings plus uniform noise, and its position advances by
//! `s · R · (cos θ, sin θ) · δt`. Speeds, noise bounds and rotations follow a
//! per-step [`StepSchedule`], which is how the scenario builders in
//! [`scenario`] impose speed, coordination and structure changes.

pub mod scenario;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Configuration, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::geom::{Boundary, Rotation2, Vec2};
use crate::spatial::KdTree;

pub use scenario::{NoiseSwitch, Scenario, SigmoidArgument, SpeedSwitch, SplitRejoin};

/// Radius of the disk the agents start in.
pub const INITIAL_DISK_RADIUS: f64 = 2.0;

/// Generator behind every simulation; seeded from the 64-bit run seed.
pub type SimRng = ChaCha8Rng;

/// Schedule entries for a single step `t -> t + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    /// Group speed before per-agent jitter.
    pub base_speed: f64,
    /// Heading noise is drawn from `U[noise_low, noise_high]`.
    pub noise_low: f64,
    pub noise_high: f64,
    /// Rotation angle applied with `+` sign to the first agent group and `-`
    /// to the second. Zero means identity rotations.
    pub turn_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub agent_count: usize,
    pub step_count: usize,
    pub half_width: f64,
    pub half_height: f64,
    pub time_step: f64,
    /// Per-agent speed jitter is drawn from `U[-speed_jitter, speed_jitter]`.
    pub speed_jitter: f64,
    pub interaction_radius: f64,
    pub seed: u64,
    /// Entry `t - 1` drives step `t` for `t = 1..T-1`.
    pub schedule: Vec<StepSchedule>,
    /// Agents `0..split_at` rotate by `+turn_angle`, the rest by `-turn_angle`.
    pub split_at: usize,
    /// Known phase boundaries (first step of each new phase), if any.
    pub phase_boundaries: Vec<usize>,
}

impl SimParams {
    pub fn boundary(&self) -> Boundary {
        Boundary::new(self.half_width, self.half_height)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Simulation(msg));
        if !(self.half_width > 0.0 && self.half_height > 0.0) {
            return fail(format!(
                "domain half-extents must be positive, got L={} H={}",
                self.half_width, self.half_height
            ));
        }
        if !(self.time_step > 0.0) {
            return fail(format!("time step must be positive, got {}", self.time_step));
        }
        if self.agent_count < 1 {
            return fail("need at least one agent".into());
        }
        if self.step_count < 2 {
            return fail(format!("need at least 2 steps, got {}", self.step_count));
        }
        if !(self.interaction_radius > 0.0) {
            return fail(format!(
                "interaction radius must be positive, got {}",
                self.interaction_radius
            ));
        }
        if !(self.speed_jitter >= 0.0) {
            return fail(format!("speed jitter must be non-negative, got {}", self.speed_jitter));
        }
        if self.schedule.len() != self.step_count - 1 {
            return fail(format!(
                "schedule has {} entries, expected {}",
                self.schedule.len(),
                self.step_count - 1
            ));
        }
        if self.split_at > self.agent_count {
            return fail(format!("split index {} exceeds agent count", self.split_at));
        }
        for (k, s) in self.schedule.iter().enumerate() {
            let t = k + 1;
            if !(s.noise_low <= s.noise_high) {
                return fail(format!(
                    "step {t}: noise bounds out of order ({} > {})",
                    s.noise_low, s.noise_high
                ));
            }
            if !(s.base_speed - self.speed_jitter >= 0.0) {
                return fail(format!(
                    "step {t}: speed {} minus jitter {} is negative",
                    s.base_speed, self.speed_jitter
                ));
            }
            if !s.turn_angle.is_finite() {
                return fail(format!("step {t}: rotation angle is not finite"));
            }
        }
        Ok(())
    }

    /// Schedule for step `t` (1-based, `1 <= t < T`).
    pub fn at(&self, t: usize) -> &StepSchedule {
        &self.schedule[t - 1]
    }

    /// Rotation applied to `agent` (0-based) during step `t`.
    pub fn rotation(&self, agent: usize, t: usize) -> Rotation2 {
        let gamma = self.at(t).turn_angle;
        if gamma == 0.0 {
            Rotation2::IDENTITY
        } else if agent < self.split_at {
            Rotation2::from_angle(gamma)
        } else {
            Rotation2::from_angle(-gamma)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    /// Position folded into the periodic box.
    pub position: Vec2,
    /// Accumulated position without periodic folding.
    pub unwrapped: Vec2,
    pub heading: f64,
}

/// Per-agent random draws for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepNoise {
    pub speed: f64,
    pub heading: f64,
}

/// Index sets `N_i` of agents within `radius` of each agent, self included.
///
/// With a boundary the minimum-image distance is used.
pub fn neighbors_within(positions: &[Vec2], radius: f64, boundary: Option<Boundary>) -> Vec<Vec<usize>> {
    let tree = KdTree::new(positions);
    let r2 = radius * radius;
    positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut set = match boundary {
                None => tree.within(p, radius),
                Some(b) => {
                    // query every periodic image, then filter on the exact
                    // minimum-image distance so the relation stays symmetric
                    let reach = radius * (1.0 + 1e-9) + 1e-12;
                    let (w, h) = (2.0 * b.half_width, 2.0 * b.half_height);
                    let mut found = Vec::new();
                    for sx in [-w, 0.0, w] {
                        for sy in [-h, 0.0, h] {
                            found.extend(tree.within(p + Vec2::new(sx, sy), reach));
                        }
                    }
                    found.sort_unstable();
                    found.dedup();
                    found.retain(|&j| b.min_image_dist_sq(p, positions[j]) <= r2);
                    found
                }
            };
            if !set.contains(&i) {
                set.push(i);
                set.sort_unstable();
            }
            set
        })
        .collect()
}

/// `arg(mean)`, or `previous` when the mean direction vanishes.
pub fn mean_heading(previous: f64, mean: Vec2) -> f64 {
    if mean.is_zero() {
        previous
    } else {
        mean.angle()
    }
}

/// Draws this step's speed jitter and heading noise for every agent.
pub fn draw_noise(params: &SimParams, t: usize, rng: &mut SimRng) -> Vec<StepNoise> {
    let s = params.at(t);
    (0..params.agent_count)
        .map(|_| {
            let speed = uniform(rng, -params.speed_jitter, params.speed_jitter);
            let heading = uniform(rng, s.noise_low, s.noise_high);
            StepNoise {
                speed: s.base_speed + speed,
                heading,
            }
        })
        .collect()
}

fn uniform(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Advances all agents from step `t` to `t + 1` with pre-drawn noise.
pub fn step_with_noise(states: &[AgentState], params: &SimParams, t: usize, noise: &[StepNoise]) -> Vec<AgentState> {
    let boundary = params.boundary();
    let positions: Vec<Vec2> = states.iter().map(|s| s.position).collect();
    let neighbors = neighbors_within(&positions, params.interaction_radius, Some(boundary));
    let rotated: Vec<Vec2> = states
        .iter()
        .enumerate()
        .map(|(j, s)| params.rotation(j, t).apply(Vec2::from_angle(s.heading)))
        .collect();
    let dt = params.time_step;

    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut mean = Vec2::ZERO;
            for &j in &neighbors[i] {
                mean += rotated[j];
            }
            let direction = mean_heading(s.heading, mean / neighbors[i].len() as f64);
            let displacement = rotated[i] * (noise[i].speed * dt);
            let unwrapped = s.unwrapped + displacement;
            AgentState {
                position: boundary.wrap(unwrapped),
                unwrapped,
                heading: direction + noise[i].heading,
            }
        })
        .collect()
}

/// Advances all agents from step `t` to `t + 1`, drawing noise from `rng`.
pub fn step(states: &[AgentState], params: &SimParams, t: usize, rng: &mut SimRng) -> Vec<AgentState> {
    let noise = draw_noise(params, t, rng);
    step_with_noise(states, params, t, &noise)
}

/// Result of a simulation run: both position tracks plus the true headings.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub params: SimParams,
    pub unwrapped: TrajectoryDataset,
    pub wrapped: TrajectoryDataset,
    /// `headings[t][i]` is the heading of agent `i` at frame `t` (0-based).
    pub headings: Vec<Vec<f64>>,
}

pub fn initial_states(params: &SimParams, rng: &mut SimRng) -> Vec<AgentState> {
    let boundary = params.boundary();
    let center = Vec2::new(-params.half_width + INITIAL_DISK_RADIUS, 0.0);
    (0..params.agent_count)
        .map(|_| {
            let r = INITIAL_DISK_RADIUS * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let unwrapped = center + Vec2::from_angle(phi) * r;
            AgentState {
                position: boundary.wrap(unwrapped),
                unwrapped,
                heading: 0.0,
            }
        })
        .collect()
}

/// Runs the full schedule. Output is a pure function of `params` (including its seed).
pub fn simulate(params: &SimParams) -> Result<Simulation> {
    params.validate()?;
    let mut rng = SimRng::seed_from_u64(params.seed);
    let mut states = initial_states(params, &mut rng);
    let mut history = Vec::with_capacity(params.step_count);
    history.push(states.clone());
    for t in 1..params.step_count {
        states = step(&states, params, t, &mut rng);
        history.push(states.clone());
    }

    let boundary = Some(params.boundary());
    let track = |f: fn(&AgentState) -> Vec2| -> Vec<Configuration> {
        history
            .iter()
            .map(|frame| Configuration::new(frame.iter().map(f).collect()))
            .collect()
    };
    Ok(Simulation {
        unwrapped: TrajectoryDataset::new(track(|s| s.unwrapped), boundary, false)?,
        wrapped: TrajectoryDataset::new(track(|s| s.position), boundary, true)?,
        headings: history
            .iter()
            .map(|frame| frame.iter().map(|s| s.heading).collect())
            .collect(),
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn quiet_params(n: usize, steps: usize) -> SimParams {
        SimParams {
            agent_count: n,
            step_count: steps,
            half_width: 8.0,
            half_height: 5.0,
            time_step: 0.05,
            speed_jitter: 0.0,
            interaction_radius: 1.0,
            seed: 3,
            schedule: vec![
                StepSchedule {
                    base_speed: 0.05,
                    noise_low: 0.0,
                    noise_high: 0.0,
                    turn_angle: 0.0,
                };
                steps - 1
            ],
            split_at: n,
            phase_boundaries: vec![],
        }
    }

    fn state(x: f64, y: f64, heading: f64) -> AgentState {
        AgentState {
            position: Vec2::new(x, y),
            unwrapped: Vec2::new(x, y),
            heading,
        }
    }

    #[test]
    fn single_agent_neighbourhood_is_itself() {
        let sets = neighbors_within(&[Vec2::new(0.3, 0.1)], 0.5, None);
        assert_eq!(sets, vec![vec![0]]);
    }

    #[test]
    fn neighbours_across_periodic_edge() {
        let pts = [Vec2::new(-7.9, 0.0), Vec2::new(7.9, 0.0)];
        let sets = neighbors_within(&pts, 1.0, Some(Boundary::new(8.0, 5.0)));
        assert_eq!(sets, vec![vec![0, 1], vec![0, 1]]);
        // without periodicity they are 15.8 apart
        assert_eq!(neighbors_within(&pts, 1.0, None), vec![vec![0], vec![1]]);
    }

    #[test]
    fn neighbours_match_pairwise_scan() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.0), Vec2::new(2.0, 0.0)];
        let sets = neighbors_within(&pts, 1.0, None);
        assert_eq!(sets, vec![vec![0, 1], vec![0, 1], vec![2]]);
    }

    #[test]
    fn single_agent_step() {
        let params = quiet_params(1, 2);
        let noise = [StepNoise { speed: 0.05, heading: 0.0 }];
        let next = step_with_noise(&[state(0.0, 0.0, 0.0)], &params, 1, &noise);
        assert!((next[0].unwrapped.x - 0.0025).abs() < 1e-15);
        assert_eq!(next[0].unwrapped.y, 0.0);
        assert_eq!(next[0].heading, 0.0);
    }

    #[test]
    fn two_neighbours_average_heading() {
        let params = quiet_params(2, 2);
        let noise = [StepNoise { speed: 0.05, heading: 0.0 }; 2];
        let next = step_with_noise(
            &[state(0.0, 0.0, 0.0), state(0.3, 0.0, FRAC_PI_2)],
            &params,
            1,
            &noise,
        );
        for s in next {
            assert!((s.heading - FRAC_PI_4).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_mean_direction_keeps_heading() {
        assert_eq!(mean_heading(1.25, Vec2::ZERO), 1.25);
        assert_eq!(mean_heading(1.25, Vec2::new(0.0, 2.0)), FRAC_PI_2);
    }

    #[test]
    fn displacement_equals_speed_times_dt() {
        let mut params = quiet_params(30, 40);
        params.speed_jitter = 0.01;
        for s in &mut params.schedule {
            s.noise_low = -0.3;
            s.noise_high = 0.3;
        }
        let mut rng = SimRng::seed_from_u64(5);
        let mut states = initial_states(&params, &mut rng);
        for t in 1..params.step_count {
            let noise = draw_noise(&params, t, &mut rng);
            let next = step_with_noise(&states, &params, t, &noise);
            for i in 0..states.len() {
                let d = (next[i].unwrapped - states[i].unwrapped).norm();
                assert!((d - noise[i].speed * params.time_step).abs() < 1e-12);
                assert!(params.boundary().contains(next[i].position));
                assert_eq!(params.boundary().wrap(next[i].unwrapped), next[i].position);
            }
            states = next;
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        let params = quiet_params(10, 20);
        assert_eq!(simulate(&params).unwrap(), simulate(&params).unwrap());
    }

    #[test]
    fn initial_disk() {
        let params = quiet_params(200, 2);
        let sim = simulate(&params).unwrap();
        let center = Vec2::new(-8.0 + 2.0, 0.0);
        for p in sim.unwrapped.frames()[0].positions() {
            assert!(p.dist(center) <= 2.0 + 1e-12);
        }
        assert!(sim.headings[0].iter().all(|&h| h == 0.0));
    }

    #[test]
    fn noiseless_run_keeps_zero_headings() {
        let sim = simulate(&quiet_params(25, 60)).unwrap();
        assert!(sim.headings.iter().flatten().all(|&h| h == 0.0));
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = quiet_params(3, 5);
        p.half_width = 0.0;
        assert!(simulate(&p).is_err());
        let mut p = quiet_params(3, 5);
        p.schedule[2].noise_low = 1.0;
        assert!(p.validate().unwrap_err().to_string().contains("step 3"));
        let mut p = quiet_params(3, 5);
        p.step_count = 1;
        assert!(p.validate().is_err());
    }
}
