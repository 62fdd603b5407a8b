//! Schedules for the speed-switch, noise-switch and split/rejoin runs.

use std::str::FromStr;

use super::{SimParams, StepSchedule};
use crate::error::{Error, Result};

/// Settings shared by every scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Common {
    pub agent_count: usize,
    pub step_count: usize,
    pub half_width: f64,
    pub half_height: f64,
    pub time_step: f64,
    pub speed_jitter: f64,
    pub interaction_radius: f64,
    pub seed: u64,
}

impl Common {
    fn new(agent_count: usize, step_count: usize, half_width: f64, half_height: f64) -> Self {
        Common {
            agent_count,
            step_count,
            half_width,
            half_height,
            time_step: 0.05,
            speed_jitter: 0.01,
            interaction_radius: 1.0,
            seed: 0,
        }
    }

    fn params(&self, schedule: Vec<StepSchedule>, split_at: usize, phase_boundaries: Vec<usize>) -> SimParams {
        SimParams {
            agent_count: self.agent_count,
            step_count: self.step_count,
            half_width: self.half_width,
            half_height: self.half_height,
            time_step: self.time_step,
            speed_jitter: self.speed_jitter,
            interaction_radius: self.interaction_radius,
            seed: self.seed,
            schedule,
            split_at,
            phase_boundaries,
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "agents" => self.agent_count = parse(key, value)?,
            "steps" => self.step_count = parse(key, value)?,
            "half_width" => self.half_width = parse(key, value)?,
            "half_height" => self.half_height = parse(key, value)?,
            "dt" => self.time_step = parse(key, value)?,
            "speed_jitter" => self.speed_jitter = parse(key, value)?,
            "interaction_radius" => self.interaction_radius = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

pub(crate) fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

/// Two switch times shared by the speed and noise scenarios: the middle
/// phase covers steps `on <= t < off`.
fn check_switch(name: &str, common: &Common, on: usize, off: usize) -> Result<()> {
    if on >= off {
        return Err(Error::Simulation(format!(
            "{name}: switch-on step {on} must precede switch-off step {off}"
        )));
    }
    if common.step_count < off {
        return Err(Error::Simulation(format!(
            "{name}: need at least {off} steps for the schedule, got {}",
            common.step_count
        )));
    }
    Ok(())
}

fn three_phase(t: usize, on: usize, off: usize) -> bool {
    (on..off).contains(&t)
}

/// Group speed jumps from `low_speed` to `high_speed` for `on <= t < off`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSwitch {
    pub common: Common,
    pub low_speed: f64,
    pub high_speed: f64,
    pub noise: f64,
    pub switch_on: usize,
    pub switch_off: usize,
}

impl Default for SpeedSwitch {
    fn default() -> Self {
        SpeedSwitch {
            common: Common::new(50, 150, 8.0, 5.0),
            low_speed: 0.05,
            high_speed: 0.1,
            noise: 0.01,
            switch_on: 50,
            switch_off: 100,
        }
    }
}

impl SpeedSwitch {
    pub fn build(&self) -> Result<SimParams> {
        check_switch("speed-switch", &self.common, self.switch_on, self.switch_off)?;
        let schedule = (1..self.common.step_count)
            .map(|t| StepSchedule {
                base_speed: if three_phase(t, self.switch_on, self.switch_off) {
                    self.high_speed
                } else {
                    self.low_speed
                },
                noise_low: -self.noise,
                noise_high: self.noise,
                turn_angle: 0.0,
            })
            .collect();
        let n = self.common.agent_count;
        let params = self
            .common
            .params(schedule, n, vec![self.switch_on, self.switch_off]);
        params.validate()?;
        Ok(params)
    }
}

/// Heading noise amplitude jumps from `noise_low` to `noise_high` for `on <= t < off`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSwitch {
    pub common: Common,
    pub speed: f64,
    pub noise_low: f64,
    pub noise_high: f64,
    pub switch_on: usize,
    pub switch_off: usize,
}

impl Default for NoiseSwitch {
    fn default() -> Self {
        NoiseSwitch {
            common: Common::new(50, 150, 6.0, 6.0),
            speed: 0.05,
            noise_low: 0.01,
            noise_high: 0.2,
            switch_on: 50,
            switch_off: 100,
        }
    }
}

impl NoiseSwitch {
    pub fn build(&self) -> Result<SimParams> {
        check_switch("noise-switch", &self.common, self.switch_on, self.switch_off)?;
        let schedule = (1..self.common.step_count)
            .map(|t| {
                let amp = if three_phase(t, self.switch_on, self.switch_off) {
                    self.noise_high
                } else {
                    self.noise_low
                };
                StepSchedule {
                    base_speed: self.speed,
                    noise_low: -amp,
                    noise_high: amp,
                    turn_angle: 0.0,
                }
            })
            .collect();
        let n = self.common.agent_count;
        let params = self
            .common
            .params(schedule, n, vec![self.switch_on, self.switch_off]);
        params.validate()?;
        Ok(params)
    }
}

/// Argument of the two sigmoids that shape the subgroup path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmoidArgument {
    /// `12 t / T - 4` and `12 t / T - 8`.
    Normalized,
    /// `T t / 12 - 4` and `T t / 12 - 8`; saturates after the first few
    /// steps for realistic `T`.
    Literal,
}

impl FromStr for SigmoidArgument {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "normalized" => Ok(SigmoidArgument::Normalized),
            "literal" => Ok(SigmoidArgument::Literal),
            other => Err(Error::config(
                "sigmoid",
                format!("expected `normalized` or `literal`, got `{other}`"),
            )),
        }
    }
}

/// The group splits into two halves that rotate in opposite senses along a
/// bump-shaped reference path, then rejoin.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRejoin {
    pub common: Common,
    pub speed: f64,
    pub noise: f64,
    pub sigmoid: SigmoidArgument,
    /// Reference path spans `[-path_half_span, path_half_span]` horizontally.
    pub path_half_span: f64,
    /// Height of the bump traced by the reference path.
    pub path_amplitude: f64,
}

impl Default for SplitRejoin {
    fn default() -> Self {
        SplitRejoin {
            common: Common::new(50, 220, 6.0, 6.0),
            speed: 0.05,
            noise: 0.01,
            sigmoid: SigmoidArgument::Normalized,
            path_half_span: 6.0,
            path_amplitude: 5.0,
        }
    }
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

impl SplitRejoin {
    /// Horizontal coordinate of the reference path at frame `t` (1-based).
    pub fn path_x(&self, t: usize) -> f64 {
        let total = self.common.step_count as f64;
        self.path_half_span * (2.0 * t as f64 - total) / total
    }

    /// Vertical coordinate of the reference path at frame `t` (1-based).
    pub fn path_y(&self, t: usize) -> f64 {
        let total = self.common.step_count as f64;
        let t = t as f64;
        let u = match self.sigmoid {
            SigmoidArgument::Normalized => 12.0 * t / total,
            SigmoidArgument::Literal => total / 12.0 * t,
        };
        self.path_amplitude * (sigmoid(u - 4.0) - sigmoid(u - 8.0))
    }

    /// Tangent angle of the reference path between frames `t - 1` and `t`;
    /// zero at `t = 1`, where there is no previous frame.
    pub fn turn_angle(&self, t: usize) -> f64 {
        if t < 2 {
            return 0.0;
        }
        let dy = self.path_y(t) - self.path_y(t - 1);
        let dx = self.path_x(t) - self.path_x(t - 1);
        dy.atan2(dx)
    }

    /// Size of the group rotated by `+γ`; the first ⌈N/2⌉ agents.
    pub fn split_at(&self) -> usize {
        self.common.agent_count.div_ceil(2)
    }

    pub fn build(&self) -> Result<SimParams> {
        let schedule = (1..self.common.step_count)
            .map(|t| StepSchedule {
                base_speed: self.speed,
                noise_low: -self.noise,
                noise_high: self.noise,
                turn_angle: self.turn_angle(t),
            })
            .collect();
        let params = self.common.params(schedule, self.split_at(), Vec::new());
        params.validate()?;
        Ok(params)
    }
}

/// A named scenario with its (overridable) settings.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    SpeedSwitch(SpeedSwitch),
    NoiseSwitch(NoiseSwitch),
    SplitRejoin(SplitRejoin),
}

impl Scenario {
    pub const NAMES: [&'static str; 3] = ["speed-switch", "noise-switch", "split-rejoin"];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "speed-switch" => Ok(Scenario::SpeedSwitch(SpeedSwitch::default())),
            "noise-switch" => Ok(Scenario::NoiseSwitch(NoiseSwitch::default())),
            "split-rejoin" => Ok(Scenario::SplitRejoin(SplitRejoin::default())),
            other => Err(Error::config(
                "scenario",
                format!("unknown scenario `{other}`; expected one of {}", Self::NAMES.join(", ")),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::SpeedSwitch(_) => "speed-switch",
            Scenario::NoiseSwitch(_) => "noise-switch",
            Scenario::SplitRejoin(_) => "split-rejoin",
        }
    }

    pub fn common_mut(&mut self) -> &mut Common {
        match self {
            Scenario::SpeedSwitch(s) => &mut s.common,
            Scenario::NoiseSwitch(s) => &mut s.common,
            Scenario::SplitRejoin(s) => &mut s.common,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.common_mut().seed = seed;
    }

    /// Applies a `key = value` override. Returns `Ok(false)` for keys this
    /// scenario does not know.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        if self.common_mut().set(key, value)? {
            return Ok(true);
        }
        match self {
            Scenario::SpeedSwitch(s) => match key {
                "low_speed" => s.low_speed = parse(key, value)?,
                "high_speed" => s.high_speed = parse(key, value)?,
                "noise" => s.noise = parse(key, value)?,
                "switch_on" => s.switch_on = parse(key, value)?,
                "switch_off" => s.switch_off = parse(key, value)?,
                _ => return Ok(false),
            },
            Scenario::NoiseSwitch(s) => match key {
                "speed" => s.speed = parse(key, value)?,
                "noise_low" => s.noise_low = parse(key, value)?,
                "noise_high" => s.noise_high = parse(key, value)?,
                "switch_on" => s.switch_on = parse(key, value)?,
                "switch_off" => s.switch_off = parse(key, value)?,
                _ => return Ok(false),
            },
            Scenario::SplitRejoin(s) => match key {
                "speed" => s.speed = parse(key, value)?,
                "noise" => s.noise = parse(key, value)?,
                "sigmoid" => s.sigmoid = value.parse()?,
                "path_half_span" => s.path_half_span = parse(key, value)?,
                "path_amplitude" => s.path_amplitude = parse(key, value)?,
                _ => return Ok(false),
            },
        }
        Ok(true)
    }

    pub fn build(&self) -> Result<SimParams> {
        match self {
            Scenario::SpeedSwitch(s) => s.build(),
            Scenario::NoiseSwitch(s) => s.build(),
            Scenario::SplitRejoin(s) => s.build(),
        }
    }
}
