//! Configurations and trajectory datasets.

use crate::error::{Error, Result};
use crate::geom::{Boundary, Vec2};

/// Positions of all agents at one time step; a point in 2N-dimensional space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Configuration {
    positions: Vec<Vec2>,
}

impl Configuration {
    pub fn new(positions: Vec<Vec2>) -> Self {
        Configuration { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn get(&self, i: usize) -> Vec2 {
        self.positions[i]
    }

    /// Stacked coordinates `[x1, y1, x2, y2, ...]`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    /// Reorders agents so that slot `k` holds agent `order[k]`.
    pub fn reordered(&self, order: &[usize]) -> Configuration {
        Configuration::new(order.iter().map(|&i| self.positions[i]).collect())
    }
}

impl From<Vec<Vec2>> for Configuration {
    fn from(positions: Vec<Vec2>) -> Self {
        Configuration::new(positions)
    }
}

/// Ordered sequence of configurations (the dataset of all observed frames).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    frames: Vec<Configuration>,
    boundary: Option<Boundary>,
    wrapped: bool,
}

impl TrajectoryDataset {
    /// Builds a dataset, rejecting frames whose agent count differs from the first.
    pub fn new(frames: Vec<Configuration>, boundary: Option<Boundary>, wrapped: bool) -> Result<Self> {
        if let Some(first) = frames.first() {
            let n = first.len();
            if n == 0 {
                return Err(Error::Dataset("frame 1 has no agents".into()));
            }
            for (t, frame) in frames.iter().enumerate() {
                if frame.len() != n {
                    return Err(Error::Dataset(format!(
                        "frame {}: expected {} agents, found {}",
                        t + 1,
                        n,
                        frame.len()
                    )));
                }
            }
        }
        Ok(TrajectoryDataset {
            frames,
            boundary,
            wrapped,
        })
    }

    pub fn frames(&self) -> &[Configuration] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn agent_count(&self) -> usize {
        self.frames.first().map_or(0, Configuration::len)
    }

    pub fn boundary(&self) -> Option<Boundary> {
        self.boundary
    }

    /// True when positions are folded into the periodic box.
    pub fn is_wrapped(&self) -> bool {
        self.wrapped
    }

    pub fn require_frames(&self, min: usize) -> Result<()> {
        if self.frames.len() < min {
            return Err(Error::Dataset(format!(
                "need at least {min} frames, found {}",
                self.frames.len()
            )));
        }
        Ok(())
    }
}
