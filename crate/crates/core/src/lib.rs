//! Collective-motion phase analysis.
//!
//! The crate simulates augmented Vicsek swarms, recovers frame-to-frame agent
//! correspondences from unlabelled positions, condenses each step into a
//! coarse observable, segments the run into behavioural phases and measures
//! the intrinsic dimension of each phase with Isomap.

pub mod dataset;
pub mod error;
pub mod geom;
pub mod io;
pub mod manifold;
pub mod mapping;
pub mod observables;
pub mod segment;
pub mod sim;
pub mod spatial;

pub use dataset::{Configuration, TrajectoryDataset};
pub use error::{Error, Result};
pub use geom::{Boundary, Rotation2, Vec2};
