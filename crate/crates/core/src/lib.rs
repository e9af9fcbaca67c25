//! Decentralized formation control for robot swarms built on mean shift.

pub mod coverage;
pub mod error;
pub mod geom;
pub mod io;
pub mod kernel;
pub mod maneuver;
pub mod precise;
pub mod presets;
pub mod sim;
pub mod swarm;

pub use error::{Result, SwarmError};
pub use geom::Vec2;
