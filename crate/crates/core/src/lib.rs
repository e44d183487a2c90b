//! Simulation and analysis of the (2+1)-dimensional solid-on-solid surface
//! above a hard wall.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod levellines;
pub mod sampler;
pub mod wulff;

pub use error::{Error, Result};
pub use geometry::Point;
pub use lattice::{HeightField, SimConfig};
pub use levellines::{LevelLoop, LoopEnsemble};
