//! Expressivity analysis for parametric quantum circuits: statevector
//! simulation, dimensional expressivity analysis, construction of minimal
//! maximally expressive circuits, and Voronoi-based estimates of the
//! worst-case best-approximation error.

pub mod circuit;
pub mod dea;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mmec;
pub mod pipeline;
pub mod shots;
pub mod special;
pub mod volume;
pub mod voronoi;

pub use error::{Error, Result};
