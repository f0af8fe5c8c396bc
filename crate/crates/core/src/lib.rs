//! Numerical tools for piecewise smooth holomorphic planar systems.
//!
//! Two holomorphic fields are glued along a straight switching line and the
//! dynamics follow the Filippov convention. The crate classifies the line into
//! sewing, sliding and tangency regions, integrates orbits, finds limit cycles
//! and homoclinic loops, and studies smooth regularizations of the system.

pub mod cli;
pub mod complexfield;
pub mod cycles;
mod error;
pub mod flow;
pub mod regularize;
mod series;
pub mod switching;

pub use complexfield::{ComplexPoint, FieldSpec, PlanarField};
pub use error::{Error, Result};
pub use flow::{IntegratorOptions, Trajectory};
pub use switching::{Orientation, PWSystem, RegionClass, RegionReport, SwitchingLine};
