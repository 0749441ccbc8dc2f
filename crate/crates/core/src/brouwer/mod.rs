//! Finite-dimensional Brouwer degree.

mod engine;
mod linalg;
mod region;
mod winding;

pub(crate) use engine::newton;
pub use engine::{degree, locate, DegreeOptions, DegreeResult, LocatedZero};
pub use region::{auto_grid, boundary_distance, BoundaryEstimate, EvalFn, FiniteMap, Region};
pub use winding::degree_winding_oracle;
