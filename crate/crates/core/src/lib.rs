// Negated comparisons are deliberate: a NaN operand must take the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brouwer;
pub mod degree;
pub mod error;
pub mod galerkin;
pub mod harness;
pub mod scalar;
pub mod selection;
pub mod setval;
pub mod space;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations of the generic core.
pub type SpacePair = space::SpacePair<f64>;
pub type Sequence = space::Sequence<f64>;
pub type MonotoneMap = setval::MonotoneMap<f64>;
pub type ConvexValue = setval::ConvexValue<f64>;
pub type FiniteMap = brouwer::FiniteMap<f64>;
pub type Region = brouwer::Region<f64>;
pub type Selection = selection::Selection<f64>;
pub type Domain = galerkin::Domain<f64>;
pub type Schedule = galerkin::Schedule<f64>;
pub type Homotopy = degree::Homotopy<f64>;
