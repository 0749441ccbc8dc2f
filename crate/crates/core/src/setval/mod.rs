//! Set-valued operators and their convex values.

mod convex;
pub mod gallery;
mod operator;

pub use convex::ConvexValue;
pub use gallery::{gallery, Param, ParamMap, GALLERY};
pub use operator::{
    monotonicity_audit, AuditReport, MonotoneMap, PairingsFn, ResolventFn, AUDIT_BOX, MONOTONICITY_TOL,
};
