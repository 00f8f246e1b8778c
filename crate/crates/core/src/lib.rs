//! Translated cone exchange maps on the closed upper half-plane.
//!
//! The crate covers continued-fraction machinery for the translation
//! parameter, exact arithmetic in `Q(λ)`, the piecewise isometry itself,
//! the partition of the central cone into atoms with closed-form first
//! return times, and the renormalization step that conjugates the return
//! map of one parameter to that of another.

pub mod angle;
pub mod atoms;
pub mod baseline;
pub mod cf;
pub mod error;
pub mod field;
pub mod io;
pub mod renorm;
pub mod return_map;
pub mod sample;
pub mod tce;
pub mod verify;

pub use cf::{ContinuedFraction, SemiIndex};
pub use error::{Error, Result};
pub use field::ZLambda;
pub use tce::{BoundaryMode, ConeIndex, Point, TceMap, TceParams};
