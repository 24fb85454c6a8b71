//! Exact constructions for minimal rotations and odometers: Rokhlin towers,
//! smallness certificates, thin covers and dynamic comparison witnesses.
//!
//! Every number is an element of a real quadratic field, so all comparisons
//! the algorithms make are decided exactly.

pub mod comparison;
pub mod error;
pub mod plfun;
pub mod regions;
pub mod scalar;
pub mod smallness;
pub mod systems;
pub mod towers;

pub use error::{Error, Result};
pub use regions::Region;
pub use scalar::Scalar;
pub use systems::{Point, System};
