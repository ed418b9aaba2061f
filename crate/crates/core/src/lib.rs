//! Piecewise affine maps on convex polytopes with exact rational arithmetic.
//!
//! The crate builds iterated continuity partitions of a piecewise affine map,
//! measures their cardinality and multiplicity growth, evaluates expansion
//! and angular-expansion rates of the composed linear parts, and compares the
//! resulting entropy upper bounds against direct covering-number estimates.

pub mod catalog;
pub mod entropyest;
pub mod error;
pub mod exactgeom;
pub mod io;
pub mod pwamap;
pub mod rates;
pub mod skew;
pub mod verify;

pub use error::{Error, Result};
