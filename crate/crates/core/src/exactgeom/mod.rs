//! Exact rational linear algebra and convex polytope geometry.

pub mod linalg;
pub mod lp;
pub mod polytope;

pub use linalg::{format_rat, int, parse_rat, rat, rat_to_f64, solve, AffineMap, RMat, RVec, Rat};
pub use polytope::{FloatPolytope, HalfSpace, Polytope, MAX_VERTEX_DIM};
