//! Numerical machinery for hyperbolic torus and circle maps: invariant
//! splittings via the graph transform, the series right inverse of the
//! push-forward operator, and a contraction solver that produces certified
//! conjugacies between a model map and its perturbations, with measured
//! Hoelder and orbit-Lipschitz regularity.

pub mod error;
pub mod exec;
pub mod linalg;
pub mod geometry;
pub mod field;
pub mod systems;
pub mod norms;
pub mod splitting;
pub mod rightinverse;
pub mod conjugacy;
pub mod io;

pub use error::{Error, Result};
