//! Numerics for Anti-de Sitter 3-space realized as PSL(2,R): the geodesic-flow
//! principal bundle over H²×H², its connection and curvature, Gauss maps of
//! spacelike surfaces, and the flux/holonomy correspondence for equivariant
//! Lagrangian embeddings.

pub mod config;
pub mod error;
pub mod frame;
pub mod holonomy;
pub mod isotopy;
pub mod lie;
pub mod mesh;
pub mod quad;
pub mod rep;
pub mod report;
pub mod suite;
pub mod surface;
pub mod transport;

pub use error::{GeomError, Result};
