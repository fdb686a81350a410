//! Interface tracking on unstructured triangle meshes with per-triangle edge
//! cuts, volume-conserving semi-Lagrangian advection and the benchmark
//! shapes, fields and error metrics used to evaluate it.

pub mod geom;
pub mod mesh;
pub mod edgecut;
pub mod flow;
pub mod advect;
pub mod shapes;
pub mod metrics;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
