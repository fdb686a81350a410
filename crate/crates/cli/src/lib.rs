//! Benchmark harness around the `tricut` library: run configuration,
//! advection loops, CSV metrics, SVG renderings and binary state dumps.

pub mod config;
pub mod dump;
pub mod run;
pub mod svg;
