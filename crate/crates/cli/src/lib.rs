//! Experiment harness for the beta-initialization QNN toolkit: dataset
//! preparation, the gradient-variance studies, and plot-ready CSV/JSON
//! output. The `beinit` binary is a thin argument layer over this crate.

pub mod experiments;
pub mod output;
pub mod pipeline;
