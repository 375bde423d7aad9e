//! Numerical lab for over-smoothing in deep graph convolutional networks.
//!
//! Builds propagation matrices from undirected weighted graphs, measures
//! how fast hidden features collapse onto the component-indicator subspace,
//! and checks the convergence bounds numerically.

pub mod dropedge;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod lab;
pub mod linalg;
pub mod propagate;
pub mod seed;
pub mod spectral;
pub mod subspace;
pub mod svd;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
