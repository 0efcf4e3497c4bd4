//! Principal geodesic analysis on the unit hypersphere for amplitude-encoded
//! data, together with the pieces needed to study it end to end: kernel
//! feature maps, qubit-count bounds, embedding-quality metrics, a small
//! quantum simulator, quantum classifiers and dataset I/O.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dataio;
pub mod drmetrics;
pub mod error;
pub mod kernelmap;
pub mod manifold;
pub mod qml;
pub mod qpga;
pub mod qsim;

pub use error::{Error, Result};
