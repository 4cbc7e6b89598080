//! Complex-domain pixel super-resolution: coded-mask measurement simulation,
//! GAP reconstruction with plug-in priors, quality metrics and cell counting.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod field;
mod fft2;
pub mod forward;
pub mod io;
pub mod kv;
pub mod metrics;
pub mod priors;
pub mod propagation;
pub mod segment;
pub mod solver;
pub mod store;
pub mod targets;

pub use error::{Error, Result};
