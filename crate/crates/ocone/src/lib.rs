//! Samplers, statistical tests, file formats and the command-line front end
//! built on `ocone-core`.

pub mod cli;
pub mod continuous;
pub mod error;
pub mod formats;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
