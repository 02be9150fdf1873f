//! Reflection invariance and the Ocone property for skip-free processes.
//!
//! Paths, reflections and the reflection-word solver live in [`path`] and
//! [`solver`]; exact laws in [`law`] and [`counterexamples`]; the continuous
//! discretization and characteristic-function checks in [`bridge`].
#![no_std]
extern crate alloc;

pub mod bridge;
pub mod counterexamples;
pub mod error;
pub mod law;
pub mod path;
pub mod solver;

pub use error::{Error, Result};
pub use law::{Mass, PathLaw, ProcessSpec};
pub use path::{HittingTime, PathLike, QuadraticVariation, SkipFreePath, Step, WalkPath};
pub use solver::{OrbitGraph, ReflectionWord, Solver};
