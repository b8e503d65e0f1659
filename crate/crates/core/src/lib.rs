pub mod error;
pub mod expr;
pub mod config;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod linop;
pub mod projective;
pub mod report;
pub mod rng;
pub mod spaces;
pub mod spectral;
pub mod tolerances;
pub mod transforms;

pub use error::{Error, Result};
