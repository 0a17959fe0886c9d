//! Euler characteristic curves, the smooth Euler characteristic transform
//! and two-sample tests on collections of shapes.

pub mod bench;
pub mod ecc;
pub mod error;
pub mod infer;
pub mod io;
pub mod rng;
pub mod sect;
pub mod shapes;

pub use error::{Error, Result};
