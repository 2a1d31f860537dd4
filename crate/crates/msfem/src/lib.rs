//! Multiscale finite element eddy-current solver for laminated iron cores.

pub mod bench;
pub mod error;
pub mod excitation;
pub mod fem;
pub mod formulations;
pub mod linsolve;
pub mod mesh;
pub mod microshape;
pub mod oracles;
pub mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use par::Execution;
