//! Exact computer algebra for frames and windows over truncated Witt-vector
//! and power-series rings, with a constructive lifting solver for window
//! deformations and desk-scale verification suites.

pub mod error;
pub mod ring;
pub mod el;
pub mod hatwitt;
pub mod hodge;
pub mod ladder;
pub mod frames;
pub mod matrix;
pub mod morphism;
pub mod report;
pub mod solver;
pub mod window;
pub mod witt;

pub use error::{AResult, AlgebraError, FrameError, FResult};
