//! Trajectory prediction for a human who follows a haptic robotic guide.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only computation:
//! pose algebra, a synthetic session simulator, windowing and
//! normalization, the residual double-GRU sequence-to-sequence predictor
//! with exact BPTT training, and the evaluation harness. File formats and
//! the command line live in the `htrail` crate.
//!
//! Enable the `std` feature to let the GEMM backend pick SIMD kernels at
//! runtime.
#![no_std]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod model;
pub mod simulator;

pub use error::{Error, Result};
pub use geometry::{Pose2D, RelPose};
