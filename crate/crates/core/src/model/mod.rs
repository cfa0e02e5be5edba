//! Residual double-GRU sequence-to-sequence predictor.
//!
//! Two stacked GRU cells feed a linear layer whose output is a change
//! added to the non-robot part of the input. The same parameters serve the
//! encoder (observed frames) and the autoregressive decoder, which feeds
//! each output back alongside the known robot features of the next frame.

mod cell;
mod engine;
mod linalg;
mod optim;
mod params;
mod train;

pub use cell::{forward_step, gru_cell, slice, HiddenState};
pub use engine::{gradients, gradients_with, loss, predict, predict_many, predict_normalized, Feedback, Prediction};
pub use optim::{adam_step, clip_gradients, global_norm, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use params::{Gradients, GruParams, ModelParams, GATES};
pub use train::{train, train_from, TrainConfig, TrainOutcome};

/// Hidden size of both GRU cells.
pub const HIDDEN: usize = 64;
/// Maximum global gradient norm.
pub const CLIP_NORM: f64 = 5.0;
pub const LEARNING_RATE: f64 = 0.001;
pub const EPOCHS: usize = 500;
pub const BATCH_SIZE: usize = 64;
/// Half-width of the uniform weight initialization.
pub const INIT_RANGE: f64 = 0.08;
