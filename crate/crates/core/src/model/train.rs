use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::engine::{encode_windows, Engine, Feedback};
use super::optim::{adam_step, clip_gradients, AdamState};
use super::params::{Gradients, ModelParams};
use super::{BATCH_SIZE, CLIP_NORM, EPOCHS, HIDDEN, INIT_RANGE, LEARNING_RATE};
use crate::dataset::{AblationMode, Normalizer, Window, FEATURE_DIM, WINDOW_LEN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub clip_norm: f64,
    pub hidden: usize,
    pub init_range: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: EPOCHS,
            batch_size: BATCH_SIZE,
            lr: LEARNING_RATE,
            seed: 0,
            clip_norm: CLIP_NORM,
            hidden: HIDDEN,
            init_range: INIT_RANGE,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::InvalidConfig("epochs, batch_size and hidden must be >= 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.clip_norm > 0.0) || !(self.init_range >= 0.0) {
            return Err(Error::InvalidConfig("lr, clip_norm must be > 0 and init_range >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean training loss of each epoch.
    pub history: Vec<f64>,
    pub steps: u64,
}

/// Mini-batch Adam with per-epoch seeded shuffling and global-norm
/// gradient clipping.
pub fn train(data: &[Window<'_>], cfg: &TrainConfig, mode: AblationMode, norm: &Normalizer) -> Result<TrainOutcome> {
    let init = ModelParams::init_uniform(mode, cfg.hidden, cfg.init_range, cfg.seed);
    train_from(init, data, cfg, norm)
}

/// Continues training from existing parameters.
pub fn train_from(mut params: ModelParams, data: &[Window<'_>], cfg: &TrainConfig, norm: &Normalizer) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training windows"));
    }
    let stride = WINDOW_LEN * FEATURE_DIM;
    let enc = encode_windows(data, norm)?;
    let cap = cfg.batch_size.min(data.len());
    let mut engine = Engine::new(&params, cap);
    let mut grads = Gradients::zeros_like(&params);
    let mut adam = AdamState::for_params(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f7a_1100);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(cap * stride);
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            for &i in chunk {
                batch.extend_from_slice(&enc[i * stride..(i + 1) * stride]);
            }
            engine.forward(&params, &batch);
            let l = engine.loss(&batch);
            if !l.is_finite() {
                return Err(Error::NonFinite("training loss"));
            }
            epoch_loss += l * chunk.len() as f64;
            grads.zero();
            engine.backward(&params, &batch, Feedback::Through, &mut grads);
            clip_gradients(&mut grads, cfg.clip_norm);
            adam_step(&mut params, &grads, &mut adam, cfg.lr)?;
        }
        history.push(epoch_loss / data.len() as f64);
    }
    Ok(TrainOutcome { params, history, steps: adam.step })
}
