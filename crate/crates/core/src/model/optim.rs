use alloc::vec;
use alloc::vec::Vec;

use super::params::{Gradients, ModelParams};
use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// L2 norm over every gradient entry.
pub fn global_norm(grads: &Gradients) -> f64 {
    libm::sqrt(grads.as_slice().iter().map(|g| g * g).sum::<f64>())
}

/// Rescales `grads` so their global norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_gradients(grads: &mut Gradients, max_norm: f64) -> f64 {
    let norm = global_norm(grads);
    if norm > max_norm {
        let s = max_norm / norm;
        grads.as_mut_slice().iter_mut().for_each(|g| *g *= s);
    }
    norm
}

/// First and second moment estimates for every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], step: 0 }
    }

    pub fn for_params(p: &ModelParams) -> Self {
        Self::new(p.len())
    }

    /// Bias-corrected Adam update of a flat parameter slice.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch {
                what: "adam parameters",
                expected: self.m.len(),
                actual: params.len().min(grads.len()),
            });
        }
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - libm::pow(ADAM_BETA1, t);
        let c2 = 1.0 - libm::pow(ADAM_BETA2, t);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (libm::sqrt(v_hat) + ADAM_EPS);
        }
        Ok(())
    }
}

/// One Adam step on the model parameters.
pub fn adam_step(params: &mut ModelParams, grads: &Gradients, state: &mut AdamState, lr: f64) -> Result<()> {
    state.update(params.as_mut_slice(), grads.as_slice(), lr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AblationMode;

    fn grads_of(values: &[f64]) -> Gradients {
        let p = ModelParams::zeros(AblationMode::R, 1);
        let mut g = Gradients::zeros_like(&p);
        g.as_mut_slice()[..values.len()].copy_from_slice(values);
        g
    }

    #[test]
    fn clip_examples() {
        // Norm 10 -> halved.
        let mut g = grads_of(&[6.0, 8.0]);
        assert_eq!(clip_gradients(&mut g, 5.0), 10.0);
        assert_eq!(&g.as_slice()[..2], &[3.0, 4.0]);
        // Norm 3 -> unchanged.
        let mut g = grads_of(&[3.0, 0.0]);
        let before = g.clone();
        clip_gradients(&mut g, 5.0);
        assert_eq!(g, before);
    }

    #[test]
    fn clip_postcondition() {
        for scale in [0.1, 1.0, 4.9, 5.0, 7.3, 1e3] {
            let vals: Vec<f64> = (0..20).map(|i| scale * ((i as f64) * 0.7).sin()).collect();
            let mut g = grads_of(&vals);
            let n0 = global_norm(&g);
            clip_gradients(&mut g, 5.0);
            assert!((global_norm(&g) - n0.min(5.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gradient_keeps_params_and_decays_moments() {
        let mut s = AdamState { m: vec![0.5, -0.2], v: vec![0.1, 0.3], step: 3 };
        let mut p = [1.0, 2.0];
        s.update(&mut p, &[0.0, 0.0], 1e-3).unwrap();
        assert_eq!(s.step, 4);
        assert!((s.m[0] - 0.45).abs() < 1e-15 && (s.v[1] - 0.2997).abs() < 1e-15);
        // Nonzero moments still move the parameters.
        assert!(p[0] < 1.0);

        let mut fresh = AdamState::new(2);
        let mut p = [1.0, 2.0];
        fresh.update(&mut p, &[0.0, 0.0], 1e-3).unwrap();
        assert_eq!(p, [1.0, 2.0]);
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let g = [0.3, -2.0, 1e-3, -5e-2];
        let mut p = [0.0; 4];
        let mut s = AdamState::new(4);
        s.update(&mut p, &g, 1e-3).unwrap();
        for (dp, gi) in p.iter().zip(g) {
            assert_eq!(dp.signum(), -gi.signum());
            assert!(dp.abs() > 0.999e-3 && dp.abs() <= 1e-3);
        }
    }

    #[test]
    fn three_step_scalar_trace() {
        let grads = [0.5, -0.25, 0.125];
        let lr = 1e-3;
        let mut s = AdamState::new(1);
        let mut p = [0.2];
        // Hand recursion.
        let (mut m, mut v, mut q) = (0.0_f64, 0.0_f64, 0.2_f64);
        for (t, g) in grads.iter().enumerate() {
            s.update(&mut p, &[*g], lr).unwrap();
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9_f64.powi(t as i32 + 1));
            let vh = v / (1.0 - 0.999_f64.powi(t as i32 + 1));
            q -= lr * mh / (vh.sqrt() + 1e-8);
            assert!((p[0] - q).abs() < 1e-12, "step {t}");
        }
        assert_eq!(s.step, 3);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = AdamState::new(3);
        assert!(s.update(&mut [0.0; 2], &[0.0; 2], 1e-3).is_err());
    }
}
