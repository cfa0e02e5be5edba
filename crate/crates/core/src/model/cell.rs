//! Per-step reference operations on single vectors.

use alloc::vec;
use alloc::vec::Vec;

use super::linalg::sigmoid;
use super::params::{GruParams, ModelParams};
use crate::dataset::{AblationMode, ROBOT_DIM};
use crate::error::{Error, Result};

/// Hidden vectors of both cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

impl HiddenState {
    pub fn zeros(hidden: usize) -> Self {
        Self { h1: vec![0.0; hidden], h2: vec![0.0; hidden] }
    }
}

fn row_dot(w: &[f64], row: usize, cols: usize, v: &[f64]) -> f64 {
    w[row * cols..(row + 1) * cols].iter().zip(v).map(|(a, b)| a * b).sum()
}

/// One GRU update.
///
/// `z = σ(Wxz x + Whz h + bz)`, `r = σ(Wxr x + Whr h + br)`,
/// `ĥ = tanh(Wxh x + Whh (r ⊙ h) + bh)`, `h' = z ⊙ h + (1 - z) ⊙ ĥ`.
pub fn gru_cell(p: &GruParams<'_>, h_prev: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let hsz = p.hidden;
    if h_prev.len() != hsz {
        return Err(Error::ShapeMismatch { what: "gru hidden state", expected: hsz, actual: h_prev.len() });
    }
    if x.len() != p.input {
        return Err(Error::ShapeMismatch { what: "gru input", expected: p.input, actual: x.len() });
    }
    let mut z = vec![0.0; hsz];
    let mut r = vec![0.0; hsz];
    for j in 0..hsz {
        z[j] = sigmoid(row_dot(p.wx, j, p.input, x) + row_dot(p.wh, j, hsz, h_prev) + p.b[j]);
        let jr = hsz + j;
        r[j] = sigmoid(row_dot(p.wx, jr, p.input, x) + row_dot(p.wh, jr, hsz, h_prev) + p.b[jr]);
    }
    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(r, h)| r * h).collect();
    let mut out = vec![0.0; hsz];
    for j in 0..hsz {
        let jn = 2 * hsz + j;
        let cand = libm::tanh(row_dot(p.wx, jn, p.input, x) + row_dot(p.wh, jn, hsz, &rh) + p.b[jn]);
        out[j] = z[j] * h_prev[j] + (1.0 - z[j]) * cand;
    }
    Ok(out)
}

/// Drops the leading robot features of an input vector.
pub fn slice(input: &[f64], mode: AblationMode) -> Result<&[f64]> {
    if input.len() != mode.input_dim() {
        return Err(Error::ShapeMismatch { what: "input", expected: mode.input_dim(), actual: input.len() });
    }
    Ok(&input[ROBOT_DIM..])
}

/// Both cells, the linear layer and the residual connection for one step.
pub fn forward_step(m: &ModelParams, s: &HiddenState, input: &[f64]) -> Result<(Vec<f64>, HiddenState)> {
    let residual = slice(input, m.mode())?;
    let h1 = gru_cell(&m.gru1(), &s.h1, input)?;
    let h2 = gru_cell(&m.gru2(), &s.h2, &h1)?;
    let hsz = m.hidden();
    let out = (0..m.output_dim())
        .map(|i| row_dot(m.w_o(), i, hsz, &h2) + m.b_o()[i] + residual[i])
        .collect();
    Ok((out, HiddenState { h1, h2 }))
}
