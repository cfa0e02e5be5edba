use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::AblationMode;
use crate::error::{Error, Result};

/// Gates per GRU cell: update `z`, reset `r`, candidate `h`, stacked in
/// that order in every weight matrix and bias.
pub const GATES: usize = 3;

/// Borrowed view of one GRU cell's parameters.
///
/// `wx` is `3H x input`, `wh` is `3H x H`, `b` is `3H`, row-major with
/// gate blocks ordered `z, r, h`.
#[derive(Debug, Clone, Copy)]
pub struct GruParams<'a> {
    pub input: usize,
    pub hidden: usize,
    pub wx: &'a [f64],
    pub wh: &'a [f64],
    pub b: &'a [f64],
}

impl<'a> GruParams<'a> {
    pub fn new(input: usize, hidden: usize, wx: &'a [f64], wh: &'a [f64], b: &'a [f64]) -> Result<Self> {
        let g = GATES * hidden;
        check("gru wx", g * input, wx.len())?;
        check("gru wh", g * hidden, wh.len())?;
        check("gru bias", g, b.len())?;
        Ok(Self { input, hidden, wx, wh, b })
    }
}

fn check(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { what, expected, actual })
    }
}

/// Offsets of each parameter block inside the flat buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
    pub wx1: usize,
    pub wh1: usize,
    pub b1: usize,
    pub wx2: usize,
    pub wh2: usize,
    pub b2: usize,
    pub wo: usize,
    pub bo: usize,
    pub len: usize,
}

impl Layout {
    pub fn new(mode: AblationMode, hidden: usize) -> Self {
        let (input, output) = (mode.input_dim(), mode.output_dim());
        let g = GATES * hidden;
        let wx1 = 0;
        let wh1 = wx1 + g * input;
        let b1 = wh1 + g * hidden;
        let wx2 = b1 + g;
        let wh2 = wx2 + g * hidden;
        let b2 = wh2 + g * hidden;
        let wo = b2 + g;
        let bo = wo + output * hidden;
        let len = bo + output;
        Self { input, hidden, output, wx1, wh1, b1, wx2, wh2, b2, wo, bo, len }
    }
}

/// All weights of the predictor in one buffer.
///
/// Encoder and decoder read the same storage, so there is exactly one copy
/// of every weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    mode: AblationMode,
    layout: Layout,
    data: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(mode: AblationMode, hidden: usize) -> Self {
        let layout = Layout::new(mode, hidden);
        Self { mode, layout, data: vec![0.0; layout.len] }
    }

    /// Every entry uniform in `[-range, range]`.
    pub fn init_uniform(mode: AblationMode, hidden: usize, range: f64, seed: u64) -> Self {
        let mut p = Self::zeros(mode, hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut p.data {
            *v = rng.random_range(-range..=range);
        }
        p
    }

    pub fn from_parts(mode: AblationMode, hidden: usize, data: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(mode, hidden);
        check("model parameters", layout.len, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model parameter"));
        }
        Ok(Self { mode, layout, data })
    }

    /// Named row-major blocks in storage order: `(name, rows, cols, values)`.
    pub fn blocks(&self) -> [(&'static str, usize, usize, &[f64]); 8] {
        let l = &self.layout;
        let (g, h, d) = (GATES * l.hidden, l.hidden, &self.data);
        [
            ("gru1.wx", g, l.input, &d[l.wx1..l.wh1]),
            ("gru1.wh", g, h, &d[l.wh1..l.b1]),
            ("gru1.b", g, 1, &d[l.b1..l.wx2]),
            ("gru2.wx", g, h, &d[l.wx2..l.wh2]),
            ("gru2.wh", g, h, &d[l.wh2..l.b2]),
            ("gru2.b", g, 1, &d[l.b2..l.wo]),
            ("out.w", l.output, h, &d[l.wo..l.bo]),
            ("out.b", l.output, 1, &d[l.bo..l.len]),
        ]
    }

    pub fn mode(&self) -> AblationMode {
        self.mode
    }

    pub fn hidden(&self) -> usize {
        self.layout.hidden
    }

    pub fn input_dim(&self) -> usize {
        self.layout.input
    }

    pub fn output_dim(&self) -> usize {
        self.layout.output
    }

    pub(crate) fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn gru1(&self) -> GruParams<'_> {
        let l = &self.layout;
        GruParams {
            input: l.input,
            hidden: l.hidden,
            wx: &self.data[l.wx1..l.wh1],
            wh: &self.data[l.wh1..l.b1],
            b: &self.data[l.b1..l.wx2],
        }
    }

    pub fn gru2(&self) -> GruParams<'_> {
        let l = &self.layout;
        GruParams {
            input: l.hidden,
            hidden: l.hidden,
            wx: &self.data[l.wx2..l.wh2],
            wh: &self.data[l.wh2..l.b2],
            b: &self.data[l.b2..l.wo],
        }
    }

    /// Output weights, `output_dim x hidden` row-major.
    pub fn w_o(&self) -> &[f64] {
        &self.data[self.layout.wo..self.layout.bo]
    }

    pub fn b_o(&self) -> &[f64] {
        &self.data[self.layout.bo..]
    }

    /// Mutable output layer `(W_o, b_o)`.
    pub fn output_layer_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        let (wo, bo) = (self.layout.wo, self.layout.bo);
        let (head, bias) = self.data.split_at_mut(bo);
        (&mut head[wo..], bias)
    }
}

/// Gradient of the loss with respect to every entry of a [`ModelParams`],
/// in the same flat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) layout: Layout,
    pub(crate) data: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(p: &ModelParams) -> Self {
        Self { layout: p.layout, data: vec![0.0; p.layout.len] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub(crate) fn zero(&mut self) {
        self.data.iter_mut().for_each(|g| *g = 0.0);
    }
}
