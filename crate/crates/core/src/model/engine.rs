//! Batched forward pass and exact backpropagation through time.
//!
//! A window is unrolled over 19 steps. Steps 0..=7 consume the observed
//! frames; the output of step 7 is the first horizon prediction. Steps
//! 8..=18 are decoder steps whose input is the true robot features of that
//! frame concatenated with the previous output. The 12 outputs of steps
//! 7..=18 predict frames 8..=19, and the loss is the mean squared error of
//! their `P` components in normalized space.

use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{mm, mm_nt, mm_tn, sigmoid};
use super::params::{Gradients, GruParams, Layout, ModelParams};
use crate::dataset::{
    AblationMode, Normalizer, Window, FEATURE_DIM, HAPTIC_DIM, HUMAN_DIM, OBS_LEN, PRED_LEN, ROBOT_DIM,
    WINDOW_LEN,
};
use crate::error::{Error, Result};
use crate::geometry::{wrap, RelPose};

const STEPS: usize = WINDOW_LEN - 1;
const FIRST_PRED: usize = OBS_LEN - 1;
/// First step whose input contains a fed-back output.
const FIRST_DECODE: usize = OBS_LEN;
const FRAME_STRIDE: usize = WINDOW_LEN * FEATURE_DIM;

/// Whether gradients flow through outputs fed back as decoder inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Through,
    /// Treat fed-back outputs as constants (truncated gradient).
    Detached,
}

/// Denormalized 12-step forecast for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub human: Vec<RelPose>,
    /// Empty unless the mode includes haptic data.
    pub haptic: Vec<[f64; HAPTIC_DIM]>,
    /// Empty unless the mode includes depth data.
    pub depth: Vec<[f64; 5]>,
}

/// Normalized features of every frame, `n x 20 x 15` flat.
pub(crate) fn encode_windows(windows: &[Window<'_>], norm: &Normalizer) -> Result<Vec<f64>> {
    if !norm.is_fitted() {
        return Err(Error::UnfittedNormalizer);
    }
    let mut out = Vec::with_capacity(windows.len() * FRAME_STRIDE);
    for w in windows {
        for f in w.frames() {
            out.extend_from_slice(&norm.normalize(&f.features())?);
        }
    }
    Ok(out)
}

struct GruTape {
    /// `(STEPS + 1)` slots of `b x H`; slot 0 is the zero initial state.
    h: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    n: Vec<f64>,
    rh: Vec<f64>,
}

impl GruTape {
    fn new(b: usize, hidden: usize) -> Self {
        let slot = b * hidden;
        Self {
            h: vec![0.0; (STEPS + 1) * slot],
            z: vec![0.0; STEPS * slot],
            r: vec![0.0; STEPS * slot],
            n: vec![0.0; STEPS * slot],
            rh: vec![0.0; STEPS * slot],
        }
    }
}

struct Scratch {
    ax: Vec<f64>,
    ah: Vec<f64>,
    an: Vec<f64>,
    da_zr: Vec<f64>,
    da_n: Vec<f64>,
    drh: Vec<f64>,
}

impl Scratch {
    fn new(b: usize, hidden: usize) -> Self {
        Self {
            ax: vec![0.0; b * 3 * hidden],
            ah: vec![0.0; b * 2 * hidden],
            an: vec![0.0; b * hidden],
            da_zr: vec![0.0; b * 2 * hidden],
            da_n: vec![0.0; b * hidden],
            drh: vec![0.0; b * hidden],
        }
    }
}

struct GruGrads<'a> {
    wx: &'a mut [f64],
    wh: &'a mut [f64],
    b: &'a mut [f64],
}

/// Forward pass of one cell for a batch; writes gate activations into the
/// tape at step `s`.
fn gru_forward(g: &GruParams<'_>, x: &[f64], b: usize, tape: &mut GruTape, s: usize, sc: &mut Scratch) {
    let hsz = g.hidden;
    let slot = b * hsz;
    let g3 = 3 * hsz;
    let (prev_all, cur_all) = tape.h.split_at_mut((s + 1) * slot);
    let hprev = &prev_all[s * slot..];
    let hout = &mut cur_all[..slot];
    let z = &mut tape.z[s * slot..(s + 1) * slot];
    let r = &mut tape.r[s * slot..(s + 1) * slot];
    let n = &mut tape.n[s * slot..(s + 1) * slot];
    let rh = &mut tape.rh[s * slot..(s + 1) * slot];

    let ax = &mut sc.ax[..b * g3];
    mm_nt(ax, x, g.wx, b, g.input, g3, 0.0);
    let ah = &mut sc.ah[..b * 2 * hsz];
    mm_nt(ah, hprev, &g.wh[..2 * hsz * hsz], b, hsz, 2 * hsz, 0.0);
    for bi in 0..b {
        let axr = &ax[bi * g3..(bi + 1) * g3];
        let ahr = &ah[bi * 2 * hsz..(bi + 1) * 2 * hsz];
        for j in 0..hsz {
            let k = bi * hsz + j;
            z[k] = sigmoid(axr[j] + ahr[j] + g.b[j]);
            r[k] = sigmoid(axr[hsz + j] + ahr[hsz + j] + g.b[hsz + j]);
            rh[k] = r[k] * hprev[k];
        }
    }
    let an = &mut sc.an[..slot];
    mm_nt(an, rh, &g.wh[2 * hsz * hsz..], b, hsz, hsz, 0.0);
    for bi in 0..b {
        for j in 0..hsz {
            let k = bi * hsz + j;
            n[k] = libm::tanh(ax[bi * g3 + 2 * hsz + j] + an[k] + g.b[2 * hsz + j]);
            hout[k] = z[k] * hprev[k] + (1.0 - z[k]) * n[k];
        }
    }
}

/// Backward pass of one cell at step `s`.
///
/// `dh` is the total gradient reaching `h_s`. Accumulates parameter
/// gradients, overwrites `dhprev` with the gradient reaching `h_{s-1}` and,
/// when requested, `dx` with the gradient reaching the cell input.
#[allow(clippy::too_many_arguments)]
fn gru_backward(
    g: &GruParams<'_>,
    gg: &mut GruGrads<'_>,
    x: &[f64],
    b: usize,
    tape: &GruTape,
    s: usize,
    dh: &[f64],
    dhprev: &mut [f64],
    dx: Option<&mut [f64]>,
    sc: &mut Scratch,
) {
    let hsz = g.hidden;
    let slot = b * hsz;
    let hprev = &tape.h[s * slot..(s + 1) * slot];
    let z = &tape.z[s * slot..(s + 1) * slot];
    let r = &tape.r[s * slot..(s + 1) * slot];
    let n = &tape.n[s * slot..(s + 1) * slot];
    let rh = &tape.rh[s * slot..(s + 1) * slot];
    let da_zr = &mut sc.da_zr[..2 * slot];
    let da_n = &mut sc.da_n[..slot];
    let drh = &mut sc.drh[..slot];
    let dhprev = &mut dhprev[..slot];

    for bi in 0..b {
        for j in 0..hsz {
            let k = bi * hsz + j;
            let d = dh[k];
            let dz = d * (hprev[k] - n[k]);
            let dn = d * (1.0 - z[k]);
            da_n[k] = dn * (1.0 - n[k] * n[k]);
            da_zr[bi * 2 * hsz + j] = dz * z[k] * (1.0 - z[k]);
            dhprev[k] = d * z[k];
        }
    }
    mm(drh, da_n, &g.wh[2 * hsz * hsz..], b, hsz, hsz, 0.0);
    for bi in 0..b {
        for j in 0..hsz {
            let k = bi * hsz + j;
            let dr = drh[k] * hprev[k];
            dhprev[k] += drh[k] * r[k];
            da_zr[bi * 2 * hsz + hsz + j] = dr * r[k] * (1.0 - r[k]);
        }
    }

    let (gwh_zr, gwh_n) = gg.wh.split_at_mut(2 * hsz * hsz);
    mm_tn(gwh_n, da_n, rh, hsz, b, hsz, 1.0);
    mm_tn(gwh_zr, da_zr, hprev, 2 * hsz, b, hsz, 1.0);
    let (gwx_zr, gwx_n) = gg.wx.split_at_mut(2 * hsz * g.input);
    mm_tn(gwx_zr, da_zr, x, 2 * hsz, b, g.input, 1.0);
    mm_tn(gwx_n, da_n, x, hsz, b, g.input, 1.0);
    for bi in 0..b {
        for (gb, d) in gg.b[..2 * hsz].iter_mut().zip(&da_zr[bi * 2 * hsz..(bi + 1) * 2 * hsz]) {
            *gb += d;
        }
        for (gb, d) in gg.b[2 * hsz..].iter_mut().zip(&da_n[bi * hsz..(bi + 1) * hsz]) {
            *gb += d;
        }
    }
    mm(dhprev, da_zr, &g.wh[..2 * hsz * hsz], b, 2 * hsz, hsz, 1.0);
    if let Some(dx) = dx {
        let dx = &mut dx[..b * g.input];
        mm(dx, da_zr, &g.wx[..2 * hsz * g.input], b, 2 * hsz, g.input, 0.0);
        mm(dx, da_n, &g.wx[2 * hsz * g.input..], b, hsz, g.input, 1.0);
    }
}

/// Reusable buffers for unrolling a batch of windows.
pub(crate) struct Engine {
    mode: AblationMode,
    layout: Layout,
    cap: usize,
    b: usize,
    x: Vec<f64>,
    o: Vec<f64>,
    t1: GruTape,
    t2: GruTape,
    sc: Scratch,
}

impl Engine {
    pub fn new(params: &ModelParams, cap: usize) -> Self {
        let l = *params.layout();
        Self {
            mode: params.mode(),
            layout: l,
            cap,
            b: 0,
            x: vec![0.0; STEPS * cap * l.input],
            o: vec![0.0; STEPS * cap * l.output],
            t1: GruTape::new(cap, l.hidden),
            t2: GruTape::new(cap, l.hidden),
            sc: Scratch::new(cap, l.hidden),
        }
    }

    /// Unrolls `enc` (`b x 20 x 15` normalized features).
    pub fn forward(&mut self, p: &ModelParams, enc: &[f64]) {
        let l = self.layout;
        let b = enc.len() / FRAME_STRIDE;
        assert!(b <= self.cap && b * FRAME_STRIDE == enc.len() && p.layout() == &l);
        self.b = b;
        let (i_dim, o_dim, hsz) = (l.input, l.output, l.hidden);
        let cols = self.mode.feature_indices();
        let (g1, g2) = (p.gru1(), p.gru2());
        for s in 0..STEPS {
            {
                let before = &self.o[..s * b * o_dim];
                let x = &mut self.x[s * b * i_dim..(s + 1) * b * i_dim];
                for bi in 0..b {
                    let frame = &enc[bi * FRAME_STRIDE + s * FEATURE_DIM..][..FEATURE_DIM];
                    let xr = &mut x[bi * i_dim..(bi + 1) * i_dim];
                    if s < FIRST_DECODE {
                        for (xv, &c) in xr.iter_mut().zip(cols) {
                            *xv = frame[c];
                        }
                    } else {
                        xr[..ROBOT_DIM].copy_from_slice(&frame[..ROBOT_DIM]);
                        let prev = &before[(s - 1) * b * o_dim + bi * o_dim..][..o_dim];
                        xr[ROBOT_DIM..].copy_from_slice(prev);
                    }
                }
            }
            let x = &self.x[s * b * i_dim..(s + 1) * b * i_dim];
            gru_forward(&g1, x, b, &mut self.t1, s, &mut self.sc);
            let h1 = &self.t1.h[(s + 1) * b * hsz..(s + 2) * b * hsz];
            gru_forward(&g2, h1, b, &mut self.t2, s, &mut self.sc);
            if s >= FIRST_PRED {
                let h2 = &self.t2.h[(s + 1) * b * hsz..(s + 2) * b * hsz];
                let o = &mut self.o[s * b * o_dim..(s + 1) * b * o_dim];
                for bi in 0..b {
                    let orow = &mut o[bi * o_dim..(bi + 1) * o_dim];
                    let res = &x[bi * i_dim + ROBOT_DIM..(bi + 1) * i_dim];
                    for ((ov, r), bo) in orow.iter_mut().zip(res).zip(p.b_o()) {
                        *ov = r + bo;
                    }
                }
                mm_nt(o, h2, p.w_o(), b, hsz, o_dim, 1.0);
            }
        }
    }

    /// Output of step `s` for window `bi`.
    pub fn output(&self, s: usize, bi: usize) -> &[f64] {
        let o_dim = self.layout.output;
        &self.o[(s * self.b + bi) * o_dim..][..o_dim]
    }

    /// Loss of the last forward pass against the `P` targets in `enc`.
    pub fn loss(&self, enc: &[f64]) -> f64 {
        let b = self.b;
        let mut acc = 0.0;
        for s in FIRST_PRED..STEPS {
            for bi in 0..b {
                let target = &enc[bi * FRAME_STRIDE + (s + 1) * FEATURE_DIM + ROBOT_DIM..][..HUMAN_DIM];
                for (o, t) in self.output(s, bi)[..HUMAN_DIM].iter().zip(target) {
                    acc += (o - t) * (o - t);
                }
            }
        }
        acc / (b * PRED_LEN * HUMAN_DIM) as f64
    }

    /// Accumulates the gradient of the last forward pass's loss into `grads`.
    pub fn backward(&mut self, p: &ModelParams, enc: &[f64], feedback: Feedback, grads: &mut Gradients) {
        let l = self.layout;
        let b = self.b;
        let (i_dim, o_dim, hsz) = (l.input, l.output, l.hidden);
        let scale = 2.0 / (b * PRED_LEN * HUMAN_DIM) as f64;
        let (g1, g2) = (p.gru1(), p.gru2());

        let (gw1, rest) = grads.data.split_at_mut(l.wx2);
        let (gwx1, rest1) = gw1.split_at_mut(l.wh1);
        let (gwh1, gb1) = rest1.split_at_mut(l.b1 - l.wh1);
        let (gw2, gout) = rest.split_at_mut(l.wo - l.wx2);
        let (gwx2, rest2) = gw2.split_at_mut(l.wh2 - l.wx2);
        let (gwh2, gb2) = rest2.split_at_mut(l.b2 - l.wh2);
        let (gwo, gbo) = gout.split_at_mut(l.bo - l.wo);
        let mut gg1 = GruGrads { wx: gwx1, wh: gwh1, b: gb1 };
        let mut gg2 = GruGrads { wx: gwx2, wh: gwh2, b: gb2 };

        let slot = b * hsz;
        let mut dh1 = vec![0.0; slot];
        let mut dh2 = vec![0.0; slot];
        let mut dh1c = vec![0.0; slot];
        let mut dh2c = vec![0.0; slot];
        let mut dx1 = vec![0.0; b * i_dim];
        let mut d_o = vec![0.0; b * o_dim];
        let mut carry = vec![0.0; b * o_dim];
        let mut have_carry = false;

        for s in (0..STEPS).rev() {
            dh2.copy_from_slice(&dh2c);
            if s >= FIRST_PRED {
                for bi in 0..b {
                    let out = self.output(s, bi);
                    let target = &enc[bi * FRAME_STRIDE + (s + 1) * FEATURE_DIM + ROBOT_DIM..][..HUMAN_DIM];
                    let row = &mut d_o[bi * o_dim..(bi + 1) * o_dim];
                    row.iter_mut().for_each(|v| *v = 0.0);
                    for j in 0..HUMAN_DIM {
                        row[j] = scale * (out[j] - target[j]);
                    }
                }
                if have_carry {
                    d_o.iter_mut().zip(&carry).for_each(|(d, c)| *d += c);
                }
                let h2 = &self.t2.h[(s + 1) * slot..(s + 2) * slot];
                mm_tn(gwo, &d_o, h2, o_dim, b, hsz, 1.0);
                for bi in 0..b {
                    gbo.iter_mut().zip(&d_o[bi * o_dim..(bi + 1) * o_dim]).for_each(|(g, d)| *g += d);
                }
                mm(&mut dh2, &d_o, p.w_o(), b, o_dim, hsz, 1.0);
            }

            let h1 = &self.t1.h[(s + 1) * slot..(s + 2) * slot];
            gru_backward(&g2, &mut gg2, h1, b, &self.t2, s, &dh2, &mut dh2c, Some(&mut dh1), &mut self.sc);
            dh1.iter_mut().zip(&dh1c).for_each(|(d, c)| *d += c);

            let need_dx = s >= FIRST_DECODE && feedback == Feedback::Through;
            let x = &self.x[s * b * i_dim..(s + 1) * b * i_dim];
            let dx = if need_dx { Some(dx1.as_mut_slice()) } else { None };
            gru_backward(&g1, &mut gg1, x, b, &self.t1, s, &dh1, &mut dh1c, dx, &mut self.sc);

            have_carry = need_dx;
            if need_dx {
                for bi in 0..b {
                    let dxr = &dx1[bi * i_dim + ROBOT_DIM..(bi + 1) * i_dim];
                    let dor = &d_o[bi * o_dim..(bi + 1) * o_dim];
                    for ((c, a), r) in carry[bi * o_dim..(bi + 1) * o_dim].iter_mut().zip(dxr).zip(dor) {
                        *c = a + r;
                    }
                }
            }
        }
    }
}

fn require_fitted(norm: &Normalizer) -> Result<()> {
    if norm.is_fitted() {
        Ok(())
    } else {
        Err(Error::UnfittedNormalizer)
    }
}

/// Mean squared error of the predicted `P` over windows, horizon steps
/// and the three components, in normalized space.
pub fn loss(m: &ModelParams, batch: &[Window<'_>], norm: &Normalizer) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    require_fitted(norm)?;
    let enc = encode_windows(batch, norm)?;
    let mut e = Engine::new(m, batch.len());
    e.forward(m, &enc);
    Ok(e.loss(&enc))
}

/// Loss and exact gradient over a batch.
pub fn gradients(m: &ModelParams, batch: &[Window<'_>], norm: &Normalizer) -> Result<(f64, Gradients)> {
    gradients_with(m, batch, norm, Feedback::Through)
}

pub fn gradients_with(
    m: &ModelParams,
    batch: &[Window<'_>],
    norm: &Normalizer,
    feedback: Feedback,
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    require_fitted(norm)?;
    let enc = encode_windows(batch, norm)?;
    let mut e = Engine::new(m, batch.len());
    e.forward(m, &enc);
    let mut g = Gradients::zeros_like(m);
    e.backward(m, &enc, feedback, &mut g);
    Ok((e.loss(&enc), g))
}

/// Normalized outputs of the 12 horizon steps for each window,
/// `windows x 12 x output_dim`.
pub fn predict_normalized(m: &ModelParams, windows: &[Window<'_>], norm: &Normalizer) -> Result<Vec<Vec<Vec<f64>>>> {
    require_fitted(norm)?;
    if windows.is_empty() {
        return Ok(Vec::new());
    }
    let enc = encode_windows(windows, norm)?;
    let mut e = Engine::new(m, windows.len());
    e.forward(m, &enc);
    Ok((0..windows.len())
        .map(|bi| (FIRST_PRED..STEPS).map(|s| e.output(s, bi).to_vec()).collect())
        .collect())
}

/// Forecast of the 12 frames following the observed part of `w`.
pub fn predict(m: &ModelParams, w: &Window<'_>, norm: &Normalizer) -> Result<Prediction> {
    let mut out = predict_many(m, core::slice::from_ref(w), norm)?;
    Ok(out.swap_remove(0))
}

/// [`predict`] for many windows, evaluated in batches.
pub fn predict_many(m: &ModelParams, windows: &[Window<'_>], norm: &Normalizer) -> Result<Vec<Prediction>> {
    const CHUNK: usize = 512;
    let mut all = Vec::with_capacity(windows.len());
    for chunk in windows.chunks(CHUNK) {
        for steps in predict_normalized(m, chunk, norm)? {
            all.push(denormalize_prediction(m.mode(), &steps, norm)?);
        }
    }
    Ok(all)
}

fn denormalize_prediction(mode: AblationMode, steps: &[Vec<f64>], norm: &Normalizer) -> Result<Prediction> {
    let cols = &mode.feature_indices()[ROBOT_DIM..];
    let mut pred = Prediction { human: Vec::new(), haptic: Vec::new(), depth: Vec::new() };
    for step in steps {
        let mut v = [0.0; FEATURE_DIM - ROBOT_DIM];
        for (i, (&c, u)) in cols.iter().zip(step).enumerate() {
            v[i] = norm.denormalize_dim(c, *u)?;
        }
        pred.human.push(RelPose { x: v[0], y: v[1], theta: wrap(v[2]) });
        let mut next = HUMAN_DIM;
        if mode.uses_haptic() {
            pred.haptic.push([v[next], v[next + 1]]);
            next += HAPTIC_DIM;
        }
        if mode.uses_depth() {
            pred.depth.push([v[next], v[next + 1], v[next + 2], v[next + 3], v[next + 4]]);
        }
    }
    Ok(pred)
}
