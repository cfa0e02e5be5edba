use alloc::string::String;

use crate::dataset::PRED_LEN;
use crate::error::{Error, Result};
use crate::geometry::{wrap, Pose2D, RelPose};

/// Anything with a planar position and heading.
pub trait PoseLike {
    fn xyt(&self) -> (f64, f64, f64);
}

impl PoseLike for Pose2D {
    fn xyt(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.theta)
    }
}

impl PoseLike for RelPose {
    fn xyt(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.theta)
    }
}

impl PoseLike for [f64; 3] {
    fn xyt(&self) -> (f64, f64, f64) {
        (self[0], self[1], self[2])
    }
}

/// Errors over a set of windows. Distances in meters, angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub method: String,
    pub windows: usize,
    pub mde: f64,
    pub fde: f64,
    pub mae: f64,
    pub fae: f64,
}

impl MetricsReport {
    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }
}

/// Metrics of one 12-step forecast against ground truth in a shared frame.
pub fn compute_metrics<P: PoseLike, T: PoseLike>(pred: &[P], truth: &[T]) -> Result<MetricsReport> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch { what: "prediction vs truth", expected: truth.len(), actual: pred.len() });
    }
    if truth.len() != PRED_LEN {
        return Err(Error::ShapeMismatch { what: "horizon", expected: PRED_LEN, actual: truth.len() });
    }
    let mut dist = [0.0; PRED_LEN];
    let mut ang = [0.0; PRED_LEN];
    for (k, (p, t)) in pred.iter().zip(truth).enumerate() {
        let (px, py, pt) = p.xyt();
        let (tx, ty, tt) = t.xyt();
        dist[k] = libm::hypot(px - tx, py - ty);
        ang[k] = libm::fabs(wrap(pt - tt)).to_degrees();
        if !(dist[k].is_finite() && ang[k].is_finite()) {
            return Err(Error::NonFinite("metric input"));
        }
    }
    Ok(MetricsReport {
        method: String::new(),
        windows: 1,
        mde: mean(&dist),
        fde: dist[PRED_LEN - 1],
        mae: mean(&ang),
        fae: ang[PRED_LEN - 1],
    })
}

// Mean as an offset from the first element, so a constant sequence
// yields exactly that constant.
fn mean(v: &[f64]) -> f64 {
    let base = v[0];
    base + v.iter().map(|x| x - base).sum::<f64>() / v.len() as f64
}

/// Window-count-weighted mean of reports. The method tag is taken from
/// the first report.
pub fn aggregate(reports: &[MetricsReport]) -> Result<MetricsReport> {
    let first = reports.first().ok_or(Error::Empty("metric reports"))?;
    let total: usize = reports.iter().map(|r| r.windows).sum();
    if total == 0 {
        return Err(Error::Empty("metric windows"));
    }
    let mean = |f: fn(&MetricsReport) -> f64| {
        reports.iter().map(|r| f(r) * (r.windows as f64 / total as f64)).sum::<f64>()
    };
    Ok(MetricsReport {
        method: first.method.clone(),
        windows: total,
        mde: mean(|r| r.mde),
        fde: mean(|r| r.fde),
        mae: mean(|r| r.mae),
        fae: mean(|r| r.fae),
    })
}
