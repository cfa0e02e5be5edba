use super::{Window, FEATURE_DIM};
use crate::error::{Error, Result};

/// Per-dimension min-max map onto `[-1, 1]`, fit on training data only.
///
/// Values outside the fitted range pass through the same affine map
/// without clamping. Dimensions with `min == max` map to 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Normalizer {
    bounds: Option<([f64; FEATURE_DIM], [f64; FEATURE_DIM])>,
}

impl Normalizer {
    pub fn from_bounds(min: [f64; FEATURE_DIM], max: [f64; FEATURE_DIM]) -> Result<Self> {
        for i in 0..FEATURE_DIM {
            if !min[i].is_finite() || !max[i].is_finite() {
                return Err(Error::NonFinite("normalizer bound"));
            }
            if min[i] > max[i] {
                return Err(Error::InvalidConfig(alloc::format!("normalizer dim {i}: min > max")));
            }
        }
        Ok(Self { bounds: Some((min, max)) })
    }

    pub fn is_fitted(&self) -> bool {
        self.bounds.is_some()
    }

    /// Fitted minima (zeros when unfitted).
    pub fn min(&self) -> [f64; FEATURE_DIM] {
        self.bounds.map(|b| b.0).unwrap_or([0.0; FEATURE_DIM])
    }

    /// Fitted maxima (zeros when unfitted).
    pub fn max(&self) -> [f64; FEATURE_DIM] {
        self.bounds.map(|b| b.1).unwrap_or([0.0; FEATURE_DIM])
    }

    fn bounds(&self) -> Result<&([f64; FEATURE_DIM], [f64; FEATURE_DIM])> {
        self.bounds.as_ref().ok_or(Error::UnfittedNormalizer)
    }

    pub fn normalize(&self, raw: &[f64; FEATURE_DIM]) -> Result<[f64; FEATURE_DIM]> {
        let (lo, hi) = self.bounds()?;
        let mut out = [0.0; FEATURE_DIM];
        for i in 0..FEATURE_DIM {
            out[i] = scale(raw[i], lo[i], hi[i]);
        }
        Ok(out)
    }

    pub fn denormalize(&self, unit: &[f64; FEATURE_DIM]) -> Result<[f64; FEATURE_DIM]> {
        let (lo, hi) = self.bounds()?;
        let mut out = [0.0; FEATURE_DIM];
        for i in 0..FEATURE_DIM {
            out[i] = unscale(unit[i], lo[i], hi[i]);
        }
        Ok(out)
    }

    /// Normalizes a single value of feature dimension `dim`.
    pub fn normalize_dim(&self, dim: usize, v: f64) -> Result<f64> {
        let (lo, hi) = self.bounds()?;
        Ok(scale(v, lo[dim], hi[dim]))
    }

    /// Maps a single normalized value of feature dimension `dim` back.
    pub fn denormalize_dim(&self, dim: usize, u: f64) -> Result<f64> {
        let (lo, hi) = self.bounds()?;
        Ok(unscale(u, lo[dim], hi[dim]))
    }
}

#[inline]
fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        2.0 * (v - lo) / (hi - lo) - 1.0
    } else {
        0.0
    }
}

#[inline]
fn unscale(u: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + 0.5 * (u + 1.0) * (hi - lo)
    } else {
        lo
    }
}

/// Min/max over every frame of every training window.
pub fn fit_normalizer(train: &[Window<'_>]) -> Result<Normalizer> {
    if train.is_empty() {
        return Err(Error::Empty("training windows"));
    }
    let mut lo = [f64::INFINITY; FEATURE_DIM];
    let mut hi = [f64::NEG_INFINITY; FEATURE_DIM];
    for w in train {
        for f in w.frames() {
            for (i, v) in f.features().into_iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
    }
    Normalizer::from_bounds(lo, hi)
}
