use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{Window, FPS, OBS_LEN, PRED_LEN, WINDOW_LEN};
use crate::error::{Error, Result};
use crate::geometry::Pose2D;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub time: f64,
    pub truth: Pose2D,
    /// One entry per method; `None` on observed rows.
    pub predicted: Vec<Option<Pose2D>>,
}

/// Plot-ready world-frame view of one window and its forecasts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub methods: Vec<String>,
    pub rows: Vec<TrajectoryRow>,
}

pub fn trajectory_table(w: &Window<'_>, methods: &[(String, Vec<Pose2D>)]) -> Result<TrajectoryTable> {
    for (_, p) in methods {
        if p.len() != PRED_LEN {
            return Err(Error::ShapeMismatch { what: "trajectory predictions", expected: PRED_LEN, actual: p.len() });
        }
    }
    let fps = w.session().fps.max(1) as f64;
    debug_assert!(w.session().fps == FPS || w.session().fps > 0);
    let rows = (0..WINDOW_LEN)
        .map(|step| TrajectoryRow {
            step,
            time: (w.start() + step) as f64 / fps,
            truth: w.frames()[step].human_world,
            predicted: methods
                .iter()
                .map(|(_, p)| step.checked_sub(OBS_LEN).map(|k| p[k]))
                .collect(),
        })
        .collect();
    Ok(TrajectoryTable { methods: methods.iter().map(|(m, _)| m.clone()).collect(), rows })
}
