use alloc::vec::Vec;

use crate::dataset::{Session, Window, OBS_LEN, WINDOW_LEN};
use crate::error::{Error, Result};
use crate::geometry::{compose, relative, Pose2D, RelPose};

pub const LAG_MIN: usize = 1;
pub const LAG_MAX: usize = 16;

/// Delayed-follower predictor: the human keeps the offset it had from
/// the robot's pose `n` steps earlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineConfig {
    pub n: usize,
    /// Attach the human directly to the delayed robot pose instead of
    /// carrying the observed offset.
    pub zero_offset: bool,
}

impl BaselineConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n < LAG_MIN {
            return Err(Error::InvalidConfig("baseline lag must be >= 1".into()));
        }
        Ok(Self { n, zero_offset: false })
    }
}

/// Lag in `[1, 16]` minimizing the mean distance between the human at
/// `t` and the robot at `t - n`. Ties go to the smaller lag.
pub fn baseline_fit_n(sessions: &[Session]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for n in LAG_MIN..=LAG_MAX {
        let mut sum = 0.0;
        let mut count = 0usize;
        for s in sessions {
            for t in n..s.frames.len() {
                sum += s.frames[t].human_world.distance(&s.frames[t - n].robot_world);
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let mean = sum / count as f64;
        if best.is_none_or(|(_, m)| mean < m) {
            best = Some((n, mean));
        }
    }
    best.map(|(n, _)| n).ok_or(Error::Empty("baseline lag candidates"))
}

/// Whether the session holds enough robot history before `w` for lag `n`.
pub fn baseline_available(w: &Window<'_>, n: usize) -> bool {
    w.start() + OBS_LEN > n
}

/// The 12 predicted human world poses following the observed part of `w`.
pub fn baseline_predict(w: &Window<'_>, cfg: &BaselineConfig) -> Result<Vec<Pose2D>> {
    if cfg.n < LAG_MIN {
        return Err(Error::InvalidConfig("baseline lag must be >= 1".into()));
    }
    let n = cfg.n as i64;
    let last = OBS_LEN as i64 - 1;
    let anchor = w.robot_world_at(last - n)?;
    let delta = if cfg.zero_offset {
        RelPose::IDENTITY
    } else {
        relative(anchor, w.frames()[OBS_LEN - 1].human_world)
    };
    (OBS_LEN as i64..WINDOW_LEN as i64).map(|t| Ok(compose(w.robot_world_at(t - n)?, delta))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{window_session, Frame};
    use alloc::string::ToString;

    fn stationary(len: usize) -> Session {
        let frames = (0..len)
            .map(|t| Frame {
                t,
                robot_world: Pose2D::new(1.0, 2.0, 0.5),
                human_world: Pose2D::new(0.4, 1.7, 0.4),
                ..Frame::default()
            })
            .collect();
        Session { participant_id: "P".to_string(), session_id: "S".to_string(), fps: 4, frames }
    }

    #[test]
    fn stationary_robot_repeats_last_observed_pose() {
        let s = stationary(30);
        let w = window_session(&s)[5];
        let pred = baseline_predict(&w, &BaselineConfig::new(4).unwrap()).unwrap();
        let h = w.frames()[OBS_LEN - 1].human_world;
        for p in pred {
            assert!(p.distance(&h) < 1e-12 && (p.theta - h.theta).abs() < 1e-12);
        }
    }

    #[test]
    fn lookback_before_session_start() {
        let s = stationary(30);
        let w = window_session(&s)[0];
        assert!(baseline_available(&w, 7));
        assert!(!baseline_available(&w, 8));
        assert!(matches!(baseline_predict(&w, &BaselineConfig::new(8).unwrap()), Err(Error::MissingHistory { needed: -1 })));
    }

    #[test]
    fn stationary_everything_ties_to_one() {
        let mut s = stationary(30);
        for f in &mut s.frames {
            f.human_world = f.robot_world;
        }
        assert_eq!(baseline_fit_n(core::slice::from_ref(&s)).unwrap(), 1);
    }

    #[test]
    fn no_pairs() {
        assert!(baseline_fit_n(&[stationary(1)]).is_err());
        assert!(baseline_fit_n(&[]).is_err());
        assert!(BaselineConfig::new(0).is_err());
    }
}
