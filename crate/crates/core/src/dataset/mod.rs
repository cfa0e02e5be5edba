//! Frames, sessions, windowing, feature assembly and cross-validation folds.

mod folds;
mod normalize;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use folds::{split_loocv, Fold};
pub use normalize::{fit_normalizer, Normalizer};

use crate::error::{Error, Result};
use crate::geometry::Pose2D;

/// Observed steps per window.
pub const OBS_LEN: usize = 8;
/// Predicted steps per window.
pub const PRED_LEN: usize = 12;
/// Frames per window.
pub const WINDOW_LEN: usize = OBS_LEN + PRED_LEN;

pub const ROBOT_DIM: usize = 5;
pub const HUMAN_DIM: usize = 3;
pub const HAPTIC_DIM: usize = 2;
pub const DEPTH_DIM: usize = 5;
/// Length of the full `R ⊕ P ⊕ H ⊕ D` feature vector.
pub const FEATURE_DIM: usize = ROBOT_DIM + HUMAN_DIM + HAPTIC_DIM + DEPTH_DIM;

/// Sessions are sampled at 4 frames per second.
pub const FPS: u32 = 4;

/// One 250 ms record.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Frame {
    pub t: usize,
    /// `(v_l, v_r, dx, dy, dtheta)`: wheel command issued at this step and
    /// the robot motion since the previous step, in the previous robot frame.
    pub robot: [f64; ROBOT_DIM],
    /// Human pose relative to the robot at this step.
    pub human: [f64; HUMAN_DIM],
    /// End-effector displacement `(r_x, r_y)`.
    pub haptic: [f64; HAPTIC_DIM],
    /// Depth latent.
    pub depth: [f64; DEPTH_DIM],
    pub robot_world: Pose2D,
    pub human_world: Pose2D,
}

impl Frame {
    /// Raw feature vector in `R, P, H, D` order.
    pub fn features(&self) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        out[..5].copy_from_slice(&self.robot);
        out[5..8].copy_from_slice(&self.human);
        out[8..10].copy_from_slice(&self.haptic);
        out[10..].copy_from_slice(&self.depth);
        out
    }
}

/// One guidance run.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub participant_id: String,
    pub session_id: String,
    pub fps: u32,
    pub frames: Vec<Frame>,
}

impl Session {
    /// Checks the frame-index and angle-wrapping invariants.
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::Empty("session frames"));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.t != i {
                return Err(Error::InvalidConfig(alloc::format!(
                    "frame index {} at position {i}",
                    f.t
                )));
            }
            let angles = [f.robot[4], f.human[2], f.robot_world.theta, f.human_world.theta];
            if angles.iter().any(|a| !(*a > -core::f64::consts::PI && *a <= core::f64::consts::PI)) {
                return Err(Error::InvalidConfig(alloc::format!("unwrapped angle in frame {i}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Twenty consecutive frames of one session: 8 observed, 12 to predict.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    session: &'a Session,
    start: usize,
}

impl<'a> Window<'a> {
    pub fn new(session: &'a Session, start: usize) -> Result<Self> {
        if start + WINDOW_LEN > session.frames.len() {
            return Err(Error::ShapeMismatch {
                what: "window frames",
                expected: WINDOW_LEN,
                actual: session.frames.len().saturating_sub(start),
            });
        }
        Ok(Self { session, start })
    }

    pub fn frames(&self) -> &'a [Frame] {
        &self.session.frames[self.start..self.start + WINDOW_LEN]
    }

    pub fn observed(&self) -> &'a [Frame] {
        &self.frames()[..OBS_LEN]
    }

    pub fn future(&self) -> &'a [Frame] {
        &self.frames()[OBS_LEN..]
    }

    pub fn session(&self) -> &'a Session {
        self.session
    }

    /// Index of the window's first frame within its session.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn participant_id(&self) -> &'a str {
        &self.session.participant_id
    }

    pub fn session_id(&self) -> &'a str {
        &self.session.session_id
    }

    /// Robot world pose at a window-relative step, which may reach back
    /// before the window into the session history.
    pub fn robot_world_at(&self, step: i64) -> Result<Pose2D> {
        let idx = self.start as i64 + step;
        if idx < 0 || idx as usize >= self.session.frames.len() {
            return Err(Error::MissingHistory { needed: idx });
        }
        Ok(self.session.frames[idx as usize].robot_world)
    }
}

/// All stride-1 windows of a session.
pub fn window_session(session: &Session) -> Vec<Window<'_>> {
    let n = session.frames.len();
    if n < WINDOW_LEN {
        return Vec::new();
    }
    (0..=n - WINDOW_LEN).map(|start| Window { session, start }).collect()
}

/// Windows of many sessions, in session order.
pub fn window_sessions<'a, I>(sessions: I) -> Vec<Window<'a>>
where
    I: IntoIterator<Item = &'a Session>,
{
    sessions.into_iter().flat_map(window_session).collect()
}

/// Which feature groups accompany the human trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AblationMode {
    R,
    RH,
    RD,
    RHD,
}

impl AblationMode {
    pub const ALL: [AblationMode; 4] = [Self::R, Self::RH, Self::RD, Self::RHD];

    pub fn uses_haptic(self) -> bool {
        matches!(self, Self::RH | Self::RHD)
    }

    pub fn uses_depth(self) -> bool {
        matches!(self, Self::RD | Self::RHD)
    }

    pub fn output_dim(self) -> usize {
        HUMAN_DIM
            + if self.uses_haptic() { HAPTIC_DIM } else { 0 }
            + if self.uses_depth() { DEPTH_DIM } else { 0 }
    }

    pub fn input_dim(self) -> usize {
        ROBOT_DIM + self.output_dim()
    }

    /// Positions in the full feature vector used by this mode, in order.
    pub fn feature_indices(self) -> &'static [usize] {
        match self {
            Self::R => &[0, 1, 2, 3, 4, 5, 6, 7],
            Self::RH => &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9],
            Self::RD => &[0, 1, 2, 3, 4, 5, 6, 7, 10, 11, 12, 13, 14],
            Self::RHD => &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::R => "R",
            Self::RH => "R+H",
            Self::RD => "R+D",
            Self::RHD => "R+H+D",
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match norm.to_ascii_uppercase().as_str() {
            "R" => Ok(Self::R),
            "R+H" => Ok(Self::RH),
            "R+D" => Ok(Self::RD),
            "R+H+D" => Ok(Self::RHD),
            _ => Err(Error::InvalidConfig(alloc::format!("unknown ablation mode {s:?}"))),
        }
    }
}

/// Normalized `R ⊕ P [⊕ H] [⊕ D]` input vector for one frame.
pub fn assemble_input(frame: &Frame, mode: AblationMode, norm: &Normalizer) -> Result<Vec<f64>> {
    let mut out = alloc::vec![0.0; mode.input_dim()];
    assemble_into(frame, mode, norm, &mut out)?;
    Ok(out)
}

pub(crate) fn assemble_into(frame: &Frame, mode: AblationMode, norm: &Normalizer, out: &mut [f64]) -> Result<()> {
    let normalized = norm.normalize(&frame.features())?;
    for (o, &i) in out.iter_mut().zip(mode.feature_indices()) {
        *o = normalized[i];
    }
    Ok(())
}
