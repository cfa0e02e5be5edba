//! Synthetic guidance sessions.
//!
//! A differential-drive robot follows a smooth random path inside a
//! 6 m x 6 m arena. A follower holds the end effector of a planar haptic
//! device mounted on the robot and is pulled along by the spring-damper
//! force `F = -k x_ee - b v_ee`. A sinusoidal side-to-side gait sway is
//! added to the observed torso pose, and an affine map of the relative
//! pose plus Gaussian noise stands in for the depth latent.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Frame, Session, DEPTH_DIM, FPS};
use crate::error::{Error, Result};
use crate::geometry::{relative, robot_delta, rotate_into, rotate_out, wrap, Pose2D, RelPose};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    /// Frame period in seconds.
    pub dt: f64,
    /// Session length is drawn uniformly from `[duration_min, duration_max]` seconds.
    pub duration_min: f64,
    pub duration_max: f64,
    pub wheelbase: f64,
    /// Spring constant, N/m.
    pub k: f64,
    /// Damping constant, N·s/m.
    pub b: f64,
    pub human_mass: f64,
    pub gait_amplitude: f64,
    pub gait_frequency: f64,
    /// Affine map from `(x, y, theta, 1)` of the relative pose to the latent.
    pub latent_map: [[f64; 4]; DEPTH_DIM],
    pub latent_noise_std: f64,
    /// End-effector workspace radius, m.
    pub workspace_radius: f64,
    /// Torso to hand-anchor distance along the follower heading, m.
    pub hand_reach: f64,
    /// Heading low-pass time constant, s.
    pub heading_tau: f64,
    /// Integration substeps per frame.
    pub substeps: u32,
    /// Half side of the square arena centred on the origin, m.
    pub arena_half: f64,
    pub max_wheel_speed: f64,
    /// Largest per-step change of a wheel command, m/s.
    pub max_wheel_step: f64,
    /// Mean forward speed the wheel random walk reverts to, m/s.
    pub cruise_speed: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dt: 0.25,
            duration_min: 20.0,
            duration_max: 30.0,
            wheelbase: 0.4,
            k: 500.0,
            b: 30.0,
            human_mass: 70.0,
            gait_amplitude: 0.02,
            gait_frequency: 0.9,
            latent_map: [
                [2.0, 0.5, 0.3, 0.1],
                [-0.4, 3.0, 0.2, -0.2],
                [0.3, -0.6, 1.5, 0.05],
                [1.0, 1.0, -0.5, 0.3],
                [-0.8, 0.4, 0.9, -0.1],
            ],
            latent_noise_std: 0.05,
            workspace_radius: 0.075,
            hand_reach: 0.6,
            heading_tau: 0.5,
            substeps: 10,
            arena_half: 3.0,
            max_wheel_speed: 0.5,
            max_wheel_step: 0.05,
            cruise_speed: 0.3,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("duration_min", self.duration_min),
            ("duration_max", self.duration_max),
            ("wheelbase", self.wheelbase),
            ("k", self.k),
            ("b", self.b),
            ("human_mass", self.human_mass),
            ("gait_amplitude", self.gait_amplitude),
            ("gait_frequency", self.gait_frequency),
            ("workspace_radius", self.workspace_radius),
            ("hand_reach", self.hand_reach),
            ("heading_tau", self.heading_tau),
            ("arena_half", self.arena_half),
            ("max_wheel_speed", self.max_wheel_speed),
            ("max_wheel_step", self.max_wheel_step),
        ];
        for (name, v) in positive {
            // gait amplitude 0 is allowed for the no-sway experiments.
            let ok = if name == "gait_amplitude" { v >= 0.0 } else { v > 0.0 };
            if !v.is_finite() || !ok {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.latent_noise_std >= 0.0 && self.latent_noise_std.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "latent_noise_std must be >= 0, got {}",
                self.latent_noise_std
            )));
        }
        if self.duration_min > self.duration_max {
            return Err(Error::InvalidConfig("duration_min > duration_max".into()));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidConfig("substeps must be >= 1".into()));
        }
        if !(0.0..=self.max_wheel_speed).contains(&self.cruise_speed) {
            return Err(Error::InvalidConfig("cruise_speed outside [0, max_wheel_speed]".into()));
        }
        if self.latent_map.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("latent_map"));
        }
        Ok(())
    }
}

/// End-effector state in the device frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HapticState {
    pub x_ee: [f64; 2],
    pub v_ee: [f64; 2],
}

/// Spring-damper restoring force on the end effector.
pub fn haptic_force(s: &HapticState, k: f64, b: f64) -> [f64; 2] {
    [-k * s.x_ee[0] - b * s.v_ee[0], -k * s.x_ee[1] - b * s.v_ee[1]]
}

/// Synthetic follower. `pose` is the sway-free body pose.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HumanState {
    pub pose: Pose2D,
    pub velocity: [f64; 2],
    pub gait_phase: f64,
}

impl HumanState {
    /// Torso pose as observed: body pose plus lateral gait sway.
    pub fn observed_pose(&self, cfg: &SimConfig) -> Pose2D {
        let sway = cfg.gait_amplitude * libm::sin(self.gait_phase);
        let [ox, oy] = rotate_out(self.pose.theta, [0.0, sway]);
        Pose2D { x: self.pose.x + ox, y: self.pose.y + oy, theta: self.pose.theta }
    }

    fn hand_anchor(&self, cfg: &SimConfig) -> [f64; 2] {
        let torso = self.observed_pose(cfg);
        let (s, c) = libm::sincos(torso.theta);
        [torso.x + cfg.hand_reach * c, torso.y + cfg.hand_reach * s]
    }
}

fn clip_to_radius(v: [f64; 2], r: f64) -> [f64; 2] {
    let n = libm::hypot(v[0], v[1]);
    if n > r {
        [v[0] * r / n, v[1] * r / n]
    } else {
        v
    }
}

fn haptic_state(h: &HumanState, robot: Pose2D, robot_vel: [f64; 2], cfg: &SimConfig) -> HapticState {
    let anchor = h.hand_anchor(cfg);
    let x_ee = rotate_into(robot.theta, [anchor[0] - robot.x, anchor[1] - robot.y]);
    let v_ee = rotate_into(robot.theta, [h.velocity[0] - robot_vel[0], h.velocity[1] - robot_vel[1]]);
    HapticState { x_ee: clip_to_radius(x_ee, cfg.workspace_radius), v_ee }
}

fn lerp_pose(a: Pose2D, b: Pose2D, s: f64) -> Pose2D {
    Pose2D {
        x: a.x + s * (b.x - a.x),
        y: a.y + s * (b.y - a.y),
        theta: wrap(a.theta + s * wrap(b.theta - a.theta)),
    }
}

/// Advances the follower by one frame while the robot moves from
/// `robot_prev` to `robot_curr`.
///
/// Integration is semi-implicit Euler over `cfg.substeps` substeps with the
/// robot pose interpolated linearly. Returns the new state and the haptic
/// state at the end of the frame.
pub fn step_human(h: &HumanState, robot_prev: Pose2D, robot_curr: Pose2D, cfg: &SimConfig) -> (HumanState, HapticState) {
    let n = cfg.substeps.max(1);
    let dts = cfg.dt / f64::from(n);
    let robot_vel = [(robot_curr.x - robot_prev.x) / cfg.dt, (robot_curr.y - robot_prev.y) / cfg.dt];
    let mut h = *h;
    for i in 0..n {
        let robot = lerp_pose(robot_prev, robot_curr, f64::from(i + 1) / f64::from(n));
        let hs = haptic_state(&h, robot, robot_vel, cfg);
        let f = rotate_out(robot.theta, haptic_force(&hs, cfg.k, cfg.b));
        h.velocity[0] += dts * f[0] / cfg.human_mass;
        h.velocity[1] += dts * f[1] / cfg.human_mass;
        h.pose.x += dts * h.velocity[0];
        h.pose.y += dts * h.velocity[1];

        let speed = libm::hypot(h.velocity[0], h.velocity[1]);
        let target = libm::atan2(h.velocity[1], h.velocity[0]);
        // Heading follows forward motion only; a backward step leaves the body orientation alone.
        if speed > 0.02 && libm::cos(target - h.pose.theta) > 0.0 {
            let gain = (dts / cfg.heading_tau).min(1.0);
            h.pose.theta = wrap(h.pose.theta + gain * wrap(target - h.pose.theta));
        }
        h.gait_phase = wrap(h.gait_phase + TAU * cfg.gait_frequency * dts);
    }
    let hs = haptic_state(&h, robot_curr, robot_vel, cfg);
    (h, hs)
}

/// Depth-latent surrogate: `latent_map · (x, y, theta, 1) + std · noise`.
pub fn synth_depth_latent(p: RelPose, cfg: &SimConfig, noise: [f64; DEPTH_DIM]) -> [f64; DEPTH_DIM] {
    let hom = [p.x, p.y, p.theta, 1.0];
    let mut z = [0.0; DEPTH_DIM];
    for (i, row) in cfg.latent_map.iter().enumerate() {
        z[i] = row.iter().zip(hom).map(|(m, v)| m * v).sum::<f64>() + cfg.latent_noise_std * noise[i];
    }
    z
}

/// A wheel command and the robot pose at the step it is issued.
/// The command drives the motion into the next step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStep {
    pub v_l: f64,
    pub v_r: f64,
    pub pose: Pose2D,
}

/// Exact constant-twist unicycle integration over `dt`.
pub fn integrate_unicycle(pose: Pose2D, v_l: f64, v_r: f64, wheelbase: f64, dt: f64) -> Pose2D {
    let v = 0.5 * (v_l + v_r);
    let w = (v_r - v_l) / wheelbase;
    let th = pose.theta;
    let dth = w * dt;
    if dth.abs() < 1e-9 {
        // Second-order expansion of the arc for tiny rotations.
        let mid = th + 0.5 * dth;
        let (s, c) = libm::sincos(mid);
        return Pose2D { x: pose.x + v * dt * c, y: pose.y + v * dt * s, theta: wrap(th + dth) };
    }
    let r = v / w;
    Pose2D {
        x: pose.x + r * (libm::sin(th + dth) - libm::sin(th)),
        y: pose.y - r * (libm::cos(th + dth) - libm::cos(th)),
        theta: wrap(th + dth),
    }
}

/// Poses produced by applying `commands` from `start`; the k-th command
/// moves the robot from step k to step k+1.
pub fn integrate_commands(start: Pose2D, commands: &[(f64, f64)], cfg: &SimConfig) -> Vec<PathStep> {
    let mut pose = start;
    commands
        .iter()
        .map(|&(v_l, v_r)| {
            let step = PathStep { v_l, v_r, pose };
            pose = integrate_unicycle(pose, v_l, v_r, cfg.wheelbase, cfg.dt);
            step
        })
        .collect()
}

/// Random smooth path of `steps` entries.
///
/// Wheel commands follow a bounded random walk that reverts to the cruise
/// speed; near the arena walls the walk steers toward the centre and slows.
pub fn gen_robot_path<R: Rng>(cfg: &SimConfig, steps: usize, rng: &mut R) -> Result<Vec<PathStep>> {
    cfg.validate()?;
    let half = cfg.arena_half;
    let start = Pose2D::new(
        rng.random_range(-0.4 * half..0.4 * half),
        rng.random_range(-0.4 * half..0.4 * half),
        rng.random_range(-PI..PI),
    );
    let step_max = cfg.max_wheel_step;
    let mut v_l = cfg.cruise_speed;
    let mut v_r = cfg.cruise_speed;
    let mut pose = start;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push(PathStep { v_l, v_r, pose });
        pose = integrate_unicycle(pose, v_l, v_r, cfg.wheelbase, cfg.dt);

        let (s, c) = libm::sincos(pose.theta);
        let look = 1.0;
        let ahead = [pose.x + look * c, pose.y + look * s];
        let margin = half - 0.6;
        let outside = ahead[0].abs() > margin || ahead[1].abs() > margin;
        let near_wall = pose.x.abs() > half - 0.7 || pose.y.abs() > half - 0.7;
        let heading_out = pose.x * c + pose.y * s > 0.0;

        let mean = 0.5 * (v_l + v_r);
        let diff = v_r - v_l;
        let target_speed = if outside && near_wall && heading_out { 0.3 * cfg.cruise_speed } else { cfg.cruise_speed };
        let mut d_mean = 0.2 * (target_speed - mean) + rng.random_range(-0.6 * step_max..0.6 * step_max);
        let mut d_diff = -0.1 * diff + rng.random_range(-step_max..step_max);
        if outside {
            // Turn toward the arena centre.
            let turn = if c * -pose.y - s * -pose.x >= 0.0 { 1.0 } else { -1.0 };
            d_diff = 0.8 * step_max * turn + 0.2 * d_diff;
        }
        d_mean = d_mean.clamp(-step_max, step_max);
        let dl = (d_mean - 0.5 * d_diff).clamp(-step_max, step_max);
        let dr = (d_mean + 0.5 * d_diff).clamp(-step_max, step_max);
        v_l = (v_l + dl).clamp(-cfg.max_wheel_speed, cfg.max_wheel_speed);
        v_r = (v_r + dr).clamp(-cfg.max_wheel_speed, cfg.max_wheel_speed);
    }
    Ok(out)
}

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for one `(participant, session)` pair.
pub fn session_seed(seed: u64, participant_id: &str, session_id: &str) -> u64 {
    let h = fnv1a(participant_id.as_bytes(), 0xcbf2_9ce4_8422_2325);
    let h = fnv1a(&[0xff], h);
    let h = fnv1a(session_id.as_bytes(), h);
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Number of frames for a session of `duration` seconds.
pub fn frame_count(duration: f64, dt: f64) -> usize {
    libm::round(duration / dt) as usize
}

/// Generates one session. Deterministic in `(cfg, participant_id, session_id)`.
pub fn gen_session(cfg: &SimConfig, participant_id: &str, session_id: &str) -> Result<Session> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(session_seed(cfg.seed, participant_id, session_id));
    let duration = if cfg.duration_max > cfg.duration_min {
        rng.random_range(cfg.duration_min..=cfg.duration_max)
    } else {
        cfg.duration_min
    };
    let n = frame_count(duration, cfg.dt);
    if n == 0 {
        return Err(Error::InvalidConfig(format!("session of {duration} s has no frames")));
    }
    let path = gen_robot_path(cfg, n, &mut rng)?;

    let r0 = path[0].pose;
    let (s0, c0) = libm::sincos(r0.theta);
    let v0 = 0.5 * (path[0].v_l + path[0].v_r);
    let mut human = HumanState {
        pose: Pose2D { x: r0.x - cfg.hand_reach * c0, y: r0.y - cfg.hand_reach * s0, theta: r0.theta },
        velocity: [v0 * c0, v0 * s0],
        gait_phase: rng.random_range(-PI..PI),
    };
    let mut haptic = haptic_state(&human, r0, human.velocity, cfg);

    let mut frames = Vec::with_capacity(n);
    for (t, step) in path.iter().enumerate() {
        let delta = if t == 0 {
            RelPose::IDENTITY
        } else {
            let prev = path[t - 1].pose;
            let (h, hs) = step_human(&human, prev, step.pose, cfg);
            human = h;
            haptic = hs;
            robot_delta(prev, step.pose)
        };
        let human_world = human.observed_pose(cfg);
        let rel = relative(step.pose, human_world);
        let mut noise = [0.0; DEPTH_DIM];
        for v in &mut noise {
            *v = rng.sample(StandardNormal);
        }
        frames.push(Frame {
            t,
            robot: [step.v_l, step.v_r, delta.x, delta.y, delta.theta],
            human: rel.to_array(),
            haptic: haptic.x_ee,
            depth: synth_depth_latent(rel, cfg, noise),
            robot_world: step.pose,
            human_world,
        });
    }
    Ok(Session {
        participant_id: String::from(participant_id),
        session_id: String::from(session_id),
        fps: FPS,
        frames,
    })
}

/// Sessions for `participants x sessions`, ids `P01..` and `S001..`.
pub fn gen_sessions(cfg: &SimConfig, participants: usize, sessions: usize) -> Result<Vec<Session>> {
    let mut out = Vec::with_capacity(participants * sessions);
    for p in 0..participants {
        for s in 0..sessions {
            out.push(gen_session(cfg, &participant_name(p), &session_name(s))?);
        }
    }
    Ok(out)
}

pub fn participant_name(index: usize) -> String {
    format!("P{:02}", index + 1)
}

pub fn session_name(index: usize) -> String {
    format!("S{:03}", index + 1)
}
