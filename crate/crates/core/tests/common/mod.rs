#![allow(dead_code)]

use htrail_core::dataset::{assemble_input, AblationMode, Normalizer, Window, OBS_LEN, WINDOW_LEN};
use htrail_core::model::{forward_step, HiddenState, ModelParams};
use htrail_core::simulator::{gen_session, SimConfig};
use htrail_core::dataset::Session;

pub fn sessions(n: usize, seed: u64) -> Vec<Session> {
    let cfg = SimConfig { seed, ..SimConfig::default() };
    (0..n).map(|i| gen_session(&cfg, "P01", &format!("S{i:03}")).unwrap()).collect()
}

/// Encoder/decoder unrolled with the single-vector reference ops.
/// Returns the 12 normalized horizon outputs.
pub fn unroll_reference(m: &ModelParams, w: &Window<'_>, norm: &Normalizer) -> Vec<Vec<f64>> {
    let mode = m.mode();
    let frames = w.frames();
    let mut state = HiddenState::zeros(m.hidden());
    let mut last = Vec::new();
    for f in &frames[..OBS_LEN] {
        let x = assemble_input(f, mode, norm).unwrap();
        let (out, s) = forward_step(m, &state, &x).unwrap();
        state = s;
        last = out;
    }
    let mut outs = vec![last.clone()];
    for f in &frames[OBS_LEN..WINDOW_LEN - 1] {
        let full = assemble_input(f, AblationMode::R, norm).unwrap();
        let mut x = full[..5].to_vec();
        x.extend_from_slice(&last);
        let (out, s) = forward_step(m, &state, &x).unwrap();
        state = s;
        last = out;
        outs.push(last.clone());
    }
    outs
}

/// Naive triple-loop MSE over windows x steps x P components.
pub fn naive_loss(m: &ModelParams, windows: &[Window<'_>], norm: &Normalizer) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for w in windows {
        let outs = unroll_reference(m, w, norm);
        for (k, o) in outs.iter().enumerate() {
            let truth = assemble_input(&w.frames()[OBS_LEN + k], AblationMode::R, norm).unwrap();
            for j in 0..3 {
                let e = o[j] - truth[5 + j];
                acc += e * e;
                count += 1;
            }
        }
    }
    acc / count as f64
}

use htrail_core::geometry::Pose2D;
use htrail_core::simulator::gen_robot_path;
use rand::SeedableRng;

/// Human world pose equals the robot world pose `d` steps earlier.
pub fn delay_session(d: usize, len: usize, seed: u64, pid: &str) -> Session {
    let cfg = SimConfig::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let path = gen_robot_path(&cfg, len, &mut rng).unwrap();
    let frames = (0..len)
        .map(|t| htrail_core::dataset::Frame {
            t,
            robot_world: path[t].pose,
            human_world: if t >= d { path[t - d].pose } else { Pose2D::new(-2.5, -2.5, 0.0) },
            ..Default::default()
        })
        .collect();
    Session { participant_id: pid.into(), session_id: format!("S{seed:03}"), fps: 4, frames }
}
