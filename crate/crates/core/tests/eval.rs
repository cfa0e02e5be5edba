mod common;

use common::{delay_session, sessions};
use htrail_core::dataset::{window_session, window_sessions, AblationMode, Session};
use htrail_core::eval::{
    aggregate, baseline_fit_n, baseline_predict, compute_metrics, evaluate_baseline, model_world_poses,
    run_ablation, trajectory_table, AblationConfig, BaselineConfig, MetricsReport,
};
use htrail_core::geometry::{relative, wrap_angle, Pose2D};
use htrail_core::model::TrainConfig;
use htrail_core::simulator::{gen_sessions, SimConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn pure_delay_lag_recovered_with_zero_error() {
    for d in [1, 3, 5, 8, 12, 16] {
        let s: Vec<Session> = (0..3).map(|i| delay_session(d, 90, 11 * d as u64 + i, "P01")).collect();
        assert_eq!(baseline_fit_n(&s).unwrap(), d);
        let cfg = BaselineConfig::new(d).unwrap();
        let windows: Vec<_> = window_sessions(&s).into_iter().filter(|w| w.start() + 8 > d).collect();
        let r = evaluate_baseline(&windows, &cfg).unwrap();
        assert!(r.mde < 1e-9 && r.fde < 1e-9, "d={d}: {r:?}");
    }
}

#[test]
fn glued_human_picks_smallest_lag() {
    let mut s = delay_session(0, 60, 3, "P01");
    for f in &mut s.frames {
        f.human_world = f.robot_world;
    }
    assert_eq!(baseline_fit_n(&[s]).unwrap(), 1);
}

#[test]
fn identity_offset_traces_delayed_path() {
    let s = delay_session(4, 60, 8, "P01");
    let w = window_session(&s)[10];
    for zero_offset in [false, true] {
        let cfg = BaselineConfig { n: 4, zero_offset };
        let pred = baseline_predict(&w, &cfg).unwrap();
        for (k, p) in pred.iter().enumerate() {
            let r = s.frames[10 + 8 + k - 4].robot_world;
            assert!(p.distance(&r) < 1e-12);
        }
    }
}

#[test]
fn zero_offset_differs_when_offset_is_real() {
    let s = &sessions(1, 3)[0];
    let w = window_session(s)[30];
    let a = baseline_predict(&w, &BaselineConfig { n: 8, zero_offset: false }).unwrap();
    let b = baseline_predict(&w, &BaselineConfig { n: 8, zero_offset: true }).unwrap();
    assert!(a[0].distance(&b[0]) > 1e-3);
}

fn random_pose(rng: &mut ChaCha8Rng) -> Pose2D {
    Pose2D::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.2..3.2))
}

// Flat recomputation straight from the definitions.
fn naive(pairs: &[(Vec<Pose2D>, Vec<Pose2D>)]) -> [f64; 4] {
    let mut acc = [0.0; 4];
    for (p, t) in pairs {
        let mut dsum = 0.0;
        let mut asum = 0.0;
        for k in 0..12 {
            let d = ((p[k].x - t[k].x).powi(2) + (p[k].y - t[k].y).powi(2)).sqrt();
            let mut a = (p[k].theta - t[k].theta) % (2.0 * std::f64::consts::PI);
            if a > std::f64::consts::PI {
                a -= 2.0 * std::f64::consts::PI;
            } else if a <= -std::f64::consts::PI {
                a += 2.0 * std::f64::consts::PI;
            }
            let a = a.abs() * 180.0 / std::f64::consts::PI;
            dsum += d;
            asum += a;
            if k == 11 {
                acc[1] += d;
                acc[3] += a;
            }
        }
        acc[0] += dsum / 12.0;
        acc[2] += asum / 12.0;
    }
    acc.map(|v| v / pairs.len() as f64)
}

#[test]
fn metrics_match_flat_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pairs: Vec<(Vec<Pose2D>, Vec<Pose2D>)> = (0..1000)
        .map(|_| ((0..12).map(|_| random_pose(&mut rng)).collect(), (0..12).map(|_| random_pose(&mut rng)).collect()))
        .collect();
    let reports: Vec<MetricsReport> = pairs.iter().map(|(p, t)| compute_metrics(p, t).unwrap()).collect();
    let agg = aggregate(&reports).unwrap();
    let want = naive(&pairs);
    assert_eq!(agg.windows, 1000);
    for (got, want) in [agg.mde, agg.fde, agg.mae, agg.fae].iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    // Grouped aggregation pools the same windows.
    let grouped: Vec<MetricsReport> = reports.chunks(7).map(|c| aggregate(c).unwrap()).collect();
    let g = aggregate(&grouped).unwrap();
    assert!((g.mde - agg.mde).abs() < 1e-12 && (g.fae - agg.fae).abs() < 1e-12);
}

proptest! {
    #[test]
    fn errors_are_bounded_and_frame_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let robot: Vec<Pose2D> = (0..12).map(|_| random_pose(&mut rng)).collect();
        let p: Vec<Pose2D> = (0..12).map(|_| random_pose(&mut rng)).collect();
        let t: Vec<Pose2D> = (0..12).map(|_| random_pose(&mut rng)).collect();
        let world = compute_metrics(&p, &t).unwrap();
        let rp: Vec<_> = robot.iter().zip(&p).map(|(r, x)| relative(*r, *x)).collect();
        let rt: Vec<_> = robot.iter().zip(&t).map(|(r, x)| relative(*r, *x)).collect();
        let rel = compute_metrics(&rp, &rt).unwrap();
        prop_assert!((world.mde - rel.mde).abs() < 1e-9);
        prop_assert!((world.fde - rel.fde).abs() < 1e-9);
        for v in [world.mae, world.fae] {
            prop_assert!((0.0..=180.0).contains(&v));
        }
        prop_assert!(world.mde >= 0.0 && world.fde >= 0.0);
    }

    #[test]
    fn constant_offset_has_equal_mean_and_final(dx in -1.0f64..1.0, dy in -1.0f64..1.0) {
        let t: Vec<Pose2D> = (0..12).map(|i| Pose2D::new(0.0, 0.0, 0.1 * i as f64)).collect();
        let p: Vec<Pose2D> = t.iter().map(|q| Pose2D::new(dx, dy, q.theta)).collect();
        let r = compute_metrics(&p, &t).unwrap();
        prop_assert_eq!(r.mde, r.fde);
    }
}

#[test]
fn angle_wrap_case() {
    let p = vec![[0.0, 0.0, wrap_angle(179f64.to_radians()).unwrap()]; 12];
    let t = vec![[0.0, 0.0, (-179f64).to_radians()]; 12];
    let r = compute_metrics(&p, &t).unwrap();
    assert!((r.mae - 2.0).abs() < 1e-12 && (r.fae - 2.0).abs() < 1e-12);
}

#[test]
fn trajectory_table_shape() {
    let s = &sessions(1, 2)[0];
    let w = window_session(s)[12];
    let pred = baseline_predict(&w, &BaselineConfig::new(8).unwrap()).unwrap();
    let t = trajectory_table(&w, &[("Baseline".into(), pred.clone())]).unwrap();
    assert_eq!(t.rows.len(), 20);
    assert!(t.rows[..8].iter().all(|r| r.predicted[0].is_none()));
    assert_eq!(t.rows[8].predicted[0], Some(pred[0]));
    assert_eq!(t.rows[19].time, (12 + 19) as f64 / 4.0);
    assert!(trajectory_table(&w, &[("x".into(), pred[..3].to_vec())]).is_err());
}

fn tiny_train() -> TrainConfig {
    TrainConfig { epochs: 2, hidden: 8, batch_size: 32, seed: 1, ..TrainConfig::default() }
}

fn two_participants() -> Vec<Session> {
    let cfg = SimConfig { seed: 17, duration_min: 12.0, duration_max: 14.0, ..SimConfig::default() };
    gen_sessions(&cfg, 2, 2).unwrap()
}

#[test]
fn ablation_table_layout() {
    let data = two_participants();
    let full = run_ablation(&data, &AblationConfig { train: tiny_train(), ..AblationConfig::default() }).unwrap();
    let tags: Vec<_> = full.rows.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(tags, ["Baseline", "R", "R+H", "R+D", "R+H+D"]);
    assert_eq!(full.folds.len(), 2);

    let only_r = AblationConfig { modes: vec![AblationMode::R], train: tiny_train(), zero_offset: false };
    let r = run_ablation(&data, &only_r).unwrap();
    assert_eq!(r.rows.len(), 2);
    // Same seed and data: the R row is unaffected by which other modes ran.
    assert_eq!(r.rows[1], full.rows[1]);
}

#[test]
fn fold_pooling_equals_flat_evaluation() {
    let data = two_participants();
    let cfg = AblationConfig { modes: vec![AblationMode::RH], train: tiny_train(), zero_offset: false };
    let res = run_ablation(&data, &cfg).unwrap();
    let mut flat = Vec::new();
    for fold in &res.folds {
        let test: Vec<&Session> = data.iter().filter(|s| s.participant_id == fold.test_participant).collect();
        let windows: Vec<_> =
            window_sessions(test.iter().copied()).into_iter().filter(|w| w.start() + 8 > fold.lag).collect();
        let m = &fold.models[0].params;
        for w in &windows {
            let p = htrail_core::model::predict(m, w, &fold.normalizer).unwrap();
            let truth: Vec<Pose2D> = w.future().iter().map(|f| f.human_world).collect();
            flat.push(compute_metrics(&model_world_poses(&p, w), &truth).unwrap());
        }
    }
    let want = aggregate(&flat).unwrap();
    let got = &res.rows[1];
    assert_eq!(got.windows, want.windows);
    assert!((got.mde - want.mde).abs() < 1e-12 && (got.fae - want.fae).abs() < 1e-12);
}

#[test]
fn ablation_needs_two_participants() {
    let cfg = SimConfig { seed: 1, duration_min: 10.0, duration_max: 10.0, ..SimConfig::default() };
    let one = gen_sessions(&cfg, 1, 2).unwrap();
    assert!(run_ablation(&one, &AblationConfig { train: tiny_train(), ..AblationConfig::default() }).is_err());
}
