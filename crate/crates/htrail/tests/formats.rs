use htrail::model_file::{load_model, load_model_as, parse_model, render_model, save_model, ModelFile};
use htrail::report::{parse_report, parse_trajectory, render_loss_history, render_report, render_trajectory};
use htrail::session_file::{load_session, parse_session, render_session, save_session};
use htrail::Error;
use htrail_core::dataset::{fit_normalizer, window_session, AblationMode};
use htrail_core::eval::{baseline_predict, trajectory_table, BaselineConfig, MetricsReport};
use htrail_core::model::{ModelParams, TrainConfig};
use htrail_core::simulator::{gen_session, SimConfig};
use proptest::prelude::*;

fn session(seed: u64) -> htrail_core::dataset::Session {
    gen_session(&SimConfig { seed, ..SimConfig::default() }, "P03", "S007").unwrap()
}

fn prov() -> Vec<(String, String)> {
    vec![("seed".into(), "9".into())]
}

#[test]
fn session_round_trip_is_exact() {
    let s = session(1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.session");
    save_session(&path, &s, &prov()).unwrap();
    assert_eq!(load_session(&path).unwrap(), s);
    let text = render_session(&s, &prov());
    assert!(text.starts_with("htrail.v1\tparticipant=P03\tsession=S007\tfps=4\t"));
    assert!(text.contains("# seed=9\n"));
}

#[test]
fn session_errors_are_distinct() {
    let text = render_session(&session(2), &[]);
    let v2 = text.replacen("htrail.v1", "htrail.v2", 1);
    assert!(matches!(parse_session(&v2, "x"), Err(Error::Version { .. })));

    let no_fps = text.replacen("\tfps=4", "", 1);
    assert!(matches!(parse_session(&no_fps, "x"), Err(Error::MissingField { field, .. }) if field == "fps"));

    let mut lines: Vec<&str> = text.lines().collect();
    let short = lines[3].rsplit_once('\t').unwrap().0.to_string();
    lines[3] = &short;
    let truncated = lines.join("\n");
    assert!(matches!(parse_session(&truncated, "x"), Err(Error::MissingField { line: 4, .. })));

    let garbage = text.replacen("\t0.", "\tzero.", 1);
    assert!(matches!(parse_session(&garbage, "x"), Err(Error::Malformed { .. })));

    let count = text.replacen("frames=", "frames=9", 1);
    assert!(matches!(parse_session(&count, "x"), Err(Error::Malformed { line: 1, .. })));
}

fn model_file(mode: AblationMode) -> ModelFile {
    let s = session(3);
    let norm = fit_normalizer(&window_session(&s)).unwrap();
    ModelFile {
        params: ModelParams::init_uniform(mode, 6, 0.3, 4),
        normalizer: norm,
        train: TrainConfig { epochs: 3, hidden: 6, seed: 12, lr: 0.0007, ..TrainConfig::default() },
        holdout: Some("P02".into()),
        provenance: prov(),
    }
}

#[test]
fn model_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    for mode in AblationMode::ALL {
        let m = model_file(mode);
        let path = dir.path().join("m.model");
        save_model(&path, &m).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.params.as_slice().iter().zip(m.params.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(load_model_as(&path, mode).unwrap(), m);
    }
}

#[test]
fn model_mode_and_corruption_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.model");
    save_model(&path, &model_file(AblationMode::R)).unwrap();
    assert!(matches!(
        load_model_as(&path, AblationMode::RHD),
        Err(Error::Core(htrail_core::Error::ShapeMismatch { expected: 15, actual: 8, .. }))
    ));

    let text = render_model(&model_file(AblationMode::R));
    let bad_len = text.replacen("len=", "len=1", 1);
    assert!(matches!(parse_model(&bad_len, "x"), Err(Error::Malformed { .. })));
    let bad_block = text.replacen("block\tgru1.b\t18\t1", "block\tgru1.b\t17\t1", 1);
    assert!(matches!(parse_model(&bad_block, "x"), Err(Error::Malformed { .. })));
    let mut lines: Vec<&str> = text.lines().collect();
    let last_block = lines.len() - 2;
    let cut = lines[last_block].split('\t').skip(1).collect::<Vec<_>>().join("\t");
    lines[last_block] = &cut;
    assert!(matches!(parse_model(&lines.join("\n"), "x"), Err(Error::Malformed { .. })));
    assert!(matches!(parse_model(&text.replacen(".model.v1", ".model.v0", 1), "x"), Err(Error::Version { .. })));
}

#[test]
fn trajectory_round_trip() {
    let s = session(5);
    let w = window_session(&s)[20];
    let base = baseline_predict(&w, &BaselineConfig::new(8).unwrap()).unwrap();
    let other: Vec<_> = base.iter().map(|p| htrail_core::geometry::Pose2D::new(p.x + 1e-3, p.y, p.theta)).collect();
    let table = trajectory_table(&w, &[("Baseline".into(), base), ("R+H".into(), other)]).unwrap();
    let text = render_trajectory(&table, &prov());
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 21);
    assert!(data[1..].iter().all(|l| l.split('\t').count() == 5 + 3 * 2));
    assert_eq!(parse_trajectory(&text, "t").unwrap(), table);
}

#[test]
fn report_and_loss_history() {
    let rows = vec![
        MetricsReport { method: "Baseline".into(), windows: 10, mde: 0.0813, fde: 0.2, mae: 3.5, fae: 7.25 },
        MetricsReport { method: "R+H+D".into(), windows: 10, mde: 0.0434, fde: 0.1, mae: 1.0 / 3.0, fae: 2.0 },
    ];
    let text = render_report(&rows, &prov());
    assert_eq!(parse_report(&text, "r").unwrap(), rows);
    let h = render_loss_history(&[0.5, 0.25, 0.125], &prov());
    assert_eq!(h.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

proptest! {
    #[test]
    fn reals_survive_the_text_format(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let text = htrail::format::real(v);
        prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
