use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::baseline::{baseline_available, baseline_fit_n, baseline_predict, BaselineConfig};
use super::metrics::{aggregate, compute_metrics, MetricsReport};
use crate::dataset::{
    fit_normalizer, split_loocv, window_sessions, AblationMode, Normalizer, Session, Window, OBS_LEN,
};
use crate::error::{Error, Result};
use crate::geometry::{compose, Pose2D};
use crate::model::{predict_many, train, ModelParams, Prediction, TrainConfig, TrainOutcome};

pub const BASELINE_TAG: &str = "Baseline";

#[derive(Debug, Clone, PartialEq)]
pub struct AblationConfig {
    pub modes: Vec<AblationMode>,
    pub train: TrainConfig,
    pub zero_offset: bool,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self { modes: AblationMode::ALL.to_vec(), train: TrainConfig::default(), zero_offset: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub test_participant: String,
    pub lag: usize,
    pub normalizer: Normalizer,
    /// Baseline first, then one report per requested mode.
    pub reports: Vec<MetricsReport>,
    pub models: Vec<TrainOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationResult {
    /// Pooled over every held-out window of every fold.
    pub rows: Vec<MetricsReport>,
    pub folds: Vec<FoldResult>,
}

/// Windows every method can be scored on under lag `n`.
pub fn comparable_windows<'a>(windows: &[Window<'a>], n: usize) -> Vec<Window<'a>> {
    windows.iter().copied().filter(|w| baseline_available(w, n)).collect()
}

/// Human world poses implied by robot-relative predictions and the
/// known future robot path.
pub fn model_world_poses(pred: &Prediction, w: &Window<'_>) -> Vec<Pose2D> {
    pred.human
        .iter()
        .zip(w.future())
        .map(|(rel, f)| compose(f.robot_world, *rel))
        .collect()
}

fn truth(w: &Window<'_>) -> Vec<Pose2D> {
    w.future().iter().map(|f| f.human_world).collect()
}

fn pooled(per_window: Vec<MetricsReport>, tag: &str) -> Result<MetricsReport> {
    Ok(aggregate(&per_window)?.with_method(tag))
}

pub fn evaluate_baseline(windows: &[Window<'_>], cfg: &BaselineConfig) -> Result<MetricsReport> {
    let per = windows
        .iter()
        .map(|w| compute_metrics(&baseline_predict(w, cfg)?, &truth(w)))
        .collect::<Result<Vec<_>>>()?;
    pooled(per, BASELINE_TAG)
}

pub fn evaluate_model(m: &ModelParams, norm: &Normalizer, windows: &[Window<'_>]) -> Result<MetricsReport> {
    let preds = predict_many(m, windows, norm)?;
    let per = preds
        .iter()
        .zip(windows)
        .map(|(p, w)| compute_metrics(&model_world_poses(p, w), &truth(w)))
        .collect::<Result<Vec<_>>>()?;
    pooled(per, m.mode().tag())
}

/// Leave-one-participant-out comparison of the baseline and one model
/// per requested mode.
pub fn run_ablation(sessions: &[Session], cfg: &AblationConfig) -> Result<AblationResult> {
    run_ablation_with(sessions, cfg, &mut |_| {})
}

/// [`run_ablation`] with a callback invoked after each finished fold.
pub fn run_ablation_with(
    sessions: &[Session],
    cfg: &AblationConfig,
    on_fold: &mut dyn FnMut(&FoldResult),
) -> Result<AblationResult> {
    if cfg.modes.is_empty() {
        return Err(Error::Empty("ablation modes"));
    }
    cfg.train.validate()?;
    let folds = split_loocv(sessions)?;
    let mut results = Vec::with_capacity(folds.len());
    for (i, fold) in folds.iter().enumerate() {
        let wrap = |e: Error| Error::Fold { fold: i, participant: fold.test_participant.clone(), source: Box::new(e) };
        let train_sessions: Vec<Session> = fold.train.iter().map(|&j| sessions[j].clone()).collect();
        let result = run_fold(i, &fold.test_participant, &train_sessions, fold.test.iter().map(|&j| &sessions[j]), cfg)
            .map_err(wrap)?;
        on_fold(&result);
        results.push(result);
    }
    let mut rows = Vec::with_capacity(cfg.modes.len() + 1);
    for r in 0..=cfg.modes.len() {
        let column: Vec<MetricsReport> = results.iter().map(|f| f.reports[r].clone()).collect();
        rows.push(aggregate(&column)?);
    }
    Ok(AblationResult { rows, folds: results })
}

fn run_fold<'a>(
    fold: usize,
    test_participant: &str,
    train_sessions: &[Session],
    test_sessions: impl Iterator<Item = &'a Session>,
    cfg: &AblationConfig,
) -> Result<FoldResult> {
    let train_windows = window_sessions(train_sessions);
    let norm = fit_normalizer(&train_windows)?;
    let lag = baseline_fit_n(train_sessions)?;
    let baseline = BaselineConfig { n: lag, zero_offset: cfg.zero_offset };
    let test_windows = comparable_windows(&window_sessions(test_sessions), lag);
    if test_windows.is_empty() {
        return Err(Error::Empty("held-out windows"));
    }
    debug_assert!(test_windows.iter().all(|w| w.start() + OBS_LEN > lag));

    let mut reports = Vec::with_capacity(cfg.modes.len() + 1);
    reports.push(evaluate_baseline(&test_windows, &baseline)?);
    let mut models = Vec::with_capacity(cfg.modes.len());
    for &mode in &cfg.modes {
        let outcome = train(&train_windows, &cfg.train, mode, &norm)?;
        reports.push(evaluate_model(&outcome.params, &norm, &test_windows)?);
        models.push(outcome);
    }
    Ok(FoldResult { fold, test_participant: test_participant.into(), lag, normalizer: norm, reports, models })
}
