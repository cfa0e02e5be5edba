//! Baseline follower, displacement/angle metrics and the LOOCV ablation
//! harness.

mod ablation;
mod baseline;
mod metrics;
mod trajectory;

pub use ablation::{
    comparable_windows, evaluate_baseline, evaluate_model, model_world_poses, run_ablation, run_ablation_with,
    AblationConfig, AblationResult, FoldResult, BASELINE_TAG,
};
pub use baseline::{baseline_available, baseline_fit_n, baseline_predict, BaselineConfig, LAG_MAX, LAG_MIN};
pub use metrics::{aggregate, compute_metrics, MetricsReport, PoseLike};
pub use trajectory::{trajectory_table, TrajectoryRow, TrajectoryTable};
