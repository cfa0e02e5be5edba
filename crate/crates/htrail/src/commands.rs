//! Subcommand implementations. Each returns the lines it would print so
//! callers (and tests) decide where they go.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use htrail_core::dataset::{window_sessions, AblationMode, Session};
use htrail_core::eval::{
    baseline_fit_n, baseline_predict, comparable_windows, evaluate_baseline, evaluate_model, model_world_poses,
    run_ablation_with, trajectory_table, AblationConfig, BaselineConfig, BASELINE_TAG,
};
use htrail_core::dataset::fit_normalizer;
use htrail_core::model::{predict, train};
use htrail_core::simulator::{gen_session, participant_name, session_name};

use crate::config::{self, Resolver, TrainFlags};
use crate::error::{Error, Result};
use crate::format::{data_lines, provenance_lines, read_file, write_file};
use crate::model_file::{load_model, save_model, ModelFile};
use crate::report::{aligned_table, parse_report, render_folds, render_loss_history, render_report, render_trajectory};
use crate::session_file::{load_session, save_session};

pub const MANIFEST: &str = "manifest.tsv";
pub const REPORT: &str = "report.tsv";

#[derive(Debug, Parser)]
#[command(name = "htrail", version, about = "Follower trajectory prediction for a haptic guide robot")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate guided walking sessions.
    Gen(GenArgs),
    /// Train predictors for one or more ablation modes.
    Train(TrainArgs),
    /// Compare predictors against the delayed-follower baseline.
    Eval(EvalArgs),
    /// Print a saved metrics table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub participants: Option<usize>,
    #[arg(long)]
    pub sessions: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub duration_min: Option<f64>,
    #[arg(long)]
    pub duration_max: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone, Default)]
pub struct TrainOpts {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl TrainOpts {
    fn flags(&self) -> TrainFlags {
        TrainFlags { epochs: self.epochs, batch: self.batch, lr: self.lr, hidden: self.hidden, seed: self.seed }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Ablation mode(s): r, r+h, r+d, r+h+d; comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub mode: Vec<AblationMode>,
    /// Participant left out of training.
    #[arg(long)]
    pub holdout: Option<String>,
    #[command(flatten)]
    pub train: TrainOpts,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Evaluate these trained models instead of running the cross-validated ablation.
    #[arg(long, num_args = 1..)]
    pub models: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub mode: Vec<AblationMode>,
    #[arg(long)]
    pub holdout: Option<String>,
    #[command(flatten)]
    pub train: TrainOpts,
    /// Attach the baseline directly to the delayed robot pose.
    #[arg(long)]
    pub zero_offset: bool,
    #[arg(long)]
    pub export_trajectories: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report file, or a directory containing one.
    pub input: PathBuf,
}

pub fn run(cli: Cli) -> Result<Vec<String>> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))
}

pub fn cmd_gen(a: &GenArgs) -> Result<Vec<String>> {
    let mut r = Resolver::from_path(a.config.as_deref())?;
    let participants: usize = r.value("participants", a.participants, 6)?;
    let sessions: usize = r.value("sessions", a.sessions, 150)?;
    if participants == 0 || sessions == 0 {
        return Err(Error::Usage("--participants and --sessions must be at least 1".into()));
    }
    let seed = r.seed(a.seed)?;
    let sim = config::sim_config(&mut r, seed, (a.duration_min, a.duration_max))?;
    let provenance = r.provenance();

    create_dir(&a.out)?;
    let mut manifest = String::new();
    provenance_lines(&mut manifest, &provenance);
    manifest.push_str("# participant\tsession\tfile\tframes\n");
    for p in 0..participants {
        let pid = participant_name(p);
        for s in 0..sessions {
            let sid = session_name(s);
            let session = gen_session(&sim, &pid, &sid)?;
            let file = format!("{pid}_{sid}.session");
            save_session(&a.out.join(&file), &session, &provenance)?;
            manifest.push_str(&format!("{pid}\t{sid}\t{file}\t{}\n", session.frames.len()));
        }
    }
    write_file(&a.out.join(MANIFEST), &manifest)?;
    Ok(vec![format!("wrote {} sessions to {}", participants * sessions, a.out.display())])
}

/// Sessions listed in a data directory's manifest, in manifest order.
pub fn load_dataset(dir: &Path) -> Result<Vec<Session>> {
    let path = dir.join(MANIFEST);
    let text = read_file(&path)?;
    let origin = path.display().to_string();
    let mut out = Vec::new();
    for line in data_lines(&text, &origin) {
        line.expect_len(4, &["participant", "session", "file", "frames"])?;
        let s = load_session(&dir.join(line.fields[2]))?;
        if s.participant_id != line.fields[0] || s.session_id != line.fields[1] {
            return Err(line.malformed(format!("{} does not hold {}/{}", line.fields[2], line.fields[0], line.fields[1])));
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(Error::Core(htrail_core::Error::Empty("sessions in manifest")));
    }
    Ok(out)
}

fn split_holdout<'a>(sessions: &'a [Session], holdout: Option<&str>) -> Result<(Vec<&'a Session>, Vec<&'a Session>)> {
    let Some(h) = holdout else {
        return Ok((sessions.iter().collect(), Vec::new()));
    };
    let (test, train): (Vec<&Session>, Vec<&Session>) = sessions.iter().partition(|s| s.participant_id == h);
    if test.is_empty() {
        return Err(Error::Usage(format!("holdout participant {h:?} not in data")));
    }
    if train.is_empty() {
        return Err(Error::Core(htrail_core::Error::Empty("training sessions")));
    }
    Ok((train, test))
}

/// File-name form of a mode tag: `R+H` -> `r_h`.
pub fn mode_slug(mode: AblationMode) -> String {
    mode.tag().to_ascii_lowercase().replace('+', "_")
}

pub fn cmd_train(a: &TrainArgs) -> Result<Vec<String>> {
    let mut r = Resolver::from_path(a.config.as_deref())?;
    let modes = r.modes(&a.mode, &[AblationMode::RHD])?;
    let holdout = r.optional("holdout", a.holdout.clone())?;
    let cfg = config::train_config(&mut r, a.train.flags())?;
    let provenance = r.provenance();

    let sessions = load_dataset(&a.data)?;
    let (train_side, _) = split_holdout(&sessions, holdout.as_deref())?;
    let windows = window_sessions(train_side.iter().copied());
    let norm = fit_normalizer(&windows)?;
    create_dir(&a.out)?;
    let mut lines = Vec::new();
    for mode in modes {
        let outcome = train(&windows, &cfg, mode, &norm)?;
        let slug = mode_slug(mode);
        let file = ModelFile {
            params: outcome.params,
            normalizer: norm.clone(),
            train: cfg.clone(),
            holdout: holdout.clone(),
            provenance: provenance.clone(),
        };
        save_model(&a.out.join(format!("model_{slug}.model")), &file)?;
        write_file(&a.out.join(format!("loss_{slug}.tsv")), &render_loss_history(&outcome.history, &provenance))?;
        lines.push(format!(
            "{mode}: {} windows, {} steps, final loss {:.6e}",
            windows.len(),
            outcome.steps,
            outcome.history.last().copied().unwrap_or(f64::NAN)
        ));
    }
    Ok(lines)
}

/// `count` indices spread evenly over `0..len`.
fn sample_indices(len: usize, count: usize) -> Vec<usize> {
    let count = count.min(len);
    (0..count).map(|i| i * len / count).collect()
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Vec<String>> {
    let mut r = Resolver::from_path(a.config.as_deref())?;
    let export: usize = r.value("export_trajectories", a.export_trajectories, 0)?;
    let zero_offset = r.value("zero_offset", a.zero_offset.then_some(true), false)?;
    let sessions = load_dataset(&a.data)?;
    create_dir(&a.out)?;
    if a.models.is_empty() {
        eval_ablation(a, r, &sessions, export, zero_offset)
    } else {
        eval_models(a, r, &sessions, export, zero_offset)
    }
}

fn eval_ablation(
    a: &EvalArgs,
    mut r: Resolver,
    sessions: &[Session],
    export: usize,
    zero_offset: bool,
) -> Result<Vec<String>> {
    let modes = r.modes(&a.mode, &AblationMode::ALL)?;
    let train = config::train_config(&mut r, a.train.flags())?;
    let provenance = r.provenance();
    let cfg = AblationConfig { modes: modes.clone(), train, zero_offset };
    let mut lines = Vec::new();
    let result = run_ablation_with(sessions, &cfg, &mut |f| {
        eprintln!("fold {} (held-out {}): lag {}, {} windows", f.fold, f.test_participant, f.lag, f.reports[0].windows);
    })?;
    write_file(&a.out.join(REPORT), &render_report(&result.rows, &provenance))?;
    write_file(&a.out.join("folds.tsv"), &render_folds(&result, &provenance))?;

    if export > 0 {
        // Pool the held-out windows of every fold, then sample evenly.
        let mut pool = Vec::new();
        for f in &result.folds {
            let test = sessions.iter().filter(|s| s.participant_id == f.test_participant);
            for w in comparable_windows(&window_sessions(test), f.lag) {
                pool.push((f, w));
            }
        }
        for (k, i) in sample_indices(pool.len(), export).into_iter().enumerate() {
            let (f, w) = pool[i];
            let mut methods = vec![(
                BASELINE_TAG.to_string(),
                baseline_predict(&w, &BaselineConfig { n: f.lag, zero_offset })?,
            )];
            for m in &f.models {
                let p = predict(&m.params, &w, &f.normalizer)?;
                methods.push((m.params.mode().tag().to_string(), model_world_poses(&p, &w)));
            }
            write_trajectory(&a.out, k, &w, &methods, &provenance)?;
        }
    }
    lines.push(aligned_table(&result.rows));
    Ok(lines)
}

fn write_trajectory(
    out: &Path,
    k: usize,
    w: &htrail_core::dataset::Window<'_>,
    methods: &[(String, Vec<htrail_core::geometry::Pose2D>)],
    provenance: &[(String, String)],
) -> Result<()> {
    let table = trajectory_table(w, methods)?;
    let mut prov = provenance.to_vec();
    prov.push(("window".into(), format!("{}/{}@{}", w.participant_id(), w.session_id(), w.start())));
    write_file(&out.join(format!("trajectory_{k:03}.tsv")), &render_trajectory(&table, &prov))
}

fn eval_models(
    a: &EvalArgs,
    mut r: Resolver,
    sessions: &[Session],
    export: usize,
    zero_offset: bool,
) -> Result<Vec<String>> {
    let models = a.models.iter().map(|p| load_model(p)).collect::<Result<Vec<_>>>()?;
    let wanted = r.modes(&a.mode, &models.iter().map(|m| m.params.mode()).collect::<Vec<_>>())?;
    if wanted.len() != models.len() {
        return Err(Error::Usage(format!("{} models given but {} modes requested", models.len(), wanted.len())));
    }
    for (m, want) in models.iter().zip(&wanted) {
        if m.params.mode() != *want {
            return Err(htrail_core::Error::ModeMismatch { expected: want.tag(), actual: m.params.mode().tag() }.into());
        }
    }
    let holdout = r.optional("holdout", a.holdout.clone().or_else(|| models[0].holdout.clone()))?;
    let provenance = r.provenance();
    let (train_side, test_side) = split_holdout(sessions, holdout.as_deref())?;
    let test_side = if test_side.is_empty() { train_side.clone() } else { test_side };
    let owned: Vec<Session> = train_side.into_iter().cloned().collect();
    let lag = baseline_fit_n(&owned)?;
    let baseline = BaselineConfig { n: lag, zero_offset };
    let windows = comparable_windows(&window_sessions(test_side.iter().copied()), lag);
    let mut rows = vec![evaluate_baseline(&windows, &baseline)?];
    for m in &models {
        rows.push(evaluate_model(&m.params, &m.normalizer, &windows)?);
    }
    write_file(&a.out.join(REPORT), &render_report(&rows, &provenance))?;
    for (k, i) in sample_indices(windows.len(), export).into_iter().enumerate() {
        let w = windows[i];
        let mut methods = vec![(BASELINE_TAG.to_string(), baseline_predict(&w, &baseline)?)];
        for m in &models {
            let p = predict(&m.params, &w, &m.normalizer)?;
            methods.push((m.params.mode().tag().to_string(), model_world_poses(&p, &w)));
        }
        write_trajectory(&a.out, k, &w, &methods, &provenance)?;
    }
    Ok(vec![aligned_table(&rows)])
}

pub fn cmd_report(a: &ReportArgs) -> Result<Vec<String>> {
    let path = if a.input.is_dir() { a.input.join(REPORT) } else { a.input.clone() };
    let rows = parse_report(&read_file(&path)?, &path.display().to_string())?;
    Ok(vec![aligned_table(&rows)])
}
