//! Flat `key=value` run configuration. A value comes from the command-line
//! flag if given, else the config file, else the built-in default; the seed
//! additionally falls back to `HTRAIL_SEED` before its default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use htrail_core::dataset::AblationMode;
use htrail_core::model::TrainConfig;
use htrail_core::simulator::SimConfig;

use crate::error::{Error, Result};
use crate::format::read_file;

pub const SEED_ENV: &str = "HTRAIL_SEED";

pub const KNOWN_KEYS: &[&str] = &[
    "seed", "participants", "sessions", "dt", "duration_min", "duration_max", "wheelbase", "spring_k", "damping_b",
    "human_mass", "gait_amplitude", "gait_frequency", "latent_noise_std", "workspace_radius", "hand_reach",
    "heading_tau", "substeps", "arena_half", "max_wheel_speed", "max_wheel_step", "cruise_speed", "epochs", "batch",
    "lr", "hidden", "init_range", "clip_norm", "modes", "holdout", "zero_offset", "export_trajectories",
];

pub fn parse_config(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Malformed {
            origin: origin.into(),
            line: i + 1,
            reason: format!("expected key=value, got {line:?}"),
        })?;
        let k = k.trim();
        if !KNOWN_KEYS.contains(&k) {
            return Err(Error::Usage(format!("{origin}:{}: unknown config key {k:?}", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Resolves values by precedence and remembers every resolved value for
/// provenance.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    env_seed: Option<String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>, env_seed: Option<String>) -> Self {
        Self { file, env_seed, resolved: BTreeMap::new() }
    }

    pub fn from_path(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => parse_config(&read_file(p)?, &p.display().to_string())?,
            None => BTreeMap::new(),
        };
        Ok(Self::new(file, std::env::var(SEED_ENV).ok()))
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(raw) => parse_value(key, raw, "config file")?,
                None => default,
            },
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file.get(key).map(|raw| parse_value(key, raw, "config file")).transpose()?,
        };
        self.resolved.insert(key.to_string(), v.as_ref().map_or_else(|| "-".to_string(), ToString::to_string));
        Ok(v)
    }

    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let v = match (flag, self.file.get("seed"), &self.env_seed) {
            (Some(v), _, _) => v,
            (None, Some(raw), _) => parse_value("seed", raw, "config file")?,
            (None, None, Some(raw)) => parse_value("seed", raw, SEED_ENV)?,
            (None, None, None) => 0,
        };
        self.resolved.insert("seed".into(), v.to_string());
        Ok(v)
    }

    pub fn modes(&mut self, flag: &[AblationMode], default: &[AblationMode]) -> Result<Vec<AblationMode>> {
        let modes = if !flag.is_empty() {
            flag.to_vec()
        } else if let Some(raw) = self.file.get("modes") {
            parse_modes(raw)?
        } else {
            default.to_vec()
        };
        if modes.is_empty() {
            return Err(Error::Usage("no ablation modes requested".into()));
        }
        let tags: Vec<&str> = modes.iter().map(|m| m.tag()).collect();
        self.resolved.insert("modes".into(), tags.join(","));
        Ok(modes)
    }

    /// Resolved values in key order, for embedding in output files.
    pub fn provenance(&self) -> Vec<(String, String)> {
        self.resolved.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str, source: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Usage(format!("{source}: bad value {raw:?} for {key}")))
}

pub fn parse_modes(raw: &str) -> Result<Vec<AblationMode>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(|_| Error::Usage(format!("unknown ablation mode {s:?}"))))
        .collect()
}

/// Simulator settings not exposed as flags come from the file only.
pub fn sim_config(r: &mut Resolver, seed: u64, duration: (Option<f64>, Option<f64>)) -> Result<SimConfig> {
    let d = SimConfig::default();
    let cfg = SimConfig {
        seed,
        dt: r.value("dt", None, d.dt)?,
        duration_min: r.value("duration_min", duration.0, d.duration_min)?,
        duration_max: r.value("duration_max", duration.1, d.duration_max)?,
        wheelbase: r.value("wheelbase", None, d.wheelbase)?,
        k: r.value("spring_k", None, d.k)?,
        b: r.value("damping_b", None, d.b)?,
        human_mass: r.value("human_mass", None, d.human_mass)?,
        gait_amplitude: r.value("gait_amplitude", None, d.gait_amplitude)?,
        gait_frequency: r.value("gait_frequency", None, d.gait_frequency)?,
        latent_map: d.latent_map,
        latent_noise_std: r.value("latent_noise_std", None, d.latent_noise_std)?,
        workspace_radius: r.value("workspace_radius", None, d.workspace_radius)?,
        hand_reach: r.value("hand_reach", None, d.hand_reach)?,
        heading_tau: r.value("heading_tau", None, d.heading_tau)?,
        substeps: r.value("substeps", None, d.substeps)?,
        arena_half: r.value("arena_half", None, d.arena_half)?,
        max_wheel_speed: r.value("max_wheel_speed", None, d.max_wheel_speed)?,
        max_wheel_step: r.value("max_wheel_step", None, d.max_wheel_step)?,
        cruise_speed: r.value("cruise_speed", None, d.cruise_speed)?,
    };
    cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrainFlags {
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub lr: Option<f64>,
    pub hidden: Option<usize>,
    pub seed: Option<u64>,
}

pub fn train_config(r: &mut Resolver, flags: TrainFlags) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        epochs: r.value("epochs", flags.epochs, d.epochs)?,
        batch_size: r.value("batch", flags.batch, d.batch_size)?,
        lr: r.value("lr", flags.lr, d.lr)?,
        seed: r.seed(flags.seed)?,
        clip_norm: r.value("clip_norm", None, d.clip_norm)?,
        hidden: r.value("hidden", flags.hidden, d.hidden)?,
        init_range: r.value("init_range", None, d.init_range)?,
    };
    cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = parse_config("epochs = 7\nlr=0.5\n# comment\n", "cfg").unwrap();
        let mut r = Resolver::new(file, None);
        assert_eq!(r.value("epochs", Some(3usize), 500).unwrap(), 3);
        assert_eq!(r.value("lr", None, 0.001).unwrap(), 0.5);
        assert_eq!(r.value("batch", None, 64usize).unwrap(), 64);
        let p = r.provenance();
        assert_eq!(p[0], ("batch".into(), "64".into()));
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn seed_falls_back_to_environment() {
        let mut r = Resolver::new(BTreeMap::new(), Some("41".into()));
        assert_eq!(r.seed(None).unwrap(), 41);
        assert_eq!(r.seed(Some(2)).unwrap(), 2);
        let file = parse_config("seed=5", "cfg").unwrap();
        assert_eq!(Resolver::new(file, Some("41".into())).seed(None).unwrap(), 5);
        assert_eq!(Resolver::default().seed(None).unwrap(), 0);
        assert!(Resolver::new(BTreeMap::new(), Some("x".into())).seed(None).is_err());
    }

    #[test]
    fn bad_files() {
        assert!(matches!(parse_config("epochs", "c"), Err(Error::Malformed { line: 1, .. })));
        assert!(matches!(parse_config("colour=red", "c"), Err(Error::Usage(_))));
        let mut r = Resolver::new(parse_config("epochs=many", "c").unwrap(), None);
        assert!(r.value("epochs", None, 1usize).is_err());
    }

    #[test]
    fn modes_list() {
        assert_eq!(parse_modes("r, R+H ,r+h+d").unwrap(), [AblationMode::R, AblationMode::RH, AblationMode::RHD]);
        assert!(parse_modes("r+x").is_err());
        let mut r = Resolver::default();
        assert_eq!(r.modes(&[], &AblationMode::ALL).unwrap().len(), 4);
    }
}
