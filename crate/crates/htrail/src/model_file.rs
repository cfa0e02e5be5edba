//! Trained predictor files (`htrail.model.v1`): mode, shapes, row-major
//! parameter blocks, the fitted normalizer and the training configuration.

use std::path::Path;

use htrail_core::dataset::{AblationMode, Normalizer, FEATURE_DIM};
use htrail_core::model::{ModelParams, TrainConfig};

use crate::error::{Error, Result};
use crate::format::{data_lines, provenance_lines, read_file, read_provenance, real, reals, write_file, Line};

pub const VERSION: &str = "htrail.model.v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub params: ModelParams,
    pub normalizer: Normalizer,
    pub train: TrainConfig,
    /// Held-out participant of the training run, if any.
    pub holdout: Option<String>,
    pub provenance: Vec<(String, String)>,
}

pub fn render_model(m: &ModelFile) -> String {
    let p = &m.params;
    let t = &m.train;
    let mut out = format!("{VERSION}\n");
    provenance_lines(&mut out, &m.provenance);
    out.push_str(&format!("mode\t{}\n", p.mode()));
    out.push_str(&format!("shape\thidden={}\tinput={}\toutput={}\tlen={}\n", p.hidden(), p.input_dim(), p.output_dim(), p.len()));
    out.push_str(&format!(
        "train\tepochs={}\tbatch_size={}\tlr={}\tseed={}\tclip_norm={}\thidden={}\tinit_range={}\n",
        t.epochs,
        t.batch_size,
        real(t.lr),
        t.seed,
        real(t.clip_norm),
        t.hidden,
        real(t.init_range)
    ));
    out.push_str(&format!("holdout\t{}\n", m.holdout.as_deref().unwrap_or("-")));
    out.push_str(&format!("norm.min\t{}\n", reals(&m.normalizer.min())));
    out.push_str(&format!("norm.max\t{}\n", reals(&m.normalizer.max())));
    for (name, rows, cols, values) in p.blocks() {
        out.push_str(&format!("block\t{name}\t{rows}\t{cols}\n{}\n", reals(values)));
    }
    out.push_str("end\n");
    out
}

fn key_values<'a>(line: &Line<'a>, tag: &str) -> Result<Vec<(&'a str, &'a str)>> {
    if line.fields[0] != tag {
        return Err(line.malformed(format!("expected {tag} line, found {:?}", line.fields[0])));
    }
    line.fields[1..]
        .iter()
        .map(|f| f.split_once('=').ok_or_else(|| line.malformed(format!("expected key=value, got {f:?}"))))
        .collect()
}

fn lookup<T: std::str::FromStr>(line: &Line<'_>, kv: &[(&str, &str)], key: &str) -> Result<T> {
    let raw = kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| Error::MissingField {
        origin: line.origin.into(),
        line: line.number,
        field: key.into(),
    })?;
    raw.parse().map_err(|_| line.malformed(format!("bad value {raw:?} for {key}")))
}

fn row_of_reals(line: &Line<'_>, start: usize, n: usize, what: &str) -> Result<Vec<f64>> {
    if line.fields.len() != start + n {
        return Err(line.malformed(format!("{what}: expected {n} values, found {}", line.fields.len().saturating_sub(start))));
    }
    (start..start + n).map(|i| line.parse(i, what)).collect()
}

pub fn parse_model(text: &str, origin: &str) -> Result<ModelFile> {
    let mut lines = data_lines(text, origin);
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::MissingField { origin: origin.into(), line: 0, field: what.into() })
    };
    let header = next("version")?;
    if header.fields[0] != VERSION {
        return Err(Error::Version { origin: origin.into(), found: header.fields[0].into(), expected: VERSION });
    }
    let mode_line = next("mode")?;
    if mode_line.fields[0] != "mode" {
        return Err(mode_line.malformed("expected mode line"));
    }
    let mode: AblationMode = mode_line.parse(1, "mode")?;

    let shape_line = next("shape")?;
    let shape = key_values(&shape_line, "shape")?;
    let hidden: usize = lookup(&shape_line, &shape, "hidden")?;
    let input: usize = lookup(&shape_line, &shape, "input")?;
    let output: usize = lookup(&shape_line, &shape, "output")?;
    let len: usize = lookup(&shape_line, &shape, "len")?;
    let expected = ModelParams::zeros(mode, hidden);
    if (input, output, len) != (expected.input_dim(), expected.output_dim(), expected.len()) {
        return Err(shape_line.malformed(format!(
            "shape input={input} output={output} len={len} inconsistent with mode {mode} hidden {hidden}"
        )));
    }

    let train_line = next("train")?;
    let kv = key_values(&train_line, "train")?;
    let train = TrainConfig {
        epochs: lookup(&train_line, &kv, "epochs")?,
        batch_size: lookup(&train_line, &kv, "batch_size")?,
        lr: lookup(&train_line, &kv, "lr")?,
        seed: lookup(&train_line, &kv, "seed")?,
        clip_norm: lookup(&train_line, &kv, "clip_norm")?,
        hidden: lookup(&train_line, &kv, "hidden")?,
        init_range: lookup(&train_line, &kv, "init_range")?,
    };

    let holdout_line = next("holdout")?;
    if holdout_line.fields[0] != "holdout" {
        return Err(holdout_line.malformed("expected holdout line"));
    }
    let holdout = match holdout_line.field(1, "holdout")? {
        "-" => None,
        p => Some(p.to_string()),
    };

    let mut bounds = [[0.0; FEATURE_DIM]; 2];
    for (slot, tag) in bounds.iter_mut().zip(["norm.min", "norm.max"]) {
        let line = next(tag)?;
        if line.fields[0] != tag {
            return Err(line.malformed(format!("expected {tag} line")));
        }
        slot.copy_from_slice(&row_of_reals(&line, 1, FEATURE_DIM, tag)?);
    }
    let normalizer = Normalizer::from_bounds(bounds[0], bounds[1])?;

    let mut data = Vec::with_capacity(len);
    for (name, rows, cols, _) in expected.blocks() {
        let head = next(name)?;
        if head.fields.first() != Some(&"block") || head.field(1, "block name")? != name {
            return Err(head.malformed(format!("expected block {name}")));
        }
        let (r, c): (usize, usize) = (head.parse(2, "rows")?, head.parse(3, "cols")?);
        if (r, c) != (rows, cols) {
            return Err(head.malformed(format!("block {name} is {r}x{c}, expected {rows}x{cols}")));
        }
        let values = next(name)?;
        data.extend(row_of_reals(&values, 0, rows * cols, name)?);
    }
    let end = next("end")?;
    if end.fields[0] != "end" {
        return Err(end.malformed("expected end"));
    }
    let params = ModelParams::from_parts(mode, hidden, data)?;
    Ok(ModelFile { params, normalizer, train, holdout, provenance: read_provenance(text) })
}

pub fn save_model(path: &Path, m: &ModelFile) -> Result<()> {
    write_file(path, &render_model(m))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    parse_model(&read_file(path)?, &path.display().to_string())
}

/// Loads a model that must have been trained for `mode`.
pub fn load_model_as(path: &Path, mode: AblationMode) -> Result<ModelFile> {
    let m = load_model(path)?;
    if m.params.mode() != mode {
        return Err(htrail_core::Error::ShapeMismatch {
            what: "model input width",
            expected: mode.input_dim(),
            actual: m.params.input_dim(),
        }
        .into());
    }
    Ok(m)
}
