//! Metric tables, per-fold breakdowns, trajectory exports and loss histories.

use htrail_core::eval::{AblationResult, MetricsReport, TrajectoryRow, TrajectoryTable};
use htrail_core::geometry::Pose2D;

use crate::error::{Error, Result};
use crate::format::{data_lines, provenance_lines, real};

pub const METRIC_HEADER: [&str; 6] = ["method", "windows", "mde_m", "fde_m", "mae_deg", "fae_deg"];

fn metric_fields(r: &MetricsReport) -> String {
    format!("{}\t{}\t{}\t{}\t{}\t{}", r.method, r.windows, real(r.mde), real(r.fde), real(r.mae), real(r.fae))
}

pub fn render_report(rows: &[MetricsReport], provenance: &[(String, String)]) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, provenance);
    out.push_str(&METRIC_HEADER.join("\t"));
    out.push('\n');
    for r in rows {
        out.push_str(&metric_fields(r));
        out.push('\n');
    }
    out
}

pub fn parse_report(text: &str, origin: &str) -> Result<Vec<MetricsReport>> {
    let mut lines = data_lines(text, origin);
    let header = lines.next().ok_or_else(|| Error::MissingField { origin: origin.into(), line: 0, field: "header".into() })?;
    if header.fields != METRIC_HEADER {
        return Err(header.malformed("unexpected report header"));
    }
    lines
        .map(|l| {
            l.expect_len(METRIC_HEADER.len(), &METRIC_HEADER)?;
            Ok(MetricsReport {
                method: l.fields[0].to_string(),
                windows: l.parse(1, "windows")?,
                mde: l.parse(2, "mde_m")?,
                fde: l.parse(3, "fde_m")?,
                mae: l.parse(4, "mae_deg")?,
                fae: l.parse(5, "fae_deg")?,
            })
        })
        .collect()
}

pub fn render_folds(result: &AblationResult, provenance: &[(String, String)]) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, provenance);
    out.push_str("fold\tparticipant\tlag\t");
    out.push_str(&METRIC_HEADER.join("\t"));
    out.push('\n');
    for f in &result.folds {
        for r in &f.reports {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", f.fold, f.test_participant, f.lag, metric_fields(r)));
        }
    }
    out
}

/// Human-readable table for standard output.
pub fn aligned_table(rows: &[MetricsReport]) -> String {
    let head = ["Method", "Windows", "MDE [m]", "FDE [m]", "MAE [deg]", "FAE [deg]"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                r.windows.to_string(),
                format!("{:.4}", r.mde),
                format!("{:.4}", r.fde),
                format!("{:.2}", r.mae),
                format!("{:.2}", r.fae),
            ]
        })
        .collect();
    let mut width = head.map(str::len);
    for row in &body {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: &[&str]| {
        let mut line = format!("{:<w$}", cells[0], w = width[0]);
        for (cell, w) in cells[1..].iter().zip(&width[1..]) {
            line.push_str(&format!("  {cell:>w$}", w = *w));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    push_row(&head);
    for row in &body {
        push_row(&row.each_ref().map(String::as_str));
    }
    out
}

pub fn trajectory_header(methods: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["step", "time", "truth_x", "truth_y", "truth_theta"].map(String::from).to_vec();
    for m in methods {
        for c in ["x", "y", "theta"] {
            h.push(format!("{m}_{c}"));
        }
    }
    h
}

pub fn render_trajectory(t: &TrajectoryTable, provenance: &[(String, String)]) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, provenance);
    out.push_str(&trajectory_header(&t.methods).join("\t"));
    out.push('\n');
    for r in &t.rows {
        let mut cells = vec![r.step.to_string(), real(r.time), real(r.truth.x), real(r.truth.y), real(r.truth.theta)];
        for p in &r.predicted {
            match p {
                Some(p) => cells.extend([real(p.x), real(p.y), real(p.theta)]),
                None => cells.extend([String::new(), String::new(), String::new()]),
            }
        }
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

pub fn parse_trajectory(text: &str, origin: &str) -> Result<TrajectoryTable> {
    let mut lines = data_lines(text, origin);
    let header = lines.next().ok_or_else(|| Error::MissingField { origin: origin.into(), line: 0, field: "header".into() })?;
    if header.fields.len() < 5 || (header.fields.len() - 5) % 3 != 0 || header.fields[0] != "step" {
        return Err(header.malformed("unexpected trajectory header"));
    }
    let methods: Vec<String> = header.fields[5..]
        .chunks(3)
        .map(|c| c[0].strip_suffix("_x").unwrap_or(c[0]).to_string())
        .collect();
    let names: Vec<&str> = header.fields.clone();
    let mut rows = Vec::new();
    for l in lines {
        l.expect_len(names.len(), &names)?;
        let pose = |i: usize| -> Result<Pose2D> {
            Ok(Pose2D { x: l.parse(i, names[i])?, y: l.parse(i + 1, names[i + 1])?, theta: l.parse(i + 2, names[i + 2])? })
        };
        let predicted = (0..methods.len())
            .map(|m| {
                let i = 5 + 3 * m;
                if l.fields[i..i + 3].iter().all(|c| c.is_empty()) { Ok(None) } else { pose(i).map(Some) }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(TrajectoryRow { step: l.parse(0, "step")?, time: l.parse(1, "time")?, truth: pose(2)?, predicted });
    }
    Ok(TrajectoryTable { methods, rows })
}

pub fn render_loss_history(history: &[f64], provenance: &[(String, String)]) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, provenance);
    out.push_str("# epoch\tmean_loss\n");
    for (i, l) in history.iter().enumerate() {
        out.push_str(&format!("{}\t{}\n", i + 1, real(*l)));
    }
    out
}
