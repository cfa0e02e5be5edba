//! Session files: a `htrail.v1` header line, then one frame per line.

use std::path::Path;

use htrail_core::dataset::{Frame, Session};
use htrail_core::geometry::Pose2D;

use crate::error::{Error, Result};
use crate::format::{data_lines, provenance_lines, read_file, reals, write_file, Line};

pub const VERSION: &str = "htrail.v1";

pub const COLUMNS: [&str; 22] = [
    "t", "v_l", "v_r", "dx", "dy", "dtheta", "px", "py", "ptheta", "rx", "ry", "d0", "d1", "d2", "d3", "d4",
    "robot_x", "robot_y", "robot_theta", "human_x", "human_y", "human_theta",
];

pub fn render_session(s: &Session, provenance: &[(String, String)]) -> String {
    let mut out = format!(
        "{VERSION}\tparticipant={}\tsession={}\tfps={}\tframes={}\n",
        s.participant_id,
        s.session_id,
        s.fps,
        s.frames.len()
    );
    provenance_lines(&mut out, provenance);
    out.push_str(&format!("# columns: {}\n", COLUMNS.join(" ")));
    for f in &s.frames {
        let mut v = Vec::with_capacity(21);
        v.extend_from_slice(&f.robot);
        v.extend_from_slice(&f.human);
        v.extend_from_slice(&f.haptic);
        v.extend_from_slice(&f.depth);
        v.extend_from_slice(&[f.robot_world.x, f.robot_world.y, f.robot_world.theta]);
        v.extend_from_slice(&[f.human_world.x, f.human_world.y, f.human_world.theta]);
        out.push_str(&format!("{}\t{}\n", f.t, reals(&v)));
    }
    out
}

fn header_value<'a>(line: &Line<'a>, key: &str) -> Result<&'a str> {
    line.fields[1..]
        .iter()
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::MissingField { origin: line.origin.into(), line: line.number, field: key.into() })
}

pub fn parse_session(text: &str, origin: &str) -> Result<Session> {
    let mut lines = data_lines(text, origin);
    let header = lines.next().ok_or_else(|| Error::Version {
        origin: origin.into(),
        found: String::new(),
        expected: VERSION,
    })?;
    if header.fields[0] != VERSION {
        return Err(Error::Version { origin: origin.into(), found: header.fields[0].into(), expected: VERSION });
    }
    let participant_id = header_value(&header, "participant")?.to_string();
    let session_id = header_value(&header, "session")?.to_string();
    let fps = header_value(&header, "fps")?.parse().map_err(|_| header.malformed("bad fps"))?;
    let count: usize = header_value(&header, "frames")?.parse().map_err(|_| header.malformed("bad frame count"))?;

    let mut frames = Vec::with_capacity(count);
    for line in lines {
        line.expect_len(COLUMNS.len(), &COLUMNS)?;
        let mut v = [0.0; 21];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = line.parse(i + 1, COLUMNS[i + 1])?;
        }
        let pose = |o: usize| Pose2D { x: v[o], y: v[o + 1], theta: v[o + 2] };
        frames.push(Frame {
            t: line.parse(0, "t")?,
            robot: [v[0], v[1], v[2], v[3], v[4]],
            human: [v[5], v[6], v[7]],
            haptic: [v[8], v[9]],
            depth: [v[10], v[11], v[12], v[13], v[14]],
            robot_world: pose(15),
            human_world: pose(18),
        });
    }
    if frames.len() != count {
        return Err(Error::Malformed {
            origin: origin.into(),
            line: header.number,
            reason: format!("header declares {count} frames, found {}", frames.len()),
        });
    }
    let s = Session { participant_id, session_id, fps, frames };
    s.validate()?;
    Ok(s)
}

pub fn save_session(path: &Path, s: &Session, provenance: &[(String, String)]) -> Result<()> {
    write_file(path, &render_session(s, provenance))
}

pub fn load_session(path: &Path) -> Result<Session> {
    parse_session(&read_file(path)?, &path.display().to_string())
}
