//! JSON-lines request frames and their decisions.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{DecisionEngine, Verdict};
use crate::lang::{Action, TimeOfDay};
use crate::space::Point3;

/// One camera frame: a batch of map points requested under one context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub principal: String,
    pub action: Action,
    pub user_location: Point3,
    pub time: TimeOfDay,
    pub points: Vec<Point3>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameDecisions {
    pub verdicts: Vec<Verdict>,
    pub cache_hits: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses one frame per non-blank line.
pub fn read_frames(reader: impl BufRead) -> Result<Vec<Frame>, FrameError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame = serde_json::from_str(&line).map_err(|source| FrameError::Json { line: i + 1, source })?;
        out.push(frame);
    }
    Ok(out)
}

pub fn write_frames(w: &mut impl Write, frames: &[Frame]) -> io::Result<()> {
    for f in frames {
        serde_json::to_writer(&mut *w, f)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn decide_frame(engine: &DecisionEngine, frame: &Frame) -> FrameDecisions {
    let ds = engine.decide_frame(
        &frame.principal,
        frame.action,
        &frame.points,
        frame.user_location,
        frame.time,
    );
    FrameDecisions {
        cache_hits: ds.iter().filter(|d| d.cache_hit).count(),
        verdicts: ds.into_iter().map(|d| d.verdict).collect(),
    }
}

pub fn write_decisions(w: &mut impl Write, decisions: &[FrameDecisions]) -> io::Result<()> {
    for d in decisions {
        serde_json::to_writer(&mut *w, d)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
