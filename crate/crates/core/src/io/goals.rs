use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SwarmError};
use crate::geom::vec2;
use crate::precise::GoalSet;

/// One goal per line as two whitespace-separated reals. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_goals(text: &str) -> Result<GoalSet> {
    let mut goals = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| SwarmError::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(format!("expected 2 numbers, found {}", fields.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(format!("not a number: {s:?}")))
        };
        goals.push(vec2(num(fields[0])?, num(fields[1])?));
        lines.push(i + 1);
    }
    GoalSet::new(goals).map_err(|e| match e {
        SwarmError::DuplicateGoal { line } => SwarmError::DuplicateGoal { line: lines[line - 1] },
        other => other,
    })
}

pub fn load_goals(path: impl AsRef<Path>) -> Result<GoalSet> {
    parse_goals(&std::fs::read_to_string(path)?)
}

/// Serializes with 17 significant digits so that parsing gives back the same bits.
pub fn write_goals(goals: &GoalSet) -> String {
    let mut s = String::new();
    for q in goals.goals() {
        let _ = writeln!(s, "{:.16e} {:.16e}", q.x, q.y);
    }
    s
}
