use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SwarmError};
use crate::geom::vec2;
use crate::maneuver::{ReferenceSample, ReferenceTrajectory};

const COLUMNS: [&str; 7] = ["t", "x", "y", "vx", "vy", "phi", "omega"];

/// Comma-separated rows under a `t,x,y,vx,vy,phi,omega` header. Columns are
/// matched by name.
pub fn parse_trajectory(text: &str) -> Result<ReferenceTrajectory> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let mut idx = [0usize; 7];
    for (k, name) in COLUMNS.iter().enumerate() {
        idx[k] = header
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| SwarmError::MissingColumn(name.to_string()))?;
    }
    let mut samples = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let mut v = [0.0; 7];
        for k in 0..7 {
            let raw = rec.get(idx[k]).unwrap_or("");
            v[k] = raw.parse().map_err(|_| SwarmError::Parse {
                line,
                msg: format!("bad {} value {raw:?}", COLUMNS[k]),
            })?;
        }
        samples.push(ReferenceSample {
            t: v[0],
            q: vec2(v[1], v[2]),
            nu: vec2(v[3], v[4]),
            phi: v[5],
            omega: v[6],
        });
    }
    ReferenceTrajectory::new(samples)
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<ReferenceTrajectory> {
    parse_trajectory(&std::fs::read_to_string(path)?)
}

pub fn write_trajectory(tr: &ReferenceTrajectory) -> String {
    let mut s = COLUMNS.join(",");
    s.push('\n');
    for r in tr.samples() {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.q.x, r.q.y, r.nu.x, r.nu.y, r.phi, r.omega
        );
    }
    s
}
