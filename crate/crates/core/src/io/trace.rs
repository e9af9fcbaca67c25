use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Result, SwarmError};
use crate::geom::vec2;
use crate::sim::{Metrics, TraceRecord};

pub const TRACE_HEADER: [&str; 11] = ["step", "t", "id", "x", "y", "vx", "vy", "h", "qo_x", "qo_y", "phi_o"];

pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(TRACE_HEADER)?;
        Ok(TraceWriter { inner })
    }

    pub fn write(&mut self, r: &TraceRecord) -> Result<()> {
        let num = |v: f64| format!("{v:.16e}");
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        self.inner.write_record([
            r.step.to_string(),
            num(r.t),
            r.id.to_string(),
            num(r.p.x),
            num(r.p.y),
            num(r.v.x),
            num(r.v.y),
            r.h.map(|h| h.to_string()).unwrap_or_default(),
            opt(r.q_o.map(|q| q.x)),
            opt(r.q_o.map(|q| q.y)),
            opt(r.phi_o),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| SwarmError::Io(e.into_error()))
    }
}

pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    for name in TRACE_HEADER {
        if !header.iter().any(|h| h == name) {
            return Err(SwarmError::MissingColumn(name.to_string()));
        }
    }
    let col = |name: &str| header.iter().position(|h| h == name).expect("checked above");
    let cols: BTreeMap<&str, usize> = TRACE_HEADER.iter().map(|n| (*n, col(n))).collect();
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |n: &str| rec.get(cols[n]).unwrap_or("");
        let bad = |n: &str| SwarmError::Parse {
            line,
            msg: format!("bad {n} value {:?}", field(n)),
        };
        let f = |n: &str| field(n).parse::<f64>().map_err(|_| bad(n));
        let opt = |n: &str| -> Result<Option<f64>> {
            if field(n).is_empty() {
                Ok(None)
            } else {
                f(n).map(Some)
            }
        };
        let h = match field("h") {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("h"))?),
        };
        let q_o = match (opt("qo_x")?, opt("qo_y")?) {
            (Some(x), Some(y)) => Some(vec2(x, y)),
            _ => None,
        };
        out.push(TraceRecord {
            step: field("step").parse().map_err(|_| bad("step"))?,
            t: f("t")?,
            id: field("id").parse().map_err(|_| bad("id"))?,
            p: vec2(f("x")?, f("y")?),
            v: vec2(f("vx")?, f("vy")?),
            h,
            q_o,
            phi_o: opt("phi_o")?,
        });
    }
    Ok(out)
}

/// Flat `key = value` summary followed by nothing else; series stay in the trace.
pub fn write_metrics(m: &Metrics) -> String {
    let mut s = String::new();
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "none".into());
    let _ = writeln!(s, "steps = {}", m.steps());
    let _ = writeln!(s, "final_rate = {}", m.final_rate());
    let _ = writeln!(s, "convergence_time = {}", opt(m.convergence_time));
    let _ = writeln!(s, "avg_distance = {}", m.avg_distance);
    let _ = writeln!(s, "min_pairwise_distance = {}", m.min_pairwise_distance);
    let _ = writeln!(s, "deadlock = {}", m.deadlock);
    if let Some(d) = m.frame_disagreement_series.last() {
        let _ = writeln!(s, "final_frame_disagreement = {d}");
    }
    if let Some(d) = m.tracking_error_series.last() {
        let _ = writeln!(s, "final_tracking_error = {d}");
    }
    s
}
