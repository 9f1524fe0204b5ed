use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::driver::report::ext_f64;
use crate::driver::{SolveReport, SolveStatus};
use crate::error::{Error, Result};

/// One (instance, configuration) run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub status: SolveStatus,
    pub lb: f64,
    pub ub: f64,
    pub rel_gap: f64,
    pub wall_time: f64,
    pub nodes: usize,
}

impl RunRecord {
    pub fn from_report(config: &str, r: &SolveReport) -> Self {
        RunRecord {
            instance: r.instance.clone(),
            config: config.to_string(),
            status: r.status,
            lb: r.lb,
            ub: r.ub,
            rel_gap: r.rel_gap,
            wall_time: r.wall_time,
            nodes: r.nodes,
        }
    }

    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// CSV row; floats go through text so that infinities are explicit.
#[derive(Serialize, Deserialize)]
struct Row {
    instance: String,
    config: String,
    status: String,
    lb: String,
    ub: String,
    rel_gap: String,
    wall_time: String,
    nodes: usize,
}

fn status_name(s: SolveStatus) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn parse_status(s: &str) -> Result<SolveStatus> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Usage(format!("unknown status '{s}' in records")))
}

fn parse_float(s: &str, field: &str) -> Result<f64> {
    ext_f64::parse(s).ok_or_else(|| Error::Usage(format!("bad {field} value '{s}' in records")))
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row {
            instance: r.instance.clone(),
            config: r.config.clone(),
            status: status_name(r.status),
            lb: ext_f64::format(r.lb),
            ub: ext_f64::format(r.ub),
            rel_gap: ext_f64::format(r.rel_gap),
            wall_time: ext_f64::format(r.wall_time),
            nodes: r.nodes,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.deserialize::<Row>() {
        let row = row.map_err(|e| Error::Usage(format!("malformed records file: {e}")))?;
        out.push(RunRecord {
            status: parse_status(&row.status)?,
            lb: parse_float(&row.lb, "lb")?,
            ub: parse_float(&row.ub, "ub")?,
            rel_gap: parse_float(&row.rel_gap, "rel_gap")?,
            wall_time: parse_float(&row.wall_time, "wall_time")?,
            instance: row.instance,
            config: row.config,
            nodes: row.nodes,
        });
    }
    Ok(out)
}
