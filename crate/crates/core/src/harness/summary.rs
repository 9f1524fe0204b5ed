//! Comparison tables and performance profiles over run records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::records::RunRecord;

/// Floor applied to each gap before taking logarithms.
pub const GAP_FLOOR: f64 = 1e-6;
/// Floor applied to each time (seconds) before taking logarithms.
pub const TIME_FLOOR: f64 = 1e-6;
/// Floor applied to each node count before taking logarithms.
pub const NODES_FLOOR: f64 = 1.0;
/// Instances solved by every configuration faster than this are "easy".
pub const EASY_SECONDS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub config: String,
    pub unsolved: usize,
    pub gap_inf: usize,
    pub ub_inf: usize,
    pub lb_neg_inf: usize,
    /// Geometric means; `None` when no instance qualifies.
    pub gm_gap: Option<f64>,
    pub gm_time: Option<f64>,
    pub gm_nodes: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub instances: usize,
    /// Number of instances entering each geometric mean.
    pub gap_instances: usize,
    pub time_instances: usize,
    pub node_instances: usize,
    /// First configuration is the baseline.
    pub configs: Vec<ConfigSummary>,
}

/// Records indexed as `table[instance][config]`, with configurations in order
/// of first appearance.
fn tabulate(records: &[RunRecord]) -> Result<(Vec<String>, BTreeMap<String, BTreeMap<String, &RunRecord>>)> {
    let mut configs: Vec<String> = Vec::new();
    let mut table: BTreeMap<String, BTreeMap<String, &RunRecord>> = BTreeMap::new();
    for r in records {
        if !configs.contains(&r.config) {
            configs.push(r.config.clone());
        }
        if table.entry(r.instance.clone()).or_default().insert(r.config.clone(), r).is_some() {
            return Err(Error::Usage(format!(
                "duplicate record for instance '{}' and config '{}'",
                r.instance, r.config
            )));
        }
    }
    for (inst, row) in &table {
        if row.len() != configs.len() {
            let missing: Vec<&String> = configs.iter().filter(|c| !row.contains_key(*c)).collect();
            return Err(Error::Usage(format!(
                "instance sets differ between configs: '{inst}' missing for {missing:?}"
            )));
        }
    }
    Ok((configs, table))
}

fn geometric_mean(values: &[f64], floor: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let s: f64 = values.iter().map(|v| v.max(floor).ln()).sum();
    Some((s / values.len() as f64).exp())
}

pub fn summarize(records: &[RunRecord]) -> Result<Summary> {
    let (configs, table) = tabulate(records)?;
    let solved_by_all = |row: &BTreeMap<String, &RunRecord>| row.values().all(|r| r.solved());
    let gap_rows: Vec<_> = table
        .values()
        .filter(|row| !solved_by_all(row) && row.values().all(|r| r.rel_gap.is_finite()))
        .collect();
    let time_rows: Vec<_> = table
        .values()
        .filter(|row| {
            let easy = row.values().all(|r| r.solved() && r.wall_time < EASY_SECONDS);
            let none = row.values().all(|r| !r.solved());
            !easy && !none
        })
        .collect();
    let node_rows: Vec<_> = table.values().filter(|row| solved_by_all(row)).collect();

    let configs = configs
        .iter()
        .map(|c| {
            let of = |row: &BTreeMap<String, &RunRecord>| -> RunRecord { (*row[c]).clone() };
            let all: Vec<RunRecord> = table.values().map(of).collect();
            ConfigSummary {
                config: c.clone(),
                unsolved: all.iter().filter(|r| !r.solved()).count(),
                gap_inf: all.iter().filter(|r| r.rel_gap == f64::INFINITY).count(),
                ub_inf: all.iter().filter(|r| r.ub == f64::INFINITY).count(),
                lb_neg_inf: all.iter().filter(|r| r.lb == f64::NEG_INFINITY).count(),
                gm_gap: geometric_mean(&gap_rows.iter().map(|row| row[c].rel_gap).collect::<Vec<_>>(), GAP_FLOOR),
                gm_time: geometric_mean(&time_rows.iter().map(|row| row[c].wall_time).collect::<Vec<_>>(), TIME_FLOOR),
                gm_nodes: geometric_mean(
                    &node_rows.iter().map(|row| row[c].nodes as f64).collect::<Vec<_>>(),
                    NODES_FLOOR,
                ),
            }
        })
        .collect();
    Ok(Summary {
        instances: table.len(),
        gap_instances: gap_rows.len(),
        time_instances: time_rows.len(),
        node_instances: node_rows.len(),
        configs,
    })
}

/// Percentage change of `v` relative to `base`.
pub fn percent_delta(v: Option<f64>, base: Option<f64>) -> Option<f64> {
    match (v, base) {
        (Some(v), Some(b)) if b != 0.0 => Some((v / b - 1.0) * 100.0),
        _ => None,
    }
}

impl Summary {
    /// Metrics as rows, configurations as columns; the first configuration
    /// shows absolute means, the others percentage deltas against it.
    pub fn render(&self) -> String {
        let mut header = vec![String::from("metric")];
        header.extend(self.configs.iter().map(|c| c.config.clone()));
        let base = self.configs.first();
        let count_row = |name: &str, f: &dyn Fn(&ConfigSummary) -> usize| -> Vec<String> {
            let mut row = vec![name.to_string()];
            row.extend(self.configs.iter().map(|c| f(c).to_string()));
            row
        };
        let mean_row = |name: String, f: &dyn Fn(&ConfigSummary) -> Option<f64>| -> Vec<String> {
            let mut row = vec![name];
            for (i, c) in self.configs.iter().enumerate() {
                let cell = if i == 0 {
                    f(c).map_or("-".into(), |v| format!("{v:.4}"))
                } else {
                    percent_delta(f(c), base.and_then(f)).map_or("-".into(), |d| format!("{d:+.2}%"))
                };
                row.push(cell);
            }
            row
        };
        let rows = vec![
            header,
            count_row("Unsolved", &|c| c.unsolved),
            count_row("Gap=inf", &|c| c.gap_inf),
            count_row("UB=inf", &|c| c.ub_inf),
            count_row("LB=-inf", &|c| c.lb_neg_inf),
            mean_row(format!("Gap ({})", self.gap_instances), &|c| c.gm_gap),
            mean_row(format!("Time ({})", self.time_instances), &|c| c.gm_time),
            mean_row(format!("Nodes ({})", self.node_instances), &|c| c.gm_nodes),
        ];
        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|k| rows.iter().map(|r| r[k].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(k, cell)| {
                    if k == 0 {
                        format!("{cell:<w$}", w = widths[k])
                    } else {
                        format!("{cell:>w$}", w = widths[k])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  "));
            if i == 0 {
                let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMetric {
    Time,
    Gap,
}

impl std::str::FromStr for ProfileMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(ProfileMetric::Time),
            "gap" => Ok(ProfileMetric::Gap),
            other => Err(Error::Usage(format!("unknown profile metric '{other}' (time|gap)"))),
        }
    }
}

/// Metric value, or `None` when the run counts as a failure for this metric.
fn metric_value(r: &RunRecord, metric: ProfileMetric) -> Option<f64> {
    match metric {
        ProfileMetric::Time => r.solved().then(|| r.wall_time.max(TIME_FLOOR)),
        ProfileMetric::Gap => r.rel_gap.is_finite().then(|| r.rel_gap.max(GAP_FLOOR)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub config: String,
    /// Per-instance ratios in instance-name order (`+∞` for failures).
    pub ratios: Vec<f64>,
    /// Step points `(r, fraction of instances with ratio ≤ r)` at each distinct finite ratio.
    pub points: Vec<(f64, f64)>,
}

pub fn performance_profile(records: &[RunRecord], metric: ProfileMetric) -> Result<Vec<ProfileCurve>> {
    let (configs, table) = tabulate(records)?;
    if configs.len() < 2 {
        return Err(Error::Usage("a performance profile needs at least two configs".into()));
    }
    let mut ratios: BTreeMap<&String, Vec<f64>> = configs.iter().map(|c| (c, Vec::new())).collect();
    for row in table.values() {
        let best = row
            .values()
            .filter_map(|r| metric_value(r, metric))
            .fold(f64::INFINITY, f64::min);
        for c in &configs {
            let ratio = match metric_value(row[c], metric) {
                Some(v) if best.is_finite() => v / best,
                _ => f64::INFINITY,
            };
            ratios.get_mut(c).expect("config present").push(ratio);
        }
    }
    let total = table.len() as f64;
    Ok(configs
        .iter()
        .map(|c| {
            let rs = ratios.remove(c).expect("config present");
            let distinct: BTreeSet<u64> = rs.iter().filter(|r| r.is_finite()).map(|r| r.to_bits()).collect();
            let mut finite: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
            finite.sort_by(f64::total_cmp);
            let points = finite
                .into_iter()
                .map(|t| (t, rs.iter().filter(|&&r| r <= t).count() as f64 / total))
                .collect();
            ProfileCurve {
                config: c.clone(),
                ratios: rs,
                points,
            }
        })
        .collect())
}

pub fn profile_csv(curves: &[ProfileCurve]) -> String {
    let mut out = String::from("config,ratio,fraction\n");
    for c in curves {
        for (r, f) in &c.points {
            let _ = writeln!(out, "{},{},{}", c.config, r, f);
        }
    }
    out
}
