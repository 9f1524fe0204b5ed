use serde::{Deserialize, Serialize};

use crate::local_search::Incumbent;
use crate::relax::RelaxationKind;

use super::branching::BranchReason;

/// Serde adapter that writes non-finite floats as the strings `"inf"`,
/// `"-inf"` and `"nan"` instead of JSON `null`.
pub mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => parse(&t).ok_or_else(|| serde::de::Error::custom(format!("bad float {t:?}"))),
        }
    }

    pub fn parse(t: &str) -> Option<f64> {
        match t.trim() {
            "inf" | "+inf" | "Infinity" | "infinity" => Some(f64::INFINITY),
            "-inf" | "-Infinity" | "-infinity" => Some(f64::NEG_INFINITY),
            "nan" | "NaN" => Some(f64::NAN),
            other => other.parse().ok(),
        }
    }

    pub fn format(v: f64) -> String {
        if v.is_nan() {
            "nan".into()
        } else if v == f64::INFINITY {
            "inf".into()
        } else if v == f64::NEG_INFINITY {
            "-inf".into()
        } else {
            format!("{v}")
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Gap closed (or the tree exhausted with an incumbent).
    Optimal,
    /// Tree exhausted without any feasible point.
    Infeasible,
    TimeLimit,
    NodeLimit,
    /// Tree exhausted, but some subproblems could not be solved reliably.
    Numerical,
}

impl SolveStatus {
    /// CLI exit code: 0 optimal, 1 infeasible, 2 any limit.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Optimal => 0,
            SolveStatus::Infeasible => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOutcome {
    /// FBBT emptied the box.
    FbbtInfeasible,
    RelaxationInfeasible,
    /// Relaxation bound ≥ UB.
    PrunedByBound,
    /// No violation left: the relaxation solution solves the node.
    Terminal,
    Branched,
    /// Mixed-integer relaxation hit its budget; node re-queued with a better potential.
    Requeued,
    /// Relaxation could not be solved; node split at the widest variable.
    Stalled,
    /// Nothing left to branch on and no verified point; the node bound is kept as a floor.
    Abandoned,
}

/// One record per processed node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeEvent {
    pub node_id: usize,
    pub depth: usize,
    pub kind: RelaxationKind,
    #[serde(with = "ext_f64")]
    pub potential: f64,
    #[serde(with = "ext_f64")]
    pub bound: f64,
    pub outcome: NodeOutcome,
    pub branch_var: Option<usize>,
    pub branch_reason: Option<BranchReason>,
    pub beta: Option<f64>,
    #[serde(with = "ext_f64")]
    pub lb: f64,
    #[serde(with = "ext_f64")]
    pub ub: f64,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbPoint {
    pub time: f64,
    pub node: usize,
    #[serde(with = "ext_f64")]
    pub lb: f64,
}

/// Counters for the upper-bounding machinery.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchStats {
    pub nlp_calls: usize,
    pub nlp_successes: usize,
    pub minlp_begin_calls: usize,
    pub minlp_stuck_calls: usize,
    pub minlp_end_calls: usize,
    pub minlp_successes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance: String,
    pub status: SolveStatus,
    /// Lower bound in minimization form.
    #[serde(with = "ext_f64")]
    pub lb: f64,
    /// Upper bound (incumbent value) in minimization form.
    #[serde(with = "ext_f64")]
    pub ub: f64,
    /// Incumbent value in the problem's own sense.
    #[serde(with = "ext_f64")]
    pub objective: f64,
    /// Proven bound in the problem's own sense.
    #[serde(with = "ext_f64")]
    pub bound: f64,
    #[serde(with = "ext_f64")]
    pub rel_gap: f64,
    #[serde(with = "ext_f64")]
    pub abs_gap: f64,
    pub incumbent: Option<Incumbent>,
    pub nodes: usize,
    pub max_queue: usize,
    pub root_fbbt_infeasible: bool,
    pub local_search: LocalSearchStats,
    pub wall_time: f64,
    pub obbt_time: f64,
    pub nlp_ls_time: f64,
    pub minlp_ls_time: f64,
    pub lb_history: Vec<LbPoint>,
    /// Per-node event log; written separately (see `--log`).
    #[serde(skip)]
    pub events: Vec<NodeEvent>,
}

/// `(UB − LB) / max(|UB|, 1e-9)`, or `+∞` when either bound is missing.
pub fn relative_gap(lb: f64, ub: f64) -> f64 {
    if lb.is_finite() && ub.is_finite() {
        ((ub - lb) / ub.abs().max(1e-9)).max(0.0)
    } else {
        f64::INFINITY
    }
}

pub fn absolute_gap(lb: f64, ub: f64) -> f64 {
    if lb.is_finite() && ub.is_finite() {
        (ub - lb).max(0.0)
    } else {
        f64::INFINITY
    }
}

/// Names of report fields that depend on wall-clock time.
pub const TIMING_FIELDS: &[&str] = &["wall_time", "obbt_time", "nlp_ls_time", "minlp_ls_time", "time"];

/// JSON value of the report with every timing field removed, recursively.
pub fn without_timing(report: &SolveReport) -> serde_json::Value {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                for f in TIMING_FIELDS {
                    map.remove(*f);
                }
                map.values_mut().for_each(strip);
            }
            serde_json::Value::Array(items) => items.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(report).expect("report serializes");
    strip(&mut v);
    v
}
