//! Best-first branch-and-bound over the simplex for mixed-integer LPs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, LinearProgram, LpOptions, LpResult, LpStatus};

pub const INT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    /// Budget ran out; `best_bound` is still a valid lower bound.
    BoundOnly,
    /// The root LP could not be solved.
    Failed,
}

#[derive(Clone, Copy, Debug)]
pub struct MilpBudget {
    pub time: f64,
    pub node_limit: usize,
}

impl Default for MilpBudget {
    fn default() -> Self {
        MilpBudget {
            time: 60.0,
            node_limit: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MilpResult {
    pub status: MilpStatus,
    /// Best integral point found (empty if none).
    pub x: Vec<f64>,
    /// Objective at `x`, or +∞ without an incumbent.
    pub objective: f64,
    pub best_bound: f64,
    pub nodes_used: usize,
    /// The root LP solve, kept so callers can reuse its duals.
    pub root: Option<LpResult>,
}

impl MilpResult {
    pub fn has_incumbent(&self) -> bool {
        !self.x.is_empty()
    }
}

/// Integral column furthest from an integer, lowest index on ties; `None` when all are integral.
pub fn most_fractional(x: &[f64], integral_columns: &[usize]) -> Option<usize> {
    let mut cols = integral_columns.to_vec();
    cols.sort_unstable();
    let mut best: Option<usize> = None;
    let mut best_dist = INT_TOL;
    for c in cols {
        let dist = (x[c] - x[c].round()).abs();
        if dist > best_dist + 1e-12 {
            best_dist = dist;
            best = Some(c);
        }
    }
    best
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smaller bound, then older node, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    (incumbent - bound) / incumbent.abs().max(1e-9)
}

pub fn solve_milp(lp: &LinearProgram, integral_columns: &[usize], budget: MilpBudget, gap_tol: f64) -> Result<MilpResult> {
    solve_milp_from(lp, integral_columns, budget, gap_tol, None)
}

/// Like [`solve_milp`], reusing an already computed root LP solve when given.
pub fn solve_milp_from(
    lp: &LinearProgram,
    integral_columns: &[usize],
    budget: MilpBudget,
    gap_tol: f64,
    root: Option<LpResult>,
) -> Result<MilpResult> {
    if !(budget.time > 0.0) || budget.node_limit == 0 {
        return Err(Error::usage("MILP budget must be positive"));
    }
    lp.validate()?;
    for &c in integral_columns {
        if c >= lp.num_cols() {
            return Err(Error::usage(format!("integral column {c} out of range")));
        }
        if !lp.col_lower[c].is_finite() || !lp.col_upper[c].is_finite() {
            return Err(Error::usage(format!("integral column {c} has an infinite bound")));
        }
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(budget.time.min(1e9));

    let mut work = lp.clone();
    for &c in integral_columns {
        work.col_lower[c] = (work.col_lower[c] - INT_TOL).ceil();
        work.col_upper[c] = (work.col_upper[c] + INT_TOL).floor();
    }

    let root = match root {
        Some(r) => r,
        None => solve_lp_with(&work, &LpOptions::default())?,
    };
    let mut result = MilpResult {
        status: MilpStatus::Failed,
        x: Vec::new(),
        objective: f64::INFINITY,
        best_bound: f64::NEG_INFINITY,
        nodes_used: 0,
        root: Some(root.clone()),
    };
    match root.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            result.status = MilpStatus::Infeasible;
            result.best_bound = f64::INFINITY;
            return Ok(result);
        }
        LpStatus::Unbounded | LpStatus::Stalled => return Ok(result),
    }

    let lp_opts = LpOptions {
        deadline: Some(deadline),
        ..LpOptions::default()
    };
    let mut seq = 0usize;
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: root.objective,
        seq,
        lower: work.col_lower.clone(),
        upper: work.col_upper.clone(),
        x: root.x.clone(),
    });
    // Lowest bound among subtrees whose LP could not be solved.
    let mut lost_floor = f64::INFINITY;
    let mut incumbent = f64::INFINITY;
    let mut inc_x: Vec<f64> = Vec::new();
    let mut exhausted = false;

    while let Some(node) = heap.peek() {
        let bound = node.bound.min(lost_floor);
        if incumbent.is_finite() && (incumbent - bound <= 1e-9 || relative_gap(incumbent, bound) <= gap_tol) {
            break;
        }
        if result.nodes_used >= budget.node_limit || Instant::now() >= deadline {
            exhausted = true;
            break;
        }
        let node = heap.pop().expect("peeked");
        result.nodes_used += 1;
        if node.bound >= incumbent - 1e-9 {
            continue;
        }
        let Some(c) = most_fractional(&node.x, integral_columns) else {
            incumbent = node.bound;
            inc_x = node.x.clone();
            for &ic in integral_columns {
                inc_x[ic] = inc_x[ic].round();
            }
            continue;
        };
        let v = node.x[c];
        for down in [true, false] {
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            if down {
                upper[c] = v.floor();
            } else {
                lower[c] = v.ceil();
            }
            if lower[c] > upper[c] {
                continue;
            }
            work.col_lower.clone_from(&lower);
            work.col_upper.clone_from(&upper);
            let res = solve_lp_with(&work, &lp_opts)?;
            match res.status {
                LpStatus::Optimal => {
                    if res.objective < incumbent - 1e-9 {
                        seq += 1;
                        heap.push(Node {
                            bound: res.objective.max(node.bound),
                            seq,
                            lower,
                            upper,
                            x: res.x,
                        });
                    }
                }
                LpStatus::Infeasible => {}
                LpStatus::Unbounded | LpStatus::Stalled => lost_floor = lost_floor.min(node.bound),
            }
        }
    }

    let open_min = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    result.best_bound = open_min.min(lost_floor).min(incumbent);
    if !inc_x.is_empty() {
        result.objective = lp.objective_value(&inc_x);
        result.x = inc_x;
    }
    let lost_matters = lost_floor < incumbent - 1e-9 && relative_gap(incumbent, lost_floor) > gap_tol;
    result.status = if exhausted || (lost_matters && !result.x.is_empty()) {
        MilpStatus::BoundOnly
    } else if !result.x.is_empty() {
        MilpStatus::Optimal
    } else if lost_floor.is_finite() {
        MilpStatus::BoundOnly
    } else {
        MilpStatus::Infeasible
    };
    if result.status == MilpStatus::Optimal {
        result.best_bound = result.best_bound.min(result.objective);
    }
    Ok(result)
}
