//! Node queue and the pure decision rules of the spatial tree: node
//! selection, pruning, branching scores, variable and point selection,
//! local-search scheduling and the stuck detector.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::milp::most_fractional;
use crate::poly::Bounds;
use crate::relax::{Relaxation, ViolationTable};

use super::config::{BranchingRule, IntegerMode, StuckWindow};

/// Violations at or below this are treated as zero.
pub const VIOLATION_TOL: f64 = 1e-8;
/// Pruning tolerance for `potential ≥ UB`.
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: usize,
    pub bounds: Bounds,
    /// Valid lower bound for the subproblem over `bounds`.
    pub potential: f64,
    /// Root has depth 1.
    pub depth: usize,
}

struct Entry(Node);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    /// Reversed so the max-heap pops the lowest potential, then lowest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .potential
            .total_cmp(&self.0.potential)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

/// Open nodes ordered by potential, ties broken by lowest id.
#[derive(Default)]
pub struct NodeQueue {
    heap: BinaryHeap<Entry>,
}

impl NodeQueue {
    pub fn new() -> Self {
        NodeQueue::default()
    }

    pub fn push(&mut self, node: Node) {
        self.heap.push(Entry(node));
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Removes and returns the node of minimum potential (lowest id on ties).
    pub fn select_node(&mut self) -> Option<Node> {
        self.heap.pop().map(|e| e.0)
    }

    pub fn min_potential(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.0.potential)
    }

    /// Drops every node whose potential is ≥ `ub` (up to [`PRUNE_TOL`]).
    pub fn prune(&mut self, ub: f64) -> usize {
        if !ub.is_finite() {
            return 0;
        }
        let before = self.heap.len();
        self.heap.retain(|e| e.0.potential < ub - PRUNE_TOL);
        before - self.heap.len()
    }

    pub fn potentials(&self) -> Vec<f64> {
        self.heap.iter().map(|e| e.0.potential).collect()
    }
}

/// Sum of |dual| over relaxation rows containing each column.
pub fn column_dual_weights(relax: &Relaxation, duals: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; relax.num_columns()];
    for (row, &y) in relax.rows.iter().zip(duals) {
        if y == 0.0 {
            continue;
        }
        for &(c, a) in &row.coeffs {
            if a != 0.0 {
                w[c] += y.abs();
            }
        }
    }
    w
}

/// `θ_j = Σ_J w(j, J) · violation(j, J)`; `column_weights` is used by the dual
/// rule and indexed by relaxation column.
pub fn branch_scores(
    table: &ViolationTable,
    relax: &Relaxation,
    rule: BranchingRule,
    node: &Bounds,
    root: &Bounds,
    column_weights: Option<&[f64]>,
) -> Vec<f64> {
    let n = relax.num_vars;
    let mut theta = vec![0.0; n];
    for ((j, rest), &v) in table {
        let w = match rule {
            BranchingRule::Sum => 1.0,
            BranchingRule::Range => {
                let rw = root.width(*j);
                if rw > 0.0 {
                    node.width(*j) / rw
                } else {
                    0.0
                }
            }
            BranchingRule::Dual => match column_weights {
                Some(cw) => cw[relax.rlt_index[&rest.with_var(*j)]],
                None => 1.0,
            },
        };
        theta[*j] += w * v;
    }
    theta
}

/// Argmax with ties to the lowest index; `None` when every entry is ≤ `tol`.
pub fn argmax_above(values: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &v) in values.iter().enumerate() {
        if v > tol && best.is_none_or(|b| v > values[b]) {
            best = Some(j);
        }
    }
    best
}

/// Which signal picked the branching variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchReason {
    Rlt,
    Integrality,
}

/// Chooses the branching variable, or `None` if the node is terminal.
/// `continuous_node` tells whether integrality was relaxed at this node.
pub fn select_branch_variable(
    theta: &[f64],
    x: &[f64],
    integer_vars: &[usize],
    mode: IntegerMode,
    continuous_node: bool,
) -> Option<(usize, BranchReason)> {
    let rlt = || argmax_above(theta, VIOLATION_TOL).map(|j| (j, BranchReason::Rlt));
    let frac = || {
        if continuous_node {
            most_fractional(x, integer_vars).map(|j| (j, BranchReason::Integrality))
        } else {
            None
        }
    };
    match mode {
        IntegerMode::MilpAtDepth(_) | IntegerMode::RltFirst => rlt().or_else(frac),
        IntegerMode::IntegralityFirst => frac().or_else(rlt),
    }
}

/// Convex combination of the relaxation value and the midpoint, overridden by
/// the incumbent coordinate when it is interior, then kept away from the ends.
pub fn branching_point(xbar: f64, l: f64, u: f64, incumbent: Option<f64>, c: f64, min_width_frac: f64) -> f64 {
    let beta = match incumbent {
        Some(v) if v > l && v < u => v,
        _ => c * xbar + (1.0 - c) * 0.5 * (l + u),
    };
    let margin = min_width_frac * (u - l);
    beta.clamp(l + margin, u - margin)
}

/// True iff `nodes_solved = ⌈base^k⌉` for some k ≥ 0.
pub fn nlp_call_due(nodes_solved: usize, base: f64) -> bool {
    if nodes_solved == 0 || !(base > 1.0) {
        return false;
    }
    let target = nodes_solved as f64;
    let mut p = 1.0f64;
    loop {
        let t = p.ceil();
        if t == target {
            return true;
        }
        if t > target {
            return false;
        }
        p *= base;
    }
}

/// Thresholds `⌈base^k⌉` up to `limit`, deduplicated.
pub fn nlp_call_thresholds(base: f64, limit: usize) -> Vec<usize> {
    (1..=limit).filter(|&n| nlp_call_due(n, base)).collect()
}

/// True iff the last `W` relative lower-bound changes are all below `rel_tol`.
pub fn stuck(lb_history: &[f64], num_vars: usize, rel_tol: f64, window: StuckWindow) -> bool {
    let w = window.size(num_vars);
    if lb_history.len() < w + 1 {
        return false;
    }
    lb_history[lb_history.len() - w - 1..].windows(2).all(|p| {
        let (a, b) = (p[0], p[1]);
        if a == b {
            return true;
        }
        if !a.is_finite() || !b.is_finite() {
            return false;
        }
        (b - a).abs() / b.abs().max(1.0) < rel_tol
    })
}
