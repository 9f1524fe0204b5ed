//! Spatial branch-and-bound over RLT relaxations.

pub mod branching;
pub mod config;
pub mod report;

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::local_search::{
    minlp_local_solve, try_fix, try_round, try_round_plus_fix, Incumbent, IncumbentSource,
};
use crate::lp::{solve_lp_with, LpOptions, LpResult, LpStatus};
use crate::milp::{solve_milp_from, MilpBudget, MilpStatus};
use crate::poly::{Bounds, Problem};
use crate::relax::{
    build_relaxation, rlt_violation_table, LpSolution, Relaxation, RelaxationKind, SolutionStatus,
};
use crate::tighten::{fbbt, obbt, round_integer_bounds, ObbtMode, Tightened};

pub use branching::{
    branch_scores, branching_point, column_dual_weights, nlp_call_due, nlp_call_thresholds, select_branch_variable, stuck,
    BranchReason, Node, NodeQueue, PRUNE_TOL, VIOLATION_TOL,
};
pub use config::{BranchingRule, IntegerMode, NlpStrategy, SolverConfig, StuckWindow};
pub use report::{
    absolute_gap, relative_gap, LbPoint, LocalSearchStats, NodeEvent, NodeOutcome, SolveReport, SolveStatus,
    without_timing, TIMING_FIELDS,
};

/// Variables narrower than this are never branched on.
const MIN_BRANCH_WIDTH: f64 = 1e-9;

/// Solves `problem` to global optimality (within the configured gaps).
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    problem.validate()?;
    Solver::new(problem, config).run()
}

/// Relaxation relevant to the node at `depth`.
pub fn node_relaxation_kind(problem: &Problem, mode: IntegerMode, depth: usize) -> RelaxationKind {
    match mode {
        IntegerMode::MilpAtDepth(d) if problem.has_integers() && depth >= d => RelaxationKind::Milp,
        _ => RelaxationKind::Continuous,
    }
}

enum Stop {
    Exhausted,
    GapClosed,
    TimeLimit,
    NodeLimit,
}

/// Outcome of solving a node relaxation.
enum NodeSolve {
    Infeasible,
    Solved {
        values: Vec<f64>,
        bound: f64,
        duals: Option<Vec<f64>>,
    },
    /// Mixed-integer relaxation ran out of budget with this valid bound.
    BoundOnly { bound: f64, point: Option<Vec<f64>> },
    Stalled,
}

struct Solver<'a> {
    original: &'a Problem,
    /// Problem over the tightened root box.
    work: Problem,
    cfg: &'a SolverConfig,
    start: Instant,
    queue: NodeQueue,
    next_id: usize,
    ub: f64,
    incumbent: Option<Incumbent>,
    lb: f64,
    /// Bounds of closed nodes whose value was not matched by a point.
    closed_floor: f64,
    /// Bounds of subtrees dropped for numerical reasons.
    lost_floor: f64,
    nodes_solved: usize,
    max_queue: usize,
    lb_values: Vec<f64>,
    last_x: Vec<f64>,
    end_fired: bool,
    root_lp: Option<LpResult>,
    report: SolveReport,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a Problem, cfg: &'a SolverConfig) -> Self {
        Solver {
            original: problem,
            work: problem.clone(),
            cfg,
            start: Instant::now(),
            queue: NodeQueue::new(),
            next_id: 1,
            ub: f64::INFINITY,
            incumbent: None,
            lb: f64::NEG_INFINITY,
            closed_floor: f64::INFINITY,
            lost_floor: f64::INFINITY,
            nodes_solved: 0,
            max_queue: 0,
            lb_values: Vec::new(),
            last_x: problem.bounds.midpoint(),
            end_fired: false,
            root_lp: None,
            report: SolveReport {
                instance: problem.name.clone(),
                status: SolveStatus::TimeLimit,
                lb: f64::NEG_INFINITY,
                ub: f64::INFINITY,
                objective: f64::INFINITY,
                bound: f64::NEG_INFINITY,
                rel_gap: f64::INFINITY,
                abs_gap: f64::INFINITY,
                incumbent: None,
                nodes: 0,
                max_queue: 0,
                root_fbbt_infeasible: false,
                local_search: LocalSearchStats::default(),
                wall_time: 0.0,
                obbt_time: 0.0,
                nlp_ls_time: 0.0,
                minlp_ls_time: 0.0,
                lb_history: Vec::new(),
                events: Vec::new(),
            },
        }
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn remaining(&self) -> f64 {
        self.cfg.time_limit - self.elapsed()
    }

    fn deadline(&self) -> Instant {
        self.start + Duration::from_secs_f64(self.cfg.time_limit.min(1e9))
    }

    fn lp_options(&self) -> LpOptions {
        LpOptions {
            deadline: Some(self.deadline()),
            ..LpOptions::default()
        }
    }

    /// Time the end-of-run local search keeps for itself while still pending.
    fn reserve(&self) -> f64 {
        if self.cfg.minlp_end && !self.end_fired && self.ub == f64::INFINITY {
            self.cfg.minlp_end_reserve * self.cfg.time_limit
        } else {
            0.0
        }
    }

    fn local_budget(&self) -> f64 {
        self.cfg.local_budget.min(self.remaining() - self.reserve())
    }

    fn gap_closed(&self) -> bool {
        self.ub.is_finite()
            && (absolute_gap(self.lb, self.ub) <= self.cfg.abs_gap || relative_gap(self.lb, self.ub) <= self.cfg.rel_gap)
    }

    fn offer(&mut self, cand: Option<Incumbent>) -> bool {
        match cand {
            Some(inc) if inc.value < self.ub => {
                self.ub = inc.value;
                self.incumbent = Some(inc);
                self.queue.prune(self.ub);
                true
            }
            _ => false,
        }
    }

    fn offer_point(&mut self, x: &[f64], source: IncumbentSource) -> bool {
        let cand = Incumbent::verified(&self.work, x.to_vec(), source);
        self.offer(cand)
    }

    fn update_lb(&mut self) {
        let open = self.queue.min_potential().unwrap_or(f64::INFINITY);
        let computed = open.min(self.closed_floor).min(self.lost_floor).min(self.ub);
        // Never lower a proven bound: an incumbent that lands a rounding error
        // below it closes the gap without undoing the proof.
        let lb = self.lb.max(computed);
        if lb != self.lb || self.report.lb_history.is_empty() {
            self.report.lb_history.push(LbPoint {
                time: self.elapsed(),
                node: self.nodes_solved,
                lb,
            });
        }
        self.lb = lb;
    }

    fn finish(mut self, status: SolveStatus) -> SolveReport {
        let r = &mut self.report;
        r.status = status;
        r.lb = self.lb;
        r.ub = self.ub;
        r.objective = self.original.sense_value(self.ub);
        r.bound = self.original.sense_value(self.lb);
        r.rel_gap = relative_gap(self.lb, self.ub);
        r.abs_gap = absolute_gap(self.lb, self.ub);
        r.incumbent = self.incumbent;
        r.nodes = self.nodes_solved;
        r.max_queue = self.max_queue;
        r.wall_time = self.start.elapsed().as_secs_f64();
        self.report
    }

    fn infeasible(mut self) -> SolveReport {
        self.lb = f64::INFINITY;
        self.finish(SolveStatus::Infeasible)
    }

    fn run(mut self) -> Result<SolveReport> {
        let n = self.original.num_vars();
        let mut root = self.original.bounds.clone();
        if !round_integer_bounds(self.original, &mut root) {
            return Ok(self.infeasible());
        }
        if self.cfg.fbbt {
            match fbbt(self.original, &root, self.cfg.fbbt_max_passes) {
                Tightened::Box(b) => root = b,
                Tightened::Infeasible => {
                    self.report.root_fbbt_infeasible = true;
                    return Ok(self.infeasible());
                }
            }
        }
        if self.cfg.obbt_mode != ObbtMode::Off {
            let budget = self.cfg.obbt_budget().min(self.remaining().max(1e-3));
            let rep = obbt(self.original, &root, self.cfg.obbt_mode, budget, Some(self.deadline()))?;
            self.report.obbt_time = rep.seconds;
            match rep.outcome {
                Tightened::Box(b) => root = b,
                Tightened::Infeasible => return Ok(self.infeasible()),
            }
            if self.cfg.fbbt {
                match fbbt(self.original, &root, self.cfg.fbbt_max_passes) {
                    Tightened::Box(b) => root = b,
                    Tightened::Infeasible => return Ok(self.infeasible()),
                }
            }
        }
        self.work.bounds = root.clone();

        // Root LP first: a finite lower bound regardless of the node relaxation kind.
        let relax = build_relaxation(&self.work, &root, RelaxationKind::Continuous)?;
        let res = solve_lp_with(&relax.to_linear_program(), &self.lp_options())?;
        let root_potential = match res.status {
            LpStatus::Infeasible => return Ok(self.infeasible()),
            LpStatus::Optimal => {
                self.last_x = res.x[..n].to_vec();
                res.objective
            }
            _ => f64::NEG_INFINITY,
        };
        self.root_lp = Some(res);
        self.lb = root_potential;
        self.lb_values.push(self.lb);
        self.report.lb_history.push(LbPoint {
            time: self.elapsed(),
            node: 0,
            lb: self.lb,
        });

        if self.cfg.minlp_begin && self.problem_has_integers() {
            self.report.local_search.minlp_begin_calls += 1;
            self.minlp_call();
        }

        self.queue.push(Node {
            id: self.next_id,
            bounds: root,
            potential: root_potential,
            depth: 1,
        });
        self.next_id += 1;
        self.update_lb();

        let stop = loop {
            if self.gap_closed() {
                break Stop::GapClosed;
            }
            if self.queue.is_empty() {
                break Stop::Exhausted;
            }
            if self.cfg.minlp_end && !self.end_fired && self.ub == f64::INFINITY
                && self.remaining() <= self.cfg.minlp_end_reserve * self.cfg.time_limit
            {
                self.end_call();
                self.update_lb();
                continue;
            }
            if self.remaining() <= 0.0 {
                break Stop::TimeLimit;
            }
            if self.cfg.node_limit.is_some_and(|k| self.nodes_solved >= k) {
                break Stop::NodeLimit;
            }
            let node = self.queue.select_node().expect("nonempty");
            let mut event = self.process(node)?;
            self.max_queue = self.max_queue.max(self.queue.len());
            self.update_lb();
            event.lb = self.lb;
            event.ub = self.ub;
            event.time = self.elapsed();
            self.report.events.push(event);

            self.lb_values.push(self.lb);
            if self.cfg.minlp_on_stuck
                && self.problem_has_integers()
                && stuck(&self.lb_values, n, self.cfg.stuck_rel_tol, self.cfg.stuck_window)
                && self.local_budget() > 0.0
            {
                self.report.local_search.minlp_stuck_calls += 1;
                self.minlp_call();
                self.lb_values.clear();
                self.update_lb();
            }
        };

        let status = match stop {
            Stop::GapClosed => SolveStatus::Optimal,
            Stop::Exhausted => {
                if self.gap_closed() {
                    SolveStatus::Optimal
                } else if self.ub.is_finite() || self.lost_floor.is_finite() || self.closed_floor.is_finite() {
                    SolveStatus::Numerical
                } else {
                    return Ok(self.infeasible());
                }
            }
            Stop::TimeLimit | Stop::NodeLimit => {
                if self.cfg.minlp_end && !self.end_fired && self.ub == f64::INFINITY {
                    self.end_call();
                    self.update_lb();
                }
                if self.gap_closed() {
                    SolveStatus::Optimal
                } else if matches!(stop, Stop::TimeLimit) {
                    SolveStatus::TimeLimit
                } else {
                    SolveStatus::NodeLimit
                }
            }
        };
        Ok(self.finish(status))
    }

    fn problem_has_integers(&self) -> bool {
        self.work.has_integers()
    }

    fn minlp_call(&mut self) {
        let budget = self.local_budget();
        if budget <= 0.0 {
            return;
        }
        let t = Instant::now();
        let x0 = self.last_x.clone();
        let found = minlp_local_solve(&self.work, &x0, budget);
        self.report.minlp_ls_time += t.elapsed().as_secs_f64();
        if self.offer(found) {
            self.report.local_search.minlp_successes += 1;
        }
    }

    fn end_call(&mut self) {
        self.end_fired = true;
        self.report.local_search.minlp_end_calls += 1;
        let budget = self.remaining().max(0.0).min(self.cfg.minlp_end_reserve * self.cfg.time_limit).max(1e-3);
        let t = Instant::now();
        let x0 = self.last_x.clone();
        let found = minlp_local_solve(&self.work, &x0, budget);
        self.report.minlp_ls_time += t.elapsed().as_secs_f64();
        if self.offer(found) {
            self.report.local_search.minlp_successes += 1;
        }
    }

    fn nlp_call(&mut self, x: &[f64]) {
        let budget = self.local_budget();
        if budget <= 0.0 {
            return;
        }
        let t = Instant::now();
        let found = match self.cfg.nlp_strategy {
            NlpStrategy::Round => try_round(&self.work, x, budget),
            NlpStrategy::Fix => try_fix(&self.work, x, budget),
            NlpStrategy::RoundFix => try_round_plus_fix(&self.work, x, budget),
            NlpStrategy::Off => None,
        };
        self.report.local_search.nlp_calls += 1;
        self.report.nlp_ls_time += t.elapsed().as_secs_f64();
        if self.offer(found) {
            self.report.local_search.nlp_successes += 1;
        }
    }

    fn solve_relaxation(&mut self, node: &Node, relax: &Relaxation) -> Result<NodeSolve> {
        let lp = relax.to_linear_program();
        let need_lp = relax.kind == RelaxationKind::Continuous || self.cfg.branching_rule == BranchingRule::Dual;
        let cached = if node.id == 1 { self.root_lp.take() } else { None };
        let lp_res = match cached {
            Some(r) => Some(r),
            None if need_lp => Some(solve_lp_with(&lp, &self.lp_options())?),
            None => None,
        };
        if let Some(r) = &lp_res {
            if r.status == LpStatus::Infeasible {
                return Ok(NodeSolve::Infeasible);
            }
        }
        if relax.kind == RelaxationKind::Continuous {
            let r = lp_res.expect("continuous nodes always solve the LP");
            return Ok(match r.status {
                LpStatus::Optimal => NodeSolve::Solved {
                    values: r.x,
                    bound: r.objective,
                    duals: Some(r.duals),
                },
                _ => NodeSolve::Stalled,
            });
        }

        let lp_optimal = lp_res.filter(|r| r.status == LpStatus::Optimal);
        if let Some(r) = &lp_optimal {
            // The LP bound alone may already prune the node.
            if r.objective >= self.ub - PRUNE_TOL {
                return Ok(NodeSolve::Solved {
                    values: r.x.clone(),
                    bound: r.objective,
                    duals: None,
                });
            }
        }
        let duals = lp_optimal.as_ref().map(|r| r.duals.clone());
        let mut time = (self.remaining() - self.reserve()).max(1e-3);
        if let Some(cap) = self.cfg.milp_time_cap {
            time = time.min(cap);
        }
        let budget = MilpBudget {
            time,
            node_limit: self.cfg.milp_node_limit,
        };
        let m = solve_milp_from(&lp, &relax.integral_columns(), budget, self.cfg.rel_gap, lp_optimal)?;
        Ok(match m.status {
            MilpStatus::Infeasible => NodeSolve::Infeasible,
            MilpStatus::Failed => NodeSolve::Stalled,
            MilpStatus::BoundOnly => NodeSolve::BoundOnly {
                bound: m.best_bound,
                point: (!m.x.is_empty()).then_some(m.x),
            },
            MilpStatus::Optimal => NodeSolve::Solved {
                values: m.x,
                bound: m.best_bound,
                duals,
            },
        })
    }

    fn push_child(&mut self, bounds: Bounds, potential: f64, depth: usize) {
        self.queue.push(Node {
            id: self.next_id,
            bounds,
            potential,
            depth,
        });
        self.next_id += 1;
    }

    fn process(&mut self, node: Node) -> Result<NodeEvent> {
        let n = self.work.num_vars();
        let kind = node_relaxation_kind(&self.work, self.cfg.integer_mode, node.depth);
        let mut event = NodeEvent {
            node_id: node.id,
            depth: node.depth,
            kind,
            potential: node.potential,
            bound: f64::NAN,
            outcome: NodeOutcome::Stalled,
            branch_var: None,
            branch_reason: None,
            beta: None,
            lb: f64::NAN,
            ub: f64::NAN,
            time: 0.0,
        };

        let mut bounds = node.bounds.clone();
        if self.cfg.fbbt && node.id != 1 {
            match fbbt(&self.work, &bounds, self.cfg.fbbt_max_passes) {
                Tightened::Box(b) => bounds = b,
                Tightened::Infeasible => {
                    event.outcome = NodeOutcome::FbbtInfeasible;
                    return Ok(event);
                }
            }
        }

        let relax = build_relaxation(&self.work, &bounds, kind)?;
        self.nodes_solved += 1;
        let (values, bound, duals) = match self.solve_relaxation(&node, &relax)? {
            NodeSolve::Infeasible => {
                event.outcome = NodeOutcome::RelaxationInfeasible;
                return Ok(event);
            }
            NodeSolve::Stalled => {
                self.split_stalled(&node, bounds, &mut event);
                return Ok(event);
            }
            NodeSolve::BoundOnly { bound, point } => {
                event.bound = bound;
                if let Some(p) = point {
                    self.offer_point(&p[..n], IncumbentSource::NodeIntegral);
                }
                let potential = node.potential.max(bound);
                if potential >= self.ub - PRUNE_TOL {
                    event.outcome = NodeOutcome::PrunedByBound;
                } else {
                    event.outcome = NodeOutcome::Requeued;
                    self.queue.push(Node {
                        bounds,
                        potential,
                        ..node
                    });
                }
                return Ok(event);
            }
            NodeSolve::Solved { values, bound, duals } => (values, bound, duals),
        };
        event.bound = bound;
        let z = bound.max(node.potential);
        let x = values[..n].to_vec();
        self.last_x = x.clone();

        self.offer_point(&x, IncumbentSource::NodeIntegral);
        if z >= self.ub - PRUNE_TOL {
            event.outcome = NodeOutcome::PrunedByBound;
            return Ok(event);
        }
        if self.cfg.nlp_strategy != NlpStrategy::Off && nlp_call_due(self.nodes_solved, self.cfg.nlp_call_base) {
            self.nlp_call(&x);
            if z >= self.ub - PRUNE_TOL {
                event.outcome = NodeOutcome::PrunedByBound;
                return Ok(event);
            }
        }

        let sol = LpSolution {
            status: SolutionStatus::Optimal,
            values,
            num_vars: n,
            objective: bound,
            duals: None,
        };
        let table = rlt_violation_table(&sol, &relax);
        let weights = match (self.cfg.branching_rule, &duals) {
            (BranchingRule::Dual, Some(d)) => Some(column_dual_weights(&relax, d)),
            _ => None,
        };
        let root = &self.work.bounds;
        let mut theta = branch_scores(&table, &relax, self.cfg.branching_rule, &bounds, root, weights.as_deref());
        let narrow = |j: usize| bounds.width(j) <= MIN_BRANCH_WIDTH * (1.0 + bounds.lower[j].abs());
        let mask = |theta: &mut Vec<f64>| {
            for (j, t) in theta.iter_mut().enumerate() {
                if narrow(j) {
                    *t = 0.0;
                }
            }
        };
        mask(&mut theta);
        if self.cfg.branching_rule == BranchingRule::Dual && theta.iter().all(|&t| t <= VIOLATION_TOL) {
            // Violated identities that no active row prices: fall back to raw violations.
            theta = branch_scores(&table, &relax, BranchingRule::Sum, &bounds, root, None);
            mask(&mut theta);
        }

        let ints = self.work.integer_vars();
        let choice = select_branch_variable(
            &theta,
            &x,
            &ints,
            self.cfg.integer_mode,
            kind == RelaxationKind::Continuous,
        );
        let Some((j, reason)) = choice else {
            // Relaxation solution satisfies every identity: the node is solved.
            if !self.incumbent.as_ref().is_some_and(|inc| inc.value <= z + PRUNE_TOL) {
                if Incumbent::verified(&self.work, x.clone(), IncumbentSource::NodeIntegral).is_some() {
                    self.closed_floor = self.closed_floor.min(z);
                    event.outcome = NodeOutcome::Terminal;
                } else {
                    self.lost_floor = self.lost_floor.min(z);
                    event.outcome = NodeOutcome::Abandoned;
                }
            } else {
                event.outcome = NodeOutcome::Terminal;
            }
            return Ok(event);
        };

        let (l, u) = (bounds.lower[j], bounds.upper[j]);
        let beta = if reason == BranchReason::Integrality {
            x[j]
        } else {
            let inc = self.incumbent.as_ref().map(|i| i.point[j]);
            branching_point(x[j], l, u, inc, self.cfg.branch_convex_coeff, self.cfg.min_width_frac)
        };
        event.branch_var = Some(j);
        event.branch_reason = Some(reason);
        event.beta = Some(beta);
        event.outcome = NodeOutcome::Branched;
        self.branch(&bounds, j, beta, z, node.depth + 1);
        Ok(event)
    }

    fn branch(&mut self, bounds: &Bounds, j: usize, beta: f64, potential: f64, depth: usize) {
        let (mut left, mut right) = (bounds.clone(), bounds.clone());
        if self.work.integer[j] {
            left.upper[j] = beta.floor();
            right.lower[j] = (beta + 1e-9).ceil();
        } else {
            left.upper[j] = beta;
            right.lower[j] = beta;
        }
        for child in [left, right] {
            if child.lower[j] <= child.upper[j] {
                self.push_child(child, potential, depth);
            }
        }
    }

    /// Splits a node whose relaxation could not be solved at its widest
    /// (relative to the root) variable; children keep the parent's potential.
    fn split_stalled(&mut self, node: &Node, bounds: Bounds, event: &mut NodeEvent) {
        let root = &self.work.bounds;
        let pick = (0..bounds.len())
            .filter(|&j| bounds.width(j) > MIN_BRANCH_WIDTH * (1.0 + bounds.lower[j].abs()))
            .map(|j| {
                let rw = root.width(j);
                (j, if rw > 0.0 { bounds.width(j) / rw } else { 0.0 })
            })
            .fold(None::<(usize, f64)>, |best, (j, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((j, w)),
            });
        match pick {
            Some((j, _)) => {
                let mid = 0.5 * (bounds.lower[j] + bounds.upper[j]);
                event.outcome = NodeOutcome::Stalled;
                event.branch_var = Some(j);
                event.beta = Some(mid);
                self.branch(&bounds, j, mid, node.potential, node.depth + 1);
            }
            None => {
                self.lost_floor = self.lost_floor.min(node.potential);
                event.outcome = NodeOutcome::Abandoned;
            }
        }
    }
}
