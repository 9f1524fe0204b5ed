//! Upper-bounding heuristics: a continuous NLP local solver (augmented
//! Lagrangian over projected-gradient descent), the round / fix / round+fix
//! strategies, and a small MINLP local search built on top of them.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::poly::{check_feasible, Bounds, Problem, FEAS_TOL};

/// Largest penalty parameter; beyond this the inner problems become hopelessly
/// ill-conditioned in double precision.
const MAX_PENALTY: f64 = 1e12;
const PG_TOL: f64 = 1e-5;
const INNER_TOL: f64 = 1e-7;
const ARMIJO: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncumbentSource {
    NodeIntegral,
    NlpRound,
    NlpFix,
    MinlpLs,
}

/// A verified feasible point and its (internal, minimization) objective value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub point: Vec<f64>,
    pub value: f64,
    pub source: IncumbentSource,
}

impl Incumbent {
    /// Builds an incumbent iff `point` passes the feasibility check.
    pub fn verified(problem: &Problem, point: Vec<f64>, source: IncumbentSource) -> Option<Incumbent> {
        if !check_feasible(problem, &point, FEAS_TOL) {
            return None;
        }
        let value = problem.objective.eval(&point);
        value.is_finite().then_some(Incumbent { point, value, source })
    }
}

fn better(a: Option<Incumbent>, b: Option<Incumbent>) -> Option<Incumbent> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.value < a.value { b } else { a }),
        (a, b) => a.or(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlpStatus {
    /// Feasible within 1e-6 and first-order stationary within 1e-5.
    Converged,
    /// Stationarity was not reached, but a feasible iterate was found.
    FeasibleOnly,
    Failed,
}

#[derive(Clone, Debug)]
pub struct NlpResult {
    pub status: NlpStatus,
    /// Converged point, best feasible iterate, or last iterate on failure.
    pub x: Vec<f64>,
    pub objective: f64,
    pub violation: f64,
    pub pg_norm: f64,
    pub iterations: usize,
}

impl NlpResult {
    pub fn usable(&self) -> bool {
        self.status != NlpStatus::Failed
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NlpOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    pub deadline: Option<Instant>,
}

impl Default for NlpOptions {
    fn default() -> Self {
        NlpOptions {
            max_outer: 20,
            max_inner: 2000,
            deadline: None,
        }
    }
}

impl NlpOptions {
    pub fn with_budget(seconds: f64) -> Self {
        NlpOptions {
            deadline: Some(deadline_after(seconds)),
            ..NlpOptions::default()
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

fn deadline_after(seconds: f64) -> Instant {
    Instant::now() + Duration::from_secs_f64(seconds.clamp(0.0, 1e9))
}

struct AugmentedLagrangian<'a> {
    problem: &'a Problem,
    ineq_mult: Vec<f64>,
    eq_mult: Vec<f64>,
    rho: f64,
}

impl AugmentedLagrangian<'_> {
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let p = self.problem;
        let mut val = p.objective.eval(x);
        p.objective.accumulate_gradient(x, 1.0, grad);
        for (c, &mu) in p.ineqs.iter().zip(&self.ineq_mult) {
            let s = c.poly.eval(x) - c.rhs;
            if s <= mu / self.rho {
                val += -mu * s + 0.5 * self.rho * s * s;
                c.poly.accumulate_gradient(x, -mu + self.rho * s, grad);
            } else {
                val -= mu * mu / (2.0 * self.rho);
            }
        }
        for (c, &lam) in p.eqs.iter().zip(&self.eq_mult) {
            let h = c.poly.eval(x) - c.rhs;
            val += -lam * h + 0.5 * self.rho * h * h;
            c.poly.accumulate_gradient(x, -lam + self.rho * h, grad);
        }
        val
    }

    fn update_multipliers(&mut self, x: &[f64]) {
        for (c, mu) in self.problem.ineqs.iter().zip(self.ineq_mult.iter_mut()) {
            *mu = (*mu - self.rho * (c.poly.eval(x) - c.rhs)).max(0.0);
        }
        for (c, lam) in self.problem.eqs.iter().zip(self.eq_mult.iter_mut()) {
            *lam -= self.rho * (c.poly.eval(x) - c.rhs);
        }
    }
}

fn constraint_violation(problem: &Problem, x: &[f64]) -> f64 {
    let ineq = problem
        .ineqs
        .iter()
        .map(|c| c.rhs - c.poly.eval(x))
        .fold(0.0, f64::max);
    problem
        .eqs
        .iter()
        .map(|c| (c.poly.eval(x) - c.rhs).abs())
        .fold(ineq, f64::max)
}

fn project(bounds: &Bounds, x: &mut [f64]) {
    for (j, v) in x.iter_mut().enumerate() {
        *v = v.clamp(bounds.lower[j], bounds.upper[j]);
    }
}

fn projected_gradient_norm(bounds: &Bounds, x: &[f64], g: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(j, (&xj, &gj))| ((xj - gj).clamp(bounds.lower[j], bounds.upper[j]) - xj).abs())
        .fold(0.0, f64::max)
}

/// Tracks the lowest-objective feasible iterate seen.
struct BestFeasible {
    x: Option<Vec<f64>>,
    value: f64,
}

impl BestFeasible {
    fn offer(&mut self, problem: &Problem, x: &[f64]) {
        if constraint_violation(problem, x) <= FEAS_TOL {
            let v = problem.objective.eval(x);
            if v < self.value {
                self.value = v;
                self.x = Some(x.to_vec());
            }
        }
    }
}

/// Local minimization of the problem's objective over `bounds`, ignoring
/// integrality. Fixed variables are expressed as `l_j = u_j`.
pub fn nlp_local_solve(problem: &Problem, bounds: &Bounds, x0: &[f64], opts: &NlpOptions) -> NlpResult {
    let n = problem.num_vars();
    let mut x = bounds.clamp(x0);
    let mut best = BestFeasible {
        x: None,
        value: f64::INFINITY,
    };
    best.offer(problem, &x);

    let mut al = AugmentedLagrangian {
        problem,
        ineq_mult: vec![0.0; problem.ineqs.len()],
        eq_mult: vec![0.0; problem.eqs.len()],
        rho: 10.0,
    };
    let mut g = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut xn = vec![0.0; n];
    let mut iterations = 0;
    let mut pg_norm = f64::INFINITY;
    let mut violation = constraint_violation(problem, &x);
    let mut converged = false;
    let scale = (0..n)
        .map(|j| bounds.width(j))
        .filter(|w| w.is_finite())
        .fold(1.0f64, f64::max);

    'outer: for _ in 0..opts.max_outer {
        let mut val = al.value_grad(&x, &mut g);
        // The opening step moves at most a tenth of the box, so a freshly
        // stiffened penalty cannot throw the iterate into another basin.
        let g_max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut alpha = if g_max > 0.0 { (0.1 * scale / g_max).min(1.0) } else { 1.0 };
        for _ in 0..opts.max_inner {
            pg_norm = projected_gradient_norm(bounds, &x, &g);
            if pg_norm <= INNER_TOL || !val.is_finite() {
                break;
            }
            if opts.expired() {
                break 'outer;
            }
            iterations += 1;
            let mut step = alpha;
            let accepted = loop {
                for j in 0..n {
                    xn[j] = x[j] - step * g[j];
                }
                project(bounds, &mut xn);
                let decrease: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(gj, (a, b))| gj * (a - b)).sum();
                let vn = al.value_grad(&xn, &mut gn);
                if vn.is_finite() && vn <= val + ARMIJO * decrease {
                    break Some(vn);
                }
                step *= 0.5;
                if step < 1e-20 {
                    break None;
                }
            };
            let Some(vn) = accepted else { break };
            // Barzilai-Borwein step for the next iteration.
            let (mut ss, mut sy) = (0.0, 0.0);
            for j in 0..n {
                let s = xn[j] - x[j];
                ss += s * s;
                sy += s * (gn[j] - g[j]);
            }
            alpha = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { (step * 10.0).min(1e12) };
            std::mem::swap(&mut x, &mut xn);
            std::mem::swap(&mut g, &mut gn);
            val = vn;
            best.offer(problem, &x);
        }
        pg_norm = projected_gradient_norm(bounds, &x, &g);
        violation = constraint_violation(problem, &x);
        if violation <= FEAS_TOL && pg_norm <= PG_TOL {
            converged = true;
            break;
        }
        al.update_multipliers(&x);
        al.rho = (al.rho * 10.0).min(MAX_PENALTY);
    }

    let objective = problem.objective.eval(&x);
    if converged && objective <= best.value + 1e-8 {
        return NlpResult {
            status: NlpStatus::Converged,
            x,
            objective,
            violation,
            pg_norm,
            iterations,
        };
    }
    match best.x {
        Some(bx) => NlpResult {
            status: NlpStatus::FeasibleOnly,
            violation: constraint_violation(problem, &bx),
            objective: best.value,
            x: bx,
            pg_norm,
            iterations,
        },
        None => NlpResult {
            status: NlpStatus::Failed,
            x,
            objective,
            violation,
            pg_norm,
            iterations,
        },
    }
}

/// Half-up rounding.
pub fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

fn round_integers(problem: &Problem, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(j, &v)| {
            if problem.integer[j] {
                round_half_up(v).clamp(problem.bounds.lower[j].ceil(), problem.bounds.upper[j].floor())
            } else {
                v
            }
        })
        .collect()
}

/// Box with every integer variable fixed at its coordinate in `point`.
fn fixed_bounds(problem: &Problem, point: &[f64]) -> Bounds {
    let mut b = problem.bounds.clone();
    for j in problem.integer_vars() {
        b.lower[j] = point[j];
        b.upper[j] = point[j];
    }
    b
}

/// NLP from `xbar` with integrality relaxed, then round the integer coordinates.
pub fn try_round(problem: &Problem, xbar: &[f64], budget: f64) -> Option<Incumbent> {
    let r = nlp_local_solve(problem, &problem.bounds, xbar, &NlpOptions::with_budget(budget));
    if !r.usable() {
        return None;
    }
    Incumbent::verified(problem, round_integers(problem, &r.x), IncumbentSource::NlpRound)
}

/// Fixes the (rounded) integer coordinates of `xbar` and optimizes the rest.
pub fn try_fix(problem: &Problem, xbar: &[f64], budget: f64) -> Option<Incumbent> {
    let start = round_integers(problem, &problem.bounds.clamp(xbar));
    let bounds = fixed_bounds(problem, &start);
    let r = nlp_local_solve(problem, &bounds, &start, &NlpOptions::with_budget(budget));
    if !r.usable() {
        return None;
    }
    Incumbent::verified(problem, r.x, IncumbentSource::NlpFix)
}

/// Runs round then fix and keeps the better outcome.
pub fn try_round_plus_fix(problem: &Problem, xbar: &[f64], budget: f64) -> Option<Incumbent> {
    let deadline = deadline_after(budget);
    let rounded = try_round(problem, xbar, budget);
    if !problem.has_integers() {
        // Without integers both strategies are the same NLP call.
        return rounded;
    }
    let left = deadline.saturating_duration_since(Instant::now()).as_secs_f64();
    if left <= 0.0 {
        return rounded;
    }
    better(rounded, try_fix(problem, xbar, left))
}

/// Result of a neighborhood descent: best incumbent and the integer
/// assignments accepted along the way (starting point first).
#[derive(Clone, Debug)]
pub struct DescentTrace {
    pub incumbent: Option<Incumbent>,
    pub path: Vec<Vec<f64>>,
}

/// ±1 first-improvement descent over the integer variables in index order.
/// An infeasible start counts as value +∞.
pub fn integer_neighborhood_descent(problem: &Problem, start: &[f64], deadline: Instant) -> DescentTrace {
    let ints = problem.integer_vars();
    let mut current = round_integers(problem, &problem.bounds.clamp(start));
    let mut best = Incumbent::verified(problem, current.clone(), IncumbentSource::MinlpLs);
    let mut path = vec![ints.iter().map(|&j| current[j]).collect::<Vec<f64>>()];
    let budget_left = || deadline.saturating_duration_since(Instant::now()).as_secs_f64();
    'search: loop {
        let best_value = best.as_ref().map_or(f64::INFINITY, |b| b.value);
        for &j in &ints {
            for delta in [-1.0, 1.0] {
                let v = current[j] + delta;
                if v < problem.bounds.lower[j] - 1e-9 || v > problem.bounds.upper[j] + 1e-9 {
                    continue;
                }
                let left = budget_left();
                if left <= 0.0 {
                    break 'search;
                }
                let mut trial = current.clone();
                trial[j] = v;
                if let Some(inc) = try_fix(problem, &trial, left) {
                    if inc.value < best_value - 1e-9 {
                        current = inc.point.clone();
                        path.push(ints.iter().map(|&k| current[k]).collect());
                        best = Some(Incumbent {
                            source: IncumbentSource::MinlpLs,
                            ..inc
                        });
                        continue 'search;
                    }
                }
            }
        }
        break;
    }
    DescentTrace { incumbent: best, path }
}

/// Round+fix from `x0` followed by an integer neighborhood descent.
pub fn minlp_local_solve(problem: &Problem, x0: &[f64], budget: f64) -> Option<Incumbent> {
    let deadline = deadline_after(budget);
    let first = try_round_plus_fix(problem, x0, budget).map(|inc| Incumbent {
        source: IncumbentSource::MinlpLs,
        ..inc
    });
    if !problem.has_integers() || Instant::now() >= deadline {
        return first;
    }
    let start = first.as_ref().map_or_else(|| x0.to_vec(), |inc| inc.point.clone());
    let trace = integer_neighborhood_descent(problem, &start, deadline);
    better(first, trace.incumbent)
}
