//! Bound tightening: interval propagation over the polynomial constraints
//! (FBBT) and min/max of each variable over the RLT relaxation (OBBT).

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interval::Interval;
use crate::lp::{solve_lp_with, LpOptions, LpStatus};
use crate::milp::{solve_milp, MilpBudget, MilpStatus};
use crate::poly::{Bounds, Monomial, Polynomial, Problem};
use crate::relax::{build_relaxation, monomial_range, RelaxationKind};

/// Minimum improvement for a bound update; keeps the fixpoint exactly idempotent.
const MIN_IMPROVEMENT: f64 = 1e-6;
/// Outward slack applied to derived bounds to absorb rounding error.
const SAFETY: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Tightened {
    Box(Bounds),
    /// No point of the input box satisfies the constraints.
    Infeasible,
}

impl Tightened {
    pub fn bounds(&self) -> Option<&Bounds> {
        match self {
            Tightened::Box(b) => Some(b),
            Tightened::Infeasible => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Tightened::Infeasible)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObbtMode {
    Lp,
    Milp,
    Off,
}

/// Rounds integer bounds inward. Returns false if some integer interval becomes empty.
pub fn round_integer_bounds(problem: &Problem, bounds: &mut Bounds) -> bool {
    for j in 0..problem.num_vars() {
        if problem.integer[j] {
            bounds.lower[j] = (bounds.lower[j] - 1e-7).ceil();
            bounds.upper[j] = (bounds.upper[j] + 1e-7).floor();
            if bounds.lower[j] > bounds.upper[j] {
                return false;
            }
        }
    }
    true
}

fn var_interval(bounds: &Bounds, j: usize) -> Interval {
    Interval::new(bounds.lower[j], bounds.upper[j])
}

/// Product of the monomial's factors other than `x_j^e`.
fn cofactor_range(m: &Monomial, skip: usize, bounds: &Bounds) -> Interval {
    m.powers()
        .into_iter()
        .filter(|&(j, _)| j != skip)
        .fold(Interval::point(1.0), |acc, (j, e)| acc * var_interval(bounds, j).powi(e))
}

/// Applies `x_j ∈ cand` to the box. Returns Err(()) when the box empties.
fn apply(bounds: &mut Bounds, j: usize, cand: Interval, changed: &mut bool) -> std::result::Result<(), ()> {
    if cand.is_empty() {
        return Err(());
    }
    let cand = cand.widen(SAFETY);
    let (l, u) = (bounds.lower[j], bounds.upper[j]);
    if cand.lo > u || cand.hi < l {
        return Err(());
    }
    if cand.lo > l + MIN_IMPROVEMENT * (1.0 + l.abs()) {
        bounds.lower[j] = cand.lo.min(u);
        *changed = true;
    }
    if cand.hi < u - MIN_IMPROVEMENT * (1.0 + u.abs()) {
        bounds.upper[j] = cand.hi.max(bounds.lower[j]);
        *changed = true;
    }
    Ok(())
}

/// Propagates `poly ∈ target` through each term in turn.
fn propagate(poly: &Polynomial, target: Interval, bounds: &mut Bounds, changed: &mut bool) -> std::result::Result<(), ()> {
    let target = Interval::new(target.lo - poly.constant(), target.hi - poly.constant());
    let terms: Vec<(&Monomial, f64)> = poly.terms().collect();
    let ranges: Vec<Interval> = terms
        .iter()
        .map(|(m, c)| monomial_range(m, bounds).scale(*c))
        .collect();
    let total = ranges.iter().fold(Interval::point(0.0), |a, r| a + *r);
    if total.widen(SAFETY).intersect(&target).is_empty() {
        return Err(());
    }
    for (t, (m, c)) in terms.iter().enumerate() {
        // Term ranges change as bounds tighten; recompute the rest each time.
        let rest = terms
            .iter()
            .enumerate()
            .filter(|(s, _)| *s != t)
            .fold(Interval::point(0.0), |a, (_, (m2, c2))| a + monomial_range(m2, bounds).scale(*c2));
        let allowed = Interval::new(target.lo - rest.hi, target.hi - rest.lo);
        let mono = allowed.scale(1.0 / c);
        if mono.lo == f64::NEG_INFINITY && mono.hi == f64::INFINITY {
            continue;
        }
        for (j, e) in m.powers() {
            let co = cofactor_range(m, j, bounds);
            let power = if co == Interval::point(1.0) {
                mono
            } else {
                match mono.div(&co) {
                    Some(p) => p,
                    None => continue,
                }
            };
            let cand = power.root_within(e, &var_interval(bounds, j));
            apply(bounds, j, cand, changed)?;
        }
    }
    Ok(())
}

pub fn fbbt(problem: &Problem, bounds: &Bounds, max_passes: usize) -> Tightened {
    let mut b = bounds.clone();
    if !round_integer_bounds(problem, &mut b) {
        return Tightened::Infeasible;
    }
    for _ in 0..max_passes.max(1) {
        let mut changed = false;
        for c in &problem.ineqs {
            if propagate(&c.poly, Interval::new(c.rhs, f64::INFINITY), &mut b, &mut changed).is_err() {
                return Tightened::Infeasible;
            }
        }
        for c in &problem.eqs {
            if propagate(&c.poly, Interval::point(c.rhs), &mut b, &mut changed).is_err() {
                return Tightened::Infeasible;
            }
        }
        let before = b.clone();
        if !round_integer_bounds(problem, &mut b) {
            return Tightened::Infeasible;
        }
        if b != before {
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Tightened::Box(b)
}

#[derive(Clone, Debug)]
pub struct ObbtReport {
    pub outcome: Tightened,
    /// Subproblems whose solve stalled; their bound was left unchanged.
    pub stalled: usize,
    pub seconds: f64,
}

enum Direction {
    Bound(f64),
    Unchanged,
    Infeasible,
}

/// Minimizes and maximizes every variable over the relaxation of `bounds`.
/// Each of the `2N` bounding problems gets `budget_per_subproblem` seconds,
/// and none runs past `deadline`.
pub fn obbt(
    problem: &Problem,
    bounds: &Bounds,
    mode: ObbtMode,
    budget_per_subproblem: f64,
    deadline: Option<Instant>,
) -> Result<ObbtReport> {
    let start = Instant::now();
    if mode == ObbtMode::Off {
        return Ok(ObbtReport {
            outcome: Tightened::Box(bounds.clone()),
            stalled: 0,
            seconds: 0.0,
        });
    }
    let kind = match mode {
        ObbtMode::Milp => RelaxationKind::Milp,
        _ => RelaxationKind::Continuous,
    };
    let relax = build_relaxation(problem, bounds, kind)?;
    let integral = relax.integral_columns();
    let n = problem.num_vars();
    let budget = budget_per_subproblem.max(1e-3);

    let tasks: Vec<(usize, f64)> = (0..n).flat_map(|j| [(j, 1.0), (j, -1.0)]).collect();
    let results: Vec<Result<Direction>> = tasks
        .par_iter()
        .map(|&(j, sign)| {
            let own = Instant::now() + Duration::from_secs_f64(budget);
            let until = deadline.map_or(own, |d| d.min(own));
            let lp = relax.to_bounding_program(j, sign);
            let value = match mode {
                ObbtMode::Milp if !integral.is_empty() => {
                    let r = solve_milp(
                        &lp,
                        &integral,
                        MilpBudget {
                            time: until.saturating_duration_since(Instant::now()).as_secs_f64().max(1e-6),
                            node_limit: 100_000,
                        },
                        1e-9,
                    )?;
                    match r.status {
                        MilpStatus::Infeasible => Direction::Infeasible,
                        MilpStatus::Failed => Direction::Unchanged,
                        MilpStatus::Optimal | MilpStatus::BoundOnly => {
                            if r.best_bound.is_finite() {
                                Direction::Bound(r.best_bound)
                            } else {
                                Direction::Unchanged
                            }
                        }
                    }
                }
                _ => {
                    let opts = LpOptions {
                        deadline: Some(until),
                        ..LpOptions::default()
                    };
                    let r = solve_lp_with(&lp, &opts)?;
                    match r.status {
                        LpStatus::Optimal => Direction::Bound(r.objective),
                        LpStatus::Infeasible => Direction::Infeasible,
                        _ => Direction::Unchanged,
                    }
                }
            };
            Ok(value)
        })
        .collect();

    let mut out = bounds.clone();
    let mut stalled = 0;
    for (&(j, sign), res) in tasks.iter().zip(results) {
        match res? {
            Direction::Infeasible => {
                return Ok(ObbtReport {
                    outcome: Tightened::Infeasible,
                    stalled,
                    seconds: start.elapsed().as_secs_f64(),
                })
            }
            Direction::Unchanged => stalled += 1,
            Direction::Bound(v) => {
                let slack = SAFETY * (1.0 + v.abs());
                if sign > 0.0 {
                    out.lower[j] = out.lower[j].max(v - slack);
                } else {
                    out.upper[j] = out.upper[j].min(-v + slack);
                }
            }
        }
    }
    for j in 0..n {
        if out.lower[j] > out.upper[j] {
            // Crossing within the safety slack means a (near) fixed variable.
            if out.lower[j] - out.upper[j] <= 1e-7 * (1.0 + out.lower[j].abs()) {
                let mid = 0.5 * (out.lower[j] + out.upper[j]);
                out.lower[j] = mid.clamp(bounds.lower[j], bounds.upper[j]);
                out.upper[j] = out.lower[j];
            } else {
                return Ok(ObbtReport {
                    outcome: Tightened::Infeasible,
                    stalled,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    let outcome = if round_integer_bounds(problem, &mut out) {
        Tightened::Box(out)
    } else {
        Tightened::Infeasible
    };
    Ok(ObbtReport {
        outcome,
        stalled,
        seconds: start.elapsed().as_secs_f64(),
    })
}
