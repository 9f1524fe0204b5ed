//! Dense bounded-variable primal simplex.
//!
//! Every row `a·x (≥|=) b` gets a logical column `s` with `a·x − s = b`,
//! `s ∈ [0, ∞)` for `≥` rows and `s ∈ [0, 0]` for `=` rows. Rows whose slack
//! cannot start feasible get an artificial column; phase 1 drives the
//! artificials to zero and phase 2 optimizes the real objective from there.
//! The whole `B⁻¹A` tableau is kept in memory and refactored from the
//! original matrix every few hundred pivots and at the end of each phase.

use std::time::Instant;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min c·x + c0` over `rows`, `col_lower ≤ x ≤ col_upper` (bounds may be infinite).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub rows: Vec<LpRow>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_cols: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_cols],
            objective_constant: 0.0,
            rows: Vec::new(),
            col_lower: vec![0.0; num_cols],
            col_upper: vec![f64::INFINITY; num_cols],
        }
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(LpRow {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_cols();
        if self.col_lower.len() != n || self.col_upper.len() != n {
            return Err(Error::usage("column bound vectors do not match the column count"));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.coeffs.len() != n {
                return Err(Error::usage(format!("row {i} has {} coefficients, expected {n}", r.coeffs.len())));
            }
            if r.coeffs.iter().any(|c| !c.is_finite()) || !r.rhs.is_finite() {
                return Err(Error::usage(format!("row {i} has a non-finite entry")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) || !self.objective_constant.is_finite() {
            return Err(Error::usage("objective has a non-finite entry"));
        }
        if self.col_lower.iter().chain(&self.col_upper).any(|b| b.is_nan()) {
            return Err(Error::usage("NaN column bound"));
        }
        Ok(())
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_constant
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (i, r) in self.rows.iter().enumerate() {
            let act = self.row_activity(i, x);
            v = match r.relation {
                Relation::Ge => v.max(r.rhs - act),
                Relation::Eq => v.max((act - r.rhs).abs()),
            };
        }
        for j in 0..self.num_cols() {
            v = v.max(self.col_lower[j] - x[j]).max(x[j] - self.col_upper[j]);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit, deadline, or numerical trouble. Never a bound.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row; `≥` rows have nonnegative duals at optimality.
    pub duals: Vec<f64>,
    /// `c − Aᵀy` per structural column.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpResult {
    fn empty(status: LpStatus, lp: &LinearProgram, iterations: usize) -> Self {
        LpResult {
            status,
            x: Vec::new(),
            objective: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            duals: vec![0.0; lp.rows.len()],
            reduced_costs: Vec::new(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Lagrangian dual value `b·y + Σ_j min_{x_j ∈ [l_j,u_j]} d_j x_j + c0`.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut v = lp.objective_constant;
        for (r, y) in lp.rows.iter().zip(&self.duals) {
            v += r.rhs * y;
        }
        for (j, &d) in self.reduced_costs.iter().enumerate() {
            let b = if d >= 0.0 { lp.col_lower[j] } else { lp.col_upper[j] };
            // An infinite bound can only pair with a reduced cost that is numerically zero.
            let b = if b.is_finite() { b } else { self.x[j] };
            if d != 0.0 {
                v += d * b;
            }
        }
        v
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LpOptions {
    pub iteration_limit: usize,
    pub deadline: Option<Instant>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            iteration_limit: 50_000,
            deadline: None,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram, iteration_limit: usize) -> Result<LpResult> {
    solve_lp_with(
        lp,
        &LpOptions {
            iteration_limit,
            deadline: None,
        },
    )
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &LpOptions) -> Result<LpResult> {
    lp.validate()?;
    let n = lp.num_cols();
    for j in 0..n {
        if lp.col_lower[j] > lp.col_upper[j] {
            return Ok(LpResult::empty(LpStatus::Infeasible, lp, 0));
        }
    }
    let mut s = Simplex::new(lp);
    Ok(s.run(lp, opts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free column sitting at zero.
    Zero,
}

struct Simplex {
    m: usize,
    n: usize,
    ncols: usize,
    /// Original scaled constraint matrix including logical/artificial columns.
    a: Vec<f64>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    t: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    first_artificial: usize,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Progress,
}

impl Simplex {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.num_cols();

        let row_scale: Vec<f64> = lp
            .rows
            .iter()
            .map(|r| {
                let mx = r.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
                if mx > 0.0 {
                    1.0 / mx
                } else {
                    1.0
                }
            })
            .collect();

        let mut lo = lp.col_lower.clone();
        let mut hi = lp.col_upper.clone();
        let mut state: Vec<State> = (0..n)
            .map(|j| {
                if lo[j].is_finite() {
                    State::Lower
                } else if hi[j].is_finite() {
                    State::Upper
                } else {
                    State::Zero
                }
            })
            .collect();
        let nb_value = |j: usize, st: State| match st {
            State::Lower => lp.col_lower[j],
            State::Upper => lp.col_upper[j],
            _ => 0.0,
        };
        let x0: Vec<f64> = (0..n).map(|j| nb_value(j, state[j])).collect();

        // Decide which rows need an artificial.
        let mut needs_art = Vec::with_capacity(m);
        let mut residual = Vec::with_capacity(m);
        for (i, r) in lp.rows.iter().enumerate() {
            let act: f64 = r.coeffs.iter().zip(&x0).map(|(a, v)| a * v).sum::<f64>() * row_scale[i];
            let rhs = r.rhs * row_scale[i];
            residual.push(rhs - act);
            needs_art.push(match r.relation {
                Relation::Ge => act < rhs,
                Relation::Eq => true,
            });
        }
        let num_art = needs_art.iter().filter(|&&x| x).count();
        let first_artificial = n + m;
        let ncols = n + m + num_art;

        let mut a = vec![0.0; m * ncols];
        let mut b = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut xb = vec![0.0; m];
        let mut art = first_artificial;
        for (i, r) in lp.rows.iter().enumerate() {
            let row = &mut a[i * ncols..(i + 1) * ncols];
            for (j, &c) in r.coeffs.iter().enumerate() {
                row[j] = c * row_scale[i];
            }
            row[n + i] = -1.0;
            b[i] = r.rhs * row_scale[i];
            if needs_art[i] {
                let sigma = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                row[art] = sigma;
                basis[i] = art;
                xb[i] = residual[i].abs();
                art += 1;
            } else {
                basis[i] = n + i;
                xb[i] = -residual[i];
            }
        }
        for (i, r) in lp.rows.iter().enumerate() {
            lo.push(0.0);
            hi.push(match r.relation {
                Relation::Ge => f64::INFINITY,
                Relation::Eq => 0.0,
            });
            state.push(if basis[i] == n + i { State::Basic } else { State::Lower });
        }
        for _ in 0..num_art {
            lo.push(0.0);
            hi.push(f64::INFINITY);
            state.push(State::Basic);
        }

        // Initial basis is diagonal with entries −1 or ±1.
        let mut t = a.clone();
        for i in 0..m {
            let piv = t[i * ncols + basis[i]];
            if piv != 1.0 {
                for v in &mut t[i * ncols..(i + 1) * ncols] {
                    *v /= piv;
                }
            }
        }

        Simplex {
            m,
            n,
            ncols,
            a,
            b,
            row_scale,
            t,
            xb,
            basis,
            state,
            lo,
            hi,
            cost: vec![0.0; ncols],
            d: vec![0.0; ncols],
            first_artificial,
            iterations: 0,
            degenerate_run: 0,
            bland: false,
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Lower => self.lo[j],
            State::Upper => self.hi[j],
            State::Zero => 0.0,
            State::Basic => {
                let r = self.basis.iter().position(|&c| c == j).expect("basic column in basis");
                self.xb[r]
            }
        }
    }

    fn column_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.ncols)
            .map(|j| match self.state[j] {
                State::Lower => self.lo[j],
                State::Upper => self.hi[j],
                _ => 0.0,
            })
            .collect();
        for (r, &c) in self.basis.iter().enumerate() {
            v[c] = self.xb[r];
        }
        v
    }

    fn recompute_reduced_costs(&mut self) {
        let nc = self.ncols;
        let mut d = self.cost.clone();
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * nc..(r + 1) * nc];
                for (dj, &tv) in d.iter_mut().zip(row) {
                    *dj -= cb * tv;
                }
            }
        }
        for &c in &self.basis {
            d[c] = 0.0;
        }
        self.d = d;
    }

    /// Rebuilds `B⁻¹A` and the basic values from the original matrix.
    /// Returns false when the basis turned out singular and had to be repaired.
    fn refactor(&mut self) -> bool {
        let (m, nc) = (self.m, self.ncols);
        let mut t = self.a.clone();
        let mut rhs = self.b.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        let mut repaired = false;
        let old_basis = self.basis.clone();
        let mut dropped = Vec::new();

        for &col in &old_basis {
            let mut best = None;
            let mut best_abs = 1e-11;
            for r in 0..m {
                if !assigned[r] {
                    let v = t[r * nc + col].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = Some(r);
                    }
                }
            }
            match best {
                Some(r) => {
                    gauss_jordan(&mut t, &mut rhs, m, nc, r, col);
                    assigned[r] = true;
                    new_basis[r] = col;
                }
                None => dropped.push(col),
            }
        }
        if !dropped.is_empty() {
            repaired = true;
            for col in dropped {
                self.state[col] = if self.lo[col].is_finite() {
                    State::Lower
                } else if self.hi[col].is_finite() {
                    State::Upper
                } else {
                    State::Zero
                };
            }
            for r in 0..m {
                if assigned[r] {
                    continue;
                }
                let mut best = None;
                let mut best_abs = 1e-11;
                for j in 0..nc {
                    if self.state[j] != State::Basic && t[r * nc + j].abs() > best_abs {
                        best_abs = t[r * nc + j].abs();
                        best = Some(j);
                    }
                }
                let j = best.expect("logical columns keep the row space full rank");
                gauss_jordan(&mut t, &mut rhs, m, nc, r, j);
                assigned[r] = true;
                new_basis[r] = j;
                self.state[j] = State::Basic;
            }
        }

        let mut xb = rhs;
        for j in 0..nc {
            let v = match self.state[j] {
                State::Basic => continue,
                State::Lower => self.lo[j],
                State::Upper => self.hi[j],
                State::Zero => 0.0,
            };
            if v != 0.0 {
                for r in 0..m {
                    xb[r] -= t[r * nc + j] * v;
                }
            }
        }
        self.t = t;
        self.xb = xb;
        self.basis = new_basis;
        self.recompute_reduced_costs();
        !repaired
    }

    fn primal_infeasibility(&self) -> f64 {
        let mut v: f64 = 0.0;
        for (r, &c) in self.basis.iter().enumerate() {
            v = v.max(self.lo[c] - self.xb[r]).max(self.xb[r] - self.hi[c]);
        }
        v
    }

    fn choose_entering(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let dj = self.d[j];
            let dir = match self.state[j] {
                State::Basic => continue,
                State::Lower if dj < -OPT_TOL && self.hi[j] > self.lo[j] => 1.0,
                State::Upper if dj > OPT_TOL && self.hi[j] > self.lo[j] => -1.0,
                State::Zero if dj.abs() > OPT_TOL => -dj.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn iterate(&mut self) -> StepOutcome {
        let Some((q, dir)) = self.choose_entering() else {
            return StepOutcome::Optimal;
        };
        let nc = self.ncols;

        // Harris-style two pass ratio test; Bland mode uses the exact minimum ratio.
        let tol = if self.bland { 0.0 } else { FEAS_TOL };
        let mut t_max = f64::INFINITY;
        for r in 0..self.m {
            let alpha = self.t[r * nc + q] * dir;
            let c = self.basis[r];
            if alpha > PIVOT_TOL && self.lo[c].is_finite() {
                t_max = t_max.min((self.xb[r] - self.lo[c] + tol) / alpha);
            } else if alpha < -PIVOT_TOL && self.hi[c].is_finite() {
                t_max = t_max.min((self.hi[c] - self.xb[r] + tol) / -alpha);
            }
        }
        let flip = self.hi[q] - self.lo[q];
        let mut leave: Option<usize> = None;
        let mut step = f64::INFINITY;
        if t_max.is_finite() {
            let mut best_alpha = 0.0;
            for r in 0..self.m {
                let alpha = self.t[r * nc + q] * dir;
                let c = self.basis[r];
                let ratio = if alpha > PIVOT_TOL && self.lo[c].is_finite() {
                    (self.xb[r] - self.lo[c]) / alpha
                } else if alpha < -PIVOT_TOL && self.hi[c].is_finite() {
                    (self.hi[c] - self.xb[r]) / -alpha
                } else {
                    continue;
                };
                if ratio <= t_max {
                    let better = if self.bland {
                        ratio < step || (ratio == step && leave.is_some_and(|l| c < self.basis[l]))
                    } else {
                        alpha.abs() > best_alpha
                    };
                    if better {
                        best_alpha = alpha.abs();
                        step = ratio;
                        leave = Some(r);
                    }
                }
            }
            step = step.max(0.0);
        }
        if flip.is_finite() && flip <= step {
            // Bound flip, basis unchanged.
            for r in 0..self.m {
                let alpha = self.t[r * nc + q] * dir;
                if alpha != 0.0 {
                    self.xb[r] -= alpha * flip;
                }
            }
            self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
            self.degenerate_run = 0;
            return StepOutcome::Progress;
        }
        let Some(r) = leave else {
            return StepOutcome::Unbounded;
        };

        let entering_value = match self.state[q] {
            State::Lower => self.lo[q],
            State::Upper => self.hi[q],
            _ => 0.0,
        } + dir * step;
        for i in 0..self.m {
            let alpha = self.t[i * nc + q] * dir;
            if alpha != 0.0 {
                self.xb[i] -= alpha * step;
            }
        }
        let leaving = self.basis[r];
        let alpha_r = self.t[r * nc + q] * dir;
        self.state[leaving] = if alpha_r > 0.0 { State::Lower } else { State::Upper };
        if !self.lo[leaving].is_finite() && !self.hi[leaving].is_finite() {
            self.state[leaving] = State::Zero;
        }
        self.basis[r] = q;
        self.state[q] = State::Basic;
        self.xb[r] = entering_value;
        self.pivot(r, q);

        if step <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > 3 * (self.m + self.n) {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
        StepOutcome::Progress
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q];
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for chunk in before.chunks_mut(nc).chain(after.chunks_mut(nc)) {
            let f = chunk[q];
            if f != 0.0 {
                for (v, &p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                chunk[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, &p) in self.d.iter_mut().zip(prow.iter()) {
                *v -= f * p;
            }
            self.d[q] = 0.0;
        }
    }

    /// Runs simplex iterations until optimal for the current cost vector.
    fn optimize(&mut self, opts: &LpOptions) -> std::result::Result<bool, LpStatus> {
        let refactor_every = 2 * self.m + 100;
        let mut since_refactor = 0;
        let mut rounds = 0;
        loop {
            if self.iterations >= opts.iteration_limit {
                return Err(LpStatus::Stalled);
            }
            if let Some(dl) = opts.deadline {
                if self.iterations % 16 == 0 && Instant::now() >= dl {
                    return Err(LpStatus::Stalled);
                }
            }
            match self.iterate() {
                StepOutcome::Progress => {
                    self.iterations += 1;
                    since_refactor += 1;
                    if since_refactor >= refactor_every {
                        self.refactor();
                        since_refactor = 0;
                    }
                }
                StepOutcome::Unbounded => return Ok(false),
                StepOutcome::Optimal => {
                    // Confirm on a fresh factorization before declaring optimality.
                    self.refactor();
                    since_refactor = 0;
                    rounds += 1;
                    if self.choose_entering().is_none() || rounds > 5 {
                        return Ok(true);
                    }
                }
            }
        }
    }

    fn run(&mut self, lp: &LinearProgram, opts: &LpOptions) -> LpResult {
        let (m, n) = (self.m, self.n);
        if self.ncols > self.first_artificial {
            for j in self.first_artificial..self.ncols {
                self.cost[j] = 1.0;
            }
            self.recompute_reduced_costs();
            match self.optimize(opts) {
                Err(st) => return LpResult::empty(st, lp, self.iterations),
                Ok(false) => return LpResult::empty(LpStatus::Stalled, lp, self.iterations),
                Ok(true) => {}
            }
            let infeas: f64 = (self.first_artificial..self.ncols).map(|j| self.value(j)).sum();
            let scale = 1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if infeas > 1e-9 * scale {
                return LpResult::empty(LpStatus::Infeasible, lp, self.iterations);
            }
            for j in self.first_artificial..self.ncols {
                self.hi[j] = 0.0;
                self.cost[j] = 0.0;
                if self.state[j] != State::Basic {
                    self.state[j] = State::Lower;
                }
            }
            self.refactor();
        }
        self.bland = false;
        self.degenerate_run = 0;
        for j in 0..n {
            self.cost[j] = lp.objective[j];
        }
        self.recompute_reduced_costs();
        match self.optimize(opts) {
            Err(st) => return LpResult::empty(st, lp, self.iterations),
            Ok(false) => return LpResult::empty(LpStatus::Unbounded, lp, self.iterations),
            Ok(true) => {}
        }
        if self.primal_infeasibility() > 1e-7 {
            return LpResult::empty(LpStatus::Stalled, lp, self.iterations);
        }

        let vals = self.column_values();
        let x: Vec<f64> = (0..n)
            .map(|j| vals[j].clamp(lp.col_lower[j], lp.col_upper[j]))
            .collect();
        let duals: Vec<f64> = (0..m).map(|i| self.d[n + i] * self.row_scale[i]).collect();
        let reduced_costs: Vec<f64> = (0..n)
            .map(|j| {
                let ay: f64 = lp.rows.iter().zip(&duals).map(|(r, y)| r.coeffs[j] * y).sum();
                lp.objective[j] - ay
            })
            .collect();
        LpResult {
            status: LpStatus::Optimal,
            objective: lp.objective_value(&x),
            x,
            duals,
            reduced_costs,
            iterations: self.iterations,
        }
    }
}

fn gauss_jordan(t: &mut [f64], rhs: &mut [f64], m: usize, nc: usize, r: usize, col: usize) {
    let piv = t[r * nc + col];
    for v in &mut t[r * nc..(r + 1) * nc] {
        *v /= piv;
    }
    rhs[r] /= piv;
    t[r * nc + col] = 1.0;
    let prow: Vec<f64> = t[r * nc..(r + 1) * nc].to_vec();
    let prhs = rhs[r];
    for i in 0..m {
        if i == r {
            continue;
        }
        let f = t[i * nc + col];
        if f != 0.0 {
            for (v, &p) in t[i * nc..(i + 1) * nc].iter_mut().zip(&prow) {
                *v -= f * p;
            }
            t[i * nc + col] = 0.0;
            rhs[i] -= f * prhs;
        }
    }
}
