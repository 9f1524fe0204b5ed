//! RLT linear relaxation of a problem over a box.
//!
//! Columns are the original variables followed by one column per monomial
//! of degree 2..=δ over all variables. Rows are the linearized constraints
//! followed by every bound-factor product of degree δ, i.e. one row per
//! multiset of δ factors drawn from `{x_j − l_j, u_j − x_j}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lp::{self, LinearProgram, LpOptions, LpResult, LpStatus, Relation};
use crate::poly::{linearize, problem_degree, Bounds, LinearRow, Monomial, Polynomial, Problem, RltIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationKind {
    Continuous,
    Milp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOrigin {
    Inequality(usize),
    Equality(usize),
    BoundFactor,
}

#[derive(Clone, Debug)]
pub struct RelaxRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub origin: RowOrigin,
}

#[derive(Clone, Debug)]
pub struct Relaxation {
    pub num_vars: usize,
    pub kind: RelaxationKind,
    /// Monomial carried by each column; column `j < num_vars` is `x_j`.
    pub columns: Vec<Monomial>,
    pub rlt_index: RltIndex,
    pub rows: Vec<RelaxRow>,
    pub objective: LinearRow,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    /// Per column; only original integer variables in MILP mode.
    pub integrality: Vec<bool>,
    pub bound_factor_rows: Range<usize>,
}

/// All multisets of size `k` over `0..n`, lexicographic.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    if k > 0 {
        rec(n, k, 0, &mut cur, &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Interval of `Π x_j` over the box, coordinate by coordinate.
pub fn monomial_range(m: &Monomial, bounds: &Bounds) -> Interval {
    m.powers().into_iter().fold(Interval::point(1.0), |acc, (j, e)| {
        acc * Interval::new(bounds.lower[j], bounds.upper[j]).powi(e)
    })
}

/// Expands `Π_{j∈J1}(x_j − l_j) · Π_{j∈J2}(u_j − x_j) ≥ 0` and linearizes it.
/// The returned row reads `coeffs · cols ≥ rhs`.
pub fn expand_bound_factor(
    lower_factors: &[usize],
    upper_factors: &[usize],
    bounds: &Bounds,
    rlt_index: &RltIndex,
) -> Result<(LinearRow, f64)> {
    let mut prod = Polynomial::constant_poly(1.0);
    for &j in lower_factors {
        prod = prod.mul(&Polynomial::linear(&[(j, 1.0)], -bounds.lower[j]));
    }
    for &j in upper_factors {
        prod = prod.mul(&Polynomial::linear(&[(j, -1.0)], bounds.upper[j]));
    }
    let row = linearize(&prod, rlt_index)?;
    let rhs = -row.constant;
    Ok((
        LinearRow {
            coeffs: row.coeffs,
            constant: 0.0,
        },
        rhs,
    ))
}

pub fn build_relaxation(problem: &Problem, bounds: &Bounds, kind: RelaxationKind) -> Result<Relaxation> {
    let n = problem.num_vars();
    if bounds.len() != n {
        return Err(Error::usage(format!(
            "box has {} coordinates, problem has {n} variables",
            bounds.len()
        )));
    }
    for j in 0..n {
        if !(bounds.lower[j] <= bounds.upper[j]) {
            return Err(Error::usage(format!(
                "degenerate box for x{j}: [{}, {}]",
                bounds.lower[j], bounds.upper[j]
            )));
        }
    }
    let delta = problem_degree(problem);

    let mut columns: Vec<Monomial> = (0..n).map(Monomial::var).collect();
    let mut rlt_index = RltIndex::new();
    for k in 2..=delta {
        for ms in multisets(n, k) {
            let m = Monomial::new(ms).expect("k >= 2");
            rlt_index.insert(m.clone(), columns.len());
            columns.push(m);
        }
    }

    let mut col_lower = Vec::with_capacity(columns.len());
    let mut col_upper = Vec::with_capacity(columns.len());
    for (c, m) in columns.iter().enumerate() {
        if c < n {
            col_lower.push(bounds.lower[c]);
            col_upper.push(bounds.upper[c]);
        } else {
            let r = monomial_range(m, bounds);
            col_lower.push(r.lo);
            col_upper.push(r.hi);
        }
    }

    let mut rows = Vec::new();
    for (i, c) in problem.ineqs.iter().enumerate() {
        let lr = linearize(&c.poly, &rlt_index)?;
        rows.push(RelaxRow {
            coeffs: lr.coeffs,
            relation: Relation::Ge,
            rhs: c.rhs - lr.constant,
            origin: RowOrigin::Inequality(i),
        });
    }
    for (i, c) in problem.eqs.iter().enumerate() {
        let lr = linearize(&c.poly, &rlt_index)?;
        rows.push(RelaxRow {
            coeffs: lr.coeffs,
            relation: Relation::Eq,
            rhs: c.rhs - lr.constant,
            origin: RowOrigin::Equality(i),
        });
    }

    let bf_start = rows.len();
    if delta >= 2 {
        // Factor 2j is (x_j − l_j), factor 2j+1 is (u_j − x_j).
        for combo in multisets(2 * n, delta) {
            let lower: Vec<usize> = combo.iter().filter(|f| *f % 2 == 0).map(|f| f / 2).collect();
            let upper: Vec<usize> = combo.iter().filter(|f| *f % 2 == 1).map(|f| f / 2).collect();
            let (row, rhs) = expand_bound_factor(&lower, &upper, bounds, &rlt_index)?;
            rows.push(RelaxRow {
                coeffs: row.coeffs,
                relation: Relation::Ge,
                rhs,
                origin: RowOrigin::BoundFactor,
            });
        }
    }
    let bf_end = rows.len();

    let objective = linearize(&problem.objective, &rlt_index)?;
    let mut integrality = vec![false; columns.len()];
    if kind == RelaxationKind::Milp {
        integrality[..n].copy_from_slice(&problem.integer);
    }

    Ok(Relaxation {
        num_vars: n,
        kind,
        columns,
        rlt_index,
        rows,
        objective,
        col_lower,
        col_upper,
        integrality,
        bound_factor_rows: bf_start..bf_end,
    })
}

impl Relaxation {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rlt_columns(&self) -> usize {
        self.columns.len() - self.num_vars
    }

    pub fn num_bound_factor_rows(&self) -> usize {
        self.bound_factor_rows.len()
    }

    pub fn integral_columns(&self) -> Vec<usize> {
        (0..self.num_columns()).filter(|&c| self.integrality[c]).collect()
    }

    /// Dense LP carrying the relaxation's rows, bounds and linearized objective.
    pub fn to_linear_program(&self) -> LinearProgram {
        let nc = self.num_columns();
        let mut lp = LinearProgram::new(nc);
        for &(c, v) in &self.objective.coeffs {
            lp.objective[c] = v;
        }
        lp.objective_constant = self.objective.constant;
        lp.col_lower = self.col_lower.clone();
        lp.col_upper = self.col_upper.clone();
        for r in &self.rows {
            let mut dense = vec![0.0; nc];
            for &(c, v) in &r.coeffs {
                dense[c] += v;
            }
            lp.add_row(dense, r.relation, r.rhs);
        }
        lp
    }

    /// Same LP with the objective replaced by `sign · x_col`.
    pub fn to_bounding_program(&self, col: usize, sign: f64) -> LinearProgram {
        let mut lp = self.to_linear_program();
        lp.objective.iter_mut().for_each(|c| *c = 0.0);
        lp.objective_constant = 0.0;
        lp.objective[col] = sign;
        lp
    }

    /// Wraps a solve of this relaxation's LP (or MILP) into column values.
    pub fn solution_from(&self, res: &LpResult, continuous: bool) -> LpSolution {
        let status = match res.status {
            LpStatus::Optimal => SolutionStatus::Optimal,
            LpStatus::Infeasible => SolutionStatus::Infeasible,
            LpStatus::Unbounded => SolutionStatus::Unbounded,
            LpStatus::Stalled => SolutionStatus::Stalled,
        };
        LpSolution {
            status,
            values: res.x.clone(),
            num_vars: self.num_vars,
            objective: res.objective,
            duals: if continuous && status == SolutionStatus::Optimal {
                Some(res.duals.clone())
            } else {
                None
            },
        }
    }

    /// Solves the continuous relaxation.
    pub fn solve_continuous(&self, opts: &LpOptions) -> Result<LpSolution> {
        let lp = self.to_linear_program();
        let res = lp::solve_lp_with(&lp, opts)?;
        Ok(self.solution_from(&res, true))
    }

    /// Debug dump in the usual LP text format (`x<j>` and `X_<i>_<j>_..` columns).
    pub fn to_lp_format(&self, name: &str) -> String {
        let col_name = |c: usize| -> String {
            if c < self.num_vars {
                format!("x{c}")
            } else {
                let idx: Vec<String> = self.columns[c].vars().iter().map(|v| v.to_string()).collect();
                format!("X_{}", idx.join("_"))
            }
        };
        let expr = |coeffs: &[(usize, f64)]| -> String {
            if coeffs.is_empty() {
                return "0 x0".to_string();
            }
            let mut s = String::new();
            for (k, &(c, v)) in coeffs.iter().enumerate() {
                if k == 0 {
                    let _ = write!(s, "{v} {}", col_name(c));
                } else if v < 0.0 {
                    let _ = write!(s, " - {} {}", -v, col_name(c));
                } else {
                    let _ = write!(s, " + {v} {}", col_name(c));
                }
            }
            s
        };
        let mut out = String::new();
        let _ = writeln!(out, "\\ {name}");
        let _ = writeln!(out, "\\ objective constant: {}", self.objective.constant);
        let _ = writeln!(out, "Minimize\n obj: {}", expr(&self.objective.coeffs));
        let _ = writeln!(out, "Subject To");
        for (i, r) in self.rows.iter().enumerate() {
            let op = match r.relation {
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let tag = if self.bound_factor_rows.contains(&i) { "bf" } else { "c" };
            let _ = writeln!(out, " {tag}{i}: {} {op} {}", expr(&r.coeffs), r.rhs);
        }
        let _ = writeln!(out, "Bounds");
        for c in 0..self.num_columns() {
            let _ = writeln!(out, " {} <= {} <= {}", self.col_lower[c], col_name(c), self.col_upper[c]);
        }
        let ints: Vec<String> = self.integral_columns().into_iter().map(col_name).collect();
        if !ints.is_empty() {
            let _ = writeln!(out, "General\n {}", ints.join(" "));
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolutionStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Stalled,
}

/// Optimal point of a node relaxation: original variables, then RLT columns.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: SolutionStatus,
    pub values: Vec<f64>,
    pub num_vars: usize,
    pub objective: f64,
    /// Row multipliers; present only for continuous solves.
    pub duals: Option<Vec<f64>>,
}

impl LpSolution {
    pub fn x(&self) -> &[f64] {
        &self.values[..self.num_vars]
    }

    pub fn rlt_values(&self) -> &[f64] {
        &self.values[self.num_vars..]
    }
}

/// `(j, J)` → `|X̄_{J∪{j}} − x̄_j X̄_J|` for every RLT column `J ∪ {j}`.
pub type ViolationTable = BTreeMap<(usize, Monomial), f64>;

pub fn rlt_violation_table(sol: &LpSolution, relax: &Relaxation) -> ViolationTable {
    let mut table = ViolationTable::new();
    let value = |m: &Monomial| -> f64 {
        if m.degree() == 1 {
            sol.values[m.vars()[0]]
        } else {
            sol.values[relax.rlt_index[m]]
        }
    };
    for (c, k) in relax.columns.iter().enumerate().skip(relax.num_vars) {
        for (j, _) in k.powers() {
            let mut rest = k.vars().to_vec();
            let pos = rest.iter().position(|&v| v == j).expect("j in monomial");
            rest.remove(pos);
            let rest = Monomial::new(rest).expect("degree >= 2 leaves a nonempty rest");
            let v = (sol.values[c] - sol.values[j] * value(&rest)).abs();
            table.insert((j, rest), v);
        }
    }
    table
}
