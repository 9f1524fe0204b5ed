//! Sparse multivariate polynomials and the mixed-integer polynomial program.
//!
//! A [`Monomial`] is a multiset of variable indices kept sorted, so `x1^2 x2`
//! is stored as `[1, 1, 2]`. Ordering is lexicographic on that sequence,
//! which fixes the order in which terms are evaluated and linearized.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute feasibility tolerance used across the solver.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial(Vec<usize>);

impl Monomial {
    /// Builds a monomial from any multiset of indices; the order of `vars` is irrelevant.
    pub fn new(mut vars: Vec<usize>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::usage("a monomial needs at least one variable"));
        }
        vars.sort_unstable();
        Ok(Monomial(vars))
    }

    pub fn var(j: usize) -> Self {
        Monomial(vec![j])
    }

    /// Builds from `(variable, exponent)` pairs, skipping zero exponents.
    pub fn from_powers(powers: &[(usize, u32)]) -> Result<Self> {
        let mut vars = Vec::new();
        for &(j, e) in powers {
            vars.extend(std::iter::repeat(j).take(e as usize));
        }
        Monomial::new(vars)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> &[usize] {
        &self.0
    }

    /// Distinct variables with their exponents, in increasing variable order.
    pub fn powers(&self) -> Vec<(usize, u32)> {
        let mut out: Vec<(usize, u32)> = Vec::new();
        for &j in &self.0 {
            match out.last_mut() {
                Some((v, e)) if *v == j => *e += 1,
                _ => out.push((j, 1)),
            }
        }
        out
    }

    pub fn max_var(&self) -> usize {
        *self.0.last().expect("monomial is never empty")
    }

    /// Multiset union.
    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        Monomial(v)
    }

    /// Multiset union with a single variable.
    pub fn with_var(&self, j: usize) -> Monomial {
        let mut v = self.0.clone();
        let pos = v.partition_point(|&x| x <= j);
        v.insert(pos, j);
        Monomial(v)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0.iter().fold(1.0, |acc, &j| acc * point[j])
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .powers()
            .into_iter()
            .map(|(j, e)| if e == 1 { format!("x{j}") } else { format!("x{j}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Sparse polynomial: monomial → coefficient plus a constant. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
    constant: f64,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant_poly(c: f64) -> Self {
        Polynomial {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    /// Linear polynomial `Σ coeffs[j] x_j + constant`.
    pub fn linear(coeffs: &[(usize, f64)], constant: f64) -> Self {
        let mut p = Polynomial::constant_poly(constant);
        for &(j, c) in coeffs {
            p.add_term(Monomial::var(j), c);
        }
        p
    }

    /// Adds `coeff * mono`, merging with an existing equal monomial.
    pub fn add_term(&mut self, mono: Monomial, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let c = *o.get() + coeff;
                if c == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = c;
                }
            }
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn with_term(mut self, mono: Monomial, coeff: f64) -> Self {
        self.add_term(mono, coeff);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn coefficient(&self, mono: &Monomial) -> f64 {
        self.terms.get(mono).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::max_var).max()
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::constant_poly(self.constant * s);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        out.constant += other.constant;
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::constant_poly(self.constant * other.constant);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c * other.constant);
            for (m2, c2) in other.terms() {
                out.add_term(m.times(m2), c * c2);
            }
        }
        for (m2, c2) in other.terms() {
            out.add_term(m2.clone(), c2 * self.constant);
        }
        out
    }

    /// Checked evaluation; errors when `point` is shorter than a referenced variable.
    pub fn try_eval(&self, point: &[f64]) -> Result<f64> {
        if let Some(j) = self.max_var() {
            if j >= point.len() {
                return Err(Error::usage(format!(
                    "point has {} coordinates but the polynomial references x{j}",
                    point.len()
                )));
            }
        }
        Ok(self.eval(point))
    }

    /// Evaluates term by term in canonical order, then adds the constant.
    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in self.terms() {
            acc += c * m.eval(point);
        }
        acc + self.constant
    }

    /// Gradient with respect to the first `n` variables.
    pub fn gradient(&self, point: &[f64], n: usize) -> Vec<f64> {
        let mut g = vec![0.0; n];
        self.accumulate_gradient(point, 1.0, &mut g);
        g
    }

    /// `g += scale * ∇p(point)`.
    pub fn accumulate_gradient(&self, point: &[f64], scale: f64, g: &mut [f64]) {
        for (m, c) in self.terms() {
            let powers = m.powers();
            for (k, &(j, e)) in powers.iter().enumerate() {
                let mut d = c * scale * e as f64 * point[j].powi(e as i32 - 1);
                for (k2, &(j2, e2)) in powers.iter().enumerate() {
                    if k2 != k {
                        d *= point[j2].powi(e2 as i32);
                    }
                }
                g[j] += d;
            }
        }
    }
}

/// Sparse linear row `Σ coeffs + constant` over relaxation columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearRow {
    pub fn eval(&self, cols: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, c)| c * cols[j]).sum::<f64>() + self.constant
    }

    pub fn coefficient(&self, col: usize) -> f64 {
        self.coeffs
            .iter()
            .filter(|(j, _)| *j == col)
            .map(|(_, c)| *c)
            .sum()
    }
}

/// Monomial → relaxation column for every monomial of degree ≥ 2.
pub type RltIndex = HashMap<Monomial, usize>;

/// Replaces each degree-≥2 monomial by its RLT column; degree-1 monomials
/// map to the variable's own column. Coefficients are merged per column.
pub fn linearize(poly: &Polynomial, rlt_index: &RltIndex) -> Result<LinearRow> {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (m, c) in poly.terms() {
        let col = if m.degree() == 1 {
            m.vars()[0]
        } else {
            *rlt_index.get(m).ok_or_else(|| {
                Error::Internal(format!("monomial {m} has no RLT column in the relaxation"))
            })?
        };
        *acc.entry(col).or_insert(0.0) += c;
    }
    Ok(LinearRow {
        coeffs: acc.into_iter().filter(|&(_, c)| c != 0.0).collect(),
        constant: poly.constant(),
    })
}

/// Axis-aligned box, one interval per variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::usage("lower and upper bound vectors differ in length"));
        }
        for (j, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(Error::usage(format!("degenerate interval for x{j}: [{l}, {u}]")));
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        point.len() == self.len()
            && point
                .iter()
                .enumerate()
                .all(|(j, &x)| x >= self.lower[j] - tol && x <= self.upper[j] + tol)
    }

    /// True if `self` lies inside `other`, allowing `tol` per bound.
    pub fn is_subset_of(&self, other: &Bounds, tol: f64) -> bool {
        self.len() == other.len()
            && (0..self.len()).all(|j| {
                self.lower[j] >= other.lower[j] - tol && self.upper[j] <= other.upper[j] + tol
            })
    }

    pub fn clamp(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .enumerate()
            .map(|(j, &x)| x.clamp(self.lower[j], self.upper[j]))
            .collect()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| 0.5 * (self.lower[j] + self.upper[j]))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `poly ≥ rhs` or `poly = rhs`, depending on which list it lives in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub poly: Polynomial,
    pub rhs: f64,
}

/// Mixed-integer polynomial program in minimization form:
/// `min φ0(x)` s.t. `φr(x) ≥ βr`, `φr(x) = βr`, `x ∈ bounds`, some `x_j` integer.
///
/// A maximization objective is stored negated with `sense = Maximize`, so
/// callers report `sense_value(v)` to the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub var_names: Vec<String>,
    pub bounds: Bounds,
    pub integer: Vec<bool>,
    pub objective: Polynomial,
    pub sense: Sense,
    pub ineqs: Vec<Constraint>,
    pub eqs: Vec<Constraint>,
}

impl Problem {
    /// Validates and builds a problem; variable names default to `x0, x1, ...`.
    pub fn new(
        name: impl Into<String>,
        bounds: Bounds,
        integer: Vec<bool>,
        objective: Polynomial,
        ineqs: Vec<Constraint>,
        eqs: Vec<Constraint>,
    ) -> Result<Self> {
        let n = bounds.len();
        let problem = Problem {
            name: name.into(),
            var_names: (0..n).map(|j| format!("x{j}")).collect(),
            bounds,
            integer,
            objective,
            sense: Sense::Minimize,
            ineqs,
            eqs,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::usage("problem has no variables"));
        }
        if self.integer.len() != n || self.var_names.len() != n {
            return Err(Error::usage("per-variable vectors disagree in length"));
        }
        for j in 0..n {
            let (l, u) = (self.bounds.lower[j], self.bounds.upper[j]);
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::usage(format!("variable {} has a non-finite bound", self.var_names[j])));
            }
            if l > u {
                return Err(Error::usage(format!("variable {} has lower > upper", self.var_names[j])));
            }
        }
        for p in self.polynomials() {
            if let Some(j) = p.max_var() {
                if j >= n {
                    return Err(Error::usage(format!("polynomial references undeclared variable x{j}")));
                }
            }
            if p.terms().any(|(_, c)| !c.is_finite()) || !p.constant().is_finite() {
                return Err(Error::usage("non-finite coefficient"));
            }
        }
        for c in self.ineqs.iter().chain(&self.eqs) {
            if !c.rhs.is_finite() {
                return Err(Error::usage(format!("constraint {} has a non-finite rhs", c.name)));
            }
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|&b| b)
    }

    pub fn integer_vars(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&j| self.integer[j]).collect()
    }

    /// Objective followed by inequality then equality constraint polynomials.
    pub fn polynomials(&self) -> impl Iterator<Item = &Polynomial> {
        std::iter::once(&self.objective)
            .chain(self.ineqs.iter().map(|c| &c.poly))
            .chain(self.eqs.iter().map(|c| &c.poly))
    }

    /// Objective value in the user's sense (un-negates maximization).
    pub fn sense_value(&self, internal: f64) -> f64 {
        match self.sense {
            Sense::Minimize => internal,
            Sense::Maximize => -internal,
        }
    }

    /// Largest violation of bounds and constraints at `point` (integrality excluded).
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for j in 0..self.num_vars() {
            v = v
                .max(self.bounds.lower[j] - point[j])
                .max(point[j] - self.bounds.upper[j]);
        }
        for c in &self.ineqs {
            v = v.max(c.rhs - c.poly.eval(point));
        }
        for c in &self.eqs {
            v = v.max((c.poly.eval(point) - c.rhs).abs());
        }
        v
    }
}

/// Degree of the problem: largest degree among objective and constraints, at least 1.
pub fn problem_degree(problem: &Problem) -> usize {
    problem.polynomials().map(Polynomial::degree).max().unwrap_or(0).max(1)
}

/// Bounds, constraints and integrality all hold within `tol`.
pub fn check_feasible(problem: &Problem, point: &[f64], tol: f64) -> bool {
    if point.len() != problem.num_vars() || point.iter().any(|x| !x.is_finite()) {
        return false;
    }
    if !problem.bounds.contains(point, tol) {
        return false;
    }
    for (j, &x) in point.iter().enumerate() {
        if problem.integer[j] && (x - x.round()).abs() > tol {
            return false;
        }
    }
    problem.ineqs.iter().all(|c| c.poly.eval(point) >= c.rhs - tol)
        && problem
            .eqs
            .iter()
            .all(|c| (c.poly.eval(point) - c.rhs).abs() <= tol)
}
