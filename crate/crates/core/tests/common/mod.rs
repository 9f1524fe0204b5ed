//! Independent reference machinery for integration tests: a brute-force
//! global optimizer (integer enumeration × 1e-3 grid × pattern-search
//! refinement), a feasible-point sampler, and a random MILP enumerator.
#![allow(dead_code)]

use polyrlt::poly::Problem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID_STEP: f64 = 1e-3;

/// Flattened polynomial: `constant + Σ coef · Π x_j^e`.
struct Flat {
    constant: f64,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl Flat {
    fn new(p: &polyrlt::poly::Polynomial) -> Self {
        Flat {
            constant: p.constant(),
            terms: p
                .terms()
                .map(|(m, c)| (c, m.powers().into_iter().map(|(j, e)| (j, e as i32)).collect()))
                .collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut s = self.constant;
        for (c, f) in &self.terms {
            let mut v = *c;
            for &(j, e) in f {
                v *= x[j].powi(e);
            }
            s += v;
        }
        s
    }
}

/// Compiled instance for fast repeated evaluation.
pub struct Model {
    n: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer: Vec<bool>,
    objective: Flat,
    ineqs: Vec<(Flat, f64)>,
    eqs: Vec<(Flat, f64)>,
}

impl Model {
    pub fn new(p: &Problem) -> Self {
        Model {
            n: p.num_vars(),
            lower: p.bounds.lower.clone(),
            upper: p.bounds.upper.clone(),
            integer: p.integer.clone(),
            objective: Flat::new(&p.objective),
            ineqs: p.ineqs.iter().map(|c| (Flat::new(&c.poly), c.rhs)).collect(),
            eqs: p.eqs.iter().map(|c| (Flat::new(&c.poly), c.rhs)).collect(),
        }
    }

    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        (0..self.n).all(|j| x[j] >= self.lower[j] - tol && x[j] <= self.upper[j] + tol)
            && self.ineqs.iter().all(|(g, b)| g.eval(x) >= b - tol)
            && self.eqs.iter().all(|(h, b)| (h.eval(x) - b).abs() <= tol)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }
}

/// All integer assignments of the integer variables (cartesian product).
fn integer_assignments(m: &Model) -> Vec<Vec<(usize, f64)>> {
    let ints: Vec<usize> = (0..m.n).filter(|&j| m.integer[j]).collect();
    let mut out = vec![Vec::new()];
    for &j in &ints {
        let (lo, hi) = (m.lower[j].ceil() as i64, m.upper[j].floor() as i64);
        out = out
            .into_iter()
            .flat_map(|a: Vec<(usize, f64)>| {
                (lo..=hi).map(move |v| {
                    let mut b = a.clone();
                    b.push((j, v as f64));
                    b
                })
            })
            .collect();
    }
    out
}

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    let k = ((hi - lo) / GRID_STEP).round() as usize;
    (0..=k).map(|i| if i == k { hi } else { lo + i as f64 * GRID_STEP }).collect()
}

/// Pattern search over the continuous coordinates, keeping feasibility.
fn refine(m: &Model, x: &mut [f64], cont: &[usize]) {
    if cont.is_empty() {
        return;
    }
    let dirs: Vec<Vec<f64>> = match cont.len() {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => (0..32)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 16.0;
                let mut d = vec![0.0; cont.len()];
                d[0] = a.cos();
                d[1] = a.sin();
                d
            })
            .collect(),
    };
    let mut fx = m.objective(x);
    let mut step = GRID_STEP;
    let mut trial = x.to_vec();
    while step > 1e-11 {
        let mut improved = false;
        for d in &dirs {
            trial.copy_from_slice(x);
            for (k, &j) in cont.iter().enumerate() {
                trial[j] = (x[j] + step * d[k]).clamp(m.lower[j], m.upper[j]);
            }
            if m.feasible(&trial, 0.0) {
                let ft = m.objective(&trial);
                if ft < fx {
                    fx = ft;
                    x.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
}

/// Certified global optimum (value, point) of a problem with at most two
/// continuous variables, or `None` if no grid point is feasible.
pub fn brute_force(p: &Problem) -> Option<(f64, Vec<f64>)> {
    let m = Model::new(p);
    let cont: Vec<usize> = (0..m.n).filter(|&j| !m.integer[j]).collect();
    assert!(cont.len() <= 2, "oracle supports at most two continuous variables");
    let grids: Vec<Vec<f64>> = cont.iter().map(|&j| grid(m.lower[j], m.upper[j])).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut x = vec![0.0; m.n];
    for assignment in integer_assignments(&m) {
        for &(j, v) in &assignment {
            x[j] = v;
        }
        let mut local: Option<(f64, Vec<f64>)> = None;
        let mut visit = |x: &[f64]| {
            if m.feasible(x, 0.0) {
                let f = m.objective(x);
                if local.as_ref().is_none_or(|(b, _)| f < *b) {
                    local = Some((f, x.to_vec()));
                }
            }
        };
        match cont.len() {
            0 => visit(&x),
            1 => {
                for &a in &grids[0] {
                    x[cont[0]] = a;
                    visit(&x);
                }
            }
            _ => {
                for &a in &grids[0] {
                    x[cont[0]] = a;
                    for &b in &grids[1] {
                        x[cont[1]] = b;
                        visit(&x);
                    }
                }
            }
        }
        if let Some((_, mut pt)) = local {
            refine(&m, &mut pt, &cont);
            let f = m.objective(&pt);
            if best.as_ref().is_none_or(|(b, _)| f < *b) {
                best = Some((f, pt));
            }
        }
    }
    best
}

/// Up to `count` points feasible for `p` (exactly, no tolerance): uniform
/// rejection sampling, topped up by random perturbations of accepted points.
pub fn sample_feasible(p: &Problem, count: usize, seed: u64, seeds: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = Model::new(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, j: usize| -> f64 {
        if m.integer[j] {
            rng.gen_range(m.lower[j] as i64..=m.upper[j] as i64) as f64
        } else {
            rng.gen_range(m.lower[j]..=m.upper[j])
        }
    };
    let mut pts: Vec<Vec<f64>> = seeds.iter().filter(|s| m.feasible(s, 0.0)).cloned().collect();
    for _ in 0..200_000 {
        if pts.len() >= count {
            break;
        }
        let x: Vec<f64> = (0..m.n).map(|j| draw(&mut rng, j)).collect();
        if m.feasible(&x, 0.0) {
            pts.push(x);
        }
    }
    let mut attempts = 0;
    while pts.len() < count && !pts.is_empty() && attempts < 1_000_000 {
        attempts += 1;
        let base = pts[rng.gen_range(0..pts.len())].clone();
        let x: Vec<f64> = (0..m.n)
            .map(|j| {
                if m.integer[j] {
                    (base[j] + rng.gen_range(-1i64..=1) as f64).clamp(m.lower[j], m.upper[j])
                } else {
                    let r = 0.05 * (m.upper[j] - m.lower[j]);
                    (base[j] + rng.gen_range(-r..=r)).clamp(m.lower[j], m.upper[j])
                }
            })
            .collect();
        if m.feasible(&x, 0.0) {
            pts.push(x);
        }
    }
    pts.truncate(count);
    pts
}

/// Random MILP `min c·x s.t. A x ≥ b, bounds`, with the first `ni` columns integral.
pub struct RandomMilp {
    pub lp: polyrlt::lp::LinearProgram,
    pub integral: Vec<usize>,
}

pub fn random_milp(rng: &mut ChaCha8Rng) -> RandomMilp {
    use polyrlt::lp::{LinearProgram, Relation};
    let ni = rng.gen_range(1..=3);
    let nc = rng.gen_range(0..=3);
    let n = ni + nc;
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        lp.objective[j] = (rng.gen_range(-5.0f64..5.0) * 4.0).round() / 4.0;
        if j < ni {
            let l = rng.gen_range(-2i64..=1) as f64;
            lp.col_lower[j] = l;
            lp.col_upper[j] = l + rng.gen_range(1..=5) as f64;
        } else {
            lp.col_lower[j] = rng.gen_range(-2.0f64..0.0);
            lp.col_upper[j] = lp.col_lower[j] + rng.gen_range(0.5f64..4.0);
        }
    }
    let rows = rng.gen_range(1..=4);
    for _ in 0..rows {
        let a: Vec<f64> = (0..n).map(|_| (rng.gen_range(-4.0f64..4.0) * 2.0).round() / 2.0).collect();
        // rhs at a random box point minus slack, so most instances are feasible.
        let pt: Vec<f64> = (0..n).map(|j| rng.gen_range(lp.col_lower[j]..=lp.col_upper[j])).collect();
        let act: f64 = a.iter().zip(&pt).map(|(x, y)| x * y).sum();
        let rel = if rng.gen_bool(0.2) { Relation::Eq } else { Relation::Ge };
        let rhs = if rel == Relation::Eq { act } else { act - rng.gen_range(0.0..2.0) };
        lp.add_row(a, rel, rhs);
    }
    RandomMilp {
        lp,
        integral: (0..ni).collect(),
    }
}

/// Optimum of a MILP by enumerating its integer columns and solving each LP.
pub fn enumerate_milp(m: &RandomMilp) -> Option<f64> {
    use polyrlt::lp::{solve_lp, LpStatus};
    let mut best: Option<f64> = None;
    let mut assign: Vec<Vec<f64>> = vec![Vec::new()];
    for &c in &m.integral {
        let (lo, hi) = (m.lp.col_lower[c] as i64, m.lp.col_upper[c] as i64);
        assign = assign
            .into_iter()
            .flat_map(|a| {
                (lo..=hi).map(move |v| {
                    let mut b = a.clone();
                    b.push(v as f64);
                    b
                })
            })
            .collect();
    }
    for a in assign {
        let mut lp = m.lp.clone();
        for (k, &c) in m.integral.iter().enumerate() {
            lp.col_lower[c] = a[k];
            lp.col_upper[c] = a[k];
        }
        let r = solve_lp(&lp, 100_000).expect("valid LP");
        match r.status {
            LpStatus::Optimal => best = Some(best.map_or(r.objective, |b: f64| b.min(r.objective))),
            LpStatus::Infeasible => {}
            s => panic!("enumeration LP ended with {s:?}"),
        }
    }
    best
}

/// Random LP that is feasible by construction: every row holds at a hidden
/// box point, and columns with an open upper bound have nonnegative cost.
pub fn random_feasible_lp(rng: &mut ChaCha8Rng) -> polyrlt::lp::LinearProgram {
    use polyrlt::lp::{LinearProgram, Relation};
    let n = rng.gen_range(1..8);
    let m = rng.gen_range(0..10);
    let mut lp = LinearProgram::new(n);
    let mut xstar = vec![0.0; n];
    for j in 0..n {
        let lo: f64 = rng.gen_range(-3.0..1.0);
        let open_top = rng.gen_bool(0.2);
        lp.col_lower[j] = lo;
        lp.col_upper[j] = if open_top { f64::INFINITY } else { lo + rng.gen_range(0.0..4.0) };
        xstar[j] = if open_top { lo + rng.gen_range(0.0..3.0) } else { rng.gen_range(lo..=lp.col_upper[j]) };
        lp.objective[j] = if open_top { rng.gen_range(0.0..2.0) } else { rng.gen_range(-2.0..2.0) };
    }
    for _ in 0..m {
        let a: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let act: f64 = a.iter().zip(&xstar).map(|(a, x)| a * x).sum();
        if rng.gen_bool(0.2) {
            lp.add_row(a, Relation::Eq, act);
        } else {
            let slack = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) };
            lp.add_row(a, Relation::Ge, act - slack);
        }
    }
    lp
}

/// Feasible LP plus a contradictory pair `a·x ≥ b`, `−a·x ≥ 1 − b`, whose sum
/// `0 ≥ 1` is a Farkas certificate of infeasibility.
pub fn infeasible_lp(rng: &mut ChaCha8Rng) -> polyrlt::lp::LinearProgram {
    use polyrlt::lp::Relation;
    let mut lp = random_feasible_lp(rng);
    let n = lp.num_cols();
    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = rng.gen_range(-2.0..2.0);
    lp.add_row(a.clone(), Relation::Ge, b);
    lp.add_row(a.iter().map(|v| -v).collect(), Relation::Ge, 1.0 - b);
    lp
}

/// Feasible LP with an extra column `t ≥ 0`, cost −1, entering every `≥` row
/// with a nonnegative coefficient and no equality row: `e_t` is an improving
/// ray, so the LP is unbounded.
pub fn unbounded_lp(rng: &mut ChaCha8Rng) -> polyrlt::lp::LinearProgram {
    use polyrlt::lp::Relation;
    let mut lp = random_feasible_lp(rng);
    lp.objective.push(-1.0);
    lp.col_lower.push(0.0);
    lp.col_upper.push(f64::INFINITY);
    for row in &mut lp.rows {
        let c = match row.relation {
            Relation::Ge => rng.gen_range(0.0..1.0),
            Relation::Eq => 0.0,
        };
        row.coeffs.push(c);
    }
    lp
}
