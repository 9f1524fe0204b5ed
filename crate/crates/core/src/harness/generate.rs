//! Seeded generator of small mixed-integer polynomial instances whose optima
//! can be certified by exhaustive search (integer enumeration times a fine
//! grid over at most two continuous variables).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::{Bounds, Constraint, Monomial, Polynomial, Problem};
use crate::relax::multisets;

/// Grid spacing the certifying search uses on continuous variables.
pub const ORACLE_GRID_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug)]
pub struct GeneratorLimits {
    /// Upper bound on (integer assignments) × (continuous grid points).
    pub max_grid_points: f64,
    pub max_continuous: usize,
    pub max_integer: usize,
    pub max_int_range: i64,
}

impl Default for GeneratorLimits {
    fn default() -> Self {
        GeneratorLimits {
            max_grid_points: 2.5e6,
            max_continuous: 2,
            max_integer: 3,
            max_int_range: 5,
        }
    }
}

/// (continuous, integer) variable counts, cycled through by instance index.
const SHAPES: &[(usize, usize)] = &[(1, 1), (2, 1), (1, 2), (0, 3), (2, 2), (1, 3), (2, 0), (0, 2), (2, 3), (1, 0)];

/// Number of grid points the certifying search visits.
pub fn grid_size(p: &Problem) -> f64 {
    (0..p.num_vars())
        .map(|j| {
            let w = p.bounds.width(j);
            if p.integer[j] {
                w + 1.0
            } else {
                (w / ORACLE_GRID_STEP).round() + 1.0
            }
        })
        .product()
}

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let c = (rng.gen_range(-3.0f64..3.0) * 10.0).round() / 10.0;
        if c != 0.0 {
            return c;
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, pool: &[Monomial], top: &[Monomial], terms: usize) -> Polynomial {
    let mut p = Polynomial::zero();
    p.add_term(top.choose(rng).expect("nonempty").clone(), coefficient(rng));
    for _ in 1..terms {
        p.add_term(pool.choose(rng).expect("nonempty").clone(), coefficient(rng));
    }
    p
}

/// Instance `index` of the suite with the given seed.
pub fn oracle_instance(seed: u64, index: usize, limits: &GeneratorLimits) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (nc, ni) = SHAPES[index % SHAPES.len()];
    let (nc, ni) = (nc.min(limits.max_continuous), ni.min(limits.max_integer));
    let (nc, ni) = if nc + ni == 0 { (1, 0) } else { (nc, ni) };
    let n = nc + ni;
    let degree = match n {
        0..=3 => rng.gen_range(2..=4),
        4..=5 => rng.gen_range(2..=3),
        _ => 2,
    };

    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for _ in 0..nc {
        let l = rng.gen_range(-3i32..=1) as f64 * 0.5;
        let w = rng.gen_range(1i32..=4) as f64 * 0.5;
        lower.push(l);
        upper.push(l + w);
    }
    for _ in 0..ni {
        let l = rng.gen_range(-2i64..=1) as f64;
        let r = rng.gen_range(1..=limits.max_int_range) as f64;
        lower.push(l);
        upper.push(l + r);
    }
    let integer: Vec<bool> = (0..n).map(|j| j >= nc).collect();
    let size = |lo: &[f64], up: &[f64]| -> f64 {
        (0..n)
            .map(|j| {
                let w = up[j] - lo[j];
                if integer[j] {
                    w + 1.0
                } else {
                    (w / ORACLE_GRID_STEP).round() + 1.0
                }
            })
            .product()
    };
    // Shrink the widest integer range first, then continuous widths, until the grid fits.
    while size(&lower, &upper) > limits.max_grid_points {
        let widest_int = (nc..n).filter(|&j| upper[j] - lower[j] > 1.0).max_by(|&a, &b| {
            (upper[a] - lower[a]).total_cmp(&(upper[b] - lower[b])).then(b.cmp(&a))
        });
        if let Some(j) = widest_int {
            upper[j] -= 1.0;
            continue;
        }
        let widest_cont = (0..nc).filter(|&j| upper[j] - lower[j] > 0.5).max_by(|&a, &b| {
            (upper[a] - lower[a]).total_cmp(&(upper[b] - lower[b])).then(b.cmp(&a))
        });
        match widest_cont {
            Some(j) => upper[j] -= 0.5,
            None => break,
        }
    }

    let pool: Vec<Monomial> = (1..=degree)
        .flat_map(|k| multisets(n, k))
        .map(|v| Monomial::new(v).expect("nonempty"))
        .collect();
    let top: Vec<Monomial> = multisets(n, degree)
        .into_iter()
        .map(|v| Monomial::new(v).expect("nonempty"))
        .collect();

    let terms = rng.gen_range(5..=10);
    let objective = random_poly(&mut rng, &pool, &top, terms);

    // Constraints are valid at a random anchor point, so the instance is feasible.
    let anchor: Vec<f64> = (0..n)
        .map(|j| {
            if integer[j] {
                rng.gen_range(lower[j] as i64..=upper[j] as i64) as f64
            } else {
                (rng.gen_range(lower[j]..=upper[j]) * 100.0).round() / 100.0
            }
        })
        .collect();
    let m = rng.gen_range(1..=3);
    let mut ineqs = Vec::with_capacity(m);
    for i in 0..m {
        let terms = rng.gen_range(3..=6);
        let poly = random_poly(&mut rng, &pool, &top, terms);
        let at = poly.eval(&anchor);
        let slack = rng.gen_range(1i32..=10) as f64 * 0.1 * (1.0 + at.abs()) * 0.5;
        let rhs = ((at - slack) * 100.0).floor() / 100.0;
        ineqs.push(Constraint {
            name: format!("c{}", i + 1),
            poly,
            rhs,
        });
    }

    let bounds = Bounds::new(lower, upper).expect("generated bounds are ordered");
    let mut p = Problem::new(format!("gen{seed}_{index:03}"), bounds, integer, objective, ineqs, vec![])
        .expect("generated instance is valid");
    p.var_names = (0..n)
        .map(|j| if j < nc { format!("x{}", j + 1) } else { format!("y{}", j - nc + 1) })
        .collect();
    p
}

pub fn oracle_suite(seed: u64, count: usize) -> Vec<Problem> {
    let limits = GeneratorLimits::default();
    (0..count).map(|i| oracle_instance(seed, i, &limits)).collect()
}
