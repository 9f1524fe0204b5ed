//! A small knapsack solved by LP-based branch and bound.

use polyrlt::lp::{LinearProgram, Relation};
use polyrlt::milp::{solve_milp, MilpBudget};

fn main() -> polyrlt::Result<()> {
    let values = [10.0, 13.0, 7.0, 8.0, 4.0];
    let weights = [5.0, 7.0, 4.0, 5.0, 3.0];
    let mut lp = LinearProgram::new(values.len());
    lp.objective = values.iter().map(|v| -v).collect();
    lp.col_upper = vec![1.0; values.len()];
    lp.add_row(weights.iter().map(|w| -w).collect(), Relation::Ge, -14.0);

    let all: Vec<usize> = (0..values.len()).collect();
    let r = solve_milp(&lp, &all, MilpBudget::default(), 1e-9)?;
    let root = r.root.as_ref().map(|lp| lp.objective).unwrap_or(f64::NAN);
    println!("{:?}: value {} (LP bound {:.3}), {} nodes", r.status, -r.objective, -root, r.nodes_used);
    let picked: Vec<usize> = all.iter().copied().filter(|&j| r.x[j] > 0.5).collect();
    println!("items {picked:?}");
    Ok(())
}
