//! Solves a small LP with the bounded simplex and checks the dual certificate.

use polyrlt::lp::{solve_lp, LinearProgram, LpStatus, Relation};

fn main() -> polyrlt::Result<()> {
    // min -3x - 2y  s.t.  x + y <= 4,  x + 3y <= 6,  0 <= x <= 3,  y >= 0
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![-3.0, -2.0];
    lp.add_row(vec![-1.0, -1.0], Relation::Ge, -4.0);
    lp.add_row(vec![-1.0, -3.0], Relation::Ge, -6.0);
    lp.col_upper[0] = 3.0;

    let r = solve_lp(&lp, 1000)?;
    assert_eq!(r.status, LpStatus::Optimal);
    println!("x = {:?}, objective {}", r.x, r.objective);
    println!("row duals {:?}, reduced costs {:?}", r.duals, r.reduced_costs);
    println!("dual objective {} after {} iterations", r.dual_objective(&lp), r.iterations);

    lp.add_row(vec![1.0, 1.0], Relation::Ge, 5.0);
    println!("with x + y >= 5: {:?}", solve_lp(&lp, 1000)?.status);
    Ok(())
}
