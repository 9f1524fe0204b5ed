//! Solves a polynomial instance to global optimality and prints the bound
//! trajectory. Pass a file path, or run without arguments for a bundled one.
//!
//!     cargo run --example solve_instance -- instances/quartic_box.poly

use polyrlt::driver::{solve, SolverConfig};
use polyrlt::io::{parse_instance, read_instance};

const DEFAULT: &str = include_str!("../instances/cubic_integer.poly");

fn main() -> polyrlt::Result<()> {
    let problem = match std::env::args().nth(1) {
        Some(path) => read_instance(path.as_ref())?,
        None => parse_instance(DEFAULT, "cubic_integer")?,
    };
    let report = solve(&problem, &SolverConfig::default())?;

    println!("{}: {:?} after {} nodes", report.instance, report.status, report.nodes);
    println!("objective {:.6}, bound {:.6}, gap {:.2e}", report.objective, report.bound, report.rel_gap);
    if let Some(inc) = &report.incumbent {
        for (name, v) in problem.var_names.iter().zip(&inc.point) {
            println!("  {name} = {v:.6}");
        }
    }
    println!("lower bound history:");
    for p in &report.lb_history {
        println!("  node {:>4}  lb {:.6}", p.node, p.lb);
    }
    Ok(())
}
