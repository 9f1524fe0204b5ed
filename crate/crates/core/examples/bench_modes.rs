//! Compares the integer-handling modes on a generated suite and prints the
//! summary table.

use polyrlt::driver::SolverConfig;
use polyrlt::harness::{compare_integer_modes, oracle_suite};

fn main() -> polyrlt::Result<()> {
    let suite = oracle_suite(7, 12);
    let base = SolverConfig {
        time_limit: 30.0,
        ..SolverConfig::default()
    };
    let (records, summary) = compare_integer_modes(&suite, &base, 4)?;
    for r in &records {
        println!("{:<14} {:<18} {:?} nodes {:>4} {:.3}s", r.instance, r.config, r.status, r.nodes, r.wall_time);
    }
    println!();
    print!("{}", summary.render());
    Ok(())
}
