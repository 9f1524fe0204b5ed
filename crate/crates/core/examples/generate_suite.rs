//! Writes a reproducible suite of small instances to a directory.
//!
//!     cargo run --example generate_suite -- /tmp/suite 7 25

use polyrlt::harness::oracle_suite;
use polyrlt::io::serialize_problem;
use polyrlt::poly::problem_degree;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "suite".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2024);
    let count: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);

    std::fs::create_dir_all(&dir)?;
    for p in oracle_suite(seed, count) {
        let ints = p.integer.iter().filter(|&&i| i).count();
        println!(
            "{:<14} {} vars ({} integer), degree {}, {} constraints",
            p.name,
            p.num_vars(),
            ints,
            problem_degree(&p),
            p.ineqs.len() + p.eqs.len()
        );
        std::fs::write(format!("{dir}/{}.poly", p.name), serialize_problem(&p))?;
    }
    Ok(())
}
