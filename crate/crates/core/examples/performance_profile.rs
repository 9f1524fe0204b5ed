//! Runs two branching rules over a suite and prints their time profiles.

use polyrlt::driver::{BranchingRule, SolverConfig};
use polyrlt::harness::{oracle_suite, performance_profile, profile_csv, run_bench, NamedConfig, ProfileMetric};

fn main() -> polyrlt::Result<()> {
    let suite = oracle_suite(11, 12);
    let configs: Vec<NamedConfig> = [("dual", BranchingRule::Dual), ("sum", BranchingRule::Sum), ("range", BranchingRule::Range)]
        .into_iter()
        .map(|(name, rule)| NamedConfig {
            name: name.into(),
            config: SolverConfig {
                branching_rule: rule,
                ..SolverConfig::default()
            },
        })
        .collect();
    let records = run_bench(&suite, &configs, 4)?;
    let curves = performance_profile(&records, ProfileMetric::Time)?;
    for c in &curves {
        let at_one = c.points.iter().take_while(|p| p.0 <= 1.0).last().map_or(0.0, |p| p.1);
        println!("{:<6} fastest on {:.0}% of instances", c.config, 100.0 * at_one);
    }
    print!("{}", profile_csv(&curves));
    Ok(())
}
