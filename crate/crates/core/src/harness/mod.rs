//! Benchmark harness: run records, comparison tables, performance profiles,
//! the seeded instance generator and a parallel bench runner.

pub mod bench;
pub mod generate;
pub mod records;
pub mod summary;

pub use bench::{compare_integer_modes, integer_mode_configs, load_configs, load_instances, run_bench, NamedConfig};
pub use generate::{oracle_instance, oracle_suite, GeneratorLimits};
pub use records::{read_records, write_records, RunRecord};
pub use summary::{performance_profile, profile_csv, summarize, ProfileCurve, ProfileMetric, Summary};
