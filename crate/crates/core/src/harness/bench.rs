use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{solve, IntegerMode, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::io::read_instance;
use crate::poly::Problem;

use super::records::RunRecord;
use super::summary::{summarize, Summary};

/// Instance file extension picked up by [`load_instances`].
pub const INSTANCE_EXTENSION: &str = "poly";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedConfig {
    pub name: String,
    #[serde(default)]
    pub config: SolverConfig,
}

/// Reads a JSON array of `{"name": ..., "config": {...}}` objects; omitted
/// config fields take their defaults.
pub fn load_configs(path: &Path) -> Result<Vec<NamedConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let configs: Vec<NamedConfig> =
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    if configs.is_empty() {
        return Err(Error::Usage(format!("{}: no configurations", path.display())));
    }
    for c in &configs {
        c.config.validate()?;
    }
    Ok(configs)
}

/// All `*.poly` files of a directory, sorted by file name.
pub fn load_instances(dir: &Path) -> Result<Vec<Problem>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == INSTANCE_EXTENSION))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Usage(format!("no .{INSTANCE_EXTENSION} files in {}", dir.display())));
    }
    paths.iter().map(|p| read_instance(p)).collect()
}

/// Solves every (instance, config) pair on a pool of `workers` threads.
/// Records come back in instance-major order regardless of scheduling.
pub fn run_bench(instances: &[Problem], configs: &[NamedConfig], workers: usize) -> Result<Vec<RunRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let tasks: Vec<(&Problem, &NamedConfig)> = instances
        .iter()
        .flat_map(|p| configs.iter().map(move |c| (p, c)))
        .collect();
    let records = pool.install(|| {
        tasks
            .par_iter()
            .map(|(p, c)| match solve(p, &c.config) {
                Ok(report) => RunRecord::from_report(&c.name, &report),
                Err(e) => {
                    log::warn!("{} / {}: {e}", p.name, c.name);
                    RunRecord {
                        instance: p.name.clone(),
                        config: c.name.clone(),
                        status: SolveStatus::Numerical,
                        lb: f64::NEG_INFINITY,
                        ub: f64::INFINITY,
                        rel_gap: f64::INFINITY,
                        wall_time: 0.0,
                        nodes: 0,
                    }
                }
            })
            .collect()
    });
    Ok(records)
}

/// The four integer-handling modes compared against each other.
pub fn integer_mode_configs(base: &SolverConfig) -> Vec<NamedConfig> {
    [
        ("milp_at_depth(1)", IntegerMode::MilpAtDepth(1)),
        ("milp_at_depth(5)", IntegerMode::MilpAtDepth(5)),
        ("rlt_first", IntegerMode::RltFirst),
        ("integrality_first", IntegerMode::IntegralityFirst),
    ]
    .into_iter()
    .map(|(name, mode)| NamedConfig {
        name: name.to_string(),
        config: SolverConfig {
            integer_mode: mode,
            ..base.clone()
        },
    })
    .collect()
}

/// Runs all integer modes over `instances` and tabulates the comparison.
pub fn compare_integer_modes(instances: &[Problem], base: &SolverConfig, workers: usize) -> Result<(Vec<RunRecord>, Summary)> {
    let records = run_bench(instances, &integer_mode_configs(base), workers)?;
    let summary = summarize(&records)?;
    Ok((records, summary))
}
