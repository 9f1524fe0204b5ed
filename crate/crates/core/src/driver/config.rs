use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tighten::ObbtMode;

/// How integrality is handled inside the spatial tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegerMode {
    /// Continuous relaxations above depth `d`, mixed-integer relaxations at depth ≥ `d`.
    MilpAtDepth(usize),
    /// Branch on RLT-identity violations first, integrality second.
    RltFirst,
    /// Branch on the most fractional integer variable first, RLT violations second.
    IntegralityFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingRule {
    Sum,
    Range,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlpStrategy {
    Round,
    Fix,
    RoundFix,
    Off,
}

/// Reading of the stuck-detector window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StuckWindow {
    /// `⌈√(2N)⌉ + 1`
    SqrtTwoNPlusOne,
    /// `⌈√(2N + 1)⌉`
    SqrtOfTwoNPlusOne,
}

impl StuckWindow {
    pub fn size(self, num_vars: usize) -> usize {
        let two_n = 2.0 * num_vars as f64;
        match self {
            StuckWindow::SqrtTwoNPlusOne => two_n.sqrt().ceil() as usize + 1,
            StuckWindow::SqrtOfTwoNPlusOne => (two_n + 1.0).sqrt().ceil() as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rel_gap: f64,
    pub abs_gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Optional cap on driver nodes (relaxations solved).
    pub node_limit: Option<usize>,
    pub integer_mode: IntegerMode,
    pub branching_rule: BranchingRule,
    pub branch_convex_coeff: f64,
    /// Children keep at least this fraction of the parent width.
    pub min_width_frac: f64,
    pub obbt_mode: ObbtMode,
    /// Per-subproblem OBBT budget in continuous mode, seconds.
    pub obbt_lp_budget: f64,
    /// Per-subproblem OBBT budget in mixed-integer mode, seconds.
    pub obbt_milp_budget: f64,
    pub fbbt: bool,
    pub fbbt_max_passes: usize,
    pub nlp_strategy: NlpStrategy,
    pub nlp_call_base: f64,
    /// Budget of one local-search call, seconds.
    pub local_budget: f64,
    pub minlp_begin: bool,
    pub minlp_end: bool,
    pub minlp_end_reserve: f64,
    pub minlp_on_stuck: bool,
    pub stuck_rel_tol: f64,
    pub stuck_window: StuckWindow,
    /// Optional cap on the time given to each node MILP, seconds.
    pub milp_time_cap: Option<f64>,
    pub milp_node_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_gap: 1e-3,
            abs_gap: 1e-3,
            time_limit: 3600.0,
            node_limit: None,
            integer_mode: IntegerMode::MilpAtDepth(1),
            branching_rule: BranchingRule::Dual,
            branch_convex_coeff: 0.75,
            min_width_frac: 0.01,
            obbt_mode: ObbtMode::Lp,
            obbt_lp_budget: 5.0,
            obbt_milp_budget: 10.0,
            fbbt: true,
            fbbt_max_passes: 20,
            nlp_strategy: NlpStrategy::RoundFix,
            nlp_call_base: 1.5,
            local_budget: 10.0,
            minlp_begin: false,
            minlp_end: true,
            minlp_end_reserve: 0.05,
            minlp_on_stuck: true,
            stuck_rel_tol: 1e-3,
            stuck_window: StuckWindow::SqrtTwoNPlusOne,
            milp_time_cap: None,
            milp_node_limit: 100_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Usage(msg.to_string()));
        if !(self.rel_gap >= 0.0) || !(self.abs_gap >= 0.0) {
            return bad("gap thresholds must be nonnegative");
        }
        if !(self.time_limit > 0.0) {
            return bad("time limit must be positive");
        }
        if !(0.0..=1.0).contains(&self.branch_convex_coeff) {
            return bad("branch_convex_coeff must lie in [0, 1]");
        }
        if !(0.0..0.5).contains(&self.min_width_frac) {
            return bad("min_width_frac must lie in [0, 0.5)");
        }
        if !(self.minlp_end_reserve > 0.0 && self.minlp_end_reserve < 0.5) {
            return bad("minlp_end_reserve must lie in (0, 0.5)");
        }
        if !(self.nlp_call_base > 1.0) {
            return bad("nlp_call_base must exceed 1");
        }
        if !(self.local_budget > 0.0) || !(self.obbt_lp_budget > 0.0) || !(self.obbt_milp_budget > 0.0) {
            return bad("budgets must be positive");
        }
        if self.milp_time_cap.is_some_and(|c| !(c > 0.0)) {
            return bad("milp_time_cap must be positive");
        }
        if self.node_limit == Some(0) || self.milp_node_limit == 0 || self.fbbt_max_passes == 0 {
            return bad("node limits and pass counts must be positive");
        }
        if self.integer_mode == IntegerMode::MilpAtDepth(0) {
            return bad("milp depth must be at least 1 (root depth)");
        }
        Ok(())
    }

    /// Per-subproblem OBBT budget for the configured mode.
    pub fn obbt_budget(&self) -> f64 {
        match self.obbt_mode {
            ObbtMode::Milp => self.obbt_milp_budget,
            _ => self.obbt_lp_budget,
        }
    }
}
