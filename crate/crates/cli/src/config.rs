use std::path::Path;

use anyhow::Context;
use fleetgrid::dispatch::DispatchOptions;
use fleetgrid::milp::SolverOptions;
use serde::Deserialize;

/// Overrides read from `--config`. Fields left out keep the scenario's
/// values (or the library defaults).
///
/// ```toml
/// travel_cost_scale = 2.0
/// enumeration_cap = 200000
///
/// [solver]
/// feasibility_tol = 1e-7
/// max_nodes = 50000
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub travel_cost_scale: Option<f64>,
    pub enumeration_cap: Option<u64>,
    pub aggregate_cut: Option<bool>,
    pub solver: Option<SolverOptions>,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn apply(&self, opts: &mut DispatchOptions) {
        if let Some(v) = self.travel_cost_scale {
            opts.travel_cost_scale = v;
        }
        if let Some(v) = self.enumeration_cap {
            opts.enumeration_cap = v;
        }
        if let Some(v) = self.aggregate_cut {
            opts.aggregate_cut = v;
        }
        if let Some(v) = self.solver {
            opts.solver = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_solver_table_keeps_defaults() {
        let c: Config = toml::from_str("travel_cost_scale = 3.0\n[solver]\nmax_nodes = 7\n").unwrap();
        let mut opts = DispatchOptions::default();
        c.apply(&mut opts);
        assert_eq!(opts.travel_cost_scale, 3.0);
        assert_eq!(opts.solver.max_nodes, 7);
        assert_eq!(opts.solver.feasibility_tol, SolverOptions::default().feasibility_tol);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Config>("tolerance = 1\n").is_err());
    }
}
