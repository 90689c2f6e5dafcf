//! Mixed-integer linear programming core.
//!
//! Models are always minimizations over continuous and binary variables.
//! [`solve_lp`] runs a bounded-variable revised simplex on the continuous
//! relaxation; [`solve_milp`] wraps it in a best-bound branch-and-bound over
//! the binaries. Both are single-threaded and deterministic: identical
//! models give bit-identical results.

mod bnb;
mod model;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::{Constraint, ConstraintId, MilpModel, Sense, VarId, VarKind, Variable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("variable `{var}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: String, lower: f64, upper: f64 },
    #[error("binary variable `{var}` has bounds [{lower}, {upper}] outside [0, 1]")]
    BinaryBounds { var: String, lower: f64, upper: f64 },
    #[error("variable `{var}` has a non-finite objective coefficient")]
    NonFiniteObjective { var: String },
    #[error("constraint `{constraint}` references undeclared variable #{index}")]
    UnknownVariable { constraint: String, index: usize },
    #[error("constraint `{constraint}` has a non-finite coefficient on `{var}`")]
    NonFiniteCoefficient { constraint: String, var: String },
    #[error("constraint `{constraint}` has a non-finite right-hand side")]
    NonFiniteRhs { constraint: String },
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("malformed model: {0}")]
    Model(#[from] ModelError),
    #[error("simplex iteration limit of {limit} exceeded")]
    IterationLimit { limit: u64 },
    #[error("branch-and-bound node limit of {limit} exceeded")]
    NodeLimit {
        limit: u64,
        /// Best integer-feasible solution found before the limit hit.
        incumbent: Option<Box<MilpSolution>>,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl SolveError {
    /// True for the resource-limit family (iteration and node limits).
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, SolveError::IterationLimit { .. } | SolveError::NodeLimit { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes_explored: u64,
    pub lp_iterations: u64,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveStats {
    pub fn absorb(&mut self, other: &SolveStats) {
        self.nodes_explored += other.nodes_explored;
        self.lp_iterations += other.lp_iterations;
        self.wall_time += other.wall_time;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// One entry per model variable; empty unless optimal.
    pub values: Vec<f64>,
    /// Row duals of the final LP (sign convention: reduced cost of column
    /// `j` is `c_j - Σ_i duals_i · a_ij`). Only present for optimal
    /// continuous solves.
    pub duals: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl MilpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    pub(crate) fn without_point(status: SolveStatus, stats: SolveStats) -> Self {
        let objective = match status {
            SolveStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        Self {
            status,
            objective,
            values: Vec::new(),
            duals: None,
            stats,
        }
    }
}

/// Solver tolerances and limits. The defaults are the tested contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Smallest magnitude accepted as a pivot element.
    pub pivot_tol: f64,
    /// Primal feasibility tolerance on bounds and rows.
    pub feasibility_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub optimality_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degeneracy_stall: u32,
    /// Pivots between basis refactorizations.
    pub refactor_interval: u32,
    pub max_iterations: u64,
    pub integrality_tol: f64,
    pub relative_gap: f64,
    pub max_nodes: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-9,
            feasibility_tol: 1e-6,
            optimality_tol: 1e-9,
            degeneracy_stall: 50,
            refactor_interval: 100,
            max_iterations: 1_000_000,
            integrality_tol: 1e-6,
            relative_gap: 1e-8,
            max_nodes: 1_000_000,
        }
    }
}

/// Solves the continuous relaxation of `model` (binaries become `[lower, upper]`
/// continuous variables).
pub fn solve_lp(model: &MilpModel) -> Result<MilpSolution, SolveError> {
    solve_lp_with(model, &SolverOptions::default())
}

pub fn solve_lp_with(model: &MilpModel, opts: &SolverOptions) -> Result<MilpSolution, SolveError> {
    model.validate()?;
    let start = std::time::Instant::now();
    let mut sol = simplex::solve(model, None, opts)?;
    sol.stats.nodes_explored = 1;
    sol.stats.wall_time = start.elapsed().as_secs_f64();
    Ok(sol)
}

/// Solves `model` to optimality over its binary variables.
pub fn solve_milp(model: &MilpModel) -> Result<MilpSolution, SolveError> {
    solve_milp_with(model, &SolverOptions::default())
}

pub fn solve_milp_with(model: &MilpModel, opts: &SolverOptions) -> Result<MilpSolution, SolveError> {
    model.validate()?;
    let start = std::time::Instant::now();
    let mut sol = bnb::branch_and_bound(model, opts)?;
    sol.stats.wall_time = start.elapsed().as_secs_f64();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_objective_without_constraints() {
        let mut m = MilpModel::new("zero");
        m.add_continuous("x", 0.0, 1.0, 0.0);
        let sol = solve_lp(&m).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn two_dimensional_polytope() {
        // Vertices of {x + y <= 1} ∩ [0,1]^2: (0,0)→0, (1,0)→-1, (0,1)→-1.
        let mut m = MilpModel::new("square");
        let x = m.add_continuous("x", 0.0, 1.0, -1.0);
        let y = m.add_continuous("y", 0.0, 1.0, -1.0);
        m.add_constraint("cap", [(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
        let sol = solve_lp(&m).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_conflict_is_infeasible() {
        let mut m = MilpModel::new("conflict");
        let x = m.add_continuous("x", 0.0, 1.0, 1.0);
        m.add_constraint("floor", [(x, 1.0)], Sense::Ge, 3.0);
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn crossed_variable_bounds_are_infeasible() {
        let mut m = MilpModel::new("crossed");
        m.add_continuous("x", 2.0, 1.0, 1.0);
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = MilpModel::new("ray");
        let x = m.add_continuous("x", 0.0, f64::INFINITY, -1.0);
        let y = m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        m.add_constraint("c", [(x, 1.0), (y, -1.0)], Sense::Le, 2.0);
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn malformed_model_rejected_before_solving() {
        let mut m = MilpModel::new("bad");
        m.add_continuous("x", 0.0, 1.0, f64::INFINITY);
        assert!(matches!(solve_lp(&m), Err(SolveError::Model(_))));
        assert!(matches!(solve_milp(&m), Err(SolveError::Model(_))));
    }

    #[test]
    fn iteration_limit_is_a_resource_error() {
        let mut m = MilpModel::new("limit");
        let x = m.add_continuous("x", 0.0, 10.0, -1.0);
        let y = m.add_continuous("y", 0.0, 10.0, -1.0);
        m.add_constraint("c", [(x, 1.0), (y, 2.0)], Sense::Le, 4.0);
        m.add_constraint("d", [(x, 3.0), (y, 1.0)], Sense::Le, 6.0);
        let opts = SolverOptions {
            max_iterations: 1,
            ..SolverOptions::default()
        };
        let err = solve_lp_with(&m, &opts).unwrap_err();
        assert!(matches!(err, SolveError::IterationLimit { limit: 1 }));
        assert!(err.is_resource_limit());
    }

    #[test]
    fn knapsack_pair() {
        // Assignments (a,b): (0,0)→0, (1,0)→-3, (0,1)→-2, (1,1) infeasible.
        let mut m = MilpModel::new("pair");
        let a = m.add_binary("a", -3.0);
        let b = m.add_binary("b", -2.0);
        m.add_constraint("one", [(a, 1.0), (b, 1.0)], Sense::Le, 1.0);
        let sol = solve_milp(&m).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, -3.0);
        assert_eq!(sol.value(a), 1.0);
        assert_eq!(sol.value(b), 0.0);
    }

    #[test]
    fn no_binaries_matches_lp() {
        let mut m = MilpModel::new("pure");
        let x = m.add_continuous("x", 0.0, 4.0, -2.0);
        let y = m.add_continuous("y", -1.0, 3.0, 1.0);
        m.add_constraint("c", [(x, 1.0), (y, -1.0)], Sense::Le, 2.5);
        let lp = solve_lp(&m).unwrap();
        let mip = solve_milp(&m).unwrap();
        assert_eq!(lp.status, mip.status);
        assert_eq!(lp.objective, mip.objective);
        assert_eq!(lp.values, mip.values);
    }

    #[test]
    fn half_integral_binary_is_infeasible() {
        let mut m = MilpModel::new("half");
        let a = m.add_binary("a", 1.0);
        m.add_constraint("half", [(a, 1.0)], Sense::Eq, 0.5);
        assert_eq!(solve_milp(&m).unwrap().status, SolveStatus::Infeasible);
        // The relaxation alone is feasible.
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Optimal);
    }

    #[test]
    fn node_limit_carries_incumbent() {
        let mut m = MilpModel::new("nodes");
        let vars: Vec<_> = (0..6).map(|i| m.add_binary(format!("b{i}"), -(1.0 + i as f64 * 0.1))).collect();
        m.add_constraint("cap", vars.iter().map(|&v| (v, 2.0)), Sense::Le, 5.0);
        let opts = SolverOptions {
            max_nodes: 2,
            ..SolverOptions::default()
        };
        match solve_milp_with(&m, &opts) {
            Err(e @ SolveError::NodeLimit { .. }) => assert!(e.is_resource_limit()),
            other => panic!("expected node limit, got {other:?}"),
        }
    }
}
