//! Vehicle-integrated dispatch.
//!
//! Each fleet `v` has a power setpoint `p_v ∈ [p_min, p_max]` and a binary
//! `z_vi` per bus choosing where it plugs in. The balance at bus `i` needs
//! the product `p_v · z_vi`; [`mccormick_envelope`] replaces that product
//! with a continuous `y_vi` and four linear inequalities, which is exact
//! because `z_vi` is binary. [`solve_dispatch`] solves the resulting MILP;
//! [`brute_force_dispatch`] enumerates every assignment and solves one LP
//! per assignment, giving an independent check of the reformulation.

mod enumerate;
mod schedule;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{self, GridCase, GridError, GridState, OpfLayout};
use crate::milp::{self, ConstraintId, MilpModel, Sense, SolveError, SolveStats, SolveStatus, SolverOptions, VarId};
use crate::transport::RouteSolution;

pub use enumerate::brute_force_dispatch;
pub use schedule::{build_fleets, run_schedule, Closure, FleetSpec, Reach, ScheduleError, Stage, StageError};

/// A group of vehicles dispatched as one injection unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleFleet {
    pub id: String,
    pub origin: usize,
    /// MW.
    pub p_min: f64,
    /// MW.
    pub p_max: f64,
    /// $/MWh.
    pub energy_cost: f64,
    /// Travel cost (cost units) from the origin to each node, `node - 1`
    /// indexed. `None` is allowed only for excluded nodes.
    pub travel_costs: Vec<Option<f64>>,
    /// Nodes the fleet may not be sent to. Never the origin, except when
    /// every node is excluded and the fleet is simply left out.
    pub excluded: BTreeSet<usize>,
}

impl VehicleFleet {
    /// Nodes the fleet may be sent to, ascending.
    pub fn candidates(&self, node_count: usize) -> Vec<usize> {
        (1..=node_count).filter(|i| !self.excluded.contains(i)).collect()
    }

    fn validate(&self, node_count: usize) -> Result<(), DispatchError> {
        let invalid = |reason: String| DispatchError::InvalidFleet {
            fleet: self.id.clone(),
            reason,
        };
        if self.origin == 0 || self.origin > node_count {
            return Err(invalid(format!("origin {} is not a bus of the case", self.origin)));
        }
        if !(self.p_min.is_finite() && self.p_max.is_finite() && 0.0 <= self.p_min && self.p_min <= self.p_max) {
            return Err(invalid(format!("power limits [{}, {}] are invalid", self.p_min, self.p_max)));
        }
        if !self.energy_cost.is_finite() {
            return Err(invalid("energy cost is not finite".into()));
        }
        if self.travel_costs.len() != node_count {
            return Err(invalid(format!(
                "travel costs cover {} nodes, case has {node_count}",
                self.travel_costs.len()
            )));
        }
        if self.travel_costs[self.origin - 1] != Some(0.0) {
            return Err(invalid("travel cost to its own origin must be 0".into()));
        }
        if let Some(&bad) = self.excluded.iter().find(|&&i| i == 0 || i > node_count) {
            return Err(invalid(format!("excluded node {bad} is not a bus of the case")));
        }
        // Excluding every node is the one way to park a fleet outright.
        if self.excluded.contains(&self.origin) && self.excluded.len() < node_count {
            return Err(invalid("origin cannot be excluded unless every node is".into()));
        }
        for node in self.candidates(node_count) {
            match self.travel_costs[node - 1] {
                Some(c) if c.is_finite() && c >= 0.0 => {}
                Some(c) => return Err(invalid(format!("travel cost {c} to node {node} is invalid"))),
                None => {
                    return Err(DispatchError::MissingTravelCost {
                        fleet: self.id.clone(),
                        node,
                    })
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispatchOptions {
    pub solver: SolverOptions,
    /// Dollars per unit of travel cost.
    pub travel_cost_scale: f64,
    /// Largest assignment count the enumeration oracle will attempt.
    pub enumeration_cap: u64,
    /// Adds `Σ_i y_vi ≤ p_v` per fleet. The row is implied by the integer
    /// program but not by its relaxation, where fractional selections would
    /// otherwise let a fleet deliver several times the power it pays for.
    pub aggregate_cut: bool,
}

impl Default for DispatchOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            travel_cost_scale: 1.0,
            enumeration_cap: 100_000,
            aggregate_cut: true,
        }
    }
}

/// Which part of the problem makes a dispatch instance infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    /// Grid limits cannot be met even with every fleet free to idle.
    Grid,
    /// The grid is serviceable, but fleet lower bounds cannot be honored.
    FleetBounds,
}

impl std::fmt::Display for Subsystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Subsystem::Grid => "grid limits",
            Subsystem::FleetBounds => "fleet power bounds",
        })
    }
}

#[derive(Debug, Clone, Error)]
pub enum DispatchError {
    #[error("fleet `{fleet}`: {reason}")]
    InvalidFleet { fleet: String, reason: String },
    #[error("fleet `{fleet}` has no travel cost for candidate node {node}; exclude it explicitly")]
    MissingTravelCost { fleet: String, node: usize },
    #[error("envelope bounds are inverted: [{lower}, {upper}]")]
    InvertedBounds { lower: f64, upper: f64 },
    #[error("duplicate fleet id `{0}`")]
    DuplicateFleet(String),
    #[error("dispatch problem is infeasible: binding subsystem is {subsystem}")]
    Infeasible { subsystem: Subsystem },
    #[error("dispatch problem is unbounded")]
    Unbounded,
    #[error("enumeration needs {count} assignments, above the cap of {cap}; exclude more nodes or raise the cap")]
    EnumerationCap { count: u128, cap: u64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolveError),
}

impl DispatchError {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, DispatchError::Infeasible { .. } | DispatchError::Grid(GridError::Infeasible))
    }

    pub fn is_resource_limit(&self) -> bool {
        match self {
            DispatchError::EnumerationCap { .. } => true,
            DispatchError::Solver(e) | DispatchError::Grid(GridError::Solver(e)) => e.is_resource_limit(),
            _ => false,
        }
    }
}

/// Adds the four linear inequalities that pin `y = p · z` for binary `z`
/// and `p ∈ [lower, upper]`:
///
/// ```text
/// y ≥ z·lower             y ≤ z·upper
/// y ≥ p + z·upper − upper y ≤ p + z·lower − lower
/// ```
///
/// With `z = 0` the left pair collapses to `y = 0`; with `z = 1` the
/// right-hand terms collapse to `y = p`.
pub fn mccormick_envelope(
    model: &mut MilpModel,
    p: VarId,
    z: VarId,
    y: VarId,
    lower: f64,
    upper: f64,
) -> Result<[ConstraintId; 4], DispatchError> {
    if lower.is_nan() || upper.is_nan() || lower > upper {
        return Err(DispatchError::InvertedBounds { lower, upper });
    }
    let base = format!("{}~{}", model.var(p).name, model.var(z).name);
    Ok([
        model.add_constraint(format!("env_lo_z[{base}]"), [(y, 1.0), (z, -lower)], Sense::Ge, 0.0),
        model.add_constraint(format!("env_lo_p[{base}]"), [(y, 1.0), (p, -1.0), (z, -upper)], Sense::Ge, -upper),
        model.add_constraint(format!("env_hi_z[{base}]"), [(y, 1.0), (z, -upper)], Sense::Le, 0.0),
        model.add_constraint(format!("env_hi_p[{base}]"), [(y, 1.0), (p, -1.0), (z, -lower)], Sense::Le, -lower),
    ])
}

#[derive(Debug, Clone)]
pub struct FleetVars {
    pub power: VarId,
    /// Per bus, `node - 1` indexed.
    pub select: Vec<VarId>,
    /// Per bus, `node - 1` indexed.
    pub injection: Vec<VarId>,
}

#[derive(Debug, Clone)]
pub struct DispatchModel {
    pub model: MilpModel,
    pub grid: OpfLayout,
    pub fleets: Vec<FleetVars>,
}

impl DispatchModel {
    /// Number of selection binaries not fixed to zero.
    pub fn free_binaries(&self) -> usize {
        self.fleets
            .iter()
            .flat_map(|f| &f.select)
            .filter(|&&z| self.model.var(z).upper > 0.0)
            .count()
    }
}

pub(crate) fn validate_fleets(case: &GridCase, fleets: &[VehicleFleet]) -> Result<(), DispatchError> {
    let mut ids = BTreeSet::new();
    for f in fleets {
        f.validate(case.bus_count())?;
        if !ids.insert(f.id.as_str()) {
            return Err(DispatchError::DuplicateFleet(f.id.clone()));
        }
    }
    Ok(())
}

/// Builds the mixed-integer dispatch program: the baseline OPF plus, per
/// fleet, a setpoint, one selection binary and one injection variable per
/// bus, the envelope rows, and `Σ_i z_vi ≤ 1`. Excluded nodes have their
/// binary fixed to zero. See [`DispatchOptions::aggregate_cut`] for the one
/// optional row.
pub fn build_dispatch_model(
    case: &GridCase,
    fleets: &[VehicleFleet],
    opts: &DispatchOptions,
) -> Result<DispatchModel, DispatchError> {
    validate_fleets(case, fleets)?;
    let opf = grid::build_baseline_opf(case)?;
    let mut model = opf.model;
    let n = case.bus_count();

    let mut vars = Vec::with_capacity(fleets.len());
    for f in fleets {
        let power = model.add_continuous(format!("p_{}", f.id), f.p_min, f.p_max, f.energy_cost);
        let mut select = Vec::with_capacity(n);
        let mut injection = Vec::with_capacity(n);
        for node in 1..=n {
            let excluded = f.excluded.contains(&node);
            let travel = if excluded {
                0.0
            } else {
                opts.travel_cost_scale * f.travel_costs[node - 1].unwrap_or(0.0)
            };
            let z = model.add_binary(format!("z_{}_{node}", f.id), travel);
            if excluded {
                model.set_bounds(z, 0.0, 0.0);
            }
            let y = model.add_continuous(format!("y_{}_{node}", f.id), f.p_min.min(0.0), f.p_max, 0.0);
            mccormick_envelope(&mut model, power, z, y, f.p_min, f.p_max)?;
            model.add_term(opf.layout.balance_rows[node - 1], y, -1.0);
            select.push(z);
            injection.push(y);
        }
        model.add_constraint(format!("one_site_{}", f.id), select.iter().map(|&z| (z, 1.0)), Sense::Le, 1.0);
        if opts.aggregate_cut {
            let terms = injection.iter().map(|&y| (y, 1.0)).chain([(power, -1.0)]);
            model.add_constraint(format!("delivered_{}", f.id), terms, Sense::Le, 0.0);
        }
        vars.push(FleetVars {
            power,
            select,
            injection,
        });
    }
    Ok(DispatchModel {
        model,
        grid: opf.layout,
        fleets: vars,
    })
}

/// Where a fleet ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// Not sent anywhere; contributes no injection.
    Undispatched,
    Node(usize),
}

impl Assignment {
    pub fn node(self) -> Option<usize> {
        match self {
            Assignment::Node(n) => Some(n),
            Assignment::Undispatched => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleDispatch {
    pub fleet: String,
    pub origin: usize,
    pub destination: Assignment,
    pub route: Option<RouteSolution>,
    /// Setpoint `p_v`, MW.
    pub setpoint: f64,
    /// Power actually delivered to the grid, MW (0 when undispatched).
    pub injection: f64,
    /// Travel cost to the destination in cost units.
    pub travel_cost: f64,
    /// Selection values per bus as returned by the solver.
    pub selection: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub generation_cost: f64,
    pub vehicle_energy_cost: f64,
    /// Travel cost converted to dollars.
    pub travel_cost: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.generation_cost + self.vehicle_energy_cost + self.travel_cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMethod {
    Milp,
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchPlan {
    pub case: String,
    pub method: PlanMethod,
    pub vehicles: Vec<VehicleDispatch>,
    pub grid: GridState,
    /// Equal to `breakdown.total()`.
    pub objective: f64,
    pub breakdown: CostBreakdown,
    /// For enumeration plans `nodes_explored` counts the LPs solved.
    pub stats: SolveStats,
}

impl DispatchPlan {
    pub fn dispatched(&self) -> impl Iterator<Item = &VehicleDispatch> {
        self.vehicles.iter().filter(|v| v.destination != Assignment::Undispatched)
    }
}

pub(crate) fn assemble_plan(
    case: &GridCase,
    fleets: &[VehicleFleet],
    method: PlanMethod,
    state: GridState,
    vehicles: Vec<VehicleDispatch>,
    opts: &DispatchOptions,
    stats: SolveStats,
) -> DispatchPlan {
    let breakdown = CostBreakdown {
        generation_cost: grid::generation_cost(case, &state.gen_setpoints),
        vehicle_energy_cost: fleets.iter().zip(&vehicles).map(|(f, v)| f.energy_cost * v.setpoint).sum(),
        travel_cost: opts.travel_cost_scale * vehicles.iter().map(|v| v.travel_cost).sum::<f64>(),
    };
    DispatchPlan {
        case: case.name.clone(),
        method,
        vehicles,
        grid: state,
        objective: breakdown.total(),
        breakdown,
        stats,
    }
}

/// Decides which subsystem blocks a dispatch instance with no feasible
/// point: if freeing every fleet's lower bound restores feasibility, the
/// fleet bounds are at fault, otherwise the grid is.
pub(crate) fn diagnose_infeasibility(
    case: &GridCase,
    fleets: &[VehicleFleet],
    opts: &DispatchOptions,
) -> Result<Subsystem, DispatchError> {
    let relaxed: Vec<VehicleFleet> = fleets
        .iter()
        .map(|f| VehicleFleet {
            p_min: 0.0,
            ..f.clone()
        })
        .collect();
    let model = build_dispatch_model(case, &relaxed, opts)?;
    let sol = milp::solve_milp_with(&model.model, &opts.solver)?;
    Ok(if sol.is_optimal() && fleets.iter().any(|f| f.p_min > 0.0) {
        Subsystem::FleetBounds
    } else {
        Subsystem::Grid
    })
}

/// Solves the dispatch MILP and reads the plan off its solution. Each
/// fleet goes to the bus with the largest selection value, or stays
/// undispatched when all selections are zero. Routes are left empty.
pub fn solve_dispatch(
    case: &GridCase,
    fleets: &[VehicleFleet],
    opts: &DispatchOptions,
) -> Result<DispatchPlan, DispatchError> {
    let dm = build_dispatch_model(case, fleets, opts)?;
    let sol = milp::solve_milp_with(&dm.model, &opts.solver)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(DispatchError::Infeasible {
                subsystem: diagnose_infeasibility(case, fleets, opts)?,
            })
        }
        SolveStatus::Unbounded => return Err(DispatchError::Unbounded),
    }

    let n = case.bus_count();
    let mut injections = vec![0.0; n];
    let mut vehicles = Vec::with_capacity(fleets.len());
    for (f, fv) in fleets.iter().zip(&dm.fleets) {
        let selection: Vec<f64> = fv.select.iter().map(|&z| sol.value(z)).collect();
        let total: f64 = selection.iter().sum();
        let destination = if total > 0.5 {
            // First maximum wins.
            let (best, _) = selection
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &z)| if z > acc.1 { (i, z) } else { acc });
            Assignment::Node(best + 1)
        } else {
            Assignment::Undispatched
        };
        let mut delivered = 0.0;
        for (i, &y) in fv.injection.iter().enumerate() {
            let y = sol.value(y);
            injections[i] += y;
            delivered += y;
        }
        vehicles.push(VehicleDispatch {
            fleet: f.id.clone(),
            origin: f.origin,
            destination,
            route: None,
            setpoint: sol.value(fv.power),
            injection: delivered,
            travel_cost: destination.node().map_or(0.0, |d| f.travel_costs[d - 1].unwrap_or(0.0)),
            selection,
        });
    }
    let state = dm.grid.state(case, &sol.values, injections);
    Ok(assemble_plan(case, fleets, PlanMethod::Milp, state, vehicles, opts, sol.stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Bus, Generator, Line};

    fn envelope_model(lower: f64, upper: f64, p: f64, z: f64) -> (MilpModel, VarId) {
        let mut m = MilpModel::new("env");
        let pv = m.add_continuous("p", p, p, 0.0);
        let zv = m.add_continuous("z", z, z, 0.0);
        let y = m.add_continuous("y", lower.min(0.0) - 100.0, upper + 100.0, 0.0);
        mccormick_envelope(&mut m, pv, zv, y, lower, upper).unwrap();
        (m, y)
    }

    /// Range of `y` admitted by the envelope at fixed `(p, z)`.
    fn y_range(lower: f64, upper: f64, p: f64, z: f64) -> (f64, f64) {
        let (mut m, y) = envelope_model(lower, upper, p, z);
        m.set_objective(y, 1.0);
        let lo = milp::solve_lp(&m).unwrap();
        m.set_objective(y, -1.0);
        let hi = milp::solve_lp(&m).unwrap();
        (lo.value(y), hi.value(y))
    }

    #[test]
    fn envelope_collapses_at_zero() {
        let (lo, hi) = y_range(5.0, 20.0, 12.0, 0.0);
        assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
    }

    #[test]
    fn envelope_tracks_power_at_one() {
        let (lo, hi) = y_range(5.0, 20.0, 12.0, 1.0);
        assert!((lo - 12.0).abs() < 1e-12 && (hi - 12.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_exact_on_grid() {
        // 50 power levels × 2 selection values.
        for k in 0..50 {
            let p = 20.0 * k as f64 / 49.0;
            for z in [0.0, 1.0] {
                let (lo, hi) = y_range(0.0, 20.0, p, z);
                assert!((lo - p * z).abs() < 1e-9, "p={p} z={z} lo={lo}");
                assert!((hi - p * z).abs() < 1e-9, "p={p} z={z} hi={hi}");
            }
        }
    }

    #[test]
    fn envelope_rejects_inverted_bounds() {
        let mut m = MilpModel::new("bad");
        let p = m.add_continuous("p", 0.0, 1.0, 0.0);
        let z = m.add_binary("z", 0.0);
        let y = m.add_continuous("y", 0.0, 1.0, 0.0);
        assert!(matches!(
            mccormick_envelope(&mut m, p, z, y, 3.0, 1.0),
            Err(DispatchError::InvertedBounds { .. })
        ));
    }

    fn two_bus(gen_price: f64) -> GridCase {
        GridCase {
            name: "two-bus".into(),
            base_mva: 1.0,
            ref_bus: 1,
            buses: vec![Bus { id: 1, load: 0.0 }, Bus { id: 2, load: 50.0 }],
            lines: vec![Line {
                from: 1,
                to: 2,
                susceptance: 10.0,
                flow_min: -100.0,
                flow_max: 100.0,
            }],
            generators: vec![Generator::linear(1, 0.0, 100.0, gen_price)],
        }
    }

    fn fleet(id: &str, origin: usize, p_max: f64, energy_cost: f64, travel: Vec<Option<f64>>) -> VehicleFleet {
        VehicleFleet {
            id: id.into(),
            origin,
            p_min: 0.0,
            p_max,
            energy_cost,
            travel_costs: travel,
            excluded: BTreeSet::new(),
        }
    }

    #[test]
    fn empty_fleet_matches_baseline() {
        let case = two_bus(10.0);
        let opts = DispatchOptions::default();
        let plan = solve_dispatch(&case, &[], &opts).unwrap();
        let base = grid::solve_baseline_opf(&case, &opts.solver).unwrap();
        assert_eq!(plan.objective, base.objective);
        let dm = build_dispatch_model(&case, &[], &opts).unwrap();
        assert_eq!(dm.model, grid::build_baseline_opf(&case).unwrap().model);
    }

    #[test]
    fn fully_excluded_fleet_has_single_free_binary() {
        let case = two_bus(10.0);
        let mut f = fleet("a", 2, 10.0, 1.0, vec![None, Some(0.0)]);
        f.excluded.insert(1);
        let dm = build_dispatch_model(&case, &[f], &DispatchOptions::default()).unwrap();
        assert_eq!(dm.free_binaries(), 1);
    }

    #[test]
    fn origin_exclusion_only_when_everything_is_excluded() {
        let case = two_bus(10.0);
        let opts = DispatchOptions::default();
        let mut f = fleet("a", 2, 10.0, 1.0, vec![Some(3.0), Some(0.0)]);
        f.excluded.insert(2);
        assert!(matches!(
            build_dispatch_model(&case, &[f.clone()], &opts),
            Err(DispatchError::InvalidFleet { .. })
        ));

        f.excluded.insert(1);
        let plan = solve_dispatch(&case, &[f], &opts).unwrap();
        assert_eq!(plan.vehicles[0].destination, Assignment::Undispatched);
        assert_eq!(plan.objective, grid::solve_baseline_opf(&case, &opts.solver).unwrap().objective);
    }

    #[test]
    fn cheap_fleet_serves_load() {
        // Assignments: stay undispatched → 10·50 = 500; at bus 2 → 1·50 = 50;
        // at bus 1 (travel 3) → 1·50 + 3 = 53.
        let case = two_bus(10.0);
        let f = fleet("a", 2, 50.0, 1.0, vec![Some(3.0), Some(0.0)]);
        let plan = solve_dispatch(&case, &[f], &DispatchOptions::default()).unwrap();
        assert_eq!(plan.vehicles[0].destination, Assignment::Node(2));
        assert!((plan.vehicles[0].injection - 50.0).abs() < 1e-9);
        assert!(plan.grid.gen_setpoints[0].abs() < 1e-9);
        assert!((plan.objective - 50.0).abs() < 1e-9);
    }

    #[test]
    fn expensive_fleet_stays_home() {
        let case = two_bus(10.0);
        let f = fleet("a", 2, 50.0, 99.0, vec![Some(3.0), Some(0.0)]);
        let opts = DispatchOptions::default();
        let plan = solve_dispatch(&case, &[f], &opts).unwrap();
        assert_eq!(plan.vehicles[0].destination, Assignment::Undispatched);
        assert_eq!(plan.vehicles[0].injection, 0.0);
        let base = grid::solve_baseline_opf(&case, &opts.solver).unwrap();
        assert!((plan.objective - base.objective).abs() < 1e-9);
    }

    #[test]
    fn missing_travel_cost_is_rejected() {
        let case = two_bus(10.0);
        let f = fleet("a", 2, 50.0, 1.0, vec![None, Some(0.0)]);
        assert!(matches!(
            build_dispatch_model(&case, &[f], &DispatchOptions::default()),
            Err(DispatchError::MissingTravelCost { node: 1, .. })
        ));
    }

    #[test]
    fn infeasibility_names_the_subsystem() {
        let opts = DispatchOptions::default();
        // Load beyond any supply: grid at fault.
        let mut case = two_bus(10.0);
        case.buses[1].load = 500.0;
        let f = fleet("a", 2, 10.0, 1.0, vec![Some(3.0), Some(0.0)]);
        match solve_dispatch(&case, &[f], &opts) {
            Err(DispatchError::Infeasible { subsystem }) => assert_eq!(subsystem, Subsystem::Grid),
            other => panic!("{other:?}"),
        }
        // Generator must run at 100 and the fleet must inject at least 60
        // into a 50 MW load: fleet bounds at fault.
        let mut case = two_bus(10.0);
        case.generators[0].p_min = 0.0;
        case.buses[1].load = 50.0;
        let mut f = fleet("a", 2, 80.0, 1.0, vec![Some(3.0), Some(0.0)]);
        f.p_min = 60.0;
        case.lines[0].flow_min = 0.0;
        case.lines[0].flow_max = 0.0;
        case.buses[0].load = 0.0;
        // Bus 2 must balance locally: injection = 50 exactly, but dispatch
        // requires p ≥ 60 whenever placed; undispatched leaves 50 unserved.
        match solve_dispatch(&case, &[f], &opts) {
            Err(e @ DispatchError::Infeasible { .. }) => {
                assert!(e.is_infeasible());
                assert!(matches!(e, DispatchError::Infeasible { subsystem: Subsystem::FleetBounds }));
            }
            other => panic!("{other:?}"),
        }
    }
}
