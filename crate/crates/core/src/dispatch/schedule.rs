use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{brute_force_dispatch, solve_dispatch, Assignment, DispatchError, DispatchOptions, DispatchPlan, PlanMethod, VehicleFleet};
use crate::grid::{GridCase, GridError};
use crate::transport::{self, TransportError, TransportNetwork};

/// Which destinations a fleet may consider, on top of reachability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reach {
    #[default]
    All,
    /// Explicitly forbidden nodes.
    Exclude(BTreeSet<usize>),
    /// Nodes whose travel cost exceeds the radius are excluded.
    Radius(f64),
}

/// A fleet as described by the user, before travel costs are known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub id: String,
    pub origin: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub energy_cost: f64,
    #[serde(default)]
    pub reach: Reach,
}

/// A road closure applied before travel costs are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    Edge { from: usize, to: usize },
    /// Every edge into or out of the node.
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validation,
    Closures,
    TravelCosts,
    Fleets,
    Dispatch,
    Routing,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Validation => "input validation",
            Stage::Closures => "road closures",
            Stage::TravelCosts => "travel cost table",
            Stage::Fleets => "fleet construction",
            Stage::Dispatch => "dispatch",
            Stage::Routing => "route reconstruction",
        })
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error("grid has {buses} buses but the transport network has {nodes} nodes")]
    LayerMismatch { buses: usize, nodes: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error("fleet `{fleet}`: no route from {origin} to chosen node {destination}")]
    NoRoute { fleet: String, origin: usize, destination: usize },
    #[error("fleet `{fleet}`: route cost {route} disagrees with cost table {table}")]
    RouteCost { fleet: String, route: f64, table: f64 },
}

#[derive(Debug, Error)]
#[error("{stage} failed: {source}")]
pub struct ScheduleError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
}

impl ScheduleError {
    fn at(stage: Stage) -> impl FnOnce(StageError) -> Self {
        move |source| ScheduleError { stage, source }
    }

    pub fn is_infeasible(&self) -> bool {
        match &self.source {
            StageError::Dispatch(e) => e.is_infeasible(),
            StageError::Grid(GridError::Infeasible) | StageError::NoRoute { .. } => true,
            _ => false,
        }
    }

    pub fn is_resource_limit(&self) -> bool {
        match &self.source {
            StageError::Dispatch(e) => e.is_resource_limit(),
            StageError::Transport(TransportError::Solver(e)) => e.is_resource_limit(),
            _ => false,
        }
    }
}

/// Builds solver-ready fleets from specs and a cost table whose rows are
/// the spec origins, in order. Unreachable nodes are always excluded.
pub fn build_fleets(specs: &[FleetSpec], table: &transport::CostTable) -> Vec<VehicleFleet> {
    specs
        .iter()
        .enumerate()
        .map(|(row, s)| {
            let costs = table.costs[row].clone();
            let mut excluded: BTreeSet<usize> = costs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_none())
                .map(|(i, _)| i + 1)
                .collect();
            match &s.reach {
                Reach::All => {}
                Reach::Exclude(set) => excluded.extend(set),
                Reach::Radius(r) => excluded.extend(
                    costs
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.is_some_and(|c| c > *r))
                        .map(|(i, _)| i + 1),
                ),
            }
            VehicleFleet {
                id: s.id.clone(),
                origin: s.origin,
                p_min: s.p_min,
                p_max: s.p_max,
                energy_cost: s.energy_cost,
                travel_costs: costs,
                excluded,
            }
        })
        .collect()
}

/// End-to-end scheduling: apply closures, compute travel costs from every
/// fleet origin, restrict each fleet to the nodes it can reach, solve the
/// dispatch problem, then route each dispatched fleet with the routing
/// program and check the route against the cost table.
pub fn run_schedule(
    case: &GridCase,
    net: &TransportNetwork,
    specs: &[FleetSpec],
    closures: &[Closure],
    method: PlanMethod,
    opts: &DispatchOptions,
) -> Result<DispatchPlan, ScheduleError> {
    if case.bus_count() != net.node_count() {
        return Err(ScheduleError {
            stage: Stage::Validation,
            source: StageError::LayerMismatch {
                buses: case.bus_count(),
                nodes: net.node_count(),
            },
        });
    }
    case.validate().map_err(|e| ScheduleError::at(Stage::Validation)(e.into()))?;

    let mut net = net.clone();
    for c in closures {
        match *c {
            Closure::Edge { from, to } => net.restrict(from, to),
            Closure::Node(node) => {
                if node == 0 || node > net.node_count() {
                    Err(TransportError::InvalidNode { node, node_count: net.node_count() })
                } else {
                    net.isolate(node);
                    Ok(())
                }
            }
        }
        .map_err(|e| ScheduleError::at(Stage::Closures)(e.into()))?;
    }
    log::debug!("{} closures applied, {} edges restricted", closures.len(), net.restricted().len());

    let origins: Vec<usize> = specs.iter().map(|s| s.origin).collect();
    let table = transport::all_pairs_costs(&net, &origins).map_err(|e| ScheduleError::at(Stage::TravelCosts)(e.into()))?;

    let fleets = build_fleets(specs, &table);
    super::validate_fleets(case, &fleets).map_err(|e| ScheduleError::at(Stage::Fleets)(e.into()))?;
    for f in &fleets {
        log::debug!("fleet {}: {} candidate nodes", f.id, f.candidates(case.bus_count()).len());
    }

    let mut plan = match method {
        PlanMethod::Milp => solve_dispatch(case, &fleets, opts),
        PlanMethod::Enumeration => brute_force_dispatch(case, &fleets, opts),
    }
    .map_err(|e| ScheduleError::at(Stage::Dispatch)(e.into()))?;

    for (v, f) in plan.vehicles.iter_mut().zip(&fleets) {
        let Assignment::Node(dest) = v.destination else {
            continue;
        };
        let route = transport::solve_route(&net, f.origin, dest)
            .map_err(|e| ScheduleError::at(Stage::Routing)(e.into()))?
            .ok_or_else(|| ScheduleError {
                stage: Stage::Routing,
                source: StageError::NoRoute {
                    fleet: f.id.clone(),
                    origin: f.origin,
                    destination: dest,
                },
            })?;
        let table_cost = f.travel_costs[dest - 1].unwrap_or(f64::NAN);
        if (route.total_cost - table_cost).abs() > 1e-9 * table_cost.abs().max(1.0) {
            return Err(ScheduleError {
                stage: Stage::Routing,
                source: StageError::RouteCost {
                    fleet: f.id.clone(),
                    route: route.total_cost,
                    table: table_cost,
                },
            });
        }
        v.route = Some(route);
    }
    Ok(plan)
}
