//! Road network model and vehicle routing.
//!
//! A [`TransportNetwork`] is a directed graph over nodes `1..=N` with
//! strictly positive edge weights and a set of restricted (closed) edges.
//! Routes can be found two ways: [`solve_route`] solves the binary
//! edge-selection program with the MILP core, [`shortest_path`] runs
//! Dijkstra. Both agree on cost whenever a route exists.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{self, MilpModel, Sense, SolveError, SolveStatus, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Error)]
pub enum TransportError {
    #[error("node {node} is outside 1..={node_count}")]
    InvalidNode { node: usize, node_count: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: usize },
    #[error("edge {from}->{to} has non-positive weight {weight}")]
    NonPositiveWeight { from: usize, to: usize, weight: f64 },
    #[error("duplicate directed edge {from}->{to}")]
    DuplicateEdge { from: usize, to: usize },
    #[error("no edge {from}->{to} in the network")]
    UnknownEdge { from: usize, to: usize },
    #[error("origin and destination are both node {node}")]
    SameEndpoints { node: usize },
    #[error("routing model solve failed: {0}")]
    Solver(#[from] SolveError),
    #[error("could not reconstruct a route from the solver edge set: {0}")]
    Reconstruction(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportNetwork {
    node_count: usize,
    edges: Vec<Edge>,
    restricted: BTreeSet<usize>,
    index: BTreeMap<(usize, usize), usize>,
}

impl TransportNetwork {
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Result<Self, TransportError> {
        let mut index = BTreeMap::new();
        for (id, e) in edges.iter().enumerate() {
            for node in [e.from, e.to] {
                if node == 0 || node > node_count {
                    return Err(TransportError::InvalidNode { node, node_count });
                }
            }
            if e.from == e.to {
                return Err(TransportError::SelfLoop { node: e.from });
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(TransportError::NonPositiveWeight {
                    from: e.from,
                    to: e.to,
                    weight: e.weight,
                });
            }
            if index.insert((e.from, e.to), id).is_some() {
                return Err(TransportError::DuplicateEdge { from: e.from, to: e.to });
            }
        }
        Ok(Self {
            node_count,
            edges,
            restricted: BTreeSet::new(),
            index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_id(&self, from: usize, to: usize) -> Option<usize> {
        self.index.get(&(from, to)).copied()
    }

    pub fn restricted(&self) -> &BTreeSet<usize> {
        &self.restricted
    }

    pub fn is_restricted(&self, edge: usize) -> bool {
        self.restricted.contains(&edge)
    }

    /// Marks the directed edge `from -> to` as closed.
    pub fn restrict(&mut self, from: usize, to: usize) -> Result<(), TransportError> {
        let id = self.edge_id(from, to).ok_or(TransportError::UnknownEdge { from, to })?;
        self.restricted.insert(id);
        Ok(())
    }

    pub fn restrict_edge(&mut self, edge: usize) {
        assert!(edge < self.edges.len(), "edge id {edge} out of range");
        self.restricted.insert(edge);
    }

    /// Closes every edge entering or leaving `node`.
    pub fn isolate(&mut self, node: usize) {
        for (id, e) in self.edges.iter().enumerate() {
            if e.from == node || e.to == node {
                self.restricted.insert(id);
            }
        }
    }

    fn check_node(&self, node: usize) -> Result<(), TransportError> {
        if node == 0 || node > self.node_count {
            Err(TransportError::InvalidNode {
                node,
                node_count: self.node_count,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSolution {
    pub origin: usize,
    pub destination: usize,
    /// Edges in travel order, `origin` to `destination`.
    pub edges: Vec<Edge>,
    pub total_cost: f64,
}

impl RouteSolution {
    fn stay(node: usize) -> Self {
        Self {
            origin: node,
            destination: node,
            edges: Vec::new(),
            total_cost: 0.0,
        }
    }

    /// Node sequence visited by the route, including both endpoints.
    pub fn nodes(&self) -> Vec<usize> {
        let mut out = vec![self.origin];
        out.extend(self.edges.iter().map(|e| e.to));
        out
    }

    /// True when the edges chain head-to-tail from origin to destination
    /// without revisiting a node.
    pub fn is_simple_chain(&self) -> bool {
        let mut at = self.origin;
        let mut seen = BTreeSet::from([at]);
        for e in &self.edges {
            if e.from != at || !seen.insert(e.to) {
                return false;
            }
            at = e.to;
        }
        at == self.destination
    }
}

/// The routing program together with the edge variable for each network edge.
#[derive(Debug, Clone)]
pub struct RoutingModel {
    pub model: MilpModel,
    /// Indexed by edge id.
    pub edge_vars: Vec<VarId>,
}

/// Builds the binary edge-selection program for a route from `origin` to
/// `destination`: one binary per directed edge, minimizing total weight,
/// subject to unit outflow at the origin, no outflow at the destination,
/// flow conservation elsewhere, antiparallel exclusion, closed edges fixed
/// to zero, and unit inflow at the destination.
pub fn build_routing_model(
    net: &TransportNetwork,
    origin: usize,
    destination: usize,
) -> Result<RoutingModel, TransportError> {
    net.check_node(origin)?;
    net.check_node(destination)?;
    if origin == destination {
        return Err(TransportError::SameEndpoints { node: origin });
    }
    let mut model = MilpModel::new(format!("route {origin}->{destination}"));
    let edge_vars: Vec<VarId> = net
        .edges
        .iter()
        .map(|e| model.add_binary(format!("x_{}_{}", e.from, e.to), e.weight))
        .collect();

    let out_of = |k: usize| {
        net.edges
            .iter()
            .zip(&edge_vars)
            .filter(move |(e, _)| e.from == k)
            .map(|(_, &v)| (v, 1.0))
    };
    let into = |k: usize| {
        net.edges
            .iter()
            .zip(&edge_vars)
            .filter(move |(e, _)| e.to == k)
            .map(|(_, &v)| (v, 1.0))
    };

    model.add_constraint("leave_origin", out_of(origin), Sense::Eq, 1.0);
    model.add_constraint("stop_at_destination", out_of(destination), Sense::Eq, 0.0);
    for k in 1..=net.node_count {
        if k == origin || k == destination {
            continue;
        }
        let terms = into(k).chain(out_of(k).map(|(v, a)| (v, -a)));
        model.add_constraint(format!("conserve_{k}"), terms, Sense::Eq, 0.0);
    }
    for (id, e) in net.edges.iter().enumerate() {
        if let Some(rev) = net.edge_id(e.to, e.from) {
            if id < rev {
                model.add_constraint(
                    format!("once_{}_{}", e.from, e.to),
                    [(edge_vars[id], 1.0), (edge_vars[rev], 1.0)],
                    Sense::Le,
                    1.0,
                );
            }
        }
    }
    for &id in &net.restricted {
        let e = net.edges[id];
        model.add_constraint(format!("closed_{}_{}", e.from, e.to), [(edge_vars[id], 1.0)], Sense::Eq, 0.0);
    }
    model.add_constraint("reach_destination", into(destination), Sense::Eq, 1.0);

    Ok(RoutingModel { model, edge_vars })
}

/// Solves the routing program with the MILP core. `Ok(None)` means no
/// route exists. `origin == destination` yields the empty zero-cost route.
pub fn solve_route(
    net: &TransportNetwork,
    origin: usize,
    destination: usize,
) -> Result<Option<RouteSolution>, TransportError> {
    net.check_node(origin)?;
    net.check_node(destination)?;
    if origin == destination {
        return Ok(Some(RouteSolution::stay(origin)));
    }
    let routing = build_routing_model(net, origin, destination)?;
    let sol = milp::solve_milp(&routing.model)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Ok(None),
        SolveStatus::Unbounded => {
            return Err(TransportError::Reconstruction("routing model reported unbounded".into()));
        }
    }
    let chosen: Vec<usize> = routing
        .edge_vars
        .iter()
        .enumerate()
        .filter(|&(_, &v)| sol.value(v) > 0.5)
        .map(|(id, _)| id)
        .collect();
    reconstruct(net, origin, destination, &chosen).map(Some)
}

/// Orders a selected edge set into a path by walking from the origin.
fn reconstruct(
    net: &TransportNetwork,
    origin: usize,
    destination: usize,
    chosen: &[usize],
) -> Result<RouteSolution, TransportError> {
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for &id in chosen {
        let e = net.edges[id];
        if next.insert(e.from, id).is_some() {
            return Err(TransportError::Reconstruction(format!("node {} has two selected out-edges", e.from)));
        }
    }
    let mut edges = Vec::with_capacity(chosen.len());
    let mut at = origin;
    while at != destination {
        let id = next
            .remove(&at)
            .ok_or_else(|| TransportError::Reconstruction(format!("route stops at node {at}")))?;
        let e = net.edges[id];
        edges.push(e);
        at = e.to;
    }
    if !next.is_empty() {
        return Err(TransportError::Reconstruction(format!(
            "{} selected edges are not on the origin-destination path",
            next.len()
        )));
    }
    let total_cost = edges.iter().map(|e| e.weight).sum();
    Ok(RouteSolution {
        origin,
        destination,
        edges,
        total_cost,
    })
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `origin` over open edges: per-node distance (index
/// `node - 1`) and the edge used to reach it.
fn dijkstra(net: &TransportNetwork, origin: usize) -> (Vec<Option<f64>>, Vec<Option<usize>>) {
    let n = net.node_count;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (id, e) in net.edges.iter().enumerate() {
        if !net.is_restricted(id) {
            adjacency[e.from].push(id);
        }
    }
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[origin - 1] = Some(0.0);
    heap.push(Frontier { cost: 0.0, node: origin });
    while let Some(Frontier { cost, node }) = heap.pop() {
        if done[node - 1] {
            continue;
        }
        done[node - 1] = true;
        for &id in &adjacency[node] {
            let e = net.edges[id];
            let cand = cost + e.weight;
            if dist[e.to - 1].is_none_or(|d| cand < d) {
                dist[e.to - 1] = Some(cand);
                via[e.to - 1] = Some(id);
                heap.push(Frontier { cost: cand, node: e.to });
            }
        }
    }
    (dist, via)
}

/// Shortest open route by Dijkstra. `Ok(None)` when unreachable.
pub fn shortest_path(
    net: &TransportNetwork,
    origin: usize,
    destination: usize,
) -> Result<Option<RouteSolution>, TransportError> {
    net.check_node(origin)?;
    net.check_node(destination)?;
    if origin == destination {
        return Ok(Some(RouteSolution::stay(origin)));
    }
    let (dist, via) = dijkstra(net, origin);
    if dist[destination - 1].is_none() {
        return Ok(None);
    }
    let mut edges = Vec::new();
    let mut at = destination;
    while at != origin {
        let e = net.edges[via[at - 1].expect("reached node has a predecessor")];
        edges.push(e);
        at = e.from;
    }
    edges.reverse();
    let total_cost = edges.iter().map(|e| e.weight).sum();
    Ok(Some(RouteSolution {
        origin,
        destination,
        edges,
        total_cost,
    }))
}

/// Travel cost from each origin to every node. `None` marks unreachable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub origins: Vec<usize>,
    /// `costs[row][node - 1]`.
    pub costs: Vec<Vec<Option<f64>>>,
}

impl CostTable {
    pub fn cost(&self, row: usize, node: usize) -> Option<f64> {
        self.costs[row][node - 1]
    }

    pub fn node_count(&self) -> usize {
        self.costs.first().map_or(0, Vec::len)
    }
}

pub fn all_pairs_costs(net: &TransportNetwork, origins: &[usize]) -> Result<CostTable, TransportError> {
    for &o in origins {
        net.check_node(o)?;
    }
    let costs = origins.iter().map(|&o| dijkstra(net, o).0).collect();
    Ok(CostTable {
        origins: origins.to_vec(),
        costs,
    })
}

/// Same table computed by solving the routing program for every
/// origin/destination pair.
pub fn all_pairs_costs_milp(net: &TransportNetwork, origins: &[usize]) -> Result<CostTable, TransportError> {
    let mut costs = Vec::with_capacity(origins.len());
    for &o in origins {
        net.check_node(o)?;
        let row = (1..=net.node_count)
            .map(|d| solve_route(net, o, d).map(|r| r.map(|r| r.total_cost)))
            .collect::<Result<Vec<_>, _>>()?;
        costs.push(row);
    }
    Ok(CostTable {
        origins: origins.to_vec(),
        costs,
    })
}

/// Seeded random network that is strongly connected by construction: a
/// random Hamiltonian cycle plus `extra_edges` additional edges, with
/// integer weights drawn uniformly from `weights`. With `symmetric` set every
/// road is two-way with the same weight in both directions.
pub fn random_network(
    node_count: usize,
    extra_edges: usize,
    symmetric: bool,
    weights: std::ops::RangeInclusive<u32>,
    seed: u64,
) -> TransportNetwork {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    assert!(node_count >= 2, "need at least two nodes");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (1..=node_count).collect();
    order.shuffle(&mut rng);

    let mut roads: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let add = |rng: &mut rand_chacha::ChaCha8Rng, roads: &mut BTreeMap<(usize, usize), f64>, a: usize, b: usize| {
        let key = if symmetric { (a.min(b), a.max(b)) } else { (a, b) };
        if a == b || roads.contains_key(&key) {
            return false;
        }
        roads.insert(key, f64::from(rng.gen_range(weights.clone())));
        true
    };
    for k in 0..node_count {
        add(&mut rng, &mut roads, order[k], order[(k + 1) % node_count]);
    }
    let capacity = if symmetric {
        node_count * (node_count - 1) / 2
    } else {
        node_count * (node_count - 1)
    };
    let mut added = 0;
    while added < extra_edges && roads.len() < capacity {
        let a = rng.gen_range(1..=node_count);
        let b = rng.gen_range(1..=node_count);
        if add(&mut rng, &mut roads, a, b) {
            added += 1;
        }
    }

    let mut edges = Vec::new();
    for (&(a, b), &w) in &roads {
        edges.push(Edge { from: a, to: b, weight: w });
        if symmetric {
            edges.push(Edge { from: b, to: a, weight: w });
        }
    }
    TransportNetwork::new(node_count, edges).expect("generated network is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(from: usize, to: usize, weight: f64) -> Edge {
        Edge { from, to, weight }
    }

    fn diamond() -> TransportNetwork {
        TransportNetwork::new(
            4,
            vec![edge(1, 2, 1.0), edge(1, 3, 4.0), edge(2, 4, 5.0), edge(3, 4, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn single_edge_model() {
        let net = TransportNetwork::new(2, vec![edge(1, 2, 3.0)]).unwrap();
        let routing = build_routing_model(&net, 1, 2).unwrap();
        assert_eq!(routing.model.binaries().count(), 1);
        let sol = milp::solve_milp(&routing.model).unwrap();
        assert_eq!(sol.objective, 3.0);
        assert_eq!(solve_route(&net, 1, 2).unwrap().unwrap().total_cost, 3.0);
    }

    #[test]
    fn diamond_prefers_lower_branch() {
        // Paths: 1-2-4 costs 6, 1-3-4 costs 5.
        let net = diamond();
        let sol = milp::solve_milp(&build_routing_model(&net, 1, 4).unwrap().model).unwrap();
        assert_eq!(sol.objective, 5.0);
        let expected = vec![edge(1, 3, 4.0), edge(3, 4, 1.0)];
        let dijkstra = shortest_path(&net, 1, 4).unwrap().unwrap();
        let milp = solve_route(&net, 1, 4).unwrap().unwrap();
        assert_eq!(dijkstra.edges, expected);
        assert_eq!(dijkstra.total_cost, 5.0);
        assert_eq!(milp, dijkstra);
    }

    #[test]
    fn closed_inbound_edges_make_destination_unreachable() {
        let mut net = diamond();
        net.restrict(2, 4).unwrap();
        net.restrict(3, 4).unwrap();
        let sol = milp::solve_milp(&build_routing_model(&net, 1, 4).unwrap().model).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(solve_route(&net, 1, 4).unwrap().is_none());
        assert!(shortest_path(&net, 1, 4).unwrap().is_none());
    }

    #[test]
    fn closure_on_unique_path_is_no_route() {
        let mut net = TransportNetwork::new(3, vec![edge(1, 2, 2.0), edge(2, 3, 2.0)]).unwrap();
        net.restrict(2, 3).unwrap();
        assert!(solve_route(&net, 1, 3).unwrap().is_none());
    }

    #[test]
    fn same_endpoints() {
        let net = diamond();
        assert!(matches!(build_routing_model(&net, 2, 2), Err(TransportError::SameEndpoints { node: 2 })));
        let stay = shortest_path(&net, 2, 2).unwrap().unwrap();
        assert_eq!(stay.total_cost, 0.0);
        assert!(stay.edges.is_empty());
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            TransportNetwork::new(2, vec![edge(1, 3, 1.0)]),
            Err(TransportError::InvalidNode { node: 3, .. })
        ));
        assert!(matches!(TransportNetwork::new(2, vec![edge(2, 2, 1.0)]), Err(TransportError::SelfLoop { .. })));
        assert!(matches!(
            TransportNetwork::new(2, vec![edge(1, 2, 0.0)]),
            Err(TransportError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            TransportNetwork::new(2, vec![edge(1, 2, 1.0), edge(1, 2, 2.0)]),
            Err(TransportError::DuplicateEdge { .. })
        ));
        assert!(matches!(build_routing_model(&diamond(), 1, 9), Err(TransportError::InvalidNode { .. })));
    }

    #[test]
    fn cost_table_rows() {
        let net = diamond();
        let table = all_pairs_costs(&net, &[1, 4]).unwrap();
        assert_eq!(table.costs[0], vec![Some(0.0), Some(1.0), Some(4.0), Some(5.0)]);
        // Node 4 has no outgoing edges.
        assert_eq!(table.costs[1], vec![None, None, None, Some(0.0)]);
        assert_eq!(all_pairs_costs_milp(&net, &[1, 4]).unwrap(), table);
    }

    #[test]
    fn antiparallel_pairs_get_one_row_each() {
        let net = TransportNetwork::new(3, vec![edge(1, 2, 1.0), edge(2, 1, 1.0), edge(2, 3, 1.0), edge(3, 2, 1.0)]).unwrap();
        let routing = build_routing_model(&net, 1, 3).unwrap();
        let once = routing.model.constraints().iter().filter(|c| c.name.starts_with("once_")).count();
        assert_eq!(once, 2);
    }
}
