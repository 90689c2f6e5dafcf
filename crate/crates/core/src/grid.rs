//! DC power network model and the vehicle-free optimal power flow.
//!
//! Line flows follow the lossless DC approximation `f = B·(θ_from − θ_to)`
//! where `B = base_mva · b` converts the per-unit susceptance `b` into
//! MW per radian. Power and flows are in MW throughout.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{self, ConstraintId, MilpModel, Sense, SolveError, SolveStats, SolveStatus, SolverOptions, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    /// MW.
    pub load: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    /// Per-unit on the case base; the inverse of the line reactance.
    pub susceptance: f64,
    /// MW, may be `-inf`.
    pub flow_min: f64,
    /// MW, may be `+inf`.
    pub flow_max: f64,
}

/// One piece of a convex piecewise-linear cost curve: output between the
/// previous breakpoint (or 0) and `up_to` MW costs `price` per MWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSegment {
    pub up_to: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub cost: Vec<CostSegment>,
}

impl Generator {
    pub fn linear(bus: usize, p_min: f64, p_max: f64, price: f64) -> Self {
        Self {
            bus,
            p_min,
            p_max,
            cost: vec![CostSegment { up_to: p_max, price }],
        }
    }

    pub fn is_linear(&self) -> bool {
        self.cost.len() == 1
    }

    /// $/h at output `p`.
    pub fn cost_at(&self, p: f64) -> f64 {
        let mut total = 0.0;
        let mut from = 0.0;
        for (k, seg) in self.cost.iter().enumerate() {
            let last = k + 1 == self.cost.len();
            let to = if last { p } else { seg.up_to.min(p) };
            if to > from {
                total += seg.price * (to - from);
            }
            from = seg.up_to;
            if from >= p {
                break;
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCase {
    pub name: String,
    /// MVA base for the per-unit susceptances.
    pub base_mva: f64,
    pub ref_bus: usize,
    /// `buses[k].id == k + 1`.
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
}

#[derive(Debug, Clone, Error)]
pub enum GridError {
    #[error("bus ids must be 1..=N in order; found {found} at position {position}")]
    BusNumbering { position: usize, found: usize },
    #[error("case has no buses")]
    Empty,
    #[error("base MVA must be positive, got {0}")]
    BaseMva(f64),
    #[error("reference bus {0} does not exist")]
    RefBus(usize),
    #[error("line {index} references bus {bus} which does not exist")]
    LineBus { index: usize, bus: usize },
    #[error("line {index} connects bus {bus} to itself")]
    LineLoop { index: usize, bus: usize },
    #[error("line {index} susceptance must be positive and finite, got {value}")]
    Susceptance { index: usize, value: f64 },
    #[error("line {index} flow limits [{min}, {max}] are inverted or NaN")]
    FlowLimits { index: usize, min: f64, max: f64 },
    #[error("generator {index} is at bus {bus} which does not exist")]
    GenBus { index: usize, bus: usize },
    #[error("generator {index} limits [{min}, {max}] are invalid")]
    GenLimits { index: usize, min: f64, max: f64 },
    #[error("generator {index} cost curve is invalid: {reason}")]
    GenCost { index: usize, reason: String },
    #[error("bus {bus} load is not finite")]
    Load { bus: usize },
    #[error("network is disconnected: bus {bus} is unreachable from bus 1")]
    Disconnected { bus: usize },
    #[error("optimal power flow is infeasible")]
    Infeasible,
    #[error("optimal power flow is unbounded")]
    Unbounded,
    #[error(transparent)]
    Solver(#[from] SolveError),
}

impl GridCase {
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn total_load(&self) -> f64 {
        self.buses.iter().map(|b| b.load).sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    /// MW per radian of angle difference across `line`.
    pub fn flow_coefficient(&self, line: &Line) -> f64 {
        self.base_mva * line.susceptance
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let n = self.buses.len();
        if n == 0 {
            return Err(GridError::Empty);
        }
        if !(self.base_mva > 0.0 && self.base_mva.is_finite()) {
            return Err(GridError::BaseMva(self.base_mva));
        }
        for (k, b) in self.buses.iter().enumerate() {
            if b.id != k + 1 {
                return Err(GridError::BusNumbering { position: k, found: b.id });
            }
            if !b.load.is_finite() {
                return Err(GridError::Load { bus: b.id });
            }
        }
        let valid = |bus: usize| bus >= 1 && bus <= n;
        if !valid(self.ref_bus) {
            return Err(GridError::RefBus(self.ref_bus));
        }
        for (index, l) in self.lines.iter().enumerate() {
            for bus in [l.from, l.to] {
                if !valid(bus) {
                    return Err(GridError::LineBus { index, bus });
                }
            }
            if l.from == l.to {
                return Err(GridError::LineLoop { index, bus: l.from });
            }
            if !(l.susceptance > 0.0 && l.susceptance.is_finite()) {
                return Err(GridError::Susceptance { index, value: l.susceptance });
            }
            if l.flow_min.is_nan() || l.flow_max.is_nan() || l.flow_min > l.flow_max {
                return Err(GridError::FlowLimits {
                    index,
                    min: l.flow_min,
                    max: l.flow_max,
                });
            }
        }
        for (index, g) in self.generators.iter().enumerate() {
            if !valid(g.bus) {
                return Err(GridError::GenBus { index, bus: g.bus });
            }
            if !(g.p_min.is_finite() && g.p_max.is_finite() && g.p_min <= g.p_max) {
                return Err(GridError::GenLimits {
                    index,
                    min: g.p_min,
                    max: g.p_max,
                });
            }
            validate_cost(g).map_err(|reason| GridError::GenCost { index, reason })?;
        }

        let mut adjacency = vec![Vec::new(); n + 1];
        for l in &self.lines {
            adjacency[l.from].push(l.to);
            adjacency[l.to].push(l.from);
        }
        let mut seen = vec![false; n + 1];
        let mut queue = VecDeque::from([1]);
        seen[1] = true;
        while let Some(b) = queue.pop_front() {
            for &nb in &adjacency[b] {
                if !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        if let Some(bus) = (1..=n).find(|&b| !seen[b]) {
            return Err(GridError::Disconnected { bus });
        }
        Ok(())
    }
}

fn validate_cost(g: &Generator) -> Result<(), String> {
    let Some(last) = g.cost.last() else {
        return Err("no cost segments".into());
    };
    let mut prev: Option<CostSegment> = None;
    for seg in &g.cost {
        if !seg.price.is_finite() || !seg.up_to.is_finite() {
            return Err("non-finite breakpoint or price".into());
        }
        if let Some(p) = prev {
            if seg.up_to <= p.up_to {
                return Err("breakpoints must increase".into());
            }
            if seg.price < p.price {
                return Err("marginal prices must not decrease".into());
            }
        }
        prev = Some(*seg);
    }
    if g.cost.len() > 1 && last.up_to < g.p_max {
        return Err(format!("curve ends at {} MW below p_max {}", last.up_to, g.p_max));
    }
    Ok(())
}

/// Line flow in the DC approximation.
pub fn dc_line_flow(susceptance: f64, theta_from: f64, theta_to: f64) -> f64 {
    susceptance * (theta_from - theta_to)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    /// Radians, per bus.
    pub angles: Vec<f64>,
    /// MW, per generator.
    pub gen_setpoints: Vec<f64>,
    /// MW, per line (positive from `from` to `to`).
    pub flows: Vec<f64>,
    /// MW injected at each bus by sources other than generators (vehicles).
    pub injections: Vec<f64>,
}

/// Variable handles of an OPF model.
#[derive(Debug, Clone)]
pub struct OpfLayout {
    pub gen_vars: Vec<VarId>,
    pub angle_vars: Vec<VarId>,
    /// Nodal balance row per bus: `Σ_lines B(θ_i − θ_j) − Σ p^g_i = −p^d_i`.
    /// Extra injections enter with coefficient −1.
    pub balance_rows: Vec<ConstraintId>,
}

impl OpfLayout {
    pub fn state(&self, case: &GridCase, values: &[f64], injections: Vec<f64>) -> GridState {
        let angles: Vec<f64> = self.angle_vars.iter().map(|v| values[v.index()]).collect();
        let flows = case
            .lines
            .iter()
            .map(|l| dc_line_flow(case.flow_coefficient(l), angles[l.from - 1], angles[l.to - 1]))
            .collect();
        GridState {
            gen_setpoints: self.gen_vars.iter().map(|v| values[v.index()]).collect(),
            angles,
            flows,
            injections,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OpfModel {
    pub model: MilpModel,
    pub layout: OpfLayout,
}

/// Continuous OPF over generator outputs and bus angles with no vehicle
/// support: minimize generation cost subject to generator limits, line flow
/// limits and nodal balance, with the reference angle fixed at zero.
pub fn build_baseline_opf(case: &GridCase) -> Result<OpfModel, GridError> {
    case.validate()?;
    let mut model = MilpModel::new(format!("opf {}", case.name));
    let n = case.bus_count();

    let mut gen_vars = Vec::with_capacity(case.generators.len());
    let mut segment_rows = Vec::new();
    for (k, g) in case.generators.iter().enumerate() {
        if g.is_linear() {
            gen_vars.push(model.add_continuous(format!("pg{}", k + 1), g.p_min, g.p_max, g.cost[0].price));
        } else {
            let p = model.add_continuous(format!("pg{}", k + 1), g.p_min, g.p_max, 0.0);
            let mut terms = vec![(p, 1.0)];
            let mut from = 0.0;
            for (s, seg) in g.cost.iter().enumerate() {
                let width = seg.up_to - from;
                let piece = model.add_continuous(format!("pg{}_seg{}", k + 1, s + 1), 0.0, width, seg.price);
                terms.push((piece, -1.0));
                from = seg.up_to;
            }
            segment_rows.push((format!("pg{}_curve", k + 1), terms));
            gen_vars.push(p);
        }
    }
    for (name, terms) in segment_rows {
        model.add_constraint(name, terms, Sense::Eq, 0.0);
    }

    let angle_vars: Vec<VarId> = (1..=n)
        .map(|b| {
            if b == case.ref_bus {
                model.add_continuous(format!("theta{b}"), 0.0, 0.0, 0.0)
            } else {
                model.add_continuous(format!("theta{b}"), f64::NEG_INFINITY, f64::INFINITY, 0.0)
            }
        })
        .collect();

    let mut balance_terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
    for (k, l) in case.lines.iter().enumerate() {
        let coef = case.flow_coefficient(l);
        let (ti, tj) = (angle_vars[l.from - 1], angle_vars[l.to - 1]);
        balance_terms[l.from - 1].extend([(ti, coef), (tj, -coef)]);
        balance_terms[l.to - 1].extend([(tj, coef), (ti, -coef)]);
        let flow = [(ti, coef), (tj, -coef)];
        if l.flow_min.is_finite() {
            model.add_constraint(format!("flow{}_min", k + 1), flow, Sense::Ge, l.flow_min);
        }
        if l.flow_max.is_finite() {
            model.add_constraint(format!("flow{}_max", k + 1), flow, Sense::Le, l.flow_max);
        }
    }
    for (g, &v) in case.generators.iter().zip(&gen_vars) {
        balance_terms[g.bus - 1].push((v, -1.0));
    }
    let balance_rows = balance_terms
        .into_iter()
        .enumerate()
        .map(|(i, terms)| model.add_constraint(format!("balance{}", i + 1), terms, Sense::Eq, -case.buses[i].load))
        .collect();

    Ok(OpfModel {
        model,
        layout: OpfLayout {
            gen_vars,
            angle_vars,
            balance_rows,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfSolution {
    /// $/h.
    pub objective: f64,
    pub state: GridState,
    pub stats: SolveStats,
}

pub fn solve_baseline_opf(case: &GridCase, opts: &SolverOptions) -> Result<OpfSolution, GridError> {
    let opf = build_baseline_opf(case)?;
    let sol = milp::solve_lp_with(&opf.model, opts)?;
    match sol.status {
        SolveStatus::Optimal => Ok(OpfSolution {
            objective: sol.objective,
            state: opf.layout.state(case, &sol.values, vec![0.0; case.bus_count()]),
            stats: sol.stats,
        }),
        SolveStatus::Infeasible => Err(GridError::Infeasible),
        SolveStatus::Unbounded => Err(GridError::Unbounded),
    }
}

pub fn generation_cost(case: &GridCase, setpoints: &[f64]) -> f64 {
    case.generators.iter().zip(setpoints).map(|(g, &p)| g.cost_at(p)).sum()
}

/// Seeded random case on `bus_count` buses: a random spanning tree plus up
/// to `extra_lines` more lines, loads of 0 to 40 MW, and one to three linear
/// generators whose capacity covers 1.5 times the load. Line limits are
/// drawn between 30 and 90 MW, so some instances congest or are infeasible.
pub fn random_case(bus_count: usize, extra_lines: usize, seed: u64) -> GridCase {
    use rand::{Rng, SeedableRng};

    assert!(bus_count >= 1, "a case needs at least one bus");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let buses: Vec<Bus> = (1..=bus_count)
        .map(|id| Bus {
            id,
            load: f64::from(rng.gen_range(0u32..=40)),
        })
        .collect();
    let mut pairs = std::collections::BTreeSet::new();
    for b in 2..=bus_count {
        let parent = rng.gen_range(1..b);
        pairs.insert((parent, b));
    }
    for _ in 0..extra_lines {
        let a = rng.gen_range(1..=bus_count);
        let b = rng.gen_range(1..=bus_count);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let lines = pairs
        .into_iter()
        .map(|(from, to)| {
            let limit = f64::from(rng.gen_range(30u32..=90));
            Line {
                from,
                to,
                susceptance: f64::from(rng.gen_range(2u32..=20)),
                flow_min: -limit,
                flow_max: limit,
            }
        })
        .collect();
    let load: f64 = buses.iter().map(|b| b.load).sum();
    let gen_count = rng.gen_range(1..=3usize.min(bus_count));
    let share = (1.5 * load / gen_count as f64).ceil().max(10.0);
    let generators = (0..gen_count)
        .map(|_| {
            let bus = rng.gen_range(1..=bus_count);
            Generator::linear(bus, 0.0, share, f64::from(rng.gen_range(10u32..=50)))
        })
        .collect();
    GridCase {
        name: format!("random-{bus_count}-{seed}"),
        base_mva: 1.0,
        ref_bus: 1,
        buses,
        lines,
        generators,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    ReferenceAngle { bus: usize },
    FlowEquation { line: usize },
    Balance { bus: usize },
    GeneratorLimit { generator: usize },
    FlowLimit { line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub magnitude: f64,
}

/// Checks a state against the DC model and operating limits. Anything
/// larger than `tol` is reported; an empty list means the state is valid.
/// Indices in the report are 1-based.
pub fn validate_state(case: &GridCase, state: &GridState, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, magnitude: f64| {
        if magnitude > tol {
            out.push(Violation { kind, magnitude });
        }
    };
    let theta_ref = state.angles[case.ref_bus - 1];
    push(ViolationKind::ReferenceAngle { bus: case.ref_bus }, theta_ref.abs());

    let mut net_out = vec![0.0; case.bus_count()];
    for (k, (l, &f)) in case.lines.iter().zip(&state.flows).enumerate() {
        let expected = dc_line_flow(case.flow_coefficient(l), state.angles[l.from - 1], state.angles[l.to - 1]);
        push(ViolationKind::FlowEquation { line: k + 1 }, (f - expected).abs());
        push(ViolationKind::FlowLimit { line: k + 1 }, (l.flow_min - f).max(f - l.flow_max).max(0.0));
        net_out[l.from - 1] += f;
        net_out[l.to - 1] -= f;
    }
    let mut supply: Vec<f64> = state.injections.clone();
    supply.resize(case.bus_count(), 0.0);
    for (k, (g, &p)) in case.generators.iter().zip(&state.gen_setpoints).enumerate() {
        push(ViolationKind::GeneratorLimit { generator: k + 1 }, (g.p_min - p).max(p - g.p_max).max(0.0));
        supply[g.bus - 1] += p;
    }
    for (i, bus) in case.buses.iter().enumerate() {
        let residual = net_out[i] - (supply[i] - bus.load);
        push(ViolationKind::Balance { bus: bus.id }, residual.abs());
    }
    out
}
