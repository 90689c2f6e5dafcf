use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::dispatch::{Assignment, DispatchPlan};
use crate::grid::OpfSolution;

/// Bumped whenever a field of [`Report`] changes meaning or is removed.
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Machine-readable result document. Serialized as JSON; numbers are
/// written in shortest round-trip form, so parsing a rendered report gives
/// back identical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub scenario: String,
    /// The vehicle-free optimum, when it was computed.
    pub baseline: Option<OpfSolution>,
    /// The vehicle dispatch, absent for baseline-only runs.
    pub plan: Option<DispatchPlan>,
    /// `100 · (baseline − plan) / baseline` when both are present.
    pub cost_reduction_percent: Option<f64>,
}

impl Report {
    pub fn new(scenario: impl Into<String>, baseline: Option<OpfSolution>, plan: Option<DispatchPlan>) -> Self {
        let cost_reduction_percent = match (&baseline, &plan) {
            (Some(b), Some(p)) if b.objective != 0.0 => Some(100.0 * (b.objective - p.objective) / b.objective),
            _ => None,
        };
        Self {
            format_version: REPORT_FORMAT_VERSION,
            scenario: scenario.into(),
            baseline,
            plan,
            cost_reduction_percent,
        }
    }
}

pub fn render_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report fields are always serializable")
}

pub fn parse_report(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}

/// Plain-text rendering for terminals.
pub fn render_human(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario            {}", report.scenario);
    if let Some(p) = &report.plan {
        let _ = writeln!(out, "objective           {:>14.4} $/h", p.objective);
        let _ = writeln!(out, "  generation        {:>14.4}", p.breakdown.generation_cost);
        let _ = writeln!(out, "  vehicle energy    {:>14.4}", p.breakdown.vehicle_energy_cost);
        let _ = writeln!(out, "  travel            {:>14.4}", p.breakdown.travel_cost);
    }
    if let Some(b) = &report.baseline {
        let _ = writeln!(out, "baseline objective  {:>14.4} $/h", b.objective);
    }
    if let Some(r) = report.cost_reduction_percent {
        let _ = writeln!(out, "cost reduction      {r:>14.4} %");
    }
    let Some(p) = &report.plan else {
        return out;
    };
    let _ = writeln!(
        out,
        "solver              {} nodes, {} LP iterations, {:.3} s",
        p.stats.nodes_explored, p.stats.lp_iterations, p.stats.wall_time
    );
    if p.vehicles.is_empty() {
        return out;
    }
    let _ = writeln!(
        out,
        "\n{:<10} {:>6} {:>12} {:>12} {:>12} {:>8}  route",
        "fleet", "origin", "destination", "setpoint_mw", "injected_mw", "travel"
    );
    for v in &p.vehicles {
        let dest = match v.destination {
            Assignment::Node(n) => n.to_string(),
            Assignment::Undispatched => "-".to_string(),
        };
        let route = v.route.as_ref().map_or_else(
            || "-".to_string(),
            |r| r.nodes().iter().map(usize::to_string).collect::<Vec<_>>().join(" -> "),
        );
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>12} {:>12.4} {:>12.4} {:>8}  {route}",
            v.fleet, v.origin, dest, v.setpoint, v.injection, v.travel_cost
        );
    }
    out
}
