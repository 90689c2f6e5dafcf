//! `fleetgrid` command-line tool.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible or no route,
//! 3 resource limit, 4 `verify` found a gap above tolerance.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use fleetgrid::dispatch::{brute_force_dispatch, build_fleets, run_schedule, Closure, DispatchError, PlanMethod, ScheduleError};
use fleetgrid::grid::{solve_baseline_opf, GridError};
use fleetgrid::io::{self, render_human, render_json, Report, Scenario};
use fleetgrid::transport::{self, all_pairs_costs, RouteSolution, TransportError, TransportNetwork};
use serde::Serialize;

use crate::config::Config;

/// Relative objective gap tolerated by `verify`.
const VERIFY_TOLERANCE: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "fleetgrid", version, about = "Dispatch vehicle fleets as mobile grid batteries")]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// TOML file overriding tolerances and the travel cost scale.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cheapest route between two nodes, found with the routing program.
    Route {
        /// Bundled scenario name, scenario manifest, or transport file (`.net`).
        scenario: String,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[command(flatten)]
        closures: ClosureArgs,
    },
    /// Schedule fleets and report the plan and its saving over the baseline.
    Dispatch {
        scenario: String,
        /// Solve only the vehicle-free power flow.
        #[arg(long)]
        baseline: bool,
        /// Use the enumeration oracle instead of the MILP.
        #[arg(long)]
        enumerate: bool,
        #[command(flatten)]
        closures: ClosureArgs,
    },
    /// Compare the MILP against exhaustive enumeration.
    Verify { scenario: String },
    /// Time repeated dispatch solves.
    Bench {
        #[arg(required = true)]
        scenarios: Vec<String>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

#[derive(clap::Args)]
struct ClosureArgs {
    /// Close the directed road FROM-TO; repeatable.
    #[arg(long = "close", value_name = "FROM-TO", value_parser = parse_edge)]
    edges: Vec<(usize, usize)>,
    /// Close every road touching NODE; repeatable.
    #[arg(long = "close-node", value_name = "NODE")]
    nodes: Vec<usize>,
}

impl ClosureArgs {
    fn closures(&self) -> impl Iterator<Item = Closure> + '_ {
        self.edges
            .iter()
            .map(|&(from, to)| Closure::Edge { from, to })
            .chain(self.nodes.iter().map(|&n| Closure::Node(n)))
    }
}

fn parse_edge(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('-').ok_or("expected FROM-TO")?;
    Ok((a.parse().map_err(|_| "bad FROM")?, b.parse().map_err(|_| "bad TO")?))
}

/// Failure classes, one per nonzero exit code.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Infeasible(anyhow::Error),
    Resource(anyhow::Error),
    Gap(f64),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Gap(_) => 4,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<ScheduleError> for Failure {
    fn from(e: ScheduleError) -> Self {
        if e.is_infeasible() {
            Failure::Infeasible(e.into())
        } else if e.is_resource_limit() {
            Failure::Resource(e.into())
        } else {
            Failure::Input(e.into())
        }
    }
}

impl From<DispatchError> for Failure {
    fn from(e: DispatchError) -> Self {
        if e.is_infeasible() {
            Failure::Infeasible(e.into())
        } else if e.is_resource_limit() {
            Failure::Resource(e.into())
        } else {
            Failure::Input(e.into())
        }
    }
}

impl From<GridError> for Failure {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Infeasible => Failure::Infeasible(e.into()),
            GridError::Solver(ref s) if s.is_resource_limit() => Failure::Resource(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

impl From<TransportError> for Failure {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::Solver(ref s) if s.is_resource_limit() => Failure::Resource(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FLEETGRID_LOG")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(e) | Failure::Infeasible(e) | Failure::Resource(e) => eprintln!("error: {}", describe(e)),
                Failure::Gap(gap) => eprintln!("error: relative gap {gap:e} exceeds {VERIFY_TOLERANCE:e}"),
            }
            ExitCode::from(f.code())
        }
    }
}

/// Error chain joined with `: `, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    let mut last = out.clone();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !last.contains(&text) {
            out = format!("{out}: {text}");
        }
        last = text;
    }
    out
}

fn load(cli: &Cli, name: &str) -> Result<Scenario, Failure> {
    let mut s = io::load_scenario(name).map_err(|e| anyhow!(e))?;
    if let Some(path) = &cli.config {
        Config::load(path)?.apply(&mut s.options);
    }
    log::info!("loaded {} with {} buses and {} fleets", s.name, s.grid.bus_count(), s.fleets.len());
    Ok(s)
}

fn print<T: Serialize>(json: bool, value: &T, human: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
    } else {
        print!("{}", human());
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Route { scenario, from, to, closures } => route(cli, scenario, *from, *to, closures),
        Command::Dispatch {
            scenario,
            baseline,
            enumerate,
            closures,
        } => dispatch(cli, scenario, *baseline, *enumerate, closures),
        Command::Verify { scenario } => verify(cli, scenario),
        Command::Bench { scenarios, repeats } => bench(cli, scenarios, *repeats),
    }
}

#[derive(Serialize)]
struct RouteReport {
    format_version: u32,
    from: usize,
    to: usize,
    route: Option<RouteSolution>,
}

fn route(cli: &Cli, scenario: &str, from: usize, to: usize, extra: &ClosureArgs) -> Result<(), Failure> {
    let mut net: TransportNetwork = if scenario.ends_with(".net") {
        let text = std::fs::read_to_string(scenario).with_context(|| format!("cannot read {scenario}"))?;
        io::parse_transport(&text, scenario).map_err(|e| anyhow!(e))?
    } else {
        load(cli, scenario)?.closed_network()
    };
    for c in extra.closures() {
        match c {
            Closure::Edge { from, to } => net.restrict(from, to)?,
            Closure::Node(n) => net.isolate(n),
        }
    }
    let found = transport::solve_route(&net, from, to)?;
    let report = RouteReport {
        format_version: io::REPORT_FORMAT_VERSION,
        from,
        to,
        route: found.clone(),
    };
    print(cli.json, &report, || match &found {
        Some(r) => {
            let path: Vec<String> = r.nodes().iter().map(usize::to_string).collect();
            format!("route {}\ncost  {}\n", path.join(" -> "), r.total_cost)
        }
        None => format!("no route from {from} to {to}\n"),
    });
    match found {
        Some(_) => Ok(()),
        None => Err(Failure::Infeasible(anyhow!("no route from {from} to {to}"))),
    }
}

fn dispatch(cli: &Cli, scenario: &str, baseline_only: bool, enumerate: bool, extra: &ClosureArgs) -> Result<(), Failure> {
    let s = load(cli, scenario)?;
    let baseline = solve_baseline_opf(&s.grid, &s.options.solver)?;
    let plan = if baseline_only {
        None
    } else {
        let closures: Vec<Closure> = s.closures.iter().copied().chain(extra.closures()).collect();
        let method = if enumerate { PlanMethod::Enumeration } else { PlanMethod::Milp };
        Some(run_schedule(&s.grid, &s.transport, &s.fleets, &closures, method, &s.options)?)
    };
    let report = Report::new(&s.name, Some(baseline), plan);
    if cli.json {
        println!("{}", render_json(&report));
    } else {
        print!("{}", render_human(&report));
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    format_version: u32,
    scenario: String,
    milp_objective: f64,
    enumeration_objective: f64,
    relative_gap: f64,
    enumerated_lps: u64,
    milp_nodes: u64,
}

fn verify(cli: &Cli, scenario: &str) -> Result<(), Failure> {
    let s = load(cli, scenario)?;
    let milp = run_schedule(&s.grid, &s.transport, &s.fleets, &s.closures, PlanMethod::Milp, &s.options)?;
    // Same fleets, same exclusions: rebuild them for the oracle.
    let net = s.closed_network();
    let origins: Vec<usize> = s.fleets.iter().map(|f| f.origin).collect();
    let table = all_pairs_costs(&net, &origins)?;
    let fleets = build_fleets(&s.fleets, &table);
    let oracle = brute_force_dispatch(&s.grid, &fleets, &s.options)?;

    let gap = (milp.objective - oracle.objective).abs() / milp.objective.abs().max(oracle.objective.abs()).max(1.0);
    let report = VerifyReport {
        format_version: io::REPORT_FORMAT_VERSION,
        scenario: s.name.clone(),
        milp_objective: milp.objective,
        enumeration_objective: oracle.objective,
        relative_gap: gap,
        enumerated_lps: oracle.stats.nodes_explored,
        milp_nodes: milp.stats.nodes_explored,
    };
    print(cli.json, &report, || {
        format!(
            "scenario            {}\nmilp objective      {:.6}\nenumeration         {:.6}\nrelative gap        {:e}\nenumerated LPs      {}\nmilp nodes          {}\n",
            report.scenario, report.milp_objective, report.enumeration_objective, gap, report.enumerated_lps, report.milp_nodes
        )
    });
    if gap > VERIFY_TOLERANCE {
        return Err(Failure::Gap(gap));
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    scenario: String,
    buses: usize,
    fleets: usize,
    binaries: usize,
    min_seconds: f64,
    median_seconds: f64,
    max_seconds: f64,
}

fn bench(cli: &Cli, scenarios: &[String], repeats: usize) -> Result<(), Failure> {
    if repeats == 0 {
        return Err(Failure::Input(anyhow!("--repeats must be at least 1")));
    }
    let mut rows = Vec::with_capacity(scenarios.len());
    for name in scenarios {
        let s = load(cli, name)?;
        let mut times = Vec::with_capacity(repeats);
        let mut binaries = 0;
        for _ in 0..repeats {
            let started = Instant::now();
            let plan = run_schedule(&s.grid, &s.transport, &s.fleets, &s.closures, PlanMethod::Milp, &s.options)?;
            times.push(started.elapsed().as_secs_f64());
            binaries = plan.vehicles.iter().map(|v| v.selection.len()).sum();
        }
        times.sort_by(f64::total_cmp);
        let mid = times.len() / 2;
        let median = if times.len() % 2 == 1 { times[mid] } else { 0.5 * (times[mid - 1] + times[mid]) };
        rows.push(BenchRow {
            scenario: s.name.clone(),
            buses: s.grid.bus_count(),
            fleets: s.fleets.len(),
            binaries,
            min_seconds: times[0],
            median_seconds: median,
            max_seconds: times[times.len() - 1],
        });
    }
    print(cli.json, &rows, || {
        let mut out = format!("computation time in seconds over {repeats} runs\n");
        out += &format!(
            "{:<16} {:>6} {:>6} {:>9} {:>10} {:>10} {:>10}\n",
            "case", "buses", "fleets", "binaries", "min", "median", "max"
        );
        for r in &rows {
            out += &format!(
                "{:<16} {:>6} {:>6} {:>9} {:>10.4} {:>10.4} {:>10.4}\n",
                r.scenario, r.buses, r.fleets, r.binaries, r.min_seconds, r.median_seconds, r.max_seconds
            );
        }
        out
    });
    Ok(())
}
