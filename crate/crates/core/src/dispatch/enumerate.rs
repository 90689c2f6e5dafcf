use std::time::Instant;

use super::{assemble_plan, validate_fleets, Assignment, DispatchError, DispatchOptions, DispatchPlan, PlanMethod, Subsystem, VehicleDispatch, VehicleFleet};
use crate::grid::{self, GridCase};
use crate::milp::{self, SolveStats, SolveStatus};

struct Outcome {
    index: u64,
    objective: f64,
    values: Vec<f64>,
}

/// Solves the dispatch problem without the envelope by enumerating every
/// assignment of fleets to `{undispatched} ∪ candidate nodes` and solving
/// one LP per assignment, in which the fleet setpoint enters the chosen
/// bus balance directly. The cheapest assignment wins; ties go to the
/// assignment enumerated first (fleet 0 varies fastest, undispatched before
/// nodes in ascending order). Work is split across threads, but the result
/// does not depend on the split.
pub fn brute_force_dispatch(
    case: &GridCase,
    fleets: &[VehicleFleet],
    opts: &DispatchOptions,
) -> Result<DispatchPlan, DispatchError> {
    validate_fleets(case, fleets)?;
    let started = Instant::now();
    let n = case.bus_count();
    let choices: Vec<Vec<Assignment>> = fleets
        .iter()
        .map(|f| {
            std::iter::once(Assignment::Undispatched)
                .chain(f.candidates(n).into_iter().map(Assignment::Node))
                .collect()
        })
        .collect();
    let count = choices.iter().try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128));
    let count = match count {
        Some(c) if c <= u128::from(opts.enumeration_cap) => c as u64,
        Some(c) => return Err(DispatchError::EnumerationCap { count: c, cap: opts.enumeration_cap }),
        None => return Err(DispatchError::EnumerationCap { count: u128::MAX, cap: opts.enumeration_cap }),
    };

    let decode = |mut index: u64| -> Vec<Assignment> {
        choices
            .iter()
            .map(|c| {
                let radix = c.len() as u64;
                let pick = c[(index % radix) as usize];
                index /= radix;
                pick
            })
            .collect()
    };

    let solve_one = |index: u64| -> Result<(Option<Outcome>, SolveStats), DispatchError> {
        let assignment = decode(index);
        let mut opf = grid::build_baseline_opf(case)?;
        let mut travel = 0.0;
        for (f, a) in fleets.iter().zip(&assignment) {
            let p = opf.model.add_continuous(format!("p_{}", f.id), f.p_min, f.p_max, f.energy_cost);
            if let Assignment::Node(node) = *a {
                opf.model.add_term(opf.layout.balance_rows[node - 1], p, -1.0);
                travel += f.travel_costs[node - 1].unwrap_or(0.0);
            }
        }
        let sol = milp::solve_lp_with(&opf.model, &opts.solver)?;
        let outcome = match sol.status {
            SolveStatus::Optimal => Some(Outcome {
                index,
                objective: sol.objective + opts.travel_cost_scale * travel,
                values: sol.values,
            }),
            SolveStatus::Infeasible => None,
            SolveStatus::Unbounded => return Err(DispatchError::Unbounded),
        };
        Ok((outcome, sol.stats))
    };

    let better = |a: &Outcome, b: &Outcome| (a.objective, a.index) < (b.objective, b.index);

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(count.max(1) as usize) as u64;
    let chunk = count.div_ceil(workers.max(1));
    let results: Vec<Result<(Option<Outcome>, SolveStats), DispatchError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let solve_one = &solve_one;
                scope.spawn(move || {
                    let mut best: Option<Outcome> = None;
                    let mut stats = SolveStats::default();
                    for index in (w * chunk)..((w + 1) * chunk).min(count) {
                        let (outcome, s) = solve_one(index)?;
                        stats.lp_iterations += s.lp_iterations;
                        stats.nodes_explored += 1;
                        if let Some(o) = outcome {
                            if best.as_ref().is_none_or(|b| better(&o, b)) {
                                best = Some(o);
                            }
                        }
                    }
                    Ok((best, stats))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("enumeration worker panicked")).collect()
    });

    let mut best: Option<Outcome> = None;
    let mut stats = SolveStats::default();
    for r in results {
        let (outcome, s) = r?;
        stats.absorb(&s);
        if let Some(o) = outcome {
            if best.as_ref().is_none_or(|b| better(&o, b)) {
                best = Some(o);
            }
        }
    }
    stats.wall_time = started.elapsed().as_secs_f64();
    let Some(best) = best else {
        let relaxed: Vec<VehicleFleet> = fleets.iter().map(|f| VehicleFleet { p_min: 0.0, ..f.clone() }).collect();
        let subsystem = if fleets.iter().any(|f| f.p_min > 0.0) && brute_force_dispatch(case, &relaxed, opts).is_ok() {
            Subsystem::FleetBounds
        } else {
            Subsystem::Grid
        };
        return Err(DispatchError::Infeasible { subsystem });
    };

    let assignment = decode(best.index);
    let opf = grid::build_baseline_opf(case)?;
    let base_vars = opf.model.num_vars();
    let mut injections = vec![0.0; n];
    let mut vehicles = Vec::with_capacity(fleets.len());
    for (k, (f, a)) in fleets.iter().zip(&assignment).enumerate() {
        let setpoint = best.values[base_vars + k];
        let mut selection = vec![0.0; n];
        let (injection, travel_cost) = match *a {
            Assignment::Node(node) => {
                injections[node - 1] += setpoint;
                selection[node - 1] = 1.0;
                (setpoint, f.travel_costs[node - 1].unwrap_or(0.0))
            }
            Assignment::Undispatched => (0.0, 0.0),
        };
        vehicles.push(VehicleDispatch {
            fleet: f.id.clone(),
            origin: f.origin,
            destination: *a,
            route: None,
            setpoint,
            injection,
            travel_cost,
            selection,
        });
    }
    let state = opf.layout.state(case, &best.values, injections);
    Ok(assemble_plan(case, fleets, PlanMethod::Enumeration, state, vehicles, opts, stats))
}
