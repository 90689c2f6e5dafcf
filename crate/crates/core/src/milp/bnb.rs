use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::debug;

use super::{simplex, MilpModel, MilpSolution, SolveError, SolveStats, SolveStatus, SolverOptions};

struct Node {
    bound: f64,
    seq: u64,
    bounds: Vec<(f64, f64)>,
    relaxation: MilpSolution,
}

// Min-heap on (bound, seq).
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Most fractional binary; ties go to the lowest index.
fn branching_var(values: &[f64], binaries: &[usize], tol: f64) -> Option<usize> {
    let mut best = None;
    let mut best_dist = tol;
    for &j in binaries {
        let frac = values[j] - values[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist > best_dist {
            best_dist = dist;
            best = Some(j);
        }
    }
    best
}

pub(super) fn branch_and_bound(model: &MilpModel, opts: &SolverOptions) -> Result<MilpSolution, SolveError> {
    let binaries: Vec<usize> = model.binaries().map(|v| v.index()).collect();
    let root_bounds: Vec<(f64, f64)> = model.variables().iter().map(|v| (v.lower, v.upper)).collect();

    let mut stats = SolveStats::default();
    let root = simplex::solve(model, Some(&root_bounds), opts)?;
    stats.nodes_explored = 1;
    stats.lp_iterations = root.stats.lp_iterations;
    if root.status != SolveStatus::Optimal {
        return Ok(MilpSolution::without_point(root.status, stats));
    }

    let cutoff = |incumbent: &Option<MilpSolution>| {
        incumbent
            .as_ref()
            .map_or(f64::INFINITY, |s| s.objective - opts.relative_gap * s.objective.abs().max(1.0))
    };

    let mut incumbent: Option<MilpSolution> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    if branching_var(&root.values, &binaries, opts.integrality_tol).is_none() {
        incumbent = Some(root);
    } else {
        heap.push(Node {
            bound: root.objective,
            seq,
            bounds: root_bounds,
            relaxation: root,
        });
    }

    while let Some(node) = heap.pop() {
        if node.bound >= cutoff(&incumbent) {
            // Best-bound order: nothing left can improve.
            break;
        }
        let Some(var) = branching_var(&node.relaxation.values, &binaries, opts.integrality_tol) else {
            continue;
        };
        for fixed in [0.0, 1.0] {
            if stats.nodes_explored >= opts.max_nodes {
                return Err(SolveError::NodeLimit {
                    limit: opts.max_nodes,
                    incumbent: incumbent.map(|mut s| {
                        s.stats = stats;
                        Box::new(s)
                    }),
                });
            }
            let (lo, hi) = node.bounds[var];
            if fixed < lo || fixed > hi {
                continue;
            }
            let mut bounds = node.bounds.clone();
            bounds[var] = (fixed, fixed);
            let child = simplex::solve(model, Some(&bounds), opts)?;
            stats.nodes_explored += 1;
            stats.lp_iterations += child.stats.lp_iterations;
            match child.status {
                SolveStatus::Infeasible => continue,
                SolveStatus::Unbounded => {
                    return Err(SolveError::Numerical("bounded relaxation produced an unbounded child".into()));
                }
                SolveStatus::Optimal => {}
            }
            if child.objective >= cutoff(&incumbent) {
                continue;
            }
            if branching_var(&child.values, &binaries, opts.integrality_tol).is_none() {
                debug!("incumbent {} after {} nodes", child.objective, stats.nodes_explored);
                incumbent = Some(child);
            } else {
                seq += 1;
                heap.push(Node {
                    bound: child.objective,
                    seq,
                    bounds,
                    relaxation: child,
                });
            }
        }
    }

    Ok(match incumbent {
        Some(mut best) => {
            best.duals = None;
            best.stats = stats;
            best
        }
        None => MilpSolution::without_point(SolveStatus::Infeasible, stats),
    })
}
