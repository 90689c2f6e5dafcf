//! Bounded-variable revised simplex with a dense basis inverse.
//!
//! Every row `a·x (sense) b` becomes `a·x + s = b` with a logical column `s`
//! whose bounds encode the sense. Phase 1 adds one artificial per row whose
//! logical cannot absorb the initial residual and minimizes their sum;
//! phase 2 then fixes the artificials at zero and optimizes the model
//! objective. Dantzig pricing is used until `degeneracy_stall` consecutive
//! degenerate pivots, after which Bland's rule takes over until the next
//! non-degenerate step.

use super::{MilpModel, MilpSolution, Sense, SolveError, SolveStats, SolveStatus, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic column held at zero.
    Zero,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex<'a> {
    opts: &'a SolverOptions,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    slot: Vec<Slot>,
    basis: Vec<usize>,
    /// Row-major `m × m`; row `i` belongs to basis position `i`.
    binv: Vec<f64>,
    iterations: u64,
    since_refactor: u32,
}

/// Solves the continuous relaxation of `model`, optionally with replacement
/// variable bounds. The model must already be validated.
pub(super) fn solve(
    model: &MilpModel,
    bounds: Option<&[(f64, f64)]>,
    opts: &SolverOptions,
) -> Result<MilpSolution, SolveError> {
    let n = model.num_vars();
    let m = model.num_constraints();

    let mut lower = Vec::with_capacity(n + 2 * m);
    let mut upper = Vec::with_capacity(n + 2 * m);
    for (j, v) in model.variables().iter().enumerate() {
        let (lo, hi) = bounds.map_or((v.lower, v.upper), |b| b[j]);
        if lo > hi {
            return Ok(MilpSolution::without_point(SolveStatus::Infeasible, SolveStats::default()));
        }
        lower.push(lo);
        upper.push(hi);
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(v, a) in &c.coeffs {
            if a != 0.0 {
                cols[v.index()].push((i, a));
            }
        }
    }
    let rhs: Vec<f64> = model.constraints().iter().map(|c| c.rhs).collect();

    let mut x: Vec<f64> = (0..n)
        .map(|j| {
            if lower[j].is_finite() {
                lower[j]
            } else if upper[j].is_finite() {
                upper[j]
            } else {
                0.0
            }
        })
        .collect();
    let mut slot: Vec<Slot> = (0..n)
        .map(|j| {
            if lower[j].is_finite() {
                Slot::Lower
            } else if upper[j].is_finite() {
                Slot::Upper
            } else {
                Slot::Zero
            }
        })
        .collect();

    let mut residual = rhs.clone();
    for (j, col) in cols.iter().enumerate() {
        for &(i, a) in col {
            residual[i] -= a * x[j];
        }
    }

    // Logical columns.
    for (i, c) in model.constraints().iter().enumerate() {
        let (lo, hi) = match c.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        cols.push(vec![(i, 1.0)]);
        lower.push(lo);
        upper.push(hi);
        x.push(0.0);
        slot.push(Slot::Lower);
    }

    let mut basis = vec![usize::MAX; m];
    let mut binv = vec![0.0; m * m];
    let mut artificials = Vec::new();
    for i in 0..m {
        let s = n + i;
        let r = residual[i];
        if r >= lower[s] && r <= upper[s] {
            x[s] = r;
            slot[s] = Slot::Basic;
            basis[i] = s;
            binv[i * m + i] = 1.0;
        } else {
            // Park the logical at its nearest bound; an artificial covers the rest.
            let parked = if r < lower[s] { lower[s] } else { upper[s] };
            x[s] = parked;
            slot[s] = if parked == lower[s] { Slot::Lower } else { Slot::Upper };
            let rest = r - parked;
            let sign = if rest >= 0.0 { 1.0 } else { -1.0 };
            let a = cols.len();
            cols.push(vec![(i, sign)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(rest.abs());
            slot.push(Slot::Basic);
            basis[i] = a;
            binv[i * m + i] = sign;
            artificials.push(a);
        }
    }

    let total = cols.len();
    let mut lp = Simplex {
        opts,
        m,
        cols,
        lower,
        upper,
        cost: vec![0.0; total],
        rhs,
        x,
        slot,
        basis,
        binv,
        iterations: 0,
        since_refactor: 0,
    };

    if !artificials.is_empty() {
        for &a in &artificials {
            lp.cost[a] = 1.0;
        }
        match lp.run()? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => {
                return Err(SolveError::Numerical("phase 1 reported an unbounded ray".into()));
            }
        }
        let infeasibility: f64 = artificials.iter().map(|&a| lp.x[a].max(0.0)).sum();
        if infeasibility > opts.feasibility_tol {
            let stats = SolveStats {
                lp_iterations: lp.iterations,
                ..SolveStats::default()
            };
            return Ok(MilpSolution::without_point(SolveStatus::Infeasible, stats));
        }
        for &a in &artificials {
            lp.cost[a] = 0.0;
            lp.upper[a] = 0.0;
            if lp.slot[a] != Slot::Basic {
                lp.x[a] = 0.0;
                lp.slot[a] = Slot::Lower;
            }
        }
    }

    for (j, v) in model.variables().iter().enumerate() {
        lp.cost[j] = v.objective;
    }
    let end = lp.run()?;
    let stats = SolveStats {
        lp_iterations: lp.iterations,
        ..SolveStats::default()
    };
    match end {
        PhaseEnd::Unbounded => Ok(MilpSolution::without_point(SolveStatus::Unbounded, stats)),
        PhaseEnd::Optimal => {
            let values: Vec<f64> = (0..n).map(|j| lp.x[j].clamp(lp.lower[j], lp.upper[j])).collect();
            let duals = lp.duals();
            Ok(MilpSolution {
                status: SolveStatus::Optimal,
                objective: model.objective_value(&values),
                values,
                duals: Some(duals),
                stats,
            })
        }
    }
}

impl Simplex<'_> {
    fn run(&mut self) -> Result<PhaseEnd, SolveError> {
        let mut degenerate_streak = 0u32;
        let mut bland = false;
        loop {
            if self.since_refactor >= self.opts.refactor_interval {
                self.refactor()?;
            }
            let duals = self.duals();
            let Some((entering, dir)) = self.price(&duals, bland) else {
                if self.since_refactor > 0 && self.residual() > 0.1 * self.opts.feasibility_tol {
                    self.refactor()?;
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };
            if self.iterations >= self.opts.max_iterations {
                return Err(SolveError::IterationLimit {
                    limit: self.opts.max_iterations,
                });
            }
            self.iterations += 1;

            let alpha = self.ftran(entering);
            let (step, leaving) = self.ratio_test(entering, dir, &alpha, bland);
            if step == f64::INFINITY {
                return Ok(PhaseEnd::Unbounded);
            }

            if step > 0.0 {
                for (i, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        self.x[self.basis[i]] -= dir * step * a;
                    }
                }
                self.x[entering] += dir * step;
            }
            if step <= 1e-12 {
                degenerate_streak += 1;
                if degenerate_streak >= self.opts.degeneracy_stall {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }

            match leaving {
                None => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.x[entering] = self.upper[entering];
                        self.slot[entering] = Slot::Upper;
                    } else {
                        self.x[entering] = self.lower[entering];
                        self.slot[entering] = Slot::Lower;
                    }
                }
                Some((row, to_upper)) => {
                    let out = self.basis[row];
                    if to_upper {
                        self.x[out] = self.upper[out];
                        self.slot[out] = Slot::Upper;
                    } else {
                        self.x[out] = self.lower[out];
                        self.slot[out] = Slot::Lower;
                    }
                    self.pivot(row, &alpha);
                    self.basis[row] = entering;
                    self.slot[entering] = Slot::Basic;
                    self.since_refactor += 1;
                }
            }
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for (i, &b) in self.basis.iter().enumerate() {
            let c = self.cost[b];
            if c != 0.0 {
                for (p, &v) in pi.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *p += c * v;
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, duals: &[f64]) -> f64 {
        self.cols[j].iter().fold(self.cost[j], |d, &(i, a)| d - duals[i] * a)
    }

    /// Picks an entering column and its direction of motion.
    fn price(&self, duals: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols.len() {
            let slot = self.slot[j];
            if slot == Slot::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, duals);
            let dir = match slot {
                Slot::Lower if d < -tol => 1.0,
                Slot::Upper if d > tol => -1.0,
                Slot::Zero if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            for (i, out) in alpha.iter_mut().enumerate() {
                *out += self.binv[i * m + r] * a;
            }
        }
        alpha
    }

    /// Returns the step length and the leaving row (with the bound it hits),
    /// or `None` for a bound flip of the entering column.
    fn ratio_test(&self, entering: usize, dir: f64, alpha: &[f64], bland: bool) -> (f64, Option<(usize, bool)>) {
        let piv_tol = self.opts.pivot_tol;
        let mut best_t = self.upper[entering] - self.lower[entering];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_pivot = 0.0;
        for (i, &a) in alpha.iter().enumerate() {
            let rate = dir * a;
            if rate.abs() <= piv_tol {
                continue;
            }
            let b = self.basis[i];
            let (limit, to_upper) = if rate > 0.0 {
                if self.lower[b] == f64::NEG_INFINITY {
                    continue;
                }
                ((self.x[b] - self.lower[b]).max(0.0) / rate, false)
            } else {
                if self.upper[b] == f64::INFINITY {
                    continue;
                }
                ((self.upper[b] - self.x[b]).max(0.0) / -rate, true)
            };
            let take = if !best_t.is_finite() || limit < best_t - 1e-12 * best_t.max(1.0) {
                true
            } else if (limit - best_t).abs() <= 1e-12 * best_t.max(1.0) {
                match leave {
                    // Prefer pivoting over a flip only when strictly shorter.
                    None => false,
                    Some((row, _)) => {
                        if bland {
                            b < self.basis[row]
                        } else {
                            rate.abs() > leave_pivot
                        }
                    }
                }
            } else {
                false
            };
            if take {
                best_t = limit;
                leave = Some((i, to_upper));
                leave_pivot = rate.abs();
            }
        }
        (best_t, leave)
    }

    fn pivot(&mut self, row: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[row];
        let mut pivot_row: Vec<f64> = self.binv[row * m..(row + 1) * m].to_vec();
        for v in &mut pivot_row {
            *v /= piv;
        }
        for (i, &a) in alpha.iter().enumerate() {
            if i == row || a == 0.0 {
                continue;
            }
            for (dst, &src) in self.binv[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                *dst -= a * src;
            }
        }
        self.binv[row * m..(row + 1) * m].copy_from_slice(&pivot_row);
    }

    /// Max row residual `|b - A x|` over all columns.
    fn residual(&self) -> f64 {
        let mut r = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, a) in col {
                    r[i] -= a * xj;
                }
            }
        }
        r.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Recomputes the basis inverse from scratch and resyncs basic values.
    fn refactor(&mut self) -> Result<(), SolveError> {
        let m = self.m;
        let width = 2 * m;
        let mut aug = vec![0.0; m * width];
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(r, a) in &self.cols[j] {
                aug[r * width + pos] = a;
            }
        }
        for i in 0..m {
            aug[i * width + m + i] = 1.0;
        }
        for k in 0..m {
            let mut p = k;
            let mut best = aug[k * width + k].abs();
            for i in k + 1..m {
                let v = aug[i * width + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-12 {
                return Err(SolveError::Numerical("singular basis during refactorization".into()));
            }
            if p != k {
                for c in 0..width {
                    aug.swap(k * width + c, p * width + c);
                }
            }
            let piv = aug[k * width + k];
            for c in 0..width {
                aug[k * width + c] /= piv;
            }
            let pivot_row: Vec<f64> = aug[k * width..(k + 1) * width].to_vec();
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = aug[i * width + k];
                if f != 0.0 {
                    for (dst, &src) in aug[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                        *dst -= f * src;
                    }
                }
            }
        }
        // Row k of the reduced system now holds the inverse row for basis position k.
        for i in 0..m {
            self.binv[i * m..(i + 1) * m].copy_from_slice(&aug[i * width + m..(i + 1) * width]);
        }

        let mut r = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.slot[j] != Slot::Basic && self.x[j] != 0.0 {
                for &(i, a) in col {
                    r[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let v: f64 = self.binv[i * m..(i + 1) * m].iter().zip(&r).map(|(a, b)| a * b).sum();
            self.x[self.basis[i]] = v;
        }
        self.since_refactor = 0;
        Ok(())
    }
}
