#![allow(dead_code)]

use fleetgrid::milp::{MilpModel, MilpSolution, Sense, VarKind};

/// Brute-force LP oracle for small fully box-bounded models: every vertex is
/// the solution of `n` active hyperplanes drawn from the rows and the bounds.
/// Returns `None` when the feasible set is empty.
pub fn vertex_enumeration_optimum(model: &MilpModel) -> Option<f64> {
    let n = model.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in model.constraints() {
        let mut row = vec![0.0; n];
        for &(v, a) in &c.coeffs {
            row[v.index()] += a;
        }
        planes.push((row, c.rhs));
    }
    for (j, v) in model.variables().iter().enumerate() {
        assert!(v.lower.is_finite() && v.upper.is_finite(), "oracle needs finite boxes");
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), v.lower));
        planes.push((e, v.upper));
    }
    let mut best: Option<f64> = None;
    for combo in combinations(planes.len(), n) {
        let a: Vec<Vec<f64>> = combo.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = combo.iter().map(|&k| planes[k].1).collect();
        let Some(x) = solve_dense(a, b) else { continue };
        if model.max_violation(&x) <= 1e-7 {
            let obj = model.objective_value(&x);
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

fn combinations(len: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, len: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            rec(i + 1, len, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, k, &mut Vec::new(), &mut out);
    out
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in 0..n {
            if i != k {
                let f = a[i][k] / a[k][k];
                for c in k..n {
                    a[i][c] -= f * a[k][c];
                }
                b[i] -= f * b[k];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Checks an optimal LP solution against its row duals: primal feasibility,
/// dual sign conditions per row sense, reduced-cost signs per variable
/// position, and complementary slackness. Returns the worst violation.
pub fn duality_audit(model: &MilpModel, sol: &MilpSolution) -> f64 {
    let duals = sol.duals.as_ref().expect("optimal LP carries duals");
    let x = &sol.values;
    let scale = |v: f64| v.abs().max(1.0);
    let mut worst = model.max_violation(x);

    for (c, &pi) in model.constraints().iter().zip(duals) {
        let slack = c.rhs - c.activity(x);
        // Minimization: a <= row has a non-positive multiplier, >= non-negative.
        let sign_violation = match c.sense {
            Sense::Le => pi.max(0.0),
            Sense::Ge => (-pi).max(0.0),
            Sense::Eq => 0.0,
        };
        let cs = if c.sense == Sense::Eq { 0.0 } else { (pi * slack).abs() / scale(c.rhs) };
        worst = worst.max(sign_violation).max(cs);
    }

    let mut reduced: Vec<f64> = model.variables().iter().map(|v| v.objective).collect();
    for (c, &pi) in model.constraints().iter().zip(duals) {
        for &(v, a) in &c.coeffs {
            reduced[v.index()] -= pi * a;
        }
    }
    for ((v, &xj), &d) in model.variables().iter().zip(x).zip(&reduced) {
        let tol = 1e-7 * scale(xj);
        let at_lower = (xj - v.lower).abs() <= tol;
        let at_upper = (v.upper - xj).abs() <= tol;
        let violation = match (at_lower, at_upper) {
            (true, true) => 0.0,
            (true, false) => (-d).max(0.0),
            (false, true) => d.max(0.0),
            (false, false) => d.abs(),
        };
        worst = worst.max(violation);
    }
    worst
}

/// Exhaustive MILP oracle: fixes every binary assignment and solves the
/// remaining LP.
pub fn enumerate_binaries(model: &MilpModel) -> Option<f64> {
    let bins: Vec<_> = model.binaries().collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut fixed = model.clone();
        for (k, &b) in bins.iter().enumerate() {
            let val = f64::from((mask >> k) & 1);
            fixed.set_bounds(b, val, val);
        }
        let sol = fleetgrid::milp::solve_lp(&fixed).unwrap();
        if sol.is_optimal() {
            best = Some(best.map_or(sol.objective, |b: f64| b.min(sol.objective)));
        }
    }
    best
}

pub fn binary_count(model: &MilpModel) -> usize {
    model.variables().iter().filter(|v| v.kind == VarKind::Binary).count()
}
