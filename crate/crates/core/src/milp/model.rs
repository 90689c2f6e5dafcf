use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Handle to a variable of a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a constraint row of a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConstraintId(pub(crate) usize);

impl ConstraintId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sorted by variable, no duplicates.
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization problem over continuous and binary variables with linear
/// constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    name: String,
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
        objective: f64,
    ) -> VarId {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            kind,
            objective,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> VarId {
        self.add_var(name, lower, upper, VarKind::Continuous, objective)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> VarId {
        self.add_var(name, 0.0, 1.0, VarKind::Binary, objective)
    }

    /// Adds a row `Σ coeffs · x (sense) rhs`. Repeated variables are summed.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> ConstraintId {
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for (v, a) in coeffs {
            *merged.entry(v).or_insert(0.0) += a;
        }
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs: merged.into_iter().collect(),
            sense,
            rhs,
        });
        ConstraintId(self.constraints.len() - 1)
    }

    /// Adds `coeff · var` to an existing row.
    pub fn add_term(&mut self, row: ConstraintId, var: VarId, coeff: f64) {
        let coeffs = &mut self.constraints[row.0].coeffs;
        match coeffs.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(pos) => coeffs[pos].1 += coeff,
            Err(pos) => coeffs.insert(pos, (var, coeff)),
        }
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn set_objective(&mut self, var: VarId, coeff: f64) {
        self.vars[var.0].objective = coeff;
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn constraint(&self, id: ConstraintId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len()).map(VarId)
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    /// Copy of the model with every binary turned continuous on its bounds.
    pub fn relaxed(&self) -> MilpModel {
        let mut out = self.clone();
        for v in &mut out.vars {
            v.kind = VarKind::Continuous;
        }
        out
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum()
    }

    /// Largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0));
        let rows = self.constraints.iter().map(|c| c.violation(values));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(ModelError::InvalidBounds {
                    var: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if !v.objective.is_finite() {
                return Err(ModelError::NonFiniteObjective { var: v.name.clone() });
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::BinaryBounds {
                    var: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            debug_assert_eq!(VarId(i).index(), i);
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(ModelError::NonFiniteRhs { constraint: c.name.clone() });
            }
            for &(v, a) in &c.coeffs {
                if v.0 >= self.vars.len() {
                    return Err(ModelError::UnknownVariable {
                        constraint: c.name.clone(),
                        index: v.0,
                    });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFiniteCoefficient {
                        constraint: c.name.clone(),
                        var: self.vars[v.0].name.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Renders the model in CPLEX LP text format: objective, constraints in
    /// declaration order, bounds, then the binary list.
    pub fn to_lp_string(&self) -> String {
        let names: Vec<String> = self
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| lp_name(&v.name, "x", i))
            .collect();
        let mut out = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(out, "\\ {}", self.name);
        }
        out.push_str("Minimize\n obj:");
        let obj: Vec<(usize, f64)> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.objective != 0.0)
            .map(|(i, v)| (i, v.objective))
            .collect();
        write_linear(&mut out, &names, obj.into_iter());
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " {}:", lp_name(&c.name, "c", i));
            write_linear(&mut out, &names, c.coeffs.iter().map(|&(v, a)| (v.0, a)));
            let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
        }
        out.push_str("Bounds\n");
        for (v, name) in self.vars.iter().zip(&names) {
            if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                let _ = writeln!(out, " {name} free");
            } else {
                let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), name, fmt_num(v.upper));
            }
        }
        let bins: Vec<&str> = self
            .vars
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.kind == VarKind::Binary)
            .map(|(_, n)| n.as_str())
            .collect();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for chunk in bins.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn lp_name(name: &str, prefix: &str, index: usize) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.()[]".contains(c) { c } else { '_' })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        format!("{prefix}{index}_{cleaned}")
    } else {
        cleaned
    }
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn write_linear(out: &mut String, names: &[String], terms: impl Iterator<Item = (usize, f64)>) {
    let mut empty = true;
    for (i, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        if empty && sign == '+' {
            let _ = write!(out, " {} {}", fmt_num(a.abs()), names[i]);
        } else {
            let _ = write!(out, " {} {} {}", sign, fmt_num(a.abs()), names[i]);
        }
        empty = false;
    }
    if empty {
        out.push_str(" 0");
    }
}
