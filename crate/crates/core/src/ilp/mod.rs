//! Exact 0-1 linear programming.
//!
//! [`solve`] runs depth-first branch-and-bound, bounding each node with its
//! LP relaxation (or a cheaper positive-coefficient bound). [`brute_force`]
//! enumerates assignments and serves as the test oracle.

mod bnb;
mod brute;
mod lp_format;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bnb::{relaxation_bound, solve, solve_with};
pub use brute::{brute_force, ORACLE_LIMIT};

/// Tolerance for constraint satisfaction on real-valued sums.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Distance from 0 or 1 under which an LP value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub label: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub bound: f64,
}

impl LinearConstraint {
    pub fn activity(&self, assignment: &[bool]) -> f64 {
        self.terms
            .iter()
            .filter(|(v, _)| assignment[v.0])
            .map(|(_, a)| a)
            .sum()
    }

    pub fn holds(&self, assignment: &[bool]) -> bool {
        self.relation
            .holds(self.activity(assignment), self.bound, FEASIBILITY_TOL)
    }

    /// Terms with duplicate variables summed and zero coefficients dropped.
    pub(crate) fn merged_terms(&self) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(v, a) in &self.terms {
            *acc.entry(v.0).or_default() += a;
        }
        acc.into_iter().filter(|&(_, a)| a != 0.0).collect()
    }
}

/// Binary variables with objective coefficients, linear constraints, and
/// optional forced values. Maximized by [`solve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    pub forced: BTreeMap<VarId, bool>,
}

impl BinaryProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, objective: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            objective,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        bound: f64,
    ) {
        self.constraints.push(LinearConstraint {
            label: label.into(),
            terms,
            relation,
            bound,
        });
    }

    pub fn force(&mut self, var: VarId, value: bool) {
        self.forced.insert(var, value);
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn objective_value(&self, assignment: &[bool]) -> f64 {
        self.variables
            .iter()
            .zip(assignment)
            .filter(|(_, &x)| x)
            .map(|(v, _)| v.objective)
            .sum()
    }

    /// Index of the first violated constraint, ignoring forced values.
    pub fn first_violation(&self, assignment: &[bool]) -> Option<usize> {
        self.constraints.iter().position(|c| !c.holds(assignment))
    }

    /// All constraints hold and every forced value is respected.
    pub fn is_feasible(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.variables.len()
            && self.forced.iter().all(|(v, &x)| assignment[v.0] == x)
            && self.first_violation(assignment).is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::HashSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::Program(format!("duplicate variable {}", v.name)));
            }
            if !v.objective.is_finite() {
                return Err(Error::Program(format!(
                    "non-finite objective on {}",
                    v.name
                )));
            }
        }
        let n = self.variables.len();
        for c in &self.constraints {
            if c.terms.is_empty() {
                return Err(Error::Program(format!(
                    "constraint {} has no terms",
                    c.label
                )));
            }
            if !c.bound.is_finite() {
                return Err(Error::Program(format!("constraint {} bound", c.label)));
            }
            for (v, a) in &c.terms {
                if v.0 >= n {
                    return Err(Error::Program(format!(
                        "constraint {} references unknown variable {}",
                        c.label, v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::Program(format!(
                        "constraint {} coefficient",
                        c.label
                    )));
                }
            }
        }
        if let Some(v) = self.forced.keys().find(|v| v.0 >= n) {
            return Err(Error::Program(format!("forced unknown variable {}", v.0)));
        }
        Ok(())
    }

    /// The program in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        lp_format::write(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_solves: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// Set when optimal.
    pub objective: Option<f64>,
    /// One value per variable when optimal, empty otherwise.
    pub assignment: Vec<bool>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub(crate) fn infeasible(stats: SolveStats) -> Self {
        Solution {
            status: SolveStatus::Infeasible,
            objective: None,
            assignment: Vec::new(),
            stats,
        }
    }
}

/// How branch-and-bound bounds a node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    /// LP relaxation over the free variables.
    #[default]
    Lp,
    /// Fixed objective plus every positive free coefficient.
    PositiveSum,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub bound: BoundMode,
}
