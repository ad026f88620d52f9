//! Desk-scale exact LP/MILP solving, MPS export/import and solution
//! validation.
//!
//! Everything upstream (investment block, operational constraints)
//! compiles down to a [`MilpInstance`]: plain variables with bounds, sparse
//! linear rows and a sparse linear objective, always minimised. The solver
//! is a bounded-variable revised simplex (sparse LU basis, Dantzig pricing
//! with a Bland's-rule anti-cycling fallback) plus a best-first branch and
//! bound for the integer variables.

mod branch_bound;
mod lu;
pub mod mps;
mod simplex;
pub mod solution_io;
#[doc(hidden)]
pub mod testkit;
mod validate;

pub use branch_bound::solve_milp;
pub use simplex::{solve_lp, LpSolution};
pub use validate::{validate_solution, ResidualReport};

use std::fmt;
use thiserror::Error;

/// Dense index of a decision variable within its instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A decision variable: box bounds plus an integrality flag.
///
/// `f64::INFINITY` (resp. `NEG_INFINITY`) is the sentinel for a missing
/// upper (resp. lower) bound.
#[derive(Debug, Clone)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integral: bool,
}

/// Row sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Eq => write!(f, "="),
            Sense::Ge => write!(f, ">="),
        }
    }
}

/// A sparse linear constraint `sum(coeff * var) sense rhs`.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// An immutable minimisation instance.
///
/// Build one through [`InstanceBuilder`]; the builder checks the
/// invariants (unique names, sane bounds, valid ids) once and the
/// resulting instance is read-only afterwards.
#[derive(Debug, Clone)]
pub struct MilpInstance {
    name: String,
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(VarId, f64)>,
    objective_offset: f64,
}

impl MilpInstance {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Sparse objective terms (no duplicate ids, coefficients finite).
    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    /// Objective value of an assignment, including the constant offset.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .map(|&(v, c)| c * values[v.0])
                .sum::<f64>()
    }

    /// Dense objective vector, one entry per variable.
    pub fn dense_objective(&self) -> Vec<f64> {
        let mut obj = vec![0.0; self.variables.len()];
        for &(v, c) in &self.objective {
            obj[v.0] = c;
        }
        obj
    }

    pub fn var_by_name(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// True when at least one variable is marked integral.
    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integral)
    }
}

/// Problems found while assembling or checking an instance.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("variable {id} ({name}): lower bound {lower} exceeds upper bound {upper}")]
    BoundOrder {
        id: VarId,
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("integral variable {id} ({name}) must have finite bounds, got [{lower}, {upper}]")]
    UnboundedInteger {
        id: VarId,
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("constraint `{constraint}` references unknown variable {id}")]
    UnknownVariable { constraint: String, id: VarId },
    #[error("constraint `{constraint}` has duplicate terms for variable {id}")]
    DuplicateTerm { constraint: String, id: VarId },
    #[error("constraint `{constraint}` has non-finite coefficient on variable {id}")]
    NonFiniteCoefficient { constraint: String, id: VarId },
    #[error("constraint `{constraint}` has non-finite right-hand side")]
    NonFiniteRhs { constraint: String },
    #[error("objective has duplicate or unknown term for variable {0}")]
    BadObjectiveTerm(VarId),
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
}

/// Incrementally assembles a [`MilpInstance`].
#[derive(Debug, Default)]
pub struct InstanceBuilder {
    name: String,
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(VarId, f64)>,
    objective_offset: f64,
}

impl InstanceBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        InstanceBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integral: bool,
    ) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            id,
            name: name.into(),
            lower,
            upper,
            integral,
        });
        id
    }

    /// Continuous variable with bounds `[lower, upper]`.
    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_variable(name, lower, upper, false)
    }

    /// Integer variable with inclusive bounds.
    pub fn integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_variable(name, lower, upper, true)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.constraints.push(LinearConstraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
    }

    /// Adds `coeff` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: VarId, coeff: f64) {
        if let Some(entry) = self.objective.iter_mut().find(|(v, _)| *v == var) {
            entry.1 += coeff;
        } else {
            self.objective.push((var, coeff));
        }
    }

    pub fn add_objective_offset(&mut self, offset: f64) {
        self.objective_offset += offset;
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Validates all invariants and freezes the instance.
    pub fn build(self) -> Result<MilpInstance, InstanceError> {
        let n = self.variables.len();
        let mut seen_names = std::collections::HashSet::with_capacity(n);
        for v in &self.variables {
            if !(v.lower <= v.upper) {
                return Err(InstanceError::BoundOrder {
                    id: v.id,
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if v.integral && !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(InstanceError::UnboundedInteger {
                    id: v.id,
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if !seen_names.insert(v.name.as_str()) {
                return Err(InstanceError::DuplicateName(v.name.clone()));
            }
        }
        for c in &self.constraints {
            let mut seen = std::collections::HashSet::with_capacity(c.terms.len());
            for &(v, coeff) in &c.terms {
                if v.0 >= n {
                    return Err(InstanceError::UnknownVariable {
                        constraint: c.name.clone(),
                        id: v,
                    });
                }
                if !seen.insert(v) {
                    return Err(InstanceError::DuplicateTerm {
                        constraint: c.name.clone(),
                        id: v,
                    });
                }
                if !coeff.is_finite() {
                    return Err(InstanceError::NonFiniteCoefficient {
                        constraint: c.name.clone(),
                        id: v,
                    });
                }
            }
            if !c.rhs.is_finite() {
                return Err(InstanceError::NonFiniteRhs {
                    constraint: c.name.clone(),
                });
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(self.objective.len());
        for &(v, c) in &self.objective {
            if v.0 >= n || !seen.insert(v) || !c.is_finite() {
                return Err(InstanceError::BadObjectiveTerm(v));
            }
        }
        Ok(MilpInstance {
            name: self.name,
            variables: self.variables,
            constraints: self.constraints,
            objective: self.objective,
            objective_offset: self.objective_offset,
        })
    }
}

/// Solver tolerances and limits.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Maximum allowed constraint/bound violation in an accepted solution.
    pub feasibility_tol: f64,
    /// Maximum distance from an integer for integral variables.
    pub integrality_tol: f64,
    /// Relative MILP gap `(incumbent - bound) / (1 + |incumbent|)`.
    pub optimality_gap: f64,
    /// Smallest pivot magnitude the simplex accepts.
    pub pivot_tol: f64,
    /// Branch-and-bound node budget.
    pub node_limit: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feasibility_tol: 1e-6,
            integrality_tol: 1e-6,
            optimality_gap: 1e-6,
            pivot_tol: 1e-9,
            node_limit: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let all = [
            ("feasibility_tol", self.feasibility_tol),
            ("integrality_tol", self.integrality_tol),
            ("optimality_gap", self.optimality_gap),
            ("pivot_tol", self.pivot_tol),
        ];
        for (name, v) in all {
            if !(v > 0.0) || !v.is_finite() {
                return Err(InstanceError::BadConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.node_limit == 0 {
            return Err(InstanceError::BadConfig("node_limit must be >= 1".into()));
        }
        Ok(())
    }
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node budget exhausted; incumbent and bound are still reported.
    NodeLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Optimal => write!(f, "optimal"),
            SolveStatus::Infeasible => write!(f, "infeasible"),
            SolveStatus::Unbounded => write!(f, "unbounded"),
            SolveStatus::NodeLimit => write!(f, "node-limit"),
        }
    }
}

/// Result of a mixed-integer solve.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// One value per variable; empty unless an incumbent exists.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Proven lower bound on the optimum (minimisation).
    pub best_bound: f64,
    pub nodes: u64,
    pub simplex_iterations: u64,
}

impl MilpSolution {
    pub fn relative_gap(&self) -> f64 {
        if self.values.is_empty() {
            return f64::INFINITY;
        }
        (self.objective - self.best_bound).max(0.0) / (1.0 + self.objective.abs())
    }
}

/// Errors surfaced by the solver entry points.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("numerical failure in simplex: {0}")]
    Numerical(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_checks_bound_order() {
        let mut b = InstanceBuilder::new("t");
        b.continuous("x", 2.0, 1.0);
        assert!(matches!(b.build(), Err(InstanceError::BoundOrder { .. })));
    }

    #[test]
    fn builder_rejects_unbounded_integer() {
        let mut b = InstanceBuilder::new("t");
        b.integer("n", 0.0, f64::INFINITY);
        assert!(matches!(
            b.build(),
            Err(InstanceError::UnboundedInteger { .. })
        ));
    }

    #[test]
    fn builder_rejects_duplicate_names_and_terms() {
        let mut b = InstanceBuilder::new("t");
        b.continuous("x", 0.0, 1.0);
        b.continuous("x", 0.0, 1.0);
        assert!(matches!(b.build(), Err(InstanceError::DuplicateName(_))));

        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", 0.0, 1.0);
        b.add_constraint("c", vec![(x, 1.0), (x, 2.0)], Sense::Le, 1.0);
        assert!(matches!(
            b.build(),
            Err(InstanceError::DuplicateTerm { .. })
        ));
    }

    #[test]
    fn builder_rejects_unknown_ids() {
        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", 0.0, 1.0);
        b.add_constraint("c", vec![(VarId(x.0 + 5), 1.0)], Sense::Le, 1.0);
        assert!(matches!(
            b.build(),
            Err(InstanceError::UnknownVariable { .. })
        ));
    }
}
