//! Residual checks of a candidate solution against an instance.

use super::{MilpInstance, Sense, VarId};
use thiserror::Error;

/// Residuals of one assignment against all rows, bounds and integrality
/// requirements of an instance.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub max_constraint_violation: f64,
    pub mean_constraint_violation: f64,
    pub max_bound_violation: f64,
    pub max_integrality_deviation: f64,
    /// Objective recomputed from the values.
    pub objective: f64,
    /// Violation per constraint, index-aligned with the instance rows.
    pub constraint_violations: Vec<f64>,
}

impl ResidualReport {
    /// Worst violation of any kind.
    pub fn max_residual(&self) -> f64 {
        self.max_constraint_violation
            .max(self.max_bound_violation)
            .max(self.max_integrality_deviation)
    }

    /// Rows violated beyond `tol`, as (row index, name-less) pairs.
    pub fn rows_violating(&self, tol: f64) -> Vec<(usize, f64)> {
        self.constraint_violations
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, v)| v > tol)
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("value vector covers {got} variables, instance has {want}; first missing: {missing}")]
    MissingValues {
        got: usize,
        want: usize,
        missing: String,
    },
    #[error("non-finite value for variable {0}")]
    NonFiniteValue(VarId),
}

/// Computes the residual report of `values` against `instance`.
pub fn validate_solution(
    instance: &MilpInstance,
    values: &[f64],
) -> Result<ResidualReport, ValidateError> {
    let n = instance.num_vars();
    if values.len() < n {
        return Err(ValidateError::MissingValues {
            got: values.len(),
            want: n,
            missing: instance.variables()[values.len()].name.clone(),
        });
    }
    for v in instance.variables() {
        if !values[v.id.0].is_finite() {
            return Err(ValidateError::NonFiniteValue(v.id));
        }
    }

    let mut violations = Vec::with_capacity(instance.num_constraints());
    let mut max_c = 0.0f64;
    let mut sum_c = 0.0f64;
    for c in instance.constraints() {
        let lhs: f64 = c.terms.iter().map(|&(v, k)| k * values[v.0]).sum();
        let viol = match c.sense {
            Sense::Le => (lhs - c.rhs).max(0.0),
            Sense::Ge => (c.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        violations.push(viol);
        max_c = max_c.max(viol);
        sum_c += viol;
    }
    let mean_c = if violations.is_empty() {
        0.0
    } else {
        sum_c / violations.len() as f64
    };

    let mut max_b = 0.0f64;
    let mut max_i = 0.0f64;
    for v in instance.variables() {
        let x = values[v.id.0];
        if v.lower.is_finite() {
            max_b = max_b.max(v.lower - x);
        }
        if v.upper.is_finite() {
            max_b = max_b.max(x - v.upper);
        }
        if v.integral {
            max_i = max_i.max((x - x.round()).abs());
        }
    }

    Ok(ResidualReport {
        max_constraint_violation: max_c,
        mean_constraint_violation: mean_c,
        max_bound_violation: max_b.max(0.0),
        max_integrality_deviation: max_i,
        objective: instance.objective_value(values),
        constraint_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{solve_lp, InstanceBuilder, Sense, SolverConfig};
    use super::*;

    fn sample() -> super::super::MilpInstance {
        let mut b = InstanceBuilder::new("v");
        let x = b.continuous("x", 0.0, 10.0);
        let y = b.continuous("y", 0.0, 10.0);
        b.add_constraint("r1", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 2.0);
        b.add_constraint("r2", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
        b.add_objective_term(x, 1.0);
        b.add_objective_term(y, 1.0);
        b.build().unwrap()
    }

    #[test]
    fn optimal_solution_has_tiny_residuals() {
        let inst = sample();
        let s = solve_lp(&inst, &SolverConfig::default()).unwrap();
        let r = validate_solution(&inst, &s.values).unwrap();
        assert!(r.max_residual() <= 1e-6, "{r:?}");
        assert!((r.objective - s.objective).abs() < 1e-9);
    }

    #[test]
    fn perturbing_one_value_touches_expected_rows() {
        let inst = sample();
        let s = solve_lp(&inst, &SolverConfig::default()).unwrap();
        let mut vals = s.values.clone();
        vals[0] += 1.0; // x enters r1 (helps) and r2 (hurts)
        let r = validate_solution(&inst, &vals).unwrap();
        let bad = r.rows_violating(1e-9);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].0, 1); // only r2 can be violated by raising x
        assert!((bad[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_vector_residuals_match_hand_arithmetic() {
        let inst = sample();
        let r = validate_solution(&inst, &[0.0, 0.0]).unwrap();
        // r1: 0 >= 2 violated by 2; r2: 0 <= 1 fine.
        assert_eq!(r.constraint_violations, vec![2.0, 0.0]);
        assert_eq!(r.max_constraint_violation, 2.0);
        assert_eq!(r.mean_constraint_violation, 1.0);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn missing_value_named() {
        let inst = sample();
        let e = validate_solution(&inst, &[1.0]).unwrap_err();
        assert!(e.to_string().contains('y'), "{e}");
    }
}
