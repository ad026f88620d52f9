//! Best-first branch and bound on the integer variables.
//!
//! Branching picks the most fractional integer variable (ties broken by
//! lowest variable id) and splits on floor/ceil. Nodes are explored in
//! order of increasing parent LP bound, newest node first among equal
//! bounds, so the search dives when bounds are flat. Child LPs warm-start
//! from the parent basis with the dual simplex and fall back to a cold
//! solve when that fails numerically.

use super::simplex::{BasisSnapshot, Outcome, Worker};
use super::{MilpInstance, MilpSolution, SolveError, SolveStatus, SolverConfig};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Node {
    /// Index into the arena of the parent, or usize::MAX for root children.
    parent: usize,
    /// Branching decision: variable and its new bound.
    var: usize,
    new_lower: f64,
    new_upper: f64,
}

struct HeapKey {
    bound: f64,
    id: u64,
    arena_idx: usize,
}

impl PartialEq for HeapKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    // BinaryHeap is a max-heap; we want lowest bound first, then newest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(self.id.cmp(&other.id))
    }
}

/// Solves a mixed-integer instance to the configured optimality gap.
pub fn solve_milp(
    instance: &MilpInstance,
    config: &SolverConfig,
) -> Result<MilpSolution, SolveError> {
    config.validate()?;
    let int_vars: Vec<usize> = instance
        .variables()
        .iter()
        .filter(|v| v.integral)
        .map(|v| v.id.0)
        .collect();

    let mut worker = Worker::new(instance, config);
    let root_outcome = worker.solve_cold()?;
    let mut iterations = worker.iterations;
    match root_outcome {
        Outcome::Infeasible => {
            return Ok(MilpSolution {
                status: SolveStatus::Infeasible,
                values: Vec::new(),
                objective: f64::INFINITY,
                best_bound: f64::INFINITY,
                nodes: 1,
                simplex_iterations: iterations,
            })
        }
        Outcome::Unbounded => {
            return Ok(MilpSolution {
                status: SolveStatus::Unbounded,
                values: Vec::new(),
                objective: f64::NEG_INFINITY,
                best_bound: f64::NEG_INFINITY,
                nodes: 1,
                simplex_iterations: iterations,
            })
        }
        Outcome::Optimal => {}
    }

    let root_obj = worker.objective_value();
    let root_values = worker.structural_values();
    let root_basis = worker.snapshot();

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let gap_ok = |inc: f64, bound: f64| (inc - bound) <= config.optimality_gap * (1.0 + inc.abs());

    if fractional_vars(&root_values, &int_vars, config.integrality_tol).is_empty() {
        // Root already integral.
        return Ok(MilpSolution {
            status: SolveStatus::Optimal,
            values: root_values,
            objective: root_obj,
            best_bound: root_obj,
            nodes: 1,
            simplex_iterations: iterations,
        });
    }

    // Rounding heuristics: fix every integer to a nearby value and solve the
    // remaining LP. Cheap incumbents let best-first prune early.
    for mode in [Rounding::Ceil, Rounding::Nearest] {
        if let Some((obj, values)) =
            try_rounding(instance, config, &root_values, &int_vars, mode, &mut iterations)?
        {
            if incumbent.as_ref().map_or(true, |(best, _)| obj < *best) {
                incumbent = Some((obj, values));
            }
        }
    }

    let mut arena: Vec<Node> = Vec::new();
    let mut heap: BinaryHeap<HeapKey> = BinaryHeap::new();
    let mut bases: Vec<Option<BasisSnapshot>> = Vec::new();
    let mut next_id: u64 = 1;
    let mut nodes_explored: u64 = 1;
    let mut best_open_bound = root_obj;

    branch(
        &root_values,
        &int_vars,
        config.integrality_tol,
        root_obj,
        usize::MAX,
        &mut arena,
        &mut heap,
        &mut bases,
        &root_basis,
        &mut next_id,
    );

    let mut status = SolveStatus::Optimal;
    let final_bound;

    loop {
        let Some(key) = heap.pop() else {
            // Tree exhausted; the incumbent (if any) is optimal.
            final_bound = match &incumbent {
                Some((obj, _)) => *obj,
                None => f64::INFINITY,
            };
            break;
        };
        best_open_bound = key.bound;
        if let Some((inc_obj, _)) = &incumbent {
            if gap_ok(*inc_obj, key.bound) {
                // Best-first: every open node is at least this bound.
                final_bound = key.bound;
                break;
            }
        }
        if nodes_explored >= config.node_limit {
            status = SolveStatus::NodeLimit;
            final_bound = key.bound;
            break;
        }
        nodes_explored += 1;

        // Reconstruct the node's integer bounds from its ancestry.
        let node_idx = key.arena_idx;
        restore_instance_bounds(&mut worker, instance, &int_vars);
        let mut walk = node_idx;
        let mut chain = Vec::new();
        while walk != usize::MAX {
            chain.push(walk);
            walk = arena[walk].parent;
        }
        for &i in chain.iter().rev() {
            let nd = &arena[i];
            let (l, u) = worker.var_bounds(nd.var);
            worker.set_var_bounds(nd.var, l.max(nd.new_lower), u.min(nd.new_upper));
        }
        let (bl, bu) = {
            let nd = &arena[node_idx];
            worker.var_bounds(nd.var)
        };
        if bl > bu {
            continue; // branch emptied the domain
        }

        // Warm start from the parent basis, falling back to a cold solve.
        let parent = arena[node_idx].parent;
        let warm_basis = if parent == usize::MAX {
            Some(&root_basis)
        } else {
            bases[parent].as_ref()
        };
        let outcome = match warm_basis {
            Some(snap) if worker.restore(snap) => match worker.dual_resolve() {
                Ok(out) => out,
                Err(_) => worker.solve_cold()?,
            },
            _ => worker.solve_cold()?,
        };
        iterations = worker.iterations;
        match outcome {
            Outcome::Infeasible => continue,
            Outcome::Unbounded => {
                // Cannot happen when the root is bounded; treat as numerical.
                return Err(SolveError::Numerical(
                    "unbounded node below a bounded root".into(),
                ));
            }
            Outcome::Optimal => {}
        }
        let node_obj = worker.objective_value();
        if let Some((inc_obj, _)) = &incumbent {
            if gap_ok(*inc_obj, node_obj) {
                continue;
            }
        }
        let values = worker.structural_values();
        let fracs = fractional_vars(&values, &int_vars, config.integrality_tol);
        if fracs.is_empty() {
            let better = incumbent.as_ref().map_or(true, |(best, _)| node_obj < *best);
            if better {
                incumbent = Some((node_obj, values));
            }
            continue;
        }
        let snap = worker.snapshot();
        branch(
            &values,
            &int_vars,
            config.integrality_tol,
            node_obj,
            node_idx,
            &mut arena,
            &mut heap,
            &mut bases,
            &snap,
            &mut next_id,
        );
    }

    match incumbent {
        Some((obj, values)) => Ok(MilpSolution {
            status,
            values,
            objective: obj,
            best_bound: final_bound.min(obj),
            nodes: nodes_explored,
            simplex_iterations: iterations,
        }),
        None => Ok(MilpSolution {
            status: if status == SolveStatus::NodeLimit {
                SolveStatus::NodeLimit
            } else {
                SolveStatus::Infeasible
            },
            values: Vec::new(),
            objective: f64::INFINITY,
            best_bound: if status == SolveStatus::NodeLimit {
                best_open_bound
            } else {
                f64::INFINITY
            },
            nodes: nodes_explored,
            simplex_iterations: iterations,
        }),
    }
}

#[derive(Clone, Copy)]
enum Rounding {
    Ceil,
    Nearest,
}

/// Fixes all integer variables near the LP relaxation values and solves the
/// remaining LP. Returns an incumbent when the fixing is feasible.
fn try_rounding(
    instance: &MilpInstance,
    config: &SolverConfig,
    relax_values: &[f64],
    int_vars: &[usize],
    mode: Rounding,
    iterations: &mut u64,
) -> Result<Option<(f64, Vec<f64>)>, SolveError> {
    let mut worker = Worker::new(instance, config);
    for &v in int_vars {
        let (l, u) = worker.var_bounds(v);
        let target = match mode {
            Rounding::Ceil => relax_values[v].ceil(),
            Rounding::Nearest => relax_values[v].round(),
        };
        let fixed = target.clamp(l, u).round();
        worker.set_var_bounds(v, fixed, fixed);
    }
    let out = worker.solve_cold()?;
    *iterations += worker.iterations;
    if out == Outcome::Optimal {
        Ok(Some((worker.objective_value(), worker.structural_values())))
    } else {
        Ok(None)
    }
}

fn restore_instance_bounds(worker: &mut Worker, instance: &MilpInstance, int_vars: &[usize]) {
    for &v in int_vars {
        let var = &instance.variables()[v];
        worker.set_var_bounds(v, var.lower, var.upper);
    }
}

fn fractional_vars(values: &[f64], int_vars: &[usize], tol: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for &v in int_vars {
        let x = values[v];
        let frac = (x - x.round()).abs();
        if frac > tol {
            out.push((v, x));
        }
    }
    out
}

/// Pushes the floor/ceil children of the most fractional integer variable.
#[allow(clippy::too_many_arguments)]
fn branch(
    values: &[f64],
    int_vars: &[usize],
    tol: f64,
    bound: f64,
    parent: usize,
    arena: &mut Vec<Node>,
    heap: &mut BinaryHeap<HeapKey>,
    bases: &mut Vec<Option<BasisSnapshot>>,
    basis: &BasisSnapshot,
    next_id: &mut u64,
) {
    let fracs = fractional_vars(values, int_vars, tol);
    // Most fractional: distance to the nearest integer, largest first;
    // ties broken by lowest variable id (fracs is already id-ordered).
    let mut best_var = usize::MAX;
    let mut best_score = -1.0;
    let mut best_val = 0.0;
    for &(v, x) in &fracs {
        let f = x - x.floor();
        let score = f.min(1.0 - f);
        if score > best_score + 1e-15 {
            best_score = score;
            best_var = v;
            best_val = x;
        }
    }
    debug_assert_ne!(best_var, usize::MAX);

    // Parent slot in the arena so children can reuse its basis.
    let parent_arena = if parent == usize::MAX {
        usize::MAX
    } else {
        parent
    };
    if parent_arena != usize::MAX {
        bases[parent_arena] = Some(basis.clone());
    }

    for (new_lower, new_upper) in [
        (f64::NEG_INFINITY, best_val.floor()),
        (best_val.floor() + 1.0, f64::INFINITY),
    ] {
        let idx = arena.len();
        arena.push(Node {
            parent: parent_arena,
            var: best_var,
            new_lower,
            new_upper,
        });
        bases.push(None);
        heap.push(HeapKey {
            bound,
            id: *next_id,
            arena_idx: idx,
        });
        *next_id += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::super::{InstanceBuilder, Sense, SolveStatus, SolverConfig};
    use super::*;

    fn tight() -> SolverConfig {
        SolverConfig {
            optimality_gap: 1e-9,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn knapsack_two_binaries() {
        // max 3x + 2y s.t. 2x + y <= 2, x,y binary -> x=1, y=0, obj 3.
        let mut b = InstanceBuilder::new("t");
        let x = b.integer("x", 0.0, 1.0);
        let y = b.integer("y", 0.0, 1.0);
        b.add_constraint("c", vec![(x, 2.0), (y, 1.0)], Sense::Le, 2.0);
        b.add_objective_term(x, -3.0);
        b.add_objective_term(y, -2.0);
        let inst = b.build().unwrap();
        let s = solve_milp(&inst, &tight()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 3.0).abs() < 1e-8);
        assert!((s.values[x.0] - 1.0).abs() < 1e-6);
        assert!(s.values[y.0].abs() < 1e-6);
    }

    #[test]
    fn fixed_integers_equal_lp() {
        // Integer variables pinned by equal bounds: no branching needed.
        let mut b = InstanceBuilder::new("t");
        let x = b.integer("x", 2.0, 2.0);
        let y = b.continuous("y", 0.0, 10.0);
        b.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 5.0);
        b.add_objective_term(y, 1.0);
        let inst = b.build().unwrap();
        let milp = solve_milp(&inst, &tight()).unwrap();
        let lp = super::super::solve_lp(&inst, &tight()).unwrap();
        assert_eq!(milp.status, SolveStatus::Optimal);
        assert!((milp.objective - lp.objective).abs() < 1e-9);
        assert_eq!(milp.nodes, 1);
    }

    #[test]
    fn infeasible_integer_domain() {
        // 2x = 1 with x integer has no solution.
        let mut b = InstanceBuilder::new("t");
        let x = b.integer("x", 0.0, 5.0);
        b.add_constraint("c", vec![(x, 2.0)], Sense::Eq, 1.0);
        let inst = b.build().unwrap();
        let s = solve_milp(&inst, &tight()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn incumbent_respects_bound() {
        let mut b = InstanceBuilder::new("t");
        let x = b.integer("x", 0.0, 7.0);
        let y = b.integer("y", 0.0, 7.0);
        let z = b.continuous("z", 0.0, 20.0);
        b.add_constraint("c1", vec![(x, 3.0), (y, 5.0), (z, 1.0)], Sense::Ge, 13.3);
        b.add_constraint("c2", vec![(x, 1.0), (y, 1.0)], Sense::Le, 4.0);
        b.add_objective_term(x, 2.0);
        b.add_objective_term(y, 3.1);
        b.add_objective_term(z, 1.7);
        let inst = b.build().unwrap();
        let s = solve_milp(&inst, &tight()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!(s.objective >= s.best_bound - 1e-9);
        assert!(s.relative_gap() <= 1e-9 + 1e-12);
    }
}
