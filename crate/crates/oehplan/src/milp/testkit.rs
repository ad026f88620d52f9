//! Independent oracles and seeded instance generators used by the test
//! suites. The oracles deliberately share no code with the simplex or the
//! branch and bound: the LP oracle enumerates basis subsets of the dense
//! standard form, the MILP oracle enumerates every integer assignment.

use super::{MilpInstance, Sense, SolveStatus, SolverConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of an oracle evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleResult {
    Optimal(f64),
    Infeasible,
}

/// Brute-force LP oracle: enumerates all basis subsets of the standard form
/// `A x + s = b` and minimises over feasible basic solutions.
///
/// Requirements on the instance (the generators below satisfy them):
/// every variable has bounds `[0, inf)` and objective coefficients are
/// non-negative, so the LP is bounded and any feasible point dominates to
/// a vertex.
pub fn vertex_enumeration_lp(instance: &MilpInstance) -> OracleResult {
    let n = instance.num_vars();
    let m = instance.num_constraints();
    let total = n + m;
    assert!(m >= 1 && total <= 30, "oracle is for desk-size instances");
    for v in instance.variables() {
        assert!(
            v.lower == 0.0 && v.upper.is_infinite(),
            "oracle requires [0, inf) variables"
        );
    }

    // Dense standard form columns.
    let mut a = vec![vec![0.0f64; total]; m];
    let mut b = vec![0.0f64; m];
    for (i, c) in instance.constraints().iter().enumerate() {
        for &(v, coeff) in &c.terms {
            a[i][v.0] = coeff;
        }
        a[i][n + i] = 1.0;
        b[i] = c.rhs;
    }
    // Column feasibility range: (low, high) for the basic value.
    let range: Vec<(f64, f64)> = (0..total)
        .map(|j| {
            if j < n {
                (0.0, f64::INFINITY)
            } else {
                match instance.constraints()[j - n].sense {
                    Sense::Le => (0.0, f64::INFINITY),
                    Sense::Ge => (f64::NEG_INFINITY, 0.0),
                    Sense::Eq => (0.0, 0.0),
                }
            }
        })
        .collect();
    let cost = {
        let mut c = vec![0.0f64; total];
        for &(v, k) in instance.objective() {
            c[v.0] = k;
        }
        c
    };

    const FEAS_TOL: f64 = 1e-7;
    let mut best: Option<f64> = None;

    // Lexicographic enumeration of m-subsets of 0..total; buffers are
    // reused across the few million candidate bases.
    let mut idx: Vec<usize> = (0..m).collect();
    let mut mat = vec![0.0f64; m * m];
    let mut rhs = vec![0.0f64; m];
    let mut xb = vec![0.0f64; m];
    loop {
        // Solve B x_B = b by dense LU with partial pivoting.
        for (k, &j) in idx.iter().enumerate() {
            for i in 0..m {
                mat[i * m + k] = a[i][j];
            }
        }
        rhs.copy_from_slice(&b);
        if dense_solve(&mut mat, &mut rhs, m, &mut xb) {
            let mut ok = true;
            for (k, &j) in idx.iter().enumerate() {
                let (lo, hi) = range[j];
                if xb[k] < lo - FEAS_TOL || xb[k] > hi + FEAS_TOL {
                    ok = false;
                    break;
                }
            }
            if ok {
                let obj: f64 = idx
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| cost[j] * xb[k])
                    .sum::<f64>()
                    + instance.objective_offset();
                best = Some(match best {
                    Some(cur) => cur.min(obj),
                    None => obj,
                });
            }
        }

        // Next combination.
        let mut pos = m;
        loop {
            if pos == 0 {
                return match best {
                    Some(obj) => OracleResult::Optimal(obj),
                    None => OracleResult::Infeasible,
                };
            }
            pos -= 1;
            if idx[pos] != pos + total - m {
                break;
            }
        }
        idx[pos] += 1;
        for k in pos + 1..m {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

/// Gaussian elimination with partial pivoting into `x`; false when singular.
fn dense_solve(mat: &mut [f64], rhs: &mut [f64], m: usize, x: &mut [f64]) -> bool {
    for col in 0..m {
        let mut piv = col;
        let mut mag = mat[col * m + col].abs();
        for r in col + 1..m {
            let v = mat[r * m + col].abs();
            if v > mag {
                mag = v;
                piv = r;
            }
        }
        if mag < 1e-10 {
            return false;
        }
        if piv != col {
            for k in 0..m {
                mat.swap(col * m + k, piv * m + k);
            }
            rhs.swap(col, piv);
        }
        let d = mat[col * m + col];
        for r in col + 1..m {
            let f = mat[r * m + col] / d;
            if f != 0.0 {
                for k in col..m {
                    mat[r * m + k] -= f * mat[col * m + k];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    for col in (0..m).rev() {
        let mut v = rhs[col];
        for k in col + 1..m {
            v -= mat[col * m + k] * x[k];
        }
        x[col] = v / mat[col * m + col];
    }
    true
}

/// Exhaustive MILP oracle: fixes every integer assignment in turn and
/// solves the continuous remainder with the LP engine.
pub fn enumerate_milp(instance: &MilpInstance, config: &SolverConfig) -> OracleResult {
    let int_vars: Vec<(usize, i64, i64)> = instance
        .variables()
        .iter()
        .filter(|v| v.integral)
        .map(|v| (v.id.0, v.lower.ceil() as i64, v.upper.floor() as i64))
        .collect();
    let combos: u64 = int_vars
        .iter()
        .map(|&(_, lo, hi)| (hi - lo + 1).max(0) as u64)
        .product();
    assert!(combos > 0, "empty integer domain");
    assert!(combos <= 1 << 14, "oracle domain too large: {combos}");

    let mut assignment: Vec<i64> = int_vars.iter().map(|&(_, lo, _)| lo).collect();
    let mut best: Option<f64> = None;
    loop {
        // Clone the instance with the integers pinned.
        let mut builder = super::InstanceBuilder::new(instance.name());
        for v in instance.variables() {
            let (l, u) = match int_vars.iter().position(|&(id, _, _)| id == v.id.0) {
                Some(k) => (assignment[k] as f64, assignment[k] as f64),
                None => (v.lower, v.upper),
            };
            builder.add_variable(v.name.clone(), l, u, false);
        }
        for c in instance.constraints() {
            builder.add_constraint(c.name.clone(), c.terms.clone(), c.sense, c.rhs);
        }
        for &(v, k) in instance.objective() {
            builder.add_objective_term(v, k);
        }
        builder.add_objective_offset(instance.objective_offset());
        let fixed = builder.build().expect("pinned instance stays valid");
        let sol = super::solve_lp(&fixed, config).expect("LP solve");
        if sol.status == SolveStatus::Optimal {
            best = Some(match best {
                Some(cur) => cur.min(sol.objective),
                None => sol.objective,
            });
        }

        // Advance the odometer.
        let mut k = 0;
        loop {
            if k == assignment.len() {
                return match best {
                    Some(obj) => OracleResult::Optimal(obj),
                    None => OracleResult::Infeasible,
                };
            }
            assignment[k] += 1;
            if assignment[k] <= int_vars[k].2 {
                break;
            }
            assignment[k] = int_vars[k].1;
            k += 1;
        }
    }
}

/// Seeded random LP in the family the vertex oracle accepts:
/// 10 variables in `[0, inf)`, 15 rows, non-negative objective.
///
/// Most seeds are feasible by construction (the right-hand sides are laid
/// around a random witness point); roughly one seed in five keeps raw
/// right-hand sides to also exercise the infeasible path.
pub fn random_lp(seed: u64) -> MilpInstance {
    random_lp_sized(seed, 10, 15)
}

/// Same family as [`random_lp`] with explicit dimensions.
pub fn random_lp_sized(seed: u64, n: usize, m: usize) -> MilpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = super::InstanceBuilder::new(format!("rand-lp-{seed}"));
    let vars: Vec<_> = (0..n)
        .map(|j| b.continuous(format!("x{j}"), 0.0, f64::INFINITY))
        .collect();
    for &v in vars.iter() {
        // Strictly positive costs keep the minimisation bounded.
        let c = 0.05 + rng.gen_range(0..60) as f64 * 0.05;
        b.add_objective_term(v, c);
    }
    let witness: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=12) as f64 * 0.5).collect();
    let plant_feasible = seed % 5 != 4;
    for i in 0..m {
        let nnz = rng.gen_range(2..=5);
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < nnz {
            let j = rng.gen_range(0..n);
            if !picked.contains(&j) {
                picked.push(j);
            }
        }
        picked.sort_unstable();
        let terms: Vec<_> = picked
            .iter()
            .map(|&j| (vars[j], (rng.gen_range(-12..=12) as f64) * 0.25))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        let sense = match rng.gen_range(0..10) {
            0..=4 => Sense::Ge,
            5..=8 => Sense::Le,
            _ => Sense::Eq,
        };
        let at_witness: f64 = terms.iter().map(|&(v, c)| c * witness[v.0]).sum();
        let rhs = if plant_feasible {
            let slack = rng.gen_range(0..=8) as f64 * 0.25;
            match sense {
                Sense::Le => at_witness + slack,
                Sense::Ge => at_witness - slack,
                Sense::Eq => at_witness,
            }
        } else {
            (rng.gen_range(-20..=40) as f64) * 0.25
        };
        b.add_constraint(format!("r{i}"), terms, sense, rhs);
    }
    b.build().expect("generator emits valid instances")
}

/// Seeded random MILP: up to 8 small bounded integers, up to 10 bounded
/// continuous variables, up to 15 rows. Integer ranges are capped so the
/// enumeration oracle stays cheap.
pub fn random_milp(seed: u64) -> MilpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let n_int = rng.gen_range(2..=8);
    let n_cont = rng.gen_range(2..=10);
    let m = rng.gen_range(4..=15);
    let mut b = super::InstanceBuilder::new(format!("rand-milp-{seed}"));

    let mut budget = 512u64; // cap on the integer grid size
    let mut vars = Vec::new();
    for j in 0..n_int {
        let hi = if budget >= 4 && rng.gen_bool(0.3) { 3 } else { 1 };
        budget /= (hi + 1) as u64;
        vars.push(b.integer(format!("n{j}"), 0.0, hi as f64));
        if budget <= 1 {
            break;
        }
    }
    let n_int = vars.len();
    for j in 0..n_cont {
        let hi = rng.gen_range(2..=8) as f64;
        vars.push(b.continuous(format!("x{j}"), 0.0, hi));
    }

    for &v in vars.iter() {
        // Mixed signs are fine: every variable is boxed.
        let c = (rng.gen_range(-40..=40) as f64) * 0.1;
        if c != 0.0 {
            b.add_objective_term(v, c);
        }
    }
    // Witness keeps most seeds feasible: integer-valued on the integers.
    let witness: Vec<f64> = vars
        .iter()
        .enumerate()
        .map(|(j, _)| {
            if j < n_int {
                rng.gen_range(0..=1) as f64
            } else {
                rng.gen_range(0..=4) as f64 * 0.5
            }
        })
        .collect();
    let plant_feasible = seed % 6 != 5;
    for i in 0..m {
        let nnz = rng.gen_range(2..=4.min(n_int + n_cont));
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < nnz {
            let j = rng.gen_range(0..vars.len());
            if !picked.contains(&j) {
                picked.push(j);
            }
        }
        picked.sort_unstable();
        let terms: Vec<_> = picked
            .iter()
            .map(|&j| (vars[j], (rng.gen_range(-8..=8) as f64) * 0.5))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        if terms.is_empty() {
            continue;
        }
        let sense = match rng.gen_range(0..10) {
            0..=4 => Sense::Le,
            5..=8 => Sense::Ge,
            _ => Sense::Eq,
        };
        let at_witness: f64 = terms.iter().map(|&(v, c)| c * witness[v.0]).sum();
        let rhs = if plant_feasible {
            let slack = rng.gen_range(0..=6) as f64 * 0.5;
            match sense {
                Sense::Le => at_witness + slack,
                Sense::Ge => at_witness - slack,
                Sense::Eq => at_witness,
            }
        } else {
            (rng.gen_range(-10..=30) as f64) * 0.5
        };
        b.add_constraint(format!("r{i}"), terms, sense, rhs);
    }
    b.build().expect("generator emits valid instances")
}

#[cfg(test)]
mod tests {
    use super::super::{solve_lp, solve_milp, SolveStatus, SolverConfig};
    use super::*;

    fn tight() -> SolverConfig {
        SolverConfig {
            optimality_gap: 1e-9,
            ..SolverConfig::default()
        }
    }

    fn check_lp_against_oracle(seed: u64, inst: &super::super::MilpInstance) {
        let sol = solve_lp(inst, &tight()).unwrap();
        match vertex_enumeration_lp(inst) {
            OracleResult::Optimal(want) => {
                assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}");
                assert!(
                    (sol.objective - want).abs() <= 1e-6,
                    "seed {seed}: simplex {} vs oracle {want}",
                    sol.objective
                );
                assert!(
                    (sol.objective - sol.dual_objective).abs()
                        <= 1e-7 * (1.0 + sol.objective.abs()),
                    "duality gap at seed {seed}"
                );
            }
            OracleResult::Infeasible => {
                assert_eq!(sol.status, SolveStatus::Infeasible, "seed {seed}");
            }
        }
    }

    #[test]
    fn lp_matches_vertex_enumeration() {
        // Two full-size instances (feasible-planted and raw), then a wider
        // batch of smaller ones where the enumeration is cheap.
        check_lp_against_oracle(0, &random_lp(0));
        check_lp_against_oracle(4, &random_lp(4));
        for seed in 0..24u64 {
            check_lp_against_oracle(1000 + seed, &random_lp_sized(1000 + seed, 6, 8));
        }
    }

    #[test]
    fn milp_matches_integer_enumeration_small_batch() {
        let cfg = tight();
        let mut optimal = 0;
        for seed in 0..12u64 {
            let inst = random_milp(seed);
            let got = solve_milp(&inst, &cfg).unwrap();
            match enumerate_milp(&inst, &cfg) {
                OracleResult::Optimal(want) => {
                    assert_eq!(got.status, SolveStatus::Optimal, "seed {seed}");
                    assert!(
                        (got.objective - want).abs() <= 1e-6,
                        "seed {seed}: bb {} vs oracle {want}",
                        got.objective
                    );
                    assert!(got.objective >= got.best_bound - 1e-9);
                    optimal += 1;
                }
                OracleResult::Infeasible => {
                    assert_eq!(got.status, SolveStatus::Infeasible, "seed {seed}");
                }
            }
        }
        assert!(optimal >= 3, "want several feasible MILPs in the sample");
    }
}
