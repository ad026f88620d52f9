//! Scale probe: a dispatch-shaped LP/MILP in the size class of the full
//! desk fixture. Ignored by default; run explicitly when touching solver
//! internals:
//!
//! ```text
//! cargo test -p oehplan --test solver_scale -- --ignored --nocapture
//! ```

use oehplan::milp::{solve_lp, solve_milp, InstanceBuilder, Sense, SolveStatus, SolverConfig};
use std::time::Instant;

/// Periods x nodes grid with storage chains, caps, balances and a coupling
/// emission row; roughly the row/column mix the compiled model produces.
fn dispatch_like(periods: usize, nodes: usize, with_integers: bool) -> oehplan::milp::MilpInstance {
    let mut b = InstanceBuilder::new("scale-probe");
    let inf = f64::INFINITY;

    // Per node: generator cap (investable-like), storage level/charge/
    // discharge, shed; one line to a common bus per node.
    let mut gen = vec![vec![]; nodes];
    let mut level = vec![vec![]; nodes];
    let mut chg = vec![vec![]; nodes];
    let mut dis = vec![vec![]; nodes];
    let mut shed = vec![vec![]; nodes];
    let mut flow_in = vec![vec![]; nodes];
    let mut flow_out = vec![vec![]; nodes];
    let mut caps = Vec::new();
    let mut units = Vec::new();
    for z in 0..nodes {
        let c = b.continuous(format!("cap{z}"), 0.0, 120.0);
        caps.push(c);
        b.add_objective_term(c, 900.0 + 7.0 * z as f64);
        if with_integers {
            let g = b.integer(format!("units{z}"), 0.0, 12.0);
            b.add_objective_term(g, 40.0);
            b.add_constraint(
                format!("modcap{z}"),
                vec![(c, 1.0), (g, -10.0)],
                Sense::Le,
                0.0,
            );
            units.push(g);
        }
        for t in 0..periods {
            gen[z].push(b.continuous(format!("g{z}.{t}"), 0.0, inf));
            level[z].push(b.continuous(format!("q{z}.{t}"), 0.0, 80.0));
            chg[z].push(b.continuous(format!("c{z}.{t}"), 0.0, 30.0));
            dis[z].push(b.continuous(format!("d{z}.{t}"), 0.0, 30.0));
            shed[z].push(b.continuous(format!("s{z}.{t}"), 0.0, inf));
            flow_in[z].push(b.continuous(format!("fi{z}.{t}"), 0.0, 60.0));
            flow_out[z].push(b.continuous(format!("fo{z}.{t}"), 0.0, 60.0));
        }
    }
    let mut emis_terms = Vec::new();
    for z in 0..nodes {
        for t in 0..periods {
            let demand = 8.0
                + 6.0 * ((t as f64 * 0.26).sin().abs())
                + 3.0 * ((z as f64 + 1.0) * 0.7).fract();
            // generation cap by investable capacity
            b.add_constraint(
                format!("gc{z}.{t}"),
                vec![(gen[z][t], 1.0), (caps[z], -1.0)],
                Sense::Le,
                0.0,
            );
            // nodal balance: gen + dis + net import + shed = demand + chg
            b.add_constraint(
                format!("bal{z}.{t}"),
                vec![
                    (gen[z][t], 1.0),
                    (dis[z][t], 1.0),
                    (flow_in[z][t], 0.95),
                    (flow_out[z][t], -1.0),
                    (shed[z][t], 1.0),
                    (chg[z][t], -1.0),
                ],
                Sense::Eq,
                demand,
            );
            // storage chain with cyclic wrap
            let prev = if t == 0 { periods - 1 } else { t - 1 };
            b.add_constraint(
                format!("st{z}.{t}"),
                vec![
                    (level[z][t], 1.0),
                    (level[z][prev], -1.0),
                    (chg[z][prev], -0.92),
                    (dis[z][prev], 1.0),
                ],
                Sense::Eq,
                0.0,
            );
            // ramp on generation
            b.add_constraint(
                format!("rup{z}.{t}"),
                vec![(gen[z][t], 1.0), (gen[z][prev], -1.0)],
                Sense::Le,
                25.0,
            );
            b.add_objective_term(gen[z][t], 35.0 + (z as f64));
            b.add_objective_term(shed[z][t], 5000.0);
            emis_terms.push((gen[z][t], 0.6));
        }
    }
    // system-wide flow conservation at the shared bus
    for t in 0..periods {
        let mut terms = Vec::new();
        for z in 0..nodes {
            terms.push((flow_out[z][t], 0.97));
            terms.push((flow_in[z][t], -1.0));
        }
        b.add_constraint(format!("bus{t}"), terms, Sense::Eq, 0.0);
    }
    b.add_constraint("emis", emis_terms, Sense::Le, 0.55 * (nodes * periods) as f64 * 8.0);
    b.build().unwrap()
}

#[test]
#[ignore = "manual performance probe"]
fn big_lp_and_milp_timing() {
    let periods = 96;
    let nodes = 24;
    let inst = dispatch_like(periods, nodes, false);
    println!(
        "LP probe: {} vars, {} rows",
        inst.num_vars(),
        inst.num_constraints()
    );
    let t0 = Instant::now();
    let cfg = SolverConfig::default();
    let sol = solve_lp(&inst, &cfg).unwrap();
    println!(
        "LP: status {:?} obj {:.3} iters {} in {:?}",
        sol.status,
        sol.objective,
        sol.iterations,
        t0.elapsed()
    );
    assert_eq!(sol.status, SolveStatus::Optimal);

    let inst = dispatch_like(periods, nodes, true);
    println!(
        "MILP probe: {} vars, {} rows",
        inst.num_vars(),
        inst.num_constraints()
    );
    let t0 = Instant::now();
    let sol = solve_milp(&inst, &cfg).unwrap();
    println!(
        "MILP: status {:?} obj {:.3} nodes {} iters {} in {:?}",
        sol.status,
        sol.objective,
        sol.nodes,
        sol.simplex_iterations,
        t0.elapsed()
    );
    assert_eq!(sol.status, SolveStatus::Optimal);
}
