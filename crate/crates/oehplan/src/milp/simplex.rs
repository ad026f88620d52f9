//! Bounded-variable revised simplex.
//!
//! Phase 1 drives row artificials to zero, phase 2 minimises the real
//! objective. Pricing is Dantzig (most negative reduced cost) with a
//! switch to Bland's rule after `3 * (m + n)` consecutive degenerate
//! pivots, reverting once a pivot makes progress. A bounded-variable dual
//! simplex reoptimises after bound changes, which is what branch and bound
//! uses to warm-start child nodes from the parent basis.

use super::lu::{Csc, Factorization};
use super::{MilpInstance, Sense, SolveError, SolveStatus, SolverConfig};

/// Result of an LP solve (integrality ignored).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: SolveStatus,
    /// One value per structural variable (empty unless Optimal).
    pub values: Vec<f64>,
    /// One dual multiplier per constraint row (empty unless Optimal).
    pub duals: Vec<f64>,
    /// Reduced cost per structural variable (empty unless Optimal).
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Objective of the dual solution implied by `duals`/`reduced_costs`,
    /// recomputed independently of the primal path.
    pub dual_objective: f64,
    /// Residual infeasibility proven by phase 1 (certificate when
    /// status is Infeasible).
    pub phase1_infeasibility: f64,
    /// Improving ray certificate when status is Unbounded.
    pub unbounded_ray: Option<Vec<f64>>,
    pub iterations: u64,
}

/// Solves the LP relaxation of `instance`.
pub fn solve_lp(instance: &MilpInstance, config: &SolverConfig) -> Result<LpSolution, SolveError> {
    config.validate()?;
    let mut w = Worker::new(instance, config);
    let outcome = w.solve_cold()?;
    w.extract_lp(outcome, instance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum VState {
    Basic,
    AtLower,
    AtUpper,
    /// Free variable parked at zero.
    FreeZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Saved basis for warm restarts.
#[derive(Clone)]
pub(super) struct BasisSnapshot {
    basic: Vec<u32>,
    state: Vec<VState>,
}

pub(super) struct Worker {
    m: usize,
    n_struct: usize,
    /// structural + slack columns; artificial columns are implicit `±e_i`.
    cols: Csc,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Phase-2 costs per column (structural costs then zeros).
    cost: Vec<f64>,
    rhs: Vec<f64>,
    art_sign: Vec<f64>,
    art_active: Vec<bool>,
    state: Vec<VState>,
    /// slot -> column currently basic there.
    basic: Vec<u32>,
    xb: Vec<f64>,
    factor: Factorization,
    config: SolverConfig,
    pub(super) iterations: u64,
    phase1_obj: f64,
    ray: Option<Vec<f64>>,
    offset: f64,
    // scratch buffers
    y: Vec<f64>,
    spike: Vec<f64>,
    scratch: Vec<f64>,
}

const ETA_CAP: usize = 96;

impl Worker {
    pub(super) fn new(instance: &MilpInstance, config: &SolverConfig) -> Worker {
        let m = instance.num_constraints();
        let n = instance.num_vars();
        let ncols = n + m;

        let mut lower = Vec::with_capacity(ncols + m);
        let mut upper = Vec::with_capacity(ncols + m);
        let mut cost = vec![0.0; ncols];
        for v in instance.variables() {
            lower.push(v.lower);
            upper.push(v.upper);
        }
        for &(v, c) in instance.objective() {
            cost[v.0] = c;
        }

        // Column-major copy of the constraint matrix plus slack columns.
        let mut entries: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut rhs = Vec::with_capacity(m);
        for (i, c) in instance.constraints().iter().enumerate() {
            for &(v, coeff) in &c.terms {
                if coeff != 0.0 {
                    entries[v.0].push((i as u32, coeff));
                }
            }
            rhs.push(c.rhs);
            match c.sense {
                Sense::Le => {
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                }
                Sense::Ge => {
                    lower.push(f64::NEG_INFINITY);
                    upper.push(0.0);
                }
                Sense::Eq => {
                    lower.push(0.0);
                    upper.push(0.0);
                }
            }
        }
        for col in entries.iter_mut() {
            col.sort_by_key(|&(i, _)| i);
        }
        for i in 0..m {
            entries.push(vec![(i as u32, 1.0)]);
        }
        let cols = Csc::from_columns(m, &entries);

        Worker {
            m,
            n_struct: n,
            cols,
            lower,
            upper,
            cost,
            rhs,
            art_sign: vec![1.0; m],
            art_active: vec![false; m],
            state: vec![VState::AtLower; ncols],
            basic: Vec::new(),
            xb: Vec::new(),
            factor: Factorization::new(m),
            config: config.clone(),
            iterations: 0,
            phase1_obj: 0.0,
            ray: None,
            offset: instance.objective_offset(),
            y: Vec::new(),
            spike: Vec::new(),
            scratch: Vec::new(),
        }
    }

    fn ncols(&self) -> usize {
        self.n_struct + self.m
    }

    /// Column id of the artificial for row `i`.
    fn art_col(&self, i: usize) -> usize {
        self.ncols() + i
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.ncols()
    }

    fn column(&self, col: usize) -> Vec<(u32, f64)> {
        if self.is_artificial(col) {
            let i = col - self.ncols();
            vec![(i as u32, self.art_sign[i])]
        } else {
            let (rows, vals) = self.cols.col(col);
            rows.iter().copied().zip(vals.iter().copied()).collect()
        }
    }

    fn col_bounds(&self, col: usize) -> (f64, f64) {
        if self.is_artificial(col) {
            let i = col - self.ncols();
            if self.art_active[i] {
                (0.0, f64::INFINITY)
            } else {
                (0.0, 0.0)
            }
        } else {
            (self.lower[col], self.upper[col])
        }
    }

    fn nonbasic_value(&self, col: usize, st: VState) -> f64 {
        let (l, u) = self.col_bounds(col);
        match st {
            VState::AtLower => l,
            VState::AtUpper => u,
            VState::FreeZero => 0.0,
            VState::Basic => unreachable!("basic column has no nonbasic value"),
        }
    }

    /// Picks the starting nonbasic state for a column.
    fn initial_state(l: f64, u: f64) -> VState {
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if l.abs() <= u.abs() {
                    VState::AtLower
                } else {
                    VState::AtUpper
                }
            }
            (true, false) => VState::AtLower,
            (false, true) => VState::AtUpper,
            (false, false) => VState::FreeZero,
        }
    }

    pub(super) fn set_var_bounds(&mut self, var: usize, l: f64, u: f64) {
        self.lower[var] = l;
        self.upper[var] = u;
    }

    pub(super) fn var_bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub(super) fn snapshot(&self) -> BasisSnapshot {
        BasisSnapshot {
            basic: self.basic.clone(),
            state: self.state[..self.ncols()].to_vec(),
        }
    }

    /// Restores a snapshot; nonbasic values snap to the current bounds.
    /// Returns false when the basis cannot be factorised.
    pub(super) fn restore(&mut self, snap: &BasisSnapshot) -> bool {
        self.basic = snap.basic.clone();
        self.state = snap.state.clone();
        // Artificials stay pinned at zero unless re-activated by a cold start.
        for i in 0..self.m {
            self.art_active[i] = false;
            self.state.push(VState::AtLower);
        }
        for &c in &self.basic {
            self.state[c as usize] = VState::Basic;
        }
        if self.refactor().is_err() {
            return false;
        }
        self.recompute_xb();
        true
    }

    fn refactor(&mut self) -> Result<(), SolveError> {
        let cols: Vec<Vec<(u32, f64)>> =
            self.basic.iter().map(|&c| self.column(c as usize)).collect();
        self.factor
            .refactor(|slot| cols[slot].clone())
            .map_err(|_| SolveError::Numerical("singular basis".into()))
    }

    /// x_B = B^-1 (b - N x_N), from scratch.
    fn recompute_xb(&mut self) {
        let mut r = self.rhs.clone();
        for col in 0..self.ncols() + self.m {
            let st = self.state[col];
            if st == VState::Basic {
                continue;
            }
            let v = self.nonbasic_value(col, st);
            if v != 0.0 {
                for (row, coeff) in self.column_iter(col) {
                    r[row as usize] -= coeff * v;
                }
            }
        }
        self.factor.ftran(&mut r, &mut self.scratch);
        self.xb = r;
    }

    /// Cold start: choose an initial slack/artificial basis, run phase 1
    /// then phase 2.
    pub(super) fn solve_cold(&mut self) -> Result<Outcome, SolveError> {
        let ncols = self.ncols();
        self.state = vec![VState::AtLower; ncols + self.m];
        for col in 0..self.n_struct {
            let (l, u) = self.col_bounds(col);
            self.state[col] = Self::initial_state(l, u);
        }
        // Row residuals with all structural nonbasic.
        let mut resid = self.rhs.clone();
        for col in 0..self.n_struct {
            let v = self.nonbasic_value(col, self.state[col]);
            if v != 0.0 {
                let (rows, vals) = self.cols.col(col);
                for (&row, &coeff) in rows.iter().zip(vals) {
                    resid[row as usize] -= coeff * v;
                }
            }
        }
        self.basic = Vec::with_capacity(self.m);
        let mut need_phase1 = false;
        for i in 0..self.m {
            let slack = self.n_struct + i;
            let (sl, su) = self.col_bounds(slack);
            let r = resid[i];
            if r >= sl && r <= su {
                self.state[slack] = VState::Basic;
                self.basic.push(slack as u32);
                self.art_active[i] = false;
            } else {
                // Slack parks at the bound closest to the residual; the
                // artificial absorbs the rest.
                self.state[slack] = if r > su { VState::AtUpper } else { VState::AtLower };
                let sv = self.nonbasic_value(slack, self.state[slack]);
                let a = r - sv;
                self.art_sign[i] = if a >= 0.0 { 1.0 } else { -1.0 };
                self.art_active[i] = true;
                let ac = self.art_col(i);
                self.state[ac] = VState::Basic;
                self.basic.push(ac as u32);
                need_phase1 = true;
            }
        }
        self.refactor()?;
        self.recompute_xb();

        if need_phase1 {
            let phase1_cost: Vec<f64> = vec![0.0; ncols];
            let out = self.primal_loop(&phase1_cost, true)?;
            debug_assert!(out != Outcome::Unbounded, "phase 1 is bounded below");
            let infeas = self.phase1_value();
            self.phase1_obj = infeas;
            if infeas > self.config.feasibility_tol {
                return Ok(Outcome::Infeasible);
            }
            for i in 0..self.m {
                self.art_active[i] = false;
            }
        } else {
            self.phase1_obj = 0.0;
        }
        let cost = self.cost.clone();
        self.primal_loop(&cost, false)
    }

    /// Sum of artificial infeasibility (phase-1 objective).
    fn phase1_value(&self) -> f64 {
        let mut s = 0.0;
        for (slot, &col) in self.basic.iter().enumerate() {
            if self.is_artificial(col as usize) {
                s += self.xb[slot].abs();
            }
        }
        s
    }

    fn phase_cost(&self, col: usize, cost: &[f64], phase1: bool) -> f64 {
        if self.is_artificial(col) {
            if phase1 {
                1.0
            } else {
                0.0
            }
        } else if phase1 {
            0.0
        } else {
            cost[col]
        }
    }

    /// Core primal iteration loop for one phase.
    fn primal_loop(&mut self, cost: &[f64], phase1: bool) -> Result<Outcome, SolveError> {
        let total_cols = self.ncols() + self.m;
        let cmax = cost.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
        let dtol = 1e-9 * cmax;
        let mut degenerate_streak: u64 = 0;
        let bland_after = 3 * (self.m as u64 + self.ncols() as u64);
        let mut bland = false;
        let iter_cap = 200_000 + 60 * (self.m as u64 + self.ncols() as u64);
        let mut local_iters: u64 = 0;

        loop {
            local_iters += 1;
            if local_iters > iter_cap {
                return Err(SolveError::Numerical(
                    "iteration limit exceeded (possible numerical cycling)".into(),
                ));
            }
            if self.factor.eta_count() >= ETA_CAP {
                self.refactor()?;
                self.recompute_xb();
            }

            // Duals for the current phase costs.
            self.y.clear();
            self.y.resize(self.m, 0.0);
            for (slot, &col) in self.basic.iter().enumerate() {
                self.y[slot] = self.phase_cost(col as usize, cost, phase1);
            }
            self.factor.btran(&mut self.y, &mut self.scratch);

            // Pricing. Artificials never re-enter the basis.
            let mut best: Option<(usize, f64, i8)> = None; // (col, score, dir)
            for col in 0..total_cols {
                let st = self.state[col];
                if st == VState::Basic || self.is_artificial(col) {
                    continue;
                }
                let (l, u) = self.col_bounds(col);
                if l == u {
                    continue;
                }
                let mut d = self.phase_cost(col, cost, phase1);
                for (row, coeff) in self.column_iter(col) {
                    d -= coeff * self.y[row as usize];
                }
                let (score, dir) = match st {
                    VState::AtLower => (-d, 1i8),
                    VState::AtUpper => (d, -1i8),
                    VState::FreeZero => {
                        if d > 0.0 {
                            (d, -1i8)
                        } else {
                            (-d, 1i8)
                        }
                    }
                    VState::Basic => unreachable!(),
                };
                if score > dtol {
                    if bland {
                        best = Some((col, score, dir));
                        break;
                    }
                    match best {
                        Some((_, s, _)) if s >= score => {}
                        _ => best = Some((col, score, dir)),
                    }
                }
            }
            let Some((enter, _, dir)) = best else {
                return Ok(Outcome::Optimal);
            };
            let sigma = dir as f64;

            // Entering column through the basis.
            let mut spike = std::mem::take(&mut self.spike);
            spike.clear();
            spike.resize(self.m, 0.0);
            for (row, coeff) in self.column_iter(enter) {
                spike[row as usize] = coeff;
            }
            self.factor.ftran(&mut spike, &mut self.scratch);

            // Ratio test: either the entering variable hits its opposite
            // bound or some basic variable hits one of its bounds.
            let (el, eu) = self.col_bounds(enter);
            let mut limit = eu - el; // may be infinite
            let mut leave: Option<(usize, bool, f64)> = None; // slot, to_upper, |w|
            for slot in 0..self.m {
                let w = spike[slot];
                if w.abs() <= self.config.pivot_tol {
                    continue;
                }
                let bcol = self.basic[slot] as usize;
                let (bl, bu) = self.col_bounds(bcol);
                // x_b changes at rate -sigma * w per unit of entering move.
                let rate = -sigma * w;
                let (room, to_upper) = if rate > 0.0 {
                    (bu - self.xb[slot], true)
                } else {
                    (self.xb[slot] - bl, false)
                };
                if !room.is_finite() {
                    continue;
                }
                let step = room.max(0.0) / rate.abs();
                let replaces = match leave {
                    None => step < limit,
                    Some((prev_slot, _, prev_w)) => {
                        if step + 1e-12 < limit {
                            true
                        } else if step > limit + 1e-12 {
                            false
                        } else if bland {
                            // Bland: lowest column id among ties.
                            bcol < self.basic[prev_slot] as usize
                        } else {
                            // Stability: largest pivot, then lowest column id.
                            w.abs() > prev_w
                                || (w.abs() == prev_w && bcol < self.basic[prev_slot] as usize)
                        }
                    }
                };
                if replaces {
                    limit = limit.min(step);
                    leave = Some((slot, to_upper, w.abs()));
                }
            }

            if !limit.is_finite() {
                if phase1 {
                    return Err(SolveError::Numerical("unbounded phase-1 step".into()));
                }
                // Unbounded: record the improving ray over structural vars.
                let mut ray = vec![0.0; self.n_struct];
                if enter < self.n_struct {
                    ray[enter] = sigma;
                }
                for slot in 0..self.m {
                    let bcol = self.basic[slot] as usize;
                    if bcol < self.n_struct {
                        let dv = -sigma * spike[slot];
                        if dv.abs() > 1e-12 {
                            ray[bcol] = dv;
                        }
                    }
                }
                self.ray = Some(ray);
                self.spike = spike;
                return Ok(Outcome::Unbounded);
            }

            let step = limit.max(0.0);
            self.iterations += 1;
            if step <= 1e-10 {
                degenerate_streak += 1;
                if degenerate_streak >= bland_after {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }

            // Move basic values.
            if step != 0.0 {
                for slot in 0..self.m {
                    let w = spike[slot];
                    if w != 0.0 {
                        self.xb[slot] -= sigma * step * w;
                    }
                }
            }

            match leave {
                None => {
                    // Bound flip of the entering variable.
                    self.state[enter] = match self.state[enter] {
                        VState::AtLower => VState::AtUpper,
                        VState::AtUpper => VState::AtLower,
                        other => other,
                    };
                }
                Some((slot, to_upper, _)) => {
                    let leaving = self.basic[slot] as usize;
                    self.state[leaving] = if to_upper { VState::AtUpper } else { VState::AtLower };
                    let enter_val = match self.state[enter] {
                        VState::AtLower => el + step * sigma,
                        VState::AtUpper => eu + step * sigma,
                        VState::FreeZero => step * sigma,
                        VState::Basic => unreachable!(),
                    };
                    self.state[enter] = VState::Basic;
                    self.basic[slot] = enter as u32;
                    self.xb[slot] = enter_val;
                    if !self.factor.push_eta(slot, &spike, self.config.pivot_tol) {
                        self.refactor()?;
                        self.recompute_xb();
                    }
                }
            }
            self.spike = spike;
        }
    }

    fn column_iter(&self, col: usize) -> ColIter<'_> {
        if self.is_artificial(col) {
            let i = col - self.ncols();
            ColIter::Art(Some((i as u32, self.art_sign[i])))
        } else {
            let (rows, vals) = self.cols.col(col);
            ColIter::Mat(rows.iter().zip(vals.iter()))
        }
    }

    /// Dual simplex reoptimisation after bound changes, starting from the
    /// current (dual feasible) basis. Falls back on `Err` so the caller can
    /// cold-start instead.
    pub(super) fn dual_resolve(&mut self) -> Result<Outcome, SolveError> {
        let cost = self.cost.clone();
        let total_cols = self.ncols() + self.m;
        let iter_cap = 50_000 + 20 * (self.m as u64 + self.ncols() as u64);
        let mut local: u64 = 0;
        // Nonbasic values may now sit outside changed bounds; snap them.
        for col in 0..self.n_struct {
            if self.state[col] == VState::Basic {
                continue;
            }
            let (l, u) = self.col_bounds(col);
            let v = self.nonbasic_value(col, self.state[col]);
            if v < l || v > u {
                self.state[col] = Self::initial_state(l, u);
            }
        }
        self.recompute_xb();

        loop {
            local += 1;
            if local > iter_cap {
                return Err(SolveError::Numerical("dual simplex stalled".into()));
            }
            if self.factor.eta_count() >= ETA_CAP {
                self.refactor()?;
                self.recompute_xb();
            }

            // Leaving: most infeasible basic variable.
            let mut leave: Option<(usize, f64, bool)> = None; // slot, violation, at_upper
            for slot in 0..self.m {
                let bcol = self.basic[slot] as usize;
                let (bl, bu) = self.col_bounds(bcol);
                let x = self.xb[slot];
                let (viol, at_upper) = if x > bu {
                    (x - bu, true)
                } else if x < bl {
                    (bl - x, false)
                } else {
                    continue;
                };
                if viol > self.config.feasibility_tol / 2.0 {
                    match leave {
                        Some((_, v, _)) if v >= viol => {}
                        _ => leave = Some((slot, viol, at_upper)),
                    }
                }
            }
            let Some((slot, _, at_upper)) = leave else {
                // Primal feasible again; polish with the primal loop (it
                // exits immediately when reduced costs are already optimal).
                return self.primal_loop(&cost, false);
            };

            // Row of B^-1 through the leaving slot.
            self.y.clear();
            self.y.resize(self.m, 0.0);
            self.y[slot] = 1.0;
            self.factor.btran(&mut self.y, &mut self.scratch);

            // Reduced costs and ratio test over nonbasic columns.
            let mut duals = vec![0.0; self.m];
            for (s, &col) in self.basic.iter().enumerate() {
                duals[s] = self.phase_cost(col as usize, &cost, false);
            }
            // We recompute d_j from scratch per candidate to stay simple.
            let mut ydual = duals;
            self.factor.btran(&mut ydual, &mut self.scratch);

            let flip = if at_upper { 1.0 } else { -1.0 };
            let mut best: Option<(usize, f64, f64)> = None; // col, ratio, |alpha|
            for col in 0..total_cols {
                let st = self.state[col];
                if st == VState::Basic {
                    continue;
                }
                let (l, u) = self.col_bounds(col);
                if l == u {
                    continue;
                }
                let mut alpha = 0.0;
                let mut d = self.phase_cost(col, &cost, false);
                for (row, coeff) in self.column_iter(col) {
                    alpha += coeff * self.y[row as usize];
                    d -= coeff * ydual[row as usize];
                }
                let a = flip * alpha;
                let eligible = match st {
                    VState::AtLower => a > self.config.pivot_tol,
                    VState::AtUpper => a < -self.config.pivot_tol,
                    VState::FreeZero => a.abs() > self.config.pivot_tol,
                    VState::Basic => unreachable!(),
                };
                if !eligible {
                    continue;
                }
                let ratio = (d / a).abs();
                let better = match best {
                    None => true,
                    Some((bcol, br, ba)) => {
                        ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12
                                && (a.abs() > ba || (a.abs() == ba && col < bcol)))
                    }
                };
                if better {
                    best = Some((col, ratio, a.abs()));
                }
            }
            let Some((enter, _, _)) = best else {
                return Ok(Outcome::Infeasible);
            };

            // Pivot: entering moves so the leaving slot lands on its bound.
            let mut spike = std::mem::take(&mut self.spike);
            spike.clear();
            spike.resize(self.m, 0.0);
            for (row, coeff) in self.column_iter(enter) {
                spike[row as usize] = coeff;
            }
            self.factor.ftran(&mut spike, &mut self.scratch);

            let w_r = spike[slot];
            if w_r.abs() <= self.config.pivot_tol {
                return Err(SolveError::Numerical("dual pivot too small".into()));
            }
            let bcol = self.basic[slot] as usize;
            let (bl, bu) = self.col_bounds(bcol);
            let target = if at_upper { bu } else { bl };
            let delta = (self.xb[slot] - target) / w_r;
            for s in 0..self.m {
                let w = spike[s];
                if w != 0.0 {
                    self.xb[s] -= delta * w;
                }
            }
            let enter_val = self.nonbasic_value(enter, self.state[enter]) + delta;
            self.state[bcol] = if at_upper { VState::AtUpper } else { VState::AtLower };
            self.state[enter] = VState::Basic;
            self.basic[slot] = enter as u32;
            self.xb[slot] = enter_val;
            self.iterations += 1;
            if !self.factor.push_eta(slot, &spike, self.config.pivot_tol) {
                self.refactor()?;
                self.recompute_xb();
            }
            self.spike = spike;
        }
    }

    /// Current value of every structural variable.
    pub(super) fn structural_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_struct];
        for col in 0..self.n_struct {
            if self.state[col] != VState::Basic {
                x[col] = self.nonbasic_value(col, self.state[col]);
            }
        }
        for (slot, &col) in self.basic.iter().enumerate() {
            if (col as usize) < self.n_struct {
                x[col as usize] = self.xb[slot];
            }
        }
        x
    }

    pub(super) fn objective_value(&self) -> f64 {
        let x = self.structural_values();
        self.offset
            + x.iter()
                .enumerate()
                .map(|(j, v)| self.cost[j] * v)
                .sum::<f64>()
    }

    fn extract_lp(
        &mut self,
        outcome: Outcome,
        instance: &MilpInstance,
    ) -> Result<LpSolution, SolveError> {
        Ok(match outcome {
            Outcome::Infeasible => LpSolution {
                status: SolveStatus::Infeasible,
                values: Vec::new(),
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                objective: f64::INFINITY,
                dual_objective: f64::INFINITY,
                phase1_infeasibility: self.phase1_obj,
                unbounded_ray: None,
                iterations: self.iterations,
            },
            Outcome::Unbounded => LpSolution {
                status: SolveStatus::Unbounded,
                values: Vec::new(),
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                objective: f64::NEG_INFINITY,
                dual_objective: f64::NEG_INFINITY,
                phase1_infeasibility: 0.0,
                unbounded_ray: self.ray.take(),
                iterations: self.iterations,
            },
            Outcome::Optimal => {
                // Fresh factorisation so the reported duals do not depend on
                // accumulated eta updates.
                self.refactor()?;
                self.recompute_xb();
                let mut y = vec![0.0; self.m];
                for (slot, &col) in self.basic.iter().enumerate() {
                    y[slot] = self.phase_cost(col as usize, &self.cost, false);
                }
                self.factor.btran(&mut y, &mut self.scratch);

                let values = self.structural_values();
                let mut reduced = vec![0.0; self.n_struct];
                for col in 0..self.n_struct {
                    let mut d = self.cost[col];
                    let (rows, vals) = self.cols.col(col);
                    for (&row, &coeff) in rows.iter().zip(vals) {
                        d -= coeff * y[row as usize];
                    }
                    reduced[col] = d;
                }
                let objective = instance.objective_value(&values);
                let mut dual_obj = instance.objective_offset();
                for (i, &yi) in y.iter().enumerate() {
                    dual_obj += yi * self.rhs[i];
                }
                for col in 0..self.n_struct {
                    if self.state[col] != VState::Basic {
                        let v = self.nonbasic_value(col, self.state[col]);
                        if v != 0.0 {
                            dual_obj += reduced[col] * v;
                        }
                    }
                }
                LpSolution {
                    status: SolveStatus::Optimal,
                    values,
                    duals: y,
                    reduced_costs: reduced,
                    objective,
                    dual_objective: dual_obj,
                    phase1_infeasibility: self.phase1_obj,
                    unbounded_ray: None,
                    iterations: self.iterations,
                }
            }
        })
    }
}

enum ColIter<'a> {
    Mat(std::iter::Zip<std::slice::Iter<'a, u32>, std::slice::Iter<'a, f64>>),
    Art(Option<(u32, f64)>),
}

impl<'a> Iterator for ColIter<'a> {
    type Item = (u32, f64);

    fn next(&mut self) -> Option<(u32, f64)> {
        match self {
            ColIter::Mat(it) => it.next().map(|(&r, &v)| (r, v)),
            ColIter::Art(o) => o.take(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{InstanceBuilder, Sense, SolveStatus, SolverConfig};
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn bound_tight_single_var() {
        // min x s.t. x >= 1, x in [0, 10]
        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", 0.0, 10.0);
        b.add_constraint("c", vec![(x, 1.0)], Sense::Ge, 1.0);
        b.add_objective_term(x, 1.0);
        let inst = b.build().unwrap();
        let s = solve_lp(&inst, &cfg()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.values[0] - 1.0).abs() < 1e-9);
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vertex_forced_by_gradient() {
        // min -x - 2y s.t. x + y <= 1, x, y in [0, 1] -> (0, 1), obj -2
        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", 0.0, 1.0);
        let y = b.continuous("y", 0.0, 1.0);
        b.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
        b.add_objective_term(x, -1.0);
        b.add_objective_term(y, -2.0);
        let inst = b.build().unwrap();
        let s = solve_lp(&inst, &cfg()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.values[0] - 0.0).abs() < 1e-9, "x = {}", s.values[0]);
        assert!((s.values[1] - 1.0).abs() < 1e-9, "y = {}", s.values[1]);
        assert!((s.objective + 2.0).abs() < 1e-9);
        assert!((s.objective - s.dual_objective).abs() <= 1e-7 * (1.0 + s.objective.abs()));
    }

    #[test]
    fn detects_infeasible() {
        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", 0.0, 1.0);
        b.add_constraint("c", vec![(x, 1.0)], Sense::Ge, 2.0);
        let inst = b.build().unwrap();
        let s = solve_lp(&inst, &cfg()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.phase1_infeasibility > 0.5);
    }

    #[test]
    fn detects_unbounded_with_ray() {
        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", 0.0, f64::INFINITY);
        let y = b.continuous("y", 0.0, f64::INFINITY);
        b.add_constraint("c", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
        b.add_objective_term(x, -1.0);
        let inst = b.build().unwrap();
        let s = solve_lp(&inst, &cfg()).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
        let ray = s.unbounded_ray.expect("ray");
        // Objective strictly decreases along the ray.
        let cdot: f64 = -1.0 * ray[0];
        assert!(cdot < -1e-9);
        // Le row keeps its sense along the ray.
        assert!(ray[0] - ray[1] <= 1e-9);
    }

    #[test]
    fn equality_rows_and_free_vars() {
        // min x + y s.t. x + y = 3, x - y = 1, y free -> x=2, y=1
        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", 0.0, f64::INFINITY);
        let y = b.continuous("y", f64::NEG_INFINITY, f64::INFINITY);
        b.add_constraint("c1", vec![(x, 1.0), (y, 1.0)], Sense::Eq, 3.0);
        b.add_constraint("c2", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0);
        b.add_objective_term(x, 1.0);
        b.add_objective_term(y, 1.0);
        let inst = b.build().unwrap();
        let s = solve_lp(&inst, &cfg()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.values[0] - 2.0).abs() < 1e-9);
        assert!((s.values[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_bounds_and_upper_start() {
        // min x over [-5, -2] -> -5
        let mut b = InstanceBuilder::new("t");
        let x = b.continuous("x", -5.0, -2.0);
        b.add_objective_term(x, 1.0);
        let inst = b.build().unwrap();
        let s = solve_lp(&inst, &cfg()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.values[0] + 5.0).abs() < 1e-9);
    }
}
