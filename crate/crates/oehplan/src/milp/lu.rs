//! Sparse LU factorisation of simplex basis matrices.
//!
//! Left-looking Gilbert-Peierls elimination with partial pivoting: each
//! basis column is solved against the already-built `L` using a depth-first
//! reachability pass, then the largest remaining entry becomes the pivot.
//! Columns are processed sparsest-first, which keeps fill low for the
//! slack-heavy bases the simplex produces. Basis changes between
//! refactorisations are absorbed by product-form eta vectors.

/// Compressed sparse column matrix.
#[derive(Debug, Clone, Default)]
pub struct Csc {
    pub nrows: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl Csc {
    pub fn ncols(&self) -> usize {
        self.col_ptr.len().saturating_sub(1)
    }

    pub fn col(&self, j: usize) -> (&[u32], &[f64]) {
        let a = self.col_ptr[j];
        let b = self.col_ptr[j + 1];
        (&self.row_idx[a..b], &self.values[a..b])
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    /// Builds from per-column sparse entries.
    pub fn from_columns(nrows: usize, cols: &[Vec<(u32, f64)>]) -> Csc {
        let mut m = Csc {
            nrows,
            col_ptr: Vec::with_capacity(cols.len() + 1),
            row_idx: Vec::new(),
            values: Vec::new(),
        };
        m.col_ptr.push(0);
        for col in cols {
            for &(i, v) in col {
                m.row_idx.push(i);
                m.values.push(v);
            }
            m.col_ptr.push(m.row_idx.len());
        }
        m
    }
}

const NONE: u32 = u32::MAX;

/// One product-form update `B_new = B_old * (I + (w - e_r) e_r^T)`.
struct Eta {
    slot: u32,
    /// Sparse spike `w`, including the `slot` entry.
    w: Vec<(u32, f64)>,
    w_slot: f64,
}

/// LU factors of a basis plus the eta updates applied since the last
/// refactorisation. Row/slot indexing follows the constraint rows.
pub struct Factorization {
    m: usize,
    /// `L` columns by pivot position (unit diagonal implicit), entries are
    /// (row, value) for not-yet-pivoted rows at creation time.
    lcols: Vec<Vec<(u32, f64)>>,
    /// `U` strictly-upper entries by pivot position: (earlier position, value).
    ucols: Vec<Vec<(u32, f64)>>,
    udiag: Vec<f64>,
    /// position -> row
    p: Vec<u32>,
    /// row -> position
    pinv: Vec<u32>,
    /// position -> basis slot of the column pivoted there
    q: Vec<u32>,
    etas: Vec<Eta>,
    // scratch
    work: Vec<f64>,
    mark: Vec<bool>,
    stack: Vec<(u32, usize)>,
    topo: Vec<u32>,
}

/// Why a factorisation or update could not proceed.
#[derive(Debug)]
pub enum FactorError {
    /// The basis matrix is numerically singular.
    Singular { position: usize },
}

impl Factorization {
    pub fn new(m: usize) -> Factorization {
        Factorization {
            m,
            lcols: Vec::new(),
            ucols: Vec::new(),
            udiag: Vec::new(),
            p: Vec::new(),
            pinv: Vec::new(),
            q: Vec::new(),
            etas: Vec::new(),
            work: vec![0.0; m],
            mark: vec![false; m],
            stack: Vec::new(),
            topo: Vec::new(),
        }
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Factorises the basis given by `columns` (one sparse column per slot).
    pub fn refactor<F>(&mut self, columns: F) -> Result<(), FactorError>
    where
        F: Fn(usize) -> Vec<(u32, f64)>,
    {
        let m = self.m;
        self.lcols.clear();
        self.ucols.clear();
        self.udiag.clear();
        self.etas.clear();
        self.p.clear();
        self.pinv = vec![NONE; m];
        self.q.clear();
        self.lcols.resize_with(m, Vec::new);
        self.ucols.resize_with(m, Vec::new);
        self.udiag.resize(m, 0.0);
        self.p.resize(m, NONE);
        self.q.resize(m, NONE);

        let cols: Vec<Vec<(u32, f64)>> = (0..m).map(&columns).collect();
        // Sparsest columns first: slack singletons pivot immediately and the
        // denser structural columns see a mostly-built L.
        let mut order: Vec<u32> = (0..m as u32).collect();
        order.sort_by_key(|&s| (cols[s as usize].len(), s));

        for (pos, &slot) in order.iter().enumerate() {
            let col = &cols[slot as usize];
            // Sparse solve L * x = col restricted to pivoted rows.
            self.sparse_lsolve(col);

            let mut pivot_row = NONE;
            let mut pivot_abs = 0.0;
            for &r in &self.topo {
                let r = r as usize;
                if self.pinv[r] == NONE {
                    let a = self.work[r].abs();
                    if a > pivot_abs {
                        pivot_abs = a;
                        pivot_row = r as u32;
                    }
                }
            }
            if pivot_row == NONE || pivot_abs < 1e-11 {
                self.clear_work();
                return Err(FactorError::Singular { position: pos });
            }
            let piv = self.work[pivot_row as usize];

            let mut lcol = Vec::new();
            let mut ucol = Vec::new();
            for &r in &self.topo {
                let ru = r as usize;
                let v = self.work[ru];
                self.work[ru] = 0.0;
                self.mark[ru] = false;
                if v == 0.0 {
                    continue;
                }
                let prev = self.pinv[ru];
                if prev != NONE {
                    ucol.push((prev, v));
                } else if r != pivot_row {
                    lcol.push((r, v / piv));
                }
            }
            self.topo.clear();
            self.lcols[pos] = lcol;
            self.ucols[pos] = ucol;
            self.udiag[pos] = piv;
            self.p[pos] = pivot_row;
            self.pinv[pivot_row as usize] = pos as u32;
            self.q[pos] = slot;
        }
        Ok(())
    }

    /// Scatter `col` into `work` and eliminate against pivoted columns of
    /// `L`, visiting rows in topological order (depth-first reach).
    fn sparse_lsolve(&mut self, col: &[(u32, f64)]) {
        debug_assert!(self.topo.is_empty());
        for &(r, _) in col {
            if !self.mark[r as usize] {
                self.dfs_reach(r);
            }
        }
        for &(r, v) in col {
            self.work[r as usize] += v;
        }
        // topo currently holds reverse topological order (postorder pushes);
        // process from the back to respect dependencies.
        for k in (0..self.topo.len()).rev() {
            let r = self.topo[k] as usize;
            let pos = self.pinv[r];
            if pos == NONE {
                continue;
            }
            let xv = self.work[r];
            if xv == 0.0 {
                continue;
            }
            for &(i, lv) in &self.lcols[pos as usize] {
                self.work[i as usize] -= lv * xv;
            }
        }
        // Reorder topo so callers can consume it naturally.
        self.topo.reverse();
    }

    /// Iterative DFS over the pattern of `L` starting at row `root`,
    /// appending rows to `topo` in postorder.
    fn dfs_reach(&mut self, root: u32) {
        self.stack.push((root, 0));
        self.mark[root as usize] = true;
        while let Some(&mut (r, ref mut next)) = self.stack.last_mut() {
            let pos = self.pinv[r as usize];
            let children: &[(u32, f64)] = if pos == NONE {
                &[]
            } else {
                &self.lcols[pos as usize]
            };
            if *next < children.len() {
                let child = children[*next].0;
                *next += 1;
                if !self.mark[child as usize] {
                    self.mark[child as usize] = true;
                    self.stack.push((child, 0));
                }
            } else {
                self.topo.push(r);
                self.stack.pop();
            }
        }
    }

    fn clear_work(&mut self) {
        for &r in &self.topo {
            self.work[r as usize] = 0.0;
            self.mark[r as usize] = false;
        }
        self.topo.clear();
    }

    /// Solves `B x = rhs` in place (`rhs` indexed by row, result by slot).
    pub fn ftran(&self, rhs: &mut [f64], scratch: &mut Vec<f64>) {
        let m = self.m;
        scratch.clear();
        scratch.resize(m, 0.0);
        // L v = P rhs
        let v = scratch;
        for pos in 0..m {
            let val = rhs[self.p[pos] as usize];
            if val != 0.0 {
                v[pos] = val;
            }
        }
        for pos in 0..m {
            let val = v[pos];
            if val == 0.0 {
                continue;
            }
            for &(row, lv) in &self.lcols[pos] {
                let dst = self.pinv[row as usize];
                debug_assert_ne!(dst, NONE);
                v[dst as usize] -= lv * val;
            }
        }
        // U y = v (positions), then scatter to slots.
        for pos in (0..m).rev() {
            let y = v[pos] / self.udiag[pos];
            v[pos] = y;
            if y != 0.0 {
                for &(prev, uv) in &self.ucols[pos] {
                    v[prev as usize] -= uv * y;
                }
            }
        }
        for r in rhs.iter_mut() {
            *r = 0.0;
        }
        for pos in 0..m {
            rhs[self.q[pos] as usize] = v[pos];
        }
        // Apply eta inverses in creation order.
        for eta in &self.etas {
            let s = eta.slot as usize;
            let t = rhs[s] / eta.w_slot;
            if t != 0.0 || rhs[s] != 0.0 {
                for &(i, wv) in &eta.w {
                    rhs[i as usize] -= t * wv;
                }
                rhs[s] = t;
            }
        }
    }

    /// Solves `B^T y = c` in place (`c` indexed by slot, result by row).
    pub fn btran(&self, c: &mut [f64], scratch: &mut Vec<f64>) {
        let m = self.m;
        // Eta transposes in reverse creation order.
        for eta in self.etas.iter().rev() {
            let s = eta.slot as usize;
            let mut dot = 0.0;
            for &(i, wv) in &eta.w {
                if i != eta.slot {
                    dot += wv * c[i as usize];
                }
            }
            c[s] = (c[s] - dot) / eta.w_slot;
        }
        scratch.clear();
        scratch.resize(m, 0.0);
        let t = scratch;
        // U^T t = Q^T c  (forward over positions)
        for pos in 0..m {
            let mut val = c[self.q[pos] as usize];
            for &(prev, uv) in &self.ucols[pos] {
                val -= uv * t[prev as usize];
            }
            t[pos] = val / self.udiag[pos];
        }
        // L^T s = t (backward), result scattered by pivot row.
        for pos in (0..m).rev() {
            let mut val = t[pos];
            for &(row, lv) in &self.lcols[pos] {
                val -= lv * t[self.pinv[row as usize] as usize];
            }
            t[pos] = val;
        }
        for r in c.iter_mut() {
            *r = 0.0;
        }
        for pos in 0..m {
            c[self.p[pos] as usize] = t[pos];
        }
    }

    /// Registers the basis change "column entering at `slot`", where
    /// `spike` is the FTRAN-ed entering column. Returns false when the
    /// pivot element is too small to absorb as an eta (caller refactors).
    pub fn push_eta(&mut self, slot: usize, spike: &[f64], pivot_tol: f64) -> bool {
        let w_slot = spike[slot];
        let mut max_abs = 0.0f64;
        for &v in spike {
            max_abs = max_abs.max(v.abs());
        }
        if w_slot.abs() < pivot_tol.max(1e-12 * max_abs) {
            return false;
        }
        let mut w = Vec::new();
        for (i, &v) in spike.iter().enumerate() {
            if v != 0.0 {
                w.push((i as u32, v));
            }
        }
        self.etas.push(Eta {
            slot: slot as u32,
            w,
            w_slot,
        });
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(cols: &[Vec<(u32, f64)>], x: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                out[i as usize] += v * x[j];
            }
        }
        out
    }

    #[test]
    fn factor_solve_roundtrip() {
        // 4x4 with a mix of dense and singleton columns.
        let cols = vec![
            vec![(0, 2.0), (2, 1.0)],
            vec![(1, 3.0)],
            vec![(0, 1.0), (2, -4.0), (3, 0.5)],
            vec![(3, 5.0), (1, -1.0)],
        ];
        let mut f = Factorization::new(4);
        f.refactor(|j| cols[j].clone()).unwrap();

        let mut rhs = vec![1.0, 2.0, -3.0, 0.25];
        let want_rhs = rhs.clone();
        let mut scratch = Vec::new();
        f.ftran(&mut rhs, &mut scratch);
        let back = dense_mul(&cols, &rhs, 4);
        for (a, b) in back.iter().zip(&want_rhs) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }

        let mut c = vec![0.5, -1.0, 2.0, 1.5];
        let keep = c.clone();
        f.btran(&mut c, &mut scratch);
        // Check B^T y = c by computing column dots.
        for (j, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(i, v)| v * c[i as usize]).sum();
            assert!((dot - keep[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn eta_update_matches_refactor() {
        let mut cols = vec![
            vec![(0, 1.0), (1, 0.5)],
            vec![(1, 2.0), (2, 1.0)],
            vec![(2, 3.0), (0, -1.0)],
        ];
        let mut f = Factorization::new(3);
        f.refactor(|j| cols[j].clone()).unwrap();

        // Replace column 1 with a new column.
        let newcol = vec![(0u32, 0.7), (1, -1.2), (2, 0.4)];
        let mut spike = vec![0.0; 3];
        for &(i, v) in &newcol {
            spike[i as usize] = v;
        }
        let mut scratch = Vec::new();
        f.ftran(&mut spike, &mut scratch);
        assert!(f.push_eta(1, &spike, 1e-9));
        cols[1] = newcol;

        let mut rhs = vec![0.3, 1.0, -0.2];
        let want = rhs.clone();
        f.ftran(&mut rhs, &mut scratch);
        let back = dense_mul(&cols, &rhs, 3);
        for (a, b) in back.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }

        let mut c = vec![1.0, 0.0, 2.0];
        let keep = c.clone();
        f.btran(&mut c, &mut scratch);
        for (j, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(i, v)| v * c[i as usize]).sum();
            assert!((dot - keep[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_basis_detected() {
        let cols = vec![vec![(0u32, 1.0)], vec![(0u32, 2.0)]];
        let mut f = Factorization::new(2);
        assert!(matches!(
            f.refactor(|j| cols[j].clone()),
            Err(FactorError::Singular { .. })
        ));
    }
}
