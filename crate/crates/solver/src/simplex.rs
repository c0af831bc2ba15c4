//! Bounded-variable revised simplex with a dense maintained basis inverse.
//!
//! Phase 1 minimizes the sum of bound violations of basic variables starting
//! from whatever basis is loaded (all-slack on a fresh instance, the previous
//! optimal basis on warm starts). Phase 2 prices the true costs. Pricing is
//! Dantzig with a Bland fallback after a run of degenerate pivots; ties are
//! broken by lowest column index throughout, so repeated runs are
//! bit-identical.
//!
//! The instance is designed to be reused across branch-and-bound nodes:
//! variable bounds may be changed and rows appended between `solve` calls
//! without invalidating the factorization.

use crate::program::{LinearRow, RowSense};
use crate::SolverError;

const FEAS_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-8;
const RATIO_TIE: f64 = 1e-9;
const REFACTOR_INTERVAL: u64 = 1500;
const BLAND_TRIGGER: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free variable resting at zero.
    FreeZero,
}

fn initial_nonbasic_state(lower: f64, upper: f64) -> VarState {
    if lower.is_finite() {
        VarState::AtLower
    } else if upper.is_finite() {
        VarState::AtUpper
    } else {
        VarState::FreeZero
    }
}

pub struct Simplex {
    m: usize,
    n: usize,
    n_struct: usize,
    /// Sparse columns (row, coef), structural then slacks, sorted by row.
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    obj: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    /// Dense basis inverse, one Vec per row.
    binv: Vec<Vec<f64>>,
    x: Vec<f64>,
    pivots_since_refactor: u64,
    pub pivot_count: u64,
}

impl Simplex {
    /// Builds an instance from bounds, costs and rows; starts on the
    /// all-slack basis.
    pub fn new(lower: &[f64], upper: &[f64], objective: &[f64], rows: &[LinearRow]) -> Self {
        let n_struct = lower.len();
        let m = rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct];
        let mut lo = lower.to_vec();
        let mut up = upper.to_vec();
        let mut obj = objective.to_vec();
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in rows.iter().enumerate() {
            for &(col, coef) in &row.terms {
                cols[col].push((i, coef));
            }
            rhs.push(row.rhs);
        }
        for row in rows.iter() {
            let (sl, su) = slack_bounds(row.sense);
            lo.push(sl);
            up.push(su);
            obj.push(0.0);
        }
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
        }
        let n = n_struct + m;
        let mut state = Vec::with_capacity(n);
        for j in 0..n_struct {
            state.push(initial_nonbasic_state(lo[j], up[j]));
        }
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            basis.push(n_struct + i);
            state.push(VarState::Basic(i));
        }
        let binv = identity(m);
        let mut s = Self {
            m,
            n,
            n_struct,
            cols,
            lower: lo,
            upper: up,
            obj,
            rhs,
            basis,
            state,
            binv,
            x: vec![0.0; n],
            pivots_since_refactor: 0,
            pivot_count: 0,
        };
        for j in 0..n {
            if !matches!(s.state[j], VarState::Basic(_)) {
                s.x[j] = s.resting_value(j);
            }
        }
        s
    }


    fn resting_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::FreeZero => 0.0,
            VarState::Basic(_) => self.x[j],
        }
    }

    /// Changes the bounds of a column between solves.
    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lower[col] = lower;
        self.upper[col] = upper;
        if !matches!(self.state[col], VarState::Basic(_)) {
            self.state[col] = initial_nonbasic_state(lower, upper);
            self.x[col] = self.resting_value(col);
        }
    }


    /// Appends a row (plus its slack, made basic in the new row).
    pub fn append_row(&mut self, row: &LinearRow) {
        let i = self.m;
        for &(col, coef) in &row.terms {
            self.cols[col].push((i, coef));
        }
        let (sl, su) = slack_bounds(row.sense);
        let slack = self.n;
        self.cols.push(vec![(i, 1.0)]);
        self.lower.push(sl);
        self.upper.push(su);
        self.obj.push(0.0);
        self.rhs.push(row.rhs);
        self.state.push(VarState::Basic(i));
        self.x.push(0.0);
        self.basis.push(slack);
        // binv grows: new last row = [-a_B^T binv, 1]
        let mut new_row = vec![0.0; i + 1];
        for &(col, coef) in &row.terms {
            if let VarState::Basic(r) = self.state[col] {
                let brow = &self.binv[r];
                for k in 0..i {
                    new_row[k] -= coef * brow[k];
                }
            }
        }
        new_row[i] = 1.0;
        for r in self.binv.iter_mut() {
            r.push(0.0);
        }
        self.binv.push(new_row);
        self.m += 1;
        self.n += 1;
    }

    /// Recomputes basic values from nonbasic resting values.
    fn recompute_basics(&mut self) {
        let mut r = self.rhs.clone();
        for j in 0..self.n {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.resting_value(j);
            self.x[j] = v;
            if v != 0.0 {
                for &(row, coef) in &self.cols[j] {
                    r[row] -= coef * v;
                }
            }
        }
        let mut xb = vec![0.0; self.m];
        for i in 0..self.m {
            let brow = &self.binv[i];
            let mut acc = 0.0;
            for k in 0..self.m {
                acc += brow[k] * r[k];
            }
            xb[i] = acc;
        }
        for i in 0..self.m {
            self.x[self.basis[i]] = xb[i];
        }
    }

    /// Rebuilds the inverse from the basis columns by Gauss-Jordan with
    /// partial pivoting. Errors on a singular basis.
    fn refactor(&mut self) -> Result<(), SolverError> {
        let m = self.m;
        let mut bmat: Vec<Vec<f64>> = vec![vec![0.0; m]; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            for &(row, coef) in &self.cols[bj] {
                bmat[row][i] = coef;
            }
        }
        let mut inv = identity(m);
        for k in 0..m {
            let mut piv_row = k;
            let mut piv_val = bmat[k][k].abs();
            for i in (k + 1)..m {
                let v = bmat[i][k].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = i;
                }
            }
            if piv_val < 1e-12 {
                return Err(SolverError::Numerical("singular basis".into()));
            }
            bmat.swap(k, piv_row);
            inv.swap(k, piv_row);
            let inv_p = 1.0 / bmat[k][k];
            for v in bmat[k].iter_mut() {
                *v *= inv_p;
            }
            for v in inv[k].iter_mut() {
                *v *= inv_p;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = bmat[i][k];
                if f == 0.0 {
                    continue;
                }
                row_axpy(&mut bmat, i, k, f);
                row_axpy(&mut inv, i, k, f);
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        Ok(())
    }

    /// binv * A_q for a sparse column.
    fn ftran(&self, q: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.m];
        let col = &self.cols[q];
        for i in 0..self.m {
            let brow = &self.binv[i];
            let mut acc = 0.0;
            for &(row, coef) in col {
                acc += coef * brow[row];
            }
            w[i] = acc;
        }
        w
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lower[j] - FEAS_TOL {
            self.lower[j] - v
        } else if v > self.upper[j] + FEAS_TOL {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    fn total_infeasibility(&self) -> f64 {
        self.basis.iter().map(|&j| self.infeasibility(j)).sum()
    }

    /// Runs phase 1 if the current basis is primal infeasible, then phase 2.
    pub fn solve(&mut self) -> Result<LpStatus, SolverError> {
        self.recompute_basics();
        if self.total_infeasibility() > FEAS_TOL {
            match self.run_phase(true)? {
                LpStatus::Optimal => {
                    if self.total_infeasibility() > 1e-7 {
                        return Ok(LpStatus::Infeasible);
                    }
                }
                _ => unreachable!("phase 1 only ends optimal"),
            }
        }
        self.run_phase(false)
    }

    fn run_phase(&mut self, phase1: bool) -> Result<LpStatus, SolverError> {
        let iter_limit = 20_000 + 400 * self.m as u64;
        let mut iters: u64 = 0;
        let mut degenerate_run: u32 = 0;
        loop {
            iters += 1;
            if iters > iter_limit {
                return Err(SolverError::Numerical(format!(
                    "simplex iteration limit hit ({iter_limit})"
                )));
            }
            if phase1 && self.total_infeasibility() <= FEAS_TOL {
                return Ok(LpStatus::Optimal);
            }
            let bland = degenerate_run >= BLAND_TRIGGER;
            let y = self.price_duals(phase1);
            let Some((q, dir)) = self.select_entering(phase1, bland, &y) else {
                return Ok(LpStatus::Optimal);
            };
            let dirf = dir as f64;
            let w = self.ftran(q);

            // ratio test: earliest blocking event as the entering var moves
            let mut t_best = if self.lower[q].is_finite() && self.upper[q].is_finite() {
                self.upper[q] - self.lower[q]
            } else {
                f64::INFINITY
            };
            let mut cand: Option<(usize, f64, f64)> = None; // (basis pos, |w_i|, bound hit)
            for i in 0..self.m {
                let wi = w[i];
                if wi.abs() < PIVOT_TOL {
                    continue;
                }
                let bj = self.basis[i];
                let rate = -dirf * wi;
                let xv = self.x[bj];
                let event = if phase1 && self.infeasibility(bj) > FEAS_TOL {
                    // infeasible basic blocks where it regains feasibility
                    if xv < self.lower[bj] && rate > 0.0 {
                        Some(((self.lower[bj] - xv) / rate, self.lower[bj]))
                    } else if xv > self.upper[bj] && rate < 0.0 {
                        Some(((self.upper[bj] - xv) / rate, self.upper[bj]))
                    } else {
                        None
                    }
                } else if rate > 0.0 && self.upper[bj].is_finite() {
                    Some((((self.upper[bj] - xv) / rate).max(0.0), self.upper[bj]))
                } else if rate < 0.0 && self.lower[bj].is_finite() {
                    Some((((self.lower[bj] - xv) / rate).max(0.0), self.lower[bj]))
                } else {
                    None
                };
                let Some((t, bound)) = event else { continue };
                let replace = if t < t_best - RATIO_TIE {
                    true
                } else if t <= t_best + RATIO_TIE {
                    match cand {
                        None => false, // prefer the plain bound flip on ties
                        Some((ci, cw, _)) => {
                            if bland {
                                self.basis[i] < self.basis[ci]
                            } else {
                                wi.abs() > cw + 1e-12
                                    || ((wi.abs() - cw).abs() <= 1e-12
                                        && self.basis[i] < self.basis[ci])
                            }
                        }
                    }
                } else {
                    false
                };
                if replace {
                    if t < t_best {
                        t_best = t;
                    }
                    cand = Some((i, wi.abs(), bound));
                }
            }
            if cand.is_none() && t_best.is_infinite() {
                return if phase1 {
                    Err(SolverError::Numerical("unbounded phase-1 ray".into()))
                } else {
                    Ok(LpStatus::Unbounded)
                };
            }
            if let Some((r, wr_abs, _)) = cand {
                if wr_abs < PIVOT_TOL * 10.0 && self.pivots_since_refactor > 0 {
                    // suspicious pivot on stale numbers: rebuild and retry
                    self.refactor()?;
                    self.recompute_basics();
                    degenerate_run += 1;
                    let _ = r;
                    continue;
                }
            }
            let step = t_best.max(0.0);
            if step > RATIO_TIE {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
            if step > 0.0 {
                self.x[q] += dirf * step;
                for i in 0..self.m {
                    if w[i] != 0.0 {
                        let bj = self.basis[i];
                        self.x[bj] -= dirf * step * w[i];
                    }
                }
            }
            match cand {
                None => {
                    self.state[q] = match self.state[q] {
                        VarState::AtLower => VarState::AtUpper,
                        VarState::AtUpper => VarState::AtLower,
                        other => other,
                    };
                    self.x[q] = self.resting_value(q);
                }
                Some((r, _, bound_hit)) => {
                    let leaving = self.basis[r];
                    self.x[leaving] = bound_hit;
                    self.state[leaving] = if bound_hit == self.lower[leaving] {
                        VarState::AtLower
                    } else {
                        VarState::AtUpper
                    };
                    self.pivot(r, q, &w)?;
                }
            }
            self.pivot_count += 1;
        }
    }

    fn price_duals(&self, phase1: bool) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for i in 0..self.m {
            let bj = self.basis[i];
            let c = if phase1 {
                let v = self.x[bj];
                if v < self.lower[bj] - FEAS_TOL {
                    -1.0
                } else if v > self.upper[bj] + FEAS_TOL {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.obj[bj]
            };
            if c == 0.0 {
                continue;
            }
            let brow = &self.binv[i];
            for k in 0..self.m {
                y[k] += c * brow[k];
            }
        }
        y
    }

    fn select_entering(&self, phase1: bool, bland: bool, y: &[f64]) -> Option<(usize, i8)> {
        let mut best: Option<(usize, f64, i8)> = None;
        for j in 0..self.n {
            let st = self.state[j];
            if matches!(st, VarState::Basic(_)) {
                continue;
            }
            if self.lower[j] == self.upper[j] {
                continue; // fixed column can never move
            }
            let cj = if phase1 { 0.0 } else { self.obj[j] };
            let mut d = cj;
            for &(row, coef) in &self.cols[j] {
                d -= y[row] * coef;
            }
            let dir: i8 = match st {
                VarState::AtLower if d < -DUAL_TOL => 1,
                VarState::AtUpper if d > DUAL_TOL => -1,
                VarState::FreeZero if d < -DUAL_TOL => 1,
                VarState::FreeZero if d > DUAL_TOL => -1,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            match best {
                Some((_, bd, _)) if d.abs() <= bd => {}
                _ => best = Some((j, d.abs(), dir)),
            }
        }
        best.map(|(j, _, dir)| (j, dir))
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[f64]) -> Result<(), SolverError> {
        let piv = w[r];
        if piv.abs() < PIVOT_TOL {
            return Err(SolverError::Numerical("pivot below tolerance".into()));
        }
        let inv_piv = 1.0 / piv;
        for v in self.binv[r].iter_mut() {
            *v *= inv_piv;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = w[i];
            if f == 0.0 {
                continue;
            }
            row_axpy(&mut self.binv, i, r, f);
        }
        self.basis[r] = q;
        self.state[q] = VarState::Basic(r);
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_INTERVAL {
            self.refactor()?;
            self.recompute_basics();
        }
        Ok(())
    }

    /// Structural variable values.
    pub fn values(&self) -> &[f64] {
        &self.x[..self.n_struct]
    }

    pub fn objective_value(&self) -> f64 {
        (0..self.n_struct).map(|j| self.obj[j] * self.x[j]).sum()
    }

    /// Largest bound violation over all variables, for post-solve audits.
    pub fn max_bound_violation(&self) -> f64 {
        (0..self.n)
            .map(|j| self.infeasibility(j))
            .fold(0.0, f64::max)
    }
}

fn slack_bounds(sense: RowSense) -> (f64, f64) {
    match sense {
        RowSense::Le => (0.0, f64::INFINITY),
        RowSense::Ge => (f64::NEG_INFINITY, 0.0),
        RowSense::Eq => (0.0, 0.0),
    }
}

fn identity(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| {
            let mut r = vec![0.0; m];
            r[i] = 1.0;
            r
        })
        .collect()
}

/// rows[i] -= f * rows[k]
fn row_axpy(rows: &mut [Vec<f64>], i: usize, k: usize, f: f64) {
    let (row_i, row_k) = if i < k {
        let (a, b) = rows.split_at_mut(k);
        (&mut a[i], &b[0])
    } else {
        let (a, b) = rows.split_at_mut(i);
        (&mut b[0], &a[k])
    };
    for (hv, tv) in row_i.iter_mut().zip(row_k.iter()) {
        *hv -= f * tv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{LinearRow, RowSense};

    fn row(terms: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> LinearRow {
        LinearRow { terms, sense, rhs }
    }

    #[test]
    fn min_x_above_half() {
        let mut s = Simplex::new(
            &[0.0],
            &[f64::INFINITY],
            &[1.0],
            &[row(vec![(0, 1.0)], RowSense::Ge, 0.5)],
        );
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.values()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn max_x_below_three() {
        let mut s = Simplex::new(
            &[0.0],
            &[f64::INFINITY],
            &[-1.0],
            &[row(vec![(0, 1.0)], RowSense::Le, 3.0)],
        );
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.values()[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_pair() {
        let mut s = Simplex::new(
            &[f64::NEG_INFINITY],
            &[f64::INFINITY],
            &[1.0],
            &[
                row(vec![(0, 1.0)], RowSense::Ge, 2.0),
                row(vec![(0, 1.0)], RowSense::Le, 1.0),
            ],
        );
        assert_eq!(s.solve().unwrap(), LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut s = Simplex::new(
            &[f64::NEG_INFINITY],
            &[f64::INFINITY],
            &[1.0],
            &[row(vec![(0, 1.0)], RowSense::Le, 5.0)],
        );
        assert_eq!(s.solve().unwrap(), LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_vars() {
        // min x0 + x1 st x0 + x1 = 2, x0 - x1 = 0 -> x0 = x1 = 1
        let mut s = Simplex::new(
            &[f64::NEG_INFINITY, f64::NEG_INFINITY],
            &[f64::INFINITY, f64::INFINITY],
            &[1.0, 1.0],
            &[
                row(vec![(0, 1.0), (1, 1.0)], RowSense::Eq, 2.0),
                row(vec![(0, 1.0), (1, -1.0)], RowSense::Eq, 0.0),
            ],
        );
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.values()[0] - 1.0).abs() < 1e-8);
        assert!((s.values()[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bound_change_resolve() {
        // min -x0 - x1 st x0 + x1 <= 10, x0,x1 in [0,8]
        let mut s = Simplex::new(
            &[0.0, 0.0],
            &[8.0, 8.0],
            &[-1.0, -1.0],
            &[row(vec![(0, 1.0), (1, 1.0)], RowSense::Le, 10.0)],
        );
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.objective_value() + 10.0).abs() < 1e-8);
        // now force x0 = 0 and re-solve from the warm basis
        s.set_bounds(0, 0.0, 0.0);
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.objective_value() + 8.0).abs() < 1e-8);
        // relax back
        s.set_bounds(0, 0.0, 8.0);
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.objective_value() + 10.0).abs() < 1e-8);
    }

    #[test]
    fn append_row_tightens() {
        let mut s = Simplex::new(
            &[0.0, 0.0],
            &[10.0, 10.0],
            &[-1.0, -2.0],
            &[row(vec![(0, 1.0), (1, 1.0)], RowSense::Le, 6.0)],
        );
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.objective_value() + 12.0).abs() < 1e-8);
        s.append_row(&row(vec![(1, 1.0)], RowSense::Le, 2.0));
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        // x1 = 2, x0 = 4 -> objective -8
        assert!((s.objective_value() + 8.0).abs() < 1e-8);
    }
}
