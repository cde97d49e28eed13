//! Two-phase revised primal simplex over a sparse LU-factorized basis.
//!
//! The working system is the equality form `A x + s = b` with one logical
//! column per row and one artificial column per row; artificials form the
//! starting basis. Pricing is Dantzig (largest reduced-cost violation) for a
//! bounded number of iterations, then switches permanently to Bland's rule,
//! which guarantees termination. The basis inverse is a Gilbert-Peierls LU
//! refreshed periodically, with product-form eta updates between
//! refactorizations. Geometric-mean row/column scaling is applied up front
//! and undone on the way out.
//!
//! Everything is deterministic: no randomness, fixed tie-breaking, fixed
//! refactorization schedule; identical inputs produce identical outputs.

use super::{LinearProgram, Sense, Solution, SolveError, SolveStatus};
use crate::scalar::{lit, Scalar};

/// Tunables for [`solve_with`]. The defaults match the tolerances promised by
/// [`Solution`]: 1e-7 absolute primal feasibility after scaling, 1e-9 on
/// reduced costs, 1e-8 relative duality gap.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Iterations priced with the Dantzig rule before switching to Bland.
    pub dantzig_iterations: usize,
    pub refactor_interval: usize,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 400_000,
            dantzig_iterations: 50_000,
            refactor_interval: 24,
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
        }
    }
}

/// Solves the LP with default options.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>) -> Result<Solution<S>, SolveError> {
    solve_with(lp, &SolveOptions::default())
}

/// Solves the LP. On persistent numerical trouble the solve restarts once
/// from scratch under pure Bland pivoting before giving up.
pub fn solve_with<S: Scalar>(
    lp: &LinearProgram<S>,
    opts: &SolveOptions,
) -> Result<Solution<S>, SolveError> {
    match Worker::new(lp, opts).run() {
        Ok(sol) => Ok(sol),
        Err(SolveError::Numerical(first)) => {
            let mut retry = opts.clone();
            retry.dantzig_iterations = 0;
            Worker::new(lp, &retry)
                .run()
                .map_err(|e| SolveError::Numerical(format!("{e}; first attempt: {first}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free nonbasic variables sit at zero.
    FreeZero,
}

struct Eta<S> {
    pos: usize,
    diag: S,
    col: Vec<(usize, S)>,
}

struct LuFactors<S> {
    /// factor step -> original row chosen as pivot
    pivot_row: Vec<usize>,
    /// factor step -> basis position whose column was factorized there
    col_order: Vec<usize>,
    lcols: Vec<Vec<(usize, S)>>,
    ucols: Vec<Vec<(usize, S)>>,
    udiag: Vec<S>,
}

struct Worker<'a, S: Scalar> {
    lp: &'a LinearProgram<S>,
    opts: SolveOptions,
    m: usize,
    n_struct: usize,
    ncols: usize,
    // CSC of [A | I_logical | I_artificial], scaled.
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<S>,
    lower: Vec<S>,
    upper: Vec<S>,
    cost: Vec<S>,
    phase2_cost: Vec<S>,
    rhs: Vec<S>,
    row_scale: Vec<S>,
    col_scale: Vec<S>,
    cost_scale: S,
    state: Vec<VarState>,
    basis: Vec<usize>,
    x_basic: Vec<S>,
    lu: Option<LuFactors<S>>,
    etas: Vec<Eta<S>>,
    fresh_factor: bool,
    iterations: usize,
    work: Vec<S>,
    work2: Vec<S>,
    /// Rotating start section for partial Dantzig pricing.
    price_cursor: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl<'a, S: Scalar> Worker<'a, S> {
    fn new(lp: &'a LinearProgram<S>, opts: &SolveOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let ncols = n + 2 * m;

        // Geometric-mean scaling over the structural matrix.
        let mut row_scale = vec![S::one(); m];
        let mut col_scale = vec![S::one(); n];
        for _ in 0..4 {
            for (i, row) in lp.rows_raw().iter().enumerate() {
                let mut lo = S::infinity();
                let mut hi = S::zero();
                for &(j, v) in &row.coeffs {
                    let a = (v * row_scale[i] * col_scale[j]).abs();
                    if a > S::zero() {
                        lo = lo.min(a);
                        hi = hi.max(a);
                    }
                }
                if hi > S::zero() {
                    row_scale[i] = clamp_scale(row_scale[i] / (lo * hi).sqrt());
                }
            }
            let mut clo = vec![S::infinity(); n];
            let mut chi = vec![S::zero(); n];
            for (i, row) in lp.rows_raw().iter().enumerate() {
                for &(j, v) in &row.coeffs {
                    let a = (v * row_scale[i] * col_scale[j]).abs();
                    if a > S::zero() {
                        clo[j] = clo[j].min(a);
                        chi[j] = chi[j].max(a);
                    }
                }
            }
            for j in 0..n {
                if chi[j] > S::zero() {
                    col_scale[j] = clamp_scale(col_scale[j] / (clo[j] * chi[j]).sqrt());
                }
            }
        }

        // Column-major scaled matrix, then logical and artificial identity
        // columns (kept unit by giving them the inverse row scale).
        let mut counts = vec![0usize; ncols];
        for row in lp.rows_raw() {
            for &(j, _) in &row.coeffs {
                counts[j] += 1;
            }
        }
        for i in 0..m {
            counts[n + i] = 1;
            counts[n + m + i] = 1;
        }
        let mut col_ptr = vec![0usize; ncols + 1];
        for j in 0..ncols {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        let nnz = col_ptr[ncols];
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![S::zero(); nnz];
        let mut fill = col_ptr.clone();
        for (i, row) in lp.rows_raw().iter().enumerate() {
            for &(j, v) in &row.coeffs {
                col_rows[fill[j]] = i;
                col_vals[fill[j]] = v * row_scale[i] * col_scale[j];
                fill[j] += 1;
            }
        }
        for i in 0..m {
            col_rows[fill[n + i]] = i;
            col_vals[fill[n + i]] = S::one();
            fill[n + i] += 1;
            col_rows[fill[n + m + i]] = i;
            col_vals[fill[n + m + i]] = S::one();
            fill[n + m + i] += 1;
        }

        let mut lower = vec![S::zero(); ncols];
        let mut upper = vec![S::zero(); ncols];
        for (j, v) in lp.vars_raw().iter().enumerate() {
            lower[j] = v.lower / col_scale[j];
            upper[j] = v.upper / col_scale[j];
        }
        for (i, row) in lp.rows_raw().iter().enumerate() {
            let (l, u) = match row.sense {
                Sense::Le => (S::zero(), S::infinity()),
                Sense::Ge => (S::neg_infinity(), S::zero()),
                Sense::Eq => (S::zero(), S::zero()),
            };
            // Logical columns carry an implicit 1/row_scale column scale.
            lower[n + i] = l;
            upper[n + i] = u;
        }

        let rhs: Vec<S> = lp
            .rows_raw()
            .iter()
            .enumerate()
            .map(|(i, r)| r.rhs * row_scale[i])
            .collect();

        // Normalize costs by the geometric mean of the nonzero magnitudes:
        // pricing tolerances then track the typical cost, not the largest
        // penalty coefficient.
        let mut phase2_cost = vec![S::zero(); ncols];
        let mut log_sum = 0.0f64;
        let mut log_n = 0usize;
        for j in 0..n {
            let c = lp.obj_raw()[j] * col_scale[j];
            phase2_cost[j] = c;
            if c != S::zero() {
                log_sum += c.abs().to_f64().unwrap_or(1.0).abs().ln();
                log_n += 1;
            }
        }
        let cmax = if log_n == 0 {
            S::one()
        } else {
            clamp_scale(S::from_f64_lit((log_sum / log_n as f64).exp()))
        };
        for c in phase2_cost.iter_mut() {
            *c = *c / cmax;
        }

        Worker {
            lp,
            opts: opts.clone(),
            m,
            n_struct: n,
            ncols,
            col_ptr,
            col_rows,
            col_vals,
            lower,
            upper,
            cost: vec![S::zero(); ncols],
            phase2_cost,
            rhs,
            row_scale,
            col_scale,
            cost_scale: cmax,
            state: vec![VarState::AtLower; ncols],
            basis: Vec::new(),
            x_basic: Vec::new(),
            lu: None,
            etas: Vec::new(),
            fresh_factor: false,
            iterations: 0,
            work: vec![S::zero(); m],
            work2: vec![S::zero(); m],
            price_cursor: 0,
        }
    }

    fn feas_tol(&self) -> S {
        lit(self.opts.feasibility_tol)
    }

    fn opt_tol(&self) -> S {
        lit(self.opts.optimality_tol)
    }

    fn piv_tol(&self) -> S {
        lit(self.opts.pivot_tol)
    }

    fn nonbasic_value(&self, j: usize) -> S {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::FreeZero => S::zero(),
            VarState::Basic(p) => self.x_basic[p],
        }
    }

    fn col(&self, j: usize) -> (&[usize], &[S]) {
        let a = self.col_ptr[j];
        let b = self.col_ptr[j + 1];
        (&self.col_rows[a..b], &self.col_vals[a..b])
    }

    fn run(mut self) -> Result<Solution<S>, SolveError> {
        for j in 0..self.n_struct {
            if self.lower[j] > self.upper[j] {
                return Ok(Solution::infeasible(0));
            }
        }

        // Start from the all-artificial basis holding the residuals.
        let n = self.n_struct;
        let m = self.m;
        for j in 0..n {
            self.state[j] = if self.lower[j].is_finite() {
                VarState::AtLower
            } else if self.upper[j].is_finite() {
                VarState::AtUpper
            } else {
                VarState::FreeZero
            };
        }
        for i in 0..m {
            self.state[n + i] = match self.lp.rows_raw()[i].sense {
                Sense::Ge => VarState::AtUpper,
                _ => VarState::AtLower,
            };
        }
        let mut resid = self.rhs.clone();
        for j in 0..n {
            let xv = self.nonbasic_value(j);
            if xv != S::zero() {
                let (rows, vals) = self.col(j);
                for (r, v) in rows.iter().zip(vals) {
                    resid[*r] = resid[*r] - *v * xv;
                }
            }
        }
        // Crash basis: any unit column (a structural appearing in exactly
        // one row, or the row's logical) that can feasibly absorb the
        // residual starts basic, its artificial pinned to zero. Only rows
        // with no such column carry a live artificial into phase 1. Load
        // shed and slack columns make this cover most of the system.
        let mut unit_col_of_row = vec![usize::MAX; m];
        for j in 0..n {
            let (rows, vals) = self.col(j);
            if rows.len() == 1 && unit_col_of_row[rows[0]] == usize::MAX {
                let i = rows[0];
                // The residual already includes the column at its resting
                // value; the basic value shifts from there.
                let v = self.nonbasic_value(j) + resid[i] / vals[0];
                if v >= self.lower[j] && v <= self.upper[j] {
                    unit_col_of_row[i] = j;
                }
            }
        }
        self.basis = Vec::with_capacity(m);
        self.x_basic = resid.clone();
        let mut phase1 = vec![S::zero(); self.ncols];
        for i in 0..m {
            let logical = n + i;
            let art = n + m + i;
            let logical_fits = match self.lp.rows_raw()[i].sense {
                Sense::Le => resid[i] >= S::zero(),
                Sense::Ge => resid[i] <= S::zero(),
                Sense::Eq => false,
            };
            let crash = if logical_fits {
                logical
            } else {
                unit_col_of_row[i]
            };
            if crash != usize::MAX {
                let rest = self.nonbasic_value(crash);
                let coeff = self.col(crash).1[0];
                self.basis.push(crash);
                self.x_basic[i] = rest + resid[i] / coeff;
                self.state[crash] = VarState::Basic(i);
                self.lower[art] = S::zero();
                self.upper[art] = S::zero();
                self.state[art] = VarState::AtLower;
            } else {
                self.basis.push(art);
                self.state[art] = VarState::Basic(i);
                if resid[i] >= S::zero() {
                    self.lower[art] = S::zero();
                    self.upper[art] = S::infinity();
                    phase1[art] = S::one();
                } else {
                    self.lower[art] = S::neg_infinity();
                    self.upper[art] = S::zero();
                    phase1[art] = -S::one();
                }
            }
        }
        self.cost = phase1;
        self.refactorize()?;

        match self.run_phase()? {
            PhaseEnd::Unbounded => {
                return Err(SolveError::Numerical(
                    "phase 1 reported an unbounded ray".into(),
                ))
            }
            PhaseEnd::Optimal => {}
        }
        let mut worst = S::zero();
        for i in 0..m {
            let a = n + m + i;
            if let VarState::Basic(p) = self.state[a] {
                worst = worst.max(self.x_basic[p].abs());
            }
        }
        if worst > self.feas_tol() {
            return Ok(Solution::infeasible(self.iterations));
        }
        // Pin artificials and move to the true objective.
        for i in 0..m {
            let a = n + m + i;
            self.lower[a] = S::zero();
            self.upper[a] = S::zero();
            if !matches!(self.state[a], VarState::Basic(_)) {
                self.state[a] = VarState::AtLower;
            }
        }
        self.cost = self.phase2_cost.clone();
        self.fresh_factor = false;

        match self.run_phase()? {
            PhaseEnd::Unbounded => return Ok(Solution::unbounded(self.iterations)),
            PhaseEnd::Optimal => {}
        }
        self.extract()
    }

    /// Iterates until the current cost vector is optimal. Optimality is only
    /// declared on a freshly factorized basis.
    fn run_phase(&mut self) -> Result<PhaseEnd, SolveError> {
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(SolveError::Numerical(format!(
                    "iteration limit {} exhausted",
                    self.opts.max_iterations
                )));
            }
            if self.etas.len() >= self.opts.refactor_interval {
                self.refactorize()?;
            }
            let bland = self.iterations >= self.opts.dantzig_iterations;
            let y = self.duals();
            match self.price(&y, bland) {
                None => {
                    if self.fresh_factor {
                        return Ok(PhaseEnd::Optimal);
                    }
                    self.refactorize()?;
                    continue;
                }
                Some((j, dir)) => {
                    self.iterations += 1;
                    if self.pivot(j, dir, bland)? {
                        continue;
                    }
                    return Ok(PhaseEnd::Unbounded);
                }
            }
        }
    }

    /// y = B^-T c_B in original row space.
    fn duals(&mut self) -> Vec<S> {
        let cb: Vec<S> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.btran(&cb)
    }

    fn reduced_cost(&self, j: usize, y: &[S]) -> S {
        let (rows, vals) = self.col(j);
        let mut d = self.cost[j];
        for (r, v) in rows.iter().zip(vals) {
            d = d - y[*r] * *v;
        }
        d
    }

    /// Reduced-cost violation of a nonbasic column, if any.
    #[inline]
    fn violation(&self, j: usize, y: &[S], tol: S) -> Option<(i8, S)> {
        if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
            return None;
        }
        let d = self.reduced_cost(j, y);
        let (dir, viol) = match self.state[j] {
            VarState::AtLower => (1i8, -d),
            VarState::AtUpper => (-1i8, d),
            VarState::FreeZero => {
                if d > S::zero() {
                    (-1i8, d)
                } else {
                    (1i8, -d)
                }
            }
            VarState::Basic(_) => unreachable!(),
        };
        (viol > tol).then_some((dir, viol))
    }

    /// Picks an entering column, or None when priced optimal.
    ///
    /// Dantzig mode prices rotating sections of the column range and takes
    /// the largest violation in the first section that has one, which keeps
    /// per-iteration cost sublinear in the column count while staying
    /// deterministic. Bland mode scans everything and returns the lowest
    /// index, as the termination guarantee requires.
    fn price(&mut self, y: &[S], bland: bool) -> Option<(usize, i8)> {
        let tol = self.opt_tol();
        if bland {
            for j in 0..self.ncols {
                if let Some((dir, _)) = self.violation(j, y, tol) {
                    return Some((j, dir));
                }
            }
            return None;
        }
        let section = (self.ncols / 8).max(256).min(self.ncols.max(1));
        let mut scanned = 0;
        let mut start = self.price_cursor.min(self.ncols.saturating_sub(1));
        while scanned < self.ncols {
            let len = section.min(self.ncols - scanned);
            let mut best: Option<(usize, i8, S)> = None;
            for k in 0..len {
                let j = (start + k) % self.ncols;
                if let Some((dir, viol)) = self.violation(j, y, tol) {
                    match best {
                        Some((_, _, bv)) if bv >= viol => {}
                        _ => best = Some((j, dir, viol)),
                    }
                }
            }
            if let Some((j, dir, _)) = best {
                self.price_cursor = (start + len) % self.ncols;
                return Some((j, dir));
            }
            start = (start + len) % self.ncols;
            scanned += len;
        }
        None
    }

    /// One ratio-test step. Returns Ok(true) to continue, Ok(false) on an
    /// unbounded ray.
    fn pivot(&mut self, j: usize, dir: i8, bland: bool) -> Result<bool, SolveError> {
        let dirs = if dir > 0 { S::one() } else { -S::one() };
        let w = {
            let (rows, vals) = self.col(j);
            let mut dense = vec![S::zero(); self.m];
            for (r, v) in rows.iter().zip(vals) {
                dense[*r] = *v;
            }
            self.ftran(&dense)
        };
        let piv_tol = self.piv_tol();
        let tie = lit::<S>(1e-10);

        let gap = self.upper[j] - self.lower[j];
        let mut best_t = gap; // bound flip fallback
        let mut leaving: Option<(usize, bool, S)> = None; // (pos, hits_upper, rate magnitude)
        for pos in 0..self.m {
            let wv = w[pos];
            if wv.abs() <= piv_tol {
                continue;
            }
            let rate = dirs * wv; // basic value moves at -rate per unit step
            let bi = self.basis[pos];
            let xb = self.x_basic[pos];
            let (t, hits_upper) = if rate > S::zero() {
                if self.lower[bi] == S::neg_infinity() {
                    continue;
                }
                (((xb - self.lower[bi]) / rate).max(S::zero()), false)
            } else {
                if self.upper[bi] == S::infinity() {
                    continue;
                }
                (((self.upper[bi] - xb) / -rate).max(S::zero()), true)
            };
            let better = match leaving {
                // A blocking pivot must beat the bound flip strictly.
                None => t < best_t - tie,
                Some((lpos, _, lrate)) => {
                    if t < best_t - tie {
                        true
                    } else if (t - best_t).abs() <= tie {
                        if bland {
                            self.basis[pos] < self.basis[lpos]
                        } else {
                            rate.abs() > lrate
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best_t = best_t.min(t);
                leaving = Some((pos, hits_upper, rate.abs()));
            }
        }

        if best_t == S::infinity() {
            return Ok(false);
        }
        let t = best_t.max(S::zero());

        // Move the basic values along the ray.
        if t > S::zero() {
            for pos in 0..self.m {
                if w[pos] != S::zero() {
                    self.x_basic[pos] = self.x_basic[pos] - dirs * t * w[pos];
                }
            }
        }
        let entering_value = self.nonbasic_value(j) + dirs * t;

        match leaving {
            None => {
                // Bound flip: the entering variable moved to its other bound.
                self.state[j] = match self.state[j] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    s => s,
                };
                Ok(true)
            }
            Some((pos, hits_upper, _)) => {
                let out = self.basis[pos];
                self.state[out] = if hits_upper {
                    VarState::AtUpper
                } else if self.lower[out].is_finite() {
                    VarState::AtLower
                } else {
                    VarState::FreeZero
                };
                if w[pos].abs() <= lit::<S>(1e-11) {
                    return Err(SolveError::Numerical("degenerate eta pivot".into()));
                }
                let mut col = Vec::new();
                for p in 0..self.m {
                    if p != pos && w[p] != S::zero() {
                        col.push((p, w[p]));
                    }
                }
                self.etas.push(Eta {
                    pos,
                    diag: w[pos],
                    col,
                });
                self.basis[pos] = j;
                self.x_basic[pos] = entering_value;
                self.state[j] = VarState::Basic(pos);
                self.fresh_factor = false;
                Ok(true)
            }
        }
    }

    /// Rebuilds the LU factors of the current basis and recomputes basic
    /// values from scratch. Columns are factorized singletons-first (then by
    /// sparsity) to keep fill low; elimination walks only the pivots its
    /// column actually reaches.
    fn refactorize(&mut self) -> Result<(), SolveError> {
        let m = self.m;
        let mut pivoted = vec![false; m];
        let mut pos_of_row = vec![usize::MAX; m];
        let mut pivot_row = Vec::with_capacity(m);
        let mut lcols: Vec<Vec<(usize, S)>> = Vec::with_capacity(m);
        let mut ucols: Vec<Vec<(usize, S)>> = Vec::with_capacity(m);
        let mut udiag: Vec<S> = Vec::with_capacity(m);
        let mut work = std::mem::take(&mut self.work);
        let mut marked = vec![false; m];
        let mut touched: Vec<usize> = Vec::new();

        // Deterministic fill-reducing order: by column nonzero count, ties by
        // basis position. Identity (logical/artificial) columns come first.
        let mut col_order: Vec<usize> = (0..m).collect();
        col_order.sort_by_key(|&k| {
            let j = self.basis[k];
            (self.col_ptr[j + 1] - self.col_ptr[j], k)
        });

        let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
            std::collections::BinaryHeap::new();
        let mut in_heap = vec![false; m];

        for step in 0..m {
            let k = col_order[step];
            let j = self.basis[k];
            let a = self.col_ptr[j];
            let b = self.col_ptr[j + 1];
            for idx in a..b {
                let r = self.col_rows[idx];
                work[r] = self.col_vals[idx];
                if !marked[r] {
                    marked[r] = true;
                    touched.push(r);
                }
                let p = pos_of_row[r];
                if p != usize::MAX && !in_heap[p] {
                    in_heap[p] = true;
                    heap.push(std::cmp::Reverse(p));
                }
            }
            // Eliminate against reached pivots in ascending factor order;
            // newly reached pivots are always downstream of the current one.
            let mut ucol = Vec::new();
            while let Some(std::cmp::Reverse(jj)) = heap.pop() {
                in_heap[jj] = false;
                let pr = pivot_row[jj];
                let z = work[pr];
                if z == S::zero() {
                    continue;
                }
                ucol.push((jj, z));
                for &(r, lv) in &lcols[jj] {
                    if !marked[r] {
                        marked[r] = true;
                        touched.push(r);
                    }
                    work[r] = work[r] - lv * z;
                    let p = pos_of_row[r];
                    if p != usize::MAX && !in_heap[p] {
                        in_heap[p] = true;
                        heap.push(std::cmp::Reverse(p));
                    }
                }
            }
            // Partial pivot among rows not yet assigned.
            let mut prow = usize::MAX;
            let mut pval = S::zero();
            for &r in touched.iter() {
                if !pivoted[r] && work[r].abs() > pval.abs() {
                    prow = r;
                    pval = work[r];
                }
            }
            if prow == usize::MAX || pval.abs() <= lit::<S>(1e-11) {
                for &r in touched.iter() {
                    work[r] = S::zero();
                    marked[r] = false;
                }
                self.work = work;
                return Err(SolveError::Numerical(format!(
                    "singular basis at column {k}"
                )));
            }

            let mut lcol = Vec::new();
            for &r in touched.iter() {
                if !pivoted[r] && r != prow && work[r] != S::zero() {
                    lcol.push((r, work[r] / pval));
                }
            }
            lcol.sort_unstable_by_key(|&(r, _)| r);
            for &r in touched.iter() {
                work[r] = S::zero();
                marked[r] = false;
            }
            touched.clear();
            pivoted[prow] = true;
            pos_of_row[prow] = pivot_row.len();
            pivot_row.push(prow);
            lcols.push(lcol);
            ucols.push(ucol);
            udiag.push(pval);
        }
        self.work = work;

        self.lu = Some(LuFactors {
            pivot_row,
            col_order,
            lcols,
            ucols,
            udiag,
        });
        self.etas.clear();
        self.fresh_factor = true;

        // Recompute basic values: B x_B = b - N x_N.
        let mut r = self.rhs.clone();
        for j in 0..self.ncols {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let xv = self.nonbasic_value(j);
            if xv != S::zero() {
                let (rows, vals) = self.col(j);
                for (rr, v) in rows.iter().zip(vals) {
                    r[*rr] = r[*rr] - *v * xv;
                }
            }
        }
        let xb = self.ftran(&r);
        self.x_basic = xb;
        Ok(())
    }

    /// w = B^-1 a, dense in and out (basis position space out).
    fn ftran(&self, a: &[S]) -> Vec<S> {
        let lu = self.lu.as_ref().expect("factorized");
        let m = self.m;
        let mut work = a.to_vec();
        for k in 0..m {
            let v = work[lu.pivot_row[k]];
            if v != S::zero() {
                for &(r, lv) in &lu.lcols[k] {
                    work[r] = work[r] - lv * v;
                }
            }
        }
        let mut w = vec![S::zero(); m];
        for k in (0..m).rev() {
            let t = work[lu.pivot_row[k]] / lu.udiag[k];
            w[lu.col_order[k]] = t;
            if t != S::zero() {
                for &(jj, uv) in &lu.ucols[k] {
                    work[lu.pivot_row[jj]] = work[lu.pivot_row[jj]] - uv * t;
                }
            }
        }
        for eta in &self.etas {
            let t = w[eta.pos] / eta.diag;
            w[eta.pos] = t;
            if t != S::zero() {
                for &(i, v) in &eta.col {
                    w[i] = w[i] - v * t;
                }
            }
        }
        w
    }

    /// y = B^-T c, c in basis position space, y in original row space.
    fn btran(&mut self, c: &[S]) -> Vec<S> {
        let m = self.m;
        let mut cvec = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut t = S::zero();
            for &(i, v) in &eta.col {
                t = t + v * cvec[i];
            }
            cvec[eta.pos] = (cvec[eta.pos] - t) / eta.diag;
        }
        let lu = self.lu.as_ref().expect("factorized");
        // U^T z = Q^T c with Q the column permutation of the factorization.
        let z = &mut self.work2;
        for k in 0..m {
            let mut acc = cvec[lu.col_order[k]];
            for &(jj, uv) in &lu.ucols[k] {
                acc = acc - uv * z[jj];
            }
            z[k] = acc / lu.udiag[k];
        }
        // L^T y = z, resolved directly in original row indexing.
        let mut y = vec![S::zero(); m];
        for k in 0..m {
            y[lu.pivot_row[k]] = z[k];
        }
        for k in (0..m).rev() {
            let mut acc = y[lu.pivot_row[k]];
            for &(r, lv) in &lu.lcols[k] {
                acc = acc - lv * y[r];
            }
            y[lu.pivot_row[k]] = acc;
        }
        y
    }

    /// Unscales and packages an optimal solution, verifying the advertised
    /// tolerances.
    fn extract(mut self) -> Result<Solution<S>, SolveError> {
        self.refactorize()?;
        let n = self.n_struct;
        let m = self.m;

        // Scaled-space feasibility residuals.
        let mut resid = self.rhs.clone();
        for j in 0..self.ncols {
            let xv = match self.state[j] {
                VarState::Basic(p) => self.x_basic[p],
                _ => self.nonbasic_value(j),
            };
            if xv != S::zero() {
                let (rows, vals) = self.col(j);
                for (r, v) in rows.iter().zip(vals) {
                    resid[*r] = resid[*r] - *v * xv;
                }
            }
        }
        let mut worst = S::zero();
        for v in &resid {
            worst = worst.max(v.abs());
        }
        for j in 0..self.ncols {
            let xv = match self.state[j] {
                VarState::Basic(p) => self.x_basic[p],
                _ => self.nonbasic_value(j),
            };
            if self.lower[j].is_finite() {
                worst = worst.max(self.lower[j] - xv);
            }
            if self.upper[j].is_finite() {
                worst = worst.max(xv - self.upper[j]);
            }
        }
        if worst > self.feas_tol() {
            return Err(SolveError::Numerical(format!(
                "primal residual {worst:e} exceeds tolerance after scaling"
            )));
        }

        let y_scaled = self.duals();
        let mut primal = vec![S::zero(); n];
        for j in 0..n {
            let xv = match self.state[j] {
                VarState::Basic(p) => self.x_basic[p],
                _ => self.nonbasic_value(j),
            };
            primal[j] = xv * self.col_scale[j];
        }
        let mut dual = vec![S::zero(); m];
        for i in 0..m {
            dual[i] = y_scaled[i] * self.row_scale[i] * self.cost_scale;
        }
        let mut reduced = vec![S::zero(); n];
        for j in 0..n {
            let d = self.reduced_cost(j, &y_scaled);
            reduced[j] = d * self.cost_scale / self.col_scale[j];
        }

        let objective = self.lp.objective_value(&primal);

        // Duality gap via total complementary slackness in original units.
        let mut gap = S::zero();
        for j in 0..n {
            let d = reduced[j];
            let (l, u) = (self.lp.vars_raw()[j].lower, self.lp.vars_raw()[j].upper);
            if d > self.opt_tol() * self.cost_scale && l.is_finite() {
                gap = gap + d * (primal[j] - l);
            } else if d < -self.opt_tol() * self.cost_scale && u.is_finite() {
                gap = gap - d * (u - primal[j]);
            }
        }
        for (i, row) in self.lp.rows_raw().iter().enumerate() {
            // Row dual complementarity: dual * slack.
            let slack = row.rhs - self.lp.row_activity(super::RowId(i), &primal);
            gap = gap + (dual[i] * slack).abs();
        }
        let rel_gap = gap.abs() / (S::one() + objective.abs());
        if rel_gap > lit::<S>(1e-8) {
            return Err(SolveError::Numerical(format!(
                "duality gap {rel_gap:e} exceeds 1e-8"
            )));
        }

        Ok(Solution {
            status: SolveStatus::Optimal,
            primal,
            dual,
            reduced_costs: reduced,
            objective,
            iterations: self.iterations,
        })
    }
}

fn clamp_scale<S: Scalar>(v: S) -> S {
    let lo = lit::<S>(1e-8);
    let hi = lit::<S>(1e8);
    if !v.is_finite() || v <= S::zero() {
        S::one()
    } else {
        v.max(lo).min(hi)
    }
}
