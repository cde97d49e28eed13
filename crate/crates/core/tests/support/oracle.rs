//! Solver correctness against exhaustive basis enumeration.
//!
//! The oracle converts the LP to equality standard form (slack per
//! inequality, finite upper bounds rewritten as explicit rows) and enumerates
//! every basis with dense Gaussian elimination. A basis that is both primal
//! and dual feasible certifies optimality; a feasible vertex with no such
//! certificate anywhere means the problem is unbounded; no feasible vertex
//! means infeasible. This path shares nothing with the revised simplex under
//! test.

#![allow(dead_code)]

use hydra_core::lp::{LinearProgram, Sense, VarId};

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

struct StandardForm {
    m: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
}

/// Rewrites the LP as `A z = b, z >= 0`. Requires every lower bound to be 0.
fn standard_form(lp: &LinearProgram<f64>) -> StandardForm {
    let n = lp.num_vars();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = Vec::new();
    let mut cost: Vec<f64> = (0..n).map(|j| lp.objective_coeff(VarId(j))).collect();
    let mut m = 0usize;

    let push_row = |cols: &mut Vec<Vec<(usize, f64)>>,
                        rhs: &mut Vec<f64>,
                        terms: &[(usize, f64)],
                        sense: Sense,
                        b: f64,
                        m: &mut usize,
                        cost: &mut Vec<f64>| {
        let i = *m;
        for &(j, v) in terms {
            cols[j].push((i, v));
        }
        match sense {
            Sense::Le => {
                cols.push(vec![(i, 1.0)]);
                cost.push(0.0);
            }
            Sense::Ge => {
                cols.push(vec![(i, -1.0)]);
                cost.push(0.0);
            }
            Sense::Eq => {}
        }
        rhs.push(b);
        *m += 1;
    };

    for r in lp.iter_rows() {
        let terms: Vec<(usize, f64)> = lp.row_coeffs(r).map(|(v, c)| (v.0, c)).collect();
        push_row(
            &mut cols,
            &mut rhs,
            &terms,
            lp.row_sense(r),
            lp.row_rhs(r),
            &mut m,
            &mut cost,
        );
    }
    for j in 0..n {
        let (l, u) = lp.var_bounds(VarId(j));
        assert_eq!(l, 0.0, "oracle requires zero lower bounds");
        if u.is_finite() {
            push_row(
                &mut cols,
                &mut rhs,
                &[(j, 1.0)],
                Sense::Le,
                u,
                &mut m,
                &mut cost,
            );
        }
    }
    let ncols = cols.len();
    StandardForm {
        m,
        ncols,
        cols,
        cost,
        rhs,
    }
}

/// Dense solve of `B x = b` by Gaussian elimination; also hands back the
/// dense B for the transpose solve. Returns None when singular.
fn dense_solve(
    b_cols: &[&[(usize, f64)]],
    m: usize,
    rhs: &[f64],
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut a = vec![vec![0.0f64; m]; m];
    for (k, col) in b_cols.iter().enumerate() {
        for &(i, v) in col.iter() {
            a[i][k] = v;
        }
    }
    let mut t: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in t.iter_mut().enumerate() {
        row.push(rhs[i]);
    }
    for k in 0..m {
        let mut p = k;
        for i in k + 1..m {
            if t[i][k].abs() > t[p][k].abs() {
                p = i;
            }
        }
        if t[p][k].abs() < 1e-10 {
            return None;
        }
        t.swap(k, p);
        for i in k + 1..m {
            let f = t[i][k] / t[k][k];
            for j in k..=m {
                let u = t[k][j];
                t[i][j] -= f * u;
            }
        }
    }
    let mut x = vec![0.0f64; m];
    for k in (0..m).rev() {
        let mut acc = t[k][m];
        for j in k + 1..m {
            acc -= t[k][j] * x[j];
        }
        x[k] = acc / t[k][k];
    }
    Some((x, a))
}

fn dense_solve_transpose(a: &[Vec<f64>], m: usize, c: &[f64]) -> Option<Vec<f64>> {
    // Plain Gaussian elimination on A^T.
    let mut t = vec![vec![0.0f64; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            t[i][j] = a[j][i];
        }
        t[i][m] = c[i];
    }
    for k in 0..m {
        let mut p = k;
        for i in k + 1..m {
            if t[i][k].abs() > t[p][k].abs() {
                p = i;
            }
        }
        if t[p][k].abs() < 1e-10 {
            return None;
        }
        t.swap(k, p);
        for i in k + 1..m {
            let f = t[i][k] / t[k][k];
            for j in k..=m {
                t[i][j] -= f * t[k][j];
            }
        }
    }
    let mut y = vec![0.0f64; m];
    for k in (0..m).rev() {
        let mut acc = t[k][m];
        for j in k + 1..m {
            acc -= t[k][j] * y[j];
        }
        y[k] = acc / t[k][k];
    }
    Some(y)
}

/// Detects inconsistent equality rows and returns the redundant ones.
/// Inequality rows are always independent in standard form thanks to their
/// private slack column, so only equalities need the rank pass.
fn redundant_eq_rows(lp: &LinearProgram<f64>) -> Result<Vec<usize>, ()> {
    let n = lp.num_vars();
    let mut reduced: Vec<(usize, Vec<f64>)> = Vec::new(); // (pivot col, row|rhs)
    let mut drop = Vec::new();
    for r in lp.iter_rows() {
        if lp.row_sense(r) != Sense::Eq {
            continue;
        }
        let mut row = vec![0.0f64; n + 1];
        for (v, c) in lp.row_coeffs(r) {
            row[v.0] = c;
        }
        row[n] = lp.row_rhs(r);
        for (pc, er) in &reduced {
            let f = row[*pc] / er[*pc];
            if f != 0.0 {
                for j in 0..=n {
                    row[j] -= f * er[j];
                }
            }
        }
        let mut pc = 0;
        for j in 0..n {
            if row[j].abs() > row[pc].abs() {
                pc = j;
            }
        }
        if n > 0 && row[pc].abs() > 1e-7 {
            reduced.push((pc, row));
        } else if row[n].abs() > 1e-7 {
            return Err(()); // 0 = nonzero
        } else {
            drop.push(r.0);
        }
    }
    Ok(drop)
}

pub fn oracle(lp: &LinearProgram<f64>) -> (OracleStatus, f64) {
    let full = lp.clone();
    let lp = &{
        let dropped = match redundant_eq_rows(&full) {
            Ok(d) => d,
            Err(()) => return (OracleStatus::Infeasible, 0.0),
        };
        if dropped.is_empty() {
            full.clone()
        } else {
            let mut slim = LinearProgram::new(full.name());
            for v in full.iter_vars() {
                let (l, u) = full.var_bounds(v);
                slim.add_variable(full.var_name(v), l, u, full.objective_coeff(v))
                    .unwrap();
            }
            for r in full.iter_rows() {
                if dropped.contains(&r.0) {
                    continue;
                }
                let terms: Vec<_> = full.row_coeffs(r).collect();
                slim.add_row(full.row_name(r), full.row_sense(r), &terms, full.row_rhs(r))
                    .unwrap();
            }
            slim.set_objective_constant(full.objective_constant());
            slim
        }
    };
    let sf = standard_form(lp);
    let m = sf.m;
    if m == 0 {
        // Only bounds remain; every cost must be nonnegative for a minimum.
        for j in 0..lp.num_vars() {
            if sf.cost[j] < 0.0 {
                return (OracleStatus::Unbounded, 0.0);
            }
        }
        return (OracleStatus::Optimal, lp.objective_constant());
    }
    let mut best: Option<f64> = None;
    let mut certified = false;

    if sf.ncols < m {
        return (OracleStatus::Infeasible, 0.0);
    }
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        let cols: Vec<&[(usize, f64)]> = subset.iter().map(|&j| sf.cols[j].as_slice()).collect();
        if let Some((xb, dense_a)) = dense_solve(&cols, m, &sf.rhs) {
            let feasible = xb.iter().all(|&v| v >= -1e-7);
            if feasible {
                let obj: f64 = subset
                    .iter()
                    .zip(&xb)
                    .map(|(&j, &v)| sf.cost[j] * v)
                    .sum();
                best = Some(match best {
                    None => obj,
                    Some(b) => b.min(obj),
                });
                if !certified {
                    let cb: Vec<f64> = subset.iter().map(|&j| sf.cost[j]).collect();
                    if let Some(y) = dense_solve_transpose(&dense_a, m, &cb) {
                        let dual_ok = (0..sf.ncols).all(|j| {
                            let d = sf.cost[j]
                                - sf.cols[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>();
                            d >= -1e-7
                        });
                        if dual_ok {
                            certified = true;
                        }
                    }
                }
            }
        }
        if !next_combination(&mut subset, sf.ncols) {
            break;
        }
    }
    match (best, certified) {
        (None, _) => (OracleStatus::Infeasible, 0.0),
        (Some(_), false) => (OracleStatus::Unbounded, 0.0),
        (Some(b), true) => (OracleStatus::Optimal, b + lp.objective_constant()),
    }
}

fn next_combination(subset: &mut [usize], ncols: usize) -> bool {
    let m = subset.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if subset[i] != i + ncols - m {
            subset[i] += 1;
            for k in i + 1..m {
                subset[k] = subset[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Deterministic random LP generation (SplitMix64, local copy)
// ---------------------------------------------------------------------------

pub struct Mix(pub u64);

impl Mix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn coeff(&mut self) -> f64 {
        (self.below(21) as f64 - 10.0) / 2.0
    }
}

pub fn random_lp(seed: u64) -> LinearProgram<f64> {
    let mut rng = Mix(seed);
    let n = 1 + rng.below(8) as usize;
    let m = 1 + rng.below(8) as usize;
    let mut lp = LinearProgram::new("RAND");
    let mut uppers = 0;
    for j in 0..n {
        let upper = if uppers < 3 && rng.below(100) < 25 {
            uppers += 1;
            1.0 + rng.below(10) as f64
        } else {
            f64::INFINITY
        };
        lp.add_variable(&format!("x{j}"), 0.0, upper, rng.coeff())
            .unwrap();
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.below(100) < 60 {
                let c = rng.coeff();
                if c != 0.0 {
                    terms.push((VarId(j), c));
                }
            }
        }
        if terms.is_empty() {
            terms.push((VarId(rng.below(n as u64) as usize), 1.0));
        }
        let sense = match rng.below(10) {
            0..=6 => Sense::Le,
            7..=8 => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = match sense {
            Sense::Le => rng.below(21) as f64 / 2.0,
            Sense::Ge => (rng.below(21) as f64 - 14.0) / 2.0,
            Sense::Eq => (rng.below(17) as f64 - 4.0) / 2.0,
        };
        lp.add_row(&format!("r{i}"), sense, &terms, rhs).unwrap();
    }
    lp
}

