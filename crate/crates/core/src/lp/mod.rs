//! Sparse linear-program representation, solver entry points, and MPS I/O.
//!
//! A [`LinearProgram`] is a minimize-sense LP over named variables with
//! bounds, named constraint rows, and a linear objective with optional
//! constant. Variables and rows keep insertion order everywhere: iteration,
//! MPS export, and the solver all see the same ordering, which is what makes
//! solves and exports reproducible byte for byte.

mod mps;
mod simplex;

pub use mps::{parse_mps, parse_solution_file, to_mps};
pub use simplex::{solve, solve_with, SolveOptions};

use crate::scalar::Scalar;
use std::collections::HashMap;

/// Stable handle to a variable, valid for the lifetime of the LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

/// Stable handle to a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn mps_tag(self) -> &'static str {
        match self {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Variable<S> {
    pub name: String,
    pub lower: S,
    pub upper: S,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Row<S> {
    pub name: String,
    pub sense: Sense,
    /// Sorted by variable index; zero coefficients are never stored.
    pub coeffs: Vec<(usize, S)>,
    pub rhs: S,
}

/// Sparse LP in minimize standard form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S: Scalar> {
    name: String,
    vars: Vec<Variable<S>>,
    var_index: HashMap<String, usize>,
    rows: Vec<Row<S>>,
    row_index: HashMap<String, usize>,
    obj: Vec<S>,
    obj_constant: S,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("DUPLICATE_NAME: {0:?} is already in use")]
    DuplicateName(String),
    #[error("UNKNOWN_INDEX: variable handle {0} out of range")]
    UnknownVariable(usize),
}

impl LpError {
    pub fn code(&self) -> &'static str {
        match self {
            LpError::DuplicateName(_) => "DUPLICATE_NAME",
            LpError::UnknownVariable(_) => "UNKNOWN_INDEX",
        }
    }
}

/// Name reserved for the objective row in MPS output.
pub const OBJECTIVE_ROW: &str = "OBJ";

impl<S: Scalar> Default for LinearProgram<S> {
    fn default() -> Self {
        Self::new("LP")
    }
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(name: &str) -> Self {
        LinearProgram {
            name: name.to_string(),
            vars: Vec::new(),
            var_index: HashMap::new(),
            rows: Vec::new(),
            row_index: HashMap::new(),
            obj: Vec::new(),
            obj_constant: S::zero(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Adds a variable with bounds `[lower, upper]` and objective coefficient.
    ///
    /// Handles are dense and issued in insertion order: the first variable is
    /// handle 0, the next 1, and so on.
    pub fn add_variable(
        &mut self,
        name: &str,
        lower: S,
        upper: S,
        obj_coeff: S,
    ) -> Result<VarId, LpError> {
        if self.var_index.contains_key(name) || name == OBJECTIVE_ROW {
            return Err(LpError::DuplicateName(name.to_string()));
        }
        let id = self.vars.len();
        self.vars.push(Variable {
            name: name.to_string(),
            lower,
            upper,
        });
        self.var_index.insert(name.to_string(), id);
        self.obj.push(obj_coeff);
        Ok(VarId(id))
    }

    /// Nonnegative variable `[0, +inf)`.
    pub fn add_nonneg(&mut self, name: &str, obj_coeff: S) -> Result<VarId, LpError> {
        self.add_variable(name, S::zero(), S::infinity(), obj_coeff)
    }

    /// Adds a constraint row. Coefficients on the same variable are summed;
    /// zeros are dropped.
    pub fn add_row(
        &mut self,
        name: &str,
        sense: Sense,
        coeffs: &[(VarId, S)],
        rhs: S,
    ) -> Result<RowId, LpError> {
        if self.row_index.contains_key(name) || name == OBJECTIVE_ROW {
            return Err(LpError::DuplicateName(name.to_string()));
        }
        let mut dense: Vec<(usize, S)> = Vec::with_capacity(coeffs.len());
        for &(VarId(j), v) in coeffs {
            if j >= self.vars.len() {
                return Err(LpError::UnknownVariable(j));
            }
            dense.push((j, v));
        }
        dense.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, S)> = Vec::with_capacity(dense.len());
        for (j, v) in dense {
            match merged.last_mut() {
                Some((lj, lv)) if *lj == j => *lv = *lv + v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != S::zero());
        let id = self.rows.len();
        self.rows.push(Row {
            name: name.to_string(),
            sense,
            coeffs: merged,
            rhs,
        });
        self.row_index.insert(name.to_string(), id);
        Ok(RowId(id))
    }

    pub fn set_objective_constant(&mut self, c: S) {
        self.obj_constant = c;
    }

    pub fn objective_constant(&self) -> S {
        self.obj_constant
    }

    pub fn set_objective_coeff(&mut self, var: VarId, c: S) {
        self.obj[var.0] = c;
    }

    /// Adds `delta` to the variable's objective coefficient.
    pub fn bump_objective_coeff(&mut self, var: VarId, delta: S) {
        self.obj[var.0] = self.obj[var.0] + delta;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.vars[var.0].name
    }

    pub fn var_bounds(&self, var: VarId) -> (S, S) {
        (self.vars[var.0].lower, self.vars[var.0].upper)
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied().map(VarId)
    }

    pub fn row_by_name(&self, name: &str) -> Option<RowId> {
        self.row_index.get(name).copied().map(RowId)
    }

    pub fn row_name(&self, row: RowId) -> &str {
        &self.rows[row.0].name
    }

    pub fn row_sense(&self, row: RowId) -> Sense {
        self.rows[row.0].sense
    }

    pub fn row_rhs(&self, row: RowId) -> S {
        self.rows[row.0].rhs
    }

    pub fn row_coeffs(&self, row: RowId) -> impl Iterator<Item = (VarId, S)> + '_ {
        self.rows[row.0].coeffs.iter().map(|&(j, v)| (VarId(j), v))
    }

    pub fn objective_coeff(&self, var: VarId) -> S {
        self.obj[var.0]
    }

    pub fn iter_vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len()).map(VarId)
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = RowId> {
        (0..self.rows.len()).map(RowId)
    }

    /// Evaluates `objective + c.x` at the given primal point.
    pub fn objective_value(&self, primal: &[S]) -> S {
        let mut z = self.obj_constant;
        for (j, &c) in self.obj.iter().enumerate() {
            if c != S::zero() {
                z = z + c * primal[j];
            }
        }
        z
    }

    /// Evaluates the activity `a_i.x` of a row.
    pub fn row_activity(&self, row: RowId, primal: &[S]) -> S {
        let mut acc = S::zero();
        for &(j, v) in &self.rows[row.0].coeffs {
            acc = acc + v * primal[j];
        }
        acc
    }

    /// Constraint violation of a row at the given point (0 when satisfied).
    pub fn row_violation(&self, row: RowId, primal: &[S]) -> S {
        let act = self.row_activity(row, primal);
        let rhs = self.rows[row.0].rhs;
        match self.rows[row.0].sense {
            Sense::Le => (act - rhs).max(S::zero()),
            Sense::Ge => (rhs - act).max(S::zero()),
            Sense::Eq => (act - rhs).abs(),
        }
    }

    /// Largest constraint or bound violation at the given point.
    pub fn max_violation(&self, primal: &[S]) -> S {
        let mut worst = S::zero();
        for r in self.iter_rows() {
            worst = worst.max(self.row_violation(r, primal));
        }
        for (j, var) in self.vars.iter().enumerate() {
            worst = worst.max(var.lower - primal[j]).max(primal[j] - var.upper);
        }
        worst
    }

    pub(crate) fn vars_raw(&self) -> &[Variable<S>] {
        &self.vars
    }

    pub(crate) fn rows_raw(&self) -> &[Row<S>] {
        &self.rows
    }

    pub(crate) fn obj_raw(&self) -> &[S] {
        &self.obj
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a successful solver run. Primal and dual vectors are populated
/// only when `status` is `Optimal`; they are empty otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S> {
    pub status: SolveStatus,
    /// One value per variable, in insertion order.
    pub primal: Vec<S>,
    /// One value per constraint row: marginal objective change per unit rhs.
    pub dual: Vec<S>,
    /// One reduced cost per variable.
    pub reduced_costs: Vec<S>,
    pub objective: S,
    pub iterations: usize,
}

impl<S: Scalar> Solution<S> {
    pub fn infeasible(iterations: usize) -> Self {
        Solution {
            status: SolveStatus::Infeasible,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            objective: S::zero(),
            iterations,
        }
    }

    pub fn unbounded(iterations: usize) -> Self {
        Solution {
            status: SolveStatus::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            objective: S::zero(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("NUMERICAL_FAILURE: {0}")]
    Numerical(String),
}

impl SolveError {
    pub fn code(&self) -> &'static str {
        "NUMERICAL_FAILURE"
    }
}
