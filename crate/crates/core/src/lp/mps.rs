//! Free-format MPS export and import, plus the two-column solution-file
//! reader used with external solvers.
//!
//! Export is deterministic: rows and columns appear in insertion order, one
//! coefficient per line, and every value is printed with 17 significant
//! digits so that `f64` round-trips exactly. Every variable gets an explicit
//! objective entry (even when zero) so that parsing recovers the variable set
//! and its ordering unchanged.

use super::{LinearProgram, Sense, OBJECTIVE_ROW};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MpsError {
    #[error("NON_ASCII_NAME: {0:?}")]
    NonAsciiName(String),
    #[error("PARSE_ERROR at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl MpsError {
    pub fn code(&self) -> &'static str {
        match self {
            MpsError::NonAsciiName(_) => "NON_ASCII_NAME",
            MpsError::Parse { .. } => "PARSE_ERROR",
        }
    }
}

fn check_name(name: &str) -> Result<(), MpsError> {
    if name.is_empty()
        || name.len() > 255
        || !name.is_ascii()
        || name.chars().any(|c| c.is_ascii_whitespace())
    {
        return Err(MpsError::NonAsciiName(name.to_string()));
    }
    Ok(())
}

fn fmt_value<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v)
}

/// Serializes the LP as free-format MPS.
pub fn to_mps<S: Scalar>(lp: &LinearProgram<S>) -> Result<String, MpsError> {
    check_name(lp.name())?;
    for v in lp.vars_raw() {
        check_name(&v.name)?;
    }
    for r in lp.rows_raw() {
        check_name(&r.name)?;
    }

    let mut out = String::new();
    out.push_str(&format!("NAME {}\n", lp.name()));
    out.push_str("ROWS\n");
    out.push_str(&format!(" N {}\n", OBJECTIVE_ROW));
    for r in lp.rows_raw() {
        out.push_str(&format!(" {} {}\n", r.sense.mps_tag(), r.name));
    }

    // Column-major coefficient lists, rebuilt from the row-major storage.
    let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); lp.num_vars()];
    for (i, r) in lp.rows_raw().iter().enumerate() {
        for &(j, v) in &r.coeffs {
            cols[j].push((i, v));
        }
    }

    out.push_str("COLUMNS\n");
    for (j, var) in lp.vars_raw().iter().enumerate() {
        out.push_str(&format!(
            "    {} {} {}\n",
            var.name,
            OBJECTIVE_ROW,
            fmt_value(lp.obj_raw()[j])
        ));
        for &(i, v) in &cols[j] {
            out.push_str(&format!(
                "    {} {} {}\n",
                var.name,
                lp.rows_raw()[i].name,
                fmt_value(v)
            ));
        }
    }

    out.push_str("RHS\n");
    if lp.objective_constant() != S::zero() {
        // MPS convention: an rhs entry on the objective row negates the constant.
        out.push_str(&format!(
            "    RHS {} {}\n",
            OBJECTIVE_ROW,
            fmt_value(S::zero() - lp.objective_constant())
        ));
    }
    for r in lp.rows_raw() {
        if r.rhs != S::zero() {
            out.push_str(&format!("    RHS {} {}\n", r.name, fmt_value(r.rhs)));
        }
    }

    out.push_str("BOUNDS\n");
    for var in lp.vars_raw() {
        let l = var.lower;
        let u = var.upper;
        let zero = S::zero();
        if l == u {
            out.push_str(&format!(" FX BND {} {}\n", var.name, fmt_value(l)));
        } else if l == S::neg_infinity() && u == S::infinity() {
            out.push_str(&format!(" FR BND {}\n", var.name));
        } else {
            if l == S::neg_infinity() {
                out.push_str(&format!(" MI BND {}\n", var.name));
            } else if l != zero {
                out.push_str(&format!(" LO BND {} {}\n", var.name, fmt_value(l)));
            }
            if u != S::infinity() {
                out.push_str(&format!(" UP BND {} {}\n", var.name, fmt_value(u)));
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

fn perr(line: usize, msg: impl Into<String>) -> MpsError {
    MpsError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_value<S: Scalar>(tok: &str, line: usize) -> Result<S, MpsError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("expected a number, found {tok:?}")))?;
    S::from_f64(v).ok_or_else(|| perr(line, format!("value {tok} not representable")))
}

/// Parses free-format MPS produced by [`to_mps`] or by other tools that stick
/// to the NAME/ROWS/COLUMNS/RHS/BOUNDS sections.
pub fn parse_mps<S: Scalar>(text: &str) -> Result<LinearProgram<S>, MpsError> {
    let mut lp = LinearProgram::<S>::new("LP");
    let mut section = Section::Preamble;
    let mut obj_row: Option<String> = None;
    let mut saw_endata = false;
    // Row data accumulates first; coefficients attach when COLUMNS is read.
    let mut row_order: Vec<(String, Sense)> = Vec::new();
    let mut pending: Vec<(String, Vec<(String, S)>, S)> = Vec::new();
    let mut obj_coeffs: Vec<(String, S)> = Vec::new();
    let mut obj_constant = S::zero();
    let mut bounds: Vec<(String, String, Option<S>, usize)> = Vec::new();
    let mut col_order: Vec<String> = Vec::new();
    let mut col_seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut coeff_seen: std::collections::HashSet<(String, String)> =
        std::collections::HashSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        if raw.trim_start().starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let is_header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if is_header {
            match toks[0] {
                "NAME" => {
                    if section != Section::Preamble {
                        return Err(perr(line, "NAME after first section"));
                    }
                    lp = LinearProgram::new(toks.get(1).copied().unwrap_or("LP"));
                }
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "BOUNDS" => section = Section::Bounds,
                "RANGES" => return Err(perr(line, "RANGES section is not supported")),
                "OBJSENSE" => return Err(perr(line, "OBJSENSE section is not supported")),
                "ENDATA" => {
                    saw_endata = true;
                    break;
                }
                other => return Err(perr(line, format!("unknown section {other:?}"))),
            }
            continue;
        }
        match section {
            Section::Preamble => return Err(perr(line, "data before any section header")),
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(perr(line, "ROWS line must be `<type> <name>`"));
                }
                let sense = match toks[0] {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(perr(line, "multiple objective (N) rows"));
                        }
                        obj_row = Some(toks[1].to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(perr(line, format!("unknown row type {other:?}"))),
                };
                row_order.push((toks[1].to_string(), sense));
                pending.push((toks[1].to_string(), Vec::new(), S::zero()));
            }
            Section::Columns => {
                if toks.len() < 3 || toks.len() % 2 == 0 {
                    return Err(perr(line, "COLUMNS line must be `<col> (<row> <value>)+`"));
                }
                if toks.contains(&"'MARKER'") {
                    return Err(perr(line, "integer markers are not supported"));
                }
                let col = toks[0].to_string();
                if !col_seen.contains_key(&col) {
                    col_seen.insert(col.clone(), col_order.len());
                    col_order.push(col.clone());
                }
                for pair in toks[1..].chunks(2) {
                    let row = pair[0];
                    let value: S = parse_value(pair[1], line)?;
                    if !coeff_seen.insert((col.clone(), row.to_string())) {
                        return Err(perr(
                            line,
                            format!("duplicate coefficient for column {col:?} in row {row:?}"),
                        ));
                    }
                    if Some(row) == obj_row.as_deref() {
                        obj_coeffs.push((col.clone(), value));
                    } else if let Some(entry) =
                        pending.iter_mut().find(|(name, _, _)| name == row)
                    {
                        entry.1.push((col.clone(), value));
                    } else {
                        return Err(perr(line, format!("unknown row {row:?}")));
                    }
                }
            }
            Section::Rhs => {
                if toks.len() < 3 || toks.len() % 2 == 0 {
                    return Err(perr(line, "RHS line must be `<set> (<row> <value>)+`"));
                }
                for pair in toks[1..].chunks(2) {
                    let row = pair[0];
                    let value: S = parse_value(pair[1], line)?;
                    if Some(row) == obj_row.as_deref() {
                        obj_constant = S::zero() - value;
                    } else if let Some(entry) =
                        pending.iter_mut().find(|(name, _, _)| name == row)
                    {
                        entry.2 = value;
                    } else {
                        return Err(perr(line, format!("unknown row {row:?}")));
                    }
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(perr(line, "BOUNDS line must be `<type> <set> <col> [value]`"));
                }
                let kind = toks[0].to_string();
                let col = toks[2].to_string();
                let value = if toks.len() > 3 {
                    Some(parse_value::<S>(toks[3], line)?)
                } else {
                    None
                };
                bounds.push((kind, col, value, line));
            }
        }
    }
    if !saw_endata {
        return Err(perr(text.lines().count(), "missing ENDATA"));
    }
    if obj_row.is_none() {
        return Err(perr(1, "no objective (N) row"));
    }

    // Assemble: columns in first-mention order, then rows in ROWS order.
    let mut obj_of: std::collections::HashMap<&str, S> = std::collections::HashMap::new();
    for (c, v) in &obj_coeffs {
        obj_of.insert(c.as_str(), *v);
    }
    for col in &col_order {
        let c = obj_of.get(col.as_str()).copied().unwrap_or(S::zero());
        lp.add_variable(col, S::zero(), S::infinity(), c)
            .map_err(|e| perr(0, e.to_string()))?;
    }
    for (kind, col, value, line) in bounds {
        let var = lp
            .var_by_name(&col)
            .ok_or_else(|| perr(line, format!("bound on unknown column {col:?}")))?;
        let (mut l, mut u) = lp.var_bounds(var);
        match (kind.as_str(), value) {
            ("UP", Some(v)) => u = v,
            ("LO", Some(v)) => l = v,
            ("FX", Some(v)) => {
                l = v;
                u = v;
            }
            ("FR", _) => {
                l = S::neg_infinity();
                u = S::infinity();
            }
            ("MI", _) => l = S::neg_infinity(),
            ("PL", _) => u = S::infinity(),
            (other, _) => {
                return Err(perr(line, format!("unsupported bound type {other:?}")));
            }
        }
        let j = var.0;
        lp.set_bounds_raw(j, l, u);
    }
    for (idx, (name, sense)) in row_order.iter().enumerate() {
        let (_, coeffs, rhs) = &pending[idx];
        let terms: Vec<_> = coeffs
            .iter()
            .map(|(c, v)| (lp.var_by_name(c).expect("column registered"), *v))
            .collect();
        lp.add_row(name, *sense, &terms, *rhs)
            .map_err(|e| perr(0, e.to_string()))?;
    }
    lp.set_objective_constant(obj_constant);
    Ok(lp)
}

impl<S: Scalar> LinearProgram<S> {
    pub(crate) fn set_bounds_raw(&mut self, j: usize, lower: S, upper: S) {
        let v = &mut self.vars[j];
        v.lower = lower;
        v.upper = upper;
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SolutionFileError {
    #[error("PARSE_ERROR at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("UNKNOWN_INDEX: variable {0:?} not in the program")]
    UnknownVariable(String),
    #[error("MISSING_PARAMETER: no value for variable {0:?}")]
    MissingVariable(String),
}

/// Reads a two-column `name value` solution file (comments start with `#`)
/// and returns primal values aligned with the LP's variable order.
pub fn parse_solution_file<S: Scalar>(
    lp: &LinearProgram<S>,
    text: &str,
) -> Result<Vec<S>, SolutionFileError> {
    let mut values: Vec<Option<S>> = vec![None; lp.num_vars()];
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(SolutionFileError::Parse {
                line,
                msg: "expected `name value`".into(),
            });
        }
        let var = lp
            .var_by_name(toks[0])
            .ok_or_else(|| SolutionFileError::UnknownVariable(toks[0].to_string()))?;
        let v: f64 = toks[1].parse().map_err(|_| SolutionFileError::Parse {
            line,
            msg: format!("bad number {:?}", toks[1]),
        })?;
        values[var.0] = Some(S::from_f64(v).ok_or(SolutionFileError::Parse {
            line,
            msg: "value not representable".into(),
        })?);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            v.ok_or_else(|| {
                SolutionFileError::MissingVariable(lp.var_name(super::VarId(j)).to_string())
            })
        })
        .collect()
}
