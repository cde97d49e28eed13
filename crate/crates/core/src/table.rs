//! Minimal strict CSV reading and writing for the data directory formats.
//!
//! Files are plain comma-separated text with one mandatory header row.
//! Fields are trimmed; quoting is not supported because every identifier in
//! the data model is a plain ASCII token.

use std::path::Path;

/// A data problem found while loading or validating inputs. Violations are
/// data, not panics: loaders collect every problem they can find.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: &'static str,
    pub context: String,
}

impl Violation {
    pub fn new(code: &'static str, context: impl Into<String>) -> Self {
        Violation {
            code,
            context: context.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.context)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    /// (1-based line number, fields)
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    /// Column index by header name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Reads a CSV file, enforcing the expected header.
pub fn read_table(path: &Path, expected_header: &[&str]) -> Result<Table, Violation> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Violation::new(
            "MISSING_FILE",
            format!("{}: {e}", path.display()),
        )
    })?;
    parse_table(&text, &path.display().to_string(), expected_header)
}

pub fn parse_table(
    text: &str,
    file: &str,
    expected_header: &[&str],
) -> Result<Table, Violation> {
    let mut lines = text.lines().enumerate();
    let header_line = loop {
        match lines.next() {
            None => {
                return Err(Violation::new(
                    "PARSE_ERROR",
                    format!("{file}: empty file, expected header {expected_header:?}"),
                ))
            }
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
        }
    };
    let header: Vec<String> = header_line.split(',').map(|s| s.trim().to_string()).collect();
    if header != expected_header {
        return Err(Violation::new(
            "PARSE_ERROR",
            format!("{file}: header {header:?} does not match expected {expected_header:?}"),
        ));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != header.len() {
            return Err(Violation::new(
                "PARSE_ERROR",
                format!(
                    "{file}:{}: {} fields, expected {}",
                    idx + 1,
                    fields.len(),
                    header.len()
                ),
            ));
        }
        rows.push((idx + 1, fields));
    }
    Ok(Table {
        file: file.to_string(),
        header,
        rows,
    })
}

/// Writes rows as CSV with the given header. Values are written verbatim.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_trims() {
        let t = parse_table("a,b\n 1 , x\n\n2,y\n", "mem", &["a", "b"]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].1, vec!["1", "x"]);
        assert_eq!(t.rows[1].0, 4);
    }

    #[test]
    fn header_mismatch_is_reported() {
        let err = parse_table("a,c\n", "mem", &["a", "b"]).unwrap_err();
        assert_eq!(err.code, "PARSE_ERROR");
    }

    #[test]
    fn ragged_row_is_reported() {
        let err = parse_table("a,b\n1\n", "mem", &["a", "b"]).unwrap_err();
        assert!(err.context.contains(":2:"));
    }
}
