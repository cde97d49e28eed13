//! Run manifest: one human-readable text file with sections describing the
//! data directory, time structure, cases, solver choice, sampling, and
//! output location.
//!
//! # Grammar
//!
//! Line oriented. `#` starts a comment, blank lines are ignored. A line
//! `name {` opens a section closed by a lone `}`; inside a section each line
//! is `key value...`. Top level:
//!
//! ```text
//! data_dir <path>           # relative paths resolve against the manifest
//! out_dir  <path>
//! cases    <name> <name>...
//!
//! time {
//!   periods <n>
//!   period_length_years <years>
//!   scenarios <n>
//!   probabilities <p1> <p2> ...          # optional, uniform by default
//!   season <name> <hours> <represented_hours> [<pool_offset> <pool_hours>]
//! }
//!
//! case <Name> {                           # custom case definition
//!   custom on
//!   additionality on|off
//!   spatial on|off
//!   temporal on|off
//!   exemption90 on|off
//! }
//!
//! solver {
//!   kind embedded | external-mps
//!   solution_dir <path>                   # external only, defaults to out_dir
//! }
//!
//! sample {                                # optional: sample operational data
//!   series_dir <path>
//!   seed <u64>
//! }
//!
//! options {
//!   discount_literal_exponent on|off      # positive-exponent discounting
//! }
//! ```

use hydra_core::dimensions::{Season, TimeStructure};
use hydra_core::model::CaseConfig;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverChoice {
    Embedded,
    ExternalMps { solution_dir: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSection {
    pub series_dir: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub time: TimeStructure,
    pub cases: Vec<CaseConfig>,
    pub solver: SolverChoice,
    pub sample: Option<SampleSection>,
    pub discount_literal_exponent: bool,
}

#[derive(Debug, thiserror::Error)]
#[error("manifest line {line}: {msg}")]
pub struct ManifestError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ManifestError {
    ManifestError {
        line,
        msg: msg.into(),
    }
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<RunManifest, ManifestError> {
    let mut data_dir: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut case_names: Vec<String> = Vec::new();
    let mut custom_cases: Vec<CaseConfig> = Vec::new();
    let mut time: Option<TimeStructure> = None;
    let mut solver = SolverChoice::Embedded;
    let mut sample: Option<SampleSection> = None;
    let mut discount_literal = false;

    let resolve = |p: &str| -> PathBuf {
        let path = PathBuf::from(p);
        if path.is_absolute() {
            path
        } else {
            base.join(path)
        }
    };

    let mut lines = text.lines().enumerate().peekable();
    while let Some((ln, raw)) = lines.next() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "data_dir" => data_dir = Some(resolve(toks.get(1).ok_or(err(line, "missing path"))?)),
            "out_dir" => out_dir = Some(resolve(toks.get(1).ok_or(err(line, "missing path"))?)),
            "cases" => case_names.extend(toks[1..].iter().map(|s| s.to_string())),
            "time" => {
                if toks.get(1) != Some(&"{") {
                    return Err(err(line, "expected `time {`"));
                }
                let mut periods = 0usize;
                let mut years = 0u32;
                let mut scenarios = 0usize;
                let mut probabilities = Vec::new();
                let mut seasons: Vec<Season> = Vec::new();
                loop {
                    let Some((ln2, raw2)) = lines.next() else {
                        return Err(err(line, "unterminated time section"));
                    };
                    let l2 = ln2 + 1;
                    let body2 = raw2.split('#').next().unwrap_or("").trim();
                    if body2.is_empty() {
                        continue;
                    }
                    if body2 == "}" {
                        break;
                    }
                    let t: Vec<&str> = body2.split_whitespace().collect();
                    match t[0] {
                        "periods" => {
                            periods = t
                                .get(1)
                                .and_then(|v| v.parse().ok())
                                .ok_or(err(l2, "bad periods"))?
                        }
                        "period_length_years" => {
                            years = t
                                .get(1)
                                .and_then(|v| v.parse().ok())
                                .ok_or(err(l2, "bad period_length_years"))?
                        }
                        "scenarios" => {
                            scenarios = t
                                .get(1)
                                .and_then(|v| v.parse().ok())
                                .ok_or(err(l2, "bad scenarios"))?
                        }
                        "probabilities" => {
                            for v in &t[1..] {
                                probabilities
                                    .push(v.parse().map_err(|_| err(l2, "bad probability"))?);
                            }
                        }
                        "season" => {
                            if t.len() != 4 && t.len() != 6 {
                                return Err(err(
                                    l2,
                                    "season needs `name hours represented [pool_offset pool_hours]`",
                                ));
                            }
                            let hours: usize =
                                t[2].parse().map_err(|_| err(l2, "bad hours"))?;
                            let represented: f64 =
                                t[3].parse().map_err(|_| err(l2, "bad represented hours"))?;
                            let (pool_offset, pool_hours) = if t.len() == 6 {
                                (
                                    t[4].parse().map_err(|_| err(l2, "bad pool offset"))?,
                                    t[5].parse().map_err(|_| err(l2, "bad pool hours"))?,
                                )
                            } else {
                                (0, represented.max(hours as f64) as usize)
                            };
                            seasons.push(Season {
                                name: t[1].to_string(),
                                hours,
                                represented_hours: represented,
                                pool_offset,
                                pool_hours,
                            });
                        }
                        other => return Err(err(l2, format!("unknown time key {other:?}"))),
                    }
                }
                time = Some(TimeStructure {
                    periods,
                    period_length_years: years,
                    seasons,
                    scenarios,
                    probabilities,
                });
            }
            "case" => {
                let name = toks.get(1).ok_or(err(line, "case needs a name"))?.to_string();
                if toks.get(2) != Some(&"{") {
                    return Err(err(line, "expected `case <Name> {`"));
                }
                let mut cfg = CaseConfig {
                    name: name.clone(),
                    additionality: false,
                    spatial: false,
                    temporal: false,
                    exemption90: false,
                    custom: false,
                };
                loop {
                    let Some((ln2, raw2)) = lines.next() else {
                        return Err(err(line, "unterminated case section"));
                    };
                    let l2 = ln2 + 1;
                    let body2 = raw2.split('#').next().unwrap_or("").trim();
                    if body2.is_empty() {
                        continue;
                    }
                    if body2 == "}" {
                        break;
                    }
                    let t: Vec<&str> = body2.split_whitespace().collect();
                    let on = match t.get(1) {
                        Some(&"on") => true,
                        Some(&"off") => false,
                        _ => return Err(err(l2, "expected on/off")),
                    };
                    match t[0] {
                        "custom" => cfg.custom = on,
                        "additionality" => cfg.additionality = on,
                        "spatial" => cfg.spatial = on,
                        "temporal" => cfg.temporal = on,
                        "exemption90" => cfg.exemption90 = on,
                        other => return Err(err(l2, format!("unknown case key {other:?}"))),
                    }
                }
                custom_cases.push(cfg);
            }
            "solver" => {
                if toks.get(1) != Some(&"{") {
                    return Err(err(line, "expected `solver {`"));
                }
                let mut kind = "embedded".to_string();
                let mut solution_dir = None;
                loop {
                    let Some((ln2, raw2)) = lines.next() else {
                        return Err(err(line, "unterminated solver section"));
                    };
                    let l2 = ln2 + 1;
                    let body2 = raw2.split('#').next().unwrap_or("").trim();
                    if body2.is_empty() {
                        continue;
                    }
                    if body2 == "}" {
                        break;
                    }
                    let t: Vec<&str> = body2.split_whitespace().collect();
                    match t[0] {
                        "kind" => kind = t.get(1).ok_or(err(l2, "missing kind"))?.to_string(),
                        "solution_dir" => {
                            solution_dir =
                                Some(resolve(t.get(1).ok_or(err(l2, "missing path"))?))
                        }
                        other => return Err(err(l2, format!("unknown solver key {other:?}"))),
                    }
                }
                solver = match kind.as_str() {
                    "embedded" => SolverChoice::Embedded,
                    "external-mps" => SolverChoice::ExternalMps { solution_dir },
                    other => return Err(err(line, format!("unknown solver kind {other:?}"))),
                };
            }
            "sample" => {
                if toks.get(1) != Some(&"{") {
                    return Err(err(line, "expected `sample {`"));
                }
                let mut series_dir = None;
                let mut seed = 0u64;
                loop {
                    let Some((ln2, raw2)) = lines.next() else {
                        return Err(err(line, "unterminated sample section"));
                    };
                    let l2 = ln2 + 1;
                    let body2 = raw2.split('#').next().unwrap_or("").trim();
                    if body2.is_empty() {
                        continue;
                    }
                    if body2 == "}" {
                        break;
                    }
                    let t: Vec<&str> = body2.split_whitespace().collect();
                    match t[0] {
                        "series_dir" => {
                            series_dir = Some(resolve(t.get(1).ok_or(err(l2, "missing path"))?))
                        }
                        "seed" => {
                            seed = t
                                .get(1)
                                .and_then(|v| v.parse().ok())
                                .ok_or(err(l2, "bad seed"))?
                        }
                        other => return Err(err(l2, format!("unknown sample key {other:?}"))),
                    }
                }
                sample = Some(SampleSection {
                    series_dir: series_dir.ok_or(err(line, "sample needs series_dir"))?,
                    seed,
                });
            }
            "options" => {
                if toks.get(1) != Some(&"{") {
                    return Err(err(line, "expected `options {`"));
                }
                loop {
                    let Some((ln2, raw2)) = lines.next() else {
                        return Err(err(line, "unterminated options section"));
                    };
                    let l2 = ln2 + 1;
                    let body2 = raw2.split('#').next().unwrap_or("").trim();
                    if body2.is_empty() {
                        continue;
                    }
                    if body2 == "}" {
                        break;
                    }
                    let t: Vec<&str> = body2.split_whitespace().collect();
                    match t[0] {
                        "discount_literal_exponent" => {
                            discount_literal = t.get(1) == Some(&"on");
                        }
                        other => return Err(err(l2, format!("unknown option {other:?}"))),
                    }
                }
            }
            other => return Err(err(line, format!("unknown manifest key {other:?}"))),
        }
    }

    let time = time.ok_or(err(0, "manifest has no time section"))?;
    let data_dir = data_dir.ok_or(err(0, "manifest has no data_dir"))?;
    let out_dir = out_dir.ok_or(err(0, "manifest has no out_dir"))?;

    let mut cases = Vec::new();
    for name in &case_names {
        if let Some(c) = custom_cases.iter().find(|c| &c.name == name) {
            cases.push(c.clone());
        } else if let Some(c) = CaseConfig::preset(name) {
            cases.push(c);
        } else {
            return Err(err(
                0,
                format!("case {name:?} is neither a preset nor defined in the manifest"),
            ));
        }
    }
    if cases.is_empty() {
        return Err(err(0, "manifest selects no cases"));
    }

    Ok(RunManifest {
        data_dir,
        out_dir,
        time,
        cases,
        solver,
        sample,
        discount_literal_exponent: discount_literal,
    })
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# demo
data_dir data
out_dir out
cases Base AST90 My

time {
  periods 2
  period_length_years 3
  scenarios 2
  season day 24 8760
}

case My {
  custom on
  additionality on
  spatial off
  temporal off
  exemption90 off
}

solver {
  kind embedded
}

options {
  discount_literal_exponent off
}
";

    #[test]
    fn parses_sections_and_custom_cases() {
        let m = parse_manifest(SAMPLE, Path::new("/tmp/x")).unwrap();
        assert_eq!(m.cases.len(), 3);
        assert_eq!(m.cases[2].name, "My");
        assert!(m.cases[2].custom);
        assert_eq!(m.time.periods, 2);
        assert_eq!(m.data_dir, PathBuf::from("/tmp/x/data"));
        assert_eq!(m.solver, SolverChoice::Embedded);
    }

    #[test]
    fn unknown_case_is_rejected() {
        let bad = SAMPLE.replace("cases Base AST90 My", "cases Nope");
        assert!(parse_manifest(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn unknown_key_reports_line() {
        let bad = "data_dir d\nwhatever x\n";
        let e = parse_manifest(bad, Path::new(".")).unwrap_err();
        assert_eq!(e.line, 2);
    }
}
