//! Batch commands: validate, sample, run, export-mps, compare. Each returns
//! a process exit code through [`CliError`]: 0 ok, 2 data error,
//! 3 infeasible, 4 solver failure.

use crate::manifest::{RunManifest, SolverChoice};
use hydra_core::dimensions::{load_dimensions, validate_dimensions, ModelDimensions};
use hydra_core::lp::{self, SolveStatus};
use hydra_core::model::{assemble, audit, AssembledModel, CaseConfig};
use hydra_core::params::{load_parameters, ParameterStore, SampledTables};
use hydra_core::report::{
    build_report, capacities_csv, costs_csv, diff_csv, diff_reports, generation_csv,
    hydrogen_csv, parse_report, render_report,
};
use hydra_core::scenario::{flatten_to_parameters, load_series, sample_scenarios};
use hydra_core::table::write_csv;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    /// Invalid or missing data (exit 2).
    Data(String),
    /// A case solved infeasible or unbounded (exit 3).
    Infeasible(String),
    /// Numerical failure or missing external solution (exit 4).
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Data(m) | CliError::Infeasible(m) | CliError::Solver(m) => m,
        }
    }
}

fn data_err(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

fn fmt64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Loads dimensions and parameters for a manifest, running the sampler when
/// requested.
fn load_instance(
    manifest: &RunManifest,
) -> Result<(ModelDimensions<f64>, ParameterStore<f64>, Option<u64>), CliError> {
    let dims = load_dimensions::<f64>(&manifest.data_dir, &manifest.time).map_err(|issues| {
        data_err(
            issues
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })?;
    let violations = validate_dimensions(&dims);
    if !violations.is_empty() {
        return Err(data_err(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        ));
    }
    let (tables, seed): (Option<SampledTables<f64>>, Option<u64>) = match &manifest.sample {
        None => (None, None),
        Some(s) => {
            let series = load_series::<f64>(&s.series_dir, &dims).map_err(|issues| {
                data_err(
                    issues
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join("\n"),
                )
            })?;
            let set = sample_scenarios(&series, dims.n_scenarios(), &dims.seasons, s.seed)
                .map_err(|e| data_err(e.to_string()))?;
            let tables =
                flatten_to_parameters(&set, &dims).map_err(|e| data_err(e.to_string()))?;
            (Some(tables), Some(s.seed))
        }
    };
    let mut params =
        load_parameters(&manifest.data_dir, &dims, tables.as_ref()).map_err(|issues| {
            data_err(
                issues
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("\n"),
            )
        })?;
    params.discount_literal_exponent = manifest.discount_literal_exponent;
    Ok((dims, params, seed))
}

/// `validate`: aggregate dimension and parameter validation. Prints every
/// violation; empty output means valid.
pub fn cmd_validate(manifest: &RunManifest) -> Result<String, CliError> {
    let (dims, _params, _) = load_instance(manifest)?;
    Ok(format!(
        "ok: {} nodes, {} periods, {} scenarios, {} hours\n",
        dims.nodes.len(),
        dims.periods,
        dims.n_scenarios(),
        dims.total_hours()
    ))
}

/// `sample`: draw the scenario set and dump the operational tables as
/// loader-compatible CSVs.
pub fn cmd_sample(manifest: &RunManifest, out_override: Option<&Path>) -> Result<String, CliError> {
    let Some(sample) = &manifest.sample else {
        return Err(data_err("manifest has no sample section"));
    };
    let dims = load_dimensions::<f64>(&manifest.data_dir, &manifest.time).map_err(|issues| {
        data_err(
            issues
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })?;
    let series = load_series::<f64>(&sample.series_dir, &dims).map_err(|issues| {
        data_err(
            issues
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })?;
    let set = sample_scenarios(&series, dims.n_scenarios(), &dims.seasons, sample.seed)
        .map_err(|e| data_err(e.to_string()))?;
    let tables = flatten_to_parameters(&set, &dims).map_err(|e| data_err(e.to_string()))?;

    let out = out_override.unwrap_or(&manifest.out_dir);
    std::fs::create_dir_all(out).map_err(|e| data_err(format!("{}: {e}", out.display())))?;

    let mut demand_rows = Vec::new();
    for (c, table) in &tables.demand {
        let unit = if c == "power" { "MW" } else { "ton_per_h" };
        for n in 0..table.nodes {
            for i in 0..table.periods {
                for w in 0..table.scenarios {
                    for h in 0..table.hours {
                        demand_rows.push(vec![
                            c.clone(),
                            dims.nodes[n].clone(),
                            (i + 1).to_string(),
                            (w + 1).to_string(),
                            h.to_string(),
                            fmt64(table.get(n, i, w, h)),
                            unit.to_string(),
                        ]);
                    }
                }
            }
        }
    }
    write_csv(
        &out.join("demand.csv"),
        &["commodity", "node", "period", "scenario", "hour", "value", "unit"],
        &demand_rows,
    )
    .map_err(|e| data_err(e.to_string()))?;

    let mut avail_rows = Vec::new();
    for (g, table) in &tables.availability {
        for n in 0..table.nodes {
            for i in 0..table.periods {
                for w in 0..table.scenarios {
                    for h in 0..table.hours {
                        avail_rows.push(vec![
                            g.clone(),
                            dims.nodes[n].clone(),
                            (i + 1).to_string(),
                            (w + 1).to_string(),
                            h.to_string(),
                            fmt64(table.get(n, i, w, h)),
                            "fraction".to_string(),
                        ]);
                    }
                }
            }
        }
    }
    write_csv(
        &out.join("availability.csv"),
        &["technology", "node", "period", "scenario", "hour", "value", "unit"],
        &avail_rows,
    )
    .map_err(|e| data_err(e.to_string()))?;

    let mut budget_rows = Vec::new();
    let n_seasons = dims.seasons.len();
    let n_scen = dims.n_scenarios();
    for (tech, vals) in &tables.hydro_budget {
        for n in 0..dims.nodes.len() {
            for s in 0..n_seasons {
                for w in 0..n_scen {
                    let v = vals[(n * n_seasons + s) * n_scen + w];
                    if v != 0.0 {
                        budget_rows.push(vec![
                            tech.clone(),
                            dims.nodes[n].clone(),
                            (s + 1).to_string(),
                            (w + 1).to_string(),
                            fmt64(v),
                            "MWh".to_string(),
                        ]);
                    }
                }
            }
        }
    }
    if !budget_rows.is_empty() {
        write_csv(
            &out.join("hydro_budget.csv"),
            &["technology", "node", "season", "scenario", "value", "unit"],
            &budget_rows,
        )
        .map_err(|e| data_err(e.to_string()))?;
    }

    // Window descriptors for traceability.
    let window_rows: Vec<Vec<String>> = set
        .windows
        .iter()
        .map(|w| {
            vec![
                (w.scenario + 1).to_string(),
                dims.seasons[w.season].name.clone(),
                w.source_year.to_string(),
                w.start_in_year.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("windows.csv"),
        &["scenario", "season", "source_year", "start_hour"],
        &window_rows,
    )
    .map_err(|e| data_err(e.to_string()))?;

    Ok(format!(
        "sampled {} scenarios x {} seasons (seed {}) into {}\n",
        dims.n_scenarios(),
        dims.seasons.len(),
        sample.seed,
        out.display()
    ))
}

struct CaseOutcome {
    case: CaseConfig,
    model: AssembledModel<f64>,
    solution: Result<hydra_core::Solution, CliError>,
}

fn thread_cap() -> usize {
    std::env::var("HYDRA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// `run`: assemble, solve (embedded or via external solution files), audit,
/// and report every case of the manifest.
pub fn cmd_run(manifest: &RunManifest, write_mps: bool) -> Result<String, CliError> {
    let (dims, params, seed) = load_instance(manifest)?;
    let out = &manifest.out_dir;
    std::fs::create_dir_all(out).map_err(|e| data_err(format!("{}: {e}", out.display())))?;

    // Assemble all cases first (cheap relative to solving).
    let mut models: Vec<AssembledModel<f64>> = Vec::new();
    for case in &manifest.cases {
        models.push(assemble(&dims, &params, case).map_err(|e| data_err(e.to_string()))?);
    }

    // Export MPS when requested or when the solver is external.
    let external = matches!(manifest.solver, SolverChoice::ExternalMps { .. });
    if write_mps || external {
        for model in &models {
            let text = lp::to_mps(&model.lp).map_err(|e| data_err(e.to_string()))?;
            let path = out.join(format!("{}.mps", model.case.name));
            std::fs::write(&path, text)
                .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        }
    }

    // Solve, capped parallelism across cases.
    let outcomes: Vec<CaseOutcome> = match &manifest.solver {
        SolverChoice::Embedded => {
            let cap = thread_cap().max(1);
            let mut results: Vec<Option<CaseOutcome>> = Vec::new();
            for _ in 0..models.len() {
                results.push(None);
            }
            let mut queue: Vec<(usize, AssembledModel<f64>)> =
                models.into_iter().enumerate().collect();
            while !queue.is_empty() {
                let batch: Vec<_> = queue
                    .drain(..queue.len().min(cap))
                    .collect();
                let mut handles = Vec::new();
                for (idx, model) in batch {
                    handles.push(std::thread::spawn(move || {
                        let solution = lp::solve(&model.lp)
                            .map_err(|e| CliError::Solver(format!("{}: {e}", model.case.name)));
                        (idx, CaseOutcome {
                            case: model.case.clone(),
                            model,
                            solution,
                        })
                    }));
                }
                for h in handles {
                    let (idx, outcome) = h.join().expect("solver thread");
                    results[idx] = Some(outcome);
                }
            }
            results.into_iter().map(|o| o.expect("all solved")).collect()
        }
        SolverChoice::ExternalMps { solution_dir } => {
            let dir = solution_dir.as_deref().unwrap_or(out);
            let mut outcomes = Vec::new();
            for model in models {
                let path = dir.join(format!("{}.sol", model.case.name));
                let solution = match std::fs::read_to_string(&path) {
                    Err(e) => Err(CliError::Solver(format!(
                        "missing external solution {}: {e}",
                        path.display()
                    ))),
                    Ok(text) => lp::parse_solution_file(&model.lp, &text)
                        .map_err(|e| CliError::Solver(format!("{}: {e}", path.display())))
                        .map(|primal| {
                            let objective = model.lp.objective_value(&primal);
                            hydra_core::Solution {
                                status: SolveStatus::Optimal,
                                primal,
                                dual: Vec::new(),
                                reduced_costs: Vec::new(),
                                objective,
                                iterations: 0,
                            }
                        }),
                };
                outcomes.push(CaseOutcome {
                    case: model.case.clone(),
                    model,
                    solution,
                });
            }
            outcomes
        }
    };

    // Reports and summary.
    let mut summary = String::new();
    summary.push_str("hydra-run v1\n");
    summary.push_str(&format!("cases {}\n", outcomes.len()));
    if let Some(seed) = seed {
        summary.push_str(&format!("seed {seed}\n"));
    }
    summary.push_str(&format!(
        "deannualization {}\n",
        fmt64(dims.year_coverage())
    ));
    summary.push_str("[dimensions]\n");
    summary.push_str(&format!("nodes {}\n", dims.nodes.len()));
    summary.push_str(&format!("periods {}\n", dims.periods));
    summary.push_str(&format!("scenarios {}\n", dims.n_scenarios()));
    summary.push_str(&format!("hours {}\n", dims.total_hours()));

    let mut first_failure: Option<CliError> = None;
    for outcome in &outcomes {
        let name = &outcome.case.name;
        summary.push_str(&format!("[case {name}]\n"));
        match &outcome.solution {
            Err(e) => {
                summary.push_str(&format!("status error\nerror {}\n", e.message()));
                if first_failure.is_none() {
                    first_failure = Some(CliError::Solver(e.message().to_string()));
                }
            }
            Ok(sol) if sol.status != SolveStatus::Optimal => {
                let status = match sol.status {
                    SolveStatus::Infeasible => "infeasible",
                    SolveStatus::Unbounded => "unbounded",
                    SolveStatus::Optimal => unreachable!(),
                };
                summary.push_str(&format!("status {status}\n"));
                if first_failure.is_none() {
                    first_failure =
                        Some(CliError::Infeasible(format!("case {name} is {status}")));
                }
            }
            Ok(sol) => {
                summary.push_str("status optimal\n");
                summary.push_str(&format!("objective {}\n", fmt64(sol.objective)));
                summary.push_str(&format!("iterations {}\n", sol.iterations));
                summary.push_str(&format!("variables {}\n", outcome.model.lp.num_vars()));
                summary.push_str(&format!("rows {}\n", outcome.model.lp.num_rows()));
                for fam in &outcome.model.manifest {
                    match &fam.skipped {
                        Some(reason) => summary.push_str(&format!(
                            "family {} skipped ({reason})\n",
                            fam.family
                        )),
                        None => summary
                            .push_str(&format!("family {} {}\n", fam.family, fam.rows)),
                    }
                }
                let audit =
                    audit::run_audit(&dims, &params, &outcome.model, &sol.primal, sol.objective);
                summary.push_str(&format!("audit feasibility {}\n", fmt64(audit.feasibility)));
                summary.push_str(&format!(
                    "audit green_accounting {}\n",
                    fmt64(audit.green_accounting)
                ));
                summary.push_str(&format!(
                    "audit exemption_share_min {}\n",
                    fmt64(audit.exemption_share_min)
                ));
                summary.push_str(&format!("audit fixed_h2_rel {}\n", fmt64(audit.fixed_h2_rel)));
                summary.push_str(&format!(
                    "audit repurpose_cap {}\n",
                    fmt64(audit.repurpose_cap)
                ));
                summary.push_str(&format!(
                    "audit storage_boundary {}\n",
                    fmt64(audit.storage_boundary)
                ));
                summary.push_str(&format!("audit emission {}\n", fmt64(audit.emission)));
                summary.push_str(&format!(
                    "audit objective_rel {}\n",
                    fmt64(audit.objective_rel)
                ));

                let report = build_report(sol, &outcome.model, &params, &dims)
                    .map_err(|e| data_err(e.to_string()))?;
                let (h, rows) = costs_csv(&report);
                write_csv(&out.join(format!("costs_{name}.csv")), &h, &rows)
                    .map_err(|e| data_err(e.to_string()))?;
                let (h, rows) = generation_csv(&report, &dims);
                write_csv(&out.join(format!("generation_{name}.csv")), &h, &rows)
                    .map_err(|e| data_err(e.to_string()))?;
                let (h, rows) = hydrogen_csv(&report);
                write_csv(&out.join(format!("hydrogen_{name}.csv")), &h, &rows)
                    .map_err(|e| data_err(e.to_string()))?;
                let (h, rows) = capacities_csv(&report);
                write_csv(&out.join(format!("capacities_{name}.csv")), &h, &rows)
                    .map_err(|e| data_err(e.to_string()))?;
                std::fs::write(
                    out.join(format!("report_{name}.txt")),
                    render_report(&report),
                )
                .map_err(|e| data_err(e.to_string()))?;
            }
        }
    }
    std::fs::write(out.join("summary.txt"), &summary)
        .map_err(|e| data_err(e.to_string()))?;

    match first_failure {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

/// `export-mps`: assemble and write the MPS files without solving.
pub fn cmd_export_mps(manifest: &RunManifest) -> Result<String, CliError> {
    let (dims, params, _) = load_instance(manifest)?;
    std::fs::create_dir_all(&manifest.out_dir)
        .map_err(|e| data_err(format!("{}: {e}", manifest.out_dir.display())))?;
    let mut written = Vec::new();
    for case in &manifest.cases {
        let model = assemble(&dims, &params, case).map_err(|e| data_err(e.to_string()))?;
        let text = lp::to_mps(&model.lp).map_err(|e| data_err(e.to_string()))?;
        let path = manifest.out_dir.join(format!("{}.mps", case.name));
        std::fs::write(&path, text).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    Ok(written.join("\n") + "\n")
}

/// `compare`: diff two written reports into a CSV.
pub fn cmd_compare(
    report_a: &Path,
    report_b: &Path,
    out_file: Option<&Path>,
) -> Result<String, CliError> {
    let read = |p: &Path| -> Result<hydra_core::SolutionReport, CliError> {
        let text = std::fs::read_to_string(p)
            .map_err(|e| data_err(format!("{}: {e}", p.display())))?;
        parse_report(&text).map_err(|e| data_err(format!("{}: {e}", p.display())))
    };
    let a = read(report_a)?;
    let b = read(report_b)?;
    let diff = diff_reports(&a, &b).map_err(|e| data_err(e.to_string()))?;
    let (h, rows) = diff_csv(&diff);
    let default = std::path::PathBuf::from(format!("diff_{}_{}.csv", a.case, b.case));
    let path = out_file.unwrap_or(&default);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| data_err(e.to_string()))?;
        }
    }
    write_csv(path, &h, &rows).map_err(|e| data_err(e.to_string()))?;
    Ok(format!(
        "objective delta {}: wrote {}\n",
        fmt64(diff.objective_delta),
        path.display()
    ))
}
