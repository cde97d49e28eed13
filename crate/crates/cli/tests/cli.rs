//! Command behavior against the bundled fixture: run artifacts, exit codes,
//! determinism, comparison, MPS export, sampling, and the external-solver
//! loop.

use hydra_cli::manifest::SolverChoice;
use hydra_cli::{cmd_compare, cmd_export_mps, cmd_run, cmd_sample, cmd_validate, load_manifest};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn fixture_manifest() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy/run.manifest")
}

fn sampled_manifest() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy/run_sampled.manifest")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hydra_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// Byte content of every file in a directory tree, keyed by relative path.
fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn validate_accepts_bundled_fixture() {
    let manifest = load_manifest(&fixture_manifest()).unwrap();
    let msg = cmd_validate(&manifest).unwrap();
    assert!(msg.contains("ok"), "{msg}");
}

#[test]
fn validate_reports_missing_file_with_path() {
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    manifest.data_dir = PathBuf::from("/nonexistent/hydra_data");
    let err = cmd_validate(&manifest).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.message().contains("/nonexistent/hydra_data"), "{}", err.message());
    assert!(err.message().contains("nodes.csv"), "{}", err.message());
}

#[test]
fn run_produces_expected_artifacts() {
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    let out = temp_dir("run");
    manifest.out_dir = out.clone();
    cmd_run(&manifest, false).unwrap();
    let files = tree(&out);
    let names: Vec<&String> = files.keys().collect();
    let csvs: Vec<&&String> = names.iter().filter(|n| n.ends_with(".csv")).collect();
    assert_eq!(csvs.len(), 8, "expected 8 CSV files, got {names:?}");
    for case in ["Base", "AST90"] {
        for kind in ["costs", "generation", "hydrogen", "capacities"] {
            assert!(files.contains_key(&format!("{kind}_{case}.csv")), "{kind}_{case}");
        }
        assert!(files.contains_key(&format!("report_{case}.txt")));
    }
    assert!(files.contains_key("summary.txt"));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn identical_manifests_produce_byte_identical_trees() {
    let mut m1 = load_manifest(&fixture_manifest()).unwrap();
    let out1 = temp_dir("det1");
    m1.out_dir = out1.clone();
    cmd_run(&m1, true).unwrap();

    let mut m2 = load_manifest(&fixture_manifest()).unwrap();
    let out2 = temp_dir("det2");
    m2.out_dir = out2.clone();
    cmd_run(&m2, true).unwrap();

    let t1 = tree(&out1);
    let t2 = tree(&out2);
    assert_eq!(
        t1.keys().collect::<Vec<_>>(),
        t2.keys().collect::<Vec<_>>(),
        "file sets differ"
    );
    for (name, bytes) in &t1 {
        assert_eq!(bytes, &t2[name], "file {name} differs between runs");
    }
    std::fs::remove_dir_all(&out1).unwrap();
    std::fs::remove_dir_all(&out2).unwrap();
}

#[test]
fn compare_self_is_zero_and_cross_is_nonnegative() {
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    let out = temp_dir("cmp");
    manifest.out_dir = out.clone();
    cmd_run(&manifest, false).unwrap();

    let base = out.join("report_Base.txt");
    let ast90 = out.join("report_AST90.txt");
    let diff_self = out.join("diff_self.csv");
    cmd_compare(&base, &base, Some(&diff_self)).unwrap();
    let text = std::fs::read_to_string(&diff_self).unwrap();
    for line in text.lines().skip(1) {
        let delta: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(delta, 0.0, "line {line}");
    }

    let diff_cross = out.join("diff_cross.csv");
    let msg = cmd_compare(&base, &ast90, Some(&diff_cross)).unwrap();
    assert!(msg.contains("objective delta"));
    let text = std::fs::read_to_string(&diff_cross).unwrap();
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("objective,"));
    let delta: f64 = first.rsplit(',').next().unwrap().parse().unwrap();
    assert!(delta >= 0.0, "Base -> AST90 objective delta {delta}");
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn compare_rejects_mismatched_reports() {
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    let out = temp_dir("cmp_mismatch");
    manifest.out_dir = out.clone();
    // Restrict to one period via a different fingerprint: just corrupt it.
    cmd_run(&manifest, false).unwrap();
    let base = out.join("report_Base.txt");
    let other = out.join("report_other.txt");
    let text = std::fs::read_to_string(&base)
        .unwrap()
        .replace("fingerprint NOR+ESP+DEU", "fingerprint XXX+YYY");
    std::fs::write(&other, text).unwrap();
    let err = cmd_compare(&base, &other, Some(&out.join("d.csv"))).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.message().contains("DIMENSION_MISMATCH"));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn export_mps_writes_parseable_programs() {
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    let out = temp_dir("mps");
    manifest.out_dir = out.clone();
    cmd_export_mps(&manifest).unwrap();
    for case in ["Base", "AST90"] {
        let text = std::fs::read_to_string(out.join(format!("{case}.mps"))).unwrap();
        let lp: hydra_core::LinearProgram = hydra_core::lp::parse_mps(&text).unwrap();
        assert!(lp.num_vars() > 1000);
        assert!(lp.num_rows() > 1000);
    }
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn external_solver_loop_reproduces_embedded_objective() {
    // Export the Base MPS, solve it through the public parse/solve API,
    // write a two-column solution file, and feed it back through run.
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    manifest.cases.truncate(1); // Base only
    let out = temp_dir("ext");
    manifest.out_dir = out.clone();
    cmd_export_mps(&manifest).unwrap();

    let text = std::fs::read_to_string(out.join("Base.mps")).unwrap();
    let lp: hydra_core::LinearProgram = hydra_core::lp::parse_mps(&text).unwrap();
    let sol = hydra_core::lp::solve(&lp).unwrap();
    assert_eq!(sol.status, hydra_core::lp::SolveStatus::Optimal);
    let mut lines = String::new();
    for v in lp.iter_vars() {
        lines.push_str(&format!("{} {:.17e}\n", lp.var_name(v), sol.primal[v.0]));
    }
    std::fs::write(out.join("Base.sol"), lines).unwrap();

    manifest.solver = SolverChoice::ExternalMps { solution_dir: None };
    cmd_run(&manifest, false).unwrap();
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("status optimal"));
    // The reported objective must match the embedded solve.
    let line = summary
        .lines()
        .find(|l| l.starts_with("objective "))
        .unwrap();
    let reported: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    let rel = (reported - sol.objective).abs() / (1.0 + sol.objective.abs());
    assert!(rel < 1e-9, "objective mismatch: {reported} vs {}", sol.objective);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn external_solver_missing_solution_is_exit_4() {
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    let out = temp_dir("ext_missing");
    manifest.out_dir = out.clone();
    manifest.solver = SolverChoice::ExternalMps { solution_dir: None };
    let err = cmd_run(&manifest, false).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert!(err.message().contains("Base.sol"), "{}", err.message());
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn sampled_manifest_runs_and_sample_dumps_tables() {
    let manifest = load_manifest(&sampled_manifest()).unwrap();
    let out = temp_dir("sample");
    let msg = cmd_sample(&manifest, Some(&out)).unwrap();
    assert!(msg.contains("seed 42"), "{msg}");
    for f in ["demand.csv", "availability.csv", "hydro_budget.csv", "windows.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    // Same seed twice: identical files.
    let first = tree(&out);
    cmd_sample(&manifest, Some(&out)).unwrap();
    assert_eq!(first, tree(&out));
    std::fs::remove_dir_all(&out).unwrap();

    let mut manifest = load_manifest(&sampled_manifest()).unwrap();
    let out = temp_dir("sampled_run");
    manifest.out_dir = out.clone();
    manifest.cases.truncate(1);
    cmd_run(&manifest, false).unwrap();
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("seed 42"));
    assert!(summary.contains("status optimal"));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hydra");
    let ok = std::process::Command::new(bin)
        .args(["validate", "--manifest"])
        .arg(fixture_manifest())
        .output()
        .unwrap();
    assert!(ok.status.success(), "{:?}", ok);

    let missing = std::process::Command::new(bin)
        .args(["validate", "--manifest", "/nonexistent/m.manifest"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let usage = std::process::Command::new(bin).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn validate_catches_probability_sum_violation() {
    let manifest_text = "\
data_dir data
out_dir out
cases Base
time {
  periods 2
  period_length_years 3
  scenarios 2
  probabilities 0.6 0.5
  season day 24 8760
}
";
    let dir = temp_dir("probsum");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.manifest");
    std::fs::write(&path, manifest_text).unwrap();
    // Point at the bundled data via a symlink-free absolute path rewrite.
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy/data");
    let mut manifest = load_manifest(&path).unwrap();
    manifest.data_dir = data;
    let err = cmd_validate(&manifest).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.message().contains("PROB_SUM"), "{}", err.message());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn infeasible_case_is_exit_3() {
    // A fixed hydrogen target with electrolyzers that can neither be built
    // nor exist initially cannot be met; the run must report exit code 3.
    use hydra_core::dimensions::{TechClass, TechKind, HYDROGEN, POWER};
    use hydra_core::synthetic::{write_data_dir, Builder};
    let (dims, params) = Builder::<f64>::new(&["A"], 1, 1, 1)
        .season("all", 2, 8760.0)
        .tech(POWER, TechClass::Production, "gen", TechKind::Dispatchable, true, &["A"])
        .tech(HYDROGEN, TechClass::Production, "pem", TechKind::Electrolyzer, false, &["A"])
        .invest_cost("gen", &[1000.0])
        .op_cost("gen", &[5.0])
        .op_cost("pem", &[0.0])
        .lifetime("gen", 1)
        .shed_cost(POWER, 22_000.0)
        .shed_cost(HYDROGEN, 100_000.0)
        .electrolyzer_power("pem", 50.0)
        .fixed_hydrogen(&[10.0])
        .flat_demand(HYDROGEN, "A", 5.0)
        .build();
    let dir = temp_dir("infeasible");
    write_data_dir(&dims, &params, &dir.join("data")).unwrap();
    std::fs::write(
        dir.join("m.manifest"),
        "data_dir data\nout_dir out\ncases Base\n\
         time {\n  periods 1\n  period_length_years 1\n  scenarios 1\n  season all 2 8760\n}\n",
    )
    .unwrap();
    let manifest = load_manifest(&dir.join("m.manifest")).unwrap();
    let err = cmd_run(&manifest, false).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{}", err.message());
    // The summary still records the status for postmortems.
    let summary = std::fs::read_to_string(dir.join("out/summary.txt")).unwrap();
    assert!(summary.contains("status infeasible"), "{summary}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn run_never_touches_the_data_directory() {
    // Snapshot the data directory bytes, run, and compare: commands only
    // write inside the declared output directory.
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    let out = temp_dir("containment");
    manifest.out_dir = out.clone();
    let before = tree(&manifest.data_dir);
    cmd_run(&manifest, true).unwrap();
    let after = tree(&manifest.data_dir);
    assert_eq!(before, after, "data directory was modified by run");
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn case_selection_limits_artifacts() {
    let mut manifest = load_manifest(&fixture_manifest()).unwrap();
    let out = temp_dir("subset");
    manifest.out_dir = out.clone();
    manifest.cases = vec![hydra_core::model::CaseConfig::preset("AST").unwrap()];
    cmd_run(&manifest, false).unwrap();
    let files = tree(&out);
    assert!(files.contains_key("costs_AST.csv"));
    assert!(!files.keys().any(|k| k.contains("Base")));
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("[case AST]"));
    assert!(summary.contains("family green_exemption skipped"));
    std::fs::remove_dir_all(&out).unwrap();
}
