//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (visible with `--nocapture`).
//!
//! Run with `cargo test -p hydra-cli --test acceptance`.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle_support;

use hydra_cli::{cmd_run, load_manifest};
use hydra_core::lp::{self, parse_mps, to_mps, SolveStatus};
use hydra_core::model::{assemble, audit, CaseConfig};
use hydra_core::report::build_report;
use hydra_core::synthetic::{exemption_value_toy, random_toy};
use oracle_support::{oracle, random_lp, OracleStatus};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

type Dims = hydra_core::ModelDimensions;
type Params = hydra_core::ParameterStore;

fn solve_case(
    dims: &Dims,
    params: &Params,
    case: &str,
) -> (hydra_core::Solution, hydra_core::AssembledModel) {
    let model = assemble(dims, params, &CaseConfig::preset(case).unwrap()).unwrap();
    let sol = lp::solve(&model.lp).unwrap_or_else(|e| panic!("case {case}: {e}"));
    (sol, model)
}

/// Audits shared by criteria 4 and 5, applied to every optimal solution the
/// suite produces.
fn assert_audits(dims: &Dims, params: &Params, model: &hydra_core::AssembledModel, sol: &hydra_core::Solution, tag: &str) {
    let a = audit::run_audit(dims, params, model, &sol.primal, sol.objective);
    assert!(a.fixed_h2_rel <= 1e-7, "{tag}: fixed hydrogen deviation {:e}", a.fixed_h2_rel);
    assert!(a.feasibility <= 1e-6, "{tag}: feasibility {:e}", a.feasibility);
    assert!(a.green_accounting <= 1e-6, "{tag}: green accounting {:e}", a.green_accounting);
    assert!(
        a.exemption_share_min >= 0.9 - 1e-9,
        "{tag}: exemption share {}",
        a.exemption_share_min
    );
    assert!(a.repurpose_cap <= 1e-6, "{tag}: repurposing cap {:e}", a.repurpose_cap);
    assert!(a.storage_boundary <= 1e-6, "{tag}: storage boundary {:e}", a.storage_boundary);
    assert!(a.emission <= 1e-6, "{tag}: emission cap {:e}", a.emission);
}

fn fixture(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy").join(path)
}

// ---------------------------------------------------------------------------
// Criterion 1: relaxation ordering on 20 seeded random toy instances,
// within 1e-6 relative slack, total runtime < 60 s.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_relaxation_ordering() {
    let started = std::time::Instant::now();
    let seeds: Vec<u64> = (0..20).collect();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4);
    let chunk = seeds.len().div_ceil(threads);
    let mut worst: f64 = 0.0;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for block in seeds.chunks(chunk) {
            handles.push(scope.spawn(move || {
                let mut worst_violation: f64 = 0.0;
                for &seed in block {
                    let (dims, params) = random_toy::<f64>(seed);
                    let mut objectives = BTreeMap::new();
                    for case in ["Base", "ST90", "AST90", "AT90", "AS90"] {
                        let (sol, model) = solve_case(&dims, &params, case);
                        assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed} case {case}");
                        assert_audits(&dims, &params, &model, &sol, &format!("seed {seed} case {case}"));
                        objectives.insert(case, sol.objective);
                    }
                    let slack = |hi: f64| 1e-6 * (1.0 + hi.abs());
                    let pairs = [
                        ("Base", "ST90"),
                        ("ST90", "AST90"),
                        ("AT90", "AST90"),
                        ("AS90", "AST90"),
                    ];
                    for (lo, hi) in pairs {
                        let (l, h) = (objectives[lo], objectives[hi]);
                        assert!(
                            l <= h + slack(h),
                            "seed {seed}: objective({lo})={l} > objective({hi})={h}"
                        );
                        worst_violation = worst_violation.max(l - h);
                    }
                }
                worst_violation
            }));
        }
        for h in handles {
            worst = worst.max(h.join().unwrap());
        }
    });
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "relaxation ordering took {elapsed:?}, budget is 60 s"
    );
    println!(
        "ACCEPTANCE relaxation_ordering: PASS (20 instances, worst ordering slack {worst:.3e}, {elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: directional replication on the bundled toy — costs rise,
// strictly more first-period VRES, capacity factor does not rise.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_directional_base_vs_ast90() {
    let manifest = load_manifest(&fixture("run.manifest")).unwrap();
    let dims = hydra_core::dimensions::load_dimensions::<f64>(&manifest.data_dir, &manifest.time)
        .expect("bundled data loads");
    let params = hydra_core::params::load_parameters(&manifest.data_dir, &dims, None)
        .expect("bundled parameters load");

    let (bsol, bmodel) = solve_case(&dims, &params, "Base");
    let (asol, amodel) = solve_case(&dims, &params, "AST90");
    assert_audits(&dims, &params, &bmodel, &bsol, "bundled Base");
    assert_audits(&dims, &params, &amodel, &asol, "bundled AST90");

    // (a) nonnegative objective increase
    let delta = asol.objective - bsol.objective;
    assert!(delta >= 0.0, "objective fell by {delta}");

    // (b) strictly more VRES capacity built in period 1
    let vres = |model: &hydra_core::AssembledModel, sol: &hydra_core::Solution| -> f64 {
        model
            .catalog
            .built_prod
            .iter()
            .filter(|((tech, _), _)| tech == "wind")
            .map(|(_, xs)| sol.primal[xs[0].0])
            .sum()
    };
    let (bv, av) = (vres(&bmodel, &bsol), vres(&amodel, &asol));
    assert!(av > bv, "first-period VRES: Base {bv}, AST90 {av}");

    // (c) expected electrolyzer capacity factor does not rise
    let cf = |sol: &hydra_core::Solution, model: &hydra_core::AssembledModel| -> f64 {
        let report = build_report(sol, model, &params, &dims).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (_t, node, i, v) in &report.capacity_factors {
            let prod = report
                .hydrogen
                .iter()
                .find(|(n, p, _)| n == node && p == i)
                .map(|(_, _, v)| *v)
                .unwrap_or(0.0);
            num += v * prod;
            den += prod;
        }
        num / den
    };
    let (bcf, acf) = (cf(&bsol, &bmodel), cf(&asol, &amodel));
    assert!(acf <= bcf + 1e-9, "capacity factor rose: Base {bcf}, AST90 {acf}");
    println!(
        "ACCEPTANCE directional_base_vs_ast90: PASS (delta {delta:.4e} EUR, VRES {bv:.1} -> {av:.1} MW, CF {bcf:.4} -> {acf:.4})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: removing the exemption (AST) costs at least AST90 and weakly
// reduces exempt-node hydrogen output.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_directional_ast_vs_ast90() {
    let (dims, params) = exemption_value_toy::<f64>();
    let (sol90, model90) = solve_case(&dims, &params, "AST90");
    let (sol, model) = solve_case(&dims, &params, "AST");
    assert_audits(&dims, &params, &model90, &sol90, "exemption toy AST90");
    assert_audits(&dims, &params, &model, &sol, "exemption toy AST");
    assert!(
        sol.objective >= sol90.objective - 1e-6 * (1.0 + sol90.objective.abs()),
        "AST {} cheaper than AST90 {}",
        sol.objective,
        sol90.objective
    );
    let nor_h2 = |model: &hydra_core::AssembledModel, sol: &hydra_core::Solution| -> f64 {
        let grid = &model.catalog.source[&("pem".to_string(), 0)];
        grid.vars.iter().map(|v| sol.primal[v.0]).sum()
    };
    let (with, without) = (nor_h2(&model90, &sol90), nor_h2(&model, &sol));
    assert!(
        without <= with + 1e-6 * (1.0 + with.abs()),
        "exempt-node hydrogen rose from {with} to {without}"
    );
    println!(
        "ACCEPTANCE directional_ast_vs_ast90: PASS (objective {:.4e} -> {:.4e}, NOR hydrogen {with:.2} -> {without:.2} t)",
        sol90.objective, sol.objective
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: fixed hydrogen equality on every solved case of the bundled
// toy, all six presets, to 1e-7 relative.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_fixed_hydrogen_equality() {
    let manifest = load_manifest(&fixture("run_all_cases.manifest")).unwrap();
    let dims = hydra_core::dimensions::load_dimensions::<f64>(&manifest.data_dir, &manifest.time)
        .unwrap();
    let params = hydra_core::params::load_parameters(&manifest.data_dir, &dims, None).unwrap();
    let mut worst: f64 = 0.0;
    for case in CaseConfig::PRESETS {
        let (sol, model) = solve_case(&dims, &params, case);
        assert_eq!(sol.status, SolveStatus::Optimal, "case {case}");
        let dev = audit::fixed_h2_rel(&dims, &model, &sol.primal);
        assert!(dev <= 1e-7, "case {case}: fixed hydrogen deviation {dev:e}");
        worst = worst.max(dev);
    }
    println!("ACCEPTANCE fixed_hydrogen_equality: PASS (6 cases, worst relative deviation {worst:.3e})");
}

// ---------------------------------------------------------------------------
// Criterion 5: constraint audits on every optimal solution of the bundled
// system across all presets (repurposing included), max violation <= 1e-6.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_constraint_audits() {
    let manifest = load_manifest(&fixture("run_all_cases.manifest")).unwrap();
    let dims = hydra_core::dimensions::load_dimensions::<f64>(&manifest.data_dir, &manifest.time)
        .unwrap();
    let params = hydra_core::params::load_parameters(&manifest.data_dir, &dims, None).unwrap();
    let mut worst: f64 = 0.0;
    for case in CaseConfig::PRESETS {
        let (sol, model) = solve_case(&dims, &params, case);
        assert_audits(&dims, &params, &model, &sol, &format!("bundled {case}"));
        let a = audit::run_audit(&dims, &params, &model, &sol.primal, sol.objective);
        worst = worst.max(a.worst_violation());
    }
    println!("ACCEPTANCE constraint_audits: PASS (6 cases, worst violation {worst:.3e})");
}

// ---------------------------------------------------------------------------
// Criterion 6: embedded simplex versus exhaustive basis enumeration on 200
// random LPs; status exact, objective within 1e-7 relative, duality gap
// <= 1e-8 on optimal instances.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_solver_oracle() {
    let mut optimal = 0;
    let mut worst_gap: f64 = 0.0;
    for seed in 0..200u64 {
        let problem = random_lp(seed * 7919 + 1);
        let (ostat, oobj) = oracle(&problem);
        let sol = lp::solve(&problem).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let sstat = match sol.status {
            SolveStatus::Optimal => OracleStatus::Optimal,
            SolveStatus::Infeasible => OracleStatus::Infeasible,
            SolveStatus::Unbounded => OracleStatus::Unbounded,
        };
        assert_eq!(sstat, ostat, "seed {seed}: status mismatch");
        if ostat == OracleStatus::Optimal {
            optimal += 1;
            let rel = (sol.objective - oobj).abs() / (1.0 + oobj.abs());
            assert!(rel <= 1e-7, "seed {seed}: objective off by {rel:e}");

            let mut dual_obj = 0.0;
            for r in problem.iter_rows() {
                dual_obj += sol.dual[r.0] * problem.row_rhs(r);
            }
            for v in problem.iter_vars() {
                let d = sol.reduced_costs[v.0];
                let (l, u) = problem.var_bounds(v);
                if d > 1e-9 && l.is_finite() {
                    dual_obj += d * l;
                } else if d < -1e-9 && u.is_finite() {
                    dual_obj += d * u;
                }
            }
            let gap = (sol.objective - problem.objective_constant() - dual_obj).abs()
                / (1.0 + sol.objective.abs());
            assert!(gap <= 1e-8, "seed {seed}: duality gap {gap:e}");
            worst_gap = worst_gap.max(gap);
        }
    }
    println!(
        "ACCEPTANCE solver_oracle: PASS (200 LPs, {optimal} optimal, worst duality gap {worst_gap:.3e})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: MPS round-trip identity on 100 random LPs and golden byte
// equality on the three fixtures.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_mps_round_trip() {
    for seed in 0..100u64 {
        let lp = random_lp(seed * 104_729 + 7);
        let text = to_mps(&lp).unwrap();
        let back: hydra_core::LinearProgram = parse_mps(&text).unwrap();
        assert_eq!(lp, back, "seed {seed}: structural identity broke");
    }
    // Golden fixtures as committed under the core crate.
    let fixture_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures");
    let mut lp = hydra_core::LinearProgram::new("SINGLE");
    let x = lp.add_variable("x", 0.0, f64::INFINITY, 1.0).unwrap();
    lp.add_row("cap", lp::Sense::Le, &[(x, 2.0)], 10.0).unwrap();
    let golden = std::fs::read_to_string(fixture_dir.join("single.mps")).unwrap();
    assert_eq!(to_mps(&lp).unwrap(), golden, "single.mps golden mismatch");

    let empty = hydra_core::LinearProgram::new("EMPTY");
    let golden = std::fs::read_to_string(fixture_dir.join("empty.mps")).unwrap();
    assert_eq!(to_mps(&empty).unwrap(), golden, "empty.mps golden mismatch");

    let mut mixed = hydra_core::LinearProgram::new("MIXED");
    let a = mixed.add_variable("make_a", 0.0, 40.0, -6.5).unwrap();
    let b = mixed.add_variable("make_b", 0.0, f64::INFINITY, -5.0).unwrap();
    let s = mixed
        .add_variable("spare", f64::NEG_INFINITY, f64::INFINITY, 0.0)
        .unwrap();
    mixed.add_row("wood", lp::Sense::Le, &[(a, 6.0), (b, 4.0)], 24.0).unwrap();
    mixed.add_row("labor", lp::Sense::Le, &[(a, 1.0), (b, 2.0)], 6.0).unwrap();
    mixed.add_row("tie", lp::Sense::Eq, &[(a, 1.0), (s, -1.0)], 0.5).unwrap();
    mixed.set_objective_constant(12.25);
    let golden = std::fs::read_to_string(fixture_dir.join("mixed.mps")).unwrap();
    assert_eq!(to_mps(&mixed).unwrap(), golden, "mixed.mps golden mismatch");

    println!("ACCEPTANCE mps_round_trip: PASS (100 random LPs, 3 golden fixtures byte-equal)");
}

// ---------------------------------------------------------------------------
// Criterion 8: byte-identical output trees from identical manifests.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_run_determinism() {
    let out1 = std::env::temp_dir().join(format!("hydra_acc_det1_{}", std::process::id()));
    let out2 = std::env::temp_dir().join(format!("hydra_acc_det2_{}", std::process::id()));
    for out in [&out1, &out2] {
        let _ = std::fs::remove_dir_all(out);
        let mut manifest = load_manifest(&fixture("run.manifest")).unwrap();
        manifest.out_dir = out.clone();
        cmd_run(&manifest, true).unwrap();
    }
    let collect = |dir: &Path| -> BTreeMap<String, Vec<u8>> {
        let mut out = BTreeMap::new();
        for e in std::fs::read_dir(dir).unwrap().flatten() {
            out.insert(
                e.file_name().to_string_lossy().to_string(),
                std::fs::read(e.path()).unwrap(),
            );
        }
        out
    };
    let (t1, t2) = (collect(&out1), collect(&out2));
    assert_eq!(t1.keys().collect::<Vec<_>>(), t2.keys().collect::<Vec<_>>());
    let mut bytes = 0usize;
    for (name, content) in &t1 {
        assert_eq!(content, &t2[name], "{name} differs between runs");
        bytes += content.len();
    }
    std::fs::remove_dir_all(&out1).unwrap();
    std::fs::remove_dir_all(&out2).unwrap();
    println!(
        "ACCEPTANCE run_determinism: PASS ({} files, {bytes} bytes, byte-identical)",
        t1.len()
    );
}
