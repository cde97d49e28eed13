//! Reporting: category accounting, diffs, serialization round-trip, and the
//! directional comparison between Base and AST90.

use hydra_core::lp::{self, SolveStatus};
use hydra_core::model::{assemble, CaseConfig};
use hydra_core::report::{
    balance_identity_gap, build_report, diff_reports, parse_report, render_report, ReportError,
};
use hydra_core::synthetic::{random_toy, repurposing_toy, Builder};
use hydra_core::dimensions::{TechClass, TechKind, POWER};

fn reported(
    dims: &hydra_core::ModelDimensions,
    params: &hydra_core::ParameterStore,
    case: &str,
) -> (hydra_core::SolutionReport, hydra_core::Solution, hydra_core::AssembledModel) {
    let model = assemble(dims, params, &CaseConfig::preset(case).unwrap()).unwrap();
    let sol = lp::solve(&model.lp).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal, "case {case}");
    let report = build_report(&sol, &model, params, dims).unwrap();
    (report, sol, model)
}

#[test]
fn zero_cost_instance_has_all_zero_categories() {
    let (dims, params) = Builder::<f64>::new(&["A"], 1, 1, 1)
        .season("all", 2, 2.0)
        .tech(POWER, TechClass::Production, "gen", TechKind::Dispatchable, false, &["A"])
        .op_cost("gen", &[0.0])
        .shed_cost(POWER, 0.0)
        .initial_capacity("gen", "A", &[5.0])
        .flat_demand(POWER, "A", 3.0)
        .build();
    let (report, _, _) = reported(&dims, &params, "Base");
    assert_eq!(report.objective, 0.0);
    for (k, v) in &report.categories {
        assert_eq!(*v, 0.0, "category {k}");
    }
}

#[test]
fn category_sum_matches_objective() {
    for seed in [0u64, 5, 11] {
        let (dims, params) = random_toy::<f64>(seed);
        for case in ["Base", "AST90"] {
            let (report, sol, _) = reported(&dims, &params, case);
            let sum = report.category_sum();
            let rel = (sum - sol.objective).abs() / (1.0 + sol.objective.abs());
            assert!(rel <= 1e-8, "seed {seed} case {case}: rel {rel:e}");
        }
    }
}

#[test]
fn full_capacity_electrolyzer_has_unit_capacity_factor() {
    // One electrolyzer, fixed capacity, fixed hydrogen target equal to its
    // full output: capacity factor 1.
    let (dims, params) = Builder::<f64>::new(&["A"], 1, 1, 1)
        .season("all", 4, 8760.0)
        .tech(POWER, TechClass::Production, "gen", TechKind::Dispatchable, false, &["A"])
        .tech("H2", TechClass::Production, "pem", TechKind::Electrolyzer, false, &["A"])
        .op_cost("gen", &[1.0])
        .op_cost("pem", &[0.0])
        .shed_cost(POWER, 1000.0)
        .shed_cost("H2", 1000.0)
        .initial_capacity("gen", "A", &[500.0])
        .initial_capacity("pem", "A", &[2.0])
        .electrolyzer_power("pem", 50.0)
        // Target: 2 ton/h for all 4 modeled hours at coverage 1 -> 8 tons.
        .fixed_hydrogen(&[8.0])
        .demand_profile("H2", "A", |_, _, _| 2.0)
        .build();
    let (report, _, _) = reported(&dims, &params, "Base");
    let cf = report.capacity_factors[0].3;
    assert!((cf - 1.0).abs() < 1e-7, "capacity factor {cf}");
}

#[test]
fn diff_of_report_with_itself_is_zero() {
    let (dims, params) = random_toy::<f64>(2);
    let (report, _, _) = reported(&dims, &params, "Base");
    let d = diff_reports(&report, &report).unwrap();
    assert_eq!(d.objective_delta, 0.0);
    assert!(d.category_deltas.values().all(|v| *v == 0.0));
    assert!(d.hydrogen_deltas.iter().all(|(_, _, v)| *v == 0.0));
}

#[test]
fn base_to_ast90_diff_is_nonnegative_and_consistent() {
    let (dims, params) = random_toy::<f64>(7);
    let (base, _, _) = reported(&dims, &params, "Base");
    let (ast90, _, _) = reported(&dims, &params, "AST90");
    let d = diff_reports(&base, &ast90).unwrap();
    assert!(
        d.objective_delta >= -1e-6 * (1.0 + base.objective.abs()),
        "objective delta {}",
        d.objective_delta
    );
    // Deltas of categories sum to the objective delta.
    let sum: f64 = d.category_deltas.values().sum();
    assert!((sum - d.objective_delta).abs() / (1.0 + d.objective_delta.abs()) <= 1e-8);
}

#[test]
fn mismatched_instances_refuse_to_diff() {
    let (d1, p1) = random_toy::<f64>(1);
    let (d2, p2) = repurposing_toy::<f64>();
    let (a, _, _) = reported(&d1, &p1, "Base");
    let (b, _, _) = reported(&d2, &p2, "Base");
    assert!(matches!(
        diff_reports(&a, &b),
        Err(ReportError::DimensionMismatch(_))
    ));
}

#[test]
fn report_round_trips_through_text() {
    let (dims, params) = repurposing_toy::<f64>();
    let (report, _, _) = reported(&dims, &params, "AST90");
    let text = render_report(&report);
    let back: hydra_core::SolutionReport = parse_report(&text).unwrap();
    assert_eq!(report, back);
    // Rendering is deterministic byte for byte.
    assert_eq!(text, render_report(&back));
}

#[test]
fn report_requires_optimal_solution() {
    let (dims, params) = random_toy::<f64>(3);
    let model = assemble(&dims, &params, &CaseConfig::preset("Base").unwrap()).unwrap();
    let sol = hydra_core::Solution::infeasible(0);
    assert!(matches!(
        build_report(&sol, &model, &params, &dims),
        Err(ReportError::NotOptimal)
    ));
}

#[test]
fn generation_balances_demand_sinks_and_shed() {
    let (dims, params) = random_toy::<f64>(4);
    for case in ["Base", "AST90"] {
        let model = assemble(&dims, &params, &CaseConfig::preset(case).unwrap()).unwrap();
        let sol = lp::solve(&model.lp).unwrap();
        let gap = balance_identity_gap(&model, &params, &dims, &sol.primal);
        assert!(gap <= 1e-6, "case {case}: balance identity gap {gap:e}");
    }
}

#[test]
fn ast90_objective_never_falls_on_random_instances() {
    for seed in [0u64, 7, 13] {
        let (dims, params) = random_toy::<f64>(seed);
        let (base, _, _) = reported(&dims, &params, "Base");
        let (ast90, _, _) = reported(&dims, &params, "AST90");
        assert!(
            ast90.objective >= base.objective - 1e-6 * (1.0 + base.objective.abs()),
            "seed {seed}: objective decreased"
        );
    }
}

#[test]
fn ast90_builds_strictly_more_vres_on_designed_instance() {
    // In Base the ESP electrolyzers import fossil power; AST90 forces new
    // local wind in the first period, raising costs and dropping the
    // fleet-wide capacity factor.
    let (dims, params) = hydra_core::synthetic::directional_toy::<f64>();
    let (base, bsol, bmodel) = reported(&dims, &params, "Base");
    let (ast90, asol, amodel) = reported(&dims, &params, "AST90");
    assert!(
        ast90.objective > base.objective + 1e-6 * (1.0 + base.objective.abs()),
        "objective must rise: {} vs {}",
        base.objective,
        ast90.objective
    );
    let vres_built = |model: &hydra_core::AssembledModel, sol: &hydra_core::Solution| -> f64 {
        model
            .catalog
            .built_prod
            .iter()
            .filter(|((tech, _), _)| tech == "wind")
            .map(|(_, xs)| sol.primal[xs[0].0])
            .sum()
    };
    let b = vres_built(&bmodel, &bsol);
    let a = vres_built(&amodel, &asol);
    assert!(a > b + 1e-6 * (1.0 + b), "VRES build {b} -> {a} not strictly more");
    let (cb, ca) = (weighted_cf(&base), weighted_cf(&ast90));
    assert!(ca < cb + 1e-9, "capacity factor {cb} -> {ca}");
}

/// Production-weighted expected electrolyzer capacity factor.
fn weighted_cf(r: &hydra_core::SolutionReport) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (_tech, node, i, v) in &r.capacity_factors {
        let prod = r
            .hydrogen
            .iter()
            .find(|(n, p, _)| n == node && p == i)
            .map(|(_, _, v)| *v)
            .unwrap_or(0.0);
        num += v * prod;
        den += prod;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[test]
fn capacity_factor_falls_under_green_rules_on_designed_instance() {
    // On the instance built to discriminate (demand center away from the
    // exempt node, hourly-matched electrolysis elsewhere), the expected
    // capacity factor drops from Base to AST90.
    let (dims, params) = hydra_core::synthetic::exemption_value_toy::<f64>();
    let (base, _, _) = reported(&dims, &params, "Base");
    let (ast90, _, _) = reported(&dims, &params, "AST90");
    assert!(
        ast90.objective >= base.objective - 1e-6 * (1.0 + base.objective.abs()),
        "objective must not fall"
    );
    let (cb, ca) = (weighted_cf(&base), weighted_cf(&ast90));
    assert!(
        ca <= cb + 1e-9,
        "capacity factor rose from {cb} to {ca} under AST90"
    );
}
