//! Solution reporting: cost breakdowns by category, probability-weighted
//! generation and hydrogen maps, electrolyzer capacity factors, exemption
//! audits, case-vs-case diffs, and the on-disk report format.
//!
//! # Cost category mapping
//!
//! Every objective term lands in exactly one category, so the category sum
//! reproduces the objective:
//!
//! | category                 | objective terms                                      |
//! |--------------------------|------------------------------------------------------|
//! | generator_capex          | investment in power production technologies          |
//! | generator_opex           | operational cost of power production                 |
//! | electrolyzer_capex       | investment and operational cost of electrolyzers     |
//! | storage_capex            | investment in storage of every commodity             |
//! | power_transmission_capex | investment in power transmission                     |
//! | h2_pipeline_capex        | investment in hydrogen pipelines plus repurposing    |
//! | ng_related               | every remaining production/transmission cost         |
//! | load_shed                | value-of-lost-load terms of every commodity          |

use crate::dimensions::{ModelDimensions, H2_PIPELINE, HYDROGEN, POWER};
use crate::lp::{Solution, SolveStatus};
use crate::model::AssembledModel;
use crate::params::ParameterStore;
use crate::scalar::Scalar;
use std::collections::BTreeMap;

pub const CATEGORIES: [&str; 8] = [
    "generator_capex",
    "generator_opex",
    "electrolyzer_capex",
    "storage_capex",
    "power_transmission_capex",
    "h2_pipeline_capex",
    "ng_related",
    "load_shed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport<S> {
    pub case: String,
    pub objective: S,
    /// Category -> discounted EUR, summing to the objective.
    pub categories: BTreeMap<String, S>,
    /// (technology, node, 1-based period) -> expected annualized production.
    pub generation: Vec<(String, String, usize, S)>,
    /// (node, 1-based period) -> expected annual hydrogen output, tons.
    pub hydrogen: Vec<(String, usize, S)>,
    /// (technology, node, period) -> expected electrolyzer capacity factor.
    pub capacity_factors: Vec<(String, String, usize, S)>,
    /// (node, period, scenario) -> renewable share at exempt nodes.
    pub exemption_shares: Vec<(String, usize, usize, S)>,
    /// (class, technology, location, period) -> (built, available).
    pub capacities: Vec<(String, String, String, usize, S, S)>,
    /// Fixed hydrogen target per period after de-annualization, tons.
    pub h2_target: Vec<S>,
    /// Fraction of a year the modeled hours stand for.
    pub deannualization: S,
    /// Dimension fingerprint; diffs require equal fingerprints.
    pub fingerprint: String,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReportError {
    #[error("NOT_OPTIMAL: report requires an optimal solution")]
    NotOptimal,
    #[error("DIMENSION_MISMATCH: {0}")]
    DimensionMismatch(String),
    #[error("PARSE_ERROR at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub fn fingerprint<S: Scalar>(dims: &ModelDimensions<S>, h2_target: &[S]) -> String {
    let mut s = String::new();
    s.push_str(&dims.nodes.join("+"));
    s.push_str(&format!(
        "|i{}|L{}|w{}|h",
        dims.periods,
        dims.period_length_years,
        dims.n_scenarios()
    ));
    for season in &dims.seasons {
        s.push_str(&format!("{}:", season.hours));
    }
    for t in h2_target {
        s.push_str(&format!("{:.6e},", t));
    }
    s
}

/// Builds the full report from an optimal solution. Pure and deterministic:
/// the same inputs produce an identical report.
pub fn build_report<S: Scalar>(
    solution: &Solution<S>,
    model: &AssembledModel<S>,
    params: &ParameterStore<S>,
    dims: &ModelDimensions<S>,
) -> Result<SolutionReport<S>, ReportError> {
    if solution.status != SolveStatus::Optimal {
        return Err(ReportError::NotOptimal);
    }
    let primal = &solution.primal;
    let cat = &model.catalog;
    let years = dims.period_length_years;
    let weight = params.weight(years);
    let hours = dims.total_hours();
    let n_scen = dims.n_scenarios();

    let mut categories: BTreeMap<String, S> =
        CATEGORIES.iter().map(|c| (c.to_string(), S::zero())).collect();
    let add = |categories: &mut BTreeMap<String, S>, key: &str, v: S| {
        *categories.get_mut(key).expect("known category") = categories[key] + v;
    };

    // Technology classification for bucketing.
    let power_prod: Vec<String> = dims
        .commodity(POWER)
        .map(|c| c.producers.iter().map(|t| t.name.clone()).collect())
        .unwrap_or_default();
    let electrolyzers: Vec<String> = dims.electrolyzers().iter().map(|t| t.name.clone()).collect();
    let power_trans: Vec<String> = dims
        .commodity(POWER)
        .map(|c| c.transmissions.iter().map(|t| t.name.clone()).collect())
        .unwrap_or_default();
    let h2_trans: Vec<String> = dims
        .commodity(HYDROGEN)
        .map(|c| c.transmissions.iter().map(|t| t.name.clone()).collect())
        .unwrap_or_default();

    // Investment terms.
    for ((tech, _n), xs) in &cat.built_prod {
        let bucket = if electrolyzers.contains(tech) {
            "electrolyzer_capex"
        } else if power_prod.contains(tech) {
            "generator_capex"
        } else {
            "ng_related"
        };
        for (i, x) in xs.iter().enumerate() {
            let v = params.discount(i, years) * params.invest_cost[tech][i] * primal[x.0];
            add(&mut categories, bucket, v);
        }
    }
    for ((tech, _n), xs) in &cat.built_stor {
        for (i, x) in xs.iter().enumerate() {
            let v = params.discount(i, years) * params.invest_cost[tech][i] * primal[x.0];
            add(&mut categories, "storage_capex", v);
        }
    }
    for ((ttype, _pair), xs) in &cat.built_trans {
        let bucket = if power_trans.contains(ttype) {
            "power_transmission_capex"
        } else if h2_trans.contains(ttype) {
            "h2_pipeline_capex"
        } else {
            "ng_related"
        };
        for (i, x) in xs.iter().enumerate() {
            let v = params.discount(i, years) * params.invest_cost[ttype][i] * primal[x.0];
            add(&mut categories, bucket, v);
        }
    }
    for (_pair, xs) in &cat.repurpose {
        for (i, x) in xs.iter().enumerate() {
            let c_h2 = params
                .invest_cost
                .get(H2_PIPELINE)
                .map(|v| v[i])
                .unwrap_or(S::zero());
            let v = params.repurpose_cost_factor
                * params.repurpose_flow_factor
                * c_h2
                * params.discount(i, years)
                * primal[x.0];
            add(&mut categories, "h2_pipeline_capex", v);
        }
    }

    // Operational terms.
    for ((tech, _n), grid) in &cat.source {
        let bucket = if electrolyzers.contains(tech) {
            "electrolyzer_capex"
        } else if power_prod.contains(tech) {
            "generator_opex"
        } else {
            "ng_related"
        };
        let costs = &params.op_cost[tech];
        for i in 0..dims.periods {
            let base = params.discount(i, years) * weight * costs[i];
            if base == S::zero() {
                continue;
            }
            for w in 0..n_scen {
                for h in 0..hours {
                    let v = base
                        * dims.probabilities[w]
                        * params.season_scale[dims.season_of_hour(h)]
                        * primal[grid.at(i, w, h).0];
                    add(&mut categories, bucket, v);
                }
            }
        }
    }
    for ((commodity, n), grid) in &cat.shed {
        let costs = &params.shed_cost[commodity];
        for i in 0..dims.periods {
            let base = params.discount(i, years) * weight * costs[*n][i];
            if base == S::zero() {
                continue;
            }
            for w in 0..n_scen {
                for h in 0..hours {
                    let v = base
                        * dims.probabilities[w]
                        * params.season_scale[dims.season_of_hour(h)]
                        * primal[grid.at(i, w, h).0];
                    add(&mut categories, "load_shed", v);
                }
            }
        }
    }

    // Expected annualized production per (tech, node, period).
    let mut generation = Vec::new();
    for ((tech, n), grid) in &cat.source {
        for i in 0..dims.periods {
            let mut acc = S::zero();
            for w in 0..n_scen {
                for h in 0..hours {
                    acc = acc
                        + dims.probabilities[w]
                            * params.season_scale[dims.season_of_hour(h)]
                            * primal[grid.at(i, w, h).0];
                }
            }
            generation.push((tech.clone(), dims.nodes[*n].clone(), i + 1, acc));
        }
    }

    // Hydrogen production per node and period.
    let mut hydrogen = Vec::new();
    for n in 0..dims.nodes.len() {
        for i in 0..dims.periods {
            let mut acc = S::zero();
            for e in dims.electrolyzers() {
                if !e.nodes.iter().any(|x| x.0 == n) {
                    continue;
                }
                let grid = &cat.source[&(e.name.clone(), n)];
                for w in 0..n_scen {
                    for h in 0..hours {
                        acc = acc
                            + dims.probabilities[w]
                                * params.season_scale[dims.season_of_hour(h)]
                                * primal[grid.at(i, w, h).0];
                    }
                }
            }
            hydrogen.push((dims.nodes[n].clone(), i + 1, acc));
        }
    }

    // Electrolyzer capacity factors: annualized expected production over
    // capacity times represented hours.
    let repr_hours: S = dims
        .seasons
        .iter()
        .map(|s| S::from_f64_lit(s.represented_hours))
        .sum();
    let mut capacity_factors = Vec::new();
    for e in dims.electrolyzers() {
        for node in &e.nodes {
            let n = node.0;
            let grid = &cat.source[&(e.name.clone(), n)];
            let vs = &cat.avail_prod[&(e.name.clone(), n)];
            for i in 0..dims.periods {
                let cap = primal[vs[i].0];
                let mut prod = S::zero();
                for w in 0..n_scen {
                    for h in 0..hours {
                        prod = prod
                            + dims.probabilities[w]
                                * params.season_scale[dims.season_of_hour(h)]
                                * primal[grid.at(i, w, h).0];
                    }
                }
                let cf = if cap > S::zero() {
                    prod / (cap * repr_hours)
                } else {
                    S::zero()
                };
                capacity_factors.push((e.name.clone(), dims.nodes[n].clone(), i + 1, cf));
            }
        }
    }

    // Renewable share at exempt nodes, per scenario.
    let mut exemption_shares = Vec::new();
    for &(n, i) in &dims.exempt {
        for w in 0..n_scen {
            let mut total = S::zero();
            let mut green = S::zero();
            for g in dims.generators() {
                if !g.nodes.iter().any(|x| x.0 == n) {
                    continue;
                }
                let grid = &cat.source[&(g.name.clone(), n)];
                let mut sum = S::zero();
                for h in 0..hours {
                    sum = sum + primal[grid.at(i, w, h).0];
                }
                total = total + sum;
                if g.kind.is_vres() {
                    green = green + sum;
                }
            }
            let share = if total > S::zero() {
                green / total
            } else {
                S::one()
            };
            exemption_shares.push((dims.nodes[n].clone(), i + 1, w + 1, share));
        }
    }

    // First-stage capacities.
    let mut capacities = Vec::new();
    for ((tech, n), vs) in &cat.avail_prod {
        let xs = cat.built_prod.get(&(tech.clone(), *n));
        for i in 0..dims.periods {
            let built = xs.map(|x| primal[x[i].0]).unwrap_or(S::zero());
            capacities.push((
                "production".to_string(),
                tech.clone(),
                dims.nodes[*n].clone(),
                i + 1,
                built,
                primal[vs[i].0],
            ));
        }
    }
    for ((tech, n), vs) in &cat.avail_stor {
        let xs = cat.built_stor.get(&(tech.clone(), *n));
        for i in 0..dims.periods {
            let built = xs.map(|x| primal[x[i].0]).unwrap_or(S::zero());
            capacities.push((
                "storage".to_string(),
                tech.clone(),
                dims.nodes[*n].clone(),
                i + 1,
                built,
                primal[vs[i].0],
            ));
        }
    }
    for ((ttype, pair), vs) in &cat.avail_trans {
        let xs = cat.built_trans.get(&(ttype.clone(), *pair));
        let loc = format!("{}-{}", dims.nodes[pair.0], dims.nodes[pair.1]);
        for i in 0..dims.periods {
            let built = xs.map(|x| primal[x[i].0]).unwrap_or(S::zero());
            capacities.push((
                "transmission".to_string(),
                ttype.clone(),
                loc.clone(),
                i + 1,
                built,
                primal[vs[i].0],
            ));
        }
    }
    for (pair, xs) in &cat.repurpose {
        let loc = format!("{}-{}", dims.nodes[pair.0], dims.nodes[pair.1]);
        for i in 0..dims.periods {
            capacities.push((
                "repurposed".to_string(),
                "NGPipeline".to_string(),
                loc.clone(),
                i + 1,
                primal[xs[i].0],
                S::zero(),
            ));
        }
    }

    Ok(SolutionReport {
        case: model.case.name.clone(),
        objective: solution.objective,
        categories,
        generation,
        hydrogen,
        capacity_factors,
        exemption_shares,
        capacities,
        h2_target: model.h2_target.clone(),
        deannualization: dims.year_coverage(),
        fingerprint: fingerprint(dims, &model.h2_target),
    })
}

impl<S: Scalar> SolutionReport<S> {
    pub fn category_sum(&self) -> S {
        self.categories.values().copied().sum()
    }
}

/// Per-category and per-node deltas, `b - a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportDiff<S> {
    pub case_a: String,
    pub case_b: String,
    pub objective_delta: S,
    pub category_deltas: BTreeMap<String, S>,
    /// (node, period) -> hydrogen production delta.
    pub hydrogen_deltas: Vec<(String, usize, S)>,
}

pub fn diff_reports<S: Scalar>(
    a: &SolutionReport<S>,
    b: &SolutionReport<S>,
) -> Result<ReportDiff<S>, ReportError> {
    if a.fingerprint != b.fingerprint {
        return Err(ReportError::DimensionMismatch(format!(
            "reports were built on different instances: {:?} vs {:?}",
            a.fingerprint, b.fingerprint
        )));
    }
    let mut category_deltas = BTreeMap::new();
    for key in CATEGORIES {
        let av = a.categories.get(key).copied().unwrap_or(S::zero());
        let bv = b.categories.get(key).copied().unwrap_or(S::zero());
        category_deltas.insert(key.to_string(), bv - av);
    }
    let mut hydrogen_deltas = Vec::new();
    for (node, period, av) in &a.hydrogen {
        let bv = b
            .hydrogen
            .iter()
            .find(|(n, i, _)| n == node && i == period)
            .map(|(_, _, v)| *v)
            .unwrap_or(S::zero());
        hydrogen_deltas.push((node.clone(), *period, bv - *av));
    }
    Ok(ReportDiff {
        case_a: a.case.clone(),
        case_b: b.case.clone(),
        objective_delta: b.objective - a.objective,
        category_deltas,
        hydrogen_deltas,
    })
}

// ---------------------------------------------------------------------------
// Text serialization (report_<case>.txt)
// ---------------------------------------------------------------------------

fn fmt<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v)
}

pub fn render_report<S: Scalar>(r: &SolutionReport<S>) -> String {
    let mut out = String::new();
    out.push_str("hydra-report v1\n");
    out.push_str(&format!("case {}\n", r.case));
    out.push_str(&format!("fingerprint {}\n", r.fingerprint));
    out.push_str(&format!("objective {}\n", fmt(r.objective)));
    out.push_str(&format!("deannualization {}\n", fmt(r.deannualization)));
    out.push_str("h2_target");
    for t in &r.h2_target {
        out.push_str(&format!(" {}", fmt(*t)));
    }
    out.push('\n');
    out.push_str("[categories]\n");
    for key in CATEGORIES {
        out.push_str(&format!("{key} {}\n", fmt(r.categories[key])));
    }
    out.push_str("[generation]\n");
    for (tech, node, i, v) in &r.generation {
        out.push_str(&format!("{tech} {node} {i} {}\n", fmt(*v)));
    }
    out.push_str("[hydrogen]\n");
    for (node, i, v) in &r.hydrogen {
        out.push_str(&format!("{node} {i} {}\n", fmt(*v)));
    }
    out.push_str("[capacity_factors]\n");
    for (tech, node, i, v) in &r.capacity_factors {
        out.push_str(&format!("{tech} {node} {i} {}\n", fmt(*v)));
    }
    out.push_str("[exemption_shares]\n");
    for (node, i, w, v) in &r.exemption_shares {
        out.push_str(&format!("{node} {i} {w} {}\n", fmt(*v)));
    }
    out.push_str("[capacities]\n");
    for (class, tech, loc, i, built, avail) in &r.capacities {
        out.push_str(&format!(
            "{class} {tech} {loc} {i} {} {}\n",
            fmt(*built),
            fmt(*avail)
        ));
    }
    out
}

pub fn parse_report<S: Scalar>(text: &str) -> Result<SolutionReport<S>, ReportError> {
    let mut lines = text.lines().enumerate().peekable();
    let perr = |line: usize, msg: &str| ReportError::Parse {
        line: line + 1,
        msg: msg.to_string(),
    };
    let num = |tok: &str, line: usize| -> Result<S, ReportError> {
        tok.parse::<f64>()
            .ok()
            .and_then(S::from_f64)
            .ok_or_else(|| perr(line, "bad number"))
    };

    match lines.next() {
        Some((_, l)) if l == "hydra-report v1" => {}
        other => {
            return Err(perr(
                other.map(|(i, _)| i).unwrap_or(0),
                "expected `hydra-report v1` header",
            ))
        }
    }
    let mut report = SolutionReport {
        case: String::new(),
        objective: S::zero(),
        categories: BTreeMap::new(),
        generation: Vec::new(),
        hydrogen: Vec::new(),
        capacity_factors: Vec::new(),
        exemption_shares: Vec::new(),
        capacities: Vec::new(),
        h2_target: Vec::new(),
        deannualization: S::one(),
        fingerprint: String::new(),
    };
    let mut section = String::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('[') {
            section = line.trim().trim_matches(['[', ']']).to_string();
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if section.is_empty() {
            match toks[0] {
                "case" => report.case = toks.get(1).unwrap_or(&"").to_string(),
                "fingerprint" => report.fingerprint = toks[1..].join(" "),
                "objective" => report.objective = num(toks[1], i)?,
                "deannualization" => report.deannualization = num(toks[1], i)?,
                "h2_target" => {
                    for t in &toks[1..] {
                        let v = num(t, i)?;
                        report.h2_target.push(v);
                    }
                }
                other => return Err(perr(i, &format!("unknown field {other:?}"))),
            }
            continue;
        }
        match section.as_str() {
            "categories" => {
                if toks.len() != 2 {
                    return Err(perr(i, "category line must be `name value`"));
                }
                let v = num(toks[1], i)?;
                report.categories.insert(toks[0].to_string(), v);
            }
            "generation" => {
                if toks.len() != 4 {
                    return Err(perr(i, "generation line must be `tech node period value`"));
                }
                report.generation.push((
                    toks[0].into(),
                    toks[1].into(),
                    toks[2].parse().map_err(|_| perr(i, "bad period"))?,
                    num(toks[3], i)?,
                ));
            }
            "hydrogen" => {
                if toks.len() != 3 {
                    return Err(perr(i, "hydrogen line must be `node period value`"));
                }
                report.hydrogen.push((
                    toks[0].into(),
                    toks[1].parse().map_err(|_| perr(i, "bad period"))?,
                    num(toks[2], i)?,
                ));
            }
            "capacity_factors" => {
                report.capacity_factors.push((
                    toks[0].into(),
                    toks[1].into(),
                    toks[2].parse().map_err(|_| perr(i, "bad period"))?,
                    num(toks[3], i)?,
                ));
            }
            "exemption_shares" => {
                report.exemption_shares.push((
                    toks[0].into(),
                    toks[1].parse().map_err(|_| perr(i, "bad period"))?,
                    toks[2].parse().map_err(|_| perr(i, "bad scenario"))?,
                    num(toks[3], i)?,
                ));
            }
            "capacities" => {
                report.capacities.push((
                    toks[0].into(),
                    toks[1].into(),
                    toks[2].into(),
                    toks[3].parse().map_err(|_| perr(i, "bad period"))?,
                    num(toks[4], i)?,
                    num(toks[5], i)?,
                ));
            }
            other => return Err(perr(i, &format!("unknown section {other:?}"))),
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// CSV rendering
// ---------------------------------------------------------------------------

pub fn costs_csv<S: Scalar>(r: &SolutionReport<S>) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["category", "value", "unit"];
    let rows = CATEGORIES
        .iter()
        .map(|c| vec![c.to_string(), fmt(r.categories[*c]), "EUR".to_string()])
        .collect();
    (header, rows)
}

pub fn generation_csv<S: Scalar>(
    r: &SolutionReport<S>,
    dims: &ModelDimensions<S>,
) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["technology", "node", "period", "value", "unit"];
    let unit_of = |tech: &str| -> &'static str {
        for c in &dims.commodities {
            if c.producers.iter().any(|t| t.name == tech) {
                return if c.name == POWER { "MWh_per_yr" } else { "ton_per_yr" };
            }
        }
        "unit_per_yr"
    };
    let rows = r
        .generation
        .iter()
        .map(|(tech, node, i, v)| {
            vec![
                tech.clone(),
                node.clone(),
                i.to_string(),
                fmt(*v),
                unit_of(tech).to_string(),
            ]
        })
        .collect();
    (header, rows)
}

pub fn hydrogen_csv<S: Scalar>(r: &SolutionReport<S>) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["node", "period", "value", "unit"];
    let rows = r
        .hydrogen
        .iter()
        .map(|(node, i, v)| vec![node.clone(), i.to_string(), fmt(*v), "ton_per_yr".to_string()])
        .collect();
    (header, rows)
}

pub fn capacities_csv<S: Scalar>(r: &SolutionReport<S>) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["class", "technology", "location", "period", "built", "available"];
    let rows = r
        .capacities
        .iter()
        .map(|(class, tech, loc, i, built, avail)| {
            vec![
                class.clone(),
                tech.clone(),
                loc.clone(),
                i.to_string(),
                fmt(*built),
                fmt(*avail),
            ]
        })
        .collect();
    (header, rows)
}

pub fn diff_csv<S: Scalar>(d: &ReportDiff<S>) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["section", "key", "period", "delta"];
    let mut rows = vec![vec![
        "objective".to_string(),
        format!("{}->{}", d.case_a, d.case_b),
        String::new(),
        fmt(d.objective_delta),
    ]];
    for (k, v) in &d.category_deltas {
        rows.push(vec!["category".to_string(), k.clone(), String::new(), fmt(*v)]);
    }
    for (node, i, v) in &d.hydrogen_deltas {
        rows.push(vec![
            "hydrogen".to_string(),
            node.clone(),
            i.to_string(),
            fmt(*v),
        ]);
    }
    (header, rows)
}

/// Aggregate balance identity: expected annualized generation equals
/// expected demand plus endogenous sinks minus shed, per commodity. Returns
/// the worst absolute gap, scaled down by the magnitude of the terms.
pub fn balance_identity_gap<S: Scalar>(
    model: &AssembledModel<S>,
    params: &ParameterStore<S>,
    dims: &ModelDimensions<S>,
    primal: &[S],
) -> S {
    let cat = &model.catalog;
    let hours = dims.total_hours();
    let mut worst = S::zero();
    for c in &dims.commodities {
        for i in 0..dims.periods {
            let mut gen = S::zero();
            let mut demand = S::zero();
            let mut sinks = S::zero();
            let mut shed = S::zero();
            for w in 0..dims.n_scenarios() {
                let pw = dims.probabilities[w];
                for h in 0..hours {
                    let scale = params.season_scale[dims.season_of_hour(h)] * pw;
                    for t in &c.producers {
                        for node in &t.nodes {
                            let g = &cat.source[&(t.name.clone(), node.0)];
                            gen = gen + scale * primal[g.at(i, w, h).0];
                        }
                    }
                    for t in &c.sinks {
                        for node in &t.nodes {
                            let g = &cat.sink[&(c.name.clone(), t.name.clone(), node.0)];
                            sinks = sinks + scale * primal[g.at(i, w, h).0];
                        }
                    }
                    for n in 0..dims.nodes.len() {
                        demand = demand + scale * params.demand[&c.name].get(n, i, w, h);
                        let g = &cat.shed[&(c.name.clone(), n)];
                        shed = shed + scale * primal[g.at(i, w, h).0];
                    }
                }
            }
            let gap = (gen - (demand + sinks - shed)).abs();
            let magnitude = S::one() + gen.abs() + demand.abs();
            worst = worst.max(gap / magnitude);
        }
    }
    worst
}
