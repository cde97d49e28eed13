//! Post-solve audits: every audited quantity is re-derived from dimensions,
//! parameters, and the variable catalog — not from the emitted LP rows — so
//! a bug in an emitter shows up as an audit violation rather than being
//! certified by itself.

use super::{AssembledModel, EXEMPTION_SHARE};
use crate::dimensions::{ModelDimensions, TechKind, NG_PIPELINE};
use crate::params::ParameterStore;
use crate::scalar::{lit, Scalar};

/// Maximum violations per audited family, all in original model units.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintAudit<S> {
    /// Worst violation over every emitted row and variable bound.
    pub feasibility: S,
    /// Worst excess of electrolysis power over qualifying green power
    /// (hourly accounting; only meaningful when temporal+spatial are on).
    pub green_accounting: S,
    /// Smallest renewable share over exempt (node, period, scenario); 1 when
    /// no exempt node generates.
    pub exemption_share_min: S,
    /// Worst relative deviation from the fixed hydrogen target.
    pub fixed_h2_rel: S,
    /// Worst excess of cumulative repurposing over the initial NG grid.
    pub repurpose_cap: S,
    /// Worst deviation of a season-end storage level from half capacity.
    pub storage_boundary: S,
    /// Worst emission-cap excess.
    pub emission: S,
    /// Relative gap between the solver objective and the objective
    /// reconstructed from primal values and cost inputs.
    pub objective_rel: S,
}

impl<S: Scalar> ConstraintAudit<S> {
    pub fn worst_violation(&self) -> S {
        self.feasibility
            .max(self.green_accounting)
            .max(self.fixed_h2_rel)
            .max(self.repurpose_cap)
            .max(self.storage_boundary)
            .max(self.emission)
            .max((lit::<S>(EXEMPTION_SHARE) - self.exemption_share_min).max(S::zero()))
    }
}

pub fn run_audit<S: Scalar>(
    dims: &ModelDimensions<S>,
    params: &ParameterStore<S>,
    model: &AssembledModel<S>,
    primal: &[S],
    solver_objective: S,
) -> ConstraintAudit<S> {
    ConstraintAudit {
        feasibility: model.lp.max_violation(primal),
        green_accounting: green_accounting(dims, params, model, primal),
        exemption_share_min: exemption_share_min(dims, model, primal),
        fixed_h2_rel: fixed_h2_rel(dims, model, primal),
        repurpose_cap: repurpose_cap_excess(dims, params, model, primal),
        storage_boundary: storage_boundary(dims, model, primal),
        emission: emission_excess(dims, params, model, primal),
        objective_rel: {
            let rebuilt = reconstruct_objective(dims, params, model, primal);
            (rebuilt - solver_objective).abs() / (S::one() + solver_objective.abs())
        },
    }
}

/// Hourly green accounting: electrolysis power consumption at non-exempt
/// nodes must fit inside availability times the qualifying (new or total)
/// VRES capacity. Returns the worst excess.
pub fn green_accounting<S: Scalar>(
    dims: &ModelDimensions<S>,
    params: &ParameterStore<S>,
    model: &AssembledModel<S>,
    primal: &[S],
) -> S {
    let case = &model.case;
    if !(case.temporal && case.spatial) {
        return S::zero();
    }
    let cat = &model.catalog;
    let hours = dims.total_hours();
    let mut worst = S::zero();
    let vres: Vec<_> = dims
        .commodity(crate::dimensions::POWER)
        .map(|c| c.producers.iter().filter(|t| t.kind.is_vres()).collect::<Vec<_>>())
        .unwrap_or_default();
    let electrolyzers = dims.electrolyzers();
    for n in 0..dims.nodes.len() {
        for i in 0..dims.periods {
            if case.exemption90 && dims.is_exempt(crate::dimensions::NodeId(n), i) {
                continue;
            }
            for w in 0..dims.n_scenarios() {
                for h in 0..hours {
                    let mut used = S::zero();
                    for e in &electrolyzers {
                        if !e.nodes.iter().any(|x| x.0 == n) {
                            continue;
                        }
                        let eta = params.electrolyzer_power[&e.name];
                        let g = &cat.source[&(e.name.clone(), n)];
                        used = used + eta * primal[g.at(i, w, h).0];
                    }
                    if used == S::zero() {
                        continue;
                    }
                    let mut cap = S::zero();
                    for g in &vres {
                        if !g.nodes.iter().any(|x| x.0 == n) {
                            continue;
                        }
                        let alpha = if g.kind == TechKind::Vres {
                            params
                                .availability
                                .get(&g.name)
                                .map(|t| t.get(n, i, w, h))
                                .unwrap_or(S::one())
                        } else {
                            S::one()
                        };
                        if case.additionality {
                            if let Some(xs) = cat.built_prod.get(&(g.name.clone(), n)) {
                                let life =
                                    params.lifetime.get(&g.name).copied().unwrap_or(usize::MAX);
                                for j in i.saturating_sub(life)..=i {
                                    cap = cap + alpha * primal[xs[j].0];
                                }
                            }
                        } else if let Some(vs) = cat.avail_prod.get(&(g.name.clone(), n)) {
                            cap = cap + alpha * primal[vs[i].0];
                        }
                    }
                    worst = worst.max(used - cap);
                }
            }
        }
    }
    worst
}

/// Smallest renewable generation share across exempt (node, period,
/// scenario) tuples, 1.0 when nothing generates.
pub fn exemption_share_min<S: Scalar>(
    dims: &ModelDimensions<S>,
    model: &AssembledModel<S>,
    primal: &[S],
) -> S {
    if !model.case.exemption90 {
        return S::one();
    }
    let cat = &model.catalog;
    let hours = dims.total_hours();
    let mut min_share = S::one();
    for &(n, i) in &dims.exempt {
        for w in 0..dims.n_scenarios() {
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
            if total > S::zero() {
                min_share = min_share.min(green / total);
            }
        }
    }
    min_share
}

/// Worst relative deviation of total electrolysis output from the target.
pub fn fixed_h2_rel<S: Scalar>(
    dims: &ModelDimensions<S>,
    model: &AssembledModel<S>,
    primal: &[S],
) -> S {
    if model.h2_target.is_empty() {
        return S::zero();
    }
    let cat = &model.catalog;
    let hours = dims.total_hours();
    let mut worst = S::zero();
    for i in 0..dims.periods {
        let target = model.h2_target[i];
        for w in 0..dims.n_scenarios() {
            let mut sum = S::zero();
            for e in dims.electrolyzers() {
                for node in &e.nodes {
                    let grid = &cat.source[&(e.name.clone(), node.0)];
                    for h in 0..hours {
                        sum = sum + primal[grid.at(i, w, h).0];
                    }
                }
            }
            worst = worst.max((sum - target).abs() / (S::one() + target.abs()));
        }
    }
    worst
}

/// Worst excess of total repurposed capacity over the initial NG pipeline
/// capacity of the pair.
pub fn repurpose_cap_excess<S: Scalar>(
    dims: &ModelDimensions<S>,
    params: &ParameterStore<S>,
    model: &AssembledModel<S>,
    primal: &[S],
) -> S {
    let _ = dims;
    let mut worst = S::zero();
    for (pair, xs) in &model.catalog.repurpose {
        let x0 = params
            .initial_transmission
            .get(NG_PIPELINE)
            .and_then(|m| m.get(pair))
            .map(|v| v[0])
            .unwrap_or(S::zero());
        let total: S = xs.iter().map(|x| primal[x.0]).sum();
        worst = worst.max(total - x0);
    }
    worst
}

/// Worst |season-end level - half capacity| over all storages.
pub fn storage_boundary<S: Scalar>(
    dims: &ModelDimensions<S>,
    model: &AssembledModel<S>,
    primal: &[S],
) -> S {
    let cat = &model.catalog;
    let offsets = dims.season_offsets();
    let half = lit::<S>(0.5);
    let mut worst = S::zero();
    for ((tech, n), lv) in &cat.level {
        let vs = &cat.avail_stor[&(tech.clone(), *n)];
        for i in 0..dims.periods {
            for w in 0..dims.n_scenarios() {
                for (s, season) in dims.seasons.iter().enumerate() {
                    let last = offsets[s] + season.hours - 1;
                    let level = primal[lv.at(i, w, last).0];
                    let v = primal[vs[i].0];
                    worst = worst.max((level - half * v).abs());
                }
            }
        }
    }
    worst
}

/// Worst excess of annualized emissions over the period cap.
pub fn emission_excess<S: Scalar>(
    dims: &ModelDimensions<S>,
    params: &ParameterStore<S>,
    model: &AssembledModel<S>,
    primal: &[S],
) -> S {
    let Some(cap) = &params.emission_cap else {
        return S::zero();
    };
    let cat = &model.catalog;
    let hours = dims.total_hours();
    let scales = &params.season_scale;
    let mut worst = S::zero();
    for i in 0..dims.periods {
        for w in 0..dims.n_scenarios() {
            let mut total = S::zero();
            for ((tech, _n), grid) in &cat.source {
                let eta = params
                    .emission_intensity
                    .get(tech)
                    .copied()
                    .unwrap_or(S::zero());
                if eta == S::zero() {
                    continue;
                }
                for h in 0..hours {
                    total = total + scales[dims.season_of_hour(h)] * eta * primal[grid.at(i, w, h).0];
                }
            }
            worst = worst.max(total - cap[i]);
        }
    }
    worst
}

/// Rebuilds the objective from primal values and the cost inputs
/// (discounting, weights, probabilities, season scales applied afresh).
pub fn reconstruct_objective<S: Scalar>(
    dims: &ModelDimensions<S>,
    params: &ParameterStore<S>,
    model: &AssembledModel<S>,
    primal: &[S],
) -> S {
    let cat = &model.catalog;
    let years = dims.period_length_years;
    let weight = params.weight(years);
    let hours = dims.total_hours();
    let mut total = S::zero();

    for ((tech, _), xs) in cat.built_prod.iter().chain(&cat.built_stor) {
        for (i, x) in xs.iter().enumerate() {
            total = total + params.discount(i, years) * params.invest_cost[tech][i] * primal[x.0];
        }
    }
    for ((ttype, _), xs) in &cat.built_trans {
        for (i, x) in xs.iter().enumerate() {
            total = total + params.discount(i, years) * params.invest_cost[ttype][i] * primal[x.0];
        }
    }
    for (_, xs) in &cat.repurpose {
        for (i, x) in xs.iter().enumerate() {
            let c_h2 = params
                .invest_cost
                .get(crate::dimensions::H2_PIPELINE)
                .map(|v| v[i])
                .unwrap_or(S::zero());
            total = total
                + params.repurpose_cost_factor
                    * params.repurpose_flow_factor
                    * c_h2
                    * params.discount(i, years)
                    * primal[x.0];
        }
    }
    for ((tech, _), grid) in &cat.source {
        let costs = &params.op_cost[tech];
        for i in 0..dims.periods {
            let base = params.discount(i, years) * weight * costs[i];
            if base == S::zero() {
                continue;
            }
            for w in 0..dims.n_scenarios() {
                for h in 0..hours {
                    total = total
                        + base
                            * dims.probabilities[w]
                            * params.season_scale[dims.season_of_hour(h)]
                            * primal[grid.at(i, w, h).0];
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
            for w in 0..dims.n_scenarios() {
                for h in 0..hours {
                    total = total
                        + base
                            * dims.probabilities[w]
                            * params.season_scale[dims.season_of_hour(h)]
                            * primal[grid.at(i, w, h).0];
                }
            }
        }
    }
    total
}
