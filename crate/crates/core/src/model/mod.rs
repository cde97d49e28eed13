//! Deterministic-equivalent model assembly: one emitter per equation family,
//! composed into a single sparse LP with a fixed family order (objective,
//! balance, capacity, operation, storage, resource, emission, green,
//! repurposing, fixed hydrogen).

pub mod audit;

use crate::dimensions::{
    ModelDimensions, TechKind, Technology, ELECTROLYSIS_SINK, H2_PIPELINE, NG_PIPELINE, POWER,
};
use crate::lp::{LinearProgram, LpError, Sense, VarId};
use crate::params::{LimitKind, ParameterStore};
use crate::scalar::{lit, Scalar};
use std::collections::BTreeMap;

/// Which green-hydrogen rules are active. The six named combinations of the
/// case study are constructible as presets; anything else must be marked
/// custom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseConfig {
    pub name: String,
    pub additionality: bool,
    pub spatial: bool,
    pub temporal: bool,
    pub exemption90: bool,
    pub custom: bool,
}

impl CaseConfig {
    pub const PRESETS: [&'static str; 6] = ["Base", "AST90", "ST90", "AT90", "AS90", "AST"];

    pub fn preset(name: &str) -> Option<CaseConfig> {
        let (a, s, t, x) = match name {
            "Base" => (false, false, false, false),
            "AST90" => (true, true, true, true),
            "ST90" => (false, true, true, true),
            "AT90" => (true, false, true, true),
            "AS90" => (true, true, false, true),
            "AST" => (true, true, true, false),
            _ => return None,
        };
        Some(CaseConfig {
            name: name.to_string(),
            additionality: a,
            spatial: s,
            temporal: t,
            exemption90: x,
            custom: false,
        })
    }

    /// Checks that non-custom flag combinations match their preset name.
    pub fn validate(&self) -> Result<(), AssembleError> {
        if self.custom {
            return Ok(());
        }
        match CaseConfig::preset(&self.name) {
            Some(p)
                if (
                    p.additionality,
                    p.spatial,
                    p.temporal,
                    p.exemption90,
                ) == (
                    self.additionality,
                    self.spatial,
                    self.temporal,
                    self.exemption90,
                ) =>
            {
                Ok(())
            }
            _ => Err(AssembleError::CaseInconsistent(self.name.clone())),
        }
    }

    pub fn any_green(&self) -> bool {
        self.additionality || self.spatial || self.temporal || self.exemption90
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssembleError {
    #[error("CASE_INCONSISTENT: flags of {0:?} do not match a preset and custom is not set")]
    CaseInconsistent(String),
    #[error("INVALID_DATA: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Second-stage variable block over (period, scenario, hour).
#[derive(Debug, Clone)]
pub struct OpGrid {
    pub periods: usize,
    pub scenarios: usize,
    pub hours: usize,
    pub vars: Vec<VarId>,
}

impl OpGrid {
    #[inline]
    pub fn at(&self, i: usize, w: usize, h: usize) -> VarId {
        self.vars[(i * self.scenarios + w) * self.hours + h]
    }
}

/// Every decision-variable handle of the assembled program, keyed by the
/// semantic identity of the asset or flow.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    /// Built capacity x per (tech, node), one handle per period
    /// (investable assets only).
    pub built_prod: BTreeMap<(String, usize), Vec<VarId>>,
    /// Available capacity v per (tech, node) and period.
    pub avail_prod: BTreeMap<(String, usize), Vec<VarId>>,
    pub built_stor: BTreeMap<(String, usize), Vec<VarId>>,
    pub avail_stor: BTreeMap<(String, usize), Vec<VarId>>,
    /// Transmission capacity per (type, canonical pair).
    pub built_trans: BTreeMap<(String, (usize, usize)), Vec<VarId>>,
    pub avail_trans: BTreeMap<(String, (usize, usize)), Vec<VarId>>,
    /// Repurposed NG capacity per canonical pair and period.
    pub repurpose: BTreeMap<(usize, usize), Vec<VarId>>,
    /// Production y^source per (tech, node).
    pub source: BTreeMap<(String, usize), OpGrid>,
    /// Endogenous sinks per (commodity, sink, node).
    pub sink: BTreeMap<(String, String, usize), OpGrid>,
    /// Load shed per (commodity, node).
    pub shed: BTreeMap<(String, usize), OpGrid>,
    pub charge: BTreeMap<(String, usize), OpGrid>,
    pub discharge: BTreeMap<(String, usize), OpGrid>,
    pub level: BTreeMap<(String, usize), OpGrid>,
    /// Directed transmission flow per (type, from, to).
    pub flow: BTreeMap<(String, usize, usize), OpGrid>,
    /// Green-eligible power for electrolysis per (node, period): one handle
    /// per (scenario, hour). Absent in Base and for exempt (node, period).
    pub pw4h2: BTreeMap<(usize, usize), Vec<VarId>>,
}

impl Catalog {
    pub fn pw4h2_at(&self, node: usize, i: usize, w: usize, h: usize, hours: usize) -> Option<VarId> {
        self.pw4h2.get(&(node, i)).map(|v| v[w * hours + h])
    }
}

/// One per-family line of the row-count manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCount {
    pub family: &'static str,
    pub rows: usize,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AssembledModel<S: Scalar> {
    pub lp: LinearProgram<S>,
    pub catalog: Catalog,
    pub case: CaseConfig,
    pub manifest: Vec<FamilyCount>,
    /// Hydrogen production target per period over the modeled hours of one
    /// scenario (annual input scaled by the represented-year coverage).
    pub h2_target: Vec<S>,
}

/// Percent threshold of the renewable-grid exemption.
pub const EXEMPTION_SHARE: f64 = 0.9;

struct Assembler<'a, S: Scalar> {
    dims: &'a ModelDimensions<S>,
    params: &'a ParameterStore<S>,
    case: CaseConfig,
    lp: LinearProgram<S>,
    cat: Catalog,
    manifest: Vec<FamilyCount>,
    n_hours: usize,
    n_scen: usize,
    /// (node, period) pairs exempt under the active case (empty unless the
    /// exemption flag is on).
    exempt: std::collections::BTreeSet<(usize, usize)>,
}

pub fn assemble<S: Scalar>(
    dims: &ModelDimensions<S>,
    params: &ParameterStore<S>,
    case: &CaseConfig,
) -> Result<AssembledModel<S>, AssembleError> {
    case.validate()?;
    for (_, t) in dims.all_transmissions() {
        if t.name == NG_PIPELINE && t.investable {
            return Err(AssembleError::InvalidData(
                "natural-gas pipelines cannot be investable".into(),
            ));
        }
    }
    let exempt = if case.exemption90 {
        dims.exempt.clone()
    } else {
        Default::default()
    };
    let mut asm = Assembler {
        dims,
        params,
        case: case.clone(),
        lp: LinearProgram::new(&format!("HYDRA_{}", case.name)),
        cat: Catalog::default(),
        manifest: Vec::new(),
        n_hours: dims.total_hours(),
        n_scen: dims.n_scenarios(),
        exempt,
    };

    asm.create_variables()?;
    asm.emit_objective();
    asm.emit_repurpose_cost();
    asm.emit_flow_balance()?;
    asm.emit_capacity_accounting()?;
    asm.emit_operation_limits()?;
    asm.emit_storage_dynamics()?;
    asm.emit_resource_limits()?;
    asm.emit_emission_cap()?;
    asm.emit_green_hydrogen()?;
    asm.emit_pipeline_repurposing()?;
    asm.emit_fixed_hydrogen()?;

    let coverage = dims.year_coverage();
    let h2_target = params
        .fixed_hydrogen
        .as_ref()
        .map(|h| h.iter().map(|&v| v * coverage).collect())
        .unwrap_or_default();

    Ok(AssembledModel {
        lp: asm.lp,
        catalog: asm.cat,
        case: asm.case,
        manifest: asm.manifest,
        h2_target,
    })
}

impl<'a, S: Scalar> Assembler<'a, S> {
    fn family(&mut self, family: &'static str, rows: usize) {
        self.manifest.push(FamilyCount {
            family,
            rows,
            skipped: None,
        });
    }

    fn skipped(&mut self, family: &'static str, why: impl Into<String>) {
        self.manifest.push(FamilyCount {
            family,
            rows: 0,
            skipped: Some(why.into()),
        });
    }

    fn grid(&mut self, prefix: &str) -> Result<OpGrid, LpError> {
        let mut vars = Vec::with_capacity(self.dims.periods * self.n_scen * self.n_hours);
        for i in 0..self.dims.periods {
            for w in 0..self.n_scen {
                for h in 0..self.n_hours {
                    vars.push(self.lp.add_nonneg(
                        &format!("{prefix}.i{}.w{}.h{h}", i + 1, w + 1),
                        S::zero(),
                    )?);
                }
            }
        }
        Ok(OpGrid {
            periods: self.dims.periods,
            scenarios: self.n_scen,
            hours: self.n_hours,
            vars,
        })
    }

    /// Lifetime window of 0-based period `i`: the periods whose investments
    /// are still alive, max(1, i - life) ..= i in 1-based terms.
    fn window(&self, tech: &str, i: usize) -> std::ops::RangeInclusive<usize> {
        let life = self.params.lifetime.get(tech).copied().unwrap_or(usize::MAX);
        i.saturating_sub(life)..=i
    }

    fn availability(&self, tech: &Technology, n: usize, i: usize, w: usize, h: usize) -> S {
        if tech.kind == TechKind::Vres {
            self.params
                .availability
                .get(&tech.name)
                .map(|t| t.get(n, i, w, h))
                .unwrap_or(S::one())
        } else {
            S::one()
        }
    }

    fn initial_cap(&self, tech: &str, n: usize, i: usize) -> S {
        self.params
            .initial_capacity
            .get(tech)
            .map(|g| g[n][i])
            .unwrap_or(S::zero())
    }

    fn initial_trans(&self, ttype: &str, pair: (usize, usize), i: usize) -> S {
        self.params
            .initial_transmission
            .get(ttype)
            .and_then(|m| m.get(&pair))
            .map(|v| v[i])
            .unwrap_or(S::zero())
    }

    /// Canonical NG/H2 pipeline pair sets; repurposing runs on the overlap.
    fn pipeline_pairs(&self) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
        let collect = |name: &str| -> Vec<(usize, usize)> {
            self.dims
                .all_transmissions()
                .filter(|(_, t)| t.name == name)
                .flat_map(|(_, t)| t.pairs().into_iter().map(|(a, b)| (a.0, b.0)))
                .collect()
        };
        (collect(NG_PIPELINE), collect(H2_PIPELINE))
    }

    fn repurpose_pairs(&self) -> Vec<(usize, usize)> {
        let (ng, h2) = self.pipeline_pairs();
        ng.into_iter().filter(|p| h2.contains(p)).collect()
    }

    // -----------------------------------------------------------------
    // Variable creation (fixed order; handles are dense and deterministic)
    // -----------------------------------------------------------------
    fn create_variables(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let node_name = |n: usize| dims.nodes[n].clone();

        // First stage: built and available capacities.
        for c in &dims.commodities {
            for t in &c.producers {
                for &nid in &t.nodes {
                    let n = nid.0;
                    if t.investable {
                        let mut xs = Vec::new();
                        for i in 0..dims.periods {
                            xs.push(self.lp.add_nonneg(
                                &format!("xp.{}.{}.i{}", t.name, node_name(n), i + 1),
                                S::zero(),
                            )?);
                        }
                        self.cat.built_prod.insert((t.name.clone(), n), xs);
                    }
                    let mut vs = Vec::new();
                    for i in 0..dims.periods {
                        vs.push(self.lp.add_nonneg(
                            &format!("vp.{}.{}.i{}", t.name, node_name(n), i + 1),
                            S::zero(),
                        )?);
                    }
                    self.cat.avail_prod.insert((t.name.clone(), n), vs);
                }
            }
            for t in &c.storages {
                for &nid in &t.nodes {
                    let n = nid.0;
                    if t.investable {
                        let mut xs = Vec::new();
                        for i in 0..dims.periods {
                            xs.push(self.lp.add_nonneg(
                                &format!("xb.{}.{}.i{}", t.name, node_name(n), i + 1),
                                S::zero(),
                            )?);
                        }
                        self.cat.built_stor.insert((t.name.clone(), n), xs);
                    }
                    let mut vs = Vec::new();
                    for i in 0..dims.periods {
                        vs.push(self.lp.add_nonneg(
                            &format!("vb.{}.{}.i{}", t.name, node_name(n), i + 1),
                            S::zero(),
                        )?);
                    }
                    self.cat.avail_stor.insert((t.name.clone(), n), vs);
                }
            }
            for t in &c.transmissions {
                for (a, b) in t.pairs() {
                    let pair = (a.0, b.0);
                    if t.investable {
                        let mut xs = Vec::new();
                        for i in 0..dims.periods {
                            xs.push(self.lp.add_nonneg(
                                &format!(
                                    "xt.{}.{}.{}.i{}",
                                    t.name,
                                    node_name(pair.0),
                                    node_name(pair.1),
                                    i + 1
                                ),
                                S::zero(),
                            )?);
                        }
                        self.cat.built_trans.insert((t.name.clone(), pair), xs);
                    }
                    let mut vs = Vec::new();
                    for i in 0..dims.periods {
                        vs.push(self.lp.add_nonneg(
                            &format!(
                                "vt.{}.{}.{}.i{}",
                                t.name,
                                node_name(pair.0),
                                node_name(pair.1),
                                i + 1
                            ),
                            S::zero(),
                        )?);
                    }
                    self.cat.avail_trans.insert((t.name.clone(), pair), vs);
                }
            }
        }

        // Repurposing decisions on pairs served by both pipeline grids.
        for pair in self.repurpose_pairs() {
            let mut xs = Vec::new();
            for i in 0..dims.periods {
                xs.push(self.lp.add_nonneg(
                    &format!(
                        "xrep.{}.{}.i{}",
                        node_name(pair.0),
                        node_name(pair.1),
                        i + 1
                    ),
                    S::zero(),
                )?);
            }
            self.cat.repurpose.insert(pair, xs);
        }

        // Second stage.
        for ci in 0..dims.commodities.len() {
            let c = &dims.commodities[ci];
            let cname = c.name.clone();
            let producers: Vec<(String, Vec<usize>)> = c
                .producers
                .iter()
                .map(|t| (t.name.clone(), t.nodes.iter().map(|x| x.0).collect()))
                .collect();
            for (tname, nodes) in producers {
                for n in nodes {
                    let g = self.grid(&format!("ys.{}.{}", tname, node_name(n)))?;
                    self.cat.source.insert((tname.clone(), n), g);
                }
            }
            let sinks: Vec<(String, Vec<usize>)> = c
                .sinks
                .iter()
                .map(|t| (t.name.clone(), t.nodes.iter().map(|x| x.0).collect()))
                .collect();
            for (sname, nodes) in sinks {
                for n in nodes {
                    let g = self.grid(&format!("ysk.{}.{}.{}", cname, sname, node_name(n)))?;
                    self.cat.sink.insert((cname.clone(), sname.clone(), n), g);
                }
            }
            for n in 0..dims.nodes.len() {
                let g = self.grid(&format!("yll.{}.{}", cname, node_name(n)))?;
                self.cat.shed.insert((cname.clone(), n), g);
            }
            let storages: Vec<(String, Vec<usize>)> = c
                .storages
                .iter()
                .map(|t| (t.name.clone(), t.nodes.iter().map(|x| x.0).collect()))
                .collect();
            for (tname, nodes) in storages {
                for n in nodes {
                    let ch = self.grid(&format!("ych.{}.{}", tname, node_name(n)))?;
                    let dis = self.grid(&format!("ydis.{}.{}", tname, node_name(n)))?;
                    let lv = self.grid(&format!("ysto.{}.{}", tname, node_name(n)))?;
                    self.cat.charge.insert((tname.clone(), n), ch);
                    self.cat.discharge.insert((tname.clone(), n), dis);
                    self.cat.level.insert((tname.clone(), n), lv);
                }
            }
            let ttypes: Vec<(String, Vec<(usize, usize)>)> = c
                .transmissions
                .iter()
                .map(|t| {
                    (
                        t.name.clone(),
                        t.pairs().into_iter().map(|(a, b)| (a.0, b.0)).collect(),
                    )
                })
                .collect();
            for (tname, pairs) in ttypes {
                for (a, b) in pairs {
                    let fwd = self.grid(&format!("ytr.{}.{}.{}", tname, node_name(a), node_name(b)))?;
                    let rev = self.grid(&format!("ytr.{}.{}.{}", tname, node_name(b), node_name(a)))?;
                    self.cat.flow.insert((tname.clone(), a, b), fwd);
                    self.cat.flow.insert((tname.clone(), b, a), rev);
                }
            }
        }

        // Green-eligible power tracker, skipped entirely in Base.
        if self.case.any_green() {
            for n in 0..dims.nodes.len() {
                for i in 0..dims.periods {
                    if self.exempt.contains(&(n, i)) {
                        continue;
                    }
                    let mut vars = Vec::with_capacity(self.n_scen * self.n_hours);
                    for w in 0..self.n_scen {
                        for h in 0..self.n_hours {
                            vars.push(self.lp.add_nonneg(
                                &format!("ypw4h2.{}.i{}.w{}.h{h}", node_name(n), i + 1, w + 1),
                                S::zero(),
                            )?);
                        }
                    }
                    self.cat.pw4h2.insert((n, i), vars);
                }
            }
        }
        Ok(())
    }

    // -----------------------------------------------------------------
    // Objective
    // -----------------------------------------------------------------

    /// Sets the objective coefficient of every variable: investment terms
    /// are period-discounted; operational and shed terms carry the
    /// operational weight, scenario probability, and season scale.
    fn emit_objective(&mut self) {
        let years = self.dims.period_length_years;
        let weight = self.params.weight(years);
        let scales = self.params.season_scale.clone();
        let probs = self.dims.probabilities.clone();
        let season_of: Vec<usize> = (0..self.n_hours)
            .map(|h| self.dims.season_of_hour(h))
            .collect();

        for ((tech, _), xs) in &self.cat.built_prod {
            for (i, &x) in xs.iter().enumerate() {
                let q = self.params.invest_cost[tech][i];
                self.lp
                    .set_objective_coeff(x, self.params.discount(i, years) * q);
            }
        }
        for ((tech, _), xs) in &self.cat.built_stor {
            for (i, &x) in xs.iter().enumerate() {
                let q = self.params.invest_cost[tech][i];
                self.lp
                    .set_objective_coeff(x, self.params.discount(i, years) * q);
            }
        }
        for ((ttype, _), xs) in &self.cat.built_trans {
            for (i, &x) in xs.iter().enumerate() {
                let q = self.params.invest_cost[ttype][i];
                self.lp
                    .set_objective_coeff(x, self.params.discount(i, years) * q);
            }
        }
        for ((tech, _), grid) in &self.cat.source {
            let costs = &self.params.op_cost[tech];
            for i in 0..grid.periods {
                let base = self.params.discount(i, years) * weight * costs[i];
                if base == S::zero() {
                    continue;
                }
                for w in 0..grid.scenarios {
                    for h in 0..grid.hours {
                        let coeff = base * probs[w] * scales[season_of[h]];
                        self.lp.set_objective_coeff(grid.at(i, w, h), coeff);
                    }
                }
            }
        }
        for ((commodity, n), grid) in &self.cat.shed {
            let costs = &self.params.shed_cost[commodity];
            for i in 0..grid.periods {
                let base = self.params.discount(i, years) * weight * costs[*n][i];
                if base == S::zero() {
                    continue;
                }
                for w in 0..grid.scenarios {
                    for h in 0..grid.hours {
                        let coeff = base * probs[w] * scales[season_of[h]];
                        self.lp.set_objective_coeff(grid.at(i, w, h), coeff);
                    }
                }
            }
        }
    }

    /// Repurposing cost: kappa * eta * (new-H2-pipeline cost) per unit of
    /// repurposed NG capacity, period-discounted.
    fn emit_repurpose_cost(&mut self) {
        let years = self.dims.period_length_years;
        let kappa = self.params.repurpose_cost_factor;
        let eta = self.params.repurpose_flow_factor;
        for (_, xs) in &self.cat.repurpose {
            for (i, &x) in xs.iter().enumerate() {
                let c_h2 = self
                    .params
                    .invest_cost
                    .get(H2_PIPELINE)
                    .map(|v| v[i])
                    .unwrap_or(S::zero());
                let coeff = kappa * eta * c_h2 * self.params.discount(i, years);
                self.lp.set_objective_coeff(x, coeff);
            }
        }
    }

    // -----------------------------------------------------------------
    // Flow balance
    // -----------------------------------------------------------------

    /// One equality per (commodity, node, hour, period, scenario):
    /// production - sinks - net storage charge - net export + shed = demand.
    /// Electrolysis power draw enters through the power sink, which a
    /// companion equality ties to hydrogen production.
    fn emit_flow_balance(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let mut rows = 0usize;
        let mut link_rows = 0usize;
        for c in &dims.commodities {
            let demand = &self.params.demand[&c.name];
            for n in 0..dims.nodes.len() {
                let producers: Vec<&OpGrid> = c
                    .producers
                    .iter()
                    .filter(|t| t.nodes.iter().any(|x| x.0 == n))
                    .map(|t| &self.cat.source[&(t.name.clone(), n)])
                    .collect();
                let sinks: Vec<&OpGrid> = c
                    .sinks
                    .iter()
                    .filter(|t| t.nodes.iter().any(|x| x.0 == n))
                    .map(|t| &self.cat.sink[&(c.name.clone(), t.name.clone(), n)])
                    .collect();
                let stores: Vec<(&OpGrid, &OpGrid)> = c
                    .storages
                    .iter()
                    .filter(|t| t.nodes.iter().any(|x| x.0 == n))
                    .map(|t| {
                        (
                            &self.cat.charge[&(t.name.clone(), n)],
                            &self.cat.discharge[&(t.name.clone(), n)],
                        )
                    })
                    .collect();
                let mut flows: Vec<(&OpGrid, &OpGrid)> = Vec::new();
                for t in &c.transmissions {
                    for (a, b) in t.pairs() {
                        let (a, b) = (a.0, b.0);
                        if a == n {
                            flows.push((
                                &self.cat.flow[&(t.name.clone(), a, b)],
                                &self.cat.flow[&(t.name.clone(), b, a)],
                            ));
                        } else if b == n {
                            flows.push((
                                &self.cat.flow[&(t.name.clone(), b, a)],
                                &self.cat.flow[&(t.name.clone(), a, b)],
                            ));
                        }
                    }
                }
                let shed = &self.cat.shed[&(c.name.clone(), n)];
                for i in 0..dims.periods {
                    for w in 0..self.n_scen {
                        for h in 0..self.n_hours {
                            let mut terms: Vec<(VarId, S)> = Vec::new();
                            for g in &producers {
                                terms.push((g.at(i, w, h), S::one()));
                            }
                            for g in &sinks {
                                terms.push((g.at(i, w, h), -S::one()));
                            }
                            for (ch, dis) in &stores {
                                terms.push((ch.at(i, w, h), -S::one()));
                                terms.push((dis.at(i, w, h), S::one()));
                            }
                            for (out, into) in &flows {
                                terms.push((out.at(i, w, h), -S::one()));
                                terms.push((into.at(i, w, h), S::one()));
                            }
                            terms.push((shed.at(i, w, h), S::one()));
                            let rhs = demand.get(n, i, w, h);
                            self.lp.add_row(
                                &format!(
                                    "bal.{}.{}.i{}.w{}.h{h}",
                                    c.name,
                                    dims.nodes[n],
                                    i + 1,
                                    w + 1
                                ),
                                Sense::Eq,
                                &terms,
                                rhs,
                            )?;
                            rows += 1;
                        }
                    }
                }
            }
        }

        // Electrolysis power draw: sink = sum_e eta_e * y_e.
        let electrolyzers: Vec<(String, Vec<usize>, S)> = dims
            .electrolyzers()
            .iter()
            .map(|t| {
                (
                    t.name.clone(),
                    t.nodes.iter().map(|x| x.0).collect(),
                    self.params.electrolyzer_power[&t.name],
                )
            })
            .collect();
        let mut hosts: Vec<usize> = Vec::new();
        for (_, nodes, _) in &electrolyzers {
            for &n in nodes {
                if !hosts.contains(&n) {
                    hosts.push(n);
                }
            }
        }
        hosts.sort_unstable();
        for n in hosts {
            let sink = self
                .cat
                .sink
                .get(&(POWER.to_string(), ELECTROLYSIS_SINK.to_string(), n))
                .cloned();
            let Some(sink) = sink else { continue };
            for i in 0..dims.periods {
                for w in 0..self.n_scen {
                    for h in 0..self.n_hours {
                        let mut terms = vec![(sink.at(i, w, h), S::one())];
                        for (e, nodes, eta) in &electrolyzers {
                            if nodes.contains(&n) {
                                let g = &self.cat.source[&(e.clone(), n)];
                                terms.push((g.at(i, w, h), -*eta));
                            }
                        }
                        self.lp.add_row(
                            &format!("elink.{}.i{}.w{}.h{h}", dims.nodes[n], i + 1, w + 1),
                            Sense::Eq,
                            &terms,
                            S::zero(),
                        )?;
                        link_rows += 1;
                    }
                }
            }
        }
        self.family("flow_balance", rows);
        self.family("power_sink_link", link_rows);
        Ok(())
    }

    // -----------------------------------------------------------------
    // Capacity accounting
    // -----------------------------------------------------------------

    /// Available capacity equals investments alive in the lifetime window
    /// plus remaining initial capacity. Pipeline pairs under repurposing are
    /// handled by their own emitter.
    fn emit_capacity_accounting(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let mut rows = 0usize;
        let rep_pairs = self.repurpose_pairs();

        let prod_keys: Vec<(String, usize)> = self.cat.avail_prod.keys().cloned().collect();
        for (tech, n) in prod_keys {
            for i in 0..dims.periods {
                let v = self.cat.avail_prod[&(tech.clone(), n)][i];
                let mut terms = vec![(v, S::one())];
                if let Some(xs) = self.cat.built_prod.get(&(tech.clone(), n)) {
                    for j in self.window(&tech, i) {
                        terms.push((xs[j], -S::one()));
                    }
                }
                let rhs = self.initial_cap(&tech, n, i);
                self.lp.add_row(
                    &format!("cap.{}.{}.i{}", tech, dims.nodes[n], i + 1),
                    Sense::Eq,
                    &terms,
                    rhs,
                )?;
                rows += 1;
            }
        }
        let stor_keys: Vec<(String, usize)> = self.cat.avail_stor.keys().cloned().collect();
        for (tech, n) in stor_keys {
            for i in 0..dims.periods {
                let v = self.cat.avail_stor[&(tech.clone(), n)][i];
                let mut terms = vec![(v, S::one())];
                if let Some(xs) = self.cat.built_stor.get(&(tech.clone(), n)) {
                    for j in self.window(&tech, i) {
                        terms.push((xs[j], -S::one()));
                    }
                }
                let rhs = self.initial_cap(&tech, n, i);
                self.lp.add_row(
                    &format!("cap.{}.{}.i{}", tech, dims.nodes[n], i + 1),
                    Sense::Eq,
                    &terms,
                    rhs,
                )?;
                rows += 1;
            }
        }
        let trans_keys: Vec<(String, (usize, usize))> =
            self.cat.avail_trans.keys().cloned().collect();
        for (ttype, pair) in trans_keys {
            if ttype == NG_PIPELINE {
                continue; // frozen grid, repurposing emitter owns it
            }
            if ttype == H2_PIPELINE && rep_pairs.contains(&pair) {
                continue; // gains repurposed capacity, repurposing emitter owns it
            }
            for i in 0..dims.periods {
                let v = self.cat.avail_trans[&(ttype.clone(), pair)][i];
                let mut terms = vec![(v, S::one())];
                if let Some(xs) = self.cat.built_trans.get(&(ttype.clone(), pair)) {
                    for j in self.window(&ttype, i) {
                        terms.push((xs[j], -S::one()));
                    }
                }
                let rhs = self.initial_trans(&ttype, pair, i);
                self.lp.add_row(
                    &format!(
                        "cap.{}.{}.{}.i{}",
                        ttype, dims.nodes[pair.0], dims.nodes[pair.1], i + 1
                    ),
                    Sense::Eq,
                    &terms,
                    rhs,
                )?;
                rows += 1;
            }
        }
        self.family("capacity_accounting", rows);
        Ok(())
    }

    // -----------------------------------------------------------------
    // Operation limits
    // -----------------------------------------------------------------

    /// No asset runs above its installed capacity; VRES rows carry the
    /// hourly availability, reservoir hydro gets a seasonal energy budget.
    fn emit_operation_limits(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let mut rows = 0usize;
        let mut hydro_rows = 0usize;

        for c in &dims.commodities {
            for t in &c.producers {
                for &nid in &t.nodes {
                    let n = nid.0;
                    let grid = self.cat.source[&(t.name.clone(), n)].clone();
                    let vs = self.cat.avail_prod[&(t.name.clone(), n)].clone();
                    for i in 0..dims.periods {
                        for w in 0..self.n_scen {
                            for h in 0..self.n_hours {
                                let alpha = self.availability(t, n, i, w, h);
                                self.lp.add_row(
                                    &format!(
                                        "opp.{}.{}.i{}.w{}.h{h}",
                                        t.name,
                                        dims.nodes[n],
                                        i + 1,
                                        w + 1
                                    ),
                                    Sense::Le,
                                    &[(grid.at(i, w, h), S::one()), (vs[i], -alpha)],
                                    S::zero(),
                                )?;
                                rows += 1;
                            }
                        }
                    }
                    // Seasonal energy budget for reservoir hydro.
                    if t.kind == TechKind::HydroReservoir {
                        let offsets = dims.season_offsets();
                        for i in 0..dims.periods {
                            for w in 0..self.n_scen {
                                for (s, season) in dims.seasons.iter().enumerate() {
                                    let budget = self.params.hydro_budget_at(
                                        &t.name,
                                        n,
                                        s,
                                        w,
                                        dims.seasons.len(),
                                        self.n_scen,
                                    );
                                    let terms: Vec<(VarId, S)> = (0..season.hours)
                                        .map(|k| (grid.at(i, w, offsets[s] + k), S::one()))
                                        .collect();
                                    self.lp.add_row(
                                        &format!(
                                            "hyd.{}.{}.s{}.i{}.w{}",
                                            t.name,
                                            dims.nodes[n],
                                            s + 1,
                                            i + 1,
                                            w + 1
                                        ),
                                        Sense::Le,
                                        &terms,
                                        budget,
                                    )?;
                                    hydro_rows += 1;
                                }
                            }
                        }
                    }
                }
            }
            for t in &c.storages {
                for &nid in &t.nodes {
                    let n = nid.0;
                    let grid = self.cat.level[&(t.name.clone(), n)].clone();
                    let vs = self.cat.avail_stor[&(t.name.clone(), n)].clone();
                    for i in 0..dims.periods {
                        for w in 0..self.n_scen {
                            for h in 0..self.n_hours {
                                self.lp.add_row(
                                    &format!(
                                        "opb.{}.{}.i{}.w{}.h{h}",
                                        t.name,
                                        dims.nodes[n],
                                        i + 1,
                                        w + 1
                                    ),
                                    Sense::Le,
                                    &[(grid.at(i, w, h), S::one()), (vs[i], -S::one())],
                                    S::zero(),
                                )?;
                                rows += 1;
                            }
                        }
                    }
                }
            }
            for t in &c.transmissions {
                for (a, b) in t.pairs() {
                    let pair = (a.0, b.0);
                    let vs = self.cat.avail_trans[&(t.name.clone(), pair)].clone();
                    for &(from, to) in &[(pair.0, pair.1), (pair.1, pair.0)] {
                        let grid = self.cat.flow[&(t.name.clone(), from, to)].clone();
                        for i in 0..dims.periods {
                            for w in 0..self.n_scen {
                                for h in 0..self.n_hours {
                                    self.lp.add_row(
                                        &format!(
                                            "opt.{}.{}.{}.i{}.w{}.h{h}",
                                            t.name,
                                            dims.nodes[from],
                                            dims.nodes[to],
                                            i + 1,
                                            w + 1
                                        ),
                                        Sense::Le,
                                        &[(grid.at(i, w, h), S::one()), (vs[i], -S::one())],
                                        S::zero(),
                                    )?;
                                    rows += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        self.family("operation_limits", rows);
        self.family("hydro_budget", hydro_rows);
        Ok(())
    }

    // -----------------------------------------------------------------
    // Storage dynamics
    // -----------------------------------------------------------------

    /// Hourly level recursion, seasons starting and ending at half the
    /// installed capacity; no storage crosses season boundaries.
    fn emit_storage_dynamics(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let mut rows = 0usize;
        let offsets = dims.season_offsets();
        let half = lit::<S>(0.5);

        let keys: Vec<(String, usize)> = self.cat.level.keys().cloned().collect();
        for (tech, n) in keys {
            let lv = self.cat.level[&(tech.clone(), n)].clone();
            let ch = self.cat.charge[&(tech.clone(), n)].clone();
            let dis = self.cat.discharge[&(tech.clone(), n)].clone();
            let vs = self.cat.avail_stor[&(tech.clone(), n)].clone();
            for i in 0..dims.periods {
                for w in 0..self.n_scen {
                    for (s, season) in dims.seasons.iter().enumerate() {
                        let first = offsets[s];
                        let last = offsets[s] + season.hours - 1;
                        for k in 0..season.hours {
                            let h = first + k;
                            let mut terms = vec![
                                (lv.at(i, w, h), -S::one()),
                                (ch.at(i, w, h), S::one()),
                                (dis.at(i, w, h), -S::one()),
                            ];
                            if h == first {
                                terms.push((vs[i], half));
                            } else {
                                terms.push((lv.at(i, w, h - 1), S::one()));
                            }
                            self.lp.add_row(
                                &format!(
                                    "sto.{}.{}.i{}.w{}.h{h}",
                                    tech,
                                    dims.nodes[n],
                                    i + 1,
                                    w + 1
                                ),
                                Sense::Eq,
                                &terms,
                                S::zero(),
                            )?;
                            rows += 1;
                        }
                        // Season end pins the level back to half capacity.
                        self.lp.add_row(
                            &format!(
                                "stoL.{}.{}.i{}.w{}.h{last}",
                                tech,
                                dims.nodes[n],
                                i + 1,
                                w + 1
                            ),
                            Sense::Eq,
                            &[(lv.at(i, w, last), S::one()), (vs[i], -half)],
                            S::zero(),
                        )?;
                        rows += 1;
                    }
                }
            }
        }
        self.family("storage_dynamics", rows);
        Ok(())
    }

    // -----------------------------------------------------------------
    // Absolute resource limits
    // -----------------------------------------------------------------

    /// Horizon-wide budgets per node and scenario (natural-gas extraction,
    /// CO2 sequestration), scaled by period length and season scale.
    fn emit_resource_limits(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        if self.params.resource_limits.is_empty() {
            self.skipped("resource_limits", "no resource limits in data");
            return Ok(());
        }
        let mut rows = 0usize;
        let years = S::from_f64_lit(dims.period_length_years as f64);
        let scales = self.params.season_scale.clone();
        let season_of: Vec<usize> = (0..self.n_hours)
            .map(|h| dims.season_of_hour(h))
            .collect();
        let limits = self.params.resource_limits.clone();
        for lim in &limits {
            let Some(c) = dims.commodity(&lim.commodity) else { continue };
            let grids: Vec<OpGrid> = match lim.kind {
                LimitKind::Source => c
                    .producers
                    .iter()
                    .filter(|t| t.nodes.iter().any(|x| x.0 == lim.node))
                    .map(|t| self.cat.source[&(t.name.clone(), lim.node)].clone())
                    .collect(),
                LimitKind::Sink => c
                    .sinks
                    .iter()
                    .filter(|t| t.nodes.iter().any(|x| x.0 == lim.node))
                    .map(|t| {
                        self.cat.sink[&(c.name.clone(), t.name.clone(), lim.node)].clone()
                    })
                    .collect(),
            };
            if grids.is_empty() {
                continue;
            }
            let kind = match lim.kind {
                LimitKind::Source => "src",
                LimitKind::Sink => "snk",
            };
            for w in 0..self.n_scen {
                let mut terms: Vec<(VarId, S)> = Vec::new();
                for g in &grids {
                    for i in 0..dims.periods {
                        for h in 0..self.n_hours {
                            terms.push((g.at(i, w, h), years * scales[season_of[h]]));
                        }
                    }
                }
                self.lp.add_row(
                    &format!(
                        "res.{}.{}.{}.w{}",
                        kind,
                        lim.commodity,
                        dims.nodes[lim.node],
                        w + 1
                    ),
                    Sense::Le,
                    &terms,
                    lim.value,
                )?;
                rows += 1;
            }
        }
        self.family("resource_limits", rows);
        Ok(())
    }

    // -----------------------------------------------------------------
    // Emission cap
    // -----------------------------------------------------------------

    fn emit_emission_cap(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let Some(cap) = self.params.emission_cap.clone() else {
            self.skipped("emission_cap", "no emission cap in data");
            return Ok(());
        };
        let mut rows = 0usize;
        let scales = self.params.season_scale.clone();
        let season_of: Vec<usize> = (0..self.n_hours)
            .map(|h| dims.season_of_hour(h))
            .collect();
        let sources: Vec<((String, usize), OpGrid, S)> = self
            .cat
            .source
            .iter()
            .map(|(k, g)| {
                let eta = self
                    .params
                    .emission_intensity
                    .get(&k.0)
                    .copied()
                    .unwrap_or(S::zero());
                (k.clone(), g.clone(), eta)
            })
            .collect();
        for i in 0..dims.periods {
            for w in 0..self.n_scen {
                let mut terms: Vec<(VarId, S)> = Vec::new();
                for (_, g, eta) in &sources {
                    if *eta == S::zero() {
                        continue;
                    }
                    for h in 0..self.n_hours {
                        terms.push((g.at(i, w, h), scales[season_of[h]] * *eta));
                    }
                }
                self.lp.add_row(
                    &format!("em.i{}.w{}", i + 1, w + 1),
                    Sense::Le,
                    &terms,
                    cap[i],
                )?;
                rows += 1;
            }
        }
        self.family("emission_cap", rows);
        Ok(())
    }

    // -----------------------------------------------------------------
    // Green hydrogen
    // -----------------------------------------------------------------

    /// Additionality, the spatial/temporal green-power cap in its four case
    /// variants, the power-to-hydrogen coupling cap, and the 90% exemption
    /// share row.
    fn emit_green_hydrogen(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        if !self.case.any_green() {
            self.skipped("green_additionality", "case has no green rules");
            self.skipped("green_power_cap", "case has no green rules");
            self.skipped("green_power_to_h2", "case has no green rules");
            self.skipped("green_exemption", "case has no green rules");
            return Ok(());
        }
        let vres: Vec<Technology> = dims
            .commodity(POWER)
            .map(|c| {
                c.producers
                    .iter()
                    .filter(|t| t.kind.is_vres())
                    .cloned()
                    .collect()
            })
            .unwrap_or_default();
        let electrolyzers: Vec<(String, Vec<usize>, S)> = dims
            .electrolyzers()
            .iter()
            .map(|t| {
                (
                    t.name.clone(),
                    t.nodes.iter().map(|x| x.0).collect(),
                    self.params.electrolyzer_power[&t.name],
                )
            })
            .collect();

        // Additionality: new electrolysis power demand within new VRES build.
        if self.case.additionality {
            let mut rows = 0usize;
            for n in 0..dims.nodes.len() {
                for i in 0..dims.periods {
                    if self.exempt.contains(&(n, i)) {
                        continue;
                    }
                    let mut terms: Vec<(VarId, S)> = Vec::new();
                    for (e, nodes, eta) in &electrolyzers {
                        if nodes.contains(&n) {
                            if let Some(xs) = self.cat.built_prod.get(&(e.clone(), n)) {
                                terms.push((xs[i], *eta));
                            }
                        }
                    }
                    if terms.is_empty() {
                        continue;
                    }
                    for g in &vres {
                        if g.nodes.iter().any(|x| x.0 == n) {
                            if let Some(xs) = self.cat.built_prod.get(&(g.name.clone(), n)) {
                                terms.push((xs[i], -S::one()));
                            }
                        }
                    }
                    self.lp.add_row(
                        &format!("grnA.{}.i{}", dims.nodes[n], i + 1),
                        Sense::Le,
                        &terms,
                        S::zero(),
                    )?;
                    rows += 1;
                }
            }
            self.family("green_additionality", rows);
        } else {
            self.skipped("green_additionality", "additionality off");
        }

        // Green power cap in its case variant.
        {
            // RHS generator-capacity terms for one (g, n, i, w, h).
            let qualifying_terms = |asm: &Assembler<'a, S>,
                                    g: &Technology,
                                    n: usize,
                                    i: usize,
                                    w: usize,
                                    h: usize,
                                    terms: &mut Vec<(VarId, S)>| {
                let alpha = asm.availability(g, n, i, w, h);
                if alpha == S::zero() {
                    return;
                }
                if asm.case.additionality {
                    if let Some(xs) = asm.cat.built_prod.get(&(g.name.clone(), n)) {
                        for j in asm.window(&g.name, i) {
                            terms.push((xs[j], -alpha));
                        }
                    }
                } else if let Some(vs) = asm.cat.avail_prod.get(&(g.name.clone(), n)) {
                    terms.push((vs[i], -alpha));
                }
            };

            let mut rows = 0usize;
            match (self.case.temporal, self.case.spatial) {
                (true, true) => {
                    for n in 0..dims.nodes.len() {
                        for i in 0..dims.periods {
                            if self.exempt.contains(&(n, i)) {
                                continue;
                            }
                            for w in 0..self.n_scen {
                                for h in 0..self.n_hours {
                                    let ypw =
                                        self.cat.pw4h2_at(n, i, w, h, self.n_hours).unwrap();
                                    let mut terms = vec![(ypw, S::one())];
                                    for g in &vres {
                                        if g.nodes.iter().any(|x| x.0 == n) {
                                            qualifying_terms(self, g, n, i, w, h, &mut terms);
                                        }
                                    }
                                    self.lp.add_row(
                                        &format!(
                                            "grnC.{}.i{}.w{}.h{h}",
                                            dims.nodes[n],
                                            i + 1,
                                            w + 1
                                        ),
                                        Sense::Le,
                                        &terms,
                                        S::zero(),
                                    )?;
                                    rows += 1;
                                }
                            }
                        }
                    }
                }
                (true, false) => {
                    // Spatial correlation removed: both sides aggregated over
                    // non-exempt nodes and periods, one row per hour and
                    // scenario.
                    for w in 0..self.n_scen {
                        for h in 0..self.n_hours {
                            let mut terms: Vec<(VarId, S)> = Vec::new();
                            for i in 0..dims.periods {
                                for n in 0..dims.nodes.len() {
                                    if self.exempt.contains(&(n, i)) {
                                        continue;
                                    }
                                    if let Some(ypw) =
                                        self.cat.pw4h2_at(n, i, w, h, self.n_hours)
                                    {
                                        terms.push((ypw, S::one()));
                                    }
                                    for g in &vres {
                                        if g.nodes.iter().any(|x| x.0 == n) {
                                            qualifying_terms(self, g, n, i, w, h, &mut terms);
                                        }
                                    }
                                }
                            }
                            self.lp.add_row(
                                &format!("grnC.agg.w{}.h{h}", w + 1),
                                Sense::Le,
                                &terms,
                                S::zero(),
                            )?;
                            rows += 1;
                        }
                    }
                }
                (false, true) => {
                    // Temporal correlation relaxed to annual matching: both
                    // sides aggregated over all hours of the period.
                    for n in 0..dims.nodes.len() {
                        for i in 0..dims.periods {
                            if self.exempt.contains(&(n, i)) {
                                continue;
                            }
                            for w in 0..self.n_scen {
                                let mut terms: Vec<(VarId, S)> = Vec::new();
                                for h in 0..self.n_hours {
                                    let ypw =
                                        self.cat.pw4h2_at(n, i, w, h, self.n_hours).unwrap();
                                    terms.push((ypw, S::one()));
                                    for g in &vres {
                                        if g.nodes.iter().any(|x| x.0 == n) {
                                            qualifying_terms(self, g, n, i, w, h, &mut terms);
                                        }
                                    }
                                }
                                self.lp.add_row(
                                    &format!("grnC.{}.i{}.w{}", dims.nodes[n], i + 1, w + 1),
                                    Sense::Le,
                                    &terms,
                                    S::zero(),
                                )?;
                                rows += 1;
                            }
                        }
                    }
                }
                (false, false) => {
                    // Neither correlation: fully aggregated per scenario.
                    if self.case.additionality || self.case.exemption90 {
                        for w in 0..self.n_scen {
                            let mut terms: Vec<(VarId, S)> = Vec::new();
                            for i in 0..dims.periods {
                                for n in 0..dims.nodes.len() {
                                    if self.exempt.contains(&(n, i)) {
                                        continue;
                                    }
                                    for h in 0..self.n_hours {
                                        if let Some(ypw) =
                                            self.cat.pw4h2_at(n, i, w, h, self.n_hours)
                                        {
                                            terms.push((ypw, S::one()));
                                        }
                                        for g in &vres {
                                            if g.nodes.iter().any(|x| x.0 == n) {
                                                qualifying_terms(self, g, n, i, w, h, &mut terms);
                                            }
                                        }
                                    }
                                }
                            }
                            self.lp.add_row(
                                &format!("grnC.agg.w{}", w + 1),
                                Sense::Le,
                                &terms,
                                S::zero(),
                            )?;
                            rows += 1;
                        }
                    }
                }
            }
            self.family("green_power_cap", rows);
        }

        // Electrolysis power never exceeds the green-eligible tracker.
        {
            let mut rows = 0usize;
            for n in 0..dims.nodes.len() {
                let hosts: Vec<&(String, Vec<usize>, S)> = electrolyzers
                    .iter()
                    .filter(|(_, nodes, _)| nodes.contains(&n))
                    .collect();
                if hosts.is_empty() {
                    continue;
                }
                for i in 0..dims.periods {
                    if self.exempt.contains(&(n, i)) {
                        continue;
                    }
                    for w in 0..self.n_scen {
                        for h in 0..self.n_hours {
                            let ypw = self.cat.pw4h2_at(n, i, w, h, self.n_hours).unwrap();
                            let mut terms = vec![(ypw, -S::one())];
                            for (e, _, eta) in &hosts {
                                let g = &self.cat.source[&(e.clone(), n)];
                                terms.push((g.at(i, w, h), *eta));
                            }
                            self.lp.add_row(
                                &format!(
                                    "grnP.{}.i{}.w{}.h{h}",
                                    dims.nodes[n],
                                    i + 1,
                                    w + 1
                                ),
                                Sense::Le,
                                &terms,
                                S::zero(),
                            )?;
                            rows += 1;
                        }
                    }
                }
            }
            self.family("green_power_to_h2", rows);
        }

        // Exempt nodes must hold the 90% renewable share.
        if self.case.exemption90 {
            let mut rows = 0usize;
            let share = lit::<S>(EXEMPTION_SHARE);
            let gens = dims.generators();
            for n in 0..dims.nodes.len() {
                for i in 0..dims.periods {
                    if !self.exempt.contains(&(n, i)) {
                        continue;
                    }
                    for w in 0..self.n_scen {
                        let mut terms: Vec<(VarId, S)> = Vec::new();
                        for g in &gens {
                            if !g.nodes.iter().any(|x| x.0 == n) {
                                continue;
                            }
                            let coeff = if g.kind.is_vres() {
                                share - S::one()
                            } else {
                                share
                            };
                            let grid = &self.cat.source[&(g.name.clone(), n)];
                            for h in 0..self.n_hours {
                                terms.push((grid.at(i, w, h), coeff));
                            }
                        }
                        if terms.is_empty() {
                            continue;
                        }
                        self.lp.add_row(
                            &format!("grnX.{}.i{}.w{}", dims.nodes[n], i + 1, w + 1),
                            Sense::Le,
                            &terms,
                            S::zero(),
                        )?;
                        rows += 1;
                    }
                }
            }
            self.family("green_exemption", rows);
        } else {
            self.skipped("green_exemption", "exemption off");
        }
        Ok(())
    }

    // -----------------------------------------------------------------
    // Pipeline repurposing
    // -----------------------------------------------------------------

    /// NG pipelines shrink by cumulative repurposed capacity, total
    /// repurposing is capped by the initial grid, and hydrogen pipelines
    /// gain the repurposed capacity scaled by the flow factor.
    fn emit_pipeline_repurposing(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let (ng_pairs, _) = self.pipeline_pairs();
        if ng_pairs.is_empty() {
            self.skipped("repurpose_ng_capacity", "no NG pipelines");
            self.skipped("repurpose_cap", "no NG pipelines");
            self.skipped("repurpose_h2_capacity", "no NG pipelines");
            return Ok(());
        }
        let rep_pairs = self.repurpose_pairs();
        let eta = self.params.repurpose_flow_factor;
        let mut ng_rows = 0usize;
        let mut cap_rows = 0usize;
        let mut h2_rows = 0usize;

        for &pair in &ng_pairs {
            let vs = self.cat.avail_trans[&(NG_PIPELINE.to_string(), pair)].clone();
            // Initial NG capacity is constant over periods.
            let x0 = self.initial_trans(NG_PIPELINE, pair, 0);
            for i in 0..dims.periods {
                let mut terms = vec![(vs[i], S::one())];
                if let Some(xr) = self.cat.repurpose.get(&pair) {
                    for j in 0..=i {
                        terms.push((xr[j], S::one()));
                    }
                }
                self.lp.add_row(
                    &format!(
                        "repNG.{}.{}.i{}",
                        dims.nodes[pair.0], dims.nodes[pair.1], i + 1
                    ),
                    Sense::Eq,
                    &terms,
                    x0,
                )?;
                ng_rows += 1;
            }
            if let Some(xr) = self.cat.repurpose.get(&pair) {
                let terms: Vec<(VarId, S)> = xr.iter().map(|&x| (x, S::one())).collect();
                self.lp.add_row(
                    &format!("repCap.{}.{}", dims.nodes[pair.0], dims.nodes[pair.1]),
                    Sense::Le,
                    &terms,
                    x0,
                )?;
                cap_rows += 1;
            }
        }

        for &pair in &rep_pairs {
            let vs = self.cat.avail_trans[&(H2_PIPELINE.to_string(), pair)].clone();
            let xr = self.cat.repurpose[&pair].clone();
            for i in 0..dims.periods {
                let mut terms = vec![(vs[i], S::one())];
                if let Some(xs) = self.cat.built_trans.get(&(H2_PIPELINE.to_string(), pair)) {
                    for j in self.window(H2_PIPELINE, i) {
                        terms.push((xs[j], -S::one()));
                    }
                }
                for j in self.window(H2_PIPELINE, i) {
                    terms.push((xr[j], -eta));
                }
                let rhs = self.initial_trans(H2_PIPELINE, pair, i);
                self.lp.add_row(
                    &format!(
                        "repH2.{}.{}.i{}",
                        dims.nodes[pair.0], dims.nodes[pair.1], i + 1
                    ),
                    Sense::Eq,
                    &terms,
                    rhs,
                )?;
                h2_rows += 1;
            }
        }
        self.family("repurpose_ng_capacity", ng_rows);
        self.family("repurpose_cap", cap_rows);
        self.family("repurpose_h2_capacity", h2_rows);
        Ok(())
    }

    // -----------------------------------------------------------------
    // Fixed hydrogen production
    // -----------------------------------------------------------------

    /// Total electrolysis output equals the (de-annualized) target in every
    /// scenario of every period.
    fn emit_fixed_hydrogen(&mut self) -> Result<(), AssembleError> {
        let dims = self.dims;
        let Some(h2) = self.params.fixed_hydrogen.clone() else {
            self.skipped("fixed_hydrogen", "no fixed hydrogen data");
            return Ok(());
        };
        let coverage = dims.year_coverage();
        let mut rows = 0usize;
        let grids: Vec<OpGrid> = dims
            .electrolyzers()
            .iter()
            .flat_map(|t| {
                let name = t.name.clone();
                t.nodes
                    .iter()
                    .map(|n| self.cat.source[&(name.clone(), n.0)].clone())
                    .collect::<Vec<_>>()
            })
            .collect();
        if grids.is_empty() {
            self.skipped("fixed_hydrogen", "no electrolyzers in dimensions");
            return Ok(());
        }
        for i in 0..dims.periods {
            for w in 0..self.n_scen {
                let mut terms: Vec<(VarId, S)> = Vec::new();
                for g in &grids {
                    for h in 0..self.n_hours {
                        terms.push((g.at(i, w, h), S::one()));
                    }
                }
                self.lp.add_row(
                    &format!("fixh2.i{}.w{}", i + 1, w + 1),
                    Sense::Eq,
                    &terms,
                    h2[i] * coverage,
                )?;
                rows += 1;
            }
        }
        self.family("fixed_hydrogen", rows);
        Ok(())
    }
}

