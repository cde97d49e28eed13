//! Exogenous parameters: demands, costs, capacities, lifetimes, availability
//! profiles, emission data, green-hydrogen inputs, and discounting.
//!
//! Internal units are fixed: MW and MWh for power, ton/h and ton for mass
//! commodities, tonnes of CO2 for emissions, EUR for money. Every input file
//! declares its unit per row and is converted at load; anything else is a
//! `UNIT_MISMATCH`.

use crate::dimensions::{ModelDimensions, TechKind, H2_PIPELINE, NG_PIPELINE, POWER};
use crate::scalar::Scalar;
use crate::table::{read_table, Table, Violation};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Present-value factor of investment period `i` (1-based):
/// `(1+r)^(-L(i-1))`. Equals 1 for the first period.
pub fn period_discount<S: Scalar>(period: usize, rate: S, years: u32) -> S {
    debug_assert!(period >= 1);
    (S::one() + rate).powi(-(years as i32) * (period as i32 - 1))
}

/// Same factor with the exponent sign of the printed objective, for
/// side-by-side comparison runs.
pub fn period_discount_literal<S: Scalar>(period: usize, rate: S, years: u32) -> S {
    debug_assert!(period >= 1);
    (S::one() + rate).powi((years as i32) * (period as i32 - 1))
}

/// Scaling and discounting of annual operational costs over one investment
/// period: `v = sum_{j=0}^{L-1} (1+r)^(-j)`.
pub fn operational_weight<S: Scalar>(rate: S, years: u32) -> S {
    let mut v = S::zero();
    for j in 0..years {
        v = v + (S::one() + rate).powi(-(j as i32));
    }
    v
}

/// Dense table over (node, period, scenario, hour).
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyTable<S> {
    pub nodes: usize,
    pub periods: usize,
    pub scenarios: usize,
    pub hours: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> HourlyTable<S> {
    pub fn filled(nodes: usize, periods: usize, scenarios: usize, hours: usize, v: S) -> Self {
        HourlyTable {
            nodes,
            periods,
            scenarios,
            hours,
            data: vec![v; nodes * periods * scenarios * hours],
        }
    }

    #[inline]
    pub fn idx(&self, n: usize, i: usize, w: usize, h: usize) -> usize {
        ((n * self.periods + i) * self.scenarios + w) * self.hours + h
    }

    #[inline]
    pub fn get(&self, n: usize, i: usize, w: usize, h: usize) -> S {
        self.data[self.idx(n, i, w, h)]
    }

    pub fn set(&mut self, n: usize, i: usize, w: usize, h: usize, v: S) {
        let k = self.idx(n, i, w, h);
        self.data[k] = v;
    }
}

/// Resource limit row: total production (source) or disposal (sink) budget
/// for one commodity at one node over the whole horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceLimit<S> {
    pub commodity: String,
    pub node: usize,
    pub kind: LimitKind,
    pub value: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore<S: Scalar> {
    pub discount_rate: S,
    /// Positive-exponent reading of the discount factor when set.
    pub discount_literal_exponent: bool,
    /// Repurposing cost factor (kappa) and flow factor (eta).
    pub repurpose_cost_factor: S,
    pub repurpose_flow_factor: S,
    /// Exogenous demand per commodity.
    pub demand: BTreeMap<String, HourlyTable<S>>,
    /// Hourly availability per VRES technology (others are identically 1).
    pub availability: BTreeMap<String, HourlyTable<S>>,
    /// Investment cost per asset and period, EUR per capacity unit.
    pub invest_cost: BTreeMap<String, Vec<S>>,
    /// Operational cost per production technology and period.
    pub op_cost: BTreeMap<String, Vec<S>>,
    /// Load-shed penalty per commodity, indexed `[node][period]`.
    pub shed_cost: BTreeMap<String, Vec<Vec<S>>>,
    /// Emission intensity per production technology.
    pub emission_intensity: BTreeMap<String, S>,
    /// Annual emission cap per period; None disables the cap rows.
    pub emission_cap: Option<Vec<S>>,
    /// Lifetime in periods per asset.
    pub lifetime: BTreeMap<String, usize>,
    /// Remaining initial capacity per production/storage tech, `[node][period]`.
    pub initial_capacity: BTreeMap<String, Vec<Vec<S>>>,
    /// Remaining initial transmission capacity per type and pair: per period.
    pub initial_transmission: BTreeMap<String, BTreeMap<(usize, usize), Vec<S>>>,
    pub resource_limits: Vec<ResourceLimit<S>>,
    /// Power drawn per ton of hydrogen, per electrolyzer technology.
    pub electrolyzer_power: BTreeMap<String, S>,
    /// Fixed annual hydrogen production per period, tonnes per year.
    pub fixed_hydrogen: Option<Vec<S>>,
    /// Seasonal energy budget per reservoir-hydro tech, `[node][season][scenario]`.
    pub hydro_budget: BTreeMap<String, Vec<S>>,
    /// Season scales (annualization multipliers), derived from dimensions.
    pub season_scale: Vec<S>,
}

impl<S: Scalar> ParameterStore<S> {
    pub fn empty(dims: &ModelDimensions<S>) -> Self {
        ParameterStore {
            discount_rate: S::zero(),
            discount_literal_exponent: false,
            repurpose_cost_factor: S::zero(),
            repurpose_flow_factor: S::zero(),
            demand: BTreeMap::new(),
            availability: BTreeMap::new(),
            invest_cost: BTreeMap::new(),
            op_cost: BTreeMap::new(),
            shed_cost: BTreeMap::new(),
            emission_intensity: BTreeMap::new(),
            emission_cap: None,
            lifetime: BTreeMap::new(),
            initial_capacity: BTreeMap::new(),
            initial_transmission: BTreeMap::new(),
            resource_limits: Vec::new(),
            electrolyzer_power: BTreeMap::new(),
            fixed_hydrogen: None,
            hydro_budget: BTreeMap::new(),
            season_scale: dims.season_scales(),
        }
    }

    /// Discount factor of a 0-based period index.
    pub fn discount(&self, period0: usize, years: u32) -> S {
        if self.discount_literal_exponent {
            period_discount_literal(period0 + 1, self.discount_rate, years)
        } else {
            period_discount(period0 + 1, self.discount_rate, years)
        }
    }

    pub fn weight(&self, years: u32) -> S {
        operational_weight(self.discount_rate, years)
    }

    pub fn hydro_budget_at(
        &self,
        tech: &str,
        node: usize,
        season: usize,
        scenario: usize,
        n_seasons: usize,
        n_scen: usize,
    ) -> S {
        self.hydro_budget
            .get(tech)
            .map(|v| v[(node * n_seasons + season) * n_scen + scenario])
            .unwrap_or(S::zero())
    }
}

// ---------------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------------

/// Dimension families for unit checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitFamily {
    PowerFlow,
    MassFlow,
    PowerEnergy,
    Mass,
    Fraction,
    EurPerPowerCap,
    EurPerEnergyCap,
    EurPerMassFlowCap,
    EurPerMassCap,
    EurPerMwh,
    EurPerTon,
    Emission,
    EmissionPerMwh,
    EmissionPerTon,
    MwhPerTon,
    MassPerYear,
    Periods,
}

/// Conversion factor from `unit` to the family's internal unit.
pub fn unit_factor(family: UnitFamily, unit: &str) -> Option<f64> {
    use UnitFamily::*;
    Some(match (family, unit) {
        (PowerFlow, "MW") | (PowerFlow, "MWh_per_h") => 1.0,
        (PowerFlow, "GW") => 1e3,
        (MassFlow, "ton_per_h") => 1.0,
        (MassFlow, "kt_per_h") => 1e3,
        (PowerEnergy, "MWh") => 1.0,
        (PowerEnergy, "GWh") => 1e3,
        (Mass, "ton") => 1.0,
        (Mass, "kt") => 1e3,
        (Mass, "Mt") => 1e6,
        (Fraction, "fraction") => 1.0,
        (Fraction, "percent") => 0.01,
        (EurPerPowerCap, "EUR_per_MW") => 1.0,
        (EurPerPowerCap, "MEUR_per_GW") => 1e3,
        (EurPerEnergyCap, "EUR_per_MWh") => 1.0,
        (EurPerMassFlowCap, "EUR_per_ton_per_h") => 1.0,
        (EurPerMassCap, "EUR_per_ton") => 1.0,
        (EurPerMwh, "EUR_per_MWh") => 1.0,
        (EurPerTon, "EUR_per_ton") => 1.0,
        (Emission, "tCO2") => 1.0,
        (Emission, "ktCO2") => 1e3,
        (Emission, "MtCO2") => 1e6,
        (EmissionPerMwh, "tCO2_per_MWh") => 1.0,
        (EmissionPerTon, "tCO2_per_ton") => 1.0,
        (MwhPerTon, "MWh_per_ton") => 1.0,
        (MassPerYear, "ton_per_yr") => 1.0,
        (MassPerYear, "kt_per_yr") => 1e3,
        (MassPerYear, "Mt_per_yr") => 1e6,
        (Periods, "periods") => 1.0,
        _ => return None,
    })
}

fn flow_family(commodity: &str) -> UnitFamily {
    if commodity == POWER {
        UnitFamily::PowerFlow
    } else {
        UnitFamily::MassFlow
    }
}

fn stock_family(commodity: &str) -> UnitFamily {
    if commodity == POWER {
        UnitFamily::PowerEnergy
    } else {
        UnitFamily::Mass
    }
}

fn per_unit_family(commodity: &str) -> UnitFamily {
    if commodity == POWER {
        UnitFamily::EurPerMwh
    } else {
        UnitFamily::EurPerTon
    }
}

fn capex_family(commodity: &str, class_storage: bool) -> UnitFamily {
    match (commodity == POWER, class_storage) {
        (true, false) => UnitFamily::EurPerPowerCap,
        (true, true) => UnitFamily::EurPerEnergyCap,
        (false, false) => UnitFamily::EurPerMassFlowCap,
        (false, true) => UnitFamily::EurPerMassCap,
    }
}

fn intensity_family(commodity: &str) -> UnitFamily {
    if commodity == POWER {
        UnitFamily::EmissionPerMwh
    } else {
        UnitFamily::EmissionPerTon
    }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Operational tables produced by the scenario sampler; they take precedence
/// over `demand.csv` / `availability.csv` / `hydro_budget.csv` entries for
/// the quantities they cover.
#[derive(Debug, Clone, Default)]
pub struct SampledTables<S> {
    pub demand: BTreeMap<String, HourlyTable<S>>,
    pub availability: BTreeMap<String, HourlyTable<S>>,
    pub hydro_budget: BTreeMap<String, Vec<S>>,
}

struct Loader<'a, S: Scalar> {
    dims: &'a ModelDimensions<S>,
    dir: &'a Path,
    issues: Vec<Violation>,
}

impl<'a, S: Scalar> Loader<'a, S> {
    fn push(&mut self, code: &'static str, ctx: String) {
        self.issues.push(Violation::new(code, ctx));
    }

    fn optional(&mut self, name: &str, header: &[&str]) -> Option<Table> {
        let path = self.dir.join(name);
        if !path.exists() {
            return None;
        }
        match read_table(&path, header) {
            Ok(t) => Some(t),
            Err(v) => {
                self.issues.push(v);
                None
            }
        }
    }

    fn required(&mut self, name: &str, header: &[&str]) -> Option<Table> {
        match read_table(&self.dir.join(name), header) {
            Ok(t) => Some(t),
            Err(v) => {
                self.issues.push(v);
                None
            }
        }
    }

    fn value(&mut self, t: &Table, line: usize, raw: &str, unit: &str, fam: UnitFamily) -> Option<S> {
        let v: f64 = match raw.parse() {
            Ok(v) => v,
            Err(_) => {
                self.push(
                    "PARSE_ERROR",
                    format!("{}:{line}: bad number {raw:?}", t.file),
                );
                return None;
            }
        };
        let factor = match unit_factor(fam, unit) {
            Some(f) => f,
            None => {
                self.push(
                    "UNIT_MISMATCH",
                    format!(
                        "{}:{line}: unit {unit:?} not valid for {fam:?}",
                        t.file
                    ),
                );
                return None;
            }
        };
        Some(S::from_f64_lit(v * factor))
    }

    fn nonneg(&mut self, t: &Table, line: usize, v: S, what: &str) -> S {
        if v < S::zero() {
            self.push(
                "NEGATIVE_VALUE",
                format!("{}:{line}: {what} is negative", t.file),
            );
        }
        v
    }

    fn node(&mut self, t: &Table, line: usize, name: &str) -> Option<usize> {
        match self.dims.nodes.iter().position(|n| n == name) {
            Some(i) => Some(i),
            None => {
                self.push(
                    "UNKNOWN_INDEX",
                    format!("{}:{line}: unknown node {name:?}", t.file),
                );
                None
            }
        }
    }

    /// Parses a 1-based index column that may be `*`.
    fn span(&mut self, t: &Table, line: usize, raw: &str, max: usize, what: &str) -> Option<Vec<usize>> {
        if raw == "*" {
            return Some((0..max).collect());
        }
        match raw.parse::<usize>() {
            Ok(v) if v >= 1 && v <= max => Some(vec![v - 1]),
            _ => {
                self.push(
                    "UNKNOWN_INDEX",
                    format!("{}:{line}: {what} {raw:?} out of range 1..={max}", t.file),
                );
                None
            }
        }
    }

    /// Same for 0-based hours.
    fn hour_span(&mut self, t: &Table, line: usize, raw: &str, max: usize) -> Option<Vec<usize>> {
        if raw == "*" {
            return Some((0..max).collect());
        }
        match raw.parse::<usize>() {
            Ok(v) if v < max => Some(vec![v]),
            _ => {
                self.push(
                    "UNKNOWN_INDEX",
                    format!("{}:{line}: hour {raw:?} out of range 0..{max}", t.file),
                );
                None
            }
        }
    }
}

/// Loads every exogenous symbol required by the active constraint set,
/// reporting each missing entry with its full index path. Deterministic:
/// identical directory bytes yield identical stores.
pub fn load_parameters<S: Scalar>(
    data_dir: &Path,
    dims: &ModelDimensions<S>,
    sampled: Option<&SampledTables<S>>,
) -> Result<ParameterStore<S>, Vec<Violation>> {
    let mut ld = Loader {
        dims,
        dir: data_dir,
        issues: Vec::new(),
    };
    let mut store = ParameterStore::empty(dims);

    let n_nodes = dims.nodes.len();
    let n_periods = dims.periods;
    let n_scen = dims.n_scenarios();
    let n_hours = dims.total_hours();
    let n_seasons = dims.seasons.len();

    // ---- hourly tables: demand ------------------------------------------
    // Sampled tables win; CSV fills the rest. Wildcards (`*`) act as
    // defaults, explicit rows override them, duplicate explicit rows are
    // rejected.
    let mut demand_opt: BTreeMap<String, Vec<Option<S>>> = BTreeMap::new();
    for c in &dims.commodities {
        demand_opt.insert(c.name.clone(), vec![None; n_nodes * n_periods * n_scen * n_hours]);
    }
    let shape = HourlyTable::<S>::filled(n_nodes, n_periods, n_scen, n_hours, S::zero());
    if let Some(t) = ld.optional(
        "demand.csv",
        &["commodity", "node", "period", "scenario", "hour", "value", "unit"],
    ) {
        let mut explicit: BTreeSet<(String, usize, usize, usize, usize)> = BTreeSet::new();
        // Defaults first, then explicit rows.
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[2] == "*" || f[3] == "*" || f[4] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(table) = demand_opt.get_mut(&f[0]) else {
                    if pass == 1 || wildcard {
                        ld.push(
                            "UNKNOWN_INDEX",
                            format!("{}:{line}: unknown commodity {:?}", t.file, f[0]),
                        );
                    }
                    continue;
                };
                let fam = flow_family(&f[0]);
                let Some(n) = ld.node(&t, *line, &f[1]) else { continue };
                let Some(ps) = ld.span(&t, *line, &f[2], n_periods, "period") else { continue };
                let Some(ws) = ld.span(&t, *line, &f[3], n_scen, "scenario") else { continue };
                let Some(hs) = ld.hour_span(&t, *line, &f[4], n_hours) else { continue };
                let Some(v) = ld.value(&t, *line, &f[5], &f[6], fam) else { continue };
                let v = ld.nonneg(&t, *line, v, "demand");
                for &i in &ps {
                    for &w in &ws {
                        for &h in &hs {
                            if !wildcard
                                && !explicit.insert((f[0].clone(), n, i, w, h))
                            {
                                ld.push(
                                    "DUPLICATE_ENTRY",
                                    format!(
                                        "{}:{line}: demand ({}, {}, i={}, w={}, h={h}) assigned twice",
                                        t.file, f[0], dims.nodes[n], i + 1, w + 1
                                    ),
                                );
                            }
                            table[shape.idx(n, i, w, h)] = Some(v);
                        }
                    }
                }
            }
        }
    }
    // Sampler overrides.
    if let Some(s) = sampled {
        for (c, table) in &s.demand {
            if let Some(dst) = demand_opt.get_mut(c) {
                for (k, v) in table.data.iter().enumerate() {
                    dst[k] = Some(*v);
                }
            } else {
                ld.push(
                    "UNKNOWN_INDEX",
                    format!("sampled demand for unknown commodity {c:?}"),
                );
            }
        }
    }
    for (c, vals) in demand_opt {
        let mut out = HourlyTable::filled(n_nodes, n_periods, n_scen, n_hours, S::zero());
        for n in 0..n_nodes {
            for i in 0..n_periods {
                for w in 0..n_scen {
                    for h in 0..n_hours {
                        match vals[out.idx(n, i, w, h)] {
                            Some(v) => out.set(n, i, w, h, v),
                            None => ld.push(
                                "MISSING_PARAMETER",
                                format!(
                                    "demand({c}, {}, i={}, w={}, h={h})",
                                    dims.nodes[n],
                                    i + 1,
                                    w + 1
                                ),
                            ),
                        }
                    }
                }
            }
        }
        store.demand.insert(c, out);
    }

    // ---- availability -----------------------------------------------------
    let vres_techs: Vec<(String, Vec<usize>)> = dims
        .all_producers()
        .filter(|(_, t)| t.kind == TechKind::Vres)
        .map(|(_, t)| (t.name.clone(), t.nodes.iter().map(|n| n.0).collect()))
        .collect();
    let mut avail_opt: BTreeMap<String, Vec<Option<S>>> = BTreeMap::new();
    for (name, _) in &vres_techs {
        avail_opt.insert(name.clone(), vec![None; n_nodes * n_periods * n_scen * n_hours]);
    }
    if let Some(t) = ld.optional(
        "availability.csv",
        &["technology", "node", "period", "scenario", "hour", "value", "unit"],
    ) {
        let mut explicit: BTreeSet<(String, usize, usize, usize, usize)> = BTreeSet::new();
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[2] == "*" || f[3] == "*" || f[4] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(table) = avail_opt.get_mut(&f[0]) else {
                    if pass == 1 || wildcard {
                        ld.push(
                            "UNKNOWN_INDEX",
                            format!(
                                "{}:{line}: availability for non-VRES or unknown technology {:?}",
                                t.file, f[0]
                            ),
                        );
                    }
                    continue;
                };
                let Some(n) = ld.node(&t, *line, &f[1]) else { continue };
                let Some(ps) = ld.span(&t, *line, &f[2], n_periods, "period") else { continue };
                let Some(ws) = ld.span(&t, *line, &f[3], n_scen, "scenario") else { continue };
                let Some(hs) = ld.hour_span(&t, *line, &f[4], n_hours) else { continue };
                let Some(v) = ld.value(&t, *line, &f[5], &f[6], UnitFamily::Fraction) else {
                    continue;
                };
                if v < S::zero() || v > S::one() {
                    ld.push(
                        "NEGATIVE_VALUE",
                        format!("{}:{line}: availability outside [0,1]", t.file),
                    );
                }
                for &i in &ps {
                    for &w in &ws {
                        for &h in &hs {
                            if !wildcard && !explicit.insert((f[0].clone(), n, i, w, h)) {
                                ld.push(
                                    "DUPLICATE_ENTRY",
                                    format!(
                                        "{}:{line}: availability ({}, {}, i={}, w={}, h={h}) assigned twice",
                                        t.file, f[0], dims.nodes[n], i + 1, w + 1
                                    ),
                                );
                            }
                            table[shape.idx(n, i, w, h)] = Some(v);
                        }
                    }
                }
            }
        }
    }
    if let Some(s) = sampled {
        for (g, table) in &s.availability {
            if let Some(dst) = avail_opt.get_mut(g) {
                for (k, v) in table.data.iter().enumerate() {
                    dst[k] = Some(*v);
                }
            } else {
                ld.push(
                    "UNKNOWN_INDEX",
                    format!("sampled availability for unknown VRES technology {g:?}"),
                );
            }
        }
    }
    for (g, present_nodes) in &vres_techs {
        let vals = avail_opt.remove(g).expect("registered");
        let mut out = HourlyTable::filled(n_nodes, n_periods, n_scen, n_hours, S::one());
        for &n in present_nodes {
            for i in 0..n_periods {
                for w in 0..n_scen {
                    for h in 0..n_hours {
                        match vals[out.idx(n, i, w, h)] {
                            Some(v) => out.set(n, i, w, h, v),
                            None => ld.push(
                                "MISSING_PARAMETER",
                                format!(
                                    "availability({g}, {}, i={}, w={}, h={h})",
                                    dims.nodes[n],
                                    i + 1,
                                    w + 1
                                ),
                            ),
                        }
                    }
                }
            }
        }
        store.availability.insert(g.clone(), out);
    }

    // ---- scalar parameters -------------------------------------------------
    let repurposing_active = {
        let ng_pairs: BTreeSet<(usize, usize)> = dims
            .all_transmissions()
            .filter(|(_, t)| t.name == NG_PIPELINE)
            .flat_map(|(_, t)| t.pairs().into_iter().map(|(a, b)| (a.0, b.0)))
            .collect();
        let h2_pairs: BTreeSet<(usize, usize)> = dims
            .all_transmissions()
            .filter(|(_, t)| t.name == H2_PIPELINE)
            .flat_map(|(_, t)| t.pairs().into_iter().map(|(a, b)| (a.0, b.0)))
            .collect();
        ng_pairs.intersection(&h2_pairs).next().is_some()
    };
    {
        let mut seen: BTreeMap<String, S> = BTreeMap::new();
        if let Some(t) = ld.required("scalars.csv", &["name", "value", "unit"]) {
            for (line, f) in &t.rows {
                let Some(v) = ld.value(&t, *line, &f[1], &f[2], UnitFamily::Fraction) else {
                    continue;
                };
                if seen.insert(f[0].clone(), v).is_some() {
                    ld.push(
                        "DUPLICATE_ENTRY",
                        format!("{}:{line}: scalar {:?} assigned twice", t.file, f[0]),
                    );
                }
            }
        }
        match seen.get("discount_rate") {
            Some(&r) => {
                if r <= -S::one() {
                    ld.push("NEGATIVE_VALUE", "discount_rate must exceed -1".into());
                }
                store.discount_rate = r;
            }
            None => ld.push("MISSING_PARAMETER", "scalar discount_rate".into()),
        }
        match (seen.get("repurpose_cost_factor"), repurposing_active) {
            (Some(&v), _) => store.repurpose_cost_factor = v,
            (None, true) => ld.push("MISSING_PARAMETER", "scalar repurpose_cost_factor".into()),
            (None, false) => {}
        }
        match (seen.get("repurpose_flow_factor"), repurposing_active) {
            (Some(&v), _) => store.repurpose_flow_factor = v,
            (None, true) => ld.push("MISSING_PARAMETER", "scalar repurpose_flow_factor".into()),
            (None, false) => {}
        }
    }

    // ---- investment, operational, shed costs --------------------------------
    if let Some(t) = ld.optional("invest_cost.csv", &["asset", "period", "value", "unit"]) {
        let mut families: BTreeMap<String, UnitFamily> = BTreeMap::new();
        for c in &dims.commodities {
            for tech in &c.producers {
                families.insert(tech.name.clone(), capex_family(&c.name, false));
            }
            for tech in &c.storages {
                families.insert(tech.name.clone(), capex_family(&c.name, true));
            }
            for tech in &c.transmissions {
                families.insert(tech.name.clone(), capex_family(&c.name, false));
            }
        }
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[1] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(&fam) = families.get(&f[0]) else {
                    ld.push(
                        "UNKNOWN_INDEX",
                        format!("{}:{line}: unknown asset {:?}", t.file, f[0]),
                    );
                    continue;
                };
                let Some(ps) = ld.span(&t, *line, &f[1], n_periods, "period") else { continue };
                let Some(v) = ld.value(&t, *line, &f[2], &f[3], fam) else { continue };
                let v = ld.nonneg(&t, *line, v, "investment cost");
                let entry = store
                    .invest_cost
                    .entry(f[0].clone())
                    .or_insert_with(|| vec![S::nan(); n_periods]);
                for &i in &ps {
                    entry[i] = v;
                }
            }
        }
    }
    for (_, tech) in dims
        .all_producers()
        .chain(dims.all_storages())
        .chain(dims.all_transmissions())
    {
        if !tech.investable {
            continue;
        }
        match store.invest_cost.get(&tech.name) {
            None => ld.push(
                "MISSING_PARAMETER",
                format!("invest_cost({}, all periods)", tech.name),
            ),
            Some(v) => {
                for (i, x) in v.iter().enumerate() {
                    if x.is_nan() {
                        ld.push(
                            "MISSING_PARAMETER",
                            format!("invest_cost({}, i={})", tech.name, i + 1),
                        );
                    }
                }
            }
        }
    }

    if let Some(t) = ld.optional("op_cost.csv", &["technology", "period", "value", "unit"]) {
        let mut families: BTreeMap<String, UnitFamily> = BTreeMap::new();
        for (c, tech) in dims.all_producers() {
            families.insert(tech.name.clone(), per_unit_family(&c.name));
        }
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[1] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(&fam) = families.get(&f[0]) else {
                    ld.push(
                        "UNKNOWN_INDEX",
                        format!("{}:{line}: unknown production technology {:?}", t.file, f[0]),
                    );
                    continue;
                };
                let Some(ps) = ld.span(&t, *line, &f[1], n_periods, "period") else { continue };
                let Some(v) = ld.value(&t, *line, &f[2], &f[3], fam) else { continue };
                let v = ld.nonneg(&t, *line, v, "operational cost");
                let entry = store
                    .op_cost
                    .entry(f[0].clone())
                    .or_insert_with(|| vec![S::nan(); n_periods]);
                for &i in &ps {
                    entry[i] = v;
                }
            }
        }
    }
    for (_, tech) in dims.all_producers() {
        match store.op_cost.get(&tech.name) {
            None => ld.push(
                "MISSING_PARAMETER",
                format!("op_cost({}, all periods)", tech.name),
            ),
            Some(v) => {
                for (i, x) in v.iter().enumerate() {
                    if x.is_nan() {
                        ld.push(
                            "MISSING_PARAMETER",
                            format!("op_cost({}, i={})", tech.name, i + 1),
                        );
                    }
                }
            }
        }
    }

    if let Some(t) = ld.optional(
        "shed_cost.csv",
        &["commodity", "node", "period", "value", "unit"],
    ) {
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[1] == "*" || f[2] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                if dims.commodity(&f[0]).is_none() {
                    ld.push(
                        "UNKNOWN_INDEX",
                        format!("{}:{line}: unknown commodity {:?}", t.file, f[0]),
                    );
                    continue;
                }
                let ns: Vec<usize> = if f[1] == "*" {
                    (0..n_nodes).collect()
                } else {
                    match ld.node(&t, *line, &f[1]) {
                        Some(n) => vec![n],
                        None => continue,
                    }
                };
                let Some(ps) = ld.span(&t, *line, &f[2], n_periods, "period") else { continue };
                let Some(v) = ld.value(&t, *line, &f[3], &f[4], per_unit_family(&f[0])) else {
                    continue;
                };
                let v = ld.nonneg(&t, *line, v, "shed cost");
                let entry = store
                    .shed_cost
                    .entry(f[0].clone())
                    .or_insert_with(|| vec![vec![S::nan(); n_periods]; n_nodes]);
                for &n in &ns {
                    for &i in &ps {
                        entry[n][i] = v;
                    }
                }
            }
        }
    }
    for c in &dims.commodities {
        match store.shed_cost.get(&c.name) {
            None => ld.push(
                "MISSING_PARAMETER",
                format!("shed_cost({}, all nodes and periods)", c.name),
            ),
            Some(grid) => {
                for (n, row) in grid.iter().enumerate() {
                    for (i, x) in row.iter().enumerate() {
                        if x.is_nan() {
                            ld.push(
                                "MISSING_PARAMETER",
                                format!("shed_cost({}, {}, i={})", c.name, dims.nodes[n], i + 1),
                            );
                        }
                    }
                }
            }
        }
    }

    // ---- emissions ----------------------------------------------------------
    if let Some(t) = ld.optional("emission_cap.csv", &["period", "value", "unit"]) {
        let mut cap = vec![S::nan(); n_periods];
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[0] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(ps) = ld.span(&t, *line, &f[0], n_periods, "period") else { continue };
                let Some(v) = ld.value(&t, *line, &f[1], &f[2], UnitFamily::Emission) else {
                    continue;
                };
                let v = ld.nonneg(&t, *line, v, "emission cap");
                for &i in &ps {
                    cap[i] = v;
                }
            }
        }
        for (i, x) in cap.iter().enumerate() {
            if x.is_nan() {
                ld.push("MISSING_PARAMETER", format!("emission_cap(i={})", i + 1));
            }
        }
        store.emission_cap = Some(cap);
    }
    if let Some(t) = ld.optional("emission_intensity.csv", &["technology", "value", "unit"]) {
        let mut families: BTreeMap<String, UnitFamily> = BTreeMap::new();
        for (c, tech) in dims.all_producers() {
            families.insert(tech.name.clone(), intensity_family(&c.name));
        }
        for (line, f) in &t.rows {
            let Some(&fam) = families.get(&f[0]) else {
                ld.push(
                    "UNKNOWN_INDEX",
                    format!("{}:{line}: unknown production technology {:?}", t.file, f[0]),
                );
                continue;
            };
            let Some(v) = ld.value(&t, *line, &f[1], &f[2], fam) else { continue };
            let v = ld.nonneg(&t, *line, v, "emission intensity");
            if store.emission_intensity.insert(f[0].clone(), v).is_some() {
                ld.push(
                    "DUPLICATE_ENTRY",
                    format!("{}:{line}: intensity for {:?} assigned twice", t.file, f[0]),
                );
            }
        }
    }
    if store.emission_cap.is_some() {
        for (_, tech) in dims.all_producers() {
            if !store.emission_intensity.contains_key(&tech.name) {
                ld.push(
                    "MISSING_PARAMETER",
                    format!("emission_intensity({})", tech.name),
                );
            }
        }
    }

    // ---- lifetimes ------------------------------------------------------------
    if let Some(t) = ld.optional("lifetime.csv", &["asset", "value", "unit"]) {
        for (line, f) in &t.rows {
            if f[2] != "periods" {
                ld.push(
                    "UNIT_MISMATCH",
                    format!("{}:{line}: lifetime unit must be 'periods'", t.file),
                );
                continue;
            }
            match f[1].parse::<usize>() {
                Ok(v) if v >= 1 => {
                    if store.lifetime.insert(f[0].clone(), v).is_some() {
                        ld.push(
                            "DUPLICATE_ENTRY",
                            format!("{}:{line}: lifetime of {:?} assigned twice", t.file, f[0]),
                        );
                    }
                }
                _ => ld.push(
                    "NEGATIVE_VALUE",
                    format!("{}:{line}: lifetime must be a positive integer", t.file),
                ),
            }
        }
    }
    for (_, tech) in dims
        .all_producers()
        .chain(dims.all_storages())
        .chain(dims.all_transmissions())
    {
        let needed = tech.investable || (tech.name == H2_PIPELINE && repurposing_active);
        if needed && !store.lifetime.contains_key(&tech.name) {
            ld.push("MISSING_PARAMETER", format!("lifetime({})", tech.name));
        }
    }

    // ---- initial capacities ------------------------------------------------
    if let Some(t) = ld.optional(
        "initial_capacity.csv",
        &["technology", "node", "period", "value", "unit"],
    ) {
        let mut families: BTreeMap<String, (UnitFamily, bool)> = BTreeMap::new();
        for (c, tech) in dims.all_producers() {
            families.insert(tech.name.clone(), (flow_family(&c.name), false));
        }
        for (c, tech) in dims.all_storages() {
            families.insert(tech.name.clone(), (stock_family(&c.name), true));
        }
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[2] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(&(fam, _)) = families.get(&f[0]) else {
                    ld.push(
                        "UNKNOWN_INDEX",
                        format!("{}:{line}: unknown technology {:?}", t.file, f[0]),
                    );
                    continue;
                };
                let Some(n) = ld.node(&t, *line, &f[1]) else { continue };
                let Some(ps) = ld.span(&t, *line, &f[2], n_periods, "period") else { continue };
                let Some(v) = ld.value(&t, *line, &f[3], &f[4], fam) else { continue };
                let v = ld.nonneg(&t, *line, v, "initial capacity");
                let entry = store
                    .initial_capacity
                    .entry(f[0].clone())
                    .or_insert_with(|| vec![vec![S::zero(); n_periods]; n_nodes]);
                for &i in &ps {
                    entry[n][i] = v;
                }
            }
        }
    }

    if let Some(t) = ld.optional(
        "initial_transmission.csv",
        &["transmission_type", "from", "to", "period", "value", "unit"],
    ) {
        let mut families: BTreeMap<String, UnitFamily> = BTreeMap::new();
        for (c, tech) in dims.all_transmissions() {
            families.insert(tech.name.clone(), flow_family(&c.name));
        }
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[3] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(&fam) = families.get(&f[0]) else {
                    ld.push(
                        "UNKNOWN_INDEX",
                        format!("{}:{line}: unknown transmission type {:?}", t.file, f[0]),
                    );
                    continue;
                };
                let (Some(a), Some(b)) = (ld.node(&t, *line, &f[1]), ld.node(&t, *line, &f[2]))
                else {
                    continue;
                };
                let pair = (a.min(b), a.max(b));
                let Some(ps) = ld.span(&t, *line, &f[3], n_periods, "period") else { continue };
                let Some(v) = ld.value(&t, *line, &f[4], &f[5], fam) else { continue };
                let v = ld.nonneg(&t, *line, v, "initial transmission capacity");
                let entry = store
                    .initial_transmission
                    .entry(f[0].clone())
                    .or_default()
                    .entry(pair)
                    .or_insert_with(|| vec![S::zero(); n_periods]);
                for &i in &ps {
                    entry[i] = v;
                }
            }
        }
    }
    // The natural-gas pipeline grid is frozen: no investments, no
    // depreciation, so its initial capacity must be constant over periods.
    if let Some(pairs) = store.initial_transmission.get(NG_PIPELINE) {
        for (pair, caps) in pairs {
            if caps.iter().any(|v| *v != caps[0]) {
                ld.push(
                    "INVALID_VALUE",
                    format!(
                        "initial_transmission({NG_PIPELINE}, {}-{}) must be constant over periods",
                        dims.nodes[pair.0], dims.nodes[pair.1]
                    ),
                );
            }
        }
    }

    // ---- resource limits -----------------------------------------------------
    if let Some(t) = ld.optional(
        "resource_limit.csv",
        &["commodity", "node", "kind", "value", "unit"],
    ) {
        for (line, f) in &t.rows {
            if dims.commodity(&f[0]).is_none() {
                ld.push(
                    "UNKNOWN_INDEX",
                    format!("{}:{line}: unknown commodity {:?}", t.file, f[0]),
                );
                continue;
            }
            let Some(n) = ld.node(&t, *line, &f[1]) else { continue };
            let kind = match f[2].as_str() {
                "source" => LimitKind::Source,
                "sink" => LimitKind::Sink,
                other => {
                    ld.push(
                        "PARSE_ERROR",
                        format!("{}:{line}: kind must be source/sink, got {other:?}", t.file),
                    );
                    continue;
                }
            };
            let Some(v) = ld.value(&t, *line, &f[3], &f[4], UnitFamily::Mass) else { continue };
            let v = ld.nonneg(&t, *line, v, "resource limit");
            store.resource_limits.push(ResourceLimit {
                commodity: f[0].clone(),
                node: n,
                kind,
                value: v,
            });
        }
    }

    // ---- electrolyzer power, fixed hydrogen ------------------------------------
    if let Some(t) = ld.optional("electrolyzer_power.csv", &["technology", "value", "unit"]) {
        for (line, f) in &t.rows {
            let Some(v) = ld.value(&t, *line, &f[1], &f[2], UnitFamily::MwhPerTon) else {
                continue;
            };
            if v <= S::zero() {
                ld.push(
                    "NEGATIVE_VALUE",
                    format!("{}:{line}: electrolyzer power must be positive", t.file),
                );
            }
            if store.electrolyzer_power.insert(f[0].clone(), v).is_some() {
                ld.push(
                    "DUPLICATE_ENTRY",
                    format!("{}:{line}: power for {:?} assigned twice", t.file, f[0]),
                );
            }
        }
    }
    let electrolyzers: Vec<String> = dims.electrolyzers().iter().map(|t| t.name.clone()).collect();
    for e in &electrolyzers {
        if !store.electrolyzer_power.contains_key(e) {
            ld.push("MISSING_PARAMETER", format!("electrolyzer_power({e})"));
        }
    }

    if let Some(t) = ld.optional("fixed_hydrogen.csv", &["period", "value", "unit"]) {
        let mut h = vec![S::nan(); n_periods];
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[0] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(ps) = ld.span(&t, *line, &f[0], n_periods, "period") else { continue };
                let Some(v) = ld.value(&t, *line, &f[1], &f[2], UnitFamily::MassPerYear) else {
                    continue;
                };
                let v = ld.nonneg(&t, *line, v, "fixed hydrogen production");
                for &i in &ps {
                    h[i] = v;
                }
            }
        }
        for (i, x) in h.iter().enumerate() {
            if x.is_nan() {
                ld.push("MISSING_PARAMETER", format!("fixed_hydrogen(i={})", i + 1));
            }
        }
        store.fixed_hydrogen = Some(h);
    } else if !electrolyzers.is_empty() {
        ld.push(
            "MISSING_PARAMETER",
            "fixed_hydrogen.csv (required when electrolyzers exist)".into(),
        );
    }

    // ---- hydro budgets ----------------------------------------------------------
    let hydro_techs: Vec<(String, Vec<usize>)> = dims
        .all_producers()
        .filter(|(_, t)| t.kind == TechKind::HydroReservoir)
        .map(|(_, t)| (t.name.clone(), t.nodes.iter().map(|n| n.0).collect()))
        .collect();
    let mut budget_opt: BTreeMap<String, Vec<Option<S>>> = BTreeMap::new();
    for (name, _) in &hydro_techs {
        budget_opt.insert(name.clone(), vec![None; n_nodes * n_seasons * n_scen]);
    }
    if let Some(t) = ld.optional(
        "hydro_budget.csv",
        &["technology", "node", "season", "scenario", "value", "unit"],
    ) {
        for pass in 0..2 {
            for (line, f) in &t.rows {
                let wildcard = f[2] == "*" || f[3] == "*";
                if (pass == 0) != wildcard {
                    continue;
                }
                let Some(table) = budget_opt.get_mut(&f[0]) else {
                    ld.push(
                        "UNKNOWN_INDEX",
                        format!("{}:{line}: unknown reservoir technology {:?}", t.file, f[0]),
                    );
                    continue;
                };
                let Some(n) = ld.node(&t, *line, &f[1]) else { continue };
                let Some(ss) = ld.span(&t, *line, &f[2], n_seasons, "season") else { continue };
                let Some(ws) = ld.span(&t, *line, &f[3], n_scen, "scenario") else { continue };
                let Some(v) = ld.value(&t, *line, &f[4], &f[5], UnitFamily::PowerEnergy) else {
                    continue;
                };
                let v = ld.nonneg(&t, *line, v, "hydro budget");
                for &s in &ss {
                    for &w in &ws {
                        table[(n * n_seasons + s) * n_scen + w] = Some(v);
                    }
                }
            }
        }
    }
    if let Some(sampled) = sampled {
        for (tech, vals) in &sampled.hydro_budget {
            if let Some(dst) = budget_opt.get_mut(tech) {
                for (k, v) in vals.iter().enumerate() {
                    dst[k] = Some(*v);
                }
            }
        }
    }
    for (tech, nodes) in &hydro_techs {
        let vals = budget_opt.remove(tech).expect("registered");
        let mut out = vec![S::zero(); n_nodes * n_seasons * n_scen];
        for &n in nodes {
            for s in 0..n_seasons {
                for w in 0..n_scen {
                    match vals[(n * n_seasons + s) * n_scen + w] {
                        Some(v) => out[(n * n_seasons + s) * n_scen + w] = v,
                        None => ld.push(
                            "MISSING_PARAMETER",
                            format!(
                                "hydro_budget({tech}, {}, s={}, w={})",
                                dims.nodes[n],
                                s + 1,
                                w + 1
                            ),
                        ),
                    }
                }
            }
        }
        store.hydro_budget.insert(tech.clone(), out);
    }

    if ld.issues.is_empty() {
        Ok(store)
    } else {
        Err(ld.issues)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_period_discount_is_one() {
        assert_eq!(period_discount(1, 0.05f64, 3), 1.0);
    }

    #[test]
    fn second_period_discount_five_percent() {
        // 1.05^-3 evaluated independently: 1/(1.05*1.05*1.05).
        let expected = 1.0 / (1.05f64 * 1.05 * 1.05);
        let got = period_discount(2, 0.05f64, 3);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.863837598531476).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_discount_is_one() {
        assert_eq!(period_discount(2, 0.0f64, 3), 1.0);
    }

    #[test]
    fn operational_weight_zero_rate_sums_years() {
        assert_eq!(operational_weight(0.0f64, 3), 3.0);
    }

    #[test]
    fn operational_weight_five_percent() {
        // Independent geometric series: 1 + 1/1.05 + 1/1.05^2.
        let expected = 1.0 + 1.0 / 1.05 + 1.0 / (1.05 * 1.05);
        let got = operational_weight(0.05f64, 3);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 2.859410430839002).abs() < 1e-12);
    }

    #[test]
    fn operational_weight_single_year() {
        assert_eq!(operational_weight(0.05f64, 1), 1.0);
    }

    #[test]
    fn weight_geometric_identity() {
        // v*(1 - (1+r)^-1) = 1 - (1+r)^-L for a range of rates and lengths.
        for &r in &[0.0123f64, 0.05, 0.2, 1.5] {
            for years in 1..=12u32 {
                let v = operational_weight(r, years);
                let lhs = v * (1.0 - (1.0 + r).powi(-1));
                let rhs = 1.0 - (1.0 + r).powi(-(years as i32));
                assert!((lhs - rhs).abs() < 1e-12, "r={r} L={years}");
            }
        }
    }

    #[test]
    fn discount_strictly_decreasing_for_positive_rate() {
        let mut prev = period_discount(1, 0.07f64, 2);
        for i in 2..=10 {
            let d = period_discount(i, 0.07f64, 2);
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn unit_conversions() {
        assert_eq!(unit_factor(UnitFamily::Mass, "Mt"), Some(1e6));
        assert_eq!(unit_factor(UnitFamily::Fraction, "percent"), Some(0.01));
        assert_eq!(unit_factor(UnitFamily::PowerFlow, "GW"), Some(1e3));
        assert_eq!(unit_factor(UnitFamily::PowerFlow, "ton_per_h"), None);
    }
}
