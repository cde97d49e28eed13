//! Programmatic construction of desk-scale instances: a fluent builder plus
//! the seeded random three-node system used across the test suites.

use crate::dimensions::{
    Commodity, ModelDimensions, NodeId, Season, TechClass, TechKind, Technology,
    ELECTROLYSIS_SINK, H2_PIPELINE, HYDROGEN, NATURAL_GAS, NG_PIPELINE, POWER,
};
use crate::params::{HourlyTable, LimitKind, ParameterStore, ResourceLimit};
use crate::scalar::Scalar;
use crate::scenario::SplitMix64;
use std::collections::BTreeSet;

/// In-memory instance builder. Everything is specified in internal units
/// (MW, MWh, ton/h, ton, EUR, tCO2).
pub struct Builder<S: Scalar> {
    dims: ModelDimensions<S>,
    params: ParameterStore<S>,
}

impl<S: Scalar> Builder<S> {
    pub fn new(nodes: &[&str], periods: usize, period_years: u32, scenarios: usize) -> Self {
        let dims = ModelDimensions {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            periods,
            period_length_years: period_years,
            seasons: Vec::new(),
            probabilities: {
                let p = S::one() / S::from_f64_lit(scenarios as f64);
                vec![p; scenarios]
            },
            commodities: Vec::new(),
            exempt: BTreeSet::new(),
        };
        let params = ParameterStore::empty(&dims);
        Builder { dims, params }
    }

    pub fn season(mut self, name: &str, hours: usize, represented: f64) -> Self {
        self.dims.seasons.push(Season {
            name: name.into(),
            hours,
            represented_hours: represented,
            pool_offset: 0,
            pool_hours: represented.max(hours as f64) as usize,
        });
        self
    }

    pub fn discount_rate(mut self, r: f64) -> Self {
        self.params.discount_rate = S::from_f64_lit(r);
        self
    }

    pub fn exempt(mut self, node: &str, period0: usize) -> Self {
        let n = self.node(node);
        self.dims.exempt.insert((n, period0));
        self
    }

    fn node(&self, name: &str) -> usize {
        self.dims
            .nodes
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("unknown node {name}"))
    }

    fn commodity_mut(&mut self, name: &str) -> &mut Commodity {
        if !self.dims.commodities.iter().any(|c| c.name == name) {
            self.dims.commodities.push(Commodity {
                name: name.into(),
                producers: Vec::new(),
                storages: Vec::new(),
                transmissions: Vec::new(),
                sinks: Vec::new(),
            });
        }
        self.dims
            .commodities
            .iter_mut()
            .find(|c| c.name == name)
            .unwrap()
    }

    pub fn tech(
        mut self,
        commodity: &str,
        class: TechClass,
        name: &str,
        kind: TechKind,
        investable: bool,
        nodes: &[&str],
    ) -> Self {
        let ids: Vec<NodeId> = nodes.iter().map(|n| NodeId(self.node(n))).collect();
        let tech = Technology {
            name: name.into(),
            kind,
            investable,
            nodes: ids,
            arcs: Vec::new(),
        };
        let c = self.commodity_mut(commodity);
        match class {
            TechClass::Production => c.producers.push(tech),
            TechClass::Storage => c.storages.push(tech),
            TechClass::Transmission => c.transmissions.push(tech),
            TechClass::Sink => c.sinks.push(tech),
        }
        self
    }

    pub fn arc(mut self, commodity: &str, ttype: &str, a: &str, b: &str) -> Self {
        let (a, b) = (NodeId(self.node(a)), NodeId(self.node(b)));
        let c = self.commodity_mut(commodity);
        let t = c
            .transmissions
            .iter_mut()
            .find(|t| t.name == ttype)
            .unwrap_or_else(|| panic!("unknown transmission {ttype}"));
        t.arcs.push((a, b));
        t.arcs.push((b, a));
        self
    }

    pub fn invest_cost(mut self, asset: &str, per_period: &[f64]) -> Self {
        self.params.invest_cost.insert(
            asset.into(),
            per_period.iter().map(|&v| S::from_f64_lit(v)).collect(),
        );
        self
    }

    pub fn op_cost(mut self, tech: &str, per_period: &[f64]) -> Self {
        self.params.op_cost.insert(
            tech.into(),
            per_period.iter().map(|&v| S::from_f64_lit(v)).collect(),
        );
        self
    }

    pub fn lifetime(mut self, asset: &str, periods: usize) -> Self {
        self.params.lifetime.insert(asset.into(), periods);
        self
    }

    pub fn shed_cost(mut self, commodity: &str, value: f64) -> Self {
        let grid = vec![vec![S::from_f64_lit(value); self.dims.periods]; self.dims.nodes.len()];
        self.params.shed_cost.insert(commodity.into(), grid);
        self
    }

    pub fn flat_demand(mut self, commodity: &str, node: &str, value: f64) -> Self {
        let n = self.node(node);
        let table = self.demand_table(commodity);
        for i in 0..table.periods {
            for w in 0..table.scenarios {
                for h in 0..table.hours {
                    table.set(n, i, w, h, S::from_f64_lit(value));
                }
            }
        }
        self
    }

    pub fn demand_profile(
        mut self,
        commodity: &str,
        node: &str,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Self {
        let n = self.node(node);
        let table = self.demand_table(commodity);
        for i in 0..table.periods {
            for w in 0..table.scenarios {
                for h in 0..table.hours {
                    table.set(n, i, w, h, S::from_f64_lit(f(i, w, h)));
                }
            }
        }
        self
    }

    fn demand_table(&mut self, commodity: &str) -> &mut HourlyTable<S> {
        let nodes = self.dims.nodes.len();
        let (p, w, h) = (
            self.dims.periods,
            self.dims.n_scenarios(),
            self.dims.total_hours(),
        );
        self.params
            .demand
            .entry(commodity.to_string())
            .or_insert_with(|| HourlyTable::filled(nodes, p, w, h, S::zero()))
    }

    pub fn availability_profile(
        mut self,
        tech: &str,
        node: &str,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Self {
        let n = self.node(node);
        let nodes = self.dims.nodes.len();
        let (p, w, h) = (
            self.dims.periods,
            self.dims.n_scenarios(),
            self.dims.total_hours(),
        );
        let table = self
            .params
            .availability
            .entry(tech.to_string())
            .or_insert_with(|| HourlyTable::filled(nodes, p, w, h, S::one()));
        for i in 0..p {
            for sc in 0..w {
                for hh in 0..h {
                    table.set(n, i, sc, hh, S::from_f64_lit(f(i, sc, hh)));
                }
            }
        }
        self
    }

    pub fn initial_capacity(mut self, tech: &str, node: &str, per_period: &[f64]) -> Self {
        let n = self.node(node);
        let nodes = self.dims.nodes.len();
        let periods = self.dims.periods;
        let grid = self
            .params
            .initial_capacity
            .entry(tech.to_string())
            .or_insert_with(|| vec![vec![S::zero(); periods]; nodes]);
        for (i, &v) in per_period.iter().enumerate() {
            grid[n][i] = S::from_f64_lit(v);
        }
        self
    }

    pub fn initial_transmission(mut self, ttype: &str, a: &str, b: &str, per_period: &[f64]) -> Self {
        let (a, b) = (self.node(a), self.node(b));
        let pair = (a.min(b), a.max(b));
        let periods = self.dims.periods;
        let entry = self
            .params
            .initial_transmission
            .entry(ttype.to_string())
            .or_default()
            .entry(pair)
            .or_insert_with(|| vec![S::zero(); periods]);
        for (i, &v) in per_period.iter().enumerate() {
            entry[i] = S::from_f64_lit(v);
        }
        self
    }

    pub fn electrolyzer_power(mut self, tech: &str, mwh_per_ton: f64) -> Self {
        self.params
            .electrolyzer_power
            .insert(tech.into(), S::from_f64_lit(mwh_per_ton));
        self
    }

    pub fn fixed_hydrogen(mut self, tons_per_year: &[f64]) -> Self {
        self.params.fixed_hydrogen = Some(
            tons_per_year
                .iter()
                .map(|&v| S::from_f64_lit(v))
                .collect(),
        );
        self
    }

    pub fn emission_cap(mut self, per_period: &[f64]) -> Self {
        self.params.emission_cap = Some(
            per_period
                .iter()
                .map(|&v| S::from_f64_lit(v))
                .collect(),
        );
        self
    }

    pub fn emission_intensity(mut self, tech: &str, value: f64) -> Self {
        self.params
            .emission_intensity
            .insert(tech.into(), S::from_f64_lit(value));
        self
    }

    pub fn resource_limit(mut self, commodity: &str, node: &str, kind: LimitKind, value: f64) -> Self {
        let n = self.node(node);
        self.params.resource_limits.push(ResourceLimit {
            commodity: commodity.into(),
            node: n,
            kind,
            value: S::from_f64_lit(value),
        });
        self
    }

    pub fn repurposing(mut self, kappa: f64, eta: f64) -> Self {
        self.params.repurpose_cost_factor = S::from_f64_lit(kappa);
        self.params.repurpose_flow_factor = S::from_f64_lit(eta);
        self
    }

    pub fn hydro_budget_flat(mut self, tech: &str, node: &str, budget: f64) -> Self {
        let n = self.node(node);
        let nodes = self.dims.nodes.len();
        let n_seasons = self.dims.seasons.len();
        let n_scen = self.dims.n_scenarios();
        let entry = self
            .params
            .hydro_budget
            .entry(tech.to_string())
            .or_insert_with(|| vec![S::zero(); nodes * n_seasons * n_scen]);
        for s in 0..n_seasons {
            for w in 0..n_scen {
                entry[(n * n_seasons + s) * n_scen + w] = S::from_f64_lit(budget);
            }
        }
        self
    }

    /// Finalizes: fills default zero demand for every commodity, recomputes
    /// season scales, and sanity-checks the electrolysis sink.
    pub fn build(mut self) -> (ModelDimensions<S>, ParameterStore<S>) {
        // Electrolysis sink on power wherever electrolyzers sit.
        let mut hosts: Vec<NodeId> = Vec::new();
        for c in &self.dims.commodities {
            if c.name == HYDROGEN {
                for t in &c.producers {
                    if t.kind == TechKind::Electrolyzer {
                        for n in &t.nodes {
                            if !hosts.contains(n) {
                                hosts.push(*n);
                            }
                        }
                    }
                }
            }
        }
        if !hosts.is_empty() {
            let power = self.commodity_mut(POWER);
            if !power.sinks.iter().any(|s| s.name == ELECTROLYSIS_SINK) {
                power.sinks.insert(
                    0,
                    Technology {
                        name: ELECTROLYSIS_SINK.into(),
                        kind: TechKind::Generic,
                        investable: false,
                        nodes: hosts,
                        arcs: Vec::new(),
                    },
                );
            }
        }
        let names: Vec<String> = self.dims.commodities.iter().map(|c| c.name.clone()).collect();
        for c in names {
            self.demand_table(&c);
        }
        self.params.season_scale = self.dims.season_scales();
        (self.dims, self.params)
    }
}

/// Deterministic random desk instance: 3 nodes, 2 periods, 2 scenarios, one
/// 24-hour season. NOR is renewable-rich and exempt in both periods, ESP has
/// cheap wind, DEU is the demand center with the only fossil generator.
/// Feasible in every case preset by construction: hydrogen storage absorbs
/// temporal matching, and all investments are unbounded above.
pub fn random_toy<S: Scalar>(seed: u64) -> (ModelDimensions<S>, ParameterStore<S>) {
    let mut rng = SplitMix64::new(seed);
    let mut uni = move |lo: f64, hi: f64| -> f64 {
        let u = rng.next_u64() as f64 / u64::MAX as f64;
        lo + (hi - lo) * u
    };

    let wind_cost = [uni(0.9e6, 1.8e6), uni(0.8e6, 1.6e6)];
    let gas_cost = [uni(3.5e5, 7.0e5), uni(3.5e5, 7.0e5)];
    let gas_fuel = [uni(35.0, 90.0), uni(35.0, 90.0)];
    let elec_cost = [uni(3.0e5, 8.0e5), uni(2.5e5, 7.0e5)];
    let tank_cost = [uni(5.0e3, 2.0e4), uni(5.0e3, 2.0e4)];
    let line_cost = [uni(1.0e5, 3.0e5), uni(1.0e5, 3.0e5)];
    let pipe_cost = [uni(2.0e5, 6.0e5), uni(1.5e5, 5.0e5)];
    let eta_pw = uni(50.0, 60.0);
    let h2_t1 = uni(10.0, 30.0);
    let h2_t2 = h2_t1 * uni(1.0, 1.4);
    let hydro_budget = uni(2_000.0, 6_000.0);
    let power_demand = [uni(200.0, 500.0), uni(100.0, 250.0), uni(600.0, 1200.0)];

    let b = Builder::<S>::new(&["NOR", "ESP", "DEU"], 2, 3, 2)
        .season("day", 24, 8760.0)
        .discount_rate(0.05)
        .exempt("NOR", 0)
        .exempt("NOR", 1)
        .tech(POWER, TechClass::Production, "wind", TechKind::Vres, true, &["NOR", "ESP", "DEU"])
        .tech(POWER, TechClass::Production, "gas_ccgt", TechKind::Dispatchable, true, &["DEU"])
        .tech(POWER, TechClass::Production, "hydro_res", TechKind::HydroReservoir, false, &["NOR"])
        .tech(POWER, TechClass::Transmission, "hvline", TechKind::Generic, true, &[])
        .arc(POWER, "hvline", "NOR", "DEU")
        .arc(POWER, "hvline", "ESP", "DEU")
        .tech(HYDROGEN, TechClass::Production, "pem", TechKind::Electrolyzer, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Storage, "h2_tank", TechKind::Generic, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Transmission, H2_PIPELINE, TechKind::Generic, true, &[])
        .arc(HYDROGEN, H2_PIPELINE, "NOR", "DEU")
        .invest_cost("wind", &wind_cost)
        .invest_cost("gas_ccgt", &gas_cost)
        .invest_cost("pem", &elec_cost)
        .invest_cost("h2_tank", &tank_cost)
        .invest_cost("hvline", &line_cost)
        .invest_cost(H2_PIPELINE, &pipe_cost)
        .op_cost("wind", &[0.0, 0.0])
        .op_cost("gas_ccgt", &gas_fuel)
        .op_cost("hydro_res", &[0.0, 0.0])
        .op_cost("pem", &[0.0, 0.0])
        .lifetime("wind", 1)
        .lifetime("gas_ccgt", 1)
        .lifetime("pem", 1)
        .lifetime("h2_tank", 1)
        .lifetime("hvline", 2)
        .lifetime(H2_PIPELINE, 2)
        .shed_cost(POWER, 22_000.0)
        .shed_cost(HYDROGEN, 700_000.0)
        .electrolyzer_power("pem", eta_pw)
        .fixed_hydrogen(&[h2_t1 * 365.0, h2_t2 * 365.0])
        .emission_intensity("wind", 0.0)
        .emission_intensity("gas_ccgt", 0.35)
        .emission_intensity("hydro_res", 0.0)
        .emission_intensity("pem", 0.0)
        .emission_cap(&[1.0e7, 1.0e7])
        .initial_capacity("hydro_res", "NOR", &[400.0, 400.0])
        .hydro_budget_flat("hydro_res", "NOR", hydro_budget);

    // Wind availability: deterministic pseudo-weather, never fully dead.
    let mut wrng = SplitMix64::new(seed ^ 0xA5A5_5A5A_DEAD_BEEF);
    let mut wind = Vec::new();
    for _ in 0..3usize {
        let mut per_node = Vec::new();
        for _ in 0..(2 * 2 * 24) {
            let u = wrng.next_u64() as f64 / u64::MAX as f64;
            per_node.push(0.15 + 0.8 * u);
        }
        wind.push(per_node);
    }
    let b = b
        .availability_profile("wind", "NOR", move |i, w, h| wind[0][(i * 2 + w) * 24 + h])
        .availability_profile("wind", "ESP", {
            let w1 = {
                let mut wrng = SplitMix64::new(seed ^ 0x1111_2222_3333_4444);
                let mut v = Vec::new();
                for _ in 0..(2 * 2 * 24) {
                    v.push(0.2 + 0.75 * (wrng.next_u64() as f64 / u64::MAX as f64));
                }
                v
            };
            move |i, w, h| w1[(i * 2 + w) * 24 + h]
        })
        .availability_profile("wind", "DEU", {
            let w2 = {
                let mut wrng = SplitMix64::new(seed ^ 0x9999_8888_7777_6666);
                let mut v = Vec::new();
                for _ in 0..(2 * 2 * 24) {
                    v.push(0.1 + 0.6 * (wrng.next_u64() as f64 / u64::MAX as f64));
                }
                v
            };
            move |i, w, h| w2[(i * 2 + w) * 24 + h]
        });

    // Demands: power at every node, hydrogen distributed so the per-period
    // total over the modeled hours equals the scaled production target
    // exactly (full-year coverage here, so target = annual quantity).
    let h2_total = [h2_t1 * 365.0, h2_t2 * 365.0];
    let b = b
        .flat_demand(POWER, "NOR", power_demand[0])
        .flat_demand(POWER, "ESP", power_demand[1])
        .flat_demand(POWER, "DEU", power_demand[2])
        .demand_profile(HYDROGEN, "NOR", {
            let t = h2_total;
            move |i, _, _| 0.2 * t[i] / 24.0
        })
        .demand_profile(HYDROGEN, "ESP", {
            let t = h2_total;
            move |i, _, _| 0.3 * t[i] / 24.0
        })
        .demand_profile(HYDROGEN, "DEU", {
            let t = h2_total;
            move |i, _, _| 0.5 * t[i] / 24.0
        });

    b.build()
}

/// Fixed instance built so the green rules visibly bite: in Base the ESP
/// electrolyzers run on imported fossil power, under AST90 they must build
/// and follow local wind. Costs rise, first-period VRES strictly grows, and
/// the fleet-wide electrolyzer capacity factor drops.
pub fn directional_toy<S: Scalar>() -> (ModelDimensions<S>, ParameterStore<S>) {
    Builder::<S>::new(&["NOR", "ESP", "DEU"], 2, 3, 2)
        .season("day", 24, 8760.0)
        .discount_rate(0.05)
        .exempt("NOR", 0)
        .exempt("NOR", 1)
        .tech(POWER, TechClass::Production, "wind", TechKind::Vres, true, &["NOR", "ESP", "DEU"])
        .tech(POWER, TechClass::Production, "gas_ccgt", TechKind::Dispatchable, true, &["DEU"])
        .tech(POWER, TechClass::Production, "hydro_res", TechKind::HydroReservoir, false, &["NOR"])
        .tech(POWER, TechClass::Transmission, "hvline", TechKind::Generic, true, &[])
        .arc(POWER, "hvline", "ESP", "DEU")
        .tech(HYDROGEN, TechClass::Production, "pem", TechKind::Electrolyzer, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Storage, "h2_tank", TechKind::Generic, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Transmission, H2_PIPELINE, TechKind::Generic, true, &[])
        .arc(HYDROGEN, H2_PIPELINE, "NOR", "DEU")
        .arc(HYDROGEN, H2_PIPELINE, "ESP", "DEU")
        .invest_cost("wind", &[1.4e6, 1.3e6])
        .invest_cost("gas_ccgt", &[4.5e5, 4.5e5])
        .invest_cost("pem", &[5.0e5, 4.6e5])
        .invest_cost("h2_tank", &[1.0e4, 1.0e4])
        .invest_cost("hvline", &[2.0e5, 2.0e5])
        .invest_cost(H2_PIPELINE, &[3.0e5, 2.8e5])
        .op_cost("wind", &[0.0, 0.0])
        .op_cost("gas_ccgt", &[40.0, 40.0])
        .op_cost("hydro_res", &[0.0, 0.0])
        .op_cost("pem", &[0.0, 0.0])
        .lifetime("wind", 1)
        .lifetime("gas_ccgt", 1)
        .lifetime("pem", 1)
        .lifetime("h2_tank", 1)
        .lifetime("hvline", 2)
        .lifetime(H2_PIPELINE, 2)
        .shed_cost(POWER, 22_000.0)
        .shed_cost(HYDROGEN, 700_000.0)
        .electrolyzer_power("pem", 57.5)
        // Too much hydrogen for NOR hydro alone: ESP must produce.
        .fixed_hydrogen(&[175_200.0, 175_200.0])
        .initial_capacity("hydro_res", "NOR", &[600.0, 600.0])
        .hydro_budget_flat("hydro_res", "NOR", 9_600.0)
        .availability_profile("wind", "NOR", |_, w, h| {
            0.10 + 0.10 * (((h * 7 + w * 3) % 11) as f64 / 10.0)
        })
        .availability_profile("wind", "ESP", |_, w, h| {
            0.30 + 0.30 * (((h * 5 + w * 7) % 13) as f64 / 12.0)
        })
        .availability_profile("wind", "DEU", |_, w, h| {
            0.18 + 0.22 * (((h * 3 + w * 5) % 17) as f64 / 16.0)
        })
        .flat_demand(POWER, "NOR", 250.0)
        .flat_demand(POWER, "ESP", 200.0)
        .flat_demand(POWER, "DEU", 900.0)
        .demand_profile(HYDROGEN, "NOR", |_, _, _| 175_200.0 * 0.1 / 24.0)
        .demand_profile(HYDROGEN, "ESP", |_, _, _| 175_200.0 * 0.2 / 24.0)
        .demand_profile(HYDROGEN, "DEU", |_, _, _| 175_200.0 * 0.7 / 24.0)
        .build()
}

/// Fixed instance where the exempt node hosts cheap electrolysis running on
/// legacy hydro. Removing the exemption (AST) forces additionality onto that
/// node and shifts hydrogen production away from it.
pub fn exemption_value_toy<S: Scalar>() -> (ModelDimensions<S>, ParameterStore<S>) {
    Builder::<S>::new(&["NOR", "ESP", "DEU"], 2, 3, 2)
        .season("day", 24, 8760.0)
        .discount_rate(0.05)
        .exempt("NOR", 0)
        .exempt("NOR", 1)
        .tech(POWER, TechClass::Production, "wind", TechKind::Vres, true, &["NOR", "ESP", "DEU"])
        .tech(POWER, TechClass::Production, "gas_ccgt", TechKind::Dispatchable, true, &["DEU"])
        .tech(POWER, TechClass::Production, "hydro_res", TechKind::HydroReservoir, false, &["NOR"])
        .tech(POWER, TechClass::Transmission, "hvline", TechKind::Generic, true, &[])
        .arc(POWER, "hvline", "NOR", "DEU")
        .arc(POWER, "hvline", "ESP", "DEU")
        .tech(HYDROGEN, TechClass::Production, "pem", TechKind::Electrolyzer, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Storage, "h2_tank", TechKind::Generic, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Transmission, H2_PIPELINE, TechKind::Generic, true, &[])
        .arc(HYDROGEN, H2_PIPELINE, "NOR", "DEU")
        .arc(HYDROGEN, H2_PIPELINE, "ESP", "DEU")
        // Wind yields poorly at NOR (availability below) while ESP is windy:
        // the exemption is what keeps NOR hydrogen competitive.
        .invest_cost("wind", &[1.3e6, 1.25e6])
        .invest_cost("gas_ccgt", &[5.0e5, 5.0e5])
        .invest_cost("pem", &[5.0e5, 4.8e5])
        .invest_cost("h2_tank", &[1.0e4, 1.0e4])
        .invest_cost("hvline", &[2.5e5, 2.5e5])
        .invest_cost(H2_PIPELINE, &[3.0e5, 2.8e5])
        .op_cost("wind", &[0.0, 0.0])
        .op_cost("gas_ccgt", &[50.0, 50.0])
        .op_cost("hydro_res", &[0.0, 0.0])
        .op_cost("pem", &[0.0, 0.0])
        .lifetime("wind", 1)
        .lifetime("gas_ccgt", 1)
        .lifetime("pem", 1)
        .lifetime("h2_tank", 1)
        .lifetime("hvline", 2)
        .lifetime(H2_PIPELINE, 2)
        .shed_cost(POWER, 22_000.0)
        .shed_cost(HYDROGEN, 700_000.0)
        .electrolyzer_power("pem", 57.5)
        .fixed_hydrogen(&[7_300.0, 8_030.0])
        .initial_capacity("hydro_res", "NOR", &[600.0, 600.0])
        .hydro_budget_flat("hydro_res", "NOR", 9_000.0)
        .availability_profile("wind", "NOR", |_, w, h| {
            0.05 + 0.15 * (((h * 7 + w * 3) % 11) as f64 / 10.0)
        })
        .availability_profile("wind", "ESP", |_, w, h| {
            0.45 + 0.5 * (((h * 5 + w * 7) % 13) as f64 / 12.0)
        })
        .availability_profile("wind", "DEU", |_, w, h| {
            0.15 + 0.4 * (((h * 3 + w * 5) % 17) as f64 / 16.0)
        })
        .flat_demand(POWER, "NOR", 300.0)
        .flat_demand(POWER, "ESP", 150.0)
        .flat_demand(POWER, "DEU", 800.0)
        .demand_profile(HYDROGEN, "NOR", |i, _, _| [7_300.0, 8_030.0][i] * 0.2 / 24.0)
        .demand_profile(HYDROGEN, "ESP", |i, _, _| [7_300.0, 8_030.0][i] * 0.2 / 24.0)
        .demand_profile(HYDROGEN, "DEU", |i, _, _| [7_300.0, 8_030.0][i] * 0.6 / 24.0)
        .build()
}

/// Natural-gas flavored instance exercising pipeline repurposing and
/// resource limits alongside the green rules.
pub fn repurposing_toy<S: Scalar>() -> (ModelDimensions<S>, ParameterStore<S>) {
    Builder::<S>::new(&["NOR", "ESP", "DEU"], 2, 3, 2)
        .season("day", 24, 8760.0)
        .discount_rate(0.05)
        .exempt("NOR", 0)
        .exempt("NOR", 1)
        .tech(POWER, TechClass::Production, "wind", TechKind::Vres, true, &["NOR", "ESP", "DEU"])
        .tech(POWER, TechClass::Production, "gas_ccgt", TechKind::Dispatchable, true, &["DEU"])
        .tech(POWER, TechClass::Production, "hydro_res", TechKind::HydroReservoir, false, &["NOR"])
        .tech(POWER, TechClass::Transmission, "hvline", TechKind::Generic, true, &[])
        .arc(POWER, "hvline", "NOR", "DEU")
        .arc(POWER, "hvline", "ESP", "DEU")
        .tech(HYDROGEN, TechClass::Production, "pem", TechKind::Electrolyzer, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Storage, "h2_tank", TechKind::Generic, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Transmission, H2_PIPELINE, TechKind::Generic, true, &[])
        .arc(HYDROGEN, H2_PIPELINE, "NOR", "DEU")
        .tech(NATURAL_GAS, TechClass::Production, "gas_field", TechKind::Generic, false, &["NOR"])
        .tech(NATURAL_GAS, TechClass::Transmission, NG_PIPELINE, TechKind::Generic, false, &[])
        .arc(NATURAL_GAS, NG_PIPELINE, "NOR", "DEU")
        .invest_cost("wind", &[1.2e6, 1.1e6])
        .invest_cost("gas_ccgt", &[5.0e5, 5.0e5])
        .invest_cost("pem", &[4.5e5, 4.2e5])
        .invest_cost("h2_tank", &[1.0e4, 1.0e4])
        .invest_cost("hvline", &[2.5e5, 2.5e5])
        .invest_cost(H2_PIPELINE, &[1000.0, 900.0])
        .op_cost("wind", &[0.0, 0.0])
        .op_cost("gas_ccgt", &[55.0, 55.0])
        .op_cost("hydro_res", &[0.0, 0.0])
        .op_cost("pem", &[0.0, 0.0])
        .op_cost("gas_field", &[8.0, 8.0])
        .lifetime("wind", 1)
        .lifetime("gas_ccgt", 1)
        .lifetime("pem", 1)
        .lifetime("h2_tank", 1)
        .lifetime("hvline", 2)
        .lifetime(H2_PIPELINE, 2)
        .shed_cost(POWER, 22_000.0)
        .shed_cost(HYDROGEN, 700_000.0)
        .shed_cost(NATURAL_GAS, 120_000.0)
        .electrolyzer_power("pem", 57.5)
        .fixed_hydrogen(&[7_300.0, 9_125.0])
        .repurposing(0.25, 0.8)
        .initial_capacity("hydro_res", "NOR", &[500.0, 500.0])
        .initial_transmission(NG_PIPELINE, "NOR", "DEU", &[40.0, 40.0])
        .hydro_budget_flat("hydro_res", "NOR", 8_000.0)
        .resource_limit(NATURAL_GAS, "NOR", LimitKind::Source, 2.0e6)
        .availability_profile("wind", "NOR", |_, w, h| {
            0.25 + 0.5 * (((h * 7 + w * 3) % 11) as f64 / 10.0)
        })
        .availability_profile("wind", "ESP", |_, w, h| {
            0.35 + 0.55 * (((h * 5 + w * 7) % 13) as f64 / 12.0)
        })
        .availability_profile("wind", "DEU", |_, w, h| {
            0.15 + 0.45 * (((h * 3 + w * 5) % 17) as f64 / 16.0)
        })
        .flat_demand(POWER, "NOR", 250.0)
        .flat_demand(POWER, "ESP", 120.0)
        .flat_demand(POWER, "DEU", 700.0)
        // Gas demand in DEU pulls flow through the NG pipeline, competing
        // with repurposing it for hydrogen.
        .flat_demand(NATURAL_GAS, "DEU", 18.0)
        .demand_profile(HYDROGEN, "DEU", |i, _, _| [7_300.0, 9_125.0][i] / 24.0)
        .build()
}

/// The bundled three-node system: the directional instance extended with a
/// natural-gas sector so every constraint family is live (NG production at
/// NOR, a frozen NG pipeline to DEU that can be repurposed, an emission cap,
/// and a horizon-wide gas extraction budget).
pub fn bundled_toy<S: Scalar>() -> (ModelDimensions<S>, ParameterStore<S>) {
    Builder::<S>::new(&["NOR", "ESP", "DEU"], 2, 3, 2)
        .season("day", 24, 8760.0)
        .discount_rate(0.05)
        .exempt("NOR", 0)
        .exempt("NOR", 1)
        .tech(POWER, TechClass::Production, "wind", TechKind::Vres, true, &["NOR", "ESP", "DEU"])
        .tech(POWER, TechClass::Production, "gas_ccgt", TechKind::Dispatchable, true, &["DEU"])
        .tech(POWER, TechClass::Production, "hydro_res", TechKind::HydroReservoir, false, &["NOR"])
        .tech(POWER, TechClass::Transmission, "hvline", TechKind::Generic, true, &[])
        .arc(POWER, "hvline", "ESP", "DEU")
        .tech(HYDROGEN, TechClass::Production, "pem", TechKind::Electrolyzer, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Storage, "h2_tank", TechKind::Generic, true, &["NOR", "ESP"])
        .tech(HYDROGEN, TechClass::Transmission, H2_PIPELINE, TechKind::Generic, true, &[])
        .arc(HYDROGEN, H2_PIPELINE, "NOR", "DEU")
        .arc(HYDROGEN, H2_PIPELINE, "ESP", "DEU")
        .tech(NATURAL_GAS, TechClass::Production, "gas_field", TechKind::Generic, false, &["NOR"])
        .tech(NATURAL_GAS, TechClass::Transmission, NG_PIPELINE, TechKind::Generic, false, &[])
        .arc(NATURAL_GAS, NG_PIPELINE, "NOR", "DEU")
        .invest_cost("wind", &[1.4e6, 1.3e6])
        .invest_cost("gas_ccgt", &[4.5e5, 4.5e5])
        .invest_cost("pem", &[5.0e5, 4.6e5])
        .invest_cost("h2_tank", &[1.0e4, 1.0e4])
        .invest_cost("hvline", &[2.0e5, 2.0e5])
        .invest_cost(H2_PIPELINE, &[3.0e5, 2.8e5])
        .op_cost("wind", &[0.0, 0.0])
        .op_cost("gas_ccgt", &[40.0, 40.0])
        .op_cost("hydro_res", &[0.0, 0.0])
        .op_cost("pem", &[0.0, 0.0])
        .op_cost("gas_field", &[8.0, 8.0])
        .lifetime("wind", 1)
        .lifetime("gas_ccgt", 1)
        .lifetime("pem", 1)
        .lifetime("h2_tank", 1)
        .lifetime("hvline", 2)
        .lifetime(H2_PIPELINE, 2)
        .shed_cost(POWER, 22_000.0)
        .shed_cost(HYDROGEN, 700_000.0)
        .shed_cost(NATURAL_GAS, 120_000.0)
        .electrolyzer_power("pem", 57.5)
        .fixed_hydrogen(&[480.0, 480.0])
        .emission_intensity("wind", 0.0)
        .emission_intensity("gas_ccgt", 0.35)
        .emission_intensity("hydro_res", 0.0)
        .emission_intensity("pem", 0.0)
        .emission_intensity("gas_field", 0.01)
        .emission_cap(&[2.0e7, 2.0e7])
        .repurposing(0.25, 0.8)
        .initial_capacity("hydro_res", "NOR", &[600.0, 600.0])
        .initial_capacity("gas_field", "NOR", &[60.0, 60.0])
        .initial_transmission(NG_PIPELINE, "NOR", "DEU", &[40.0, 40.0])
        .hydro_budget_flat("hydro_res", "NOR", 9_600.0)
        .resource_limit(NATURAL_GAS, "NOR", LimitKind::Source, 3.0e6)
        .availability_profile("wind", "NOR", |_, w, h| {
            0.10 + 0.10 * (((h * 7 + w * 3) % 11) as f64 / 10.0)
        })
        .availability_profile("wind", "ESP", |_, w, h| {
            0.30 + 0.30 * (((h * 5 + w * 7) % 13) as f64 / 12.0)
        })
        .availability_profile("wind", "DEU", |_, w, h| {
            0.18 + 0.22 * (((h * 3 + w * 5) % 17) as f64 / 16.0)
        })
        .flat_demand(POWER, "NOR", 250.0)
        .flat_demand(POWER, "ESP", 200.0)
        .flat_demand(POWER, "DEU", 900.0)
        .flat_demand(NATURAL_GAS, "DEU", 15.0)
        .demand_profile(HYDROGEN, "NOR", |_, _, _| 480.0 * 0.1 / 24.0)
        .demand_profile(HYDROGEN, "ESP", |_, _, _| 480.0 * 0.2 / 24.0)
        .demand_profile(HYDROGEN, "DEU", |_, _, _| 480.0 * 0.7 / 24.0)
        .build()
}

/// Writes an in-memory instance as a loader-compatible data directory.
/// Everything the loader reads round-trips exactly: values are printed with
/// 17 significant digits in internal units.
pub fn write_data_dir<S: Scalar>(
    dims: &ModelDimensions<S>,
    params: &ParameterStore<S>,
    dir: &std::path::Path,
) -> std::io::Result<()> {
    use crate::table::write_csv;
    std::fs::create_dir_all(dir)?;
    let f = |v: S| format!("{:.16e}", v);

    write_csv(
        &dir.join("nodes.csv"),
        &["node"],
        &dims.nodes.iter().map(|n| vec![n.clone()]).collect::<Vec<_>>(),
    )?;

    let mut tech_rows = Vec::new();
    let mut site_rows = Vec::new();
    let mut arc_rows = Vec::new();
    for c in &dims.commodities {
        let mut push = |t: &Technology, class: &str| {
            if t.name == ELECTROLYSIS_SINK {
                return; // implicit, loader recreates it
            }
            tech_rows.push(vec![
                t.name.clone(),
                class.to_string(),
                c.name.clone(),
                t.kind.as_str().to_string(),
                if t.investable { "yes" } else { "no" }.to_string(),
            ]);
            for n in &t.nodes {
                site_rows.push(vec![t.name.clone(), dims.nodes[n.0].clone()]);
            }
        };
        for t in &c.producers {
            push(t, "production");
        }
        for t in &c.storages {
            push(t, "storage");
        }
        for t in &c.sinks {
            push(t, "sink");
        }
        for t in &c.transmissions {
            push(t, "transmission");
            for &(a, b) in &t.arcs {
                arc_rows.push(vec![
                    c.name.clone(),
                    t.name.clone(),
                    dims.nodes[a.0].clone(),
                    dims.nodes[b.0].clone(),
                ]);
            }
        }
    }
    write_csv(
        &dir.join("technologies.csv"),
        &["name", "class", "commodity", "kind", "investable"],
        &tech_rows,
    )?;
    write_csv(
        &dir.join("technology_nodes.csv"),
        &["technology", "node"],
        &site_rows,
    )?;
    write_csv(
        &dir.join("arcs.csv"),
        &["commodity", "transmission_type", "from", "to"],
        &arc_rows,
    )?;
    write_csv(
        &dir.join("exempt_nodes.csv"),
        &["node", "period"],
        &dims
            .exempt
            .iter()
            .map(|&(n, i)| vec![dims.nodes[n].clone(), (i + 1).to_string()])
            .collect::<Vec<_>>(),
    )?;

    let mut rows = Vec::new();
    for (c, table) in &params.demand {
        let unit = if c == POWER { "MW" } else { "ton_per_h" };
        for n in 0..table.nodes {
            for i in 0..table.periods {
                for w in 0..table.scenarios {
                    for h in 0..table.hours {
                        rows.push(vec![
                            c.clone(),
                            dims.nodes[n].clone(),
                            (i + 1).to_string(),
                            (w + 1).to_string(),
                            h.to_string(),
                            f(table.get(n, i, w, h)),
                            unit.to_string(),
                        ]);
                    }
                }
            }
        }
    }
    write_csv(
        &dir.join("demand.csv"),
        &["commodity", "node", "period", "scenario", "hour", "value", "unit"],
        &rows,
    )?;

    let mut rows = Vec::new();
    for (g, table) in &params.availability {
        // Only nodes where the technology exists are required or read.
        let nodes: Vec<usize> = dims
            .all_producers()
            .find(|(_, t)| &t.name == g)
            .map(|(_, t)| t.nodes.iter().map(|x| x.0).collect())
            .unwrap_or_default();
        for &n in &nodes {
            for i in 0..table.periods {
                for w in 0..table.scenarios {
                    for h in 0..table.hours {
                        rows.push(vec![
                            g.clone(),
                            dims.nodes[n].clone(),
                            (i + 1).to_string(),
                            (w + 1).to_string(),
                            h.to_string(),
                            f(table.get(n, i, w, h)),
                            "fraction".to_string(),
                        ]);
                    }
                }
            }
        }
    }
    write_csv(
        &dir.join("availability.csv"),
        &["technology", "node", "period", "scenario", "hour", "value", "unit"],
        &rows,
    )?;

    let capex_unit = |asset: &str| -> &'static str {
        for c in &dims.commodities {
            if c.producers.iter().any(|t| t.name == asset)
                || c.transmissions.iter().any(|t| t.name == asset)
            {
                return if c.name == POWER { "EUR_per_MW" } else { "EUR_per_ton_per_h" };
            }
            if c.storages.iter().any(|t| t.name == asset) {
                return if c.name == POWER { "EUR_per_MWh" } else { "EUR_per_ton" };
            }
        }
        "EUR_per_MW"
    };
    let per_unit = |tech: &str| -> &'static str {
        for c in &dims.commodities {
            if c.producers.iter().any(|t| t.name == tech) {
                return if c.name == POWER { "EUR_per_MWh" } else { "EUR_per_ton" };
            }
        }
        "EUR_per_MWh"
    };
    let mut rows = Vec::new();
    for (asset, costs) in &params.invest_cost {
        for (i, v) in costs.iter().enumerate() {
            rows.push(vec![
                asset.clone(),
                (i + 1).to_string(),
                f(*v),
                capex_unit(asset).to_string(),
            ]);
        }
    }
    write_csv(&dir.join("invest_cost.csv"), &["asset", "period", "value", "unit"], &rows)?;

    let mut rows = Vec::new();
    for (tech, costs) in &params.op_cost {
        for (i, v) in costs.iter().enumerate() {
            rows.push(vec![
                tech.clone(),
                (i + 1).to_string(),
                f(*v),
                per_unit(tech).to_string(),
            ]);
        }
    }
    write_csv(&dir.join("op_cost.csv"), &["technology", "period", "value", "unit"], &rows)?;

    let mut rows = Vec::new();
    for (c, grid) in &params.shed_cost {
        let unit = if c == POWER { "EUR_per_MWh" } else { "EUR_per_ton" };
        for (n, per_period) in grid.iter().enumerate() {
            for (i, v) in per_period.iter().enumerate() {
                rows.push(vec![
                    c.clone(),
                    dims.nodes[n].clone(),
                    (i + 1).to_string(),
                    f(*v),
                    unit.to_string(),
                ]);
            }
        }
    }
    write_csv(
        &dir.join("shed_cost.csv"),
        &["commodity", "node", "period", "value", "unit"],
        &rows,
    )?;

    if !params.emission_intensity.is_empty() {
        let unit_of = |tech: &str| -> &'static str {
            for c in &dims.commodities {
                if c.producers.iter().any(|t| t.name == tech) {
                    return if c.name == POWER { "tCO2_per_MWh" } else { "tCO2_per_ton" };
                }
            }
            "tCO2_per_MWh"
        };
        let rows: Vec<Vec<String>> = params
            .emission_intensity
            .iter()
            .map(|(t, v)| vec![t.clone(), f(*v), unit_of(t).to_string()])
            .collect();
        write_csv(&dir.join("emission_intensity.csv"), &["technology", "value", "unit"], &rows)?;
    }
    if let Some(cap) = &params.emission_cap {
        let rows: Vec<Vec<String>> = cap
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), f(*v), "tCO2".to_string()])
            .collect();
        write_csv(&dir.join("emission_cap.csv"), &["period", "value", "unit"], &rows)?;
    }

    let rows: Vec<Vec<String>> = params
        .lifetime
        .iter()
        .map(|(a, v)| vec![a.clone(), v.to_string(), "periods".to_string()])
        .collect();
    write_csv(&dir.join("lifetime.csv"), &["asset", "value", "unit"], &rows)?;

    let flow_unit = |tech: &str| -> &'static str {
        for c in &dims.commodities {
            if c.producers.iter().any(|t| t.name == tech) {
                return if c.name == POWER { "MW" } else { "ton_per_h" };
            }
            if c.storages.iter().any(|t| t.name == tech) {
                return if c.name == POWER { "MWh" } else { "ton" };
            }
        }
        "MW"
    };
    let mut rows = Vec::new();
    for (tech, grid) in &params.initial_capacity {
        for (n, per_period) in grid.iter().enumerate() {
            for (i, v) in per_period.iter().enumerate() {
                if *v != S::zero() {
                    rows.push(vec![
                        tech.clone(),
                        dims.nodes[n].clone(),
                        (i + 1).to_string(),
                        f(*v),
                        flow_unit(tech).to_string(),
                    ]);
                }
            }
        }
    }
    if !rows.is_empty() {
        write_csv(
            &dir.join("initial_capacity.csv"),
            &["technology", "node", "period", "value", "unit"],
            &rows,
        )?;
    }

    let trans_unit = |ttype: &str| -> &'static str {
        for c in &dims.commodities {
            if c.transmissions.iter().any(|t| t.name == ttype) {
                return if c.name == POWER { "MW" } else { "ton_per_h" };
            }
        }
        "MW"
    };
    let mut rows = Vec::new();
    for (ttype, pairs) in &params.initial_transmission {
        for (pair, per_period) in pairs {
            for (i, v) in per_period.iter().enumerate() {
                if *v != S::zero() {
                    rows.push(vec![
                        ttype.clone(),
                        dims.nodes[pair.0].clone(),
                        dims.nodes[pair.1].clone(),
                        (i + 1).to_string(),
                        f(*v),
                        trans_unit(ttype).to_string(),
                    ]);
                }
            }
        }
    }
    if !rows.is_empty() {
        write_csv(
            &dir.join("initial_transmission.csv"),
            &["transmission_type", "from", "to", "period", "value", "unit"],
            &rows,
        )?;
    }

    if !params.resource_limits.is_empty() {
        let rows: Vec<Vec<String>> = params
            .resource_limits
            .iter()
            .map(|l| {
                vec![
                    l.commodity.clone(),
                    dims.nodes[l.node].clone(),
                    match l.kind {
                        LimitKind::Source => "source",
                        LimitKind::Sink => "sink",
                    }
                    .to_string(),
                    f(l.value),
                    "ton".to_string(),
                ]
            })
            .collect();
        write_csv(
            &dir.join("resource_limit.csv"),
            &["commodity", "node", "kind", "value", "unit"],
            &rows,
        )?;
    }

    if !params.electrolyzer_power.is_empty() {
        let rows: Vec<Vec<String>> = params
            .electrolyzer_power
            .iter()
            .map(|(t, v)| vec![t.clone(), f(*v), "MWh_per_ton".to_string()])
            .collect();
        write_csv(
            &dir.join("electrolyzer_power.csv"),
            &["technology", "value", "unit"],
            &rows,
        )?;
    }
    if let Some(h2) = &params.fixed_hydrogen {
        let rows: Vec<Vec<String>> = h2
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), f(*v), "ton_per_yr".to_string()])
            .collect();
        write_csv(&dir.join("fixed_hydrogen.csv"), &["period", "value", "unit"], &rows)?;
    }

    let mut rows = vec![vec![
        "discount_rate".to_string(),
        f(params.discount_rate),
        "fraction".to_string(),
    ]];
    if params.repurpose_cost_factor != S::zero() || params.repurpose_flow_factor != S::zero() {
        rows.push(vec![
            "repurpose_cost_factor".to_string(),
            f(params.repurpose_cost_factor),
            "fraction".to_string(),
        ]);
        rows.push(vec![
            "repurpose_flow_factor".to_string(),
            f(params.repurpose_flow_factor),
            "fraction".to_string(),
        ]);
    }
    write_csv(&dir.join("scalars.csv"), &["name", "value", "unit"], &rows)?;

    if !params.hydro_budget.is_empty() {
        let n_seasons = dims.seasons.len();
        let n_scen = dims.n_scenarios();
        let mut rows = Vec::new();
        for (tech, vals) in &params.hydro_budget {
            let nodes: Vec<usize> = dims
                .all_producers()
                .find(|(_, t)| &t.name == tech)
                .map(|(_, t)| t.nodes.iter().map(|x| x.0).collect())
                .unwrap_or_default();
            for &n in &nodes {
                for s in 0..n_seasons {
                    for w in 0..n_scen {
                        rows.push(vec![
                            tech.clone(),
                            dims.nodes[n].clone(),
                            (s + 1).to_string(),
                            (w + 1).to_string(),
                            f(vals[(n * n_seasons + s) * n_scen + w]),
                            "MWh".to_string(),
                        ]);
                    }
                }
            }
        }
        write_csv(
            &dir.join("hydro_budget.csv"),
            &["technology", "node", "season", "scenario", "value", "unit"],
            &rows,
        )?;
    }
    Ok(())
}
