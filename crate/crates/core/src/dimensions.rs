//! Index sets of the formulation: nodes, periods, seasons, scenarios,
//! commodities with their technologies, arcs, and exemption sets.
//!
//! Dimensions are immutable after construction and safe to share across
//! threads. [`validate_dimensions`] reports every invariant violation as
//! data; loaders resolve all cross-references at load time.

use crate::scalar::Scalar;
use crate::table::{read_table, Table, Violation};
use std::collections::BTreeSet;
use std::path::Path;

pub const POWER: &str = "power";
pub const HYDROGEN: &str = "H2";
pub const NATURAL_GAS: &str = "NG";
pub const CO2: &str = "CO2";

/// Transmission technology names with special capacity rules.
pub const NG_PIPELINE: &str = "NGPipeline";
pub const H2_PIPELINE: &str = "H2Pipeline";

/// Sink name attached to the power commodity for electrolysis consumption.
pub const ELECTROLYSIS_SINK: &str = "electrolysis";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TechClass {
    Production,
    Storage,
    Transmission,
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TechKind {
    /// Weather-driven renewable with an hourly availability profile.
    Vres,
    /// Renewable but dispatchable within a seasonal energy budget.
    HydroReservoir,
    /// Dispatchable generator, availability identically 1.
    Dispatchable,
    Electrolyzer,
    /// Anything else (fuel production, sinks, storage, transmission).
    Generic,
}

impl TechKind {
    pub fn parse(s: &str) -> Option<TechKind> {
        Some(match s {
            "vres" => TechKind::Vres,
            "hydro_reservoir" => TechKind::HydroReservoir,
            "dispatchable" => TechKind::Dispatchable,
            "electrolyzer" => TechKind::Electrolyzer,
            "generic" => TechKind::Generic,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TechKind::Vres => "vres",
            TechKind::HydroReservoir => "hydro_reservoir",
            TechKind::Dispatchable => "dispatchable",
            TechKind::Electrolyzer => "electrolyzer",
            TechKind::Generic => "generic",
        }
    }

    /// Variable renewable set membership (hydro reservoirs count as
    /// renewable for grid-share and green-power purposes).
    pub fn is_vres(&self) -> bool {
        matches!(self, TechKind::Vres | TechKind::HydroReservoir)
    }

    /// Power generator set membership.
    pub fn is_generator(&self) -> bool {
        matches!(
            self,
            TechKind::Vres | TechKind::HydroReservoir | TechKind::Dispatchable
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Technology {
    pub name: String,
    pub kind: TechKind,
    pub investable: bool,
    /// Nodes where the asset may exist (production and storage only).
    pub nodes: Vec<NodeId>,
    /// Directed arc entries as loaded (transmission only); symmetry is a
    /// validated invariant, undirected pairs are derived.
    pub arcs: Vec<(NodeId, NodeId)>,
}

impl Technology {
    /// Canonical undirected pairs (a < b), insertion order of first sighting.
    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &(a, b) in &self.arcs {
            let key = if a.0 <= b.0 { (a, b) } else { (b, a) };
            if seen.insert(key) {
                out.push(key);
            }
        }
        out
    }

    /// Neighbors of `n` over the undirected pairs.
    pub fn neighbors(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        for (a, b) in self.pairs() {
            if a == n {
                out.push(b);
            } else if b == n {
                out.push(a);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commodity {
    pub name: String,
    pub producers: Vec<Technology>,
    pub storages: Vec<Technology>,
    pub transmissions: Vec<Technology>,
    /// Endogenous sinks with their host nodes. The power commodity gets an
    /// implicit electrolysis sink wherever electrolyzers exist.
    pub sinks: Vec<Technology>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Season {
    pub name: String,
    /// Modeled hours in this season (one representative window).
    pub hours: usize,
    /// Hours of a real year this season stands for; drives the season scale.
    pub represented_hours: f64,
    /// Offset of the sampling pool within a source year, in hours.
    pub pool_offset: usize,
    /// Length of the sampling pool within a source year, in hours.
    pub pool_hours: usize,
}

/// Time structure as declared in the run manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeStructure {
    pub periods: usize,
    pub period_length_years: u32,
    pub seasons: Vec<Season>,
    pub scenarios: usize,
    /// Uniform when empty.
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDimensions<S: Scalar> {
    pub nodes: Vec<String>,
    pub periods: usize,
    pub period_length_years: u32,
    pub seasons: Vec<Season>,
    pub probabilities: Vec<S>,
    pub commodities: Vec<Commodity>,
    /// (node, period) pairs exempt under the 90% renewable-grid rule.
    pub exempt: BTreeSet<(usize, usize)>,
}

impl<S: Scalar> ModelDimensions<S> {
    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n == name).map(NodeId)
    }

    pub fn commodity(&self, name: &str) -> Option<&Commodity> {
        self.commodities.iter().find(|c| c.name == name)
    }

    pub fn n_scenarios(&self) -> usize {
        self.probabilities.len()
    }

    pub fn total_hours(&self) -> usize {
        self.seasons.iter().map(|s| s.hours).sum()
    }

    /// Global index of the first hour of each season.
    pub fn season_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.seasons.len());
        let mut acc = 0;
        for s in &self.seasons {
            out.push(acc);
            acc += s.hours;
        }
        out
    }

    /// Season index of a global hour.
    pub fn season_of_hour(&self, h: usize) -> usize {
        let mut acc = 0;
        for (k, s) in self.seasons.iter().enumerate() {
            acc += s.hours;
            if h < acc {
                return k;
            }
        }
        panic!("hour {h} out of range");
    }

    pub fn is_exempt(&self, node: NodeId, period: usize) -> bool {
        self.exempt.contains(&(node.0, period))
    }

    /// Power generators (gamma set).
    pub fn generators(&self) -> Vec<&Technology> {
        self.commodity(POWER)
            .map(|c| {
                c.producers
                    .iter()
                    .filter(|t| t.kind.is_generator())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Electrolyzers: hydrogen producers with the electrolyzer kind.
    pub fn electrolyzers(&self) -> Vec<&Technology> {
        self.commodity(HYDROGEN)
            .map(|c| {
                c.producers
                    .iter()
                    .filter(|t| t.kind == TechKind::Electrolyzer)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Season scales: represented hours divided by modeled hours.
    pub fn season_scales(&self) -> Vec<S> {
        self.seasons
            .iter()
            .map(|s| S::from_f64_lit(s.represented_hours) / S::from_f64_lit(s.hours as f64))
            .collect()
    }

    /// Fraction of a year covered by the represented hours; scales annual
    /// quantities onto the modeled hour structure.
    pub fn year_coverage(&self) -> S {
        let total: f64 = self.seasons.iter().map(|s| s.represented_hours).sum();
        S::from_f64_lit(total / 8760.0)
    }

    /// Every production technology across commodities, in declaration order.
    pub fn all_producers(&self) -> impl Iterator<Item = (&Commodity, &Technology)> {
        self.commodities
            .iter()
            .flat_map(|c| c.producers.iter().map(move |t| (c, t)))
    }

    pub fn all_storages(&self) -> impl Iterator<Item = (&Commodity, &Technology)> {
        self.commodities
            .iter()
            .flat_map(|c| c.storages.iter().map(move |t| (c, t)))
    }

    pub fn all_transmissions(&self) -> impl Iterator<Item = (&Commodity, &Technology)> {
        self.commodities
            .iter()
            .flat_map(|c| c.transmissions.iter().map(move |t| (c, t)))
    }
}

/// Checks every dimensional invariant; an empty report means valid.
/// Idempotent and side-effect free.
pub fn validate_dimensions<S: Scalar>(dims: &ModelDimensions<S>) -> Vec<Violation> {
    let mut out = Vec::new();
    let tol = S::from_f64_lit(1e-9);

    if dims.nodes.is_empty() {
        out.push(Violation::new("EMPTY_SET", "no nodes defined"));
    }
    if dims.periods == 0 {
        out.push(Violation::new("EMPTY_SET", "no investment periods"));
    }
    if dims.period_length_years == 0 {
        out.push(Violation::new("EMPTY_SET", "period length must be >= 1 year"));
    }
    {
        let mut seen = BTreeSet::new();
        for n in &dims.nodes {
            if !seen.insert(n.clone()) {
                out.push(Violation::new("DUPLICATE_NAME", format!("node {n:?}")));
            }
        }
    }

    // Scenario probabilities sum to one and are strictly positive.
    if dims.probabilities.is_empty() {
        out.push(Violation::new("EMPTY_SET", "no scenarios"));
    }
    let mut sum = S::zero();
    for (w, p) in dims.probabilities.iter().enumerate() {
        sum = sum + *p;
        if *p <= S::zero() {
            out.push(Violation::new(
                "PROB_NONPOS",
                format!("scenario {w} has probability {p}"),
            ));
        }
    }
    if !dims.probabilities.is_empty() && (sum - S::one()).abs() > tol {
        out.push(Violation::new(
            "PROB_SUM",
            format!("scenario probabilities sum to {sum}, expected 1"),
        ));
    }

    for s in &dims.seasons {
        if s.hours == 0 {
            out.push(Violation::new(
                "EMPTY_SET",
                format!("season {:?} has no hours", s.name),
            ));
        }
        if s.represented_hours <= 0.0 {
            out.push(Violation::new(
                "NEGATIVE_VALUE",
                format!("season {:?} represents {} hours", s.name, s.represented_hours),
            ));
        }
    }
    if dims.seasons.is_empty() {
        out.push(Violation::new("EMPTY_SET", "no seasons"));
    }

    let mut tech_names: BTreeSet<String> = BTreeSet::new();
    for c in &dims.commodities {
        for t in c
            .producers
            .iter()
            .chain(&c.storages)
            .chain(&c.transmissions)
            .chain(&c.sinks)
        {
            if !tech_names.insert(t.name.clone()) {
                out.push(Violation::new(
                    "DUPLICATE_NAME",
                    format!("technology {:?}", t.name),
                ));
            }
            for n in &t.nodes {
                if n.0 >= dims.nodes.len() {
                    out.push(Violation::new(
                        "UNKNOWN_INDEX",
                        format!("technology {:?} references node index {}", t.name, n.0),
                    ));
                }
            }
            for (a, b) in &t.arcs {
                if a.0 >= dims.nodes.len() || b.0 >= dims.nodes.len() {
                    out.push(Violation::new(
                        "UNKNOWN_INDEX",
                        format!("arc of {:?} references an unknown node", t.name),
                    ));
                } else if a == b {
                    out.push(Violation::new(
                        "ARC_LOOP",
                        format!("arc of {:?} connects {} to itself", t.name, dims.nodes[a.0]),
                    ));
                }
            }
            // Directed arc symmetry: m in L_n <=> n in L_m.
            let set: BTreeSet<(usize, usize)> =
                t.arcs.iter().map(|&(a, b)| (a.0, b.0)).collect();
            for &(a, b) in &set {
                if !set.contains(&(b, a)) {
                    out.push(Violation::new(
                        "ARC_ASYMMETRY",
                        format!(
                            "{}: arc {}->{} present but {}->{} absent",
                            t.name,
                            dims.nodes.get(a).map(|s| s.as_str()).unwrap_or("?"),
                            dims.nodes.get(b).map(|s| s.as_str()).unwrap_or("?"),
                            dims.nodes.get(b).map(|s| s.as_str()).unwrap_or("?"),
                            dims.nodes.get(a).map(|s| s.as_str()).unwrap_or("?"),
                        ),
                    ));
                }
            }
            if t.kind == TechKind::Electrolyzer && c.name != HYDROGEN {
                out.push(Violation::new(
                    "ELECTROLYZER_COMMODITY",
                    format!("electrolyzer {:?} declared under {:?}", t.name, c.name),
                ));
            }
            if t.kind.is_generator() && c.name != POWER {
                out.push(Violation::new(
                    "GENERATOR_COMMODITY",
                    format!("generator kind on {:?} under {:?}", t.name, c.name),
                ));
            }
        }
    }

    for &(n, i) in &dims.exempt {
        if n >= dims.nodes.len() {
            out.push(Violation::new(
                "UNKNOWN_INDEX",
                format!("exempt set references node index {n}"),
            ));
        }
        if i >= dims.periods {
            out.push(Violation::new(
                "UNKNOWN_INDEX",
                format!("exempt set references period {}", i + 1),
            ));
        }
    }

    out
}

// ---------------------------------------------------------------------------
// Loading from the data directory
// ---------------------------------------------------------------------------

/// Loads `nodes.csv`, `technologies.csv`, `technology_nodes.csv`, `arcs.csv`,
/// and `exempt_nodes.csv`, resolving all names. Collects every problem it
/// can find instead of stopping at the first.
pub fn load_dimensions<S: Scalar>(
    data_dir: &Path,
    time: &TimeStructure,
) -> Result<ModelDimensions<S>, Vec<Violation>> {
    let mut issues = Vec::new();

    let nodes_t = read_table(&data_dir.join("nodes.csv"), &["node"]);
    let tech_t = read_table(
        &data_dir.join("technologies.csv"),
        &["name", "class", "commodity", "kind", "investable"],
    );
    let sites_t = read_table(&data_dir.join("technology_nodes.csv"), &["technology", "node"]);
    let arcs_t = read_table(
        &data_dir.join("arcs.csv"),
        &["commodity", "transmission_type", "from", "to"],
    );
    let exempt_t = read_table(&data_dir.join("exempt_nodes.csv"), &["node", "period"]);

    let (nodes_t, tech_t, sites_t, arcs_t, exempt_t) =
        match (nodes_t, tech_t, sites_t, arcs_t, exempt_t) {
            (Ok(a), Ok(b), Ok(c), Ok(d), Ok(e)) => (a, b, c, d, e),
            (a, b, c, d, e) => {
                for v in [a.err(), b.err(), c.err(), d.err(), e.err()]
                    .into_iter()
                    .flatten()
                {
                    issues.push(v);
                }
                return Err(issues);
            }
        };

    let nodes: Vec<String> = nodes_t.rows.iter().map(|(_, f)| f[0].clone()).collect();
    let node_id = |name: &str| nodes.iter().position(|n| n == name);

    // Technologies grouped per commodity, declaration order preserved.
    let mut commodities: Vec<Commodity> = Vec::new();
    let find_or_add = |commodities: &mut Vec<Commodity>, name: &str| -> usize {
        if let Some(i) = commodities.iter().position(|c| c.name == name) {
            i
        } else {
            commodities.push(Commodity {
                name: name.to_string(),
                producers: Vec::new(),
                storages: Vec::new(),
                transmissions: Vec::new(),
                sinks: Vec::new(),
            });
            commodities.len() - 1
        }
    };

    for (line, f) in &tech_t.rows {
        let (name, class, commodity, kind, investable) = (&f[0], &f[1], &f[2], &f[3], &f[4]);
        let kind = match TechKind::parse(kind) {
            Some(k) => k,
            None => {
                issues.push(Violation::new(
                    "PARSE_ERROR",
                    format!("{}:{line}: unknown kind {kind:?}", tech_t.file),
                ));
                continue;
            }
        };
        let investable = match investable.as_str() {
            "yes" => true,
            "no" => false,
            other => {
                issues.push(Violation::new(
                    "PARSE_ERROR",
                    format!("{}:{line}: investable must be yes/no, got {other:?}", tech_t.file),
                ));
                continue;
            }
        };
        let ci = find_or_add(&mut commodities, commodity);
        let tech = Technology {
            name: name.clone(),
            kind,
            investable,
            nodes: Vec::new(),
            arcs: Vec::new(),
        };
        match class.as_str() {
            "production" => commodities[ci].producers.push(tech),
            "storage" => commodities[ci].storages.push(tech),
            "transmission" => commodities[ci].transmissions.push(tech),
            "sink" => commodities[ci].sinks.push(tech),
            other => issues.push(Violation::new(
                "PARSE_ERROR",
                format!("{}:{line}: unknown class {other:?}", tech_t.file),
            )),
        }
    }

    let place = |issues: &mut Vec<Violation>, t: &Table, commodities: &mut Vec<Commodity>| {
        for (line, f) in &t.rows {
            let (tech, node) = (&f[0], &f[1]);
            let Some(nid) = node_id(node) else {
                issues.push(Violation::new(
                    "UNKNOWN_INDEX",
                    format!("{}:{line}: unknown node {node:?}", t.file),
                ));
                continue;
            };
            let mut found = false;
            for c in commodities.iter_mut() {
                for tt in c
                    .producers
                    .iter_mut()
                    .chain(c.storages.iter_mut())
                    .chain(c.sinks.iter_mut())
                {
                    if &tt.name == tech {
                        tt.nodes.push(NodeId(nid));
                        found = true;
                    }
                }
            }
            if !found {
                issues.push(Violation::new(
                    "UNKNOWN_INDEX",
                    format!("{}:{line}: unknown technology {tech:?}", t.file),
                ));
            }
        }
    };
    place(&mut issues, &sites_t, &mut commodities);

    for (line, f) in &arcs_t.rows {
        let (commodity, ttype, from, to) = (&f[0], &f[1], &f[2], &f[3]);
        let (Some(a), Some(b)) = (node_id(from), node_id(to)) else {
            issues.push(Violation::new(
                "UNKNOWN_INDEX",
                format!("{}:{line}: unknown node in arc {from}->{to}", arcs_t.file),
            ));
            continue;
        };
        let mut found = false;
        for c in commodities.iter_mut() {
            if &c.name != commodity {
                continue;
            }
            for tt in c.transmissions.iter_mut() {
                if &tt.name == ttype {
                    tt.arcs.push((NodeId(a), NodeId(b)));
                    found = true;
                }
            }
        }
        if !found {
            issues.push(Violation::new(
                "UNKNOWN_INDEX",
                format!(
                    "{}:{line}: no transmission type {ttype:?} under commodity {commodity:?}",
                    arcs_t.file
                ),
            ));
        }
    }

    let mut exempt = BTreeSet::new();
    for (line, f) in &exempt_t.rows {
        let (node, period) = (&f[0], &f[1]);
        let Some(nid) = node_id(node) else {
            issues.push(Violation::new(
                "UNKNOWN_INDEX",
                format!("{}:{line}: unknown node {node:?}", exempt_t.file),
            ));
            continue;
        };
        match period.parse::<usize>() {
            Ok(p) if p >= 1 && p <= time.periods => {
                exempt.insert((nid, p - 1));
            }
            _ => issues.push(Violation::new(
                "UNKNOWN_INDEX",
                format!("{}:{line}: period {period:?} out of range", exempt_t.file),
            )),
        }
    }

    // Implicit electrolysis sink on power wherever electrolyzers sit.
    let mut electrolyzer_nodes: Vec<NodeId> = Vec::new();
    for c in &commodities {
        if c.name == HYDROGEN {
            for t in &c.producers {
                if t.kind == TechKind::Electrolyzer {
                    for n in &t.nodes {
                        if !electrolyzer_nodes.contains(n) {
                            electrolyzer_nodes.push(*n);
                        }
                    }
                }
            }
        }
    }
    if !electrolyzer_nodes.is_empty() {
        if let Some(p) = commodities.iter_mut().find(|c| c.name == POWER) {
            if !p.sinks.iter().any(|s| s.name == ELECTROLYSIS_SINK) {
                p.sinks.insert(
                    0,
                    Technology {
                        name: ELECTROLYSIS_SINK.to_string(),
                        kind: TechKind::Generic,
                        investable: false,
                        nodes: electrolyzer_nodes,
                        arcs: Vec::new(),
                    },
                );
            }
        }
    }

    let probabilities: Vec<S> = if time.probabilities.is_empty() {
        let p = S::one() / S::from_f64_lit(time.scenarios as f64);
        vec![p; time.scenarios]
    } else {
        time.probabilities.iter().map(|&p| S::from_f64_lit(p)).collect()
    };

    let dims = ModelDimensions {
        nodes,
        periods: time.periods,
        period_length_years: time.period_length_years,
        seasons: time.seasons.clone(),
        probabilities,
        commodities,
        exempt,
    };

    if issues.is_empty() {
        Ok(dims)
    } else {
        Err(issues)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ModelDimensions<f64> {
        ModelDimensions {
            nodes: vec!["A".into()],
            periods: 1,
            period_length_years: 1,
            seasons: vec![Season {
                name: "all".into(),
                hours: 2,
                represented_hours: 8760.0,
                pool_offset: 0,
                pool_hours: 8760,
            }],
            probabilities: vec![1.0],
            commodities: vec![],
            exempt: BTreeSet::new(),
        }
    }

    #[test]
    fn minimal_instance_is_valid() {
        // 1 node, 1 period, 1 season of 2 hours, 1 scenario with probability 1.
        assert!(validate_dimensions(&minimal()).is_empty());
    }

    #[test]
    fn probability_sum_violation() {
        let mut d = minimal();
        d.probabilities = vec![0.6, 0.5];
        let v = validate_dimensions(&d);
        assert!(v.iter().any(|x| x.code == "PROB_SUM"), "{v:?}");
    }

    #[test]
    fn arc_asymmetry_detected() {
        let mut d = minimal();
        d.nodes = vec!["ES".into(), "DE".into()];
        d.commodities = vec![Commodity {
            name: HYDROGEN.into(),
            producers: vec![],
            storages: vec![],
            transmissions: vec![Technology {
                name: H2_PIPELINE.into(),
                kind: TechKind::Generic,
                investable: true,
                nodes: vec![],
                arcs: vec![(NodeId(0), NodeId(1))], // ES->DE with no reverse
            }],
            sinks: vec![],
        }];
        let v = validate_dimensions(&d);
        assert!(v.iter().any(|x| x.code == "ARC_ASYMMETRY"), "{v:?}");
    }

    #[test]
    fn validation_is_idempotent() {
        let mut d = minimal();
        d.probabilities = vec![0.4, 0.4];
        let a = validate_dimensions(&d);
        let b = validate_dimensions(&d);
        assert_eq!(a, b);
    }

    #[test]
    fn exempt_bounds_checked() {
        let mut d = minimal();
        d.exempt.insert((5, 0));
        let v = validate_dimensions(&d);
        assert!(v.iter().any(|x| x.code == "UNKNOWN_INDEX"));
    }

    #[test]
    fn season_scale_and_coverage() {
        let d = minimal();
        let scales = d.season_scales();
        assert!((scales[0] - 4380.0).abs() < 1e-9);
        assert!((d.year_coverage() - 1.0).abs() < 1e-12);
    }
}
