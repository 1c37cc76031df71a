//! Network data model, document parsing, validation and the case-study
//! capacity variants.
//!
//! A network document is TOML with three top-level keys:
//!
//! ```toml
//! base_mva = 100.0
//!
//! [[buses]]
//! id = 1
//! demand_mw = 0.0
//! gen_capacity_mw = 100.0
//! gen_setpoint_mw = 100.0
//! slack = true
//!
//! [[lines]]
//! id = "T1"
//! from = 1
//! to = 2
//! reactance_pu = 0.1
//! resistance_pu = 0.01
//! capacity_mw = 50.0
//! ```
//!
//! Document order of buses and lines is kept and is the index order used by
//! every downstream matrix and report.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BASE_MVA: f64 = 100.0;

/// MW quantities in a network document carry at most this many fraction digits.
pub const MW_FRACTION_DIGITS: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bus-{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineId(pub String);

impl LineId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LineId {
    fn from(s: &str) -> Self {
        LineId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: BusId,
    pub demand_mw: f64,
    pub gen_capacity_mw: f64,
    pub gen_setpoint_mw: f64,
    #[serde(rename = "slack")]
    pub is_slack: bool,
}

impl Bus {
    pub fn load(id: u32, demand_mw: f64) -> Self {
        Bus {
            id: BusId(id),
            demand_mw,
            gen_capacity_mw: 0.0,
            gen_setpoint_mw: 0.0,
            is_slack: false,
        }
    }

    pub fn generator(id: u32, capacity_mw: f64, setpoint_mw: f64) -> Self {
        Bus {
            id: BusId(id),
            demand_mw: 0.0,
            gen_capacity_mw: capacity_mw,
            gen_setpoint_mw: setpoint_mw,
            is_slack: false,
        }
    }

    pub fn slack(mut self) -> Self {
        self.is_slack = true;
        self
    }

    pub fn with_demand(mut self, demand_mw: f64) -> Self {
        self.demand_mw = demand_mw;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: LineId,
    #[serde(rename = "from")]
    pub from_bus: BusId,
    #[serde(rename = "to")]
    pub to_bus: BusId,
    pub reactance_pu: f64,
    pub resistance_pu: f64,
    pub capacity_mw: f64,
}

impl Line {
    pub fn new(id: &str, from: u32, to: u32, reactance_pu: f64, capacity_mw: f64) -> Self {
        Line {
            id: LineId::from(id),
            from_bus: BusId(from),
            to_bus: BusId(to),
            reactance_pu,
            resistance_pu: 0.0,
            capacity_mw,
        }
    }

    pub fn with_resistance(mut self, resistance_pu: f64) -> Self {
        self.resistance_pu = resistance_pu;
        self
    }
}

fn default_base_mva() -> f64 {
    DEFAULT_BASE_MVA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    #[serde(default)]
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line>,
}

impl Network {
    pub fn new(buses: Vec<Bus>, lines: Vec<Line>) -> Self {
        Network {
            base_mva: DEFAULT_BASE_MVA,
            buses,
            lines,
        }
    }

    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn line_index(&self, id: &str) -> Option<usize> {
        self.lines.iter().position(|l| l.id.as_str() == id)
    }

    /// Index of the first slack bus in document order.
    pub fn slack_index(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.is_slack)
    }

    pub fn total_demand_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.demand_mw).sum()
    }

    /// Sum of setpoints over generators other than the slack.
    pub fn scheduled_generation_mw(&self) -> f64 {
        self.buses
            .iter()
            .filter(|b| !b.is_slack)
            .map(|b| b.gen_setpoint_mw)
            .sum()
    }

    /// `(from, to)` bus indices of every line. Panics on dangling references,
    /// which `parse_network` and `validate_network` rule out.
    pub(crate) fn terminals(&self) -> Vec<(usize, usize)> {
        let index: HashMap<BusId, usize> = self
            .buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect();
        self.lines
            .iter()
            .map(|l| {
                let from = *index.get(&l.from_bus).expect("line references unknown bus");
                let to = *index.get(&l.to_bus).expect("line references unknown bus");
                (from, to)
            })
            .collect()
    }
}

/// Parses a network document, checking the structural invariants a document
/// must meet to be usable at all (unique ids, resolvable bus references,
/// exactly one slack). Physical invariants are left to [`validate_network`].
pub fn parse_network(document: &str) -> Result<Network> {
    let network: Network = toml::from_str(document).map_err(|e| Error::Malformed(e.to_string()))?;

    let mut bus_ids = HashSet::new();
    for bus in &network.buses {
        if !bus_ids.insert(bus.id) {
            return Err(Error::DuplicateBus(bus.id));
        }
    }
    let mut line_ids = HashSet::new();
    for line in &network.lines {
        if !line_ids.insert(&line.id) {
            return Err(Error::DuplicateLine(line.id.clone()));
        }
        for bus in [line.from_bus, line.to_bus] {
            if !bus_ids.contains(&bus) {
                return Err(Error::UnknownBus {
                    line: line.id.clone(),
                    bus,
                });
            }
        }
    }
    let slacks: Vec<BusId> = network
        .buses
        .iter()
        .filter(|b| b.is_slack)
        .map(|b| b.id)
        .collect();
    match slacks.len() {
        0 => Err(Error::NoSlack),
        1 => Ok(network),
        _ => Err(Error::MultipleSlack(slacks)),
    }
}

/// Serializes a network in the canonical document form accepted by
/// [`parse_network`].
pub fn render_network(network: &Network) -> String {
    toml::to_string(network).expect("network is always representable as TOML")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonpositiveBaseMva(f64),
    TooFewBuses(usize),
    NoSlack,
    MultipleSlack(Vec<BusId>),
    DuplicateBus(BusId),
    DuplicateLine(LineId),
    NegativeDemand(BusId),
    NegativeGenCapacity(BusId),
    NegativeSetpoint(BusId),
    SetpointAboveCapacity(BusId),
    NonpositiveReactance(LineId),
    NegativeResistance(LineId),
    NonpositiveCapacity(LineId),
    SelfLoop(LineId),
    UnknownBus { line: LineId, bus: BusId },
    Disconnected(BusId),
    ExcessPrecision { item: String, field: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonpositiveBaseMva(v) => write!(f, "nonpositive base_mva: {v}"),
            Violation::TooFewBuses(n) => write!(f, "too few buses: {n} (need at least 2)"),
            Violation::NoSlack => write!(f, "no slack bus"),
            Violation::MultipleSlack(ids) => {
                let ids: Vec<String> = ids.iter().map(ToString::to_string).collect();
                write!(f, "multiple slack buses: {}", ids.join(", "))
            }
            Violation::DuplicateBus(id) => write!(f, "duplicate bus id: {id}"),
            Violation::DuplicateLine(id) => write!(f, "duplicate line id: {id}"),
            Violation::NegativeDemand(id) => write!(f, "negative demand: {id}"),
            Violation::NegativeGenCapacity(id) => write!(f, "negative generation capacity: {id}"),
            Violation::NegativeSetpoint(id) => write!(f, "negative generation setpoint: {id}"),
            Violation::SetpointAboveCapacity(id) => {
                write!(f, "generation setpoint above capacity: {id}")
            }
            Violation::NonpositiveReactance(id) => write!(f, "nonpositive reactance: {id}"),
            Violation::NegativeResistance(id) => write!(f, "negative resistance: {id}"),
            Violation::NonpositiveCapacity(id) => write!(f, "nonpositive capacity: {id}"),
            Violation::SelfLoop(id) => write!(f, "line connects a bus to itself: {id}"),
            Violation::UnknownBus { line, bus } => {
                write!(f, "unknown bus: {line} references {bus}")
            }
            Violation::Disconnected(id) => write!(f, "disconnected: {id}"),
            Violation::ExcessPrecision { item, field } => write!(
                f,
                "more than {MW_FRACTION_DIGITS} fraction digits: {item} {field}"
            ),
        }
    }
}

/// Every violated invariant of a network; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, message: &str) -> bool {
        self.violations.iter().any(|v| v.to_string() == message)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn has_excess_precision(mw: f64) -> bool {
    let scaled = mw * 10f64.powi(MW_FRACTION_DIGITS);
    mw.is_finite() && (scaled - scaled.round()).abs() > 1e-6
}

pub fn validate_network(network: &Network) -> ValidationReport {
    let mut out = Vec::new();

    if !(network.base_mva > 0.0) || !network.base_mva.is_finite() {
        out.push(Violation::NonpositiveBaseMva(network.base_mva));
    }
    if network.buses.len() < 2 {
        out.push(Violation::TooFewBuses(network.buses.len()));
    }

    let slacks: Vec<BusId> = network
        .buses
        .iter()
        .filter(|b| b.is_slack)
        .map(|b| b.id)
        .collect();
    match slacks.len() {
        0 => out.push(Violation::NoSlack),
        1 => {}
        _ => out.push(Violation::MultipleSlack(slacks)),
    }

    let mut index = HashMap::new();
    for (i, bus) in network.buses.iter().enumerate() {
        if index.insert(bus.id, i).is_some() {
            out.push(Violation::DuplicateBus(bus.id));
        }
        if !(bus.demand_mw >= 0.0) {
            out.push(Violation::NegativeDemand(bus.id));
        }
        if !(bus.gen_capacity_mw >= 0.0) {
            out.push(Violation::NegativeGenCapacity(bus.id));
        }
        if !(bus.gen_setpoint_mw >= 0.0) {
            out.push(Violation::NegativeSetpoint(bus.id));
        }
        if bus.gen_setpoint_mw > bus.gen_capacity_mw {
            out.push(Violation::SetpointAboveCapacity(bus.id));
        }
        for (field, value) in [
            ("demand_mw", bus.demand_mw),
            ("gen_capacity_mw", bus.gen_capacity_mw),
            ("gen_setpoint_mw", bus.gen_setpoint_mw),
        ] {
            if has_excess_precision(value) {
                out.push(Violation::ExcessPrecision {
                    item: bus.id.to_string(),
                    field,
                });
            }
        }
    }

    let mut line_ids = HashSet::new();
    let mut adjacency = vec![Vec::new(); network.buses.len()];
    for line in &network.lines {
        if !line_ids.insert(&line.id) {
            out.push(Violation::DuplicateLine(line.id.clone()));
        }
        if !(line.reactance_pu > 0.0) || !line.reactance_pu.is_finite() {
            out.push(Violation::NonpositiveReactance(line.id.clone()));
        }
        if !(line.resistance_pu >= 0.0) || !line.resistance_pu.is_finite() {
            out.push(Violation::NegativeResistance(line.id.clone()));
        }
        if !(line.capacity_mw > 0.0) || !line.capacity_mw.is_finite() {
            out.push(Violation::NonpositiveCapacity(line.id.clone()));
        }
        if has_excess_precision(line.capacity_mw) {
            out.push(Violation::ExcessPrecision {
                item: line.id.to_string(),
                field: "capacity_mw",
            });
        }
        if line.from_bus == line.to_bus {
            out.push(Violation::SelfLoop(line.id.clone()));
        }
        let mut ends = [None, None];
        for (slot, bus) in ends.iter_mut().zip([line.from_bus, line.to_bus]) {
            match index.get(&bus) {
                Some(&i) => *slot = Some(i),
                None => out.push(Violation::UnknownBus {
                    line: line.id.clone(),
                    bus,
                }),
            }
        }
        if let [Some(a), Some(b)] = ends {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }

    if !network.buses.is_empty() {
        let mut seen = vec![false; network.buses.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        for (bus, reached) in network.buses.iter().zip(&seen) {
            if !reached {
                out.push(Violation::Disconnected(bus.id));
            }
        }
    }

    ValidationReport { violations: out }
}

/// Parses and validates in one step, folding validation failures into
/// [`Error::Invalid`].
pub fn load_network(document: &str) -> Result<Network> {
    let network = parse_network(document)?;
    let report = validate_network(&network);
    if report.is_empty() {
        Ok(network)
    } else {
        Err(Error::Invalid(report))
    }
}

/// Capacity configurations of the five-bus case study.
///
/// The variants are cumulative: case 2 derates T2 to 25 MW, case 3 keeps that
/// derating and additionally derates T5 to 25 MW.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseVariant {
    Case1,
    Case2,
    Case3,
}

impl CaseVariant {
    pub const ALL: [CaseVariant; 3] = [CaseVariant::Case1, CaseVariant::Case2, CaseVariant::Case3];

    pub fn number(self) -> u8 {
        match self {
            CaseVariant::Case1 => 1,
            CaseVariant::Case2 => 2,
            CaseVariant::Case3 => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            CaseVariant::Case1 => "case1",
            CaseVariant::Case2 => "case2",
            CaseVariant::Case3 => "case3",
        }
    }

    /// `(line id, capacity_mw)` overrides applied on top of the base network.
    pub fn capacity_overrides(self) -> &'static [(&'static str, f64)] {
        match self {
            CaseVariant::Case1 => &[],
            CaseVariant::Case2 => &[("T2", 25.0)],
            CaseVariant::Case3 => &[("T2", 25.0), ("T5", 25.0)],
        }
    }
}

impl fmt::Display for CaseVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CaseVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "case1" | "case-1" => Ok(CaseVariant::Case1),
            "2" | "case2" | "case-2" => Ok(CaseVariant::Case2),
            "3" | "case3" | "case-3" => Ok(CaseVariant::Case3),
            other => Err(format!("unknown case {other:?} (expected 1, 2 or 3)")),
        }
    }
}

/// Returns a copy of `network` with the capacities of `variant` applied.
pub fn apply_case_variant(network: &Network, variant: CaseVariant) -> Result<Network> {
    let mut out = network.clone();
    for &(line, capacity_mw) in variant.capacity_overrides() {
        let k = network.line_index(line).ok_or_else(|| Error::MissingLine {
            case: variant.tag().to_owned(),
            line: LineId::from(line),
        })?;
        out.lines[k].capacity_mw = capacity_mw;
    }
    Ok(out)
}
