//! Case-study runner: evaluates the selected capacity cases under the load
//! flow method and/or the max-flow baseline, with and without losses, and
//! renders the result as fixed-width tables or as one JSON document.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::adequacy::{aggregate_adequacy, AdequacyReport, BusAdequacy, DEFAULT_EPS_MW};
use crate::dcflow::{run_lossless_dispatch_flow, FlowSolution};
use crate::error::{Error, Result};
use crate::loss::{run_lossy_flow, DEFAULT_MAX_ITER, DEFAULT_TOL_MW};
use crate::mcmf::{build_flow_graph, dns_mcmf, line_flows_mw, max_flow};
use crate::network::{apply_case_variant, load_network, BusId, CaseVariant, LineId, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Load flow based DNS/GNS.
    Pm,
    /// Max-flow/min-cut baseline.
    Mcmf,
    Both,
}

impl Method {
    fn load_flow(self) -> bool {
        matches!(self, Method::Pm | Method::Both)
    }

    fn max_flow(self) -> bool {
        matches!(self, Method::Mcmf | Method::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LossSelection {
    On,
    Off,
    Both,
}

impl LossSelection {
    pub fn modes(self) -> &'static [LossMode] {
        match self {
            LossSelection::Off => &[LossMode::Lossless],
            LossSelection::On => &[LossMode::Lossy],
            LossSelection::Both => &[LossMode::Lossless, LossMode::Lossy],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    Lossless,
    Lossy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseSelection {
    One(CaseVariant),
    All,
}

impl CaseSelection {
    pub fn cases(self) -> Vec<CaseVariant> {
        match self {
            CaseSelection::One(c) => vec![c],
            CaseSelection::All => CaseVariant::ALL.to_vec(),
        }
    }
}

impl std::str::FromStr for CaseSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(CaseSelection::All)
        } else {
            s.parse().map(CaseSelection::One)
        }
    }
}

/// Numerical settings and selections shared by every evaluated case.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub cases: Vec<CaseVariant>,
    pub method: Method,
    pub losses: LossSelection,
    pub eps_mw: f64,
    pub tol_mw: f64,
    pub max_iter: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            cases: CaseVariant::ALL.to_vec(),
            method: Method::Both,
            losses: LossSelection::Both,
            eps_mw: DEFAULT_EPS_MW,
            tol_mw: DEFAULT_TOL_MW,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl EvalOptions {
    fn check(&self) -> Result<()> {
        if !(self.eps_mw >= 0.0) || !self.eps_mw.is_finite() {
            return Err(Error::InvalidOption {
                name: "eps",
                message: format!("must be a nonnegative number, got {}", self.eps_mw),
            });
        }
        if !(self.tol_mw > 0.0) || !self.tol_mw.is_finite() {
            return Err(Error::InvalidOption {
                name: "tol",
                message: format!("must be positive, got {}", self.tol_mw),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOption {
                name: "max-iter",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub network_path: PathBuf,
    pub case: CaseSelection,
    pub options: EvalOptions,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub network_file: String,
    pub network_sha256: String,
    pub method: Method,
    pub losses: LossSelection,
    pub eps_mw: f64,
    pub tol_mw: f64,
    pub max_iter: usize,
}

/// Differences below this are invisible at one-decimal rendering and are not
/// reported as disagreements between the methods.
pub const DISPLAY_RESOLUTION_MW: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Totals {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dns_pm_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gns_pm_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wheeling_loss_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dns_mcmf_mw: Option<f64>,
    /// `DNS_pm / DNS_mcmf`, present when both are positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pm_to_mcmf_dns_ratio: Option<f64>,
}

impl Totals {
    /// True when the max-flow estimate reports less unserved demand than the
    /// load flow method.
    pub fn mcmf_underestimates(&self) -> bool {
        matches!(
            (self.dns_pm_mw, self.dns_mcmf_mw),
            (Some(pm), Some(mc)) if pm - mc > DISPLAY_RESOLUTION_MW
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineFlow {
    pub line_id: LineId,
    pub from_flow_mw: f64,
    pub to_flow_mw: f64,
    pub loss_mw: f64,
    pub capacity_mw: f64,
    pub congested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub slack_injection_mw: f64,
    pub total_loss_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmfLineFlow {
    pub line_id: LineId,
    pub flow_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmfSummary {
    pub max_flow_mw: f64,
    pub total_demand_mw: f64,
    pub dns_mw: f64,
    /// Min-cut arcs as `tail-head` labels (`S`, `L`, or bus number).
    pub min_cut: Vec<String>,
    pub line_flows: Vec<McmfLineFlow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_bus: Option<Vec<BusAdequacy>>,
    pub totals: Totals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub congested_lines: Option<Vec<LineId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_line: Option<Vec<LineFlow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcmf: Option<McmfSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub metadata: Metadata,
    pub buses: Vec<BusId>,
    pub lines: Vec<LineId>,
    pub cases: BTreeMap<CaseVariant, BTreeMap<LossMode, ModeReport>>,
}

impl ComparisonReport {
    pub fn mode(&self, case: CaseVariant, mode: LossMode) -> Option<&ModeReport> {
        self.cases.get(&case)?.get(&mode)
    }

    /// True when every lossy flow that was run converged.
    pub fn converged(&self) -> bool {
        self.cases
            .values()
            .flat_map(|m| m.values())
            .filter_map(|m| m.convergence.as_ref())
            .all(|c| c.converged)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ComparisonReport,
    /// 0 on success, 1 if a lossy flow did not converge.
    pub exit_code: i32,
}

fn mcmf_summary(network: &Network) -> McmfSummary {
    let graph = build_flow_graph(network);
    let result = max_flow(&graph);
    let flows = line_flows_mw(network, &graph, &result);
    McmfSummary {
        max_flow_mw: result.max_flow_mw,
        total_demand_mw: network.total_demand_mw(),
        dns_mw: dns_mcmf(network, &result),
        min_cut: result
            .min_cut_arcs
            .iter()
            .map(|&a| graph.arc_label(a))
            .collect(),
        line_flows: network
            .lines
            .iter()
            .zip(flows)
            .map(|(l, flow_mw)| McmfLineFlow {
                line_id: l.id.clone(),
                flow_mw,
            })
            .collect(),
    }
}

fn per_line(network: &Network, flow: &FlowSolution, adequacy: &AdequacyReport) -> Vec<LineFlow> {
    network
        .lines
        .iter()
        .enumerate()
        .map(|(k, line)| LineFlow {
            line_id: line.id.clone(),
            from_flow_mw: flow.from_flow_mw[k],
            to_flow_mw: flow.to_flow_mw[k],
            loss_mw: flow.loss_mw[k],
            capacity_mw: line.capacity_mw,
            congested: adequacy.congested_line_ids.contains(&line.id),
        })
        .collect()
}

/// Evaluates an already validated network. `source` is the document the
/// network was read from; only its hash is recorded.
pub fn evaluate(
    base: &Network,
    source: &[u8],
    network_file: &str,
    options: &EvalOptions,
) -> Result<ComparisonReport> {
    options.check()?;

    // Capacities never enter the flow equations, so one solve per loss mode
    // serves every case.
    let mut flows: BTreeMap<LossMode, FlowSolution> = BTreeMap::new();
    if options.method.load_flow() {
        for &mode in options.losses.modes() {
            let flow = match mode {
                LossMode::Lossless => run_lossless_dispatch_flow(base)?,
                LossMode::Lossy => run_lossy_flow(base, options.tol_mw, options.max_iter)?,
            };
            flows.insert(mode, flow);
        }
    }

    let mut cases = BTreeMap::new();
    for &case in &options.cases {
        let network = apply_case_variant(base, case)?;
        let mcmf = options.method.max_flow().then(|| mcmf_summary(&network));

        let mut modes = BTreeMap::new();
        for &mode in options.losses.modes() {
            let mut totals = Totals {
                dns_mcmf_mw: mcmf.as_ref().map(|m| m.dns_mw),
                ..Totals::default()
            };
            let mut report = ModeReport {
                per_bus: None,
                totals: Totals::default(),
                congested_lines: None,
                per_line: None,
                convergence: None,
                mcmf: mcmf.clone(),
            };
            if let Some(flow) = flows.get(&mode) {
                let adequacy = aggregate_adequacy(&network, flow, options.eps_mw);
                totals.dns_pm_mw = Some(adequacy.dns_total_mw);
                totals.gns_pm_mw = Some(adequacy.gns_total_mw);
                totals.wheeling_loss_mw = Some(adequacy.wheeling_loss_mw);
                report.per_line = Some(per_line(&network, flow, &adequacy));
                if mode == LossMode::Lossy {
                    report.convergence = Some(Convergence {
                        converged: flow.converged,
                        iterations: flow.iterations,
                        slack_injection_mw: flow.slack_injection_mw,
                        total_loss_mw: flow.total_loss_mw(),
                    });
                }
                report.congested_lines = Some(adequacy.congested_line_ids);
                report.per_bus = Some(adequacy.per_bus);
            }
            if let (Some(pm), Some(mc)) = (totals.dns_pm_mw, totals.dns_mcmf_mw) {
                if pm > 0.0 && mc > 0.0 {
                    totals.pm_to_mcmf_dns_ratio = Some(pm / mc);
                }
            }
            report.totals = totals;
            modes.insert(mode, report);
        }
        cases.insert(case, modes);
    }

    Ok(ComparisonReport {
        metadata: Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            network_file: network_file.to_owned(),
            network_sha256: hex::encode(Sha256::digest(source)),
            method: options.method,
            losses: options.losses,
            eps_mw: options.eps_mw,
            tol_mw: options.tol_mw,
            max_iter: options.max_iter,
        },
        buses: base.buses.iter().map(|b| b.id).collect(),
        lines: base.lines.iter().map(|l| l.id.clone()).collect(),
        cases,
    })
}

/// Reads, validates and evaluates the configured network. Input problems are
/// errors; a lossy flow that fails to converge yields exit code 1 alongside
/// the report.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let source = std::fs::read(&config.network_path).map_err(|source| Error::Io {
        path: config.network_path.clone(),
        source,
    })?;
    let text = String::from_utf8(source.clone())
        .map_err(|e| Error::Malformed(format!("not UTF-8: {e}")))?;
    let network = load_network(&text)?;
    let file_name = config
        .network_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let options = EvalOptions {
        cases: config.case.cases(),
        ..config.options.clone()
    };
    let report = evaluate(&network, &source, &file_name, &options)?;
    let exit_code = if report.converged() { 0 } else { 1 };
    Ok(RunOutcome { report, exit_code })
}

pub fn render_structured(report: &ComparisonReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn render(report: &ComparisonReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => render_tables(report),
        OutputFormat::Structured => render_structured(report),
    }
}

/// MW value with at most `decimals` fraction digits and trailing zeros
/// dropped; negative zero prints as `0`.
pub fn format_mw(value: f64, decimals: usize) -> String {
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

struct Table {
    title: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self, out: &mut String) {
        let width = |c: usize| {
            self.rows
                .iter()
                .filter_map(|r| r.get(c))
                .chain(std::iter::once(&self.header[c]))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..self.header.len()).map(width).collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, &w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect::<Vec<_>>()
                .join(" | ")
        };
        let header = line(&self.header);
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{}", "-".repeat(header.chars().count()));
        for row in &self.rows {
            let _ = writeln!(out, "{}", line(row).trim_end());
        }
        out.push('\n');
    }
}

const MISSING: &str = "-";

fn bus_columns(report: &ComparisonReport) -> Vec<String> {
    report
        .buses
        .iter()
        .map(|b| format!("Bus-{}", b.0))
        .collect()
}

fn per_bus_cells(report: &ComparisonReport, mode: Option<&ModeReport>) -> Vec<String> {
    match mode.and_then(|m| m.per_bus.as_ref()) {
        Some(buses) => buses.iter().map(|b| format_mw(b.diff_mw, 1)).collect(),
        None => vec![MISSING.into(); report.buses.len()],
    }
}

fn opt_mw(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| MISSING.into(), |v| format_mw(v, decimals))
}

fn lossless_table(report: &ComparisonReport) -> Table {
    let mut header = vec!["Case".to_owned()];
    header.extend(bus_columns(report));
    header.extend(["DNS PM".to_owned(), "DNS MCMF".to_owned()]);
    let rows = report
        .cases
        .keys()
        .map(|&case| {
            let mode = report.mode(case, LossMode::Lossless);
            let mut row = vec![case.number().to_string()];
            row.extend(per_bus_cells(report, mode));
            row.push(opt_mw(mode.and_then(|m| m.totals.dns_pm_mw), 1));
            row.push(opt_mw(mode.and_then(|m| m.totals.dns_mcmf_mw), 1));
            row
        })
        .collect();
    Table {
        title: "Per-bus imbalance, lossless flow (MW; DNS > 0, GNS < 0)".into(),
        header,
        rows,
    }
}

fn lossy_table(report: &ComparisonReport) -> Table {
    let mut header = vec!["Case".to_owned()];
    header.extend(bus_columns(report));
    header.extend(["DNS".to_owned(), "GNS".to_owned()]);
    let rows = report
        .cases
        .keys()
        .map(|&case| {
            let mode = report.mode(case, LossMode::Lossy);
            let mut row = vec![case.number().to_string()];
            row.extend(per_bus_cells(report, mode));
            row.push(opt_mw(mode.and_then(|m| m.totals.dns_pm_mw), 1));
            row.push(opt_mw(mode.and_then(|m| m.totals.gns_pm_mw), 1));
            row
        })
        .collect();
    Table {
        title: "Per-bus imbalance, flow with losses (MW; DNS > 0, GNS < 0)".into(),
        header,
        rows,
    }
}

fn flow_table(report: &ComparisonReport) -> Table {
    let modes = report.metadata.losses.modes();
    let show_pm = report.metadata.method.load_flow();
    let show_mcmf = report.metadata.method.max_flow();
    let cases: Vec<CaseVariant> = report.cases.keys().copied().collect();

    let mut header = vec!["Line".to_owned()];
    if show_pm {
        for mode in modes {
            match mode {
                LossMode::Lossless => header.push("DC LLN".into()),
                LossMode::Lossy => header.extend(["DC NL from".into(), "DC NL to".into()]),
            }
        }
    }
    if show_mcmf {
        header.extend(cases.iter().map(|c| format!("MCMF case-{}", c.number())));
    }
    let pm_columns = header.len() - 1 - if show_mcmf { cases.len() } else { 0 };

    // DC flows do not depend on the case; take them from the first one.
    let first = cases.first().copied();
    let mut rows = Vec::new();
    if cases.is_empty() {
        return Table {
            title: "Line flows (MW)".into(),
            header,
            rows,
        };
    }
    for (k, line) in report.lines.iter().enumerate() {
        let mut row = vec![line.to_string()];
        if show_pm {
            for &mode in modes {
                let flow = first
                    .and_then(|c| report.mode(c, mode))
                    .and_then(|m| m.per_line.as_ref())
                    .map(|p| &p[k]);
                match mode {
                    LossMode::Lossless => row.push(opt_mw(flow.map(|f| f.from_flow_mw), 2)),
                    LossMode::Lossy => {
                        row.push(opt_mw(flow.map(|f| f.from_flow_mw), 2));
                        row.push(opt_mw(flow.map(|f| f.to_flow_mw), 2));
                    }
                }
            }
        }
        if show_mcmf {
            for &case in &cases {
                let flow = any_mode(report, case)
                    .and_then(|m| m.mcmf.as_ref())
                    .map(|m| m.line_flows[k].flow_mw);
                row.push(opt_mw(flow, 2));
            }
        }
        rows.push(row);
    }

    let summary_row = |label: &str, value: &dyn Fn(CaseVariant) -> Option<f64>| {
        let mut row = vec![label.to_owned()];
        row.extend(std::iter::repeat_n(String::new(), pm_columns));
        row.extend(cases.iter().map(|&c| opt_mw(value(c), 1)));
        row
    };
    if show_mcmf {
        rows.push(summary_row("Max flow at min cut", &|c| {
            any_mode(report, c)
                .and_then(|m| m.mcmf.as_ref())
                .map(|m| m.max_flow_mw)
        }));
    }
    if show_pm && show_mcmf {
        for &mode in modes {
            let label = match mode {
                LossMode::Lossless => "WL (PM, lossless)",
                LossMode::Lossy => "WL (PM, lossy)",
            };
            rows.push(summary_row(label, &|c| {
                report.mode(c, mode).and_then(|m| m.totals.wheeling_loss_mw)
            }));
        }
    }

    Table {
        title: "Line flows (MW)".into(),
        header,
        rows,
    }
}

fn any_mode(report: &ComparisonReport, case: CaseVariant) -> Option<&ModeReport> {
    report.cases.get(&case)?.values().next()
}

fn notes(report: &ComparisonReport) -> Vec<String> {
    let mut notes = Vec::new();
    for (&case, modes) in &report.cases {
        if let Some(m) = modes.get(&LossMode::Lossless) {
            let t = &m.totals;
            if let (Some(pm), Some(mc)) = (t.dns_pm_mw, t.dns_mcmf_mw) {
                if let Some(ratio) = t.pm_to_mcmf_dns_ratio.filter(|_| t.mcmf_underestimates()) {
                    notes.push(format!(
                        "case {}: MCMF underestimate: DNS {} MW vs {} MW (factor {})",
                        case.number(),
                        format_mw(pm, 1),
                        format_mw(mc, 1),
                        format_mw(ratio, 2)
                    ));
                } else if mc == 0.0 && pm > 0.0 {
                    notes.push(format!(
                        "case {}: MCMF reports no DNS; load flow finds {} MW",
                        case.number(),
                        format_mw(pm, 1)
                    ));
                }
            }
        }
        if let Some(c) = modes
            .get(&LossMode::Lossy)
            .and_then(|m| m.convergence.as_ref())
        {
            if c.converged {
                notes.push(format!(
                    "case {}: lossy flow converged in {} iterations, total loss {} MW",
                    case.number(),
                    c.iterations,
                    format_mw(c.total_loss_mw, 2)
                ));
            } else {
                notes.push(format!(
                    "case {}: lossy flow did not converge after {} iterations",
                    case.number(),
                    c.iterations
                ));
            }
        }
    }
    notes
}

/// Fixed-width text tables: per-bus DNS/GNS without and with losses, and the
/// per-line flow comparison.
pub fn render_tables(report: &ComparisonReport) -> String {
    let modes = report.metadata.losses.modes();
    let mut out = String::new();
    if modes.contains(&LossMode::Lossless) {
        lossless_table(report).render(&mut out);
    }
    flow_table(report).render(&mut out);
    if modes.contains(&LossMode::Lossy) {
        lossy_table(report).render(&mut out);
    }
    let notes = notes(report);
    if !notes.is_empty() {
        out.push_str("Notes\n");
        for n in notes {
            let _ = writeln!(out, "  {n}");
        }
    }
    out
}
