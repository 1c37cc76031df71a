//! Per-bus demand/generation not served and wheeling loss from a solved flow.
//!
//! For bus `s`,
//!
//! ```text
//! DIFF_s = D_s − Σ_in min(|T_f|, T_c) + Σ_out min(|T_f|, T_c) − G_s
//! ```
//!
//! where "in"/"out" follow the actual direction of flow on each line and the
//! minimum is taken per line. A positive `DIFF_s` is demand not served at the
//! bus, a negative one is generation not served. Each line contributes the
//! power seen at the bus side: the receiving terminal for inflow and the
//! sending terminal for outflow.

use serde::Serialize;

use crate::dcflow::{dispatched_generation_mw, FlowSolution};
use crate::network::{BusId, LineId, Network};

pub const DEFAULT_EPS_MW: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusAdequacy {
    pub bus_id: BusId,
    pub diff_mw: f64,
    pub dns_mw: f64,
    pub gns_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdequacyReport {
    pub per_bus: Vec<BusAdequacy>,
    pub dns_total_mw: f64,
    pub gns_total_mw: f64,
    pub wheeling_loss_mw: f64,
    pub congested_line_ids: Vec<LineId>,
}

/// A line's terminals in the direction power actually flows.
#[derive(Debug, Clone, Copy)]
struct Direction {
    sender: usize,
    receiver: usize,
    sent_mw: f64,
    received_mw: f64,
}

fn directions(network: &Network, flow: &FlowSolution) -> Vec<Direction> {
    network
        .terminals()
        .into_iter()
        .enumerate()
        .map(|(k, (from, to))| {
            let (f, t) = (flow.from_flow_mw[k], flow.to_flow_mw[k]);
            if f + t >= 0.0 {
                Direction {
                    sender: from,
                    receiver: to,
                    sent_mw: f,
                    received_mw: t,
                }
            } else {
                Direction {
                    sender: to,
                    receiver: from,
                    sent_mw: -t,
                    received_mw: -f,
                }
            }
        })
        .collect()
}

fn congested_mask(network: &Network, flow: &FlowSolution, eps_mw: f64) -> Vec<bool> {
    directions(network, flow)
        .iter()
        .zip(&network.lines)
        .map(|(d, line)| d.sent_mw.abs() > line.capacity_mw + eps_mw)
        .collect()
}

/// Lines whose sending-end flow exceeds capacity by more than `eps_mw`, in
/// document order. A line loaded exactly to its rating is not congested.
pub fn congested_lines(network: &Network, flow: &FlowSolution, eps_mw: f64) -> Vec<LineId> {
    congested_mask(network, flow, eps_mw)
        .into_iter()
        .zip(&network.lines)
        .filter(|(c, _)| *c)
        .map(|(_, l)| l.id.clone())
        .collect()
}

fn diff_at(network: &Network, directions: &[Direction], generation: &[f64], bus: usize) -> f64 {
    let mut diff = network.buses[bus].demand_mw - generation[bus];
    for (d, line) in directions.iter().zip(&network.lines) {
        if d.receiver == bus {
            diff -= d.received_mw.abs().min(line.capacity_mw);
        } else if d.sender == bus {
            diff += d.sent_mw.abs().min(line.capacity_mw);
        }
    }
    diff
}

/// Signed imbalance `DIFF_s` at the bus with index `bus`.
pub fn bus_diff(network: &Network, flow: &FlowSolution, bus: usize) -> f64 {
    let generation = dispatched_generation_mw(network, flow);
    diff_at(network, &directions(network, flow), &generation, bus)
}

/// Splits a signed imbalance into `(dns_mw, gns_mw)`.
pub fn classify_diff(diff_mw: f64) -> (f64, f64) {
    if diff_mw > 0.0 {
        (diff_mw, 0.0)
    } else if diff_mw < 0.0 {
        (0.0, -diff_mw)
    } else {
        (0.0, 0.0)
    }
}

/// Wheeling loss: total sending-end overload across congested lines.
pub fn wheeling_loss(network: &Network, flow: &FlowSolution, eps_mw: f64) -> f64 {
    directions(network, flow)
        .iter()
        .zip(&network.lines)
        .zip(congested_mask(network, flow, eps_mw))
        .filter(|(_, c)| *c)
        .map(|((d, line), _)| d.sent_mw.abs() - line.capacity_mw)
        .sum()
}

fn build_report(
    network: &Network,
    flow: &FlowSolution,
    eps_mw: f64,
    only_congested_buses: bool,
) -> AdequacyReport {
    let dirs = directions(network, flow);
    let generation = dispatched_generation_mw(network, flow);
    let congested = congested_mask(network, flow, eps_mw);

    let mut touches_congestion = vec![false; network.buses.len()];
    for (d, &c) in dirs.iter().zip(&congested) {
        if c {
            touches_congestion[d.sender] = true;
            touches_congestion[d.receiver] = true;
        }
    }

    let per_bus: Vec<BusAdequacy> = network
        .buses
        .iter()
        .enumerate()
        .map(|(i, bus)| {
            let diff_mw = if only_congested_buses && !touches_congestion[i] {
                0.0
            } else {
                diff_at(network, &dirs, &generation, i)
            };
            let (dns_mw, gns_mw) = classify_diff(diff_mw);
            BusAdequacy {
                bus_id: bus.id,
                diff_mw,
                dns_mw,
                gns_mw,
            }
        })
        .collect();

    AdequacyReport {
        dns_total_mw: per_bus.iter().map(|b| b.dns_mw).sum(),
        gns_total_mw: per_bus.iter().map(|b| b.gns_mw).sum(),
        wheeling_loss_mw: wheeling_loss(network, flow, eps_mw),
        congested_line_ids: congested_lines(network, flow, eps_mw),
        per_bus,
    }
}

/// Evaluates `DIFF_s` only at buses incident to a congested line; every other
/// bus reports zero. Away from congestion the per-line minimum never binds, so
/// the imbalance there is the bus balance residual.
pub fn aggregate_adequacy(network: &Network, flow: &FlowSolution, eps_mw: f64) -> AdequacyReport {
    build_report(network, flow, eps_mw, true)
}

/// Same as [`aggregate_adequacy`] but evaluates every bus.
pub fn aggregate_adequacy_all_buses(
    network: &Network,
    flow: &FlowSolution,
    eps_mw: f64,
) -> AdequacyReport {
    build_report(network, flow, eps_mw, false)
}
