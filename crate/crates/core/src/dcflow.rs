//! Lossless DC load flow with slack-bus balancing.
//!
//! Angles come from `B' θ = P` over the non-slack buses, where `B'` is the
//! nodal susceptance matrix with the slack row and column removed. Line
//! limits are not enforced; violations are measured afterwards by the
//! adequacy module.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::Network;

/// Largest tolerated `‖B'θ − P‖∞` in per unit.
pub const ANGLE_RESIDUAL_TOL_PU: f64 = 1e-9;

/// Reduced susceptance matrix and the bus index each row refers to.
#[derive(Debug, Clone)]
pub struct ReducedSusceptance {
    pub matrix: DMatrix<f64>,
    /// Network bus index of each row, in document order with the slack skipped.
    pub buses: Vec<usize>,
    pub slack: usize,
}

/// Bus voltage angles in radians, one per bus in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSolution {
    pub angle_rad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSolution {
    /// Power entering each line at its `from` terminal (MW, signed).
    pub from_flow_mw: Vec<f64>,
    /// Power leaving each line at its `to` terminal (MW, signed).
    pub to_flow_mw: Vec<f64>,
    pub loss_mw: Vec<f64>,
    pub slack_injection_mw: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FlowSolution {
    /// Flow at the midpoint of each line: the average of both terminal flows.
    pub fn mid_flow_mw(&self) -> Vec<f64> {
        self.from_flow_mw
            .iter()
            .zip(&self.to_flow_mw)
            .map(|(f, t)| 0.5 * (f + t))
            .collect()
    }

    pub fn total_loss_mw(&self) -> f64 {
        self.loss_mw.iter().sum()
    }
}

/// Generation at every bus: setpoints for ordinary generators, the balancing
/// injection for the slack.
pub fn dispatched_generation_mw(network: &Network, flow: &FlowSolution) -> Vec<f64> {
    network
        .buses
        .iter()
        .map(|b| {
            if b.is_slack {
                flow.slack_injection_mw
            } else {
                b.gen_setpoint_mw
            }
        })
        .collect()
}

pub fn build_reduced_susceptance(network: &Network) -> Result<ReducedSusceptance> {
    let slack = network
        .slack_index()
        .ok_or_else(|| Error::Singular("network has no slack bus".into()))?;
    let nb = network.buses.len();
    let mut row = vec![None; nb];
    let mut buses = Vec::with_capacity(nb.saturating_sub(1));
    for i in (0..nb).filter(|&i| i != slack) {
        row[i] = Some(buses.len());
        buses.push(i);
    }

    let mut matrix = DMatrix::zeros(buses.len(), buses.len());
    for (line, (from, to)) in network.lines.iter().zip(network.terminals()) {
        let b = 1.0 / line.reactance_pu;
        if let Some(i) = row[from] {
            matrix[(i, i)] += b;
        }
        if let Some(j) = row[to] {
            matrix[(j, j)] += b;
        }
        if let (Some(i), Some(j)) = (row[from], row[to]) {
            matrix[(i, j)] -= b;
            matrix[(j, i)] -= b;
        }
    }

    // Every bus must reach the slack, otherwise B' is singular.
    let mut reached = vec![false; nb];
    reached[slack] = true;
    let terminals = network.terminals();
    let mut grew = true;
    while grew {
        grew = false;
        for &(a, b) in &terminals {
            if reached[a] != reached[b] {
                reached[a] = true;
                reached[b] = true;
                grew = true;
            }
        }
    }
    if let Some(i) = reached.iter().position(|r| !r) {
        return Err(Error::Singular(format!(
            "{} is not connected to the slack bus",
            network.buses[i].id
        )));
    }

    Ok(ReducedSusceptance {
        matrix,
        buses,
        slack,
    })
}

impl ReducedSusceptance {
    /// Solves for bus angles given per-unit injections at the non-slack buses
    /// (in row order).
    pub fn solve(&self, injections_pu: &[f64]) -> Result<AngleSolution> {
        assert_eq!(
            injections_pu.len(),
            self.buses.len(),
            "one injection per non-slack bus"
        );
        let rhs = DVector::from_column_slice(injections_pu);
        let theta = self
            .matrix
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("LU factorization failed".into()))?;
        let residual = (&self.matrix * &theta - &rhs).amax();
        if !(residual < ANGLE_RESIDUAL_TOL_PU) {
            return Err(Error::Singular(format!(
                "angle residual {residual:e} pu exceeds {ANGLE_RESIDUAL_TOL_PU:e}"
            )));
        }

        let mut angle_rad = vec![0.0; self.buses.len() + 1];
        for (&bus, &value) in self.buses.iter().zip(theta.iter()) {
            angle_rad[bus] = value;
        }
        Ok(AngleSolution { angle_rad })
    }
}

pub fn solve_angles(network: &Network, injections_pu: &[f64]) -> Result<AngleSolution> {
    build_reduced_susceptance(network)?.solve(injections_pu)
}

/// Per-line flow at the line midpoint (MW); for a lossless line this is the
/// flow at both terminals.
pub(crate) fn mid_flows_mw(network: &Network, angles: &AngleSolution) -> Vec<f64> {
    network
        .lines
        .iter()
        .zip(network.terminals())
        .map(|(line, (from, to))| {
            (angles.angle_rad[from] - angles.angle_rad[to]) / line.reactance_pu * network.base_mva
        })
        .collect()
}

/// Assembles terminal flows from midpoint flows and per-line losses; each
/// terminal carries half the loss. Shared by the lossless and lossy solvers so
/// zero losses give identical bits on both paths.
pub(crate) fn assemble(
    network: &Network,
    mid_mw: Vec<f64>,
    loss_mw: Vec<f64>,
    converged: bool,
    iterations: usize,
) -> FlowSolution {
    let (from_flow_mw, to_flow_mw): (Vec<f64>, Vec<f64>) = mid_mw
        .iter()
        .zip(&loss_mw)
        .map(|(&m, &l)| {
            if l == 0.0 {
                (m, m)
            } else {
                (m + 0.5 * l, m - 0.5 * l)
            }
        })
        .unzip();
    // Recomputed from the terminals so `from - to == loss` holds exactly.
    let loss_mw: Vec<f64> = from_flow_mw
        .iter()
        .zip(&to_flow_mw)
        .zip(&loss_mw)
        .map(|((f, t), &l)| if l == 0.0 { 0.0 } else { f - t })
        .collect();
    let total_loss: f64 = loss_mw.iter().sum();
    FlowSolution {
        from_flow_mw,
        to_flow_mw,
        slack_injection_mw: network.total_demand_mw() + total_loss
            - network.scheduled_generation_mw(),
        loss_mw,
        converged,
        iterations,
    }
}

/// Line flows for a given angle solution. The slack injection is whatever
/// the angles imply at the slack bus.
pub fn compute_line_flows(network: &Network, angles: &AngleSolution) -> FlowSolution {
    let flows = mid_flows_mw(network, angles);
    let terminals = network.terminals();
    let slack = network.slack_index();
    let slack_injection_mw = match slack {
        Some(s) => {
            let net_out: f64 = flows
                .iter()
                .zip(&terminals)
                .map(|(&f, &(a, b))| {
                    if a == s {
                        f
                    } else if b == s {
                        -f
                    } else {
                        0.0
                    }
                })
                .sum();
            net_out + network.buses[s].demand_mw
        }
        None => 0.0,
    };
    FlowSolution {
        from_flow_mw: flows.clone(),
        to_flow_mw: flows,
        loss_mw: vec![0.0; network.lines.len()],
        slack_injection_mw,
        converged: true,
        iterations: 1,
    }
}

/// Per-unit injections at the non-slack buses for the scheduled dispatch with
/// `extra_demand_mw` added to each bus's load.
pub(crate) fn dispatch_injections_pu(
    network: &Network,
    system: &ReducedSusceptance,
    extra_demand_mw: &[f64],
) -> Vec<f64> {
    system
        .buses
        .iter()
        .map(|&i| {
            let bus = &network.buses[i];
            (bus.gen_setpoint_mw - bus.demand_mw - extra_demand_mw[i]) / network.base_mva
        })
        .collect()
}

/// Dispatches every non-slack generator at its setpoint, lets the slack
/// balance the system, and solves the DC flow. Line and slack capacities are
/// not enforced.
pub fn run_lossless_dispatch_flow(network: &Network) -> Result<FlowSolution> {
    let system = build_reduced_susceptance(network)?;
    let no_extra = vec![0.0; network.buses.len()];
    let angles = system.solve(&dispatch_injections_pu(network, &system, &no_extra))?;
    let mid = mid_flows_mw(network, &angles);
    let zero = vec![0.0; mid.len()];
    Ok(assemble(network, mid, zero, true, 1))
}

/// Largest absolute KCL mismatch over all buses (MW), counting terminal flows
/// at the bus side of each line.
pub fn kcl_residual_mw(network: &Network, flow: &FlowSolution) -> f64 {
    let generation = dispatched_generation_mw(network, flow);
    let mut balance: Vec<f64> = network
        .buses
        .iter()
        .zip(&generation)
        .map(|(b, g)| g - b.demand_mw)
        .collect();
    for (k, (from, to)) in network.terminals().into_iter().enumerate() {
        balance[from] -= flow.from_flow_mw[k];
        balance[to] += flow.to_flow_mw[k];
    }
    balance.into_iter().fold(0.0, |acc, r| acc.max(r.abs()))
}
