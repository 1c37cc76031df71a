//! Loss-compensated DC flow.
//!
//! Losses are `r·f²` per line, evaluated on the midpoint flow. Half of each
//! line's loss is added as demand at each terminal bus, the flow is re-solved,
//! and the loop repeats until no line loss moves by more than the tolerance.
//! The slack picks up the total loss through the balance equation.

use crate::dcflow::{self, build_reduced_susceptance, FlowSolution};
use crate::error::{Error, Result};
use crate::network::Network;

pub const DEFAULT_TOL_MW: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 50;

/// `r·f²` in per unit; uses per-unit power as the per-unit current at flat
/// voltage.
pub fn line_loss(resistance_pu: f64, flow_pu: f64) -> f64 {
    resistance_pu * flow_pu * flow_pu
}

/// Runs the fixed-point loss loop. Non-convergence is not an error: the last
/// iterate comes back with `converged == false`.
pub fn run_lossy_flow(network: &Network, tol_mw: f64, max_iter: usize) -> Result<FlowSolution> {
    if !(tol_mw > 0.0) {
        return Err(Error::InvalidOption {
            name: "tol",
            message: format!("must be positive, got {tol_mw}"),
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidOption {
            name: "max-iter",
            message: "must be at least 1".into(),
        });
    }

    let system = build_reduced_susceptance(network)?;
    let terminals = network.terminals();
    let base = network.base_mva;
    let mut loss = vec![0.0; network.lines.len()];

    for iteration in 1..=max_iter {
        let mut extra_demand = vec![0.0; network.buses.len()];
        for (&l, &(from, to)) in loss.iter().zip(&terminals) {
            extra_demand[from] += 0.5 * l;
            extra_demand[to] += 0.5 * l;
        }
        let injections = dcflow::dispatch_injections_pu(network, &system, &extra_demand);
        let angles = system.solve(&injections)?;
        let mid = dcflow::mid_flows_mw(network, &angles);

        let updated: Vec<f64> = network
            .lines
            .iter()
            .zip(&mid)
            .map(|(line, &f)| line_loss(line.resistance_pu, f / base) * base)
            .collect();
        let change = updated
            .iter()
            .zip(&loss)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));

        // The reported losses are the ones this solve was balanced against,
        // which keeps bus balance exact at the terminals.
        if change < tol_mw {
            return Ok(dcflow::assemble(network, mid, loss, true, iteration));
        }
        if iteration == max_iter {
            return Ok(dcflow::assemble(network, mid, loss, false, iteration));
        }
        loss = updated;
    }
    unreachable!("loop returns on its last iteration")
}
