//! Loss-compensated DC flow: iterations, per-line losses, and the slack
//! picking up the total loss.
//!
//! ```text
//! cargo run -p adequacy --example lossy_flow
//! ```

use adequacy::dcflow::run_lossless_dispatch_flow;
use adequacy::fixtures;
use adequacy::loss::{run_lossy_flow, DEFAULT_MAX_ITER, DEFAULT_TOL_MW};

fn main() -> adequacy::Result<()> {
    let network = fixtures::ieee5();
    let lossless = run_lossless_dispatch_flow(&network)?;
    let lossy = run_lossy_flow(&network, DEFAULT_TOL_MW, DEFAULT_MAX_ITER)?;

    println!(
        "converged: {} after {} iterations",
        lossy.converged, lossy.iterations
    );
    println!(
        "{:<4} {:>8} {:>8} {:>8} {:>6}",
        "line", "lossless", "from", "to", "loss"
    );
    for (k, line) in network.lines.iter().enumerate() {
        println!(
            "{:<4} {:>8.2} {:>8.2} {:>8.2} {:>6.2}",
            line.id,
            lossless.from_flow_mw[k],
            lossy.from_flow_mw[k],
            lossy.to_flow_mw[k],
            lossy.loss_mw[k]
        );
    }
    println!(
        "slack {:.2} MW -> {:.2} MW (total loss {:.2} MW)",
        lossless.slack_injection_mw,
        lossy.slack_injection_mw,
        lossy.total_loss_mw()
    );

    // A tight tolerance with a tiny budget returns the last iterate.
    let capped = run_lossy_flow(&network, 1e-12, 2)?;
    println!(
        "with 2 iterations at 1e-12: converged = {}",
        capped.converged
    );
    Ok(())
}
