//! Lossless DC load flow on the five-bus fixture.
//!
//! ```text
//! cargo run -p adequacy --example dc_flow
//! ```

use adequacy::dcflow::{build_reduced_susceptance, kcl_residual_mw, run_lossless_dispatch_flow};
use adequacy::fixtures;

fn main() -> adequacy::Result<()> {
    let network = fixtures::ieee5();

    let b = build_reduced_susceptance(&network)?;
    println!(
        "reduced susceptance (slack {} removed):{:.3}",
        network.buses[b.slack].id, b.matrix
    );

    let flow = run_lossless_dispatch_flow(&network)?;
    println!("{:<4} {:>8} {:>9}", "line", "flow MW", "capacity");
    for (line, f) in network.lines.iter().zip(&flow.from_flow_mw) {
        println!("{:<4} {:>8.2} {:>9}", line.id, f, line.capacity_mw);
    }
    println!("slack injection {:.2} MW", flow.slack_injection_mw);
    println!("KCL residual {:.1e} MW", kcl_residual_mw(&network, &flow));
    Ok(())
}
