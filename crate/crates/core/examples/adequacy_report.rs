//! Per-bus DNS/GNS and wheeling loss for each case variant of the fixture.
//!
//! ```text
//! cargo run -p adequacy --example adequacy_report
//! ```

use adequacy::adequacy::{aggregate_adequacy, DEFAULT_EPS_MW};
use adequacy::dcflow::run_lossless_dispatch_flow;
use adequacy::network::apply_case_variant;
use adequacy::{fixtures, CaseVariant};

fn main() -> adequacy::Result<()> {
    let base = fixtures::ieee5();
    for case in CaseVariant::ALL {
        let network = apply_case_variant(&base, case)?;
        let flow = run_lossless_dispatch_flow(&network)?;
        let report = aggregate_adequacy(&network, &flow, DEFAULT_EPS_MW);

        let congested: Vec<&str> = report
            .congested_line_ids
            .iter()
            .map(|l| l.as_str())
            .collect();
        println!("{case}: congested {congested:?}");
        for bus in &report.per_bus {
            println!(
                "  {:<6} DIFF {:>7.2}  DNS {:>6.2}  GNS {:>6.2}",
                bus.bus_id.to_string(),
                bus.diff_mw,
                bus.dns_mw,
                bus.gns_mw
            );
        }
        println!(
            "  total DNS {:.2}, GNS {:.2}, wheeling loss {:.2} MW",
            report.dns_total_mw, report.gns_total_mw, report.wheeling_loss_mw
        );
    }
    Ok(())
}
