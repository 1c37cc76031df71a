//! Max-flow/min-cut adequacy baseline on the fixture, checked against
//! exhaustive cut enumeration.
//!
//! ```text
//! cargo run -p adequacy --example mcmf_baseline
//! ```

use adequacy::mcmf::{
    build_flow_graph, dns_mcmf, line_flows_mw, max_flow, min_cut_enumeration_oracle,
};
use adequacy::network::apply_case_variant;
use adequacy::{fixtures, CaseVariant};

fn main() -> adequacy::Result<()> {
    let base = fixtures::ieee5();
    for case in CaseVariant::ALL {
        let network = apply_case_variant(&base, case)?;
        let graph = build_flow_graph(&network);
        let result = max_flow(&graph);
        let cut: Vec<String> = result
            .min_cut_arcs
            .iter()
            .map(|&a| graph.arc_label(a))
            .collect();

        println!(
            "{case}: max flow {} MW, DNS {} MW, enumerated min cut {} MW",
            result.max_flow_mw,
            dns_mcmf(&network, &result),
            min_cut_enumeration_oracle(&graph)?
        );
        println!("  min cut: {}", cut.join(", "));
        let flows = line_flows_mw(&network, &graph, &result);
        for (line, f) in network.lines.iter().zip(flows) {
            println!("  {:<3} {:>6} / {}", line.id, f, line.capacity_mw);
        }
    }
    Ok(())
}
