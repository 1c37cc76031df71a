//! The full comparison: every case, both methods, with and without losses,
//! rendered as tables. Pass a network path to use another document.
//!
//! ```text
//! cargo run -p adequacy --example case_study [-- path/to/network.net]
//! ```

use std::path::PathBuf;

use adequacy::fixtures;
use adequacy::report::{render_tables, run, CaseSelection, EvalOptions, OutputFormat, RunConfig};

fn main() -> adequacy::Result<()> {
    let network_path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(fixtures::IEEE5_PATH));
    let config = RunConfig {
        network_path,
        case: CaseSelection::All,
        options: EvalOptions::default(),
        format: OutputFormat::Table,
        out: None,
    };
    let outcome = run(&config)?;
    print!("{}", render_tables(&outcome.report));

    if let Some(ratio) = outcome
        .report
        .cases
        .values()
        .filter_map(|modes| modes.values().next())
        .filter_map(|m| m.totals.pm_to_mcmf_dns_ratio)
        .reduce(f64::max)
    {
        println!("largest load-flow to max-flow DNS ratio: {ratio:.2}");
    }
    Ok(())
}
