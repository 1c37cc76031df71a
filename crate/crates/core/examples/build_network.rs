//! Builds a network in code, validates it, and prints its document form.
//!
//! ```text
//! cargo run -p adequacy --example build_network
//! ```

use adequacy::network::{load_network, render_network, validate_network, Bus, Line};
use adequacy::Network;

fn main() -> adequacy::Result<()> {
    let network = Network::new(
        vec![
            Bus::generator(1, 150.0, 0.0).slack(),
            Bus::generator(2, 50.0, 40.0).with_demand(10.0),
            Bus::load(3, 80.0),
        ],
        vec![
            Line::new("A", 1, 2, 0.1, 60.0).with_resistance(0.02),
            Line::new("B", 1, 3, 0.2, 60.0),
            Line::new("C", 2, 3, 0.2, 40.0),
        ],
    );

    let report = validate_network(&network);
    println!(
        "violations: {}",
        if report.is_empty() {
            "none".into()
        } else {
            report.to_string()
        }
    );

    let text = render_network(&network);
    print!("{text}");
    assert_eq!(load_network(&text)?, network);

    // A broken copy: an island and an unusable line.
    let mut broken = network.clone();
    broken.lines.retain(|l| l.id.as_str() == "A");
    broken.lines[0].reactance_pu = 0.0;
    println!("broken copy:\n{}", validate_network(&broken));
    Ok(())
}
