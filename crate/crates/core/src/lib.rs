//! Demand not served (DNS), generation not served (GNS) and wheeling loss for
//! a transmission network, computed from a DC load flow and compared against
//! the max-flow/min-cut (MCMF) capacity estimate.
//!
//! The pipeline is:
//!
//! 1. [`network`]: parse and validate a network document.
//! 2. [`dcflow`] / [`loss`]: solve the dispatch flow without line limits,
//!    lossless or with `r·f²` losses.
//! 3. [`adequacy`]: per-bus imbalance against line ratings, classified into
//!    DNS and GNS, plus the wheeling loss over congested lines.
//! 4. [`mcmf`]: the graph baseline, with an enumeration oracle for the cut.
//! 5. [`report`]: run the case study and render it.
//!
//! ```
//! use adequacy::{adequacy::aggregate_adequacy, dcflow::run_lossless_dispatch_flow, fixtures};
//!
//! let network = fixtures::ieee5();
//! let flow = run_lossless_dispatch_flow(&network).unwrap();
//! let report = aggregate_adequacy(&network, &flow, 1e-6);
//! assert!((report.dns_total_mw - report.gns_total_mw).abs() < 1e-9);
//! ```

pub mod adequacy;
pub mod dcflow;
pub mod error;
pub mod fixtures;
pub mod loss;
pub mod mcmf;
pub mod network;
pub mod report;

pub use error::{Error, Result};
pub use network::{BusId, CaseVariant, LineId, Network};
