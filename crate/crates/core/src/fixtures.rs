//! The five-bus case-study network shipped with the crate.

use crate::network::{parse_network, Network};

pub const IEEE5_SOURCE: &str = include_str!("../fixtures/ieee5.net");

/// Path of the fixture file in the source tree.
pub const IEEE5_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/ieee5.net");

pub fn ieee5() -> Network {
    parse_network(IEEE5_SOURCE).expect("bundled fixture parses")
}
