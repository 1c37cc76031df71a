//! Seeded generators shared by the integration tests.

#![allow(dead_code)]

use adequacy::mcmf::FlowGraph;
use adequacy::network::{validate_network, Bus, Line, Network};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A MW value with at most two fraction digits in `[lo, hi]`.
pub fn mw(rng: &mut impl Rng, lo: u32, hi: u32) -> f64 {
    f64::from(rng.random_range(lo * 100..=hi * 100)) / 100.0
}

/// Random connected network with 3 to 10 buses: a random spanning tree plus a
/// few extra lines, random orientations, a random slack. Line capacities are
/// small enough that congestion is common. With `lossy`, every line gets a
/// resistance of up to a third of its reactance.
pub fn random_network(rng: &mut impl Rng, lossy: bool) -> Network {
    let n = rng.random_range(3..=10u32);
    let slack = rng.random_range(1..=n);
    let buses: Vec<Bus> = (1..=n)
        .map(|id| {
            let demand = if rng.random_bool(0.25) {
                0.0
            } else {
                mw(rng, 0, 80)
            };
            let mut bus = if id == slack || rng.random_bool(0.4) {
                let cap = mw(rng, 0, 150);
                let setpoint = (cap * rng.random_range(0.0..=1.0) * 100.0).floor() / 100.0;
                Bus::generator(id, cap, setpoint).with_demand(demand)
            } else {
                Bus::load(id, demand)
            };
            if id == slack {
                bus = bus.slack();
            }
            bus
        })
        .collect();

    let mut pairs: Vec<(u32, u32)> = (2..=n).map(|b| (rng.random_range(1..b), b)).collect();
    for _ in 0..rng.random_range(0..=n) {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        let fresh = |p: &(u32, u32)| *p != (a, b) && *p != (b, a);
        if a != b && pairs.iter().all(fresh) {
            pairs.push((a, b));
        }
    }

    let lines = pairs
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let (from, to) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            let x = f64::from(rng.random_range(10..=500u32)) / 1000.0;
            let line = Line::new(&format!("L{}", k + 1), from, to, x, mw(rng, 5, 100));
            if lossy {
                line.with_resistance(x * rng.random_range(0.0..=1.0 / 3.0))
            } else {
                line
            }
        })
        .collect();

    let network = Network::new(buses, lines);
    let report = validate_network(&network);
    assert!(
        report.is_empty(),
        "generator produced an invalid network: {report}"
    );
    network
}

/// Random directed graph with 2 to `max_nodes` nodes and integer-MW-cent arc
/// capacities. Node 0 is the source and the last node the sink.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize) -> FlowGraph {
    let n = rng.random_range(2..=max_nodes);
    let mut g = FlowGraph::with_nodes(n, 0, n - 1);
    let arcs = rng.random_range(0..=n * 3);
    for _ in 0..arcs {
        let tail = rng.random_range(0..n);
        let head = rng.random_range(0..n);
        if tail != head {
            g.add_arc(tail, head, mw(rng, 0, 60));
        }
    }
    g
}
