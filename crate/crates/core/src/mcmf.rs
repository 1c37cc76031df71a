//! Max-flow / min-cut adequacy baseline.
//!
//! The network becomes a capacity graph with a super source `S` feeding every
//! generator bus (arc capacity = generation capacity), a super sink `L` fed by
//! every load bus (arc capacity = demand), and two antiparallel arcs per
//! transmission line at the line rating. Impedances play no part.
//!
//! Capacities are MW with at most two fraction digits, so the solver works in
//! integer hundredths of a MW and is exact.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{BusId, LineId, Network};

/// Integer capacity units per MW.
pub const UNITS_PER_MW: f64 = 100.0;

/// Largest graph the enumeration oracle accepts.
pub const MAX_ENUMERATION_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArcKind {
    Generation,
    Load,
    LineForward,
    LineReverse,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NodeLabel {
    Source,
    Sink,
    Bus(BusId),
    Other(usize),
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeLabel::Source => f.write_str("S"),
            NodeLabel::Sink => f.write_str("L"),
            NodeLabel::Bus(id) => write!(f, "{}", id.0),
            NodeLabel::Other(i) => write!(f, "n{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowArc {
    pub tail: usize,
    pub head: usize,
    pub capacity_mw: f64,
    pub kind: ArcKind,
    /// Line the arc was built from, for line arcs.
    pub line: Option<LineId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowGraph {
    pub nodes: Vec<NodeLabel>,
    pub arcs: Vec<FlowArc>,
    pub source: usize,
    pub sink: usize,
}

impl FlowGraph {
    /// Empty graph with `node_count` anonymous nodes; `source` and `sink` must
    /// be distinct indices below `node_count`.
    pub fn with_nodes(node_count: usize, source: usize, sink: usize) -> Self {
        assert!(source < node_count && sink < node_count && source != sink);
        let nodes = (0..node_count)
            .map(|i| match i {
                _ if i == source => NodeLabel::Source,
                _ if i == sink => NodeLabel::Sink,
                _ => NodeLabel::Other(i),
            })
            .collect();
        FlowGraph {
            nodes,
            arcs: Vec::new(),
            source,
            sink,
        }
    }

    pub fn add_arc(&mut self, tail: usize, head: usize, capacity_mw: f64) -> usize {
        self.push(tail, head, capacity_mw, ArcKind::Other, None)
    }

    fn push(
        &mut self,
        tail: usize,
        head: usize,
        capacity_mw: f64,
        kind: ArcKind,
        line: Option<LineId>,
    ) -> usize {
        self.arcs.push(FlowArc {
            tail,
            head,
            capacity_mw,
            kind,
            line,
        });
        self.arcs.len() - 1
    }

    pub fn arc_label(&self, arc: usize) -> String {
        let a = &self.arcs[arc];
        format!("{}-{}", self.nodes[a.tail], self.nodes[a.head])
    }

    fn units(&self) -> Vec<i64> {
        self.arcs.iter().map(|a| to_units(a.capacity_mw)).collect()
    }
}

fn to_units(mw: f64) -> i64 {
    assert!(
        mw.is_finite() && mw >= 0.0,
        "arc capacity must be finite and nonnegative"
    );
    (mw * UNITS_PER_MW).round() as i64
}

fn to_mw(units: i64) -> f64 {
    units as f64 / UNITS_PER_MW
}

/// Builds the capacity graph. Bus `i` (document order) is node `i`; the
/// source and sink follow the buses.
pub fn build_flow_graph(network: &Network) -> FlowGraph {
    let nb = network.buses.len();
    let mut nodes: Vec<NodeLabel> = network.buses.iter().map(|b| NodeLabel::Bus(b.id)).collect();
    nodes.push(NodeLabel::Source);
    nodes.push(NodeLabel::Sink);
    let mut g = FlowGraph {
        nodes,
        arcs: Vec::new(),
        source: nb,
        sink: nb + 1,
    };

    for (i, bus) in network.buses.iter().enumerate() {
        if bus.gen_capacity_mw > 0.0 {
            g.push(g.source, i, bus.gen_capacity_mw, ArcKind::Generation, None);
        }
    }
    for (i, bus) in network.buses.iter().enumerate() {
        if bus.demand_mw > 0.0 {
            g.push(i, g.sink, bus.demand_mw, ArcKind::Load, None);
        }
    }
    for (line, (from, to)) in network.lines.iter().zip(network.terminals()) {
        let id = Some(line.id.clone());
        g.push(from, to, line.capacity_mw, ArcKind::LineForward, id.clone());
        g.push(to, from, line.capacity_mw, ArcKind::LineReverse, id);
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxFlowResult {
    pub max_flow_mw: f64,
    /// Arc indices crossing from the source side of the residual-reachability
    /// cut to the sink side.
    pub min_cut_arcs: Vec<usize>,
    pub per_arc_flow_mw: Vec<f64>,
}

/// Residual network for Dinic's algorithm. Edge `2a` is arc `a`, edge `2a + 1`
/// its reverse residual.
struct Residual {
    head: Vec<usize>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(g: &FlowGraph, units: &[i64]) -> Self {
        let mut r = Residual {
            head: Vec::with_capacity(2 * g.arcs.len()),
            cap: Vec::with_capacity(2 * g.arcs.len()),
            adj: vec![Vec::new(); g.nodes.len()],
        };
        for (a, &u) in g.arcs.iter().zip(units) {
            r.adj[a.tail].push(r.head.len());
            r.head.push(a.head);
            r.cap.push(u);
            r.adj[a.head].push(r.head.len());
            r.head.push(a.tail);
            r.cap.push(0);
        }
        r
    }

    fn levels(&self, source: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.adj.len()];
        level[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if self.cap[e] > 0 && level[v].is_none() {
                    level[v] = Some(level[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(
        &mut self,
        u: usize,
        sink: usize,
        pushed: i64,
        level: &[Option<usize>],
        next: &mut [usize],
    ) -> i64 {
        if u == sink {
            return pushed;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let v = self.head[e];
            if self.cap[e] > 0 && level[v] == level[u].map(|l| l + 1) {
                let got = self.augment(v, sink, pushed.min(self.cap[e]), level, next);
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0
    }
}

/// Maximum `S → L` flow (Dinic) with the canonical minimum cut: arcs leaving
/// the set of nodes still reachable from `S` in the final residual graph.
pub fn max_flow(g: &FlowGraph) -> MaxFlowResult {
    let units = g.units();
    let mut r = Residual::new(g, &units);
    let mut total: i64 = 0;
    loop {
        let level = r.levels(g.source);
        if level[g.sink].is_none() {
            break;
        }
        let mut next = vec![0; g.nodes.len()];
        loop {
            let pushed = r.augment(g.source, g.sink, i64::MAX, &level, &mut next);
            if pushed == 0 {
                break;
            }
            total += pushed;
        }
    }

    let reachable: Vec<bool> = r.levels(g.source).iter().map(Option::is_some).collect();
    let min_cut_arcs = g
        .arcs
        .iter()
        .enumerate()
        .filter(|(a, arc)| units[*a] > 0 && reachable[arc.tail] && !reachable[arc.head])
        .map(|(a, _)| a)
        .collect();
    let per_arc_flow_mw = units
        .iter()
        .enumerate()
        .map(|(a, &u)| to_mw(u - r.cap[2 * a]))
        .collect();

    MaxFlowResult {
        max_flow_mw: to_mw(total),
        min_cut_arcs,
        per_arc_flow_mw,
    }
}

/// Demand not served by the max-flow estimate: total demand minus max flow.
pub fn dns_mcmf(network: &Network, result: &MaxFlowResult) -> f64 {
    let demand: i64 = network.buses.iter().map(|b| to_units(b.demand_mw)).sum();
    let served = (result.max_flow_mw * UNITS_PER_MW).round() as i64;
    to_mw((demand - served).max(0))
}

/// Net flow on each line in its `from → to` orientation.
pub fn line_flows_mw(network: &Network, graph: &FlowGraph, result: &MaxFlowResult) -> Vec<f64> {
    let mut net = vec![0.0; network.lines.len()];
    for (arc, &flow) in graph.arcs.iter().zip(&result.per_arc_flow_mw) {
        let Some(line) = &arc.line else { continue };
        let k = network
            .line_index(line.as_str())
            .expect("graph built from this network");
        match arc.kind {
            ArcKind::LineForward => net[k] += flow,
            ArcKind::LineReverse => net[k] -= flow,
            _ => {}
        }
    }
    net
}

/// Minimum `S/L` cut capacity by exhaustive enumeration of every partition of
/// the other nodes. Independent of [`max_flow`]; used to check it.
pub fn min_cut_enumeration_oracle(g: &FlowGraph) -> Result<f64> {
    let n = g.nodes.len();
    if n > MAX_ENUMERATION_NODES {
        return Err(Error::GraphTooLarge {
            nodes: n,
            max: MAX_ENUMERATION_NODES,
        });
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != g.source && v != g.sink).collect();
    let units = g.units();
    let mut best = i64::MAX;
    for mask in 0u32..(1u32 << others.len()) {
        let mut source_side = vec![false; n];
        source_side[g.source] = true;
        for (bit, &v) in others.iter().enumerate() {
            source_side[v] = mask & (1 << bit) != 0;
        }
        let cut: i64 = g
            .arcs
            .iter()
            .zip(&units)
            .filter(|(a, _)| source_side[a.tail] && !source_side[a.head])
            .map(|(_, &u)| u)
            .sum();
        best = best.min(cut);
    }
    Ok(to_mw(best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Bus, Line};

    fn single_arc() -> FlowGraph {
        let mut g = FlowGraph::with_nodes(2, 0, 1);
        g.add_arc(0, 1, 10.0);
        g
    }

    fn triangle() -> Network {
        Network::new(
            vec![
                Bus::generator(1, 100.0, 0.0).slack(),
                Bus::load(2, 100.0),
                Bus::load(3, 0.0),
            ],
            vec![
                Line::new("L12", 1, 2, 1.0, 50.0),
                Line::new("L13", 1, 3, 1.0, 100.0),
                Line::new("L32", 3, 2, 1.0, 100.0),
            ],
        )
    }

    #[test]
    fn single_arc_flow() {
        let g = single_arc();
        let r = max_flow(&g);
        assert_eq!(r.max_flow_mw, 10.0);
        assert_eq!(r.min_cut_arcs, [0]);
        assert_eq!(min_cut_enumeration_oracle(&g).unwrap(), 10.0);
    }

    #[test]
    fn triangle_graph_shape() {
        let n = triangle();
        let g = build_flow_graph(&n);
        assert_eq!(g.nodes.len(), 5);
        let count = |k| g.arcs.iter().filter(|a| a.kind == k).count();
        assert_eq!(count(ArcKind::Generation), 1);
        assert_eq!(count(ArcKind::Load), 1);
        assert_eq!(count(ArcKind::LineForward) + count(ArcKind::LineReverse), 6);
    }

    #[test]
    fn triangle_max_flow() {
        let n = triangle();
        let g = build_flow_graph(&n);
        let r = max_flow(&g);
        assert_eq!(r.max_flow_mw, 100.0);
        assert_eq!(min_cut_enumeration_oracle(&g).unwrap(), 100.0);
        let cut: f64 = r.min_cut_arcs.iter().map(|&a| g.arcs[a].capacity_mw).sum();
        assert_eq!(cut, 100.0);
        assert_eq!(dns_mcmf(&n, &r), 0.0);
        let lines = line_flows_mw(&n, &g, &r);
        assert_eq!(lines[0] + lines[2], 100.0);
    }

    #[test]
    fn zero_demand_bus_has_no_load_arc() {
        let g = build_flow_graph(&triangle());
        assert!(!g
            .arcs
            .iter()
            .any(|a| a.kind == ArcKind::Load && a.tail == 2));
    }

    #[test]
    fn zero_demand_network_has_no_dns() {
        let n = Network::new(
            vec![Bus::generator(1, 10.0, 0.0).slack(), Bus::load(2, 0.0)],
            vec![Line::new("L1", 1, 2, 0.1, 5.0)],
        );
        let r = max_flow(&build_flow_graph(&n));
        assert_eq!(r.max_flow_mw, 0.0);
        assert_eq!(dns_mcmf(&n, &r), 0.0);
    }

    #[test]
    fn flow_respects_capacity_and_conservation() {
        let g = build_flow_graph(&triangle());
        let r = max_flow(&g);
        let mut balance = vec![0.0; g.nodes.len()];
        for (a, &f) in g.arcs.iter().zip(&r.per_arc_flow_mw) {
            assert!(f >= 0.0 && f <= a.capacity_mw);
            balance[a.tail] -= f;
            balance[a.head] += f;
        }
        for (v, b) in balance.iter().enumerate() {
            if v != g.source && v != g.sink {
                assert_eq!(*b, 0.0);
            }
        }
    }

    #[test]
    fn enumeration_rejects_large_graphs() {
        let g = FlowGraph::with_nodes(17, 0, 16);
        assert!(matches!(
            min_cut_enumeration_oracle(&g),
            Err(Error::GraphTooLarge { nodes: 17, .. })
        ));
    }

    #[test]
    fn disconnected_source_gives_zero() {
        let mut g = FlowGraph::with_nodes(4, 0, 3);
        g.add_arc(0, 1, 10.0);
        g.add_arc(2, 3, 5.0);
        assert_eq!(max_flow(&g).max_flow_mw, 0.0);
        assert_eq!(min_cut_enumeration_oracle(&g).unwrap(), 0.0);
    }
}
