use std::fmt::Write;

use super::TradeNetwork;

/// Width in inches of nodes whose internal trade is at or below the node threshold.
pub const DEFAULT_NODE_WIDTH: f64 = 0.5;

/// Renders the network as a DOT digraph.
///
/// Every registry is a node. Nodes whose self-trade weight exceeds
/// `node_threshold` grow with `log10(1 + w_ii)`, which keeps sizes comparable
/// across years; the rest use [`DEFAULT_NODE_WIDTH`]. Off-diagonal edges are
/// drawn when their weight is positive and at least `edge_threshold`.
pub fn export_network(net: &TradeNetwork, edge_threshold: f64, node_threshold: f64) -> String {
    let w = net.weights();
    let mut out = String::new();
    let _ = writeln!(out, "digraph trade_{} {{", net.year);
    let _ = writeln!(out, "  graph [label=\"{}\", labelloc=t];", net.year);
    let _ = writeln!(out, "  node [shape=circle, fixedsize=true];");
    for (i, code) in net.nodes().iter().enumerate() {
        let self_trade = w[(i, i)];
        let width = if self_trade > node_threshold {
            DEFAULT_NODE_WIDTH + 0.25 * (1.0 + self_trade).log10()
        } else {
            DEFAULT_NODE_WIDTH
        };
        let _ = writeln!(
            out,
            "  \"{code}\" [width={width:.3}, self_trade={self_trade:.2}];"
        );
    }
    for (i, from) in net.nodes().iter().enumerate() {
        for (j, to) in net.nodes().iter().enumerate() {
            let weight = w[(i, j)];
            if i != j && weight > 0.0 && weight >= edge_threshold {
                let _ = writeln!(out, "  \"{from}\" -> \"{to}\" [weight={weight:.2}, label=\"{weight:.0}\"];");
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RegistryCode;
    use nalgebra::DMatrix;

    fn net(w: &[f64]) -> TradeNetwork {
        let nodes = ["DE", "FR"].iter().map(|c| RegistryCode::new(c).unwrap()).collect();
        TradeNetwork::new(2019, nodes, DMatrix::from_row_slice(2, 2, w)).unwrap()
    }

    fn edges(dot: &str) -> usize {
        dot.lines().filter(|l| l.contains("->")).count()
    }

    #[test]
    fn zero_thresholds_emit_every_positive_edge() {
        let dot = export_network(&net(&[5.0, 1.0, 2.0, 0.0]), 0.0, 0.0);
        assert_eq!(edges(&dot), 2);
        assert_eq!(edges(&export_network(&net(&[5.0, 1.0, 0.0, 0.0]), 0.0, 0.0)), 1);
    }

    #[test]
    fn edge_threshold() {
        let dot = export_network(&net(&[0.0, 100.0, 900.0, 0.0]), 500.0, 0.0);
        assert_eq!(edges(&dot), 1);
        assert!(dot.contains("\"FR\" -> \"DE\""));
    }

    #[test]
    fn node_threshold_keeps_default_size() {
        let dot = export_network(&net(&[1e6, 0.0, 0.0, 10.0]), 0.0, 100.0);
        assert!(dot.contains("\"DE\" [width=2.000"));
        assert!(dot.contains("\"FR\" [width=0.500"));
    }
}
