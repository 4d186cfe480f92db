use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ElasticityEstimate, Method};
use crate::model::RegistryCode;

/// DOT digraph of the elasticities of one period and method.
///
/// Nodes are labelled with the registry's internal elasticity (dashed
/// outline when not significant). Significant external estimates become
/// edges labelled with the slope; insignificant ones are left out. A node
/// without an internal estimate is drawn with its code only and reported in
/// the returned warnings.
pub fn elasticity_graph(estimates: &[ElasticityEstimate], period: &str, method: Method) -> (String, Vec<String>) {
    let cell: Vec<&ElasticityEstimate> = estimates
        .iter()
        .filter(|e| e.period == period && e.method == method)
        .collect();
    let nodes: BTreeSet<&RegistryCode> = cell.iter().flat_map(|e| [&e.from, &e.to]).collect();
    let mut warnings = Vec::new();
    let mut out = String::new();
    let _ = writeln!(out, "digraph elasticity {{");
    let _ = writeln!(out, "  graph [label=\"{period} {method}\", labelloc=t];");
    let _ = writeln!(out, "  node [shape=circle];");
    for code in &nodes {
        match cell.iter().find(|e| &e.from == *code && &e.to == *code) {
            Some(e) => {
                let style = if e.significant { "solid" } else { "dashed" };
                let _ = writeln!(out, "  \"{code}\" [label=\"{code}\\n{:.2}\", style={style}];", e.beta1);
            }
            None => {
                warnings.push(format!("no internal {method} estimate for {code} in {period}"));
                let _ = writeln!(out, "  \"{code}\" [label=\"{code}\"];");
            }
        }
    }
    let mut edges: Vec<&&ElasticityEstimate> = cell.iter().filter(|e| e.from != e.to && e.significant).collect();
    edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
    for e in edges {
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{:.2}\"];", e.from, e.to, e.beta1);
    }
    out.push_str("}\n");
    (out, warnings)
}
