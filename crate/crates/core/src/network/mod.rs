//! Annual registry-level trade networks with self-loops, eigenvector
//! centrality, and DOT export.

mod centrality;
mod dot;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::Datelike;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::model::RegistryCode;

pub use centrality::{
    centrality_timeseries, eigenvector_centrality, CentralityOptions, CentralityResult, CentralityRow,
    CentralityTable, YearFailure,
};
pub use dot::{export_network, DEFAULT_NODE_WIDTH};

/// How the transfers of one ordered registry pair are combined into a weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Sum,
    /// Average per-transfer value.
    #[default]
    Mean,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
        }
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(Error::InvalidParameter(format!("unknown aggregation {s:?} (expected sum or mean)"))),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Weighted directed graph of one year's transfers.
///
/// `weights[(i, j)]` is the aggregated EUR value sent from `nodes[i]` to
/// `nodes[j]`; the diagonal holds internal trade.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeNetwork {
    pub year: i32,
    nodes: Vec<RegistryCode>,
    weights: DMatrix<f64>,
}

impl TradeNetwork {
    pub fn new(year: i32, nodes: Vec<RegistryCode>, weights: DMatrix<f64>) -> Result<Self> {
        if weights.nrows() != nodes.len() || weights.ncols() != nodes.len() {
            return Err(Error::InvalidParameter(format!(
                "weight matrix is {}x{} but there are {} nodes",
                weights.nrows(),
                weights.ncols(),
                nodes.len()
            )));
        }
        let unique: BTreeSet<_> = nodes.iter().collect();
        if unique.len() != nodes.len() {
            return Err(Error::InvalidParameter("duplicate node in trade network".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("trade weights must be finite and nonnegative".into()));
        }
        Ok(Self { year, nodes, weights })
    }

    pub fn nodes(&self) -> &[RegistryCode] {
        &self.nodes
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, code: &RegistryCode) -> Option<usize> {
        self.nodes.iter().position(|n| n == code)
    }

    pub fn weight(&self, from: &RegistryCode, to: &RegistryCode) -> f64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.weights[(i, j)],
            _ => 0.0,
        }
    }

    /// Same network with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.year, self.nodes.clone(), &self.weights * c)
    }

    /// Matrix CSV: a header of registry codes, then one row per source registry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("from");
        for n in &self.nodes {
            out.push(',');
            out.push_str(n.as_str());
        }
        out.push('\n');
        for (i, n) in self.nodes.iter().enumerate() {
            out.push_str(n.as_str());
            for j in 0..self.nodes.len() {
                out.push_str(&format!(",{:?}", self.weights[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the network of one calendar year from valued transfers.
///
/// Registries appear as nodes only if they sent or received at least one
/// valued transfer that year, and are ordered by code.
pub fn build_annual_network(ds: &Dataset, year: i32, aggregation: Aggregation) -> Result<TradeNetwork> {
    let mut cells: BTreeMap<(&RegistryCode, &RegistryCode), (f64, usize)> = BTreeMap::new();
    for t in ds.transfers.iter().filter(|t| t.date.year() == year) {
        if let Some(v) = t.value_eur {
            let cell = cells.entry((&t.from_registry, &t.to_registry)).or_insert((0.0, 0));
            cell.0 += v;
            cell.1 += 1;
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyNetwork { year });
    }
    let nodes: Vec<RegistryCode> = cells
        .keys()
        .flat_map(|(f, t)| [*f, *t])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let index = |c: &RegistryCode| nodes.binary_search(c).expect("node collected above");
    let mut weights = DMatrix::zeros(nodes.len(), nodes.len());
    for ((from, to), (sum, count)) in &cells {
        weights[(index(from), index(to))] = match aggregation {
            Aggregation::Sum => *sum,
            Aggregation::Mean => sum / *count as f64,
        };
    }
    TradeNetwork::new(year, nodes, weights)
}

/// Adjacency matrix scaled so that its largest entry is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    pub year: i32,
    pub nodes: Vec<RegistryCode>,
    pub matrix: DMatrix<f64>,
    /// The raw maximum weight the matrix was divided by.
    pub scale: f64,
}

/// Divides every weight, diagonal included, by the largest one.
pub fn normalize(net: &TradeNetwork) -> Result<NormalizedAdjacency> {
    let scale = net.weights.iter().copied().fold(0.0, f64::max);
    if scale <= 0.0 {
        return Err(Error::EmptyNetwork { year: net.year });
    }
    Ok(NormalizedAdjacency {
        year: net.year,
        nodes: net.nodes.clone(),
        matrix: net.weights.map(|w| w / scale),
        scale,
    })
}
