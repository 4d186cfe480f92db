use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{build_annual_network, normalize, Aggregation, NormalizedAdjacency};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::model::RegistryCode;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityOptions {
    /// L2 change between successive iterates that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterate on `A^T` (in-link centrality) instead of `A`.
    pub transpose: bool,
    /// Constant added to every entry before iterating; 0 disables it.
    pub damping: f64,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
            transpose: false,
            damping: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityResult {
    pub nodes: Vec<RegistryCode>,
    /// Unit-norm nonnegative dominant eigenvector.
    pub x: Vec<f64>,
    pub lambda: f64,
    /// `x_i^2`; sums to one.
    pub proportions: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub transpose: bool,
    pub damping: f64,
}

impl CentralityResult {
    pub fn proportion_of(&self, code: &RegistryCode) -> Option<f64> {
        self.nodes.iter().position(|n| n == code).map(|i| self.proportions[i])
    }
}

/// Power iteration `x <- A x / |A x|` from the uniform vector.
///
/// Stops once successive iterates differ by less than `tol` in L2 and
/// reports the Rayleigh quotient `x^T A x` as the eigenvalue. Reducible or
/// periodic matrices that do not settle within `max_iter` sweeps, and
/// matrices that annihilate the iterate, are errors.
pub fn eigenvector_centrality(a: &NormalizedAdjacency, opts: &CentralityOptions) -> Result<CentralityResult> {
    let n = a.matrix.nrows();
    if n == 0 || a.matrix.ncols() != n {
        return Err(Error::InvalidParameter("adjacency must be a nonempty square matrix".into()));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidParameter("tolerance and iteration cap must be positive".into()));
    }
    if !(opts.damping.is_finite() && opts.damping >= 0.0) {
        return Err(Error::InvalidParameter(format!("damping must be >= 0, got {}", opts.damping)));
    }
    let mut m = if opts.transpose { a.matrix.transpose() } else { a.matrix.clone() };
    if opts.damping > 0.0 {
        m.add_scalar_mut(opts.damping);
    }
    if m.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter("adjacency entries must be finite and nonnegative".into()));
    }

    let (x, iterations) = power_iterate(&m, opts)?;
    let lambda = x.dot(&(&m * &x));
    let proportions = x.iter().map(|v| v * v).collect();
    Ok(CentralityResult {
        nodes: a.nodes.clone(),
        x: x.iter().copied().collect(),
        lambda,
        proportions,
        iterations,
        converged: true,
        transpose: opts.transpose,
        damping: opts.damping,
    })
}

fn power_iterate(m: &DMatrix<f64>, opts: &CentralityOptions) -> Result<(DVector<f64>, usize)> {
    let n = m.nrows();
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut y = m * &x;
        let norm = y.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonConvergence {
                what: "eigenvector centrality (iterate vanished)",
                iterations: it,
                last_change: change,
            });
        }
        y /= norm;
        change = (&y - &x).norm();
        x = y;
        if change < opts.tol {
            return Ok((x, it));
        }
    }
    Err(Error::NonConvergence {
        what: "eigenvector centrality",
        iterations: opts.max_iter,
        last_change: change,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRow {
    pub year: i32,
    pub registry: RegistryCode,
    pub centrality: f64,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearFailure {
    pub year: i32,
    pub message: String,
}

/// Per-year proportions, ordered by (year, registry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityTable {
    pub rows: Vec<CentralityRow>,
    pub lambdas: Vec<(i32, f64)>,
    pub failures: Vec<YearFailure>,
}

impl CentralityTable {
    pub fn proportion(&self, year: i32, code: &RegistryCode) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.year == year && &r.registry == code)
            .map(|r| r.proportion)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("year,registry,centrality,proportion\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:?},{:?}\n", r.year, r.registry, r.centrality, r.proportion));
        }
        out
    }
}

/// Centrality proportions for every year in `years`.
///
/// Every registry that appears in any successful year gets a row in every
/// successful year, with proportion 0 where it did not trade. Years whose
/// network is empty or whose iteration fails are listed in `failures`.
pub fn centrality_timeseries(
    ds: &Dataset,
    years: RangeInclusive<i32>,
    aggregation: Aggregation,
    opts: &CentralityOptions,
) -> CentralityTable {
    let list: Vec<i32> = years.collect();
    let results = par::map_slice(&list, |&year| {
        build_annual_network(ds, year, aggregation)
            .and_then(|net| normalize(&net))
            .and_then(|a| eigenvector_centrality(&a, opts))
    });
    let universe: BTreeSet<&RegistryCode> = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .flat_map(|c| c.nodes.iter())
        .collect();
    let mut table = CentralityTable {
        rows: Vec::new(),
        lambdas: Vec::new(),
        failures: Vec::new(),
    };
    for (year, result) in list.iter().zip(&results) {
        match result {
            Ok(c) => {
                table.lambdas.push((*year, c.lambda));
                for code in &universe {
                    let (centrality, proportion) = match c.nodes.iter().position(|n| n == *code) {
                        Some(i) => (c.x[i], c.proportions[i]),
                        None => (0.0, 0.0),
                    };
                    table.rows.push(CentralityRow {
                        year: *year,
                        registry: (*code).clone(),
                        centrality,
                        proportion,
                    });
                }
            }
            Err(e) => table.failures.push(YearFailure {
                year: *year,
                message: e.to_string(),
            }),
        }
    }
    table
}
