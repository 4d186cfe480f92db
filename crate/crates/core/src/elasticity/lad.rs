//! Least absolute deviations for a single regressor.
//!
//! An LAD optimum can always be found among the lines through two data
//! points with distinct abscissae. For a fixed anchor point the best line
//! through it has the weighted median of the slopes to the other points as
//! its slope (weights `|x_j - x_i|`), so scanning every anchor is exact in
//! `O(n^2 log n)`. Larger inputs start from an IRLS solution and walk from
//! anchor to anchor until no line through any point on the current line
//! improves the objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest sample solved by scanning every anchor point.
pub const EXACT_MAX_N: usize = 500;

/// Smoothing constant in `|u| ~ sqrt(u^2 + delta)`.
pub const IRLS_DELTA: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadPath {
    Exact,
    Descent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadFit {
    pub intercept: f64,
    pub slope: f64,
    /// `sum |y - intercept - slope x|`.
    pub objective: f64,
    /// Indices of two data points the fitted line passes through.
    pub anchors: (usize, usize),
    pub path: LadPath,
}

/// LAD line, exact anchor scan for `n <= EXACT_MAX_N`, descent otherwise.
pub fn lad_fit(x: &[f64], y: &[f64]) -> Result<LadFit> {
    if x.len() <= EXACT_MAX_N {
        lad_exact(x, y)
    } else {
        lad_descent(x, y)
    }
}

pub fn lad_exact(x: &[f64], y: &[f64]) -> Result<LadFit> {
    validate(x, y)?;
    let mut scratch = Vec::with_capacity(x.len());
    let mut best: Option<Candidate> = None;
    for i in 0..x.len() {
        if let Some(c) = best_through(x, y, i, &mut scratch) {
            if best.is_none_or(|b| c.objective < b.objective) {
                best = Some(c);
            }
        }
    }
    Ok(best.expect("validated: some abscissae differ").into_fit(LadPath::Exact))
}

/// IRLS start, then anchor-to-anchor descent.
pub fn lad_descent(x: &[f64], y: &[f64]) -> Result<LadFit> {
    validate(x, y)?;
    let (b0, b1) = irls(x, y);
    let start = (0..x.len())
        .min_by(|&a, &b| (y[a] - b0 - b1 * x[a]).abs().total_cmp(&(y[b] - b0 - b1 * x[b]).abs()))
        .expect("nonempty");
    let mut scratch = Vec::with_capacity(x.len());
    let mut cur = best_through(x, y, start, &mut scratch)
        .or_else(|| (0..x.len()).find_map(|i| best_through(x, y, i, &mut scratch)))
        .expect("validated: some abscissae differ");
    'outer: loop {
        // Try rotating about every point on the current line.
        let scale = cur.objective.max(f64::MIN_POSITIVE) / x.len() as f64;
        let on_line: Vec<usize> = (0..x.len())
            .filter(|&k| k == cur.anchors.0 || k == cur.anchors.1 || cur.residual(x, y, k).abs() <= 1e-12 * scale)
            .collect();
        for k in on_line {
            if let Some(c) = best_through(x, y, k, &mut scratch) {
                if c.objective < cur.objective {
                    cur = c;
                    continue 'outer;
                }
            }
        }
        return Ok(cur.into_fit(LadPath::Descent));
    }
}

fn validate(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "x has {} values but y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            what: "LAD regression",
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("LAD input"));
    }
    if x.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::ZeroVariance("LAD regressor"));
    }
    Ok(())
}

pub fn lad_objective(x: &[f64], y: &[f64], intercept: f64, slope: f64) -> f64 {
    x.iter().zip(y).map(|(xi, yi)| (yi - intercept - slope * xi).abs()).sum()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    intercept: f64,
    slope: f64,
    objective: f64,
    anchors: (usize, usize),
}

impl Candidate {
    fn residual(&self, x: &[f64], y: &[f64], k: usize) -> f64 {
        y[k] - self.intercept - self.slope * x[k]
    }

    fn into_fit(self, path: LadPath) -> LadFit {
        LadFit {
            intercept: self.intercept,
            slope: self.slope,
            objective: self.objective,
            anchors: self.anchors,
            path,
        }
    }
}

/// Best line through point `i`, or `None` if every other abscissa equals `x[i]`.
fn best_through(x: &[f64], y: &[f64], i: usize, scratch: &mut Vec<(f64, f64, usize)>) -> Option<Candidate> {
    scratch.clear();
    let mut total = 0.0;
    for j in 0..x.len() {
        let dx = x[j] - x[i];
        if dx != 0.0 {
            scratch.push(((y[j] - y[i]) / dx, dx.abs(), j));
            total += dx.abs();
        }
    }
    if scratch.is_empty() {
        return None;
    }
    scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut acc = 0.0;
    let &(slope, _, j) = scratch
        .iter()
        .find(|(_, w, _)| {
            acc += w;
            2.0 * acc >= total
        })
        .unwrap_or(scratch.last().expect("nonempty"));
    let intercept = y[i] - slope * x[i];
    Some(Candidate {
        intercept,
        slope,
        objective: lad_objective(x, y, intercept, slope),
        anchors: (i.min(j), i.max(j)),
    })
}

/// Smoothed LAD by iteratively reweighted least squares, started from OLS.
pub fn irls(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut w = vec![1.0; x.len()];
    let (mut b0, mut b1) = weighted_line(x, y, &w);
    for _ in 0..200 {
        for (k, wk) in w.iter_mut().enumerate() {
            let r = y[k] - b0 - b1 * x[k];
            *wk = 1.0 / (r * r + IRLS_DELTA).sqrt();
        }
        let (n0, n1) = weighted_line(x, y, &w);
        let change = (n0 - b0).abs() + (n1 - b1).abs();
        (b0, b1) = (n0, n1);
        if !(change > 1e-12 * (1.0 + b0.abs() + b1.abs())) {
            break;
        }
    }
    (b0, b1)
}

fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in 0..x.len() {
        sxy += w[k] * (x[k] - mx) * (y[k] - my);
        sxx += w[k] * (x[k] - mx) * (x[k] - mx);
    }
    let b1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b1 * mx, b1)
}
