//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's numerics.

#![allow(dead_code)]

use etsmarket_core::nalgebra::DMatrix;

/// ln Gamma by the Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Nodes and weights of the `m`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        out.push((z, 2.0 / ((1.0 - z * z) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre integral of `f` over [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        total += rule.iter().map(|(z, w)| w * f(mid + 0.5 * h * z)).sum::<f64>() * 0.5 * h;
    }
    total
}

/// `P(|T| > |t|)` for Student's t with `df` degrees of freedom, by quadrature
/// of the density. The tail beyond `|t| >= 1` is mapped onto (0, 1] with
/// `s = |t| / u` so the integral stays accurate for tiny probabilities.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let density = |s: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + s * s / df).ln()).exp();
    let a = t.abs();
    if a < 1.0 {
        1.0 - 2.0 * integrate(density, 0.0, a, 50)
    } else {
        2.0 * integrate(|u| if u > 0.0 { density(a / u) * a / (u * u) } else { 0.0 }, 0.0, 1.0, 400)
    }
}

pub struct OlsOracle {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub p: Vec<f64>,
}

/// OLS from the normal equations, inverted by Gauss-Jordan elimination.
pub fn ols_normal_equations(x: &[Vec<f64>], y: &[f64]) -> OlsOracle {
    let n = y.len();
    let k = x[0].len();
    let mut aug = vec![vec![0.0; 2 * k]; k];
    for i in 0..k {
        for j in 0..k {
            aug[i][j] = (0..n).map(|r| x[r][i] * x[r][j]).sum();
        }
        aug[i][k + i] = 1.0;
    }
    for c in 0..k {
        let piv = (c..k).max_by(|&a, &b| aug[a][c].abs().total_cmp(&aug[b][c].abs())).unwrap();
        aug.swap(c, piv);
        let d = aug[c][c];
        for v in aug[c].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != c {
                let f = aug[r][c];
                let row = aug[c].clone();
                for (v, p) in aug[r].iter_mut().zip(row) {
                    *v -= f * p;
                }
            }
        }
    }
    let xty: Vec<f64> = (0..k).map(|i| (0..n).map(|r| x[r][i] * y[r]).sum()).collect();
    let beta: Vec<f64> = (0..k).map(|i| (0..k).map(|j| aug[i][k + j] * xty[j]).sum()).collect();
    let ssr: f64 = (0..n)
        .map(|r| {
            let fit: f64 = (0..k).map(|j| x[r][j] * beta[j]).sum();
            (y[r] - fit) * (y[r] - fit)
        })
        .sum();
    let df = (n - k) as f64;
    let s2 = ssr / df;
    let se: Vec<f64> = (0..k).map(|i| (s2 * aug[i][k + i]).sqrt()).collect();
    let p = beta.iter().zip(&se).map(|(b, s)| t_two_sided(b / s, df)).collect();
    OlsOracle { beta, se, p }
}

/// Dominant eigenpair of a positive matrix: eigenvalue of largest real part
/// from the Schur form, eigenvector from the null space of `A - lambda I`.
pub fn dominant_eigenvector(a: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let n = a.nrows();
    let lambda = a
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted = a - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let k = (0..n)
        .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .unwrap();
    let mut v: Vec<f64> = v_t.row(k).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for x in &mut v {
        *x *= sign / norm;
    }
    (lambda, v)
}

/// Smallest LAD objective over every line through two points with distinct abscissae.
pub fn lad_brute_force(x: &[f64], y: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if x[i] != x[j] {
                let b1 = (y[j] - y[i]) / (x[j] - x[i]);
                let b0 = y[i] - b1 * x[i];
                best = best.min(x.iter().zip(y).map(|(a, b)| (b - b0 - b1 * a).abs()).sum());
            }
        }
    }
    best
}
