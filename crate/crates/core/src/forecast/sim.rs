//! Seeded simulators for AR, GARCH(1,1) and AR + GARCH processes.
//!
//! All generators use ChaCha8 seeded from a `u64`, so a seed fully
//! determines the output on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const BURN_IN: usize = 500;

pub fn standard_normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `x_t = c + Σ phi_i x_{t-i} + sigma z_t`, after a burn-in.
pub fn simulate_ar(seed: u64, n: usize, intercept: f64, phi: &[f64], sigma: f64) -> Vec<f64> {
    let z = standard_normals(seed, n + BURN_IN);
    let shocks: Vec<f64> = z.iter().map(|v| sigma * v).collect();
    ar_filter(&shocks, intercept, phi)[BURN_IN..].to_vec()
}

/// GARCH(1,1) innovations `e_t = s_t z_t`, started at the unconditional variance.
pub fn simulate_garch(seed: u64, n: usize, omega: f64, alpha: f64, beta: f64) -> Vec<f64> {
    let z = standard_normals(seed, n + BURN_IN);
    let mut s2 = omega / (1.0 - alpha - beta);
    let mut out = Vec::with_capacity(z.len());
    for v in z {
        let e = s2.sqrt() * v;
        out.push(e);
        s2 = omega + alpha * e * e + beta * s2;
    }
    out.split_off(BURN_IN)
}

/// AR mean dynamics driven by GARCH(1,1) innovations.
pub fn simulate_ar_garch(
    seed: u64,
    n: usize,
    intercept: f64,
    phi: &[f64],
    omega: f64,
    alpha: f64,
    beta: f64,
) -> Vec<f64> {
    let e = simulate_garch(seed, n + BURN_IN, omega, alpha, beta);
    ar_filter(&e, intercept, phi)[BURN_IN..].to_vec()
}

fn ar_filter(shocks: &[f64], intercept: f64, phi: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = Vec::with_capacity(shocks.len());
    for (t, e) in shocks.iter().enumerate() {
        let mean: f64 = phi
            .iter()
            .enumerate()
            .filter(|(i, _)| t > *i)
            .map(|(i, p)| p * x[t - 1 - i])
            .sum();
        x.push(intercept + mean + e);
    }
    x
}
