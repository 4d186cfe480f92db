//! Writes the bundled synthetic dataset.
//!
//! ```text
//! cargo run -p etsmarket-cli --example make_fixture -- crates/cli/fixtures/synthetic
//! ```
//!
//! Prices follow a mean-reverting log walk with GARCH(1,1) shocks. Daily
//! flows between FR, DE and GB follow `ln q = a + b ln p + noise` with a
//! slope per pair and period; a few other registries, OHA->OHA trades and
//! administrative transfers are mixed in. GB carries the largest internal
//! trade so it dominates centrality.

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use etsmarket_core::forecast::sim::standard_normals;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20100105;

fn slope(from: &str, to: &str, period: usize) -> f64 {
    match (from, to, period) {
        ("FR", "FR", 0) => 1.15,
        ("GB", "GB", 2) => -3.4,
        ("DE", "FR", 2) => 2.2,
        ("GB", "DE", 2) => -2.2,
        ("DE", "DE", _) => 0.8,
        ("GB", "GB", _) => -1.0,
        (f, t, _) if f == t => 0.6,
        _ => 0.0,
    }
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/cli/fixtures/synthetic".into()));
    std::fs::create_dir_all(&dir).expect("create fixture dir");
    let start = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    let end = NaiveDate::from_ymd_opt(2020, 4, 30).unwrap();
    let days: Vec<NaiveDate> = (0..=(end - start).num_days())
        .map(|k| start + Duration::days(k))
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect();

    let z = standard_normals(SEED, days.len());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (omega, alpha, beta): (f64, f64, f64) = (2e-5, 0.08, 0.9);
    let mut s2 = omega / (1.0 - alpha - beta);
    let mut log_p = 14f64.ln();
    let mut prices = String::from("date,market,price\n");
    let mut price_of = Vec::with_capacity(days.len());
    for (d, zt) in days.iter().zip(&z) {
        let e = s2.sqrt() * zt;
        s2 = omega + alpha * e * e + beta * s2;
        log_p += 0.004 * (15f64.ln() - log_p) + e;
        let p = (log_p.exp() * 100.0).round() / 100.0;
        price_of.push(p);
        let _ = writeln!(prices, "{d},SECONDARY,{p:.2}");
        if d.weekday() == Weekday::Wed {
            let _ = writeln!(prices, "{d},PRIMARY,{:.2}", p - 0.05);
        }
    }

    let core = ["DE", "FR", "GB"];
    let periphery = ["IT", "PL"];
    let mut tx = String::from("id,date,from_registry,to_registry,from_class,to_class,quantity,from_account,to_account\n");
    let mut id = 0u32;
    let classes = ["OHA", "PHA"];
    let mut push = |rng: &mut ChaCha8Rng, d: NaiveDate, f: &str, t: &str, fc: &str, tc: &str, q: u64| {
        id += 1;
        let fa = format!("{f}-{fc}-{}", rng.random_range(1..=12));
        let ta = format!("{t}-{tc}-{}", rng.random_range(1..=12));
        let _ = writeln!(tx, "T{id:06},{d},{f},{t},{fc},{tc},{q},{fa},{ta}");
    };
    for (k, d) in days.iter().enumerate() {
        let period = if d.year() < 2013 { 0 } else if d.year() < 2018 { 1 } else { 2 };
        let lp = price_of[k].ln();
        for f in core {
            for t in core {
                let rate = if f == t { 0.22 } else { 0.12 };
                if !rng.random_bool(rate) {
                    continue;
                }
                let level = match (f, t) {
                    ("GB", "GB") => 11.0,
                    (a, b) if a == b => 9.0,
                    _ => 8.0,
                };
                let b = slope(f, t, period);
                let noise: f64 = rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0);
                let total = (level + b * (lp - 15f64.ln()) + 0.6 * noise).exp().max(2.0);
                // Split some days into two transfers.
                if rng.random_bool(0.3) {
                    let first = (total * 0.4).round() as u64;
                    let fc = classes[rng.random_range(0..2)];
                    push(&mut rng, *d, f, t, fc, "PHA", first.max(1));
                    push(&mut rng, *d, f, t, "PHA", "OHA", (total.round() as u64).saturating_sub(first).max(1));
                } else {
                    let fc = classes[rng.random_range(0..2)];
                    let tc = classes[rng.random_range(0..2)];
                    push(&mut rng, *d, f, t, fc, tc, total.round() as u64);
                }
            }
        }
        for f in periphery {
            if rng.random_bool(0.05) {
                let t = [core[rng.random_range(0..3)], f][rng.random_range(0..2)];
                let q = rng.random_range(100..5000);
                push(&mut rng, *d, f, t, "OHA", "PHA", q);
            }
        }
        if rng.random_bool(0.01) {
            let r = core[rng.random_range(0..3)];
            let q = rng.random_range(10_000..100_000);
            push(&mut rng, *d, r, r, "ADMIN", "OHA", q);
        }
    }

    std::fs::write(dir.join("prices.csv"), prices).expect("write prices");
    std::fs::write(dir.join("transactions.csv"), tx).expect("write transactions");
    eprintln!("wrote {} and {}", dir.join("prices.csv").display(), dir.join("transactions.csv").display());
}
