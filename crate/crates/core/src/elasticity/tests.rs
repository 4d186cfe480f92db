use super::*;
use crate::forecast::sim::standard_normals;
use crate::model::{AccountClass, Market, PriceObservation, TransferRecord};
use chrono::Duration;

fn code(s: &str) -> RegistryCode {
    RegistryCode::new(s).unwrap()
}

fn day(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn transfer(id: usize, date: NaiveDate, from: &str, to: &str, quantity: u64) -> TransferRecord {
    TransferRecord {
        id: id.to_string(),
        date,
        from_registry: code(from),
        to_registry: code(to),
        from_class: AccountClass::Oha,
        to_class: AccountClass::Oha,
        quantity,
        value_eur: None,
        from_account: None,
        to_account: None,
    }
}

fn price(date: NaiveDate, p: f64) -> PriceObservation {
    PriceObservation {
        date,
        market: Market::Secondary,
        price: p,
    }
}

fn one_period() -> PeriodSegmentation {
    PeriodSegmentation::new(day("2015-01-01"), day("2016-12-31"), &[]).unwrap()
}

/// Daily power-law flows `q = a p^b e^noise` for every ordered pair of `codes`.
fn power_law_dataset(n_days: usize, b: f64, noise: f64, price_scale: f64, codes: &[&str]) -> Dataset {
    let start = day("2015-01-01");
    let z = standard_normals(17, n_days * (1 + codes.len() * codes.len()));
    let mut prices = Vec::new();
    let mut transfers = Vec::new();
    for d in 0..n_days {
        let date = start + Duration::days(d as i64);
        let p = 5.0 + 20.0 * ((d as f64 * 0.37).sin() + 1.0) / 2.0 + z[d].abs();
        prices.push(price(date, p * price_scale));
        for (k, (f, t)) in codes.iter().flat_map(|f| codes.iter().map(move |t| (f, t))).enumerate() {
            let eps = z[n_days + d * codes.len() * codes.len() + k];
            let q = (8.0 + b * p.ln() + noise * eps).exp().round().max(1.0) as u64;
            transfers.push(transfer(transfers.len(), date, f, t, q));
        }
    }
    Dataset::new(transfers, prices, Vec::new()).unwrap()
}

#[test]
fn flows_sum_per_day_and_skip_empty_days() {
    let e = std::f64::consts::E;
    let ds = Dataset::new(
        vec![
            transfer(1, day("2015-03-02"), "FR", "DE", 500),
            transfer(2, day("2015-03-02"), "FR", "DE", 500),
            transfer(3, day("2015-03-03"), "DE", "FR", 70),
        ],
        vec![price(day("2015-03-02"), e), price(day("2015-03-03"), 2.0)],
        Vec::new(),
    )
    .unwrap();
    let obs = build_flows(&ds, &code("FR"), &code("DE"), &one_period(), "2015-2016", &Default::default()).unwrap();
    assert_eq!(obs.len(), 1);
    assert_eq!((obs[0].log_q, obs[0].log_p), (1000f64.ln(), 1.0));
    let mean = ElasticityOptions {
        aggregation: DailyAggregation::Mean,
        ..Default::default()
    };
    let obs = build_flows(&ds, &code("FR"), &code("DE"), &one_period(), "2015-2016", &mean).unwrap();
    assert_eq!(obs[0].log_q, 500f64.ln());
}

#[test]
fn ten_day_fixture() {
    // Prices on weekdays only; the weekend flow uses Friday's price.
    let prices = [
        ("2015-06-01", 7.0),
        ("2015-06-02", 7.5),
        ("2015-06-03", 8.0),
        ("2015-06-04", 7.0),
        ("2015-06-05", 6.5),
        ("2015-06-08", 6.0),
        ("2015-06-09", 6.2),
        ("2015-06-10", 6.4),
    ];
    let flows = [
        ("2015-06-01", 100, "DE"),
        ("2015-06-01", 300, "DE"),
        ("2015-06-02", 50, "DE"),
        ("2015-06-03", 10, "GB"),
        ("2015-06-04", 1, "DE"),
        ("2015-06-06", 40, "DE"),
        ("2015-06-08", 0, "DE"),
        ("2015-06-09", 60, "DE"),
        ("2015-06-10", 20, "DE"),
        ("2015-06-10", 20, "DE"),
    ];
    let ds = Dataset::new(
        flows
            .iter()
            .enumerate()
            .map(|(i, (d, q, to))| transfer(i, day(d), "FR", to, *q))
            .collect(),
        prices.iter().map(|(d, p)| price(day(d), *p)).collect(),
        Vec::new(),
    )
    .unwrap();
    let obs = build_flows(&ds, &code("FR"), &code("DE"), &one_period(), "2015-2016", &Default::default()).unwrap();
    let expected = [
        ("2015-06-01", 400.0, 7.0),
        ("2015-06-02", 50.0, 7.5),
        ("2015-06-04", 1.0, 7.0),
        ("2015-06-06", 40.0, 6.5),
        ("2015-06-09", 60.0, 6.2),
        ("2015-06-10", 40.0, 6.4),
    ];
    assert_eq!(obs.len(), expected.len());
    for (o, (d, q, p)) in obs.iter().zip(expected) {
        assert_eq!((o.date, o.log_q, o.log_p), (day(d), f64::ln(q), f64::ln(p)));
    }
}

#[test]
fn unknown_period_is_error() {
    let ds = Dataset::new(Vec::new(), Vec::new(), Vec::new()).unwrap();
    assert!(build_flows(&ds, &code("FR"), &code("FR"), &one_period(), "1999", &Default::default()).is_err());
}

fn synthetic_obs(xs: &[f64], ys: &[f64]) -> Vec<FlowObservation> {
    xs.iter()
        .zip(ys)
        .enumerate()
        .map(|(i, (x, y))| FlowObservation {
            date: day("2015-01-01") + Duration::days(i as i64),
            from: code("FR"),
            to: code("FR"),
            log_q: *y,
            log_p: *x,
        })
        .collect()
}

#[test]
fn exact_power_law() {
    let xs: Vec<f64> = (0..40).map(|i| (2.0 + i as f64 * 0.5).ln()).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 1.5 * x).collect();
    let obs = synthetic_obs(&xs, &ys);
    let o = fit_ols_loglog(&obs, "p", &Default::default()).unwrap();
    assert!((o.beta0 - 2.0).abs() < 1e-12 && (o.beta1 - 1.5).abs() < 1e-12);
    let opts = ElasticityOptions {
        bootstrap_reps: 50,
        ..Default::default()
    };
    let l = fit_lad_loglog(&obs, "p", &opts).unwrap();
    assert!((l.beta0 - 2.0).abs() < 1e-12 && (l.beta1 - 1.5).abs() < 1e-12);
    assert_eq!(l.bootstrap_used, Some(50));
}

#[test]
fn noisy_power_law_covers_truth() {
    let z = standard_normals(5, 400);
    let xs: Vec<f64> = z[..200].iter().map(|v| 3.0 + 0.4 * v).collect();
    let ys: Vec<f64> = xs.iter().zip(&z[200..]).map(|(x, e)| 9.0 - 0.8 * x + 0.5 * e).collect();
    let obs = synthetic_obs(&xs, &ys);
    let o = fit_ols_loglog(&obs, "p", &Default::default()).unwrap();
    assert!((o.beta1 + 0.8).abs() <= 2.0 * o.se1, "{} ± {}", o.beta1, o.se1);
    assert!(o.significant);
    let l = fit_lad_loglog(&obs, "p", &ElasticityOptions { bootstrap_reps: 200, ..Default::default() }).unwrap();
    assert!((l.beta1 + 0.8).abs() <= 3.0 * l.se1, "{} ± {}", l.beta1, l.se1);
    assert!(lad::lad_objective(&xs, &ys, l.beta0, l.beta1) <= lad::lad_objective(&xs, &ys, o.beta0, o.beta1));
}

#[test]
fn guards() {
    let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let obs = synthetic_obs(&xs, &xs);
    assert!(matches!(
        fit_ols_loglog(&obs, "p", &Default::default()),
        Err(Error::InsufficientData { needed: 30, got: 20, .. })
    ));
    let flat = synthetic_obs(&[1.0; 40], &xs.repeat(2));
    assert!(matches!(fit_lad_loglog(&flat, "p", &Default::default()), Err(Error::ZeroVariance(_))));
    assert!(matches!(fit_ols_loglog(&flat, "p", &Default::default()), Err(Error::ZeroVariance(_))));
}

#[test]
fn bootstrap_is_deterministic() {
    let z = standard_normals(6, 120);
    let (xs, ys) = z.split_at(60);
    let a = lad_bootstrap(xs, ys, 99, 7).unwrap();
    let b = lad_bootstrap(xs, ys, 99, 7).unwrap();
    assert_eq!(a.se[1].to_bits(), b.se[1].to_bits());
    assert_eq!(a, b);
    assert_ne!(lad_bootstrap(xs, ys, 99, 8).unwrap().se, a.se);
}

#[test]
fn price_rescaling_leaves_slope() {
    let codes = ["FR"];
    let base = power_law_dataset(120, -0.6, 0.3, 1.0, &codes);
    let scaled = power_law_dataset(120, -0.6, 0.3, 100.0, &codes);
    let opts = ElasticityOptions {
        bootstrap_reps: 99,
        ..Default::default()
    };
    let seg = one_period();
    let f = |ds: &Dataset| build_flows(ds, &code("FR"), &code("FR"), &seg, "2015-2016", &opts).unwrap();
    let (a, b) = (f(&base), f(&scaled));
    let (oa, ob) = (fit_ols_loglog(&a, "x", &opts).unwrap(), fit_ols_loglog(&b, "x", &opts).unwrap());
    assert!((oa.beta1 - ob.beta1).abs() <= 1e-10 && (oa.p1 - ob.p1).abs() <= 1e-10);
    assert!((oa.beta0 - ob.beta0 - 100f64.ln() * oa.beta1).abs() <= 1e-9);
    let xa: Vec<f64> = a.iter().map(|o| o.log_p).collect();
    let xb: Vec<f64> = b.iter().map(|o| o.log_p).collect();
    let ya: Vec<f64> = a.iter().map(|o| o.log_q).collect();
    let (la, lb) = (lad_fit(&xa, &ya).unwrap(), lad_fit(&xb, &ya).unwrap());
    assert_eq!(la.anchors, lb.anchors);
    assert!((la.slope - lb.slope).abs() <= 1e-12);
}

#[test]
fn report_shape_and_composition() {
    let codes = ["DE", "FR", "GB"];
    let ds = power_law_dataset(90, 0.9, 0.2, 1.0, &codes);
    let seg = PeriodSegmentation::new(day("2015-01-01"), day("2015-03-31"), &[day("2015-02-01"), day("2015-03-01")]).unwrap();
    let opts = ElasticityOptions {
        bootstrap_reps: 20,
        min_n: 29,
        ..Default::default()
    };
    let regs: Vec<RegistryCode> = codes.iter().rev().map(|c| code(c)).collect();
    let report = elasticity_report(&ds, &seg, &regs, &[Method::Lad, Method::Ols], &opts);
    assert_eq!(report.rows.len(), 54);
    // February has 28 days, below min_n.
    let blank: Vec<_> = report.rows.iter().filter(|r| r.estimate.is_none()).collect();
    assert_eq!(blank.len(), 18);
    assert!(blank.iter().all(|r| r.period == "2015-02-01..2015-02-28" && r.reason.is_some()));
    let keys: Vec<_> = report.rows.iter().map(|r| (r.from.clone(), r.to.clone(), seg.period(&r.period).unwrap().index, r.method)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for row in &report.rows {
        let obs = build_flows(&ds, &row.from, &row.to, &seg, &row.period, &opts).unwrap();
        let direct = match row.method {
            Method::Ols => fit_ols_loglog(&obs, &row.period, &opts),
            Method::Lad => fit_lad_loglog(&obs, &row.period, &opts),
        };
        assert_eq!(direct.ok(), row.estimate);
    }
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 55);
    assert!(csv.lines().nth(1).unwrap().starts_with("DE,DE,"));
}

#[test]
fn star_levels() {
    assert_eq!(stars(0.0005), "***");
    assert_eq!(stars(0.005), "**");
    assert_eq!(stars(0.03), "*");
    assert_eq!(stars(0.05), "");
}

fn est(from: &str, to: &str, beta1: f64, significant: bool) -> ElasticityEstimate {
    ElasticityEstimate {
        from: code(from),
        to: code(to),
        period: "2018-2020".into(),
        method: Method::Ols,
        beta0: 1.0,
        beta1,
        se0: 0.1,
        se1: 0.1,
        p0: 0.5,
        p1: if significant { 0.001 } else { 0.5 },
        n: 100,
        significant,
        bootstrap_used: None,
    }
}

#[test]
fn graph_without_significant_edges() {
    let set = vec![est("DE", "DE", 1.0, true), est("DE", "FR", 2.0, false), est("FR", "FR", -1.0, false)];
    let (dot, warnings) = elasticity_graph(&set, "2018-2020", Method::Ols);
    assert!(!dot.contains("->"));
    assert!(warnings.is_empty());
}

#[test]
fn graph_golden() {
    let set = vec![
        est("DE", "DE", 0.35, false),
        est("DE", "FR", 2.2, true),
        est("FR", "FR", 1.15, true),
        est("GB", "DE", -2.19, true),
        est("GB", "FR", 0.4, false),
    ];
    let (dot, warnings) = elasticity_graph(&set, "2018-2020", Method::Ols);
    let expected = "digraph elasticity {
  graph [label=\"2018-2020 OLS\", labelloc=t];
  node [shape=circle];
  \"DE\" [label=\"DE\\n0.35\", style=dashed];
  \"FR\" [label=\"FR\\n1.15\", style=solid];
  \"GB\" [label=\"GB\"];
  \"DE\" -> \"FR\" [label=\"2.20\"];
  \"GB\" -> \"DE\" [label=\"-2.19\"];
}
";
    assert_eq!(dot, expected);
    assert_eq!(warnings, ["no internal OLS estimate for GB in 2018-2020"]);
    let (lad, _) = elasticity_graph(&set, "2018-2020", Method::Lad);
    assert!(!lad.contains("\"DE\""));
}
