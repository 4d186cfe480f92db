mod support;

use std::fs;

use support::{read_tree, run_cli, PRICES, TRANSACTIONS};

fn json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn test_command_writes_both_tests() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run_cli(&["test", "--prices", PRICES, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = json(&out.join("tests.json"));
    assert!(t["adf"]["statistic"].as_f64().unwrap() < -3.0);
    assert_eq!(t["arch_lm"]["lags_used"], 12);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("ADF") && stdout.contains("ARCH-LM"));
}

#[test]
fn missing_input_is_a_data_error_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run_cli(&["test", "--prices", "fixtures/does-not-exist.csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run_cli(&["test", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run_cli(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run_cli(&["--help"]).status.code(), Some(0));
    assert_eq!(run_cli(&["forecast", "--help"]).status.code(), Some(0));
    assert_eq!(run_cli(&["--version"]).status.code(), Some(0));
    let tmp = tempfile::tempdir().unwrap();
    let bad_year = run_cli(&["network", "--transactions", TRANSACTIONS, "--prices", PRICES, "--year", "20x8",
        "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(bad_year.status.code(), Some(1));
}

#[test]
fn command_line_overrides_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    let prices = support::crate_dir().join(PRICES);
    fs::write(
        &cfg,
        serde_json::json!({ "prices": prices, "arch-lags": 4, "acf-lags": 8, "seed": 7 }).to_string(),
    )
    .unwrap();
    let out = tmp.path().join("o");
    let o = run_cli(&["test", "--config", cfg.to_str().unwrap(), "--arch-lags", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("tests.json"))["arch_lm"]["lags_used"], 6);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["acf_lags"], 8);

    fs::write(&cfg, r#"{"prices": "p.csv", "no-such-key": 1}"#).unwrap();
    let o = run_cli(&["test", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn strict_mode_rejects_malformed_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = fs::read_to_string(support::crate_dir().join(PRICES)).unwrap();
    text.push_str("2020-04-30,SECONDARY,not-a-price\n");
    let bad = tmp.path().join("prices.csv");
    fs::write(&bad, text).unwrap();
    let out = tmp.path().join("o");
    let lenient = run_cli(&["test", "--prices", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("warning"));
    let out2 = tmp.path().join("o2");
    let strict = run_cli(&["test", "--strict", "--prices", bad.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(!out2.exists());
}

#[test]
fn constant_prices_are_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("date,market,price\n");
    let mut d = chrono::NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    while d < chrono::NaiveDate::from_ymd_opt(2014, 1, 1).unwrap() {
        text.push_str(&format!("{d},SECONDARY,15.0\n"));
        d += chrono::Duration::days(1);
    }
    let p = tmp.path().join("flat.csv");
    fs::write(&p, text).unwrap();
    let out = tmp.path().join("o");
    let o = run_cli(&["forecast", "--prices", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn manifest_lists_exactly_the_written_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run_cli(&[
        "centrality", "--transactions", TRANSACTIONS, "--prices", PRICES, "--year", "2012-2014",
        "--output-format", "csv", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let tree = read_tree(&out);
    let manifest = json(&out.join("manifest.json"));
    let mut listed: Vec<String> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["path"].as_str().unwrap().to_string())
        .collect();
    listed.push("manifest.json".into());
    listed.sort();
    assert_eq!(listed, tree.keys().cloned().collect::<Vec<_>>());
    assert!(tree.contains_key("centrality.csv") && !tree.contains_key("centrality.json"));
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}
