//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use etsmarket_core::forecast::RollingForecastResult;
use etsmarket_core::ingest::{enrich_values, filter_compliance_flows, Dataset, FlowFilter, ParseOptions};
use sha2::{Digest, Sha256};

pub const TRANSACTIONS: &str = "fixtures/synthetic/transactions.csv";
pub const PRICES: &str = "fixtures/synthetic/prices.csv";

/// Files whose full text is pinned, in addition to the hash list.
pub const READABLE_GOLDENS: [&str; 6] = [
    "tests.json",
    "forecast_metrics.json",
    "centrality.csv",
    "elasticity.csv",
    "network_2018.dot",
    "elasticity_2018_2020_ols.dot",
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_dir() -> PathBuf {
    crate_dir().join("tests/golden")
}

fn updating() -> bool {
    std::env::var_os("ETSMARKET_UPDATE_GOLDEN").is_some_and(|v| v == "1")
}

/// Compares `bytes` with the named golden file, or rewrites it when
/// `ETSMARKET_UPDATE_GOLDEN=1`.
pub fn golden_match(name: &str, bytes: &[u8]) -> Result<String, String> {
    let path = golden_dir().join(name);
    if updating() {
        fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        fs::write(&path, bytes).map_err(|e| e.to_string())?;
        return Ok(format!("{name} rewritten"));
    }
    let want = fs::read(&path).map_err(|e| format!("missing golden {name}: {e}"))?;
    if want == bytes {
        Ok(format!("{name} matches"))
    } else {
        Err(format!("{name} differs from golden"))
    }
}

pub fn rolling_csv(r: &RollingForecastResult) -> String {
    let mut s = String::from("week,mean,variance,actual,flagged\n");
    for st in &r.steps {
        writeln!(
            s,
            "{}-W{:02},{:?},{:?},{:?},{}",
            st.week.year, st.week.week, st.forecast_mean, st.forecast_variance, st.actual, st.flagged
        )
        .unwrap();
    }
    s
}

/// Fixture transfers and prices filtered and valued with default settings.
pub fn fixture_dataset() -> Result<Dataset, String> {
    let dir = crate_dir();
    let (raw, _) = Dataset::load(&dir.join(TRANSACTIONS), &dir.join(PRICES), &ParseOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(enrich_values(&filter_compliance_flows(&raw, &FlowFilter::default()), 7))
}

/// Runs the binary from the crate directory so recorded input paths are relative.
pub fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etsmarket"))
        .current_dir(crate_dir())
        .args(args)
        .output()
        .expect("failed to launch etsmarket")
}

pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).expect("output directory") {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            out.insert(entry.file_name().to_string_lossy().into_owned(), fs::read(entry.path()).unwrap());
        }
    }
    out
}

/// Drops the timestamp line from a manifest.
pub fn strip_timestamp(manifest: &[u8]) -> String {
    String::from_utf8_lossy(manifest)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn hash_listing(tree: &BTreeMap<String, Vec<u8>>) -> String {
    let mut s = String::new();
    for (name, bytes) in tree {
        let digest = if name == "manifest.json" {
            Sha256::digest(strip_timestamp(bytes).as_bytes())
        } else {
            Sha256::digest(bytes)
        };
        writeln!(s, "{}  {name}", hex::encode(digest)).unwrap();
    }
    s
}

fn run_all(out: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let o = run_cli(&[
        "all",
        "--transactions",
        TRANSACTIONS,
        "--prices",
        PRICES,
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
    ]);
    if !o.status.success() {
        return Err(format!("`all` exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    Ok(read_tree(out))
}

/// Two `all` runs must produce identical trees (timestamp aside) that also
/// match the pinned hashes and readable goldens.
pub fn end_to_end_determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_all(&tmp.path().join("a"))?;
    let b = run_all(&tmp.path().join("b"))?;
    if a.keys().ne(b.keys()) {
        return Err("runs produced different file sets".into());
    }
    for (name, bytes) in &a {
        let same = if name == "manifest.json" {
            strip_timestamp(bytes) == strip_timestamp(&b[name])
        } else {
            *bytes == b[name]
        };
        if !same {
            return Err(format!("{name} differs between runs"));
        }
    }
    let mut notes = vec![golden_match("all_hashes.txt", hash_listing(&a).as_bytes())?];
    for name in READABLE_GOLDENS {
        let bytes = a.get(name).ok_or_else(|| format!("run did not produce {name}"))?;
        notes.push(golden_match(name, bytes)?);
    }
    Ok(format!("{} files identical across two runs; {} goldens checked", a.len(), notes.len()))
}
