//! File ingestion and preprocessing: CSV parsing, compliance-flow filtering,
//! EUR valuation, weekly price aggregation and flow summaries.
//!
//! Transactions CSV header: `id,date,from_registry,to_registry,from_class,to_class,quantity`
//! (optional extra columns `from_account,to_account`). Prices CSV header:
//! `date,market,price`. Columns may be renamed through [`ParseOptions::columns`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    iso_week_of, AccountClass, IsoWeek, Market, PriceObservation, RegistryCode, ReturnPoint,
    ReturnSeries, TransferRecord, WeeklyPoint, WeeklyPriceSeries, STUDY_END, STUDY_START,
};

pub const TRANSACTION_COLUMNS: [&str; 7] = [
    "id",
    "date",
    "from_registry",
    "to_registry",
    "from_class",
    "to_class",
    "quantity",
];
pub const PRICE_COLUMNS: [&str; 3] = ["date", "market", "price"];

/// Default forward-fill limit when matching a transfer to a spot price.
pub const DEFAULT_MAX_PRICE_GAP_DAYS: i64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// The first malformed row aborts the parse.
    Strict,
    /// Malformed rows are skipped and reported.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub mode: ParseMode,
    /// Canonical column name -> column name found in the file.
    pub columns: BTreeMap<String, String>,
}

impl ParseOptions {
    pub fn strict() -> Self {
        Self {
            mode: ParseMode::Strict,
            ..Self::default()
        }
    }

    fn column<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.columns.get(canonical).map_or(canonical, String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowIssue {
    /// 1-based line number in the source file (the header is line 1).
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub source: String,
    pub rows: usize,
    pub accepted: usize,
    pub rejected: Vec<RowIssue>,
}

struct Header {
    idx: Vec<usize>,
    optional: Vec<Option<usize>>,
}

fn resolve_header(
    headers: &csv::StringRecord,
    required: &[&str],
    optional: &[&str],
    opts: &ParseOptions,
    source_name: &str,
) -> Result<Header> {
    let find = |name: &str| headers.iter().position(|h| h.trim() == opts.column(name));
    let idx = required
        .iter()
        .map(|c| {
            find(c).ok_or_else(|| Error::Schema {
                source_name: source_name.to_owned(),
                column: opts.column(c).to_owned(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let optional = optional.iter().map(|c| find(c)).collect();
    Ok(Header { idx, optional })
}

fn csv_err(source_name: &str, e: csv::Error) -> Error {
    Error::Csv {
        source_name: source_name.to_owned(),
        message: e.to_string(),
    }
}

/// Drives the row loop shared by both parsers.
fn parse_rows<R, T>(
    reader: R,
    source_name: &str,
    required: &[&str],
    optional: &[&str],
    opts: &ParseOptions,
    mut parse: impl FnMut(&csv::StringRecord, &Header) -> std::result::Result<T, String>,
) -> Result<(Vec<T>, ParseReport)>
where
    R: Read,
{
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(source_name, e))?.clone();
    let header = resolve_header(&headers, required, optional, opts, source_name)?;

    let mut out = Vec::new();
    let mut rejected = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(source_name, e))?;
        rows += 1;
        let line = rec.position().map_or(rows + 1, |p| p.line() as usize);
        match parse(&rec, &header) {
            Ok(v) => out.push(v),
            Err(message) => {
                if opts.mode == ParseMode::Strict {
                    return Err(Error::MalformedRow {
                        source_name: source_name.to_owned(),
                        row: line,
                        message,
                    });
                }
                rejected.push(RowIssue { row: line, message });
            }
        }
    }
    let report = ParseReport {
        source: source_name.to_owned(),
        rows,
        accepted: out.len(),
        rejected,
    };
    Ok((out, report))
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize, name: &str) -> std::result::Result<&'r str, String> {
    rec.get(idx).ok_or_else(|| format!("missing field `{name}`"))
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| format!("invalid date `{s}`"))
}

/// Parses transfer records from any reader. `value_eur` is left empty.
///
/// Records are returned sorted by `(date, id)`. Duplicate ids are rejected
/// like any other malformed row.
pub fn read_transactions<R: Read>(
    reader: R,
    source_name: &str,
    opts: &ParseOptions,
) -> Result<(Vec<TransferRecord>, ParseReport)> {
    let mut seen = HashSet::new();
    let (mut records, report) = parse_rows(
        reader,
        source_name,
        &TRANSACTION_COLUMNS,
        &["from_account", "to_account"],
        opts,
        |rec, h| {
            let get = |i: usize| field(rec, h.idx[i], TRANSACTION_COLUMNS[i]);
            let id = get(0)?.to_owned();
            if id.is_empty() {
                return Err("empty id".into());
            }
            let date = parse_date(get(1)?)?;
            let from_registry = RegistryCode::new(get(2)?).map_err(|e| e.to_string())?;
            let to_registry = RegistryCode::new(get(3)?).map_err(|e| e.to_string())?;
            let from_class: AccountClass = get(4)?.parse().map_err(|e: Error| e.to_string())?;
            let to_class: AccountClass = get(5)?.parse().map_err(|e: Error| e.to_string())?;
            let q = get(6)?;
            let quantity: u64 = q.parse().map_err(|_| format!("invalid quantity `{q}`"))?;
            if quantity == 0 {
                return Err("quantity must be positive".into());
            }
            let account = |i: usize| {
                h.optional[i]
                    .and_then(|j| rec.get(j))
                    .filter(|s| !s.is_empty())
                    .map(str::to_owned)
            };
            if !seen.insert(id.clone()) {
                return Err(format!("duplicate id `{id}`"));
            }
            Ok(TransferRecord {
                id,
                date,
                from_registry,
                to_registry,
                from_class,
                to_class,
                quantity,
                value_eur: None,
                from_account: account(0),
                to_account: account(1),
            })
        },
    )?;
    sort_transfers(&mut records);
    Ok((records, report))
}

/// Parses price observations from any reader, sorted by date.
pub fn read_prices<R: Read>(
    reader: R,
    source_name: &str,
    opts: &ParseOptions,
) -> Result<(Vec<PriceObservation>, ParseReport)> {
    let (mut prices, report) = parse_rows(reader, source_name, &PRICE_COLUMNS, &[], opts, |rec, h| {
        let get = |i: usize| field(rec, h.idx[i], PRICE_COLUMNS[i]);
        let date = parse_date(get(0)?)?;
        let market: Market = get(1)?.parse().map_err(|e: Error| e.to_string())?;
        let p = get(2)?;
        let price: f64 = p.parse().map_err(|_| format!("invalid price `{p}`"))?;
        if !(price.is_finite() && price > 0.0) {
            return Err(format!("price must be positive, got {p}"));
        }
        Ok(PriceObservation { date, market, price })
    })?;
    sort_prices(&mut prices);
    Ok((prices, report))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn parse_transactions(
    path: &Path,
    opts: &ParseOptions,
) -> Result<(Vec<TransferRecord>, ParseReport)> {
    read_transactions(open(path)?, &path.display().to_string(), opts)
}

pub fn parse_prices(path: &Path, opts: &ParseOptions) -> Result<(Vec<PriceObservation>, ParseReport)> {
    read_prices(open(path)?, &path.display().to_string(), opts)
}

fn sort_transfers(t: &mut [TransferRecord]) {
    t.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.id.cmp(&b.id)));
}

fn sort_prices(p: &mut [PriceObservation]) {
    p.sort_by(|a, b| {
        a.date
            .cmp(&b.date)
            .then(a.market.cmp(&b.market))
            .then(a.price.total_cmp(&b.price))
    });
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub path: String,
    pub rows: usize,
}

/// Transfers and prices, each sorted by date, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub transfers: Vec<TransferRecord>,
    pub prices: Vec<PriceObservation>,
    pub provenance: Vec<SourceInfo>,
}

impl Dataset {
    pub fn new(
        mut transfers: Vec<TransferRecord>,
        mut prices: Vec<PriceObservation>,
        provenance: Vec<SourceInfo>,
    ) -> Result<Self> {
        let mut ids = HashSet::with_capacity(transfers.len());
        if let Some(dup) = transfers.iter().find(|t| !ids.insert(t.id.as_str())) {
            return Err(Error::InvalidParameter(format!("duplicate transfer id `{}`", dup.id)));
        }
        sort_transfers(&mut transfers);
        sort_prices(&mut prices);
        Ok(Self {
            transfers,
            prices,
            provenance,
        })
    }

    /// Parses both files (concurrently) and assembles a dataset.
    pub fn load(
        transactions: &Path,
        prices: &Path,
        opts: &ParseOptions,
    ) -> Result<(Self, Vec<ParseReport>)> {
        let (tx, px) = std::thread::scope(|s| {
            let tx = s.spawn(|| parse_transactions(transactions, opts));
            let px = parse_prices(prices, opts);
            (tx.join().expect("transaction parser panicked"), px)
        });
        let (transfers, tx_report) = tx?;
        let (prices, px_report) = px?;
        let provenance = vec![
            SourceInfo {
                path: tx_report.source.clone(),
                rows: tx_report.rows,
            },
            SourceInfo {
                path: px_report.source.clone(),
                rows: px_report.rows,
            },
        ];
        Ok((Self::new(transfers, prices, provenance)?, vec![tx_report, px_report]))
    }

    /// Number of transfers without a EUR value.
    pub fn unvalued(&self) -> usize {
        self.transfers.iter().filter(|t| t.value_eur.is_none()).count()
    }

    pub fn secondary_prices(&self) -> impl Iterator<Item = &PriceObservation> {
        self.prices.iter().filter(|p| p.market == Market::Secondary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowFilter {
    /// Keep OHA->OHA transfers. Other non-administrative pairs are always kept.
    pub include_oha_oha: bool,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for FlowFilter {
    fn default() -> Self {
        Self {
            include_oha_oha: true,
            start: STUDY_START,
            end: STUDY_END,
        }
    }
}

/// Keeps transfers between trading/operator accounts inside the window.
pub fn filter_compliance_flows(ds: &Dataset, filter: &FlowFilter) -> Dataset {
    let transfers = ds
        .transfers
        .iter()
        .filter(|t| {
            let classes_ok = match (t.from_class, t.to_class) {
                (AccountClass::Admin, _) | (_, AccountClass::Admin) => false,
                (AccountClass::Oha, AccountClass::Oha) => filter.include_oha_oha,
                _ => true,
            };
            classes_ok && t.date >= filter.start && t.date <= filter.end
        })
        .cloned()
        .collect();
    Dataset {
        transfers,
        prices: ds.prices.clone(),
        provenance: ds.provenance.clone(),
    }
}

/// Daily secondary-market spot prices with bounded forward fill.
#[derive(Debug, Clone)]
pub struct SpotLookup {
    days: Vec<(NaiveDate, f64)>,
    max_gap_days: i64,
}

impl SpotLookup {
    /// Same-day quotes are averaged.
    pub fn new<'a>(prices: impl IntoIterator<Item = &'a PriceObservation>, max_gap_days: i64) -> Self {
        let mut by_day: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
        for p in prices.into_iter().filter(|p| p.market == Market::Secondary) {
            by_day.entry(p.date).or_default().push(p.price);
        }
        let days = by_day
            .into_iter()
            .map(|(d, mut v)| {
                v.sort_by(f64::total_cmp);
                (d, v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        Self { days, max_gap_days }
    }

    /// Most recent spot price at or before `date`, if within the gap limit.
    pub fn price_on(&self, date: NaiveDate) -> Option<f64> {
        let idx = self.days.partition_point(|(d, _)| *d <= date);
        let (d, p) = *self.days.get(idx.checked_sub(1)?)?;
        ((date - d).num_days() <= self.max_gap_days).then_some(p)
    }
}

/// Sets `value_eur = quantity * spot` for every transfer, forward-filling the
/// spot price up to `max_gap_days`. Transfers without a usable price get
/// `None`; see [`Dataset::unvalued`].
pub fn enrich_values(ds: &Dataset, max_gap_days: i64) -> Dataset {
    let lookup = SpotLookup::new(&ds.prices, max_gap_days);
    let transfers = ds
        .transfers
        .iter()
        .map(|t| TransferRecord {
            value_eur: lookup.price_on(t.date).map(|p| t.quantity as f64 * p),
            ..t.clone()
        })
        .collect();
    Dataset {
        transfers,
        prices: ds.prices.clone(),
        provenance: ds.provenance.clone(),
    }
}

/// Weekly arithmetic means of secondary-market prices.
pub fn aggregate_weekly(prices: &[PriceObservation]) -> Result<WeeklyPriceSeries> {
    let mut secondary: Vec<&PriceObservation> =
        prices.iter().filter(|p| p.market == Market::Secondary).collect();
    secondary.sort_by(|a, b| a.date.cmp(&b.date).then(a.price.total_cmp(&b.price)));
    let mut weeks: BTreeMap<IsoWeek, Vec<f64>> = BTreeMap::new();
    for p in secondary {
        weeks.entry(iso_week_of(p.date)).or_default().push(p.price);
    }
    if weeks.len() < 2 {
        return Err(Error::InsufficientData {
            what: "weekly aggregation (weeks with secondary prices)",
            needed: 2,
            got: weeks.len(),
        });
    }
    let points = weeks
        .into_iter()
        .map(|(week, v)| WeeklyPoint {
            week,
            mean_price: v.iter().sum::<f64>() / v.len() as f64,
            n_obs: v.len(),
        })
        .collect();
    Ok(WeeklyPriceSeries { points })
}

/// `r_t = ln(p_t / p_{t-1})` over consecutive retained weeks.
pub fn log_returns(wps: &WeeklyPriceSeries) -> Result<ReturnSeries> {
    if wps.points.len() < 2 {
        return Err(Error::InsufficientData {
            what: "log returns",
            needed: 2,
            got: wps.points.len(),
        });
    }
    let points = wps
        .points
        .windows(2)
        .map(|w| ReturnPoint {
            week: w[1].week,
            r: (w[1].mean_price / w[0].mean_price).ln(),
        })
        .collect();
    Ok(ReturnSeries { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairShare {
    pub from_class: AccountClass,
    pub to_class: AccountClass,
    pub count: usize,
    pub count_share: f64,
    pub value_eur: f64,
    pub value_share: f64,
}

/// Participation of one registry's accounts of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryActivity {
    pub registry: RegistryCode,
    pub class: AccountClass,
    /// Transfers in which an account of this registry and class took part.
    pub transfers: usize,
    /// Distinct account ids, when the input carries them.
    pub unique_accounts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub total_count: usize,
    pub total_value_eur: f64,
    pub unvalued: usize,
    pub pairs: Vec<PairShare>,
    pub registries: Vec<RegistryActivity>,
}

/// Count and EUR-value shares per account-class pair, plus per-registry
/// participation. Unvalued transfers count toward count shares only.
pub fn summarize_flows(ds: &Dataset) -> FlowSummary {
    let mut pairs: BTreeMap<(AccountClass, AccountClass), (usize, f64)> = BTreeMap::new();
    type Key = (RegistryCode, AccountClass);
    let mut regs: BTreeMap<Key, (usize, BTreeSet<String>)> = BTreeMap::new();
    let mut have_accounts = !ds.transfers.is_empty();
    for t in &ds.transfers {
        let e = pairs.entry((t.from_class, t.to_class)).or_default();
        e.0 += 1;
        e.1 += t.value_eur.unwrap_or(0.0);
        for (reg, class, acct) in [
            (&t.from_registry, t.from_class, &t.from_account),
            (&t.to_registry, t.to_class, &t.to_account),
        ] {
            let r = regs.entry((reg.clone(), class)).or_default();
            r.0 += 1;
            match acct {
                Some(a) => {
                    r.1.insert(a.clone());
                }
                None => have_accounts = false,
            }
        }
    }
    let total_count = ds.transfers.len();
    let total_value: f64 = pairs.values().map(|v| v.1).sum();
    let share = |x: f64, total: f64| if total > 0.0 { x / total } else { 0.0 };
    FlowSummary {
        total_count,
        total_value_eur: total_value,
        unvalued: ds.unvalued(),
        pairs: pairs
            .into_iter()
            .map(|((from_class, to_class), (count, value))| PairShare {
                from_class,
                to_class,
                count,
                count_share: share(count as f64, total_count as f64),
                value_eur: value,
                value_share: share(value, total_value),
            })
            .collect(),
        registries: regs
            .into_iter()
            .map(|((registry, class), (transfers, accts))| RegistryActivity {
                registry,
                class,
                transfers,
                unique_accounts: have_accounts.then_some(accts.len()),
            })
            .collect(),
    }
}
