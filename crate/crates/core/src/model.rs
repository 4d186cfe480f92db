//! Domain types shared by every analysis stage, plus calendar helpers for
//! ISO week bucketing and period segmentation.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First day of the default study window.
pub const STUDY_START: NaiveDate = match NaiveDate::from_ymd_opt(2010, 1, 5) {
    Some(d) => d,
    None => panic!("invalid date"),
};

/// Last day (inclusive) of the default study window.
pub const STUDY_END: NaiveDate = match NaiveDate::from_ymd_opt(2020, 4, 30) {
    Some(d) => d,
    None => panic!("invalid date"),
};

/// Two-letter registry (country) identifier such as `DE` or `GB`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RegistryCode(String);

impl RegistryCode {
    pub fn new(code: &str) -> Result<Self> {
        let b = code.as_bytes();
        if b.len() == 2 && b.iter().all(u8::is_ascii_uppercase) {
            Ok(Self(code.to_owned()))
        } else {
            Err(Error::InvalidRegistry(code.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RegistryCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::new(&s)
    }
}

impl From<RegistryCode> for String {
    fn from(c: RegistryCode) -> String {
        c.0
    }
}

impl FromStr for RegistryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl fmt::Display for RegistryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Account type of a transfer endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AccountClass {
    /// Operator holding account, linked to a regulated installation.
    #[serde(rename = "OHA")]
    Oha,
    /// Person holding account, held by intermediaries and traders.
    #[serde(rename = "PHA")]
    Pha,
    /// Administrative account run by a competent authority.
    #[serde(rename = "ADMIN")]
    Admin,
}

impl AccountClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AccountClass::Oha => "OHA",
            AccountClass::Pha => "PHA",
            AccountClass::Admin => "ADMIN",
        }
    }
}

impl FromStr for AccountClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OHA" => Ok(AccountClass::Oha),
            "PHA" => Ok(AccountClass::Pha),
            "ADMIN" => Ok(AccountClass::Admin),
            other => Err(Error::InvalidAccountClass(other.to_owned())),
        }
    }
}

impl fmt::Display for AccountClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One allowance transfer between two accounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub id: String,
    pub date: NaiveDate,
    pub from_registry: RegistryCode,
    pub to_registry: RegistryCode,
    pub from_class: AccountClass,
    pub to_class: AccountClass,
    /// Allowances transferred (tCO2), always positive.
    pub quantity: u64,
    /// EUR value, filled in by [`crate::ingest::enrich_values`].
    pub value_eur: Option<f64>,
    /// Optional account identifiers, used only for unique-account counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_account: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_account: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Market {
    #[serde(rename = "PRIMARY")]
    Primary,
    #[serde(rename = "SECONDARY")]
    Secondary,
}

impl Market {
    pub fn as_str(self) -> &'static str {
        match self {
            Market::Primary => "PRIMARY",
            Market::Secondary => "SECONDARY",
        }
    }
}

impl FromStr for Market {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PRIMARY" => Ok(Market::Primary),
            "SECONDARY" => Ok(Market::Secondary),
            other => Err(Error::InvalidMarket(other.to_owned())),
        }
    }
}

/// A spot price quote in EUR per allowance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceObservation {
    pub date: NaiveDate,
    pub market: Market,
    pub price: f64,
}

/// ISO-8601 week (Monday start). Orders chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoWeek {
    pub year: i32,
    pub week: u32,
}

impl IsoWeek {
    /// Monday of this week.
    pub fn monday(self) -> NaiveDate {
        NaiveDate::from_isoywd_opt(self.year, self.week, Weekday::Mon)
            .expect("IsoWeek is always constructed from a valid date")
    }

    /// The following ISO week.
    pub fn succ(self) -> IsoWeek {
        iso_week_of(self.monday() + Duration::days(7))
    }
}

impl fmt::Display for IsoWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-W{:02}", self.year, self.week)
    }
}

impl FromStr for IsoWeek {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("invalid ISO week `{s}`"));
        let (y, w) = s.split_once("-W").ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let week: u32 = w.parse().map_err(|_| bad())?;
        NaiveDate::from_isoywd_opt(year, week, Weekday::Mon).ok_or_else(bad)?;
        Ok(IsoWeek { year, week })
    }
}

impl Serialize for IsoWeek {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IsoWeek {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// ISO year-week of a civil date.
pub fn iso_week_of(date: NaiveDate) -> IsoWeek {
    let w = date.iso_week();
    IsoWeek {
        year: w.year(),
        week: w.week(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeeklyPoint {
    pub week: IsoWeek,
    pub mean_price: f64,
    pub n_obs: usize,
}

/// Weekly mean secondary-market prices; empty weeks are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyPriceSeries {
    pub points: Vec<WeeklyPoint>,
}

impl WeeklyPriceSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    pub week: IsoWeek,
    pub r: f64,
}

/// Weekly log returns between consecutive retained weeks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub points: Vec<ReturnPoint>,
}

impl ReturnSeries {
    /// Labels `values` with consecutive ISO weeks starting at `start`.
    pub fn from_values(start: IsoWeek, values: &[f64]) -> Self {
        let mut week = start;
        let points = values
            .iter()
            .map(|&r| {
                let p = ReturnPoint { week, r };
                week = week.succ();
                p
            })
            .collect();
        Self { points }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One labelled period `[start, end)`; the last period is closed at the
/// window end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub index: usize,
    pub label: String,
    pub start: NaiveDate,
    /// Exclusive end, except for the final period where it is inclusive.
    pub end: NaiveDate,
}

/// Partition of the study window into consecutive labelled periods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSegmentation {
    periods: Vec<Period>,
    window_start: NaiveDate,
    window_end: NaiveDate,
}

impl Default for PeriodSegmentation {
    fn default() -> Self {
        let b1 = NaiveDate::from_ymd_opt(2013, 1, 1).unwrap();
        let b2 = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
        Self::with_labels(
            STUDY_START,
            STUDY_END,
            &[b1, b2],
            &["2010-2012", "2012-2018", "2018-2020"],
        )
        .expect("default segmentation is valid")
    }
}

impl PeriodSegmentation {
    /// Builds a segmentation with generated `YYYY-YYYY` labels.
    pub fn new(start: NaiveDate, end: NaiveDate, breakpoints: &[NaiveDate]) -> Result<Self> {
        let mut bounds = vec![start];
        bounds.extend_from_slice(breakpoints);
        let ranges: Vec<(NaiveDate, NaiveDate)> = bounds
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let last = match bounds.get(i + 1) {
                    Some(next) => next.pred_opt().unwrap_or(*next),
                    None => end,
                };
                (*s, last)
            })
            .collect();
        let mut labels: Vec<String> = ranges
            .iter()
            .map(|(s, l)| format!("{}-{}", s.year(), l.year()))
            .collect();
        // Several periods inside one year: fall back to full dates.
        if labels.iter().collect::<HashSet<_>>().len() != labels.len() {
            labels = ranges.iter().map(|(s, l)| format!("{s}..{l}")).collect();
        }
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Self::with_labels(start, end, breakpoints, &refs)
    }

    pub fn with_labels(
        start: NaiveDate,
        end: NaiveDate,
        breakpoints: &[NaiveDate],
        labels: &[&str],
    ) -> Result<Self> {
        if labels.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} breakpoints need {} labels, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                labels.len()
            )));
        }
        if labels.iter().collect::<HashSet<_>>().len() != labels.len() {
            return Err(Error::InvalidParameter("period labels must be unique".into()));
        }
        let mut bounds = vec![start];
        bounds.extend_from_slice(breakpoints);
        if bounds.windows(2).any(|w| w[0] >= w[1]) || *bounds.last().unwrap() > end {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing and inside the window".into(),
            ));
        }
        let periods = bounds
            .iter()
            .enumerate()
            .map(|(i, &s)| Period {
                index: i,
                label: labels[i].to_owned(),
                start: s,
                end: bounds.get(i + 1).copied().unwrap_or(end),
            })
            .collect();
        Ok(Self {
            periods,
            window_start: start,
            window_end: end,
        })
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn window(&self) -> (NaiveDate, NaiveDate) {
        (self.window_start, self.window_end)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        date >= self.window_start && date <= self.window_end
    }

    pub fn period(&self, label: &str) -> Option<&Period> {
        self.periods.iter().find(|p| p.label == label)
    }

    /// The unique period containing `date`.
    pub fn period_of(&self, date: NaiveDate) -> Result<&Period> {
        if !self.contains(date) {
            return Err(Error::OutsideWindow {
                date,
                start: self.window_start,
                end: self.window_end,
            });
        }
        // Half-open intervals: the last period whose start is <= date.
        let idx = self.periods.partition_point(|p| p.start <= date) - 1;
        Ok(&self.periods[idx])
    }
}

/// Label of the period containing `date` under `seg`.
pub fn period_of(date: NaiveDate, seg: &PeriodSegmentation) -> Result<&str> {
    seg.period_of(date).map(|p| p.label.as_str())
}
