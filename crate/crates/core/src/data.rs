//! Time-indexed data model shared by every pipeline stage.
//!
//! A [`TimeSeriesTable`] is an immutable, timestamp-indexed panel. Every
//! column carries exactly one [`Availability`] tag, which downstream stages
//! use to decide what may be consumed at planning time. Missing values are
//! `None`, never a sentinel number.

use crate::error::{Error, Result};
use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub const DAY_AHEAD_PRICE: &str = "day_ahead_price";
pub const REAL_TIME_PRICE: &str = "real_time_price";

/// Availability class of a column relative to the planning time (end of day D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    Target,
    HistoricalExogenous,
    FutureAvailableExogenous,
    ConstructedFactor,
    ForecastedFeature,
}

impl Availability {
    pub fn as_str(self) -> &'static str {
        match self {
            Availability::Target => "target",
            Availability::HistoricalExogenous => "historical_exogenous",
            Availability::FutureAvailableExogenous => "future_available_exogenous",
            Availability::ConstructedFactor => "constructed_factor",
            Availability::ForecastedFeature => "forecasted_feature",
        }
    }
}

impl fmt::Display for Availability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Availability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "target" => Availability::Target,
            "historical_exogenous" => Availability::HistoricalExogenous,
            "future_available_exogenous" | "future_available" => Availability::FutureAvailableExogenous,
            "constructed_factor" => Availability::ConstructedFactor,
            "forecasted_feature" => Availability::ForecastedFeature,
            other => return Err(Error::Parse(format!("unknown availability class {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub availability: Availability,
    pub unit: String,
    pub values: Vec<Option<f64>>,
}

impl Column {
    pub fn new(name: impl Into<String>, availability: Availability, values: Vec<Option<f64>>) -> Self {
        Column { name: name.into(), availability, unit: String::new(), values }
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }

    pub fn dense(name: impl Into<String>, availability: Availability, values: &[f64]) -> Self {
        Column::new(name, availability, values.iter().copied().map(Some).collect())
    }
}

/// Immutable timestamp-indexed table at a fixed resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    resolution_minutes: u32,
    index: Vec<NaiveDateTime>,
    columns: Vec<Column>,
}

impl TimeSeriesTable {
    pub fn new(resolution_minutes: u32, index: Vec<NaiveDateTime>, columns: Vec<Column>) -> Result<Self> {
        if resolution_minutes == 0 || 1440 % resolution_minutes != 0 {
            return Err(Error::InvalidTable(format!("resolution {resolution_minutes} min does not divide a day")));
        }
        for w in index.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidTable(format!("index not strictly increasing at {}", w[1])));
            }
        }
        for ts in &index {
            let minute = ts.hour() * 60 + ts.minute();
            if ts.second() != 0 || ts.nanosecond() != 0 || minute % resolution_minutes != 0 {
                return Err(Error::InvalidTable(format!("timestamp {ts} is off the {resolution_minutes}-minute grid")));
            }
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::NameCollision(c.name.clone()));
            }
            if c.values.len() != index.len() {
                return Err(Error::InvalidTable(format!(
                    "column {} has {} values for {} rows",
                    c.name,
                    c.values.len(),
                    index.len()
                )));
            }
        }
        Ok(TimeSeriesTable { resolution_minutes, index, columns })
    }

    pub fn resolution_minutes(&self) -> u32 {
        self.resolution_minutes
    }

    /// Steps per day (H): 96 at 15 minutes, 24 at hourly.
    pub fn steps_per_day(&self) -> usize {
        (1440 / self.resolution_minutes) as usize
    }

    pub fn index(&self) -> &[NaiveDateTime] {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns.iter().find(|c| c.name == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    pub fn columns_with(&self, availability: Availability) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| c.availability == availability)
    }

    /// Row range `[lo, hi)` whose timestamps fall in `[start, end)`.
    pub fn row_range(&self, start: NaiveDateTime, end: NaiveDateTime) -> std::ops::Range<usize> {
        let lo = self.index.partition_point(|t| *t < start);
        let hi = self.index.partition_point(|t| *t < end);
        lo..hi.max(lo)
    }

    pub fn rows_for_date(&self, date: NaiveDate) -> std::ops::Range<usize> {
        let start = date.and_time(NaiveTime::MIN);
        self.row_range(start, start + Duration::days(1))
    }

    /// Number of rows with timestamp ≤ end of `day`.
    pub fn rows_through(&self, day: NaiveDate) -> usize {
        let end = day.and_time(NaiveTime::MIN) + Duration::days(1);
        self.index.partition_point(|t| *t < end)
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.index.first().map(|t| t.date())
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.index.last().map(|t| t.date())
    }

    /// A copy without any row timestamped after the end of `day`.
    pub fn truncated_after(&self, day: NaiveDate) -> TimeSeriesTable {
        let n = self.rows_through(day);
        TimeSeriesTable {
            resolution_minutes: self.resolution_minutes,
            index: self.index[..n].to_vec(),
            columns: self.columns.iter().map(|c| Column { values: c.values[..n].to_vec(), ..c.clone() }).collect(),
        }
    }

    /// A new table with `columns` replaced by name; used by transforms that
    /// produce a fresh table rather than mutating one.
    pub fn with_replaced_columns(&self, columns: Vec<Column>) -> Result<TimeSeriesTable> {
        TimeSeriesTable::new(self.resolution_minutes, self.index.clone(), columns)
    }

    pub fn into_parts(self) -> (u32, Vec<NaiveDateTime>, Vec<Column>) {
        (self.resolution_minutes, self.index, self.columns)
    }
}

/// The H consecutive steps covering one calendar day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayWindow {
    pub day: NaiveDate,
    /// First table row of the window.
    pub start_row: usize,
    pub steps: Vec<NaiveDateTime>,
}

impl DayWindow {
    pub fn rows(&self) -> std::ops::Range<usize> {
        self.start_row..self.start_row + self.steps.len()
    }
}

/// One window per date in `[start, end]`, chronological.
pub fn enumerate_day_windows(table: &TimeSeriesTable, start: NaiveDate, end: NaiveDate) -> Result<Vec<DayWindow>> {
    let dates: Vec<NaiveDate> = start.iter_days().take_while(|d| *d <= end).collect();
    day_windows_for(table, &dates)
}

/// Windows for an explicit (possibly filtered) list of dates.
pub fn day_windows_for(table: &TimeSeriesTable, dates: &[NaiveDate]) -> Result<Vec<DayWindow>> {
    let h = table.steps_per_day();
    let mut sorted = dates.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted
        .into_iter()
        .map(|day| {
            let rows = table.rows_for_date(day);
            if rows.len() != h {
                return Err(Error::GapInIndex { date: day, expected: h, found: rows.len() });
            }
            Ok(DayWindow { day, start_row: rows.start, steps: table.index()[rows].to_vec() })
        })
        .collect()
}

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Parse(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        YearMonth { year: date.year(), month: date.month() }
    }

    pub fn add_months(self, delta: i32) -> Self {
        let total = self.year * 12 + self.month as i32 - 1 + delta;
        YearMonth { year: total.div_euclid(12), month: total.rem_euclid(12) as u32 + 1 }
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn last_day(self) -> NaiveDate {
        self.add_months(1).first_day().pred_opt().expect("valid date")
    }

    pub fn days(self) -> Vec<NaiveDate> {
        let last = self.last_day();
        self.first_day().iter_days().take_while(|d| *d <= last).collect()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected YYYY-MM, got {s:?}"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        YearMonth::new(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
    }
}

impl TryFrom<String> for YearMonth {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<YearMonth> for String {
    fn from(m: YearMonth) -> String {
        m.to_string()
    }
}

/// Inclusive month range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub first: YearMonth,
    pub last: YearMonth,
}

impl MonthRange {
    pub fn months(&self) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let mut m = self.first;
        while m <= self.last {
            out.push(m);
            m = m.add_months(1);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.months().len()
    }

    pub fn is_empty(&self) -> bool {
        self.first > self.last
    }

    pub fn days(&self) -> Vec<NaiveDate> {
        self.months().into_iter().flat_map(YearMonth::days).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolidayCalendar {
    dates: BTreeSet<NaiveDate>,
}

impl HolidayCalendar {
    pub fn new(dates: impl IntoIterator<Item = NaiveDate>) -> Self {
        HolidayCalendar { dates: dates.into_iter().collect() }
    }

    /// Plain date list: one ISO-8601 date per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dates = BTreeSet::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let d = NaiveDate::parse_from_str(line, "%Y-%m-%d")
                .map_err(|e| Error::Parse(format!("holiday date {line:?}: {e}")))?;
            dates.insert(d);
        }
        Ok(HolidayCalendar { dates })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.contains(&date)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Drops weekends and calendar members, preserving order.
pub fn filter_workdays(dates: &[NaiveDate], calendar: &HolidayCalendar) -> Vec<NaiveDate> {
    dates
        .iter()
        .copied()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) && !calendar.contains(*d))
        .collect()
}

/// Train / validation / test layout for one rolling test month.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingSplit {
    pub test_month: YearMonth,
    pub train_range: Option<MonthRange>,
    pub val_range: Option<MonthRange>,
    pub workday_filter: bool,
    pub holiday_calendar: HolidayCalendar,
}

impl RollingSplit {
    pub fn id(&self) -> String {
        self.test_month.to_string()
    }

    fn filtered(&self, dates: Vec<NaiveDate>) -> Vec<NaiveDate> {
        if self.workday_filter {
            filter_workdays(&dates, &self.holiday_calendar)
        } else {
            dates
        }
    }

    pub fn train_dates(&self) -> Vec<NaiveDate> {
        self.filtered(self.train_range.map(|r| r.days()).unwrap_or_default())
    }

    pub fn val_dates(&self) -> Vec<NaiveDate> {
        self.filtered(self.val_range.map(|r| r.days()).unwrap_or_default())
    }

    pub fn test_dates(&self) -> Vec<NaiveDate> {
        self.filtered(self.test_month.days())
    }

    /// Earliest calendar date touched by any range of the split.
    pub fn first_day(&self) -> NaiveDate {
        self.train_range.or(self.val_range).map(|r| r.first.first_day()).unwrap_or_else(|| self.test_month.first_day())
    }
}

/// One split per distinct test month: `val_m` months immediately before the
/// test month for validation and the `train_m` months before those for
/// training. Output is sorted by test month regardless of input order.
pub fn build_rolling_splits(
    months: &[YearMonth],
    train_m: u32,
    val_m: u32,
    history_start: Option<YearMonth>,
) -> Result<Vec<RollingSplit>> {
    let mut months = months.to_vec();
    months.sort();
    months.dedup();
    let range = |first: YearMonth, n: u32| (n > 0).then(|| MonthRange { first, last: first.add_months(n as i32 - 1) });
    months
        .into_iter()
        .map(|test_month| {
            let val_first = test_month.add_months(-(val_m as i32));
            let train_first = val_first.add_months(-(train_m as i32));
            if let Some(start) = history_start {
                if train_first < start {
                    return Err(Error::InsufficientHistory(format!(
                        "test month {test_month} needs history from {train_first}, data starts {start}"
                    )));
                }
            }
            Ok(RollingSplit {
                test_month,
                train_range: range(train_first, train_m),
                val_range: range(val_first, val_m),
                workday_filter: false,
                holiday_calendar: HolidayCalendar::default(),
            })
        })
        .collect()
}

/// Switches every split to workday-only dates under `calendar`.
pub fn with_workday_filter(splits: Vec<RollingSplit>, calendar: &HolidayCalendar) -> Vec<RollingSplit> {
    splits.into_iter().map(|s| RollingSplit { workday_filter: true, holiday_calendar: calendar.clone(), ..s }).collect()
}
