//! Case-series ingestion and mean-replacing estimators.
//!
//! The confirmed column `c(k)` is used directly as the infected count `I(k)`
//! and the deaths column `d(k)` as the cumulative deceased count `D(k)`.
//! Replacing each random coefficient by a constant and averaging the per-day
//! rearrangements gives
//!
//! ```text
//! d̂_I = mean_k (d(k+1) - d(k)) / c(k)
//! δ̂   = mean_k (c(k+1) / c(k) - 1 + d̂_I + v̄)
//! ```
//!
//! the second under the full-effort policy `K = 1`. With `N` rows there are
//! `N - 1` differences; days with `c(k) = 0` are skipped and counted.
//!
//! CSV layout: header `date,confirmed,deaths`, ISO-8601 dates, one row per
//! consecutive day, no quoting, `\n` line endings.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Result, SirdError};

pub const HEADER: [&str; 3] = ["date", "confirmed", "deaths"];

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("cannot read case series: {0}")]
    Io(#[from] std::io::Error),

    #[error("expected header `date,confirmed,deaths`, found `{0}`")]
    Header(String),

    #[error("line {line}: {msg}")]
    Malformed { line: u64, msg: String },

    #[error("line {line}: cannot parse date `{value}` as YYYY-MM-DD")]
    BadDate { line: u64, value: String },

    #[error("line {line}: negative {column} count {value}")]
    NegativeCount { line: u64, column: &'static str, value: f64 },

    #[error("dates must increase: {date} does not follow {previous}")]
    NonIncreasingDate { date: NaiveDate, previous: NaiveDate },

    #[error("date gap: {missing} is missing (series jumps from {previous} to {next})")]
    DateGap { missing: NaiveDate, previous: NaiveDate, next: NaiveDate },

    #[error("cumulative deaths decrease on {date}: {value} < {previous}")]
    NonMonotoneDeaths { date: NaiveDate, previous: f64, value: f64 },

    #[error("series needs at least 2 days, found {0}")]
    TooShort(usize),

    #[error("column lengths differ: {dates} dates, {confirmed} confirmed, {deaths} deaths")]
    LengthMismatch { dates: usize, confirmed: usize, deaths: usize },
}

/// Daily confirmed and cumulative death counts on consecutive days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSeries {
    dates: Vec<NaiveDate>,
    confirmed: Vec<f64>,
    deaths: Vec<f64>,
}

impl CaseSeries {
    pub fn new(dates: Vec<NaiveDate>, confirmed: Vec<f64>, deaths: Vec<f64>) -> Result<Self, SeriesError> {
        if dates.len() != confirmed.len() || dates.len() != deaths.len() {
            return Err(SeriesError::LengthMismatch {
                dates: dates.len(),
                confirmed: confirmed.len(),
                deaths: deaths.len(),
            });
        }
        if dates.len() < 2 {
            return Err(SeriesError::TooShort(dates.len()));
        }
        for (idx, (&c, &d)) in confirmed.iter().zip(&deaths).enumerate() {
            let line = idx as u64 + 2;
            if c.is_nan() || c < 0.0 {
                return Err(SeriesError::NegativeCount { line, column: "confirmed", value: c });
            }
            if d.is_nan() || d < 0.0 {
                return Err(SeriesError::NegativeCount { line, column: "deaths", value: d });
            }
        }
        for w in dates.windows(2) {
            let (previous, next) = (w[0], w[1]);
            if next <= previous {
                return Err(SeriesError::NonIncreasingDate { date: next, previous });
            }
            if next - previous > Duration::days(1) {
                return Err(SeriesError::DateGap { missing: previous + Duration::days(1), previous, next });
            }
        }
        for (i, w) in deaths.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(SeriesError::NonMonotoneDeaths { date: dates[i + 1], previous: w[0], value: w[1] });
            }
        }
        Ok(Self { dates, confirmed, deaths })
    }

    /// Builds a series starting at `start` on consecutive days.
    pub fn from_counts(start: NaiveDate, confirmed: Vec<f64>, deaths: Vec<f64>) -> Result<Self, SeriesError> {
        let dates = (0..confirmed.len()).map(|i| start + Duration::days(i as i64)).collect();
        Self::new(dates, confirmed, deaths)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn confirmed(&self) -> &[f64] {
        &self.confirmed
    }

    pub fn deaths(&self) -> &[f64] {
        &self.deaths
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Rows whose date lies in `[from, to]`.
    pub fn window(&self, from: NaiveDate, to: NaiveDate) -> Result<Self, SeriesError> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.dates[i] >= from && self.dates[i] <= to).collect();
        Self::new(
            keep.iter().map(|&i| self.dates[i]).collect(),
            keep.iter().map(|&i| self.confirmed[i]).collect(),
            keep.iter().map(|&i| self.deaths[i]).collect(),
        )
    }

    /// Writes the CSV layout described in the module docs.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "{}", HEADER.join(","))?;
        for i in 0..self.len() {
            writeln!(out, "{},{},{}", self.dates[i].format("%Y-%m-%d"), self.confirmed[i], self.deaths[i])?;
        }
        out.flush()
    }
}

/// How the deaths column is interpreted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeathsColumn {
    #[default]
    Cumulative,
    /// Daily new deaths, summed into a cumulative count on load.
    Daily,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub deaths: DeathsColumn,
    /// Replace the confirmed column by its trailing sum over this many days,
    /// turning daily incidence into an active-case proxy. Off by default.
    pub active_window: Option<usize>,
}

fn trailing_sum(values: &[f64], window: usize) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            acc += x;
            if i >= window {
                acc -= values[i - window];
            }
            acc
        })
        .collect()
}

/// Parses a case series from CSV text.
pub fn parse_series<R: Read>(input: R, options: &LoadOptions) -> Result<CaseSeries, SeriesError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).quoting(false).from_reader(input);
    let header = reader.headers().map_err(|e| SeriesError::Malformed { line: 1, msg: e.to_string() })?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(SeriesError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }

    let (mut dates, mut confirmed, mut deaths) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record
            .map_err(|e| SeriesError::Malformed { line: e.position().map_or(0, |p| p.line()), msg: e.to_string() })?;
        let line = record.position().map_or(0, |p| p.line());
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| SeriesError::BadDate { line, value: record[0].to_string() })?;
        let number = |idx: usize, column: &'static str| -> Result<f64, SeriesError> {
            let value: f64 = record[idx].parse().map_err(|_| SeriesError::Malformed {
                line,
                msg: format!("cannot parse {column} value `{}`", &record[idx]),
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(SeriesError::NegativeCount { line, column, value });
            }
            Ok(value)
        };
        confirmed.push(number(1, "confirmed")?);
        deaths.push(number(2, "deaths")?);
        dates.push(date);
    }

    if options.deaths == DeathsColumn::Daily {
        let mut total = 0.0;
        for d in deaths.iter_mut() {
            total += *d;
            *d = total;
        }
    }
    if let Some(window) = options.active_window.filter(|&w| w > 0) {
        confirmed = trailing_sum(&confirmed, window);
    }
    CaseSeries::new(dates, confirmed, deaths)
}

pub fn load_series(path: impl AsRef<Path>, options: &LoadOptions) -> Result<CaseSeries, SeriesError> {
    parse_series(File::open(path)?, options)
}

/// Output of [`estimate_all`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub d_i_hat: f64,
    pub delta_hat: f64,
    /// Differences excluded because `c(k) = 0`.
    pub skipped_days: usize,
    /// Differences that entered both means.
    pub sample_count: usize,
}

/// Mean of `term(k)` over the differences with `c(k) > 0`.
fn mean_over_usable(series: &CaseSeries, term: impl Fn(usize) -> f64) -> Result<(f64, usize, usize)> {
    let c = series.confirmed();
    let usable: Vec<usize> = (0..series.len() - 1).filter(|&k| c[k] > 0.0).collect();
    if usable.is_empty() {
        return Err(SirdError::NoUsableDays);
    }
    let mean = usable.iter().map(|&k| term(k)).sum::<f64>() / usable.len() as f64;
    Ok((mean, usable.len(), series.len() - 1 - usable.len()))
}

/// `d̂_I = mean (d(k+1) - d(k)) / c(k)`.
pub fn estimate_death_rate(series: &CaseSeries) -> Result<f64> {
    let (c, d) = (series.confirmed(), series.deaths());
    Ok(mean_over_usable(series, |k| (d[k + 1] - d[k]) / c[k])?.0)
}

/// `δ̂ = mean (c(k+1)/c(k) - 1 + d̂_I + v̄)`, assuming the policy `u = I`.
pub fn estimate_delta(series: &CaseSeries, v_mean: f64, d_i_hat: f64) -> Result<f64> {
    if !(v_mean > 0.0 && v_mean <= 1.0) {
        return Err(SirdError::InvalidParams(format!("v_mean must lie in (0, 1], got {v_mean}")));
    }
    let c = series.confirmed();
    Ok(mean_over_usable(series, |k| c[k + 1] / c[k] - 1.0 + d_i_hat + v_mean)?.0)
}

/// Death rate first, then the infection rate using it.
pub fn estimate_all(series: &CaseSeries, v_mean: f64) -> Result<EstimateResult> {
    let d_i_hat = estimate_death_rate(series)?;
    let delta_hat = estimate_delta(series, v_mean, d_i_hat)?;
    let (_, sample_count, skipped_days) = mean_over_usable(series, |_| 0.0)?;
    Ok(EstimateResult { d_i_hat, delta_hat, skipped_days, sample_count })
}
