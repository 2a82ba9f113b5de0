//! System descriptor and time-series ingestion.
//!
//! The descriptor is one JSON document holding the component collections in
//! natural units (MW, MWh, $) plus a `time_series` manifest:
//!
//! ```json
//! "time_series": {
//!   "forecasts": [{ "file": "da.csv", "label": "max_active_power",
//!                   "resolution_minutes": 60, "issue_interval_minutes": 60, "horizon_steps": 48 }],
//!   "realizations": [{ "file": "actuals.csv", "label": "max_active_power", "resolution_minutes": 60 }]
//! }
//! ```
//!
//! Forecast CSVs have columns `issue_time,timestamp,<component>...` with
//! `horizon_steps` consecutive rows per issue time; realization CSVs have
//! `timestamp,<component>...`. Timestamps are ISO-8601 without offset (UTC).
//! Renewable and load values are fractions of rating/peak; reserve
//! requirements are MW.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use opsim_core::system::{Forecast, RealizationSeries, SystemData, SystemModel};
use opsim_core::time::{Duration, Timestamp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LABEL: &str = "max_active_power";

fn default_label() -> String {
    DEFAULT_LABEL.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastFile {
    pub file: PathBuf,
    #[serde(default = "default_label")]
    pub label: String,
    pub resolution_minutes: i64,
    pub issue_interval_minutes: i64,
    pub horizon_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationFile {
    pub file: PathBuf,
    #[serde(default = "default_label")]
    pub label: String,
    pub resolution_minutes: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSeriesManifest {
    #[serde(default)]
    pub forecasts: Vec<ForecastFile>,
    #[serde(default)]
    pub realizations: Vec<RealizationFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    #[serde(flatten)]
    pub data: SystemData,
    #[serde(default)]
    pub time_series: TimeSeriesManifest,
}

pub const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn parse_time(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    let t = NaiveDateTime::parse_from_str(s, TIME_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .ok()?;
    Some(Timestamp(t.and_utc().timestamp()))
}

pub fn format_time(t: Timestamp) -> String {
    let (y, mo, d, h, mi, s) = t.to_civil();
    format!("{y:04}-{mo:02}-{d:02}T{h:02}:{mi:02}:{s:02}")
}

fn minutes(m: i64, what: &str, path: &Path) -> Result<Duration> {
    if m <= 0 {
        return Err(Error::Config(format!("{}: {what} must be positive", path.display())));
    }
    Ok(Duration::minutes(m))
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let csv_err = |e: csv::Error| Error::Csv { path: path.to_path_buf(), message: e.to_string() };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for r in rd.records() {
        rows.push(r.map_err(csv_err)?.iter().map(str::to_string).collect());
    }
    Ok(Table { headers, rows })
}

fn cell_time(path: &Path, row: usize, s: &str) -> Result<Timestamp> {
    parse_time(s).ok_or_else(|| Error::Csv { path: path.to_path_buf(), message: format!("row {row}: bad timestamp `{s}`") })
}

fn cell_value(path: &Path, row: usize, col: &str, s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Csv {
        path: path.to_path_buf(),
        message: format!("row {row}, column `{col}`: bad number `{s}`"),
    })
}

fn column(t: &Table, path: &Path, name: &str) -> Result<usize> {
    t.headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
        path: path.to_path_buf(),
        message: format!("missing column `{name}`"),
    })
}

pub fn read_forecasts(path: &Path, spec: &ForecastFile) -> Result<Vec<Forecast>> {
    let t = read_table(path)?;
    let ic = column(&t, path, "issue_time")?;
    let tc = column(&t, path, "timestamp")?;
    let res = minutes(spec.resolution_minutes, "resolution_minutes", path)?;
    let every = minutes(spec.issue_interval_minutes, "issue_interval_minutes", path)?;
    let comps: Vec<(usize, &String)> =
        t.headers.iter().enumerate().filter(|(i, _)| *i != ic && *i != tc).collect();
    let mut windows: Vec<BTreeMap<Timestamp, Vec<f64>>> = vec![BTreeMap::new(); comps.len()];
    for (r, row) in t.rows.iter().enumerate() {
        let issue = cell_time(path, r + 2, &row[ic])?;
        let at = cell_time(path, r + 2, &row[tc])?;
        let step = (at - issue).multiple_of(res).map(|k| k as usize).or(if at == issue { Some(0) } else { None });
        for (k, (ci, name)) in comps.iter().enumerate() {
            let v = cell_value(path, r + 2, name, &row[*ci])?;
            let w = windows[k].entry(issue).or_default();
            if step != Some(w.len()) {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    message: format!("row {}: timestamp {} out of sequence for issue time {}", r + 2, row[tc], row[ic]),
                });
            }
            w.push(v);
        }
    }
    Ok(comps
        .into_iter()
        .zip(windows)
        .map(|((_, name), windows)| Forecast {
            component: name.clone(),
            label: spec.label.clone(),
            resolution: res,
            issue_interval: every,
            horizon_steps: spec.horizon_steps,
            windows,
        })
        .collect())
}

pub fn read_realizations(path: &Path, spec: &RealizationFile) -> Result<Vec<RealizationSeries>> {
    let t = read_table(path)?;
    let tc = column(&t, path, "timestamp")?;
    let res = minutes(spec.resolution_minutes, "resolution_minutes", path)?;
    let comps: Vec<(usize, &String)> = t.headers.iter().enumerate().filter(|(i, _)| *i != tc).collect();
    let mut start = None;
    let mut values = vec![Vec::new(); comps.len()];
    for (r, row) in t.rows.iter().enumerate() {
        let at = cell_time(path, r + 2, &row[tc])?;
        let s = *start.get_or_insert(at);
        if at != s + res.times(r as i64) {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                message: format!("row {}: timestamp {} breaks the {res} grid", r + 2, row[tc]),
            });
        }
        for (k, (ci, name)) in comps.iter().enumerate() {
            values[k].push(cell_value(path, r + 2, name, &row[*ci])?);
        }
    }
    let start = start.ok_or_else(|| Error::Csv { path: path.to_path_buf(), message: "no rows".into() })?;
    Ok(comps
        .into_iter()
        .zip(values)
        .map(|((_, name), values)| RealizationSeries {
            component: name.clone(),
            label: spec.label.clone(),
            resolution: res,
            start,
            values,
        })
        .collect())
}

pub fn read_descriptor(path: &Path) -> Result<Descriptor> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })
}

/// Loads and validates a system; CSV paths resolve against the descriptor's directory.
pub fn load_system(path: &Path) -> Result<SystemModel> {
    let d = read_descriptor(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut forecasts = Vec::new();
    for f in &d.time_series.forecasts {
        forecasts.extend(read_forecasts(&dir.join(&f.file), f)?);
    }
    let mut realizations = Vec::new();
    for r in &d.time_series.realizations {
        realizations.extend(read_realizations(&dir.join(&r.file), r)?);
    }
    Ok(SystemModel::new(d.data, forecasts, realizations)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_round_trip() {
        let t = parse_time("2024-01-02T03:00:00").unwrap();
        assert_eq!(format_time(t), "2024-01-02T03:00:00");
        assert_eq!(t.0 % 3600, 0);
        assert!(parse_time("yesterday").is_none());
    }
}
