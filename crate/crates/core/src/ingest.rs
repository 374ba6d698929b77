//! Temperature-logger CSV exports.
//!
//! One file holds one tag's readings:
//!
//! ```text
//! tag_id,timestamp,temperature_c
//! TAG-001,2024-03-01T08:00:00Z,4.50
//! ```
//!
//! Timestamps are RFC 3339 in UTC and must be strictly increasing;
//! temperatures must lie in [-60, 80] °C. Any offending row fails the whole
//! file, with its line number in the error.

use std::path::Path;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinetics::TemperatureProfile;
use crate::scenarios::substream;

pub const HEADER: [&str; 3] = ["tag_id", "timestamp", "temperature_c"];
pub const TEMPERATURE_BAND: (f64, f64) = (-60.0, 80.0);

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("format error on line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("data error on line {line}: {message}")]
    Data { line: u64, message: String },
    #[error("{0}")]
    Domain(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    pub timestamp: DateTime<Utc>,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorLog {
    pub tag_id: String,
    pub records: Vec<SensorRecord>,
    pub source_file: Option<String>,
}

fn parse_timestamp(text: &str, line: u64) -> Result<DateTime<Utc>, IngestError> {
    let parsed = DateTime::parse_from_rfc3339(text).map_err(|e| IngestError::Format {
        line,
        message: format!("bad timestamp '{text}': {e}"),
    })?;
    if parsed.offset().local_minus_utc() != 0 {
        return Err(IngestError::Format {
            line,
            message: format!("timestamp '{text}' is not UTC"),
        });
    }
    Ok(parsed.with_timezone(&Utc))
}

/// Parses one logger export.
pub fn parse_sensor_csv(content: &str) -> Result<SensorLog, IngestError> {
    if content.trim().is_empty() {
        return Err(IngestError::Format {
            line: 1,
            message: "file is empty".into(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(content.as_bytes());
    let header = reader.headers().map_err(|e| IngestError::Format {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(IngestError::Format {
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut tag: Option<String> = None;
    let mut records: Vec<SensorRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| IngestError::Format {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(IngestError::Format {
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let row_tag = &row[0];
        if row_tag.is_empty() {
            return Err(IngestError::Format {
                line,
                message: "empty tag_id".into(),
            });
        }
        match &tag {
            None => tag = Some(row_tag.to_string()),
            Some(t) if t != row_tag => {
                return Err(IngestError::Data {
                    line,
                    message: format!("tag '{row_tag}' differs from '{t}'; one tag per file"),
                })
            }
            Some(_) => {}
        }
        let timestamp = parse_timestamp(&row[1], line)?;
        let temperature: f64 = row[2].parse().map_err(|_| IngestError::Format {
            line,
            message: format!("bad temperature '{}'", &row[2]),
        })?;
        if !(TEMPERATURE_BAND.0..=TEMPERATURE_BAND.1).contains(&temperature) {
            return Err(IngestError::Data {
                line,
                message: format!(
                    "temperature {temperature} outside [{}, {}]",
                    TEMPERATURE_BAND.0, TEMPERATURE_BAND.1
                ),
            });
        }
        if let Some(prev) = records.last() {
            if timestamp <= prev.timestamp {
                return Err(IngestError::Data {
                    line,
                    message: format!("timestamp {} does not increase", &row[1]),
                });
            }
        }
        records.push(SensorRecord {
            timestamp,
            temperature,
        });
    }
    let tag_id = tag.ok_or_else(|| IngestError::Data {
        line: 2,
        message: "no records".into(),
    })?;
    Ok(SensorLog {
        tag_id,
        records,
        source_file: None,
    })
}

pub fn read_sensor_csv(path: &Path) -> Result<SensorLog, IngestError> {
    let content = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut log = parse_sensor_csv(&content)?;
    log.source_file = Some(path.display().to_string());
    Ok(log)
}

/// Canonical form: LF line endings, whole-second UTC timestamps with a `Z`
/// suffix (sub-second parts kept when present), two-decimal temperatures.
pub fn emit_sensor_csv(log: &SensorLog) -> String {
    let mut out = String::with_capacity(32 * (log.records.len() + 1));
    out.push_str(&HEADER.join(","));
    out.push('\n');
    for r in &log.records {
        out.push_str(&format!(
            "{},{},{:.2}\n",
            log.tag_id,
            r.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            r.temperature
        ));
    }
    out
}

/// A synthetic trace: readings every `interval_minutes`, hovering around
/// `mean` with standard deviation `std`, rounded to two decimals and kept
/// inside the sanity band.
pub fn synthetic_log(
    tag_id: &str,
    start: DateTime<Utc>,
    count: usize,
    interval_minutes: i64,
    mean: f64,
    std: f64,
    seed: u64,
) -> SensorLog {
    let mut rng = substream(seed, &[0x5E75]);
    let records = (0..count)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            let t = (mean + std * z).clamp(TEMPERATURE_BAND.0, TEMPERATURE_BAND.1);
            SensorRecord {
                timestamp: start + Duration::minutes(interval_minutes * i as i64),
                temperature: (t * 100.0).round() / 100.0 + 0.0,
            }
        })
        .collect();
    SensorLog {
        tag_id: tag_id.into(),
        records,
        source_file: None,
    }
}

/// Hours since `trip_start` paired with the readings.
pub fn log_to_profile(
    log: &SensorLog,
    trip_start: DateTime<Utc>,
) -> Result<TemperatureProfile, IngestError> {
    let first = log
        .records
        .first()
        .ok_or_else(|| IngestError::Domain("sensor log has no records".into()))?;
    if trip_start > first.timestamp {
        return Err(IngestError::Domain(format!(
            "trip start {trip_start} is after the first reading {}",
            first.timestamp
        )));
    }
    let samples = log
        .records
        .iter()
        .map(|r| {
            let dt = r.timestamp - trip_start;
            let secs = dt.num_seconds() as f64 + f64::from(dt.subsec_nanos()) * 1e-9;
            (secs / 3600.0, r.temperature)
        })
        .collect();
    TemperatureProfile::new(samples).map_err(|e| IngestError::Domain(e.to_string()))
}
