//! Newline-delimited JSON scan logs, one scan per line:
//! `{"t":0.1,"pose":{"x":..,"y":..,"heading":..},"beams":[[bearing,range,hit],..]}`.
//!
//! An optional `max_range` field bounds the ranges of the line; without it
//! the longest range in the line is used.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensor::{Beam, LidarScan, Pose, SensorError};

#[derive(Debug, Error)]
pub enum ScanLogError {
    #[error("scan log: {0}")]
    Io(#[from] io::Error),
    #[error("scan log line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("scan log line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: SensorError,
    },
    #[error("scan log line {line}: non-finite timestamp or pose")]
    NonFinite { line: usize },
    #[error("scan log line {line}: timestamp {t} does not follow {previous}")]
    OutOfOrder { line: usize, t: f64, previous: f64 },
}

impl ScanLogError {
    /// 1-based line of the offending record, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ScanLogError::Io(_) => None,
            ScanLogError::Parse { line, .. }
            | ScanLogError::Invalid { line, .. }
            | ScanLogError::NonFinite { line }
            | ScanLogError::OutOfOrder { line, .. } => Some(*line),
        }
    }
}

/// A timestamped scan and the pose it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub t: f64,
    pub pose: Pose,
    pub scan: LidarScan,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    t: f64,
    pose: Pose,
    beams: Vec<(f64, f64, bool)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_range: Option<f64>,
}

impl ScanRecord {
    fn from_raw(raw: RawRecord, line: usize) -> Result<Self, ScanLogError> {
        let finite = [raw.t, raw.pose.x, raw.pose.y, raw.pose.heading]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ScanLogError::NonFinite { line });
        }
        let beams: Vec<Beam> = raw
            .beams
            .into_iter()
            .map(|(bearing, range, hit)| Beam {
                bearing,
                range,
                hit,
            })
            .collect();
        let max_range = raw.max_range.unwrap_or_else(|| {
            let longest = beams.iter().map(|b| b.range).fold(0.0, f64::max);
            if longest > 0.0 {
                longest
            } else {
                1.0
            }
        });
        let scan = LidarScan::new(beams, max_range)
            .map_err(|source| ScanLogError::Invalid { line, source })?;
        Ok(Self {
            t: raw.t,
            pose: Pose::new(raw.pose.x, raw.pose.y, raw.pose.heading),
            scan,
        })
    }

    fn to_raw(&self) -> RawRecord {
        RawRecord {
            t: self.t,
            pose: self.pose,
            beams: self
                .scan
                .beams
                .iter()
                .map(|b| (b.bearing, b.range, b.hit))
                .collect(),
            max_range: Some(self.scan.max_range),
        }
    }
}

/// Streams records from a log, checking that timestamps strictly increase.
/// Blank lines are skipped.
pub struct ScanLogReader<R> {
    lines: io::Lines<R>,
    line: usize,
    previous: Option<f64>,
}

impl<R: BufRead> ScanLogReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line: 0,
            previous: None,
        }
    }
}

impl<R: BufRead> Iterator for ScanLogReader<R> {
    type Item = Result<ScanRecord, ScanLogError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(text) => text,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let line = self.line;
            let record = serde_json::from_str::<RawRecord>(&text)
                .map_err(|source| ScanLogError::Parse { line, source })
                .and_then(|raw| ScanRecord::from_raw(raw, line))
                .and_then(|rec| match self.previous {
                    Some(previous) if rec.t <= previous => Err(ScanLogError::OutOfOrder {
                        line,
                        t: rec.t,
                        previous,
                    }),
                    _ => Ok(rec),
                });
            if let Ok(rec) = &record {
                self.previous = Some(rec.t);
            }
            return Some(record);
        }
    }
}

pub fn read_scan_log<R: BufRead>(reader: R) -> Result<Vec<ScanRecord>, ScanLogError> {
    ScanLogReader::new(reader).collect()
}

/// Writes one record as a single line.
pub fn write_record<W: Write>(mut w: W, record: &ScanRecord) -> io::Result<()> {
    serde_json::to_writer(&mut w, &record.to_raw())?;
    w.write_all(b"\n")
}
