//  Copyright 2026 The chk Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

//! Accuracy and performance metrics, relative improvement and CSV output.

use std::collections::HashMap;
use std::io::Write;
use std::time::Duration;

use serde::Serialize;

/// Precision, recall and average relative error of a reported heavy-hitter
/// set against the true one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyResult {
    pub precision: f64,
    pub recall: f64,
    pub are: f64,
    pub true_hh_count: usize,
    pub reported_hh_count: usize,
    /// Set when the true set is empty and ARE is reported as 0.
    pub degenerate: bool,
}

/// Compares `reported` (R̂) against `truth` (R), both as sets of
/// `(item, count)` pairs; repeated items keep their last count.
///
/// Precision is 1 when both sets are empty and 0 when only R̂ is. Recall is
/// 1 when R is empty. ARE averages `|f - f̂| / f` over R, with `f̂ = 0` for
/// items missing from R̂.
pub fn accuracy<T, R>(truth: T, reported: R) -> AccuracyResult
where
    T: IntoIterator<Item = (u64, u64)>,
    R: IntoIterator<Item = (u64, u64)>,
{
    let truth: HashMap<u64, u64> = truth.into_iter().collect();
    let reported: HashMap<u64, u64> = reported.into_iter().collect();
    let hits = reported.keys().filter(|e| truth.contains_key(e)).count();

    let precision = match (reported.is_empty(), truth.is_empty()) {
        (true, true) => 1.0,
        (true, false) => 0.0,
        _ => hits as f64 / reported.len() as f64,
    };
    let recall = if truth.is_empty() {
        1.0
    } else {
        hits as f64 / truth.len() as f64
    };
    let are = if truth.is_empty() {
        0.0
    } else {
        let mut errors: Vec<f64> = truth
            .iter()
            .map(|(e, &f)| {
                let est = reported.get(e).copied().unwrap_or(0);
                f.abs_diff(est) as f64 / f as f64
            })
            .collect();
        // Fixed summation order keeps the result independent of hashing.
        errors.sort_by(f64::total_cmp);
        errors.iter().sum::<f64>() / truth.len() as f64
    };
    AccuracyResult {
        precision,
        recall,
        are,
        true_hh_count: truth.len(),
        reported_hh_count: reported.len(),
        degenerate: truth.is_empty(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// Point-wise improvement of each algorithm over the worst one.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementTable {
    /// Per algorithm, one ratio per configuration point; `None` where the
    /// point was excluded.
    pub ratios: Vec<(String, Vec<Option<f64>>)>,
    /// Points whose normalization was undefined (a zero value).
    pub excluded: Vec<usize>,
    /// Algorithms by decreasing mean ratio over the included points.
    pub ranking: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("need at least two series, got {0}")]
    TooFewSeries(usize),
    #[error("series {name:?} has {got} points, expected {expected}")]
    Misaligned {
        name: String,
        got: usize,
        expected: usize,
    },
}

/// Normalizes every series against the worst value at each point.
///
/// With [`Direction::HigherIsBetter`] the ratio is `value / worst`; with
/// [`Direction::LowerIsBetter`] it is `worst / value`, so in both cases the
/// worst algorithm scores 1 and better ones score above 1. A point where the
/// division would be by zero is excluded for every algorithm.
pub fn relative_improvement(
    series: &[(String, Vec<f64>)],
    direction: Direction,
) -> Result<ImprovementTable, MetricsError> {
    if series.len() < 2 {
        return Err(MetricsError::TooFewSeries(series.len()));
    }
    let points = series[0].1.len();
    if let Some((name, values)) = series.iter().find(|(_, v)| v.len() != points) {
        return Err(MetricsError::Misaligned {
            name: name.clone(),
            got: values.len(),
            expected: points,
        });
    }

    let mut ratios: Vec<(String, Vec<Option<f64>>)> = series
        .iter()
        .map(|(name, _)| (name.clone(), Vec::with_capacity(points)))
        .collect();
    let mut excluded = Vec::new();
    for p in 0..points {
        let values: Vec<f64> = series.iter().map(|(_, v)| v[p]).collect();
        let worst = match direction {
            Direction::HigherIsBetter => values.iter().copied().fold(f64::INFINITY, f64::min),
            Direction::LowerIsBetter => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        let divisor_zero = match direction {
            Direction::HigherIsBetter => worst == 0.0,
            Direction::LowerIsBetter => values.contains(&0.0),
        };
        if divisor_zero {
            excluded.push(p);
            ratios.iter_mut().for_each(|(_, r)| r.push(None));
            continue;
        }
        for ((_, r), v) in ratios.iter_mut().zip(values) {
            r.push(Some(match direction {
                Direction::HigherIsBetter => v / worst,
                Direction::LowerIsBetter => worst / v,
            }));
        }
    }

    let mut ranking: Vec<(String, f64)> = ratios
        .iter()
        .map(|(name, r)| {
            let included: Vec<f64> = r.iter().flatten().copied().collect();
            let mean = if included.is_empty() {
                f64::NAN
            } else {
                included.iter().sum::<f64>() / included.len() as f64
            };
            (name.clone(), mean)
        })
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ImprovementTable {
        ratios,
        excluded,
        ranking,
    })
}

/// Mean and 99th percentile (nearest rank) of per-call latencies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LatencySummary {
    pub mean_us: f64,
    pub p99_us: f64,
    pub samples: usize,
}

impl LatencySummary {
    pub fn from_samples(samples: &[Duration]) -> Self {
        if samples.is_empty() {
            return LatencySummary::default();
        }
        let mut us: Vec<f64> = samples.iter().map(|d| d.as_secs_f64() * 1e6).collect();
        us.sort_by(f64::total_cmp);
        let rank = (0.99 * us.len() as f64).ceil() as usize;
        LatencySummary {
            mean_us: us.iter().sum::<f64>() / us.len() as f64,
            p99_us: us[rank.max(1) - 1],
            samples: us.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerfResult {
    pub throughput_ops_per_sec: f64,
    pub hh_query_latency: LatencySummary,
    pub runs: usize,
}

impl PerfResult {
    pub fn new(ops: u64, elapsed: Duration, latencies: &[Duration], runs: usize) -> Self {
        let secs = elapsed.as_secs_f64();
        PerfResult {
            throughput_ops_per_sec: if secs > 0.0 { ops as f64 / secs } else { 0.0 },
            hh_query_latency: LatencySummary::from_samples(latencies),
            runs,
        }
    }
}

/// One row of benchmark output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub run_id: u64,
    pub algo: String,
    pub variant: String,
    pub threads: usize,
    pub phi: f64,
    pub memory_bytes: usize,
    pub skew: f64,
    pub query_rate: f64,
    pub metric: String,
    pub value: f64,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "run_id",
    "algo",
    "variant",
    "threads",
    "phi",
    "memory_bytes",
    "skew",
    "query_rate",
    "metric",
    "value",
];

/// Writes [`CsvRow`]s with a header line.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(writer: W) -> Self {
        CsvSink {
            writer: csv::Writer::from_writer(writer),
        }
    }

    pub fn write(&mut self, row: &CsvRow) -> csv::Result<()> {
        self.writer.serialize(row)
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.writer.flush()
    }

    pub fn into_inner(self) -> Result<W, csv::IntoInnerError<csv::Writer<W>>> {
        self.writer.into_inner()
    }
}

/// Writes an improvement table as `metric,x,algo,ratio` rows, skipping
/// excluded points.
pub fn write_improvement_csv<W: Write>(
    writer: W,
    metric: &str,
    xs: &[f64],
    table: &ImprovementTable,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "x", "algo", "ratio"])?;
    for (algo, ratios) in &table.ratios {
        for (x, r) in xs.iter().zip(ratios) {
            if let Some(r) = r {
                w.write_record([metric, &x.to_string(), algo, &r.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
