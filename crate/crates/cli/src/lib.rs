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

//! Accuracy and throughput experiments over the sketches in `chk-core`.
//!
//! Each experiment runs `repeats` times; run `i` draws its stream and seeds
//! its sketches with `seed + i`. Results come back as [`CsvRow`]s, one per
//! run and metric.

use std::path::PathBuf;
use std::sync::{Barrier, Mutex};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use chk_core::metrics::{accuracy, CsvRow, CsvSink, LatencySummary};
use chk_core::parallel::{ParallelConfig, ParallelSketch, Variant};
use chk_core::streamgen::{gen_zipf, read_stream, write_stream, ZipfSpec};
use chk_core::{
    memory_to_config, ChkSketch, CountMinSketch, ExactOracle, HeavyHitterSketch, SketchConfig,
    SketchError, SpaceSavingSketch, StreamTuple,
};
use clap::ValueEnum;

/// Error thresholds, as fractions of `N`, for the heavy-part diagnostics.
pub const ERROR_EPSILONS: [f64; 2] = [0.0005, 0.001];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Chk,
    #[value(name = "spacesaving")]
    SpaceSaving,
    #[value(name = "countmin")]
    CountMin,
    Oracle,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Chk => "chk",
            Algo::SpaceSaving => "spacesaving",
            Algo::CountMin => "countmin",
            Algo::Oracle => "oracle",
        }
    }
}

pub fn chk_config(memory_bytes: usize, phi: f64, seed: u64) -> Result<SketchConfig, SketchError> {
    memory_to_config(
        memory_bytes,
        &SketchConfig {
            phi,
            seed,
            ..SketchConfig::default()
        },
    )
}

pub fn build_sketch(
    algo: Algo,
    memory_bytes: usize,
    phi: f64,
    seed: u64,
) -> Result<Box<dyn HeavyHitterSketch>, SketchError> {
    Ok(match algo {
        Algo::Chk => Box::new(ChkSketch::new(chk_config(memory_bytes, phi, seed)?)?),
        Algo::SpaceSaving => Box::new(SpaceSavingSketch::new(memory_bytes, phi)?),
        Algo::CountMin => Box::new(CountMinSketch::new(memory_bytes, phi, seed)?),
        Algo::Oracle => Box::new(ExactOracle::new(phi)?),
    })
}

/// Where tuples come from: a stream file, or a fresh Zipf stream per run.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub skew: f64,
    pub count: usize,
    pub universe: u64,
    pub input: Option<PathBuf>,
}

impl Default for Workload {
    fn default() -> Self {
        Workload {
            skew: 1.2,
            count: 1_000_000,
            universe: 100_000,
            input: None,
        }
    }
}

impl Workload {
    /// Returns a closure producing the stream of each run seed.
    fn source(&self) -> Result<impl Fn(u64) -> Result<Vec<StreamTuple>> + '_> {
        let fixed = match &self.input {
            Some(path) => Some(
                read_stream(path).with_context(|| format!("reading {}", path.display()))?,
            ),
            None => None,
        };
        Ok(move |seed| match &fixed {
            Some(stream) => Ok(stream.clone()),
            None => Ok(gen_zipf(&ZipfSpec {
                universe_size: self.universe,
                skew: self.skew,
                count: self.count,
                seed,
            })?),
        })
    }

    /// Skew column value; NaN marks file input.
    fn skew_column(&self) -> f64 {
        if self.input.is_some() {
            f64::NAN
        } else {
            self.skew
        }
    }
}

/// Identifies one configuration in CSV rows.
#[derive(Debug, Clone)]
struct RowTemplate {
    algo: String,
    variant: String,
    threads: usize,
    phi: f64,
    memory_bytes: usize,
    skew: f64,
    query_rate: f64,
}

impl RowTemplate {
    fn row(&self, run_id: u64, metric: &str, value: f64) -> CsvRow {
        CsvRow {
            run_id,
            algo: self.algo.clone(),
            variant: self.variant.clone(),
            threads: self.threads,
            phi: self.phi,
            memory_bytes: self.memory_bytes,
            skew: self.skew,
            query_rate: self.query_rate,
            metric: metric.to_string(),
            value,
        }
    }
}

pub fn write_rows<W: std::io::Write>(writer: W, rows: &[CsvRow]) -> Result<W> {
    let mut sink = CsvSink::new(writer);
    for row in rows {
        sink.write(row)?;
    }
    sink.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV: {}", e.error()))
}

pub fn csv_bytes(rows: &[CsvRow]) -> Result<Vec<u8>> {
    write_rows(Vec::new(), rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSpec {
    pub skew: f64,
    pub count: usize,
    pub universe: u64,
    pub seed: u64,
    pub output: PathBuf,
}

pub fn run_generate(spec: &GenerateSpec) -> Result<()> {
    let stream = gen_zipf(&ZipfSpec {
        universe_size: spec.universe,
        skew: spec.skew,
        count: spec.count,
        seed: spec.seed,
    })?;
    write_stream(&spec.output, &stream)
        .with_context(|| format!("writing {}", spec.output.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySpec {
    pub algo: Algo,
    pub phi: f64,
    pub memory_bytes: usize,
    pub workload: Workload,
    pub repeats: u64,
    pub seed: u64,
}

/// Precision, recall and ARE against the exact oracle. For CHK the rows
/// also describe the heavy part (items with a nonzero f-query): how many
/// items it holds, how many of them are off by at least `eps * N` for each
/// of [`ERROR_EPSILONS`], and how many true heavy hitters it misses.
pub fn run_accuracy(spec: &AccuracySpec) -> Result<Vec<CsvRow>> {
    let template = RowTemplate {
        algo: spec.algo.name().into(),
        variant: "-".into(),
        threads: 1,
        phi: spec.phi,
        memory_bytes: spec.memory_bytes,
        skew: spec.workload.skew_column(),
        query_rate: 0.0,
    };
    let source = spec.workload.source()?;
    let mut rows = Vec::new();
    for run in 0..spec.repeats {
        let seed = spec.seed + run;
        let stream = source(seed)?;
        let mut sketch = build_sketch(spec.algo, spec.memory_bytes, spec.phi, seed)?;
        let mut oracle = ExactOracle::new(spec.phi)?;
        for t in &stream {
            sketch.update(t.item, t.weight)?;
            oracle.update(t.item, t.weight)?;
        }
        let truth = oracle.hh_query();
        let reported = sketch.hh_query();
        let acc = accuracy(truth.entries().iter().copied(), reported.entries().iter().copied());
        rows.push(template.row(run, "precision", acc.precision));
        rows.push(template.row(run, "recall", acc.recall));
        rows.push(template.row(run, "are", acc.are));
        rows.push(template.row(run, "true_hh", acc.true_hh_count as f64));
        rows.push(template.row(run, "reported_hh", acc.reported_hh_count as f64));

        if spec.algo == Algo::Chk {
            let n = oracle.n_processed() as f64;
            let mut heavy = 0u64;
            let mut off = [0u64; ERROR_EPSILONS.len()];
            let mut items: Vec<(u64, u64)> = oracle.counts().iter().map(|(&e, &f)| (e, f)).collect();
            items.sort_unstable();
            for &(e, f) in &items {
                let est = sketch.f_query(e);
                if est == 0 {
                    continue;
                }
                heavy += 1;
                for (k, eps) in ERROR_EPSILONS.iter().enumerate() {
                    if est.abs_diff(f) as f64 >= eps * n {
                        off[k] += 1;
                    }
                }
            }
            let missed = truth.entries().iter().filter(|&&(e, _)| sketch.f_query(e) == 0).count();
            let buckets = chk_config(spec.memory_bytes, spec.phi, seed)?.buckets_per_table;
            rows.push(template.row(run, "buckets_per_table", buckets as f64));
            rows.push(template.row(run, "heavy_items", heavy as f64));
            for (k, eps) in ERROR_EPSILONS.iter().enumerate() {
                rows.push(template.row(run, &format!("heavy_err_ge_{eps}N"), off[k] as f64));
            }
            rows.push(template.row(run, "hh_not_in_heavy", missed as f64));
        }
    }
    Ok(rows)
}

/// Every k-th operation is an hh-query, `k = round(1 / rate)`; `None` for a
/// zero rate.
pub fn query_interval(rate: f64) -> Result<Option<usize>> {
    if !(0.0..1.0).contains(&rate) {
        bail!("query rate {rate} must be in [0, 1)");
    }
    if rate == 0.0 {
        return Ok(None);
    }
    let k = (1.0 / rate).round() as usize;
    if k < 2 {
        bail!("query rate {rate} leaves no room for updates");
    }
    Ok(Some(k))
}

/// Operation schedule of one thread: its tuples, with an hh-query before the
/// tuple whenever the running operation count hits a multiple of `k`.
struct Schedule {
    every: Option<usize>,
    ops: usize,
}

impl Schedule {
    fn new(every: Option<usize>) -> Self {
        Schedule { every, ops: 0 }
    }

    /// Advances past one tuple; returns whether a query precedes it.
    fn next(&mut self) -> bool {
        let query = matches!(self.every, Some(k) if (self.ops + 1).is_multiple_of(k));
        self.ops += 1 + query as usize;
        query
    }
}

fn warmup_len(len: usize, fraction: f64) -> usize {
    ((len as f64 * fraction).ceil() as usize).min(len)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeqBenchSpec {
    pub algo: Algo,
    pub phi: f64,
    pub memory_bytes: usize,
    pub workload: Workload,
    pub repeats: u64,
    pub seed: u64,
    pub query_rate: f64,
    /// Leading fraction of each run left out of the timing.
    pub warmup: f64,
}

/// Sequential throughput (operations per second) and hh-query latency.
pub fn run_bench_seq(spec: &SeqBenchSpec) -> Result<Vec<CsvRow>> {
    let every = query_interval(spec.query_rate)?;
    let template = RowTemplate {
        algo: spec.algo.name().into(),
        variant: "-".into(),
        threads: 1,
        phi: spec.phi,
        memory_bytes: spec.memory_bytes,
        skew: spec.workload.skew_column(),
        query_rate: spec.query_rate,
    };
    let source = spec.workload.source()?;
    let mut rows = Vec::new();
    for run in 0..spec.repeats {
        let seed = spec.seed + run;
        let stream = source(seed)?;
        let mut sketch = build_sketch(spec.algo, spec.memory_bytes, spec.phi, seed)?;
        let (warm, timed) = stream.split_at(warmup_len(stream.len(), spec.warmup));
        for t in warm {
            sketch.update(t.item, t.weight)?;
        }
        let mut schedule = Schedule::new(every);
        let mut latencies = Vec::new();
        let start = Instant::now();
        for t in timed {
            if schedule.next() {
                let q = Instant::now();
                std::hint::black_box(sketch.hh_query());
                latencies.push(q.elapsed());
            }
            sketch.update(t.item, t.weight)?;
        }
        let elapsed = start.elapsed();
        push_perf_rows(&mut rows, &template, run, schedule.ops, elapsed, &latencies);
    }
    Ok(rows)
}

fn push_perf_rows(
    rows: &mut Vec<CsvRow>,
    template: &RowTemplate,
    run: u64,
    ops: usize,
    elapsed: Duration,
    latencies: &[Duration],
) {
    let secs = elapsed.as_secs_f64();
    rows.push(template.row(run, "throughput_ops", if secs > 0.0 { ops as f64 / secs } else { 0.0 }));
    if !latencies.is_empty() {
        let summary = LatencySummary::from_samples(latencies);
        rows.push(template.row(run, "hh_queries", summary.samples as f64));
        rows.push(template.row(run, "hh_latency_mean_us", summary.mean_us));
        rows.push(template.row(run, "hh_latency_p99_us", summary.p99_us));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParBenchSpec {
    pub algo: Algo,
    pub variant: Variant,
    pub threads: usize,
    pub phi: f64,
    /// Per-thread budget.
    pub memory_bytes: usize,
    pub workload: Workload,
    pub repeats: u64,
    pub seed: u64,
    pub query_rate: f64,
    pub warmup: f64,
    pub max_buf: usize,
    pub max_w: u32,
}

/// One timed parallel run.
#[derive(Debug, Clone, Default)]
pub struct ParRun {
    pub ops: usize,
    pub elapsed: Duration,
    pub latencies: Vec<Duration>,
    pub n_processed: u64,
}

/// Runs the parallel wrapper once over `stream`, split round-robin across
/// the workers.
pub fn par_run(spec: &ParBenchSpec, stream: &[StreamTuple], seed: u64) -> Result<ParRun> {
    let every = query_interval(spec.query_rate)?;
    let config = ParallelConfig {
        threads: spec.threads,
        max_buf: spec.max_buf,
        max_w: spec.max_w,
        variant: spec.variant,
        per_thread_memory_bytes: spec.memory_bytes,
        phi: spec.phi,
        seed,
    };
    let (algo, memory, phi) = (spec.algo, spec.memory_bytes, spec.phi);
    let (wrapper, handles) = ParallelSketch::new(config, |tid, c| build_sketch(algo, memory, phi, c.seed + tid as u64))?;

    let p = spec.threads;
    let barrier = Barrier::new(p);
    let results = Mutex::new(Vec::with_capacity(p));
    std::thread::scope(|scope| {
        for mut h in handles {
            let (barrier, results) = (&barrier, &results);
            scope.spawn(move || {
                let mine: Vec<StreamTuple> = stream.iter().skip(h.tid()).step_by(p).copied().collect();
                let (warm, timed) = mine.split_at(warmup_len(mine.len(), spec.warmup));
                for t in warm {
                    h.update(t.item, t.weight).expect("positive weight");
                }
                h.drain();
                barrier.wait();
                let mut schedule = Schedule::new(every);
                let mut latencies = Vec::new();
                let start = Instant::now();
                for t in timed {
                    if schedule.next() {
                        let q = Instant::now();
                        std::hint::black_box(h.hh_query());
                        latencies.push(q.elapsed());
                    }
                    h.update(t.item, t.weight).expect("positive weight");
                }
                h.drain();
                let end = Instant::now();
                results.lock().unwrap().push((start, end, schedule.ops, latencies));
            });
        }
    });
    let results = results.into_inner().unwrap();
    let start = results.iter().map(|r| r.0).min().expect("at least one thread");
    let end = results.iter().map(|r| r.1).max().expect("at least one thread");
    Ok(ParRun {
        ops: results.iter().map(|r| r.2).sum(),
        elapsed: end - start,
        latencies: results.into_iter().flat_map(|r| r.3).collect(),
        n_processed: wrapper.n_processed(),
    })
}

/// Parallel throughput and hh-query latency.
pub fn run_bench_par(spec: &ParBenchSpec) -> Result<Vec<CsvRow>> {
    let template = RowTemplate {
        algo: spec.algo.name().into(),
        variant: spec.variant.suffix().into(),
        threads: spec.threads,
        phi: spec.phi,
        memory_bytes: spec.memory_bytes,
        skew: spec.workload.skew_column(),
        query_rate: spec.query_rate,
    };
    let source = spec.workload.source()?;
    let mut rows = Vec::new();
    for run in 0..spec.repeats {
        let seed = spec.seed + run;
        let stream = source(seed)?;
        let r = par_run(spec, &stream, seed)?;
        let total: u64 = stream.iter().map(|t| t.weight as u64).sum();
        if r.n_processed != total {
            bail!("run {run}: processed {} of {total} weight", r.n_processed);
        }
        push_perf_rows(&mut rows, &template, run, r.ops, r.elapsed, &r.latencies);
    }
    Ok(rows)
}

/// Mean of `metric` over the rows that carry it.
pub fn mean_metric(rows: &[CsvRow], metric: &str) -> Option<f64> {
    let values: Vec<f64> = rows.iter().filter(|r| r.metric == metric).map(|r| r.value).collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn metric_values(rows: &[CsvRow], metric: &str) -> Vec<f64> {
    rows.iter().filter(|r| r.metric == metric).map(|r| r.value).collect()
}
