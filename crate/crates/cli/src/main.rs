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

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use chk_cli::{
    run_accuracy, run_bench_par, run_bench_seq, run_generate, write_rows, AccuracySpec, Algo,
    GenerateSpec, ParBenchSpec, SeqBenchSpec, Workload,
};
use chk_core::metrics::CsvRow;
use chk_core::parallel::Variant;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chk", version, about = "Heavy-hitter sketch experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded Zipf stream file.
    Generate {
        #[arg(long, default_value_t = 1.2)]
        skew: f64,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = 100_000)]
        universe: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Precision, recall and ARE against the exact oracle.
    Accuracy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0005)]
        phi: f64,
        #[arg(long, default_value_t = 4096)]
        memory_bytes: usize,
    },
    /// Sequential throughput and hh-query latency.
    BenchSeq {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        #[arg(long, default_value_t = 0.0005)]
        phi: f64,
        #[arg(long, default_value_t = 4096)]
        memory_bytes: usize,
    },
    /// Parallel throughput and hh-query latency.
    BenchPar {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        #[arg(long, value_enum, default_value_t = VariantArg::I)]
        variant: VariantArg,
        /// Worker threads; HH_THREADS takes precedence. Defaults to the core count.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 0.00005)]
        phi: f64,
        /// Budget of each worker's sketch.
        #[arg(long, default_value_t = 1024)]
        memory_bytes: usize,
        #[arg(long, default_value_t = 16)]
        max_buf: usize,
        #[arg(long, default_value_t = 1000)]
        max_w: u32,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = Algo::Chk)]
    algo: Algo,
    #[arg(long, default_value_t = 1.2, conflicts_with = "input")]
    skew: f64,
    #[arg(long, default_value_t = 1_000_000, conflicts_with = "input")]
    count: usize,
    #[arg(long, default_value_t = 100_000, conflicts_with = "input")]
    universe: u64,
    #[arg(long, default_value_t = 30)]
    repeats: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream file to replay instead of a synthetic stream.
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl Common {
    fn workload(&self) -> Workload {
        Workload {
            skew: self.skew,
            count: self.count,
            universe: self.universe,
            input: self.input.clone(),
        }
    }
}

#[derive(Args)]
struct Timing {
    /// Fraction of operations that are hh-queries.
    #[arg(long, default_value_t = 0.0)]
    query_rate: f64,
    /// Leading fraction of each run excluded from timing.
    #[arg(long, default_value_t = 0.01)]
    warmup: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    I,
    Q,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::I => Variant::InsertionOptimized,
            VariantArg::Q => Variant::QueryOptimized,
        }
    }
}

fn threads(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var("HH_THREADS") {
        return v.trim().parse().with_context(|| format!("HH_THREADS={v:?} is not a thread count"));
    }
    Ok(match flag {
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    })
}

fn emit(output: Option<&PathBuf>, rows: &[CsvRow]) -> Result<()> {
    match output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_rows(BufWriter::new(file), rows)?.flush()?;
        }
        None => {
            write_rows(io::stdout().lock(), rows)?.flush()?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { skew, count, universe, seed, output } => {
            run_generate(&GenerateSpec { skew, count, universe, seed, output })
        }
        Command::Accuracy { common, phi, memory_bytes } => {
            let rows = run_accuracy(&AccuracySpec {
                algo: common.algo,
                phi,
                memory_bytes,
                workload: common.workload(),
                repeats: common.repeats,
                seed: common.seed,
            })?;
            emit(common.output.as_ref(), &rows)
        }
        Command::BenchSeq { common, timing, phi, memory_bytes } => {
            let rows = run_bench_seq(&SeqBenchSpec {
                algo: common.algo,
                phi,
                memory_bytes,
                workload: common.workload(),
                repeats: common.repeats,
                seed: common.seed,
                query_rate: timing.query_rate,
                warmup: timing.warmup,
            })?;
            emit(common.output.as_ref(), &rows)
        }
        Command::BenchPar { common, timing, variant, threads: t, phi, memory_bytes, max_buf, max_w } => {
            let rows = run_bench_par(&ParBenchSpec {
                algo: common.algo,
                variant: variant.into(),
                threads: threads(t)?,
                phi,
                memory_bytes,
                workload: common.workload(),
                repeats: common.repeats,
                seed: common.seed,
                query_rate: timing.query_rate,
                warmup: timing.warmup,
                max_buf,
                max_w,
            })?;
            emit(common.output.as_ref(), &rows)
        }
    }
}
