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

//! Seeded Zipf streams and the line-based stream file format.
//!
//! A stream file holds one tuple per line, `item` or `item weight`, with the
//! weight defaulting to 1. Blank lines are ignored.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algos::StreamTuple;
use crate::SketchError;

/// Separates the label shuffle from the sampling sequence.
const SAMPLE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfSpec {
    pub universe_size: u64,
    pub skew: f64,
    pub count: usize,
    pub seed: u64,
}

/// `H(U, alpha) = sum_{r=1..U} r^-alpha`.
pub fn harmonic(universe_size: u64, skew: f64) -> f64 {
    // Smallest terms first keeps the sum accurate.
    (1..=universe_size).rev().map(|r| (r as f64).powf(-skew)).sum()
}

/// Inverse-CDF sampler over ranks `1..=U`, with ranks mapped to item ids by a
/// seeded permutation of `1..=U`.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cdf: Vec<f64>,
    items: Vec<u64>,
}

impl ZipfSampler {
    pub fn new(universe_size: u64, skew: f64, seed: u64) -> Result<Self, SketchError> {
        if universe_size == 0 {
            return Err(SketchError::invalid("universe_size", "must be at least 1"));
        }
        if !(skew >= 0.0 && skew.is_finite()) {
            return Err(SketchError::invalid("skew", format!("{skew} is not a finite value >= 0")));
        }
        let h = harmonic(universe_size, skew);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (1..=universe_size)
            .map(|r| {
                acc += (r as f64).powf(-skew) / h;
                acc
            })
            .collect();
        *cdf.last_mut().unwrap() = 1.0;

        let mut items: Vec<u64> = (1..=universe_size).collect();
        items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Ok(ZipfSampler { cdf, items })
    }

    pub fn universe_size(&self) -> u64 {
        self.items.len() as u64
    }

    /// Item id carrying `rank` (1-based).
    pub fn item_of_rank(&self, rank: u64) -> u64 {
        self.items[(rank - 1) as usize]
    }

    pub fn probability(&self, rank: u64) -> f64 {
        let i = (rank - 1) as usize;
        self.cdf[i] - if i == 0 { 0.0 } else { self.cdf[i - 1] }
    }

    pub fn sample_rank<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.cdf.len() - 1) as u64 + 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.item_of_rank(self.sample_rank(rng))
    }
}

/// `count` unit-weight tuples drawn i.i.d. from Zipf(`skew`) over `U` items.
pub fn gen_zipf(spec: &ZipfSpec) -> Result<Vec<StreamTuple>, SketchError> {
    let sampler = ZipfSampler::new(spec.universe_size, spec.skew, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(SAMPLE_STREAM);
    Ok((0..spec.count)
        .map(|_| StreamTuple::unit(sampler.sample(&mut rng)))
        .collect())
}

#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> StreamError {
    StreamError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses one line; `Ok(None)` for a blank line. Line and column numbers in
/// errors are 1-based.
pub fn parse_line(text: &str, line: usize) -> Result<Option<StreamTuple>, StreamError> {
    let base = text.as_ptr() as usize;
    let mut fields = text
        .split_whitespace()
        .map(|f| (f.as_ptr() as usize - base + 1, f));

    let Some((col, item)) = fields.next() else {
        return Ok(None);
    };
    let item: u64 = item
        .parse()
        .map_err(|e| parse_error(line, col, format!("bad item id {item:?}: {e}")))?;
    let weight = match fields.next() {
        None => 1,
        Some((col, w)) => {
            let w: u32 = w
                .parse()
                .map_err(|e| parse_error(line, col, format!("bad weight {w:?}: {e}")))?;
            if w == 0 {
                return Err(parse_error(line, col, "weight must be at least 1"));
            }
            w
        }
    };
    if let Some((col, extra)) = fields.next() {
        return Err(parse_error(line, col, format!("unexpected field {extra:?}")));
    }
    Ok(Some(StreamTuple::new(item, weight)))
}

pub fn parse_stream<R: BufRead>(reader: R) -> Result<Vec<StreamTuple>, StreamError> {
    let mut out = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        if let Some(t) = parse_line(&text?, i + 1)? {
            out.push(t);
        }
    }
    Ok(out)
}

pub fn read_stream(path: impl AsRef<Path>) -> Result<Vec<StreamTuple>, StreamError> {
    parse_stream(BufReader::new(File::open(path)?))
}

pub fn write_stream_to<W: Write>(mut writer: W, stream: &[StreamTuple]) -> io::Result<()> {
    for t in stream {
        if t.weight == 1 {
            writeln!(writer, "{}", t.item)?;
        } else {
            writeln!(writer, "{} {}", t.item, t.weight)?;
        }
    }
    writer.flush()
}

pub fn write_stream(path: impl AsRef<Path>, stream: &[StreamTuple]) -> io::Result<()> {
    write_stream_to(BufWriter::new(File::create(path)?), stream)
}
