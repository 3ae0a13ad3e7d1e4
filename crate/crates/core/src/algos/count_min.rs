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

use super::{check_phi, HeavyHitterReport, HeavyHitterSketch};
use crate::hash::{SeededHash, SALT_ROW};
use crate::heap::IndexedMinHeap;
use crate::SketchError;

pub const COUNT_MIN_DEPTH: usize = 4;

/// Count-Min with a lazily trimmed heap of heavy-hitter candidates.
///
/// Counters are 32 bits and saturate. The heap follows the same policy as
/// [`ChkSketch`](crate::ChkSketch): an item is inserted or refreshed when its
/// estimate reaches `phi * N`, and stale roots are evicted at query time.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMinSketch {
    rows: Vec<SeededHash>,
    width: usize,
    counters: Vec<u32>,
    heap: IndexedMinHeap,
    n_processed: u64,
    phi: f64,
}

impl CountMinSketch {
    pub fn with_dimensions(depth: usize, width: usize, phi: f64, seed: u64) -> Result<Self, SketchError> {
        check_phi(phi)?;
        if depth == 0 || width == 0 {
            return Err(SketchError::invalid("dimensions", "depth and width must be positive"));
        }
        Ok(CountMinSketch {
            rows: (0..depth as u64)
                .map(|r| SeededHash::new(seed, SALT_ROW.wrapping_add(r)))
                .collect(),
            width,
            counters: vec![0; depth * width],
            heap: IndexedMinHeap::new(),
            n_processed: 0,
            phi,
        })
    }

    /// Four rows of `memory_bytes / 16` four-byte counters.
    pub fn new(memory_bytes: usize, phi: f64, seed: u64) -> Result<Self, SketchError> {
        let minimum = COUNT_MIN_DEPTH * 4;
        if memory_bytes < minimum {
            return Err(SketchError::BudgetTooSmall {
                budget: memory_bytes,
                minimum,
            });
        }
        Self::with_dimensions(COUNT_MIN_DEPTH, memory_bytes / minimum, phi, seed)
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    fn cell(&self, row: usize, item: u64) -> usize {
        row * self.width + (self.rows[row].hash(item) % self.width as u64) as usize
    }
}

impl HeavyHitterSketch for CountMinSketch {
    fn update(&mut self, item: u64, weight: u32) -> Result<u64, SketchError> {
        if weight == 0 {
            return Err(SketchError::ZeroWeight);
        }
        self.n_processed += weight as u64;
        let mut estimate = u32::MAX;
        for row in 0..self.rows.len() {
            let cell = self.cell(row, item);
            let c = &mut self.counters[cell];
            *c = c.saturating_add(weight);
            estimate = estimate.min(*c);
        }
        let estimate = estimate as u64;
        if estimate as f64 >= self.phi * self.n_processed as f64 {
            self.heap.upsert(item, estimate);
        }
        Ok(estimate)
    }

    fn f_query(&self, item: u64) -> u64 {
        (0..self.rows.len())
            .map(|row| self.counters[self.cell(row, item)])
            .min()
            .unwrap_or(0) as u64
    }

    fn hh_query(&mut self) -> HeavyHitterReport {
        self.heap.evict_below(self.phi * self.n_processed as f64);
        HeavyHitterReport::new(self.heap.iter().collect(), self.n_processed)
    }

    fn n_processed(&self) -> u64 {
        self.n_processed
    }

    fn memory_bytes(&self) -> usize {
        self.counters.len() * 4
    }

    fn phi(&self) -> f64 {
        self.phi
    }
}
