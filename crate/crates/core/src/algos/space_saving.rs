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
use crate::heap::IndexedMinHeap;
use crate::SketchError;

/// Nominal cost of one counter: 8-byte item, 8-byte count and 16 bytes of
/// lookup overhead.
pub const SPACE_SAVING_COUNTER_BYTES: usize = 32;

/// Space-Saving with `k` counters and weighted min-replacement.
///
/// An untracked item arriving at a full summary takes over the minimum
/// counter (lowest item on ties) and adds its weight to it, so every
/// tracked count overestimates the true count.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSavingSketch {
    counters: IndexedMinHeap,
    capacity: usize,
    n_processed: u64,
    phi: f64,
}

impl SpaceSavingSketch {
    pub fn with_capacity(capacity: usize, phi: f64) -> Result<Self, SketchError> {
        check_phi(phi)?;
        if capacity == 0 {
            return Err(SketchError::invalid("capacity", "need at least one counter"));
        }
        Ok(SpaceSavingSketch {
            counters: IndexedMinHeap::with_capacity(capacity),
            capacity,
            n_processed: 0,
            phi,
        })
    }

    /// `k = floor(memory_bytes / 32)`.
    pub fn new(memory_bytes: usize, phi: f64) -> Result<Self, SketchError> {
        let capacity = memory_bytes / SPACE_SAVING_COUNTER_BYTES;
        if capacity == 0 {
            return Err(SketchError::BudgetTooSmall {
                budget: memory_bytes,
                minimum: SPACE_SAVING_COUNTER_BYTES,
            });
        }
        Self::with_capacity(capacity, phi)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn tracked(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counters.iter()
    }

    fn is_full(&self) -> bool {
        self.counters.len() >= self.capacity
    }
}

impl HeavyHitterSketch for SpaceSavingSketch {
    fn update(&mut self, item: u64, weight: u32) -> Result<u64, SketchError> {
        if weight == 0 {
            return Err(SketchError::ZeroWeight);
        }
        self.n_processed += weight as u64;
        let weight = weight as u64;
        let count = match self.counters.get(item) {
            Some(c) => {
                self.counters.upsert(item, c + weight);
                c + weight
            }
            None if !self.is_full() => {
                self.counters.upsert(item, weight);
                weight
            }
            None => {
                let (_, min) = self.counters.peek().expect("full summary is non-empty");
                self.counters.replace_min(item, min + weight);
                min + weight
            }
        };
        Ok(count)
    }

    /// Tracked count, or the minimum counter for an untracked item once the
    /// summary is full (an upper bound on its true count).
    fn f_query(&self, item: u64) -> u64 {
        match self.counters.get(item) {
            Some(c) => c,
            None if self.is_full() => self.counters.peek().map_or(0, |(_, c)| c),
            None => 0,
        }
    }

    fn hh_query(&mut self) -> HeavyHitterReport {
        let threshold = self.phi * self.n_processed as f64;
        let entries = self
            .counters
            .iter()
            .filter(|&(_, c)| c as f64 >= threshold)
            .collect();
        HeavyHitterReport::new(entries, self.n_processed)
    }

    fn n_processed(&self) -> u64 {
        self.n_processed
    }

    fn memory_bytes(&self) -> usize {
        self.capacity * SPACE_SAVING_COUNTER_BYTES
    }

    fn phi(&self) -> f64 {
        self.phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newcomer_replaces_minimum() {
        let mut ss = SpaceSavingSketch::with_capacity(2, 0.1).unwrap();
        for item in [1, 2, 3] {
            ss.update(item, 1).unwrap();
        }
        // 1 and 2 tie at 1; the lower item is evicted.
        let mut tracked: Vec<_> = ss.tracked().collect();
        tracked.sort();
        assert_eq!(tracked, vec![(2, 1), (3, 2)]);
    }

    #[test]
    fn tracked_item_is_exact() {
        let mut ss = SpaceSavingSketch::with_capacity(4, 0.1).unwrap();
        ss.update(5, 3).unwrap();
        assert_eq!(ss.update(5, 4).unwrap(), 7);
        assert_eq!(ss.f_query(5), 7);
    }

    #[test]
    fn budget_sets_capacity() {
        assert_eq!(SpaceSavingSketch::new(4096, 0.1).unwrap().capacity(), 128);
        assert!(SpaceSavingSketch::new(31, 0.1).is_err());
    }
}
