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

//! The common sketch interface, an exact oracle and two baselines.

use std::collections::HashMap;

use crate::SketchError;

mod count_min;
mod oracle;
mod space_saving;

pub use count_min::{CountMinSketch, COUNT_MIN_DEPTH};
pub use oracle::ExactOracle;
pub use space_saving::{SpaceSavingSketch, SPACE_SAVING_COUNTER_BYTES};

/// One stream element: an item and its positive weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamTuple {
    pub item: u64,
    pub weight: u32,
}

impl StreamTuple {
    pub fn new(item: u64, weight: u32) -> Self {
        StreamTuple { item, weight }
    }

    pub fn unit(item: u64) -> Self {
        StreamTuple { item, weight: 1 }
    }
}

/// Heavy hitters reported by a sketch together with the stream weight `N`
/// used for thresholding. Entries are sorted by item.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeavyHitterReport {
    entries: Vec<(u64, u64)>,
    n_processed: u64,
}

impl HeavyHitterReport {
    pub fn new(mut entries: Vec<(u64, u64)>, n_processed: u64) -> Self {
        entries.sort_unstable();
        entries.dedup_by_key(|e| e.0);
        HeavyHitterReport {
            entries,
            n_processed,
        }
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn n_processed(&self) -> u64 {
        self.n_processed
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, item: u64) -> Option<u64> {
        self.entries
            .binary_search_by_key(&item, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn contains(&self, item: u64) -> bool {
        self.get(item).is_some()
    }

    pub fn to_map(&self) -> HashMap<u64, u64> {
        self.entries.iter().copied().collect()
    }
}

/// Operations every heavy-hitter sketch in this crate supports.
pub trait HeavyHitterSketch: Send {
    /// Adds `weight` occurrences of `item` and returns the item's estimate
    /// right after the update (0 when the sketch does not track it).
    fn update(&mut self, item: u64, weight: u32) -> Result<u64, SketchError>;

    fn f_query(&self, item: u64) -> u64;

    /// Items whose estimate is at least `phi * n_processed`.
    fn hh_query(&mut self) -> HeavyHitterReport;

    /// Sum of all weights accepted by `update`.
    fn n_processed(&self) -> u64;

    /// Bytes of counting state, excluding any heavy-hitter heap.
    fn memory_bytes(&self) -> usize;

    fn phi(&self) -> f64;
}

impl<S: HeavyHitterSketch + ?Sized> HeavyHitterSketch for Box<S> {
    fn update(&mut self, item: u64, weight: u32) -> Result<u64, SketchError> {
        (**self).update(item, weight)
    }

    fn f_query(&self, item: u64) -> u64 {
        (**self).f_query(item)
    }

    fn hh_query(&mut self) -> HeavyHitterReport {
        (**self).hh_query()
    }

    fn n_processed(&self) -> u64 {
        (**self).n_processed()
    }

    fn memory_bytes(&self) -> usize {
        (**self).memory_bytes()
    }

    fn phi(&self) -> f64 {
        (**self).phi()
    }
}

pub(crate) fn check_phi(phi: f64) -> Result<(), SketchError> {
    if phi > 0.0 && phi < 1.0 {
        Ok(())
    } else {
        Err(SketchError::invalid("phi", format!("{phi} is not in (0, 1)")))
    }
}
