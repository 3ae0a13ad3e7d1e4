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

/// Per-owner delegation buffer: distinct items with their accumulated
/// weight, in first-seen order.
///
/// Buffers are small (a cache line's worth of items by default), so lookups
/// are a linear scan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DelegationBuffer {
    entries: Vec<(u64, u32)>,
    weight: u64,
}

impl DelegationBuffer {
    pub fn with_capacity(capacity: usize) -> Self {
        DelegationBuffer {
            entries: Vec::with_capacity(capacity),
            weight: 0,
        }
    }

    /// Adds up to `max_w - current` of `weight` for `item` and returns how
    /// much was taken together with the item's new accumulated weight.
    pub fn add(&mut self, item: u64, weight: u32, max_w: u32) -> (u32, u32) {
        let pos = match self.entries.iter().position(|e| e.0 == item) {
            Some(pos) => pos,
            None => {
                self.entries.push((item, 0));
                self.entries.len() - 1
            }
        };
        let entry = &mut self.entries[pos];
        let taken = weight.min(max_w.saturating_sub(entry.1));
        entry.1 += taken;
        self.weight += taken as u64;
        (taken, entry.1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total weight held.
    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn weight_of(&self, item: u64) -> u32 {
        self.entries
            .iter()
            .find(|e| e.0 == item)
            .map_or(0, |e| e.1)
    }

    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(u64, u32)> {
        self.entries
    }
}
