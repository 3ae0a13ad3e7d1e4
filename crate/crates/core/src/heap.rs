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

//! Indexed binary min-heap of `(item, value)` pairs.
//!
//! Used as the auxiliary heavy-hitter heap of [`crate::ChkSketch`] and
//! [`crate::CountMinSketch`], and as the counter store of
//! [`crate::SpaceSavingSketch`]. Entries are ordered by `(value, item)` so the
//! root is deterministic when values tie.

use std::collections::HashMap;

#[derive(Debug, Clone, Default)]
pub struct IndexedMinHeap {
    entries: Vec<(u64, u64)>,
    positions: HashMap<u64, usize>,
}

impl PartialEq for IndexedMinHeap {
    // positions is derived from entries
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for IndexedMinHeap {}

#[inline]
fn less(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.1, a.0) < (b.1, b.0)
}

impl IndexedMinHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        IndexedMinHeap {
            entries: Vec::with_capacity(capacity),
            positions: HashMap::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, item: u64) -> Option<u64> {
        self.positions.get(&item).map(|&pos| self.entries[pos].1)
    }

    pub fn contains(&self, item: u64) -> bool {
        self.positions.contains_key(&item)
    }

    /// Smallest `(item, value)` pair.
    pub fn peek(&self) -> Option<(u64, u64)> {
        self.entries.first().copied()
    }

    /// Inserts `item` or moves its value to `value`, in either direction.
    pub fn upsert(&mut self, item: u64, value: u64) {
        match self.positions.get(&item) {
            Some(&pos) => {
                let old = self.entries[pos].1;
                self.entries[pos].1 = value;
                if value < old {
                    self.sift_up(pos);
                } else if value > old {
                    self.sift_down(pos);
                }
            }
            None => {
                let pos = self.entries.len();
                self.entries.push((item, value));
                self.positions.insert(item, pos);
                self.sift_up(pos);
            }
        }
    }

    pub fn pop(&mut self) -> Option<(u64, u64)> {
        if self.entries.is_empty() {
            return None;
        }
        let last = self.entries.len() - 1;
        self.swap(0, last);
        let top = self.entries.pop()?;
        self.positions.remove(&top.0);
        if !self.entries.is_empty() {
            self.sift_down(0);
        }
        Some(top)
    }

    /// Replaces the root with a new pair and returns the old root.
    pub fn replace_min(&mut self, item: u64, value: u64) -> Option<(u64, u64)> {
        let old = *self.entries.first()?;
        self.positions.remove(&old.0);
        self.entries[0] = (item, value);
        self.positions.insert(item, 0);
        self.sift_down(0);
        Some(old)
    }

    /// Pops roots while their value is below `threshold`.
    pub fn evict_below(&mut self, threshold: f64) -> usize {
        let mut evicted = 0;
        while let Some((_, value)) = self.peek() {
            if (value as f64) < threshold {
                self.pop();
                evicted += 1;
            } else {
                break;
            }
        }
        evicted
    }

    /// Entries in heap order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().copied()
    }

    fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.entries.swap(a, b);
        self.positions.insert(self.entries[a].0, a);
        self.positions.insert(self.entries[b].0, b);
    }

    fn sift_up(&mut self, mut pos: usize) {
        while pos > 0 {
            let parent = (pos - 1) / 2;
            if less(self.entries[pos], self.entries[parent]) {
                self.swap(pos, parent);
                pos = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut pos: usize) {
        let len = self.entries.len();
        loop {
            let left = 2 * pos + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let mut child = left;
            if right < len && less(self.entries[right], self.entries[left]) {
                child = right;
            }
            if less(self.entries[child], self.entries[pos]) {
                self.swap(pos, child);
                pos = child;
            } else {
                break;
            }
        }
    }
}
