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

//! Fixed-capacity table of published heavy hitters.
//!
//! Each slot is a `(version, item, count)` triple. Version 0 marks a slot
//! that was never used; a writer makes the version odd, stores the fields
//! and makes it even again. Readers collect the triple twice and accept it
//! only when both versions agree and are even, so a returned pair is always
//! one some writer stored as a whole.
//!
//! Slots are never emptied. A new item takes the first never-used slot or
//! the first slot whose count fell below the caller's threshold on its probe
//! path; a full table of live entries loses its minimum. Every item is
//! written by a single thread (its owner), which remembers where it put it,
//! so lookups never probe.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering::SeqCst};

use crossbeam_utils::Backoff;

use crate::hash::{SeededHash, SALT_INDEX};

#[derive(Debug, Default)]
struct Slot {
    version: AtomicU64,
    item: AtomicU64,
    count: AtomicU64,
}

#[derive(Debug)]
pub struct GlobalHhTable {
    slots: Box<[Slot]>,
    /// Indices (plus one) of slots in the order they were first used.
    order: Box<[AtomicUsize]>,
    used: AtomicUsize,
    hasher: SeededHash,
    replaced: AtomicU64,
    evicted: AtomicU64,
}

impl GlobalHhTable {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "table capacity must be positive");
        GlobalHhTable {
            slots: (0..capacity).map(|_| Slot::default()).collect(),
            order: (0..capacity).map(|_| AtomicUsize::new(0)).collect(),
            used: AtomicUsize::new(0),
            hasher: SeededHash::new(seed, SALT_INDEX.rotate_left(17)),
            replaced: AtomicU64::new(0),
            evicted: AtomicU64::new(0),
        }
    }

    /// Capacity `ceil(4 / phi)`.
    pub fn for_phi(phi: f64, seed: u64) -> Self {
        Self::new((4.0 / phi).ceil() as usize, seed)
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    /// Slots that have held an entry at some point.
    pub fn used(&self) -> usize {
        self.used.load(SeqCst)
    }

    /// Below-threshold entries overwritten by new items.
    pub fn replaced(&self) -> u64 {
        self.replaced.load(SeqCst)
    }

    /// Live entries lost because the table was full.
    pub fn evicted(&self) -> u64 {
        self.evicted.load(SeqCst)
    }

    /// Double-collect read of one slot.
    pub fn read(&self, index: usize) -> Option<(u64, u64)> {
        let slot = &self.slots[index];
        let backoff = Backoff::new();
        loop {
            let v1 = slot.version.load(SeqCst);
            if v1 == 0 {
                return None;
            }
            if v1 & 1 == 0 {
                let item = slot.item.load(SeqCst);
                let count = slot.count.load(SeqCst);
                if slot.version.load(SeqCst) == v1 {
                    return Some((item, count));
                }
            }
            backoff.snooze();
        }
    }

    /// All entries, each read consistently.
    pub fn snapshot(&self) -> Vec<(u64, u64)> {
        let used = self.used.load(SeqCst);
        let mut out = Vec::with_capacity(used);
        for k in 0..used {
            let tagged = self.order[k].load(SeqCst);
            if tagged != 0 {
                out.extend(self.read(tagged - 1));
            }
        }
        out
    }

    fn write(&self, index: usize, version: u64, item: u64, count: u64) -> bool {
        let slot = &self.slots[index];
        if slot
            .version
            .compare_exchange(version, version + 1, SeqCst, SeqCst)
            .is_err()
        {
            return false;
        }
        slot.item.store(item, SeqCst);
        slot.count.store(count, SeqCst);
        slot.version.store(version + 2, SeqCst);
        true
    }

    /// Stores `(item, count)` and returns the slot used.
    ///
    /// `hint` is where the caller last stored `item`; it is only trusted if
    /// that slot still holds `item`. Entries with a count below `threshold`
    /// may be overwritten. The caller must be the only thread publishing
    /// `item`.
    pub fn publish(&self, item: u64, count: u64, threshold: f64, hint: Option<usize>) -> usize {
        if let Some(i) = hint {
            loop {
                let v = self.slots[i].version.load(SeqCst);
                if v & 1 == 1 {
                    std::hint::spin_loop();
                    continue;
                }
                match self.read(i) {
                    Some((e, _)) if e == item => {
                        if self.write(i, v, item, count) {
                            return i;
                        }
                    }
                    _ => break,
                }
            }
        }

        let cap = self.slots.len();
        let start = (self.hasher.hash(item) % cap as u64) as usize;
        loop {
            let mut min: Option<(usize, u64, u64)> = None;
            for k in 0..cap {
                let i = (start + k) % cap;
                let slot = &self.slots[i];
                let v = slot.version.load(SeqCst);
                if v == 0 {
                    if self.write(i, 0, item, count) {
                        let pos = self.used.fetch_add(1, SeqCst);
                        self.order[pos].store(i + 1, SeqCst);
                        return i;
                    }
                    continue;
                }
                if v & 1 == 1 {
                    continue;
                }
                let old = slot.count.load(SeqCst);
                if slot.version.load(SeqCst) != v {
                    continue;
                }
                if (old as f64) < threshold {
                    if self.write(i, v, item, count) {
                        self.replaced.fetch_add(1, SeqCst);
                        return i;
                    }
                    continue;
                }
                if min.is_none_or(|m| old < m.2) {
                    min = Some((i, v, old));
                }
            }
            if let Some((i, v, _)) = min {
                if self.write(i, v, item, count) {
                    self.evicted.fetch_add(1, SeqCst);
                    return i;
                }
            }
        }
    }
}
