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

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use super::bucket::{Bucket, HeavyEntry, LobbyEntry};
use super::config::SketchConfig;
use super::decay::{DecayOutcome, DecayTable};
use crate::algos::{HeavyHitterReport, HeavyHitterSketch};
use crate::hash::{SeededHash, SALT_ALTERNATE, SALT_FINGERPRINT, SALT_INDEX};
use crate::heap::IndexedMinHeap;
use crate::SketchError;

/// Fingerprint and bucket index derivation (partial-key cuckoo hashing).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hashing {
    index: SeededHash,
    fingerprint: SeededHash,
    alternate: SeededHash,
    mask: usize,
    fingerprint_bits: u8,
}

impl Hashing {
    pub fn new(config: &SketchConfig) -> Self {
        debug_assert!(config.buckets_per_table.is_power_of_two());
        Hashing {
            index: SeededHash::new(config.seed, SALT_INDEX),
            fingerprint: SeededHash::new(config.seed, SALT_FINGERPRINT),
            alternate: SeededHash::new(config.seed, SALT_ALTERNATE),
            mask: config.buckets_per_table - 1,
            fingerprint_bits: config.fingerprint_bits,
        }
    }

    /// Returns `(fingerprint, idx0, idx1)` for an item.
    ///
    /// The fingerprint comes from the top bits of its own hash and never
    /// equals the empty sentinel; `idx1 = idx0 ^ alt(fingerprint)`.
    #[inline]
    pub fn locate(&self, item: u64) -> (u16, usize, usize) {
        let raw = (self.fingerprint.hash(item) >> (64 - self.fingerprint_bits as u32)) as u16;
        let fingerprint = if raw == 0 { 1 } else { raw };
        let idx0 = self.index.hash(item) as usize & self.mask;
        (fingerprint, idx0, self.alternate(idx0, fingerprint))
    }

    /// The other candidate index of a fingerprint stored at `index`. Applying
    /// it twice returns `index`.
    #[inline]
    pub fn alternate(&self, index: usize, fingerprint: u16) -> usize {
        (index ^ self.alternate.hash(fingerprint as u64) as usize) & self.mask
    }
}

/// What [`ChkSketch`] did with a promotion candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromotionOutcome {
    MovedToEmpty,
    /// Replaced the bucket's minimum heavy entry, which then went through
    /// kickout.
    Replaced,
    /// Stayed in the lobby with its counter reset to `L`.
    Failed,
}

/// Event counters, mostly for tests and benchmarks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChkStats {
    pub early_placements: u64,
    pub promotions: u64,
    pub failed_promotions: u64,
    pub kick_swaps: u64,
    pub kick_placed: u64,
    pub kick_dropped_below_threshold: u64,
    pub kick_dropped_exhausted: u64,
}

/// Cuckoo Heavy Keeper.
///
/// Items first occupy a bucket's lobby entry, where collisions decay the
/// occupant's counter with probability `b^-C`. Once a lobby counter reaches
/// `L` the item is promoted into the heavy part of the same bucket, displacing
/// the smallest heavy entry with probability `(C - L) / (C_min - L)` when the
/// bucket is full. Displaced heavy entries hop between their two candidate
/// buckets until they find room, fall below `phi * N`, or run out of kicks.
#[derive(Debug, Clone, PartialEq)]
pub struct ChkSketch {
    config: SketchConfig,
    hashing: Hashing,
    tables: [Vec<Bucket>; 2],
    decay: DecayTable,
    n_processed: u64,
    rng: SmallRng,
    heap: IndexedMinHeap,
    stats: ChkStats,
}

impl ChkSketch {
    pub fn new(config: SketchConfig) -> Result<Self, SketchError> {
        config.validate()?;
        let buckets = config.buckets_per_table;
        Ok(ChkSketch {
            hashing: Hashing::new(&config),
            tables: [vec![Bucket::default(); buckets], vec![Bucket::default(); buckets]],
            decay: DecayTable::new(config.lobby_threshold, config.decay_base),
            n_processed: 0,
            rng: SmallRng::seed_from_u64(config.seed),
            heap: IndexedMinHeap::new(),
            stats: ChkStats::default(),
            config,
        })
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn hashing(&self) -> &Hashing {
        &self.hashing
    }

    pub fn decay_table(&self) -> &DecayTable {
        &self.decay
    }

    pub fn stats(&self) -> &ChkStats {
        &self.stats
    }

    pub fn bucket(&self, table: usize, index: usize) -> &Bucket {
        &self.tables[table][index]
    }

    pub fn buckets(&self, table: usize) -> &[Bucket] {
        &self.tables[table]
    }

    /// Items currently in the auxiliary heap, with their last estimates.
    pub fn heap_entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.heap.iter()
    }

    /// `(fingerprint, idx0, idx1)` of an item under this sketch's hashing.
    pub fn generate_fp_and_indexes(&self, item: u64) -> (u16, usize, usize) {
        self.hashing.locate(item)
    }

    /// Lobby counter of the item, if a lobby entry with its fingerprint exists.
    pub fn lobby_counter(&self, item: u64) -> Option<u8> {
        let (fp, idx0, idx1) = self.hashing.locate(item);
        [(0, idx0), (1, idx1)].into_iter().find_map(|(t, i)| {
            let lobby = self.tables[t][i].lobby;
            (lobby.fingerprint == fp).then_some(lobby.counter)
        })
    }

    fn heavy_threshold(&self) -> f64 {
        self.config.phi * self.n_processed as f64
    }

    /// Processes `(item, weight)` and returns the item's current estimate:
    /// its heavy counter, its lobby counter, or 0 when it is not tracked.
    pub fn update(&mut self, item: u64, weight: u32) -> Result<u64, SketchError> {
        if weight == 0 {
            return Err(SketchError::ZeroWeight);
        }
        self.n_processed += weight as u64;
        let (fp, idx0, idx1) = self.hashing.locate(item);
        let estimate = self.apply(fp, [idx0, idx1], weight);
        self.refresh_heap(item, estimate);
        Ok(estimate)
    }

    fn apply(&mut self, fp: u16, idx: [usize; 2], weight: u32) -> u64 {
        let slots = self.config.heavy_slots_per_bucket;
        let l = self.config.lobby_threshold;

        // Tracked in the heavy part: the common path.
        for t in 0..2 {
            let bucket = &mut self.tables[t][idx[t]];
            if let Some(s) = bucket.find_heavy(slots, fp) {
                let entry = &mut bucket.heavy[s];
                entry.counter = entry.counter.saturating_add(weight);
                return entry.counter as u64;
            }
        }

        if self.config.use_early_placement {
            for t in 0..2 {
                let bucket = &mut self.tables[t][idx[t]];
                if let Some(s) = bucket.empty_heavy(slots) {
                    bucket.heavy[s] = HeavyEntry {
                        fingerprint: fp,
                        counter: weight,
                    };
                    self.stats.early_placements += 1;
                    return weight as u64;
                }
            }
        }

        // Tracked in a lobby.
        for t in 0..2 {
            let lobby = self.tables[t][idx[t]].lobby;
            if lobby.fingerprint == fp {
                let total = (lobby.counter as u32).saturating_add(weight);
                if total >= l as u32 {
                    self.tables[t][idx[t]].lobby.counter = l;
                    return self.try_promote(t, idx[t], total).1;
                }
                self.tables[t][idx[t]].lobby.counter = total as u8;
                return total as u64;
            }
        }

        // A free lobby.
        for t in 0..2 {
            if self.tables[t][idx[t]].lobby.is_empty() {
                return self.enter_lobby(t, idx[t], fp, weight);
            }
        }

        // Collide with the lobby occupant chosen by the fingerprint's parity.
        let t = (fp & 1) as usize;
        let i = idx[t];
        let occupant = self.tables[t][i].lobby;
        match self.decay.decay(occupant.counter, weight, &mut self.rng) {
            DecayOutcome::Remaining(c) => {
                self.tables[t][i].lobby.counter = c;
                if c >= l {
                    // The occupant retries its promotion; the incoming item
                    // stays untracked either way.
                    self.try_promote(t, i, c as u32);
                }
                0
            }
            DecayOutcome::Expired { leftover } => self.enter_lobby(t, i, fp, leftover.max(1)),
        }
    }

    /// Writes `<fp, weight>` into a lobby, promoting when `weight >= L`.
    fn enter_lobby(&mut self, t: usize, i: usize, fp: u16, weight: u32) -> u64 {
        let l = self.config.lobby_threshold;
        self.tables[t][i].lobby = LobbyEntry {
            fingerprint: fp,
            counter: weight.min(l as u32) as u8,
        };
        if weight >= l as u32 {
            self.try_promote(t, i, weight).1
        } else {
            weight as u64
        }
    }

    /// Promotes the lobby occupant of bucket `(t, i)`, whose full count is
    /// `candidate` (at least `L`), and returns the outcome with the
    /// occupant's estimate afterwards.
    fn try_promote(&mut self, t: usize, i: usize, candidate: u32) -> (PromotionOutcome, u64) {
        let slots = self.config.heavy_slots_per_bucket;
        let l = self.config.lobby_threshold as u32;
        let bucket = &mut self.tables[t][i];
        let fp = bucket.lobby.fingerprint;
        debug_assert!(!bucket.lobby.is_empty());

        if let Some(s) = bucket.empty_heavy(slots) {
            bucket.heavy[s] = HeavyEntry {
                fingerprint: fp,
                counter: candidate,
            };
            bucket.lobby.clear();
            self.stats.promotions += 1;
            return (PromotionOutcome::MovedToEmpty, candidate as u64);
        }

        let s = bucket.min_heavy(slots);
        let min = bucket.heavy[s].counter;
        let promote = if min <= l {
            true
        } else {
            let p = (candidate.saturating_sub(l)) as f64 / (min - l) as f64;
            p >= 1.0 || (p > 0.0 && self.rng.gen::<f64>() < p)
        };

        let bucket = &mut self.tables[t][i];
        if promote {
            let evicted = bucket.heavy[s];
            let counter = min.max(candidate);
            bucket.heavy[s] = HeavyEntry {
                fingerprint: fp,
                counter,
            };
            bucket.lobby.clear();
            self.stats.promotions += 1;
            self.kickout(evicted, t, i);
            (PromotionOutcome::Replaced, counter as u64)
        } else {
            bucket.lobby.counter = l as u8;
            self.stats.failed_promotions += 1;
            (PromotionOutcome::Failed, l as u64)
        }
    }

    /// Relocates a displaced heavy entry that was stored at `(t, i)`.
    fn kickout(&mut self, mut entry: HeavyEntry, mut t: usize, mut i: usize) {
        let slots = self.config.heavy_slots_per_bucket;
        let threshold = self.config.kick_threshold_factor * self.heavy_threshold();
        for _ in 0..self.config.max_kicks {
            if (entry.counter as f64) < threshold {
                self.stats.kick_dropped_below_threshold += 1;
                return;
            }
            t ^= 1;
            i = self.hashing.alternate(i, entry.fingerprint);
            let bucket = &mut self.tables[t][i];
            debug_assert!(bucket.find_heavy(slots, entry.fingerprint).is_none());
            if let Some(s) = bucket.empty_heavy(slots) {
                bucket.heavy[s] = entry;
                self.stats.kick_placed += 1;
                return;
            }
            let s = bucket.min_heavy(slots);
            std::mem::swap(&mut bucket.heavy[s], &mut entry);
            self.stats.kick_swaps += 1;
        }
        self.stats.kick_dropped_exhausted += 1;
    }

    fn refresh_heap(&mut self, item: u64, estimate: u64) {
        let threshold = self.heavy_threshold();
        if estimate as f64 >= threshold {
            self.heap.upsert(item, estimate);
        }
        self.heap.evict_below(threshold);
    }

    /// Heavy-part counter of the item, or 0. Lobby counters are not reported.
    pub fn f_query(&self, item: u64) -> u64 {
        let slots = self.config.heavy_slots_per_bucket;
        let (fp, idx0, idx1) = self.hashing.locate(item);
        [(0, idx0), (1, idx1)]
            .into_iter()
            .find_map(|(t, i)| {
                let bucket = &self.tables[t][i];
                bucket.find_heavy(slots, fp).map(|s| bucket.heavy[s].counter as u64)
            })
            .unwrap_or(0)
    }

    pub fn hh_query(&mut self) -> HeavyHitterReport {
        self.heap.evict_below(self.heavy_threshold());
        HeavyHitterReport::new(self.heap.iter().collect(), self.n_processed)
    }

    pub fn n_processed(&self) -> u64 {
        self.n_processed
    }

    pub fn memory_bytes(&self) -> usize {
        self.config.table_bytes()
    }
}

impl HeavyHitterSketch for ChkSketch {
    fn update(&mut self, item: u64, weight: u32) -> Result<u64, SketchError> {
        ChkSketch::update(self, item, weight)
    }

    fn f_query(&self, item: u64) -> u64 {
        ChkSketch::f_query(self, item)
    }

    fn hh_query(&mut self) -> HeavyHitterReport {
        ChkSketch::hh_query(self)
    }

    fn n_processed(&self) -> u64 {
        self.n_processed
    }

    fn memory_bytes(&self) -> usize {
        ChkSketch::memory_bytes(self)
    }

    fn phi(&self) -> f64 {
        self.config.phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(buckets: usize) -> SketchConfig {
        SketchConfig {
            buckets_per_table: buckets,
            seed: 42,
            ..SketchConfig::default()
        }
    }

    fn fill_heavy(sketch: &mut ChkSketch, counter: u32) {
        let mut fp = 100u16;
        for t in 0..2 {
            for bucket in sketch.tables[t].iter_mut() {
                for s in 0..sketch.config.heavy_slots_per_bucket {
                    bucket.heavy[s] = HeavyEntry {
                        fingerprint: fp,
                        counter,
                    };
                    fp += 1;
                }
            }
        }
    }

    #[test]
    fn golden_fingerprint_and_indexes() {
        let sketch = ChkSketch::new(SketchConfig {
            buckets_per_table: 1024,
            seed: 42,
            ..SketchConfig::default()
        })
        .unwrap();
        assert_eq!(sketch.generate_fp_and_indexes(12345), GOLDEN_42_12345_1024);
    }

    const GOLDEN_42_12345_1024: (u16, usize, usize) = (8786, 646, 990);

    #[test]
    fn alternate_index_is_an_involution() {
        let sketch = ChkSketch::new(config(1024)).unwrap();
        for item in 0..10_000u64 {
            let (fp, idx0, idx1) = sketch.generate_fp_and_indexes(item);
            assert_ne!(fp, 0);
            assert!(idx0 < 1024 && idx1 < 1024);
            assert_eq!(sketch.hashing.alternate(idx1, fp), idx0);
        }
    }

    #[test]
    fn fingerprint_zero_maps_to_one() {
        // A one-bit fingerprint is 0 for about half of all items.
        let sketch = ChkSketch::new(SketchConfig {
            fingerprint_bits: 1,
            ..config(64)
        })
        .unwrap();
        let fps: Vec<u16> = (0..200).map(|i| sketch.generate_fp_and_indexes(i).0).collect();
        assert!(fps.iter().all(|&fp| fp == 1));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let mut sketch = ChkSketch::new(config(64)).unwrap();
        assert_eq!(sketch.update(1, 0), Err(SketchError::ZeroWeight));
        assert_eq!(sketch.n_processed(), 0);
    }

    #[test]
    fn early_placement_counts_exactly() {
        let mut sketch = ChkSketch::new(config(64)).unwrap();
        assert_eq!(sketch.update(7, 100).unwrap(), 100);
        assert_eq!(sketch.f_query(7), 100);
        assert_eq!(sketch.stats().early_placements, 1);
    }

    #[test]
    fn heavy_weight_is_promoted_without_early_placement() {
        let mut sketch = ChkSketch::new(SketchConfig {
            use_early_placement: false,
            ..config(64)
        })
        .unwrap();
        assert_eq!(sketch.update(7, 20).unwrap(), 20);
        assert_eq!(sketch.f_query(7), 20);
        assert_eq!(sketch.lobby_counter(7), None);
    }

    #[test]
    fn light_weight_waits_in_the_lobby() {
        let mut sketch = ChkSketch::new(SketchConfig {
            use_early_placement: false,
            ..config(64)
        })
        .unwrap();
        assert_eq!(sketch.update(7, 5).unwrap(), 5);
        assert_eq!(sketch.f_query(7), 0);
        assert_eq!(sketch.lobby_counter(7), Some(5));
        for _ in 0..10 {
            sketch.update(7, 1).unwrap();
        }
        assert_eq!(sketch.lobby_counter(7), Some(15));
        assert_eq!(sketch.update(7, 1).unwrap(), 16);
        assert_eq!(sketch.f_query(7), 16);
        assert_eq!(sketch.lobby_counter(7), None);
    }

    #[test]
    fn promotion_into_empty_slot_clears_lobby() {
        let mut sketch = ChkSketch::new(config(4)).unwrap();
        sketch.tables[0][1].lobby = LobbyEntry {
            fingerprint: 77,
            counter: 16,
        };
        let (outcome, estimate) = sketch.try_promote(0, 1, 16);
        assert_eq!(outcome, PromotionOutcome::MovedToEmpty);
        assert_eq!(estimate, 16);
        assert!(sketch.tables[0][1].lobby.is_empty());
        assert_eq!(sketch.tables[0][1].heavy[0].fingerprint, 77);
    }

    #[test]
    fn promotion_at_threshold_never_succeeds() {
        let mut sketch = ChkSketch::new(config(4)).unwrap();
        fill_heavy(&mut sketch, 100);
        for _ in 0..1000 {
            sketch.tables[0][2].lobby = LobbyEntry {
                fingerprint: 9,
                counter: 16,
            };
            let (outcome, estimate) = sketch.try_promote(0, 2, 16);
            assert_eq!(outcome, PromotionOutcome::Failed);
            assert_eq!(estimate, 16);
            assert_eq!(sketch.tables[0][2].lobby.counter, 16);
        }
    }

    #[test]
    fn promotion_at_minimum_always_succeeds() {
        let mut sketch = ChkSketch::new(config(4)).unwrap();
        for round in 0..200 {
            fill_heavy(&mut sketch, 100);
            sketch.n_processed = u32::MAX as u64; // drop the displaced entry
            sketch.tables[1][3].lobby = LobbyEntry {
                fingerprint: 9,
                counter: 16,
            };
            let (outcome, estimate) = sketch.try_promote(1, 3, 100);
            assert_eq!(outcome, PromotionOutcome::Replaced, "round {round}");
            assert_eq!(estimate, 100);
            assert!(sketch.tables[1][3].lobby.is_empty());
            assert_eq!(sketch.tables[1][3].heavy[0].fingerprint, 9);
        }
    }

    #[test]
    fn degenerate_minimum_promotes_deterministically() {
        let mut sketch = ChkSketch::new(config(4)).unwrap();
        fill_heavy(&mut sketch, 3);
        sketch.tables[0][0].lobby = LobbyEntry {
            fingerprint: 9,
            counter: 16,
        };
        let (outcome, estimate) = sketch.try_promote(0, 0, 16);
        assert_eq!(outcome, PromotionOutcome::Replaced);
        assert_eq!(estimate, 16);
    }

    #[test]
    fn promotion_probability_is_proportional() {
        // C = 20, L = 16, C_min = 24: probability 0.5.
        let mut sketch = ChkSketch::new(config(4)).unwrap();
        let trials = 20_000;
        let mut wins = 0;
        for _ in 0..trials {
            fill_heavy(&mut sketch, 24);
            sketch.n_processed = u32::MAX as u64; // drop every kicked entry
            sketch.tables[0][0].lobby = LobbyEntry {
                fingerprint: 9,
                counter: 16,
            };
            if sketch.try_promote(0, 0, 20).0 == PromotionOutcome::Replaced {
                wins += 1;
            }
        }
        let rate = wins as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 4.0 * (0.25f64 / trials as f64).sqrt(), "{rate}");
    }

    #[test]
    fn kickout_below_threshold_drops_immediately() {
        let mut sketch = ChkSketch::new(config(4)).unwrap();
        sketch.n_processed = 1_000_000; // phi * N = 500
        let before = sketch.tables.clone();
        sketch.kickout(
            HeavyEntry {
                fingerprint: 5,
                counter: 10,
            },
            0,
            0,
        );
        assert_eq!(sketch.stats.kick_dropped_below_threshold, 1);
        assert_eq!(sketch.tables, before);
    }

    #[test]
    fn kickout_uses_empty_alternate_slot() {
        let mut sketch = ChkSketch::new(config(8)).unwrap();
        let entry = HeavyEntry {
            fingerprint: 5,
            counter: 10,
        };
        sketch.kickout(entry, 0, 3);
        let alt = sketch.hashing.alternate(3, 5);
        assert_eq!(sketch.tables[1][alt].heavy[0], entry);
        assert_eq!(sketch.stats.kick_placed, 1);
        assert_eq!(sketch.stats.kick_swaps, 0);
    }

    #[test]
    fn kickout_stops_after_max_kicks() {
        for max_kicks in [1, 5, 16, 40] {
            let mut sketch = ChkSketch::new(SketchConfig {
                max_kicks,
                kick_threshold_factor: 0.0,
                ..config(8)
            })
            .unwrap();
            fill_heavy(&mut sketch, 50);
            sketch.kickout(
                HeavyEntry {
                    fingerprint: 9999,
                    counter: 60,
                },
                0,
                0,
            );
            assert_eq!(sketch.stats.kick_swaps, max_kicks as u64);
            assert_eq!(sketch.stats.kick_dropped_exhausted, 1);
            assert_eq!(sketch.stats.kick_placed, 0);
        }
    }

    #[test]
    fn never_inserted_item_is_zero() {
        let mut sketch = ChkSketch::new(config(64)).unwrap();
        for item in 0..20u64 {
            sketch.update(item, 3).unwrap();
        }
        let present: Vec<(u16, usize, usize)> =
            (0..20).map(|i| sketch.generate_fp_and_indexes(i)).collect();
        let absent = 1_000_000u64;
        let (fp, i0, i1) = sketch.generate_fp_and_indexes(absent);
        assert!(!present
            .iter()
            .any(|&(f, a, b)| f == fp && (a == i0 || b == i1)));
        assert_eq!(sketch.f_query(absent), 0);
    }

    #[test]
    fn hh_query_threshold() {
        let mut sketch = ChkSketch::new(SketchConfig {
            phi: 0.5,
            ..config(64)
        })
        .unwrap();
        assert!(sketch.hh_query().entries().is_empty());
        sketch.update(3, 10).unwrap();
        let report = sketch.hh_query();
        assert_eq!(report.entries(), &[(3, 10)]);
        assert_eq!(report.n_processed(), 10);
        sketch.update(4, 11).unwrap();
        // 3 has 10 < 0.5 * 21
        assert_eq!(sketch.hh_query().entries(), &[(4, 11)]);
    }
}
