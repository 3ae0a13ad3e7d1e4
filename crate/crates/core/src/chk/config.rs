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

use crate::SketchError;

/// Largest supported number of heavy entries per bucket.
pub const MAX_HEAVY_SLOTS: usize = 4;

/// Tunables of a [`crate::ChkSketch`].
#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    /// Buckets in each of the two tables. Must be a power of two.
    pub buckets_per_table: usize,
    /// Lobby promotion threshold `L`.
    pub lobby_threshold: u8,
    /// Decay base `b` of count-with-exponential-decay.
    pub decay_base: f64,
    pub fingerprint_bits: u8,
    pub heavy_slots_per_bucket: usize,
    pub max_kicks: usize,
    /// Heavy-hitter threshold as a fraction of the processed weight.
    pub phi: f64,
    pub seed: u64,
    /// Place untracked items straight into empty heavy entries.
    pub use_early_placement: bool,
    /// Multiplier on `phi * N` below which a kicked entry is dropped.
    /// Zero disables early kickout termination.
    pub kick_threshold_factor: f64,
}

impl Default for SketchConfig {
    fn default() -> Self {
        SketchConfig {
            buckets_per_table: 128,
            lobby_threshold: 16,
            decay_base: 1.08,
            fingerprint_bits: 16,
            heavy_slots_per_bucket: 2,
            max_kicks: 16,
            phi: 0.0005,
            seed: 0,
            use_early_placement: true,
            kick_threshold_factor: 1.0,
        }
    }
}

impl SketchConfig {
    pub fn validate(&self) -> Result<(), SketchError> {
        if self.buckets_per_table == 0 || !self.buckets_per_table.is_power_of_two() {
            return Err(SketchError::invalid(
                "buckets_per_table",
                format!("{} is not a power of two", self.buckets_per_table),
            ));
        }
        if self.lobby_threshold == 0 {
            return Err(SketchError::invalid("lobby_threshold", "must be positive"));
        }
        if !(self.decay_base > 1.0) || !self.decay_base.is_finite() {
            return Err(SketchError::invalid(
                "decay_base",
                format!("{} must be a finite value > 1", self.decay_base),
            ));
        }
        if !(1..=16).contains(&self.fingerprint_bits) {
            return Err(SketchError::invalid(
                "fingerprint_bits",
                format!("{} is outside 1..=16", self.fingerprint_bits),
            ));
        }
        if !(1..=MAX_HEAVY_SLOTS).contains(&self.heavy_slots_per_bucket) {
            return Err(SketchError::invalid(
                "heavy_slots_per_bucket",
                format!(
                    "{} is outside 1..={MAX_HEAVY_SLOTS}",
                    self.heavy_slots_per_bucket
                ),
            ));
        }
        if self.max_kicks == 0 {
            return Err(SketchError::invalid("max_kicks", "must be positive"));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(SketchError::invalid(
                "phi",
                format!("{} is outside (0, 1)", self.phi),
            ));
        }
        if !(self.kick_threshold_factor >= 0.0) {
            return Err(SketchError::invalid(
                "kick_threshold_factor",
                "must be non-negative",
            ));
        }
        Ok(())
    }

    /// Nominal bytes of one bucket: a lobby entry (fingerprint + 8-bit
    /// counter) and the heavy entries (fingerprint + 32-bit counter each).
    pub fn bucket_bytes(&self) -> usize {
        let fp = fingerprint_bytes(self.fingerprint_bits);
        (fp + 1) + self.heavy_slots_per_bucket * (fp + 4)
    }

    /// Nominal size of both tables; the auxiliary heap is not counted.
    pub fn table_bytes(&self) -> usize {
        2 * self.buckets_per_table * self.bucket_bytes()
    }
}

fn fingerprint_bytes(bits: u8) -> usize {
    (bits as usize).div_ceil(8)
}

/// Sizes the tables for a memory budget.
///
/// Picks the largest power-of-two bucket count with
/// `2 * buckets * bucket_bytes <= memory_bytes`; every other field is copied
/// from `defaults`.
pub fn memory_to_config(
    memory_bytes: usize,
    defaults: &SketchConfig,
) -> Result<SketchConfig, SketchError> {
    let bucket_bytes = defaults.bucket_bytes();
    let minimum = 2 * bucket_bytes;
    if memory_bytes < minimum {
        return Err(SketchError::BudgetTooSmall {
            budget: memory_bytes,
            minimum,
        });
    }
    let max_buckets = memory_bytes / minimum;
    let buckets = 1usize << (usize::BITS - 1 - max_buckets.leading_zeros());
    let config = SketchConfig {
        buckets_per_table: buckets,
        ..defaults.clone()
    };
    config.validate()?;
    Ok(config)
}
