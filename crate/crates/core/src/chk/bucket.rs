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

use super::config::MAX_HEAVY_SLOTS;

/// Fingerprint value reserved for empty entries.
pub const EMPTY_FINGERPRINT: u16 = 0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LobbyEntry {
    pub fingerprint: u16,
    pub counter: u8,
}

impl LobbyEntry {
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.fingerprint == EMPTY_FINGERPRINT
    }

    #[inline]
    pub fn clear(&mut self) {
        *self = LobbyEntry::default();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeavyEntry {
    pub fingerprint: u16,
    pub counter: u32,
}

impl HeavyEntry {
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.fingerprint == EMPTY_FINGERPRINT
    }
}

/// One lobby entry followed by the heavy entries. Only the first
/// `heavy_slots_per_bucket` heavy entries are used.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[repr(C)]
pub struct Bucket {
    pub lobby: LobbyEntry,
    pub heavy: [HeavyEntry; MAX_HEAVY_SLOTS],
}

impl Bucket {
    #[inline]
    pub fn find_heavy(&self, slots: usize, fingerprint: u16) -> Option<usize> {
        self.heavy[..slots]
            .iter()
            .position(|e| e.fingerprint == fingerprint)
    }

    #[inline]
    pub fn empty_heavy(&self, slots: usize) -> Option<usize> {
        self.find_heavy(slots, EMPTY_FINGERPRINT)
    }

    /// Slot with the smallest counter; the lowest index wins ties.
    #[inline]
    pub fn min_heavy(&self, slots: usize) -> usize {
        let mut best = 0;
        for i in 1..slots {
            if self.heavy[i].counter < self.heavy[best].counter {
                best = i;
            }
        }
        best
    }
}
