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

//! Seedable 64-bit mixing hash.
//!
//! Every hash in the crate goes through [`hash_with_seed`]. Independent hash
//! functions are obtained by salting the seed, so the item index, the
//! fingerprint and the alternate-bucket offset never share an invocation.

/// Seed salt for the primary bucket index.
pub const SALT_INDEX: u64 = 0x9e37_79b9_7f4a_7c15;
/// Seed salt for fingerprints.
pub const SALT_FINGERPRINT: u64 = 0xc2b2_ae3d_27d4_eb4f;
/// Seed salt for the fingerprint-derived alternate bucket offset.
pub const SALT_ALTERNATE: u64 = 0x1656_67b1_9e37_79f9;
/// Seed salt for the thread ownership function.
pub const SALT_OWNER: u64 = 0x27d4_eb2f_1656_67c5;
/// Seed salt for Count-Min rows; the row number is added to it.
pub const SALT_ROW: u64 = 0x85eb_ca77_c2b2_ae63;

/// Murmur3 64-bit finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^= x >> 33;
    x
}

#[inline]
pub fn hash_with_seed(value: u64, seed: u64) -> u64 {
    mix64(value ^ mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// A hash function bound to one salted seed, with the seed pre-mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededHash {
    key: u64,
}

impl SeededHash {
    pub fn new(seed: u64, salt: u64) -> Self {
        SeededHash {
            key: mix64((seed ^ salt).wrapping_add(0x9e37_79b9_7f4a_7c15)),
        }
    }

    #[inline]
    pub fn hash(&self, value: u64) -> u64 {
        mix64(value ^ self.key)
    }
}
