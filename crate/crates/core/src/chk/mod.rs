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

//! The Cuckoo Heavy Keeper sketch.

mod bucket;
mod config;
mod decay;
mod sketch;

pub use bucket::{Bucket, HeavyEntry, LobbyEntry, EMPTY_FINGERPRINT};
pub use config::{memory_to_config, SketchConfig, MAX_HEAVY_SLOTS};
pub use decay::{expected_counter_after, DecayOutcome, DecayTable};
pub use sketch::{ChkSketch, ChkStats, Hashing, PromotionOutcome};
