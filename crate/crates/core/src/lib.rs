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

//! Streaming heavy-hitter detection.
//!
//! The crate is built around [`ChkSketch`], a Cuckoo Heavy Keeper sketch: two
//! tables of cache-line sized buckets, each holding a single *lobby* entry that
//! filters infrequent items with count-with-exponential-decay, plus a few
//! *heavy* entries that count promoted candidates exactly and resolve
//! collisions with partial-key cuckoo hashing.
//!
//! Around it live:
//!
//! - [`algos`]: the common [`HeavyHitterSketch`] interface, an exact oracle and
//!   two baselines (Space-Saving, Count-Min with a heap).
//! - [`parallel`]: a domain-splitting wrapper that runs any
//!   [`HeavyHitterSketch`] on `P` worker threads, with an insertion-optimized
//!   and a query-optimized heavy-hitter query path.
//! - [`streamgen`]: seeded Zipf streams and a line-based stream file format.
//! - [`metrics`]: precision, recall, ARE, latency summaries and CSV output.
//!
//! ```
//! use chk_core::{ChkSketch, HeavyHitterSketch, SketchConfig};
//!
//! let mut sketch = ChkSketch::new(SketchConfig::default()).unwrap();
//! sketch.update(42, 100).unwrap();
//! assert_eq!(sketch.f_query(42), 100);
//! ```

pub mod algos;
pub mod chk;
mod error;
pub mod hash;
pub mod heap;
pub mod metrics;
pub mod parallel;
pub mod streamgen;

pub use algos::{
    CountMinSketch, ExactOracle, HeavyHitterReport, HeavyHitterSketch, SpaceSavingSketch,
    StreamTuple,
};
pub use chk::{memory_to_config, ChkSketch, DecayTable, SketchConfig};
pub use error::SketchError;
