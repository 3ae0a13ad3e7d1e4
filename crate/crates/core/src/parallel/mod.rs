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

//! Domain-splitting wrapper that runs any [`HeavyHitterSketch`] on `P`
//! worker threads.
//!
//! Every item has one owner thread, `hash(item) mod P`. A worker buffers
//! updates per owner and hands a full buffer to the owner's queue, then keeps
//! serving its own queue and f-query slots until the owner has applied the
//! buffer. f-queries are delegated the same way through per-pair slots.
//!
//! Two heavy-hitter query paths are offered:
//!
//! - [`Variant::InsertionOptimized`] scans every worker's local sketch under
//!   that worker's lock, taking locks opportunistically and retrying the ones
//!   that were busy.
//! - [`Variant::QueryOptimized`] has owners publish items crossing
//!   `phi * N_processed` to a [`GlobalHhTable`] as they apply updates; the
//!   query only reads that table.
//!
//! Each worker drives its [`WorkerHandle`] from its own thread. Buffers are
//! only applied while some worker is waiting, so all workers must keep
//! calling into their handles until they call [`WorkerHandle::drain`]
//! together.

mod buffer;
mod global_table;

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, TryLockError};

use crossbeam_queue::SegQueue;
use crossbeam_utils::{Backoff, CachePadded};

pub use buffer::DelegationBuffer;
pub use global_table::GlobalHhTable;

use crate::algos::{HeavyHitterReport, HeavyHitterSketch};
use crate::hash::{SeededHash, SALT_OWNER};
use crate::SketchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Scan local sketches under opportunistic locks ("-I").
    InsertionOptimized,
    /// Read a global table of published heavy hitters ("-Q").
    QueryOptimized,
}

impl Variant {
    pub fn suffix(self) -> &'static str {
        match self {
            Variant::InsertionOptimized => "I",
            Variant::QueryOptimized => "Q",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelConfig {
    pub threads: usize,
    pub max_buf: usize,
    pub max_w: u32,
    pub variant: Variant,
    /// Passed through to the sketch factory.
    pub per_thread_memory_bytes: usize,
    pub phi: f64,
    pub seed: u64,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        ParallelConfig {
            threads: 1,
            max_buf: 16,
            max_w: 1000,
            variant: Variant::InsertionOptimized,
            per_thread_memory_bytes: 1024,
            phi: 0.00005,
            seed: 0,
        }
    }
}

impl ParallelConfig {
    pub fn validate(&self) -> Result<(), SketchError> {
        if self.threads == 0 {
            return Err(SketchError::invalid("threads", "need at least one thread"));
        }
        if self.max_buf == 0 {
            return Err(SketchError::invalid("max_buf", "must be at least 1"));
        }
        if self.max_w == 0 {
            return Err(SketchError::invalid("max_w", "must be at least 1"));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(SketchError::invalid("phi", format!("{} is not in (0, 1)", self.phi)));
        }
        Ok(())
    }
}

/// Maps items to owner threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OwnerMap {
    hash: SeededHash,
    threads: u64,
}

impl OwnerMap {
    pub fn new(threads: usize, seed: u64) -> Self {
        assert!(threads > 0);
        OwnerMap {
            hash: SeededHash::new(seed, SALT_OWNER),
            threads: threads as u64,
        }
    }

    #[inline]
    pub fn owner(&self, item: u64) -> usize {
        (self.hash.hash(item) % self.threads) as usize
    }
}

struct Handoff {
    entries: Vec<(u64, u32)>,
    weight: u64,
    processed: AtomicBool,
}

const SLOT_EMPTY: u8 = 0;
const SLOT_PENDING: u8 = 1;
const SLOT_PROCESSED: u8 = 2;

#[derive(Default)]
struct QuerySlot {
    status: AtomicU8,
    item: AtomicU64,
    result: AtomicU64,
}

struct Local<S> {
    sketch: S,
    /// Where this owner last published each of its items.
    published: HashMap<u64, usize>,
}

struct Worker<S> {
    local: CachePadded<Mutex<Local<S>>>,
    queue: SegQueue<Arc<Handoff>>,
    /// Indexed by requesting thread.
    queries: Box<[CachePadded<QuerySlot>]>,
}

struct Shared<S> {
    config: ParallelConfig,
    owners: OwnerMap,
    workers: Box<[Worker<S>]>,
    n_processed: CachePadded<AtomicU64>,
    global: Option<GlobalHhTable>,
    drain_arrivals: CachePadded<AtomicU64>,
    handoffs: AtomicU64,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn try_lock<T>(m: &Mutex<T>) -> Option<MutexGuard<'_, T>> {
    match m.try_lock() {
        Ok(g) => Some(g),
        Err(TryLockError::Poisoned(e)) => Some(e.into_inner()),
        Err(TryLockError::WouldBlock) => None,
    }
}

impl<S: HeavyHitterSketch> Shared<S> {
    /// Applies one handed-off buffer to `tid`'s sketch.
    fn apply(&self, local: &mut Local<S>, handoff: &Handoff) {
        let n = self.n_processed.fetch_add(handoff.weight, Ordering::AcqRel) + handoff.weight;
        let threshold = self.config.phi * n as f64;
        for &(item, weight) in &handoff.entries {
            let count = local
                .sketch
                .update(item, weight)
                .expect("buffered weights are positive");
            if let Some(global) = &self.global {
                if count as f64 >= threshold {
                    let hint = local.published.get(&item).copied();
                    let slot = global.publish(item, count, threshold, hint);
                    local.published.insert(item, slot);
                }
            }
        }
    }
}

/// Owner of the shared state; used for setup and for inspection at
/// quiescent points.
pub struct ParallelSketch<S> {
    shared: Arc<Shared<S>>,
}

impl<S: HeavyHitterSketch> ParallelSketch<S> {
    /// Builds one sketch per worker with `factory(tid, &config)` and returns
    /// the wrapper with one handle per worker, in thread-id order.
    pub fn new<F>(config: ParallelConfig, mut factory: F) -> Result<(Self, Vec<WorkerHandle<S>>), SketchError>
    where
        F: FnMut(usize, &ParallelConfig) -> Result<S, SketchError>,
    {
        config.validate()?;
        let p = config.threads;
        let mut workers = Vec::with_capacity(p);
        for tid in 0..p {
            workers.push(Worker {
                local: CachePadded::new(Mutex::new(Local {
                    sketch: factory(tid, &config)?,
                    published: HashMap::new(),
                })),
                queue: SegQueue::new(),
                queries: (0..p).map(|_| CachePadded::new(QuerySlot::default())).collect(),
            });
        }
        let shared = Arc::new(Shared {
            owners: OwnerMap::new(p, config.seed),
            workers: workers.into_boxed_slice(),
            n_processed: CachePadded::new(AtomicU64::new(0)),
            global: (config.variant == Variant::QueryOptimized)
                .then(|| GlobalHhTable::for_phi(config.phi, config.seed)),
            drain_arrivals: CachePadded::new(AtomicU64::new(0)),
            handoffs: AtomicU64::new(0),
            config,
        });
        let handles = (0..p)
            .map(|tid| WorkerHandle {
                shared: Arc::clone(&shared),
                tid,
                buffers: (0..p)
                    .map(|_| DelegationBuffer::with_capacity(shared.config.max_buf))
                    .collect(),
                drain_generation: 0,
                last_hh_passes: 0,
            })
            .collect();
        Ok((ParallelSketch { shared }, handles))
    }

    pub fn config(&self) -> &ParallelConfig {
        &self.shared.config
    }

    pub fn owner(&self, item: u64) -> usize {
        self.shared.owners.owner(item)
    }

    /// Weight applied to local sketches so far.
    pub fn n_processed(&self) -> u64 {
        self.shared.n_processed.load(Ordering::Acquire)
    }

    /// Number of buffers handed to owners so far.
    pub fn handoffs(&self) -> u64 {
        self.shared.handoffs.load(Ordering::Relaxed)
    }

    pub fn global_table(&self) -> Option<&GlobalHhTable> {
        self.shared.global.as_ref()
    }

    /// Runs `f` on worker `tid`'s sketch under its lock.
    pub fn with_sketch<R>(&self, tid: usize, f: impl FnOnce(&mut S) -> R) -> R {
        f(&mut lock(&self.shared.workers[tid].local).sketch)
    }

    /// The owner's local estimate; only meaningful once all workers drained.
    pub fn f_query_quiescent(&self, item: u64) -> u64 {
        self.with_sketch(self.owner(item), |s| s.f_query(item))
    }

    /// Union of the local heavy hitters above `phi * N_processed`, without
    /// going through a worker handle.
    pub fn hh_query_quiescent(&self) -> HeavyHitterReport {
        let mut entries = Vec::new();
        for tid in 0..self.shared.config.threads {
            entries.extend(self.with_sketch(tid, |s| s.hh_query()).entries().iter().copied());
        }
        let n = self.n_processed();
        let threshold = self.shared.config.phi * n as f64;
        entries.retain(|&(_, c)| c as f64 >= threshold);
        HeavyHitterReport::new(entries, n)
    }

    /// Returns the local sketches once every handle has been dropped.
    pub fn into_sketches(self) -> Result<Vec<S>, Self> {
        match Arc::try_unwrap(self.shared) {
            Ok(shared) => Ok(shared
                .workers
                .into_vec()
                .into_iter()
                .map(|w| {
                    CachePadded::into_inner(w.local)
                        .into_inner()
                        .unwrap_or_else(|e| e.into_inner())
                        .sketch
                })
                .collect()),
            Err(shared) => Err(ParallelSketch { shared }),
        }
    }
}

/// One worker's view of the wrapper. Must stay on a single thread.
pub struct WorkerHandle<S> {
    shared: Arc<Shared<S>>,
    tid: usize,
    buffers: Box<[DelegationBuffer]>,
    drain_generation: u64,
    last_hh_passes: usize,
}

impl<S: HeavyHitterSketch> WorkerHandle<S> {
    pub fn tid(&self) -> usize {
        self.tid
    }

    pub fn threads(&self) -> usize {
        self.shared.config.threads
    }

    pub fn owner(&self, item: u64) -> usize {
        self.shared.owners.owner(item)
    }

    pub fn n_processed(&self) -> u64 {
        self.shared.n_processed.load(Ordering::Acquire)
    }

    /// Weight of `item` sitting in this worker's buffers.
    pub fn buffered_weight(&self, item: u64) -> u64 {
        self.buffers[self.owner(item)].weight_of(item) as u64
    }

    /// Total weight sitting in this worker's buffers.
    pub fn buffered_total(&self) -> u64 {
        self.buffers.iter().map(|b| b.weight()).sum()
    }

    /// Scan passes made by the last insertion-optimized hh-query.
    pub fn last_hh_passes(&self) -> usize {
        self.last_hh_passes
    }

    /// Buffers `weight` for `item`'s owner, handing the buffer over when it
    /// holds `max_buf` items or `max_w` weight for one item. Weight beyond
    /// `max_w` continues in a fresh buffer.
    pub fn update(&mut self, item: u64, weight: u32) -> Result<(), SketchError> {
        if weight == 0 {
            return Err(SketchError::ZeroWeight);
        }
        let owner = self.owner(item);
        let (max_buf, max_w) = (self.shared.config.max_buf, self.shared.config.max_w);
        let mut rest = weight;
        while rest > 0 {
            let (taken, held) = self.buffers[owner].add(item, rest, max_w);
            rest -= taken;
            if held >= max_w || self.buffers[owner].len() >= max_buf {
                self.flush(owner);
            }
        }
        Ok(())
    }

    fn flush(&mut self, owner: usize) {
        let fresh = DelegationBuffer::with_capacity(self.shared.config.max_buf);
        let full = std::mem::replace(&mut self.buffers[owner], fresh);
        let weight = full.weight();
        let handoff = Arc::new(Handoff {
            entries: full.into_entries(),
            weight,
            processed: AtomicBool::new(false),
        });
        self.shared.workers[owner].queue.push(Arc::clone(&handoff));
        self.shared.handoffs.fetch_add(1, Ordering::Relaxed);
        let backoff = Backoff::new();
        while !handoff.processed.load(Ordering::Acquire) {
            if self.process_pending() == 0 {
                backoff.snooze();
            } else {
                backoff.reset();
            }
        }
    }

    /// Applies buffers queued for this worker and answers its pending
    /// f-queries; returns how many of either were handled. The
    /// insertion-optimized variant gives up at once if its sketch is locked
    /// by a scanning hh-query.
    pub fn process_pending(&mut self) -> usize {
        let shared = &*self.shared;
        let worker = &shared.workers[self.tid];
        let mut local = match shared.config.variant {
            Variant::InsertionOptimized => match try_lock(&worker.local) {
                Some(g) => g,
                None => return 0,
            },
            Variant::QueryOptimized => lock(&worker.local),
        };
        let mut done = 0;
        while let Some(handoff) = worker.queue.pop() {
            shared.apply(&mut local, &handoff);
            handoff.processed.store(true, Ordering::Release);
            done += 1;
        }
        for slot in worker.queries.iter() {
            if slot.status.load(Ordering::Acquire) == SLOT_PENDING {
                let item = slot.item.load(Ordering::Relaxed);
                slot.result.store(local.sketch.f_query(item), Ordering::Relaxed);
                slot.status.store(SLOT_PROCESSED, Ordering::Release);
                done += 1;
            }
        }
        done
    }

    /// Asks `item`'s owner for its estimate. Weight still buffered anywhere
    /// is not included.
    pub fn f_query(&mut self, item: u64) -> u64 {
        let owner = self.owner(item);
        let shared = Arc::clone(&self.shared);
        let slot = &shared.workers[owner].queries[self.tid];
        slot.item.store(item, Ordering::Relaxed);
        slot.status.store(SLOT_PENDING, Ordering::Release);
        let backoff = Backoff::new();
        while slot.status.load(Ordering::Acquire) != SLOT_PROCESSED {
            if self.process_pending() == 0 {
                backoff.snooze();
            }
        }
        let result = slot.result.load(Ordering::Relaxed);
        slot.status.store(SLOT_EMPTY, Ordering::Relaxed);
        result
    }

    pub fn hh_query(&mut self) -> HeavyHitterReport {
        match self.shared.config.variant {
            Variant::InsertionOptimized => self.hh_query_scan(),
            Variant::QueryOptimized => self.hh_query_global(),
        }
    }

    /// Visits every local sketch once, skipping busy ones and coming back
    /// to them; serves this worker's own queue when a whole pass found
    /// nothing free.
    pub fn hh_query_scan(&mut self) -> HeavyHitterReport {
        let shared = Arc::clone(&self.shared);
        let p = shared.config.threads;
        let mut scanned = vec![false; p];
        let mut remaining = p;
        let mut entries = Vec::new();
        let mut passes = 0;
        let backoff = Backoff::new();
        while remaining > 0 {
            passes += 1;
            let mut progress = false;
            for (tid, worker) in shared.workers.iter().enumerate() {
                if scanned[tid] {
                    continue;
                }
                if let Some(mut local) = try_lock(&worker.local) {
                    let threshold = shared.config.phi * shared.n_processed.load(Ordering::Acquire) as f64;
                    entries.extend(
                        local
                            .sketch
                            .hh_query()
                            .entries()
                            .iter()
                            .filter(|&&(_, c)| c as f64 >= threshold),
                    );
                    scanned[tid] = true;
                    remaining -= 1;
                    progress = true;
                }
            }
            if remaining > 0 && !progress {
                if self.process_pending() == 0 {
                    backoff.snooze();
                }
            }
        }
        self.last_hh_passes = passes;
        HeavyHitterReport::new(entries, shared.n_processed.load(Ordering::Acquire))
    }

    /// Reads the global table; never touches a local sketch.
    ///
    /// # Panics
    ///
    /// If the wrapper was built with the insertion-optimized variant.
    pub fn hh_query_global(&self) -> HeavyHitterReport {
        let global = self
            .shared
            .global
            .as_ref()
            .expect("the global table exists only in the query-optimized variant");
        let mut entries = global.snapshot();
        let n = self.shared.n_processed.load(Ordering::Acquire);
        let threshold = self.shared.config.phi * n as f64;
        entries.retain(|&(_, c)| c as f64 >= threshold);
        HeavyHitterReport::new(entries, n)
    }

    /// Quiescence barrier: hands over every non-empty buffer, then serves
    /// queued work until all `P` workers have arrived. Every worker must call
    /// it, and must not stop calling into its handle before it has.
    pub fn drain(&mut self) {
        for owner in 0..self.buffers.len() {
            if !self.buffers[owner].is_empty() {
                self.flush(owner);
            }
        }
        self.drain_generation += 1;
        let target = self.drain_generation * self.shared.config.threads as u64;
        self.shared.drain_arrivals.fetch_add(1, Ordering::AcqRel);
        let backoff = Backoff::new();
        while self.shared.drain_arrivals.load(Ordering::Acquire) < target {
            if self.process_pending() == 0 {
                backoff.snooze();
            }
        }
    }
}
