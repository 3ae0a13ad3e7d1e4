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

use std::collections::{HashMap, HashSet};

use chk_core::streamgen::{gen_zipf, ZipfSpec};
use chk_core::{ChkSketch, ExactOracle, HeavyHitterSketch, SketchConfig, StreamTuple};
use proptest::prelude::*;

fn config(buckets: usize, seed: u64) -> SketchConfig {
    SketchConfig {
        buckets_per_table: buckets,
        seed,
        ..SketchConfig::default()
    }
}

fn stream_strategy() -> impl Strategy<Value = Vec<(u64, u32)>> {
    prop::collection::vec((0u64..300, 1u32..40), 1..2000)
}

fn exact_counts(stream: &[StreamTuple]) -> HashMap<u64, u64> {
    let mut m = HashMap::new();
    for t in stream {
        *m.entry(t.item).or_insert(0) += t.weight as u64;
    }
    m
}

proptest! {
    #[test]
    fn lobby_counters_never_exceed_threshold(stream in stream_strategy(), seed in any::<u64>()) {
        let mut sketch = ChkSketch::new(SketchConfig { use_early_placement: false, ..config(8, seed) }).unwrap();
        let l = sketch.config().lobby_threshold;
        for (item, w) in stream {
            sketch.update(item, w).unwrap();
            for t in 0..2 {
                prop_assert!(sketch.buckets(t).iter().all(|b| b.lobby.counter <= l));
                prop_assert!(sketch.buckets(t).iter().all(|b| b.lobby.fingerprint != 0 || b.lobby.counter == 0));
            }
        }
    }

    #[test]
    fn n_matches_oracle_total(stream in stream_strategy(), seed in any::<u64>()) {
        let mut sketch = ChkSketch::new(config(16, seed)).unwrap();
        let mut oracle = ExactOracle::new(0.01).unwrap();
        for (item, w) in stream {
            sketch.update(item, w).unwrap();
            oracle.update(item, w).unwrap();
        }
        prop_assert_eq!(sketch.n_processed(), oracle.n_processed());
    }

    #[test]
    fn same_seed_same_state(stream in stream_strategy(), seed in any::<u64>()) {
        let mut a = ChkSketch::new(config(8, seed)).unwrap();
        let mut b = ChkSketch::new(config(8, seed)).unwrap();
        for &(item, w) in &stream {
            prop_assert_eq!(a.update(item, w).unwrap(), b.update(item, w).unwrap());
        }
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.hh_query(), b.hh_query());
        for item in 0..300 {
            prop_assert_eq!(a.f_query(item), b.f_query(item));
        }
    }

    #[test]
    fn distinct_items_without_overflow_are_exact(
        items in prop::collection::hash_set(any::<u64>(), 1..=128),
        weights in prop::collection::vec(1u32..500, 400),
        seed in any::<u64>(),
    ) {
        let mut sketch = ChkSketch::new(config(64, seed)).unwrap();
        let items: Vec<u64> = items.into_iter().collect();
        let slots = sketch.config().heavy_slots_per_bucket;

        // Reject inputs where two items share a fingerprint and a bucket, or
        // where greedy first-fit placement would overflow both candidates.
        let mut seen = HashSet::new();
        let mut load = [vec![0usize; 64], vec![0usize; 64]];
        for &e in &items {
            let (fp, i0, i1) = sketch.generate_fp_and_indexes(e);
            prop_assume!(seen.insert((0, i0, fp)) && seen.insert((1, i1, fp)));
            if load[0][i0] < slots {
                load[0][i0] += 1;
            } else {
                prop_assume!(load[1][i1] < slots);
                load[1][i1] += 1;
            }
        }

        let mut truth = HashMap::new();
        for (k, &w) in weights.iter().enumerate() {
            let e = items[k % items.len()];
            sketch.update(e, w).unwrap();
            *truth.entry(e).or_insert(0u64) += w as u64;
        }
        for (e, f) in truth {
            prop_assert_eq!(sketch.f_query(e), f);
        }
    }
}

#[test]
fn thirty_two_heavy_items_are_exact() {
    let mut sketch = ChkSketch::new(config(64, 42)).unwrap();
    for item in 1..=32u64 {
        sketch.update(item, 1000).unwrap();
    }
    for item in 1..=32u64 {
        assert_eq!(sketch.f_query(item), 1000, "item {item}");
    }
}

struct Bounds {
    bad_error: [u64; 2],
    heavy_part_items: u64,
    missed_hh: u64,
    true_hh: u64,
}

const EPSILONS: [f64; 2] = [0.001, 0.0005];

fn measure(buckets: usize, runs: u64, n: usize, phi: f64) -> Bounds {
    let mut out = Bounds {
        bad_error: [0; 2],
        heavy_part_items: 0,
        missed_hh: 0,
        true_hh: 0,
    };
    for run in 0..runs {
        let stream = gen_zipf(&ZipfSpec {
            universe_size: 100_000,
            skew: 1.2,
            count: n,
            seed: 1000 + run,
        })
        .unwrap();
        let mut sketch = ChkSketch::new(SketchConfig { phi, ..config(buckets, run) }).unwrap();
        for t in &stream {
            sketch.update(t.item, t.weight).unwrap();
        }
        let truth = exact_counts(&stream);
        let big_n = n as f64;
        for (&e, &f) in &truth {
            let est = sketch.f_query(e);
            if est > 0 {
                out.heavy_part_items += 1;
                for (k, eps) in EPSILONS.iter().enumerate() {
                    if est.abs_diff(f) as f64 >= eps * big_n {
                        out.bad_error[k] += 1;
                    }
                }
            }
            if f as f64 >= phi * big_n {
                out.true_hh += 1;
                if est == 0 {
                    out.missed_hh += 1;
                }
            }
        }
    }
    out
}

fn within(observed: u64, total: u64, bound: f64) -> bool {
    if bound >= 1.0 {
        return true;
    }
    let p = observed as f64 / total as f64;
    let sigma = (bound * (1.0 - bound) / total as f64).sqrt();
    p <= bound + 3.0 * sigma
}

#[test]
fn estimation_error_and_promotion_bounds() {
    // A large table keeps 1 / (eps * B) well below 1.
    let buckets = 8192;
    let phi = 0.0005;
    let m = measure(buckets, 10, 200_000, phi);
    for (k, eps) in EPSILONS.iter().enumerate() {
        let bound = 1.0 / (eps * buckets as f64);
        assert!(
            within(m.bad_error[k], m.heavy_part_items, bound),
            "eps {eps}: {} of {} above bound {bound}",
            m.bad_error[k],
            m.heavy_part_items
        );
    }
    let bound = 1.0 / (phi * buckets as f64);
    assert!(within(m.missed_hh, m.true_hh, bound), "{} of {} missed", m.missed_hh, m.true_hh);
}

#[test]
fn zipf_heavy_part_estimates_are_close() {
    let stream = gen_zipf(&ZipfSpec {
        universe_size: 100_000,
        skew: 1.2,
        count: 10_000,
        seed: 3,
    })
    .unwrap();
    let mut sketch = ChkSketch::new(config(128, 3)).unwrap();
    for t in &stream {
        sketch.update(t.item, t.weight).unwrap();
    }
    let truth = exact_counts(&stream);
    let eps_n = 0.001 * 10_000.0;
    let resident: Vec<(u64, u64)> = truth
        .iter()
        .map(|(&e, &f)| (sketch.f_query(e), f))
        .filter(|&(est, _)| est > 0)
        .collect();
    let bad = resident.iter().filter(|(est, f)| est.abs_diff(*f) as f64 >= eps_n).count();
    assert!(!resident.is_empty());
    assert!((bad as f64) / (resident.len() as f64) <= 1.0 / (0.001 * 128.0));
}

#[test]
fn heavy_hitters_of_a_skewed_stream_are_found() {
    let stream = gen_zipf(&ZipfSpec {
        universe_size: 100_000,
        skew: 1.2,
        count: 200_000,
        seed: 8,
    })
    .unwrap();
    let phi = 0.001;
    let mut sketch = ChkSketch::new(SketchConfig { phi, ..config(1024, 8) }).unwrap();
    let mut oracle = ExactOracle::new(phi).unwrap();
    for t in &stream {
        sketch.update(t.item, t.weight).unwrap();
        oracle.update(t.item, t.weight).unwrap();
    }
    let report = sketch.hh_query();
    let truth = oracle.hh_query();
    assert_eq!(report.n_processed(), 200_000);
    for &(e, _) in truth.entries() {
        assert!(report.contains(e), "missed {e}");
    }
    for &(_, c) in report.entries() {
        assert!(c as f64 >= phi * 200_000.0);
    }
}
