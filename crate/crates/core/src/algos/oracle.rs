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

use std::collections::HashMap;

use super::{check_phi, HeavyHitterReport, HeavyHitterSketch};
use crate::SketchError;

/// Exact per-item counts. The ground truth for every accuracy metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOracle {
    counts: HashMap<u64, u64>,
    total: u64,
    phi: f64,
}

impl ExactOracle {
    pub fn new(phi: f64) -> Result<Self, SketchError> {
        check_phi(phi)?;
        Ok(ExactOracle {
            counts: HashMap::new(),
            total: 0,
            phi,
        })
    }

    pub fn counts(&self) -> &HashMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, item: u64) -> u64 {
        self.counts.get(&item).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// `{(e, f(e)) : f(e) >= phi * N}` for any `phi`.
    pub fn hh_set(&self, phi: f64) -> HeavyHitterReport {
        let threshold = phi * self.total as f64;
        let entries = self
            .counts
            .iter()
            .filter(|&(_, &c)| c as f64 >= threshold)
            .map(|(&e, &c)| (e, c))
            .collect();
        HeavyHitterReport::new(entries, self.total)
    }
}

impl HeavyHitterSketch for ExactOracle {
    fn update(&mut self, item: u64, weight: u32) -> Result<u64, SketchError> {
        if weight == 0 {
            return Err(SketchError::ZeroWeight);
        }
        self.total += weight as u64;
        let count = self.counts.entry(item).or_insert(0);
        *count += weight as u64;
        Ok(*count)
    }

    fn f_query(&self, item: u64) -> u64 {
        self.count(item)
    }

    fn hh_query(&mut self) -> HeavyHitterReport {
        self.hh_set(self.phi)
    }

    fn n_processed(&self) -> u64 {
        self.total
    }

    /// Nominal 16 bytes per distinct item.
    fn memory_bytes(&self) -> usize {
        self.counts.len() * 16
    }

    fn phi(&self) -> f64 {
        self.phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_oracle_has_no_heavy_hitters() {
        let mut oracle = ExactOracle::new(0.1).unwrap();
        assert!(oracle.hh_query().is_empty());
    }

    #[test]
    fn threshold_is_inclusive() {
        let mut oracle = ExactOracle::new(0.5).unwrap();
        oracle.update(1, 3).unwrap();
        oracle.update(2, 1).unwrap();
        assert_eq!(oracle.hh_query().entries(), &[(1, 3)]);
        assert_eq!(oracle.n_processed(), 4);
        assert_eq!(oracle.hh_set(0.25).entries(), &[(1, 3), (2, 1)]);
    }
}
