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

//! Tabulated count-with-exponential-decay.
//!
//! A lobby counter `C` loses one unit with probability `b^-C` per colliding
//! unit update. `de[k] = de[k-1] + b^k` is the expected number of colliding
//! units needed to take a counter from `k` to zero, which lets a weighted
//! collision be resolved with a table lookup instead of `w` coin flips.

use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    base: f64,
    /// `de[k]` for `k` in `0..=L`.
    expected: Vec<f64>,
    /// `b^-k` for `k` in `0..=L`.
    decrement_prob: Vec<f64>,
}

/// Result of decaying a lobby counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayOutcome {
    /// The counter survived with this value (at least 1).
    Remaining(u8),
    /// The counter reached zero. `leftover` is the incoming weight not needed
    /// to get there, rounded down.
    Expired { leftover: u32 },
}

impl DecayOutcome {
    pub fn counter(self) -> u8 {
        match self {
            DecayOutcome::Remaining(c) => c,
            DecayOutcome::Expired { .. } => 0,
        }
    }
}

impl DecayTable {
    pub fn new(lobby_threshold: u8, base: f64) -> Self {
        let len = lobby_threshold as usize + 1;
        let mut expected = Vec::with_capacity(len);
        let mut decrement_prob = Vec::with_capacity(len);
        expected.push(0.0);
        decrement_prob.push(1.0);
        let mut power = 1.0;
        for k in 1..len {
            power *= base;
            expected.push(expected[k - 1] + power);
            decrement_prob.push(1.0 / power);
        }
        DecayTable {
            base,
            expected,
            decrement_prob,
        }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Highest counter value covered by the table (`L`).
    pub fn max_counter(&self) -> u8 {
        (self.expected.len() - 1) as u8
    }

    /// Expected decays to take a counter from `k` to zero.
    pub fn expected_decays(&self, k: u8) -> f64 {
        self.expected[k as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.expected
    }

    /// Applies `weight` colliding units to a counter holding `counter`.
    ///
    /// # Panics
    ///
    /// If `counter` is zero or above `L`, or `weight` is zero.
    pub fn decay<R: Rng + ?Sized>(&self, counter: u8, weight: u32, rng: &mut R) -> DecayOutcome {
        assert!(
            counter >= 1 && counter <= self.max_counter(),
            "decay of counter {counter} outside 1..={}",
            self.max_counter()
        );
        assert!(weight >= 1, "decay with zero weight");
        let c = counter as usize;

        if weight == 1 {
            return if rng.gen::<f64>() < self.decrement_prob[c] {
                step_down(counter, 0)
            } else {
                DecayOutcome::Remaining(counter)
            };
        }

        let w = weight as f64;
        if w >= self.expected[c] {
            return DecayOutcome::Expired {
                leftover: (w - self.expected[c]).floor() as u32,
            };
        }

        // de[C] - w lands in [de[i], de[i+1]); round to i or i+1 so the
        // expectation interpolates linearly between them. When i + 1 == C this
        // is a single decrement with probability w / (de[C] - de[C-1]).
        let target = self.expected[c] - w;
        let lower = self.expected[..c].partition_point(|&d| d <= target) - 1;
        let span = self.expected[lower + 1] - self.expected[lower];
        let up = (target - self.expected[lower]) / span;
        let value = if rng.gen::<f64>() < up { lower + 1 } else { lower };
        if value == 0 {
            DecayOutcome::Expired { leftover: 0 }
        } else {
            DecayOutcome::Remaining(value as u8)
        }
    }
}

fn step_down(counter: u8, leftover: u32) -> DecayOutcome {
    if counter == 1 {
        DecayOutcome::Expired { leftover }
    } else {
        DecayOutcome::Remaining(counter - 1)
    }
}

/// Closed-form expected counter after `weight` unit decays starting at
/// `counter`: `log_b(b^C - w (b - 1) / b)`. May be negative or NaN once the
/// weight exceeds what the counter can absorb.
pub fn expected_counter_after(base: f64, counter: u8, weight: f64) -> f64 {
    let inner = base.powi(counter as i32) - weight * (base - 1.0) / base;
    inner.ln() / base.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::SeedableRng;

    // Independent reference: one Bernoulli trial per unit of weight.
    fn sequential_unit_decays(counter: u8, weight: u32, base: f64, rng: &mut SmallRng) -> u8 {
        let mut c = counter;
        for _ in 0..weight {
            if c == 0 {
                break;
            }
            if rng.gen::<f64>() < base.powi(-(c as i32)) {
                c -= 1;
            }
        }
        c
    }

    #[test]
    fn table_values_for_default_base() {
        let table = DecayTable::new(16, 1.08);
        let de = table.as_slice();
        assert_eq!(de[0], 0.0);
        assert!((de[1] - 1.08).abs() < 1e-4);
        assert!((de[2] - 2.2464).abs() < 1e-4);
        assert!((de[3] - 3.5061).abs() < 1e-4);
    }

    #[test]
    fn table_matches_geometric_sum() {
        for &b in &[1.01, 1.08, 1.5, 2.0, 3.0] {
            let table = DecayTable::new(32, b);
            let de = table.as_slice();
            for k in 1..=32 {
                let closed = b * (b.powi(k) - 1.0) / (b - 1.0);
                assert!((de[k as usize] - closed).abs() <= 1e-9 * de[k as usize]);
                assert!(de[k as usize] > de[k as usize - 1]);
            }
        }
    }

    #[test]
    fn weight_covering_expected_decays_expires() {
        let table = DecayTable::new(16, 1.08);
        let mut rng = SmallRng::seed_from_u64(1);
        for c in 1..=16u8 {
            let w = table.expected_decays(c).ceil() as u32;
            for _ in 0..100 {
                let outcome = table.decay(c, w, &mut rng);
                assert!(matches!(outcome, DecayOutcome::Expired { .. }), "C={c}");
                assert_eq!(outcome.counter(), 0);
            }
        }
    }

    #[test]
    fn leftover_is_rounded_down() {
        let table = DecayTable::new(16, 1.08);
        let mut rng = SmallRng::seed_from_u64(1);
        // de[3] = 3.5061
        assert_eq!(
            table.decay(3, 10, &mut rng),
            DecayOutcome::Expired { leftover: 6 }
        );
    }

    #[test]
    fn never_increases_the_counter() {
        let table = DecayTable::new(16, 1.08);
        let mut rng = SmallRng::seed_from_u64(2);
        for c in 1..=16u8 {
            for w in 1..60u32 {
                assert!(table.decay(c, w, &mut rng).counter() <= c);
            }
        }
    }

    #[test]
    #[should_panic]
    fn zero_counter_is_a_contract_violation() {
        let table = DecayTable::new(16, 1.08);
        table.decay(0, 1, &mut SmallRng::seed_from_u64(0));
    }

    #[test]
    #[should_panic]
    fn counter_above_threshold_is_a_contract_violation() {
        let table = DecayTable::new(16, 1.08);
        table.decay(17, 1, &mut SmallRng::seed_from_u64(0));
    }

    #[test]
    fn unit_decay_probability() {
        let table = DecayTable::new(16, 1.08);
        let mut rng = SmallRng::seed_from_u64(3);
        let trials = 200_000;
        let hits = (0..trials)
            .filter(|_| table.decay(4, 1, &mut rng) == DecayOutcome::Remaining(3))
            .count();
        let p = 1.08f64.powi(-4);
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn monte_carlo_mean_matches_closed_form_at_half_budget() {
        // C = 16, w = de[16] / 2, default base.
        let table = DecayTable::new(16, 1.08);
        let w = (table.expected_decays(16) / 2.0).round() as u32;
        let expected = expected_counter_after(1.08, 16, w as f64);
        let mut rng = SmallRng::seed_from_u64(4);
        let trials = 100_000;
        let mut unit_sum = 0u64;
        for _ in 0..trials {
            unit_sum += sequential_unit_decays(16, w, 1.08, &mut rng) as u64;
        }
        let unit_mean = unit_sum as f64 / trials as f64;
        assert!((unit_mean - expected).abs() <= 0.5, "{unit_mean} vs {expected}");
    }

    #[test]
    fn weighted_matches_sequential_for_default_base() {
        let table = DecayTable::new(16, 1.08);
        let mut rng = SmallRng::seed_from_u64(5);
        let trials = 100_000;
        for c in [2u8, 4, 8, 12, 16] {
            // Close to full decay the tabulated method follows the closed
            // form, which drifts from the unit-step mean (about 0.57 at
            // C=16, w=30).
            for w in [2u32, 3, 5, 9, 17, 30]
                .into_iter()
                .filter(|&w| w as f64 <= 0.8 * table.expected_decays(c))
            {
                let mut weighted = 0u64;
                let mut sequential = 0u64;
                for _ in 0..trials {
                    weighted += table.decay(c, w, &mut rng).counter() as u64;
                    sequential += sequential_unit_decays(c, w, 1.08, &mut rng) as u64;
                }
                let diff = (weighted as f64 - sequential as f64) / trials as f64;
                assert!(diff.abs() <= 0.5, "C={c} w={w} diff={diff}");
            }
        }
    }
}
