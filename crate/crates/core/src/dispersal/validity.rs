use fixedbitset::FixedBitSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersal::plan::Holdings;
use crate::error::{input_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityMode {
    /// Proves or refutes validity; `budget` caps search nodes.
    Exhaustive { budget: u64 },
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum ValidityVerdict {
    Valid { expansions: u64 },
    /// `nodes` jointly miss every chunk of `missing`.
    Invalid { missing: Vec<usize>, nodes: Vec<usize> },
    Estimate { trials: u64, violations: u64, p_hat: f64, radius: f64, upper: f64 },
}

impl ValidityVerdict {
    pub fn is_valid(&self) -> bool {
        match self {
            ValidityVerdict::Valid { .. } => true,
            ValidityVerdict::Invalid { .. } => false,
            ValidityVerdict::Estimate { violations, .. } => *violations == 0,
        }
    }
}

/// Whether every `subset_size` nodes jointly hold more than `n - mu` distinct
/// chunks of `layer`.
///
/// Exhaustive mode searches for a set `Z` of `mu` chunks missed by at least
/// `subset_size` nodes: such a `Z` exists iff validity fails.
pub fn check_ss_valid(
    holdings: &Holdings,
    layer: usize,
    n: usize,
    mu: usize,
    subset_size: usize,
    mode: ValidityMode,
) -> Result<ValidityVerdict> {
    if mu == 0 || mu > n {
        return Err(input_err!("need 1 <= mu <= n, got mu = {mu}, n = {n}"));
    }
    if subset_size == 0 || subset_size > holdings.num_nodes() {
        return Err(input_err!("subset size {subset_size} outside 1..={}", holdings.num_nodes()));
    }
    if layer == 0 || holdings.sets.iter().any(|h| h.len() < layer || h[layer - 1].len() < n) {
        return Err(input_err!("holdings do not cover layer {layer} with {n} chunks"));
    }
    match mode {
        ValidityMode::Exhaustive { budget } => exhaustive(holdings, layer, n, mu, subset_size, budget),
        ValidityMode::MonteCarlo { trials, seed } => Ok(monte_carlo(holdings, layer, n, mu, subset_size, trials, seed)),
    }
}

struct Search<'a> {
    holders: &'a [FixedBitSet],
    mu: usize,
    need: usize,
    budget: u64,
    expansions: u64,
    z: Vec<usize>,
}

enum Found {
    Witness(FixedBitSet),
    None,
}

impl Search<'_> {
    fn dfs(&mut self, start: usize, survivors: &FixedBitSet) -> Result<Found> {
        self.expansions += 1;
        if self.expansions > self.budget {
            return Err(Error::Input(format!("exhaustive validity check exceeded {} expansions", self.budget)));
        }
        if self.z.len() == self.mu {
            return Ok(Found::Witness(survivors.clone()));
        }
        let left = self.mu - self.z.len();
        // Chunks no survivor holds are free to add.
        let free: Vec<usize> = (start..self.holders.len())
            .filter(|&c| self.holders[c].is_disjoint(survivors))
            .take(left)
            .collect();
        if free.len() == left {
            self.z.extend(free);
            return Ok(Found::Witness(survivors.clone()));
        }
        for c in start..self.holders.len() {
            if self.holders.len() - c < left {
                break;
            }
            let mut next = survivors.clone();
            next.difference_with(&self.holders[c]);
            if next.count_ones(..) < self.need {
                continue;
            }
            self.z.push(c);
            if let Found::Witness(w) = self.dfs(c + 1, &next)? {
                return Ok(Found::Witness(w));
            }
            self.z.pop();
        }
        Ok(Found::None)
    }
}

fn holders_by_chunk(holdings: &Holdings, layer: usize, n: usize) -> Vec<FixedBitSet> {
    let mut holders = vec![FixedBitSet::with_capacity(holdings.num_nodes()); n];
    for (node, h) in holdings.sets.iter().enumerate() {
        for c in h[layer - 1].ones().filter(|&c| c < n) {
            holders[c].insert(node);
        }
    }
    holders
}

fn exhaustive(holdings: &Holdings, layer: usize, n: usize, mu: usize, need: usize, budget: u64) -> Result<ValidityVerdict> {
    let holders = holders_by_chunk(holdings, layer, n);
    let mut all = FixedBitSet::with_capacity(holdings.num_nodes());
    all.insert_range(..);
    let mut s = Search { holders: &holders, mu, need, budget, expansions: 0, z: Vec::new() };
    match s.dfs(0, &all)? {
        Found::Witness(w) => {
            let mut missing = s.z;
            missing.truncate(mu);
            Ok(ValidityVerdict::Invalid { missing, nodes: w.ones().take(need).collect() })
        }
        Found::None => Ok(ValidityVerdict::Valid { expansions: s.expansions }),
    }
}

const MC_BATCH: u64 = 4096;

fn monte_carlo(holdings: &Holdings, layer: usize, n: usize, mu: usize, need: usize, trials: u64, seed: u64) -> ValidityVerdict {
    let sets: Vec<&FixedBitSet> = holdings.sets.iter().map(|h| &h[layer - 1]).collect();
    let batches = trials.div_ceil(MC_BATCH);
    let violations: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MC_BATCH.min(trials - b * MC_BATCH);
            let mut union = FixedBitSet::with_capacity(n.max(sets.first().map_or(0, |s| s.len())));
            let mut bad = 0;
            for _ in 0..count {
                union.clear();
                for i in rand::seq::index::sample(&mut rng, sets.len(), need) {
                    union.union_with(sets[i]);
                }
                if union.count_ones(..n) <= n - mu {
                    bad += 1;
                }
            }
            bad
        })
        .sum();
    estimate(trials, violations)
}

/// Frequency with a 3-sigma radius; the upper end falls back to the rule of
/// three when nothing was observed.
pub fn estimate(trials: u64, violations: u64) -> ValidityVerdict {
    let t = trials.max(1) as f64;
    let p_hat = violations as f64 / t;
    let radius = 3.0 * (p_hat * (1.0 - p_hat) / t).sqrt();
    let upper = if violations == 0 { 3.0 / t } else { (p_hat + radius).min(1.0) };
    ValidityVerdict::Estimate { trials, violations, p_hat, radius, upper }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersal::plan::plan_valid_phase;

    fn holdings(assign: &[Vec<usize>], n: usize) -> Holdings {
        Holdings {
            sets: assign
                .iter()
                .map(|a| {
                    let mut s = FixedBitSet::with_capacity(n);
                    a.iter().for_each(|&c| s.insert(c));
                    vec![s]
                })
                .collect(),
        }
    }

    const EXH: ValidityMode = ValidityMode::Exhaustive { budget: 10_000_000 };

    #[test]
    fn everything_held_is_valid() {
        let h = holdings(&vec![(0..8).collect(); 6], 8);
        for mu in 1..=8 {
            assert!(check_ss_valid(&h, 1, 8, mu, 2, EXH).unwrap().is_valid());
        }
    }

    fn brute(assign: &[Vec<usize>], n: usize, mu: usize) -> bool {
        let m = assign.len();
        (0..m).all(|a| {
            (a + 1..m).all(|b| {
                let mut u: Vec<usize> = assign[a].iter().chain(&assign[b]).copied().collect();
                u.sort_unstable();
                u.dedup();
                u.len() > n - mu
            })
        })
    }

    #[test]
    fn pairs_match_direct_recount() {
        use rand::SeedableRng;
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = plan_valid_phase(6, 8, 3, &mut rng).unwrap();
            let h = holdings(&a, 8);
            for mu in 1..=8 {
                let v = check_ss_valid(&h, 1, 8, mu, 2, EXH).unwrap();
                assert_eq!(v.is_valid(), brute(&a, 8, mu), "seed {seed} mu {mu}");
                if let ValidityVerdict::Invalid { missing, nodes } = v {
                    assert_eq!((missing.len(), nodes.len()), (mu, 2));
                    assert!(nodes.iter().all(|&x| missing.iter().all(|c| !a[x].contains(c))));
                }
            }
        }
    }

    #[test]
    fn monte_carlo_sees_certain_violations() {
        let h = holdings(&vec![vec![0, 1]; 6], 8);
        let v = check_ss_valid(&h, 1, 8, 4, 2, ValidityMode::MonteCarlo { trials: 1000, seed: 0 }).unwrap();
        assert_eq!(v, estimate(1000, 1000));
        let h = holdings(&vec![(0..8).collect(); 6], 8);
        let v = check_ss_valid(&h, 1, 8, 4, 2, ValidityMode::MonteCarlo { trials: 1000, seed: 0 }).unwrap();
        assert!(matches!(v, ValidityVerdict::Estimate { violations: 0, upper, .. } if (upper - 0.003).abs() < 1e-12));
    }

    #[test]
    fn budget_overflow_is_an_error() {
        let h = holdings(&vec![vec![]; 30], 30);
        // every node misses everything, so the free shortcut fires at once
        assert!(!check_ss_valid(&h, 1, 30, 10, 5, ValidityMode::Exhaustive { budget: 1 }).unwrap().is_valid());
        let a: Vec<Vec<usize>> = (0..30).map(|i| (0..30).filter(|c| c % 30 != i).collect()).collect();
        let h = holdings(&a, 30);
        assert!(check_ss_valid(&h, 1, 30, 10, 1, ValidityMode::Exhaustive { budget: 3 }).is_err());
    }
}
