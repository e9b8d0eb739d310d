use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::{peel_erasures, TannerGraph};
use crate::dispersal::{DispersalPlan, Holdings, Phases};
use crate::error::{input_err, Result};

/// A malicious set whose withholding leaves some layer undecodable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub malicious: Vec<usize>,
    pub layer: usize,
    pub residual: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum SearchOutcome {
    Witness(Witness),
    /// `exhaustive` means every malicious set of size `f` was tried.
    NoneFound { tried: u64, exhaustive: bool },
}

/// Per layer, the residual erasures after peeling with only the chunks held
/// outside `malicious`.
pub fn erasure_residuals(holdings: &Holdings, codes: &[TannerGraph], malicious: &[bool]) -> Vec<Vec<usize>> {
    codes
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let mut erased = vec![true; g.num_vns()];
            for (n, h) in holdings.sets.iter().enumerate() {
                if !malicious[n] {
                    for c in h[j].ones().filter(|&c| c < g.num_vns()) {
                        erased[c] = false;
                    }
                }
            }
            peel_erasures(g, &erased)
        })
        .collect()
}

fn check(holdings: &Holdings, codes: &[TannerGraph], set: &[usize]) -> Option<Witness> {
    let mut mask = vec![false; holdings.num_nodes()];
    set.iter().for_each(|&n| mask[n] = true);
    // Retrieval goes top-down, so the first stuck layer is the one reported.
    erasure_residuals(holdings, codes, &mask)
        .into_iter()
        .enumerate()
        .find(|(_, r)| !r.is_empty())
        .map(|(j, residual)| {
            let mut malicious = set.to_vec();
            malicious.sort_unstable();
            Witness { malicious, layer: j + 1, residual }
        })
}

const EXHAUSTIVE_NODES: usize = 20;

/// Looks for `f` nodes that, by voting yes and then withholding everything,
/// leave a committed block unavailable.
///
/// Up to 20 nodes every malicious set is tried. Above that, the holders of
/// each `targets[j]` VN set (typically the small stopping sets of layer
/// `j + 1`) are tried first, then random sets until `budget` sets were checked.
pub fn adversarial_worst_case_search<R: Rng + ?Sized>(
    plan: &DispersalPlan,
    codes: &[TannerGraph],
    targets: &[Vec<Vec<usize>>],
    budget: u64,
    rng: &mut R,
) -> Result<SearchOutcome> {
    if codes.len() != plan.cit.layers {
        return Err(input_err!("{} codes for {} layers", codes.len(), plan.cit.layers));
    }
    let holdings = Holdings::from_plan(plan, Phases::Both)?;
    let n = holdings.num_nodes();
    let f = (plan.oracle.max_faulty() as usize).min(n);
    let mut tried = 0u64;

    if n <= EXHAUSTIVE_NODES {
        let mut set: Vec<usize> = (0..f).collect();
        loop {
            tried += 1;
            if let Some(w) = check(&holdings, codes, &set) {
                return Ok(SearchOutcome::Witness(w));
            }
            if !next_combination(&mut set, n) {
                return Ok(SearchOutcome::NoneFound { tried, exhaustive: true });
            }
        }
    }

    let all: Vec<usize> = (0..n).collect();
    let fill = |base: BTreeSet<usize>, rng: &mut R| {
        let mut rest: Vec<usize> = all.iter().copied().filter(|x| !base.contains(x)).collect();
        rest.shuffle(rng);
        let mut set: Vec<usize> = base.into_iter().collect();
        set.extend(rest.into_iter().take(f.saturating_sub(set.len())));
        set
    };
    for (j, sets) in targets.iter().enumerate().take(codes.len()) {
        for s in sets {
            if tried >= budget {
                return Ok(SearchOutcome::NoneFound { tried, exhaustive: false });
            }
            let holders: BTreeSet<usize> = holdings.holders(s, j + 1).into_iter().collect();
            if holders.len() > f {
                continue;
            }
            tried += 1;
            if let Some(w) = check(&holdings, codes, &fill(holders, rng)) {
                return Ok(SearchOutcome::Witness(w));
            }
        }
    }
    while tried < budget {
        tried += 1;
        let set = fill(BTreeSet::new(), rng);
        if let Some(w) = check(&holdings, codes, &set) {
            return Ok(SearchOutcome::Witness(w));
        }
    }
    Ok(SearchOutcome::NoneFound { tried, exhaustive: false })
}

/// Advances `c` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::tests::small_setup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn combinations_in_order() {
        let mut c = vec![0, 1];
        let mut seen = vec![c.clone()];
        while next_combination(&mut c, 4) {
            seen.push(c.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen.last().unwrap(), &vec![2, 3]);
        let mut e: Vec<usize> = Vec::new();
        assert!(!next_combination(&mut e, 3));
    }

    #[test]
    fn no_faults_no_witness() {
        let (codes, plan) = small_setup(12, (0, 1), (1, 2), 32, 5);
        let r = adversarial_worst_case_search(&plan, &codes, &[], 100, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(r, SearchOutcome::NoneFound { tried: 1, exhaustive: true });
    }

    #[test]
    fn thin_dispersal_is_broken() {
        // one base chunk per node leaves most of the base layer erased
        let (codes, plan) = small_setup(12, (1, 3), (1, 3), 1, 6);
        let r = adversarial_worst_case_search(&plan, &codes, &[], 100, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        match r {
            SearchOutcome::Witness(w) => {
                assert_eq!(w.malicious.len(), 4);
                assert!(!w.residual.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }
}
