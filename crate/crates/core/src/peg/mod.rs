//! Progressive edge growth and its dispersal-efficient variant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{emd, enumerate_g_cycles_capped, TannerGraph, DEFAULT_CYCLE_CAP};
use crate::error::{input_err, Error, Result};
use crate::hitting::greedy_hitting_set;

/// Construction parameters for one Tanner graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PegParams {
    pub num_vns: usize,
    pub num_cns: usize,
    pub vn_degree: usize,
    /// Longest cycle length treated as "bad"; below 4 disables the DE-PEG branch.
    pub g_max: usize,
    pub emd_threshold: usize,
    pub seed: u64,
    #[serde(default = "default_cycle_cap")]
    pub cycle_cap: usize,
}

fn default_cycle_cap() -> usize {
    DEFAULT_CYCLE_CAP
}

impl PegParams {
    /// Defaults used for the four-layer tree: `g_max` 8 for the two bottom layers, 6 above.
    pub fn for_layer(layer: usize, num_vns: usize, rate_num: usize, rate_den: usize, seed: u64) -> PegParams {
        PegParams {
            num_vns,
            num_cns: num_vns * (rate_den - rate_num) / rate_den,
            vn_degree: 4,
            g_max: if layer >= 3 { 8 } else { 6 },
            emd_threshold: 5,
            seed,
            cycle_cap: DEFAULT_CYCLE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_cns == 0 || self.num_cns >= self.num_vns {
            return Err(Error::Params(format!(
                "need 0 < J < M, got J = {}, M = {}",
                self.num_cns, self.num_vns
            )));
        }
        if self.vn_degree == 0 || self.vn_degree > self.num_cns {
            return Err(Error::Params(format!(
                "VN degree {} must lie in 1..={}",
                self.vn_degree, self.num_cns
            )));
        }
        if self.g_max % 2 != 0 {
            return Err(Error::Params(format!("g_max must be even, got {}", self.g_max)));
        }
        if self.cycle_cap == 0 {
            return Err(Error::Params("cycle cap must be positive".into()));
        }
        Ok(())
    }
}

/// Length of the shortest cycle a new edge would close.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn exceeds(self, g_max: usize) -> bool {
        match self {
            Girth::Infinite => true,
            Girth::Finite(g) => g > g_max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidates {
    pub cns: Vec<usize>,
    pub girth: Girth,
}

/// Candidate CNs for the next edge of `v`.
///
/// Unreachable CNs if any (no cycle formed), else the CNs deepest in the BFS
/// tree from `v`; then restricted to those of minimum current degree.
pub fn peg_candidates(g: &TannerGraph, v: usize, d_v: usize) -> Result<Candidates> {
    g.check_vn(v)?;
    if g.vn_degree(v) >= d_v {
        return Err(input_err!("v{v} already has {} of {d_v} edges", g.vn_degree(v)));
    }
    let dist = g.cn_distances_from_vn(v);
    let unreachable: Vec<usize> = (0..g.num_cns()).filter(|&c| dist[c].is_none()).collect();
    let (pool, girth) = if !unreachable.is_empty() {
        (unreachable, Girth::Infinite)
    } else {
        let deepest = dist.iter().flatten().copied().max().unwrap_or(0);
        if deepest <= 1 {
            return Err(Error::Construction(format!("v{v} is already adjacent to every CN")));
        }
        let pool = (0..g.num_cns()).filter(|&c| dist[c] == Some(deepest)).collect();
        (pool, Girth::Finite(deepest + 1))
    };
    let min_deg = pool.iter().map(|&c| g.cn_degree(c)).min().unwrap();
    let cns = pool.into_iter().filter(|&c| g.cn_degree(c) == min_deg).collect();
    Ok(Candidates { cns, girth })
}

/// Size of a greedy hitting set over `cycles`, never picking `v`.
pub fn greedy_size<R: Rng + ?Sized>(cycles: &[&[usize]], v: usize, rng: &mut R) -> usize {
    greedy_hitting_set(cycles, Some(v), rng).len()
}

/// Classical PEG: every edge goes to a uniformly random candidate.
pub fn build_peg(p: &PegParams) -> Result<TannerGraph> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut g = TannerGraph::new(p.num_vns, p.num_cns);
    for v in 0..p.num_vns {
        for _ in 0..p.vn_degree {
            let k = peg_candidates(&g, v, p.vn_degree)?;
            let c = k.cns[rng.random_range(0..k.cns.len())];
            g.add_edge(c, v)?;
        }
    }
    Ok(g)
}

/// A cycle recorded as bad when it was formed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadCycle {
    pub vns: Vec<usize>,
    pub len: usize,
    pub emd: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadCycleLedger {
    pub cycles: Vec<BadCycle>,
}

impl BadCycleLedger {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Count of entries per cycle length.
    pub fn length_histogram(&self) -> Vec<(usize, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for c in &self.cycles {
            *h.entry(c.len).or_insert(0) += 1;
        }
        h.into_iter().collect()
    }
}

/// DE-PEG: among PEG candidates, prefer the CN keeping the greedy cover of
/// low-EMD short cycles smallest.
pub fn build_de_peg(p: &PegParams) -> Result<(TannerGraph, BadCycleLedger)> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut g = TannerGraph::new(p.num_vns, p.num_cns);
    let mut ledger = BadCycleLedger::default();
    for v in 0..p.num_vns {
        for e in 0..p.vn_degree {
            let k = peg_candidates(&g, v, p.vn_degree)?;
            let len = match k.girth {
                girth if girth.exceeds(p.g_max) => {
                    let c = k.cns[rng.random_range(0..k.cns.len())];
                    g.add_edge(c, v)?;
                    continue;
                }
                Girth::Finite(len) => len,
                Girth::Infinite => unreachable!(),
            };

            let mut formed = Vec::with_capacity(k.cns.len());
            let mut scores = Vec::with_capacity(k.cns.len());
            for &c in &k.cns {
                let cycles = enumerate_g_cycles_capped(&g, c, v, len, p.cycle_cap)?;
                if cycles.overflow {
                    return Err(Error::Construction(format!(
                        "more than {} {len}-cycles at v{v}, edge {}",
                        p.cycle_cap,
                        e + 1
                    )));
                }
                let sets: Vec<&[usize]> = ledger
                    .cycles
                    .iter()
                    .map(|b| b.vns.as_slice())
                    .chain(cycles.cycles.iter().map(|cy| cy.vns.as_slice()))
                    .collect();
                scores.push(greedy_size(&sets, v, &mut rng));
                formed.push(cycles.cycles);
            }
            let best = *scores.iter().min().unwrap();
            let ties: Vec<usize> = (0..k.cns.len()).filter(|&i| scores[i] == best).collect();
            let pick = if ties.len() == 1 { ties[0] } else { ties[rng.random_range(0..ties.len())] };
            let c = k.cns[pick];

            g.add_edge(c, v)?;
            for cy in std::mem::take(&mut formed[pick]) {
                let d = emd(&g, &cy.vns)?;
                if d <= p.emd_threshold {
                    ledger.cycles.push(BadCycle { vns: cy.vns, len, emd: d });
                }
            }
        }
    }
    Ok((g, ledger))
}

/// Sidecar written next to a constructed code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionMeta {
    pub algorithm: String,
    pub params: PegParams,
    pub girth: Option<usize>,
    pub ledger_size: usize,
    pub ledger_lengths: Vec<(usize, usize)>,
}

impl ConstructionMeta {
    pub fn new(algorithm: &str, params: &PegParams, g: &TannerGraph, ledger: Option<&BadCycleLedger>) -> Self {
        ConstructionMeta {
            algorithm: algorithm.to_string(),
            params: params.clone(),
            girth: g.girth(),
            ledger_size: ledger.map_or(0, BadCycleLedger::len),
            ledger_lengths: ledger.map(BadCycleLedger::length_histogram).unwrap_or_default(),
        }
    }
}
