use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cit::{CitParams, LayerShape};
use crate::code::{trailing_parity_order, TannerGraph};
use crate::dispersal::prob::{entropy_he, k_star};
use crate::error::{input_err, Error, Result};
use crate::fraction::Fraction;
use crate::stopping::StoppingSetReport;

/// Oracle population and adversary fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub num_nodes: u64,
    pub beta: Fraction,
    pub gamma: Fraction,
    pub p_th: f64,
}

impl OracleParams {
    pub fn validate(&self) -> Result<()> {
        let half = Fraction::new(1, 2);
        if self.num_nodes == 0 {
            return Err(Error::Params("need at least one oracle node".into()));
        }
        if self.beta >= half {
            return Err(Error::Params(format!("beta = {} must be below 1/2", self.beta)));
        }
        if self.gamma.is_zero() || self.gamma > self.beta.one_minus_twice() {
            return Err(Error::Params(format!(
                "gamma = {} must lie in (0, 1 - 2 beta = {}]",
                self.gamma,
                self.beta.one_minus_twice()
            )));
        }
        if !(self.p_th > 0.0 && self.p_th < 1.0) {
            return Err(Error::Params(format!("p_th = {} must lie in (0, 1)", self.p_th)));
        }
        if 2 * self.max_faulty() >= self.num_nodes {
            return Err(Error::Params("f must stay below N / 2".into()));
        }
        Ok(())
    }

    /// `f = ceil(beta N)`.
    pub fn max_faulty(&self) -> u64 {
        self.beta.ceil_mul(self.num_nodes)
    }

    /// Nodes per validity subset and drawings in the bound: `ceil(gamma N)`.
    pub fn draws(&self) -> u64 {
        self.gamma.ceil_mul(self.num_nodes)
    }

    /// `ceil((1 - 2 beta) N)` evaluated in doubles, which can round up one
    /// more than the exact value. Diagnostics only.
    pub fn draws_ieee754(&self) -> u64 {
        ((1.0 - 2.0 * self.beta.to_f64()) * self.num_nodes as f64).ceil() as u64
    }

    /// Votes needed to commit: `ceil((gamma + beta) N)`.
    pub fn vote_threshold(&self) -> u64 {
        (self.gamma + self.beta).ceil_mul(self.num_nodes)
    }

    pub fn he_gamma(&self) -> f64 {
        entropy_he(self.gamma.to_f64())
    }
}

/// One chunk sent with its POM to `f + 1` nodes in the secure phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecureAssignment {
    /// 1-based layer.
    pub layer: usize,
    pub index: usize,
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurePhase {
    /// Per layer, new column `i` is old column `permutations[j][i]`.
    pub permutations: Vec<Vec<usize>>,
    pub assignments: Vec<SecureAssignment>,
    /// Chunks newly sent per layer, `fresh[j]` for layer `j + 1`.
    pub fresh: Vec<usize>,
    pub greedy_sizes: Vec<usize>,
}

/// Column permutation placing `cover` first, the rest shuffled, with a
/// spanning parity set moved to the trailing columns.
pub fn secure_permutation<R: Rng + ?Sized>(
    g: &TannerGraph,
    cover: &[usize],
    shape: &LayerShape,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if cover.len() > shape.s {
        return Err(Error::Unsupported(format!(
            "greedy cover of {} VNs exceeds the {} data positions",
            cover.len(),
            shape.s
        )));
    }
    let mut in_cover = vec![false; g.num_vns()];
    for &v in cover {
        g.check_vn(v)?;
        if std::mem::replace(&mut in_cover[v], true) {
            return Err(input_err!("v{v} repeated in the greedy cover"));
        }
    }
    let mut rest: Vec<usize> = (0..g.num_vns()).filter(|&v| !in_cover[v]).collect();
    rest.shuffle(rng);
    trailing_parity_order(g, cover, &rest)
}

/// Inverse of a column order: `position[old] = new`.
pub fn inverse_permutation(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    pos
}

/// Re-labels VN sets after the columns were reordered by `order`.
pub fn relabel_sets(sets: &[Vec<usize>], order: &[usize]) -> Vec<Vec<usize>> {
    let pos = inverse_permutation(order);
    sets.iter()
        .map(|s| {
            let mut t: Vec<usize> = s.iter().map(|&v| pos[v]).collect();
            t.sort_unstable();
            t
        })
        .collect()
}

/// POM symbol indices at every layer above `layer`, top first.
fn pom_targets(shapes: &[LayerShape], layer: usize, index: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    shapes[..layer - 1]
        .iter()
        .enumerate()
        .map(move |(j, sh)| (j + 1, index % sh.s, sh.s + index % sh.p))
}

/// Secure phase: permute each code so its greedy cover comes first, then
/// walk from the base layer up, sending every unmarked cover chunk to `f + 1`
/// random nodes and marking its POM symbols as dispersed.
pub fn plan_secure_phase<R: Rng + ?Sized>(
    codes: &[TannerGraph],
    reports: &[StoppingSetReport],
    cit: &CitParams,
    oracle: &OracleParams,
    allow_partial: bool,
    rng: &mut R,
) -> Result<SecurePhase> {
    oracle.validate()?;
    let shapes = cit.shapes()?;
    if codes.len() != cit.layers || reports.len() != cit.layers {
        return Err(input_err!("need one code and one report per layer ({} layers)", cit.layers));
    }
    if let Some(j) = reports.iter().position(|r| !r.exhaustive) {
        if !allow_partial {
            return Err(input_err!("stopping-set report for layer {} is not exhaustive", j + 1));
        }
    }
    let mut permutations = Vec::with_capacity(cit.layers);
    for j in 0..cit.layers {
        if codes[j].num_vns() != shapes[j].n {
            return Err(input_err!("code for layer {} has {} VNs, expected {}", j + 1, codes[j].num_vns(), shapes[j].n));
        }
        permutations.push(secure_permutation(&codes[j], &reports[j].greedy_cover, &shapes[j], rng)?);
    }

    let n_nodes = oracle.num_nodes as usize;
    let copies = oracle.max_faulty() as usize + 1;
    let mut dispersed: Vec<Vec<bool>> = shapes.iter().map(|sh| vec![false; sh.n]).collect();
    let mut assignments = Vec::new();
    let mut fresh = vec![0; cit.layers];
    for layer in (1..=cit.layers).rev() {
        for index in 0..reports[layer - 1].greedy_cover.len() {
            if dispersed[layer - 1][index] {
                continue;
            }
            let mut nodes = rand::seq::index::sample(rng, n_nodes, copies).into_vec();
            nodes.sort_unstable();
            assignments.push(SecureAssignment { layer, index, nodes });
            fresh[layer - 1] += 1;
            dispersed[layer - 1][index] = true;
            for (j, d, p) in pom_targets(&shapes, layer, index) {
                dispersed[j - 1][d] = true;
                dispersed[j - 1][p] = true;
            }
        }
    }
    Ok(SecurePhase {
        permutations,
        assignments,
        fresh,
        greedy_sizes: reports.iter().map(|r| r.greedy_cover.len()).collect(),
    })
}

/// Valid phase: each node gets an independent uniform k-subset of the base layer.
pub fn plan_valid_phase<R: Rng + ?Sized>(num_nodes: usize, m: usize, k: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if k > m {
        return Err(input_err!("k = {k} exceeds M = {m}"));
    }
    Ok((0..num_nodes)
        .map(|_| {
            let mut a = rand::seq::index::sample(rng, m, k).into_vec();
            a.sort_unstable();
            a
        })
        .collect())
}

/// Everything the protocol sends: permutations, secure and valid assignments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersalPlan {
    pub cit: CitParams,
    pub oracle: OracleParams,
    pub mu: u64,
    pub k: u64,
    pub permutations: Vec<Vec<usize>>,
    pub secure_assignments: Vec<SecureAssignment>,
    pub valid_assignments: Vec<Vec<usize>>,
    pub fresh: Vec<usize>,
    pub greedy_sizes: Vec<usize>,
}

/// Builds the full two-phase plan. `k` defaults to k*(mu) for the base layer.
pub fn plan_dispersal<R: Rng + ?Sized>(
    codes: &[TannerGraph],
    reports: &[StoppingSetReport],
    cit: &CitParams,
    oracle: &OracleParams,
    mu: u64,
    k: Option<u64>,
    allow_partial: bool,
    rng: &mut R,
) -> Result<DispersalPlan> {
    let m = cit.base_size;
    let k = match k {
        Some(k) => k,
        None => k_star(mu, oracle.num_nodes, m, oracle.gamma.to_f64(), oracle.draws(), oracle.p_th)?.k,
    };
    let secure = plan_secure_phase(codes, reports, cit, oracle, allow_partial, rng)?;
    let valid = plan_valid_phase(oracle.num_nodes as usize, m as usize, k as usize, rng)?;
    Ok(DispersalPlan {
        cit: cit.clone(),
        oracle: oracle.clone(),
        mu,
        k,
        permutations: secure.permutations,
        secure_assignments: secure.assignments,
        valid_assignments: valid,
        fresh: secure.fresh,
        greedy_sizes: secure.greedy_sizes,
    })
}

impl DispersalPlan {
    /// The same plan with the secure phase dropped.
    pub fn without_secure_phase(&self) -> DispersalPlan {
        DispersalPlan { secure_assignments: Vec::new(), fresh: vec![0; self.fresh.len()], ..self.clone() }
    }

    /// Codes with this plan's column order applied.
    pub fn permuted_codes(&self, codes: &[TannerGraph]) -> Result<Vec<TannerGraph>> {
        codes.iter().zip(&self.permutations).map(|(g, p)| g.permute_columns(p)).collect()
    }
}

/// Which chunks of which layer each node ends up holding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Holdings {
    /// `sets[node][layer - 1]`.
    pub sets: Vec<Vec<FixedBitSet>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phases {
    Both,
    ValidOnly,
    SecureOnly,
}

impl Holdings {
    /// Chunks held per node, counting every POM symbol that travelled with a chunk.
    pub fn from_plan(plan: &DispersalPlan, phases: Phases) -> Result<Holdings> {
        let shapes = plan.cit.shapes()?;
        let empty: Vec<FixedBitSet> = shapes.iter().map(|sh| FixedBitSet::with_capacity(sh.n)).collect();
        let mut sets = vec![empty; plan.oracle.num_nodes as usize];
        let mut give = |node: usize, layer: usize, index: usize| {
            let h = &mut sets[node];
            h[layer - 1].insert(index);
            for (j, d, p) in pom_targets(&shapes, layer, index) {
                h[j - 1].insert(d);
                h[j - 1].insert(p);
            }
        };
        if phases != Phases::ValidOnly {
            for a in &plan.secure_assignments {
                for &node in &a.nodes {
                    give(node, a.layer, a.index);
                }
            }
        }
        if phases != Phases::SecureOnly {
            for (node, a) in plan.valid_assignments.iter().enumerate() {
                for &i in a {
                    give(node, plan.cit.layers, i);
                }
            }
        }
        Ok(Holdings { sets })
    }

    pub fn num_nodes(&self) -> usize {
        self.sets.len()
    }

    /// Nodes holding at least one chunk of `s` at `layer`.
    pub fn holders(&self, s: &[usize], layer: usize) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&n| s.iter().any(|&v| self.sets[n][layer - 1].contains(v)))
            .collect()
    }
}

/// Whether at least `f + 1` nodes hold some chunk of `s` at `layer`.
pub fn is_securely_dispersed(s: &[usize], holdings: &Holdings, layer: usize, f: u64) -> bool {
    holdings.holders(s, layer).len() as u64 > f
}
