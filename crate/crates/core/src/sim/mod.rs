//! In-process simulation of one oracle round: disperse, verify and vote,
//! commit, then retrieve and peel-decode under an adversary.

mod search;

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cit::{build_cit, hash_chunk, verify_chunk, CodedInterleavingTree, LayerShape};
use crate::code::{peel_decode, Chunk, SystematicEncoder, TannerGraph};
use crate::dispersal::{DispersalPlan, Holdings, Phases};
use crate::error::{input_err, Result};

pub use search::{adversarial_worst_case_search, erasure_residuals, SearchOutcome, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotePolicy {
    /// Vote for every proposal.
    Approve,
    /// Never vote.
    Refuse,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WithholdPolicy {
    /// Answer retrieval honestly.
    None,
    All,
    /// Withhold only these `(layer, index)` symbols.
    Subset(BTreeSet<(usize, usize)>),
    /// Return altered bytes for everything held.
    Corrupt,
}

impl WithholdPolicy {
    fn withholds(&self, layer: usize, index: usize) -> bool {
        match self {
            WithholdPolicy::None | WithholdPolicy::Corrupt => false,
            WithholdPolicy::All => true,
            WithholdPolicy::Subset(s) => s.contains(&(layer, index)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryModel {
    pub malicious: BTreeSet<usize>,
    pub vote: VotePolicy,
    pub withhold: WithholdPolicy,
    /// Honest nodes the proposer never sends anything to.
    #[serde(default)]
    pub starved: BTreeSet<usize>,
}

impl AdversaryModel {
    pub fn honest() -> AdversaryModel {
        AdversaryModel {
            malicious: BTreeSet::new(),
            vote: VotePolicy::Approve,
            withhold: WithholdPolicy::None,
            starved: BTreeSet::new(),
        }
    }

    /// Approve everything and then withhold everything.
    pub fn withholding(malicious: impl IntoIterator<Item = usize>) -> AdversaryModel {
        AdversaryModel {
            malicious: malicious.into_iter().collect(),
            vote: VotePolicy::Approve,
            withhold: WithholdPolicy::All,
            starved: BTreeSet::new(),
        }
    }

    pub fn validate(&self, num_nodes: usize, f: u64) -> Result<()> {
        if self.malicious.len() as u64 > f {
            return Err(input_err!("{} malicious nodes exceed f = {f}", self.malicious.len()));
        }
        if let Some(&n) = self.malicious.iter().chain(&self.starved).find(|&&n| n >= num_nodes) {
            return Err(input_err!("node {n} outside 0..{num_nodes}"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum LayerRetrieval {
    Decoded,
    Stuck { residual: Vec<usize> },
    /// Not attempted because a layer above failed.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub committed: bool,
    pub votes: u64,
    pub threshold: u64,
    /// Empty when nothing was committed.
    pub retrieval: Vec<LayerRetrieval>,
    pub available: bool,
    /// Whether the recovered block equals the proposed one, when available.
    pub block_matches: Option<bool>,
    /// Returned symbols the client discarded as inauthentic.
    pub rejected: u64,
}

/// One audit line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub verdict: String,
}

#[derive(Default)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
    enabled: bool,
}

impl Transcript {
    pub fn recording() -> Transcript {
        Transcript { records: Vec::new(), enabled: true }
    }

    pub fn off() -> Transcript {
        Transcript::default()
    }

    fn push(&mut self, event: &str, node: Option<usize>, at: Option<(usize, usize)>, verdict: impl Into<String>) {
        if self.enabled {
            self.records.push(TranscriptRecord {
                event: event.into(),
                node,
                layer: at.map(|a| a.0),
                index: at.map(|a| a.1),
                verdict: verdict.into(),
            });
        }
    }

    /// One JSON object per line.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Messages for one node: `(layer, index)` of every chunk sent with its POM.
fn deliveries(plan: &DispersalPlan) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new(); plan.oracle.num_nodes as usize];
    for a in &plan.secure_assignments {
        for &n in &a.nodes {
            out[n].push((a.layer, a.index));
        }
    }
    for (n, a) in plan.valid_assignments.iter().enumerate() {
        out[n].extend(a.iter().map(|&i| (plan.cit.layers, i)));
    }
    out
}

/// Runs one round for `block`.
///
/// `codes` must already carry the plan's column order, so that chunk indices
/// in the plan name columns of these codes.
pub fn run_round(
    block: &[u8],
    codes: &[TannerGraph],
    plan: &DispersalPlan,
    adversary: &AdversaryModel,
    log: &mut Transcript,
) -> Result<RoundOutcome> {
    let n_nodes = plan.oracle.num_nodes as usize;
    adversary.validate(n_nodes, plan.oracle.max_faulty())?;
    let cit = &plan.cit;
    let tree = build_cit(block, cit, codes)?;
    log.push("propose", None, None, hex::encode(hash_chunk(&Chunk(tree.root.concat()))));

    let mut votes = 0u64;
    for (node, msgs) in deliveries(plan).iter().enumerate() {
        if adversary.malicious.contains(&node) {
            if adversary.vote == VotePolicy::Approve {
                votes += 1;
                log.push("vote", Some(node), None, "approve");
            } else {
                log.push("vote", Some(node), None, "refuse");
            }
            continue;
        }
        if adversary.starved.contains(&node) {
            log.push("vote", Some(node), None, "nothing received");
            continue;
        }
        let mut ok = true;
        for &(layer, index) in msgs {
            let chunk = tree.symbol(layer, index)?;
            let proof = tree.pom(layer, index)?.compact(cit)?;
            let good = verify_chunk(&tree.root, cit, layer, index, chunk, &proof)?;
            log.push("verify", Some(node), Some((layer, index)), if good { "ok" } else { "bad" });
            ok &= good;
        }
        if ok {
            votes += 1;
        }
        log.push("vote", Some(node), None, if ok { "approve" } else { "reject" });
    }
    let threshold = plan.oracle.vote_threshold();
    let committed = votes >= threshold;
    log.push("commit", None, None, format!("{committed} ({votes}/{threshold})"));
    if !committed {
        return Ok(RoundOutcome {
            committed,
            votes,
            threshold,
            retrieval: Vec::new(),
            available: false,
            block_matches: None,
            rejected: 0,
        });
    }

    let mut holdings = Holdings::from_plan(plan, Phases::Both)?;
    for &n in &adversary.starved {
        holdings.sets[n].iter_mut().for_each(|s| s.clear());
    }
    let (retrieval, rejected, decoded) = retrieve(&tree, codes, &holdings, adversary, log)?;
    let available = retrieval.iter().all(|r| *r == LayerRetrieval::Decoded);
    let block_matches = if available {
        let base = decoded.last().unwrap();
        let enc = SystematicEncoder::new(&codes[cit.layers - 1], cit.shapes()?[cit.layers - 1].s)?;
        let mut bytes: Vec<u8> = enc.layout().data_positions.iter().flat_map(|&p| base[p].0.clone()).collect();
        bytes.truncate(block.len());
        Some(bytes == block && *base == tree.layers[cit.layers - 1])
    } else {
        None
    };
    log.push("retrieve", None, None, if available { "available" } else { "unavailable" });
    Ok(RoundOutcome { committed, votes, threshold, retrieval, available, block_matches, rejected })
}

type Retrieved = (Vec<LayerRetrieval>, u64, Vec<Vec<Chunk>>);

/// The client asks every node for everything, authenticates layer 1 against
/// the root and each lower layer against the hashes in the decoded layer above.
fn retrieve(
    tree: &CodedInterleavingTree,
    codes: &[TannerGraph],
    holdings: &Holdings,
    adversary: &AdversaryModel,
    log: &mut Transcript,
) -> Result<Retrieved> {
    let cit = &tree.params;
    let shapes = cit.shapes()?;
    let y = cit.hash_size as usize;
    let mut out = Vec::with_capacity(cit.layers);
    let mut decoded: Vec<Vec<Chunk>> = Vec::new();
    let mut rejected = 0;
    for j in 1..=cit.layers {
        let sh = shapes[j - 1];
        let expected: Vec<Vec<u8>> = if j == 1 {
            tree.root.iter().map(|h| h.to_vec()).collect()
        } else {
            child_hashes(&decoded[j - 2], &shapes[j - 2], sh.n, y)
        };
        let mut known: Vec<Option<Chunk>> = vec![None; sh.n];
        for (node, h) in holdings.sets.iter().enumerate() {
            let bad = adversary.malicious.contains(&node);
            for index in h[j - 1].ones() {
                if known[index].is_some() || (bad && adversary.withhold.withholds(j, index)) {
                    continue;
                }
                let mut c = tree.layers[j - 1][index].clone();
                if bad && adversary.withhold == WithholdPolicy::Corrupt {
                    c.0.iter_mut().for_each(|b| *b ^= 0xa5);
                }
                if hash_chunk(&c)[..] == expected[index][..] {
                    known[index] = Some(c);
                } else {
                    rejected += 1;
                    log.push("reject", Some(node), Some((j, index)), "hash mismatch");
                }
            }
        }
        let res = peel_decode(&codes[j - 1], known)?;
        if res.is_decoded() {
            log.push("decode", None, Some((j, 0)), "decoded");
            out.push(LayerRetrieval::Decoded);
            decoded.push(res.into_codeword().unwrap());
        } else {
            log.push("decode", None, Some((j, 0)), format!("stuck on {} symbols", res.residual.len()));
            out.push(LayerRetrieval::Stuck { residual: res.residual });
            out.resize(cit.layers, LayerRetrieval::Skipped);
            break;
        }
    }
    Ok((out, rejected, decoded))
}

/// Hashes of the `n` child symbols stored in the data part of a decoded parent layer.
fn child_hashes(parent: &[Chunk], shape: &LayerShape, n: usize, y: usize) -> Vec<Vec<u8>> {
    (0..n)
        .map(|x| {
            let (at, slot) = (x % shape.s, x / shape.s);
            parent[at].0[slot * y..(slot + 1) * y].to_vec()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cit::CitParams;
    use crate::dispersal::{plan_valid_phase, OracleParams};
    use crate::fraction::Fraction;
    use crate::peg::{build_peg, PegParams};
    use crate::code::trailing_parity_order;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_setup(n_nodes: u64, beta: (i64, i64), gamma: (i64, i64), k: usize, seed: u64) -> (Vec<TannerGraph>, DispersalPlan) {
        let cit = CitParams { block_size: 4096, layers: 2, base_size: 32, ..CitParams::reference() };
        let codes: Vec<TannerGraph> = cit
            .shapes()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(j, sh)| {
                let g = build_peg(&PegParams::for_layer(j + 1, sh.n, 1, 2, seed)).unwrap();
                let order = trailing_parity_order(&g, &[], &(0..sh.n).collect::<Vec<_>>()).unwrap();
                g.permute_columns(&order).unwrap()
            })
            .collect();
        let oracle = OracleParams {
            num_nodes: n_nodes,
            beta: Fraction::new(beta.0, beta.1),
            gamma: Fraction::new(gamma.0, gamma.1),
            p_th: 1e-6,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let valid = plan_valid_phase(n_nodes as usize, 32, k, &mut rng).unwrap();
        let plan = DispersalPlan {
            cit,
            oracle,
            mu: 1,
            k: k as u64,
            permutations: Vec::new(),
            secure_assignments: Vec::new(),
            valid_assignments: valid,
            fresh: vec![0, 0],
            greedy_sizes: vec![0, 0],
        };
        (codes, plan)
    }

    fn block(seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..4000).map(|_| rng.random()).collect()
    }

    #[test]
    fn honest_round_is_available() {
        let (codes, plan) = small_setup(10, (0, 1), (1, 2), 32, 1);
        let mut log = Transcript::recording();
        let r = run_round(&block(0), &codes, &plan, &AdversaryModel::honest(), &mut log).unwrap();
        assert!(r.committed && r.available);
        assert_eq!(r.block_matches, Some(true));
        assert_eq!(r.votes, 10);
        assert!(log.records.iter().filter(|x| x.event == "verify").all(|x| x.verdict == "ok"));
        let mut buf = Vec::new();
        log.write_jsonl(&mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), log.records.len());
    }

    #[test]
    fn refused_votes_block_the_commit() {
        let (codes, plan) = small_setup(10, (3, 10), (2, 5), 32, 2);
        let adv = AdversaryModel {
            malicious: (0..3).collect(),
            vote: VotePolicy::Refuse,
            withhold: WithholdPolicy::All,
            starved: [5].into_iter().collect(),
        };
        let r = run_round(&block(1), &codes, &plan, &adv, &mut Transcript::off()).unwrap();
        assert!(!r.committed);
        assert!(r.retrieval.is_empty() && !r.available);
        assert_eq!(r.votes, 6);
    }

    #[test]
    fn corrupted_answers_are_discarded() {
        let (codes, plan) = small_setup(10, (3, 10), (2, 5), 32, 3);
        let adv = AdversaryModel { withhold: WithholdPolicy::Corrupt, ..AdversaryModel::withholding(0..3) };
        let r = run_round(&block(2), &codes, &plan, &adv, &mut Transcript::off()).unwrap();
        assert!(r.committed && r.available && r.rejected > 0);
        assert_eq!(r.block_matches, Some(true));
    }

    #[test]
    fn too_many_malicious_nodes_rejected() {
        let (codes, plan) = small_setup(10, (1, 10), (2, 5), 8, 4);
        assert!(run_round(&block(3), &codes, &plan, &AdversaryModel::withholding(0..2), &mut Transcript::off()).is_err());
    }
}
