//! Iterative erasure (peeling) decoding.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::code::{Chunk, TannerGraph};
use crate::error::{input_err, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeelStatus {
    Decoded,
    Stuck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelingOutcome {
    pub status: PeelStatus,
    /// Every position, `None` where still erased.
    pub chunks: Vec<Option<Chunk>>,
    /// Erased VNs at the fixpoint; non-empty iff stuck.
    pub residual: Vec<usize>,
    /// CNs whose neighbourhood is fully known but does not XOR to zero.
    pub parity_violations: Vec<usize>,
}

impl PeelingOutcome {
    pub fn is_decoded(&self) -> bool {
        self.status == PeelStatus::Decoded
    }

    /// The full codeword, if decoding finished.
    pub fn into_codeword(self) -> Option<Vec<Chunk>> {
        self.chunks.into_iter().collect()
    }
}

/// Peels `known` (one entry per VN, `None` = erased) to a fixpoint.
pub fn peel_decode(g: &TannerGraph, known: Vec<Option<Chunk>>) -> Result<PeelingOutcome> {
    if known.len() != g.num_vns() {
        return Err(input_err!("{} positions given for a length-{} code", known.len(), g.num_vns()));
    }
    let size = known.iter().flatten().map(Chunk::len).next().unwrap_or(0);
    if known.iter().flatten().any(|c| c.len() != size) {
        return Err(input_err!("known chunks differ in length"));
    }
    let mut chunks = known;
    let mut erased_count: Vec<usize> = (0..g.num_cns())
        .map(|c| g.cn_neighbors(c).iter().filter(|&&v| chunks[v].is_none()).count())
        .collect();
    let mut queue: VecDeque<usize> = (0..g.num_cns()).filter(|&c| erased_count[c] == 1).collect();
    while let Some(c) = queue.pop_front() {
        if erased_count[c] != 1 {
            continue;
        }
        let mut acc = Chunk::zeros(size);
        let mut target = None;
        for &v in g.cn_neighbors(c) {
            match &chunks[v] {
                Some(x) => acc.xor_assign(x),
                None => target = Some(v),
            }
        }
        let v = target.expect("CN with one erased neighbour");
        chunks[v] = Some(acc);
        for &c2 in g.vn_neighbors(v) {
            erased_count[c2] -= 1;
            if erased_count[c2] == 1 {
                queue.push_back(c2);
            }
        }
    }

    let residual: Vec<usize> = (0..g.num_vns()).filter(|&v| chunks[v].is_none()).collect();
    let parity_violations = (0..g.num_cns())
        .filter(|&c| erased_count[c] == 0)
        .filter(|&c| {
            let mut acc = Chunk::zeros(size);
            for &v in g.cn_neighbors(c) {
                acc.xor_assign(chunks[v].as_ref().unwrap());
            }
            !acc.is_zero()
        })
        .collect();
    Ok(PeelingOutcome {
        status: if residual.is_empty() { PeelStatus::Decoded } else { PeelStatus::Stuck },
        chunks,
        residual,
        parity_violations,
    })
}

/// Erasure-pattern-only peeling: returns the residual erased set (empty = decodable).
pub fn peel_erasures(g: &TannerGraph, erased: &[bool]) -> Vec<usize> {
    debug_assert_eq!(erased.len(), g.num_vns());
    let mut erased = erased.to_vec();
    let mut count: Vec<usize> = (0..g.num_cns())
        .map(|c| g.cn_neighbors(c).iter().filter(|&&v| erased[v]).count())
        .collect();
    let mut queue: Vec<usize> = (0..g.num_cns()).filter(|&c| count[c] == 1).collect();
    while let Some(c) = queue.pop() {
        if count[c] != 1 {
            continue;
        }
        let v = *g.cn_neighbors(c).iter().find(|&&v| erased[v]).unwrap();
        erased[v] = false;
        for &c2 in g.vn_neighbors(v) {
            count[c2] -= 1;
            if count[c2] == 1 {
                queue.push(c2);
            }
        }
    }
    (0..erased.len()).filter(|&v| erased[v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{is_stopping_set, systematic_encode};

    fn code() -> TannerGraph {
        TannerGraph::from_edges(
            6,
            3,
            [(0, 0), (0, 1), (0, 3), (1, 1), (1, 2), (1, 4), (2, 0), (2, 2), (2, 5)],
        )
        .unwrap()
    }

    fn word(g: &TannerGraph) -> Vec<Chunk> {
        let data = vec![Chunk(vec![3, 1]), Chunk(vec![9, 2]), Chunk(vec![27, 4])];
        systematic_encode(g, &data).unwrap()
    }

    #[test]
    fn no_erasures_round_trips() {
        let g = code();
        let w = word(&g);
        let out = peel_decode(&g, w.iter().cloned().map(Some).collect()).unwrap();
        assert!(out.is_decoded());
        assert!(out.parity_violations.is_empty());
        assert_eq!(out.into_codeword().unwrap(), w);
    }

    #[test]
    fn single_erasure_recovers() {
        let g = code();
        let w = word(&g);
        let mut known: Vec<_> = w.iter().cloned().map(Some).collect();
        known[1] = None;
        let out = peel_decode(&g, known).unwrap();
        assert_eq!(out.into_codeword().unwrap(), w);
    }

    #[test]
    fn stuck_residual_is_stopping_set() {
        let g = code();
        let w = word(&g);
        let mut known: Vec<_> = w.iter().cloned().map(Some).collect();
        for v in [0, 1, 2] {
            known[v] = None;
        }
        let out = peel_decode(&g, known).unwrap();
        assert_eq!(out.status, PeelStatus::Stuck);
        assert_eq!(out.residual, vec![0, 1, 2]);
        assert!(is_stopping_set(&g, &out.residual).unwrap());
        assert_eq!(peel_erasures(&g, &[true, true, true, false, false, false]), vec![0, 1, 2]);
    }

    #[test]
    fn tampered_chunk_flags_violation() {
        let g = code();
        let mut w = word(&g);
        w[3].0[0] ^= 1;
        let out = peel_decode(&g, w.into_iter().map(Some).collect()).unwrap();
        assert_eq!(out.parity_violations, vec![0]);
    }
}
