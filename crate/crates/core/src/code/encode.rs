//! Systematic encoding of byte chunks with a binary parity-check matrix.
//!
//! A generator is never formed explicitly. Gauss-Jordan elimination over
//! GF(2) expresses each pivot (parity) column as the XOR of non-pivot
//! columns, and the Tanner graph itself is left untouched.

use serde::{Deserialize, Serialize};

use crate::code::{Chunk, TannerGraph};
use crate::error::{input_err, Error, Result};

/// Dense GF(2) matrix in row-reduced form, one `u64` word per 64 columns.
struct Gf2Rows {
    words: usize,
    rows: Vec<Vec<u64>>,
    row_ids: Vec<usize>,
}

impl Gf2Rows {
    fn from_graph(g: &TannerGraph) -> Gf2Rows {
        let words = g.num_vns().div_ceil(64);
        let rows = (0..g.num_cns())
            .map(|c| {
                let mut r = vec![0u64; words];
                for &v in g.cn_neighbors(c) {
                    r[v / 64] |= 1 << (v % 64);
                }
                r
            })
            .collect();
        Gf2Rows { words, rows, row_ids: (0..g.num_cns()).collect() }
    }

    fn bit(&self, r: usize, col: usize) -> bool {
        self.rows[r][col / 64] >> (col % 64) & 1 == 1
    }

    /// Gauss-Jordan elimination visiting columns in `order`.
    /// Returns `(pivot_row_count, pivots)` with `pivots[i] = column of row i`.
    fn reduce(&mut self, order: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut pivots = Vec::new();
        for col in order {
            let next = pivots.len();
            if next == self.rows.len() {
                break;
            }
            let Some(found) = (next..self.rows.len()).find(|&r| self.bit(r, col)) else {
                continue;
            };
            self.rows.swap(next, found);
            self.row_ids.swap(next, found);
            let pivot_row = self.rows[next].clone();
            for r in 0..self.rows.len() {
                if r != next && self.bit(r, col) {
                    for w in 0..self.words {
                        self.rows[r][w] ^= pivot_row[w];
                    }
                }
            }
            pivots.push(col);
        }
        pivots
    }
}

/// GF(2) rank of the parity-check matrix.
pub fn gf2_rank(g: &TannerGraph) -> usize {
    Gf2Rows::from_graph(g).reduce(0..g.num_vns()).len()
}

/// Pivot columns found when eliminating columns in `order`, plus the rank of `H`.
///
/// The pivots span the row space iff their count equals the returned rank.
pub fn pivots_in_order(g: &TannerGraph, order: &[usize]) -> (Vec<usize>, usize) {
    let mut m = Gf2Rows::from_graph(g);
    let pivots = m.reduce(order.iter().copied());
    let rank = gf2_rank(g);
    (pivots, rank)
}

/// Column order keeping `head` first and moving a spanning pivot set to the end.
///
/// `rest` lists the remaining columns in their preferred order. Pivots are
/// picked scanning `rest` from the back, so columns already near the end stay
/// there. Fails when the columns outside `head` do not span the checks.
pub fn trailing_parity_order(g: &TannerGraph, head: &[usize], rest: &[usize]) -> Result<Vec<usize>> {
    let n = g.num_vns();
    if head.len() + rest.len() != n {
        return Err(input_err!("order has {} columns, code has {n}", head.len() + rest.len()));
    }
    let back: Vec<usize> = rest.iter().rev().copied().collect();
    let (pivots, rank) = pivots_in_order(g, &back);
    if pivots.len() < rank {
        return Err(Error::Construction(format!(
            "columns outside the fixed head span only {} of {rank} independent checks",
            pivots.len()
        )));
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut order = head.to_vec();
    order.extend(rest.iter().copied().filter(|&c| !is_pivot[c]));
    order.extend(rest.iter().copied().filter(|&c| is_pivot[c]));
    Ok(order)
}

/// The code with columns reordered so its parity can sit in the trailing positions.
pub fn with_trailing_parity(g: &TannerGraph) -> Result<TannerGraph> {
    let all: Vec<usize> = (0..g.num_vns()).collect();
    g.permute_columns(&trailing_parity_order(g, &[], &all)?)
}

/// Which codeword positions carry data, computed parity, or fixed zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystematicLayout {
    /// Positions holding the data chunks, in data order.
    pub data_positions: Vec<usize>,
    /// Positions solved from the data (one per independent check).
    pub pivot_positions: Vec<usize>,
    /// Non-data positions left free by redundant checks; always zero.
    pub frozen_positions: Vec<usize>,
    /// Check rows that are linear combinations of the others.
    pub redundant_rows: Vec<usize>,
    /// True when the parity positions are exactly the last `n - k` columns.
    pub trailing_parity: bool,
}

/// Encoder for a fixed graph and data length.
#[derive(Clone, Debug)]
pub struct SystematicEncoder {
    n: usize,
    layout: SystematicLayout,
    /// `(pivot column, data indices XORed into it)`
    equations: Vec<(usize, Vec<usize>)>,
}

impl SystematicEncoder {
    /// Prepares an encoder taking `k` data chunks.
    ///
    /// Parity goes to the last `n - k` columns when those columns span the
    /// row space of `H`; otherwise pivots are taken greedily in column order.
    pub fn new(g: &TannerGraph, k: usize) -> Result<SystematicEncoder> {
        let n = g.num_vns();
        if k > n {
            return Err(input_err!("{k} data chunks for a length-{n} code"));
        }
        let rank = gf2_rank(g);
        let mut m = Gf2Rows::from_graph(g);
        let pivots = m.reduce(k..n);
        let trailing = pivots.len() == rank;
        let (m, pivots) = if trailing {
            (m, pivots)
        } else {
            let mut m = Gf2Rows::from_graph(g);
            let pivots = m.reduce(0..n);
            (m, pivots)
        };
        let redundant_rows: Vec<usize> = {
            let mut r = m.row_ids[pivots.len()..].to_vec();
            r.sort_unstable();
            r
        };
        if k > n - rank {
            return Err(Error::Construction(format!(
                "{k} data chunks exceed the code dimension {} (rank {rank}); dependent rows {redundant_rows:?}",
                n - rank
            )));
        }

        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let (data_positions, frozen_positions): (Vec<usize>, Vec<usize>) = if trailing {
            let data = (0..k).collect();
            let frozen = (k..n).filter(|&c| !is_pivot[c]).collect();
            (data, frozen)
        } else {
            let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
            (free[..k].to_vec(), free[k..].to_vec())
        };
        let mut data_index = vec![usize::MAX; n];
        for (i, &p) in data_positions.iter().enumerate() {
            data_index[p] = i;
        }
        let equations = pivots
            .iter()
            .enumerate()
            .map(|(row, &p)| {
                let deps = (0..n)
                    .filter(|&c| c != p && m.bit(row, c) && data_index[c] != usize::MAX)
                    .map(|c| data_index[c])
                    .collect();
                (p, deps)
            })
            .collect();
        Ok(SystematicEncoder {
            n,
            layout: SystematicLayout {
                data_positions,
                pivot_positions: pivots,
                frozen_positions,
                redundant_rows,
                trailing_parity: trailing,
            },
            equations,
        })
    }

    pub fn layout(&self) -> &SystematicLayout {
        &self.layout
    }

    pub fn data_len(&self) -> usize {
        self.layout.data_positions.len()
    }

    /// Encodes `data` into a full codeword of `n` chunks.
    pub fn encode(&self, data: &[Chunk]) -> Result<Vec<Chunk>> {
        if data.len() != self.data_len() {
            return Err(input_err!("expected {} data chunks, got {}", self.data_len(), data.len()));
        }
        let size = data.first().map_or(0, Chunk::len);
        if data.iter().any(|d| d.len() != size) {
            return Err(input_err!("data chunks differ in length"));
        }
        let mut out = vec![Chunk::zeros(size); self.n];
        for (d, &p) in data.iter().zip(&self.layout.data_positions) {
            out[p] = d.clone();
        }
        for (p, deps) in &self.equations {
            let mut acc = Chunk::zeros(size);
            for &i in deps {
                acc.xor_assign(&data[i]);
            }
            out[*p] = acc;
        }
        Ok(out)
    }
}

/// Encodes `n - J` data chunks with `g`, parity in the trailing columns when possible.
pub fn systematic_encode(g: &TannerGraph, data: &[Chunk]) -> Result<Vec<Chunk>> {
    if g.num_cns() > g.num_vns() {
        return Err(input_err!("more checks than variables"));
    }
    let k = g.num_vns() - g.num_cns();
    if data.len() != k {
        return Err(input_err!("expected n - J = {k} data chunks, got {}", data.len()));
    }
    SystematicEncoder::new(g, k)?.encode(data)
}

/// True iff every check of `g` XORs to the zero chunk over `word`.
pub fn satisfies_checks(g: &TannerGraph, word: &[Chunk]) -> bool {
    if word.len() != g.num_vns() {
        return false;
    }
    let size = word.first().map_or(0, Chunk::len);
    (0..g.num_cns()).all(|c| {
        let mut acc = Chunk::zeros(size);
        for &v in g.cn_neighbors(c) {
            acc.xor_assign(&word[v]);
        }
        acc.is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_matrix() -> TannerGraph {
        // H (3 x 6):
        // 1 1 0 1 0 0
        // 0 1 1 0 1 0
        // 1 0 1 0 0 1
        TannerGraph::from_edges(
            6,
            3,
            [(0, 0), (0, 1), (0, 3), (1, 1), (1, 2), (1, 4), (2, 0), (2, 2), (2, 5)],
        )
        .unwrap()
    }

    #[test]
    fn all_zero_data_gives_zero_codeword() {
        let g = hand_matrix();
        let out = systematic_encode(&g, &vec![Chunk::zeros(5); 3]).unwrap();
        assert!(out.iter().all(Chunk::is_zero));
    }

    #[test]
    fn hand_matrix_parity_matches_direct_solve() {
        // With the identity in the trailing block, p_i = row_i restricted to data.
        let g = hand_matrix();
        let data: Vec<Chunk> = [[1u8, 2], [4, 8], [16, 32]].iter().map(|d| Chunk(d.to_vec())).collect();
        let out = systematic_encode(&g, &data).unwrap();
        let x = |a: &[u8], b: &[u8]| Chunk(a.iter().zip(b).map(|(p, q)| p ^ q).collect());
        assert_eq!(out[3], x(&data[0].0, &data[1].0));
        assert_eq!(out[4], x(&data[1].0, &data[2].0));
        assert_eq!(out[5], x(&data[0].0, &data[2].0));
        assert!(satisfies_checks(&g, &out));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // Every column has weight 2, so the rows sum to zero.
        let g = TannerGraph::from_edges(
            4,
            3,
            [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2), (0, 3), (1, 3)],
        )
        .unwrap();
        assert_eq!(gf2_rank(&g), 2);
        let enc = SystematicEncoder::new(&g, 1).unwrap();
        assert_eq!(enc.layout().redundant_rows.len(), 1);
        assert_eq!(enc.layout().frozen_positions.len(), 1);
        let word = enc.encode(&[Chunk(vec![0xab])]).unwrap();
        assert!(satisfies_checks(&g, &word));
        assert_eq!(word[0], Chunk(vec![0xab]));
    }

    #[test]
    fn falls_back_to_column_order_pivots() {
        // Trailing columns are all-zero, so parity must move forward.
        let g = TannerGraph::from_edges(4, 2, [(0, 0), (1, 1), (0, 1)]).unwrap();
        let enc = SystematicEncoder::new(&g, 2).unwrap();
        assert!(!enc.layout().trailing_parity);
        assert_eq!(enc.layout().pivot_positions, vec![0, 1]);
        assert_eq!(enc.layout().data_positions, vec![2, 3]);
        let word = enc.encode(&[Chunk(vec![1]), Chunk(vec![2])]).unwrap();
        assert!(satisfies_checks(&g, &word));
    }

    #[test]
    fn trailing_order_moves_pivots_back() {
        let g = TannerGraph::from_edges(4, 2, [(0, 0), (1, 1), (0, 1)]).unwrap();
        let order = trailing_parity_order(&g, &[3], &[0, 1, 2]).unwrap();
        assert_eq!(order, vec![3, 2, 0, 1]);
        let p = g.permute_columns(&order).unwrap();
        assert!(SystematicEncoder::new(&p, 2).unwrap().layout().trailing_parity);
        assert!(trailing_parity_order(&g, &[0, 1], &[2, 3]).is_err());
    }

    #[test]
    fn wrong_data_length_is_rejected() {
        assert!(systematic_encode(&hand_matrix(), &[Chunk::zeros(1)]).is_err());
        let enc = SystematicEncoder::new(&hand_matrix(), 3).unwrap();
        assert!(enc.encode(&[Chunk::zeros(1), Chunk::zeros(2), Chunk::zeros(1)]).is_err());
    }
}
