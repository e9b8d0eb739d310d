use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

/// Binary parity-check matrix stored as a bipartite VN/CN adjacency.
///
/// Columns of `H` are variable nodes (VNs), rows are check nodes (CNs).
/// Both adjacency lists are kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TannerGraph {
    vn_adj: Vec<Vec<usize>>,
    cn_adj: Vec<Vec<usize>>,
}

impl TannerGraph {
    /// Graph with `num_vns` variable nodes, `num_cns` check nodes and no edges.
    pub fn new(num_vns: usize, num_cns: usize) -> TannerGraph {
        TannerGraph {
            vn_adj: vec![Vec::new(); num_vns],
            cn_adj: vec![Vec::new(); num_cns],
        }
    }

    /// Builds a graph from `(cn, vn)` edges.
    pub fn from_edges(
        num_vns: usize,
        num_cns: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<TannerGraph> {
        let mut g = TannerGraph::new(num_vns, num_cns);
        for (c, v) in edges {
            g.add_edge(c, v)?;
        }
        Ok(g)
    }

    pub fn num_vns(&self) -> usize {
        self.vn_adj.len()
    }

    pub fn num_cns(&self) -> usize {
        self.cn_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.vn_adj.iter().map(Vec::len).sum()
    }

    /// Adds edge `(c, v)`. Fails on out-of-range indices or a duplicate edge.
    pub fn add_edge(&mut self, c: usize, v: usize) -> Result<()> {
        self.check_cn(c)?;
        self.check_vn(v)?;
        match self.vn_adj[v].binary_search(&c) {
            Ok(_) => Err(input_err!("edge (c{c}, v{v}) already present")),
            Err(pos) => {
                self.vn_adj[v].insert(pos, c);
                let pos = self.cn_adj[c].binary_search(&v).unwrap_err();
                self.cn_adj[c].insert(pos, v);
                Ok(())
            }
        }
    }

    pub fn has_edge(&self, c: usize, v: usize) -> bool {
        v < self.num_vns() && self.vn_adj[v].binary_search(&c).is_ok()
    }

    pub fn vn_neighbors(&self, v: usize) -> &[usize] {
        &self.vn_adj[v]
    }

    pub fn cn_neighbors(&self, c: usize) -> &[usize] {
        &self.cn_adj[c]
    }

    pub fn vn_degree(&self, v: usize) -> usize {
        self.vn_adj[v].len()
    }

    pub fn cn_degree(&self, c: usize) -> usize {
        self.cn_adj[c].len()
    }

    /// Common VN degree, if every VN has the same degree.
    pub fn uniform_vn_degree(&self) -> Option<usize> {
        let d = self.vn_adj.first()?.len();
        self.vn_adj.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn max_vn_degree(&self) -> usize {
        self.vn_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_cn_degree(&self) -> usize {
        self.cn_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges as `(cn, vn)` pairs, ordered by VN then CN.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vn_adj
            .iter()
            .enumerate()
            .flat_map(|(v, cs)| cs.iter().map(move |&c| (c, v)))
    }

    pub(crate) fn check_vn(&self, v: usize) -> Result<()> {
        if v >= self.num_vns() {
            return Err(input_err!("VN index {v} out of range (n = {})", self.num_vns()));
        }
        Ok(())
    }

    pub(crate) fn check_cn(&self, c: usize) -> Result<()> {
        if c >= self.num_cns() {
            return Err(input_err!("CN index {c} out of range (J = {})", self.num_cns()));
        }
        Ok(())
    }

    /// Returns the graph whose column `i` is column `order[i]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<TannerGraph> {
        let n = self.num_vns();
        if order.len() != n {
            return Err(input_err!("permutation has {} entries, expected {n}", order.len()));
        }
        let mut seen = vec![false; n];
        for &o in order {
            if o >= n || std::mem::replace(&mut seen[o], true) {
                return Err(input_err!("not a permutation of 0..{n}"));
            }
        }
        let mut g = TannerGraph::new(n, self.num_cns());
        for (new_v, &old_v) in order.iter().enumerate() {
            for &c in &self.vn_adj[old_v] {
                g.add_edge(c, new_v)?;
            }
        }
        Ok(g)
    }

    /// BFS distances (in edges) from VN `v` to every CN; `None` when unreachable.
    pub fn cn_distances_from_vn(&self, v: usize) -> Vec<Option<usize>> {
        let (_, cn_dist) = self.bfs(Node::Vn(v));
        cn_dist
    }

    /// BFS distances from `start` to every VN and CN.
    pub fn bfs(&self, start: Node) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut vn_dist = vec![None; self.num_vns()];
        let mut cn_dist = vec![None; self.num_cns()];
        let mut queue = VecDeque::new();
        match start {
            Node::Vn(v) => vn_dist[v] = Some(0),
            Node::Cn(c) => cn_dist[c] = Some(0),
        }
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Vn(v) => {
                    let d = vn_dist[v].unwrap();
                    for &c in &self.vn_adj[v] {
                        if cn_dist[c].is_none() {
                            cn_dist[c] = Some(d + 1);
                            queue.push_back(Node::Cn(c));
                        }
                    }
                }
                Node::Cn(c) => {
                    let d = cn_dist[c].unwrap();
                    for &v in &self.cn_adj[c] {
                        if vn_dist[v].is_none() {
                            vn_dist[v] = Some(d + 1);
                            queue.push_back(Node::Vn(v));
                        }
                    }
                }
            }
        }
        (vn_dist, cn_dist)
    }

    /// Length of the shortest cycle, or `None` for a forest.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.num_vns() {
            if let Some(len) = self.shortest_cycle_through_vn(v, best) {
                best = Some(best.map_or(len, |b| b.min(len)));
                if len == 4 {
                    break;
                }
            }
        }
        best
    }

    fn shortest_cycle_through_vn(&self, v: usize, cap: Option<usize>) -> Option<usize> {
        // BFS labelling each node with the root edge it descends from; two
        // different labels meeting closes a cycle through v.
        let n = self.num_vns();
        let mut dist = vec![usize::MAX; n + self.num_cns()];
        let mut label = vec![usize::MAX; n + self.num_cns()];
        let mut queue = VecDeque::new();
        dist[v] = 0;
        for (i, &c) in self.vn_adj[v].iter().enumerate() {
            dist[n + c] = 1;
            label[n + c] = i;
            queue.push_back(n + c);
        }
        let mut best: Option<usize> = None;
        while let Some(x) = queue.pop_front() {
            let bound = match (best, cap) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            if bound.is_some_and(|b| 2 * dist[x] >= b) {
                break;
            }
            let nbrs: &[usize] = if x < n { &self.vn_adj[x] } else { &self.cn_adj[x - n] };
            for &y in nbrs {
                let y = if x < n { n + y } else { y };
                if y == v {
                    continue;
                }
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    label[y] = label[x];
                    queue.push_back(y);
                } else if label[y] != label[x] && label[y] != usize::MAX {
                    let len = dist[x] + dist[y] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
        best
    }
}

/// A node of a Tanner graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Vn(usize),
    Cn(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> TannerGraph {
        TannerGraph::from_edges(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap()
    }

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        let mut g = four_cycle();
        assert!(g.add_edge(0, 0).is_err());
        assert!(g.add_edge(2, 0).is_err());
        assert!(g.add_edge(0, 5).is_err());
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.uniform_vn_degree(), Some(2));
    }

    #[test]
    fn girth_of_small_graphs() {
        assert_eq!(four_cycle().girth(), Some(4));
        // 6-cycle v0-c0-v1-c1-v2-c2-v0
        let g = TannerGraph::from_edges(3, 3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)])
            .unwrap();
        assert_eq!(g.girth(), Some(6));
        let tree = TannerGraph::from_edges(3, 2, [(0, 0), (0, 1), (1, 1), (1, 2)]).unwrap();
        assert_eq!(tree.girth(), None);
    }

    #[test]
    fn permutation_relabels_columns() {
        let g = TannerGraph::from_edges(3, 2, [(0, 0), (1, 2), (0, 1)]).unwrap();
        let p = g.permute_columns(&[2, 0, 1]).unwrap();
        assert_eq!(p.vn_neighbors(0), &[1]);
        assert_eq!(p.vn_neighbors(1), &[0]);
        assert_eq!(p.vn_neighbors(2), &[0]);
        assert!(g.permute_columns(&[0, 0, 1]).is_err());
    }
}
