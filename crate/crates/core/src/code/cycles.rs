//! Enumeration of the cycles a prospective edge would close.

use serde::{Deserialize, Serialize};

use crate::code::tanner::Node;
use crate::code::TannerGraph;
use crate::error::{input_err, Result};

/// Default cap on the number of cycles enumerated for a single edge.
pub const DEFAULT_CYCLE_CAP: usize = 100_000;

/// A cycle given by its (sorted) VN and CN sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cycle {
    pub vns: Vec<usize>,
    pub cns: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        2 * self.vns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vns.is_empty()
    }
}

/// Result of [`enumerate_g_cycles`]; `overflow` is set when the cap was hit
/// and `cycles` is then incomplete.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleEnumeration {
    pub cycles: Vec<Cycle>,
    pub overflow: bool,
}

/// Every cycle of length exactly `len` closed by adding edge `(c, v)`.
///
/// Equivalently every simple path of `len - 1` edges from `v` to `c` in the
/// current graph. Output is sorted by VN set, then CN set.
pub fn enumerate_g_cycles(g: &TannerGraph, c: usize, v: usize, len: usize) -> Result<CycleEnumeration> {
    enumerate_g_cycles_capped(g, c, v, len, DEFAULT_CYCLE_CAP)
}

pub fn enumerate_g_cycles_capped(
    g: &TannerGraph,
    c: usize,
    v: usize,
    len: usize,
    cap: usize,
) -> Result<CycleEnumeration> {
    check_query(g, c, v, len)?;
    Ok(PathSearch::new(g, Node::Vn(v), Node::Cn(c), len - 1, cap).run())
}

/// Same enumeration, walking from the CN endpoint towards the VN.
pub fn enumerate_g_cycles_from_cn(
    g: &TannerGraph,
    c: usize,
    v: usize,
    len: usize,
    cap: usize,
) -> Result<CycleEnumeration> {
    check_query(g, c, v, len)?;
    Ok(PathSearch::new(g, Node::Cn(c), Node::Vn(v), len - 1, cap).run())
}

fn check_query(g: &TannerGraph, c: usize, v: usize, len: usize) -> Result<()> {
    g.check_cn(c)?;
    g.check_vn(v)?;
    if g.has_edge(c, v) {
        return Err(input_err!("edge (c{c}, v{v}) already present"));
    }
    if len < 4 || len % 2 != 0 {
        return Err(input_err!("cycle length must be even and >= 4, got {len}"));
    }
    Ok(())
}

struct PathSearch<'a> {
    g: &'a TannerGraph,
    target: Node,
    edges: usize,
    cap: usize,
    vn_dist: Vec<Option<usize>>,
    cn_dist: Vec<Option<usize>>,
    on_path_vn: Vec<bool>,
    on_path_cn: Vec<bool>,
    vns: Vec<usize>,
    cns: Vec<usize>,
    out: CycleEnumeration,
    start: Node,
}

impl<'a> PathSearch<'a> {
    fn new(g: &'a TannerGraph, start: Node, target: Node, edges: usize, cap: usize) -> Self {
        let (vn_dist, cn_dist) = g.bfs(target);
        PathSearch {
            g,
            target,
            edges,
            cap,
            vn_dist,
            cn_dist,
            on_path_vn: vec![false; g.num_vns()],
            on_path_cn: vec![false; g.num_cns()],
            vns: Vec::new(),
            cns: Vec::new(),
            out: CycleEnumeration::default(),
            start,
        }
    }

    fn run(mut self) -> CycleEnumeration {
        let start = self.start;
        self.enter(start);
        self.walk(start, self.edges);
        self.out.cycles.sort();
        self.out
    }

    fn enter(&mut self, n: Node) {
        match n {
            Node::Vn(v) => {
                self.on_path_vn[v] = true;
                self.vns.push(v);
            }
            Node::Cn(c) => {
                self.on_path_cn[c] = true;
                self.cns.push(c);
            }
        }
    }

    fn leave(&mut self, n: Node) {
        match n {
            Node::Vn(v) => {
                self.on_path_vn[v] = false;
                self.vns.pop();
            }
            Node::Cn(c) => {
                self.on_path_cn[c] = false;
                self.cns.pop();
            }
        }
    }

    fn walk(&mut self, at: Node, remaining: usize) {
        if self.out.overflow {
            return;
        }
        if at == self.target {
            if remaining == 0 {
                if self.out.cycles.len() == self.cap {
                    self.out.overflow = true;
                    return;
                }
                let mut vns = self.vns.clone();
                let mut cns = self.cns.clone();
                vns.sort_unstable();
                cns.sort_unstable();
                self.out.cycles.push(Cycle { vns, cns });
            }
            return;
        }
        if remaining == 0 {
            return;
        }
        let next: Vec<Node> = match at {
            Node::Vn(v) => self.g.vn_neighbors(v).iter().map(|&c| Node::Cn(c)).collect(),
            Node::Cn(c) => self.g.cn_neighbors(c).iter().map(|&v| Node::Vn(v)).collect(),
        };
        for n in next {
            let (used, dist) = match n {
                Node::Vn(v) => (self.on_path_vn[v], self.vn_dist[v]),
                Node::Cn(c) => (self.on_path_cn[c], self.cn_dist[c]),
            };
            if used {
                continue;
            }
            match dist {
                Some(d) if d <= remaining - 1 => {}
                _ => continue,
            }
            self.enter(n);
            self.walk(n, remaining - 1);
            self.leave(n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closing_a_four_cycle() {
        // path v0 - c1 - v1 - c0; adding (c0, v0) closes a 4-cycle
        let g = TannerGraph::from_edges(2, 2, [(1, 0), (1, 1), (0, 1)]).unwrap();
        let out = enumerate_g_cycles(&g, 0, 0, 4).unwrap();
        assert_eq!(out.cycles, vec![Cycle { vns: vec![0, 1], cns: vec![0, 1] }]);
        assert!(!out.overflow);
        assert!(enumerate_g_cycles(&g, 0, 0, 6).unwrap().cycles.is_empty());
    }

    #[test]
    fn no_path_gives_no_cycles() {
        let g = TannerGraph::from_edges(3, 2, [(0, 0), (1, 2)]).unwrap();
        assert!(enumerate_g_cycles(&g, 1, 0, 4).unwrap().cycles.is_empty());
    }

    #[test]
    fn rejects_existing_edge_and_bad_length() {
        let g = TannerGraph::from_edges(2, 2, [(1, 0), (1, 1), (0, 1)]).unwrap();
        assert!(enumerate_g_cycles(&g, 1, 0, 4).is_err());
        assert!(enumerate_g_cycles(&g, 0, 0, 5).is_err());
        assert!(enumerate_g_cycles(&g, 0, 0, 2).is_err());
    }

    #[test]
    fn cap_sets_overflow() {
        // complete bipartite K_{3,3} minus (c0, v0): many 4-cycles through v0..c0
        let mut edges = Vec::new();
        for c in 0..3 {
            for v in 0..3 {
                if (c, v) != (0, 0) {
                    edges.push((c, v));
                }
            }
        }
        let g = TannerGraph::from_edges(3, 3, edges).unwrap();
        let full = enumerate_g_cycles(&g, 0, 0, 4).unwrap();
        assert_eq!(full.cycles.len(), 4);
        let capped = enumerate_g_cycles_capped(&g, 0, 0, 4, 2).unwrap();
        assert!(capped.overflow);
        assert_eq!(capped.cycles.len(), 2);
    }
}
