//! Branch-and-bound over VN inclusion for stopping sets below a size bound.
//!
//! Each stopping set is reached exactly once: the root fixes its smallest
//! member, and every branching step partitions by "first listed VN that is
//! included", excluding the VNs listed before it.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

use crate::code::TannerGraph;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Undecided,
    In,
    Out,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SearchOptions {
    /// Sets of size `< bound` are reported.
    pub bound: usize,
    pub budget: u64,
    /// Do not extend a found stopping set to its supersets.
    pub minimal_only: bool,
    /// Stop at the first stopping set found.
    pub existence: bool,
}

pub(crate) struct SearchResult {
    pub sets: Vec<Vec<usize>>,
    pub complete: bool,
    pub expansions: u64,
}

struct Shared {
    expansions: AtomicU64,
    out_of_budget: AtomicBool,
    found_any: AtomicBool,
}

struct State<'a> {
    g: &'a TannerGraph,
    opts: SearchOptions,
    shared: &'a Shared,
    status: Vec<Status>,
    in_cnt: Vec<u32>,
    und_cnt: Vec<u32>,
    members: Vec<usize>,
    found: Vec<Vec<usize>>,
    score: Vec<u32>,
    stop: bool,
}

impl<'a> State<'a> {
    fn new(g: &'a TannerGraph, opts: SearchOptions, shared: &'a Shared) -> Self {
        State {
            g,
            opts,
            shared,
            status: vec![Status::Undecided; g.num_vns()],
            in_cnt: vec![0; g.num_cns()],
            und_cnt: (0..g.num_cns()).map(|c| g.cn_degree(c) as u32).collect(),
            members: Vec::new(),
            found: Vec::new(),
            score: vec![0; g.num_vns()],
            stop: false,
        }
    }

    fn include(&mut self, v: usize) {
        self.status[v] = Status::In;
        self.members.push(v);
        for &c in self.g.vn_neighbors(v) {
            self.in_cnt[c] += 1;
            self.und_cnt[c] -= 1;
        }
    }

    fn uninclude(&mut self, v: usize) {
        self.status[v] = Status::Undecided;
        self.members.pop();
        for &c in self.g.vn_neighbors(v) {
            self.in_cnt[c] -= 1;
            self.und_cnt[c] += 1;
        }
    }

    fn exclude(&mut self, v: usize) {
        self.status[v] = Status::Out;
        for &c in self.g.vn_neighbors(v) {
            self.und_cnt[c] -= 1;
        }
    }

    fn unexclude(&mut self, v: usize) {
        self.status[v] = Status::Undecided;
        for &c in self.g.vn_neighbors(v) {
            self.und_cnt[c] += 1;
        }
    }

    fn tick(&mut self) -> bool {
        if self.stop {
            return false;
        }
        if self.opts.existence && self.shared.found_any.load(Ordering::Relaxed) {
            self.stop = true;
            return false;
        }
        let n = self.shared.expansions.fetch_add(1, Ordering::Relaxed);
        if n >= self.opts.budget {
            self.shared.out_of_budget.store(true, Ordering::Relaxed);
            self.stop = true;
            return false;
        }
        true
    }

    /// CNs with exactly one included neighbour, and the one with fewest
    /// undecided neighbours (`None` if some deficient CN has none left).
    fn deficient(&self) -> (Vec<usize>, Option<Option<usize>>) {
        let mut seen = Vec::new();
        let mut best: Option<usize> = None;
        for &v in &self.members {
            for &c in self.g.vn_neighbors(v) {
                if self.in_cnt[c] == 1 {
                    if self.und_cnt[c] == 0 {
                        return (Vec::new(), Some(None));
                    }
                    seen.push(c);
                    if best.is_none_or(|b| self.und_cnt[c] < self.und_cnt[b]) {
                        best = Some(c);
                    }
                }
            }
        }
        (seen, best.map(Some))
    }

    /// Fewest extra VNs needed to touch every deficient CN again.
    fn lower_bound(&mut self, deficient: &[usize]) -> usize {
        if deficient.is_empty() {
            return 0;
        }
        let mut touched = Vec::new();
        for &c in deficient {
            for &u in self.g.cn_neighbors(c) {
                if self.status[u] == Status::Undecided {
                    if self.score[u] == 0 {
                        touched.push(u);
                    }
                    self.score[u] += 1;
                }
            }
        }
        let mut r: Vec<u32> = touched.iter().map(|&u| self.score[u]).collect();
        for &u in &touched {
            self.score[u] = 0;
        }
        r.sort_unstable_by(|a, b| b.cmp(a));
        let mut covered = 0usize;
        for (t, x) in r.iter().enumerate() {
            covered += *x as usize;
            if covered >= deficient.len() {
                return t + 1;
            }
        }
        usize::MAX / 2
    }

    fn branch(&mut self, children: &[usize]) {
        let mut excluded = Vec::new();
        for &u in children {
            if self.stop {
                break;
            }
            if self.members.len() + 1 < self.opts.bound {
                self.include(u);
                self.descend();
                self.uninclude(u);
            }
            self.exclude(u);
            excluded.push(u);
        }
        for u in excluded.into_iter().rev() {
            self.unexclude(u);
        }
    }

    fn descend(&mut self) {
        if !self.tick() {
            return;
        }
        let (def, pick) = self.deficient();
        match pick {
            Some(None) => {}
            Some(Some(c)) => {
                let lb = self.lower_bound(&def);
                if self.members.len() + lb >= self.opts.bound {
                    return;
                }
                let children: Vec<usize> = self
                    .g
                    .cn_neighbors(c)
                    .iter()
                    .copied()
                    .filter(|&u| self.status[u] == Status::Undecided)
                    .collect();
                self.branch(&children);
            }
            None => {
                let mut set = self.members.clone();
                set.sort_unstable();
                self.found.push(set);
                if self.opts.existence {
                    self.shared.found_any.store(true, Ordering::Relaxed);
                    self.stop = true;
                    return;
                }
                if self.opts.minimal_only || self.members.len() + 1 >= self.opts.bound {
                    return;
                }
                let children: Vec<usize> =
                    (0..self.g.num_vns()).filter(|&u| self.status[u] == Status::Undecided).collect();
                self.branch(&children);
            }
        }
    }
}

pub(crate) fn search(g: &TannerGraph, opts: SearchOptions) -> SearchResult {
    let shared = Shared {
        expansions: AtomicU64::new(0),
        out_of_budget: AtomicBool::new(false),
        found_any: AtomicBool::new(false),
    };
    if opts.bound <= 1 {
        return SearchResult { sets: Vec::new(), complete: true, expansions: 0 };
    }
    let per_root: Vec<Vec<Vec<usize>>> = (0..g.num_vns())
        .into_par_iter()
        .map(|v| {
            let mut st = State::new(g, opts, &shared);
            for u in 0..v {
                st.exclude(u);
            }
            st.include(v);
            st.descend();
            st.found
        })
        .collect();
    let mut sets: Vec<Vec<usize>> = per_root.into_iter().flatten().collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let out_of_budget = shared.out_of_budget.load(Ordering::Relaxed);
    let found_any = shared.found_any.load(Ordering::Relaxed);
    SearchResult {
        sets,
        complete: !out_of_budget || (opts.existence && found_any),
        expansions: shared.expansions.load(Ordering::Relaxed).min(opts.budget),
    }
}
