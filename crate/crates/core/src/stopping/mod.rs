//! Stopping-set enumeration and the greedy cover used by the secure phase.

mod search;

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::TannerGraph;
use crate::error::{input_err, Error, Result};
use crate::hitting::greedy_hitting_set;
use search::{search, SearchOptions};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Minimum stopping-set size, exact or as a proven lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinSize {
    Exact(usize),
    AtLeast(usize),
}

impl MinSize {
    pub fn lower(self) -> usize {
        match self {
            MinSize::Exact(m) | MinSize::AtLeast(m) => m,
        }
    }
}

impl std::fmt::Display for MinSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MinSize::Exact(m) => write!(f, "{m}"),
            MinSize::AtLeast(m) => write!(f, ">={m}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateOptions {
    pub budget: u64,
    pub minimal_only: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { budget: DEFAULT_BUDGET, minimal_only: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingSetReport {
    /// Sets listed have size `< size_bound`.
    pub size_bound: usize,
    pub budget: u64,
    pub minimal_only: bool,
    pub exhaustive: bool,
    pub expansions: u64,
    /// Sorted by size, then lexicographically.
    pub sets: Vec<Vec<usize>>,
    pub min_size: MinSize,
    /// Greedy cover in selection order.
    pub greedy_cover: Vec<usize>,
}

/// All stopping sets of size `< bound`, with the greedy cover over them.
pub fn enumerate_stopping_sets<R: Rng + ?Sized>(
    g: &TannerGraph,
    bound: usize,
    opts: &EnumerateOptions,
    rng: &mut R,
) -> Result<StoppingSetReport> {
    if bound == 0 {
        return Err(input_err!("size bound must be at least 1"));
    }
    let res = search(
        g,
        SearchOptions { bound, budget: opts.budget, minimal_only: opts.minimal_only, existence: false },
    );
    let mut sets = res.sets;
    if opts.minimal_only {
        sets = support_minimal(sets);
    }
    let min_size = if res.complete {
        sets.first().map_or(MinSize::AtLeast(bound), |s| MinSize::Exact(s.len()))
    } else {
        min_size_by_deepening(g, bound, opts.budget, sets.first().map(Vec::len))
    };
    let greedy_cover = greedy_cover(&sets, rng);
    Ok(StoppingSetReport {
        size_bound: bound,
        budget: opts.budget,
        minimal_only: opts.minimal_only,
        exhaustive: res.complete,
        expansions: res.expansions,
        sets,
        min_size,
        greedy_cover,
    })
}

/// Minimum stopping-set size, proven by existence searches of growing size.
///
/// Gives `Exact(m)` when some level finds a set, otherwise `AtLeast` the
/// smallest size not yet ruled out (capped at `bound`).
pub fn min_stopping_set_size(g: &TannerGraph, bound: usize, budget: u64) -> MinSize {
    min_size_by_deepening(g, bound, budget, None)
}

fn min_size_by_deepening(g: &TannerGraph, bound: usize, budget: u64, known: Option<usize>) -> MinSize {
    let top = known.map_or(bound, |k| k.min(bound));
    for size in 1..top {
        let r = search(g, SearchOptions { bound: size + 1, budget, minimal_only: true, existence: true });
        if !r.sets.is_empty() {
            return MinSize::Exact(size);
        }
        if !r.complete {
            return MinSize::AtLeast(size);
        }
    }
    match known {
        Some(k) if k <= bound => MinSize::Exact(k),
        _ => MinSize::AtLeast(bound),
    }
}

/// Drops every set that strictly contains another listed set.
fn support_minimal(sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for s in sets {
        let contains = |t: &Vec<usize>| t.len() < s.len() && t.iter().all(|x| s.binary_search(x).is_ok());
        if !kept.iter().any(contains) {
            kept.push(s);
        }
    }
    kept
}

/// VNs picked greedily until every set is hit, in selection order.
pub fn greedy_cover<R: Rng + ?Sized>(sets: &[Vec<usize>], rng: &mut R) -> Vec<usize> {
    let refs: Vec<&[usize]> = sets.iter().map(Vec::as_slice).collect();
    greedy_hitting_set(&refs, None, rng)
}

impl StoppingSetReport {
    /// Header lines, a `cover` line, then one set per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# stopping sets").unwrap();
        writeln!(s, "bound {}", self.size_bound).unwrap();
        writeln!(s, "budget {}", self.budget).unwrap();
        writeln!(s, "minimal_only {}", self.minimal_only).unwrap();
        writeln!(s, "exhaustive {}", self.exhaustive).unwrap();
        writeln!(s, "expansions {}", self.expansions).unwrap();
        writeln!(s, "min_size {}", self.min_size).unwrap();
        writeln!(s, "count {}", self.sets.len()).unwrap();
        writeln!(s, "cover {}", join(&self.greedy_cover)).unwrap();
        for set in &self.sets {
            writeln!(s, "{}", join(set)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<StoppingSetReport> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("report: missing {key}")))?;
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| Error::Parse(format!("report: expected {key}, got {line:?}")))?;
            Ok(rest.trim().to_string())
        };
        let num = |s: String| s.parse::<u64>().map_err(|_| Error::Parse(format!("report: bad number {s:?}")));
        let flag = |s: String| s.parse::<bool>().map_err(|_| Error::Parse(format!("report: bad flag {s:?}")));
        let size_bound = num(field("bound")?)? as usize;
        let budget = num(field("budget")?)?;
        let minimal_only = flag(field("minimal_only")?)?;
        let exhaustive = flag(field("exhaustive")?)?;
        let expansions = num(field("expansions")?)?;
        let min_size = {
            let s = field("min_size")?;
            match s.strip_prefix(">=") {
                Some(x) => MinSize::AtLeast(num(x.to_string())? as usize),
                None => MinSize::Exact(num(s)? as usize),
            }
        };
        let count = num(field("count")?)? as usize;
        let greedy_cover = parse_list(&field("cover")?)?;
        let sets: Vec<Vec<usize>> = lines.map(parse_list).collect::<Result<_>>()?;
        if sets.len() != count {
            return Err(Error::Parse(format!("report: {} sets listed, header says {count}", sets.len())));
        }
        Ok(StoppingSetReport {
            size_bound,
            budget,
            minimal_only,
            exhaustive,
            expansions,
            sets,
            min_size,
            greedy_cover,
        })
    }

    /// A report with no sets, for layers analysed elsewhere or bound 1.
    pub fn empty(bound: usize) -> StoppingSetReport {
        StoppingSetReport {
            size_bound: bound,
            budget: 0,
            minimal_only: false,
            exhaustive: true,
            expansions: 0,
            sets: Vec::new(),
            min_size: MinSize::AtLeast(bound),
            greedy_cover: Vec::new(),
        }
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("report: bad index {t:?}"))))
        .collect()
}
