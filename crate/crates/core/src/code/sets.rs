//! Predicates on VN sets: stopping sets and extrinsic message degree.

use std::collections::HashMap;

use crate::code::TannerGraph;
use crate::error::{input_err, Result};

/// Number of neighbours each touched CN has inside `set`.
fn cn_tally(g: &TannerGraph, set: &[usize]) -> Result<HashMap<usize, usize>> {
    let mut seen = vec![false; g.num_vns()];
    let mut tally = HashMap::new();
    for &v in set {
        g.check_vn(v)?;
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        for &c in g.vn_neighbors(v) {
            *tally.entry(c).or_insert(0) += 1;
        }
    }
    Ok(tally)
}

/// True iff every CN with a neighbour in `set` has at least two neighbours in it.
///
/// The empty set is not a stopping set.
pub fn is_stopping_set(g: &TannerGraph, set: &[usize]) -> Result<bool> {
    if set.is_empty() {
        return Err(input_err!("stopping-set query on an empty VN set"));
    }
    Ok(cn_tally(g, set)?.values().all(|&n| n >= 2))
}

/// Extrinsic message degree: the number of CNs singly connected to `set`.
pub fn emd(g: &TannerGraph, set: &[usize]) -> Result<usize> {
    if set.is_empty() {
        return Err(input_err!("EMD of an empty VN set"));
    }
    Ok(cn_tally(g, set)?.values().filter(|&&n| n == 1).count())
}
