//! Reading and writing parity-check matrices in the alist text format.
//!
//! ```text
//! N M
//! max_col_weight max_row_weight
//! col weights (N)
//! row weights (M)
//! N lines of 1-based row indices
//! M lines of 1-based column indices
//! ```
//! Short lines are padded with `0` on output when degrees vary; zeros are
//! skipped on input, as are lines starting with `#`.

use std::fmt::Write as _;

use crate::code::TannerGraph;
use crate::error::{Error, Result};

pub fn write_alist(g: &TannerGraph) -> String {
    let n = g.num_vns();
    let m = g.num_cns();
    let max_col = g.max_vn_degree();
    let max_row = g.max_cn_degree();
    let mut s = String::new();
    let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(s, "{n} {m}").unwrap();
    writeln!(s, "{max_col} {max_row}").unwrap();
    writeln!(s, "{}", join(&mut (0..n).map(|v| g.vn_degree(v)))).unwrap();
    writeln!(s, "{}", join(&mut (0..m).map(|c| g.cn_degree(c)))).unwrap();
    for v in 0..n {
        let pad = max_col - g.vn_degree(v);
        let mut it = g.vn_neighbors(v).iter().map(|c| c + 1).chain(std::iter::repeat_n(0, pad));
        writeln!(s, "{}", join(&mut it)).unwrap();
    }
    for c in 0..m {
        let pad = max_row - g.cn_degree(c);
        let mut it = g.cn_neighbors(c).iter().map(|v| v + 1).chain(std::iter::repeat_n(0, pad));
        writeln!(s, "{}", join(&mut it)).unwrap();
    }
    s
}

pub fn read_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut next_nums = |what: &str| -> Result<Vec<usize>> {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("alist: missing {what}")))?;
        line.split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("alist: bad number {t:?} in {what}"))))
            .collect()
    };
    let dims = next_nums("dimensions")?;
    let [n, m] = dims[..] else {
        return Err(Error::Parse("alist: dimension line needs two numbers".into()));
    };
    next_nums("max weights")?;
    let col_w = next_nums("column weights")?;
    let row_w = next_nums("row weights")?;
    if col_w.len() != n || row_w.len() != m {
        return Err(Error::Parse("alist: weight lists do not match dimensions".into()));
    }
    let mut g = TannerGraph::new(n, m);
    for (v, &w) in col_w.iter().enumerate() {
        let rows: Vec<usize> = next_nums("column list")?.into_iter().filter(|&r| r != 0).collect();
        if rows.len() != w {
            return Err(Error::Parse(format!("alist: column {} has {} entries, weight {w}", v + 1, rows.len())));
        }
        for r in rows {
            if r > m {
                return Err(Error::Parse(format!("alist: row index {r} out of range")));
            }
            g.add_edge(r - 1, v).map_err(|e| Error::Parse(format!("alist: {e}")))?;
        }
    }
    for (c, &w) in row_w.iter().enumerate() {
        let cols: Vec<usize> = next_nums("row list")?.into_iter().filter(|&x| x != 0).collect();
        if cols.len() != w {
            return Err(Error::Parse(format!("alist: row {} has {} entries, weight {w}", c + 1, cols.len())));
        }
        let mut sorted: Vec<usize> = cols.iter().map(|x| x.wrapping_sub(1)).collect();
        sorted.sort_unstable();
        if sorted != g.cn_neighbors(c) {
            return Err(Error::Parse(format!("alist: row {} disagrees with the column lists", c + 1)));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_irregular() {
        let g = TannerGraph::from_edges(4, 3, [(0, 0), (1, 0), (2, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let text = write_alist(&g);
        assert!(text.starts_with("4 3\n2 2\n"));
        assert_eq!(read_alist(&text).unwrap(), g);
    }

    #[test]
    fn regular_has_no_padding() {
        let g = TannerGraph::from_edges(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let text = write_alist(&g);
        assert!(!text.split_whitespace().any(|t| t == "0"));
        assert_eq!(read_alist(&text).unwrap(), g);
    }

    #[test]
    fn inconsistent_rows_rejected() {
        let bad = "2 1\n1 2\n1 1\n2\n1\n1\n1 1\n";
        assert!(read_alist(bad).is_err());
        assert!(read_alist("2 1\n1 1\n1 1\n2\n1\n1\n1 2\n").is_ok());
    }
}
