//! Communication-cost accounting and the sweeps built on it.

mod sweep;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cit::CitParams;
use crate::error::{input_err, Result};

pub use sweep::{
    fig2, sweep, table1, table2, Axis, KStarCache, Scheme, SweepBase, SweepRow, Table1Row, Table2Input,
    Table2Row, REFERENCE_DE_PEG_TUPLES, REFERENCE_PEG_TUPLES,
};

/// Exact byte counts.
pub type Bytes = Ratio<i128>;

pub const GB: i128 = 1_000_000_000;

pub fn to_gb(x: &Bytes) -> f64 {
    (x / Bytes::from_integer(GB)).to_f64().unwrap_or(f64::NAN)
}

fn int(x: u64) -> Bytes {
    Bytes::from_integer(x as i128)
}

/// `X_1, ..., X_l`: a layer-j chunk plus the POM symbols sent with it.
pub fn chunk_sizes(p: &CitParams) -> Result<Vec<Bytes>> {
    p.validate()?;
    let r = p.rate.ratio();
    let rate = Bytes::new(*r.numer() as i128, *r.denom() as i128);
    let (q, y) = (int(p.batch), int(p.hash_size));
    let pom = |j: usize| y * (int(2) * q - int(1)) * int(j as u64 - 1);
    let mut x: Vec<Bytes> = (1..p.layers).map(|j| q * y + pom(j)).collect();
    x.push(int(p.block_size) / (rate * int(p.base_size)) + pom(p.layers));
    Ok(x)
}

/// `N t y`.
pub fn root_cost(n_nodes: u64, t: u64, y: u64) -> Bytes {
    int(n_nodes) * int(t) * int(y)
}

/// Chunks sent fresh in the secure phase for greedy-cover sizes `vgr`:
/// `|V_l|` at the base, `max(|V_j| - t_j, 0)` above it.
pub fn fresh_counts(vgr: &[usize]) -> Vec<usize> {
    let mut out = vec![0; vgr.len()];
    let mut t = 0;
    for j in (0..vgr.len()).rev() {
        out[j] = vgr[j].saturating_sub(t);
        t = t.max(vgr[j]);
    }
    out
}

/// `C^s = (f + 1) sum_j fresh_j X_j`.
pub fn secure_cost(vgr: &[usize], f: u64, sizes: &[Bytes]) -> Result<Bytes> {
    if vgr.len() != sizes.len() {
        return Err(input_err!("{} cover sizes for {} layers", vgr.len(), sizes.len()));
    }
    let sum: Bytes = fresh_counts(vgr).iter().zip(sizes).map(|(&c, x)| int(c as u64) * x).sum();
    Ok(int(f + 1) * sum)
}

/// `C^v = N k X_l`.
pub fn valid_cost(n_nodes: u64, k: u64, x_l: &Bytes) -> Bytes {
    int(n_nodes) * int(k) * x_l
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub root: Bytes,
    pub secure: Bytes,
    pub valid: Bytes,
    pub total: Bytes,
    pub chunk_sizes: Vec<Bytes>,
}

/// All three parts for `N` nodes, `f` faulty, k-subsets and cover sizes `vgr`.
pub fn total_cost(p: &CitParams, n_nodes: u64, f: u64, k: u64, vgr: &[usize]) -> Result<CostBreakdown> {
    let sizes = chunk_sizes(p)?;
    let root = root_cost(n_nodes, p.root_hashes()? as u64, p.hash_size);
    let secure = secure_cost(vgr, f, &sizes)?;
    let valid = valid_cost(n_nodes, k, sizes.last().unwrap());
    Ok(CostBreakdown { total: root + secure + valid, root, secure, valid, chunk_sizes: sizes })
}

/// `M (1 - (1 - 1/M)^k)`: distinct values among `k` uniform draws with replacement.
pub fn expected_distinct(m: u64, k: u64) -> f64 {
    let m = m as f64;
    m * (1.0 - (1.0 - 1.0 / m).powf(k as f64))
}

/// Monte Carlo mean and standard error of the distinct count among `k`
/// draws with replacement from `m`.
pub fn distinct_monte_carlo(m: u64, k: u64, trials: u64, seed: u64) -> (f64, f64) {
    const BATCH: u64 = 8192;
    let (sum, sq): (f64, f64) = (0..trials.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut seen = vec![0u64; m as usize];
            let (mut s, mut s2) = (0.0, 0.0);
            for t in 0..BATCH.min(trials - b * BATCH) {
                let stamp = t + 1;
                let mut d = 0u64;
                for _ in 0..k {
                    let i = rng.random_range(0..m as usize);
                    if seen[i] != stamp {
                        seen[i] = stamp;
                        d += 1;
                    }
                }
                s += d as f64;
                s2 += (d * d) as f64;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let t = trials as f64;
    let mean = sum / t;
    let var = (sq / t - mean * mean).max(0.0);
    (mean, (var / t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraction::Fraction;

    #[test]
    fn reference_chunk_sizes() {
        let x = chunk_sizes(&CitParams::reference()).unwrap();
        assert_eq!(x[3], Bytes::new(16969, 2));
        assert_eq!(x[0], Bytes::from_integer(128));
        assert_eq!(x[1], Bytes::from_integer(128 + 224));
        let one = CitParams { layers: 1, ..CitParams::reference() };
        assert_eq!(chunk_sizes(&one).unwrap(), vec![Bytes::new(15625, 2)]);
        let third = CitParams { layers: 1, base_size: 9, rate: Fraction::new(1, 3), block_size: 10, ..CitParams::reference() };
        assert_eq!(chunk_sizes(&third).unwrap(), vec![Bytes::new(10, 3)]);
    }

    #[test]
    fn fresh_count_identity() {
        assert_eq!(fresh_counts(&[0, 0, 1, 7]), vec![0, 0, 0, 7]);
        assert_eq!(fresh_counts(&[0, 1, 2, 14]), vec![0, 0, 0, 14]);
        assert_eq!(fresh_counts(&[3, 0, 40, 20]), vec![0, 0, 20, 20]);
    }

    #[test]
    fn secure_costs() {
        let x = chunk_sizes(&CitParams::reference()).unwrap();
        assert_eq!(secure_cost(&[0, 0, 0, 0], 4410, &x).unwrap(), Bytes::from_integer(0));
        for (t, gb) in [([0, 0, 1, 7], 0.262), ([0, 1, 0, 13], 0.486), ([0, 0, 0, 1], 0.037)] {
            assert!((to_gb(&secure_cost(&t, 4410, &x).unwrap()) - gb).abs() < 1e-3, "{t:?}");
        }
        assert!(secure_cost(&[1], 1, &x).is_err());
    }

    #[test]
    fn total_is_the_sum() {
        let p = CitParams::reference();
        let c = total_cost(&p, 9000, 4410, 67, &[0, 0, 0, 0]).unwrap();
        assert!((to_gb(&c.valid) - 5.116).abs() < 5e-4);
        assert!((to_gb(&c.total) - 5.125).abs() < 5e-4);
        assert_eq!(c.root, Bytes::from_integer(9_216_000));
        let z = total_cost(&p, 9000, 4410, 0, &[0; 4]).unwrap();
        assert_eq!(z.total, z.root);
        let c = total_cost(&p, 138, 68, 199, &[0, 0, 1, 7]).unwrap();
        assert_eq!(c.total, c.root + c.secure + c.valid);
        assert!((to_gb(&c.total) - 0.2372).abs() < 5e-5);
    }

    #[test]
    fn distinct_count_estimates_agree() {
        let a = expected_distinct(256, 895);
        let (mc, se) = distinct_monte_carlo(256, 895, 20_000, 1);
        assert!((mc - a).abs() < 4.0 * se + 1e-9, "{mc} vs {a}");
        assert_eq!(expected_distinct(10, 0), 0.0);
        assert!((expected_distinct(10, 1) - 1.0).abs() < 1e-12);
    }
}
