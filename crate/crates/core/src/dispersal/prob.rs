//! Bounds on the probability that a random k-dispersal leaves too many chunks
//! uncollected by some gamma fraction of nodes.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{input_err, Error, Result};

/// Natural-log binary entropy `-p ln p - (1 - p) ln(1 - p)`, zero at the endpoints.
pub fn entropy_he(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    term(p) + term(1.0 - p)
}

/// Random-subset bound `exp(N He(gamma) - M f(eta, rho))` with `rho = gamma N k / M`.
pub fn prob_ub_random(eta: f64, n_nodes: u64, m: u64, k: u64, gamma: f64) -> Result<f64> {
    let (n, m, k) = (n_nodes as f64, m as f64, k as f64);
    let k_lo = m / (n * gamma) * (1.0 / (1.0 - eta)).ln();
    if k <= k_lo {
        return Err(Error::Domain(format!("k = {k} must exceed {k_lo:.3}")));
    }
    let rho = gamma * n * k / m;
    let e = rho.exp();
    let f = (e * (1.0 - eta) - 1.0).powi(2) / (e * (e * (1.0 - eta) + 1.0));
    Ok((n * entropy_he(gamma) - m * f).exp())
}

/// Largest node count for which some finite k meets `p_th`, as a real number.
pub fn n_upper_bound(eta: f64, m: u64, gamma: f64, p_th: f64) -> f64 {
    (m as f64 * (1.0 - eta) + p_th.ln()) / entropy_he(gamma)
}

/// Smallest real k for which the random-subset bound meets `p_th`.
pub fn k_f_min(eta: f64, n_nodes: u64, m: u64, gamma: f64, p_th: f64) -> Result<f64> {
    let n_ub = n_upper_bound(eta, m, gamma, p_th);
    if n_nodes as f64 >= n_ub {
        return Err(Error::Infeasible(format!("N = {n_nodes} is not below N^UB = {n_ub:.3}")));
    }
    let (n, mf) = (n_nodes as f64, m as f64);
    let v = (n * entropy_he(gamma) - p_th.ln()) / mf;
    let eb = 1.0 - eta;
    let ratio = (-(2.0 * eb + v) - (8.0 * eb * v + v * v).sqrt()) / (2.0 * eb * (v - eb));
    Ok(mf / (n * gamma) * ratio.ln())
}

/// `C(n, k)`, zero when `k < 0` or `n < k`.
pub fn binom(n: i64, k: i64) -> BigUint {
    if k < 0 || n < k || n < 0 {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from((n - i) as u64);
        acc /= BigUint::from((i + 1) as u64);
    }
    acc
}

/// Numerator of the group-drawing tail over the common denominator `C(s, m)^T`.
fn chi_numerator(n: u64, l: u64, s: u64, t: u64, m: u64) -> BigInt {
    let terms: Vec<BigInt> = (0..=n)
        .into_par_iter()
        .map(|j| {
            let a = binom(l as i64, j as i64) * binom(l as i64 - j as i64 - 1, l as i64 - n as i64 - 1);
            if a.is_zero() {
                return BigInt::zero();
            }
            let r = binom(s as i64 - l as i64 + j as i64, m as i64);
            if r.is_zero() {
                return BigInt::zero();
            }
            let mag = a * r.pow(t as u32);
            let sign = if (n - j) % 2 == 0 { Sign::Plus } else { Sign::Minus };
            BigInt::from_biguint(sign, mag)
        })
        .collect();
    terms.into_iter().sum()
}

fn check_chi_args(n: u64, l: u64, s: u64) -> Result<()> {
    if !(n < l && l <= s) {
        return Err(input_err!("need 0 <= n < l <= s, got n = {n}, l = {l}, s = {s}"));
    }
    Ok(())
}

/// Probability that `t` uniform `m`-subsets of an `s`-set collect at most `n`
/// of `l` designated elements. Exact.
pub fn chi_group_coupon(n: u64, l: u64, s: u64, t: u64, m: u64) -> Result<BigRational> {
    check_chi_args(n, l, s)?;
    if m > s {
        return Err(input_err!("subset size {m} exceeds s = {s}"));
    }
    let den = BigInt::from(binom(s as i64, m as i64).pow(t as u32));
    Ok(BigRational::new(chi_numerator(n, l, s, t, m), den))
}

/// Natural log of a positive big integer, accurate to about 1e-15 relative.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact `P_f = chi(M - mu, M, M, T, k)` with `T` drawings.
pub fn p_fail(mu: u64, m: u64, k: u64, draws: u64) -> Result<BigRational> {
    if mu == 0 || mu > m || k > m {
        return Err(input_err!("need 1 <= mu <= M and k <= M (mu = {mu}, k = {k}, M = {m})"));
    }
    chi_group_coupon(m - mu, m, m, draws, k)
}

/// Slack added to the log-bound before comparing, so that ties resolve to the safe side.
const LN_SLACK: f64 = 1e-9;

/// `ln(e^{N He(gamma)} P_f)`, or `-inf` when `P_f = 0`.
pub fn ln_prob_not_ss_valid_ub(mu: u64, n_nodes: u64, m: u64, k: u64, gamma: f64, draws: u64) -> Result<f64> {
    if mu == 0 || mu > m || k > m {
        return Err(input_err!("need 1 <= mu <= M and k <= M (mu = {mu}, k = {k}, M = {m})"));
    }
    let num = chi_numerator(m - mu, m, m, draws, k);
    match num.sign() {
        Sign::NoSign => return Ok(f64::NEG_INFINITY),
        Sign::Minus => return Err(Error::Domain("alternating sum came out negative".into())),
        Sign::Plus => {}
    }
    let ln_num = ln_biguint(num.magnitude());
    let ln_den = draws as f64 * ln_biguint(&binom(m as i64, k as i64));
    Ok(n_nodes as f64 * entropy_he(gamma) + ln_num - ln_den)
}

/// `e^{N He(gamma)} P_f`, rounded up.
pub fn prob_not_ss_valid_ub(mu: u64, n_nodes: u64, m: u64, k: u64, gamma: f64, draws: u64) -> Result<f64> {
    let ln = ln_prob_not_ss_valid_ub(mu, n_nodes, m, k, gamma, draws)?;
    Ok((ln + LN_SLACK).exp())
}

/// Does k meet the target, with outward rounding?
fn meets(mu: u64, n_nodes: u64, m: u64, k: u64, gamma: f64, draws: u64, p_th: f64) -> Result<bool> {
    Ok(ln_prob_not_ss_valid_ub(mu, n_nodes, m, k, gamma, draws)? + LN_SLACK <= p_th.ln())
}

/// Result of the k* search, with the neighbour audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KStar {
    pub k: u64,
    pub ln_bound_at_k: f64,
    /// `ln` bound at `k - 1` (`None` when `k = 1`).
    pub ln_bound_below: Option<f64>,
}

/// Smallest k with `e^{N He(gamma)} P_f <= p_th`, for `draws` sampled nodes.
///
/// Binary search over k, relying on the bound being nonincreasing in k; the
/// two neighbours of the answer are re-evaluated and reported.
pub fn k_star(mu: u64, n_nodes: u64, m: u64, gamma: f64, draws: u64, p_th: f64) -> Result<KStar> {
    if !meets(mu, n_nodes, m, m, gamma, draws, p_th)? {
        return Err(Error::Infeasible(format!("no k <= {m} meets p_th = {p_th:e} at mu = {mu}")));
    }
    let (mut lo, mut hi) = (0u64, m); // lo fails (or is 0), hi meets
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mu, n_nodes, m, mid, gamma, draws, p_th)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let at = ln_prob_not_ss_valid_ub(mu, n_nodes, m, hi, gamma, draws)?;
    let below = if hi > 1 { Some(ln_prob_not_ss_valid_ub(mu, n_nodes, m, hi - 1, gamma, draws)?) } else { None };
    if below.is_some_and(|b| b + LN_SLACK <= p_th.ln()) {
        return Err(Error::Domain(format!("bound not monotone around k = {hi}")));
    }
    Ok(KStar { k: hi, ln_bound_at_k: at, ln_bound_below: below })
}

/// Same target by ascending scan from k = 1; used to cross-check [`k_star`].
pub fn k_star_scan(mu: u64, n_nodes: u64, m: u64, gamma: f64, draws: u64, p_th: f64) -> Result<u64> {
    for k in 1..=m {
        if meets(mu, n_nodes, m, k, gamma, draws, p_th)? {
            return Ok(k);
        }
    }
    Err(Error::Infeasible(format!("no k <= {m} meets p_th = {p_th:e} at mu = {mu}")))
}

/// `d_j = n_j - ceil((M - mu + 1) n_j / M) + 1`.
pub fn d_threshold(n_j: u64, m: u64, mu: u64) -> Result<u64> {
    if mu == 0 || mu > m {
        return Err(input_err!("need 1 <= mu <= M, got mu = {mu}, M = {m}"));
    }
    let kept = ((m - mu + 1) * n_j).div_ceil(m);
    Ok(n_j - kept + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert!((entropy_he(0.5) - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(entropy_he(0.0), 0.0);
        assert_eq!(entropy_he(1.0), 0.0);
        assert!((entropy_he(0.02) - 0.0980391).abs() < 1e-7);
    }

    #[test]
    fn random_subset_bound() {
        let p = prob_ub_random(0.875, 138, 256, 895, 0.02).unwrap();
        assert!(p <= 1e-8 && p > 9e-9, "{p}");
        assert!(prob_ub_random(0.875, 138, 256, 800, 0.02).unwrap() > 1e-8);
        assert!(prob_ub_random(0.875, 138, 256, 100, 0.02).is_err());
        let a = prob_ub_random(0.875, 138, 256, 900, 0.02).unwrap();
        let b = prob_ub_random(0.875, 138, 256, 901, 0.02).unwrap();
        assert!(b < a);
    }

    #[test]
    fn node_bound_and_k_min() {
        for (p_th, n, k) in [(1e-8, 138u64, 895u64), (1e-6, 185, 671), (1e-4, 232, 539)] {
            assert_eq!(n_upper_bound(0.875, 256, 0.02, p_th).floor() as u64, n);
            assert_eq!(k_f_min(0.875, n, 256, 0.02, p_th).unwrap().ceil() as u64, k);
        }
        assert!(matches!(k_f_min(0.875, 139, 256, 0.02, 1e-8), Err(Error::Infeasible(_))));
    }

    #[test]
    fn binomial_conventions() {
        assert_eq!(binom(5, 2), BigUint::from(10u32));
        assert!(binom(3, 5).is_zero());
        assert!(binom(3, -1).is_zero());
        assert_eq!(binom(0, 0), BigUint::one());
    }

    #[test]
    fn chi_full_draw_collects_everything() {
        assert!(chi_group_coupon(3, 5, 5, 2, 5).unwrap().is_zero());
        assert!(chi_group_coupon(3, 4, 6, 1, 6).unwrap().is_zero());
    }

    #[test]
    fn chi_is_a_probability() {
        let x = chi_group_coupon(4, 6, 6, 3, 2).unwrap();
        assert!(x > BigRational::zero() && x < BigRational::one());
        assert!(chi_group_coupon(6, 6, 6, 3, 2).is_err());
    }

    #[test]
    fn k_equal_m_is_valid() {
        assert_eq!(prob_not_ss_valid_ub(5, 100, 16, 16, 0.1, 10).unwrap(), 0.0);
    }

    #[test]
    fn thresholds() {
        assert_eq!(d_threshold(256, 256, 20).unwrap(), 20);
        assert_eq!(d_threshold(128, 256, 20).unwrap(), 10);
        assert_eq!(d_threshold(256, 256, 1).unwrap(), 1);
        assert!(d_threshold(10, 10, 0).is_err());
    }

    #[test]
    fn search_agrees_with_scan() {
        for mu in [2u64, 4, 7] {
            let a = k_star(mu, 40, 24, 0.1, 4, 1e-3).unwrap().k;
            let b = k_star_scan(mu, 40, 24, 0.1, 4, 1e-3).unwrap();
            assert_eq!(a, b, "mu = {mu}");
        }
    }
}
