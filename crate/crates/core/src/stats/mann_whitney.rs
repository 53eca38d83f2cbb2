use statrs::distribution::{ContinuousCDF, Normal};

use super::{require, TestKind, TestResult};
use crate::error::Result;

/// Largest pooled size handled by exact enumeration.
pub const EXACT_MAX_TOTAL: usize = 20;

/// Midranks (1-based) of the pooled sample `a ++ b`.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// Two-tailed Mann-Whitney U test.
///
/// The statistic is `min(U_a, U_b)`. For pooled sizes up to
/// [`EXACT_MAX_TOTAL`] the p-value is exact: every split of the observed
/// midranks into groups of sizes `n₁, n₂` is counted. Larger samples use the
/// normal approximation with tie and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require(a, 2)?;
    require(b, 2)?;
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u_a = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let n1n2 = (n1 * n2) as f64;
    let u = u_a.min(n1n2 - u_a);

    let p = if n1 + n2 <= EXACT_MAX_TOTAL {
        exact_p(&ranks, n1, rank_sum_a)
    } else {
        let total = (n1 + n2) as f64;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (total * (total - 1.0));
        let var = n1n2 / 12.0 * ((total + 1.0) - tie_term);
        let dev = (u_a - n1n2 / 2.0).abs();
        if var <= 0.0 || dev <= 0.5 {
            1.0
        } else {
            let z = (dev - 0.5) / var.sqrt();
            2.0 * Normal::standard().sf(z)
        }
    };
    Ok(TestResult::new(TestKind::U, u, None, p))
}

/// `P(|R − E R| ≥ |r_obs − E R|)` for the rank sum `R` of a random
/// `n1`-subset of `ranks`.
fn exact_p(ranks: &[f64], n1: usize, observed: f64) -> f64 {
    // Midranks are multiples of 1/2, so doubled ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled rank sum s
    let mut counts = vec![vec![0f64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            let (lo, hi) = counts.split_at_mut(k);
            for s in (r..=max_sum).rev() {
                hi[0][s] += lo[k - 1][s - r];
            }
        }
    }
    let total_rank = max_sum as i64;
    let n = ranks.len() as i64;
    // twice the expected doubled rank sum: 2 * n1 * sum / n, kept integral by scaling with n
    let center_scaled = 2 * n1 as i64 * total_rank;
    let obs_dev = ((2.0 * observed).round() as i64 * 2 * n - center_scaled).abs();
    let mut extreme = 0.0;
    let mut all = 0.0;
    for (s, &c) in counts[n1].iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        all += c;
        if (s as i64 * 2 * n - center_scaled).abs() >= obs_dev {
            extreme += c;
        }
    }
    extreme / all
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples() {
        let a = [1.0, 3.0, 5.0, 7.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.statistic, 8.0);
        assert_eq!(r.p_value, 1.0);
        let big: Vec<f64> = (0..30).map(|i| (i * 7 % 13) as f64).collect();
        let r = mann_whitney_u(&big, &big).unwrap();
        assert_eq!(r.statistic, 450.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn complete_separation() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [5.0, 6.0, 7.0, 8.0, 9.0];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.statistic, 0.0);
        // two of the C(9,4) = 126 splits are as extreme
        assert_relative_eq!(r.p_value, 2.0 / 126.0, max_relative = 1e-15);
        assert_eq!(mann_whitney_u(&b, &a).unwrap().p_value, r.p_value);
    }

    #[test]
    fn midranks_with_ties() {
        let (r, t) = midranks(&[2.0, 1.0, 2.0, 3.0]);
        assert_eq!(r, vec![2.5, 1.0, 2.5, 4.0]);
        assert_eq!(t, vec![1, 2, 1]);
    }

    #[test]
    fn all_tied() {
        let r = mann_whitney_u(&[1.0; 5], &[1.0; 6]).unwrap();
        assert_eq!(r.p_value, 1.0);
        let r = mann_whitney_u(&[1.0; 15], &[1.0; 16]).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn large_sample_separation() {
        let a: Vec<f64> = (0..25).map(f64::from).collect();
        let b: Vec<f64> = (100..125).map(f64::from).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.p_value < 1e-8);
    }
}
