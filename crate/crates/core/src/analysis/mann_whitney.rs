use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Pooled sample size up to which the p-value is computed by full enumeration.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// `U` statistic of the first sample.
    pub u: f64,
    /// One-sided p-value for "first sample stochastically greater".
    pub p: f64,
    pub exact: bool,
}

/// Midranks (1-based) of the pooled values, in input order.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn check(sample_a: &[f64], sample_b: &[f64]) -> Result<()> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::Analysis(
            "Mann-Whitney U needs two non-empty samples".into(),
        ));
    }
    if sample_a.iter().chain(sample_b).any(|v| v.is_nan()) {
        return Err(Error::Analysis("Mann-Whitney U input contains NaN".into()));
    }
    Ok(())
}

fn statistic(ranks: &[f64], na: usize) -> f64 {
    let rank_sum: f64 = ranks[..na].iter().sum();
    rank_sum - (na * (na + 1)) as f64 / 2.0
}

/// One-sided test of H1: `sample_a` tends to be larger than `sample_b`.
///
/// Exact permutation p-value over the pooled midranks when the pooled size is at most
/// [`EXACT_LIMIT`], otherwise the tie-corrected normal approximation with continuity
/// correction.
pub fn mann_whitney_one_sided(sample_a: &[f64], sample_b: &[f64]) -> Result<MannWhitney> {
    if sample_a.len() + sample_b.len() <= EXACT_LIMIT {
        mann_whitney_exact(sample_a, sample_b)
    } else {
        mann_whitney_normal(sample_a, sample_b)
    }
}

pub fn mann_whitney_exact(sample_a: &[f64], sample_b: &[f64]) -> Result<MannWhitney> {
    check(sample_a, sample_b)?;
    let na = sample_a.len();
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let n = pooled.len();
    if n > 24 {
        return Err(Error::Analysis(format!(
            "exact enumeration over {n} values is too large"
        )));
    }
    let ranks = midranks(&pooled);
    let u = statistic(&ranks, na);
    // midranks are multiples of 1/2, so doubled rank sums are exact integers
    let doubled: Vec<u64> = ranks.iter().map(|r| (2.0 * r) as u64).collect();
    let observed: u64 = doubled[..na].iter().sum();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        let sum: u64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| doubled[i])
            .sum();
        if sum >= observed {
            hits += 1;
        }
    }
    Ok(MannWhitney {
        u,
        p: hits as f64 / total as f64,
        exact: true,
    })
}

pub fn mann_whitney_normal(sample_a: &[f64], sample_b: &[f64]) -> Result<MannWhitney> {
    check(sample_a, sample_b)?;
    let (na, nb) = (sample_a.len() as f64, sample_b.len() as f64);
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let n = na + nb;
    let ranks = midranks(&pooled);
    let u = statistic(&ranks, sample_a.len());

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = (u - na * nb / 2.0 - 0.5) / variance.sqrt();
        1.0 - Normal::standard().cdf(z)
    };
    Ok(MannWhitney { u, p, exact: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_triples() {
        let r = mann_whitney_one_sided(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u, 9.0);
        assert_eq!(r.p, 0.05);
        assert!(r.exact);
        let rev = mann_whitney_one_sided(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(rev.u, 0.0);
        assert_eq!(rev.p, 1.0);
    }

    #[test]
    fn identical_samples_are_not_significant() {
        let a = [1.0, 2.0, 2.0, 5.0];
        assert!(mann_whitney_one_sided(&a, &a).unwrap().p >= 0.5);
        let big: Vec<f64> = (0..15).map(|i| (i % 4) as f64).collect();
        assert!(mann_whitney_one_sided(&big, &big).unwrap().p >= 0.5);
    }

    #[test]
    fn exact_with_ties() {
        // brute-force permutation count over midranks: 125 of 126 assignments
        let r = mann_whitney_exact(&[1.0, 2.0, 2.0, 3.0], &[2.0, 3.0, 3.0, 4.0, 4.0]).unwrap();
        assert_eq!(r.u, 3.0);
        assert!((r.p - 125.0 / 126.0).abs() < 1e-15);
    }

    #[test]
    fn normal_approximation_reference_values() {
        let a = [
            12.1, 14.3, 9.8, 15.2, 13.7, 11.4, 16.8, 10.9, 14.9, 13.2, 12.8, 15.7, 11.9, 14.1,
            17.3, 13.5, 12.4, 16.1, 10.2, 15.0,
        ];
        let b = [
            10.4, 11.8, 9.1, 12.6, 10.7, 13.9, 8.8, 11.2, 12.0, 9.7, 10.1, 13.1, 11.5, 9.4, 12.3,
            10.8, 14.6, 8.5, 11.0, 12.9,
        ];
        let r = mann_whitney_one_sided(&a, &b).unwrap();
        assert!(!r.exact);
        assert_eq!(r.u, 321.0);
        assert!((r.p - 0.000_557_973_617_588_505_6).abs() < 1e-9, "{}", r.p);

        let a2 = [
            3., 5., 5., 7., 8., 8., 8., 9., 10., 12., 4., 6., 6., 7., 9., 11., 11., 13., 5., 8.,
        ];
        let b2 = [
            2., 4., 4., 5., 6., 6., 7., 7., 8., 9., 3., 5., 5., 6., 8., 10., 4., 7., 6., 9.,
        ];
        let r = mann_whitney_one_sided(&a2, &b2).unwrap();
        assert_eq!(r.u, 271.0);
        assert!((r.p - 0.027_403_126_130_247_805).abs() < 1e-9, "{}", r.p);
    }

    #[test]
    fn constant_pool_has_unit_p() {
        let r = mann_whitney_normal(&[2.0; 8], &[2.0; 7]).unwrap();
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(mann_whitney_one_sided(&[], &[1.0]).is_err());
        assert!(mann_whitney_one_sided(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }
}
