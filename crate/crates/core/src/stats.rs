//! Distribution distances on one-dimensional samples.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, sqrt};

pub fn sort(v: &mut [f64]) {
    v.sort_unstable_by(f64::total_cmp);
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    sort(&mut v);
    v
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    sqrt(ss / (v.len() as f64 - 1.0))
}

/// sup |F_emp − F| over a sorted sample.
pub fn ks_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Domain("KS distance of an empty sample".into()));
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov–Smirnov statistic of sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS distance of an empty sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic p-value of a KS statistic `d` at effective size `n`, with the
/// usual small-sample correction.
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let sn = sqrt(n);
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = exp(-2.0 * kf * kf * lambda * lambda);
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS statistic and its p-value, for sorted samples.
pub fn ks_two_sample_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    let d = ks_two_sample(a, b)?;
    let ne = a.len() as f64 * b.len() as f64 / (a.len() + b.len()) as f64;
    Ok((d, ks_p_value(d, ne)))
}

/// W1 between equal-size sorted samples: mean |a₍ᵢ₎ − b₍ᵢ₎|.
pub fn wasserstein1_paired(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Domain("W1 of an empty sample".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Domain(format!("W1 sample sizes differ: {} vs {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// W1 = ∫|F_a − F_b| between sorted samples of any sizes.
pub fn wasserstein1_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("W1 of an empty sample".into()));
    }
    if a.len() == b.len() {
        return wasserstein1_paired(a, b);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut x = a[0].min(b[0]);
    let mut w = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => break,
        };
        w += (i as f64 / na - j as f64 / nb).abs() * (next - x);
        x = next;
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
    }
    Ok(w)
}

/// Grid size for the quantile coupling against a reference law.
pub const W1_GRID: usize = 10_000;

/// W1 between a sorted sample and a law given by its quantile function,
/// by quantile coupling at the midpoints of a 10⁴-cell grid on (0, 1).
pub fn wasserstein1_to_law<Q: Fn(f64) -> f64>(sorted: &[f64], quantile: Q) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Domain("W1 of an empty sample".into()));
    }
    let n = sorted.len();
    let mut w = 0.0;
    for k in 0..W1_GRID {
        let u = (k as f64 + 0.5) / W1_GRID as f64;
        let idx = ((u * n as f64) as usize).min(n - 1);
        w += (sorted[idx] - quantile(u)).abs();
    }
    Ok(w / W1_GRID as f64)
}

/// Batch-means standard error of `stat` over `batches` contiguous blocks.
pub fn batch_stderr<S: Fn(&[f64]) -> f64>(v: &[f64], batches: usize, stat: S) -> f64 {
    let size = v.len() / batches;
    if batches < 2 || size == 0 {
        return f64::NAN;
    }
    let values: Vec<f64> = (0..batches).map(|b| stat(&v[b * size..(b + 1) * size])).collect();
    std_dev(&values) / sqrt(batches as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    fn normal_cdf(x: f64) -> f64 {
        0.5 * crate::math::erfc(-x / core::f64::consts::SQRT_2)
    }

    #[test]
    fn ks_single_point_at_median() {
        assert_eq!(ks_sorted(&[0.0], normal_cdf).unwrap(), 0.5);
        assert!((ks_sorted(&[-1e300], normal_cdf).unwrap() - 1.0).abs() < 1e-12);
        assert!(ks_sorted(&[], normal_cdf).is_err());
    }

    #[test]
    fn ks_of_own_law_is_small() {
        let mut rng = RandomStream::new(17);
        let n = 100_000;
        let v = sorted((0..n).map(|_| rng.standard_normal()).collect());
        assert!(ks_sorted(&v, normal_cdf).unwrap() < 1.95 / sqrt(n as f64));
    }

    #[test]
    fn w1_examples() {
        assert_eq!(wasserstein1_paired(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(wasserstein1_paired(&[0.0], &[1.0]).unwrap(), 1.0);
        assert!(wasserstein1_paired(&[0.0], &[1.0, 2.0]).is_err());
        let mut rng = RandomStream::new(2);
        let n = 100_000;
        let a = sorted((0..n).map(|_| rng.standard_normal()).collect());
        let b = sorted((0..n).map(|_| rng.standard_normal() + 0.1).collect());
        assert!((wasserstein1_paired(&a, &b).unwrap() - 0.1).abs() < 0.01);
    }

    #[test]
    fn general_w1_matches_paired() {
        let mut rng = RandomStream::new(8);
        let a = sorted((0..500).map(|_| rng.uniform()).collect());
        let b = sorted((0..500).map(|_| rng.uniform() * 2.0).collect());
        let paired = wasserstein1_paired(&a, &b).unwrap();
        // duplicating every point of b leaves its law unchanged
        let b2 = sorted(b.iter().chain(b.iter()).copied().collect());
        assert!((wasserstein1_two_sample(&a, &b2).unwrap() - paired).abs() < 1e-12);
        assert!((wasserstein1_two_sample(&[0.0, 1.0], &[0.5]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn w1_to_law_and_shift() {
        let mut rng = RandomStream::new(21);
        let v = sorted((0..200_000).map(|_| 3.0 * rng.uniform()).collect());
        let w = wasserstein1_to_law(&v, |u| 3.0 * u - 0.25).unwrap();
        assert!((w - 0.25).abs() < 0.01);
    }

    #[test]
    fn two_sample_ks_p_values() {
        let mut rng = RandomStream::new(6);
        let a = sorted((0..5000).map(|_| rng.standard_normal()).collect());
        let b = sorted((0..5000).map(|_| rng.standard_normal()).collect());
        let c = sorted((0..5000).map(|_| rng.standard_normal() + 0.2).collect());
        assert!(ks_two_sample_test(&a, &b).unwrap().1 > 0.01);
        assert!(ks_two_sample_test(&a, &c).unwrap().1 < 1e-6);
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert!((ks_p_value(1.36 / sqrt(1e6), 1e6) - 0.05).abs() < 0.002);
    }
}
