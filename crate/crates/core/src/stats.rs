//! Small order-statistics and testing helpers.

use alloc::vec::Vec;

use crate::math::{exp, lgamma, ln};

/// Linear-interpolation quantile of an ascending slice (`q ∈ [0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty slice");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Median taking the lower-middle element for even counts. Sorts in place.
pub fn lower_median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

/// Conventional median (mean of the two middle elements for even counts).
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// One-sided sign test of `H1: median(diff) < 0`.
///
/// Zero differences are discarded; the p-value is `P(Bin(n', 1/2) ≥ #negative)`.
pub fn sign_test_less(diffs: &[f64]) -> f64 {
    let neg = diffs.iter().filter(|d| **d < 0.0).count();
    let nonzero = diffs.iter().filter(|d| **d != 0.0).count();
    binomial_upper_tail(nonzero, neg)
}

/// `P(X ≥ k)` for `X ~ Bin(n, 1/2)`.
pub fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let nf = n as f64;
    let log_half_n = nf * ln(0.5);
    let total: f64 = (k..=n)
        .map(|j| {
            let jf = j as f64;
            exp(lgamma(nf + 1.0) - lgamma(jf + 1.0) - lgamma(nf - jf + 1.0) + log_half_n)
        })
        .sum();
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(lower_median(&mut [4.0, 1.0, 3.0, 2.0]), 2.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn binomial_tail() {
        assert!((binomial_upper_tail(2, 1) - 0.75).abs() < 1e-12);
        assert!((binomial_upper_tail(3, 3) - 0.125).abs() < 1e-12);
        assert!((binomial_upper_tail(10, 0) - 1.0).abs() < 1e-12);
        // 1 + 10 + 45 of 1024
        assert!((binomial_upper_tail(10, 8) - 56.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn sign_test_direction() {
        let all_neg = [-1.0; 20];
        assert!(sign_test_less(&all_neg) < 1e-5);
        let all_pos = [1.0; 20];
        assert!((sign_test_less(&all_pos) - 1.0).abs() < 1e-12);
        assert_eq!(sign_test_less(&[0.0, 0.0]), 1.0);
    }
}
