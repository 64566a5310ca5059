//! Numeric kernels: midranks, the normal tail, rank and proportion tests.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based ranks with ties replaced by the mean of the ranks they span.
pub fn midranks(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let values: Vec<f64> = values.into_iter().collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let rank = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of the tie groups among `values`.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}

/// Complementary error function.
///
/// Uses the all-positive-term series `erf(x) = 2/√π e^{-x²} Σ 2ⁿx^{2n+1}/(2n+1)!!`
/// below 2.5 and a fixed-depth continued fraction above, both summed in a fixed
/// order so results do not depend on the platform.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term > sum * 1e-17 {
            n += 1.0;
            term *= 2.0 * x2 / (2.0 * n + 1.0);
            sum += term;
        }
        let erf = 2.0 / std::f64::consts::PI.sqrt() * (-x2).exp() * sum;
        return 1.0 - erf;
    }
    if x > 27.0 {
        return 0.0;
    }
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
    let mut frac = x;
    for k in (1..=120).rev() {
        frac = x + (k as f64 / 2.0) / frac;
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / frac
}

/// Upper tail of the standard normal, `P(Z > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(z: f64) -> f64 {
    normal_sf(-z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `"U"` or `"z"`.
    pub statistic_name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub n1: u64,
    pub n2: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<u64>,
}

impl TestResult {
    pub fn stars(&self) -> Stars {
        Stars::for_p(self.p_value)
    }
}

/// Significance marks: `***` p ≤ 0.001, `**` p ≤ 0.01, `*` p ≤ 0.05, else NS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stars {
    #[serde(rename = "***")]
    Three,
    #[serde(rename = "**")]
    Two,
    #[serde(rename = "*")]
    One,
    #[serde(rename = "NS")]
    NotSignificant,
}

impl Stars {
    pub fn for_p(p: f64) -> Stars {
        if p <= 0.001 {
            Stars::Three
        } else if p <= 0.01 {
            Stars::Two
        } else if p <= 0.05 {
            Stars::One
        } else {
            Stars::NotSignificant
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::Three => "***",
            Stars::Two => "**",
            Stars::One => "*",
            Stars::NotSignificant => "NS",
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Largest combined sample size for which the exact U distribution is used.
pub const EXACT_MWU_MAX_N: usize = 12;

/// Null distribution of U: `counts[u]` is the number of ways to choose the
/// first sample's ranks from `1..=n1+n2` so that its U equals `u`.
///
/// Recurrence on the largest rank: it belongs either to sample one (adding
/// `n2` to U) or to sample two.
pub fn u_null_counts(n1: usize, n2: usize) -> Vec<u64> {
    let max_u = n1 * n2;
    // table[a][b] = counts for sizes (a, b)
    let mut table: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); n2 + 1]; n1 + 1];
    for a in 0..=n1 {
        for b in 0..=n2 {
            let mut counts = vec![0u64; a * b + 1];
            if a == 0 || b == 0 {
                counts[0] = 1;
            } else {
                for (u, c) in table[a - 1][b].iter().enumerate() {
                    counts[u + b] += c;
                }
                for (u, c) in table[a][b - 1].iter().enumerate() {
                    counts[u] += c;
                }
            }
            table[a][b] = counts;
        }
    }
    let out = std::mem::take(&mut table[n1][n2]);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

/// Two-sided Mann–Whitney U test of `a` against `b`.
///
/// The reported U belongs to `a` (pairs where `a` wins plus half the ties).
/// Tie-free samples with `n1 + n2 ≤ 12` get the exact two-sided p from the
/// enumerated null distribution; otherwise the normal approximation with tie
/// and continuity corrections is used.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    mwu(a, b, true)
}

/// [`mann_whitney_u`] with the normal approximation regardless of size.
pub fn mann_whitney_u_normal(a: &[f64], b: &[f64]) -> Result<TestResult> {
    mwu(a, b, false)
}

fn mwu(a: &[f64], b: &[f64], allow_exact: bool) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Invalid(
            "Mann-Whitney U needs two non-empty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("Mann-Whitney U needs finite values".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(all.iter().copied());
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let ties = tie_groups(&all);
    let tie_free = ties.iter().all(|&t| t == 1);

    let (p, method) = if allow_exact && tie_free && n1 + n2 <= EXACT_MWU_MAX_N {
        (exact_two_sided(n1, n2, u), Method::Exact)
    } else {
        (normal_two_sided(n1, n2, u, &ties), Method::NormalApprox)
    };
    Ok(TestResult {
        statistic_name: "U".into(),
        statistic: u,
        p_value: p.clamp(0.0, 1.0),
        method,
        n1: n1 as u64,
        n2: n2 as u64,
        k1: None,
        k2: None,
    })
}

fn exact_two_sided(n1: usize, n2: usize, u: f64) -> f64 {
    let counts = u_null_counts(n1, n2);
    let total: u64 = counts.iter().sum();
    let u = u.round() as usize;
    let lower: u64 = counts[..=u].iter().sum();
    let upper: u64 = counts[u..].iter().sum();
    let tail = lower.min(upper);
    (2.0 * tail as f64 / total as f64).min(1.0)
}

fn normal_two_sided(n1: usize, n2: usize, u: f64, ties: &[usize]) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let mean = n1f * n2f / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var.is_nan() || var <= 0.0 {
        return 1.0;
    }
    let diff = ((u - mean).abs() - 0.5).max(0.0);
    (2.0 * normal_sf(diff / var.sqrt())).min(1.0)
}

/// Pooled-variance two-proportion z-test of `k1/n1` against `k2/n2`.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<TestResult> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Invalid(
            "two-proportion z-test needs n1, n2 >= 1".into(),
        ));
    }
    if k1 > n1 || k2 > n2 {
        return Err(Error::Invalid(format!(
            "successes exceed trials: {k1}/{n1}, {k2}/{n2}"
        )));
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    let var = pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64);
    let (z, p) = if var > 0.0 {
        let z = (p1 - p2) / var.sqrt();
        (z, (2.0 * normal_sf(z.abs())).clamp(0.0, 1.0))
    } else {
        (0.0, 1.0)
    };
    Ok(TestResult {
        statistic_name: "z".into(),
        statistic: z,
        p_value: p,
        method: Method::NormalApprox,
        n1,
        n2,
        k1: Some(k1),
        k2: Some(k2),
    })
}

/// Spearman rank correlation (Pearson correlation of midranks). Returns 0 when
/// either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Invalid(
            "spearman needs two equal-length non-empty samples".into(),
        ));
    }
    let rx = midranks(x.iter().copied());
    let ry = midranks(y.iter().copied());
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference tails computed with 40-digit arithmetic.
    const NORMAL_SF: &[(f64, f64)] = &[
        (0.0, 0.5),
        (0.5, 0.308_537_538_725_986_9),
        (1.0, 0.158_655_253_931_457_05),
        (1.959_963_984_540_054, 0.025_000_000_000_000_014),
        (2.5, 0.006_209_665_325_776_135),
        (3.0, 0.001_349_898_031_630_094_5),
        (3.535_533_905_932_737_8, 0.000_203_476_008_722_479_33),
        (5.0, 2.866_515_718_791_939e-7),
        (8.0, 6.220_960_574_271_784e-16),
        (12.0, 1.776_482_112_077_679e-33),
    ];

    #[test]
    fn normal_tail_matches_reference() {
        for &(z, want) in NORMAL_SF {
            let got = normal_sf(z);
            assert!((got - want).abs() < 1e-15, "z={z}: {got} vs {want}");
            assert!(((got - want) / want).abs() < 1e-11, "z={z}: rel error");
            assert!((normal_cdf(-z) - want).abs() < 1e-15);
        }
        assert!((normal_sf(-1.0) - (1.0 - 0.158_655_253_931_457_05)).abs() < 1e-15);
    }

    #[test]
    fn erfc_continuous_across_branch() {
        let below = erfc(2.5 - 1e-12);
        let above = erfc(2.5);
        assert!((below - above).abs() < 1e-14);
    }

    #[test]
    fn midranks_share_ties() {
        assert_eq!(midranks([3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn identical_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.statistic, 4.5);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.method, Method::NormalApprox);
    }

    #[test]
    fn exact_small_cases() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.method, Method::Exact);
        assert!((r.p_value - 1.0 / 3.0).abs() < 1e-15);

        let r = mann_whitney_u(&[1.0, 2.0, 3.0, 4.0], &[10.0, 11.0, 12.0, 13.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 2.0 / 70.0).abs() < 1e-15);
    }

    #[test]
    fn null_counts_sum_to_binomial() {
        let c = u_null_counts(2, 2);
        assert_eq!(c, vec![1, 1, 2, 1, 1]);
        assert_eq!(u_null_counts(6, 6).iter().sum::<u64>(), 924);
        assert_eq!(u_null_counts(0, 3), vec![1]);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
    }

    #[test]
    fn z_test_examples() {
        let r = two_proportion_z(30, 100, 10, 100).unwrap();
        // pooled 0.2, se = sqrt(0.2 * 0.8 * 0.02) = sqrt(0.0032)
        let z = 0.2 / 0.0032f64.sqrt();
        assert!((r.statistic - z).abs() < 1e-12);
        assert!((r.statistic - 3.536).abs() < 1e-3);
        assert!((r.p_value - 4.069_520_174_449_587e-4).abs() < 1e-12);

        let r = two_proportion_z(5, 10, 10, 20).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = two_proportion_z(0, 10, 0, 10).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = two_proportion_z(10, 10, 7, 7).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        assert!(two_proportion_z(11, 10, 0, 10).is_err());
        assert!(two_proportion_z(0, 0, 0, 10).is_err());
    }

    #[test]
    fn star_convention() {
        assert_eq!(Stars::for_p(0.001), Stars::Three);
        assert_eq!(Stars::for_p(0.0011), Stars::Two);
        assert_eq!(Stars::for_p(0.01), Stars::Two);
        assert_eq!(Stars::for_p(0.05), Stars::One);
        assert_eq!(Stars::for_p(0.0501), Stars::NotSignificant);
        assert_eq!(Stars::for_p(0.56).to_string(), "NS");
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0
        );
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(spearman(&[1.0, 1.0], &[3.0, 2.0]).unwrap(), 0.0);
        assert!(spearman(&[1.0], &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn u_statistics_complement(
            a in prop::collection::vec(0u8..20, 1..15),
            b in prop::collection::vec(0u8..20, 1..15),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ab = mann_whitney_u(&a, &b).unwrap();
            let ba = mann_whitney_u(&b, &a).unwrap();
            prop_assert_eq!(ab.statistic + ba.statistic, (a.len() * b.len()) as f64);
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
        }

        #[test]
        fn z_antisymmetric(n1 in 1u64..200, n2 in 1u64..200, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0) {
            let k1 = (f1 * n1 as f64) as u64;
            let k2 = (f2 * n2 as f64) as u64;
            let ab = two_proportion_z(k1, n1, k2, n2).unwrap();
            let ba = two_proportion_z(k2, n2, k1, n1).unwrap();
            prop_assert_eq!(ab.statistic, -ba.statistic);
            prop_assert_eq!(ab.p_value, ba.p_value);
        }
    }
}
