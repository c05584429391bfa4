//! Nonparametric tests: one-sided Wilcoxon signed-rank, Spearman rank
//! correlation, Bonferroni adjustment and median percent-difference.
//!
//! Special functions (log-gamma, regularized incomplete gamma and beta) are
//! implemented here so the p-values do not depend on an external numerics
//! crate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest effective sample size with an exact null distribution.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("paired inputs differ in length: {left} vs {right}")]
    PairError { left: usize, right: usize },
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("all paired differences are zero")]
    DegenerateTest,
    #[error("correlation undefined for constant input")]
    UndefinedCorrelation,
    #[error("p-value {0} outside [0, 1]")]
    InvalidP(f64),
    #[error("bonferroni m={m} is smaller than the {tests} tests")]
    InvalidM { m: usize, tests: usize },
    #[error("reference median is zero")]
    DivisionByZero,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("exact distribution limited to n_eff <= {EXACT_MAX_N}, got {0}")]
    ExactTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApprox,
    TApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// W+ for Wilcoxon, rho for Spearman.
    pub statistic: f64,
    pub p_value: f64,
    pub n_eff: usize,
    pub method: TestMethod,
}

/// 1-based ranks with ties given the mean of the ranks they span.
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
        // Ranks start+1..=end averaged.
        let r = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::PairError {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Wilcoxon signed-rank test of `a - b` against a symmetric null,
/// exact for `n_eff <= 25` and normal-approximated above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult, StatsError> {
    wilcoxon_with_method(a, b, alternative, None)
}

/// As [`wilcoxon_signed_rank`] with the method optionally forced. Forcing
/// `Exact` above [`EXACT_MAX_N`] is an error; `TApprox` is treated as
/// automatic selection.
pub fn wilcoxon_with_method(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
    method: Option<TestMethod>,
) -> Result<TestResult, StatsError> {
    check_pair(a, b)?;
    if a.len() < 2 {
        return Err(StatsError::TooFewObservations { need: 2, got: a.len() });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&v| v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Err(StatsError::DegenerateTest);
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let method = match method {
        Some(TestMethod::Exact) if n > EXACT_MAX_N => return Err(StatsError::ExactTooLarge(n)),
        Some(TestMethod::Exact) => TestMethod::Exact,
        Some(TestMethod::NormalApprox) => TestMethod::NormalApprox,
        _ if n <= EXACT_MAX_N => TestMethod::Exact,
        _ => TestMethod::NormalApprox,
    };
    let p = match method {
        TestMethod::Exact => exact_signed_rank_p(&ranks, w_plus, alternative),
        _ => normal_signed_rank_p(&abs, w_plus, alternative),
    };
    Ok(TestResult {
        statistic: w_plus,
        p_value: p.clamp(0.0, 1.0),
        n_eff: n,
        method,
    })
}

/// Exact tail probability of W+ given the (possibly tied) ranks. Doubled
/// midranks are integers, so the null distribution is a convolution over
/// integer sums, one factor `(1 + x^{2 r_i})` per observation.
fn exact_signed_rank_p(ranks: &[f64], w_plus: f64, alternative: Alternative) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            let c = counts[s];
            if c != 0 {
                counts[s + r] += c;
            }
        }
        reach += r;
    }
    let w = (2.0 * w_plus).round() as usize;
    let tail: u64 = match alternative {
        Alternative::Greater => counts[w..].iter().sum(),
        Alternative::Less => counts[..=w].iter().sum(),
    };
    tail as f64 / (1u64 << ranks.len()) as f64
}

fn normal_signed_rank_p(abs: &[f64], w_plus: f64, alternative: Alternative) -> f64 {
    let n = abs.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let sd = var.sqrt();
    match alternative {
        Alternative::Greater => normal_sf((w_plus - mean - 0.5) / sd),
        Alternative::Less => normal_cdf((w_plus - mean + 0.5) / sd),
    }
}

/// Spearman rank correlation with a two-sided Student-t p-value.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    check_pair(x, y)?;
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations { need: 3, got: n });
    }
    let rho = pearson(&midranks(x), &midranks(y)).ok_or(StatsError::UndefinedCorrelation)?;
    let df = (n - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t2 = rho * rho * df / (1.0 - rho * rho);
        regularized_beta(df / (df + t2), df / 2.0, 0.5)
    };
    Ok(TestResult {
        statistic: rho,
        p_value: p.clamp(0.0, 1.0),
        n_eff: n,
        method: TestMethod::TApprox,
    })
}

/// Pearson correlation, `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `min(1, p * m)` for each p.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>, StatsError> {
    if m < p_values.len() || m == 0 {
        return Err(StatsError::InvalidM {
            m,
            tests: p_values.len(),
        });
    }
    p_values
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok((p * m as f64).min(1.0))
            } else {
                Err(StatsError::InvalidP(p))
            }
        })
        .collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    crate::affect::median(&mut v)
}

/// `100 * (median(a) - median(b)) / median(b)`.
pub fn median_percent_diff(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    let ma = median(a).ok_or(StatsError::TooFewObservations { need: 1, got: 0 })?;
    let mb = median(b).ok_or(StatsError::TooFewObservations { need: 1, got: 0 })?;
    percent_diff(ma, mb)
}

/// `100 * (a - b) / b` for already-computed medians.
pub fn percent_diff(a: f64, b: f64) -> Result<f64, StatsError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(StatsError::NonFinite);
    }
    if b == 0.0 {
        return Err(StatsError::DivisionByZero);
    }
    Ok(100.0 * (a - b) / b)
}

// Special functions.

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        return 1.0 - gamma_p_series(a, x);
    }
    // Lentz continued fraction.
    let ln_pre = -x + a * x.ln() - ln_gamma(a);
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (ln_pre.exp() * h).clamp(0.0, 1.0)
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum * (-x + a * x.ln() - ln_gamma(a)).exp()).clamp(0.0, 1.0)
}

/// Complementary error function via `erfc(x) = Q(1/2, x^2)` for `x >= 0`.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        regularized_gamma_q(0.5, x * x)
    } else {
        2.0 - regularized_gamma_q(0.5, x * x)
    }
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `1 - Phi(z)` without cancellation in the upper tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    // The continued fraction converges fastest below the mean.
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(x, a, b) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b).clamp(0.0, 1.0)
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    /// Enumerates all sign patterns directly.
    fn brute_force_p(d: &[f64], alt: Alternative) -> f64 {
        let nz: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
        let ranks = midranks(&nz.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let obs: f64 = nz.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
        let n = nz.len();
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            let hit = match alt {
                Alternative::Greater => w >= obs - 1e-9,
                Alternative::Less => w <= obs + 1e-9,
            };
            hits += u64::from(hit);
        }
        hits as f64 / (1u64 << n) as f64
    }

    fn wd(d: &[f64], alt: Alternative) -> TestResult {
        wilcoxon_signed_rank(d, &vec![0.0; d.len()], alt).unwrap()
    }

    #[test]
    fn wilcoxon_examples() {
        let r = wd(&[1.0, 2.0, 3.0, 4.0, 5.0], Alternative::Greater);
        assert_eq!(r.statistic, 15.0);
        assert_eq!(r.p_value, 0.03125);
        assert_eq!(r.method, TestMethod::Exact);

        let r = wd(&[1.0, -1.0], Alternative::Greater);
        assert_eq!(r.statistic, 1.5);
        assert_eq!(r.p_value, 0.75);

        let r = wd(&[0.0, 0.0, 1.0], Alternative::Greater);
        assert_eq!(r.n_eff, 1);
        assert_eq!(r.p_value, 0.5);
    }

    #[test]
    fn wilcoxon_errors() {
        assert_eq!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0], Alternative::Greater).unwrap_err(),
            StatsError::PairError { left: 2, right: 1 }
        );
        assert_eq!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0], Alternative::Greater).unwrap_err(),
            StatsError::DegenerateTest
        );
        let big: Vec<f64> = (1..=30).map(f64::from).collect();
        assert_eq!(
            wilcoxon_with_method(&big, &[0.0; 30], Alternative::Greater, Some(TestMethod::Exact)).unwrap_err(),
            StatsError::ExactTooLarge(30)
        );
        assert_eq!(wd(&big, Alternative::Greater).method, TestMethod::NormalApprox);
    }

    #[test]
    fn exact_matches_brute_force_with_ties() {
        let d = [0.5, -0.5, 1.0, 1.0, -2.0, 3.0, 0.0, 0.5];
        for alt in [Alternative::Greater, Alternative::Less] {
            assert!((wd(&d, alt).p_value - brute_force_p(&d, alt)).abs() < 1e-15);
        }
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap().statistic, 1.0);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap().statistic, -1.0);
        let r = spearman_rho(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r.statistic - 4.5 / 22.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(), StatsError::UndefinedCorrelation);
        assert!(matches!(spearman_rho(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFewObservations { .. })));
    }

    #[test]
    fn spearman_p_matches_student_t() {
        let x = [3.1, 1.2, 5.5, 4.4, 2.0, 6.1, 7.3, 0.4, 9.9, 8.2];
        let y = [2.0, 1.0, 4.0, 6.0, 3.0, 5.0, 9.0, 0.5, 7.0, 8.0];
        let r = spearman_rho(&x, &y).unwrap();
        let df = 8.0;
        let t = r.statistic * (df / (1.0 - r.statistic * r.statistic)).sqrt();
        let want = 2.0 * (1.0 - StudentsT::new(0.0, 1.0, df).unwrap().cdf(t.abs()));
        assert!((r.p_value - want).abs() < 1e-10, "{} vs {want}", r.p_value);
    }

    #[test]
    fn special_functions_match_reference() {
        // 0.5 * erfc(-z / sqrt 2) from the C library; statrs is only good
        // to about 1e-11 here.
        let reference = [
            (-8.0, 6.220960574271819e-16),
            (-3.3, 4.834241423837776e-4),
            (-1.0, 0.15865525393145707),
            (-0.2, 0.420740290560897),
            (0.0, 0.5),
            (0.7, 0.758036347776927),
            (1.96, 0.9750021048517795),
            (4.5, 0.9999966023268753),
        ];
        for (z, want) in reference {
            assert!((normal_cdf(z) / want - 1.0).abs() < 1e-13, "z={z}");
        }
        assert!((normal_sf(8.0) / 6.220960574271819e-16 - 1.0).abs() < 1e-13);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
        for (x, a, b) in [(0.3, 2.0, 5.0), (0.9, 0.5, 0.5), (0.01, 10.0, 0.5), (0.7, 30.0, 0.5)] {
            let want = statrs::function::beta::beta_reg(a, b, x);
            assert!((regularized_beta(x, a, b) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(&[0.01, 0.02], 2).unwrap(), vec![0.02, 0.04]);
        assert_eq!(bonferroni(&[0.5], 36).unwrap(), vec![1.0]);
        assert_eq!(bonferroni(&[0.0], 7).unwrap(), vec![0.0]);
        assert_eq!(bonferroni(&[1.5], 2).unwrap_err(), StatsError::InvalidP(1.5));
        assert!(matches!(bonferroni(&[0.1, 0.2], 1), Err(StatsError::InvalidM { .. })));
    }

    #[test]
    fn percent_diff_examples() {
        assert!((median_percent_diff(&[0.6345], &[0.5751]).unwrap() - 10.33).abs() < 0.005);
        assert!((percent_diff(0.4963026, 0.2864076).unwrap() - 73.29).abs() < 0.005);
        assert_eq!(median_percent_diff(&[1.0, 3.0], &[2.0]).unwrap(), 0.0);
        assert_eq!(percent_diff(1.0, 0.0).unwrap_err(), StatsError::DivisionByZero);
    }

    proptest! {
        #[test]
        fn exact_equals_enumeration(d in prop::collection::vec(-4i32..=4, 2..11)) {
            let d: Vec<f64> = d.into_iter().map(f64::from).collect();
            prop_assume!(d.iter().any(|v| *v != 0.0));
            for alt in [Alternative::Greater, Alternative::Less] {
                prop_assert!((wd(&d, alt).p_value - brute_force_p(&d, alt)).abs() < 1e-12);
            }
        }

        #[test]
        fn one_sided_tails_cover_everything(d in prop::collection::vec(-50.0f64..50.0, 2..40)) {
            prop_assume!(d.iter().any(|v| *v != 0.0));
            let g = wd(&d, Alternative::Greater);
            let l = wd(&d, Alternative::Less);
            prop_assert!(g.p_value + l.p_value >= 1.0 - 1e-12);
            prop_assert!((0.0..=1.0).contains(&g.p_value) && (0.0..=1.0).contains(&l.p_value));
        }

        #[test]
        fn spearman_ignores_monotone_transforms(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Ok(base) = spearman_rho(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|v| v.exp() + 3.0 * v).collect();
                let r = spearman_rho(&tx, &y).unwrap();
                prop_assert!((r.statistic - base.statistic).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&r.p_value));
            }
        }

        #[test]
        fn bonferroni_is_monotone_and_idempotent(
            p in prop::collection::vec(0.0f64..=1.0, 1..10), extra in 0usize..30
        ) {
            let m = p.len() + extra;
            let adj = bonferroni(&p, m).unwrap();
            for (i, j) in (0..p.len()).flat_map(|i| (0..p.len()).map(move |j| (i, j))) {
                if p[i] <= p[j] {
                    prop_assert!(adj[i] <= adj[j]);
                }
            }
            let capped: Vec<f64> = adj.iter().filter(|v| **v == 1.0).copied().collect();
            prop_assert!(bonferroni(&capped, m.max(capped.len())).unwrap().iter().all(|v| *v == 1.0));
        }
    }
}
