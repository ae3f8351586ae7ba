//! Summary statistics and paired comparisons of per-episode rewards.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    pub stderr: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            std: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        std,
        stderr: std / (n as f64).sqrt(),
    }
}

/// One-sided paired t-test of `mean(a - b) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub n: usize,
    pub mean_diff: f64,
    pub stderr: f64,
    pub t: f64,
    pub p_value: f64,
    /// Lower end of the one-sided confidence interval for the mean difference.
    pub lower_bound: f64,
    pub confidence: f64,
}

impl PairedTest {
    pub fn significant(&self) -> bool {
        self.p_value < 1.0 - self.confidence
    }
}

/// Panics unless both slices have the same length of at least two.
pub fn paired_test(a: &[f64], b: &[f64], confidence: f64) -> PairedTest {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    assert!(a.len() >= 2, "paired test needs at least two pairs");
    assert!(confidence > 0.0 && confidence < 1.0);
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let s = summarize(&diffs);
    let dist = StudentsT::new(0.0, 1.0, (s.n - 1) as f64).expect("positive degrees of freedom");
    let critical = dist.inverse_cdf(confidence);
    let (t, p_value) = if s.stderr > 0.0 {
        let t = s.mean / s.stderr;
        (t, 1.0 - dist.cdf(t))
    } else if s.mean > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        (if s.mean < 0.0 { f64::NEG_INFINITY } else { 0.0 }, 1.0)
    };
    PairedTest {
        n: s.n,
        mean_diff: s.mean,
        stderr: s.stderr,
        t,
        p_value,
        lower_bound: s.mean - critical * s.stderr,
        confidence,
    }
}

/// Fraction of pairs where `a` is strictly larger, ties counting one half.
pub fn win_rate(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    if a.is_empty() {
        return f64::NAN;
    }
    let score: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Greater) => 1.0,
            Some(std::cmp::Ordering::Equal) => 0.5,
            _ => 0.0,
        })
        .sum();
    score / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_known_sample() {
        let s = summarize(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert!((s.stderr - s.std / 8f64.sqrt()).abs() < 1e-12);
        assert!(summarize(&[]).mean.is_nan());
        assert_eq!(summarize(&[3.0]).stderr, 0.0);
    }

    #[test]
    fn paired_test_matches_table_values() {
        // differences 1..=10: mean 5.5, sd 3.02765, se 0.957427, t = 5.74456
        let a: Vec<f64> = (1..=10).map(|i| i as f64 + 100.0).collect();
        let b = vec![100.0; 10];
        let r = paired_test(&a, &b, 0.95);
        assert!((r.t - 5.744563).abs() < 1e-5);
        // t_{0.95, 9} = 1.833113
        assert!((r.lower_bound - (5.5 - 1.833113 * 0.957427)).abs() < 1e-5);
        assert!(r.p_value < 1e-3);
        assert!(r.significant());
        let flipped = paired_test(&b, &a, 0.95);
        assert!(!flipped.significant());
        assert!(flipped.p_value > 0.999);
    }

    #[test]
    fn constant_differences() {
        let r = paired_test(&[2.0, 3.0], &[1.0, 2.0], 0.95);
        assert!(r.significant());
        let r = paired_test(&[1.0, 2.0], &[1.0, 2.0], 0.95);
        assert!(!r.significant());
    }

    #[test]
    fn win_rates() {
        assert_eq!(win_rate(&[1.0, 2.0, 3.0, 4.0], &[0.0, 2.0, 5.0, 1.0]), 0.625);
    }
}
