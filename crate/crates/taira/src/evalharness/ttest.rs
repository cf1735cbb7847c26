//! Paired two-sided t-test for comparing per-query metric series.

use crate::error::{Result, TairaError};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Result of a paired t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// Two-sided p-value from the Student-t distribution with n−1 degrees of
    /// freedom.
    pub p: f64,
    /// True when every pairwise difference was identical but nonzero: the
    /// variance is zero, so `t` is reported as ±∞ and `p` as 0.
    pub degenerate: bool,
}

/// Paired t-test of two equal-length metric series. Identical series give
/// (t = 0, p = 1); constant nonzero differences are flagged degenerate.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(TairaError::InvalidInput(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(TairaError::InvalidInput(
            "a paired t-test needs at least two pairs".into(),
        ));
    }

    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if diffs.iter().all(|d| *d == 0.0) {
        return Ok(TTest { t: 0.0, p: 1.0, degenerate: false });
    }

    let mean = diffs.iter().sum::<f64>() / n as f64;
    let variance =
        diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    if variance == 0.0 {
        let t = if mean > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        return Ok(TTest { t, p: 0.0, degenerate: true });
    }

    let t = mean / (variance / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("n ≥ 2 pairs");
    let p = 2.0 * dist.cdf(-t.abs());
    Ok(TTest { t, p, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_series_give_t_zero_p_one() {
        let a = [0.4, 0.6, 0.8, 0.1];
        let test = paired_ttest(&a, &a).unwrap();
        assert_eq!(test.t, 0.0);
        assert_eq!(test.p, 1.0);
        assert!(!test.degenerate);
    }

    #[test]
    fn constant_nonzero_differences_are_degenerate() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.0, 1.0, 2.0, 3.0];
        let test = paired_ttest(&a, &b).unwrap();
        assert!(test.degenerate);
        assert_eq!(test.t, f64::INFINITY);
        assert_eq!(test.p, 0.0);

        let test = paired_ttest(&b, &a).unwrap();
        assert_eq!(test.t, f64::NEG_INFINITY);
    }

    #[test]
    fn classic_paired_sample_matches_the_published_values() {
        // The classic ten-patient sleep-gain data; the published two-sided
        // result is t ≈ −4.0621, p ≈ 0.0028.
        let a = [0.7, -1.6, -0.2, -1.2, -0.1, 3.4, 3.7, 0.8, 0.0, 2.0];
        let b = [1.9, 0.8, 1.1, 0.1, -0.1, 4.4, 5.5, 1.6, 4.6, 3.4];
        let test = paired_ttest(&a, &b).unwrap();
        assert!((test.t - -4.062127683382037).abs() < 1e-12, "t = {}", test.t);
        assert!((test.p - 0.0028).abs() < 1e-3, "p = {}", test.p);
        assert!((test.p - 0.00283289019738427).abs() < 1e-9, "p = {}", test.p);
    }

    #[test]
    fn mismatched_or_tiny_series_are_rejected() {
        assert!(paired_ttest(&[1.0, 2.0], &[1.0]).is_err());
        assert!(paired_ttest(&[1.0], &[2.0]).is_err());
        assert!(paired_ttest(&[], &[]).is_err());
    }
}
