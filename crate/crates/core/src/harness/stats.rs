//! Large-sample one-sided tests used by the comparative checks.

/// One-sided 95% critical value of the standard normal.
pub const Z_95: f64 = 1.644_853_626_951_472_2;

/// z statistic for H1: p1 > p2 with a pooled two-proportion test.
/// Returns 0 when both proportions are degenerate and equal.
pub fn two_proportion_z(errors1: usize, n1: usize, errors2: usize, n2: usize) -> f64 {
    let (x1, n1, x2, n2) = (errors1 as f64, n1 as f64, errors2 as f64, n2 as f64);
    let p1 = x1 / n1;
    let p2 = x2 / n2;
    let pooled = (x1 + x2) / (n1 + n2);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    if se == 0.0 {
        return 0.0;
    }
    (p1 - p2) / se
}

/// Whether proportion 1 exceeds proportion 2 at 95% confidence.
pub fn proportion_greater(errors1: usize, n1: usize, errors2: usize, n2: usize) -> bool {
    two_proportion_z(errors1, n1, errors2, n2) > Z_95
}

/// z statistic for H1: mean1 > mean2 (Welch, normal approximation).
pub fn welch_z(mean1: f64, sd1: f64, n1: usize, mean2: f64, sd2: f64, n2: usize) -> f64 {
    let se = (sd1 * sd1 / n1 as f64 + sd2 * sd2 / n2 as f64).sqrt();
    if se == 0.0 {
        return if mean1 > mean2 { f64::INFINITY } else if mean1 < mean2 { f64::NEG_INFINITY } else { 0.0 };
    }
    (mean1 - mean2) / se
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_two_proportion_example() {
        // 30/200 vs 15/200: pooled 0.1125, se = sqrt(0.1125*0.8875*0.01)
        let z = two_proportion_z(30, 200, 15, 200);
        let expected = 0.075 / (0.1125f64 * 0.8875 * 0.01).sqrt();
        assert!((z - expected).abs() < 1e-12);
        assert!(proportion_greater(30, 200, 15, 200));
        assert!(!proportion_greater(15, 200, 30, 200));
        assert_eq!(two_proportion_z(0, 10, 0, 10), 0.0);
    }

    #[test]
    fn welch_handles_zero_variance() {
        assert_eq!(welch_z(1.0, 0.0, 5, 0.0, 0.0, 5), f64::INFINITY);
        assert_eq!(welch_z(0.0, 0.0, 5, 0.0, 0.0, 5), 0.0);
        assert!((welch_z(2.0, 1.0, 100, 1.0, 1.0, 100) - 1.0 / 0.02f64.sqrt()).abs() < 1e-12);
    }
}
