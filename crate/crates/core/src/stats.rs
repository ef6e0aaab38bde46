//! Small numeric helpers shared across modules.

use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sided p-value for a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided critical value `z_{1 - (1 - level)/2}`.
pub fn z_for_level(level: f64) -> f64 {
    let normal = Normal::standard();
    normal.inverse_cdf(0.5 + level / 2.0)
}

/// Upper tail of a 1-df chi-square distribution.
pub fn chi2_1df_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    two_sided_p(x.sqrt())
}

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(quantile_sorted(&sorted, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_value_95() {
        assert!((z_for_level(0.95) - 1.959_963_984_540_054).abs() < 1e-14);
    }

    #[test]
    fn p_values_accurate_to_rounding() {
        // Reference values from a correctly rounded erfc.
        assert!((two_sided_p(1.0) - 0.317_310_507_862_914_1).abs() < 1e-16);
        assert!((two_sided_p(0.707_106_781_186_547_6) - 0.479_500_122_186_953_5).abs() < 1e-16);
        assert_eq!(two_sided_p(-0.3), two_sided_p(0.3));
    }

    #[test]
    fn even_median_averages() {
        assert_eq!(median(&[10.0, 8.0, 6.0, 4.0]), Some(7.0));
        assert_eq!(median(&[3.0]), Some(3.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn chi2_matches_normal() {
        assert!((chi2_1df_sf(3.841_458_820_694_124) - 0.05).abs() < 1e-9);
    }
}
