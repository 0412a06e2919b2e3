//! Robust fitting of the reference model from quartiles and the median.

use serde::{Deserialize, Serialize};

use crate::distributions::ReferenceModel;
use crate::error::{Error, Result};
use crate::roots::newton_bisect;
use crate::stats::{mad, QuartileSummary, Sample};

/// IQR of the standard normal, rounded as used throughout the fence formulas.
pub const IQR_TO_SIGMA: f64 = 1.35;
/// MAD of the standard normal, same rounding convention.
pub const MAD_TO_SIGMA: f64 = 0.675;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSource {
    Iqr,
    Mad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustNormalParams {
    pub mu_hat: f64,
    pub sigma_hat: f64,
    pub scale_source: ScaleSource,
}

impl RobustNormalParams {
    pub fn model(&self) -> ReferenceModel {
        ReferenceModel::Normal { location: self.mu_hat, scale: self.sigma_hat }
    }
}

/// Quartile-based normal fit: midhinge for location, IQR/1.35 for scale.
///
/// Falls back to MAD/0.675 when the IQR is exactly zero.
pub fn estimate_normal(summary: &QuartileSummary, sample: &Sample) -> Result<RobustNormalParams> {
    let mu_hat = 0.5 * (summary.q1 + summary.q3);
    let (sigma_hat, scale_source) = if summary.iqr > 0.0 {
        (summary.iqr / IQR_TO_SIGMA, ScaleSource::Iqr)
    } else {
        (mad(sample) / MAD_TO_SIGMA, ScaleSource::Mad)
    };
    if sigma_hat.is_nan() || sigma_hat <= 0.0 {
        return Err(Error::DegenerateScale);
    }
    Ok(RobustNormalParams { mu_hat, sigma_hat, scale_source })
}

/// Wilson–Hilferty approximation to the median of a chi-square with `df` degrees of freedom.
pub fn wilson_hilferty_median(df: f64) -> f64 {
    df * (1.0 - 2.0 / (9.0 * df)).powi(3)
}

fn wilson_hilferty_slope(df: f64) -> f64 {
    // d/dk of (k - c)^3 / k^2 with c = 2/9.
    let c = 2.0 / 9.0;
    (df - c).powi(2) * (df + 2.0 * c) / df.powi(3)
}

/// Degrees of freedom whose Wilson–Hilferty median equals the sample median.
pub fn estimate_chisq_df(sample: &Sample) -> Result<f64> {
    df_from_median(sample.median())
}

pub fn df_from_median(median: f64) -> Result<f64> {
    if !(median > 0.0 && median.is_finite()) {
        return Err(Error::domain(format!("sample median {median} is not positive; chi-square model untenable")));
    }
    let lo = 1e-6;
    let hi = (2.0 * median).max(1.0) + 100.0;
    let tol = 1e-10 * median.max(1.0);
    let df = newton_bisect(
        |k| (wilson_hilferty_median(k) - median, wilson_hilferty_slope(k)),
        lo,
        hi,
        median + 2.0 / 3.0,
        tol,
    );
    Ok(df)
}

pub fn estimate_chisq(sample: &Sample) -> Result<ReferenceModel> {
    ReferenceModel::chi_square(estimate_chisq_df(sample)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::quartile_summary;
    use proptest::prelude::*;

    // Plain bisection on the Wilson–Hilferty equation.
    fn df_oracle(median: f64) -> f64 {
        let (mut lo, mut hi) = (2.0 / 9.0, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if wilson_hilferty_median(mid) < median {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn sample_with_median(m: f64) -> Sample {
        Sample::from_slice(&[0.5 * m, m, 3.0 * m]).unwrap()
    }

    #[test]
    fn toy_fit() {
        let s = Sample::from_slice(&[9., 16., 18., 20., 20., 22., 22., 24., 26., 36., 50.]).unwrap();
        let q = quartile_summary(&s).unwrap();
        let p = estimate_normal(&q, &s).unwrap();
        assert_eq!(p.mu_hat, 22.0);
        assert!((p.sigma_hat - 4.4444).abs() < 1e-3);
        assert_eq!(p.scale_source, ScaleSource::Iqr);
    }

    #[test]
    fn mad_fallback() {
        // A consistent type-7 summary with zero IQR always has zero MAD too, so
        // the branch is exercised with a hand-built summary.
        let q = QuartileSummary { q1: 6.0, median: 6.0, q3: 6.0, iqr: 0.0 };
        let s = Sample::from_slice(&[4., 5., 6., 7., 8.]).unwrap();
        let p = estimate_normal(&q, &s).unwrap();
        assert_eq!(p.scale_source, ScaleSource::Mad);
        assert_eq!(p.sigma_hat, 1.0 / 0.675);
        assert_eq!(p.mu_hat, 6.0);
    }

    #[test]
    fn mad_fallback_with_zero_mad_is_degenerate() {
        let s = Sample::from_slice(&[1., 1., 1., 1., 1., 9.]).unwrap();
        let q = quartile_summary(&s).unwrap();
        assert!(matches!(estimate_normal(&q, &s), Err(Error::DegenerateScale)));
    }

    #[test]
    fn unit_denominator() {
        let q = QuartileSummary { q1: 0.0, median: 0.7, q3: 1.35, iqr: 1.35 };
        let s = Sample::from_slice(&[0.0, 0.7, 1.35]).unwrap();
        assert_eq!(estimate_normal(&q, &s).unwrap().sigma_hat, 1.0);
    }

    #[test]
    fn df_examples() {
        assert!((wilson_hilferty_median(10.0) - 9.3480).abs() < 1e-4);
        let k = estimate_chisq_df(&sample_with_median(9.3480)).unwrap();
        assert!((k - 10.0).abs() < 1e-3);
        let k = estimate_chisq_df(&sample_with_median(9.34182)).unwrap();
        assert!((k - 9.993).abs() < 0.01);
        assert!((k - df_oracle(9.34182)).abs() < 1e-9);
        let k = estimate_chisq_df(&sample_with_median(0.4549)).unwrap();
        assert!((k - 1.0).abs() < 0.05);
        assert!((k - df_oracle(0.4549)).abs() < 1e-9);
    }

    #[test]
    fn df_requires_positive_median() {
        assert!(matches!(estimate_chisq_df(&sample_with_median(-1.0)), Err(Error::Domain(_))));
        let zero = Sample::from_slice(&[-1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(estimate_chisq_df(&zero), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn df_residual_and_oracle(m in 1e-3f64..500.0) {
            let k = df_from_median(m).unwrap();
            prop_assert!((wilson_hilferty_median(k) - m).abs() <= 1e-10 * m.max(1.0));
            prop_assert!((k - df_oracle(m)).abs() <= 1e-8 * k.max(1.0));
        }

        #[test]
        fn df_monotone_in_median(a in 1e-3f64..500.0, b in 1e-3f64..500.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (klo, khi) = (df_from_median(lo).unwrap(), df_from_median(hi).unwrap());
            prop_assert!(klo <= khi + 1e-9 * khi.max(1.0));
        }

        #[test]
        fn normal_fit_affine(xs in prop::collection::vec(-100.0f64..100.0, 8..60),
                             a in 0.1f64..10.0, b in -50.0f64..50.0) {
            let s = Sample::from_slice(&xs).unwrap();
            let q = quartile_summary(&s).unwrap();
            prop_assume!(q.iqr > 1e-6);
            let p = estimate_normal(&q, &s).unwrap();
            let t = s.map_monotone(|x| a * x + b).unwrap();
            let pt = estimate_normal(&quartile_summary(&t).unwrap(), &t).unwrap();
            prop_assert!((pt.mu_hat - (a * p.mu_hat + b)).abs() < 1e-9 * 2e3);
            prop_assert!((pt.sigma_hat - a * p.sigma_hat).abs() < 1e-9 * 2e3);
        }
    }
}
