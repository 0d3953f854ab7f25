//! Finite-size confidence intervals for variance and covariance estimators.
//!
//! Two families are provided. The beta-based intervals are valid against
//! general collective attacks: the split-sample ratio ||X1||^2 / ||X||^2 of a
//! spherically distributed vector follows Beta(n/2, n/2), which turns tail
//! quantiles of that distribution into bounds a'(eps), b'(eps) and, composed
//! with a concentration term, into the half-widths delta_var / delta_cov.
//! The Gaussian-assumption intervals use exact chi-square quantiles of the
//! summed squared quadratures; they are tighter but restrict the analysis to
//! Gaussian collective attacks.
//!
//! Epsilon splitting conventions are applied internally: the beta deltas put
//! eps' = eps/6 (and eps'^2/9 = eps^2/324 for the second covariance term),
//! and the bound constructors `var_upper_bound` / `cov_lower_bound` split the
//! caller's parameter-estimation budget as eps/2 per bound. Callers always
//! pass the raw epsilon.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x >= 0) deliberately rejects NaN

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{self, SpecialFnError};

/// Errors from interval construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfidenceError {
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    /// An argument violated its domain.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },
    /// The delta >= 4 c eps'/9 condition behind the covariance tail bound
    /// does not hold for these inputs, so the derived bound is invalid.
    #[error(
        "covariance tail-bound condition violated: delta = {delta:.6e} < 4 c eps'/9 = {threshold:.6e}"
    )]
    TailBoundAssumption { delta: f64, threshold: f64 },
}

type Result<T> = std::result::Result<T, ConfidenceError>;

/// Which confidence-interval family to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    /// Beta-distribution intervals, valid against collective attacks.
    BetaCollective,
    /// Chi-square intervals assuming Gaussian-distributed quadratures.
    GaussianAssumption,
}

impl std::str::FromStr for IntervalMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "beta" | "beta_collective" => Ok(Self::BetaCollective),
            "gaussian" | "gaussian_assumption" => Ok(Self::GaussianAssumption),
            other => Err(format!(
                "unknown interval method '{other}' (use beta|gaussian)"
            )),
        }
    }
}

fn check_eps(what: &'static str, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ConfidenceError::Domain {
            what,
            detail: format!("epsilon must be in (0,1), got {eps}"),
        });
    }
    Ok(())
}

fn check_n(what: &'static str, n: u64) -> Result<()> {
    if n < 2 {
        return Err(ConfidenceError::Domain {
            what,
            detail: format!("sample count must be >= 2, got {n}"),
        });
    }
    Ok(())
}

/// Lower-tail quantile of Beta(n/2, n/2).
fn beta_quantile(eps: f64, n: u64) -> Result<f64> {
    let shape = n as f64 / 2.0;
    Ok(special::inv_reg_inc_beta(eps, shape, shape)?)
}

/// a'(eps) = 2 (1 - invcdf_Beta(n/2,n/2)(eps)): with probability eps the
/// first half of a 2n-sample spherical vector captures at least a'/2 of the
/// total squared norm.
pub fn a_prime(eps: f64, n: u64) -> Result<f64> {
    check_eps("a_prime", eps)?;
    check_n("a_prime", n)?;
    Ok(2.0 * (1.0 - beta_quantile(eps, n)?))
}

/// b'(eps) = 2 invcdf_Beta(n/2,n/2)(eps), the lower counterpart of `a_prime`.
pub fn b_prime(eps: f64, n: u64) -> Result<f64> {
    check_eps("b_prime", eps)?;
    check_n("b_prime", n)?;
    Ok(2.0 * beta_quantile(eps, n)?)
}

/// a'(eps) - b'(eps) = 2 - 4 invcdf(eps), formed from a single quantile call.
fn quantile_spread(eps: f64, n: u64) -> Result<f64> {
    Ok(2.0 - 4.0 * beta_quantile(eps, n)?)
}

/// Beta-based variance half-width:
/// delta_var(n, eps) = a'(eps/6) (1 + (120/eps) e^(-n/16)) - 1.
pub fn delta_var_beta(n: u64, eps: f64) -> Result<f64> {
    check_eps("delta_var_beta", eps)?;
    check_n("delta_var_beta", n)?;
    let a = a_prime(eps / 6.0, n)?;
    Ok(a * (1.0 + 120.0 / eps * (-(n as f64) / 16.0).exp()) - 1.0)
}

/// Beta-based covariance half-width:
/// delta_cov(n, eps) = [ (a'(eps/6) - b'(eps/6))/2 + a'(eps^2/324) - b'(eps^2/324) ] / 2.
pub fn delta_cov_beta(n: u64, eps: f64) -> Result<f64> {
    check_eps("delta_cov_beta", eps)?;
    check_n("delta_cov_beta", n)?;
    let first = quantile_spread(eps / 6.0, n)?;
    let second = quantile_spread(eps * eps / 324.0, n)?;
    Ok(0.5 * (first / 2.0 + second))
}

/// Gaussian-assumption variance half-width:
/// delta_var(n, eps) = 1 - invcdf_{chi2_2n}(eps) / (2n).
pub fn delta_var_gauss(n: u64, eps: f64) -> Result<f64> {
    check_eps("delta_var_gauss", eps)?;
    check_n("delta_var_gauss", n)?;
    let two_n = 2 * n;
    Ok(1.0 - special::chi2_invcdf(eps, two_n)? / two_n as f64)
}

/// Gaussian-assumption covariance half-width:
/// delta_cov(n, eps) = (1 - invcdf_{chi2_2n}(eps/2) / (2n)) / 2,
/// i.e. exactly delta_var_gauss(n, eps/2) / 2.
pub fn delta_cov_gauss(n: u64, eps: f64) -> Result<f64> {
    check_eps("delta_cov_gauss", eps)?;
    Ok(0.5 * delta_var_gauss(n, eps / 2.0)?)
}

/// Interval half-widths for a given method, at the caller's raw epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalHalfWidths {
    pub delta_var: f64,
    pub delta_cov: f64,
    pub method: IntervalMethod,
}

impl IntervalHalfWidths {
    /// Half-widths at failure probability `eps` (no internal split; this is
    /// the raw delta pair used for reporting and interval tables).
    pub fn new(n: u64, eps: f64, method: IntervalMethod) -> Result<Self> {
        let (delta_var, delta_cov) = match method {
            IntervalMethod::BetaCollective => (delta_var_beta(n, eps)?, delta_cov_beta(n, eps)?),
            IntervalMethod::GaussianAssumption => {
                (delta_var_gauss(n, eps)?, delta_cov_gauss(n, eps)?)
            }
        };
        Ok(Self {
            delta_var,
            delta_cov,
            method,
        })
    }
}

/// Upper confidence bound on a true variance given its estimate `y_hat`.
///
/// The parameter-estimation budget `eps` is split as eps/2 per bound (one
/// variance bound, one covariance bound). For the Gaussian method the exact
/// 1/(1 - delta) form is used once delta > 0.01; below that the (1 + delta)
/// expansion differs by less than 1e-4 relative.
pub fn var_upper_bound(y_hat: f64, n: u64, eps: f64, method: IntervalMethod) -> Result<f64> {
    if !(y_hat >= 0.0) || !y_hat.is_finite() {
        return Err(ConfidenceError::Domain {
            what: "var_upper_bound",
            detail: format!("variance estimate must be nonnegative, got {y_hat}"),
        });
    }
    check_eps("var_upper_bound", eps)?;
    match method {
        IntervalMethod::BetaCollective => {
            let delta = delta_var_beta(n, eps / 2.0)?;
            Ok(y_hat * (1.0 + delta))
        }
        IntervalMethod::GaussianAssumption => {
            let delta = delta_var_gauss(n, eps / 2.0)?;
            if delta > 0.01 {
                Ok(y_hat / (1.0 - delta))
            } else {
                Ok(y_hat * (1.0 + delta))
            }
        }
    }
}

/// Lower confidence bound on a true covariance given the moment estimates.
///
/// Uses the lambda-optimized form z_hat - 2 delta_cov sqrt(x_hat y_hat)
/// (additive, so a small z_hat never amplifies rounding). For the beta
/// method the tail-bound validity condition delta >= 4 c eps'/9 is checked
/// against the actual moments and violation is a hard error.
pub fn cov_lower_bound(
    x_hat: f64,
    y_hat: f64,
    z_hat: f64,
    n: u64,
    eps: f64,
    method: IntervalMethod,
) -> Result<f64> {
    if !(x_hat > 0.0) || !(y_hat > 0.0) {
        return Err(ConfidenceError::Domain {
            what: "cov_lower_bound",
            detail: format!(
                "variance estimates must be positive, got x_hat={x_hat}, y_hat={y_hat}"
            ),
        });
    }
    check_eps("cov_lower_bound", eps)?;
    let eps_half = eps / 2.0;
    let delta = match method {
        IntervalMethod::BetaCollective => {
            check_tail_bound_condition(x_hat, y_hat, z_hat, n, eps_half)?;
            delta_cov_beta(n, eps_half)?
        }
        IntervalMethod::GaussianAssumption => delta_cov_gauss(n, eps_half)?,
    };
    Ok(z_hat - 2.0 * delta * (x_hat * y_hat).sqrt())
}

/// Symmetric-lambda variant of the covariance bound, kept for comparison:
/// z_hat - delta_cov (x_hat + y_hat). Never tighter than the optimized form.
pub fn cov_lower_bound_symmetric(
    x_hat: f64,
    y_hat: f64,
    z_hat: f64,
    n: u64,
    eps: f64,
    method: IntervalMethod,
) -> Result<f64> {
    if !(x_hat > 0.0) || !(y_hat > 0.0) {
        return Err(ConfidenceError::Domain {
            what: "cov_lower_bound_symmetric",
            detail: format!(
                "variance estimates must be positive, got x_hat={x_hat}, y_hat={y_hat}"
            ),
        });
    }
    check_eps("cov_lower_bound_symmetric", eps)?;
    let eps_half = eps / 2.0;
    let delta = match method {
        IntervalMethod::BetaCollective => delta_cov_beta(n, eps_half)?,
        IntervalMethod::GaussianAssumption => delta_cov_gauss(n, eps_half)?,
    };
    Ok(z_hat - delta * (x_hat + y_hat))
}

/// Validity condition delta >= 4 c eps'/9 of the covariance tail bound,
/// evaluated on the unnormalized moments (||X||^2 = 2n x_hat and so on).
fn check_tail_bound_condition(x_hat: f64, y_hat: f64, z_hat: f64, n: u64, eps: f64) -> Result<()> {
    let eps_prime = eps / 6.0;
    let spread1 = quantile_spread(eps_prime, n)?;
    let spread2 = quantile_spread(eps_prime * eps_prime / 9.0, n)?;
    let two_n = 2.0 * n as f64;
    let norms = two_n * (x_hat + y_hat);
    let inner = two_n * z_hat;
    // c from the a'+b' = 2 pair: c = inner/2 - spread1 * norms / 8
    let c = 0.5 * inner - spread1 * norms / 8.0;
    let delta = 0.25 * spread2 * norms;
    if c > 0.0 && delta < 4.0 * c * eps_prime / 9.0 {
        return Err(ConfidenceError::TailBoundAssumption {
            delta,
            threshold: 4.0 * c * eps_prime / 9.0,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen oracle values (50-digit mpmath; see the special-function tests
    // for the evaluation method).
    const DELTA_VAR_BETA_1E6: f64 = 0.006_630_967_237_592_449;
    const DELTA_VAR_BETA_3P5E8: f64 = 0.000_354_443_904_561_627_77;
    const DELTA_COV_BETA_1E6: f64 = 0.013_175_767_170_205_384;
    const DELTA_VAR_GAUSS_1E6: f64 = 0.006_348_191_269_800_32;
    const DELTA_VAR_GAUSS_1E4: f64 = 0.062_303_831_795_561_246;
    const DELTA_COV_GAUSS_1E6: f64 = 0.003_226_675_098_591_622_3;
    const DELTA_COV_GAUSS_3P5E8: f64 = 0.000_172_817_099_585_215_45;

    #[test]
    fn a_prime_median_is_one() {
        for n in [10u64, 1001, 1_000_000] {
            let a = a_prime(0.5, n).unwrap();
            assert!((a - 1.0).abs() < 1e-12, "n={n}: {a}");
            let b = b_prime(0.5, n).unwrap();
            assert!((b - 1.0).abs() < 1e-12, "n={n}: {b}");
        }
    }

    #[test]
    fn a_prime_plus_b_prime_is_two() {
        for (eps, n) in [
            (1e-10 / 6.0, 1_000_000u64),
            (0.01, 100),
            (0.3, 17),
            (1e-20, 2_000),
        ] {
            let sum = a_prime(eps, n).unwrap() + b_prime(eps, n).unwrap();
            assert!((sum - 2.0).abs() < 1e-12, "eps={eps} n={n}: {sum}");
        }
    }

    #[test]
    fn a_prime_range_for_small_eps() {
        for n in [100u64, 10_000, 1_000_000] {
            let a = a_prime(1e-10, n).unwrap();
            assert!(a > 1.0 && a < 2.0, "n={n}: {a}");
            let b = b_prime(1e-10, n).unwrap();
            assert!(b > 0.0 && b < 1.0, "n={n}: {b}");
        }
    }

    #[test]
    fn delta_var_beta_matches_oracle() {
        let d = delta_var_beta(1_000_000, 1e-10).unwrap();
        assert!(
            (d - DELTA_VAR_BETA_1E6).abs() < 1e-12 * DELTA_VAR_BETA_1E6.max(1.0),
            "{d} vs {DELTA_VAR_BETA_1E6}"
        );
        let d = delta_var_beta(350_000_000, 1e-10).unwrap();
        assert!(
            (d - DELTA_VAR_BETA_3P5E8).abs() < 1e-12,
            "{d} vs {DELTA_VAR_BETA_3P5E8}"
        );
    }

    #[test]
    fn delta_var_beta_concentration_term_vanishes() {
        // for n >= 5000 the (120/eps) e^(-n/16) factor is below 1e-12
        let eps = 1e-10;
        let n = 5_000u64;
        let d = delta_var_beta(n, eps).unwrap();
        let a = a_prime(eps / 6.0, n).unwrap();
        assert!((d - (a - 1.0)).abs() < 1e-12, "{d} vs {}", a - 1.0);
        // ...but drives the bound at small n
        let d_small = delta_var_beta(100, eps).unwrap();
        let a_small = a_prime(eps / 6.0, 100).unwrap();
        assert!(
            d_small > a_small - 1.0 + 1.0,
            "concentration term missing: {d_small}"
        );
    }

    #[test]
    fn delta_cov_beta_matches_oracle() {
        let d = delta_cov_beta(1_000_000, 1e-10).unwrap();
        assert!(
            (d - DELTA_COV_BETA_1E6).abs() < 1e-12 * DELTA_COV_BETA_1E6.max(1.0),
            "{d} vs {DELTA_COV_BETA_1E6}"
        );
    }

    #[test]
    fn delta_cov_beta_monotone_in_n() {
        let eps = 1e-10;
        let mut last = f64::INFINITY;
        for n in [10_000u64, 100_000, 1_000_000, 10_000_000] {
            let d = delta_cov_beta(n, eps).unwrap();
            assert!(d < last, "not decreasing at n={n}");
            assert!(d >= 0.0);
            last = d;
        }
    }

    #[test]
    fn delta_gauss_matches_oracle() {
        let d = delta_var_gauss(1_000_000, 1e-10).unwrap();
        assert!((d - DELTA_VAR_GAUSS_1E6).abs() < 1e-13, "{d}");
        let d = delta_var_gauss(10_000, 1e-10).unwrap();
        assert!((d - DELTA_VAR_GAUSS_1E4).abs() < 1e-13, "{d}");
        let d = delta_cov_gauss(1_000_000, 1e-10).unwrap();
        assert!((d - DELTA_COV_GAUSS_1E6).abs() < 1e-13, "{d}");
        let d = delta_cov_gauss(350_000_000, 1e-10).unwrap();
        assert!((d - DELTA_COV_GAUSS_3P5E8).abs() < 1e-13, "{d}");
    }

    #[test]
    fn delta_var_gauss_median_near_zero() {
        // chi-square median is within O(1) of the mean 2n
        let d = delta_var_gauss(10_000, 0.5).unwrap();
        assert!(d.abs() < 1e-3, "{d}");
    }

    #[test]
    fn delta_cov_gauss_is_half_var_at_half_eps() {
        for (n, eps) in [(1_000u64, 0.05), (1_000_000, 1e-10)] {
            let lhs = delta_cov_gauss(n, eps).unwrap();
            let rhs = 0.5 * delta_var_gauss(n, eps / 2.0).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn var_upper_bound_composition() {
        assert_eq!(
            var_upper_bound(0.0, 1000, 0.05, IntervalMethod::BetaCollective).unwrap(),
            0.0
        );
        let b = var_upper_bound(1.0, 1_000_000, 1e-10, IntervalMethod::BetaCollective).unwrap();
        let d = delta_var_beta(1_000_000, 5e-11).unwrap();
        assert_eq!(b, 1.0 + d);
        // Gaussian exact form engages above delta = 0.01
        let d_big = delta_var_gauss(1_000, 0.05 / 2.0).unwrap();
        assert!(d_big > 0.01);
        let b = var_upper_bound(2.0, 1_000, 0.05, IntervalMethod::GaussianAssumption).unwrap();
        assert_eq!(b, 2.0 / (1.0 - d_big));
    }

    #[test]
    fn cov_lower_bound_composition() {
        let b = cov_lower_bound(
            1.0,
            1.0,
            1.0,
            1_000_000,
            1e-10,
            IntervalMethod::GaussianAssumption,
        )
        .unwrap();
        let d = delta_cov_gauss(1_000_000, 5e-11).unwrap();
        assert_eq!(b, 1.0 - 2.0 * d);
        assert!(b < 1.0);
        // beta method on sane moments
        let b = cov_lower_bound(
            1.45,
            1.38,
            0.71,
            1_000_000,
            1e-10,
            IntervalMethod::BetaCollective,
        )
        .unwrap();
        assert!(b < 0.71 && b > 0.6, "{b}");
        // errors on nonpositive variances
        assert!(
            cov_lower_bound(0.0, 1.0, 0.5, 1000, 0.05, IntervalMethod::BetaCollective).is_err()
        );
    }

    #[test]
    fn cov_bound_optimized_tighter_than_symmetric() {
        for (x, y) in [(1.45, 1.38), (0.5, 2.0), (3.0, 0.2)] {
            let opt =
                cov_lower_bound(x, y, 0.4, 100_000, 1e-6, IntervalMethod::BetaCollective).unwrap();
            let sym =
                cov_lower_bound_symmetric(x, y, 0.4, 100_000, 1e-6, IntervalMethod::BetaCollective)
                    .unwrap();
            assert!(opt >= sym, "optimized {opt} worse than symmetric {sym}");
        }
    }

    #[test]
    fn interval_ordering_gauss_below_beta() {
        for n in [10_000u64, 1_000_000, 100_000_000] {
            let eps = 1e-10;
            assert!(delta_var_gauss(n, eps).unwrap() <= delta_var_beta(n, eps).unwrap());
            assert!(delta_cov_gauss(n, eps).unwrap() <= delta_cov_beta(n, eps).unwrap());
        }
    }

    #[test]
    fn tail_bound_condition_rejects_degenerate_inputs() {
        // a covariance far above the variances at a large epsilon makes the
        // delta >= 4 c eps'/9 condition fail, which must be a hard error
        let err = cov_lower_bound(1e-6, 1e-6, 1e3, 100, 0.9, IntervalMethod::BetaCollective)
            .unwrap_err();
        assert!(matches!(err, ConfidenceError::TailBoundAssumption { .. }), "{err:?}");
        // the Gaussian method has no such condition
        assert!(
            cov_lower_bound(1e-6, 1e-6, 1e3, 100, 0.9, IntervalMethod::GaussianAssumption).is_ok()
        );
    }

    #[test]
    fn domain_errors() {
        assert!(a_prime(0.0, 100).is_err());
        assert!(a_prime(1.0, 100).is_err());
        assert!(a_prime(0.1, 1).is_err());
        assert!(delta_var_beta(100, -0.1).is_err());
        assert!(delta_var_gauss(100, 1.5).is_err());
        assert!(var_upper_bound(-1.0, 100, 0.05, IntervalMethod::BetaCollective).is_err());
        assert!(var_upper_bound(f64::NAN, 100, 0.05, IntervalMethod::BetaCollective).is_err());
    }
}
