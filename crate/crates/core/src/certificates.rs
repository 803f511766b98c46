//! Closed-form thresholds and numeric verifiers for the Poisson bootstrap.
//!
//! With `m = mu/(d+1)`, the bootstrap step `Poi(lambda + eps) ⪯ A Poi(lambda)`
//! holds for every `lambda >= 0` as soon as
//!
//! ```text
//! 1 - e^{-(lambda+eps)/d} <= (1 - e^{-lambda/d - m}) (1 - e^{-(lambda+m)/d})
//! ```
//!
//! and a sufficient, `lambda`-uniform condition is
//! `e^{-eps/d} >= e^{-m} + e^{-m/d}`, which gives the largest certified step
//! `eps_max = -d ln(e^{-m} + e^{-m/d})` whenever the right side is below one.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Equality tolerance of the grid verifier.
pub const NBOUND_TOL: f64 = 1e-12;

/// Witness that the bootstrap step exists for `(d, mu)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCertificate {
    pub d: usize,
    pub mu: f64,
    pub m: f64,
    pub epsilon_max: Option<f64>,
    pub lambda_grid_checked: String,
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        Err(invalid("d", format!("must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(invalid("mu", format!("must be nonnegative, got {mu}")))
    }
}

/// Largest `eps` certified by the closed form, if any.
pub fn epsilon_max(d: usize, mu: f64) -> Result<EpsilonCertificate> {
    check_d(d)?;
    check_mu(mu)?;
    let m = mu / (d + 1) as f64;
    let s = (-m).exp() + (-m / d as f64).exp();
    let epsilon_max = (s < 1.0).then(|| -(d as f64) * s.ln());
    Ok(EpsilonCertificate {
        d,
        mu,
        m,
        epsilon_max,
        lambda_grid_checked: "closed form (uniform in lambda)".to_string(),
    })
}

/// Default grid: 512 log-spaced points on `[1e-6, 1e3]` plus `lambda = 0`.
pub fn default_lambda_grid() -> Vec<f64> {
    const POINTS: usize = 512;
    let (lo, hi) = (1e-6f64.ln(), 1e3f64.ln());
    std::iter::once(0.0)
        .chain((0..POINTS).map(|i| (lo + (hi - lo) * i as f64 / (POINTS - 1) as f64).exp()))
        .collect()
}

/// Slack of the bootstrap inequality at one `lambda`, rescaled by
/// `e^{lambda/d}`: `e^{-eps/d} - (e^{-m} + e^{-m/d} - e^{-lambda/d - m - m/d})`.
///
/// Nonnegative iff the inequality holds. The rescaling is exact and keeps
/// the comparison meaningful for large `lambda`, where both sides of the
/// original form round to one.
pub fn nbound_margin(d: usize, mu: f64, epsilon: f64, lambda: f64) -> f64 {
    let d = d as f64;
    let m = mu / (d + 1.0);
    let rhs = (-m).exp() + (-m / d).exp() - (-lambda / d - m - m / d).exp();
    (-epsilon / d).exp() - rhs
}

/// Checks the bootstrap inequality at every grid point.
pub fn verify_nbound(d: usize, mu: f64, epsilon: f64, lambdas: &[f64]) -> Result<bool> {
    check_d(d)?;
    check_mu(mu)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if lambdas.is_empty() {
        return Err(invalid("lambdas", "grid is empty"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(invalid("lambdas", format!("grid point {l} is negative")));
    }
    Ok(lambdas.iter().all(|&l| nbound_margin(d, mu, epsilon, l) >= -NBOUND_TOL))
}

/// Success parameters of the two binomials compared in the bootstrap step:
/// `M ~ Bin(d-1, pM)` from `Poi(lambda + eps)` and `N ~ Bin(d-1, pN)` from
/// the operator image. `M ⪯ N` iff `pM <= pN`.
pub fn binomial_param_compare(d: usize, mu: f64, epsilon: f64, lambda: f64) -> Result<(f64, f64)> {
    check_d(d)?;
    check_mu(mu)?;
    let df = d as f64;
    let m = mu / (df + 1.0);
    let p_m = -(-(lambda + epsilon) / df).exp_m1();
    let p_n = -(-lambda / df - m).exp_m1() * -(-(lambda + m) / df).exp_m1();
    Ok((p_m, p_n))
}

/// `x^{-2} + x^{-2/x}` and whether it is below one.
pub fn cim_check(x: f64) -> Result<(f64, bool)> {
    if !(x.is_finite() && x >= 2.0) {
        return Err(invalid("x", format!("must be at least 2, got {x}")));
    }
    let value = x.powf(-2.0) + x.powf(-2.0 / x);
    Ok((value, value < 1.0))
}

/// Density above which the frog model on the d-ary tree is recurrent:
/// `2 (d+1) ln d`.
pub fn recurrence_threshold(d: usize) -> Result<f64> {
    check_d(d)?;
    Ok(2.0 * (d + 1) as f64 * (d as f64).ln())
}

/// Mean frogs per site below which the model is transient: `(d-1)^2 / (4d)`.
pub fn transience_threshold(d: usize) -> Result<f64> {
    check_d(d)?;
    let df = d as f64;
    Ok((df - 1.0).powi(2) / (4.0 * df))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{binomial_pmf, dominates};

    #[test]
    fn epsilon_examples() {
        let c = epsilon_max(2, 6.0).unwrap();
        assert_eq!(c.m, 2.0);
        let expected = -2.0 * ((-2.0f64).exp() + (-1.0f64).exp()).ln();
        assert!((c.epsilon_max.unwrap() - expected).abs() < 1e-15);
        // 40-digit evaluation of the closed form
        assert!((c.epsilon_max.unwrap() - 1.373_476_624_963_554_3).abs() < 1e-12);

        let at_threshold = epsilon_max(2, 6.0 * 2f64.ln()).unwrap();
        assert!((at_threshold.epsilon_max.unwrap() + 2.0 * 0.75f64.ln()).abs() < 1e-12);
        assert!((at_threshold.epsilon_max.unwrap() - 0.575364).abs() < 1e-6);

        assert_eq!(epsilon_max(2, 1.0).unwrap().epsilon_max, None);
        assert!(epsilon_max(1, 1.0).is_err());
    }

    #[test]
    fn nbound_examples() {
        let grid: Vec<f64> = (0..=500).map(|i| i as f64 * 0.1).collect();
        assert!(verify_nbound(2, 6.0, 1.3, &grid).unwrap());
        assert!(!verify_nbound(2, 6.0, 2.0, &[0.0]).unwrap());
        assert!(verify_nbound(3, 1.0, 1e-9, &[0.0]).unwrap());
        assert!(verify_nbound(2, 6.0, 0.0, &grid).is_err());
        assert!(verify_nbound(2, 6.0, 1.0, &[]).is_err());
        assert!(verify_nbound(2, 6.0, 1.0, &[-1.0]).is_err());
    }

    #[test]
    fn rescaled_margin_matches_direct_form_at_moderate_lambda() {
        for &(d, mu, eps, lambda) in &[(2usize, 6.0, 1.3, 0.7), (3, 10.0, 2.0, 4.0), (5, 25.0, 0.5, 12.0)] {
            let df = d as f64;
            let m = mu / (df + 1.0);
            let lhs = 1.0 - (-(lambda + eps) / df).exp();
            let rhs = (1.0 - (-lambda / df - m).exp()) * (1.0 - (-(lambda + m) / df).exp());
            let scaled = nbound_margin(d, mu, eps, lambda) * (-lambda / df).exp();
            assert!(((rhs - lhs) - scaled).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_has_expected_shape() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 513);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-6).abs() < 1e-18);
        assert!((g[512] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn binomial_parameters() {
        let (pm, pn) = binomial_param_compare(2, 6.0, 1.0, 0.0).unwrap();
        assert!((pm - 0.393469).abs() < 1e-6);
        assert!((pn - 0.546_572_343_959_808_9).abs() < 1e-12);
        assert!(pm < pn);
        let d = 4;
        let (pm, pn) = binomial_param_compare(d, 12.0, 0.5, 1.0).unwrap();
        assert!(pm <= pn);
        let lower = binomial_pmf(d - 1, pm).unwrap();
        let upper = binomial_pmf(d - 1, pn).unwrap();
        assert!(dominates(&lower, &upper).is_dominates());
        let (pm, pn) = binomial_param_compare(2, 6.0, 2.0, 1e4).unwrap();
        assert!(pm > 1.0 - 1e-12 && pn > 1.0 - 1e-12);
    }

    #[test]
    fn cim_values() {
        assert_eq!(cim_check(2.0).unwrap(), (0.75, true));
        let (v8, ok) = cim_check(8.0).unwrap();
        assert!(ok && (v8 - 0.610229).abs() < 1e-6);
        let (big, ok) = cim_check(1e6).unwrap();
        assert!(ok && big > 0.99);
        assert!(cim_check(1.5).is_err());
    }

    #[test]
    fn thresholds() {
        assert!((recurrence_threshold(2).unwrap() - 4.158883).abs() < 1e-6);
        assert_eq!(transience_threshold(2).unwrap(), 0.125);
        assert_eq!(transience_threshold(5).unwrap(), 0.8);
        for d in 2..=20 {
            assert!(transience_threshold(d).unwrap() < recurrence_threshold(d).unwrap());
            let c = epsilon_max(d, recurrence_threshold(d).unwrap()).unwrap();
            assert!(c.epsilon_max.unwrap() > 0.0, "d={d}");
        }
        let d: f64 = 1000.0;
        assert!((recurrence_threshold(1000).unwrap() / (d * d.ln()) - 2.0).abs() < 0.01);
        assert!((transience_threshold(1000).unwrap() / d - 0.25).abs() < 0.01);
    }
}
