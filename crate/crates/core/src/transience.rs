//! Exponential weight `W_n = sum over awake frogs of exp(-theta * depth)` and
//! a statistical check that `W_n / m^n` is a supermartingale when the
//! expansion factor `m` is below one.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sim::{run_batch, run_batch_with, FrogLaw, SimConfig, SimOutcome, Variant};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Limit on the expected weight lost to the depth cap.
pub const ABSORBED_WEIGHT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightParams {
    pub d: usize,
    pub eta_mean: f64,
    pub theta: f64,
    pub m: f64,
}

impl WeightParams {
    pub fn new(d: usize, eta_mean: f64, theta: f64) -> Result<Self> {
        check(d, eta_mean)?;
        if !(theta.is_finite() && theta > 0.0) {
            return Err(invalid("theta", format!("must be positive, got {theta}")));
        }
        Ok(Self {
            d,
            eta_mean,
            theta,
            m: expansion_factor(d, eta_mean, theta),
        })
    }

    pub fn is_subcritical(&self) -> bool {
        self.m < 1.0
    }
}

fn check(d: usize, eta_mean: f64) -> Result<()> {
    if d < 2 {
        return Err(invalid("d", format!("must be at least 2, got {d}")));
    }
    if !(eta_mean.is_finite() && eta_mean >= 0.0) {
        return Err(invalid("eta_mean", format!("must be nonnegative, got {eta_mean}")));
    }
    Ok(())
}

/// `m(theta) = e^theta/(d+1) + d (eta_mean+1) e^-theta/(d+1)`.
pub fn expansion_factor(d: usize, eta_mean: f64, theta: f64) -> f64 {
    let df = d as f64;
    (theta.exp() + df * (eta_mean + 1.0) * (-theta).exp()) / (df + 1.0)
}

/// The minimiser `theta* = ln((eta_mean+1) d) / 2`, where
/// `m* = 2 sqrt((eta_mean+1) d) / (d+1)`.
pub fn optimal_theta(d: usize, eta_mean: f64) -> Result<WeightParams> {
    check(d, eta_mean)?;
    let df = d as f64;
    let theta = ((eta_mean + 1.0) * df).ln() / 2.0;
    let m = 2.0 * ((eta_mean + 1.0) * df).sqrt() / (df + 1.0);
    Ok(WeightParams { d, eta_mean, theta, m })
}

/// Mean of `W_n` over a stream of outcomes recorded with weights.
pub fn weight_trace<'a, I>(outcomes: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a SimOutcome>,
{
    let mut sum: Vec<f64> = Vec::new();
    let mut n = 0u64;
    for o in outcomes {
        let trace = o
            .weight_trace
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("trial {} has no weight trace", o.trial)))?;
        if sum.is_empty() {
            sum.resize(trace.len(), 0.0);
        } else if sum.len() != trace.len() {
            return Err(Error::Precondition("weight traces differ in length".into()));
        }
        for (s, w) in sum.iter_mut().zip(trace) {
            *s += w;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Precondition("no outcomes".into()));
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SupermartingaleReport {
    pub params: WeightParams,
    pub trials: u64,
    pub horizon: u32,
    pub depth_cap: u32,
    /// Mean of `W_n`, `n = 0..=horizon`.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `m^n`.
    pub bound: Vec<f64>,
    /// Largest `(mean_n - m^n) / stderr_n` over steps with positive stderr.
    pub worst_z: f64,
    pub mean_bound_holds: bool,
    /// Mean over trials of `sum_n (W_{n+1} - m W_n)`.
    pub step_excess: f64,
    pub step_excess_stderr: f64,
    pub step_bound_holds: bool,
    /// Mean of `exp(-theta D) * absorbed_at_cap`.
    pub absorbed_weight: f64,
    pub absorbed_negligible: bool,
    /// Fraction of trials with a root visit after step `n`.
    pub late_visit_fraction: Vec<f64>,
}

impl SupermartingaleReport {
    pub fn passed(&self) -> bool {
        self.mean_bound_holds && self.step_bound_holds && self.absorbed_negligible
    }

    /// CSV with header `n,mean_w,m_pow_n,band`, where `band` is the 99%
    /// upper allowance `Z_99 * stderr`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,mean_w,m_pow_n,band")?;
        for n in 0..self.mean.len() {
            writeln!(
                out,
                "{},{},{},{}",
                n,
                self.mean[n],
                self.bound[n],
                Z_99 * self.stderr[n]
            )?;
        }
        Ok(())
    }
}

/// Settings for [`supermartingale_check`].
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct TransienceSettings {
    pub d: usize,
    pub frog_law: FrogLaw,
    pub trials: u64,
    pub horizon: u32,
    /// `None` picks the cap with [`choose_depth_cap`].
    pub depth_cap: Option<u32>,
    pub seed: u64,
}

fn sim_config(d: usize, law: &FrogLaw, theta: f64, horizon: u32, depth_cap: u32, trials: u64, seed: u64) -> SimConfig {
    let mut c = SimConfig::new(d, law.clone(), Variant::Simple, horizon, depth_cap, trials, seed);
    c.weight_theta = Some(theta);
    c.max_frog_steps = Some(u64::MAX);
    c
}

/// Deepest cap tried by the automatic choice.
pub const MAX_AUTO_DEPTH_CAP: u32 = 64;

/// Smallest depth cap, starting from `ln(1/limit)/theta`, at which a pilot
/// batch loses less than 80% of [`ABSORBED_WEIGHT_LIMIT`] to absorption.
pub fn choose_depth_cap(d: usize, law: &FrogLaw, horizon: u32, seed: u64) -> Result<u32> {
    const PILOT: u64 = 256;
    const MAX_CAP: u32 = MAX_AUTO_DEPTH_CAP;
    let params = optimal_theta(d, law.mean())?;
    let start = ((1.0 / ABSORBED_WEIGHT_LIMIT).ln() / params.theta).ceil().max(2.0) as u32;
    for cap in start..=MAX_CAP {
        let c = sim_config(d, law, params.theta, horizon.max(1), cap, PILOT, seed ^ 0x5eed);
        let s = run_batch(&c)?;
        if (-params.theta * cap as f64).exp() * s.mean_absorbed < 0.8 * ABSORBED_WEIGHT_LIMIT {
            return Ok(cap);
        }
    }
    Ok(MAX_CAP)
}

/// Estimates `E[W_n]` for `n <= horizon` under the optimal `theta` and
/// checks it against `m^n`.
///
/// With an automatic depth cap the run is repeated one level deeper while
/// the absorbed weight is over the limit, since the pilot is noisy.
pub fn supermartingale_check(settings: &TransienceSettings) -> Result<SupermartingaleReport> {
    let eta_mean = settings.frog_law.mean();
    let params = optimal_theta(settings.d, eta_mean)?;
    if !params.is_subcritical() {
        return Err(Error::Supercritical {
            d: settings.d,
            eta_mean,
            m: params.m,
        });
    }
    if settings.trials < 1 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let mut depth_cap = match settings.depth_cap {
        Some(c) => return check_at_cap(settings, params, c),
        None => choose_depth_cap(settings.d, &settings.frog_law, settings.horizon, settings.seed)?,
    };
    loop {
        let r = check_at_cap(settings, params, depth_cap)?;
        if r.absorbed_negligible || depth_cap >= MAX_AUTO_DEPTH_CAP {
            return Ok(r);
        }
        depth_cap += 1;
    }
}

fn check_at_cap(settings: &TransienceSettings, params: WeightParams, depth_cap: u32) -> Result<SupermartingaleReport> {
    let horizon = settings.horizon;
    let len = horizon as usize + 1;
    let bound: Vec<f64> = (0..len).map(|n| params.m.powi(n as i32)).collect();
    if horizon == 0 {
        return Ok(SupermartingaleReport {
            params,
            trials: settings.trials,
            horizon,
            depth_cap,
            mean: vec![1.0],
            stderr: vec![0.0],
            bound,
            worst_z: f64::NEG_INFINITY,
            mean_bound_holds: true,
            step_excess: 0.0,
            step_excess_stderr: 0.0,
            step_bound_holds: true,
            absorbed_weight: 0.0,
            absorbed_negligible: true,
            late_visit_fraction: vec![0.0],
        });
    }

    let config = sim_config(
        settings.d,
        &settings.frog_law,
        params.theta,
        horizon,
        depth_cap,
        settings.trials,
        settings.seed,
    );
    let (mut excess_sum, mut excess_sq) = (0.0, 0.0);
    let mut late = vec![0u64; len];
    let summary = run_batch_with(&config, |o| {
        let w = o.weight_trace.as_deref().unwrap_or_default();
        let excess: f64 = w.windows(2).map(|p| p[1] - params.m * p[0]).sum();
        excess_sum += excess;
        excess_sq += excess * excess;
        if let Some(&last) = o.root_visit_times.last() {
            for slot in &mut late[..last as usize] {
                *slot += 1;
            }
        }
        Ok(())
    })?;
    let n = settings.trials as f64;
    let mean = summary.weight_mean.unwrap_or_default();
    let stderr = summary.weight_stderr.unwrap_or_default();
    let mut worst_z = f64::NEG_INFINITY;
    let mut mean_bound_holds = true;
    for i in 0..len {
        if mean[i] > bound[i] + Z_99 * stderr[i] {
            mean_bound_holds = false;
        }
        if stderr[i] > 0.0 {
            worst_z = worst_z.max((mean[i] - bound[i]) / stderr[i]);
        }
    }
    let step_excess = excess_sum / n;
    let step_var = if settings.trials > 1 {
        ((excess_sq - n * step_excess * step_excess) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let step_excess_stderr = (step_var / n).sqrt();
    let absorbed_weight = (-params.theta * depth_cap as f64).exp() * summary.mean_absorbed;
    Ok(SupermartingaleReport {
        params,
        trials: settings.trials,
        horizon,
        depth_cap,
        mean,
        stderr,
        bound,
        worst_z,
        mean_bound_holds,
        step_excess,
        step_excess_stderr,
        step_bound_holds: step_excess <= 3.0 * step_excess_stderr,
        absorbed_weight,
        absorbed_negligible: absorbed_weight < ABSORBED_WEIGHT_LIMIT,
        late_visit_fraction: late.into_iter().map(|c| c as f64 / n).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let p = optimal_theta(2, 0.0).unwrap();
        assert!((p.theta - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!((p.m - 0.942_809_041_582_063_4).abs() < 1e-12);
        assert!(p.is_subcritical());
        let p = optimal_theta(5, 0.5).unwrap();
        assert!((p.m - 0.912_870_929_175_276_8).abs() < 1e-12);
        assert!((p.m - expansion_factor(5, 0.5, p.theta)).abs() < 1e-14);
    }

    #[test]
    fn boundary_density_gives_unit_factor() {
        for d in 2..12 {
            let eta = crate::certificates::transience_threshold(d).unwrap();
            let p = optimal_theta(d, eta).unwrap();
            assert!((p.m - 1.0).abs() < 1e-12, "d={d} m={}", p.m);
        }
    }

    #[test]
    fn optimum_is_a_minimum() {
        for &(d, eta) in &[(2, 0.0), (3, 0.2), (5, 0.5), (7, 4.0)] {
            let p = optimal_theta(d, eta).unwrap();
            for k in -200..=200 {
                let theta = p.theta + k as f64 * 0.01;
                if theta > 0.0 {
                    assert!(expansion_factor(d, eta, theta) >= p.m - 1e-12);
                }
            }
        }
    }

    #[test]
    fn supercritical_rejected() {
        let s = TransienceSettings {
            d: 2,
            frog_law: FrogLaw::Poisson { mu: 0.2 },
            trials: 10,
            horizon: 10,
            depth_cap: Some(10),
            seed: 0,
        };
        assert!(matches!(supermartingale_check(&s), Err(Error::Supercritical { .. })));
    }

    #[test]
    fn zero_horizon_passes() {
        let s = TransienceSettings {
            d: 3,
            frog_law: FrogLaw::Poisson { mu: 0.1 },
            trials: 5,
            horizon: 0,
            depth_cap: Some(10),
            seed: 0,
        };
        let r = supermartingale_check(&s).unwrap();
        assert!(r.passed());
        assert_eq!(r.mean, vec![1.0]);
    }

    #[test]
    fn single_walk_weight_contributions() {
        let mut c = SimConfig::new(3, FrogLaw::Fixed { k: 0 }, Variant::Simple, 30, 40, 1, 2);
        let theta = 0.7;
        c.weight_theta = Some(theta);
        let mut trial = crate::sim::Trial::new(&c, 0).unwrap();
        while trial.step() {
            let depth = trial.active_depths().next().unwrap();
            let w = *trial.outcome().weight_trace.as_ref().unwrap().last().unwrap();
            assert!((w - (-theta * depth as f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn small_subcritical_run_passes() {
        let s = TransienceSettings {
            d: 3,
            frog_law: FrogLaw::Poisson { mu: 0.1 },
            trials: 2000,
            horizon: 40,
            depth_cap: None,
            seed: 12,
        };
        let r = supermartingale_check(&s).unwrap();
        assert!(
            r.passed(),
            "{:?}",
            (r.worst_z, r.step_excess, r.step_excess_stderr, r.absorbed_weight)
        );
        assert_eq!(r.mean[0], 1.0);
        assert!(r.late_visit_fraction.windows(2).all(|w| w[0] >= w[1]));
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("n,mean_w,m_pow_n,band\n0,1,1,"));
        assert_eq!(text.lines().count(), 42);
    }
}
