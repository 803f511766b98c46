use serde::Serialize;

use rayon::prelude::*;

use super::{run_batch, run_batch_with, run_trial, FrogLaw, SimConfig, SimOutcome, Variant, DEFAULT_MAX_FROG_STEPS};
use crate::error::{invalid, Error, Result};

/// One-sided comparison of the nonbacktracking and simple root-visit laws.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub alpha: f64,
    pub trials_simple: u64,
    pub trials_nb: u64,
    pub mean_simple: f64,
    pub mean_nb: f64,
    /// DKW band half-widths.
    pub band_simple: f64,
    pub band_nb: f64,
    /// `sup_x (F_simple(x) - F_nb(x))`: positive values go against `nb ⪯ simple`.
    pub forward_statistic: f64,
    pub forward_argmax: usize,
    /// `sup_x (F_nb(x) - F_simple(x))`: positive values go against `simple ⪯ nb`.
    pub reverse_statistic: f64,
    pub reverse_argmax: usize,
    pub truncated_simple: u64,
    pub truncated_nb: u64,
}

impl DominanceReport {
    fn margin(&self) -> f64 {
        self.band_simple + self.band_nb
    }

    /// No significant violation of `nb ⪯ simple`.
    pub fn consistent(&self) -> bool {
        self.forward_statistic <= self.margin()
    }

    /// Significant violation of `simple ⪯ nb`.
    pub fn reverse_violated(&self) -> bool {
        self.reverse_statistic > self.margin()
    }

    /// Whether budget truncation leaves both conclusions valid. Truncated
    /// counts are lower bounds, which only inflates the empirical CDF; that
    /// is harmless for the simple sample but not for the nonbacktracking one.
    pub fn sound(&self) -> bool {
        self.truncated_nb == 0
    }
}

fn empirical_cdf(counts: &[u64], total: u64, len: usize) -> Vec<f64> {
    let mut acc = 0u64;
    (0..len)
        .map(|k| {
            acc += counts.get(k).copied().unwrap_or(0);
            acc as f64 / total as f64
        })
        .collect()
}

/// Runs both variants and compares their empirical CDFs with one-sided
/// Dvoretzky-Kiefer-Wolfowitz bands at joint level `alpha`.
pub fn dominance_experiment(simple: &SimConfig, nb: &SimConfig, alpha: f64) -> Result<DominanceReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if simple.variant != Variant::Simple || nb.variant != Variant::Nonbacktracking {
        return Err(invalid(
            "variant",
            "expected a simple and a nonbacktracking configuration",
        ));
    }
    if simple.d != nb.d
        || simple.frog_law != nb.frog_law
        || simple.horizon != nb.horizon
        || simple.depth_cap != nb.depth_cap
        || simple.trials != nb.trials
    {
        return Err(invalid(
            "config",
            "simple and nonbacktracking configurations must match",
        ));
    }
    let a = run_batch(simple)?;
    let b = run_batch(nb)?;
    let len = a.visit_counts.len().max(b.visit_counts.len());
    let fa = empirical_cdf(&a.visit_counts, a.trials, len);
    let fb = empirical_cdf(&b.visit_counts, b.trials, len);
    let mut forward = (f64::NEG_INFINITY, 0);
    let mut reverse = (f64::NEG_INFINITY, 0);
    for x in 0..len {
        let diff = fa[x] - fb[x];
        if diff > forward.0 {
            forward = (diff, x);
        }
        if -diff > reverse.0 {
            reverse = (-diff, x);
        }
    }
    let band = |n: u64| ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt();
    Ok(DominanceReport {
        alpha,
        trials_simple: a.trials,
        trials_nb: b.trials,
        mean_simple: a.mean_visits,
        mean_nb: b.mean_visits,
        band_simple: band(a.trials),
        band_nb: band(b.trials),
        forward_statistic: forward.0,
        forward_argmax: forward.1,
        reverse_statistic: reverse.0,
        reverse_argmax: reverse.1,
        truncated_simple: a.truncated_trials,
        truncated_nb: b.truncated_trials,
    })
}

/// Shared settings for recurrence-proxy runs.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ProxySettings {
    pub d: usize,
    pub horizon: u32,
    pub depth_cap: u32,
    pub trials: u64,
    pub seed: u64,
    pub max_frog_steps: Option<u64>,
}

impl ProxySettings {
    pub fn config(&self, mu: f64) -> SimConfig {
        let mut c = SimConfig::new(
            self.d,
            FrogLaw::Poisson { mu },
            Variant::Simple,
            self.horizon,
            self.depth_cap,
            self.trials,
            self.seed,
        );
        c.prune_unreachable = true;
        c.max_frog_steps = self.max_frog_steps;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProxyEstimate {
    pub mu: f64,
    pub mean: f64,
    pub stderr: f64,
    /// Trials stopped by the work budget; when nonzero `mean` is a lower bound.
    pub truncated_trials: u64,
    pub mean_absorbed: f64,
}

impl ProxyEstimate {
    pub fn is_exact(&self) -> bool {
        self.truncated_trials == 0
    }
}

/// Mean number of root visits of the simple frog model within the horizon.
///
/// A finite-horizon surrogate for recurrence; it is increasing in `mu` but
/// says nothing definite about the infinite process.
pub fn recurrence_proxy(settings: &ProxySettings, mu: f64) -> Result<ProxyEstimate> {
    Ok(ProxyTrials::run(settings, mu)?.estimate())
}

/// Per-trial results behind a proxy estimate, kept so that truncated trials
/// can be rerun with a larger budget.
struct ProxyTrials {
    mu: f64,
    config: SimConfig,
    visits: Vec<u64>,
    absorbed: Vec<u64>,
    truncated: Vec<u64>,
}

impl ProxyTrials {
    fn run(settings: &ProxySettings, mu: f64) -> Result<Self> {
        let config = settings.config(mu);
        let n = config.trials as usize;
        let mut out = Self {
            mu,
            config,
            visits: Vec::with_capacity(n),
            absorbed: Vec::with_capacity(n),
            truncated: Vec::new(),
        };
        let config = out.config.clone();
        run_batch_with(&config, |o| {
            out.visits.push(o.root_visits);
            out.absorbed.push(o.absorbed_at_cap);
            if o.truncated_at.is_some() {
                out.truncated.push(o.trial);
            }
            Ok(())
        })?;
        Ok(out)
    }

    /// Reruns the truncated trials with the budget raised tenfold, up to
    /// `DEFAULT_MAX_FROG_STEPS`. Each trial has its own random stream, so a
    /// rerun continues the same realisation. Returns false at the cap.
    fn escalate(&mut self) -> Result<bool> {
        let budget = match self.config.max_frog_steps {
            Some(b) if b < DEFAULT_MAX_FROG_STEPS && !self.truncated.is_empty() => b,
            _ => return Ok(false),
        };
        let mut config = self.config.clone();
        config.max_frog_steps = Some(budget.saturating_mul(10).min(DEFAULT_MAX_FROG_STEPS));
        let outcomes: Vec<SimOutcome> = self
            .truncated
            .par_iter()
            .map(|&i| run_trial(&config, i))
            .collect::<Result<_>>()?;
        self.truncated.clear();
        for o in outcomes {
            self.visits[o.trial as usize] = o.root_visits;
            self.absorbed[o.trial as usize] = o.absorbed_at_cap;
            if o.truncated_at.is_some() {
                self.truncated.push(o.trial);
            }
        }
        self.config = config;
        Ok(true)
    }

    fn estimate(&self) -> ProxyEstimate {
        let n = self.visits.len() as f64;
        let mean = self.visits.iter().sum::<u64>() as f64 / n;
        let var = if n > 1.0 {
            self.visits.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        ProxyEstimate {
            mu: self.mu,
            mean,
            stderr: (var / n).sqrt(),
            truncated_trials: self.truncated.len() as u64,
            mean_absorbed: self.absorbed.iter().sum::<u64>() as f64 / n,
        }
    }
}

pub type CurvePoint = ProxyEstimate;

#[derive(Debug, Clone, Serialize)]
pub struct CriticalSearch {
    pub threshold: f64,
    /// Midpoint of the final bracket.
    pub crossing: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    /// Every evaluated point, sorted by `mu`.
    pub curve: Vec<CurvePoint>,
    /// Some decision used a truncated estimate that fell below the threshold.
    pub ambiguous: bool,
}

/// Bisection on `mu` for the point where the proxy crosses `threshold`.
///
/// Truncated trials are rerun with a growing budget whenever a decision
/// would otherwise rest on a lower bound below the threshold.
///
/// All evaluations share `settings.seed`, so the response is a common
/// random numbers comparison across `mu`.
pub fn critical_search(
    settings: &ProxySettings,
    threshold: f64,
    mu_lo: f64,
    mu_hi: f64,
    iterations: u32,
) -> Result<CriticalSearch> {
    if !(mu_lo >= 0.0 && mu_lo < mu_hi && mu_hi.is_finite()) {
        return Err(invalid(
            "mu_lo",
            format!("need 0 <= mu_lo < mu_hi, got [{mu_lo}, {mu_hi}]"),
        ));
    }
    let mut curve = Vec::new();
    let mut ambiguous = false;
    let mut eval = |mu: f64, curve: &mut Vec<CurvePoint>| -> Result<bool> {
        let mut trials = ProxyTrials::run(settings, mu)?;
        let mut p = trials.estimate();
        // a truncated mean is a lower bound, so only a result below the
        // threshold needs the truncated trials finished
        while p.mean < threshold && !p.is_exact() && trials.escalate()? {
            p = trials.estimate();
        }
        let above = p.mean >= threshold;
        if !above && !p.is_exact() {
            ambiguous = true;
        }
        curve.push(p);
        Ok(above)
    };
    let lo_above = eval(mu_lo, &mut curve)?;
    let hi_above = eval(mu_hi, &mut curve)?;
    if lo_above || !hi_above {
        return Err(Error::Bracket {
            mu_lo,
            mu_hi,
            proxy_lo: curve[0].mean,
            proxy_hi: curve[1].mean,
            threshold,
        });
    }
    let (mut lo, mut hi) = (mu_lo, mu_hi);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut curve)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    curve.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    Ok(CriticalSearch {
        threshold,
        crossing: 0.5 * (lo + hi),
        mu_lo: lo,
        mu_hi: hi,
        curve,
        ambiguous,
    })
}
