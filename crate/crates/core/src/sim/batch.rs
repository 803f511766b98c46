use rayon::prelude::*;
use serde::Serialize;

use super::engine::{Buffers, Trial};
use super::{SimConfig, SimOutcome};
use crate::dist::Pmf;
use crate::error::Result;

/// Trials handed to the thread pool at a time; outcomes are delivered in
/// trial order after each block.
const BLOCK: u64 = 512;

/// Aggregate statistics over a batch.
#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub trials: u64,
    pub mean_visits: f64,
    pub variance: f64,
    pub stderr: f64,
    pub mean_woken: f64,
    pub mean_absorbed: f64,
    pub mean_frog_steps: f64,
    /// Trials stopped early by the work budget.
    pub truncated_trials: u64,
    /// Empirical law of the root-visit count.
    #[serde(skip)]
    pub visits: Pmf,
    /// `visit_counts[k]` trials had exactly `k` root visits.
    #[serde(skip)]
    pub visit_counts: Vec<u64>,
    /// Mean of `W_n` for `n = 0..=T`, when weights were recorded.
    pub weight_mean: Option<Vec<f64>>,
    /// Standard error of each entry of `weight_mean`.
    pub weight_stderr: Option<Vec<f64>>,
}

#[derive(Default)]
struct Accumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
    woken: f64,
    absorbed: f64,
    steps: f64,
    truncated: u64,
    histogram: Vec<u64>,
    w_sum: Vec<f64>,
    w_sum_sq: Vec<f64>,
}

impl Accumulator {
    fn add(&mut self, o: &SimOutcome) {
        let v = o.root_visits as f64;
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
        self.woken += o.frogs_woken as f64;
        self.absorbed += o.absorbed_at_cap as f64;
        self.steps += o.frog_steps as f64;
        self.truncated += o.is_truncated() as u64;
        let k = o.root_visits as usize;
        if self.histogram.len() <= k {
            self.histogram.resize(k + 1, 0);
        }
        self.histogram[k] += 1;
        if let Some(trace) = &o.weight_trace {
            if self.w_sum.len() < trace.len() {
                self.w_sum.resize(trace.len(), 0.0);
                self.w_sum_sq.resize(trace.len(), 0.0);
            }
            for (i, w) in trace.iter().enumerate() {
                self.w_sum[i] += w;
                self.w_sum_sq[i] += w * w;
            }
        }
    }

    fn finish(self, weights: bool) -> Result<BatchSummary> {
        let n = self.n as f64;
        let mean = self.sum / n;
        let variance = if self.n > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let (weight_mean, weight_stderr) = if weights {
            let means: Vec<f64> = self.w_sum.iter().map(|s| s / n).collect();
            let se = self
                .w_sum_sq
                .iter()
                .zip(&means)
                .map(|(sq, m)| {
                    if self.n > 1 {
                        (((sq - n * m * m) / (n - 1.0)).max(0.0) / n).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect();
            (Some(means), Some(se))
        } else {
            (None, None)
        };
        Ok(BatchSummary {
            trials: self.n,
            mean_visits: mean,
            variance,
            stderr: (variance / n).sqrt(),
            mean_woken: self.woken / n,
            mean_absorbed: self.absorbed / n,
            mean_frog_steps: self.steps / n,
            truncated_trials: self.truncated,
            visits: Pmf::from_counts(&self.histogram)?,
            visit_counts: self.histogram,
            weight_mean,
            weight_stderr,
        })
    }
}

/// Runs `config.trials` independent trials and summarises them.
pub fn run_batch(config: &SimConfig) -> Result<BatchSummary> {
    run_batch_with(config, |_| Ok(()))
}

/// Like [`run_batch`], also passing every outcome to `sink` in trial order.
///
/// Trial `i` always uses random stream `i`, so results do not depend on the
/// number of worker threads.
pub fn run_batch_with<F>(config: &SimConfig, mut sink: F) -> Result<BatchSummary>
where
    F: FnMut(&SimOutcome) -> Result<()>,
{
    config.validate()?;
    let mut acc = Accumulator::default();
    let mut start = 0;
    while start < config.trials {
        let end = (start + BLOCK).min(config.trials);
        let outcomes: Vec<SimOutcome> = (start..end)
            .into_par_iter()
            .map_init(
                || Some(Buffers::default()),
                |slot, index| -> Result<SimOutcome> {
                    let buffers = slot.take().unwrap_or_default();
                    let (outcome, buffers) = Trial::with_buffers(config, index, buffers)?.run_into();
                    *slot = Some(buffers);
                    Ok(outcome)
                },
            )
            .collect::<Result<_>>()?;
        for o in &outcomes {
            acc.add(o);
            sink(o)?;
        }
        start = end;
    }
    acc.finish(config.weight_theta.is_some())
}
