//! Monte Carlo engine for the frog model on the infinite d-ary tree.
//!
//! The root has `d` children and every other vertex has `d` children plus
//! its parent. One frog is awake at the root at step 0; every other vertex
//! holds a sleeping batch drawn from the frog law when it is first visited.
//! Awake frogs step synchronously. Frogs that reach depth `depth_cap` are
//! removed and counted as absorbed.

mod batch;
mod cover;
mod engine;
mod experiments;

pub use batch::{run_batch, run_batch_with, BatchSummary};
pub use cover::{cover_time, cover_time_trial, CoverStats};
pub use engine::{run_trial, Trial};
pub use experiments::{
    critical_search, dominance_experiment, recurrence_proxy, CriticalSearch, CurvePoint, DominanceReport,
    ProxyEstimate, ProxySettings,
};

use serde::{Deserialize, Serialize};

use crate::dist::Pmf;
use crate::error::{invalid, Result};

/// Work budget applied when a configuration does not set one.
pub const DEFAULT_MAX_FROG_STEPS: u64 = 50_000_000;

/// A vertex as the sequence of child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexPath(pub Vec<u8>);

impl VertexPath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn parent(&self) -> Option<Self> {
        let mut p = self.0.clone();
        p.pop().map(|_| Self(p))
    }

    pub fn child(&self, index: u8) -> Self {
        let mut p = self.0.clone();
        p.push(index);
        Self(p)
    }

    pub fn is_neighbor(&self, other: &Self) -> bool {
        self.parent().as_ref() == Some(other) || other.parent().as_ref() == Some(self)
    }
}

/// Snapshot of one awake frog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrogState {
    pub id: u32,
    pub position: VertexPath,
    pub previous: Option<VertexPath>,
    pub active: bool,
}

/// Law of the number of sleeping frogs per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrogLaw {
    Poisson { mu: f64 },
    Fixed { k: u32 },
    Custom { pmf: Pmf },
}

impl FrogLaw {
    pub fn mean(&self) -> f64 {
        match self {
            FrogLaw::Poisson { mu } => *mu,
            FrogLaw::Fixed { k } => *k as f64,
            FrogLaw::Custom { pmf } => pmf.mean(),
        }
    }

    /// Poisson density, when the law is Poisson.
    pub fn mu(&self) -> Option<f64> {
        match self {
            FrogLaw::Poisson { mu } => Some(*mu),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            FrogLaw::Poisson { mu } if !(mu.is_finite() && *mu >= 0.0) => {
                Err(invalid("mu", format!("must be nonnegative, got {mu}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Simple random walks.
    Simple,
    /// Walks that never reverse their last step and halt on reaching the root.
    Nonbacktracking,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Simple => "simple",
            Variant::Nonbacktracking => "nonbacktracking",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Variant::Simple),
            "nonbacktracking" | "nb" => Ok(Variant::Nonbacktracking),
            other => Err(invalid(
                "variant",
                format!("expected simple or nonbacktracking, got {other}"),
            )),
        }
    }
}

/// Full specification of a batch of frog-model trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub d: usize,
    pub frog_law: FrogLaw,
    pub variant: Variant,
    /// Number of steps `T`.
    pub horizon: u32,
    /// Absorbing depth `D`.
    pub depth_cap: u32,
    pub trials: u64,
    pub seed: u64,
    /// Record `W_n = sum exp(-theta |f|)` over awake frogs when set.
    #[serde(default)]
    pub weight_theta: Option<f64>,
    /// Drop frogs too deep to reach the root before the horizon. Exact for
    /// root visits; changes `frogs_woken` and `absorbed_at_cap`.
    #[serde(default)]
    pub prune_unreachable: bool,
    /// Per-trial limit on frog moves; a trial that exceeds it stops and
    /// reports the step in `SimOutcome::truncated_at`.
    #[serde(default)]
    pub max_frog_steps: Option<u64>,
}

impl SimConfig {
    pub fn new(
        d: usize,
        frog_law: FrogLaw,
        variant: Variant,
        horizon: u32,
        depth_cap: u32,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            d,
            frog_law,
            variant,
            horizon,
            depth_cap,
            trials,
            seed,
            weight_theta: None,
            prune_unreachable: false,
            max_frog_steps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(invalid("d", format!("must be at least 2, got {}", self.d)));
        }
        if self.d > u8::MAX as usize {
            return Err(invalid("d", format!("must be at most 255, got {}", self.d)));
        }
        if self.horizon < 1 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        if self.depth_cap < 2 {
            return Err(invalid("depth_cap", "must be at least 2"));
        }
        if self.depth_cap > u16::MAX as u32 {
            return Err(invalid("depth_cap", "must fit in 16 bits"));
        }
        if self.trials < 1 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if let Some(theta) = self.weight_theta {
            if !(theta.is_finite() && theta > 0.0) {
                return Err(invalid("weight_theta", format!("must be positive, got {theta}")));
            }
        }
        self.frog_law.validate()
    }

    pub fn frog_step_budget(&self) -> u64 {
        self.max_frog_steps.unwrap_or(DEFAULT_MAX_FROG_STEPS)
    }
}

/// Measured results of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub trial: u64,
    /// Frog arrivals at the root at steps `>= 1`, one per frog per step.
    pub root_visits: u64,
    pub root_visit_times: Vec<u32>,
    /// Sleeping frogs woken (the initial frog is not counted).
    pub frogs_woken: u64,
    pub absorbed_at_cap: u64,
    /// Frogs dropped by light-cone pruning.
    pub pruned: u64,
    pub frog_steps: u64,
    /// Step after which the work budget stopped the trial.
    pub truncated_at: Option<u32>,
    /// `W_0..W_T` when weights were requested.
    pub weight_trace: Option<Vec<f64>>,
}

impl SimOutcome {
    pub fn is_truncated(&self) -> bool {
        self.truncated_at.is_some()
    }
}
