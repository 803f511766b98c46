use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{FrogLaw, FrogState, SimConfig, SimOutcome, Variant, VertexPath};
use crate::dist::PmfSampler;
use crate::error::Result;
use crate::rng::{stream_rng, StreamRng};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Frog {
    id: u32,
    node: u32,
    /// Vertex occupied before the last step, `NONE` for a frog that has not moved.
    prev: u32,
    depth: u16,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    parent: u32,
    sleepers: u32,
    index: u8,
}

/// Vertices realised so far, as a trie of child pointers rooted at node 0.
#[derive(Debug, Default)]
struct Arena {
    d: usize,
    nodes: Vec<Node>,
    children: Vec<u32>,
}

impl Arena {
    fn reset(&mut self, d: usize) {
        self.d = d;
        self.nodes.clear();
        self.children.clear();
        self.push(NONE, 0, 0);
    }

    #[inline]
    fn push(&mut self, parent: u32, index: u8, sleepers: u32) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            parent,
            sleepers,
            index,
        });
        self.children.resize(self.children.len() + self.d, NONE);
        id
    }

    #[inline]
    fn child(&self, node: u32, index: usize) -> u32 {
        self.children[node as usize * self.d + index]
    }

    fn path(&self, mut node: u32) -> VertexPath {
        let mut rev = Vec::new();
        while node != 0 {
            let n = self.nodes[node as usize];
            rev.push(n.index);
            node = n.parent;
        }
        rev.reverse();
        VertexPath(rev)
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Poisson sampling by inversion against a cumulative table.
struct PoissonTable {
    rate: f64,
    cdf: Vec<f64>,
    last_mass: f64,
}

impl PoissonTable {
    fn new(rate: f64) -> Result<Self> {
        let pmf = crate::dist::poisson_pmf(rate, 1e-16)?;
        let mut acc = 0.0;
        let cdf: Vec<f64> = pmf
            .masses()
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Ok(Self {
            rate,
            last_mass: *pmf.masses().last().unwrap_or(&1.0),
            cdf,
        })
    }

    #[inline]
    fn sample(&self, rng: &mut StreamRng) -> u32 {
        let u: f64 = rng.gen();
        if let Some(k) = self.cdf.iter().position(|&c| u < c) {
            return k as u32;
        }
        // beyond the table: continue the inversion term by term
        let mut k = self.cdf.len() - 1;
        let mut acc = self.cdf[k];
        let mut mass = self.last_mass;
        while acc <= u && mass > 0.0 {
            k += 1;
            mass *= self.rate / k as f64;
            acc += mass;
        }
        k as u32
    }
}

/// Table inversion is used up to this rate.
const TABLE_RATE_LIMIT: f64 = 64.0;

enum Sleepers {
    None,
    Fixed(u32),
    Table(PoissonTable),
    Poisson(Poisson<f64>),
    Custom(PmfSampler),
}

impl Sleepers {
    fn new(law: &FrogLaw) -> Result<Self> {
        Ok(match law {
            FrogLaw::Poisson { mu } if *mu == 0.0 => Sleepers::None,
            FrogLaw::Poisson { mu } if *mu <= TABLE_RATE_LIMIT => Sleepers::Table(PoissonTable::new(*mu)?),
            FrogLaw::Poisson { mu } => {
                Sleepers::Poisson(Poisson::new(*mu).map_err(|e| crate::error::invalid("mu", e.to_string()))?)
            }
            FrogLaw::Fixed { k: 0 } => Sleepers::None,
            FrogLaw::Fixed { k } => Sleepers::Fixed(*k),
            FrogLaw::Custom { pmf } => Sleepers::Custom(pmf.sampler()),
        })
    }

    #[inline]
    fn sample(&self, rng: &mut StreamRng) -> u32 {
        match self {
            Sleepers::None => 0,
            Sleepers::Fixed(k) => *k,
            Sleepers::Table(t) => t.sample(rng),
            Sleepers::Poisson(p) => p.sample(rng) as u32,
            Sleepers::Custom(s) => s.sample(rng) as u32,
        }
    }
}

/// Reusable allocations for consecutive trials on one worker.
#[derive(Default)]
pub(crate) struct Buffers {
    arena: Arena,
    frogs: Vec<Frog>,
    next: Vec<Frog>,
}

/// One trial, advanced step by step.
pub struct Trial<'a> {
    config: &'a SimConfig,
    rng: StreamRng,
    sleepers: Sleepers,
    buffers: Buffers,
    decay: Vec<f64>,
    step: u32,
    next_id: u32,
    finished: bool,
    outcome: SimOutcome,
}

impl<'a> Trial<'a> {
    pub fn new(config: &'a SimConfig, trial_index: u64) -> Result<Self> {
        Self::with_buffers(config, trial_index, Buffers::default())
    }

    pub(crate) fn with_buffers(config: &'a SimConfig, trial_index: u64, mut buffers: Buffers) -> Result<Self> {
        config.validate()?;
        buffers.arena.reset(config.d);
        buffers.frogs.clear();
        buffers.next.clear();
        buffers.frogs.push(Frog {
            id: 0,
            node: 0,
            prev: NONE,
            depth: 0,
        });
        let decay = match config.weight_theta {
            Some(theta) => (0..=config.depth_cap).map(|k| (-theta * k as f64).exp()).collect(),
            None => Vec::new(),
        };
        Ok(Self {
            config,
            rng: stream_rng(config.seed, trial_index),
            sleepers: Sleepers::new(&config.frog_law)?,
            buffers,
            step: 0,
            next_id: 1,
            finished: false,
            outcome: SimOutcome {
                trial: trial_index,
                root_visits: 0,
                root_visit_times: Vec::new(),
                frogs_woken: 0,
                absorbed_at_cap: 0,
                pruned: 0,
                frog_steps: 0,
                truncated_at: None,
                weight_trace: config.weight_theta.map(|_| vec![1.0]),
            },
            decay,
        })
    }

    /// Steps taken so far.
    pub fn step_count(&self) -> u32 {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn active_count(&self) -> usize {
        self.buffers.frogs.len()
    }

    pub fn outcome(&self) -> &SimOutcome {
        &self.outcome
    }

    /// Vertices realised so far (the root included).
    pub fn visited_vertices(&self) -> usize {
        self.buffers.arena.len()
    }

    /// Sum of sleeping batches sampled at realised vertices.
    pub fn sampled_sleepers(&self) -> u64 {
        self.buffers.arena.nodes.iter().map(|n| n.sleepers as u64).sum()
    }

    /// Number of realised children of the root.
    pub fn root_children_visited(&self) -> usize {
        (0..self.config.d)
            .filter(|&i| self.buffers.arena.child(0, i) != NONE)
            .count()
    }

    /// Depths of the awake frogs.
    pub fn active_depths(&self) -> impl Iterator<Item = u32> + '_ {
        self.buffers.frogs.iter().map(|f| f.depth as u32)
    }

    /// Snapshot of the awake frogs.
    pub fn frogs(&self) -> Vec<FrogState> {
        let arena = &self.buffers.arena;
        self.buffers
            .frogs
            .iter()
            .map(|f| FrogState {
                id: f.id,
                position: arena.path(f.node),
                previous: (f.prev != NONE).then(|| arena.path(f.prev)),
                active: true,
            })
            .collect()
    }

    /// Advances one synchronous step. Returns false once the trial is over.
    pub fn step(&mut self) -> bool {
        if self.finished {
            return false;
        }
        let n = self.step + 1;
        let config = self.config;
        let d = config.d;
        let d32 = d as u32;
        let cap = config.depth_cap as u16;
        let nonbacktracking = config.variant == Variant::Nonbacktracking;
        // deepest level from which the root is still reachable by the horizon
        let reach = if config.prune_unreachable {
            (config.horizon - n) as u16
        } else {
            u16::MAX
        };

        let Buffers { arena, frogs, next } = &mut self.buffers;
        let rng = &mut self.rng;
        let out = &mut self.outcome;
        let weighted = !self.decay.is_empty();
        let mut weight = 0.0;
        next.clear();

        for f in frogs.iter() {
            let node = f.node as usize;
            // Some(i): move to child i; None: move to the parent.
            let towards: Option<usize> = if node == 0 {
                Some(rng.gen_range(0..d32) as usize)
            } else if nonbacktracking && f.prev != NONE {
                if f.prev == arena.nodes[node].parent {
                    Some(rng.gen_range(0..d32) as usize)
                } else {
                    let came_from = arena.nodes[f.prev as usize].index as usize;
                    let r = rng.gen_range(0..d32) as usize;
                    if r == d - 1 {
                        None
                    } else {
                        Some(if r < came_from { r } else { r + 1 })
                    }
                }
            } else {
                let r = rng.gen_range(0..=d32) as usize;
                (r < d).then_some(r)
            };

            let (dest, depth) = match towards {
                None => (arena.nodes[node].parent, f.depth - 1),
                Some(i) => {
                    let depth = f.depth + 1;
                    if depth >= cap {
                        out.absorbed_at_cap += 1;
                        continue;
                    }
                    let existing = arena.child(f.node, i);
                    if existing != NONE {
                        (existing, depth)
                    } else {
                        let woken = self.sleepers.sample(rng);
                        let child = arena.push(f.node, i as u8, woken);
                        arena.children[node * d + i] = child;
                        out.frogs_woken += woken as u64;
                        if depth > reach {
                            out.pruned += woken as u64;
                        } else {
                            for _ in 0..woken {
                                next.push(Frog {
                                    id: self.next_id,
                                    node: child,
                                    prev: NONE,
                                    depth,
                                });
                                self.next_id += 1;
                            }
                            if weighted {
                                weight += woken as f64 * self.decay[depth as usize];
                            }
                        }
                        (child, depth)
                    }
                }
            };

            if dest == 0 {
                out.root_visits += 1;
                out.root_visit_times.push(n);
                if nonbacktracking {
                    continue;
                }
            }
            if depth > reach {
                out.pruned += 1;
                continue;
            }
            if weighted {
                weight += self.decay[depth as usize];
            }
            next.push(Frog {
                id: f.id,
                node: dest,
                prev: f.node,
                depth,
            });
        }
        out.frog_steps += frogs.len() as u64;
        std::mem::swap(frogs, next);

        if let Some(trace) = out.weight_trace.as_mut() {
            trace.push(weight);
        }
        self.step = n;
        if n >= config.horizon || frogs.is_empty() {
            self.finished = true;
        } else if out.frog_steps > config.frog_step_budget() {
            out.truncated_at = Some(n);
            self.finished = true;
        }
        if self.finished {
            if let Some(trace) = out.weight_trace.as_mut() {
                if frogs.is_empty() {
                    trace.resize(config.horizon as usize + 1, 0.0);
                }
            }
        }
        !self.finished
    }

    pub fn run(mut self) -> SimOutcome {
        while self.step() {}
        self.outcome
    }

    pub(crate) fn run_into(mut self) -> (SimOutcome, Buffers) {
        while self.step() {}
        (self.outcome, self.buffers)
    }
}

/// Runs trial `trial_index` of `config` to completion.
pub fn run_trial(config: &SimConfig, trial_index: u64) -> Result<SimOutcome> {
    Ok(Trial::new(config, trial_index)?.run())
}
