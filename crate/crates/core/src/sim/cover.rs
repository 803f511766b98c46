use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::stream_rng;

/// Summary of cover times over independent trials.
#[derive(Debug, Clone, Serialize)]
pub struct CoverStats {
    pub d: usize,
    pub height: u32,
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub p10: u64,
    pub p50: u64,
    pub p90: u64,
}

fn check(d: usize, height: u32) -> Result<usize> {
    if d < 2 {
        return Err(invalid("d", format!("must be at least 2, got {d}")));
    }
    let mut size = 0usize;
    let mut level = 1usize;
    for _ in 0..=height {
        size = size
            .checked_add(level)
            .filter(|&s| s <= 1 << 26)
            .ok_or_else(|| invalid("height", "tree too large"))?;
        level = level.saturating_mul(d);
    }
    Ok(size)
}

/// Cover time of one trial of the one-per-site frog model on the full
/// `d`-ary tree of height `height`.
///
/// Vertices are heap-indexed (children of `i` are `d*i+1..=d*i+d`). Walks
/// are simple random walks on the finite tree: the root moves to a uniform
/// child and a leaf moves to its parent.
pub fn cover_time_trial(d: usize, height: u32, seed: u64, trial_index: u64) -> Result<u64> {
    let size = check(d, height)?;
    let first_leaf = (size - 1) / d + usize::from(height == 0);
    let mut rng = stream_rng(seed, trial_index);
    let mut visited = vec![false; size];
    visited[0] = true;
    let mut remaining = size - 1;
    let mut frogs = vec![0usize];
    let mut t = 0u64;
    while remaining > 0 {
        t += 1;
        let awake = frogs.len();
        for i in 0..awake {
            let v = frogs[i];
            let next = if v == 0 {
                1 + rng.gen_range(0..d)
            } else if v >= first_leaf {
                (v - 1) / d
            } else {
                let r = rng.gen_range(0..=d);
                if r == d {
                    (v - 1) / d
                } else {
                    d * v + 1 + r
                }
            };
            frogs[i] = next;
            if !visited[next] {
                visited[next] = true;
                remaining -= 1;
                frogs.push(next);
            }
        }
    }
    Ok(t)
}

/// Cover-time statistics over `trials` independent trials.
pub fn cover_time(d: usize, height: u32, trials: u64, seed: u64) -> Result<CoverStats> {
    check(d, height)?;
    if trials < 1 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let mut times: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|i| cover_time_trial(d, height, seed, i))
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean = times.iter().map(|&t| t as f64).sum::<f64>() / n;
    let var = if trials > 1 {
        times.iter().map(|&t| (t as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    times.sort_unstable();
    let q = |p: f64| times[((p * n).ceil() as usize).clamp(1, times.len()) - 1];
    Ok(CoverStats {
        d,
        height,
        trials,
        mean,
        stderr: (var / n).sqrt(),
        p10: q(0.1),
        p50: q(0.5),
        p90: q(0.9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_zero_is_covered_at_once() {
        assert_eq!(cover_time_trial(3, 0, 1, 0).unwrap(), 0);
        assert_eq!(cover_time(2, 0, 10, 1).unwrap().mean, 0.0);
    }

    #[test]
    fn covers_at_least_height_steps() {
        for t in 0..50 {
            assert!(cover_time_trial(2, 4, 5, t).unwrap() >= 4);
        }
    }

    #[test]
    fn means_grow_with_height() {
        let means: Vec<f64> = (1..=5).map(|h| cover_time(2, h, 2000, 11).unwrap().mean).collect();
        assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
    }

    #[test]
    fn rejects_huge_trees() {
        assert!(cover_time_trial(2, 40, 0, 0).is_err());
    }
}
