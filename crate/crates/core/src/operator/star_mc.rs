//! Literal Monte Carlo of the star-graph particle system.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::StarParams;
use crate::dist::{Pmf, PmfSampler};
use crate::error::{invalid, Result};
use crate::rng::stream_rng;

/// One realisation of the star system.
#[derive(Debug, Clone, PartialEq)]
pub struct StarSystemState {
    /// Particles at the centre `∅'`.
    pub centre: u64,
    /// Batch sizes at `v_1..v_d` (index 0 is `v_1`). Batches at leaves that
    /// were never hit are not sampled and are recorded as 0.
    pub leaves: Vec<u64>,
    /// `hits[i]` is true iff a first-wave particle ended at `v_{i+1}`;
    /// `hits[0]` (for `v_1`) is always false.
    pub hits: Vec<bool>,
    pub first_wave_at_root: u64,
    pub second_wave_at_root: u64,
}

impl StarSystemState {
    /// Particles ending at `∅`.
    pub fn at_root(&self) -> u64 {
        self.first_wave_at_root + self.second_wave_at_root
    }
}

/// Runs the two-wave system once.
pub fn simulate_star<R: Rng + ?Sized>(
    pi: &PmfSampler,
    params: &StarParams,
    centre_law: Option<&Poisson<f64>>,
    rng: &mut R,
) -> StarSystemState {
    let d = params.d;
    let mut hits = vec![false; d];
    let mut leaves = vec![0u64; d];
    let mut first = 0u64;

    let centre = centre_law.map_or(0, |law| law.sample(rng) as u64);
    for _ in 0..centre {
        // ∅ is slot 0, v_i is slot i
        match rng.gen_range(0..=d) {
            0 => first += 1,
            1 => {}
            i => hits[i - 1] = true,
        }
    }
    leaves[0] = pi.sample(rng) as u64;
    for _ in 0..leaves[0] {
        // from v_1: ∅ or one of v_2..v_d
        match rng.gen_range(0..d) {
            0 => first += 1,
            i => hits[i] = true,
        }
    }

    let mut second = 0u64;
    for i in 1..d {
        if !hits[i] {
            continue;
        }
        leaves[i] = pi.sample(rng) as u64;
        for _ in 0..leaves[i] {
            if rng.gen_range(0..d) == 0 {
                second += 1;
            }
        }
    }
    StarSystemState {
        centre,
        leaves,
        hits,
        first_wave_at_root: first,
        second_wave_at_root: second,
    }
}

/// Empirical law of the number of particles ending at `∅` over `trials`
/// independent runs, trial `i` using stream `i` of `seed`.
pub fn mc_star_system(pi: &Pmf, params: &StarParams, trials: u64, seed: u64) -> Result<Pmf> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let sampler = pi.sampler();
    let centre_law = if params.mu > 0.0 {
        Some(Poisson::new(params.mu).map_err(|e| invalid("mu", e.to_string()))?)
    } else {
        None
    };
    let histogram = (0..trials)
        .into_par_iter()
        .fold(Vec::new, |mut hist: Vec<u64>, trial| {
            let mut rng = stream_rng(seed, trial);
            let v = simulate_star(&sampler, params, centre_law.as_ref(), &mut rng).at_root() as usize;
            if v >= hist.len() {
                hist.resize(v + 1, 0);
            }
            hist[v] += 1;
            hist
        })
        .reduce(Vec::new, crate::dist::merge_histograms);
    Pmf::from_counts(&histogram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::poisson_pmf;
    use crate::operator::{apply_general, apply_poisson};

    #[test]
    fn empty_system_gives_zero() {
        let params = StarParams::new(3, 0.0, 1e-12).unwrap();
        let emp = mc_star_system(&Pmf::point_mass(0), &params, 1000, 5).unwrap();
        assert_eq!(emp.masses(), &[1.0]);
    }

    #[test]
    fn hit_flags_follow_first_wave() {
        let params = StarParams::new(4, 3.0, 1e-12).unwrap();
        let pi = poisson_pmf(2.0, 1e-12).unwrap().sampler();
        let law = Poisson::new(3.0).unwrap();
        let mut rng = stream_rng(9, 9);
        for _ in 0..500 {
            let s = simulate_star(&pi, &params, Some(&law), &mut rng);
            assert!(!s.hits[0]);
            for i in 1..4 {
                if !s.hits[i] {
                    assert_eq!(s.leaves[i], 0);
                }
            }
            assert!(s.first_wave_at_root <= s.centre + s.leaves[0]);
            assert!(s.second_wave_at_root <= s.leaves[1..].iter().sum::<u64>());
        }
    }

    #[test]
    fn moderate_run_tracks_exact_law() {
        let params = StarParams::new(2, 6.0, 1e-12).unwrap();
        let pi = poisson_pmf(1.0, 1e-12).unwrap();
        let emp = mc_star_system(&pi, &params, 100_000, 1).unwrap();
        let exact = apply_poisson(1.0, &params).unwrap();
        assert!(emp.total_variation(&exact) < 0.015);
        // non-Poisson input
        let pi = Pmf::new(vec![0.1, 0.0, 0.3, 0.1, 0.5], 0.0, 1e-12).unwrap();
        let params = StarParams::new(3, 1.0, 1e-12).unwrap();
        let emp = mc_star_system(&pi, &params, 100_000, 2).unwrap();
        let exact = apply_general(&pi, &params).unwrap();
        assert!(emp.total_variation(&exact) < 0.015);
    }

    #[test]
    fn deterministic_given_seed() {
        let params = StarParams::new(2, 1.0, 1e-12).unwrap();
        let pi = poisson_pmf(1.0, 1e-12).unwrap();
        let a = mc_star_system(&pi, &params, 5000, 42).unwrap();
        let b = mc_star_system(&pi, &params, 5000, 42).unwrap();
        assert_eq!(a, b);
    }
}
