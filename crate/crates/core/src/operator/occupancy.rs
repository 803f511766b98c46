//! Occupancy laws for balls dropped uniformly into boxes.
//!
//! `P[t boxes occupied] = C(b, t) S(n, t) t! / b^n` with `S` the Stirling
//! numbers of the second kind. The table is built with the Stirling
//! recurrence `S(n, t) = t S(n-1, t) + S(n-1, t-1)` rescaled by
//! `C(b, t) t! / b^n`, which keeps every entry a probability and avoids
//! overflow for large `n`.

use crate::dist::Pmf;
use crate::error::{invalid, Result};

/// Occupancy laws for `0..=max_balls` balls in a fixed number of boxes.
#[derive(Debug, Clone)]
pub struct OccupancyTable {
    boxes: usize,
    rows: Vec<Vec<f64>>,
}

impl OccupancyTable {
    pub fn new(max_balls: usize, boxes: usize) -> Result<Self> {
        if boxes == 0 {
            return Err(invalid("boxes", "must be at least 1"));
        }
        let b = boxes as f64;
        let mut rows = Vec::with_capacity(max_balls + 1);
        let mut row = vec![0.0; boxes + 1];
        row[0] = 1.0;
        rows.push(row.clone());
        for _ in 0..max_balls {
            let mut next = vec![0.0; boxes + 1];
            for t in 0..=boxes {
                if row[t] == 0.0 {
                    continue;
                }
                // the new ball lands in an occupied box, or opens a new one
                next[t] += row[t] * t as f64 / b;
                if t < boxes {
                    next[t + 1] += row[t] * (boxes - t) as f64 / b;
                }
            }
            row = next;
            rows.push(row.clone());
        }
        Ok(Self { boxes, rows })
    }

    pub fn boxes(&self) -> usize {
        self.boxes
    }

    pub fn max_balls(&self) -> usize {
        self.rows.len() - 1
    }

    /// `P[t occupied]` for `t = 0..=boxes` after `balls` balls.
    pub fn row(&self, balls: usize) -> &[f64] {
        &self.rows[balls]
    }
}

/// Law of the number of occupied boxes.
pub fn occupancy_pmf(balls: usize, boxes: usize) -> Result<Pmf> {
    let table = OccupancyTable::new(balls, boxes)?;
    Ok(Pmf::from_parts(
        table.row(balls).to_vec(),
        0.0,
        crate::dist::DEFAULT_TOL,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates all `boxes^balls` assignments.
    fn enumerate(balls: usize, boxes: usize) -> Vec<f64> {
        let total = boxes.pow(balls as u32);
        let mut counts = vec![0usize; boxes + 1];
        for code in 0..total {
            let mut c = code;
            let mut used = vec![false; boxes];
            for _ in 0..balls {
                used[c % boxes] = true;
                c /= boxes;
            }
            counts[used.iter().filter(|u| **u).count()] += 1;
        }
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    /// `ln S(n, t)` by the log-space Stirling recurrence.
    fn ln_stirling2(n: usize, t: usize) -> f64 {
        let mut prev = vec![f64::NEG_INFINITY; t + 1];
        prev[0] = 0.0;
        for _ in 0..n {
            let mut next = vec![f64::NEG_INFINITY; t + 1];
            for j in 1..=t {
                let a = (j as f64).ln() + prev[j];
                let b = prev[j - 1];
                let hi = a.max(b);
                next[j] = if hi == f64::NEG_INFINITY {
                    hi
                } else {
                    hi + ((a - hi).exp() + (b - hi).exp()).ln()
                };
            }
            prev = next;
        }
        prev[t]
    }

    fn ln_fact(n: usize) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn small_cases() {
        assert_eq!(occupancy_pmf(0, 3).unwrap(), Pmf::point_mass(0));
        assert_eq!(occupancy_pmf(1, 4).unwrap(), Pmf::point_mass(1));
        assert_eq!(occupancy_pmf(2, 2).unwrap().masses(), &[0.0, 0.5, 0.5]);
        assert!(occupancy_pmf(3, 0).is_err());
    }

    #[test]
    fn matches_enumeration() {
        for boxes in 1..=4 {
            for balls in 0..=6 {
                let exact = enumerate(balls, boxes);
                let table = occupancy_pmf(balls, boxes).unwrap();
                for (t, e) in exact.iter().enumerate() {
                    assert!((table.mass(t) - e).abs() < 1e-14, "{balls} in {boxes}, t={t}");
                }
            }
        }
    }

    #[test]
    fn matches_log_space_stirling_formula() {
        for &(balls, boxes) in &[(40usize, 4usize), (200, 7), (1000, 19)] {
            let p = occupancy_pmf(balls, boxes).unwrap();
            for t in 1..=boxes.min(balls) {
                let ln_p =
                    ln_fact(boxes) - ln_fact(boxes - t) + ln_stirling2(balls, t) - balls as f64 * (boxes as f64).ln();
                let formula = ln_p.exp();
                assert!(
                    (p.mass(t) - formula).abs() <= 1e-9 * formula.max(1e-300) + 1e-300,
                    "{balls} in {boxes}, t={t}: {} vs {formula}",
                    p.mass(t)
                );
            }
            assert!((p.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
