//! The two-wave star-graph operator on root-visit laws.
//!
//! A star with centre `∅'` and leaves `∅, v_1, .., v_d` carries `Poi(mu)`
//! particles at the centre and a `pi`-distributed batch at each `v_i`. The
//! centre and `v_1` particles (first wave) step once; any `v_i` with `i >= 2`
//! reached by them releases its batch (second wave), each of whose particles
//! reaches `∅` with probability `1/d`. The operator maps `pi` to the law of
//! the number of particles ending at `∅`.

mod occupancy;
mod star_mc;

pub use occupancy::{occupancy_pmf, OccupancyTable};
pub use star_mc::{mc_star_system, simulate_star, StarSystemState};

use serde::{Deserialize, Serialize};

use crate::dist::special::binomial_row;
use crate::dist::{binomial_pmf, convolve, dominates, mixture, poisson_pmf, thin, DominanceVerdict, Pmf};
use crate::error::{invalid, Error, Result};

/// Largest support an iterate may reach before it is treated as a fault.
pub const SUPPORT_CAP: usize = 4096;

/// Tree arity and sleeping-frog density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarParams {
    pub d: usize,
    pub mu: f64,
    pub tol: f64,
}

impl StarParams {
    pub fn new(d: usize, mu: f64, tol: f64) -> Result<Self> {
        if d < 2 {
            return Err(invalid("d", format!("must be at least 2, got {d}")));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(invalid("mu", format!("must be nonnegative, got {mu}")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid("tol", format!("must lie in (0, 1), got {tol}")));
        }
        Ok(Self { d, mu, tol })
    }

    /// Rate of centre particles stepping to any one given leaf.
    pub fn centre_rate(&self) -> f64 {
        self.mu / (self.d + 1) as f64
    }
}

/// Poisson-mixture form of the operator applied to `Poi(lambda)`:
/// `Poi(rates[U])` with `U ~ Bin(d-1, u_prob)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureRep {
    pub lambda: f64,
    pub u_prob: f64,
    pub rates: Vec<f64>,
}

impl MixtureRep {
    pub fn new(lambda: f64, params: &StarParams) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(invalid("lambda", format!("must be nonnegative, got {lambda}")));
        }
        let d = params.d as f64;
        let m = params.centre_rate();
        let u_prob = -(-(lambda / d) - m).exp_m1();
        let rates = (0..params.d).map(|u| (u + 1) as f64 * lambda / d + m).collect();
        Ok(Self { lambda, u_prob, rates })
    }

    /// Law of `U`.
    pub fn u_law(&self) -> Pmf {
        binomial_pmf(self.rates.len() - 1, self.u_prob).expect("u_prob is a probability")
    }

    pub fn mean(&self) -> f64 {
        let u = self.u_law();
        self.rates.iter().enumerate().map(|(i, r)| u.mass(i) * r).sum()
    }
}

/// The operator applied to `Poi(lambda)` through its mixture form.
pub fn apply_poisson(lambda: f64, params: &StarParams) -> Result<Pmf> {
    let rep = MixtureRep::new(lambda, params)?;
    let u = rep.u_law();
    let weights: Vec<f64> = (0..rep.rates.len()).map(|i| u.mass(i)).collect();
    let components = rep
        .rates
        .iter()
        .map(|&r| poisson_pmf(r, params.tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(mixture(&weights, &components))
}

/// The operator applied to an arbitrary `pi`, computed exactly.
///
/// Contributions to `∅`:
/// * `Poi(mu/(d+1))` from the centre, independent of which leaves are hit;
/// * `J ~ Bin(X_1, 1/d)` particles from `v_1`;
/// * the other `X_1 - J` from `v_1` occupy `t` of the `d-1` leaves
///   `v_2..v_d`, and each leaf not occupied by them is hit from the centre
///   independently with probability `1 - e^{-mu/(d+1)}`, giving `U` hit leaves;
/// * `U` independent `Bin(pi, 1/d)` second-wave batches.
pub fn apply_general(pi: &Pmf, params: &StarParams) -> Result<Pmf> {
    apply_at(pi, params, 1)
}

fn apply_at(pi: &Pmf, params: &StarParams, iteration: usize) -> Result<Pmf> {
    let d = params.d;
    let boxes = d - 1;
    let k_max = pi.max_value();

    let hit = -(-params.centre_rate()).exp_m1();
    // ext[t][u] = P[U = u | t leaves occupied from v_1]
    let ext: Vec<Vec<f64>> = (0..=boxes)
        .map(|t| {
            let mut row = vec![0.0; boxes + 1];
            for (extra, p) in binomial_row(boxes - t, hit).into_iter().enumerate() {
                row[t + extra] = p;
            }
            row
        })
        .collect();
    let occupancy = OccupancyTable::new(k_max, boxes)?;
    // hit_law[r][u] = P[U = u | r particles from v_1 go to v_2..v_d]
    let hit_law: Vec<Vec<f64>> = (0..=k_max)
        .map(|r| {
            let mut row = vec![0.0; boxes + 1];
            for (t, &pt) in occupancy.row(r).iter().enumerate() {
                if pt == 0.0 {
                    continue;
                }
                for (u, &pu) in ext[t].iter().enumerate() {
                    row[u] += pt * pu;
                }
            }
            row
        })
        .collect();

    // joint[u][j] = P[U = u, J = j]
    let mut joint = vec![vec![0.0; k_max + 1]; boxes + 1];
    let step = 1.0 / d as f64;
    for (k, &w) in pi.masses().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (j, bj) in binomial_row(k, step).into_iter().enumerate() {
            let weight = w * bj;
            if weight == 0.0 {
                continue;
            }
            for (u, &pu) in hit_law[k - j].iter().enumerate() {
                joint[u][j] += weight * pu;
            }
        }
    }

    // second-wave batch law and its convolution powers
    let batch = thin(pi, step)?;
    let mut power = Pmf::point_mass(0);
    let mut body = vec![0.0; 1];
    for (u, row) in joint.iter().enumerate() {
        if u > 0 {
            power = convolve(&power, &batch);
        }
        let len = row.len() + power.masses().len() - 1;
        if body.len() < len {
            body.resize(len, 0.0);
        }
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (s, &b) in power.masses().iter().enumerate() {
                body[j + s] += a * b;
            }
        }
    }

    let centre = poisson_pmf(params.centre_rate(), params.tol)?;
    let first_and_second = Pmf::from_parts(body, 0.0, params.tol);
    let combined = convolve(&first_and_second, &centre);
    let masses = combined.masses().to_vec();
    let represented: f64 = masses.iter().sum();
    let tail = (1.0 - represented).max(0.0);
    let mut out = Pmf::from_parts(masses, tail, params.tol);
    out.truncate_to(tail + params.tol);
    if out.masses().len() > SUPPORT_CAP {
        return Err(Error::SupportCapExceeded {
            iteration,
            support: out.masses().len(),
            cap: SUPPORT_CAP,
        });
    }
    Ok(out)
}

/// `nu_1, .., nu_n` with `nu_0 = δ_0` and `nu_k = A nu_{k-1}`.
pub fn iterate(params: &StarParams, n: usize) -> Result<Vec<Pmf>> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let mut out: Vec<Pmf> = Vec::with_capacity(n);
    let mut current = Pmf::point_mass(0);
    for k in 1..=n {
        current = apply_at(&current, params, k)?;
        out.push(current.clone());
    }
    Ok(out)
}

/// Checks `Poi(k epsilon) ⪯ nu_k` for `k = 1..=n`.
pub fn verify_bootstrap(params: &StarParams, epsilon: f64, n: usize) -> Result<Vec<DominanceVerdict>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    let iterates = iterate(params, n)?;
    iterates
        .iter()
        .enumerate()
        .map(|(i, nu)| {
            let lower = poisson_pmf((i + 1) as f64 * epsilon, params.tol)?;
            Ok(dominates(&lower, nu))
        })
        .collect()
}

/// Given `p1 ⪯ p2`, whether `A p1 ⪯ A p2` is certified.
pub fn verify_monotonicity(p1: &Pmf, p2: &Pmf, params: &StarParams) -> Result<bool> {
    match dominates(p1, p2) {
        DominanceVerdict::Dominates => {}
        other => {
            return Err(Error::Precondition(format!(
                "inputs are not certified as ordered: {other:?}"
            )))
        }
    }
    let a1 = apply_general(p1, params)?;
    let a2 = apply_general(p2, params)?;
    Ok(dominates(&a1, &a2).is_dominates())
}
