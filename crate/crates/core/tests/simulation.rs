use frogtree::operator::{apply_general, StarParams};
use frogtree::sim::{dominance_experiment, run_batch, FrogLaw, SimConfig, Variant};

/// Expected root visits at steps `1..=horizon` of one simple walk, from the
/// depth chain: the root steps down, other depths step up with probability
/// `1/(d+1)`, and depth `cap` absorbs.
fn single_walk_visits(d: usize, horizon: u32, cap: usize) -> f64 {
    let up = 1.0 / (d + 1) as f64;
    let mut p = vec![0.0; cap + 1];
    p[0] = 1.0;
    let mut visits = 0.0;
    for _ in 0..horizon {
        let mut next = vec![0.0; cap + 1];
        next[1] += p[0];
        for k in 1..cap {
            next[k - 1] += up * p[k];
            next[k + 1] += (1.0 - up) * p[k];
        }
        next[cap] += p[cap];
        visits += next[0];
        p = next;
    }
    visits
}

#[test]
fn lone_simple_walk_matches_depth_chain() {
    for &(d, horizon, cap) in &[(2usize, 100u32, 20u32), (3, 60, 15)] {
        let c = SimConfig::new(d, FrogLaw::Fixed { k: 0 }, Variant::Simple, horizon, cap, 40_000, 2);
        let s = run_batch(&c).unwrap();
        let exact = single_walk_visits(d, horizon, cap as usize);
        assert!(
            (s.mean_visits - exact).abs() < 4.0 * s.stderr,
            "d={d}: {} vs {exact}",
            s.mean_visits
        );
        assert!(s.mean_visits < 0.1 * horizon as f64);
    }
}

#[test]
fn mean_visits_nondecreasing_in_mu() {
    let mut last = 0.0;
    for &mu in &[0.1, 0.5, 1.0, 2.0, 5.0] {
        let mut c = SimConfig::new(2, FrogLaw::Poisson { mu }, Variant::Simple, 40, 12, 2000, 4);
        c.prune_unreachable = true;
        let s = run_batch(&c).unwrap();
        assert_eq!(s.truncated_trials, 0);
        assert!(s.mean_visits >= last, "mu={mu}: {} after {last}", s.mean_visits);
        last = s.mean_visits;
    }
}

#[test]
fn stderr_scales_with_root_of_trials() {
    let se = |trials| {
        let c = SimConfig::new(2, FrogLaw::Poisson { mu: 0.3 }, Variant::Simple, 40, 12, trials, 5);
        run_batch(&c).unwrap().stderr
    };
    let (a, b, c) = (se(5000), se(10_000), se(20_000));
    assert!((b / a - 0.5f64.sqrt()).abs() < 0.1, "{a} {b}");
    assert!((c / a - 0.5).abs() < 0.07, "{a} {c}");
}

/// The nonbacktracking root-visit law is a supersolution of the star
/// operator. Within a horizon `T` the subtree copies behind the operator
/// run for fewer steps, so the image of the law at `T - 10` is compared with
/// the law at `T`. Pruning makes the depth cap irrelevant for root visits.
#[test]
fn nonbacktracking_law_is_supersolution() {
    const TRIALS: u64 = 20_000;
    let band = ((2.0f64 / 0.01).ln() / (2.0 * TRIALS as f64)).sqrt();
    for &(d, mu) in &[(2usize, 0.3), (2, 0.6), (3, 0.5), (5, 0.5)] {
        let law = |horizon, seed| {
            let mut c = SimConfig::new(
                d,
                FrogLaw::Poisson { mu },
                Variant::Nonbacktracking,
                horizon,
                40,
                TRIALS,
                seed,
            );
            c.prune_unreachable = true;
            let s = run_batch(&c).unwrap();
            assert_eq!(s.truncated_trials, 0);
            s.visits
        };
        let (short, nu) = (law(30, 6), law(40, 7));
        let image = apply_general(&short, &StarParams::new(d, mu, 1e-12).unwrap()).unwrap();
        let worst = (0..=nu.max_value().max(image.max_value()))
            .map(|x| nu.cdf(x) - image.cdf(x))
            .fold(f64::NEG_INFINITY, f64::max);
        // two independent empirical laws, each within `band` of its own
        assert!(worst < 2.0 * band, "d={d} mu={mu}: {worst} vs {band}");
    }
}

/// The coupling relation at a depth cap small enough to run in seconds.
#[test]
fn coupling_holds_on_shallow_tree() {
    let mut simple = SimConfig::new(2, FrogLaw::Poisson { mu: 2.0 }, Variant::Simple, 100, 8, 5000, 9);
    simple.prune_unreachable = true;
    let mut nb = simple.clone();
    nb.variant = Variant::Nonbacktracking;
    let r = dominance_experiment(&simple, &nb, 0.01).unwrap();
    assert!(r.sound());
    assert!(r.consistent(), "{r:?}");
    assert!(r.reverse_violated(), "{r:?}");
    assert!(r.mean_nb < r.mean_simple);
}

/// With horizon 40 and pruning no frog gets deeper than depth 20, so moving
/// the cap from 20 to 25 only releases the few frogs that touch depth 20.
#[test]
fn depth_cap_bias_within_noise() {
    let run = |cap| {
        let mut c = SimConfig::new(2, FrogLaw::Poisson { mu: 1.0 }, Variant::Simple, 40, cap, 4000, 12);
        c.prune_unreachable = true;
        run_batch(&c).unwrap()
    };
    let (shallow, deep) = (run(20), run(25));
    assert_eq!(deep.mean_absorbed, 0.0);
    assert!(
        (deep.mean_visits - shallow.mean_visits).abs() < deep.stderr,
        "{} vs {}",
        shallow.mean_visits,
        deep.mean_visits
    );
}

#[test]
fn proxy_grows_with_horizon_above_recurrence_threshold() {
    let mut last = 0.0;
    for horizon in [10, 20, 30] {
        let mut c = SimConfig::new(2, FrogLaw::Poisson { mu: 5.0 }, Variant::Simple, horizon, 20, 200, 13);
        c.prune_unreachable = true;
        let s = run_batch(&c).unwrap();
        assert!(
            s.mean_visits > last + 3.0 * s.stderr,
            "T={horizon}: {} after {last}",
            s.mean_visits
        );
        last = s.mean_visits;
    }
}
