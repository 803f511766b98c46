use std::ffi::CStr;
use std::ptr;

use frogtree_ffi::*;

fn poisson(rate: f64) -> *mut FtPmf {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ft_pmf_poisson(rate, 1e-12, &mut p) }, FtStatus::Ok);
    p
}

#[test]
fn pmf_lifecycle() {
    let masses = [0.25, 0.5, 0.25];
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(ft_pmf_new(masses.as_ptr(), 3, 0.0, 1e-12, &mut p), FtStatus::Ok);
        assert_eq!(ft_pmf_len(p), 3);
        assert_eq!(ft_pmf_mass(p, 1), 0.5);
        assert_eq!(ft_pmf_mass(p, 7), 0.0);
        assert_eq!(ft_pmf_tail_mass(p), 0.0);
        assert!((ft_pmf_mean(p) - 1.0).abs() < 1e-15);
        ft_pmf_free(p);
        ft_pmf_free(ptr::null_mut());
    }
}

#[test]
fn bad_pmf_sets_last_error() {
    let masses = [0.7, 0.7];
    let mut p = ptr::null_mut();
    let status = unsafe { ft_pmf_new(masses.as_ptr(), 2, 0.0, 1e-12, &mut p) };
    assert_eq!(status, FtStatus::InvalidPmf);
    assert!(p.is_null());
    let msg = unsafe { CStr::from_ptr(ft_last_error_message()) };
    assert!(!msg.to_str().unwrap().is_empty());
}

#[test]
fn null_pointers_rejected() {
    unsafe {
        assert_eq!(
            ft_pmf_new(ptr::null(), 2, 0.0, 1e-12, &mut ptr::null_mut()),
            FtStatus::NullPointer
        );
        assert_eq!(ft_pmf_poisson(1.0, 1e-12, ptr::null_mut()), FtStatus::NullPointer);
        let mut tv = 0.0;
        assert_eq!(
            ft_pmf_total_variation(ptr::null(), ptr::null(), &mut tv),
            FtStatus::NullPointer
        );
        assert_eq!(ft_pmf_len(ptr::null()), 0);
    }
}

#[test]
fn dominance_and_distance() {
    let (a, b) = (poisson(1.0), poisson(2.0));
    unsafe {
        let mut v = FtDominance {
            kind: FtDominanceKind::Inconclusive,
            witness: 0,
            slack: 0.0,
        };
        assert_eq!(ft_dominates(a, b, &mut v), FtStatus::Ok);
        assert_eq!(v.kind, FtDominanceKind::Dominates);
        assert_eq!(ft_dominates(b, a, &mut v), FtStatus::Ok);
        assert_eq!(v.kind, FtDominanceKind::NotDominates);
        let mut tv = 0.0;
        assert_eq!(ft_pmf_total_variation(a, a, &mut tv), FtStatus::Ok);
        assert!(tv < 1e-15);
        ft_pmf_free(a);
        ft_pmf_free(b);
    }
}

#[test]
fn operator_general_matches_poisson_form() {
    let input = poisson(1.0);
    let (mut general, mut closed) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(ft_operator_apply(input, 2, 6.0, 1e-12, &mut general), FtStatus::Ok);
        assert_eq!(ft_operator_apply_poisson(1.0, 2, 6.0, 1e-12, &mut closed), FtStatus::Ok);
        let mut tv = 1.0;
        assert_eq!(ft_pmf_total_variation(general, closed, &mut tv), FtStatus::Ok);
        assert!(tv < 1e-8, "{tv}");
        ft_pmf_free(input);
        ft_pmf_free(general);
        ft_pmf_free(closed);
    }
}

#[test]
fn certificates() {
    unsafe {
        let (mut eps, mut has) = (0.0, false);
        assert_eq!(ft_epsilon_max(2, 6.0, &mut eps, &mut has), FtStatus::Ok);
        assert!(has);
        assert!((eps - 1.3734766249635543).abs() < 1e-12);
        assert_eq!(ft_epsilon_max(2, 1.0, &mut eps, &mut has), FtStatus::Ok);
        assert!(!has);

        let mut holds = false;
        assert_eq!(
            ft_verify_nbound(2, 6.0, 0.9 * 1.3734766249635543, &mut holds),
            FtStatus::Ok
        );
        assert!(holds);

        let mut value = 0.0;
        assert_eq!(ft_cim_value(2.0, &mut value), FtStatus::Ok);
        assert!((value - 0.75).abs() < 1e-15);
        assert_ne!(ft_cim_value(0.5, &mut value), FtStatus::Ok);

        let mut w = FtWeightParams::default();
        assert_eq!(ft_optimal_theta(5, 0.5, &mut w), FtStatus::Ok);
        assert!((w.m - 0.9128709291752768).abs() < 1e-12);
    }
}

#[test]
fn simulation_round_trip() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(
            ft_sim_config_new(2, 0.0, FtVariant::Nonbacktracking, 50, 20, 100, 1, &mut c),
            FtStatus::Ok
        );
        let mut t = FtTrialResult::default();
        assert_eq!(ft_run_trial(c, 0, &mut t), FtStatus::Ok);
        assert_eq!(t.root_visits, 0);
        assert_eq!(t.truncated_at, 0);

        assert_eq!(ft_sim_config_set_fixed(c, 1), FtStatus::Ok);
        assert_eq!(ft_sim_config_set_prune(c, true), FtStatus::Ok);
        let mut s = FtBatchStats::default();
        let mut visits = ptr::null_mut();
        assert_eq!(ft_run_batch(c, &mut s, &mut visits), FtStatus::Ok);
        assert_eq!(s.trials, 100);
        assert!(!visits.is_null());
        assert!((ft_pmf_mean(visits) - s.mean_visits).abs() < 1e-9);
        ft_pmf_free(visits);

        assert_eq!(ft_sim_config_set_max_frog_steps(c, 3), FtStatus::Ok);
        assert_eq!(ft_run_trial(c, 0, &mut t), FtStatus::Ok);
        assert!(t.truncated_at > 0);
        ft_sim_config_free(c);
    }
}

#[test]
fn invalid_config_rejected() {
    let mut c = ptr::null_mut();
    let status = unsafe { ft_sim_config_new(1, 1.0, FtVariant::Simple, 10, 5, 10, 1, &mut c) };
    assert_eq!(status, FtStatus::InvalidArgument);
    assert!(c.is_null());
}

#[test]
fn cover_time_height_one() {
    let mut s = FtCoverStats::default();
    assert_eq!(unsafe { ft_cover_time(2, 1, 20_000, 4, &mut s) }, FtStatus::Ok);
    assert!((s.mean - 11.0 / 3.0).abs() < 4.0 * s.stderr_time, "{s:?}");
    assert!(s.p10 <= s.p50 && s.p50 <= s.p90);
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(ft_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
