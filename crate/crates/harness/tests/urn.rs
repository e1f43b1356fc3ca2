use faultsort_core::rng::RngBits;
use faultsort_harness::urn::{experiment_urn, simulate_urn, UrnParams};

#[test]
fn desk_scale_urn_has_no_sparse_windows() {
    let res = experiment_urn(1 << 17, 1 << 16, 136, 200, 11).unwrap();
    assert_eq!(res.violations, 0);
    assert!(res.passed());
    assert_eq!(res.bound, 10.0 / 200.0);
}

#[test]
fn all_white_urn_never_violates() {
    let params = UrnParams { balls: 500, white: 500, ell: 2 };
    let mut src = RngBits::new(3);
    assert!((0..100).all(|_| !simulate_urn(params, &mut src)));
}

#[test]
fn preconditions_are_enforced() {
    assert!(experiment_urn(1 << 14, 1 << 13, 112, 10, 0).is_err());
    assert!(UrnParams::checked(1 << 17, 1 << 15, 136).is_err());
    assert_eq!(UrnParams::checked(1 << 17, 1 << 16, 136).unwrap().window(), 54 * 136);
}
