mod common;

use common::oracles;

#[test]
fn bbs_matches_full_sort() {
    assert_eq!(oracles::bbs_suite(20_000, 1), Ok(20_000));
}

#[test]
fn lmld_matches_brute_force() {
    assert_eq!(oracles::lmld_suite(20_000, 2), Ok(20_000));
}

#[test]
fn slmld_equals_lmld_for_small_nodes() {
    assert_eq!(oracles::slmld_suite(20_000, 3), Ok(20_000));
}

#[test]
fn lazy_copy_matches_eager_copy() {
    assert_eq!(oracles::lazy_eager_suite(5_000, 4), Ok(5_000));
}

#[test]
fn activations_satisfy_metric_invariants() {
    let n = oracles::activation_suite(20_000, 5).unwrap();
    assert!(n >= 20_000);
}
