//! Acceptance suite: every numbered verification check must pass. Each test
//! prints its one-line report (visible with `--nocapture`, or on failure) and
//! asserts the verdict.
//!
//! Run with `cargo test --test acceptance`.

use beambit::verify;

fn check(id: usize) {
    let r = verify::run_criterion(id);
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn c01_near_optimality() {
    check(1);
}

#[test]
fn c02_submodular_monotone() {
    check(2);
}

#[test]
fn c03_prune_invariance() {
    check(3);
}

#[test]
fn c04_corner_optimality() {
    check(4);
}

#[test]
fn c05_variance_equivalence() {
    check(5);
}

#[test]
fn c06_lazy_equivalence() {
    check(6);
}

#[test]
fn c07_joint_dominates() {
    check(7);
}

#[test]
fn c08_resource_savings() {
    check(8);
}

#[test]
fn c09_quantizer_table() {
    check(9);
}

#[test]
fn c10_reproducibility() {
    check(10);
}
