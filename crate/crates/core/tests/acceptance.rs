//! Acceptance suite: one test per criterion, each printing its
//! pass/fail line (visible with --nocapture). The same checks back the
//! CLI `selftest` subcommand.

use dirac_scatter::selftest::*;

fn threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn assert_criterion(r: CriterionResult) {
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_special_functions() {
    assert_criterion(criterion_1_specfun());
}

#[test]
fn criterion_02_pure_coulomb_structure() {
    assert_criterion(criterion_2_coulomb());
}

#[test]
fn criterion_03_perturbed_solutions() {
    assert_criterion(criterion_3_perturbed());
}

#[test]
fn criterion_04_scattering_structure() {
    assert_criterion(criterion_4_scattering());
}

#[test]
fn criterion_05_spectral_transforms() {
    assert_criterion(criterion_5_spectral());
}

#[test]
fn criterion_06_distributional_oracle() {
    assert_criterion(criterion_6_distributional());
}

#[test]
fn criterion_07_dynamical_limits() {
    assert_criterion(criterion_7_dynamics());
}

#[test]
fn criterion_08_ergodic_equality() {
    assert_criterion(criterion_8_ergodic(threads()));
}

#[test]
fn criterion_09_classical_case() {
    assert_criterion(criterion_9_classical(threads()));
}

#[test]
fn criterion_10_deviation_factors() {
    assert_criterion(criterion_10_deviation());
}
