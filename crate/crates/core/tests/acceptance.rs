//! One test per acceptance criterion. Each prints a single PASS/FAIL line.

use rfs_core::acceptance::run;

fn criterion(id: u8) {
    let outcome = run(id).expect("known criterion");
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_01_four_site_closed_forms() {
    criterion(1);
}

#[test]
fn criterion_02_energy_anchors() {
    criterion(2);
}

#[test]
fn criterion_03_feynman_hellmann() {
    criterion(3);
}

#[test]
fn criterion_04_finite_size_peaks() {
    criterion(4);
}

#[test]
fn criterion_05_route_consistency() {
    criterion(5);
}

#[test]
fn criterion_06_global_dominance() {
    criterion(6);
}

#[test]
fn criterion_07_perturbative_curvature() {
    criterion(7);
}

#[test]
fn criterion_08_thermodynamic_exponent() {
    criterion(8);
}

#[test]
fn criterion_09_su2_structure() {
    criterion(9);
}

#[test]
fn criterion_10_mixed_spin() {
    criterion(10);
}

#[test]
fn criterion_11_bilinear_biquadratic() {
    criterion(11);
}
