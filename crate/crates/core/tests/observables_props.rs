use std::sync::Arc;

use proptest::prelude::*;
use rfs_core::eig::{ground_state, SolverOptions};
use rfs_core::hilbert::{apply_total_lowering, enumerate_sector, HalfInt, StateVector};
use rfs_core::linalg::jacobi_eigen;
use rfs_core::models::{ground_basis, ModelSpec};
use rfs_core::observables::{
    correlator_zz, correlators_from_energy, mixed_rdm_from_correlator, multiplet_weights, scalar_correlator,
    spin_half_rdm_from_correlator, su2_average, su2_structure_check, two_site_rdm, TwoSiteDensityMatrix,
};
use rfs_core::Spin;

fn dimer_ground(n: usize, alpha: f64) -> (Arc<rfs_core::hilbert::SectorBasis>, StateVector) {
    let spec = ModelSpec::dimer(n, alpha);
    (ground_basis(&spec).unwrap(), ground_state(&spec, &SolverOptions::default()).unwrap().vector)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spin_half_pair_matrices_follow_from_one_correlator(half in 2usize..=5, alpha in 0.05f64..2.0) {
        let (b, v) = dimer_ground(2 * half, alpha);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let rdm = two_site_rdm(&v, &b, i, j).unwrap();
            prop_assert!((rdm.trace() - 1.0).abs() < 1e-12);
            prop_assert!(su2_structure_check(&rdm).unwrap() < 1e-10);
            let c = correlator_zz(&v, &b, i, j).unwrap();
            prop_assert!(c > -1.0 && c < 1.0 / 3.0);
            prop_assert!((&rdm.matrix - spin_half_rdm_from_correlator(c)).amax() < 1e-10);
            prop_assert!((scalar_correlator(&v, &b, i, j).unwrap() - 0.75 * c).abs() < 1e-10);
            prop_assert!(rdm.eigenvalues.iter().all(|&l| l > -1e-12));
        }
    }

    #[test]
    fn correlators_obey_feynman_hellmann(half in 2usize..=5, alpha in 0.1f64..1.8) {
        let spec = ModelSpec::dimer(2 * half, alpha);
        let d = rfs_core::eig::energy_derivatives_fd(&spec, alpha, 1e-4, &SolverOptions::default()).unwrap();
        let b = ground_basis(&spec).unwrap();
        let (c12, c23) = correlators_from_energy(d.e0, d.de0, alpha);
        prop_assert!((c12 - correlator_zz(&d.center.vector, &b, 0, 1).unwrap()).abs() < 1e-6);
        prop_assert!((c23 - correlator_zz(&d.center.vector, &b, 1, 2).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn dimer_pair_matrices_are_invariant_under_two_site_translation() {
    let (b, v) = dimer_ground(10, 0.6);
    for k in [2, 4, 6, 8] {
        let a = two_site_rdm(&v, &b, 0, 1).unwrap();
        let t = two_site_rdm(&v, &b, k, (k + 1) % 10).unwrap();
        assert!((a.matrix - t.matrix).amax() < 1e-11);
        let a = two_site_rdm(&v, &b, 1, 2).unwrap();
        let t = two_site_rdm(&v, &b, k + 1, (k + 2) % 10).unwrap();
        assert!((a.matrix - t.matrix).amax() < 1e-11);
    }
}

#[test]
fn spin_one_chain_pairs_are_translation_invariant() {
    let spec = ModelSpec::bilinear_biquadratic(6, -0.3);
    let b = ground_basis(&spec).unwrap();
    let v = ground_state(&spec, &SolverOptions::default()).unwrap().vector;
    let base = two_site_rdm(&v, &b, 0, 1).unwrap();
    for k in 1..6 {
        let t = two_site_rdm(&v, &b, k, (k + 1) % 6).unwrap();
        assert!((&base.matrix - &t.matrix).amax() < 1e-10);
    }
    let w: f64 = multiplet_weights(&base).iter().map(|x| x.1).sum();
    assert!((w - 1.0).abs() < 1e-12);
}

/// Pair matrix averaged over every member of the ground multiplet, each
/// member produced by repeated lowering of the top-weight state.
fn explicit_multiplet_average(spec: &ModelSpec, i: usize, j: usize) -> TwoSiteDensityMatrix {
    let sites = spec.site_spec().unwrap();
    let mut basis = ground_basis(spec).unwrap();
    let mut v = ground_state(spec, &SolverOptions::dense()).unwrap().vector;
    let top = basis.total_sz().twice();
    let mut sum = two_site_rdm(&v, &basis, i, j).unwrap().matrix;
    let mut members = 1.0;
    for twice in (1..=top).map(|k| top - 2 * k) {
        let lower = Arc::new(enumerate_sector(&sites, HalfInt::from_twice(twice)).unwrap());
        v = apply_total_lowering(&v, &basis, &lower).unwrap().normalized();
        basis = lower;
        sum += two_site_rdm(&v, &basis, i, j).unwrap().matrix;
        members += 1.0;
    }
    assert_eq!(members as i64, top + 1);
    let first = two_site_rdm(&ground_state(spec, &SolverOptions::dense()).unwrap().vector, &ground_basis(spec).unwrap(), i, j).unwrap();
    TwoSiteDensityMatrix::from_matrix(sum / members, first.sites, first.spins).unwrap()
}

#[test]
fn su2_average_equals_explicit_multiplet_average() {
    for (spin, alpha) in [(Spin::ONE, 0.6), (Spin::ONE, 1.4), (Spin::from_twice(3).unwrap(), 1.0)] {
        let spec = ModelSpec::mixed(2, spin, alpha);
        let b = ground_basis(&spec).unwrap();
        let v = ground_state(&spec, &SolverOptions::dense()).unwrap().vector;
        for (i, j) in [(0, 1), (1, 2)] {
            let explicit = explicit_multiplet_average(&spec, i, j);
            let top = two_site_rdm(&v, &b, i, j).unwrap();
            let avg = su2_average(&top).unwrap();
            assert!((&avg.matrix - &explicit.matrix).amax() < 1e-10, "spin {spin} alpha {alpha} pair ({i},{j})");
            let x = scalar_correlator(&v, &b, i, j).unwrap();
            if avg.spins.0 == Spin::HALF {
                assert!((mixed_rdm_from_correlator(x, spin) - &avg.matrix).amax() < 1e-10, "pair ({i},{j})");
            }
            let eig = jacobi_eigen(&avg.matrix, 1e-14);
            assert!(eig.values.iter().all(|&l| l > -1e-12));
        }
    }
}

#[test]
fn rdm_rejects_bad_indices() {
    let (b, v) = dimer_ground(4, 0.5);
    assert!(two_site_rdm(&v, &b, 0, 0).is_err());
    assert!(two_site_rdm(&v, &b, 0, 4).is_err());
    assert!(two_site_rdm(&StateVector::zeros(3), &b, 0, 1).is_err());
}
