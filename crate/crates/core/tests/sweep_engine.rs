use rfs_core::analytic::n4_rfs;
use rfs_core::eig::SolverOptions;
use rfs_core::models::ALPHA_MIN;
use rfs_core::output::{sweep_json, write_sweep_csv};
use rfs_core::sweep::{
    find_pseudo_critical, linear_grid, run_sweep, scaling_table, stepped_grid, SweepConfig,
};
use rfs_core::{Error, ModelSpec, Route};

fn csv(spec: &ModelSpec, grid: &[f64], cfg: &SweepConfig) -> Vec<u8> {
    let recs = run_sweep(spec, grid, cfg).unwrap();
    let mut out = Vec::new();
    write_sweep_csv(&mut out, &recs, cfg).unwrap();
    out
}

#[test]
fn four_site_sweep_tracks_closed_form() {
    let cfg = SweepConfig { solver: SolverOptions::dense(), ..SweepConfig::with_routes([Route::Energy]) };
    let grid = stepped_grid(0.1, 1.6, 0.02).unwrap();
    let recs = run_sweep(&ModelSpec::dimer(4, 1.0), &grid, &cfg).unwrap();
    for r in &recs {
        let exact = n4_rfs(r.param);
        assert!((r.chi12[&Route::Energy] - exact).abs() / exact < 1e-5, "alpha {}", r.param);
    }
    let peak = find_pseudo_critical(&recs, "chi12_energy").unwrap();
    assert!((peak.param_star - 0.5).abs() < peak.grid_resolution / 10.0);
    assert!((peak.chi_star - 1.0 / 3.0).abs() < 1e-4);
}

#[test]
fn no_routes_means_no_susceptibility_columns() {
    let cfg = SweepConfig::with_routes([]);
    let text = String::from_utf8(csv(&ModelSpec::dimer(6, 1.0), &[0.5, 1.0], &cfg)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "param,e0,de0,d2e0,c12,c23,chi_global,gap,flags");
    assert_eq!(lines.count(), 2);
}

#[test]
fn output_is_reproducible_and_thread_independent() {
    let spec = ModelSpec::dimer(8, 1.0);
    let grid = linear_grid(0.4, 1.4, 11).unwrap();
    let serial = SweepConfig::with_routes([Route::Uhlmann, Route::Energy, Route::Global]);
    let threaded = SweepConfig { threads: 4, ..serial.clone() };
    let a = csv(&spec, &grid, &serial);
    assert_eq!(a, csv(&spec, &grid, &serial));
    assert_eq!(a, csv(&spec, &grid, &threaded));
}

#[test]
fn peaks_drift_towards_uniform_point_with_size() {
    let grid = stepped_grid(0.7, 1.1, 0.02).unwrap();
    let cfg = SweepConfig::with_routes([Route::Energy]);
    let table = scaling_table(&ModelSpec::dimer(6, 1.0), &[6, 12], &grid, &cfg, "chi23_energy").unwrap();
    let (small, large) = (&table.rows[0].peak, &table.rows[1].peak);
    assert!(large.param_star > small.param_star && large.param_star < 1.0);
    assert!(table.param_monotone && table.chi_monotone);

    let single = scaling_table(&ModelSpec::dimer(6, 1.0), &[8], &grid, &cfg, "chi23_energy").unwrap();
    assert_eq!(single.rows.len(), 1);
    assert!(single.param_monotone);
}

#[test]
fn global_and_pair_peaks_coincide_on_twelve_sites() {
    let grid = stepped_grid(0.9, 1.06, 0.02).unwrap();
    let cfg = SweepConfig::with_routes([Route::Energy, Route::Global]);
    let recs = run_sweep(&ModelSpec::dimer(12, 1.0), &grid, &cfg).unwrap();
    let g = find_pseudo_critical(&recs, "chi_global").unwrap();
    let p = find_pseudo_critical(&recs, "chi23_energy").unwrap();
    assert!((g.grid_argmax - p.grid_argmax).abs() <= 0.02 + 1e-12);
}

#[test]
fn grid_points_below_domain_are_clipped() {
    let cfg = SweepConfig::with_routes([Route::Energy]);
    let recs = run_sweep(&ModelSpec::dimer(6, 1.0), &[-0.1, 0.0, 0.2], &cfg).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].param, ALPHA_MIN);
    assert!(recs[0].has_flag("clipped"));
    assert!(!recs[1].has_flag("clipped"));
}

#[test]
fn spin_one_degeneracies_are_flagged() {
    let cfg = SweepConfig::with_routes([Route::Energy]);
    let recs = run_sweep(&ModelSpec::bilinear_biquadratic(8, 0.0), &[-0.3, 0.0, 0.8], &cfg).unwrap();
    assert!(!recs[0].has_flag("near_degenerate") && !recs[1].has_flag("near_degenerate"));
    assert!(recs[2].has_flag("near_degenerate"));
}

#[test]
fn invalid_grids_are_rejected() {
    let cfg = SweepConfig::with_routes([Route::Energy]);
    let spec = ModelSpec::dimer(6, 1.0);
    assert!(matches!(run_sweep(&spec, &[], &cfg), Err(Error::InvalidSweep(_))));
    assert!(matches!(run_sweep(&spec, &[1.0, 0.5], &cfg), Err(Error::InvalidSweep(_))));
    assert!(matches!(run_sweep(&spec, &[0.5, 0.5], &cfg), Err(Error::InvalidSweep(_))));
    assert!(linear_grid(1.0, 1.0, 5).is_err());
    assert!(stepped_grid(0.0, 1.0, 0.0).is_err());
    let recs = run_sweep(&spec, &[0.2, 0.4, 0.6], &cfg).unwrap();
    assert!(matches!(find_pseudo_critical(&recs, "chi12_energy"), Err(Error::NoInteriorPeak { .. })));
}

#[test]
fn json_carries_meta_and_records() {
    let cfg = SweepConfig::with_routes([Route::Energy]);
    let spec = ModelSpec::dimer(6, 1.0);
    let recs = run_sweep(&spec, &[0.5, 1.0], &cfg).unwrap();
    let v = sweep_json(&spec, &cfg, &recs);
    assert_eq!(v["meta"]["routes"], serde_json::json!(["energy"]));
    assert_eq!(v["meta"]["seed"], serde_json::json!(24301));
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    assert!(v["records"][0]["chi12_energy"].as_f64().unwrap() > 0.0);
    assert!(v["records"][0]["chi_global"].is_null());
}
