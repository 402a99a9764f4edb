use amap_core::montecarlo::targets::{ks_critical, max_second_moment};
use amap_core::montecarlo::{
    chain_convergence, verify_disintegration, verify_exchangeability, verify_jump_square, verify_shifted_excursion,
    EstimatorReport, SuiteRegistry, VerifyConfig,
};

fn cfg(reps: usize, grid: usize, seed: u64) -> VerifyConfig {
    VerifyConfig {
        reps,
        grid,
        seed,
        inner: 16,
    }
}

fn assert_within(reports: &[EstimatorReport], bound: f64) {
    for r in reports {
        let z = r.z_score.expect("target present");
        assert!(z.abs() < bound, "{}: {} ± {} vs {:?} (z = {z})", r.name, r.estimate, r.stderr, r.target);
    }
}

#[test]
fn shifted_excursion_closed_forms() {
    let out = verify_shifted_excursion(&cfg(4000, 4096, 3)).unwrap();
    assert_eq!(out.len(), 7);
    assert_within(&out, 3.0);
}

#[test]
fn disintegration_both_forms() {
    let out = verify_disintegration(&cfg(4000, 4096, 4), 0.2).unwrap();
    assert_eq!(out.len(), 3);
    assert_within(&out, 3.0);
    assert!(out.iter().all(|r| r.cutoff == Some(0.2)));
}

#[test]
fn jump_square_is_below_its_bound() {
    let out = verify_jump_square(&cfg(3000, 2048, 5)).unwrap();
    let r = &out[0];
    assert!(r.estimate.is_finite() && r.stderr > 0.0);
    assert!(r.estimate + 3.0 * r.stderr < r.target.unwrap());
    // the radius term alone already accounts for most of the bound
    assert!(r.estimate > 8.0 * max_second_moment() * 0.8);
}

#[test]
fn exchangeability_of_relocation_pairs() {
    let out = verify_exchangeability(&cfg(4000, 2048, 6), 0.05).unwrap();
    assert_within(&out, 3.0);
}

#[test]
fn convergence_improves_with_n() {
    let small = chain_convergence(100, 2000, 7).unwrap();
    let large = chain_convergence(3000, 2000, 7).unwrap();
    let crit = ks_critical(2000, 0.001);
    assert_eq!(small[1].name, "convergence-ks-excursion");
    assert!(large[1].estimate < small[1].estimate);
    assert!(large[1].estimate < crit);
    // the twice-reflected-bridge law is far off at every n
    assert!(large[0].estimate > 0.3);
    assert!(large[2].z_score.unwrap().abs() < 3.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let c = cfg(1000, 512, 8);
    let a = verify_shifted_excursion(&c).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| verify_shifted_excursion(&c).unwrap());
    assert_eq!(a, b);
}

#[test]
fn registry_runs_by_name() {
    let reg = SuiteRegistry::with_builtins();
    let out = reg.get("disintegration").unwrap().run(&cfg(1000, 256, 9)).unwrap();
    assert_eq!(out[0].name, "disintegration");
    assert!(reg.get("missing").is_err());
    let row = out[0].csv_row();
    assert_eq!(row.split(',').count(), EstimatorReport::CSV_HEADER.split(',').count());
}
