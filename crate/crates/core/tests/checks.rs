use gwilab::analytic::ModelParams;
use gwilab::error::Error;
use gwilab::verify::*;

fn p(m: f64, a: f64) -> ModelParams {
    ModelParams::new(m, a).unwrap()
}

fn quick() -> CheckOptions {
    CheckOptions {
        replications: 400,
        center_sample: 200_000,
        ..CheckOptions::default()
    }
}

#[test]
fn one_dimensional_target_ignores_offspring_mean() {
    let grid = vec![vec![0.5], vec![1.0], vec![2.0]];
    let a = check_theorem21(&p(0.7, 0.8), 0, 10_000, Some(&grid), 31, &quick()).unwrap();
    let b = check_theorem21(&p(0.0, 0.8), 0, 10_000, Some(&grid), 31, &quick()).unwrap();
    for (x, y) in a.points.iter().zip(&b.points) {
        assert!((x.cf_re - y.cf_re).abs() < 1e-12 && (x.cf_im - y.cf_im).abs() < 1e-12);
    }
    assert!(a.pass, "{}", a.to_text());
    assert!(b.pass, "{}", b.to_text());
}

#[test]
fn zero_frequency_is_exact() {
    let grid = vec![vec![0.0, 0.0]];
    let r = check_corollary28(&p(0.5, 1.5), 1, 1000, AggregationMode::I, Some(&grid), 32, &quick()).unwrap();
    assert_eq!(r.points[0].z, 0.0);
    assert_eq!(r.points[0].discrepancy, 0.0);
}

#[test]
fn centering_regimes_are_enforced() {
    let opts = quick();
    for (params, mode) in [(p(0.5, 1.5), AggregationMode::Ii), (p(0.5, 0.5), AggregationMode::Iii), (p(0.5, 1.0), AggregationMode::Ii)] {
        let e = check_corollary28(&params, 1, 1000, mode, None, 1, &opts).unwrap_err();
        assert!(matches!(e, Error::Centering(_)), "{e}");
    }
}

#[test]
fn mean_centered_aggregate_passes() {
    let r = check_corollary28(&p(0.5, 1.5), 1, 10_000, AggregationMode::Iii, None, 33, &quick()).unwrap();
    assert!(r.pass, "{}", r.to_text());
}

#[test]
fn tail_ratio_at_lag_zero_is_one() {
    let r = check_tail_ratio(&p(0.5, 0.5), 0, 100_000, 0.99, 34, &CheckOptions::default()).unwrap();
    assert_eq!(r.criteria[0].value, 1.0);
    assert!(r.pass);
}

#[test]
fn tail_ratio_without_offspring() {
    let r = check_tail_ratio(&p(0.0, 1.0), 1, 100_000, 0.99, 35, &CheckOptions::default()).unwrap();
    assert_eq!(r.criteria[0].target, 2.0);
    assert!(r.pass, "{}", r.to_text());
}

#[test]
fn too_few_exceedances_is_an_error() {
    let e = check_tail_ratio(&p(0.5, 0.5), 1, 10_000, 0.999, 36, &CheckOptions::default()).unwrap_err();
    assert!(matches!(e, Error::InsufficientExceedances { .. }), "{e}");
}

#[test]
fn forward_coordinates_collapse_without_offspring() {
    let r = check_forward_tail(&p(0.0, 0.8), 2, 200_000, 37, &CheckOptions::default()).unwrap();
    assert!(r.pass, "{}", r.to_text());
    assert!(r.criteria.iter().any(|c| c.name == "collapse_coordinate_1"));
    assert!(r.criteria.iter().any(|c| c.name == "ks_coordinate_0"));
}

#[test]
fn karamata_edge_exponents() {
    let opts = CheckOptions::default();
    let grid = [10.0, 100.0, 1e3, 1e4];
    let flat = check_karamata(&p(0.5, 0.7), 0.0, &grid, &opts).unwrap();
    for (k, v) in &flat.statistics {
        if k.starts_with("ratio_x") {
            assert!((v - 1.0).abs() < 1e-12, "{k} = {v}");
        }
    }
    assert!(flat.pass);
    let zero = check_karamata(&p(0.5, 0.7), 0.7, &grid, &opts).unwrap();
    assert_eq!(zero.criteria[0].name, "decreasing_to_zero");
    assert!(zero.pass);
}

#[test]
fn reports_are_reproducible() {
    let run = || {
        let r = check_theorem21(&p(0.5, 0.5), 1, 5000, None, 38, &quick()).unwrap();
        let mut csv = Vec::new();
        r.write_ecf_csv(&mut csv).unwrap();
        (r.to_json().unwrap(), csv)
    };
    let a = run();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(a, b);
}

#[test]
fn temporal_check_above_one() {
    let r = check_theorem29(&p(0.5, 1.5), 50, &[1.0], None, 39, &quick()).unwrap();
    assert!(r.pass, "{}", r.to_text());
}
