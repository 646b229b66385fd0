use maxvar::experiments::optimality_experiment;
use maxvar::numeric::logspace;

#[test]
fn one_dimensional_rate_is_flat() {
    let rep = optimality_experiment(1, 4096, &logspace(1e-3, 0.3, 25)).unwrap();
    let fit = rep.rate.fit.as_ref().unwrap();
    assert!(fit.slope.abs() <= 0.1, "{fit:?}");
    assert!(rep.passes());
}

// 128³ runs through the CLI; 64³ keeps the test suite short
#[test]
fn three_dimensional_rate_at_64() {
    let rep = optimality_experiment(3, 64, &logspace(1e-3, 0.3, 25)).unwrap();
    let fit = rep.rate.fit.as_ref().unwrap();
    assert!((fit.slope + 2.0 / 3.0).abs() <= 0.15, "{fit:?}");
    assert!(rep.radii_ok, "{:?}", rep.radius_checks);
}
