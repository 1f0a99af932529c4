use fourier_ratio::spectral::analyze;
use fourier_ratio::trig::{
    approx_error, build_distribution, degree_for_l2, sample_polynomial, Norm,
};
use fourier_ratio::{AtomicMeasure64, GridPolicy64, Mollifier64, SpatialDomain64};

fn setup() -> (AtomicMeasure64, fourier_ratio::RatioReport64, fourier_ratio::SpectralField64) {
    let m = AtomicMeasure64::from_real(2, vec![0.2, 0.3, 0.6, 0.5], vec![1.0, 0.5], "pair").unwrap();
    let policy = GridPolicy64 {
        oversample: 2.0,
        ..GridPolicy64::default()
    };
    let (rep, field) = analyze(&m, 8.0, &Mollifier64::gaussian(2), &policy).unwrap();
    (m, rep, field)
}

#[test]
fn l2_error_decays_like_inverse_square_root_of_degree() {
    let (m, _, field) = setup();
    let grid = field.grid().unwrap().clone();
    let domain = SpatialDomain64::neighborhood(&m, 8.0, 2, 1.0 / (8.0 * grid.half_extent()), Some(&grid)).unwrap();
    let g = domain.evaluate_measure(&m, &field.mollifier);
    let dist = build_distribution(&field).unwrap();
    let mean_err = |k: usize| -> f64 {
        (0..8u64)
            .map(|s| {
                let p = sample_polynomial(&dist, k, s).unwrap();
                approx_error(&g, &p, Norm::L2, &domain).unwrap().relative
            })
            .sum::<f64>()
            / 8.0
    };
    let (e1, e2) = (mean_err(64), mean_err(4096));
    // 64× more terms: error ratio near 8
    assert!(e1 / e2 > 5.0 && e1 / e2 < 12.0, "{e1} {e2}");
}

#[test]
fn prescribed_l2_degree_meets_eta_on_average() {
    let (m, rep, field) = setup();
    let eta = 0.5;
    let k = degree_for_l2(&rep, eta).unwrap();
    let grid = field.grid().unwrap().clone();
    let domain = SpatialDomain64::neighborhood(&m, 8.0, 2, 1.0 / (8.0 * grid.half_extent()), Some(&grid)).unwrap();
    let g = domain.evaluate_measure(&m, &field.mollifier);
    let dist = build_distribution(&field).unwrap();
    let mean: f64 = (0..10u64)
        .map(|s| approx_error(&g, &sample_polynomial(&dist, k, s).unwrap(), Norm::L2, &domain).unwrap().relative)
        .sum::<f64>()
        / 10.0;
    assert!(mean <= eta, "{mean} at k = {k}");
}
