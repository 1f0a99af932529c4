use fourier_ratio::discrete::{
    dft, dft_direct, discrete_fr, discrete_uncertainty_check, idft, ratio_bounds_check, subgroup,
};
use fourier_ratio::{Complex64, DiscreteSignal64};
use proptest::prelude::*;

#[test]
fn subgroup_indicator_has_closed_form_ratio() {
    for (p, q) in [(2, 3), (3, 5), (5, 7), (7, 11), (11, 13)] {
        let h = subgroup(p, q);
        let sig = DiscreteSignal64::indicator(p * q, &h).unwrap();
        let fr = discrete_fr(&sig).unwrap();
        assert!((fr - 1.0 / (p as f64).sqrt()).abs() < 1e-12, "p={p} q={q}");
        let ann: Vec<usize> = (0..q).map(|j| j * p).collect();
        let u = discrete_uncertainty_check(&sig, &h, &ann).unwrap();
        assert!(u.sandwich_ok && u.product_ok);
        assert!(u.a.abs() < 1e-12 && u.b.abs() < 1e-12);
    }
}

#[test]
fn delta_and_constant_are_the_extremes() {
    let n = 60;
    let delta = DiscreteSignal64::indicator(n, &[7]).unwrap();
    assert!((discrete_fr(&delta).unwrap() - 1.0).abs() < 1e-12);
    let ones = DiscreteSignal64::from_real(&vec![1.0; n]).unwrap();
    assert!((discrete_fr(&ones).unwrap() - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
}

fn signal() -> impl Strategy<Value = DiscreteSignal64> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..200).prop_filter_map("nonzero", |v| {
        let v: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let s = DiscreteSignal64::new(v).ok()?;
        (!s.is_zero()).then_some(s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_unitary_and_matches_direct_sum(s in signal()) {
        let f = dft(&s);
        let g = dft_direct(&s);
        for (a, b) in f.values().iter().zip(g.values()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
        prop_assert!((f.norm_l2() - s.norm_l2()).abs() < 1e-9 * s.norm_l2().max(1.0));
        let back = idft(&f);
        for (a, b) in back.values().iter().zip(s.values()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn ratio_between_support_bound_and_one(s in signal()) {
        let support: Vec<usize> = (0..s.n()).filter(|&k| s.values()[k].norm() > 0.0).collect();
        let rb = ratio_bounds_check(&s, &support).unwrap();
        prop_assert!(rb.holds);
        prop_assert!(rb.fr >= 1.0 / (s.n() as f64).sqrt() - 1e-12);
    }
}
