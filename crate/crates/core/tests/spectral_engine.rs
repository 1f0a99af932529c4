use fourier_ratio::spectral::{fourier_ratio, parseval_x2};
use fourier_ratio::{AtomicMeasure64, Complex64, GridPolicy64, Mollifier64};
use proptest::prelude::*;

/// `X_2²` of a gaussian-mollified atomic measure in closed form:
/// `Σ_ij w_i w̄_j (2R²)^{-d/2} R^{d}·R^{-d} exp(-π R² |x_i − x_j|² / 2)`.
fn two_atom_x2(d: usize, r: f64, x: &[f64], w: [Complex64; 2]) -> f64 {
    let dist2: f64 = (0..d).map(|a| (x[a] - x[d + a]).powi(2)).sum();
    let c = (r * r / 2.0).powf(d as f64 / 2.0) / r.powi(d as i32);
    let cross = (w[0] * w[1].conj()).re * (-std::f64::consts::PI * r * r * dist2 / 2.0).exp();
    (c * (w[0].norm_sqr() + w[1].norm_sqr() + 2.0 * cross)).sqrt()
}

#[test]
fn two_atom_x2_matches_closed_form() {
    for d in 1..=2 {
        let x: Vec<f64> = (0..2 * d).map(|k| 0.1 + 0.07 * k as f64).collect();
        let w = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.8)];
        let m = AtomicMeasure64::new(d, x.clone(), w.to_vec(), "pair").unwrap();
        for r in [4.0, 16.0] {
            let rep = fourier_ratio(&m, r, &Mollifier64::gaussian(d), &GridPolicy64::default()).unwrap();
            let want = two_atom_x2(d, r, &x, w);
            assert!((rep.x2 - want).abs() / want < 1e-8, "d={d} R={r}: {} vs {want}", rep.x2);
            assert!((parseval_x2(&m, r) - want).abs() / want < 1e-12);
        }
    }
}

#[test]
fn point_mass_is_extremal_in_every_dimension() {
    for d in 1..=3 {
        let m = AtomicMeasure64::point_mass(d).unwrap();
        let policy = GridPolicy64 {
            oversample: 2.0,
            ..GridPolicy64::default()
        };
        let rep = fourier_ratio(&m, 8.0, &Mollifier64::gaussian(d), &policy).unwrap();
        assert!((rep.fr - 1.0).abs() < 1e-6, "d={d}: {}", rep.fr);
        // ‖ψ̂‖₁/‖ψ‖₂ = 2^{d/4} for the gaussian
        assert!((rep.fr_raw - 2f64.powf(d as f64 / 4.0)).abs() < 1e-5);
    }
}

#[test]
fn separated_combs_flatten_with_more_teeth() {
    // |ĝ| is a Dirichlet kernel: L¹/L² decays like log n / √n
    let fr = |n: usize| {
        let pts: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
        let m = AtomicMeasure64::from_real(1, pts, vec![1.0; n], "comb").unwrap();
        fourier_ratio(&m, 256.0, &Mollifier64::gaussian(1), &GridPolicy64::default())
            .unwrap()
            .fr
    };
    let (f4, f16) = (fr(4), fr(16));
    assert!(f16 < f4 && f4 < 1.0, "{f4} {f16}");
    assert!(f16 >= 1.0 / 4.0, "{f16}");
}

fn small_measure() -> impl Strategy<Value = AtomicMeasure64> {
    (1usize..=2, 1usize..=12).prop_flat_map(|(d, n)| {
        (
            Just(d),
            prop::collection::vec(0.0f64..1.0, d * n),
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
        )
            .prop_filter_map("nonzero", |(d, x, w)| {
                let w: Vec<Complex64> = w.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                if w.iter().all(|v| v.norm() < 1e-3) {
                    return None;
                }
                AtomicMeasure64::new(d, x, w, "p").ok()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cauchy_schwarz_and_weight_invariance(m in small_measure(), phase in 0.0f64..6.28, scale in 0.1f64..10.0) {
        let d = m.dim();
        let moll = Mollifier64::gaussian(d);
        let policy = GridPolicy64::default();
        let rep = fourier_ratio(&m, 8.0, &moll, &policy).unwrap();
        // X_1 ≤ |window|^{1/2} X_2 with window [-4R, 4R]^d
        prop_assert!(rep.x1 <= 8f64.powf(d as f64 / 2.0) * rep.x2 * (1.0 + 1e-9));
        prop_assert!(rep.quadrature_error_estimate.unwrap() < 1e-6);

        let c = Complex64::from_polar(scale, phase);
        let w: Vec<Complex64> = m.weights().iter().map(|v| v * c).collect();
        let m2 = AtomicMeasure64::new(d, m.points().to_vec(), w, "scaled").unwrap();
        let rep2 = fourier_ratio(&m2, 8.0, &moll, &policy).unwrap();
        prop_assert!((rep2.fr - rep.fr).abs() < 1e-9);
    }
}
