//! The discrete suite on `Z_N` and the L² concentration counterexample.

use fourier_ratio::discrete::{
    dft, discrete_fr, discrete_uncertainty_check, generic_draw, holder_interpolation_check,
    random_sign_signal, random_signal, sample_generic, subgroup, top_mass_set, TalagrandBand,
};
use fourier_ratio::geometry::l2_counterexample;
use fourier_ratio::DiscreteSignal64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scan::{Band, ScanResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscreteParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub seeds: usize,
    pub band: TalagrandBand,
    /// `(p, q)`: the subgroup of order `p` in `Z_{pq}`.
    pub subgroups: Vec<[usize; 2]>,
    pub random_signals: usize,
    pub exact_tol: f64,
    /// Fraction of generic draws whose ratio must clear the threshold.
    pub min_band_fraction: f64,
    pub holder_q: f64,
}

impl Default for DiscreteParams {
    fn default() -> Self {
        Self {
            n: 4096,
            seeds: 200,
            band: TalagrandBand::default(),
            subgroups: vec![[3, 5], [5, 7], [7, 11]],
            random_signals: 400,
            exact_tol: 1e-10,
            min_band_fraction: 0.95,
            holder_q: 4.0,
        }
    }
}

/// Closed-form extremes: subgroup indicators give `p^{-1/2}`, constants give `N^{-1/2}`.
pub fn exactness_table(subgroups: &[[usize; 2]], tol: f64) -> Result<ScanResult> {
    let mut scan = ScanResult::new(
        "discrete_exact",
        &["N", "p", "q", "FR_subgroup", "expected_subgroup", "FR_constant", "expected_constant", "uncertainty_ok"],
    );
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for &[p, q] in subgroups {
        let n = p * q;
        let h = subgroup(p, q);
        let sig = DiscreteSignal64::indicator(n, &h)?;
        let fr = discrete_fr(&sig)?;
        let ones = DiscreteSignal64::from_real(&vec![1.0; n])?;
        let fr1 = discrete_fr(&ones)?;
        let (e1, e2) = (1.0 / (p as f64).sqrt(), 1.0 / (n as f64).sqrt());
        worst = worst.max((fr - e1).abs()).max((fr1 - e2).abs());
        // the annihilator {0, p, 2p, …} carries all of the spectrum
        let spec: Vec<usize> = (0..q).map(|j| j * p).collect();
        let u = discrete_uncertainty_check(&sig, &h, &spec)?;
        all_ok &= u.sandwich_ok && u.product_ok;
        scan.push(vec![n as f64, p as f64, q as f64, fr, e1, fr1, e2, if u.sandwich_ok && u.product_ok { 1.0 } else { 0.0 }]);
    }
    scan.check("max_abs_error", worst, Band::at_most(tol));
    scan.check("uncertainty_equalities", if all_ok { 1.0 } else { 0.0 }, Band::at_least(1.0));
    Ok(scan)
}

/// Random complex signals on random lengths: `FR ∈ [N^{-1/2}, 1]` and the
/// Hölder interpolation bound.
pub fn random_bounds_table(count: usize, q: f64, seed: u64) -> Result<ScanResult> {
    let mut scan = ScanResult::new("discrete_random", &["index", "N", "FR", "lower", "holder_ok"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_range = 0usize;
    let mut holder = 0usize;
    for i in 0..count {
        let n = rng.random_range(2..=1024usize);
        let sig = random_signal::<f64>(n, seed.wrapping_add(i as u64))?;
        let fr = discrete_fr(&sig)?;
        let lower = 1.0 / (n as f64).sqrt();
        let ok = fr >= lower * (1.0 - 1e-12) && fr <= 1.0 + 1e-12;
        in_range += ok as usize;
        let h = holder_interpolation_check(&sig, q)?;
        holder += h.holds as usize;
        scan.push(vec![(i + 1) as f64, n as f64, fr, lower, if h.holds { 1.0 } else { 0.0 }]);
    }
    let c = count.max(1) as f64;
    scan.check("fraction_in_range", in_range as f64 / c, Band::at_least(1.0));
    scan.check("fraction_holder", holder as f64 / c, Band::at_least(1.0));
    Ok(scan)
}

pub fn run_discrete_suite(p: &DiscreteParams, seed: u64) -> Result<Vec<ScanResult>> {
    if p.seeds == 0 || p.n < 16 {
        return Err(Error::Config("discrete_suite needs N ≥ 16 and at least one seed".into()));
    }
    let exact = exactness_table(&p.subgroups, p.exact_tol)?;
    let random = random_bounds_table(p.random_signals, p.holder_q, seed)?;

    let prob = p.band.inclusion_probability(p.n);
    let mut generic = ScanResult::new(
        "discrete_generic",
        &["seed", "|M|", "FR", "lower_bound", "talagrand_band_ok", "uncertainty_ok"],
    );
    let (mut band_ok, mut lower_ok, mut unc_ok, mut drawn) = (0usize, 0usize, 0usize, 0usize);
    for s in 0..p.seeds as u64 {
        let draw_seed = seed.wrapping_add(s);
        let g = generic_draw(p.n, prob, draw_seed, &p.band)?;
        let mut unc = f64::NAN;
        if g.support_size > 0 {
            drawn += 1;
            band_ok += g.band_ok as usize;
            lower_ok += (g.fr >= g.lower_bound * (1.0 - 1e-12)) as usize;
            // same signal as the draw: E = support, S = 90% of the spectral L¹ mass
            let support = sample_generic(p.n, prob, draw_seed)?;
            let sig = random_sign_signal::<f64>(p.n, &support, draw_seed ^ 0x9e37_79b9_7f4a_7c15)?;
            let w: Vec<f64> = dft(&sig).values().iter().map(|v| v.norm()).collect();
            let spec = top_mass_set(&w, 0.9);
            let u = discrete_uncertainty_check(&sig, &support, &spec)?;
            let ok = u.sandwich_ok && u.product_ok;
            unc_ok += ok as usize;
            unc = if ok { 1.0 } else { 0.0 };
        }
        generic.push(vec![
            draw_seed as f64,
            g.support_size as f64,
            g.fr,
            g.lower_bound,
            if g.band_ok { 1.0 } else { 0.0 },
            unc,
        ]);
    }
    let d = drawn.max(1) as f64;
    generic.check("talagrand_band_fraction", band_ok as f64 / d, Band::at_least(p.min_band_fraction));
    generic.check("lower_bound_fraction", lower_ok as f64 / d, Band::at_least(1.0));
    generic.check("uncertainty_fraction", unc_ok as f64 / d, Band::at_least(1.0));
    Ok(vec![exact, random, generic])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct L2Params {
    /// `(C, L)` pairs.
    pub cases: Vec<[f64; 2]>,
    pub dim: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub tol: f64,
}

impl Default for L2Params {
    fn default() -> Self {
        Self {
            cases: vec![[1.0, 3.0], [10.0, 41.0]],
            dim: 2,
            r: 64.0,
            tol: 1e-10,
        }
    }
}

fn ball_volume(d: usize) -> f64 {
    // π^{d/2} / Γ(d/2 + 1) by the two-step recursion from V₀ = 1, V₁ = 2
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 0 } else { 1 };
    while k < d {
        k += 2;
        v *= 2.0 * std::f64::consts::PI / k as f64;
    }
    v
}

/// Recomputes the profile from its defining formulas and reports the
/// largest relative disagreement with the library.
pub fn run_l2_counterexample(p: &L2Params) -> Result<ScanResult> {
    if p.cases.is_empty() {
        return Err(Error::Config("l2_counterexample needs at least one case".into()));
    }
    let mut scan = ScanResult::new(
        "l2_counterexample",
        &["C", "L", "b", "alpha", "beta", "r", "l1_over_l2", "fr_h", "bound", "violated", "closed_form_err"],
    );
    let mut worst: f64 = 0.0;
    let mut all_violated = true;
    for &[c, l] in &p.cases {
        let ex = l2_counterexample(p.dim, p.r, l, c)?;
        let d = p.dim as i32;
        let b: f64 = 0.5;
        let a_vol = ball_volume(p.dim) * p.r.powi(d);
        let b_vol = a_vol * (l.powi(d) - 1.0);
        let r = (l.powi(d) - 1.0).sqrt();
        let lead = (1.0 - b * b).sqrt() + b * r;
        let norm = (a_vol / p.r.powi(d)).sqrt();
        // ‖h‖₂ = 1 by construction, so ‖h‖₁/‖h‖₂ = |A|^{1/2}(√(1−b²) + b r)
        let expected = [
            (ex.alpha, (1.0 - b * b).sqrt() / a_vol.sqrt()),
            (ex.beta, b / b_vol.sqrt()),
            (ex.r, r),
            (ex.inner_volume, a_vol),
            (ex.l1_over_l2, a_vol.sqrt() * lead),
            (ex.fr_h, norm * lead),
            (ex.bound, c / (1.0 - b) * norm),
        ];
        let err = expected
            .iter()
            .map(|(got, want)| (got - want).abs() / want.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        worst = worst.max(err);
        all_violated &= ex.violated;
        scan.push(vec![
            c,
            l,
            ex.b,
            ex.alpha,
            ex.beta,
            ex.r,
            ex.l1_over_l2,
            ex.fr_h,
            ex.bound,
            if ex.violated { 1.0 } else { 0.0 },
            err,
        ]);
    }
    scan.check("closed_form_rel_err", worst, Band::at_most(p.tol));
    scan.check("all_violated", if all_violated { 1.0 } else { 0.0 }, Band::at_least(1.0));
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        let pi = std::f64::consts::PI;
        assert_eq!(ball_volume(1), 2.0);
        assert!((ball_volume(2) - pi).abs() < 1e-15);
        assert!((ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-14);
    }

    #[test]
    fn exactness_on_small_groups() {
        let t = exactness_table(&[[3, 5], [5, 7]], 1e-10).unwrap();
        assert!(t.pass, "{:?}", t.checks);
    }

    #[test]
    fn counterexample_defaults_pass() {
        let t = run_l2_counterexample(&L2Params::default()).unwrap();
        assert!(t.pass, "{:?}", t.checks);
    }

    #[test]
    fn small_discrete_suite() {
        let p = DiscreteParams {
            n: 1024,
            seeds: 10,
            random_signals: 20,
            ..DiscreteParams::default()
        };
        let out = run_discrete_suite(&p, 7).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|s| s.pass), "{:?}", out.iter().map(|s| &s.checks).collect::<Vec<_>>());
    }
}
