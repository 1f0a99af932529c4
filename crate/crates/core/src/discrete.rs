//! Fourier ratio on the cyclic group `Z_N`.
//!
//! The transform is unitary: `ĥ(m) = N^{-1/2} Σ_x e^{-2πi xm/N} h(x)`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Relative slack used when checking inequalities that may hold with equality.
pub const EQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSignal<T: Scalar> {
    values: Vec<Complex<T>>,
}

impl<T: Scalar> DiscreteSignal<T> {
    pub fn new(values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("N", "modulus must be at least 2"));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|v| Complex::new(*v, T::zero())).collect())
    }

    /// `1_S` on `Z_N`.
    pub fn indicator(n: usize, set: &[usize]) -> Result<Self> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); n];
        for &s in set {
            if s >= n {
                return Err(invalid("set", "residue out of range"));
            }
            v[s] = Complex::new(T::one(), T::zero());
        }
        Self::new(v)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn norm_l2(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == T::zero())
    }
}

fn unitary_fft<T: Scalar>(signal: &DiscreteSignal<T>, inverse: bool) -> DiscreteSignal<T> {
    let n = signal.n();
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = signal.values.clone();
    fft.process(&mut buf);
    let s = T::one() / T::of_usize(n).sqrt();
    buf.iter_mut().for_each(|v| *v = *v * s);
    DiscreteSignal { values: buf }
}

/// Unitary DFT.
pub fn dft<T: Scalar>(signal: &DiscreteSignal<T>) -> DiscreteSignal<T> {
    unitary_fft(signal, false)
}

/// Inverse of [`dft`].
pub fn idft<T: Scalar>(signal: &DiscreteSignal<T>) -> DiscreteSignal<T> {
    unitary_fft(signal, true)
}

/// Unitary DFT by direct `O(N²)` summation.
pub fn dft_direct<T: Scalar>(signal: &DiscreteSignal<T>) -> DiscreteSignal<T> {
    let n = signal.n();
    let s = T::one() / T::of_usize(n).sqrt();
    let values = (0..n)
        .map(|m| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (x, h) in signal.values.iter().enumerate() {
                // reduce xm mod N first so the phase stays accurate
                let k = (x * m) % n;
                let t = -T::TAU() * T::of_usize(k) / T::of_usize(n);
                acc = acc + *h * Complex::new(t.cos(), t.sin());
            }
            acc * s
        })
        .collect();
    DiscreteSignal { values }
}

/// `((1/N)Σ|v|^q)^{1/q}`; `q = ∞` gives the max.
pub fn normalized_mean<T: Scalar>(values: &[Complex<T>], q: f64) -> f64 {
    let n = values.len() as f64;
    if q.is_infinite() {
        return values.iter().map(|v| v.norm().to_f64_lossy()).fold(0.0, f64::max);
    }
    let s: f64 = values.iter().map(|v| v.norm().to_f64_lossy().powf(q)).sum();
    (s / n).powf(1.0 / q)
}

/// `(1/N)Σ|ĥ| / ((1/N)Σ|ĥ|²)^{1/2}`, always in `[N^{-1/2}, 1]`.
pub fn discrete_fr<T: Scalar>(signal: &DiscreteSignal<T>) -> Result<f64> {
    if signal.is_zero() {
        return Err(Error::Degenerate("zero signal".into()));
    }
    let h = dft(signal);
    Ok(normalized_mean(&h.values, 1.0) / normalized_mean(&h.values, 2.0))
}

/// Residues kept independently with probability `p`.
pub fn sample_generic(n: usize, p: f64, seed: u64) -> Result<Vec<usize>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", "must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).filter(|_| rng.random::<f64>() < p).collect())
}

/// Random `±1` values on `support`, zero elsewhere.
pub fn random_sign_signal<T: Scalar>(n: usize, support: &[usize], seed: u64) -> Result<DiscreteSignal<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![Complex::new(T::zero(), T::zero()); n];
    for &s in support {
        let sign = if rng.random::<bool>() { T::one() } else { -T::one() };
        v[s] = Complex::new(sign, T::zero());
    }
    DiscreteSignal::new(v)
}

/// Standard complex Gaussian values at every residue.
pub fn random_signal<T: Scalar>(n: usize, seed: u64) -> Result<DiscreteSignal<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let v = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(normal);
            let im: f64 = rng.sample(normal);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    DiscreteSignal::new(v)
}

/// The subgroup `{0, q, 2q, …}` of order `p` in `Z_{pq}`.
pub fn subgroup(p: usize, q: usize) -> Vec<usize> {
    (0..p).map(|j| j * q).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioBounds {
    pub lower: f64,
    pub fr: f64,
    pub holds: bool,
}

/// `|E|^{-1/2} ≤ FR ≤ 1` for a signal supported in `E`.
pub fn ratio_bounds_check<T: Scalar>(signal: &DiscreteSignal<T>, support: &[usize]) -> Result<RatioBounds> {
    let mut inside = vec![false; signal.n()];
    for &s in support {
        if s >= signal.n() {
            return Err(invalid("support", "residue out of range"));
        }
        inside[s] = true;
    }
    if let Some(x) = (0..signal.n()).find(|x| !inside[*x] && signal.values[*x].norm_sqr() > T::zero()) {
        return Err(Error::SupportViolation(x));
    }
    let e = inside.iter().filter(|b| **b).count();
    let fr = discrete_fr(signal)?;
    let lower = 1.0 / (e as f64).sqrt();
    Ok(RatioBounds {
        lower,
        fr,
        holds: lower <= fr * (1.0 + EQUALITY_SLACK) && fr <= 1.0 + EQUALITY_SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderCheck {
    /// `M_q(ĥ) / M_2(ĥ)` with normalized means.
    pub cq_emp: f64,
    /// `Cq^{q/(q−2)} · M_1(ĥ)`.
    pub implied_l1_bound: f64,
    pub l2_mean: f64,
    pub holds: bool,
}

/// Interpolation: `M_q ≤ C M_2` implies `M_2 ≤ C^{q/(q−2)} M_1`, with the
/// smallest admissible `C`.
pub fn holder_interpolation_check<T: Scalar>(signal: &DiscreteSignal<T>, q: f64) -> Result<HolderCheck> {
    if !(q > 2.0 && q <= 10.0) {
        return Err(invalid("q", "must lie in (2, 10]"));
    }
    if signal.is_zero() {
        return Err(Error::Degenerate("zero signal".into()));
    }
    let h = dft(signal);
    let m1 = normalized_mean(&h.values, 1.0);
    let m2 = normalized_mean(&h.values, 2.0);
    let mq = normalized_mean(&h.values, q);
    let cq = mq / m2;
    let bound = cq.powf(q / (q - 2.0)) * m1;
    Ok(HolderCheck {
        cq_emp: cq,
        implied_l1_bound: bound,
        l2_mean: m2,
        holds: m2 <= bound * (1.0 + 1e-10),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyCheck {
    pub a: f64,
    pub b: f64,
    /// `(1−a)² N/|E|`.
    pub lhs: f64,
    /// `‖ĥ‖₁² / ‖ĥ‖₂²` with counting measure, i.e. `N · FR²`.
    pub fr2: f64,
    /// `|S| / (1−b)²`.
    pub rhs: f64,
    pub sandwich_ok: bool,
    /// `(1−a)²(1−b)² N ≤ |E||S|`.
    pub product_ok: bool,
}

/// Uncertainty sandwich with concentration levels computed from the signal.
pub fn discrete_uncertainty_check<T: Scalar>(
    signal: &DiscreteSignal<T>,
    e: &[usize],
    s: &[usize],
) -> Result<UncertaintyCheck> {
    if signal.is_zero() {
        return Err(Error::Degenerate("zero signal".into()));
    }
    let n = signal.n();
    let mark = |set: &[usize]| -> Result<Vec<bool>> {
        let mut m = vec![false; n];
        for &x in set {
            if x >= n {
                return Err(invalid("set", "residue out of range"));
            }
            m[x] = true;
        }
        Ok(m)
    };
    let in_e = mark(e)?;
    let in_s = mark(s)?;
    let e_size = in_e.iter().filter(|b| **b).count() as f64;
    let s_size = in_s.iter().filter(|b| **b).count() as f64;
    let h = dft(signal);
    let abs: Vec<f64> = signal.values.iter().map(|v| v.norm().to_f64_lossy()).collect();
    let habs: Vec<f64> = h.values.iter().map(|v| v.norm().to_f64_lossy()).collect();
    let l2: f64 = abs.iter().map(|v| v * v).sum();
    let l2_out: f64 = abs.iter().zip(&in_e).filter(|(_, i)| !**i).map(|(v, _)| v * v).sum();
    let a = (l2_out / l2).sqrt();
    let l1_hat: f64 = habs.iter().sum();
    let l1_out: f64 = habs.iter().zip(&in_s).filter(|(_, i)| !**i).map(|(v, _)| v).sum();
    let b = l1_out / l1_hat;
    let l2_hat: f64 = habs.iter().map(|v| v * v).sum();
    let fr2 = l1_hat * l1_hat / l2_hat;
    let nf = n as f64;
    let lhs = if e_size > 0.0 { (1.0 - a).powi(2) * nf / e_size } else { f64::INFINITY };
    let rhs = if b < 1.0 { s_size / (1.0 - b).powi(2) } else { f64::INFINITY };
    let slack = 1.0 + EQUALITY_SLACK;
    Ok(UncertaintyCheck {
        a,
        b,
        lhs,
        fr2,
        rhs,
        sandwich_ok: lhs <= fr2 * slack && fr2 <= rhs * slack,
        product_ok: (1.0 - a).powi(2) * (1.0 - b).powi(2) * nf <= e_size * s_size * slack,
    })
}

/// Smallest set of residues carrying at least `fraction` of `Σ w`.
pub fn top_mass_set(weights: &[f64], fraction: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    idx.sort_by(|a, b| weights[*b].total_cmp(&weights[*a]).then(a.cmp(b)));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut out = Vec::new();
    for i in idx {
        if acc >= fraction * total {
            break;
        }
        acc += weights[i];
        out.push(i);
    }
    out.sort_unstable();
    out
}

/// Surrogate constants for the generic-set regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct TalagrandBand {
    pub gamma0: f64,
    pub c_t: f64,
}

impl Default for TalagrandBand {
    fn default() -> Self {
        Self { gamma0: 0.1, c_t: 10.0 }
    }
}

impl TalagrandBand {
    /// Inclusion probability giving `E|M| = γ₀ N / log N`.
    pub fn inclusion_probability(&self, n: usize) -> f64 {
        (self.gamma0 / (n as f64).ln()).min(0.999)
    }

    /// `(C_T √(log N · log log N))⁻¹`.
    pub fn threshold(&self, n: usize) -> f64 {
        let l = (n as f64).ln();
        1.0 / (self.c_t * (l * l.ln()).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericDraw {
    pub seed: u64,
    pub support_size: usize,
    pub fr: f64,
    pub lower_bound: f64,
    pub band_ok: bool,
}

/// Random `±1` signal on a generic set of expected density `p`; a draw with
/// empty support is reported with `fr = NaN`.
pub fn generic_draw(n: usize, p: f64, seed: u64, band: &TalagrandBand) -> Result<GenericDraw> {
    let support = sample_generic(n, p, seed)?;
    if support.is_empty() {
        return Ok(GenericDraw {
            seed,
            support_size: 0,
            fr: f64::NAN,
            lower_bound: f64::NAN,
            band_ok: false,
        });
    }
    let sig = random_sign_signal::<f64>(n, &support, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let rb = ratio_bounds_check(&sig, &support)?;
    Ok(GenericDraw {
        seed,
        support_size: support.len(),
        fr: rb.fr,
        lower_bound: rb.lower,
        band_ok: rb.fr >= band.threshold(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn spike_and_constant_transforms() {
        let n = 12;
        let spike = DiscreteSignal::<f64>::indicator(n, &[0]).unwrap();
        let h = dft(&spike);
        assert!(h.values().iter().all(|v| close(v.re, (n as f64).powf(-0.5), 1e-14) && v.im.abs() < 1e-14));
        let ones = DiscreteSignal::<f64>::from_real(&vec![1.0; n]).unwrap();
        let h = dft(&ones);
        assert!(close(h.values()[0].re, (n as f64).sqrt(), 1e-14));
        assert!(h.values()[1..].iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn subgroup_transform_is_scaled_annihilator() {
        let (p, q) = (3, 5);
        let n = p * q;
        let h = dft(&DiscreteSignal::<f64>::indicator(n, &subgroup(p, q)).unwrap());
        for (m, v) in h.values().iter().enumerate() {
            let expect = if m % p == 0 { p as f64 / (n as f64).sqrt() } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-13 && v.im.abs() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn fft_matches_direct_and_inverts() {
        for n in [2, 7, 64, 100] {
            let s = random_signal::<f64>(n, n as u64).unwrap();
            let a = dft(&s);
            let b = dft_direct(&s);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).norm() < 1e-12 * s.norm_l2());
            }
            let back = idft(&a);
            for (x, y) in back.values().iter().zip(s.values()) {
                assert!((x - y).norm() < 1e-12 * s.norm_l2());
            }
        }
    }

    #[test]
    fn ratio_extremes() {
        let n = 64;
        let ones = DiscreteSignal::<f64>::from_real(&vec![1.0; n]).unwrap();
        assert!(close(discrete_fr(&ones).unwrap(), 1.0 / 8.0, 1e-12));
        let spike = DiscreteSignal::<f64>::indicator(n, &[5]).unwrap();
        assert!(close(discrete_fr(&spike).unwrap(), 1.0, 1e-12));
        let zero = DiscreteSignal::<f64>::from_real(&vec![0.0; n]).unwrap();
        assert!(discrete_fr(&zero).is_err());
        assert!(DiscreteSignal::<f64>::from_real(&[1.0]).is_err());
    }

    #[test]
    fn generic_sampling() {
        let a = sample_generic(1000, 0.1, 3).unwrap();
        assert_eq!(a, sample_generic(1000, 0.1, 3).unwrap());
        assert!(a.len() > 50 && a.len() < 150);
        assert!(sample_generic(10, 0.0, 1).is_err());
        assert!(sample_generic(10, 1.0, 1).is_err());
        assert_eq!(sample_generic(50, 0.999_999_9, 1).unwrap().len(), 50);
    }

    #[test]
    fn bounds_check_subgroup_and_violation() {
        let s = subgroup(5, 7);
        let sig = DiscreteSignal::<f64>::indicator(35, &s).unwrap();
        let rb = ratio_bounds_check(&sig, &s).unwrap();
        assert!(rb.holds && close(rb.fr, rb.lower, 1e-12));
        assert!(matches!(
            ratio_bounds_check(&sig, &s[1..]),
            Err(Error::SupportViolation(0))
        ));
    }

    #[test]
    fn holder_closed_forms() {
        let n = 256;
        let spike = DiscreteSignal::<f64>::indicator(n, &[0]).unwrap();
        let c = holder_interpolation_check(&spike, 4.0).unwrap();
        assert!(close(c.cq_emp, 1.0, 1e-12) && c.holds);
        let ones = DiscreteSignal::<f64>::from_real(&vec![1.0; n]).unwrap();
        let c = holder_interpolation_check(&ones, 4.0).unwrap();
        assert!(close(c.cq_emp, (n as f64).powf(0.25), 1e-10));
        assert!(close(c.implied_l1_bound, c.l2_mean, 1e-10) && c.holds);
        assert!(holder_interpolation_check(&ones, 2.0).is_err());
    }

    #[test]
    fn uncertainty_equality_on_subgroup() {
        let (p, q) = (5, 7);
        let sig = DiscreteSignal::<f64>::indicator(p * q, &subgroup(p, q)).unwrap();
        let ann: Vec<usize> = (0..q).map(|j| j * p).collect();
        let u = discrete_uncertainty_check(&sig, &subgroup(p, q), &ann).unwrap();
        assert!(u.a < 1e-15 && u.b < 1e-14);
        for v in [u.lhs, u.fr2, u.rhs] {
            assert!(close(v, q as f64, 1e-12));
        }
        assert!(u.sandwich_ok && u.product_ok);
    }

    #[test]
    fn top_mass_set_minimal() {
        let w = [0.1, 0.5, 0.3, 0.1];
        assert_eq!(top_mass_set(&w, 0.8), vec![1, 2]);
        assert_eq!(top_mass_set(&w, 0.0), Vec::<usize>::new());
    }

    #[test]
    fn talagrand_threshold_positive() {
        let b = TalagrandBand::default();
        let t = b.threshold(4096);
        assert!(t > 0.0 && t < 0.1);
        assert!((b.inclusion_probability(4096) - 0.1 / 4096f64.ln()).abs() < 1e-15);
    }
}
