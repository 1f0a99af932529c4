//! Random trigonometric approximation of `g = (fμ)*ψ_{1/R}`.
//!
//! Frequencies are drawn from the grid with probability `∝ |ĝ(ξ)| h^d` and
//! the polynomial `P = (1/k) Σ_j ‖ĝ‖₁ sgn(ĝ(ξ_j)) e^{2πi x·ξ_j}` is an unbiased
//! estimator of `g`.  Errors are measured on a spatial grid covering the
//! `1/R`-neighborhood of the support.

use std::collections::{HashMap, HashSet};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::covered_cells;
use crate::measure::{AtomicMeasure, Mollifier, MollifierKind};
use crate::scalar::Scalar;
use crate::spectral::{FrequencyGrid, NodeSet, RatioReport, SpectralField};

/// `Σ_j c_j e^{2πi x·ξ_j}` with frequencies on the nodes of a spectral field.
#[derive(Debug, Clone)]
pub struct TrigPolynomial<T: Scalar> {
    dim: usize,
    /// Node indices of the frequencies, ascending and distinct.
    pub nodes_index: Vec<usize>,
    pub coeffs: Vec<Complex<T>>,
    nodes: NodeSet<T>,
}

impl<T: Scalar> TrigPolynomial<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct frequencies.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn frequency(&self, j: usize) -> Vec<T> {
        self.nodes.node(self.nodes_index[j])
    }

    pub fn nodes(&self) -> &NodeSet<T> {
        &self.nodes
    }

    /// Polynomial with an explicit coefficient per node (zeros dropped).
    pub fn from_node_coefficients(nodes: &NodeSet<T>, coeffs: &[(usize, Complex<T>)]) -> Self {
        let mut merged: HashMap<usize, Complex<T>> = HashMap::new();
        for &(k, c) in coeffs {
            *merged.entry(k).or_insert_with(|| Complex::new(T::zero(), T::zero())) += c;
        }
        let mut idx: Vec<usize> = merged.keys().copied().collect();
        idx.sort_unstable();
        let coeffs = idx.iter().map(|k| merged[k]).collect();
        Self {
            dim: nodes.dim(),
            nodes_index: idx,
            coeffs,
            nodes: nodes.clone(),
        }
    }

    pub fn eval(&self, x: &[T]) -> Complex<T> {
        let mut xi = vec![T::zero(); self.dim];
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, c) in self.nodes_index.iter().zip(&self.coeffs) {
            self.nodes.node_into(*k, &mut xi);
            let dot: T = x.iter().zip(&xi).map(|(a, b)| *a * *b).sum();
            let (s, co) = (T::TAU() * dot).sin_cos();
            acc = acc + *c * Complex::new(co, s);
        }
        acc
    }

    pub fn csv_header(&self) -> String {
        let mut h: Vec<String> = (0..self.dim).map(|a| format!("xi{a}")).collect();
        h.push("re".into());
        h.push("im".into());
        h.join(",")
    }

    /// One row per term: frequency components, real and imaginary coefficient.
    pub fn csv_rows(&self) -> Vec<String> {
        (0..self.degree())
            .map(|j| {
                let mut row: Vec<String> =
                    self.frequency(j).iter().map(|v| format!("{:.12e}", v)).collect();
                row.push(format!("{:.12e}", self.coeffs[j].re));
                row.push(format!("{:.12e}", self.coeffs[j].im));
                row.join(",")
            })
            .collect()
    }
}

/// Node distribution `pmf ∝ |ĝ| · weight` with the phases of `ĝ`.
#[derive(Debug, Clone)]
pub struct SamplingDistribution<T: Scalar> {
    pub nodes: NodeSet<T>,
    pub pmf: Vec<f64>,
    cdf: Vec<f64>,
    pub phases: Vec<Complex<T>>,
    /// `∫|ĝ|` by quadrature.
    pub total_l1: T,
}

pub fn build_distribution<T: Scalar>(field: &SpectralField<T>) -> Result<SamplingDistribution<T>> {
    let masses: Vec<f64> = field
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| (v.norm() * field.nodes.weight(k)).to_f64_lossy())
        .collect();
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("spectral field vanishes identically".into()));
    }
    let pmf: Vec<f64> = masses.iter().map(|m| m / total).collect();
    let mut cdf = Vec::with_capacity(pmf.len());
    let mut run = 0.0;
    for p in &pmf {
        run += p;
        cdf.push(run);
    }
    let phases = field
        .values
        .iter()
        .map(|v| {
            let n = v.norm();
            if n > T::zero() {
                *v / n
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    Ok(SamplingDistribution {
        nodes: field.nodes.clone(),
        pmf,
        cdf,
        phases,
        total_l1: field.l1_mass(),
    })
}

impl<T: Scalar> SamplingDistribution<T> {
    /// Inverse-CDF draw of one node index; zero-mass nodes are never returned.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("nonempty");
        let u = rng.random::<f64>() * total;
        let mut k = self.cdf.partition_point(|c| *c <= u);
        k = k.min(self.cdf.len() - 1);
        while self.pmf[k] == 0.0 && k > 0 {
            k -= 1;
        }
        while self.pmf[k] == 0.0 {
            k += 1;
        }
        k
    }

    /// One sample of `Z(x) = ‖ĝ‖₁ sgn(ĝ(ξ)) e^{2πi x·ξ}`.
    pub fn sample_z<R: Rng>(&self, x: &[T], rng: &mut R) -> Complex<T> {
        let k = self.draw(rng);
        let xi = self.nodes.node(k);
        let dot: T = x.iter().zip(&xi).map(|(a, b)| *a * *b).sum();
        let (s, c) = (T::TAU() * dot).sin_cos();
        self.phases[k] * self.total_l1 * Complex::new(c, s)
    }
}

/// `P = (1/k) Σ_{j≤k} Z_j`, duplicates merged.
pub fn sample_polynomial<T: Scalar>(
    dist: &SamplingDistribution<T>,
    k: usize,
    seed: u64,
) -> Result<TrigPolynomial<T>> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = dist.total_l1 / T::of_usize(k);
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for _ in 0..k {
        *counts.entry(dist.draw(&mut rng)).or_insert(0) += 1;
    }
    let terms: Vec<(usize, Complex<T>)> = counts
        .into_iter()
        .map(|(node, n)| (node, dist.phases[node] * scale * T::of_usize(n)))
        .collect();
    Ok(TrigPolynomial::from_node_coefficients(&dist.nodes, &terms))
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta", "must lie in (0, 1)"));
    }
    Ok(())
}

fn ceil_degree(x: f64) -> usize {
    if !x.is_finite() {
        return usize::MAX;
    }
    (x.ceil().max(1.0)) as usize
}

/// `⌈η⁻² (R^d X_1²/X_2² − 1)⌉`, at least 1.
pub fn degree_for_l2<T: Scalar>(report: &RatioReport<T>, eta: f64) -> Result<usize> {
    check_eta(eta)?;
    let rd = report.scale_r.to_f64_lossy().powi(report.dim as i32);
    let ratio = report.fr_raw.to_f64_lossy();
    Ok(ceil_degree((rd * ratio * ratio - 1.0) / (eta * eta)))
}

/// `⌈η⁻² (‖ĝ‖₁ / ‖g‖₁)²⌉`.
pub fn degree_for_l1<T: Scalar>(field: &SpectralField<T>, g_l1_spatial: f64, eta: f64) -> Result<usize> {
    check_eta(eta)?;
    if !(g_l1_spatial > 0.0) {
        return Err(Error::Degenerate("zero spatial L¹ mass".into()));
    }
    let ratio = field.l1_mass().to_f64_lossy() / g_l1_spatial;
    Ok(ceil_degree(ratio * ratio / (eta * eta)))
}

/// `⌈32‖ĝ‖₁²/(η²‖g‖∞²) · (log 4C_d + d log(8πR‖ĝ‖₁/(η‖ĝ‖∞)))⌉` with `C_d` given
/// (conventionally `5^d`).
pub fn degree_for_linf<T: Scalar>(
    field: &SpectralField<T>,
    g_inf: f64,
    eta: f64,
    dim: usize,
    scale: f64,
    c_d: f64,
) -> Result<usize> {
    check_eta(eta)?;
    if !(g_inf > 0.0) {
        return Err(Error::Degenerate("zero sup norm".into()));
    }
    let l1 = field.l1_mass().to_f64_lossy();
    let sup_hat = field.sup().to_f64_lossy();
    let lead = 32.0 * l1 * l1 / (eta * eta * g_inf * g_inf);
    let log_term = (4.0 * c_d).ln()
        + dim as f64 * (8.0 * std::f64::consts::PI * scale * l1 / (eta * sup_hat)).ln();
    Ok(ceil_degree(lead * log_term))
}

/// Tensor grid `x = origin + (n + ½)Δ` restricted to a set of `1/R` cells.
#[derive(Debug, Clone)]
pub struct SpatialDomain<T: Scalar> {
    pub origin: Vec<T>,
    pub spacing: T,
    pub shape: Vec<usize>,
    pub mask: Vec<bool>,
    pub scale_r: T,
    /// FFT length `N` with `N·Δ·h = 1` when built against a frequency grid.
    lattice_len: Option<usize>,
}

fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

impl<T: Scalar> SpatialDomain<T> {
    /// Grid over the `pad_cells`-dilated union of `1/R` cells meeting the
    /// support, with spacing at most `max_spacing`.  When `grid` is given the
    /// spacing is `1/(N h)` so that lattice polynomials evaluate by FFT.
    pub fn neighborhood(
        measure: &AtomicMeasure<T>,
        scale: T,
        pad_cells: usize,
        max_spacing: T,
        grid: Option<&FrequencyGrid<T>>,
    ) -> Result<Self> {
        let d = measure.dim();
        if !(max_spacing > T::zero()) {
            return Err(invalid("max_spacing", "must be positive"));
        }
        let base = covered_cells(measure, scale);
        let pad = pad_cells as i64;
        let mut cells: HashSet<Vec<i64>> = HashSet::new();
        let width = (2 * pad + 1) as usize;
        for c in &base {
            for mut k in 0..width.pow(d as u32) {
                let mut n = c.clone();
                for v in n.iter_mut() {
                    *v += (k % width) as i64 - pad;
                    k /= width;
                }
                cells.insert(n);
            }
        }
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for c in &cells {
            for a in 0..d {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        let (spacing, lattice_len) = match grid {
            Some(g) => {
                let n = (T::one() / (max_spacing * g.spacing())).ceil().to_f64_lossy() as usize;
                let n = fast_len(n.max(g.points_per_axis()));
                (T::one() / (T::of_usize(n) * g.spacing()), Some(n))
            }
            None => (max_spacing, None),
        };
        let origin: Vec<T> = lo.iter().map(|l| T::lit(*l as f64) / scale).collect();
        let shape: Vec<usize> = (0..d)
            .map(|a| {
                let ext = T::lit((hi[a] - lo[a] + 1) as f64) / scale;
                (ext / spacing).ceil().to_f64_lossy() as usize
            })
            .collect();
        let total: usize = shape.iter().product();
        let mut mask = vec![false; total];
        let mut x = vec![T::zero(); d];
        let mut key = vec![0i64; d];
        let mut dom = Self {
            origin,
            spacing,
            shape,
            mask: Vec::new(),
            scale_r: scale,
            lattice_len,
        };
        for (flat, m) in mask.iter_mut().enumerate() {
            dom.point_into(flat, &mut x);
            for a in 0..d {
                key[a] = (x[a] * scale).floor().to_f64_lossy() as i64;
            }
            *m = cells.contains(&key);
        }
        dom.mask = mask;
        Ok(dom)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn point_into(&self, mut flat: usize, out: &mut [T]) {
        for a in (0..self.dim()).rev() {
            let n = flat % self.shape[a];
            flat /= self.shape[a];
            out[a] = self.origin[a] + (T::of_usize(n) + T::lit(0.5)) * self.spacing;
        }
    }

    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim() as i32)
    }

    /// `|D|`, the volume of the masked region.
    pub fn volume(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 * self.cell_volume().to_f64_lossy()
    }

    /// `g(x) = Σ_i w_i R^d ψ(R(x − x_i))` at every domain point.
    pub fn evaluate_measure(&self, measure: &AtomicMeasure<T>, mollifier: &Mollifier<T>) -> Vec<Complex<T>> {
        let d = self.dim();
        let r = self.scale_r;
        let rd = r.powi(d as i32);
        let reach = match mollifier.kind {
            MollifierKind::Gaussian => T::lit(7.0) / r,
            MollifierKind::Bump => T::one() / r,
        };
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.len()];
        let strides: Vec<usize> = (0..d)
            .map(|a| self.shape[a + 1..].iter().product())
            .collect();
        let mut lo = vec![0usize; d];
        let mut cnt = vec![0usize; d];
        let mut factors: Vec<Vec<T>> = vec![Vec::new(); d];
        let mut x = vec![T::zero(); d];
        for i in 0..measure.len() {
            let p = measure.point(i);
            let mut empty = false;
            for a in 0..d {
                let first = ((p[a] - reach - self.origin[a]) / self.spacing - T::lit(0.5)).ceil();
                let last = ((p[a] + reach - self.origin[a]) / self.spacing - T::lit(0.5)).floor();
                let first = first.max(T::zero()).to_f64_lossy() as usize;
                let last_f = last.to_f64_lossy();
                if last_f < 0.0 {
                    empty = true;
                    break;
                }
                let last = (last_f as usize).min(self.shape[a] - 1);
                if first > last {
                    empty = true;
                    break;
                }
                lo[a] = first;
                cnt[a] = last - first + 1;
                if mollifier.kind == MollifierKind::Gaussian {
                    factors[a] = (first..=last)
                        .map(|n| {
                            let xa = self.origin[a] + (T::of_usize(n) + T::lit(0.5)) * self.spacing;
                            let u = r * (xa - p[a]);
                            (-T::PI() * u * u).exp()
                        })
                        .collect();
                }
            }
            if empty {
                continue;
            }
            let w = measure.weights()[i] * rd;
            let count: usize = cnt.iter().product();
            let mut idx = vec![0usize; d];
            for _ in 0..count {
                let mut flat = 0;
                for a in 0..d {
                    flat += (lo[a] + idx[a]) * strides[a];
                }
                let val = match mollifier.kind {
                    MollifierKind::Gaussian => (0..d).map(|a| factors[a][idx[a]]).fold(T::one(), |s, f| s * f),
                    MollifierKind::Bump => {
                        for a in 0..d {
                            let xa = self.origin[a]
                                + (T::of_usize(lo[a] + idx[a]) + T::lit(0.5)) * self.spacing;
                            x[a] = r * (xa - p[a]);
                        }
                        mollifier.spatial(&x)
                    }
                };
                out[flat] = out[flat] + w * val;
                for a in (0..d).rev() {
                    idx[a] += 1;
                    if idx[a] < cnt[a] {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
        out
    }

    /// `P` at every domain point; by per-axis FFT when the domain was built
    /// against the polynomial's frequency grid, directly otherwise.
    pub fn evaluate_polynomial(&self, p: &TrigPolynomial<T>) -> Result<Vec<Complex<T>>> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        match (p.nodes().grid(), self.lattice_len) {
            (Some(g), Some(n)) if self.matches_grid(g, n) => Ok(self.evaluate_lattice(p, g, n)),
            _ => {
                let mut x = vec![T::zero(); self.dim()];
                Ok((0..self.len())
                    .map(|k| {
                        self.point_into(k, &mut x);
                        p.eval(&x)
                    })
                    .collect())
            }
        }
    }

    fn matches_grid(&self, g: &FrequencyGrid<T>, n: usize) -> bool {
        let prod = self.spacing * g.spacing() * T::of_usize(n);
        (prod - T::one()).abs() < T::lit(1e-9)
    }

    fn evaluate_lattice(&self, p: &TrigPolynomial<T>, g: &FrequencyGrid<T>, n: usize) -> Vec<Complex<T>> {
        let d = self.dim();
        let m = g.points_per_axis();
        let h = g.spacing();
        let t0 = g.axis_coord(0);
        let zero = Complex::new(T::zero(), T::zero());
        let mut shape = vec![m; d];
        let mut data = vec![zero; m.pow(d as u32)];
        for (k, c) in p.nodes_index.iter().zip(&p.coeffs) {
            data[*k] = data[*k] + *c;
        }
        let mut planner = FftPlanner::<T>::new();
        let fft = planner.plan_fft_inverse(n);
        let mut buf = vec![zero; n];
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        for a in 0..d {
            let o = self.origin[a] + T::lit(0.5) * self.spacing;
            let out_len = self.shape[a];
            // B[k] = e^{2πi o k h}, prefactor(n) = e^{2πi (o + nΔ) t0}
            let pre_in: Vec<Complex<T>> = (0..m)
                .map(|k| {
                    let (s, c) = (T::TAU() * o * T::of_usize(k) * h).sin_cos();
                    Complex::new(c, s)
                })
                .collect();
            let pre_out: Vec<Complex<T>> = (0..out_len)
                .map(|j| {
                    let x = o + T::of_usize(j) * self.spacing;
                    let (s, c) = (T::TAU() * x * t0).sin_cos();
                    Complex::new(c, s)
                })
                .collect();
            let outer: usize = shape[..a].iter().product();
            let inner: usize = shape[a + 1..].iter().product();
            let mut next_shape = shape.clone();
            next_shape[a] = out_len;
            let mut next = vec![zero; outer * out_len * inner];
            for ou in 0..outer {
                for inn in 0..inner {
                    buf.iter_mut().for_each(|b| *b = zero);
                    let mut any = false;
                    for k in 0..m {
                        let v = data[(ou * m + k) * inner + inn];
                        if v != zero {
                            any = true;
                            buf[k % n] = buf[k % n] + v * pre_in[k];
                        }
                    }
                    if !any {
                        continue;
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for j in 0..out_len {
                        next[(ou * out_len + j) * inner + inn] = buf[j % n] * pre_out[j];
                    }
                }
            }
            data = next;
            shape = next_shape;
        }
        data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::L1 => "L1",
            Self::L2 => "L2",
            Self::Linf => "Linf",
        }
    }
}

/// Norm of `v` over the masked domain points.
pub fn domain_norm<T: Scalar>(v: &[Complex<T>], domain: &SpatialDomain<T>, norm: Norm) -> f64 {
    let dv = domain.cell_volume().to_f64_lossy();
    let it = v.iter().zip(&domain.mask).filter(|(_, m)| **m).map(|(z, _)| z.norm().to_f64_lossy());
    match norm {
        Norm::L1 => it.sum::<f64>() * dv,
        Norm::L2 => (it.map(|a| a * a).sum::<f64>() * dv).sqrt(),
        Norm::Linf => it.fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxError {
    pub absolute: f64,
    pub g_norm: f64,
    pub relative: f64,
}

/// `‖g − P‖` over the domain, with `g` given by its values on the domain.
pub fn approx_error<T: Scalar>(
    g_values: &[Complex<T>],
    p: &TrigPolynomial<T>,
    norm: Norm,
    domain: &SpatialDomain<T>,
) -> Result<ApproxError> {
    let p_values = domain.evaluate_polynomial(p)?;
    approx_error_values(g_values, &p_values, norm, domain, p.nodes().half_extent())
}

/// As [`approx_error`] with `P` already evaluated; `half_extent` is the
/// frequency cutoff `Ξ` used to check spatial resolution `Δ ≤ 1/(8Ξ)`.
pub fn approx_error_values<T: Scalar>(
    g_values: &[Complex<T>],
    p_values: &[Complex<T>],
    norm: Norm,
    domain: &SpatialDomain<T>,
    half_extent: T,
) -> Result<ApproxError> {
    if g_values.len() != domain.len() || p_values.len() != domain.len() {
        return Err(Error::DimensionMismatch {
            expected: domain.len(),
            got: g_values.len().min(p_values.len()),
        });
    }
    let max = T::one() / (T::lit(8.0) * half_extent);
    if domain.spacing > max * (T::one() + T::lit(1e-9)) {
        return Err(Error::UnderResolved {
            spacing: domain.spacing.to_f64_lossy(),
            max: max.to_f64_lossy(),
        });
    }
    let diff: Vec<Complex<T>> = g_values.iter().zip(p_values).map(|(a, b)| *a - *b).collect();
    let absolute = domain_norm(&diff, domain, norm);
    let g_norm = domain_norm(g_values, domain, norm);
    Ok(ApproxError {
        absolute,
        g_norm,
        relative: if g_norm > 0.0 { absolute / g_norm } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{make_circle_arc, make_kplane_measure};
    use crate::spectral::{analyze, GridPolicy};

    fn point_setup(r: f64) -> (AtomicMeasure<f64>, SpectralField<f64>, RatioReport<f64>) {
        let m = AtomicMeasure::point_mass(2).unwrap();
        let (rep, f) = analyze(&m, r, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        (m, f, rep)
    }

    #[test]
    fn point_mass_distribution_is_gaussian_with_unit_phases() {
        let (_, f, _) = point_setup(4.0);
        let dist = build_distribution(&f).unwrap();
        assert!((dist.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(dist.phases.iter().all(|p| (p.re - 1.0).abs() < 1e-12 && p.im.abs() < 1e-12));
        let g = f.grid().unwrap();
        let ratio_at = |a: usize, b: usize| {
            let (mut xa, mut xb) = ([0.0; 2], [0.0; 2]);
            g.node_into(a, &mut xa);
            g.node_into(b, &mut xb);
            let q = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1];
            (-std::f64::consts::PI * (q(xa) - q(xb)) / 16.0).exp()
        };
        let top = (0..dist.pmf.len()).max_by(|a, b| dist.pmf[*a].total_cmp(&dist.pmf[*b])).unwrap();
        for k in [0, 17, g.len() / 3] {
            assert!((dist.pmf[k] / dist.pmf[top] / ratio_at(k, top) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_pair_has_real_phases() {
        let m = AtomicMeasure::from_real(2, vec![0.5, 0.0, -0.5, 0.0], vec![0.5, 0.5], "pair").unwrap();
        let (_, f) = analyze(&m, 4.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let dist = build_distribution(&f).unwrap();
        let mut signs = HashSet::new();
        for p in dist.phases.iter().copied() {
            let p: Complex<f64> = p;
            if p.norm() > 0.0 {
                assert!(p.im.abs() < 1e-9);
                signs.insert(p.re.signum() as i32);
            }
        }
        assert_eq!(signs.len(), 2);
    }

    #[test]
    fn zero_field_rejected() {
        let (_, mut f, _) = point_setup(2.0);
        f.values.iter_mut().for_each(|v| *v = Complex::new(0.0, 0.0));
        assert!(build_distribution(&f).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_merges() {
        let (_, f, _) = point_setup(4.0);
        let dist = build_distribution(&f).unwrap();
        let a = sample_polynomial(&dist, 500, 11).unwrap();
        let b = sample_polynomial(&dist, 500, 11).unwrap();
        assert_eq!(a.nodes_index, b.nodes_index);
        assert_eq!(a.coeffs, b.coeffs);
        assert!(a.degree() <= 500);
        let total: f64 = a.coeffs.iter().map(|c| c.norm()).sum();
        assert!((total - dist.total_l1).abs() < 1e-9 * dist.total_l1);
        assert!(sample_polynomial(&dist, 0, 1).is_err());
    }

    #[test]
    fn k1_polynomials_are_unbiased_at_the_origin() {
        let r = 4.0;
        let (m, f, _) = point_setup(r);
        let dist = build_distribution(&f).unwrap();
        let n = 10_000;
        let mut sum = Complex::new(0.0, 0.0);
        for s in 0..n {
            sum += sample_polynomial(&dist, 1, s).unwrap().eval(&[0.0, 0.0]);
        }
        let mean = sum / n as f64;
        // g(0) = R^d for the point mass; Z(0) = ‖ĝ‖₁ sgn, |Z| = ‖ĝ‖₁
        let g0 = r * r;
        let sd = (dist.total_l1 * dist.total_l1 - g0 * g0).max(0.0).sqrt() / (n as f64).sqrt();
        assert!((mean.re - g0).abs() <= 3.0 * sd + 1e-9, "mean {mean} g0 {g0} sd {sd}");
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn degree_formulas() {
        let (m, f, rep) = point_setup(8.0);
        let mut rep_min = rep.clone();
        rep_min.fr_raw = 1.0 / 8.0;
        assert_eq!(degree_for_l2(&rep_min, 0.5).unwrap(), 1);
        assert!(degree_for_l2(&rep, 1.0).is_err());
        let l2 = degree_for_l2(&rep, 0.5).unwrap();
        assert_eq!(l2, ((64.0 * rep.fr_raw * rep.fr_raw - 1.0) * 4.0f64).ceil() as usize);
        let mass = m.total_mass().re;
        let l1 = degree_for_l1(&f, mass, 0.5).unwrap();
        assert!((l1 as f64 / (4.0 * 64.0 * 64.0) - 1.0).abs() < 1e-3);
        let a = degree_for_linf(&f, 64.0, 0.3, 2, 8.0, 25.0).unwrap();
        let b = degree_for_linf(&f, 64.0, 0.6, 2, 8.0, 25.0).unwrap();
        assert!(b < a);
        assert!(degree_for_linf(&f, 0.0, 0.5, 2, 8.0, 25.0).is_err());
    }

    #[test]
    fn lattice_evaluation_matches_direct() {
        let m = make_circle_arc::<f64>(8.0, 0.5, 64).unwrap();
        let (_, f) = analyze(&m, 8.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let dist = build_distribution(&f).unwrap();
        let p = sample_polynomial(&dist, 200, 5).unwrap();
        let g = f.grid().unwrap();
        let dom = SpatialDomain::neighborhood(&m, 8.0, 1, 1.0 / (8.0 * g.half_extent()), Some(g)).unwrap();
        let fast = dom.evaluate_polynomial(&p).unwrap();
        let mut x = [0.0; 2];
        for k in (0..dom.len()).step_by(97) {
            dom.point_into(k, &mut x);
            assert!((fast[k] - p.eval(&x)).norm() < 1e-8 * (1.0 + fast[k].norm()));
        }
    }

    #[test]
    fn full_truncation_reconstructs_g() {
        let m = make_kplane_measure::<f64>(2, 1, 64).unwrap();
        let r = 8.0;
        let (_, f) = analyze(&m, r, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let g = f.grid().unwrap();
        let w = g.cell_volume();
        let terms: Vec<(usize, Complex<f64>)> =
            f.values.iter().enumerate().map(|(k, v)| (k, *v * w)).collect();
        let p = TrigPolynomial::from_node_coefficients(&f.nodes, &terms);
        let dom = SpatialDomain::neighborhood(&m, r, 2, 1.0 / (8.0 * g.half_extent()), Some(g)).unwrap();
        let gv = dom.evaluate_measure(&m, &Mollifier::gaussian(2));
        let e = approx_error(&gv, &p, Norm::Linf, &dom).unwrap();
        assert!(e.relative < 1e-6, "{e:?}");
        let zero = TrigPolynomial::from_node_coefficients(&f.nodes, &[]);
        let e0 = approx_error(&gv, &zero, Norm::L2, &dom).unwrap();
        assert!((e0.relative - 1.0).abs() < 1e-12);
    }

    #[test]
    fn under_resolved_domain_rejected() {
        let m = make_kplane_measure::<f64>(2, 1, 64).unwrap();
        let (_, f) = analyze(&m, 8.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let dom = SpatialDomain::neighborhood(&m, 8.0, 1, 0.05, None).unwrap();
        let gv = dom.evaluate_measure(&m, &Mollifier::gaussian(2));
        let zero = TrigPolynomial::from_node_coefficients(&f.nodes, &[]);
        assert!(matches!(
            approx_error(&gv, &zero, Norm::L2, &dom),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn spatial_mass_of_nonnegative_g_is_total_mass() {
        let m = make_kplane_measure::<f64>(2, 1, 128).unwrap();
        let dom = SpatialDomain::neighborhood(&m, 16.0, 3, 1.0 / 512.0, None).unwrap();
        let gv = dom.evaluate_measure(&m, &Mollifier::gaussian(2));
        let l1 = domain_norm(&gv, &dom, Norm::L1);
        assert!((l1 - 1.0).abs() < 1e-3, "l1={l1}");
    }
}
