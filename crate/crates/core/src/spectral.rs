//! Mollified Fourier transforms of atomic measures and the regularized norms
//! `X_1`, `X_2`, `X_∞` with their ratio.
//!
//! Convention: `ν̂(ξ) = ∫ e^{-2πi x·ξ} dν(x)`.  The field sampled at a node is
//! `ĝ(ξ) = Σ_i w_i e^{-2πi x_i·ξ} ψ̂(ξ/R)`, the transform of `(fμ)*ψ_{1/R}`.

use std::collections::HashMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure::{AtomicMeasure, Mollifier, MollifierKind};
use crate::scalar::Scalar;

/// Smallest admissible `Ξ / R`; below it the gaussian tail `ψ̂(Ξ/R)` exceeds `e^{-4π}`.
pub const MIN_CUTOFF: f64 = 2.0;

/// Uniform midpoint grid on `[-Ξ, Ξ]^d` with `M` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid<T: Scalar> {
    dim: usize,
    half_extent: T,
    points_per_axis: usize,
    spacing: T,
}

impl<T: Scalar> FrequencyGrid<T> {
    pub fn new(dim: usize, half_extent: T, points_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if points_per_axis < 16 || points_per_axis % 2 == 1 {
            return Err(invalid("points_per_axis", "must be even and at least 16"));
        }
        if !(half_extent > T::zero()) {
            return Err(invalid("half_extent", "must be positive"));
        }
        Ok(Self {
            dim,
            half_extent,
            points_per_axis,
            spacing: T::lit(2.0) * half_extent / T::of_usize(points_per_axis),
        })
    }

    /// Grid on `[-Ξ, Ξ]^d` whose spacing does not exceed `max_spacing`.
    pub fn with_max_spacing(dim: usize, half_extent: T, max_spacing: T) -> Result<Self> {
        let m = (T::lit(2.0) * half_extent / max_spacing).ceil().to_f64_lossy() as usize;
        let m = (m + m % 2).max(16);
        Self::new(dim, half_extent, m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> T {
        self.half_extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^d`.
    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    /// Coordinate of the `k`-th node along an axis.
    pub fn axis_coord(&self, k: usize) -> T {
        -self.half_extent + (T::of_usize(k) + T::lit(0.5)) * self.spacing
    }

    pub fn axis(&self) -> Vec<T> {
        (0..self.points_per_axis).map(|k| self.axis_coord(k)).collect()
    }

    /// Per-axis indices of a flat (row-major, last axis fastest) index.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        let m = self.points_per_axis;
        for a in (0..self.dim).rev() {
            out[a] = flat % m;
            flat /= m;
        }
    }

    pub fn node_into(&self, flat: usize, out: &mut [T]) {
        let m = self.points_per_axis;
        let mut f = flat;
        for a in (0..self.dim).rev() {
            out[a] = self.axis_coord(f % m);
            f /= m;
        }
    }

    /// Flat index of the node mirrored through the origin.
    pub fn mirror(&self, flat: usize) -> usize {
        let m = self.points_per_axis;
        let mut f = flat;
        let mut out = 0;
        let mut stride = 1;
        for _ in 0..self.dim {
            let k = f % m;
            f /= m;
            out += (m - 1 - k) * stride;
            stride *= m;
        }
        out
    }
}

/// Quadrature nodes in frequency space: a uniform grid or a weighted
/// scattered sample.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeSet<T: Scalar> {
    Grid(FrequencyGrid<T>),
    Scattered(ScatteredNodes<T>),
}

/// Frequencies drawn from a defensive mixture of the gaussian `ψ̂(ξ/R)` and
/// the uniform law on `[-Ξ, Ξ]^d`, weighted by the inverse sampling density.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteredNodes<T: Scalar> {
    dim: usize,
    half_extent: T,
    points: Vec<T>,
    weights: Vec<T>,
    seed: u64,
}

impl<T: Scalar> ScatteredNodes<T> {
    pub fn sample(dim: usize, scale: T, half_extent: T, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(invalid("count", "must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = scale.to_f64_lossy();
        let xi = half_extent.to_f64_lossy();
        let sigma = r / (2.0 * std::f64::consts::PI).sqrt();
        let normal = Normal::new(0.0, sigma).map_err(|e| invalid("scale", e.to_string()))?;
        let box_density = (2.0 * xi).powi(-(dim as i32));
        let mut points = Vec::with_capacity(count * dim);
        let mut weights = Vec::with_capacity(count);
        let mut buf = vec![0.0f64; dim];
        for _ in 0..count {
            if rng.random::<bool>() {
                loop {
                    for v in buf.iter_mut() {
                        *v = normal.sample(&mut rng);
                    }
                    if buf.iter().all(|v| v.abs() <= xi) {
                        break;
                    }
                }
            } else {
                for v in buf.iter_mut() {
                    *v = rng.random_range(-xi..xi);
                }
            }
            let r2: f64 = buf.iter().map(|v| v * v).sum();
            let gauss = r.powi(-(dim as i32)) * (-std::f64::consts::PI * r2 / (r * r)).exp();
            let density = 0.5 * gauss + 0.5 * box_density;
            weights.push(T::lit(1.0 / (count as f64 * density)));
            points.extend(buf.iter().map(|&v| T::lit(v)));
        }
        Ok(Self {
            dim,
            half_extent,
            points,
            weights,
            seed,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }
}

impl<T: Scalar> NodeSet<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Grid(g) => g.dim,
            Self::Scattered(s) => s.dim,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Grid(g) => g.len(),
            Self::Scattered(s) => s.weights.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn half_extent(&self) -> T {
        match self {
            Self::Grid(g) => g.half_extent,
            Self::Scattered(s) => s.half_extent,
        }
    }

    pub fn grid(&self) -> Option<&FrequencyGrid<T>> {
        match self {
            Self::Grid(g) => Some(g),
            Self::Scattered(_) => None,
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, Self::Grid(_))
    }

    /// Quadrature weight of node `k` (`h^d` on a grid).
    #[inline]
    pub fn weight(&self, k: usize) -> T {
        match self {
            Self::Grid(g) => g.cell_volume(),
            Self::Scattered(s) => s.weights[k],
        }
    }

    pub fn node_into(&self, k: usize, out: &mut [T]) {
        match self {
            Self::Grid(g) => g.node_into(k, out),
            Self::Scattered(s) => out.copy_from_slice(&s.points[k * s.dim..(k + 1) * s.dim]),
        }
    }

    pub fn node(&self, k: usize) -> Vec<T> {
        let mut v = vec![T::zero(); self.dim()];
        self.node_into(k, &mut v);
        v
    }

    /// `Σ_k weight_k`, the measure of the covered frequency region.
    pub fn total_weight(&self) -> T {
        match self {
            Self::Grid(g) => g.cell_volume() * T::of_usize(g.len()),
            Self::Scattered(s) => s.weights.iter().copied().sum(),
        }
    }
}

/// Samples of `ĝ` on a node set.
#[derive(Debug, Clone)]
pub struct SpectralField<T: Scalar> {
    pub nodes: NodeSet<T>,
    pub values: Vec<Complex<T>>,
    pub scale_r: T,
    pub mollifier: Mollifier<T>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn grid(&self) -> Option<&FrequencyGrid<T>> {
        self.nodes.grid()
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    /// `∫|ĝ|` by quadrature (unnormalized; `X_1 = R^{-d}` times this).
    pub fn l1_mass(&self) -> T {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm() * self.nodes.weight(k))
            .sum()
    }

    /// `max |ĝ|` over the nodes.
    pub fn sup(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }
}

/// Resolution policy for [`fourier_ratio`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPolicy<T: Scalar> {
    /// `Ξ = cutoff · R`.
    pub cutoff: T,
    /// Grid spacing satisfies `h ≤ 1 / (oversample · (diam + 6/R))`.
    pub oversample: T,
    /// Forces `M` points per axis when set.
    pub fixed_points: Option<usize>,
    /// Largest admissible grid; beyond it scattered nodes are used.
    pub max_nodes: usize,
    /// Size of the scattered sample.
    pub scattered_nodes: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for GridPolicy<T> {
    fn default() -> Self {
        Self {
            cutoff: T::lit(4.0),
            oversample: T::lit(4.0),
            fixed_points: None,
            max_nodes: 1 << 21,
            scattered_nodes: 1 << 16,
            seed: 0x5eed,
        }
    }
}

impl<T: Scalar> GridPolicy<T> {
    /// Points per axis demanded by the resolution rule.
    pub fn rule_points(&self, measure: &AtomicMeasure<T>, scale: T) -> usize {
        if let Some(m) = self.fixed_points {
            return m;
        }
        let pad = T::lit(6.0) / scale;
        let h = (T::one() / (self.oversample * (measure.diameter_bound() + pad)))
            .min(scale / T::lit(4.0));
        let m = (T::lit(2.0) * self.cutoff * scale / h).ceil().to_f64_lossy();
        let m = if m.is_finite() { m as usize } else { usize::MAX / 2 };
        (m + m % 2).max(16)
    }

    /// Node set for `measure` at scale `R`.
    pub fn nodes(&self, measure: &AtomicMeasure<T>, scale: T) -> Result<NodeSet<T>> {
        let d = measure.dim();
        let xi = self.cutoff * scale;
        let m = self.rule_points(measure, scale);
        let fits = (m as f64).powi(d as i32) <= self.max_nodes as f64;
        if fits || self.fixed_points.is_some() {
            Ok(NodeSet::Grid(FrequencyGrid::new(d, xi, m)?))
        } else {
            Ok(NodeSet::Scattered(ScatteredNodes::sample(
                d,
                scale,
                xi,
                self.scattered_nodes,
                self.seed,
            )?))
        }
    }
}

#[inline]
fn cis<T: Scalar>(theta: T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

/// `out[a] = e^{-2πi x (t0 + a h)}`, resynchronized every 32 steps.
fn fill_phases<T: Scalar>(x: T, t0: T, h: T, out: &mut [Complex<T>]) {
    let two_pi = T::TAU();
    let step = cis(-two_pi * x * h);
    let mut cur = Complex::new(T::one(), T::zero());
    for (a, o) in out.iter_mut().enumerate() {
        if a % 32 == 0 {
            cur = cis(-two_pi * x * (t0 + T::of_usize(a) * h));
        }
        *o = cur;
        cur = cur * step;
    }
}

/// Mollifier profile along the grid, as a table over `|u|` for the bump.
enum HatEval<T: Scalar> {
    Gaussian,
    Table { step: T, values: Vec<T> },
}

impl<T: Scalar> HatEval<T> {
    fn new(m: &Mollifier<T>, umax: T) -> Self {
        match m.kind {
            MollifierKind::Gaussian => Self::Gaussian,
            MollifierKind::Bump => {
                let n = 4096;
                let step = umax / T::of_usize(n - 2);
                let values = (0..n).map(|k| m.hat_radial(step * T::of_usize(k))).collect();
                Self::Table { step, values }
            }
        }
    }

    fn eval(&self, u2: T) -> T {
        match self {
            Self::Gaussian => (-T::PI() * u2).exp(),
            Self::Table { step, values } => {
                let pos = u2.sqrt() / *step;
                let k = pos.floor().to_f64_lossy() as usize;
                if k + 1 >= values.len() {
                    return *values.last().expect("table");
                }
                let f = pos - T::of_usize(k);
                values[k] * (T::one() - f) + values[k + 1] * f
            }
        }
    }
}

/// Transform of `(fμ)*ψ_{1/R}` sampled on `nodes`.
///
/// Grids use a separable summation in `d ≤ 3`; scattered nodes and higher
/// dimensions sum directly.
pub fn transform<T: Scalar>(
    measure: &AtomicMeasure<T>,
    scale: T,
    nodes: &NodeSet<T>,
    mollifier: &Mollifier<T>,
) -> Result<SpectralField<T>> {
    let d = measure.dim();
    if nodes.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: nodes.dim(),
        });
    }
    if mollifier.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: mollifier.dim(),
        });
    }
    if !(scale >= T::one()) {
        return Err(invalid("R", "must be at least 1"));
    }
    let required = T::lit(MIN_CUTOFF) * scale;
    if nodes.half_extent() < required * (T::one() - T::lit(1e-12)) {
        return Err(Error::GridTooSmall {
            half_extent: nodes.half_extent().to_f64_lossy(),
            required: required.to_f64_lossy(),
            scale: scale.to_f64_lossy(),
        });
    }
    let umax = nodes.half_extent() * T::of_usize(d).sqrt() / scale * T::lit(1.01);
    let hat = HatEval::new(mollifier, umax);
    let raw = match nodes {
        NodeSet::Grid(g) if (1..=3).contains(&d) => grid_sums(measure, g),
        _ => direct_sums(measure, nodes),
    };
    let mut values = raw;
    let inv_r2 = T::one() / (scale * scale);
    let mut buf = vec![T::zero(); d];
    for (k, v) in values.iter_mut().enumerate() {
        nodes.node_into(k, &mut buf);
        let u2: T = buf.iter().map(|x| *x * *x).sum::<T>() * inv_r2;
        *v = *v * hat.eval(u2);
    }
    Ok(SpectralField {
        nodes: nodes.clone(),
        values,
        scale_r: scale,
        mollifier: *mollifier,
    })
}

const SIN_TAYLOR: [f64; 11] = [
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
    -1.0 / 121645100408832000.0,
    1.0 / 51090942171709440000.0,
];
const COS_TAYLOR: [f64; 12] = [
    1.0,
    -0.5,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
    1.0 / 20922789888000.0,
    -1.0 / 6402373705728000.0,
    1.0 / 2432902008176640000.0,
    -1.0 / 1124000727777607680000.0,
];

/// `(sin 2πt, cos 2πt)` without branches: exact reduction to `[-½, ½]` turns,
/// Taylor series at the half angle, then one doubling step.
#[inline(always)]
fn sincos_turns<T: Scalar>(t: T, magic: T, sin_c: &[T; 11], cos_c: &[T; 12]) -> (T, T) {
    let r = t - ((t + magic) - magic);
    let x = T::PI() * r;
    let x2 = x * x;
    let mut s = sin_c[10];
    for k in (0..10).rev() {
        s = s * x2 + sin_c[k];
    }
    s = s * x;
    let mut c = cos_c[11];
    for k in (0..11).rev() {
        c = c * x2 + cos_c[k];
    }
    (T::lit(2.0) * s * c, (c - s) * (c + s))
}

/// Atoms in structure-of-arrays form for the direct kernel.
struct AtomColumns<T: Scalar> {
    coords: Vec<Vec<T>>,
    w_re: Vec<T>,
    w_im: Vec<T>,
}

impl<T: Scalar> AtomColumns<T> {
    fn new(measure: &AtomicMeasure<T>) -> Self {
        let d = measure.dim();
        let coords = (0..d)
            .map(|a| (0..measure.len()).map(|i| measure.point(i)[a]).collect())
            .collect();
        Self {
            coords,
            w_re: measure.weights().iter().map(|w| w.re).collect(),
            w_im: measure.weights().iter().map(|w| w.im).collect(),
        }
    }
}

#[inline(always)]
fn direct_kernel<T: Scalar>(cols: &AtomColumns<T>, nodes: &NodeSet<T>, out: &mut [Complex<T>]) {
    let d = cols.coords.len();
    let n = cols.w_re.len();
    let magic = T::lit(1.5) / T::epsilon();
    let sin_c: [T; 11] = SIN_TAYLOR.map(T::lit);
    let cos_c: [T; 12] = COS_TAYLOR.map(T::lit);
    let mut xi = vec![T::zero(); d];
    let mut turns = vec![T::zero(); n];
    let mut sn = vec![T::zero(); n];
    let mut cs = vec![T::zero(); n];
    for (k, o) in out.iter_mut().enumerate() {
        nodes.node_into(k, &mut xi);
        turns.iter_mut().for_each(|t| *t = T::zero());
        for a in 0..d {
            let v = xi[a];
            for (t, x) in turns.iter_mut().zip(&cols.coords[a]) {
                *t += *x * v;
            }
        }
        for i in 0..n {
            let (s, c) = sincos_turns(turns[i], magic, &sin_c, &cos_c);
            sn[i] = s;
            cs[i] = c;
        }
        // w · e^{-2πit} with four independent partial sums
        let mut re = [T::zero(); 4];
        let mut im = [T::zero(); 4];
        let full = n - n % 4;
        let mut i = 0;
        while i < full {
            for l in 0..4 {
                let j = i + l;
                re[l] += cols.w_re[j] * cs[j] + cols.w_im[j] * sn[j];
                im[l] += cols.w_im[j] * cs[j] - cols.w_re[j] * sn[j];
            }
            i += 4;
        }
        for j in full..n {
            re[0] += cols.w_re[j] * cs[j] + cols.w_im[j] * sn[j];
            im[0] += cols.w_im[j] * cs[j] - cols.w_re[j] * sn[j];
        }
        *o = Complex::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]));
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn direct_kernel_avx2<T: Scalar>(cols: &AtomColumns<T>, nodes: &NodeSet<T>, out: &mut [Complex<T>]) {
    direct_kernel(cols, nodes, out)
}

fn direct_sums<T: Scalar>(measure: &AtomicMeasure<T>, nodes: &NodeSet<T>) -> Vec<Complex<T>> {
    let cols = AtomColumns::new(measure);
    let mut out = vec![Complex::new(T::zero(), T::zero()); nodes.len()];
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
            // SAFETY: the required CPU features were detected at runtime.
            unsafe { direct_kernel_avx2(&cols, nodes, &mut out) };
            return out;
        }
    }
    direct_kernel(&cols, nodes, &mut out);
    out
}

const CHUNK: usize = 64;

/// Separable evaluation of `Σ_i w_i Π_a e^{-2πi x_{i,a} t_{k_a}}` on a grid.
fn grid_sums<T: Scalar>(measure: &AtomicMeasure<T>, grid: &FrequencyGrid<T>) -> Vec<Complex<T>> {
    let d = grid.dim();
    let m = grid.points_per_axis();
    let t0 = grid.axis_coord(0);
    let h = grid.spacing();
    let n = measure.len();
    let total = grid.len();
    let mut acc_re = vec![T::zero(); total];
    let mut acc_im = vec![T::zero(); total];

    // per-chunk phase tables: axis a of atom i at tables[a][i*m..]
    let mut tables: Vec<Vec<Complex<T>>> = vec![vec![Complex::new(T::zero(), T::zero()); CHUNK * m]; d];
    let mut last_re = vec![T::zero(); CHUNK * m];
    let mut last_im = vec![T::zero(); CHUNK * m];
    let mut coef = vec![Complex::new(T::zero(), T::zero()); CHUNK];

    let mut start = 0;
    while start < n {
        let len = CHUNK.min(n - start);
        for i in 0..len {
            let p = measure.point(start + i);
            for a in 0..d {
                fill_phases(p[a], t0, h, &mut tables[a][i * m..(i + 1) * m]);
            }
            for b in 0..m {
                let z = tables[d - 1][i * m + b];
                last_re[i * m + b] = z.re;
                last_im[i * m + b] = z.im;
            }
        }
        let w = &measure.weights()[start..start + len];
        match d {
            1 => {
                for i in 0..len {
                    accumulate_row(
                        w[i],
                        &last_re[i * m..(i + 1) * m],
                        &last_im[i * m..(i + 1) * m],
                        &mut acc_re,
                        &mut acc_im,
                    );
                }
            }
            2 => {
                for a in 0..m {
                    for i in 0..len {
                        coef[i] = w[i] * tables[0][i * m + a];
                    }
                    let row = a * m..(a + 1) * m;
                    accumulate_rows(
                        &coef[..len],
                        &last_re,
                        &last_im,
                        m,
                        &mut acc_re[row.clone()],
                        &mut acc_im[row],
                    );
                }
            }
            _ => {
                for a in 0..m {
                    for b in 0..m {
                        for i in 0..len {
                            coef[i] = w[i] * tables[0][i * m + a] * tables[1][i * m + b];
                        }
                        let row = (a * m + b) * m..(a * m + b + 1) * m;
                        accumulate_rows(
                            &coef[..len],
                            &last_re,
                            &last_im,
                            m,
                            &mut acc_re[row.clone()],
                            &mut acc_im[row],
                        );
                    }
                }
            }
        }
        start += len;
    }
    acc_re
        .into_iter()
        .zip(acc_im)
        .map(|(re, im)| Complex::new(re, im))
        .collect()
}

#[inline]
fn accumulate_row<T: Scalar>(c: Complex<T>, vr: &[T], vi: &[T], out_re: &mut [T], out_im: &mut [T]) {
    for (((o_re, o_im), &r), &i) in out_re.iter_mut().zip(out_im.iter_mut()).zip(vr).zip(vi) {
        *o_re += c.re * r - c.im * i;
        *o_im += c.re * i + c.im * r;
    }
}

/// `out += Σ_i coef_i · v_i` over rows `v_i` of length `m`, four at a time.
#[inline]
fn accumulate_rows<T: Scalar>(
    coef: &[Complex<T>],
    vr: &[T],
    vi: &[T],
    m: usize,
    out_re: &mut [T],
    out_im: &mut [T],
) {
    let len = coef.len();
    let mut i = 0;
    while i + 4 <= len {
        let (c0, c1, c2, c3) = (coef[i], coef[i + 1], coef[i + 2], coef[i + 3]);
        let r0 = &vr[i * m..(i + 1) * m];
        let r1 = &vr[(i + 1) * m..(i + 2) * m];
        let r2 = &vr[(i + 2) * m..(i + 3) * m];
        let r3 = &vr[(i + 3) * m..(i + 4) * m];
        let s0 = &vi[i * m..(i + 1) * m];
        let s1 = &vi[(i + 1) * m..(i + 2) * m];
        let s2 = &vi[(i + 2) * m..(i + 3) * m];
        let s3 = &vi[(i + 3) * m..(i + 4) * m];
        let out_re = &mut out_re[..m];
        let out_im = &mut out_im[..m];
        for b in 0..m {
            out_re[b] += c0.re * r0[b] - c0.im * s0[b] + c1.re * r1[b] - c1.im * s1[b]
                + c2.re * r2[b]
                - c2.im * s2[b]
                + c3.re * r3[b]
                - c3.im * s3[b];
            out_im[b] += c0.re * s0[b] + c0.im * r0[b] + c1.re * s1[b] + c1.im * r1[b]
                + c2.re * s2[b]
                + c2.im * r2[b]
                + c3.re * s3[b]
                + c3.im * r3[b];
        }
        i += 4;
    }
    while i < len {
        accumulate_row(
            coef[i],
            &vr[i * m..(i + 1) * m],
            &vi[i * m..(i + 1) * m],
            out_re,
            out_im,
        );
        i += 1;
    }
}

/// `X_p = (R^{-d} Σ_k weight_k |ĝ_k|^p)^{1/p}` for `p ∈ {1, 2}`; `max |ĝ|` for `p = ∞`.
pub fn x_norm<T: Scalar>(field: &SpectralField<T>, p: f64) -> Result<T> {
    let d = field.dim() as i32;
    let rd = field.scale_r.powi(d);
    if p.is_infinite() && p > 0.0 {
        return Ok(field.sup());
    }
    if p == 1.0 {
        return Ok(field.l1_mass() / rd);
    }
    if p == 2.0 {
        let s: T = field
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm_sqr() * field.nodes.weight(k))
            .sum();
        return Ok((s / rd).sqrt());
    }
    Err(Error::Unsupported(format!("X_p norm with p = {p}")))
}

/// `X_2` from the spatial side: `X_2² = R^{-d} Σ_{i,j} w_i w̄_j G(x_i − x_j)` with
/// `G(z) = (R²/2)^{d/2} e^{-πR²|z|²/2}`, the autocorrelation of the gaussian `ψ_{1/R}`.
pub fn parseval_x2<T: Scalar>(measure: &AtomicMeasure<T>, scale: T) -> T {
    let d = measure.dim();
    let r = scale.to_f64_lossy();
    let reach = 7.0 / r;
    let amp = (r * r / 2.0).powf(d as f64 / 2.0);
    let decay = std::f64::consts::PI * r * r / 2.0;
    let pts: Vec<f64> = measure.points().iter().map(|x| x.to_f64_lossy()).collect();
    let ws: Vec<(f64, f64)> = measure
        .weights()
        .iter()
        .map(|w| (w.re.to_f64_lossy(), w.im.to_f64_lossy()))
        .collect();
    let cell_of = |i: usize| -> Vec<i64> {
        pts[i * d..(i + 1) * d]
            .iter()
            .map(|x| (x / reach).floor() as i64)
            .collect()
    };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..ws.len() {
        cells.entry(cell_of(i)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let o = (k % 3) as i64 - 1;
                    k /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    for (key, members) in &cells {
        for off in &offsets {
            let nb: Vec<i64> = key.iter().zip(off).map(|(a, b)| a + b).collect();
            let Some(others) = cells.get(&nb) else { continue };
            for &i in members {
                let xi = &pts[i * d..(i + 1) * d];
                for &j in others {
                    let xj = &pts[j * d..(j + 1) * d];
                    let dist2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                    let g = amp * (-decay * dist2).exp();
                    // Re(w_i w̄_j)
                    total += (ws[i].0 * ws[j].0 + ws[i].1 * ws[j].1) * g;
                }
            }
        }
    }
    T::lit((total.max(0.0) / r.powi(d as i32)).sqrt())
}

/// Norms and ratio of one measure at one scale.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport<T: Scalar> {
    pub label: String,
    pub dim: usize,
    pub scale_r: T,
    pub x1: T,
    pub x2: T,
    pub xinf: T,
    /// `X_1 / X_2` divided by the point-mass value, so that a point mass has `FR = 1`.
    pub fr: T,
    /// `X_1 / X_2` without normalization.
    pub fr_raw: T,
    /// `|X_2 − X_2^{Parseval}| / X_2^{Parseval}`; `None` for non-gaussian mollifiers.
    pub quadrature_error_estimate: Option<T>,
    pub nodes: usize,
    pub scattered: bool,
}

impl<T: Scalar> RatioReport<T> {
    pub fn csv_header() -> &'static str {
        "label,d,R,X1,X2,Xinf,FR,quad_err"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e}",
            self.label,
            self.dim,
            self.scale_r,
            self.x1,
            self.x2,
            self.xinf,
            self.fr,
            self.quadrature_error_estimate
                .map(|q| q.to_f64_lossy())
                .unwrap_or(f64::NAN)
        )
    }

    /// `‖ĝ‖₁ = R^d X_1`.
    pub fn ghat_l1(&self) -> T {
        self.x1 * self.scale_r.powi(self.dim as i32)
    }

    /// `‖g‖₂² = R^d X_2²`.
    pub fn g_l2_sq(&self) -> T {
        self.x2 * self.x2 * self.scale_r.powi(self.dim as i32)
    }

    /// Relative slack for bound checks: the quadrature estimate, or `10⁻³` when unavailable.
    pub fn tolerance(&self) -> T {
        self.quadrature_error_estimate.unwrap_or(T::lit(1e-3))
    }
}

/// Builds the report for an already transformed field.
pub fn report_from_field<T: Scalar>(
    measure: &AtomicMeasure<T>,
    field: &SpectralField<T>,
) -> Result<RatioReport<T>> {
    let x1 = x_norm(field, 1.0)?;
    let x2 = x_norm(field, 2.0)?;
    let xinf = x_norm(field, f64::INFINITY)?;
    if !(x2 > T::zero()) {
        return Err(Error::Degenerate("X_2 vanishes".into()));
    }
    let fr_raw = x1 / x2;
    let quad = match field.mollifier.kind {
        MollifierKind::Gaussian => {
            let oracle = parseval_x2(measure, field.scale_r);
            Some((x2 - oracle).abs() / oracle.max(T::tiny()))
        }
        MollifierKind::Bump => None,
    };
    Ok(RatioReport {
        label: measure.label().to_string(),
        dim: measure.dim(),
        scale_r: field.scale_r,
        x1,
        x2,
        xinf,
        fr: fr_raw / field.mollifier.point_mass_ratio(),
        fr_raw,
        quadrature_error_estimate: quad,
        nodes: field.nodes.len(),
        scattered: !field.nodes.is_grid(),
    })
}

/// Report and field for `measure` at scale `R`.
pub fn analyze<T: Scalar>(
    measure: &AtomicMeasure<T>,
    scale: T,
    mollifier: &Mollifier<T>,
    policy: &GridPolicy<T>,
) -> Result<(RatioReport<T>, SpectralField<T>)> {
    if !(scale >= T::one()) {
        return Err(invalid("R", "must be at least 1"));
    }
    let nodes = policy.nodes(measure, scale)?;
    let field = transform(measure, scale, &nodes, mollifier)?;
    let report = report_from_field(measure, &field)?;
    Ok((report, field))
}

/// `FR_{μ,R}(f)` with its norms.
pub fn fourier_ratio<T: Scalar>(
    measure: &AtomicMeasure<T>,
    scale: T,
    mollifier: &Mollifier<T>,
    policy: &GridPolicy<T>,
) -> Result<RatioReport<T>> {
    analyze(measure, scale, mollifier, policy).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{make_circle_arc, make_sphere_measure};

    fn point() -> AtomicMeasure<f64> {
        AtomicMeasure::point_mass(2).unwrap()
    }

    #[test]
    fn point_mass_field_is_gaussian() {
        let r = 8.0;
        let g = FrequencyGrid::new(2, 4.0 * r, 64).unwrap();
        let f = transform(&point(), r, &NodeSet::Grid(g.clone()), &Mollifier::gaussian(2)).unwrap();
        let mut xi = [0.0; 2];
        for k in 0..g.len() {
            g.node_into(k, &mut xi);
            let expect = (-std::f64::consts::PI * (xi[0] * xi[0] + xi[1] * xi[1]) / (r * r)).exp();
            assert!((f.values[k].re - expect).abs() < 1e-14);
            assert!(f.values[k].im.abs() < 1e-14);
        }
    }

    #[test]
    fn translation_keeps_modulus() {
        let r = 4.0;
        let g = NodeSet::Grid(FrequencyGrid::new(2, 16.0, 32).unwrap());
        let moll = Mollifier::gaussian(2);
        let a = transform(&point(), r, &g, &moll).unwrap();
        let b = transform(&point().translated(&[0.3, -1.7]).unwrap(), r, &g, &moll).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u.norm() - v.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pair_gives_cosine() {
        let r = 4.0;
        let m = AtomicMeasure::from_real(2, vec![0.5, 0.0, -0.5, 0.0], vec![0.5, 0.5], "pair").unwrap();
        let g = FrequencyGrid::new(2, 16.0, 48).unwrap();
        let f = transform(&m, r, &NodeSet::Grid(g.clone()), &Mollifier::gaussian(2)).unwrap();
        let mut xi = [0.0; 2];
        for k in 0..g.len() {
            g.node_into(k, &mut xi);
            let (t, s) = (xi[0], xi[1]);
            let expect = (std::f64::consts::PI * t).cos()
                * (-std::f64::consts::PI * (t * t + s * s) / (r * r)).exp();
            assert!((f.values[k] - Complex::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn separable_kernel_matches_direct_sum() {
        for d in 1..=3 {
            let n = 37;
            let pts: Vec<f64> = (0..n * d).map(|k| ((k * 7919) % 1000) as f64 / 1000.0).collect();
            let ws: Vec<Complex<f64>> = (0..n)
                .map(|k| Complex::new(1.0 + k as f64 * 0.01, 0.3 - 0.02 * k as f64))
                .collect();
            let m = AtomicMeasure::new(d, pts, ws, "mix").unwrap();
            let g = FrequencyGrid::new(d, 12.0, 16).unwrap();
            let fast = grid_sums(&m, &g);
            let slow = direct_sums(&m, &NodeSet::Grid(g));
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10, "d={d}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_weights() {
        let m = make_circle_arc::<f64>(4.0, 0.5, 64).unwrap();
        let g = FrequencyGrid::new(2, 16.0, 32).unwrap();
        let f = transform(&m, 4.0, &NodeSet::Grid(g.clone()), &Mollifier::gaussian(2)).unwrap();
        for k in 0..g.len() {
            assert!((f.values[g.mirror(k)] - f.values[k].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn branchless_sincos_matches_libm() {
        let magic = 1.5 / f64::EPSILON;
        let sc = SIN_TAYLOR;
        let cc = COS_TAYLOR;
        for k in 0..200_000 {
            let t = k as f64 * 0.012_345_7 - 1234.5;
            let (s, c) = sincos_turns(t, magic, &sc, &cc);
            let th = std::f64::consts::TAU * (t - t.round());
            assert!((s - th.sin()).abs() < 2e-15 && (c - th.cos()).abs() < 2e-15, "t={t}");
        }
        let (s, c) = sincos_turns(0.25f32, 1.5 / f32::EPSILON, &SIN_TAYLOR.map(|v| v as f32), &COS_TAYLOR.map(|v| v as f32));
        assert!((s - 1.0).abs() < 1e-6 && c.abs() < 1e-6);
    }

    #[test]
    fn point_mass_norms_in_closed_form() {
        for d in 1..=3 {
            let m = AtomicMeasure::<f64>::point_mass(d).unwrap();
            let r = 16.0;
            // coarser oversampling keeps d = 3 on a full grid
            let policy = GridPolicy {
                oversample: 2.0,
                ..GridPolicy::default()
            };
            let rep = fourier_ratio(&m, r, &Mollifier::gaussian(d), &policy).unwrap();
            assert!(!rep.scattered);
            assert!((rep.x1 - 1.0).abs() < 1e-6, "d={d} x1={}", rep.x1);
            assert!((rep.x2 - 2f64.powf(-(d as f64) / 4.0)).abs() < 1e-6);
            assert!((rep.fr - 1.0).abs() < 1e-6);
            assert!((rep.fr_raw - 2f64.powf(d as f64 / 4.0)).abs() < 1e-6);
            assert!(rep.xinf <= 1.0 && rep.xinf > 0.95);
        }
    }

    #[test]
    fn zero_field_norms_vanish() {
        let g = FrequencyGrid::new(1, 8.0, 16).unwrap();
        let f = SpectralField {
            nodes: NodeSet::Grid(g),
            values: vec![Complex::new(0.0, 0.0); 16],
            scale_r: 2.0,
            mollifier: Mollifier::gaussian(1),
        };
        for p in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(x_norm(&f, p).unwrap(), 0.0);
        }
        assert!(x_norm(&f, 3.0).is_err());
    }

    #[test]
    fn grid_too_small_and_dimension_mismatch() {
        let g = NodeSet::Grid(FrequencyGrid::new(2, 10.0, 16).unwrap());
        let moll = Mollifier::gaussian(2);
        assert!(matches!(transform(&point(), 8.0, &g, &moll), Err(Error::GridTooSmall { .. })));
        let g3 = NodeSet::Grid(FrequencyGrid::new(3, 40.0, 16).unwrap());
        assert!(matches!(
            transform(&point(), 8.0, &g3, &moll),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn parseval_oracle_matches_grid() {
        let m = make_circle_arc::<f64>(8.0, 1.0, 128).unwrap();
        let rep = fourier_ratio(&m, 8.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        assert!(rep.quadrature_error_estimate.unwrap() < 1e-8);
        assert!(rep.fr <= 1.0 + rep.tolerance());
    }

    #[test]
    fn scattered_nodes_estimate_the_same_norms() {
        let m = make_sphere_measure::<f64>(2, 256).unwrap();
        let moll = Mollifier::gaussian(2);
        let exact = fourier_ratio(&m, 8.0, &moll, &GridPolicy::default()).unwrap();
        let policy = GridPolicy {
            max_nodes: 16,
            scattered_nodes: 1 << 16,
            ..GridPolicy::default()
        };
        let mc = fourier_ratio(&m, 8.0, &moll, &policy).unwrap();
        assert!(mc.scattered);
        assert!((mc.x1 / exact.x1 - 1.0).abs() < 0.03, "{} {}", mc.x1, exact.x1);
        assert!((mc.x2 / exact.x2 - 1.0).abs() < 0.03, "{} {}", mc.x2, exact.x2);
    }

    #[test]
    fn bump_mollifier_ratio_is_normalized_for_a_point_mass() {
        let moll = Mollifier::<f64>::bump(1).unwrap();
        let m = AtomicMeasure::point_mass(1).unwrap();
        let policy = GridPolicy {
            cutoff: 40.0,
            ..GridPolicy::default()
        };
        let rep = fourier_ratio(&m, 4.0, &moll, &policy).unwrap();
        assert!(rep.quadrature_error_estimate.is_none());
        assert!((rep.fr - 1.0).abs() < 1e-3, "fr={}", rep.fr);
    }

    #[test]
    fn f32_engine_agrees_with_f64() {
        let m64 = make_circle_arc::<f64>(8.0, 1.0, 128).unwrap();
        let m32: AtomicMeasure<f32> = m64.cast();
        let a = fourier_ratio(&m64, 8.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let b = fourier_ratio(&m32, 8.0f32, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        assert!((a.fr - b.fr as f64).abs() < 1e-3);
    }
}
