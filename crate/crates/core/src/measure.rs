//! Weighted atomic measures, mollifiers, convex bodies and the measure
//! generators used throughout the experiments.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// A finite sum `Σ w_i δ_{x_i}` on `R^d`.
///
/// Points are stored row-major (`points[i*dim..(i+1)*dim]`).  Generators emit
/// nonnegative real weights; the engine itself accepts complex weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure<T: Scalar> {
    dim: usize,
    points: Vec<T>,
    weights: Vec<Complex<T>>,
    bound: T,
    label: String,
}

impl<T: Scalar> AtomicMeasure<T> {
    pub fn new(
        dim: usize,
        points: Vec<T>,
        weights: Vec<Complex<T>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if points.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * weights.len(),
                got: points.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::Degenerate("measure has no atoms".into()));
        }
        if points.iter().any(|p| !p.is_finite()) || weights.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(invalid("atoms", "non-finite coordinate or weight"));
        }
        let bound = points.iter().fold(T::zero(), |b, p| b.max(p.abs()));
        Ok(Self {
            dim,
            points,
            weights,
            bound,
            label: label.into(),
        })
    }

    /// Measure with nonnegative real weights.
    pub fn from_real(
        dim: usize,
        points: Vec<T>,
        weights: Vec<T>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(invalid("weights", "must be nonnegative"));
        }
        let w = weights.into_iter().map(|w| Complex::new(w, T::zero())).collect();
        Self::new(dim, points, w, label)
    }

    /// Unit point mass at the origin of `R^d`.
    pub fn point_mass(dim: usize) -> Result<Self> {
        Self::from_real(dim, vec![T::zero(); dim], vec![T::one()], "point")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[Complex<T>] {
        &self.weights
    }

    /// Half-width `B` of the box `[-B, B]^d` containing every atom.
    pub fn bound(&self) -> T {
        self.bound
    }

    /// `Σ w_i`.
    pub fn total_mass(&self) -> Complex<T> {
        self.weights
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, w| a + w)
    }

    /// `Σ |w_i|`, the total variation.
    pub fn total_variation(&self) -> T {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    pub fn has_real_weights(&self) -> bool {
        self.weights.iter().all(|w| w.im == T::zero())
    }

    /// Per-axis `(min, max)` over the atoms.
    pub fn extents(&self) -> Vec<(T, T)> {
        let mut ext = vec![(T::infinity(), T::neg_infinity()); self.dim];
        for i in 0..self.len() {
            for (e, &x) in ext.iter_mut().zip(self.point(i)) {
                e.0 = e.0.min(x);
                e.1 = e.1.max(x);
            }
        }
        ext
    }

    /// Diagonal of the bounding box, an upper bound for the diameter.
    pub fn diameter_bound(&self) -> T {
        self.extents()
            .iter()
            .map(|(a, b)| (*b - *a) * (*b - *a))
            .sum::<T>()
            .sqrt()
    }

    pub fn translated(&self, shift: &[T]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        let mut points = self.points.clone();
        for chunk in points.chunks_mut(self.dim) {
            for (x, s) in chunk.iter_mut().zip(shift) {
                *x += *s;
            }
        }
        Self::new(self.dim, points, self.weights.clone(), self.label.clone())
    }

    /// Total `|w|` of atoms in the closed ball `B(x, r)`.
    pub fn ball_mass(&self, x: &[T], r: T) -> T {
        let r2 = r * r;
        (0..self.len())
            .filter(|&i| {
                self.point(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (*a - *b) * (*a - *b))
                    .sum::<T>()
                    <= r2
            })
            .map(|i| self.weights[i].norm())
            .sum()
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> AtomicMeasure<U> {
        let cv = |x: T| U::lit(x.to_f64_lossy());
        AtomicMeasure {
            dim: self.dim,
            points: self.points.iter().map(|&x| cv(x)).collect(),
            weights: self
                .weights
                .iter()
                .map(|w| Complex::new(cv(w.re), cv(w.im)))
                .collect(),
            bound: cv(self.bound),
            label: self.label.clone(),
        }
    }
}

/// Mollifier family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MollifierKind {
    /// `ψ(x) = exp(-π|x|²)`, `ψ̂(u) = exp(-π|u|²)`.
    #[default]
    Gaussian,
    /// `ψ(x) = c·exp(-1/(1-|x|²))` on the unit ball.
    Bump,
}

/// A normalized mollifier `ψ` with `∫ψ = 1`; `ψ_δ(x) = δ^{-d} ψ(x/δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier<T: Scalar> {
    pub kind: MollifierKind,
    dim: usize,
    /// Constant making `∫ψ = 1` in dimension `dim`.
    pub normalization: T,
}

impl<T: Scalar> Mollifier<T> {
    pub fn gaussian(dim: usize) -> Self {
        Self {
            kind: MollifierKind::Gaussian,
            dim,
            normalization: T::one(),
        }
    }

    pub fn bump(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Unsupported(format!("bump mollifier in dimension {dim}")));
        }
        let gl = gauss_legendre(256);
        let shell = sphere_area(dim);
        let mut s = 0.0;
        for &(t, w) in &gl {
            s += w * bump_profile(t) * t.powi(dim as i32 - 1);
        }
        Ok(Self {
            kind: MollifierKind::Bump,
            dim,
            normalization: T::lit(1.0 / (shell * s)),
        })
    }

    pub fn new(kind: MollifierKind, dim: usize) -> Result<Self> {
        match kind {
            MollifierKind::Gaussian => Ok(Self::gaussian(dim)),
            MollifierKind::Bump => Self::bump(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `ψ(x)`.
    pub fn spatial(&self, x: &[T]) -> T {
        let r2: T = x.iter().map(|v| *v * *v).sum();
        match self.kind {
            MollifierKind::Gaussian => (-T::PI() * r2).exp(),
            MollifierKind::Bump => {
                if r2 >= T::one() {
                    T::zero()
                } else {
                    self.normalization * (-(T::one() / (T::one() - r2))).exp()
                }
            }
        }
    }

    /// `ψ̂` as a function of `|u|`.
    pub fn hat_radial(&self, r: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => (-T::PI() * r * r).exp(),
            MollifierKind::Bump => T::lit(bump_hat(self.dim, self.normalization.to_f64_lossy(), r.to_f64_lossy())),
        }
    }

    /// `ψ̂(u)`.
    pub fn hat(&self, u: &[T]) -> T {
        let r2: T = u.iter().map(|v| *v * *v).sum();
        match self.kind {
            MollifierKind::Gaussian => (-T::PI() * r2).exp(),
            MollifierKind::Bump => self.hat_radial(r2.sqrt()),
        }
    }

    /// `∫ψ̂² = ∫ψ²`.
    pub fn l2_norm_sq(&self) -> T {
        match self.kind {
            MollifierKind::Gaussian => T::lit(2f64.powf(-(self.dim as f64) / 2.0)),
            MollifierKind::Bump => {
                let c = self.normalization.to_f64_lossy();
                let gl = gauss_legendre(256);
                let s: f64 = gl
                    .iter()
                    .map(|&(t, w)| w * (c * bump_profile(t)).powi(2) * t.powi(self.dim as i32 - 1))
                    .sum();
                T::lit(sphere_area(self.dim) * s)
            }
        }
    }

    /// `∫|ψ̂|`; equals `ψ(0)` when `ψ̂ ≥ 0`.
    pub fn hat_l1_norm(&self) -> T {
        match self.kind {
            MollifierKind::Gaussian => T::one(),
            MollifierKind::Bump => {
                // |ψ̂(r)| < 1e-10 beyond r = 60; trapezoid over the kinks of |ψ̂|
                let c = self.normalization.to_f64_lossy();
                let step = 0.01;
                let n = (60.0 / step) as usize;
                let s: f64 = (1..=n)
                    .map(|k| {
                        let r = k as f64 * step;
                        let w = if k == n { 0.5 } else { 1.0 };
                        w * bump_hat(self.dim, c, r).abs() * r.powi(self.dim as i32 - 1)
                    })
                    .sum();
                let origin = if self.dim == 1 { 0.5 * bump_hat(1, c, 0.0) } else { 0.0 };
                T::lit(sphere_area(self.dim) * step * (s + origin))
            }
        }
    }

    /// Raw ratio `X_1/X_2` of a unit point mass: `‖ψ̂‖₁/‖ψ‖₂`.
    ///
    /// Reported Fourier ratios are divided by this constant so that a point
    /// mass has ratio exactly 1, the maximum allowed by Cauchy-Schwarz.
    pub fn point_mass_ratio(&self) -> T {
        self.hat_l1_norm() / self.l2_norm_sq().sqrt()
    }
}

fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => f64::NAN,
    }
}

fn bump_profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

fn bessel_j0(z: f64) -> f64 {
    // power series for |z| < 8, Hankel asymptotics beyond (|err| < 1e-8)
    let ax = z.abs();
    if ax < 8.0 {
        let q = -0.25 * z * z;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..60 {
            term *= q / (k * k) as f64;
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        sum
    } else {
        let t = 8.0 / ax;
        let y = t * t;
        let xx = ax - 0.785398164;
        let p = 1.0 + y * (-0.1098628627e-2 + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let q = -0.1562499995e-1 + y * (0.1430488765e-3 + y * (-0.6911147651e-5 + y * (0.7621095161e-6 - y * 0.934935152e-7)));
        (0.636619772 / ax).sqrt() * (xx.cos() * p - t * xx.sin() * q)
    }
}

fn bump_hat(dim: usize, c: f64, r: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let nodes = (64 + (8.0 * r) as usize).next_power_of_two().min(2048);
    let gl = cached_gauss_legendre(nodes);
    let mut s = 0.0;
    for &(t, w) in gl.iter() {
        let p = c * bump_profile(t);
        let k = two_pi * r * t;
        s += w
            * p
            * match dim {
                1 => 2.0 * k.cos(),
                2 => two_pi * t * bessel_j0(k),
                _ => {
                    let sinc = if k.abs() < 1e-8 { 1.0 } else { k.sin() / k };
                    4.0 * std::f64::consts::PI * t * t * sinc
                }
            };
    }
    s
}

fn cached_gauss_legendre(n: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n).or_insert_with(|| Arc::new(gauss_legendre(n))).clone()
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

/// Planar convex body: a counterclockwise polygon or a disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexBody2D<T: Scalar> {
    Polygon { vertices: Vec<[T; 2]> },
    Disk { center: [T; 2], radius: T },
}

impl<T: Scalar> ConvexBody2D<T> {
    /// Validated polygon (convex, counterclockwise, no three collinear).
    pub fn polygon(vertices: Vec<[T; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(invalid("vertices", "a polygon needs at least 3 vertices"));
        }
        let eps = T::lit(1e-12);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross <= eps {
                return Err(invalid(
                    "vertices",
                    "polygon must be strictly convex and counterclockwise",
                ));
            }
        }
        // winding number one: the turning angles sum to 2π
        let mut turn = T::zero();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let t1 = (b[1] - a[1]).atan2(b[0] - a[0]);
            let t2 = (c[1] - b[1]).atan2(c[0] - b[0]);
            let mut d = t2 - t1;
            while d <= -T::PI() {
                d += T::TAU();
            }
            while d > T::PI() {
                d -= T::TAU();
            }
            turn += d;
        }
        if (turn - T::TAU()).abs() > T::lit(1e-6) {
            return Err(invalid("vertices", "polygon winds more than once"));
        }
        Ok(Self::Polygon { vertices })
    }

    pub fn disk(center: [T; 2], radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(invalid("radius", "must be positive"));
        }
        Ok(Self::Disk { center, radius })
    }

    /// `[0,1]²`.
    pub fn unit_square() -> Self {
        let (z, o) = (T::zero(), T::one());
        Self::Polygon {
            vertices: vec![[z, z], [o, z], [o, o], [z, o]],
        }
    }

    /// Regular `n`-gon inscribed in the unit circle, first vertex at angle 0.
    pub fn regular_polygon(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid("n", "a polygon needs at least 3 vertices"));
        }
        let v = (0..n)
            .map(|k| {
                let a = T::TAU() * T::of_usize(k) / T::of_usize(n);
                [a.cos(), a.sin()]
            })
            .collect();
        Self::polygon(v)
    }

    /// Polygon inscribed in the unit circle whose vertices accumulate
    /// geometrically at angle 0 (`θ_j = π·2^{-j}` for `j = 0..levels`, mirrored).
    pub fn lacunary_polygon(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(invalid("levels", "need at least 2 levels"));
        }
        let mut angles: Vec<T> = Vec::new();
        for j in 0..levels {
            let a = T::PI() * T::lit(2f64.powi(-(j as i32)));
            angles.push(a);
            if j > 0 {
                angles.push(T::TAU() - a);
            }
        }
        angles.push(T::zero());
        angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        angles.dedup_by(|a, b| (*a - *b).abs() < T::lit(1e-14));
        let v = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
        Self::polygon(v)
    }

    pub fn vertices(&self) -> Option<&[[T; 2]]> {
        match self {
            Self::Polygon { vertices } => Some(vertices),
            Self::Disk { .. } => None,
        }
    }

    pub fn perimeter(&self) -> T {
        match self {
            Self::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .sum()
            }
            Self::Disk { radius, .. } => T::TAU() * *radius,
        }
    }

    pub fn area(&self) -> T {
        match self {
            Self::Polygon { vertices } => {
                let n = vertices.len();
                let s: T = (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum();
                s / T::lit(2.0)
            }
            Self::Disk { radius, .. } => T::PI() * *radius * *radius,
        }
    }
}

/// Atoms equally spaced on the arc `|θ| ≤ arc_len/2` of the unit circle,
/// each of weight `arc_len / n_atoms`.
pub fn make_circle_arc<T: Scalar>(r: T, arc_len: T, n_atoms: usize) -> Result<AtomicMeasure<T>> {
    if !(r >= T::one()) {
        return Err(invalid("R", "must be at least 1"));
    }
    if !(arc_len > T::zero() && arc_len <= T::TAU() * (T::one() + T::epsilon())) {
        return Err(invalid("arc_len", "must lie in (0, 2π]"));
    }
    if n_atoms < 64 {
        return Err(invalid("n_atoms", "at least 64 atoms are required"));
    }
    let need = (T::lit(8.0) * r * arc_len).ceil();
    if T::of_usize(n_atoms) < need {
        return Err(invalid(
            "n_atoms",
            format!("{n_atoms} atoms alias frequencies near 2R; need at least {need}"),
        ));
    }
    let w = arc_len / T::of_usize(n_atoms);
    let half = arc_len / T::lit(2.0);
    let mut pts = Vec::with_capacity(2 * n_atoms);
    for j in 0..n_atoms {
        let th = -half + (T::of_usize(j) + T::lit(0.5)) * w;
        pts.push(th.cos());
        pts.push(th.sin());
    }
    AtomicMeasure::from_real(2, pts, vec![w; n_atoms], "arc")
}

/// Arc-length measure on the boundary of a polygon (or circle for a disk).
///
/// Each edge receives a share of the atoms proportional to its length; atoms
/// sit at the midpoints of equal sub-segments.
pub fn make_polygon_boundary<T: Scalar>(
    body: &ConvexBody2D<T>,
    n_atoms: usize,
) -> Result<AtomicMeasure<T>> {
    match body {
        ConvexBody2D::Disk { center, radius } => {
            if n_atoms < 64 {
                return Err(invalid("n_atoms", "at least 64 atoms are required"));
            }
            let w = T::TAU() * *radius / T::of_usize(n_atoms);
            let mut pts = Vec::with_capacity(2 * n_atoms);
            for j in 0..n_atoms {
                let th = T::TAU() * T::of_usize(j) / T::of_usize(n_atoms);
                pts.push(center[0] + *radius * th.cos());
                pts.push(center[1] + *radius * th.sin());
            }
            AtomicMeasure::from_real(2, pts, vec![w; n_atoms], "disk")
        }
        ConvexBody2D::Polygon { vertices } => {
            let nv = vertices.len();
            if n_atoms < 4 * nv {
                return Err(invalid(
                    "n_atoms",
                    format!("need at least 4 atoms per vertex ({})", 4 * nv),
                ));
            }
            let perim = body.perimeter();
            if !(perim > T::zero()) {
                return Err(Error::Degenerate("polygon has zero perimeter".into()));
            }
            let lens: Vec<T> = (0..nv)
                .map(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % nv];
                    (b[0] - a[0]).hypot(b[1] - a[1])
                })
                .collect();
            // largest-remainder apportionment, at least one atom per edge
            let exact: Vec<f64> = lens
                .iter()
                .map(|l| (*l / perim).to_f64_lossy() * n_atoms as f64)
                .collect();
            let mut counts: Vec<usize> = exact.iter().map(|e| (e.floor() as usize).max(1)).collect();
            let mut assigned: usize = counts.iter().sum();
            let mut order: Vec<usize> = (0..nv).collect();
            order.sort_by(|&a, &b| {
                let ra = exact[a] - exact[a].floor();
                let rb = exact[b] - exact[b].floor();
                rb.total_cmp(&ra).then(a.cmp(&b))
            });
            let mut k = 0;
            while assigned < n_atoms {
                counts[order[k % nv]] += 1;
                assigned += 1;
                k += 1;
            }
            while assigned > n_atoms {
                let i = (0..nv).max_by_key(|&i| counts[i]).expect("nonempty");
                counts[i] -= 1;
                assigned -= 1;
            }
            let mut pts = Vec::with_capacity(2 * n_atoms);
            let mut ws = Vec::with_capacity(n_atoms);
            for i in 0..nv {
                let a = vertices[i];
                let b = vertices[(i + 1) % nv];
                let m = counts[i];
                for j in 0..m {
                    let t = (T::of_usize(j) + T::lit(0.5)) / T::of_usize(m);
                    pts.push(a[0] + t * (b[0] - a[0]));
                    pts.push(a[1] + t * (b[1] - a[1]));
                    ws.push(lens[i] / T::of_usize(m));
                }
            }
            AtomicMeasure::from_real(2, pts, ws, "polygon")
        }
    }
}

/// Random Cantor set in `[0,1]²`: each stage splits every kept square into
/// `branching²` subsquares and keeps `branching` of them uniformly at random.
pub fn make_random_cantor<T: Scalar>(
    stages: usize,
    branching: usize,
    seed: u64,
) -> Result<AtomicMeasure<T>> {
    if !(1..=8).contains(&stages) {
        return Err(invalid("stages", "must lie in [1, 8]"));
    }
    if !(2..=8).contains(&branching) {
        return Err(invalid("branching", "must lie in [2, 8]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = branching;
    let mut cells: Vec<(u64, u64)> = vec![(0, 0)];
    for _ in 0..stages {
        let mut next = Vec::with_capacity(cells.len() * b);
        for &(i, j) in &cells {
            let mut picks = index::sample(&mut rng, b * b, b).into_vec();
            picks.sort_unstable();
            for p in picks {
                next.push((i * b as u64 + (p / b) as u64, j * b as u64 + (p % b) as u64));
            }
        }
        cells = next;
    }
    let side = T::of_usize(b).powi(stages as i32);
    let n = cells.len();
    let mut pts = Vec::with_capacity(2 * n);
    for &(i, j) in &cells {
        pts.push((T::lit(i as f64) + T::lit(0.5)) / side);
        pts.push((T::lit(j as f64) + T::lit(0.5)) / side);
    }
    AtomicMeasure::from_real(2, pts, vec![T::one() / T::of_usize(n); n], "cantor")
}

/// Surface measure on the unit sphere `S^{d-1}`, `d ∈ {2, 3}`.
pub fn make_sphere_measure<T: Scalar>(d: usize, n_atoms: usize) -> Result<AtomicMeasure<T>> {
    if n_atoms < 128 {
        return Err(invalid("n_atoms", "at least 128 atoms are required"));
    }
    let n = T::of_usize(n_atoms);
    match d {
        2 => {
            let body = ConvexBody2D::disk([T::zero(), T::zero()], T::one())?;
            Ok(make_polygon_boundary(&body, n_atoms)?.with_label("sphere2"))
        }
        3 => {
            let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
            let mut pts = Vec::with_capacity(3 * n_atoms);
            for j in 0..n_atoms {
                let z = T::one() - (T::lit(2.0) * T::of_usize(j) + T::one()) / n;
                let rho = (T::one() - z * z).max(T::zero()).sqrt();
                let phi = golden * T::of_usize(j);
                pts.push(rho * phi.cos());
                pts.push(rho * phi.sin());
                pts.push(z);
            }
            let w = T::lit(4.0) * T::PI() / n;
            AtomicMeasure::from_real(3, pts, vec![w; n_atoms], "sphere3")
        }
        _ => Err(Error::Unsupported(format!("sphere measure in dimension {d}"))),
    }
}

/// Uniform measure on `[0,1]^k × {0}^{d-k}` by a midpoint grid of `m^k` atoms,
/// `m = round(n_atoms^{1/k})`.
pub fn make_kplane_measure<T: Scalar>(d: usize, k: usize, n_atoms: usize) -> Result<AtomicMeasure<T>> {
    if d < 2 || k < 1 || k >= d {
        return Err(invalid("k", format!("need 1 ≤ k ≤ d-1, got k={k}, d={d}")));
    }
    let m = (n_atoms as f64).powf(1.0 / k as f64).round().max(1.0) as usize;
    let total = m.pow(k as u32);
    let mut pts = Vec::with_capacity(d * total);
    let mut idx = vec![0usize; k];
    for _ in 0..total {
        for a in 0..d {
            if a < k {
                pts.push((T::of_usize(idx[a]) + T::lit(0.5)) / T::of_usize(m));
            } else {
                pts.push(T::zero());
            }
        }
        for a in 0..k {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
    AtomicMeasure::from_real(d, pts, vec![T::one() / T::of_usize(total); total], "kplane")
}

/// Named measure recipe, as it appears in experiment configs under `"measure"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Point {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    CircleArc {
        #[serde(rename = "R")]
        r: f64,
        arc_len: f64,
        n_atoms: usize,
    },
    Polygon {
        #[serde(default)]
        vertices: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        regular: Option<usize>,
        n_atoms: usize,
    },
    Disk {
        #[serde(default = "default_radius")]
        radius: f64,
        n_atoms: usize,
    },
    RandomCantor {
        stages: usize,
        branching: usize,
        #[serde(default)]
        seed: u64,
    },
    Sphere {
        dim: usize,
        n_atoms: usize,
    },
    Kplane {
        dim: usize,
        k: usize,
        n_atoms: usize,
    },
}

fn default_dim() -> usize {
    2
}

fn default_radius() -> f64 {
    1.0
}

impl MeasureSpec {
    pub fn build<T: Scalar>(&self) -> Result<AtomicMeasure<T>> {
        match self {
            Self::Point { dim } => AtomicMeasure::point_mass(*dim),
            Self::CircleArc { r, arc_len, n_atoms } => {
                make_circle_arc(T::lit(*r), T::lit(*arc_len), *n_atoms)
            }
            Self::Polygon {
                vertices,
                regular,
                n_atoms,
            } => {
                let body = match (vertices, regular) {
                    (Some(v), None) => ConvexBody2D::polygon(
                        v.iter().map(|p| [T::lit(p[0]), T::lit(p[1])]).collect(),
                    )?,
                    (None, Some(n)) => ConvexBody2D::regular_polygon(*n)?,
                    (None, None) => ConvexBody2D::unit_square(),
                    (Some(_), Some(_)) => {
                        return Err(invalid("polygon", "give either `vertices` or `regular`"))
                    }
                };
                make_polygon_boundary(&body, *n_atoms)
            }
            Self::Disk { radius, n_atoms } => {
                let body = ConvexBody2D::disk([T::zero(), T::zero()], T::lit(*radius))?;
                make_polygon_boundary(&body, *n_atoms)
            }
            Self::RandomCantor {
                stages,
                branching,
                seed,
            } => make_random_cantor(*stages, *branching, *seed),
            Self::Sphere { dim, n_atoms } => make_sphere_measure(*dim, *n_atoms),
            Self::Kplane { dim, k, n_atoms } => make_kplane_measure(*dim, *k, *n_atoms),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn full_circle_arc_has_circumference_mass() {
        let m = make_circle_arc::<f64>(1.0, std::f64::consts::TAU, 256).unwrap();
        assert!(close(m.total_mass().re, std::f64::consts::TAU, 1e-12));
        for i in 0..m.len() {
            let p = m.point(i);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn short_arc_mass_and_span() {
        let m = make_circle_arc::<f64>(16.0, 0.25, 256).unwrap();
        assert_eq!(m.len(), 256);
        assert!(close(m.total_mass().re, 0.25, 1e-12));
        let angles: Vec<f64> = (0..m.len()).map(|i| m.point(i)[1].atan2(m.point(i)[0])).collect();
        let span = angles.iter().cloned().fold(f64::MIN, f64::max)
            - angles.iter().cloned().fold(f64::MAX, f64::min);
        assert!(span < 0.25 && span > 0.25 * (1.0 - 2.0 / 256.0));
    }

    #[test]
    fn arc_aliasing_guard() {
        assert!(make_circle_arc::<f64>(256.0, 1.0, 1024).is_err());
        assert!(make_circle_arc::<f64>(256.0, 1.0, 2048).is_ok());
        assert!(make_circle_arc::<f64>(1.0, 0.1, 32).is_err());
    }

    #[test]
    fn unit_square_boundary() {
        let m = make_polygon_boundary(&ConvexBody2D::<f64>::unit_square(), 400).unwrap();
        assert!(close(m.total_mass().re, 4.0, 1e-12));
        let bottom = (0..m.len()).filter(|&i| m.point(i)[1] == 0.0).count();
        assert_eq!(bottom, 100);
    }

    #[test]
    fn hexagon_boundary_mass() {
        let hex = ConvexBody2D::<f64>::regular_polygon(6).unwrap();
        let m = make_polygon_boundary(&hex, 600).unwrap();
        assert!(close(m.total_mass().re, 6.0, 1e-12));
    }

    #[test]
    fn polygon_validation() {
        let cw = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        assert!(ConvexBody2D::<f64>::polygon(cw).is_err());
        let collinear = vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0]];
        assert!(ConvexBody2D::<f64>::polygon(collinear).is_err());
        assert!(ConvexBody2D::<f64>::lacunary_polygon(6).is_ok());
    }

    #[test]
    fn cantor_counts_and_determinism() {
        let m = make_random_cantor::<f64>(1, 2, 7).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.weights().iter().all(|w| w.re == 0.5));
        let a = make_random_cantor::<f64>(4, 4, 1).unwrap();
        let b = make_random_cantor::<f64>(4, 4, 1).unwrap();
        assert_eq!(a.len(), 256);
        assert_eq!(a, b);
        assert!(close(a.total_mass().re, 1.0, 1e-12));
        assert!(a.points().iter().all(|x| *x > 0.0 && *x < 1.0));
        assert!(make_random_cantor::<f64>(9, 2, 0).is_err());
        assert!(make_random_cantor::<f64>(2, 9, 0).is_err());
    }

    #[test]
    fn sphere_measures() {
        let c = make_sphere_measure::<f64>(2, 512).unwrap();
        assert!(close(c.total_mass().re, std::f64::consts::TAU, 1e-12));
        let s = make_sphere_measure::<f64>(3, 1024).unwrap();
        assert!(close(s.total_mass().re, 4.0 * std::f64::consts::PI, 1e-12));
        let limit = 3.0 * (4.0 * std::f64::consts::PI / 1024.0).sqrt();
        for i in 0..s.len() {
            let p = s.point(i);
            let nn = (0..s.len())
                .filter(|&j| j != i)
                .map(|j| {
                    let q = s.point(j);
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
                })
                .fold(f64::MAX, f64::min);
            assert!(nn <= limit);
        }
        assert!(make_sphere_measure::<f64>(4, 256).is_err());
    }

    #[test]
    fn kplane_grid() {
        let seg = make_kplane_measure::<f64>(2, 1, 256).unwrap();
        assert_eq!(seg.len(), 256);
        assert!((0..seg.len()).all(|i| seg.point(i)[1] == 0.0));
        let sq = make_kplane_measure::<f64>(3, 2, 1024).unwrap();
        assert_eq!(sq.len(), 1024);
        assert!((0..sq.len()).all(|i| sq.point(i)[2] == 0.0));
        assert!(close(sq.total_mass().re, 1.0, 1e-12));
        assert!(make_kplane_measure::<f64>(2, 2, 16).is_err());
    }

    #[test]
    fn mollifier_transforms() {
        let g = Mollifier::<f64>::gaussian(2);
        assert_eq!(g.hat(&[0.0, 0.0]), 1.0);
        assert!((g.hat(&[1.0, 0.0]) - 0.043_213_918_263_772_25).abs() < 1e-15);
        assert!((g.point_mass_ratio() - 2f64.sqrt()).abs() < 1e-14);
        for d in 1..=3 {
            let b = Mollifier::<f64>::bump(d).unwrap();
            assert!((b.hat_radial(0.0) - 1.0).abs() < 1e-10, "d={d}");
            assert_eq!(b.spatial(&vec![1.0; d]), 0.0);
            for u in [4.0, 8.0, 16.0] {
                assert!(b.hat_radial(u).abs() <= 10.0 * u.powi(-4), "d={d} u={u}");
            }
        }
    }

    #[test]
    fn bessel_j0_reference_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-8);
        assert!(bessel_j0(2.404825557695773).abs() < 1e-8);
        assert!((bessel_j0(10.0) + 0.245935764451348).abs() < 1e-7);
        assert!((bessel_j0(-3.0) + 0.260051954901933).abs() < 1e-8);
    }

    #[test]
    fn bump_hat_l1_exceeds_peak() {
        // ψ̂ changes sign, so ∫|ψ̂| > ψ(0)
        for d in 1..=3 {
            let b = Mollifier::<f64>::bump(d).unwrap();
            let peak = b.spatial(&vec![0.0; d]);
            assert!(b.hat_l1_norm() > peak);
            assert!(b.hat_l1_norm() < 3.0 * peak);
        }
        assert_eq!(Mollifier::<f64>::gaussian(3).hat_l1_norm(), 1.0);
    }

    #[test]
    fn bump_hat_matches_direct_quadrature_in_1d() {
        let b = Mollifier::<f64>::bump(1).unwrap();
        let n = 20000;
        let u = 0.7;
        let mut s = 0.0;
        for i in 0..n {
            let x = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
            s += b.spatial(&[x]) * (2.0 * std::f64::consts::PI * x * u).cos() * 2.0 / n as f64;
        }
        assert!((b.hat_radial(u) - s).abs() < 1e-8);
    }

    #[test]
    fn measure_spec_round_trip() {
        let spec: MeasureSpec =
            serde_json::from_str(r#"{"kind":"circle_arc","R":256,"arc_len":0.0625,"n_atoms":2048}"#)
                .unwrap();
        let m = spec.build::<f64>().unwrap();
        assert_eq!(m.len(), 2048);
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"kind":"sphere","dim":3,"n_atoms":200,"x":1}"#).is_err());
    }
}
