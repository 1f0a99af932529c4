//! Geometric comparators for the Fourier ratio: covering numbers, frequency
//! sets and L¹ concentration, the sandwich and uncertainty inequalities,
//! normal sets of planar convex bodies, and box-counting dimension.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure::{AtomicMeasure, ConvexBody2D};
use crate::scalar::Scalar;
use crate::spectral::{NodeSet, RatioReport, SpectralField};
use crate::stats;

/// Default relative tolerance of the inequality checks.
pub const CHECK_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringReport {
    pub scale_r: f64,
    pub box_count: usize,
    /// `box_count · R^{-d}`.
    pub neighborhood_volume: f64,
    pub dim: usize,
}

/// Half-open cells `Π [k_a/R, (k_a+1)/R)` containing an atom of nonzero weight.
pub fn covered_cells<T: Scalar>(measure: &AtomicMeasure<T>, scale: T) -> HashSet<Vec<i64>> {
    let d = measure.dim();
    let mut cells = HashSet::new();
    for i in 0..measure.len() {
        if measure.weights()[i].norm() == T::zero() {
            continue;
        }
        let key: Vec<i64> = measure
            .point(i)
            .iter()
            .map(|x| (*x * scale).floor().to_f64_lossy() as i64)
            .collect();
        debug_assert_eq!(key.len(), d);
        cells.insert(key);
    }
    cells
}

pub fn covering_number<T: Scalar>(measure: &AtomicMeasure<T>, scale: T) -> Result<CoveringReport> {
    if !(scale >= T::one()) {
        return Err(invalid("R", "must be at least 1"));
    }
    let count = covered_cells(measure, scale).len();
    let r = scale.to_f64_lossy();
    Ok(CoveringReport {
        scale_r: r,
        box_count: count,
        neighborhood_volume: count as f64 * r.powi(-(measure.dim() as i32)),
        dim: measure.dim(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn same_scale(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
        return Err(Error::ScaleMismatch { left: a, right: b });
    }
    Ok(())
}

/// `(R^d |E^{1/R}|)^{-1/2} ≤ FR`, with relative tolerance [`CHECK_TOL`].
pub fn lower_bound_check<T: Scalar>(report: &RatioReport<T>, cover: &CoveringReport) -> Result<LowerBound> {
    same_scale(report.scale_r.to_f64_lossy(), cover.scale_r)?;
    let rd = cover.scale_r.powi(cover.dim as i32);
    let lhs = (rd * cover.neighborhood_volume).powf(-0.5);
    let rhs = report.fr.to_f64_lossy();
    Ok(LowerBound {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + CHECK_TOL),
    })
}

/// Membership mask over the nodes of a spectral field.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    pub mask: Vec<bool>,
    /// `|X_R| = Σ_{k ∈ X} weight_k` (`count · h^d` on a grid).
    pub volume: f64,
    node_count: usize,
    half_extent: f64,
}

impl FrequencySet {
    pub fn from_predicate<T: Scalar>(nodes: &NodeSet<T>, mut keep: impl FnMut(&[T]) -> bool) -> Self {
        let mut buf = vec![T::zero(); nodes.dim()];
        let mut mask = Vec::with_capacity(nodes.len());
        let mut volume = 0.0;
        for k in 0..nodes.len() {
            nodes.node_into(k, &mut buf);
            let inside = keep(&buf);
            if inside {
                volume += nodes.weight(k).to_f64_lossy();
            }
            mask.push(inside);
        }
        Self {
            mask,
            volume,
            node_count: nodes.len(),
            half_extent: nodes.half_extent().to_f64_lossy(),
        }
    }

    pub fn full<T: Scalar>(nodes: &NodeSet<T>) -> Self {
        Self::from_predicate(nodes, |_| true)
    }

    pub fn empty<T: Scalar>(nodes: &NodeSet<T>) -> Self {
        Self::from_predicate(nodes, |_| false)
    }

    /// `{ r_in ≤ |ξ| ≤ r_out }`.
    pub fn annulus<T: Scalar>(nodes: &NodeSet<T>, r_in: T, r_out: T) -> Self {
        let (a, b) = (r_in * r_in, r_out * r_out);
        Self::from_predicate(nodes, |x| {
            let r2: T = x.iter().map(|v| *v * *v).sum();
            r2 >= a && r2 <= b
        })
    }

    pub fn ball<T: Scalar>(nodes: &NodeSet<T>, radius: T) -> Self {
        Self::annulus(nodes, T::zero(), radius)
    }

    pub fn union<T: Scalar>(&self, other: &Self, nodes: &NodeSet<T>) -> Result<Self> {
        self.check(nodes)?;
        other.check(nodes)?;
        let mut k = 0;
        let (a, b) = (&self.mask, &other.mask);
        Ok(Self::from_predicate(nodes, |_| {
            let r = a[k] || b[k];
            k += 1;
            r
        }))
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    fn check<T: Scalar>(&self, nodes: &NodeSet<T>) -> Result<()> {
        if self.node_count != nodes.len() || self.half_extent != nodes.half_extent().to_f64_lossy() {
            return Err(Error::GridMismatch(format!(
                "set built on {} nodes, field has {}",
                self.node_count,
                nodes.len()
            )));
        }
        Ok(())
    }
}

/// Share of the spectral L¹ mass lying outside `set`.
pub fn concentration_fraction<T: Scalar>(field: &SpectralField<T>, set: &FrequencySet) -> Result<f64> {
    set.check(&field.nodes)?;
    let (mut inside, mut total) = (0.0, 0.0);
    for (k, v) in field.values.iter().enumerate() {
        let m = (v.norm() * field.nodes.weight(k)).to_f64_lossy();
        total += m;
        if set.mask[k] {
            inside += m;
        }
    }
    if total <= 0.0 {
        return Err(Error::Degenerate("field has no L¹ mass".into()));
    }
    Ok(((total - inside) / total).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichResult {
    pub label: String,
    pub scale_r: f64,
    pub lower: f64,
    pub fr: f64,
    pub upper: f64,
    pub eta: f64,
    /// `|E^{1/R}| · |X_R|`.
    pub product: f64,
    /// `(1 − η)²`, which the product must dominate.
    pub uncertainty_rhs: f64,
    pub holds: bool,
}

impl SandwichResult {
    pub fn csv_header() -> &'static str {
        "label,R,lower,FR,upper,eta,product,uncertainty_rhs,holds"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{}",
            self.label,
            self.scale_r,
            self.lower,
            self.fr,
            self.upper,
            self.eta,
            self.product,
            self.uncertainty_rhs,
            self.holds
        )
    }
}

/// `lower ≤ FR ≤ upper` with `upper = (|X_R|/R^d)^{1/2}/(1−η)`, and
/// `(1−η)² ≤ |E^{1/R}|·|X_R|`, each up to [`CHECK_TOL`].
pub fn sandwich_check<T: Scalar>(
    report: &RatioReport<T>,
    cover: &CoveringReport,
    set: &FrequencySet,
    eta: f64,
) -> Result<SandwichResult> {
    same_scale(report.scale_r.to_f64_lossy(), cover.scale_r)?;
    if !(eta < 1.0) || eta < 0.0 {
        return Err(Error::ConcentrationTooLarge(eta));
    }
    let rd = cover.scale_r.powi(cover.dim as i32);
    let lower = (rd * cover.neighborhood_volume).powf(-0.5);
    let fr = report.fr.to_f64_lossy();
    let upper = (set.volume / rd).sqrt() / (1.0 - eta);
    let product = cover.neighborhood_volume * set.volume;
    let uncertainty_rhs = (1.0 - eta).powi(2);
    let holds = lower <= fr * (1.0 + CHECK_TOL)
        && fr <= upper * (1.0 + CHECK_TOL)
        && uncertainty_rhs <= product * (1.0 + CHECK_TOL);
    Ok(SandwichResult {
        label: report.label.clone(),
        scale_r: cover.scale_r,
        lower,
        fr,
        upper,
        eta,
        product,
        uncertainty_rhs,
        holds,
    })
}

/// Box-counting dimension of a set of unit vectors: least-squares slope of
/// `log N(ε)` against `log(1/ε)`, clamped to `[0, d−1]`.
pub fn upper_minkowski_dimension<T: Scalar>(points: &[Vec<T>], scales: &[T]) -> Result<f64> {
    if scales.len() < 3 {
        return Err(Error::TooFewPoints {
            need: 3,
            got: scales.len(),
        });
    }
    let Some(d) = points.first().map(|p| p.len()) else {
        return Err(Error::Degenerate("empty point set".into()));
    };
    let smax = scales.iter().fold(T::zero(), |a, b| a.max(*b)).to_f64_lossy();
    let smin = scales.iter().fold(T::infinity(), |a, b| a.min(*b)).to_f64_lossy();
    if !(smin > 0.0) || smax / smin < 4.0 - 1e-9 {
        return Err(invalid("scales", "must be positive and span at least two dyadic octaves"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in scales {
        let eps = s.to_f64_lossy();
        let boxes: HashSet<Vec<i64>> = points
            .iter()
            .map(|p| p.iter().map(|x| (x.to_f64_lossy() / eps).floor() as i64).collect())
            .collect();
        xs.push((1.0 / eps).ln());
        ys.push((boxes.len() as f64).ln());
    }
    let fit = stats::fit_line(&xs, &ys, 3)?;
    Ok(fit.slope.clamp(0.0, d as f64 - 1.0))
}

/// Outer unit normals of a planar convex body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalSet {
    /// Edge normal angles (polygons).
    pub edge_angles: Vec<f64>,
    /// Vertex fans `[start, start + width]` (counterclockwise angles).
    pub fans: Vec<(f64, f64)>,
    /// Every direction is a normal (disk).
    pub full_circle: bool,
}

fn wrap_angle(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    ((a % t) + t) % t
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(std::f64::consts::TAU - d)
}

impl NormalSet {
    /// Angular distance from direction `theta` to the set.
    pub fn distance(&self, theta: f64, include_fans: bool) -> f64 {
        if self.full_circle {
            return 0.0;
        }
        let mut best = self
            .edge_angles
            .iter()
            .map(|a| angular_distance(theta, *a))
            .fold(f64::INFINITY, f64::min);
        if include_fans {
            for &(start, width) in &self.fans {
                let rel = wrap_angle(theta - start);
                let d = if rel <= width {
                    0.0
                } else {
                    angular_distance(theta, start).min(angular_distance(theta, start + width))
                };
                best = best.min(d);
            }
        }
        best
    }

    /// Unit vectors sampling the set at angular spacing `step`.
    pub fn sample(&self, step: f64, include_fans: bool) -> Vec<Vec<f64>> {
        let mut angles = Vec::new();
        if self.full_circle {
            let n = (std::f64::consts::TAU / step).ceil() as usize;
            angles.extend((0..n).map(|k| k as f64 * std::f64::consts::TAU / n as f64));
        } else {
            angles.extend(self.edge_angles.iter().copied());
            if include_fans {
                for &(start, width) in &self.fans {
                    let n = (width / step).ceil() as usize;
                    angles.extend((0..=n).map(|k| start + width * k as f64 / n.max(1) as f64));
                }
            }
        }
        angles.iter().map(|a| vec![a.cos(), a.sin()]).collect()
    }
}

/// Edge normals plus vertex fans for polygons; the whole circle for disks.
pub fn normal_set<T: Scalar>(body: &ConvexBody2D<T>) -> NormalSet {
    match body {
        ConvexBody2D::Disk { .. } => NormalSet {
            edge_angles: Vec::new(),
            fans: Vec::new(),
            full_circle: true,
        },
        ConvexBody2D::Polygon { vertices } => {
            let n = vertices.len();
            let edge_angles: Vec<f64> = (0..n)
                .map(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let (dx, dy) = ((b[0] - a[0]).to_f64_lossy(), (b[1] - a[1]).to_f64_lossy());
                    // outward normal of a counterclockwise edge
                    wrap_angle((-dx).atan2(dy))
                })
                .collect();
            let fans = (0..n)
                .map(|i| {
                    let start = edge_angles[i];
                    let end = edge_angles[(i + 1) % n];
                    (start, wrap_angle(end - start))
                })
                .collect();
            NormalSet {
                edge_angles,
                fans,
                full_circle: false,
            }
        }
    }
}

/// `{ξ : R/2 ≤ |ξ| ≤ 2R, ξ/|ξ| within angle 1/R of N(K)}`.
///
/// `include_fans` selects whether vertex fans count as normals.
pub fn build_normal_cone_set<T: Scalar>(
    body: &ConvexBody2D<T>,
    scale: T,
    nodes: &NodeSet<T>,
    include_fans: bool,
) -> Result<FrequencySet> {
    if !(scale >= T::one()) {
        return Err(invalid("R", "must be at least 1"));
    }
    if nodes.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: nodes.dim(),
        });
    }
    let normals = normal_set(body);
    let r = scale.to_f64_lossy();
    let (lo, hi, tol) = (0.25 * r * r, 4.0 * r * r, 1.0 / r);
    Ok(FrequencySet::from_predicate(nodes, |x| {
        let (a, b) = (x[0].to_f64_lossy(), x[1].to_f64_lossy());
        let r2 = a * a + b * b;
        r2 >= lo && r2 <= hi && normals.distance(b.atan2(a), include_fans) <= tol
    }))
}

/// Two-level spectral profile showing that L² concentration cannot replace
/// L¹ concentration in the sandwich bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Counterexample {
    pub dim: usize,
    pub scale_r: f64,
    pub l: f64,
    pub c: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `√(|B|/|A|) = √(L^d − 1)`.
    pub r: f64,
    /// `|A| = |B_R|`.
    pub inner_volume: f64,
    /// `‖h‖₁ / ‖h‖₂` from `α|A| + β|B|`.
    pub l1_over_l2: f64,
    /// `|A|^{1/2} R^{-d/2} (√(1−b²) + b r)`.
    pub fr_h: f64,
    /// `C/(1−b) · |A|^{1/2} R^{-d/2}`.
    pub bound: f64,
    pub violated: bool,
}

fn unit_ball_volume(d: usize) -> f64 {
    let pi = std::f64::consts::PI;
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * pi / d as f64,
    }
}

/// `h = α` on `A = B_R`, `β` on `B = B_{LR} ∖ B_R`, with `b = 1/2` of the L² mass on `B`.
pub fn l2_counterexample(dim: usize, scale: f64, l: f64, c: f64) -> Result<L2Counterexample> {
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    if !(scale > 0.0) || !(c > 0.0) || !(l > 1.0) {
        return Err(invalid("R, L, C", "need R > 0, C > 0 and L > 1"));
    }
    let b: f64 = 0.5;
    let r = (l.powi(dim as i32) - 1.0).sqrt();
    if !((1.0 - b * b).sqrt() + b * r > c / (1.0 - b)) {
        return Err(invalid(
            "L",
            format!("√(L^d − 1) = {r} is too small for C = {c}: need r > 4C − √3"),
        ));
    }
    let a_vol = unit_ball_volume(dim) * scale.powi(dim as i32);
    let b_vol = a_vol * (l.powi(dim as i32) - 1.0);
    let alpha = (1.0 - b * b).sqrt() / a_vol.sqrt();
    let beta = b / b_vol.sqrt();
    let l1 = alpha * a_vol + beta * b_vol;
    let l2 = (alpha * alpha * a_vol + beta * beta * b_vol).sqrt();
    let norm = a_vol.sqrt() * scale.powf(-(dim as f64) / 2.0);
    let fr_h = norm * ((1.0 - b * b).sqrt() + b * r);
    let bound = c / (1.0 - b) * norm;
    Ok(L2Counterexample {
        dim,
        scale_r: scale,
        l,
        c,
        b,
        alpha,
        beta,
        r,
        inner_volume: a_vol,
        l1_over_l2: l1 / l2,
        fr_h,
        bound,
        violated: fr_h > bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{make_kplane_measure, make_random_cantor, Mollifier};
    use crate::spectral::{fourier_ratio, FrequencyGrid, GridPolicy};

    #[test]
    fn covering_counts() {
        let p = AtomicMeasure::<f64>::point_mass(2).unwrap();
        assert_eq!(covering_number(&p, 37.0).unwrap().box_count, 1);
        let seg = make_kplane_measure::<f64>(2, 1, 4096).unwrap();
        let c = covering_number(&seg, 100.0).unwrap();
        assert!((100..=202).contains(&c.box_count));
        assert_eq!(c.neighborhood_volume, c.box_count as f64 / 1e4);
        let cantor = make_random_cantor::<f64>(4, 4, 3).unwrap();
        assert_eq!(covering_number(&cantor, 256.0).unwrap().box_count, 256);
    }

    #[test]
    fn coarser_scales_use_fewer_boxes() {
        let cantor = make_random_cantor::<f64>(5, 3, 9).unwrap();
        let counts: Vec<usize> = [3.0, 9.0, 27.0, 81.0, 243.0]
            .iter()
            .map(|r| covering_number(&cantor, *r).unwrap().box_count)
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn point_mass_lower_bound_is_tight() {
        let p = AtomicMeasure::<f64>::point_mass(2).unwrap();
        let rep = fourier_ratio(&p, 16.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let lb = lower_bound_check(&rep, &covering_number(&p, 16.0).unwrap()).unwrap();
        assert_eq!(lb.lhs, 1.0);
        assert!(lb.holds);
        assert!((lb.rhs - 1.0).abs() < 1e-6);
    }

    #[test]
    fn scale_mismatch_rejected() {
        let p = AtomicMeasure::<f64>::point_mass(2).unwrap();
        let rep = fourier_ratio(&p, 16.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let cover = covering_number(&p, 32.0).unwrap();
        assert!(matches!(lower_bound_check(&rep, &cover), Err(Error::ScaleMismatch { .. })));
    }

    #[test]
    fn concentration_extremes_and_mismatch() {
        let p = AtomicMeasure::<f64>::point_mass(2).unwrap();
        let policy = GridPolicy::default();
        let (_, field) = crate::spectral::analyze(&p, 8.0, &Mollifier::gaussian(2), &policy).unwrap();
        let full = FrequencySet::full(&field.nodes);
        let empty = FrequencySet::empty(&field.nodes);
        assert_eq!(concentration_fraction(&field, &full).unwrap(), 0.0);
        assert_eq!(concentration_fraction(&field, &empty).unwrap(), 1.0);
        let other = NodeSet::Grid(FrequencyGrid::new(2, 32.0, 16).unwrap());
        let wrong = FrequencySet::full(&other);
        assert!(concentration_fraction(&field, &wrong).is_err());
    }

    #[test]
    fn full_grid_sandwich_is_vacuous() {
        let p = AtomicMeasure::<f64>::point_mass(2).unwrap();
        let (rep, field) =
            crate::spectral::analyze(&p, 8.0, &Mollifier::gaussian(2), &GridPolicy::default()).unwrap();
        let set = FrequencySet::full(&field.nodes);
        let eta = concentration_fraction(&field, &set).unwrap();
        let s = sandwich_check(&rep, &covering_number(&p, 8.0).unwrap(), &set, eta).unwrap();
        assert!(s.holds);
        assert!((s.upper - 8.0).abs() < 1e-9);
        assert!(sandwich_check(&rep, &covering_number(&p, 8.0).unwrap(), &set, 1.0).is_err());
    }

    #[test]
    fn dimension_of_finite_and_full_normal_sets() {
        let scales = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
        let square = normal_set(&ConvexBody2D::<f64>::unit_square());
        let a = upper_minkowski_dimension(&square.sample(1e-4, false), &scales).unwrap();
        assert!(a < 0.2);
        let disk = normal_set(&ConvexBody2D::<f64>::disk([0.0, 0.0], 1.0).unwrap());
        let a = upper_minkowski_dimension(&disk.sample(1e-4, false), &scales).unwrap();
        assert!((a - 1.0).abs() < 0.1, "a={a}");
        let lac = normal_set(&ConvexBody2D::<f64>::lacunary_polygon(12).unwrap());
        let a = upper_minkowski_dimension(&lac.sample(1e-4, false), &scales).unwrap();
        assert!(a < 0.3, "a={a}");
        assert!(upper_minkowski_dimension(&square.sample(1e-3, false), &scales[..2]).is_err());
    }

    #[test]
    fn square_normals_and_fans() {
        let ns = normal_set(&ConvexBody2D::<f64>::unit_square());
        let mut angles = ns.edge_angles.clone();
        angles.sort_by(|a, b| a.total_cmp(b));
        let expect = [0.0, 0.5 * std::f64::consts::PI, std::f64::consts::PI, 1.5 * std::f64::consts::PI];
        for (a, e) in angles.iter().zip(expect) {
            assert!(angular_distance(*a, e) < 1e-12);
        }
        for &(_, w) in &ns.fans {
            assert!((w - 0.5 * std::f64::consts::PI).abs() < 1e-12);
        }
        assert_eq!(ns.distance(0.3, true), 0.0);
        assert!((ns.distance(0.3, false) - 0.3).abs() < 1e-12);
        let hex = normal_set(&ConvexBody2D::<f64>::regular_polygon(6).unwrap());
        let mut a = hex.edge_angles.clone();
        a.sort_by(|x, y| x.total_cmp(y));
        for w in a.windows(2) {
            assert!((w[1] - w[0] - std::f64::consts::TAU / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_set_area_scales_with_normal_dimension() {
        let mut sq = Vec::new();
        let mut dk = Vec::new();
        let rs = [8.0, 16.0, 32.0, 64.0];
        for &r in &rs {
            // cones have unit width at radius R/2, so the spacing must stay below 1
            let m = (25.0 * r) as usize;
            let nodes = NodeSet::Grid(FrequencyGrid::new(2, 2.5 * r, m).unwrap());
            let s = build_normal_cone_set(&ConvexBody2D::<f64>::unit_square(), r, &nodes, false).unwrap();
            sq.push(s.volume);
            let disk = ConvexBody2D::disk([0.0, 0.0], 1.0).unwrap();
            let s = build_normal_cone_set(&disk, r, &nodes, false).unwrap();
            dk.push(s.volume);
        }
        let a = stats::loglog_slope(&rs, &sq, 4).unwrap().slope;
        let b = stats::loglog_slope(&rs, &dk, 4).unwrap().slope;
        assert!((a - 1.0).abs() < 0.15, "square slope {a}");
        assert!((b - 2.0).abs() < 0.1, "disk slope {b}");
        let r = 16.0;
        let annulus = std::f64::consts::PI * ((2.0 * r) * (2.0 * r) - (r / 2.0) * (r / 2.0));
        assert!((dk[1] / annulus - 1.0).abs() < 0.01);
    }

    #[test]
    fn counterexample_closed_forms() {
        for (c, l) in [(1.0, 3.0), (10.0, 41.0)] {
            let e = l2_counterexample(2, 64.0, l, c).unwrap();
            assert!(e.violated);
            assert!((e.l1_over_l2 * 64f64.powi(-1) - e.fr_h).abs() < 1e-10 * e.fr_h);
            assert!((e.r - (l * l - 1.0).sqrt()).abs() < 1e-12);
        }
        assert!(l2_counterexample(2, 64.0, 2.0, 1.0).is_err());
    }
}
