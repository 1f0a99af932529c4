//! Fourier-ratio scans: corpus bounds, polygons, the Knapp arc and the
//! random Cantor set.

use fourier_ratio::geometry::{
    build_normal_cone_set, concentration_fraction, covering_number, lower_bound_check,
    sandwich_check, CoveringReport, FrequencySet, LowerBound, SandwichResult,
};
use fourier_ratio::measure::{make_circle_arc, make_random_cantor, MollifierKind};
use fourier_ratio::spectral::{analyze, transform, NodeSet};
use fourier_ratio::stats::{loglog_slope, median};
use fourier_ratio::trig::{degree_for_l2, Norm};
use fourier_ratio::{FrequencyGrid64, GridPolicy64, Mollifier64, RatioReport64};
use serde::Deserialize;

use super::approx::ApproxSetup;
use super::{analyze_default, boundary_measure, default_r_list, mollifier, BodySpec, CorpusMember};
use crate::error::{Error, Result};
use crate::scan::{validate_dyadic, Band, ScanResult, MIN_FIT_POINTS};

fn as_bool(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn band_of(b: [f64; 2]) -> Band {
    Band::new(b[0], b[1])
}

// ---------------------------------------------------------------- corpus

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatioScanParams {
    pub members: Vec<CorpusMember>,
    #[serde(rename = "R_list")]
    pub r_list: Vec<f64>,
    pub mollifier: MollifierKind,
    /// Whether vertex fans count as normals in the cone sets.
    pub include_fans: bool,
}

impl Default for RatioScanParams {
    fn default() -> Self {
        Self {
            members: CorpusMember::ALL.to_vec(),
            r_list: default_r_list(),
            mollifier: MollifierKind::Gaussian,
            include_fans: false,
        }
    }
}

/// One corpus member at one scale with its bounds.
#[derive(Debug, Clone)]
pub struct CorpusInstance {
    pub member: CorpusMember,
    pub report: RatioReport64,
    pub cover: CoveringReport,
    pub lower: LowerBound,
    /// `(set name, result)`; sets whose concentration reaches 1 are omitted.
    pub sandwiches: Vec<(&'static str, SandwichResult)>,
}

/// Frequency sets used for the sandwich: the ball `B_{2R}` always, and for
/// planar bodies `B_{R/2}` joined with the normal-cone set.
pub fn corpus_instance(
    member: CorpusMember,
    r: f64,
    seed: u64,
    kind: MollifierKind,
    include_fans: bool,
) -> Result<CorpusInstance> {
    let measure = member.build(r, seed)?;
    let moll = mollifier(kind, measure.dim())?;
    let (report, field) = analyze(&measure, r, &moll, &GridPolicy64::default())?;
    let cover = covering_number(&measure, r)?;
    let lower = lower_bound_check(&report, &cover)?;
    let mut sets: Vec<(&'static str, FrequencySet)> =
        vec![("ball", FrequencySet::ball(&field.nodes, 2.0 * r))];
    if let Some(body) = member.body() {
        let cones = build_normal_cone_set(&body, r, &field.nodes, include_fans)?;
        let inner = FrequencySet::ball(&field.nodes, 0.5 * r);
        sets.push(("cones", inner.union(&cones, &field.nodes)?));
    }
    let mut sandwiches = Vec::new();
    for (name, set) in sets {
        let eta = concentration_fraction(&field, &set)?;
        if eta < 1.0 {
            sandwiches.push((name, sandwich_check(&report, &cover, &set, eta)?));
        }
    }
    Ok(CorpusInstance {
        member,
        report,
        cover,
        lower,
        sandwiches,
    })
}

/// One table per member: `FR` against its covering lower bound and the
/// sandwich upper bounds.
pub fn run_ratio_scan(p: &RatioScanParams, seed: u64) -> Result<Vec<ScanResult>> {
    if p.r_list.is_empty() || p.members.is_empty() {
        return Err(Error::Config("ratio_scan needs members and R_list".into()));
    }
    let mut out = Vec::new();
    for &member in &p.members {
        let mut rows = Vec::new();
        for &r in &p.r_list {
            rows.push(corpus_instance(member, r, seed, p.mollifier, p.include_fans)?);
        }
        out.push(corpus_table(member, &rows)?);
    }
    Ok(out)
}

pub fn corpus_table(member: CorpusMember, rows: &[CorpusInstance]) -> Result<ScanResult> {
    let mut cols = vec![
        "R", "FR", "lower", "lower_ok", "X1", "X2", "quad_err", "nodes", "scattered",
    ];
    let set_names: Vec<&str> = rows
        .first()
        .map(|r| r.sandwiches.iter().map(|s| s.0).collect())
        .unwrap_or_default();
    let mut extra: Vec<String> = Vec::new();
    for n in &set_names {
        for c in ["eta", "upper", "product", "ok"] {
            extra.push(format!("{c}_{n}"));
        }
    }
    cols.extend(extra.iter().map(|s| s.as_str()));
    let mut scan = ScanResult::new(format!("ratio_{}", member.name()), &cols);
    let (mut lower_ok, mut sandwich_ok, mut sandwich_total) = (0usize, 0usize, 0usize);
    for inst in rows {
        let rep = &inst.report;
        let mut row = vec![
            rep.scale_r,
            rep.fr,
            inst.lower.lhs,
            as_bool(inst.lower.holds),
            rep.x1,
            rep.x2,
            rep.quadrature_error_estimate.unwrap_or(f64::NAN),
            rep.nodes as f64,
            as_bool(rep.scattered),
        ];
        lower_ok += inst.lower.holds as usize;
        for name in &set_names {
            match inst.sandwiches.iter().find(|s| s.0 == *name) {
                Some((_, s)) => {
                    row.extend([s.eta, s.upper, s.product, as_bool(s.holds)]);
                    sandwich_ok += s.holds as usize;
                    sandwich_total += 1;
                }
                None => row.extend([f64::NAN; 4]),
            }
        }
        scan.push(row);
    }
    if rows.len() >= MIN_FIT_POINTS {
        scan.fit("R", "FR", None)?;
    }
    let n = rows.len().max(1) as f64;
    scan.check("lower_bound_fraction", lower_ok as f64 / n, Band::at_least(1.0));
    if sandwich_total > 0 {
        scan.check(
            "sandwich_fraction",
            sandwich_ok as f64 / sandwich_total as f64,
            Band::at_least(1.0),
        );
    }
    Ok(scan)
}

// ---------------------------------------------------------------- polygons

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolygonParams {
    pub bodies: Vec<BodySpec>,
    #[serde(rename = "R_list")]
    pub r_list: Vec<f64>,
    pub atoms_per_cell: f64,
    pub slope_band: Option<[f64; 2]>,
}

impl Default for PolygonParams {
    fn default() -> Self {
        Self {
            bodies: vec![BodySpec::Square, BodySpec::Hexagon, BodySpec::Regular(8)],
            r_list: default_r_list(),
            atoms_per_cell: 4.0,
            slope_band: None,
        }
    }
}

/// `FR` of polygon boundaries against the comparator `R^{-1/2} log² R`.
pub fn run_polygon_scaling(p: &PolygonParams) -> Result<Vec<ScanResult>> {
    validate_dyadic(&p.r_list, 1.0, 1024.0)?;
    let mut out = Vec::new();
    for spec in &p.bodies {
        let body = spec.build()?;
        let mut scan = ScanResult::new(
            format!("polygon_{}", spec.name()),
            &["R", "FR", "lower", "comparator", "FR_over_comparator"],
        );
        for &r in &p.r_list {
            let m = boundary_measure(&body, r, p.atoms_per_cell)?;
            let (rep, _) = analyze_default(&m, r)?;
            let lower = lower_bound_check(&rep, &covering_number(&m, r)?)?;
            let cmp = r.powf(-0.5) * r.ln().powi(2);
            scan.push(vec![r, rep.fr, lower.lhs, cmp, rep.fr / cmp]);
            scan.check(format!("lower_bound_R{r}"), as_bool(lower.holds), Band::at_least(1.0));
        }
        scan.fit("R", "FR", p.slope_band.map(band_of))?;
        out.push(scan);
    }
    Ok(out)
}

// ---------------------------------------------------------------- Knapp arc

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnappParams {
    #[serde(rename = "R_list")]
    pub r_list: Vec<f64>,
    pub eta: f64,
    pub slope_band: [f64; 2],
    pub degree_band: [f64; 2],
    /// Also measure the empirical L² error at the prescribed degree.
    pub approx: bool,
    pub pad_cells: usize,
}

impl Default for KnappParams {
    fn default() -> Self {
        Self {
            r_list: default_r_list(),
            eta: 0.5,
            slope_band: [-0.40, -0.15],
            degree_band: [1.25, 1.75],
            approx: true,
            pad_cells: 2,
        }
    }
}

/// Arc of length `R^{-1/2}`: `FR` slope, L² degree exponent and, optionally,
/// the empirical error at that degree.
pub fn run_knapp_circle(p: &KnappParams, seed: u64) -> Result<ScanResult> {
    validate_dyadic(&p.r_list, 16.0, 1024.0)?;
    let mut scan = ScanResult::new(
        "knapp_circle",
        &["R", "FR", "lower", "X1", "X2", "degree_l2", "l2_error", "quad_err", "atoms"],
    );
    for (i, &r) in p.r_list.iter().enumerate() {
        let len = r.powf(-0.5);
        let n = ((8.0 * r * len).ceil() as usize).max(64);
        let m = make_circle_arc(r, len, n)?.with_label("knapp_arc");
        let policy = GridPolicy64::default();
        let (rep, field) = analyze(&m, r, &Mollifier64::gaussian(2), &policy)?;
        let lower = lower_bound_check(&rep, &covering_number(&m, r)?)?;
        let k = degree_for_l2(&rep, p.eta)?;
        let err = if p.approx && field.grid().is_some() {
            let setup = ApproxSetup::from_field(m.clone(), rep.clone(), field, p.pad_cells)?;
            setup.relative_error(k, seed.wrapping_add(i as u64), Norm::L2)?
        } else {
            f64::NAN
        };
        scan.push(vec![
            r,
            rep.fr,
            lower.lhs,
            rep.x1,
            rep.x2,
            k as f64,
            err,
            rep.quadrature_error_estimate.unwrap_or(f64::NAN),
            n as f64,
        ]);
    }
    let degree = loglog_slope(&scan.column("R")?, &scan.column("degree_l2")?, MIN_FIT_POINTS)?;
    scan.check("degree_exponent", degree.slope, band_of(p.degree_band));
    if p.approx {
        let errs: Vec<f64> = scan.column("l2_error")?.into_iter().filter(|e| e.is_finite()).collect();
        if !errs.is_empty() {
            let worst = errs.iter().cloned().fold(0.0, f64::max);
            scan.check("max_l2_error_over_eta", worst / p.eta, Band::at_most(1.25));
        }
    }
    scan.fit("R", "FR", Some(band_of(p.slope_band)))?;
    Ok(scan)
}

// ---------------------------------------------------------------- Cantor

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CantorParams {
    #[serde(rename = "R_list")]
    pub r_list: Vec<f64>,
    /// Explicit seeds; when absent, `n_seeds` consecutive seeds from the config seed.
    pub seeds: Option<Vec<u64>>,
    pub n_seeds: usize,
    pub stages: usize,
    pub branching: usize,
    pub slope_band: [f64; 2],
    /// Scales of the energy-capture check, on the integer-spaced lattice.
    pub capture_r: Vec<f64>,
    /// `k = R²/capture_divisor` top frequencies.
    pub capture_divisor: f64,
    /// Compare against the Knapp arc over the same scales.
    pub compare_circle: bool,
    pub min_gap: f64,
}

impl Default for CantorParams {
    fn default() -> Self {
        Self {
            r_list: default_r_list(),
            seeds: None,
            n_seeds: 10,
            stages: 5,
            branching: 4,
            slope_band: [-0.15, 0.05],
            capture_r: vec![32.0, 64.0, 128.0],
            capture_divisor: 16.0,
            compare_circle: true,
            min_gap: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CantorOutcome {
    /// Median-over-seeds `FR` per scale, with the median per-seed slope as a check.
    pub ratio: ScanResult,
    pub seed_slopes: ScanResult,
    pub capture: ScanResult,
    pub median_slope: f64,
    pub circle_slope: Option<f64>,
}

impl CantorOutcome {
    pub fn results(self) -> Vec<ScanResult> {
        vec![self.ratio, self.seed_slopes, self.capture]
    }

    pub fn pass(&self) -> bool {
        self.ratio.pass && self.capture.pass
    }
}

/// Fraction of `Σ|ĝ|²` over the unit-spaced lattice `[-4R, 4R]²` carried by
/// the `k` largest coefficients.
pub fn energy_capture(measure: &fourier_ratio::AtomicMeasure64, r: f64, k: usize) -> Result<f64> {
    let m = (8.0 * r).round() as usize;
    let grid = FrequencyGrid64::new(2, 4.0 * r, m)?;
    let field = transform(measure, r, &NodeSet::Grid(grid), &Mollifier64::gaussian(2))?;
    let mut e: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = e.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Core(fourier_ratio::Error::Degenerate("zero energy".into())));
    }
    e.sort_by(|a, b| b.total_cmp(a));
    Ok(e.iter().take(k).sum::<f64>() / total)
}

pub fn run_cantor_dichotomy(p: &CantorParams, seed: u64) -> Result<CantorOutcome> {
    validate_dyadic(&p.r_list, 16.0, 1024.0)?;
    let seeds: Vec<u64> = match &p.seeds {
        Some(s) => s.clone(),
        None => (0..p.n_seeds as u64).map(|i| seed.wrapping_add(i)).collect(),
    };
    if seeds.is_empty() {
        return Err(Error::Config("cantor_dichotomy needs at least one seed".into()));
    }
    let measures = seeds
        .iter()
        .map(|&s| make_random_cantor::<f64>(p.stages, p.branching, s))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    // fr[i][j]: seed i, scale j
    let mut fr = vec![vec![0.0; p.r_list.len()]; seeds.len()];
    let mut lower = vec![vec![0.0; p.r_list.len()]; seeds.len()];
    for (i, m) in measures.iter().enumerate() {
        for (j, &r) in p.r_list.iter().enumerate() {
            let (rep, _) = analyze_default(m, r)?;
            fr[i][j] = rep.fr;
            lower[i][j] = lower_bound_check(&rep, &covering_number(m, r)?)?.lhs;
        }
    }

    let mut slopes = ScanResult::new("cantor_seed_slopes", &["seed", "slope", "stderr"]);
    let mut per_seed = Vec::new();
    for (i, &s) in seeds.iter().enumerate() {
        let fit = loglog_slope(&p.r_list, &fr[i], MIN_FIT_POINTS)?;
        per_seed.push(fit.slope);
        slopes.push(vec![s as f64, fit.slope, fit.slope_stderr]);
    }
    let median_slope = median(&per_seed);

    let mut ratio = ScanResult::new(
        "cantor_dichotomy",
        &["R", "FR_median", "FR_min", "FR_max", "lower_median"],
    );
    for (j, &r) in p.r_list.iter().enumerate() {
        let col: Vec<f64> = fr.iter().map(|f| f[j]).collect();
        let low: Vec<f64> = lower.iter().map(|f| f[j]).collect();
        let (mn, mx) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        ratio.push(vec![r, median(&col), mn, mx, median(&low)]);
    }
    ratio.fit("R", "FR_median", None)?;
    ratio.check("median_seed_slope", median_slope, band_of(p.slope_band));

    let circle_slope = if p.compare_circle {
        let kp = KnappParams {
            r_list: p.r_list.clone(),
            approx: false,
            ..KnappParams::default()
        };
        let s = run_knapp_circle(&kp, seed)?.slope();
        if let Some(c) = s {
            ratio.check("slope_gap_vs_circle", median_slope - c, Band::at_least(p.min_gap));
        }
        s
    } else {
        None
    };

    let mut capture = ScanResult::new(
        "cantor_capture",
        &["R", "k", "capture_median", "capture_min", "capture_max"],
    );
    let mut medians = Vec::new();
    for &r in &p.capture_r {
        let k = ((r * r / p.capture_divisor).round() as usize).max(1);
        let fr_caps = measures
            .iter()
            .map(|m| energy_capture(m, r, k))
            .collect::<Result<Vec<f64>>>()?;
        let (mn, mx) = fr_caps
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let med = median(&fr_caps);
        medians.push(med);
        capture.push(vec![r, k as f64, med, mn, mx]);
    }
    if medians.len() >= 2 {
        let rise = medians.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        capture.check("max_capture_increase", rise, Band::at_most(0.0));
    }

    Ok(CantorOutcome {
        ratio,
        seed_slopes: slopes,
        capture,
        median_slope,
        circle_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knapp_rejects_short_lists() {
        let p = KnappParams {
            r_list: vec![64.0],
            ..KnappParams::default()
        };
        assert!(run_knapp_circle(&p, 0).is_err());
    }

    #[test]
    fn cantor_rejects_empty_seed_list() {
        let p = CantorParams {
            seeds: Some(vec![]),
            ..CantorParams::default()
        };
        assert!(run_cantor_dichotomy(&p, 0).is_err());
    }

    #[test]
    fn params_reject_unknown_keys() {
        let r: std::result::Result<KnappParams, _> = serde_json::from_str(r#"{"etaa": 0.5}"#);
        assert!(r.is_err());
        let r: KnappParams = serde_json::from_str(r#"{"R_list": [16, 32, 64, 128]}"#).unwrap();
        assert_eq!(r.r_list.len(), 4);
        assert_eq!(r.eta, 0.5);
    }

    #[test]
    fn point_mass_capture_is_uniformly_spread() {
        // |ĝ|² is the gaussian profile only: the top R²/16 of 64R² nodes hold
        // a fixed fraction, the same at every R.
        let m = fourier_ratio::AtomicMeasure64::point_mass(2).unwrap();
        let a = energy_capture(&m, 16.0, 16).unwrap();
        let b = energy_capture(&m, 32.0, 64).unwrap();
        assert!((a - b).abs() < 1e-3, "{a} {b}");
    }

    #[test]
    fn corpus_point_instance_is_tight() {
        let inst = corpus_instance(CorpusMember::Point, 16.0, 0, MollifierKind::Gaussian, true).unwrap();
        assert!(inst.lower.holds);
        assert!((inst.report.fr - 1.0).abs() < 1e-3);
        assert!(inst.sandwiches.iter().all(|s| s.1.holds));
    }
}
