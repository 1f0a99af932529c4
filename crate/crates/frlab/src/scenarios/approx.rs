//! Random trigonometric approximation at the formula-prescribed degrees.

use fourier_ratio::spectral::analyze;
use fourier_ratio::stats::{mean, median};
use fourier_ratio::trig::{
    approx_error, build_distribution, degree_for_l1, degree_for_l2, degree_for_linf, domain_norm,
    sample_polynomial, Norm, SamplingDistribution,
};
use fourier_ratio::{
    AtomicMeasure64, Complex64, GridPolicy64, Mollifier64, RatioReport64, SpatialDomain64,
    SpectralField64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::CorpusMember;
use crate::error::{Error, Result};
use crate::scan::{Band, ScanResult};

/// Everything needed to draw polynomials for one measure and score them.
pub struct ApproxSetup {
    pub measure: AtomicMeasure64,
    pub report: RatioReport64,
    pub field: SpectralField64,
    pub dist: SamplingDistribution<f64>,
    pub domain: SpatialDomain64,
    pub g_values: Vec<Complex64>,
}

impl ApproxSetup {
    /// Transforms on a grid (oversample `oversample`) and builds the
    /// `pad_cells`-neighbourhood of the support.
    pub fn new(measure: AtomicMeasure64, r: f64, oversample: f64, pad_cells: usize) -> Result<Self> {
        let policy = GridPolicy64 {
            oversample,
            ..GridPolicy64::default()
        };
        let (report, field) = analyze(&measure, r, &Mollifier64::gaussian(measure.dim()), &policy)?;
        Self::from_field(measure, report, field, pad_cells)
    }

    pub fn from_field(
        measure: AtomicMeasure64,
        report: RatioReport64,
        field: SpectralField64,
        pad_cells: usize,
    ) -> Result<Self> {
        let grid = field.grid().cloned().ok_or_else(|| {
            Error::Core(fourier_ratio::Error::Unsupported(
                "approximation needs a lattice frequency grid".into(),
            ))
        })?;
        let r = report.scale_r;
        let max_spacing = 1.0 / (8.0 * grid.half_extent());
        let domain = SpatialDomain64::neighborhood(&measure, r, pad_cells, max_spacing, Some(&grid))?;
        let g_values = domain.evaluate_measure(&measure, &field.mollifier);
        let dist = build_distribution(&field)?;
        Ok(Self {
            measure,
            report,
            field,
            dist,
            domain,
            g_values,
        })
    }

    pub fn g_norm(&self, norm: Norm) -> f64 {
        domain_norm(&self.g_values, &self.domain, norm)
    }

    pub fn degree(&self, norm: Norm, eta: f64, c_d: f64) -> Result<usize> {
        Ok(match norm {
            Norm::L2 => degree_for_l2(&self.report, eta)?,
            Norm::L1 => degree_for_l1(&self.field, self.g_norm(Norm::L1), eta)?,
            Norm::Linf => degree_for_linf(
                &self.field,
                self.g_norm(Norm::Linf),
                eta,
                self.measure.dim(),
                self.report.scale_r,
                c_d,
            )?,
        })
    }

    /// `‖g − P‖/‖g‖` for one random polynomial of degree `k`.
    pub fn relative_error(&self, k: usize, seed: u64, norm: Norm) -> Result<f64> {
        let p = sample_polynomial(&self.dist, k, seed)?;
        Ok(approx_error(&self.g_values, &p, norm, &self.domain)?.relative)
    }

    /// `g(x)` straight from the atoms.
    pub fn g_at(&self, x: &[f64]) -> Complex64 {
        let r = self.report.scale_r;
        let d = self.measure.dim();
        let rd = r.powi(d as i32);
        let mut u = vec![0.0; d];
        (0..self.measure.len())
            .map(|i| {
                for (a, (xa, pa)) in x.iter().zip(self.measure.point(i)).enumerate() {
                    u[a] = r * (xa - pa);
                }
                self.measure.weights()[i] * (rd * self.field.mollifier.spatial(&u))
            })
            .sum()
    }

    /// Empirical variance of `Z(x)` over `samples` draws against the closed
    /// form `‖ĝ‖₁² − |g(x)|²`; returns `(empirical, closed)`.
    pub fn variance_identity(&self, x: &[f64], samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<Complex64> = (0..samples).map(|_| self.dist.sample_z(x, &mut rng)).collect();
        let zbar = z.iter().sum::<Complex64>() / samples as f64;
        let emp = z.iter().map(|v| (v - zbar).norm_sqr()).sum::<f64>() / (samples as f64 - 1.0);
        let l1 = self.dist.total_l1;
        (emp, l1 * l1 - self.g_at(x).norm_sqr())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxParams {
    pub members: Vec<CorpusMember>,
    #[serde(rename = "R")]
    pub r: f64,
    pub eta: f64,
    pub seeds: usize,
    /// Covering constant in the L∞ degree.
    pub c_d: f64,
    pub pad_cells: usize,
    pub oversample: f64,
    pub norms: Vec<Norm>,
    pub variance_samples: usize,
    pub variance_tol: f64,
    /// Mean L² error must not exceed `eta · l2_slack`.
    pub l2_slack: f64,
}

impl Default for ApproxParams {
    fn default() -> Self {
        Self {
            members: vec![CorpusMember::Arc, CorpusMember::Segment, CorpusMember::Square],
            r: 32.0,
            eta: 0.5,
            seeds: 20,
            c_d: 25.0,
            pad_cells: 2,
            oversample: 2.0,
            norms: vec![Norm::L2, Norm::L1, Norm::Linf],
            variance_samples: 10_000,
            variance_tol: 0.05,
            l2_slack: 1.25,
        }
    }
}

/// One table per member: per-seed errors at each norm's prescribed degree.
pub fn run_approx_sweep(p: &ApproxParams, seed: u64) -> Result<Vec<ScanResult>> {
    if p.seeds == 0 || p.members.is_empty() || p.norms.is_empty() {
        return Err(Error::Config("approx_sweep needs members, norms and seeds".into()));
    }
    let mut out = Vec::new();
    for &member in &p.members {
        let measure = member.build(p.r, seed)?;
        let setup = ApproxSetup::new(measure, p.r, p.oversample, p.pad_cells)?;
        let mut cols = vec!["seed".to_string()];
        for n in &p.norms {
            cols.push(format!("k_{}", n.name()));
            cols.push(format!("err_{}", n.name()));
        }
        let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
        let mut scan = ScanResult::new(format!("approx_{}", member.name()), &col_refs);
        let degrees = p
            .norms
            .iter()
            .map(|&n| setup.degree(n, p.eta, p.c_d))
            .collect::<Result<Vec<_>>>()?;
        let mut errs = vec![Vec::new(); p.norms.len()];
        for s in 0..p.seeds as u64 {
            let run_seed = seed.wrapping_add(s);
            let mut row = vec![run_seed as f64];
            for (j, &n) in p.norms.iter().enumerate() {
                let e = setup.relative_error(degrees[j], run_seed, n)?;
                errs[j].push(e);
                row.extend([degrees[j] as f64, e]);
            }
            scan.push(row);
        }
        for (j, &n) in p.norms.iter().enumerate() {
            match n {
                Norm::L2 => scan.check("mean_err_L2", mean(&errs[j]), Band::at_most(p.eta * p.l2_slack)),
                Norm::L1 => scan.check("median_err_L1", median(&errs[j]), Band::at_most(p.eta)),
                Norm::Linf => scan.check(
                    "max_err_Linf",
                    errs[j].iter().cloned().fold(0.0, f64::max),
                    Band::at_most(p.eta),
                ),
            };
        }
        let x = setup.measure.point(0).to_vec();
        let (emp, closed) = setup.variance_identity(&x, p.variance_samples, seed);
        scan.check(
            "variance_identity_rel_diff",
            (emp - closed).abs() / closed.abs().max(f64::MIN_POSITIVE),
            Band::at_most(p.variance_tol),
        );
        out.push(scan);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_at_matches_domain_evaluation_for_a_point_mass() {
        let m = AtomicMeasure64::point_mass(2).unwrap();
        let setup = ApproxSetup::new(m, 4.0, 2.0, 1).unwrap();
        let g0 = setup.g_at(&[0.0, 0.0]);
        // R^d ψ(0) = 16
        assert!((g0.re - 16.0).abs() < 1e-12 && g0.im.abs() < 1e-12);
    }

    #[test]
    fn variance_identity_for_point_mass() {
        let m = AtomicMeasure64::point_mass(2).unwrap();
        let setup = ApproxSetup::new(m, 4.0, 2.0, 1).unwrap();
        let (emp, closed) = setup.variance_identity(&[0.1, 0.0], 20_000, 3);
        assert!((emp - closed).abs() / closed < 0.05, "{emp} {closed}");
    }
}
