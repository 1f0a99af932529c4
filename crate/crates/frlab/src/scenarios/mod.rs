//! The named experiments.  Each scenario takes typed parameters (unknown
//! keys rejected), returns [`ScanResult`]s, and never touches the filesystem;
//! [`run_experiment`] writes the artifacts.

pub mod approx;
pub mod convex;
pub mod discrete;
pub mod ratio;
pub mod recovery;

use std::path::{Path, PathBuf};

use fourier_ratio::geometry::normal_set;
use fourier_ratio::measure::{
    make_circle_arc, make_kplane_measure, make_polygon_boundary, make_random_cantor,
    make_sphere_measure, ConvexBody2D, Mollifier, MollifierKind,
};
use fourier_ratio::spectral::analyze;
use fourier_ratio::{
    AtomicMeasure64, ConvexBody64, GridPolicy64, Mollifier64, RatioReport64, SpectralField64,
};
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::scan::ScanResult;

pub use approx::{run_approx_sweep, ApproxParams};
pub use convex::{run_convex_degree, ConvexParams};
pub use discrete::{run_discrete_suite, run_l2_counterexample, DiscreteParams, L2Params};
pub use ratio::{
    run_cantor_dichotomy, run_knapp_circle, run_polygon_scaling, run_ratio_scan, CantorParams,
    KnappParams, PolygonParams, RatioScanParams,
};
pub use recovery::{run_recovery_phase, RecoveryParams};

pub fn default_r_list() -> Vec<f64> {
    vec![16.0, 32.0, 64.0, 128.0, 256.0]
}

pub fn mollifier(kind: MollifierKind, dim: usize) -> Result<Mollifier64> {
    Ok(Mollifier::new(kind, dim)?)
}

/// Gaussian-mollified report and field under the default grid policy.
pub fn analyze_default(
    measure: &AtomicMeasure64,
    r: f64,
) -> Result<(RatioReport64, SpectralField64)> {
    let m = Mollifier64::gaussian(measure.dim());
    Ok(analyze(measure, r, &m, &GridPolicy64::default())?)
}

/// Atoms so that consecutive atoms are `1/(per_cell·R)` apart along a curve
/// of length `len`.
fn atoms_for(len: f64, r: f64, per_cell: f64, min: usize) -> usize {
    ((len * r * per_cell).ceil() as usize).max(min)
}

/// Test measures whose resolution follows the scale `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusMember {
    /// Unit point mass in the plane.
    Point,
    /// `[0,1] × {0}`.
    Segment,
    /// `[0,1]² × {0}` in `R³`.
    Kplane,
    /// Unit circle.
    Circle,
    /// Arc of length `R^{-1/2}` on the unit circle.
    Arc,
    /// Boundary of the unit square.
    Square,
    /// Boundary of the regular hexagon inscribed in the unit circle.
    Hexagon,
    /// Random Cantor set, 4 stages with branching 4.
    Cantor,
    /// Unit sphere in `R³`.
    Sphere3,
}

/// Largest atom count for the three-dimensional members.
const MAX_ATOMS_3D: usize = 1 << 14;

impl CorpusMember {
    pub const ALL: [CorpusMember; 9] = [
        Self::Point,
        Self::Segment,
        Self::Kplane,
        Self::Circle,
        Self::Arc,
        Self::Square,
        Self::Hexagon,
        Self::Cantor,
        Self::Sphere3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Point => "point",
            Self::Segment => "segment",
            Self::Kplane => "kplane",
            Self::Circle => "circle",
            Self::Arc => "arc",
            Self::Square => "square",
            Self::Hexagon => "hexagon",
            Self::Cantor => "cantor",
            Self::Sphere3 => "sphere3",
        }
    }

    /// The convex body whose boundary this member is, if any.
    pub fn body(&self) -> Option<ConvexBody64> {
        match self {
            Self::Circle => ConvexBody2D::disk([0.0, 0.0], 1.0).ok(),
            Self::Square => Some(ConvexBody2D::unit_square()),
            Self::Hexagon => ConvexBody2D::regular_polygon(6).ok(),
            _ => None,
        }
    }

    pub fn build(&self, r: f64, seed: u64) -> Result<AtomicMeasure64> {
        let m = match self {
            Self::Point => AtomicMeasure64::point_mass(2)?,
            Self::Segment => make_kplane_measure(2, 1, atoms_for(1.0, r, 4.0, 64))?,
            Self::Kplane => {
                let side = (r.ceil() as usize).min((MAX_ATOMS_3D as f64).sqrt() as usize);
                make_kplane_measure(3, 2, side * side)?
            }
            Self::Arc => {
                let len = r.powf(-0.5);
                make_circle_arc(r, len, atoms_for(len, r, 8.0, 64))?
            }
            Self::Circle | Self::Square | Self::Hexagon => {
                let body = self.body().expect("planar body");
                make_polygon_boundary(&body, atoms_for(body.perimeter(), r, 4.0, 64))?
            }
            Self::Cantor => make_random_cantor(4, 4, seed)?,
            Self::Sphere3 => {
                let n = atoms_for(4.0 * std::f64::consts::PI, r * r, 1.0, 128).min(MAX_ATOMS_3D);
                make_sphere_measure(3, n)?
            }
        };
        Ok(m.with_label(self.name()))
    }
}

/// Planar convex bodies by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodySpec {
    Square,
    Disk,
    Hexagon,
    /// Regular polygon with this many vertices on the unit circle.
    Regular(usize),
    /// Polygon with this many levels of geometrically accumulating vertices.
    Lacunary(usize),
}

impl BodySpec {
    pub fn name(&self) -> String {
        match self {
            Self::Square => "square".into(),
            Self::Disk => "disk".into(),
            Self::Hexagon => "hexagon".into(),
            Self::Regular(n) => format!("regular{n}"),
            Self::Lacunary(l) => format!("lacunary{l}"),
        }
    }

    pub fn build(&self) -> Result<ConvexBody64> {
        Ok(match self {
            Self::Square => ConvexBody2D::unit_square(),
            Self::Disk => ConvexBody2D::disk([0.0, 0.0], 1.0)?,
            Self::Hexagon => ConvexBody2D::regular_polygon(6)?,
            Self::Regular(n) => ConvexBody2D::regular_polygon(*n)?,
            Self::Lacunary(l) => ConvexBody2D::lacunary_polygon(*l)?,
        })
    }

    /// Whether the normal set is a finite set of directions.
    pub fn is_polygon(&self) -> bool {
        !matches!(self, Self::Disk)
    }
}

/// Boundary measure with `atoms_per_cell` atoms per `1/R` of arc length.
pub fn boundary_measure(body: &ConvexBody64, r: f64, atoms_per_cell: f64) -> Result<AtomicMeasure64> {
    let nv = body.vertices().map_or(0, |v| v.len());
    let n = atoms_for(body.perimeter(), r, atoms_per_cell, 64.max(4 * nv));
    Ok(make_polygon_boundary(body, n)?)
}

/// Box-counting dimension of the normal set, sampled finely enough that the
/// smallest box scale `2^-10` is resolved.
pub fn normal_dimension(body: &ConvexBody64, include_fans: bool) -> Result<f64> {
    let pts = normal_set(body).sample(1e-4, include_fans);
    let scales: Vec<f64> = (3..=10).map(|k| 2f64.powi(-k)).collect();
    Ok(fourier_ratio::geometry::upper_minkowski_dimension(&pts, &scales)?)
}

/// Results of one configured run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub results: Vec<ScanResult>,
}

impl RunSummary {
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    /// Writes every result plus `summary.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for r in &self.results {
            paths.extend(r.write(dir)?);
        }
        let summary = serde_json::json!({
            "experiment": self.experiment,
            "pass": self.pass(),
            "results": self.results.iter().map(|r| r.summary()).collect::<Vec<_>>(),
        });
        let p = dir.join("summary.json");
        std::fs::write(&p, serde_json::to_string_pretty(&summary)?)?;
        paths.push(p);
        Ok(paths)
    }
}

/// Checks that the config's parameters deserialize for its experiment.
pub fn validate_config(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.experiment {
        Experiment::RatioScan => cfg.params::<RatioScanParams>().map(drop),
        Experiment::KnappCircle => cfg.params::<KnappParams>().map(drop),
        Experiment::CantorDichotomy => cfg.params::<CantorParams>().map(drop),
        Experiment::PolygonScaling => cfg.params::<PolygonParams>().map(drop),
        Experiment::ConvexDegree => cfg.params::<ConvexParams>().map(drop),
        Experiment::ApproxSweep => cfg.params::<ApproxParams>().map(drop),
        Experiment::RecoveryPhase => cfg.params::<RecoveryParams>().map(drop),
        Experiment::DiscreteSuite => cfg.params::<DiscreteParams>().map(drop),
        Experiment::L2Counterexample => cfg.params::<L2Params>().map(drop),
    }
}

/// Runs the configured scenario without writing anything.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let seed = cfg.seed;
    let results = match cfg.experiment {
        Experiment::RatioScan => run_ratio_scan(&cfg.params()?, seed)?,
        Experiment::KnappCircle => vec![run_knapp_circle(&cfg.params()?, seed)?],
        Experiment::CantorDichotomy => run_cantor_dichotomy(&cfg.params()?, seed)?.results(),
        Experiment::PolygonScaling => run_polygon_scaling(&cfg.params()?)?,
        Experiment::ConvexDegree => run_convex_degree(&cfg.params()?)?,
        Experiment::ApproxSweep => run_approx_sweep(&cfg.params()?, seed)?,
        Experiment::RecoveryPhase => run_recovery_phase(&cfg.params()?, seed)?,
        Experiment::DiscreteSuite => run_discrete_suite(&cfg.params()?, seed)?,
        Experiment::L2Counterexample => vec![run_l2_counterexample(&cfg.params()?)?],
    };
    Ok(RunSummary {
        experiment: cfg.experiment,
        results,
    })
}

/// Runs the configured scenario and writes its artifacts to `output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let summary = run_config(cfg)?;
    summary.write(&cfg.output_dir)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_members_build_at_small_scale() {
        for m in CorpusMember::ALL {
            let mu = m.build(16.0, 1).unwrap();
            assert_eq!(mu.label(), m.name());
            assert!(!mu.is_empty());
        }
    }

    #[test]
    fn three_dimensional_members_are_capped() {
        assert!(CorpusMember::Kplane.build(1024.0, 0).unwrap().len() <= MAX_ATOMS_3D);
        assert!(CorpusMember::Sphere3.build(1024.0, 0).unwrap().len() <= MAX_ATOMS_3D);
    }

    #[test]
    fn normal_dimensions_of_square_and_disk() {
        let sq = normal_dimension(&BodySpec::Square.build().unwrap(), false).unwrap();
        let disk = normal_dimension(&BodySpec::Disk.build().unwrap(), false).unwrap();
        assert!(sq.abs() < 0.05, "{sq}");
        assert!((disk - 1.0).abs() < 0.05, "{disk}");
    }

    #[test]
    fn body_spec_parses() {
        let v: Vec<BodySpec> = serde_json::from_str(r#"["square", {"regular": 8}, {"lacunary": 5}]"#).unwrap();
        assert_eq!(v, vec![BodySpec::Square, BodySpec::Regular(8), BodySpec::Lacunary(5)]);
    }
}
