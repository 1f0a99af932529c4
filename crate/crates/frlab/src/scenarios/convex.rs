//! Degree growth of convex boundary measures against the normal-set dimension.

use fourier_ratio::geometry::{build_normal_cone_set, concentration_fraction};
use fourier_ratio::stats::loglog_slope;
use fourier_ratio::trig::degree_for_l2;
use serde::Deserialize;

use super::{analyze_default, boundary_measure, normal_dimension, BodySpec};
use crate::error::{Error, Result};
use crate::scan::{validate_dyadic, Band, ScanResult, MIN_FIT_POINTS};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvexParams {
    pub bodies: Vec<BodySpec>,
    #[serde(rename = "R_list")]
    pub r_list: Vec<f64>,
    pub eta: f64,
    /// Allowed `|degree slope − (â + 1)|`.
    pub tolerance: f64,
    /// Concentration outside the cone set at the largest `R` must stay below this.
    pub concentration_max: f64,
    /// Whether vertex fans belong to the normal-cone set.
    pub cone_fans: bool,
    /// Whether vertex fans enter the normal-set dimension estimate.
    pub dimension_fans: bool,
    pub atoms_per_cell: f64,
}

impl Default for ConvexParams {
    fn default() -> Self {
        Self {
            bodies: vec![BodySpec::Square, BodySpec::Disk, BodySpec::Lacunary(6)],
            r_list: vec![64.0, 128.0, 256.0, 512.0],
            eta: 0.5,
            tolerance: 0.35,
            concentration_max: 0.5,
            cone_fans: true,
            dimension_fans: false,
            atoms_per_cell: 4.0,
        }
    }
}

/// Per body: `â` from the normal set, `FR`, the L² degree, and the L¹ mass
/// fraction outside the normal-cone set at each `R`.
pub fn run_convex_degree(p: &ConvexParams) -> Result<Vec<ScanResult>> {
    validate_dyadic(&p.r_list, 16.0, 1024.0)?;
    if !p.bodies.iter().any(|b| b.is_polygon()) || !p.bodies.contains(&BodySpec::Disk) {
        return Err(Error::Config("convex_degree needs a polygon and the disk".into()));
    }
    let r_max = p.r_list.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for spec in &p.bodies {
        let body = spec.build()?;
        let a_hat = normal_dimension(&body, p.dimension_fans)?;
        let mut scan = ScanResult::new(
            format!("convex_{}", spec.name()),
            &["R", "FR", "degree_l2", "concentration", "nodes"],
        );
        let mut conc_at_max = f64::NAN;
        for &r in &p.r_list {
            let m = boundary_measure(&body, r, p.atoms_per_cell)?;
            let (rep, field) = analyze_default(&m, r)?;
            let set = build_normal_cone_set(&body, r, &field.nodes, p.cone_fans)?;
            let eta = concentration_fraction(&field, &set)?;
            if r == r_max {
                conc_at_max = eta;
            }
            let k = degree_for_l2(&rep, p.eta)?;
            scan.push(vec![r, rep.fr, k as f64, eta, rep.nodes as f64]);
        }
        let slope = loglog_slope(&scan.column("R")?, &scan.column("degree_l2")?, MIN_FIT_POINTS)?.slope;
        scan.fit("R", "degree_l2", Some(Band::around(a_hat + 1.0, p.tolerance)))?;
        scan.check("a_hat", a_hat, Band::new(0.0, 1.0));
        scan.check("degree_slope_minus_a_hat_plus_1", slope - (a_hat + 1.0), Band::around(0.0, p.tolerance));
        scan.check("concentration_at_max_R", conc_at_max, Band::new(0.0, p.concentration_max));
        out.push(scan);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_polygon_and_disk() {
        let p = ConvexParams {
            bodies: vec![BodySpec::Disk],
            ..ConvexParams::default()
        };
        assert!(run_convex_degree(&p).is_err());
    }
}
