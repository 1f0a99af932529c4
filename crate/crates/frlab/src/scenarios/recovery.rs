//! Exact recovery from incomplete Fourier data.

use fourier_ratio::recovery::{build_instance, recover_l1, recovery_trial, SolverOptions};
use fourier_ratio::AtomicMeasure64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scan::{Band, ScanResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoveryParams {
    /// Grid side (a power of two).
    pub n: usize,
    pub dim: usize,
    pub sparsity: usize,
    pub mask_fraction: f64,
    pub seeds: usize,
    pub success_min: f64,
    pub exact_tol: f64,
    pub max_iters: usize,
    /// Also run the structured comb with its dual comb masked.
    pub adversarial: bool,
    /// Optional phase diagram over `(sparsity, mask_fraction)`.
    pub sweep_sparsity: Vec<usize>,
    pub sweep_mask: Vec<f64>,
    pub sweep_seeds: usize,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        Self {
            n: 64,
            dim: 2,
            sparsity: 5,
            mask_fraction: 0.03,
            seeds: 50,
            success_min: 0.95,
            exact_tol: 1e-6,
            max_iters: SolverOptions::default().max_iters,
            adversarial: true,
            sweep_sparsity: Vec::new(),
            sweep_mask: Vec::new(),
            sweep_seeds: 10,
        }
    }
}

/// Comb with period `n/teeth` per axis.  Its spectrum is the dual comb, so
/// masking every nonzero dual frequency leaves data that the flat measure of
/// equal mass (and equal L¹ norm) reproduces as well.
pub fn comb_instance(n: usize, dim: usize, teeth: usize) -> Result<(AtomicMeasure64, Vec<bool>)> {
    if teeth == 0 || n % teeth != 0 {
        return Err(Error::Config("comb teeth must divide the grid side".into()));
    }
    let period = n / teeth;
    let count = teeth.pow(dim as u32);
    let mut pts = Vec::with_capacity(count * dim);
    for flat in 0..count {
        let mut f = flat;
        for _ in 0..dim {
            pts.push(((f % teeth) * period) as f64 / n as f64 + 0.5 / n as f64);
            f /= teeth;
        }
    }
    let m = AtomicMeasure64::from_real(dim, pts, vec![1.0; count], "comb")?;
    let total = n.pow(dim as u32);
    let mask = (0..total)
        .map(|flat| {
            let mut f = flat;
            let mut on_dual = true;
            let mut zero = true;
            for _ in 0..dim {
                let k = f % n;
                on_dual &= k % teeth == 0;
                zero &= k == 0;
                f /= n;
            }
            on_dual && !zero
        })
        .collect();
    Ok((m, mask))
}

pub fn run_recovery_phase(p: &RecoveryParams, seed: u64) -> Result<Vec<ScanResult>> {
    if p.seeds == 0 {
        return Err(Error::Config("recovery_phase needs at least one seed".into()));
    }
    let opts = SolverOptions {
        max_iters: p.max_iters,
        ..SolverOptions::default()
    };
    let mut trials = ScanResult::new(
        "recovery_trials",
        &["seed", "s_e_emp", "alpha_x_emp", "converged", "exact", "max_abs_error", "iterations"],
    );
    let mut exact = 0usize;
    for s in 0..p.seeds as u64 {
        let t = recovery_trial(p.n, p.dim, p.sparsity, p.mask_fraction, seed.wrapping_add(s), &opts, p.exact_tol)?;
        exact += t.exact as usize;
        trials.push(vec![
            t.seed as f64,
            t.s_e_emp,
            t.alpha_x_emp,
            if t.converged { 1.0 } else { 0.0 },
            if t.exact { 1.0 } else { 0.0 },
            t.max_abs_error,
            t.iterations as f64,
        ]);
    }
    trials.check("success_rate", exact as f64 / p.seeds as f64, Band::at_least(p.success_min));
    let mut out = vec![trials];

    if p.adversarial {
        // 8 teeth per axis on the default grid: 1.5% of frequencies masked
        let teeth = (p.n / 8).max(2);
        let (m, mask) = comb_instance(p.n, p.dim, teeth)?;
        let inst = build_instance(&m, p.n, mask)?;
        let res = recover_l1(&inst, &opts)?;
        let mut adv = ScanResult::new(
            "recovery_adversarial",
            &["teeth", "missing_fraction", "max_abs_error", "converged"],
        );
        adv.push(vec![
            teeth as f64,
            inst.missing_count() as f64 / inst.len() as f64,
            res.max_abs_error(&inst.true_vector),
            if res.converged { 1.0 } else { 0.0 },
        ]);
        out.push(adv);
    }

    if !p.sweep_sparsity.is_empty() && !p.sweep_mask.is_empty() {
        let mut phase = ScanResult::new("recovery_phase", &["sparsity", "mask_fraction", "success_rate"]);
        for &s in &p.sweep_sparsity {
            for &f in &p.sweep_mask {
                let mut ok = 0usize;
                for t in 0..p.sweep_seeds.max(1) as u64 {
                    ok += recovery_trial(p.n, p.dim, s, f, seed.wrapping_add(t), &opts, p.exact_tol)?.exact as usize;
                }
                phase.push(vec![s as f64, f, ok as f64 / p.sweep_seeds.max(1) as f64]);
            }
        }
        out.push(phase);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comb_mask_hits_only_the_dual_comb() {
        let (m, mask) = comb_instance(16, 2, 4).unwrap();
        assert_eq!(m.len(), 16);
        assert_eq!(mask.iter().filter(|b| **b).count(), 15);
        assert!(!mask[0]);
        assert!(mask[4] && mask[4 * 16]);
        assert!(!mask[1]);
    }

    #[test]
    fn comb_is_not_recovered() {
        let (m, mask) = comb_instance(16, 2, 4).unwrap();
        let inst = build_instance(&m, 16, mask).unwrap();
        let res = recover_l1(&inst, &SolverOptions::default()).unwrap();
        assert!(res.max_abs_error(&inst.true_vector) > 1e-3);
    }

    #[test]
    fn small_run_passes() {
        let p = RecoveryParams {
            n: 32,
            seeds: 5,
            adversarial: false,
            ..RecoveryParams::default()
        };
        let out = run_recovery_phase(&p, 1).unwrap();
        assert!(out[0].pass, "{:?}", out[0].checks);
    }
}
