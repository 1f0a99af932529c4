//! Basis-pursuit recovery of a nonnegative vector on `Z_n^d` from its DFT
//! with a set of frequencies unobserved.
//!
//! The solver alternates soft-thresholding in space with projection onto the
//! data-consistent set (observed coefficients overwritten), with the
//! threshold decaying geometrically (continuation).

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure::AtomicMeasure;
use crate::scalar::Scalar;
use crate::stats::loglog_slope;

/// In-place unitary DFT on a row-major `n^d` array.
pub fn fft_nd<T: Scalar>(data: &mut [Complex<T>], n: usize, dim: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let zero = Complex::new(T::zero(), T::zero());
    let mut line = vec![zero; n];
    let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
    for a in 0..dim {
        let inner = n.pow((dim - 1 - a) as u32);
        let outer = n.pow(a as u32);
        for o in 0..outer {
            for i in 0..inner {
                let base = o * n * inner + i;
                for k in 0..n {
                    line[k] = data[base + k * inner];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for k in 0..n {
                    data[base + k * inner] = line[k];
                }
            }
        }
    }
    let s = T::one() / T::of_usize(data.len()).sqrt();
    data.iter_mut().for_each(|v| *v = *v * s);
}

fn unravel(mut flat: usize, n: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; dim];
    for a in (0..dim).rev() {
        idx[a] = flat % n;
        flat /= n;
    }
    idx
}

fn ravel(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, i| acc * n + i)
}

/// Flat index of `−k` on `Z_n^d`.
pub fn mirror_index(flat: usize, n: usize, dim: usize) -> usize {
    let idx: Vec<usize> = unravel(flat, n, dim).iter().map(|i| (n - i) % n).collect();
    ravel(&idx, n)
}

/// Signed frequency magnitude `|k|` with components taken in `(−n/2, n/2]`.
fn wrapped_radius(flat: usize, n: usize, dim: usize) -> f64 {
    unravel(flat, n, dim)
        .iter()
        .map(|&i| {
            let s = if i > n / 2 { i as f64 - n as f64 } else { i as f64 };
            s * s
        })
        .sum::<f64>()
        .sqrt()
}

/// Random mask of about `fraction · n^d` frequencies, closed under `k ↦ −k`
/// so that the data of a real vector stays conjugate-symmetric.
pub fn random_symmetric_mask(n: usize, dim: usize, fraction: f64, seed: u64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(invalid("fraction", "must lie in [0, 1]"));
    }
    let total = n.pow(dim as u32);
    let target = (fraction * total as f64).round() as usize;
    let mut reps: Vec<usize> = (0..total).filter(|k| *k <= mirror_index(*k, n, dim)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    reps.shuffle(&mut rng);
    let mut mask = vec![false; total];
    let mut count = 0;
    for k in reps {
        if count >= target {
            break;
        }
        let m = mirror_index(k, n, dim);
        mask[k] = true;
        mask[m] = true;
        count += if m == k { 1 } else { 2 };
    }
    Ok(mask)
}

/// `sparsity` atoms at distinct random cell centres of `[0,1)^d` with weights
/// uniform in `[1, 2]`.
pub fn random_sparse_measure<T: Scalar>(n: usize, dim: usize, sparsity: usize, seed: u64) -> Result<AtomicMeasure<T>> {
    let total = n.pow(dim as u32);
    if sparsity == 0 || sparsity > total {
        return Err(invalid("sparsity", "must lie in 1..=n^d"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = rand::seq::index::sample(&mut rng, total, sparsity);
    let mut pts = Vec::with_capacity(sparsity * dim);
    let mut w = Vec::with_capacity(sparsity);
    for c in cells.iter() {
        for i in unravel(c, n, dim) {
            pts.push(T::lit((i as f64 + 0.5) / n as f64));
        }
        w.push(T::lit(rng.random_range(1.0..=2.0)));
    }
    AtomicMeasure::from_real(dim, pts, w, "sparse")
}

#[derive(Debug, Clone)]
pub struct RecoveryInstance<T: Scalar> {
    pub grid_side: usize,
    pub dim: usize,
    pub true_vector: Vec<T>,
    /// `true` marks an unobserved frequency.
    pub missing_mask: Vec<bool>,
    /// Full DFT with unobserved entries zeroed.
    pub observed_data: Vec<Complex<T>>,
    /// Covering-slope estimate of the support dimension.
    pub s_e_emp: Option<f64>,
    /// Growth exponent of the mask count inside frequency balls.
    pub alpha_x_emp: Option<f64>,
}

impl<T: Scalar> RecoveryInstance<T> {
    pub fn len(&self) -> usize {
        self.true_vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_vector.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing_mask.iter().filter(|m| **m).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|k| self.true_vector[*k] != T::zero()).collect()
    }
}

fn covering_slope<T: Scalar>(v: &[T], n: usize, dim: usize) -> Option<f64> {
    let occupied: Vec<Vec<usize>> = (0..v.len())
        .filter(|k| v[*k] != T::zero())
        .map(|k| unravel(k, n, dim))
        .collect();
    let mut side = n;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    while side >= 2 {
        let f = n / side;
        let mut cells: Vec<Vec<usize>> = occupied.iter().map(|c| c.iter().map(|i| i / f).collect()).collect();
        cells.sort();
        cells.dedup();
        xs.push(side as f64);
        ys.push(cells.len() as f64);
        side /= 2;
    }
    loglog_slope(&xs, &ys, 3).ok().map(|f| f.slope)
}

fn mask_growth(mask: &[bool], n: usize, dim: usize) -> Option<f64> {
    let radii: Vec<usize> = (1..).map(|j| 1usize << j).take_while(|r| *r <= n / 2).collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in radii {
        let c = (0..mask.len())
            .filter(|k| mask[*k] && wrapped_radius(*k, n, dim) <= r as f64)
            .count();
        if c > 0 {
            xs.push(r as f64);
            ys.push(c as f64);
        }
    }
    loglog_slope(&xs, &ys, 3).ok().map(|f| f.slope)
}

/// Bin a nonnegative measure on `[0,1)^d` to `Z_n^d` and hide the masked
/// frequencies.
pub fn build_instance<T: Scalar>(measure: &AtomicMeasure<T>, n: usize, missing_mask: Vec<bool>) -> Result<RecoveryInstance<T>> {
    let dim = measure.dim();
    if !n.is_power_of_two() || n < 2 || n > 256 {
        return Err(invalid("n", "must be a power of two in [2, 256]"));
    }
    let total = n.pow(dim as u32);
    if missing_mask.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: missing_mask.len(),
        });
    }
    if missing_mask.iter().all(|m| *m) {
        return Err(invalid("missing_mask", "no frequency is observed"));
    }
    let mut v = vec![T::zero(); total];
    for i in 0..measure.len() {
        let w = measure.weights()[i];
        if w.im != T::zero() || w.re < T::zero() {
            return Err(invalid("measure", "weights must be nonnegative reals"));
        }
        let idx: Vec<usize> = measure
            .point(i)
            .iter()
            .map(|x| {
                let c = (*x * T::of_usize(n)).floor().to_f64_lossy() as i64;
                c.rem_euclid(n as i64) as usize
            })
            .collect();
        v[ravel(&idx, n)] += w.re;
    }
    let mut data: Vec<Complex<T>> = v.iter().map(|x| Complex::new(*x, T::zero())).collect();
    fft_nd(&mut data, n, dim, false);
    for (d, m) in data.iter_mut().zip(&missing_mask) {
        if *m {
            *d = Complex::new(T::zero(), T::zero());
        }
    }
    Ok(RecoveryInstance {
        grid_side: n,
        dim,
        s_e_emp: covering_slope(&v, n, dim),
        alpha_x_emp: mask_growth(&missing_mask, n, dim),
        true_vector: v,
        missing_mask,
        observed_data: data,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Geometric decay of the threshold per iteration.
    pub decay: f64,
    /// Clamp negative entries after shrinkage.
    pub nonnegative: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: 1e-10,
            decay: 0.9,
            nonnegative: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult<T: Scalar> {
    pub estimate: Vec<T>,
    pub converged: bool,
    /// L² size of the last update.
    pub residual: f64,
    pub iterations: usize,
    /// `‖v‖₁` after every projection.
    pub objective: Vec<f64>,
}

impl<T: Scalar> RecoveryResult<T> {
    pub fn max_abs_error(&self, truth: &[T]) -> f64 {
        self.estimate
            .iter()
            .zip(truth)
            .map(|(a, b)| (*a - *b).abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }
}

struct Projector<'a, T: Scalar> {
    inst: &'a RecoveryInstance<T>,
    buf: Vec<Complex<T>>,
}

impl<T: Scalar> Projector<'_, T> {
    fn project(&mut self, u: &[T], out: &mut [T]) {
        let inst = self.inst;
        for (b, x) in self.buf.iter_mut().zip(u) {
            *b = Complex::new(*x, T::zero());
        }
        fft_nd(&mut self.buf, inst.grid_side, inst.dim, false);
        for ((b, o), m) in self.buf.iter_mut().zip(&inst.observed_data).zip(&inst.missing_mask) {
            if !*m {
                *b = *o;
            }
        }
        fft_nd(&mut self.buf, inst.grid_side, inst.dim, true);
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re;
        }
    }
}

fn shrink<T: Scalar>(v: &[T], lambda: T, nonnegative: bool, out: &mut [T]) {
    for (o, x) in out.iter_mut().zip(v) {
        let mag = (x.abs() - lambda).max(T::zero());
        *o = if nonnegative {
            if *x > T::zero() { mag } else { T::zero() }
        } else {
            mag * x.signum()
        };
    }
}

fn l2_dist<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (*x - *y).to_f64_lossy();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `min ‖v‖₁` subject to agreeing with the observed DFT coefficients.
///
/// Starts from the projection of zero; converged once the iterate is a fixed
/// point (to `tol`) of the final-threshold map.
pub fn recover_l1<T: Scalar>(inst: &RecoveryInstance<T>, opts: &SolverOptions) -> Result<RecoveryResult<T>> {
    if !(opts.decay > 0.0 && opts.decay < 1.0) {
        return Err(invalid("decay", "must lie in (0, 1)"));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let len = inst.len();
    let mut proj = Projector {
        inst,
        buf: vec![Complex::new(T::zero(), T::zero()); len],
    };
    let zero = vec![T::zero(); len];
    let mut v = vec![T::zero(); len];
    proj.project(&zero, &mut v);
    let scale = v.iter().map(|x| x.abs().to_f64_lossy()).fold(0.0, f64::max);
    let lambda_floor = opts.tol * scale.max(f64::MIN_POSITIVE);
    let mut lambda = scale;
    let l1 = |x: &[T]| x.iter().map(|a| a.abs().to_f64_lossy()).sum::<f64>();
    let mut objective = vec![l1(&v)];
    let mut u = vec![T::zero(); len];
    let mut next = vec![T::zero(); len];
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iters {
        shrink(&v, T::lit(lambda), opts.nonnegative, &mut u);
        proj.project(&u, &mut next);
        residual = l2_dist(&next, &v);
        std::mem::swap(&mut v, &mut next);
        objective.push(l1(&v));
        if residual < opts.tol {
            // confirm against the final threshold before stopping
            shrink(&v, T::lit(lambda_floor), opts.nonnegative, &mut u);
            proj.project(&u, &mut next);
            if l2_dist(&next, &v) < opts.tol {
                return Ok(RecoveryResult {
                    estimate: v,
                    converged: true,
                    residual,
                    iterations: it,
                    objective,
                });
            }
        }
        lambda = (lambda * opts.decay).max(lambda_floor);
    }
    Ok(RecoveryResult {
        estimate: v,
        converged: false,
        residual,
        iterations: opts.max_iters,
        objective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryOutcome {
    pub seed: u64,
    pub s_e_emp: f64,
    pub alpha_x_emp: f64,
    pub converged: bool,
    pub exact: bool,
    pub max_abs_error: f64,
    pub iterations: usize,
}

/// One random trial: sparse measure, symmetric random mask, solve.
pub fn recovery_trial(
    n: usize,
    dim: usize,
    sparsity: usize,
    mask_fraction: f64,
    seed: u64,
    opts: &SolverOptions,
    exact_tol: f64,
) -> Result<RecoveryOutcome> {
    let m = random_sparse_measure::<f64>(n, dim, sparsity, seed)?;
    let mask = random_symmetric_mask(n, dim, mask_fraction, seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ 1)?;
    let inst = build_instance(&m, n, mask)?;
    let res = recover_l1(&inst, opts)?;
    let err = res.max_abs_error(&inst.true_vector);
    Ok(RecoveryOutcome {
        seed,
        s_e_emp: inst.s_e_emp.unwrap_or(f64::NAN),
        alpha_x_emp: inst.alpha_x_emp.unwrap_or(f64::NAN),
        converged: res.converged,
        exact: err < exact_tol,
        max_abs_error: err,
        iterations: res.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_nd_is_unitary_and_invertible() {
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Complex<f64>> = (0..n * n)
            .map(|_| Complex::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let mut y = x.clone();
        fft_nd(&mut y, n, 2, false);
        let nx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ny: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((nx - ny).abs() < 1e-12 * nx);
        fft_nd(&mut y, n, 2, true);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn delta_transform_is_flat() {
        let n = 4;
        let mut x = vec![Complex::<f64>::new(0.0, 0.0); n * n];
        x[0] = Complex::new(1.0, 0.0);
        fft_nd(&mut x, n, 2, false);
        assert!(x.iter().all(|v| (v.re - 0.25).abs() < 1e-15 && v.im.abs() < 1e-15));
    }

    #[test]
    fn mask_is_symmetric_with_requested_size() {
        let n = 16;
        let mask = random_symmetric_mask(n, 2, 0.1, 3).unwrap();
        let count = mask.iter().filter(|m| **m).count();
        assert!((count as f64 - 25.6).abs() <= 2.0);
        for k in 0..mask.len() {
            assert_eq!(mask[k], mask[mirror_index(k, n, 2)]);
        }
        assert!(random_symmetric_mask(n, 2, 1.5, 0).is_err());
    }

    #[test]
    fn instance_rejects_bad_inputs() {
        let m = random_sparse_measure::<f64>(16, 2, 3, 0).unwrap();
        assert!(build_instance(&m, 16, vec![true; 256]).is_err());
        assert!(build_instance(&m, 12, vec![false; 144]).is_err());
        assert!(build_instance(&m, 16, vec![false; 10]).is_err());
    }

    #[test]
    fn empty_mask_recovers_in_one_step() {
        let m = random_sparse_measure::<f64>(32, 2, 5, 9).unwrap();
        let inst = build_instance(&m, 32, vec![false; 1024]).unwrap();
        assert_eq!(inst.support().len(), 5);
        let res = recover_l1(&inst, &SolverOptions::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert!(res.residual < 1e-10);
        assert!(res.max_abs_error(&inst.true_vector) < 1e-10);
    }

    #[test]
    fn sparse_recovery_with_small_mask() {
        let out = recovery_trial(64, 2, 5, 0.03, 4, &SolverOptions::default(), 1e-6).unwrap();
        assert!(out.converged && out.exact, "{out:?}");
    }

    #[test]
    fn estimate_is_data_consistent() {
        let m = random_sparse_measure::<f64>(32, 2, 4, 2).unwrap();
        let mask = random_symmetric_mask(32, 2, 0.05, 2).unwrap();
        let inst = build_instance(&m, 32, mask).unwrap();
        let res = recover_l1(&inst, &SolverOptions::default()).unwrap();
        let mut d: Vec<Complex<f64>> = res.estimate.iter().map(|x| Complex::new(*x, 0.0)).collect();
        fft_nd(&mut d, 32, 2, false);
        for k in 0..d.len() {
            if !inst.missing_mask[k] {
                assert!((d[k] - inst.observed_data[k]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn sparse_support_has_small_covering_slope() {
        let m = random_sparse_measure::<f64>(64, 2, 3, 1).unwrap();
        let inst = build_instance(&m, 64, vec![false; 4096]).unwrap();
        assert!(inst.s_e_emp.unwrap() < 0.5);
        let full = AtomicMeasure::from_real(
            2,
            (0..64 * 64).flat_map(|k| [((k / 64) as f64 + 0.5) / 64.0, ((k % 64) as f64 + 0.5) / 64.0]).collect(),
            vec![1.0; 4096],
            "full",
        )
        .unwrap();
        let inst = build_instance(&full, 64, vec![false; 4096]).unwrap();
        assert!((inst.s_e_emp.unwrap() - 2.0).abs() < 1e-9);
    }
}
