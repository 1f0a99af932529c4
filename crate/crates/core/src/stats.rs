//! Small statistics helpers used by experiments and tests.

use crate::error::{Error, Result};

/// Least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

impl LineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares; needs at least `min_points` pairs.
pub fn fit_line(xs: &[f64], ys: &[f64], min_points: usize) -> Result<LineFit> {
    let n = xs.len().min(ys.len());
    if n < min_points.max(2) {
        return Err(Error::TooFewPoints {
            need: min_points.max(2),
            got: n,
        });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

/// Slope of `log y` against `log x` (natural logs; the slope is base-free).
pub fn loglog_slope(xs: &[f64], ys: &[f64], min_points: usize) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Degenerate("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly, min_points)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
