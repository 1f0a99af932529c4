//! Tabular scenario results with a log-log slope fit and acceptance checks.

use std::path::{Path, PathBuf};

use fourier_ratio::stats::{loglog_slope, LineFit};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::plot::loglog_svg;

/// Fewest scales a slope fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

/// Inclusive acceptance window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn around(centre: f64, halfwidth: f64) -> Self {
        Self::new(centre - halfwidth, centre + halfwidth)
    }

    pub fn at_most(hi: f64) -> Self {
        Self::new(f64::NEG_INFINITY, hi)
    }

    pub fn at_least(lo: f64) -> Self {
        Self::new(lo, f64::INFINITY)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn describe(&self) -> String {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => format!("[{}, {}]", self.lo, self.hi),
            (false, true) => format!("<= {}", self.hi),
            (true, false) => format!(">= {}", self.lo),
            (false, false) => "any".into(),
        }
    }
}

/// Fitted `log y = a + b log x` over two named columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub x: String,
    pub y: String,
    pub line: LineFit,
    pub band: Option<Band>,
}

/// A named scalar check beside the slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub band: Band,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub name: String,
    pub columns: Vec<String>,
    /// Sorted by the first column (normally `R`).
    pub rows: Vec<Vec<f64>>,
    pub fitted_slope: Option<SlopeFit>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Rejects scale lists that are not ≥ 4 distinct powers of two in `[lo, hi]`.
pub fn validate_dyadic(r_list: &[f64], lo: f64, hi: f64) -> Result<()> {
    if r_list.len() < MIN_FIT_POINTS {
        return Err(Error::Config(format!(
            "R_list needs at least {MIN_FIT_POINTS} values, got {}",
            r_list.len()
        )));
    }
    for &r in r_list {
        let e = r.log2();
        if !(r >= lo && r <= hi) || (e - e.round()).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "R = {r} is not a power of two in [{lo}, {hi}]"
            )));
        }
    }
    let mut sorted = r_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() != r_list.len() {
        return Err(Error::Config("R_list has repeated values".into()));
    }
    Ok(())
}

impl ScanResult {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fitted_slope: None,
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
        self.rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("no column `{name}` in {}", self.name)))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Fits the log-log slope of `y` against `x`; the result passes only if
    /// the slope lies in `band`.
    pub fn fit(&mut self, x: &str, y: &str, band: Option<Band>) -> Result<LineFit> {
        let xs = self.column(x)?;
        let ys = self.column(y)?;
        let line = loglog_slope(&xs, &ys, MIN_FIT_POINTS)?;
        if let Some(b) = band {
            self.pass &= b.contains(line.slope);
        }
        self.fitted_slope = Some(SlopeFit {
            x: x.into(),
            y: y.into(),
            line,
            band,
        });
        Ok(line)
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, band: Band) -> bool {
        let pass = band.contains(value);
        self.pass &= pass;
        self.checks.push(Check {
            name: name.into(),
            value,
            band,
            pass,
        });
        pass
    }

    pub fn slope(&self) -> Option<f64> {
        self.fitted_slope.as_ref().map(|f| f.line.slope)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Plot of the fitted columns, or of the first two columns when unfitted.
    pub fn to_svg(&self) -> Result<String> {
        let (x, y) = match &self.fitted_slope {
            Some(f) => (f.x.clone(), f.y.clone()),
            None => (
                self.columns[0].clone(),
                self.columns.get(1).cloned().unwrap_or_else(|| self.columns[0].clone()),
            ),
        };
        let pts: Vec<(f64, f64)> = self
            .column(&x)?
            .into_iter()
            .zip(self.column(&y)?)
            .collect();
        let fit = self.fitted_slope.as_ref();
        Ok(loglog_svg(
            &self.name,
            &x,
            &y,
            &pts,
            fit.map(|f| &f.line),
            fit.and_then(|f| f.band),
        ))
    }

    /// Writes `<name>.csv`, `<name>.svg` and `<name>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let svg_path = dir.join(format!("{}.svg", self.name));
        let json_path = dir.join(format!("{}.json", self.name));
        std::fs::write(&csv_path, self.to_csv()?)?;
        std::fs::write(&svg_path, self.to_svg()?)?;
        std::fs::write(&json_path, serde_json::to_string_pretty(&self.summary())?)?;
        Ok(vec![csv_path, svg_path, json_path])
    }

    /// Everything except the rows.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "fitted_slope": self.fitted_slope,
            "checks": self.checks,
            "pass": self.pass,
        })
    }
}
