//! Ordinary least squares for exponent fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fit of `y ≈ intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; 0 for an exact fit through two points.
    pub slope_se: f64,
    pub points: usize,
}

impl LinearFit {
    /// `slope - k·se > bound`.
    pub fn slope_above(&self, bound: f64, k: f64) -> bool {
        self.slope - k * self.slope_se > bound
    }

    /// `slope + k·se < bound`.
    pub fn slope_below(&self, bound: f64, k: f64) -> bool {
        self.slope + k * self.slope_se < bound
    }
}

/// Least squares over finite points; needs three of them with distinct
/// abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!("{n} usable points, need at least 3")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * nf * mx.abs().max(1.0) {
        return Err(Error::DegenerateFit("abscissae do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let slope_se = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        points: n,
    })
}

/// Fit over the second half of the samples, which suppresses transients.
pub fn tail_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let start = xs.len() / 2;
    linear_fit(&xs[start..], &ys[start..])
}
