//! Comparison of extended-cohomology invariants between two complexes.

use serde::Serialize;

use crate::complex::{ns_exponent, HilbertComplex};
use crate::error::{Error, Result};
use crate::module::same_algebra;

pub const BETTI_TOL: f64 = 1e-8;
pub const SLOPE_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeComparison {
  pub degree:     usize,
  pub betti:      [f64; 2],
  pub betti_diff: f64,
  /// Near-zero density slopes, when both densities exceed their kernel part
  /// on the whole window.
  pub slopes:     Option<[f64; 2]>,
  pub slope_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
  pub window:  (f64, f64),
  pub points:  usize,
  pub degrees: Vec<DegreeComparison>,
  pub verdict: bool,
}

/// `points` log-spaced values covering `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
  if !(lo > 0.0 && hi > lo) || points < 2 {
    return Err(Error::InvalidParameter(format!("bad log grid {lo}:{hi}:{points}")));
  }
  let (a, b) = (lo.ln(), hi.ln());
  Ok((0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()).collect())
}

/// Per-degree Betti and near-zero slope differences on a log grid over `window`.
pub fn compare_invariants(a: &HilbertComplex, b: &HilbertComplex, window: (f64, f64), points: usize) -> Result<ComparisonReport> {
  if !same_algebra(a.algebra(), b.algebra()) {
    return Err(Error::ShapeMismatch("compared complexes live over different algebras".into()));
  }
  if a.len() != b.len() {
    return Err(Error::ShapeMismatch(format!("complexes of length {} and {}", a.len(), b.len())));
  }
  let grid = log_grid(window.0, window.1, points)?;
  let mut verdict = true;
  let mut degrees = Vec::new();
  for p in 0..a.len() {
    let (sa, sb) = (a.spectrum(p)?, b.spectrum(p)?);
    let (ba, bb) = (sa.betti(a.tolerances()).value, sb.betti(b.tolerances()).value);
    let betti_diff = (ba - bb).abs();
    verdict &= betti_diff <= BETTI_TOL;
    let fa = sa.density(&grid, a.module(p).dim_tau(), a.tolerances().tie_band)?;
    let fb = sb.density(&grid, b.module(p).dim_tau(), b.tolerances().tie_band)?;
    let slopes = match (ns_exponent(&fa, ba, window), ns_exponent(&fb, bb, window)) {
      (Ok(x), Ok(y)) => Some([x.slope, y.slope]),
      _ => None,
    };
    let slope_diff = slopes.map(|[x, y]| (x - y).abs());
    if let Some(d) = slope_diff {
      verdict &= d <= SLOPE_TOL;
    }
    degrees.push(DegreeComparison { degree: p, betti: [ba, bb], betti_diff, slopes, slope_diff });
  }
  Ok(ComparisonReport { window, points, degrees, verdict })
}
