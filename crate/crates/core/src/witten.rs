//! Witten deformation by cell weights.
//!
//! For a cell function `F`, the deformed coboundary is `e^{tF} δ e^{-tF}`:
//! block entry `(σ, τ)` picks up `e^{t(F(τ) − F(σ))}`. Conjugation keeps the
//! complex isomorphic to the original one, while the spectrum of the
//! Laplacian separates into a small cluster over the critical cells of a
//! matching and a large remainder.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{fit_line, verify_chain_map, ChainMap, HilbertComplex};
use crate::error::{Error, Result};
use crate::flatcw::{CellularComplex, CwComplexData};
use crate::module::{HilbertModule, ModuleMorphism};
use crate::truncation::{homotopy_certificate, truncate, HomotopyCertificate, TruncatedComplex};

/// Floor used for the small side of gap ratios and log fits.
pub const SMALL_FLOOR: f64 = 1e-300;
/// Accepted deviation of a critical value from its dimension.
pub const SELF_INDEXING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseData {
  pub values:        BTreeMap<String, f64>,
  /// Pairs `(p-cell, (p+1)-cell)`.
  #[serde(default)]
  pub matching:      Vec<(String, String)>,
  #[serde(default)]
  pub self_indexing: bool,
}

impl MorseData {
  /// Morse data with `F ≡ 0` and no matching.
  pub fn zero(cw: &CwComplexData) -> Self {
    let values = cw.cells.iter().flatten().map(|c| (c.clone(), 0.0)).collect();
    Self { values, matching: Vec::new(), self_indexing: false }
  }

  /// Checks values, the matching and the self-indexing flag against `cw`.
  pub fn validate(&self, cw: &CwComplexData) -> Result<()> {
    let index = cw.index()?;
    for c in cw.cells.iter().flatten() {
      match self.values.get(c) {
        Some(v) if v.is_finite() => {}
        Some(v) => return Err(Error::InvalidParameter(format!("Morse value {v} on `{c}`"))),
        None => return Err(Error::MissingCellValue(c.clone())),
      }
    }
    let mut used = HashSet::new();
    for (lo, hi) in &self.matching {
      let &(plo, _) = index.get(lo).ok_or_else(|| Error::UnknownCell(lo.clone()))?;
      let &(phi, _) = index.get(hi).ok_or_else(|| Error::UnknownCell(hi.clone()))?;
      if phi != plo + 1 {
        return Err(Error::InvalidMatching(format!("`{lo}` and `{hi}` differ in dimension by {}", phi as i64 - plo as i64)));
      }
      for c in [lo, hi] {
        if !used.insert(c.as_str()) {
          return Err(Error::InvalidMatching(format!("`{c}` appears in two pairs")));
        }
      }
      if !cw.boundary(hi).iter().any(|t| &t.face == lo) {
        return Err(Error::InvalidMatching(format!("`{lo}` is not a face of `{hi}`")));
      }
    }
    if self.self_indexing {
      for (p, cells) in cw.cells.iter().enumerate() {
        for c in cells.iter().filter(|c| !used.contains(c.as_str())) {
          let v = self.values[c];
          if (v - p as f64).abs() > SELF_INDEXING_TOL {
            return Err(Error::InvalidMatching(format!("critical {p}-cell `{c}` has value {v}")));
          }
        }
      }
    }
    Ok(())
  }

  /// Unmatched cells per dimension.
  pub fn critical_cells(&self, cw: &CwComplexData) -> Vec<Vec<String>> {
    let matched: HashSet<&str> = self.matching.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
    cw.cells.iter().map(|cs| cs.iter().filter(|c| !matched.contains(c.as_str())).cloned().collect()).collect()
  }
}

fn cell_values(cx: &CellularComplex, f: &MorseData) -> Result<Vec<Vec<f64>>> {
  cx.cells
    .iter()
    .map(|cs| cs.iter().map(|c| f.values.get(c).copied().ok_or_else(|| Error::MissingCellValue(c.clone()))).collect())
    .collect()
}

/// `δ_t = e^{tF} δ e^{-tF}`; `t = 0` returns the input unchanged.
pub fn deform(cx: &CellularComplex, f: &MorseData, t: f64) -> Result<CellularComplex> {
  let values = cell_values(cx, f)?;
  if t == 0.0 {
    return Ok(cx.clone());
  }
  let mult = cx.fiber.mult().to_vec();
  let complex = cx.complex.map_differentials(|p, d| {
    d.map_blocks(|i, b| {
      let m = mult[i];
      let mut out = b.clone();
      for (r, fs) in values[p + 1].iter().enumerate() {
        for (col, ft) in values[p].iter().enumerate() {
          let s = (t * (ft - fs)).exp();
          let mut view = out.view_mut((r * m, col * m), (m, m));
          view *= crate::linalg::c(s, 0.0);
        }
      }
      out
    })
  })?;
  Ok(CellularComplex { complex, cells: cx.cells.clone(), fiber: cx.fiber.clone() })
}

/// `e^t (t/π)^{-1/2}`.
pub fn scale_factor(t: f64) -> Result<f64> {
  if !(t > 0.0) {
    return Err(Error::NonpositiveT(t));
  }
  Ok(t.exp() / (t / PI).sqrt())
}

/// The deformed differentials multiplied by [`scale_factor`].
pub fn scaled_deform(cx: &CellularComplex, f: &MorseData, t: f64) -> Result<CellularComplex> {
  let s = scale_factor(t)?;
  let base = deform(cx, f, t)?;
  let complex = base.complex.map_differentials(|_, d| d.scale(s))?;
  Ok(CellularComplex { complex, ..base })
}

/// `(#critical p-cells) · dim_τ(M)` per degree.
pub fn morse_complex_dims(f: &MorseData, cw: &CwComplexData, fiber: &HilbertModule) -> Vec<f64> {
  f.critical_cells(cw)
    .iter()
    .map(|cs| fiber.algebra().weighted_count(fiber.mult().iter().map(|&m| m * cs.len())))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
  pub t:           f64,
  pub degree:      usize,
  /// ν-weighted number of eigenvalues below the split.
  pub small_count: f64,
  pub max_small:   Option<f64>,
  pub min_large:   Option<f64>,
  /// `min_large / max(max_small, floor)`.
  pub ratio:       Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeTrend {
  pub degree:     usize,
  /// Slope of `log max(max_small, floor)` against `t`.
  pub slope:      Option<f64>,
  /// Whether `max_small` strictly decreases on the grid from `t0` on.
  pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
  pub split:      f64,
  pub rows:       Vec<GapRow>,
  pub trends:     Vec<DegreeTrend>,
  pub morse_dims: Vec<f64>,
  /// First grid `t` from which the small counts equal `morse_dims` for good.
  pub t0:         Option<f64>,
}

impl GapReport {
  pub fn to_csv(&self) -> String {
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:e}"));
    let mut s = String::from("t,degree,small_count,max_small,min_large,ratio\n");
    for r in &self.rows {
      s += &format!("{},{},{},{},{},{}\n", r.t, r.degree, r.small_count, opt(r.max_small), opt(r.min_large), opt(r.ratio));
    }
    s
  }

  pub fn rows_at(&self, t: f64) -> impl Iterator<Item = &GapRow> { self.rows.iter().filter(move |r| r.t == t) }
}

fn gap_rows(cx: &HilbertComplex, t: f64, split: f64) -> Result<Vec<GapRow>> {
  (0..cx.len())
    .map(|p| {
      let spec = cx.spectrum(p)?;
      let small_count = spec.algebra().weighted_count(spec.counts_below(split));
      let all = spec.blocks.iter().flat_map(|b| b.values.iter().copied());
      let max_small = all.clone().filter(|&v| v < split).reduce(f64::max);
      let min_large = all.filter(|&v| v >= split).reduce(f64::min);
      let ratio = min_large.map(|l| l / max_small.unwrap_or(0.0).max(SMALL_FLOOR));
      Ok(GapRow { t, degree: p, small_count, max_small, min_large, ratio })
    })
    .collect()
}

/// Eigensolves `Δ_t` per degree on every grid point.
pub fn gap_scan(cx: &CellularComplex, f: &MorseData, t_grid: &[f64], split: f64) -> Result<GapReport> {
  if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
    return Err(Error::InvalidParameter("t grid must be finite and increasing".into()));
  }
  if !(split > 0.0) {
    return Err(Error::InvalidParameter(format!("split λ = {split}")));
  }
  let cw = CwComplexData { cells: cx.cells.clone(), incidence: Vec::new() };
  let morse_dims = morse_complex_dims(f, &cw, &cx.fiber);
  let per_t: Vec<Vec<GapRow>> =
    t_grid.par_iter().map(|&t| gap_rows(&deform(cx, f, t)?.complex, t, split)).collect::<Result<_>>()?;

  let matches = |rows: &[GapRow]| rows.iter().all(|r| morse_dims.get(r.degree) == Some(&r.small_count));
  let k0 = match per_t.iter().rposition(|rows| !matches(rows)) {
    Some(k) if k + 1 < per_t.len() => Some(k + 1),
    Some(_) => None,
    None => (!per_t.is_empty()).then_some(0),
  };
  let t0 = k0.map(|k| t_grid[k]);

  let degrees = cx.complex.len();
  let trends = (0..degrees)
    .map(|p| {
      let series: Vec<f64> = per_t.iter().map(|rows| rows[p].max_small.unwrap_or(0.0).max(SMALL_FLOOR)).collect();
      let logs: Vec<f64> = series.iter().map(|v| v.ln()).collect();
      let slope = fit_line(t_grid, &logs).map(|fit| fit.slope);
      let from = k0.unwrap_or(0);
      let decreasing = series[from..].windows(2).all(|w| w[1] < w[0]);
      DegreeTrend { degree: p, slope, decreasing }
    })
    .collect();
  Ok(GapReport { split, rows: per_t.into_iter().flatten().collect(), trends, morse_dims, t0 })
}

/// Small/large splitting of the deformed complex at one `t`.
#[derive(Debug, Clone)]
pub struct SmallSplit {
  pub t:           f64,
  pub deformed:    CellularComplex,
  pub small:       TruncatedComplex,
  pub p_sm:        ChainMap,
  pub p_la:        ChainMap,
  /// Chain-map residuals of `P_sm` and `P_la`.
  pub residuals:   [f64; 2],
  pub certificate: HomotopyCertificate,
}

pub fn small_split(cx: &CellularComplex, f: &MorseData, t: f64, split: f64) -> Result<SmallSplit> {
  let deformed = deform(cx, f, t)?;
  let c = &deformed.complex;
  let small = truncate(c, split, false)?;
  let certificate = homotopy_certificate(c, split)?;
  let p_sm = small.spectral_projector.clone();
  let p_la = ChainMap::new(
    p_sm.maps.iter().map(|e| ModuleMorphism::identity(e.source()).sub(e)).collect::<Result<Vec<_>>>()?,
  );
  let residuals = [verify_chain_map(&p_sm, c, c)?, verify_chain_map(&p_la, c, c)?];
  let tol = c.tolerances().chain_map;
  for (what, r) in [("P_sm", residuals[0]), ("P_la", residuals[1])] {
    if r > tol {
      return Err(Error::ChainMapFailed { what: what.into(), residual: r });
    }
  }
  Ok(SmallSplit { t, deformed, small, p_sm, p_la, residuals, certificate })
}
