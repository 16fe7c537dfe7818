//! Hilbert cochain complexes of finite length.
//!
//! A complex is a sequence of modules `C^0 … C^n` with bounded differentials
//! `d_p : C^p → C^{p+1}` satisfying `d_{p+1} d_p = 0`. Everything spectral is
//! computed blockwise from the Laplacians `Δ^{(p)} = d_p* d_p + d_{p-1} d_{p-1}*`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Eigensystem};
use crate::module::{compose, same_algebra, HilbertModule, ModuleMorphism};
use crate::tolerances::Tolerances;
use crate::vna::VnAlgebra;

#[derive(Debug, Clone)]
pub struct HilbertComplex {
  algebra:       Arc<VnAlgebra>,
  modules:       Vec<HilbertModule>,
  differentials: Vec<ModuleMorphism>,
  tolerances:    Tolerances,
}

impl HilbertComplex {
  pub fn new(modules: Vec<HilbertModule>, differentials: Vec<ModuleMorphism>) -> Result<Self> {
    Self::with_tolerances(modules, differentials, Tolerances::default())
  }

  /// Validates shapes and `d∘d = 0` against `tolerances.d2_rel`.
  pub fn with_tolerances(
    modules: Vec<HilbertModule>,
    differentials: Vec<ModuleMorphism>,
    tolerances: Tolerances,
  ) -> Result<Self> {
    let first = modules.first().ok_or_else(|| Error::ShapeMismatch("complex needs at least one module".into()))?;
    let algebra = first.algebra().clone();
    if differentials.len() + 1 != modules.len() {
      return Err(Error::ShapeMismatch(format!(
        "{} modules need {} differentials, got {}",
        modules.len(),
        modules.len() - 1,
        differentials.len()
      )));
    }
    for m in &modules {
      if !same_algebra(m.algebra(), &algebra) {
        return Err(Error::ShapeMismatch("modules over different algebras".into()));
      }
    }
    for (p, d) in differentials.iter().enumerate() {
      if *d.source() != modules[p] || *d.target() != modules[p + 1] {
        return Err(Error::ShapeMismatch(format!("differential d_{p} does not map C^{p} to C^{}", p + 1)));
      }
    }
    let cx = Self { algebra, modules, differentials, tolerances };
    let residuals = cx.d2_residuals()?;
    let eps = cx.eps_d2()?;
    for (p, r) in residuals.into_iter().enumerate() {
      if !(r <= eps) {
        return Err(Error::NotAComplex { degree: p, residual: r });
      }
    }
    Ok(cx)
  }

  pub fn algebra(&self) -> &Arc<VnAlgebra> { &self.algebra }

  pub fn tolerances(&self) -> &Tolerances { &self.tolerances }

  pub fn set_tolerances(&mut self, tolerances: Tolerances) { self.tolerances = tolerances; }

  /// Number of degrees, `n + 1`.
  pub fn len(&self) -> usize { self.modules.len() }

  pub fn is_empty(&self) -> bool { self.modules.is_empty() }

  pub fn modules(&self) -> &[HilbertModule] { &self.modules }

  pub fn module(&self, p: usize) -> &HilbertModule { &self.modules[p] }

  pub fn differentials(&self) -> &[ModuleMorphism] { &self.differentials }

  /// `d_p : C^p → C^{p+1}`, absent at the top degree.
  pub fn differential(&self, p: usize) -> Option<&ModuleMorphism> { self.differentials.get(p) }

  /// Largest operator norm among the differentials.
  pub fn differential_norm(&self) -> Result<f64> {
    let norms: Vec<f64> = self.differentials.iter().map(ModuleMorphism::operator_norm).collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
  }

  pub fn eps_d2(&self) -> Result<f64> {
    let norm = self.differential_norm()?;
    Ok(self.tolerances.d2_rel * (norm * norm).max(1.0))
  }

  /// `max |d_{p+1} d_p|` for each `p`.
  pub fn d2_residuals(&self) -> Result<Vec<f64>> {
    self.differentials.windows(2).map(|w| Ok(compose(&w[1], &w[0])?.max_entry())).collect()
  }

  /// Same modules, differentials replaced by `f(p, d_p)`; revalidated.
  pub fn map_differentials(&self, f: impl Fn(usize, &ModuleMorphism) -> ModuleMorphism) -> Result<Self> {
    let diffs = self.differentials.iter().enumerate().map(|(p, d)| f(p, d)).collect();
    Self::with_tolerances(self.modules.clone(), diffs, self.tolerances)
  }

  /// `d'_p = a_{p+1} d_p a_p^{-1}` for invertible endomorphisms `a_p`.
  pub fn conjugate(&self, maps: &[ModuleMorphism]) -> Result<Self> {
    if maps.len() != self.len() {
      return Err(Error::ShapeMismatch("one conjugating map per degree required".into()));
    }
    let inverses = maps
      .iter()
      .enumerate()
      .map(|(p, a)| a.inverse().ok_or_else(|| Error::NotInvertible(format!("conjugating map in degree {p}"))))
      .collect::<Result<Vec<_>>>()?;
    let diffs = self
      .differentials
      .iter()
      .enumerate()
      .map(|(p, d)| compose(&maps[p + 1], &compose(d, &inverses[p])?))
      .collect::<Result<Vec<_>>>()?;
    Self::with_tolerances(self.modules.clone(), diffs, self.tolerances)
  }

  /// `Δ^{(p)} = d_p* d_p + d_{p-1} d_{p-1}*`, using only the defined terms.
  pub fn laplacian(&self, p: usize) -> Result<ModuleMorphism> {
    let mut lap = ModuleMorphism::zero(&self.modules[p], &self.modules[p])?;
    if let Some(d) = self.differential(p) {
      lap = lap.add(&compose(&d.adjoint(), d)?)?;
    }
    if p > 0 {
      let d = &self.differentials[p - 1];
      lap = lap.add(&compose(d, &d.adjoint())?)?;
    }
    Ok(lap)
  }

  /// Blockwise eigensystems of `Δ^{(p)}`, eigenvalues ascending and clamped.
  pub fn eigensystem(&self, p: usize) -> Result<Vec<Eigensystem>> {
    let lap = self.laplacian(p)?;
    let mut systems: Vec<Eigensystem> =
      lap.blocks().par_iter().enumerate().map(|(i, b)| linalg::hermitian_eigen(b, i)).collect::<Result<_>>()?;
    let top = systems.iter().filter_map(|s| s.values.last().copied()).fold(0.0, f64::max);
    let floor = -self.tolerances.psd_rel * top.max(1.0);
    for (i, s) in systems.iter_mut().enumerate() {
      for v in &mut s.values {
        if *v < 0.0 {
          if *v < floor {
            return Err(Error::EigensolveFailure { block: i });
          }
          *v = 0.0;
        }
      }
    }
    Ok(systems)
  }

  pub fn spectrum(&self, p: usize) -> Result<SpectralData> {
    let systems = self.eigensystem(p)?;
    Ok(SpectralData::from_systems(self.algebra.clone(), p, &systems))
  }

  pub fn betti(&self, p: usize) -> Result<Betti> { Ok(self.spectrum(p)?.betti(&self.tolerances)) }

  pub fn betti_numbers(&self) -> Result<Vec<f64>> {
    (0..self.len()).map(|p| Ok(self.betti(p)?.value)).collect()
  }

  pub fn spectral_density(&self, p: usize, grid: &[f64]) -> Result<DensityFunction> {
    self.spectrum(p)?.density(grid, self.modules[p].dim_tau(), self.tolerances.tie_band)
  }

  /// `Σ_p (-1)^p dim_τ C^p`.
  pub fn euler_characteristic(&self) -> f64 {
    self.modules.iter().enumerate().map(|(p, m)| if p % 2 == 0 { m.dim_tau() } else { -m.dim_tau() }).sum()
  }
}

/// Eigenvalues of one block of a Laplacian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSpectrum {
  pub values:    Vec<f64>,
  /// Trace weight `w_i / n_i` of each eigenvalue.
  pub nu_weight: f64,
}

/// Spectrum of `Δ^{(p)}` with trace weights.
#[derive(Debug, Clone)]
pub struct SpectralData {
  pub degree: usize,
  pub blocks: Vec<BlockSpectrum>,
  algebra:    Arc<VnAlgebra>,
}

/// Kernel dimension with the threshold that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Betti {
  pub value:     f64,
  pub eps_null:  f64,
  pub ambiguous: Option<ToleranceAmbiguous>,
}

/// Eigenvalues in `(ε_null, 10 ε_null)` make kernel detection unreliable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceAmbiguous {
  pub count:    usize,
  pub smallest: f64,
}

impl SpectralData {
  pub fn from_systems(algebra: Arc<VnAlgebra>, degree: usize, systems: &[Eigensystem]) -> Self {
    let blocks = systems
      .iter()
      .enumerate()
      .map(|(i, s)| BlockSpectrum { values: s.values.clone(), nu_weight: algebra.nu_weight(i) })
      .collect();
    Self { degree, blocks, algebra }
  }

  pub fn algebra(&self) -> &Arc<VnAlgebra> { &self.algebra }

  pub fn max_eigenvalue(&self) -> f64 {
    self.blocks.iter().filter_map(|b| b.values.last().copied()).fold(0.0, f64::max)
  }

  /// Per-block number of eigenvalues `≤ threshold`.
  pub fn counts_at_most(&self, threshold: f64) -> Vec<usize> {
    self.blocks.iter().map(|b| b.values.partition_point(|&v| v <= threshold)).collect()
  }

  /// Per-block number of eigenvalues `< threshold`.
  pub fn counts_below(&self, threshold: f64) -> Vec<usize> {
    self.blocks.iter().map(|b| b.values.partition_point(|&v| v < threshold)).collect()
  }

  /// Trace-weighted number of eigenvalues `≤ threshold`.
  pub fn nu_count_at_most(&self, threshold: f64) -> f64 { self.algebra.weighted_count(self.counts_at_most(threshold)) }

  pub fn betti(&self, tol: &Tolerances) -> Betti {
    let eps = tol.null_threshold(self.max_eigenvalue());
    let value = self.nu_count_at_most(eps);
    let band: Vec<f64> =
      self.blocks.iter().flat_map(|b| b.values.iter().copied()).filter(|&v| v > eps && v < 10.0 * eps).collect();
    let ambiguous = (!band.is_empty())
      .then(|| ToleranceAmbiguous { count: band.len(), smallest: band.iter().copied().fold(f64::INFINITY, f64::min) });
    Betti { value, eps_null: eps, ambiguous }
  }

  /// `F(λ) = Σ_{eigenvalue ≤ λ} ν-weight` on a positive increasing grid.
  ///
  /// The interval is closed: eigenvalues within `tie_band` of `λ` count and
  /// the grid point is recorded in `ties`.
  pub fn density(&self, grid: &[f64], total: f64, tie_band: f64) -> Result<DensityFunction> {
    validate_grid(grid)?;
    let mut ties = Vec::new();
    let values = grid
      .iter()
      .map(|&lam| {
        if self.blocks.iter().any(|b| b.values.iter().any(|&v| (v - lam).abs() <= tie_band)) {
          ties.push(lam);
        }
        self.nu_count_at_most(lam + tie_band)
      })
      .collect();
    Ok(DensityFunction { lambdas: grid.to_vec(), values, ties, total })
  }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
  if grid.is_empty() {
    return Err(Error::InvalidParameter("empty λ grid".into()));
  }
  if grid[0] <= 0.0 || !grid[0].is_finite() || grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
    return Err(Error::InvalidParameter("λ grid must be positive and strictly increasing".into()));
  }
  Ok(())
}

/// Spectral density function `F(λ) = τ(E_λ)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityFunction {
  pub lambdas: Vec<f64>,
  pub values:  Vec<f64>,
  /// Grid points with an eigenvalue within the tie band.
  pub ties:    Vec<f64>,
  /// `dim_τ C^p`, the limit of `F` at infinity.
  pub total:   f64,
}

impl DensityFunction {
  pub fn to_csv(&self) -> String {
    let mut out = String::from("lambda,F\n");
    for (l, f) in self.lambdas.iter().zip(&self.values) {
      out.push_str(&format!("{l:e},{f:e}\n"));
    }
    out
  }
}

impl SpectralData {
  pub fn to_csv(&self) -> String {
    let mut out = String::from("block,eigenvalue,nu_weight\n");
    for (i, b) in self.blocks.iter().enumerate() {
      for v in &b.values {
        out.push_str(&format!("{i},{v:e},{:e}\n", b.nu_weight));
      }
    }
    out
  }
}

/// Log-log least-squares fit of `F(λ) - b` against `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
  /// Raw density slope (not doubled).
  pub slope:     f64,
  pub intercept: f64,
  pub r2:        f64,
  pub points:    usize,
}

/// Fits `log(F(λ) - b) ≈ slope · log λ + c` over the grid points in `window`.
pub fn ns_exponent(density: &DensityFunction, offset: f64, window: (f64, f64)) -> Result<PowerFit> {
  let (lo, hi) = window;
  let mut xs = Vec::new();
  let mut ys = Vec::new();
  for (&l, &f) in density.lambdas.iter().zip(&density.values) {
    if l < lo || l > hi {
      continue;
    }
    let excess = f - offset;
    if !(excess > 0.0) {
      return Err(Error::NonpositiveDensity { lambda: l });
    }
    xs.push(l.ln());
    ys.push(excess.ln());
  }
  fit_line(&xs, &ys).ok_or(Error::EmptyWindow)
}

/// Ordinary least squares; `None` for fewer than two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
  let n = xs.len();
  if n < 2 {
    return None;
  }
  let mx = xs.iter().sum::<f64>() / n as f64;
  let my = ys.iter().sum::<f64>() / n as f64;
  let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
  let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
  if sxx == 0.0 {
    return None;
  }
  let slope = sxy / sxx;
  let intercept = my - slope * mx;
  let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
  let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
  let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
  Some(PowerFit { slope, intercept, r2, points: n })
}

/// Degreewise morphisms `f_p : C^p → C'^p`.
#[derive(Debug, Clone)]
pub struct ChainMap {
  pub maps: Vec<ModuleMorphism>,
}

impl ChainMap {
  pub fn new(maps: Vec<ModuleMorphism>) -> Self { Self { maps } }

  pub fn identity(cx: &HilbertComplex) -> Self { Self { maps: cx.modules.iter().map(ModuleMorphism::identity).collect() } }

  pub fn after(&self, f: &ChainMap) -> Result<ChainMap> {
    if self.maps.len() != f.maps.len() {
      return Err(Error::ShapeMismatch("chain maps of different length".into()));
    }
    Ok(ChainMap { maps: self.maps.iter().zip(&f.maps).map(|(g, f)| compose(g, f)).collect::<Result<_>>()? })
  }
}

/// Homotopy operators `T_p : C^p → C'^{p-1}` for `p = 1..=n`.
#[derive(Debug, Clone)]
pub struct ChainHomotopy {
  /// `maps[p - 1]` is `T_p`.
  pub maps: Vec<ModuleMorphism>,
}

impl ChainHomotopy {
  pub fn new(maps: Vec<ModuleMorphism>) -> Self { Self { maps } }

  pub fn zero(source: &HilbertComplex, target: &HilbertComplex) -> Result<Self> {
    let maps = (1..source.len()).map(|p| ModuleMorphism::zero(source.module(p), target.module(p - 1))).collect::<Result<_>>()?;
    Ok(Self { maps })
  }

  pub fn at(&self, p: usize) -> Option<&ModuleMorphism> { if p == 0 { None } else { self.maps.get(p - 1) } }
}

fn check_map_shapes(f: &ChainMap, source: &HilbertComplex, target: &HilbertComplex) -> Result<()> {
  if f.maps.len() != source.len() || f.maps.len() != target.len() {
    return Err(Error::ShapeMismatch("chain map length differs from complex length".into()));
  }
  for (p, m) in f.maps.iter().enumerate() {
    if m.source() != source.module(p) || m.target() != target.module(p) {
      return Err(Error::ShapeMismatch(format!("chain map component {p} has wrong source or target")));
    }
  }
  Ok(())
}

/// `max_p |d'_p f_p - f_{p+1} d_p|`.
pub fn verify_chain_map(f: &ChainMap, source: &HilbertComplex, target: &HilbertComplex) -> Result<f64> {
  check_map_shapes(f, source, target)?;
  let mut worst = 0.0_f64;
  for p in 0..source.differentials.len() {
    let lhs = compose(&target.differentials[p], &f.maps[p])?;
    let rhs = compose(&f.maps[p + 1], &source.differentials[p])?;
    worst = worst.max(lhs.sub(&rhs)?.max_entry());
  }
  Ok(worst)
}

/// Per-degree residuals `|f_p - g_p - d'_{p-1} T_p - T_{p+1} d_p|`.
pub fn homotopy_residuals(
  f: &ChainMap,
  g: &ChainMap,
  homotopy: &ChainHomotopy,
  source: &HilbertComplex,
  target: &HilbertComplex,
) -> Result<Vec<f64>> {
  check_map_shapes(f, source, target)?;
  check_map_shapes(g, source, target)?;
  if homotopy.maps.len() + 1 != source.len() {
    return Err(Error::ShapeMismatch("homotopy needs one map per positive degree".into()));
  }
  (0..source.len())
    .map(|p| {
      let mut r = f.maps[p].sub(&g.maps[p])?;
      if let Some(t) = homotopy.at(p) {
        if t.source() != source.module(p) || t.target() != target.module(p - 1) {
          return Err(Error::ShapeMismatch(format!("homotopy component {p} has wrong shape")));
        }
        r = r.sub(&compose(&target.differentials[p - 1], t)?)?;
      }
      if let Some(t) = homotopy.at(p + 1) {
        r = r.sub(&compose(t, &source.differentials[p])?)?;
      }
      Ok(r.max_entry())
    })
    .collect()
}

/// `max_p |f_p - g_p - d T_p - T_{p+1} d|`.
pub fn verify_homotopy(
  f: &ChainMap,
  g: &ChainMap,
  homotopy: &ChainHomotopy,
  source: &HilbertComplex,
  target: &HilbertComplex,
) -> Result<f64> {
  Ok(homotopy_residuals(f, g, homotopy, source, target)?.into_iter().fold(0.0, f64::max))
}
