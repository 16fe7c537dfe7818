//! Spectral truncation of a complex below a level `λ`.
//!
//! `E_λ` projects onto the eigenvectors of the Laplacians with eigenvalue in
//! `[0, λ]`. Its image `L_λ` is a subcomplex, and the Green operator `G`
//! (inverse of `Δ` off `L_λ`, zero on it) gives the homotopy `K = d* G` with
//!
//! ```text
//! I - E_λ = d K + K d.
//! ```
//!
//! The truncated complex is materialized in an explicit orthonormal eigenbasis.

use serde::Serialize;

use crate::complex::{homotopy_residuals, verify_chain_map, ChainHomotopy, ChainMap, HilbertComplex};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Eigensystem};
use crate::module::{compose, HilbertModule, ModuleMorphism};

/// Eigen-split of one degree at level `λ`.
struct DegreeSplit {
  systems: Vec<Eigensystem>,
  /// Per block, the number of eigenvalues in `[0, λ + tie_band]`; they are a prefix.
  counts:  Vec<usize>,
  tie:     Option<f64>,
  /// Distance from `λ` to the first eigenvalue above the closed interval.
  gap:     Option<f64>,
}

fn split_degree(cx: &HilbertComplex, p: usize, lambda: f64) -> Result<DegreeSplit> {
  if !(lambda > 0.0 && lambda.is_finite()) {
    return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
  }
  let band = cx.tolerances().tie_band;
  let systems = cx.eigensystem(p)?;
  let mut tie = None;
  let mut gap: Option<f64> = None;
  let counts = systems
    .iter()
    .map(|s| {
      for &v in &s.values {
        if (v - lambda).abs() <= band && tie.is_none() {
          tie = Some(v);
        }
      }
      let k = s.values.partition_point(|&v| v <= lambda + band);
      if let Some(&above) = s.values.get(k) {
        let g = above - lambda;
        gap = Some(gap.map_or(g, |old: f64| old.min(g)));
      }
      k
    })
    .collect();
  Ok(DegreeSplit { systems, counts, tie, gap })
}

impl DegreeSplit {
  fn basis(&self) -> Vec<CMat> {
    self
      .systems
      .iter()
      .zip(&self.counts)
      .map(|(s, &k)| linalg::select_columns(&s.vectors, &(0..k).collect::<Vec<_>>()))
      .collect()
  }

  fn projection(&self, module: &HilbertModule) -> ModuleMorphism {
    let blocks = self
      .systems
      .iter()
      .zip(&self.counts)
      .map(|(s, &k)| {
        let weights: Vec<f64> = (0..s.values.len()).map(|j| if j < k { 1.0 } else { 0.0 }).collect();
        linalg::weighted_projector(&s.vectors, &weights)
      })
      .collect();
    ModuleMorphism::from_parts_unchecked(module.clone(), module.clone(), blocks)
  }

  fn green(&self, module: &HilbertModule) -> ModuleMorphism {
    let blocks = self
      .systems
      .iter()
      .zip(&self.counts)
      .map(|(s, &k)| {
        let weights: Vec<f64> = s.values.iter().enumerate().map(|(j, &v)| if j < k { 0.0 } else { 1.0 / v }).collect();
        linalg::weighted_projector(&s.vectors, &weights)
      })
      .collect();
    ModuleMorphism::from_parts_unchecked(module.clone(), module.clone(), blocks)
  }

  fn check_gap(&self, gap_tol: f64) -> Result<()> {
    match self.gap {
      Some(g) if g < gap_tol => Err(Error::GapTooSmall { gap: g }),
      _ => Ok(()),
    }
  }
}

/// Orthogonal projection `E_λ^{(p)}` with a boundary-tie warning.
#[derive(Debug, Clone)]
pub struct SpectralProjection {
  pub map: ModuleMorphism,
  /// An eigenvalue within the tie band of `λ`, if any.
  pub tie: Option<f64>,
}

pub fn spectral_projection(cx: &HilbertComplex, p: usize, lambda: f64) -> Result<SpectralProjection> {
  let split = split_degree(cx, p, lambda)?;
  Ok(SpectralProjection { map: split.projection(cx.module(p)), tie: split.tie })
}

/// The subcomplex `L_λ` in its eigenbasis, with inclusion and projection.
#[derive(Debug, Clone)]
pub struct TruncatedComplex {
  pub lambda:             f64,
  /// `L_λ` with the induced differentials.
  pub complex:            HilbertComplex,
  /// `i_λ : L_λ → C`.
  pub inclusion:          ChainMap,
  /// Orthogonal projection `C → L_λ`.
  pub projection:         ChainMap,
  /// `E_λ = i_λ ∘ projection`, a chain endomorphism of `C`.
  pub spectral_projector: ChainMap,
  /// `dim_τ L_λ^{(p)} = τ(E_λ^{(p)})`.
  pub dims:               Vec<f64>,
  /// Operator norm of the induced differential per degree.
  pub induced_norms:      Vec<f64>,
  /// `|E_λ d - d E_λ|`.
  pub chain_map_residual: f64,
  pub ties:               Vec<f64>,
}

impl TruncatedComplex {
  /// Whether `‖d|_{L_λ}‖ ≤ √λ + 1e-9` in every degree.
  pub fn norm_bound_holds(&self) -> bool { self.induced_norms.iter().all(|&n| n <= self.lambda.sqrt() + 1e-9) }
}

/// Truncates `cx` at `λ`. Boundary ties are refused unless `allow_tie`.
pub fn truncate(cx: &HilbertComplex, lambda: f64, allow_tie: bool) -> Result<TruncatedComplex> {
  let splits = (0..cx.len()).map(|p| split_degree(cx, p, lambda)).collect::<Result<Vec<_>>>()?;
  let ties: Vec<f64> = splits.iter().filter_map(|s| s.tie).collect();
  if let (false, Some(&t)) = (allow_tie, ties.first()) {
    return Err(Error::BoundaryTie { eigenvalue: t, lambda });
  }
  let algebra = cx.algebra().clone();
  let bases: Vec<Vec<CMat>> = splits.iter().map(DegreeSplit::basis).collect();
  let small: Vec<HilbertModule> =
    splits.iter().map(|s| HilbertModule::new(algebra.clone(), s.counts.clone())).collect::<Result<_>>()?;

  let inclusion = ChainMap::new(
    (0..cx.len())
      .map(|p| ModuleMorphism::new(small[p].clone(), cx.module(p).clone(), bases[p].clone()))
      .collect::<Result<_>>()?,
  );
  let projection = ChainMap::new(inclusion.maps.iter().map(ModuleMorphism::adjoint).collect());
  let spectral_projector = inclusion.after(&projection)?;

  // induced differential V_{p+1}* d_p V_p
  let induced: Vec<ModuleMorphism> = (0..cx.differentials().len())
    .map(|p| compose(&projection.maps[p + 1], &compose(&cx.differentials()[p], &inclusion.maps[p])?))
    .collect::<Result<_>>()?;
  let induced_norms = induced.iter().map(ModuleMorphism::operator_norm).collect::<Result<Vec<_>>>()?;
  let complex = HilbertComplex::with_tolerances(small.clone(), induced, *cx.tolerances())?;

  let chain_map_residual = verify_chain_map(&spectral_projector, cx, cx)?;
  if chain_map_residual > cx.tolerances().chain_map {
    return Err(Error::ChainMapFailed { what: "E_λ".into(), residual: chain_map_residual });
  }
  let dims = small.iter().map(HilbertModule::dim_tau).collect();
  Ok(TruncatedComplex { lambda, complex, inclusion, projection, spectral_projector, dims, induced_norms, chain_map_residual, ties })
}

/// Green operator with the gap it was built across.
#[derive(Debug, Clone)]
pub struct GreenOperator {
  pub map: ModuleMorphism,
  /// `None` when every eigenvalue lies in `[0, λ]`.
  pub gap: Option<f64>,
}

/// `G = Δ^{-1}(I - E_λ)` in degree `p`; refuses when the gap above `λ` is
/// below `gap_tol`.
pub fn green_operator(cx: &HilbertComplex, p: usize, lambda: f64) -> Result<GreenOperator> {
  let split = split_degree(cx, p, lambda)?;
  split.check_gap(cx.tolerances().gap_tol)?;
  Ok(GreenOperator { map: split.green(cx.module(p)), gap: split.gap })
}

/// Certificate that `E_λ` is chain homotopic to the identity via `K = d* G`.
#[derive(Debug, Clone)]
pub struct HomotopyCertificate {
  pub lambda:     f64,
  pub greens:     Vec<ModuleMorphism>,
  pub homotopy:   ChainHomotopy,
  pub projector:  ChainMap,
  /// Residual of `I - E_λ - dK - Kd` per degree.
  pub residuals:  Vec<f64>,
  pub dims:       Vec<f64>,
  /// Smallest gap above `λ` over all degrees.
  pub gap:        Option<f64>,
  pub tolerance:  f64,
}

/// Wire form of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
  pub lambda:    f64,
  pub residuals: Vec<f64>,
  pub dims:      Vec<f64>,
  pub gap:       Option<f64>,
}

impl HomotopyCertificate {
  pub fn summary(&self) -> CertificateSummary {
    CertificateSummary { lambda: self.lambda, residuals: self.residuals.clone(), dims: self.dims.clone(), gap: self.gap }
  }

  pub fn max_residual(&self) -> f64 { self.residuals.iter().copied().fold(0.0, f64::max) }
}

pub fn homotopy_certificate(cx: &HilbertComplex, lambda: f64) -> Result<HomotopyCertificate> {
  let tol = *cx.tolerances();
  let splits = (0..cx.len()).map(|p| split_degree(cx, p, lambda)).collect::<Result<Vec<_>>>()?;
  for s in &splits {
    s.check_gap(tol.gap_tol)?;
  }
  let greens: Vec<ModuleMorphism> = splits.iter().enumerate().map(|(p, s)| s.green(cx.module(p))).collect();
  let projector = ChainMap::new(splits.iter().enumerate().map(|(p, s)| s.projection(cx.module(p))).collect());
  let homotopy = ChainHomotopy::new(
    (1..cx.len()).map(|p| compose(&cx.differentials()[p - 1].adjoint(), &greens[p])).collect::<Result<_>>()?,
  );
  let residuals = homotopy_residuals(&ChainMap::identity(cx), &projector, &homotopy, cx, cx)?;

  let gap = splits.iter().filter_map(|s| s.gap).reduce(f64::min);
  let green_norm = gap.map_or(0.0, |g| 1.0 / (lambda + g));
  let tolerance = tol.hom_rel * (1.0 + cx.differential_norm()? * green_norm);
  if let Some((degree, &residual)) = residuals.iter().enumerate().find(|(_, &r)| !(r <= tolerance)) {
    return Err(Error::CertificateFailed { degree, residual });
  }
  let dims = splits.iter().map(|s| cx.algebra().weighted_count(s.counts.iter().copied())).collect();
  Ok(HomotopyCertificate { lambda, greens, homotopy, projector, residuals, dims, gap, tolerance })
}
