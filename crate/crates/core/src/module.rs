//! Finitely generated Hilbert modules and their A-linear morphisms.
//!
//! Block `i` of a module carries the fiber `C^{n_i} ⊗ C^{m_i}`, with the
//! factor `M_{n_i}(C)` acting on the first leg. A morphism only acts on the
//! multiplicity leg (`I_{n_i} ⊗ B_i`), so A-linearity holds by construction.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::vna::{FactorBlock, VnAlgebra};

/// A finitely generated Hilbert module, given by per-block multiplicities.
#[derive(Debug, Clone)]
pub struct HilbertModule {
  algebra: Arc<VnAlgebra>,
  mult:    Vec<usize>,
}

impl PartialEq for HilbertModule {
  fn eq(&self, other: &Self) -> bool { self.mult == other.mult && same_algebra(&self.algebra, &other.algebra) }
}

/// Same algebra by identity or by value.
pub fn same_algebra(a: &Arc<VnAlgebra>, b: &Arc<VnAlgebra>) -> bool { Arc::ptr_eq(a, b) || **a == **b }

impl HilbertModule {
  pub fn new(algebra: Arc<VnAlgebra>, mult: Vec<usize>) -> Result<Self> {
    if mult.len() != algebra.num_blocks() {
      return Err(Error::ShapeMismatch(format!(
        "module has {} multiplicities, algebra has {} blocks",
        mult.len(),
        algebra.num_blocks()
      )));
    }
    Ok(Self { algebra, mult })
  }

  /// The regular module `ℓ²(A)`: multiplicity `n_i` in every block.
  pub fn regular(algebra: Arc<VnAlgebra>) -> Self {
    let mult = algebra.block_sizes().collect();
    Self { algebra, mult }
  }

  /// `ℓ²(A) ⊗ C^copies`.
  pub fn free(algebra: Arc<VnAlgebra>, copies: usize) -> Self {
    let mult = algebra.block_sizes().map(|n| n * copies).collect();
    Self { algebra, mult }
  }

  pub fn zero(algebra: Arc<VnAlgebra>) -> Self {
    let mult = vec![0; algebra.num_blocks()];
    Self { algebra, mult }
  }

  pub fn algebra(&self) -> &Arc<VnAlgebra> { &self.algebra }

  pub fn mult(&self) -> &[usize] { &self.mult }

  /// Total multiplicity summed over blocks (the size of the dense model).
  pub fn total_mult(&self) -> usize { self.mult.iter().sum() }

  /// von Neumann dimension `Σ_i w_i · m_i / n_i`.
  pub fn dim_tau(&self) -> f64 { self.algebra.weighted_count(self.mult.iter().copied()) }

  pub fn direct_sum(&self, other: &Self) -> Result<Self> {
    self.check_same_algebra(other)?;
    Ok(Self { algebra: self.algebra.clone(), mult: self.mult.iter().zip(&other.mult).map(|(a, b)| a + b).collect() })
  }

  /// `copies` copies of this module.
  pub fn power(&self, copies: usize) -> Self {
    Self { algebra: self.algebra.clone(), mult: self.mult.iter().map(|m| m * copies).collect() }
  }

  fn check_same_algebra(&self, other: &Self) -> Result<()> {
    if same_algebra(&self.algebra, &other.algebra) {
      Ok(())
    } else {
      Err(Error::ShapeMismatch("modules over different algebras".into()))
    }
  }
}

/// A-linear map `I ⊗ B_i` between two modules.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleMorphism {
  source: HilbertModule,
  target: HilbertModule,
  blocks: Vec<CMat>,
}

impl ModuleMorphism {
  /// Block `i` must be `target.mult[i] × source.mult[i]`.
  pub fn new(source: HilbertModule, target: HilbertModule, blocks: Vec<CMat>) -> Result<Self> {
    source.check_same_algebra(&target)?;
    if blocks.len() != source.mult.len() {
      return Err(Error::ShapeMismatch(format!("morphism has {} blocks, expected {}", blocks.len(), source.mult.len())));
    }
    for (i, b) in blocks.iter().enumerate() {
      if b.nrows() != target.mult[i] || b.ncols() != source.mult[i] {
        return Err(Error::ShapeMismatch(format!(
          "morphism block {i} is {}x{}, expected {}x{}",
          b.nrows(),
          b.ncols(),
          target.mult[i],
          source.mult[i]
        )));
      }
    }
    Ok(Self { source, target, blocks })
  }

  pub(crate) fn from_parts_unchecked(source: HilbertModule, target: HilbertModule, blocks: Vec<CMat>) -> Self {
    debug_assert!(blocks.len() == source.mult.len());
    Self { source, target, blocks }
  }

  pub fn identity(module: &HilbertModule) -> Self {
    let blocks = module.mult.iter().map(|&m| linalg::identity(m)).collect();
    Self { source: module.clone(), target: module.clone(), blocks }
  }

  pub fn zero(source: &HilbertModule, target: &HilbertModule) -> Result<Self> {
    source.check_same_algebra(target)?;
    let blocks = source.mult.iter().zip(&target.mult).map(|(&s, &t)| linalg::zeros(t, s)).collect();
    Ok(Self { source: source.clone(), target: target.clone(), blocks })
  }

  /// Endomorphism acting by the scalar `values[i]` on block `i`.
  pub fn diagonal_scalars(module: &HilbertModule, values: &[Complex64]) -> Result<Self> {
    if values.len() != module.mult.len() {
      return Err(Error::ShapeMismatch("one scalar per block required".into()));
    }
    let blocks = module.mult.iter().zip(values).map(|(&m, &z)| linalg::identity(m) * z).collect();
    Ok(Self { source: module.clone(), target: module.clone(), blocks })
  }

  pub fn source(&self) -> &HilbertModule { &self.source }

  pub fn target(&self) -> &HilbertModule { &self.target }

  pub fn blocks(&self) -> &[CMat] { &self.blocks }

  pub fn into_blocks(self) -> Vec<CMat> { self.blocks }

  pub fn algebra(&self) -> &Arc<VnAlgebra> { &self.source.algebra }

  pub fn is_endomorphism(&self) -> bool { self.source == self.target }

  /// `self ∘ f`.
  pub fn after(&self, f: &ModuleMorphism) -> Result<ModuleMorphism> { compose(self, f) }

  pub fn adjoint(&self) -> ModuleMorphism { adjoint_morphism(self) }

  pub fn add(&self, other: &Self) -> Result<Self> { self.zip_with(other, |a, b| a + b) }

  pub fn sub(&self, other: &Self) -> Result<Self> { self.zip_with(other, |a, b| a - b) }

  pub fn scale(&self, s: f64) -> Self {
    Self { source: self.source.clone(), target: self.target.clone(), blocks: self.blocks.iter().map(|b| b.scale(s)).collect() }
  }

  /// Applies `f` to every block, keeping source and target.
  pub fn map_blocks(&self, f: impl Fn(usize, &CMat) -> CMat) -> Self {
    let blocks = self.blocks.iter().enumerate().map(|(i, b)| f(i, b)).collect();
    Self { source: self.source.clone(), target: self.target.clone(), blocks }
  }

  fn zip_with(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
    if self.source != other.source || self.target != other.target {
      return Err(Error::ShapeMismatch("morphisms have different source or target".into()));
    }
    let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
    Ok(Self { source: self.source.clone(), target: self.target.clone(), blocks })
  }

  /// Largest entry modulus over all blocks.
  pub fn max_entry(&self) -> f64 { self.blocks.iter().map(linalg::max_entry).fold(0.0, f64::max) }

  /// Operator norm: the largest singular value over blocks.
  pub fn operator_norm(&self) -> Result<f64> {
    let norms: Vec<f64> = self.blocks.par_iter().map(linalg::operator_norm).collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
  }

  /// Blockwise inverse, if every block is invertible.
  pub fn inverse(&self) -> Option<Self> {
    let blocks = self.blocks.iter().map(linalg::try_inverse).collect::<Option<Vec<_>>>()?;
    Some(Self { source: self.target.clone(), target: self.source.clone(), blocks })
  }

  /// Worst blockwise condition number.
  pub fn condition_number(&self) -> Result<f64> {
    let conds: Vec<f64> = self.blocks.par_iter().map(linalg::condition_number).collect::<Result<_>>()?;
    Ok(conds.into_iter().fold(1.0, f64::max))
  }
}

/// `g ∘ f`.
pub fn compose(g: &ModuleMorphism, f: &ModuleMorphism) -> Result<ModuleMorphism> {
  if f.target != g.source {
    return Err(Error::ShapeMismatch("compose: target of f differs from source of g".into()));
  }
  let blocks = g.blocks.iter().zip(&f.blocks).map(|(a, b)| a * b).collect();
  Ok(ModuleMorphism { source: f.source.clone(), target: g.target.clone(), blocks })
}

/// Adjoint for the standard inner product on each block.
pub fn adjoint_morphism(f: &ModuleMorphism) -> ModuleMorphism {
  ModuleMorphism {
    source: f.target.clone(),
    target: f.source.clone(),
    blocks: f.blocks.iter().map(|b| b.adjoint()).collect(),
  }
}

/// `τ(T) = Σ_i w_i · tr(B_i) / n_i` for an endomorphism `T`.
pub fn trace_endomorphism(t: &ModuleMorphism) -> Result<Complex64> {
  if !t.is_endomorphism() {
    return Err(Error::NotEndomorphism);
  }
  let alg = t.algebra();
  Ok(
    t.blocks
      .iter()
      .zip(alg.blocks())
      .zip(alg.weights())
      .map(|((b, blk), w)| b.trace() * (w / blk.n as f64))
      .fold(linalg::ZERO, |acc, z| acc + z),
  )
}

/// A module read fiberwise, one fiber module per atom of the base.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberedModuleFamily {
  pub module: HilbertModule,
}

impl FiberedModuleFamily {
  pub fn new(module: HilbertModule) -> Self { Self { module } }

  /// `dim_{τ_ω} M(ω) = ρ · m / n` for each atom.
  pub fn fiber_dims(&self) -> Vec<f64> {
    let alg = self.module.algebra();
    alg.blocks().iter().zip(&self.module.mult).map(|(b, &m)| b.rho * m as f64 / b.n as f64).collect()
  }
}

/// Outcome of the fiberwise finite-generation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteGeneration {
  /// `max_ω ρ(ω)^{-1} dim_{τ_ω} M(ω)`.
  pub sup_value: f64,
  pub verdict:   bool,
}

/// A module is finitely generated iff `ess sup ρ^{-1} dim M(ω)` is finite;
/// at finite scale the supremum is reported against a caller-chosen `bound`.
pub fn check_finitely_generated(family: &FiberedModuleFamily, bound: f64) -> FiniteGeneration {
  let alg = family.module.algebra();
  let sup_value = alg
    .blocks()
    .iter()
    .zip(family.fiber_dims())
    .map(|(b, d)| d / b.rho)
    .fold(0.0, f64::max);
  FiniteGeneration { sup_value, verdict: sup_value <= bound }
}

/// Truncation at `k_max` of the module over `L∞[0,1]` with multiplicity `k` on
/// the interval of measure `2^{-k}`.
///
/// The algebra gets one extra zero-multiplicity block of weight `2^{-k_max}`
/// so the trace stays normalized.
pub fn farber_example(k_max: usize) -> Result<(Arc<VnAlgebra>, FiberedModuleFamily)> {
  if k_max == 0 {
    return Err(Error::InvalidParameter("farber_example needs K >= 1".into()));
  }
  let exp = |k: usize| -> f64 { 0.5f64.powi(k as i32) };
  let mut blocks: Vec<FactorBlock> = (1..=k_max).map(|k| FactorBlock::new(format!("I{k}"), 1, exp(k), 1.0)).collect();
  blocks.push(FactorBlock::new("remainder", 1, exp(k_max), 1.0));
  let algebra = Arc::new(VnAlgebra::new(blocks, false)?);
  let mut mult: Vec<usize> = (1..=k_max).collect();
  mult.push(0);
  let module = HilbertModule::new(algebra.clone(), mult)?;
  Ok((algebra, FiberedModuleFamily::new(module)))
}
