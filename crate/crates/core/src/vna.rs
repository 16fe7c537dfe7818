//! Finite von Neumann algebras as weighted multi-matrix algebras.
//!
//! An algebra is a finite direct sum `⊕_i M_{n_i}(C)` of matrix factors. Each
//! factor is one atom of a (sampled) direct integral and carries a measure
//! weight `mu` and a fiber trace normalization `rho`; the trace is
//!
//! ```text
//! τ(a) = Σ_i rho_i · mu_i · tr(a_i) / n_i
//! ```
//!
//! and must satisfy `τ(1) = 1`.

use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Tolerance on `Σ w_i = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// One matrix factor `M_n(C)` of the algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorBlock {
  pub label: String,
  pub n:     usize,
  pub mu:    f64,
  pub rho:   f64,
}

impl FactorBlock {
  pub fn new(label: impl Into<String>, n: usize, mu: f64, rho: f64) -> Self {
    Self { label: label.into(), n, mu, rho }
  }

  /// Trace weight `rho · mu`.
  pub fn weight(&self) -> f64 { self.rho * self.mu }
}

/// Multi-matrix model of a finite von Neumann algebra with a normalized trace.
#[derive(Debug, Clone, PartialEq)]
pub struct VnAlgebra {
  blocks:  Vec<FactorBlock>,
  weights: Vec<f64>,
}

impl VnAlgebra {
  /// Validates the blocks and checks trace normalization.
  ///
  /// With `normalize` set, every `mu` is rescaled by the same factor so the
  /// weights sum to one; otherwise an unnormalized family is rejected.
  pub fn new(mut blocks: Vec<FactorBlock>, normalize: bool) -> Result<Self> {
    if blocks.is_empty() {
      return Err(Error::EmptyAlgebra);
    }
    let mut seen = HashSet::new();
    for b in &blocks {
      if b.n == 0 {
        return Err(Error::InvalidBlock { label: b.label.clone(), reason: "n must be >= 1".into() });
      }
      if !(b.mu > 0.0 && b.mu.is_finite()) {
        return Err(Error::InvalidBlock { label: b.label.clone(), reason: format!("mu = {} must be positive", b.mu) });
      }
      if !(b.rho > 0.0 && b.rho.is_finite()) {
        return Err(Error::InvalidBlock { label: b.label.clone(), reason: format!("rho = {} must be positive", b.rho) });
      }
      if !seen.insert(b.label.clone()) {
        return Err(Error::DuplicateLabel(b.label.clone()));
      }
    }
    let sum: f64 = blocks.iter().map(FactorBlock::weight).sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
      if !normalize {
        return Err(Error::NotNormalized(sum));
      }
      for b in &mut blocks {
        b.mu /= sum;
      }
    }
    let weights = blocks.iter().map(FactorBlock::weight).collect();
    Ok(Self { blocks, weights })
  }

  pub fn shared(self) -> Arc<Self> { Arc::new(self) }

  pub fn blocks(&self) -> &[FactorBlock] { &self.blocks }

  pub fn num_blocks(&self) -> usize { self.blocks.len() }

  /// Trace weights `w_i = rho_i · mu_i`.
  pub fn weights(&self) -> &[f64] { &self.weights }

  pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ { self.blocks.iter().map(|b| b.n) }

  /// Trace weight carried by one eigenvalue of a block-`i` multiplicity matrix.
  pub fn nu_weight(&self, i: usize) -> f64 { self.weights[i] / self.blocks[i].n as f64 }

  /// `Σ_i w_i · counts_i / n_i`, summed in block order.
  ///
  /// Every von Neumann dimension in the crate goes through this one
  /// expression so that equal counts give bit-identical dimensions.
  pub fn weighted_count(&self, counts: impl IntoIterator<Item = usize>) -> f64 {
    counts
      .into_iter()
      .zip(&self.blocks)
      .zip(&self.weights)
      .map(|((k, b), w)| w * k as f64 / b.n as f64)
      .fold(0.0, |acc, x| acc + x)
  }

  pub fn identity(&self) -> AlgebraElement {
    AlgebraElement { blocks: self.blocks.iter().map(|b| linalg::identity(b.n)).collect() }
  }

  pub fn zero(&self) -> AlgebraElement {
    AlgebraElement { blocks: self.blocks.iter().map(|b| linalg::zeros(b.n, b.n)).collect() }
  }

  /// Builds an element, checking block shapes.
  pub fn element(&self, blocks: Vec<CMat>) -> Result<AlgebraElement> {
    let a = AlgebraElement { blocks };
    self.check(&a)?;
    Ok(a)
  }

  fn check(&self, a: &AlgebraElement) -> Result<()> {
    if a.blocks.len() != self.blocks.len() {
      return Err(Error::ShapeMismatch(format!(
        "element has {} blocks, algebra has {}",
        a.blocks.len(),
        self.blocks.len()
      )));
    }
    for (i, (m, b)) in a.blocks.iter().zip(&self.blocks).enumerate() {
      if m.nrows() != b.n || m.ncols() != b.n {
        return Err(Error::ShapeMismatch(format!(
          "block {i} is {}x{}, expected {}x{}",
          m.nrows(),
          m.ncols(),
          b.n,
          b.n
        )));
      }
    }
    Ok(())
  }

  /// Normalized trace `Σ_i w_i · tr(a_i) / n_i`.
  pub fn trace(&self, a: &AlgebraElement) -> Result<Complex64> {
    self.check(a)?;
    Ok(
      a.blocks
        .iter()
        .zip(&self.blocks)
        .zip(&self.weights)
        .map(|((m, b), w)| m.trace() * (w / b.n as f64))
        .fold(linalg::ZERO, |acc, z| acc + z),
    )
  }

  /// Blockwise conjugate transpose.
  pub fn adjoint(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
    self.check(a)?;
    Ok(AlgebraElement { blocks: a.blocks.iter().map(|m| m.adjoint()).collect() })
  }

  pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    self.check(a)?;
    self.check(b)?;
    Ok(AlgebraElement { blocks: a.blocks.iter().zip(&b.blocks).map(|(x, y)| x * y).collect() })
  }

  pub fn add(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    self.check(a)?;
    self.check(b)?;
    Ok(AlgebraElement { blocks: a.blocks.iter().zip(&b.blocks).map(|(x, y)| x + y).collect() })
  }

  /// C*-norm: the largest singular value over all blocks.
  pub fn cstar_norm(&self, a: &AlgebraElement) -> Result<f64> {
    self.check(a)?;
    let norms: Vec<f64> = a.blocks.par_iter().map(linalg::operator_norm).collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
  }
}

/// An element of a [`VnAlgebra`]: one `n_i × n_i` matrix per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
  pub blocks: Vec<CMat>,
}

impl AlgebraElement {
  pub fn max_entry(&self) -> f64 { self.blocks.iter().map(linalg::max_entry).fold(0.0, f64::max) }
}

/// Group von Neumann algebra of `Z_n`, as the direct sum of its `n` characters.
pub fn cyclic_group_algebra(n: usize) -> Result<VnAlgebra> {
  if n == 0 {
    return Err(Error::EmptyAlgebra);
  }
  let blocks = (0..n).map(|k| FactorBlock::new(format!("chi{k}"), 1, 1.0 / n as f64, 1.0)).collect();
  VnAlgebra::new(blocks, false)
}

/// Group von Neumann algebra of `Z` sampled at `fibers` midpoints of the dual circle.
///
/// Block `j` is the character at frequency `(j + 1/2) / fibers`, see
/// [`sampled_circle_frequencies`].
pub fn sampled_circle_algebra(fibers: usize) -> Result<VnAlgebra> {
  if fibers == 0 {
    return Err(Error::EmptyAlgebra);
  }
  let blocks = (0..fibers).map(|j| FactorBlock::new(format!("omega{j}"), 1, 1.0 / fibers as f64, 1.0)).collect();
  VnAlgebra::new(blocks, false)
}

pub fn cyclic_frequencies(n: usize) -> Vec<f64> { (0..n).map(|k| k as f64 / n as f64).collect() }

pub fn sampled_circle_frequencies(fibers: usize) -> Vec<f64> {
  (0..fibers).map(|j| (j as f64 + 0.5) / fibers as f64).collect()
}
