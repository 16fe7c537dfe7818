//! Dense complex matrix helpers shared by every layer.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, column-major.
pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

pub fn identity(n: usize) -> CMat { CMat::identity(n, n) }

pub fn zeros(rows: usize, cols: usize) -> CMat { CMat::zeros(rows, cols) }

/// Largest entry modulus; zero for empty matrices.
pub fn max_entry(m: &CMat) -> f64 { m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())) }

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
  pub values:  Vec<f64>,
  /// Columns are orthonormal eigenvectors in the order of `values`.
  pub vectors: CMat,
}

/// Hermitian eigensolve of `m` after symmetrizing `(m + m*)/2`.
///
/// The `block` index is only used to label a failure.
pub fn hermitian_eigen(m: &CMat, block: usize) -> Result<Eigensystem> {
  let n = m.nrows();
  if n != m.ncols() {
    return Err(Error::ShapeMismatch(format!("eigensolve of non-square {}x{} block", n, m.ncols())));
  }
  if n == 0 {
    return Ok(Eigensystem { values: Vec::new(), vectors: zeros(0, 0) });
  }
  let sym = (m + m.adjoint()).scale(0.5);
  if sym.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
    return Err(Error::EigensolveFailure { block });
  }
  let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000).ok_or(Error::EigensolveFailure { block })?;
  let mut order: Vec<usize> = (0..n).collect();
  order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
  let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
  let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
  Ok(Eigensystem { values, vectors })
}

/// Largest singular value, via the Hermitian eigensolve of `m* m`.
pub fn operator_norm(m: &CMat) -> Result<f64> {
  if m.nrows() == 0 || m.ncols() == 0 {
    return Ok(0.0);
  }
  let gram = if m.nrows() < m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
  let eig = hermitian_eigen(&gram, 0)?;
  Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Columns `cols` of `m`, in the given order.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
  CMat::from_fn(m.nrows(), cols.len(), |r, k| m[(r, cols[k])])
}

/// `V diag(scale) V*` for a column set `V`.
pub fn weighted_projector(vectors: &CMat, weights: &[f64]) -> CMat {
  let n = vectors.nrows();
  let mut out = zeros(n, n);
  for (k, &w) in weights.iter().enumerate() {
    if w == 0.0 {
      continue;
    }
    let col = vectors.column(k);
    out += (&col * col.adjoint()).scale(w);
  }
  out
}

pub fn try_inverse(m: &CMat) -> Option<CMat> {
  if m.nrows() != m.ncols() {
    return None;
  }
  if m.nrows() == 0 {
    return Some(zeros(0, 0));
  }
  m.clone().try_inverse()
}

/// 2-norm condition number; infinite when singular.
pub fn condition_number(m: &CMat) -> Result<f64> {
  if m.nrows() == 0 {
    return Ok(1.0);
  }
  let eig = hermitian_eigen(&(m.adjoint() * m), 0)?;
  let lo = eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
  let hi = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
  Ok(if lo == 0.0 { f64::INFINITY } else { hi / lo })
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn eigen_sorted_and_reconstructs() {
    let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
    let eig = hermitian_eigen(&m, 0).unwrap();
    assert!((eig.values[0] - 1.0).abs() < 1e-14);
    assert!((eig.values[1] - 3.0).abs() < 1e-14);
    let recon = weighted_projector(&eig.vectors, &eig.values);
    assert!(max_entry(&(recon - m)) < 1e-14);
  }

  #[test]
  fn operator_norm_of_rectangular() {
    let m = CMat::from_row_slice(1, 2, &[c(3.0, 0.0), c(0.0, 4.0)]);
    assert!((operator_norm(&m).unwrap() - 5.0).abs() < 1e-13);
    assert_eq!(operator_norm(&zeros(0, 3)).unwrap(), 0.0);
  }

  #[test]
  fn empty_and_nonfinite_blocks() {
    assert!(hermitian_eigen(&zeros(0, 0), 0).unwrap().values.is_empty());
    let bad = CMat::from_element(1, 1, c(f64::NAN, 0.0));
    assert_eq!(hermitian_eigen(&bad, 7).unwrap_err(), Error::EigensolveFailure { block: 7 });
  }

  #[test]
  fn condition_of_singular_is_infinite() {
    let m = CMat::from_row_slice(2, 2, &[ONE, ONE, ONE, ONE]);
    assert!(condition_number(&m).unwrap() > 1e15);
  }
}
