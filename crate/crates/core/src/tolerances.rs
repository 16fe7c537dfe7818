//! Numerical tolerances with their defaults.

use serde::{Deserialize, Serialize};

/// Every floating-point threshold used by the complex, truncation and
/// Witten layers. Relative tolerances are scaled as documented per field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
  /// `ε_d2 = d2_rel · max(1, ‖d‖²)` bounds the entries of `d∘d`.
  pub d2_rel:     f64,
  /// Eigenvalues in `[-psd_rel · max(1, ‖Δ‖), 0]` are clamped to zero.
  pub psd_rel:    f64,
  /// Explicit kernel threshold; `None` means `null_rel · (1 + ‖Δ‖)`.
  pub eps_null:   Option<f64>,
  pub null_rel:   f64,
  /// `ε_hom = hom_rel · (1 + ‖d‖ · ‖G‖)`.
  pub hom_rel:    f64,
  /// Minimal distance from `λ` to the first eigenvalue above it.
  pub gap_tol:    f64,
  /// Eigenvalues within this distance of `λ` are boundary ties.
  pub tie_band:   f64,
  /// Chain-map residual accepted for spectral projections.
  pub chain_map:  f64,
}

impl Default for Tolerances {
  fn default() -> Self {
    Self {
      d2_rel:    1e-10,
      psd_rel:   1e-10,
      eps_null:  None,
      null_rel:  1e-8,
      hom_rel:   1e-9,
      gap_tol:   1e-8,
      tie_band:  1e-10,
      chain_map: 1e-8,
    }
  }
}

impl Tolerances {
  /// Kernel threshold for a Laplacian of norm `laplacian_norm`.
  pub fn null_threshold(&self, laplacian_norm: f64) -> f64 {
    self.eps_null.unwrap_or(self.null_rel * (1.0 + laplacian_norm))
  }
}
