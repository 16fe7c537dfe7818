use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hilbcx::Tolerances;

#[derive(Debug, Parser)]
#[command(name = "hilbcx", version, about = "Spectral analysis of Hilbert cochain complexes")]
pub struct Cli {
  #[command(subcommand)]
  pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
  /// Parse and check an input: d∘d, bundle relations, cocycles, Morse data.
  Validate(Input),
  /// von Neumann dimension of every cochain module.
  Dim(Input),
  Betti(Input),
  /// Laplacian eigenvalues with their ν-weights.
  Spectrum {
    #[command(flatten)]
    input:  Input,
    #[arg(long)]
    degree: Option<usize>,
  },
  /// Spectral density functions on a log grid.
  Density {
    #[command(flatten)]
    input:  Input,
    #[arg(long)]
    degree: Option<usize>,
  },
  /// Truncate at λ and emit the homotopy certificate.
  Truncate {
    #[command(flatten)]
    input:      Input,
    #[arg(long)]
    lambda:     f64,
    /// Accept eigenvalues within the tie band of λ.
    #[arg(long)]
    allow_tie:  bool,
  },
  /// Witten deformation gap scan.
  Witten {
    #[command(flatten)]
    input: Input,
    /// Morse data file, when the input does not carry one.
    #[arg(long)]
    morse: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    split: f64,
  },
  /// Compare invariants against the barycentric subdivision or another complex.
  Compare {
    #[command(flatten)]
    input:   Input,
    /// Second input; defaults to the subdivision of the first.
    #[arg(long)]
    against: Option<PathBuf>,
  },
  /// Truncated Farber module with `K` intervals.
  Farber {
    k: usize,
    #[command(flatten)]
    common: Common,
  },
}

#[derive(Debug, Args)]
pub struct Input {
  /// Complex, CW or system document.
  pub path:   PathBuf,
  /// Bundle document for a bare CW input.
  #[arg(long)]
  pub bundle: Option<PathBuf>,
  #[command(flatten)]
  pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
  Json,
  Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
  /// Absolute kernel threshold (default 1e-8·(1+‖Δ‖)).
  #[arg(long)]
  pub eps_null:    Option<f64>,
  /// Relative d∘d tolerance.
  #[arg(long)]
  pub eps_d2:      Option<f64>,
  /// Relative homotopy-certificate tolerance.
  #[arg(long)]
  pub eps_hom:     Option<f64>,
  #[arg(long)]
  pub gap_tol:     Option<f64>,
  #[arg(long)]
  pub tie_band:    Option<f64>,
  /// `lo:hi:steps`, log-spaced.
  #[arg(long)]
  pub lambda_grid: Option<GridSpec>,
  /// `lo:hi:steps`, evenly spaced.
  #[arg(long)]
  pub t_grid:      Option<GridSpec>,
  /// Fiber count of sampled-circle algebras.
  #[arg(long)]
  pub fibers:      Option<usize>,
  #[arg(long)]
  pub jobs:        Option<usize>,
  #[arg(long)]
  pub out:         Option<PathBuf>,
  #[arg(long, value_enum, default_value_t = Format::Json)]
  pub format:      Format,
}

impl Common {
  pub fn tolerances(&self) -> Result<Tolerances, String> {
    let mut t = Tolerances::default();
    let pos = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(v) } else { Err(format!("--{name} must be positive, got {v}")) };
    if let Some(v) = self.eps_null {
      t.eps_null = Some(pos("eps-null", v)?);
    }
    if let Some(v) = self.eps_d2 {
      t.d2_rel = pos("eps-d2", v)?;
    }
    if let Some(v) = self.eps_hom {
      t.hom_rel = pos("eps-hom", v)?;
    }
    if let Some(v) = self.gap_tol {
      t.gap_tol = pos("gap-tol", v)?;
    }
    if let Some(v) = self.tie_band {
      t.tie_band = pos("tie-band", v)?;
    }
    Ok(t)
  }
}

/// `lo:hi:steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
  pub lo:    f64,
  pub hi:    f64,
  pub steps: usize,
}

impl FromStr for GridSpec {
  type Err = String;

  fn from_str(s: &str) -> Result<Self, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
      return Err(format!("expected lo:hi:steps, got `{s}`"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let spec = GridSpec { lo: num(lo)?, hi: num(hi)?, steps: steps.trim().parse().map_err(|e| format!("`{steps}`: {e}"))? };
    if !(spec.lo.is_finite() && spec.hi.is_finite()) || spec.steps == 0 || (spec.steps > 1 && !(spec.hi > spec.lo)) {
      return Err(format!("grid `{s}` must be nonempty and increasing"));
    }
    Ok(spec)
  }
}

impl GridSpec {
  pub fn linear(&self) -> Vec<f64> {
    if self.steps == 1 {
      return vec![self.lo];
    }
    (0..self.steps).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64).collect()
  }

  pub fn log(&self) -> Result<Vec<f64>, String> {
    if !(self.lo > 0.0) {
      return Err("log grid needs lo > 0".into());
    }
    if self.steps == 1 {
      return Ok(vec![self.lo]);
    }
    hilbcx::flatcw::log_grid(self.lo, self.hi, self.steps).map_err(|e| e.to_string())
  }
}
