//! Built-in complexes, bundles and random generators used by tests, the CLI
//! and benchmarks.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::complex::HilbertComplex;
use crate::error::{Error, Result};
use crate::flatcw::{make_bundle_from_monodromy, CwComplexData, FlatBundle, GroupSpec, Incidence, Term};
use crate::linalg::{self, c, CMat};
use crate::module::{HilbertModule, ModuleMorphism};
use crate::vna::{self, FactorBlock, VnAlgebra};
use crate::witten::MorseData;

fn inc(from: &str, to: &str, terms: &[(i64, &[(&str, i64)])]) -> Incidence {
  Incidence {
    from:  from.into(),
    to:    to.into(),
    terms: terms
      .iter()
      .map(|(coef, word)| Term::new(*coef, word.iter().map(|(g, e)| (g.to_string(), *e)).collect()))
      .collect(),
  }
}

fn labels(xs: &[&str]) -> Vec<String> { xs.iter().map(|s| s.to_string()).collect() }

/// One vertex `v`, one edge `e` with `∂ẽ = ṽ·g − ṽ`.
pub fn circle() -> CwComplexData {
  CwComplexData { cells: vec![labels(&["v"]), labels(&["e"])], incidence: vec![inc("e", "v", &[(1, &[("g", 1)]), (-1, &[])])] }
}

/// Vertices `a`, `b`; `e1` from `a` to `b`, `e2` from `b` to `a·g`.
pub fn circle_two_vertex() -> CwComplexData {
  CwComplexData {
    cells:     vec![labels(&["a", "b"]), labels(&["e1", "e2"])],
    incidence: vec![
      inc("e1", "a", &[(-1, &[])]),
      inc("e1", "b", &[(1, &[])]),
      inc("e2", "b", &[(-1, &[])]),
      inc("e2", "a", &[(1, &[("g", 1)])]),
    ],
  }
}

/// Morse data on [`circle_two_vertex`]: minimum `a`, maximum `e1`, and the
/// matched pair `(b, e2)`.
pub fn circle_morse() -> MorseData {
  let values = [("a", 0.0), ("b", 0.5), ("e1", 1.0), ("e2", 0.5)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
  MorseData { values, matching: vec![("b".into(), "e2".into())], self_indexing: true }
}

/// Wedge of two circles on generators `x`, `y`.
pub fn wedge_of_circles() -> CwComplexData {
  CwComplexData {
    cells:     vec![labels(&["v"]), labels(&["a", "b"])],
    incidence: vec![inc("a", "v", &[(1, &[("x", 1)]), (-1, &[])]), inc("b", "v", &[(1, &[("y", 1)]), (-1, &[])])],
  }
}

/// Square torus `a b a^{-1} b^{-1}` with deck generators `x`, `y`.
///
/// Boundary traversal records are listed in cyclic order.
pub fn torus() -> CwComplexData {
  CwComplexData {
    cells:     vec![labels(&["v"]), labels(&["a", "b"]), labels(&["f"])],
    incidence: vec![
      inc("a", "v", &[(1, &[("x", 1)]), (-1, &[])]),
      inc("b", "v", &[(1, &[("y", 1)]), (-1, &[])]),
      inc("f", "a", &[(1, &[])]),
      inc("f", "b", &[(1, &[("x", 1)])]),
      inc("f", "a", &[(-1, &[("y", 1)])]),
      inc("f", "b", &[(-1, &[])]),
    ],
  }
}

pub fn scalar_algebra() -> Arc<VnAlgebra> {
  Arc::new(VnAlgebra::new(vec![FactorBlock::new("C", 1, 1.0, 1.0)], false).expect("scalars are normalized"))
}

/// Diagonal character representation on the regular module of an abelian
/// group algebra: generator `g` acts on block `j` by `exp(2πi · powers[g] · freq_j)`.
pub fn character_bundle(
  group: GroupSpec,
  algebra: Arc<VnAlgebra>,
  freqs: &[f64],
  powers: &BTreeMap<String, i64>,
) -> Result<FlatBundle> {
  if freqs.len() != algebra.num_blocks() {
    return Err(Error::ShapeMismatch("one frequency per block required".into()));
  }
  let fiber = HilbertModule::regular(algebra);
  let mut images = BTreeMap::new();
  for g in &group.generators {
    let k = powers.get(g).copied().unwrap_or(0);
    let scalars: Vec<_> = freqs.iter().map(|w| {
      let phase = 2.0 * PI * ((k as f64 * w).rem_euclid(1.0));
      c(phase.cos(), phase.sin())
    }).collect();
    images.insert(g.clone(), ModuleMorphism::diagonal_scalars(&fiber, &scalars)?);
  }
  make_bundle_from_monodromy(group, fiber, images)
}

fn powers_of(generators: &[(&str, i64)]) -> BTreeMap<String, i64> { generators.iter().map(|(g, k)| (g.to_string(), *k)).collect() }

/// `ℓ²(Z_n)` bundle; `powers` sends each generator to a power of the `Z_n` generator.
pub fn cyclic_bundle(n: usize, group: GroupSpec, powers: &[(&str, i64)]) -> Result<FlatBundle> {
  let alg = Arc::new(vna::cyclic_group_algebra(n)?);
  character_bundle(group, alg, &vna::cyclic_frequencies(n), &powers_of(powers))
}

/// Sampled `ℓ²(Z)` bundle on `fibers` midpoint characters.
pub fn sampled_z_bundle(fibers: usize, group: GroupSpec, powers: &[(&str, i64)]) -> Result<FlatBundle> {
  let alg = Arc::new(vna::sampled_circle_algebra(fibers)?);
  character_bundle(group, alg, &vna::sampled_circle_frequencies(fibers), &powers_of(powers))
}

/// Exact density of the `Z`-cover of the one-edge circle: the fiber Laplacian
/// at frequency `ω` is `4 sin²(πω)`, so `F(λ) = (2/π) asin(√λ / 2)` for `λ ≤ 4`.
pub fn z_circle_density(lambda: f64) -> f64 {
  if lambda >= 4.0 {
    1.0
  } else {
    2.0 / PI * (lambda.max(0.0).sqrt() / 2.0).asin()
  }
}

/// Shape parameters of a random complex.
#[derive(Debug, Clone, Copy)]
pub struct RandomComplexSpec {
  pub max_blocks: usize,
  pub max_n:      usize,
  pub max_mult:   usize,
  pub degrees:    usize,
  /// Nonzero singular values of the differentials are drawn from this range.
  pub singular:   (f64, f64),
}

impl Default for RandomComplexSpec {
  fn default() -> Self { Self { max_blocks: 3, max_n: 3, max_mult: 40, degrees: 3, singular: (0.3, 3.0) } }
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
  CMat::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Haar-ish random unitary from the QR factor of a random matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMat {
  if n == 0 {
    return linalg::zeros(0, 0);
  }
  random_matrix(rng, n, n).qr().q()
}

/// `U diag(σ) V*` with `σ` log-uniform in `[1/√cond, √cond]`.
pub fn random_invertible(rng: &mut impl Rng, n: usize, max_cond: f64) -> CMat {
  let half = max_cond.sqrt().ln();
  let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(-half..=half).exp()).collect();
  let u = random_unitary(rng, n);
  let v = random_unitary(rng, n);
  let d = CMat::from_fn(n, n, |i, j| if i == j { c(sigma[i], 0.0) } else { linalg::ZERO });
  u * d * v.adjoint()
}

/// Random multi-block algebra with random positive weights.
pub fn random_algebra(rng: &mut impl Rng, max_blocks: usize, max_n: usize) -> Arc<VnAlgebra> {
  let k = rng.random_range(1..=max_blocks.max(1));
  let blocks =
    (0..k).map(|i| FactorBlock::new(format!("b{i}"), rng.random_range(1..=max_n.max(1)), rng.random_range(0.2..1.0), rng.random_range(0.5..2.0))).collect();
  Arc::new(VnAlgebra::new(blocks, true).expect("positive weights normalize"))
}

/// Random complex with `d² = 0` exactly up to rounding.
///
/// Per block, each `C^p` is split by a random unitary into coexact, exact and
/// harmonic columns; `d_p` maps the coexact part of `C^p` onto the exact part
/// of `C^{p+1}` with singular values drawn from `spec.singular`.
pub fn random_complex(rng: &mut impl Rng, spec: RandomComplexSpec) -> Result<HilbertComplex> {
  let algebra = random_algebra(rng, spec.max_blocks, spec.max_n);
  let degrees = spec.degrees.max(1);
  let nb = algebra.num_blocks();
  let mut mults = vec![vec![0usize; nb]; degrees];
  let mut diffs_blocks: Vec<Vec<CMat>> = vec![Vec::with_capacity(nb); degrees - 1];
  for i in 0..nb {
    let m: Vec<usize> = (0..degrees).map(|_| rng.random_range(1..=spec.max_mult.max(1))).collect();
    // rank of d_p
    let mut ranks = vec![0usize; degrees.saturating_sub(1)];
    let mut exact_in = 0;
    for p in 0..degrees - 1 {
      let room = m[p] - exact_in;
      let r = rng.random_range(0..=room.min(m[p + 1]));
      ranks[p] = r;
      exact_in = r;
    }
    let frames: Vec<CMat> = m.iter().map(|&k| random_unitary(rng, k)).collect();
    for p in 0..degrees - 1 {
      let r = ranks[p];
      let exact_prev = if p == 0 { 0 } else { ranks[p - 1] };
      // layout of C^p columns: [exact from d_{p-1} | coexact | harmonic]
      let coexact: Vec<usize> = (exact_prev..exact_prev + r).collect();
      let exact_next: Vec<usize> = (0..r).collect();
      let (lo, hi) = spec.singular;
      let sigma: Vec<f64> = (0..r).map(|_| rng.random_range(lo..=hi)).collect();
      let core = random_unitary(rng, r) * CMat::from_fn(r, r, |a, b| if a == b { c(sigma[a], 0.0) } else { linalg::ZERO }) * random_unitary(rng, r).adjoint();
      let v = linalg::select_columns(&frames[p], &coexact);
      let u = linalg::select_columns(&frames[p + 1], &exact_next);
      diffs_blocks[p].push(u * core * v.adjoint());
    }
    for p in 0..degrees {
      mults[p][i] = m[p];
    }
  }
  let modules: Vec<HilbertModule> = mults.into_iter().map(|m| HilbertModule::new(algebra.clone(), m)).collect::<Result<_>>()?;
  let diffs = diffs_blocks
    .into_iter()
    .enumerate()
    .map(|(p, b)| ModuleMorphism::new(modules[p].clone(), modules[p + 1].clone(), b))
    .collect::<Result<Vec<_>>>()?;
  HilbertComplex::new(modules, diffs)
}

/// A level `λ` in `(lo, hi)` at distance at least `margin` from every
/// Laplacian eigenvalue, or `None` after a bounded number of draws.
pub fn pick_lambda(rng: &mut impl Rng, cx: &HilbertComplex, range: (f64, f64), margin: f64) -> Result<Option<f64>> {
  let mut eigs = Vec::new();
  for p in 0..cx.len() {
    for b in cx.spectrum(p)?.blocks {
      eigs.extend(b.values);
    }
  }
  for _ in 0..1000 {
    let lam = rng.random_range(range.0..range.1);
    if eigs.iter().all(|&v| (v - lam).abs() >= margin) {
      return Ok(Some(lam));
    }
  }
  Ok(None)
}

/// Random invertible endomorphism of each module, condition number at most `max_cond`.
pub fn random_automorphisms(rng: &mut impl Rng, cx: &HilbertComplex, max_cond: f64) -> Vec<ModuleMorphism> {
  cx.modules()
    .iter()
    .map(|m| {
      let blocks = m.mult().iter().map(|&k| random_invertible(rng, k, max_cond)).collect();
      ModuleMorphism::new(m.clone(), m.clone(), blocks).expect("square blocks match the module")
    })
    .collect()
}
