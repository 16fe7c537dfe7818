//! JSON documents for algebras, modules, complexes, CW complexes, bundles,
//! cocycles and Morse data.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs. Algebras may be
//! written out block by block or generated (`cyclic` group algebras and
//! `sampled_circle` fibers); generated algebras also know the character
//! frequencies of their blocks, which is what `{"character": k}` maps use.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complex::HilbertComplex;
use crate::corpus::character_bundle;
use crate::error::{Error, Result};
use crate::flatcw::{
  bundle_from_cocycle, make_bundle_from_monodromy, CechCocycle, CwComplexData, FlatBundle, GroupSpec, Transition,
};
use crate::linalg::{c, CMat};
use crate::module::{HilbertModule, ModuleMorphism};
use crate::tolerances::Tolerances;
use crate::vna::{self, FactorBlock, VnAlgebra};
use crate::witten::MorseData;

pub const SCHEMA_VERSION: u32 = 1;

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_doc(m: &CMat) -> MatrixDoc {
  (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Reads a `rows × cols` matrix; an empty list stands for any empty shape.
pub fn matrix_from_doc(doc: &MatrixDoc, rows: usize, cols: usize, what: &str) -> Result<CMat> {
  if rows * cols == 0 && doc.iter().all(Vec::is_empty) {
    return Ok(CMat::zeros(rows, cols));
  }
  if doc.len() != rows || doc.iter().any(|r| r.len() != cols) {
    return Err(Error::ShapeMismatch(format!("{what}: expected {rows}×{cols} matrix")));
  }
  if doc.iter().flatten().flatten().any(|x| !x.is_finite()) {
    return Err(Error::InvalidParameter(format!("{what}: non-finite entry")));
  }
  Ok(CMat::from_fn(rows, cols, |i, j| c(doc[i][j][0], doc[i][j][1])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratedKind {
  /// `ℓ²(Z_n)` split into its `n` characters.
  Cyclic,
  /// `fibers` midpoint samples of the dual circle of `Z`.
  SampledCircle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraDoc {
  Explicit {
    blocks:    Vec<FactorBlock>,
    #[serde(default)]
    normalize: bool,
  },
  Generated {
    generated: GeneratedKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n:         Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fibers:    Option<usize>,
  },
}

/// An algebra together with the character frequency of each block, when known.
#[derive(Debug, Clone)]
pub struct BuiltAlgebra {
  pub algebra:     Arc<VnAlgebra>,
  pub frequencies: Option<Vec<f64>>,
}

/// Options applied while turning documents into objects.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
  /// Overrides the fiber count of sampled-circle algebras.
  pub fibers:     Option<usize>,
  pub tolerances: Tolerances,
}

impl AlgebraDoc {
  pub fn from_algebra(a: &VnAlgebra) -> Self { Self::Explicit { blocks: a.blocks().to_vec(), normalize: false } }

  pub fn build(&self, opts: &BuildOptions) -> Result<BuiltAlgebra> {
    match self {
      Self::Explicit { blocks, normalize } => {
        Ok(BuiltAlgebra { algebra: Arc::new(VnAlgebra::new(blocks.clone(), *normalize)?), frequencies: None })
      }
      Self::Generated { generated: GeneratedKind::Cyclic, n, .. } => {
        let n = n.ok_or_else(|| Error::InvalidParameter("cyclic algebra needs `n`".into()))?;
        Ok(BuiltAlgebra { algebra: Arc::new(vna::cyclic_group_algebra(n)?), frequencies: Some(vna::cyclic_frequencies(n)) })
      }
      Self::Generated { generated: GeneratedKind::SampledCircle, fibers, .. } => {
        let k = opts.fibers.or(*fibers).ok_or_else(|| Error::InvalidParameter("sampled circle needs `fibers`".into()))?;
        Ok(BuiltAlgebra {
          algebra:     Arc::new(vna::sampled_circle_algebra(k)?),
          frequencies: Some(vna::sampled_circle_frequencies(k)),
        })
      }
    }
  }
}

/// A module over an algebra fixed by the enclosing document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModuleRef {
  Mult { mult: Vec<usize> },
  /// `free: k` is `A^k`; `free: 1` is the regular module.
  Free { free: usize },
}

impl ModuleRef {
  pub fn build(&self, algebra: &Arc<VnAlgebra>) -> Result<HilbertModule> {
    match self {
      Self::Mult { mult } => HilbertModule::new(algebra.clone(), mult.clone()),
      Self::Free { free } => Ok(HilbertModule::free(algebra.clone(), *free)),
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleDoc {
  pub algebra: AlgebraDoc,
  pub mult:    Vec<usize>,
}

impl ModuleDoc {
  pub fn build(&self, opts: &BuildOptions) -> Result<HilbertModule> {
    HilbertModule::new(self.algebra.build(opts)?.algebra, self.mult.clone())
  }
}

/// A morphism; `source`/`target` may be omitted where the context fixes them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphismDoc {
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub source: Option<ModuleRef>,
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub target: Option<ModuleRef>,
  pub blocks: Vec<MatrixDoc>,
}

impl MorphismDoc {
  pub fn from_morphism(f: &ModuleMorphism) -> Self {
    Self {
      source: Some(ModuleRef::Mult { mult: f.source().mult().to_vec() }),
      target: Some(ModuleRef::Mult { mult: f.target().mult().to_vec() }),
      blocks: f.blocks().iter().map(matrix_to_doc).collect(),
    }
  }

  /// Builds against known source and target, checking any stated ones.
  pub fn build_between(&self, source: &HilbertModule, target: &HilbertModule, what: &str) -> Result<ModuleMorphism> {
    for (stated, known, side) in [(&self.source, source, "source"), (&self.target, target, "target")] {
      if let Some(r) = stated {
        if &r.build(known.algebra())? != known {
          return Err(Error::ShapeMismatch(format!("{what}: stated {side} differs from context")));
        }
      }
    }
    if self.blocks.len() != source.mult().len() {
      return Err(Error::ShapeMismatch(format!("{what}: expected {} blocks", source.mult().len())));
    }
    let blocks = self
      .blocks
      .iter()
      .enumerate()
      .map(|(i, b)| matrix_from_doc(b, target.mult()[i], source.mult()[i], &format!("{what}, block {i}")))
      .collect::<Result<_>>()?;
    ModuleMorphism::new(source.clone(), target.clone(), blocks)
  }

  /// Standalone morphism within an algebra; both ends must be stated.
  pub fn build(&self, algebra: &Arc<VnAlgebra>) -> Result<ModuleMorphism> {
    let missing = || Error::InvalidParameter("morphism needs `source` and `target`".into());
    let s = self.source.as_ref().ok_or_else(missing)?.build(algebra)?;
    let t = self.target.as_ref().ok_or_else(missing)?.build(algebra)?;
    self.build_between(&s, &t, "morphism")
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandaloneMorphismDoc {
  pub algebra: AlgebraDoc,
  #[serde(flatten)]
  pub morphism: MorphismDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexDoc {
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub schema_version: Option<u32>,
  pub algebra:        AlgebraDoc,
  pub modules:        Vec<ModuleRef>,
  #[serde(default)]
  pub differentials:  Vec<MorphismDoc>,
}

impl ComplexDoc {
  pub fn from_complex(cx: &HilbertComplex) -> Self {
    Self {
      schema_version: Some(SCHEMA_VERSION),
      algebra:        AlgebraDoc::from_algebra(cx.algebra()),
      modules:        cx.modules().iter().map(|m| ModuleRef::Mult { mult: m.mult().to_vec() }).collect(),
      differentials:  cx.differentials().iter().map(MorphismDoc::from_morphism).collect(),
    }
  }

  pub fn build(&self, opts: &BuildOptions) -> Result<HilbertComplex> {
    let algebra = self.algebra.build(opts)?.algebra;
    let modules = self.modules.iter().map(|m| m.build(&algebra)).collect::<Result<Vec<_>>>()?;
    if self.differentials.len() + 1 != modules.len() {
      return Err(Error::ShapeMismatch(format!("{} modules need {} differentials", modules.len(), modules.len().saturating_sub(1))));
    }
    let diffs = self
      .differentials
      .iter()
      .enumerate()
      .map(|(p, d)| d.build_between(&modules[p], &modules[p + 1], &format!("differential {p}")))
      .collect::<Result<Vec<_>>>()?;
    HilbertComplex::with_tolerances(modules, diffs, opts.tolerances)
  }
}

/// A map on a bundle fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FiberMapDoc {
  Blocks { blocks: Vec<MatrixDoc> },
  /// Diagonal `exp(2πi · k · ω_j)` on a generated algebra's regular module.
  Character { character: i64 },
  Identity { identity: bool },
}

impl FiberMapDoc {
  pub fn build(&self, fiber: &HilbertModule, built: &BuiltAlgebra, what: &str) -> Result<ModuleMorphism> {
    match self {
      Self::Blocks { blocks } => MorphismDoc { source: None, target: None, blocks: blocks.clone() }.build_between(fiber, fiber, what),
      Self::Identity { identity: true } => Ok(ModuleMorphism::identity(fiber)),
      Self::Identity { identity: false } => Err(Error::InvalidParameter(format!("{what}: `identity` must be true"))),
      Self::Character { character } => {
        let freqs = built
          .frequencies
          .as_ref()
          .ok_or_else(|| Error::InvalidParameter(format!("{what}: characters need a generated algebra")))?;
        let group = GroupSpec::free(["x"]);
        let b = character_bundle(group, built.algebra.clone(), freqs, &BTreeMap::from([("x".to_string(), *character)]))?;
        if fiber.mult().iter().any(|&m| m != 1) || b.fiber() != fiber {
          return Err(Error::InvalidParameter(format!("{what}: characters act on the regular module only")));
        }
        Ok(b.monodromy()["x"].clone())
      }
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberDoc {
  pub algebra: AlgebraDoc,
  /// Omitted for the regular module.
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub mult:    Option<Vec<usize>>,
}

impl FiberDoc {
  pub fn build(&self, opts: &BuildOptions) -> Result<(HilbertModule, BuiltAlgebra)> {
    let built = self.algebra.build(opts)?;
    let m = match &self.mult {
      Some(mult) => HilbertModule::new(built.algebra.clone(), mult.clone())?,
      None => HilbertModule::regular(built.algebra.clone()),
    };
    Ok((m, built))
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleDoc {
  pub group:     GroupSpec,
  pub fiber:     FiberDoc,
  pub monodromy: BTreeMap<String, FiberMapDoc>,
}

impl BundleDoc {
  pub fn build(&self, opts: &BuildOptions) -> Result<FlatBundle> {
    let (fiber, built) = self.fiber.build(opts)?;
    for g in self.monodromy.keys() {
      if !self.group.has_generator(g) {
        return Err(Error::UnknownGroupElement(g.clone()));
      }
    }
    let images = self
      .group
      .generators
      .iter()
      .map(|g| {
        let doc = self.monodromy.get(g).ok_or_else(|| Error::InvalidParameter(format!("no monodromy for generator `{g}`")))?;
        Ok((g.clone(), doc.build(&fiber, &built, &format!("monodromy of `{g}`"))?))
      })
      .collect::<Result<BTreeMap<_, _>>>()?;
    make_bundle_from_monodromy(self.group.clone(), fiber, images)
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDoc {
  #[serde(default)]
  pub edge:   Option<String>,
  pub first:  String,
  pub second: String,
  pub map:    FiberMapDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleDoc {
  pub fiber:       FiberDoc,
  pub patches:     Vec<String>,
  /// Patches as vertices, overlap components as edges.
  pub nerve:       CwComplexData,
  pub transitions: Vec<TransitionDoc>,
  #[serde(default)]
  pub triples:     Vec<[String; 3]>,
}

impl CocycleDoc {
  pub fn cocycle(&self, opts: &BuildOptions) -> Result<CechCocycle> {
    let (fiber, built) = self.fiber.build(opts)?;
    let transitions = self
      .transitions
      .iter()
      .map(|t| {
        let what = format!("transition {}→{}", t.second, t.first);
        Ok(Transition { edge: t.edge.clone(), first: t.first.clone(), second: t.second.clone(), map: t.map.build(&fiber, &built, &what)? })
      })
      .collect::<Result<_>>()?;
    Ok(CechCocycle { patches: self.patches.clone(), fiber, transitions, triples: self.triples.clone() })
  }

  pub fn build(&self, opts: &BuildOptions) -> Result<FlatBundle> { bundle_from_cocycle(&self.cocycle(opts)?, &self.nerve) }
}

/// A CW complex with a bundle (given directly or by a cocycle) and optional Morse data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDoc {
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub schema_version: Option<u32>,
  pub cw:             CwComplexData,
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub bundle:         Option<BundleDoc>,
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub cocycle:        Option<CocycleDoc>,
  #[serde(default, skip_serializing_if = "Option::is_none")]
  pub morse:          Option<MorseData>,
}

impl SystemDoc {
  pub fn bundle(&self, opts: &BuildOptions) -> Result<FlatBundle> {
    match (&self.bundle, &self.cocycle) {
      (Some(b), None) => b.build(opts),
      (None, Some(c)) => c.build(opts),
      _ => Err(Error::InvalidParameter("give exactly one of `bundle` and `cocycle`".into())),
    }
  }
}

/// The document kinds accepted as analysis input.
#[derive(Debug, Clone)]
pub enum InputDoc {
  Complex(ComplexDoc),
  System(SystemDoc),
  Cw(CwComplexData),
}

fn parse_error(path: &str, e: &serde_json::Error) -> Error {
  Error::Parse { path: path.to_string(), location: format!("line {} column {}: {e}", e.line(), e.column()) }
}

/// Parses `text` as `T`, labelling errors with `path`.
pub fn parse_str<T: DeserializeOwned>(text: &str, path: &str) -> Result<T> {
  serde_json::from_str(text).map_err(|e| parse_error(path, &e))
}

fn read(path: &Path) -> Result<String> {
  std::fs::read_to_string(path)
    .map_err(|e| Error::Parse { path: path.display().to_string(), location: format!("cannot read: {e}") })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> { parse_str(&read(path)?, &path.display().to_string()) }

/// Detects the document kind by its top-level keys, then parses it strictly.
pub fn parse_input(text: &str, path: &str) -> Result<InputDoc> {
  let value: serde_json::Value = parse_str(text, path)?;
  let has = |k: &str| value.get(k).is_some();
  if has("cw") {
    Ok(InputDoc::System(parse_str(text, path)?))
  } else if has("modules") {
    Ok(InputDoc::Complex(parse_str(text, path)?))
  } else if has("cells") {
    Ok(InputDoc::Cw(parse_str(text, path)?))
  } else {
    Err(Error::Parse { path: path.to_string(), location: "top level: expected a complex, cw or system document".into() })
  }
}

pub fn load_input(path: &Path) -> Result<InputDoc> { parse_input(&read(path)?, &path.display().to_string()) }
