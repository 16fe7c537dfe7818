//! CW complexes with group-ring incidence data and their twisted cochain complexes.
//!
//! Each cell is stored once; its lifts to the covering space are translates
//! by the (right) group action. An incidence term `c · w` on the pair
//! `(σ, τ)` says that `c` copies of `τ̃ · w` occur in `∂σ̃`. The coboundary
//! then has block entry `δ_{στ} = Σ c · R(w)`.
//!
//! For 2-cells the order of the incidence records (and of the terms inside
//! each record) is the cyclic order of the boundary traversal; it matters only
//! for subdivision.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::complex::HilbertComplex;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::module::{HilbertModule, ModuleMorphism};
use crate::tolerances::Tolerances;

use super::bundle::FlatBundle;
use super::group::{concat, inverse_word, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
  pub coef: i64,
  #[serde(default)]
  pub word: Word,
}

impl Term {
  pub fn new(coef: i64, word: Word) -> Self { Self { coef, word } }
}

/// Terms of `τ` (a face) in the boundary of `σ` (the `from` cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
  pub from:  String,
  pub to:    String,
  pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwComplexData {
  /// Cell labels per dimension.
  pub cells:     Vec<Vec<String>>,
  #[serde(default)]
  pub incidence: Vec<Incidence>,
}

/// One step of a boundary traversal: `coef · (face · word)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Traversal {
  pub coef: i64,
  pub word: Word,
  pub face: String,
}

/// A point of the cover, `vertex · word`.
pub type LiftedVertex = (String, Word);

impl CwComplexData {
  /// Highest dimension carrying a cell, or 0 for the empty complex.
  pub fn dimension(&self) -> usize { self.cells.iter().rposition(|c| !c.is_empty()).unwrap_or(0) }

  /// Map from label to `(dimension, index)`, checking labels and incidence.
  pub fn index(&self) -> Result<HashMap<String, (usize, usize)>> {
    let mut map = HashMap::new();
    for (p, cells) in self.cells.iter().enumerate() {
      for (i, c) in cells.iter().enumerate() {
        if map.insert(c.clone(), (p, i)).is_some() {
          return Err(Error::InvalidCell(format!("duplicate cell label `{c}`")));
        }
      }
    }
    for inc in &self.incidence {
      let &(pf, _) = map.get(&inc.from).ok_or_else(|| Error::UnknownCell(inc.from.clone()))?;
      let &(pt, _) = map.get(&inc.to).ok_or_else(|| Error::UnknownCell(inc.to.clone()))?;
      if pf != pt + 1 {
        return Err(Error::InvalidCell(format!("`{}` ({pf}-cell) cannot have face `{}` ({pt}-cell)", inc.from, inc.to)));
      }
    }
    Ok(map)
  }

  pub fn cell_dim(&self, label: &str) -> Option<usize> { self.cells.iter().position(|c| c.iter().any(|x| x == label)) }

  /// Boundary of `cell` in record and term order.
  pub fn boundary(&self, cell: &str) -> Vec<Traversal> {
    self
      .incidence
      .iter()
      .filter(|inc| inc.from == cell)
      .flat_map(|inc| inc.terms.iter().map(move |t| Traversal { coef: t.coef, word: t.word.clone(), face: inc.to.clone() }))
      .filter(|t| t.coef != 0)
      .collect()
  }

  /// `(tail, head)` lifted endpoints of a 1-cell with `∂ẽ = head − tail`.
  pub fn edge_ends(&self, edge: &str) -> Result<(LiftedVertex, LiftedVertex)> {
    let terms = self.boundary(edge);
    let tail = terms.iter().filter(|t| t.coef == -1).collect::<Vec<_>>();
    let head = terms.iter().filter(|t| t.coef == 1).collect::<Vec<_>>();
    if terms.len() != 2 || tail.len() != 1 || head.len() != 1 {
      return Err(Error::InvalidCell(format!("edge `{edge}` needs boundary head − tail")));
    }
    Ok(((tail[0].face.clone(), tail[0].word.clone()), (head[0].face.clone(), head[0].word.clone())))
  }

  /// Tail and head vertex labels of a 1-cell.
  pub fn edge_endpoints(&self, edge: &str) -> Result<(String, String)> {
    let ((t, _), (h, _)) = self.edge_ends(edge)?;
    Ok((t, h))
  }

  /// Replaces the lift of `cell` by `cell̃ · h`.
  ///
  /// Terms where the cell is a face get `h^{-1}` prepended; terms of its own
  /// boundary get `h` appended. The resulting coboundary is conjugate to the
  /// original one.
  pub fn relift(&self, cell: &str, h: &[(String, i64)]) -> Result<Self> {
    if self.cell_dim(cell).is_none() {
      return Err(Error::UnknownCell(cell.to_string()));
    }
    let h_inv = inverse_word(h);
    let mut out = self.clone();
    for inc in &mut out.incidence {
      for t in &mut inc.terms {
        if inc.to == cell {
          t.word = concat(&h_inv, &t.word);
        }
        if inc.from == cell {
          t.word = concat(&t.word, h);
        }
      }
    }
    Ok(out)
  }
}

/// A cochain complex assembled from a CW complex, remembering its cells.
#[derive(Debug, Clone)]
pub struct CellularComplex {
  pub complex: HilbertComplex,
  pub cells:   Vec<Vec<String>>,
  pub fiber:   HilbertModule,
}

impl CellularComplex {
  /// `(degree, index)` of a cell label.
  pub fn locate(&self, label: &str) -> Option<(usize, usize)> {
    self.cells.iter().enumerate().find_map(|(p, cs)| cs.iter().position(|c| c == label).map(|i| (p, i)))
  }
}

pub fn assemble_cochain_complex(cw: &CwComplexData, bundle: &FlatBundle) -> Result<CellularComplex> {
  assemble_with(cw, bundle, Tolerances::default())
}

/// Builds `C^p = M^{#p-cells}` and `δ` from incidence terms `Σ c R(w)`.
pub fn assemble_with(cw: &CwComplexData, bundle: &FlatBundle, tolerances: Tolerances) -> Result<CellularComplex> {
  let index = cw.index()?;
  let fiber = bundle.fiber();
  let mut cells = cw.cells.clone();
  if cells.is_empty() {
    cells.push(Vec::new());
  }
  let modules: Vec<HilbertModule> = cells.iter().map(|c| fiber.power(c.len())).collect();
  let mut blocks: Vec<Vec<CMat>> = (0..cells.len().saturating_sub(1))
    .map(|p| fiber.mult().iter().map(|&m| linalg::zeros(cells[p + 1].len() * m, cells[p].len() * m)).collect())
    .collect();

  let mut cache: HashMap<Word, ModuleMorphism> = HashMap::new();
  for inc in &cw.incidence {
    let (p1, row) = index[&inc.from];
    let (_, col) = index[&inc.to];
    for term in &inc.terms {
      if term.coef == 0 {
        continue;
      }
      for (g, _) in &term.word {
        if !bundle.group().has_generator(g) {
          return Err(Error::UnknownGroupElement(g.clone()));
        }
      }
      if !cache.contains_key(&term.word) {
        cache.insert(term.word.clone(), bundle.evaluate(&term.word)?);
      }
      let rep = &cache[&term.word];
      for (i, &m) in fiber.mult().iter().enumerate() {
        let mut view = blocks[p1 - 1][i].view_mut((row * m, col * m), (m, m));
        view += rep.blocks()[i].scale(term.coef as f64);
      }
    }
  }
  let diffs = blocks
    .into_iter()
    .enumerate()
    .map(|(p, b)| ModuleMorphism::new(modules[p].clone(), modules[p + 1].clone(), b))
    .collect::<Result<Vec<_>>>()?;
  let complex = HilbertComplex::with_tolerances(modules, diffs, tolerances)?;
  Ok(CellularComplex { complex, cells, fiber: fiber.clone() })
}
