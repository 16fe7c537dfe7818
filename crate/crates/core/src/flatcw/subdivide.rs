//! Barycentric subdivision of CW complexes of dimension at most two.
//!
//! Lifts are carried so that the subdivision operator `S` on chains of the
//! cover is equivariant:
//!
//! - a vertex is kept: `S(ṽ) = ṽ`;
//! - an edge `e` gets a midpoint `e.m` and halves `e.0` (tail to midpoint)
//!   and `e.1` (midpoint to head), `S(ẽ) = ẽ.0 + ẽ.1`; the original tail and
//!   head words stay on the halves that touch them;
//! - a 2-cell `f` with boundary traversals `k = 0..L` gets a center `f.z`,
//!   spokes `f.s{k}` to each traversal start and `f.m{k}` to each traversed
//!   midpoint, and triangles `f.t{k}a`, `f.t{k}b`; `S(f̃)` is their sum.
//!
//! The cochain comparison map is the transpose `S* : C(X') → C(X)`.

use std::collections::HashMap;

use crate::complex::ChainMap;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::module::ModuleMorphism;

use super::bundle::FlatBundle;
use super::cw::{CellularComplex, CwComplexData, Incidence, LiftedVertex, Term};
use super::group::{concat, Word};

/// A fine chain: `Σ coef · (cell · word)`.
pub type FineChain = Vec<(String, Term)>;

#[derive(Debug, Clone)]
pub struct Subdivision {
  pub fine:   CwComplexData,
  /// Image of every coarse cell under the subdivision operator, per dimension.
  pub recipe: Vec<Vec<(String, FineChain)>>,
}

fn face_record(from: &str, to: &str, coef: i64, word: Word) -> Incidence {
  Incidence { from: from.into(), to: to.into(), terms: vec![Term::new(coef, word)] }
}

pub fn barycentric_subdivide(cw: &CwComplexData) -> Result<Subdivision> {
  cw.index()?;
  let dim = cw.dimension();
  if dim > 2 {
    return Err(Error::UnsupportedDimension(dim));
  }
  let empty = Vec::new();
  let vertices = cw.cells.first().unwrap_or(&empty);
  let edges = cw.cells.get(1).unwrap_or(&empty);
  let faces = cw.cells.get(2).unwrap_or(&empty);

  let mut fine_cells: Vec<Vec<String>> = vec![vertices.clone(), Vec::new(), Vec::new()];
  let mut incidence = Vec::new();
  let mut recipe: Vec<Vec<(String, FineChain)>> = vec![Vec::new(), Vec::new(), Vec::new()];
  recipe[0] = vertices.iter().map(|v| (v.clone(), vec![(v.clone(), Term::new(1, vec![]))])).collect();

  let mut ends: HashMap<&str, (LiftedVertex, LiftedVertex)> = HashMap::new();
  for e in edges {
    let (tail, head) = cw.edge_ends(e)?;
    let (mid, e0, e1) = (format!("{e}.m"), format!("{e}.0"), format!("{e}.1"));
    fine_cells[0].push(mid.clone());
    fine_cells[1].push(e0.clone());
    fine_cells[1].push(e1.clone());
    incidence.push(face_record(&e0, &tail.0, -1, tail.1.clone()));
    incidence.push(face_record(&e0, &mid, 1, vec![]));
    incidence.push(face_record(&e1, &mid, -1, vec![]));
    incidence.push(face_record(&e1, &head.0, 1, head.1.clone()));
    recipe[1].push((e.clone(), vec![(e0, Term::new(1, vec![])), (e1, Term::new(1, vec![]))]));
    ends.insert(e.as_str(), (tail, head));
  }

  for f in faces {
    let steps = cw.boundary(f);
    if steps.is_empty() {
      return Err(Error::InvalidCell(format!("2-cell `{f}` has empty boundary")));
    }
    let len = steps.len();
    let center = format!("{f}.z");
    fine_cells[0].push(center.clone());
    let mut chain = Vec::new();
    // start point, midpoint, and the two oriented halves of each traversal
    let mut starts = Vec::with_capacity(len);
    let mut plan = Vec::with_capacity(len);
    for step in &steps {
      let (tail, head) = ends.get(step.face.as_str()).ok_or_else(|| Error::UnknownCell(step.face.clone()))?;
      let w = &step.word;
      let (e0, e1) = (format!("{}.0", step.face), format!("{}.1", step.face));
      let (start, first, second) = match step.coef {
        1 => ((tail.0.clone(), concat(&tail.1, w)), (e0, 1), (e1, 1)),
        -1 => ((head.0.clone(), concat(&head.1, w)), (e1, -1), (e0, -1)),
        c => return Err(Error::InvalidCell(format!("2-cell `{f}` meets `{}` with coefficient {c}", step.face))),
      };
      starts.push(start);
      plan.push((format!("{}.m", step.face), w.clone(), first, second));
    }
    for k in 0..len {
      let (spoke_s, spoke_m) = (format!("{f}.s{k}"), format!("{f}.m{k}"));
      fine_cells[1].push(spoke_s.clone());
      fine_cells[1].push(spoke_m.clone());
      let (mid, w, _, _) = &plan[k];
      incidence.push(face_record(&spoke_s, &center, -1, vec![]));
      incidence.push(face_record(&spoke_s, &starts[k].0, 1, starts[k].1.clone()));
      incidence.push(face_record(&spoke_m, &center, -1, vec![]));
      incidence.push(face_record(&spoke_m, mid, 1, w.clone()));
    }
    for k in 0..len {
      let (_, w, (h0, c0), (h1, c1)) = &plan[k];
      let (ta, tb) = (format!("{f}.t{k}a"), format!("{f}.t{k}b"));
      let (spoke_s, spoke_m, spoke_next) = (format!("{f}.s{k}"), format!("{f}.m{k}"), format!("{f}.s{}", (k + 1) % len));
      fine_cells[2].push(ta.clone());
      fine_cells[2].push(tb.clone());
      incidence.push(face_record(&ta, &spoke_s, 1, vec![]));
      incidence.push(face_record(&ta, h0, *c0, w.clone()));
      incidence.push(face_record(&ta, &spoke_m, -1, vec![]));
      incidence.push(face_record(&tb, &spoke_m, 1, vec![]));
      incidence.push(face_record(&tb, h1, *c1, w.clone()));
      incidence.push(face_record(&tb, &spoke_next, -1, vec![]));
      chain.push((ta, Term::new(1, vec![])));
      chain.push((tb, Term::new(1, vec![])));
    }
    recipe[2].push((f.clone(), chain));
  }

  let len = cw.cells.len().max(1);
  fine_cells.resize(len, Vec::new());
  recipe.resize(len, Vec::new());
  Ok(Subdivision { fine: CwComplexData { cells: fine_cells, incidence }, recipe })
}

impl Subdivision {
  /// `S* : C(X') → C(X)` for complexes assembled with the same bundle.
  pub fn comparison_map(&self, coarse: &CellularComplex, fine: &CellularComplex, bundle: &FlatBundle) -> Result<ChainMap> {
    let fiber = bundle.fiber();
    let mut maps = Vec::with_capacity(coarse.cells.len());
    for p in 0..coarse.cells.len() {
      let rows = coarse.cells[p].len();
      let cols = fine.cells.get(p).map_or(0, Vec::len);
      let mut blocks: Vec<CMat> = fiber.mult().iter().map(|&m| linalg::zeros(rows * m, cols * m)).collect();
      for (cell, chain) in self.recipe.get(p).into_iter().flatten() {
        let (_, r) = coarse.locate(cell).ok_or_else(|| Error::UnknownCell(cell.clone()))?;
        for (fine_cell, term) in chain {
          let (_, col) = fine.locate(fine_cell).ok_or_else(|| Error::UnknownCell(fine_cell.clone()))?;
          let rep = bundle.evaluate(&term.word)?;
          for (i, &m) in fiber.mult().iter().enumerate() {
            let mut view = blocks[i].view_mut((r * m, col * m), (m, m));
            view += rep.blocks()[i].scale(term.coef as f64);
          }
        }
      }
      maps.push(ModuleMorphism::new(fine.complex.module(p).clone(), coarse.complex.module(p).clone(), blocks)?);
    }
    Ok(ChainMap::new(maps))
  }
}
