//! Flat Hilbert bundles: monodromy representations and Čech cocycles.
//!
//! Monodromy is contravariant: a word `x_1^{a_1} ⋯ x_k^{a_k}` evaluates to
//! `R(x_k)^{a_k} ⋯ R(x_1)^{a_1}`, matching the right action of the group on
//! lifted cells used by [`super::cw`].

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::module::{compose, HilbertModule, ModuleMorphism};

use super::cw::CwComplexData;
use super::group::{GroupKind, GroupSpec};

/// Relations and cocycle identities must hold to `1e-10 · max(1, scale)`.
pub const RELATION_TOL: f64 = 1e-10;

/// Images whose condition number exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

fn rel_tol(a: &ModuleMorphism, b: &ModuleMorphism) -> f64 { RELATION_TOL * a.max_entry().max(b.max_entry()).max(1.0) }

/// A flat bundle with fiber `M` and validated monodromy.
#[derive(Debug, Clone)]
pub struct FlatBundle {
  group:      GroupSpec,
  fiber:      HilbertModule,
  monodromy:  BTreeMap<String, ModuleMorphism>,
  inverses:   BTreeMap<String, ModuleMorphism>,
  conditions: BTreeMap<String, f64>,
  residuals:  Vec<(String, f64)>,
}

impl FlatBundle {
  pub fn group(&self) -> &GroupSpec { &self.group }

  pub fn fiber(&self) -> &HilbertModule { &self.fiber }

  pub fn monodromy(&self) -> &BTreeMap<String, ModuleMorphism> { &self.monodromy }

  /// Condition number of each generator image.
  pub fn condition_numbers(&self) -> &BTreeMap<String, f64> { &self.conditions }

  /// Residual of each checked relation.
  pub fn relation_residuals(&self) -> &[(String, f64)] { &self.residuals }

  /// `R(x)^e`, negative powers through the stored inverse.
  pub fn power(&self, generator: &str, exponent: i64) -> Result<ModuleMorphism> {
    let base = if exponent >= 0 { self.monodromy.get(generator) } else { self.inverses.get(generator) };
    let base = base.ok_or_else(|| Error::UnknownGroupElement(generator.to_string()))?;
    let mut out = ModuleMorphism::identity(&self.fiber);
    for _ in 0..exponent.unsigned_abs() {
      out = compose(base, &out)?;
    }
    Ok(out)
  }

  /// Contravariant evaluation of a word.
  pub fn evaluate(&self, word: &[(String, i64)]) -> Result<ModuleMorphism> {
    let mut out = ModuleMorphism::identity(&self.fiber);
    for (g, e) in word {
      out = compose(&self.power(g, *e)?, &out)?;
    }
    Ok(out)
  }
}

/// Trivial representation: every generator acts by the identity.
pub fn trivial_bundle(group: GroupSpec, fiber: HilbertModule) -> Result<FlatBundle> {
  let images = group.generators.iter().map(|g| (g.clone(), ModuleMorphism::identity(&fiber))).collect();
  make_bundle_from_monodromy(group, fiber, images)
}

/// Validates a representation `Γ^op → GL_A(M)` given on generators.
pub fn make_bundle_from_monodromy(
  group: GroupSpec,
  fiber: HilbertModule,
  images: BTreeMap<String, ModuleMorphism>,
) -> Result<FlatBundle> {
  group.validate()?;
  for g in images.keys() {
    if !group.has_generator(g) {
      return Err(Error::UnknownGroupElement(g.clone()));
    }
  }
  let mut inverses = BTreeMap::new();
  let mut conditions = BTreeMap::new();
  for g in &group.generators {
    let r = images.get(g).ok_or_else(|| Error::InvalidParameter(format!("no monodromy image for generator `{g}`")))?;
    if !r.is_endomorphism() || *r.source() != fiber {
      return Err(Error::ShapeMismatch(format!("monodromy of `{g}` is not an endomorphism of the fiber")));
    }
    let cond = r.condition_number()?;
    let inv = r.inverse().filter(|_| cond <= MAX_CONDITION).ok_or_else(|| Error::NotInvertible(g.clone()))?;
    conditions.insert(g.clone(), cond);
    inverses.insert(g.clone(), inv);
  }
  let mut bundle = FlatBundle { group, fiber, monodromy: images, inverses, conditions, residuals: Vec::new() };
  bundle.residuals = check_relations(&bundle)?;
  Ok(bundle)
}

fn check_relations(b: &FlatBundle) -> Result<Vec<(String, f64)>> {
  let gens = &b.group.generators;
  let id = ModuleMorphism::identity(&b.fiber);
  let mut out = Vec::new();
  let mut record = |name: String, lhs: &ModuleMorphism, rhs: &ModuleMorphism| -> Result<()> {
    let r = lhs.sub(rhs)?.max_entry();
    if !(r <= rel_tol(lhs, rhs)) {
      return Err(Error::RelationViolated { relation: name, residual: r });
    }
    out.push((name, r));
    Ok(())
  };
  match &b.group.kind {
    GroupKind::Cyclic { n } => {
      let g = &gens[0];
      let pow = b.power(g, *n as i64)?;
      record(format!("{g}^{n} = 1"), &pow, &id)?;
    }
    GroupKind::Commuting => {
      for i in 0..gens.len() {
        for j in i + 1..gens.len() {
          let (x, y) = (&b.monodromy[&gens[i]], &b.monodromy[&gens[j]]);
          record(format!("{0}{1} = {1}{0}", gens[i], gens[j]), &compose(x, y)?, &compose(y, x)?)?;
        }
      }
    }
    GroupKind::Free => {}
    GroupKind::Table { table, generator_elements } => {
      // breadth-first closure: every element reached twice must agree
      let mut images: Vec<Option<ModuleMorphism>> = vec![None; table.len()];
      images[0] = Some(id.clone());
      let mut queue = VecDeque::from([0usize]);
      while let Some(x) = queue.pop_front() {
        let rx = images[x].clone().expect("queued elements have images");
        for (k, g) in gens.iter().enumerate() {
          let y = table[x][generator_elements[k]];
          // ρ(x g) = ρ(g) ρ(x)
          let ry = compose(&b.monodromy[g], &rx)?;
          match &images[y] {
            Some(existing) => record(format!("element {x}·{g} = {y}"), &ry, existing)?,
            None => {
              images[y] = Some(ry);
              queue.push_back(y);
            }
          }
        }
      }
    }
  }
  Ok(out)
}

/// One transition map `g_{XY}` on an overlap component (a nerve edge).
///
/// `g_{XY}` takes coordinates over `Y` to coordinates over `X`.
#[derive(Debug, Clone)]
pub struct Transition {
  pub edge:   Option<String>,
  pub first:  String,
  pub second: String,
  pub map:    ModuleMorphism,
}

/// Čech 1-cocycle on a finite cover.
#[derive(Debug, Clone)]
pub struct CechCocycle {
  pub patches:     Vec<String>,
  pub fiber:       HilbertModule,
  pub transitions: Vec<Transition>,
  /// Flagged triple overlaps as `(uv, vw, uw)` edge labels, checked as
  /// `g_uv · g_vw = g_uw`.
  pub triples:     Vec<[String; 3]>,
}

impl CechCocycle {
  /// Checks `g_UU = 1`, inverse pairs and flagged triples.
  pub fn validate(&self) -> Result<()> {
    let id = ModuleMorphism::identity(&self.fiber);
    let by_edge: HashMap<&str, &Transition> =
      self.transitions.iter().filter_map(|t| t.edge.as_deref().map(|e| (e, t))).collect();
    for t in &self.transitions {
      for p in [&t.first, &t.second] {
        if !self.patches.contains(p) {
          return Err(Error::UnknownCell(p.clone()));
        }
      }
      if t.first == t.second {
        let r = t.map.sub(&id)?.max_entry();
        if !(r <= rel_tol(&t.map, &id)) {
          return Err(Error::CocycleViolated { what: format!("g_{0}{0} = 1", t.first), residual: r });
        }
      }
    }
    for [uv, vw, uw] in &self.triples {
      let get = |e: &String| by_edge.get(e.as_str()).copied().ok_or_else(|| Error::UnknownCell(e.clone()));
      let (a, b, c) = (get(uv)?, get(vw)?, get(uw)?);
      if a.second != b.first || a.first != c.first || b.second != c.second {
        return Err(Error::InvalidParameter(format!("triple ({uv}, {vw}, {uw}) does not chain")));
      }
      let lhs = compose(&a.map, &b.map)?;
      let r = lhs.sub(&c.map)?.max_entry();
      if !(r <= rel_tol(&lhs, &c.map)) {
        return Err(Error::CocycleViolated { what: format!("g_{uv} g_{vw} = g_{uw}"), residual: r });
      }
    }
    Ok(())
  }
}

/// Monodromy of a cocycle around the loops of the nerve's 1-skeleton.
///
/// Vertices of `nerve` are the patches and its edges the overlap components;
/// each transition names the edge it lives on. A spanning forest fixes the
/// gauge; every non-tree edge becomes a free generator with monodromy
/// `h_X^{-1} g_{XY} h_Y`. A simply connected nerve yields no generators.
pub fn bundle_from_cocycle(cocycle: &CechCocycle, nerve: &CwComplexData) -> Result<FlatBundle> {
  cocycle.validate()?;
  let vertices = nerve.cells.first().cloned().unwrap_or_default();
  for p in &cocycle.patches {
    if !vertices.contains(p) {
      return Err(Error::UnknownCell(p.clone()));
    }
  }
  let edges = nerve.cells.get(1).cloned().unwrap_or_default();
  let mut on_edge: HashMap<&str, &Transition> = HashMap::new();
  for t in &cocycle.transitions {
    if t.first == t.second {
      continue;
    }
    let e = t.edge.as_deref().ok_or_else(|| Error::InvalidParameter("transition between patches needs an edge".into()))?;
    if !edges.iter().any(|x| x == e) {
      return Err(Error::UnknownCell(e.to_string()));
    }
    let ends = nerve.edge_endpoints(e)?;
    let mut want = [t.first.as_str(), t.second.as_str()];
    let mut got = [ends.0.as_str(), ends.1.as_str()];
    want.sort();
    got.sort();
    if want != got {
      return Err(Error::InvalidParameter(format!("transition on `{e}` does not join its endpoints")));
    }
    on_edge.insert(e, t);
  }

  let id = ModuleMorphism::identity(&cocycle.fiber);
  let mut gauge: HashMap<String, ModuleMorphism> = HashMap::new();
  let mut tree_edges = std::collections::HashSet::new();
  for root in &cocycle.patches {
    if gauge.contains_key(root) {
      continue;
    }
    gauge.insert(root.clone(), id.clone());
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(u) = queue.pop_front() {
      for e in &edges {
        let Some(t) = on_edge.get(e.as_str()) else { continue };
        let (v, step) = if t.second == u && !gauge.contains_key(&t.first) {
          (t.first.clone(), t.map.clone())
        } else if t.first == u && !gauge.contains_key(&t.second) {
          (t.second.clone(), t.map.inverse().ok_or_else(|| Error::NotInvertible(e.clone()))?)
        } else {
          continue;
        };
        let hv = compose(&step, &gauge[&u])?;
        gauge.insert(v.clone(), hv);
        tree_edges.insert(e.clone());
        queue.push_back(v);
      }
    }
  }

  let mut loops = Vec::new();
  let mut images = BTreeMap::new();
  for e in &edges {
    let Some(t) = on_edge.get(e.as_str()) else { continue };
    if tree_edges.contains(e) {
      continue;
    }
    let hx_inv = gauge[&t.first].inverse().ok_or_else(|| Error::NotInvertible(e.clone()))?;
    images.insert(e.clone(), compose(&hx_inv, &compose(&t.map, &gauge[&t.second])?)?);
    loops.push(e.clone());
  }
  make_bundle_from_monodromy(GroupSpec::free(loops), cocycle.fiber.clone(), images)
}
