//! Group presentations and words in their generators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A group element as a product of generator powers, read left to right.
pub type Word = Vec<(String, i64)>;

/// Inverse word: reversed order, negated exponents.
pub fn inverse_word(word: &[(String, i64)]) -> Word { word.iter().rev().map(|(g, e)| (g.clone(), -e)).collect() }

/// Concatenation `a · b`.
pub fn concat(a: &[(String, i64)], b: &[(String, i64)]) -> Word { a.iter().chain(b).cloned().collect() }

/// Which relations the generators satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
  /// `Z_n` on a single generator.
  Cyclic { n: usize },
  /// Free abelian group: generators commute pairwise.
  Commuting,
  /// Free group: no relations.
  Free,
  /// Finite group by multiplication table; element 0 is the identity and
  /// generator `k` is the element `generator_elements[k]`.
  Table { table: Vec<Vec<usize>>, generator_elements: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
  #[serde(flatten)]
  pub kind:       GroupKind,
  pub generators: Vec<String>,
}

impl GroupSpec {
  pub fn cyclic(n: usize, generator: impl Into<String>) -> Self {
    Self { kind: GroupKind::Cyclic { n }, generators: vec![generator.into()] }
  }

  pub fn commuting<S: Into<String>>(generators: impl IntoIterator<Item = S>) -> Self {
    Self { kind: GroupKind::Commuting, generators: generators.into_iter().map(Into::into).collect() }
  }

  pub fn free<S: Into<String>>(generators: impl IntoIterator<Item = S>) -> Self {
    Self { kind: GroupKind::Free, generators: generators.into_iter().map(Into::into).collect() }
  }

  pub fn has_generator(&self, g: &str) -> bool { self.generators.iter().any(|x| x == g) }

  pub fn generator_index(&self, g: &str) -> Result<usize> {
    self.generators.iter().position(|x| x == g).ok_or_else(|| Error::UnknownGroupElement(g.to_string()))
  }

  /// Structural checks that do not involve a representation.
  pub fn validate(&self) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for g in &self.generators {
      if !seen.insert(g) {
        return Err(Error::InvalidParameter(format!("duplicate generator `{g}`")));
      }
    }
    match &self.kind {
      GroupKind::Cyclic { n } => {
        if *n == 0 || self.generators.len() != 1 {
          return Err(Error::InvalidParameter("cyclic group needs n >= 1 and exactly one generator".into()));
        }
      }
      GroupKind::Table { table, generator_elements } => {
        let order = table.len();
        if order == 0 || table.iter().any(|row| row.len() != order || row.iter().any(|&x| x >= order)) {
          return Err(Error::InvalidParameter("multiplication table must be square with entries < order".into()));
        }
        if (0..order).any(|x| table[0][x] != x || table[x][0] != x) {
          return Err(Error::InvalidParameter("element 0 must be the identity of the table".into()));
        }
        if generator_elements.len() != self.generators.len() || generator_elements.iter().any(|&x| x >= order) {
          return Err(Error::InvalidParameter("one table element per generator required".into()));
        }
      }
      GroupKind::Commuting | GroupKind::Free => {}
    }
    Ok(())
  }
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn words() {
    let w: Word = vec![("a".into(), 2), ("b".into(), -1)];
    assert_eq!(inverse_word(&w), vec![("b".to_string(), 1), ("a".to_string(), -2)]);
    assert_eq!(concat(&w, &[]), w);
  }

  #[test]
  fn json_shape() {
    let g: GroupSpec = serde_json::from_str(r#"{"kind":"cyclic","n":2,"generators":["g"]}"#).unwrap();
    assert_eq!(g, GroupSpec::cyclic(2, "g"));
    let t: GroupSpec =
      serde_json::from_str(r#"{"kind":"table","table":[[0,1],[1,0]],"generator_elements":[1],"generators":["s"]}"#).unwrap();
    t.validate().unwrap();
  }

  #[test]
  fn invalid_specs() {
    assert!(GroupSpec { kind: GroupKind::Cyclic { n: 2 }, generators: vec![] }.validate().is_err());
    let bad_identity =
      GroupSpec { kind: GroupKind::Table { table: vec![vec![1, 0], vec![0, 1]], generator_elements: vec![1] }, generators: vec!["s".into()] };
    assert!(bad_identity.validate().is_err());
    assert!(GroupSpec::free(["a", "a"]).validate().is_err());
  }
}
