use std::collections::BTreeMap;
use std::sync::Arc;

use hilbcx::corpus;
use hilbcx::flatcw::*;
use hilbcx::linalg::{c, CMat};
use hilbcx::vna::cyclic_group_algebra;
use hilbcx::{verify_chain_map, HilbertModule, ModuleMorphism};
use nalgebra::DMatrix;

/// Rank of a real matrix by singular values above `1e-9 · max(1, σ_max)`.
fn rank(m: &DMatrix<f64>) -> usize {
  if m.is_empty() {
    return 0;
  }
  let sv = m.clone().svd(false, false).singular_values;
  let top = sv.iter().copied().fold(1.0, f64::max);
  sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

/// Betti numbers of the n-fold cyclic cover of the one-edge circle over C,
/// divided by n. The cover has vertices v_k and edges e_k from v_k to v_{k+1}.
fn cover_oracle(n: usize) -> (f64, f64) {
  let mut d0 = DMatrix::<f64>::zeros(n, n);
  for k in 0..n {
    d0[(k, k)] -= 1.0;
    d0[(k, (k + 1) % n)] += 1.0;
  }
  let r = rank(&d0);
  ((n - r) as f64 / n as f64, (n - r) as f64 / n as f64)
}

#[test]
fn cyclic_circles_match_cover_oracle() {
  for n in [2, 3, 5] {
    let bundle = corpus::cyclic_bundle(n, GroupSpec::cyclic(n, "g"), &[("g", 1)]).unwrap();
    let cx = assemble_cochain_complex(&corpus::circle(), &bundle).unwrap();
    let b = cx.complex.betti_numbers().unwrap();
    let (o0, o1) = cover_oracle(n);
    assert!((b[0] - o0).abs() <= 1e-9 && (b[1] - o1).abs() <= 1e-9, "n = {n}: {b:?}");
    assert!((o0 - 1.0 / n as f64).abs() < 1e-15);
  }
}

#[test]
fn z2_circle_coboundary_blocks() {
  let bundle = corpus::cyclic_bundle(2, GroupSpec::cyclic(2, "g"), &[("g", 1)]).unwrap();
  let cx = assemble_cochain_complex(&corpus::circle(), &bundle).unwrap();
  let d0 = cx.complex.differential(0).unwrap();
  assert_eq!(d0.blocks()[0][(0, 0)], c(0.0, 0.0));
  assert!((d0.blocks()[1][(0, 0)] - c(-2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn trivial_circle_has_ordinary_betti_numbers() {
  let bundle = trivial_bundle(GroupSpec::free(["g"]), HilbertModule::regular(corpus::scalar_algebra())).unwrap();
  let cx = assemble_cochain_complex(&corpus::circle(), &bundle).unwrap();
  assert_eq!(cx.complex.differential(0).unwrap().max_entry(), 0.0);
  assert_eq!(cx.complex.betti_numbers().unwrap(), vec![1.0, 1.0]);
}

#[test]
fn torus_and_wedge_betti_numbers() {
  let scalar = HilbertModule::regular(corpus::scalar_algebra());
  let torus = assemble_cochain_complex(&corpus::torus(), &trivial_bundle(GroupSpec::commuting(["x", "y"]), scalar.clone()).unwrap()).unwrap();
  assert_eq!(torus.complex.betti_numbers().unwrap(), vec![1.0, 2.0, 1.0]);
  let wedge =
    assemble_cochain_complex(&corpus::wedge_of_circles(), &trivial_bundle(GroupSpec::free(["x", "y"]), scalar).unwrap()).unwrap();
  assert_eq!(wedge.complex.betti_numbers().unwrap(), vec![1.0, 2.0]);

  // Z2 on both torus generators: the 4-fold cover is again a torus
  let z2 = corpus::cyclic_bundle(2, GroupSpec::commuting(["x", "y"]), &[("x", 1), ("y", 1)]).unwrap();
  let b = assemble_cochain_complex(&corpus::torus(), &z2).unwrap().complex.betti_numbers().unwrap();
  for (got, want) in b.iter().zip([0.5, 1.0, 0.5]) {
    assert!((got - want).abs() < 1e-9, "{b:?}");
  }
}

#[test]
fn cyclic_relation_is_checked() {
  let alg = Arc::new(cyclic_group_algebra(3).unwrap());
  let fiber = HilbertModule::regular(alg);
  let bad = ModuleMorphism::diagonal_scalars(&fiber, &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
  let err = make_bundle_from_monodromy(GroupSpec::cyclic(3, "g"), fiber.clone(), BTreeMap::from([("g".into(), bad)]));
  assert!(matches!(err, Err(hilbcx::Error::RelationViolated { .. })), "{err:?}");

  let singular = ModuleMorphism::diagonal_scalars(&fiber, &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
  let err = make_bundle_from_monodromy(GroupSpec::free(["g"]), fiber, BTreeMap::from([("g".into(), singular)]));
  assert!(matches!(err, Err(hilbcx::Error::NotInvertible(_))), "{err:?}");
}

#[test]
fn commuting_relation_is_checked() {
  let alg = corpus::scalar_algebra();
  let fiber = HilbertModule::free(alg, 2);
  let a = ModuleMorphism::new(fiber.clone(), fiber.clone(), vec![CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])]).unwrap();
  let b = ModuleMorphism::new(fiber.clone(), fiber.clone(), vec![CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)])]).unwrap();
  let images = BTreeMap::from([("x".to_string(), a.clone()), ("y".to_string(), b)]);
  assert!(matches!(
    make_bundle_from_monodromy(GroupSpec::commuting(["x", "y"]), fiber.clone(), images.clone()),
    Err(hilbcx::Error::RelationViolated { .. })
  ));
  assert!(make_bundle_from_monodromy(GroupSpec::free(["x", "y"]), fiber, images).is_ok());
}

#[test]
fn unknown_generator_in_incidence() {
  let bundle = trivial_bundle(GroupSpec::free(["h"]), HilbertModule::regular(corpus::scalar_algebra())).unwrap();
  assert!(matches!(assemble_cochain_complex(&corpus::circle(), &bundle), Err(hilbcx::Error::UnknownGroupElement(_))));
}

#[test]
fn contravariant_word_evaluation() {
  let alg = corpus::scalar_algebra();
  let fiber = HilbertModule::free(alg, 2);
  let m = |v: [f64; 4]| ModuleMorphism::new(fiber.clone(), fiber.clone(), vec![CMat::from_row_slice(2, 2, &v.map(|x| c(x, 0.0)))]).unwrap();
  let (a, b) = (m([1.0, 1.0, 0.0, 1.0]), m([2.0, 0.0, 1.0, 1.0]));
  let bundle = make_bundle_from_monodromy(GroupSpec::free(["x", "y"]), fiber, BTreeMap::from([("x".into(), a.clone()), ("y".into(), b.clone())])).unwrap();
  let w = bundle.evaluate(&[("x".into(), 1), ("y".into(), 1)]).unwrap();
  let want = b.after(&a).unwrap();
  assert!(w.sub(&want).unwrap().max_entry() < 1e-15);
  let inv = bundle.evaluate(&[("y".into(), -1), ("x".into(), -1)]).unwrap();
  assert!(inv.after(&w).unwrap().sub(&ModuleMorphism::identity(w.source())).unwrap().max_entry() < 1e-12);
}

fn two_patch(r: ModuleMorphism, triple_bad: bool) -> (CechCocycle, CwComplexData) {
  let fiber = r.source().clone();
  let id = ModuleMorphism::identity(&fiber);
  let nerve = CwComplexData {
    cells:     vec![vec!["U".into(), "V".into()], vec!["c1".into(), "c2".into()]],
    incidence: vec![
      Incidence { from: "c1".into(), to: "U".into(), terms: vec![Term::new(-1, vec![])] },
      Incidence { from: "c1".into(), to: "V".into(), terms: vec![Term::new(1, vec![])] },
      Incidence { from: "c2".into(), to: "V".into(), terms: vec![Term::new(-1, vec![])] },
      Incidence { from: "c2".into(), to: "U".into(), terms: vec![Term::new(1, vec![])] },
    ],
  };
  let mut transitions = vec![
    Transition { edge: Some("c1".into()), first: "V".into(), second: "U".into(), map: r },
    Transition { edge: Some("c2".into()), first: "U".into(), second: "V".into(), map: id.clone() },
    Transition { edge: Some("uu".into()), first: "U".into(), second: "U".into(), map: id.clone() },
  ];
  let mut triples = Vec::new();
  if triple_bad {
    transitions.push(Transition { edge: Some("vu".into()), first: "V".into(), second: "U".into(), map: id.scale(3.0) });
    triples.push(["c1".to_string(), "uu".to_string(), "vu".to_string()]);
  }
  (CechCocycle { patches: vec!["U".into(), "V".into()], fiber, transitions, triples }, nerve)
}

#[test]
fn cocycle_loop_monodromy() {
  let fiber = HilbertModule::regular(Arc::new(cyclic_group_algebra(3).unwrap()));
  let w = std::f64::consts::TAU / 3.0;
  let r = ModuleMorphism::diagonal_scalars(&fiber, &[c(1.0, 0.0), c(w.cos(), w.sin()), c((2.0 * w).cos(), (2.0 * w).sin())]).unwrap();
  let (cocycle, nerve) = two_patch(r.clone(), false);
  let bundle = bundle_from_cocycle(&cocycle, &nerve).unwrap();
  assert_eq!(bundle.group().generators, vec!["c2".to_string()]);
  assert!(bundle.monodromy()["c2"].sub(&r).unwrap().max_entry() < 1e-14);

  let (bad, nerve) = two_patch(r, true);
  assert!(matches!(bundle_from_cocycle(&bad, &nerve), Err(hilbcx::Error::CocycleViolated { .. })));
}

#[test]
fn identity_cocycle_on_a_tree_is_trivial() {
  let fiber = HilbertModule::regular(corpus::scalar_algebra());
  let id = ModuleMorphism::identity(&fiber);
  let nerve = CwComplexData {
    cells:     vec![vec!["U".into(), "V".into()], vec!["c".into()]],
    incidence: vec![
      Incidence { from: "c".into(), to: "U".into(), terms: vec![Term::new(-1, vec![])] },
      Incidence { from: "c".into(), to: "V".into(), terms: vec![Term::new(1, vec![])] },
    ],
  };
  let cocycle = CechCocycle {
    patches: vec!["U".into(), "V".into()],
    fiber,
    transitions: vec![Transition { edge: Some("c".into()), first: "U".into(), second: "V".into(), map: id }],
    triples: vec![],
  };
  let bundle = bundle_from_cocycle(&cocycle, &nerve).unwrap();
  assert!(bundle.group().generators.is_empty());
}

#[test]
fn subdivision_cell_counts() {
  let once = barycentric_subdivide(&corpus::circle()).unwrap();
  assert_eq!((once.fine.cells[0].len(), once.fine.cells[1].len()), (2, 2));
  let twice = barycentric_subdivide(&once.fine).unwrap();
  assert_eq!((twice.fine.cells[0].len(), twice.fine.cells[1].len()), (4, 4));
  let torus = barycentric_subdivide(&corpus::torus()).unwrap();
  // V = 1 + 2 + 1, E = 4 + 8, F = 8
  assert_eq!(torus.fine.cells.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 12, 8]);

  let three = CwComplexData { cells: vec![vec!["v".into()], vec![], vec![], vec!["c".into()]], incidence: vec![] };
  assert!(matches!(barycentric_subdivide(&three), Err(hilbcx::Error::UnsupportedDimension(3))));
}

#[test]
fn comparison_map_is_a_chain_map_and_preserves_betti() {
  let cases: Vec<(CwComplexData, FlatBundle)> = vec![
    (corpus::circle(), corpus::cyclic_bundle(2, GroupSpec::cyclic(2, "g"), &[("g", 1)]).unwrap()),
    (corpus::circle(), corpus::sampled_z_bundle(64, GroupSpec::free(["g"]), &[("g", 1)]).unwrap()),
    (corpus::wedge_of_circles(), corpus::cyclic_bundle(2, GroupSpec::free(["x", "y"]), &[("x", 1), ("y", 0)]).unwrap()),
    (corpus::torus(), corpus::cyclic_bundle(2, GroupSpec::commuting(["x", "y"]), &[("x", 1), ("y", 1)]).unwrap()),
    (corpus::torus(), corpus::sampled_z_bundle(16, GroupSpec::commuting(["x", "y"]), &[("x", 1), ("y", 0)]).unwrap()),
  ];
  for (cw, bundle) in cases {
    let sub = barycentric_subdivide(&cw).unwrap();
    let coarse = assemble_cochain_complex(&cw, &bundle).unwrap();
    let fine = assemble_cochain_complex(&sub.fine, &bundle).unwrap();
    let s = sub.comparison_map(&coarse, &fine, &bundle).unwrap();
    let r = verify_chain_map(&s, &fine.complex, &coarse.complex).unwrap();
    assert!(r <= 1e-10, "residual {r}");
    let (a, b) = (coarse.complex.betti_numbers().unwrap(), fine.complex.betti_numbers().unwrap());
    for (x, y) in a.iter().zip(&b) {
      assert!((x - y).abs() <= 1e-8, "{a:?} vs {b:?}");
    }
  }
}

#[test]
fn relift_conjugates_the_coboundary() {
  let bundle = corpus::cyclic_bundle(5, GroupSpec::commuting(["x", "y"]), &[("x", 1), ("y", 2)]).unwrap();
  let base = assemble_cochain_complex(&corpus::torus(), &bundle).unwrap().complex.betti_numbers().unwrap();
  for (cell, h) in [("v", vec![("x".to_string(), 1)]), ("a", vec![("y".to_string(), -2)]), ("f", vec![("x".to_string(), 1), ("y".to_string(), 1)])] {
    let moved = corpus::torus().relift(cell, &h).unwrap();
    let b = assemble_cochain_complex(&moved, &bundle).unwrap().complex.betti_numbers().unwrap();
    for (x, y) in base.iter().zip(&b) {
      assert!((x - y).abs() <= 1e-8);
    }
  }
}

#[test]
fn compare_with_itself_is_clean() {
  let bundle = corpus::sampled_z_bundle(256, GroupSpec::free(["g"]), &[("g", 1)]).unwrap();
  let cx = assemble_cochain_complex(&corpus::circle(), &bundle).unwrap();
  let report = compare_invariants(&cx.complex, &cx.complex, (1e-3, 1e-1), 12).unwrap();
  assert!(report.verdict);
  for d in &report.degrees {
    assert_eq!(d.betti_diff, 0.0);
    assert_eq!(d.slope_diff, Some(0.0));
  }
}
