use hilbcx::corpus;
use hilbcx::flatcw::{assemble_cochain_complex, trivial_bundle, CellularComplex, GroupSpec};
use hilbcx::witten::*;
use hilbcx::HilbertModule;

fn morse_circle(z2: bool) -> CellularComplex {
  let bundle = if z2 {
    corpus::cyclic_bundle(2, GroupSpec::cyclic(2, "g"), &[("g", 1)]).unwrap()
  } else {
    trivial_bundle(GroupSpec::free(["g"]), HilbertModule::regular(corpus::scalar_algebra())).unwrap()
  };
  assemble_cochain_complex(&corpus::circle_two_vertex(), &bundle).unwrap()
}

#[test]
fn zero_deformation_is_bit_exact() {
  let cx = morse_circle(true);
  let d = deform(&cx, &corpus::circle_morse(), 0.0).unwrap();
  for (a, b) in cx.complex.differentials().iter().zip(d.complex.differentials()) {
    assert_eq!(a.blocks(), b.blocks());
  }
}

#[test]
fn entry_scaling() {
  let cx = morse_circle(false);
  let d = deform(&cx, &corpus::circle_morse(), 2.0).unwrap();
  // row e1, column a
  let before = cx.complex.differential(0).unwrap().blocks()[0][(0, 0)];
  let after = d.complex.differential(0).unwrap().blocks()[0][(0, 0)];
  assert!((after - before * (-2.0f64).exp()).norm() < 1e-16);
}

#[test]
fn morse_validation() {
  let cw = corpus::circle_two_vertex();
  let f = corpus::circle_morse();
  f.validate(&cw).unwrap();
  let mut missing = f.clone();
  missing.values.remove("e2");
  assert!(matches!(missing.validate(&cw), Err(hilbcx::Error::MissingCellValue(_))));
  let mut twice = f.clone();
  twice.matching.push(("a".into(), "e2".into()));
  assert!(matches!(twice.validate(&cw), Err(hilbcx::Error::InvalidMatching(_))));
  let mut not_face = f.clone();
  not_face.matching = vec![("a".into(), "b".into())];
  assert!(matches!(not_face.validate(&cw), Err(hilbcx::Error::InvalidMatching(_))));
  let mut off = f;
  off.values.insert("e1".into(), 0.9);
  assert!(matches!(off.validate(&cw), Err(hilbcx::Error::InvalidMatching(_))));
}

#[test]
fn morse_dims() {
  let cw = corpus::circle_two_vertex();
  let cx = morse_circle(true);
  assert_eq!(morse_complex_dims(&corpus::circle_morse(), &cw, &cx.fiber), vec![1.0, 1.0]);
  let all = MorseData::zero(&cw);
  assert_eq!(morse_complex_dims(&all, &cw, &cx.fiber), vec![2.0, 2.0]);
}

#[test]
fn betti_invariant_under_deformation() {
  let cx = morse_circle(true);
  let base = cx.complex.betti_numbers().unwrap();
  for t in [0.5, 1.0, 2.0, 3.0, 5.0] {
    let b = deform(&cx, &corpus::circle_morse(), t).unwrap().complex.betti_numbers().unwrap();
    for (x, y) in base.iter().zip(&b) {
      assert!((x - y).abs() <= 1e-8, "t = {t}: {base:?} vs {b:?}");
    }
  }
}

#[test]
fn gap_scan_on_the_morse_circle() {
  let cx = morse_circle(true);
  let f = corpus::circle_morse();
  let grid: Vec<f64> = (1..=10).map(f64::from).collect();
  let report = gap_scan(&cx, &f, &grid, 1.0).unwrap();
  assert_eq!(report.t0, Some(1.0));
  for r in &report.rows {
    assert_eq!(r.small_count, report.morse_dims[r.degree], "{r:?}");
  }
  for tr in &report.trends {
    assert!(tr.decreasing);
    assert!(tr.slope.unwrap() <= -0.4, "{tr:?}");
  }
  for r in report.rows_at(10.0) {
    assert!(r.ratio.unwrap() >= 1e3);
  }
  assert!(report.to_csv().starts_with("t,degree,small_count,max_small,min_large,ratio\n"));
}

#[test]
fn zero_function_gives_constant_spectrum() {
  let cx = morse_circle(true);
  let f = MorseData::zero(&corpus::circle_two_vertex());
  let report = gap_scan(&cx, &f, &[1.0, 2.0, 3.0], 1.0).unwrap();
  let first: Vec<_> = report.rows_at(1.0).map(|r| r.ratio).collect();
  let last: Vec<_> = report.rows_at(3.0).map(|r| r.ratio).collect();
  assert_eq!(first, last);
}

#[test]
fn scaled_deformation() {
  let cx = morse_circle(true);
  let f = corpus::circle_morse();
  assert!((scale_factor(std::f64::consts::PI).unwrap() - std::f64::consts::PI.exp()).abs() < 1e-12);
  assert!(matches!(scaled_deform(&cx, &f, 0.0), Err(hilbcx::Error::NonpositiveT(_))));
  let t = 1.5;
  let s = scale_factor(t).unwrap();
  let plain = deform(&cx, &f, t).unwrap().complex;
  let scaled = scaled_deform(&cx, &f, t).unwrap().complex;
  assert_eq!(plain.betti_numbers().unwrap(), scaled.betti_numbers().unwrap());
  let grid: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
  let dilated: Vec<f64> = grid.iter().map(|l| s * s * l).collect();
  let a = plain.spectral_density(0, &grid).unwrap();
  let b = scaled.spectral_density(0, &dilated).unwrap();
  assert_eq!(a.values, b.values);
}

#[test]
fn small_split_certificate() {
  let cx = morse_circle(true);
  let f = corpus::circle_morse();
  let split = small_split(&cx, &f, 6.0, 1.0).unwrap();
  assert!(split.residuals.iter().all(|&r| r <= 1e-8));
  assert!(split.certificate.max_residual() <= 1e-9);
  assert_eq!(split.small.dims, vec![1.0, 1.0]);
  for (a, b) in split.p_sm.maps.iter().zip(&split.p_la.maps) {
    let sum = a.add(b).unwrap();
    assert!(sum.sub(&hilbcx::ModuleMorphism::identity(a.source())).unwrap().max_entry() == 0.0);
  }
  let everything = small_split(&cx, &f, 1.0, 100.0).unwrap();
  assert!(everything.p_la.maps.iter().all(|m| m.max_entry() < 1e-15));
}
