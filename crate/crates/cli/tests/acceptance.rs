//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::Parser;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hilbcx::corpus::{self, RandomComplexSpec};
use hilbcx::flatcw::{assemble_cochain_complex, barycentric_subdivide, compare_invariants, CwComplexData, FlatBundle, GroupSpec};
use hilbcx::io::{load_input, load_json, BuildOptions, BundleDoc, InputDoc};
use hilbcx::witten::{deform, gap_scan};
use hilbcx::{
  check_finitely_generated, farber_example, homotopy_certificate, ns_exponent, truncate, verify_chain_map, HilbertComplex,
};

fn fixture(name: &str) -> PathBuf { Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name) }

struct Verdict {
  pass:   bool,
  detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict { Verdict { pass, detail: detail.into() } }

fn within(elapsed: Duration, limit: f64) -> bool { elapsed.as_secs_f64() < limit }

/// Kernel ranks of the n-fold cyclic cover of the one-cell circle, over C.
fn cover_betti(n: usize) -> [f64; 2] {
  let mut d0 = DMatrix::<f64>::zeros(n, n);
  for k in 0..n {
    d0[(k, k)] -= 1.0;
    d0[(k, (k + 1) % n)] += 1.0;
  }
  let sv = d0.svd(false, false).singular_values;
  let rank = sv.iter().filter(|&&s| s > 1e-9 * sv.max().max(1.0)).count();
  [(n - rank) as f64 / n as f64, (n - rank) as f64 / n as f64]
}

fn criterion_1() -> Verdict {
  let start = Instant::now();
  let mut worst: f64 = 0.0;
  for n in [2, 3, 5] {
    let bundle = corpus::cyclic_bundle(n, GroupSpec::cyclic(n, "g"), &[("g", 1)]).unwrap();
    let got = assemble_cochain_complex(&corpus::circle(), &bundle).unwrap().complex.betti_numbers().unwrap();
    let want = cover_betti(n);
    for p in 0..2 {
      worst = worst.max((got[p] - want[p]).abs()).max((want[p] - 1.0 / n as f64).abs());
    }
  }
  let el = start.elapsed();
  verdict(worst <= 1e-9 && within(el, 1.0), format!("max deviation {worst:.1e}, {:.3}s", el.as_secs_f64()))
}

/// The randomized corpus shared by criteria 2 and 3.
fn random_corpus(count: usize) -> Vec<(HilbertComplex, f64)> {
  let mut rng = ChaCha8Rng::seed_from_u64(2024);
  let mut out = Vec::with_capacity(count);
  while out.len() < count {
    let cx = corpus::random_complex(&mut rng, RandomComplexSpec::default()).unwrap();
    if let Some(lambda) = corpus::pick_lambda(&mut rng, &cx, (0.05, 10.0), 1e-3).unwrap() {
      out.push((cx, lambda));
    }
  }
  out
}

fn criterion_2(cases: &[(HilbertComplex, f64)], setup: Duration) -> Verdict {
  let start = Instant::now();
  let worst = cases.iter().map(|(cx, l)| homotopy_certificate(cx, *l).unwrap().max_residual()).fold(0.0, f64::max);
  let el = start.elapsed() + setup;
  verdict(worst <= 1e-9 && within(el, 30.0), format!("{} complexes, max residual {worst:.1e}, {:.2}s", cases.len(), el.as_secs_f64()))
}

fn criterion_3(cases: &[(HilbertComplex, f64)]) -> Verdict {
  let (mut chain, mut betti) = (0.0f64, 0.0f64);
  let mut failures = Vec::new();
  for (i, (cx, lambda)) in cases.iter().enumerate() {
    let t = truncate(cx, *lambda, false).unwrap();
    chain = chain.max(verify_chain_map(&t.spectral_projector, cx, cx).unwrap());
    if !t.norm_bound_holds() {
      failures.push(format!("case {i}: ‖d|L‖ {:?} exceeds √λ", t.induced_norms));
    }
    for p in 0..cx.len() {
      let f = cx.spectral_density(p, &[*lambda]).unwrap();
      if t.dims[p] != f.values[0] {
        failures.push(format!("case {i} degree {p}: dim {} vs F(λ) {}", t.dims[p], f.values[0]));
      }
      betti = betti.max((t.complex.betti(p).unwrap().value - cx.betti(p).unwrap().value).abs());
    }
  }
  let pass = chain <= 1e-8 && betti <= 1e-8 && failures.is_empty();
  let mut detail = format!("chain-map residual {chain:.1e}, betti change {betti:.1e}");
  if !failures.is_empty() {
    detail += &format!("; {}", failures.join("; "));
  }
  verdict(pass, detail)
}

fn criterion_4() -> Verdict {
  let mut worst: f64 = 0.0;
  let mut sups = Vec::new();
  for k in [1usize, 3, 10, 20] {
    let (_, family) = farber_example(k).unwrap();
    let expected = 2.0 - (k as f64 + 2.0) * 0.5f64.powi(k as i32);
    worst = worst.max((family.module.dim_tau() - expected).abs());
    let fg = check_finitely_generated(&family, k as f64);
    sups.push((k, fg.sup_value));
  }
  let exact = sups.iter().all(|&(k, s)| s == k as f64);
  verdict(worst <= 1e-12 && exact, format!("max dim deviation {worst:.1e}, sup values {sups:?}"))
}

fn load_system(name: &str, fibers: Option<usize>) -> (CwComplexData, FlatBundle) {
  let opts = BuildOptions { fibers, ..Default::default() };
  match load_input(&fixture(name)).unwrap() {
    InputDoc::System(doc) => {
      let bundle = doc.bundle(&opts).unwrap();
      (doc.cw, bundle)
    }
    _ => panic!("{name} is not a system document"),
  }
}

fn load_cw(name: &str, bundle: &str) -> (CwComplexData, FlatBundle) {
  let InputDoc::Cw(cw) = load_input(&fixture(name)).unwrap() else { panic!("{name} is not a CW document") };
  (cw, load_json::<BundleDoc>(&fixture(bundle)).unwrap().build(&BuildOptions::default()).unwrap())
}

fn criterion_5() -> Verdict {
  let start = Instant::now();
  let (cw, bundle) = load_system("sampled_z_circle.json", Some(4096));
  let cx = assemble_cochain_complex(&cw, &bundle).unwrap().complex;
  let grid = hilbcx::flatcw::log_grid(1e-4, 1e-2, 41).unwrap();
  let mut slopes = Vec::new();
  let mut oracle_gap: f64 = 0.0;
  for p in 0..2 {
    let betti = cx.betti(p).unwrap().value;
    let f = cx.spectral_density(p, &grid).unwrap();
    for (l, v) in grid.iter().zip(&f.values) {
      oracle_gap = oracle_gap.max((v - betti - corpus::z_circle_density(*l)).abs());
    }
    slopes.push(ns_exponent(&f, betti, (1e-4, 1e-2)).unwrap().slope);
  }
  let el = start.elapsed();
  // sampling 4096 fibers resolves the analytic density to about one fiber weight
  let pass = slopes.iter().all(|s| (s - 0.5).abs() <= 0.05) && oracle_gap <= 2.0 / 4096.0 && within(el, 10.0);
  verdict(pass, format!("slopes {slopes:.4?}, max |F - analytic| {oracle_gap:.1e}, {:.2}s", el.as_secs_f64()))
}

fn criterion_6() -> Verdict {
  let start = Instant::now();
  let cases = [
    ("circle/Z2", load_system("z2_circle.json", None), (1e-4, 1e-2)),
    ("circle/Z", load_system("sampled_z_circle.json", Some(4096)), (1e-4, 1e-2)),
    ("wedge/Z2", load_cw("wedge.json", "z2_wedge_bundle.json"), (1e-3, 1e-1)),
    ("wedge/Z", load_cw("wedge.json", "sampled_z_wedge_bundle.json"), (1e-3, 1e-1)),
    ("torus/Z2", load_cw("torus.json", "z2_torus_bundle.json"), (1e-3, 1e-1)),
    ("torus/Z", load_cw("torus.json", "sampled_z_torus_bundle.json"), (1e-3, 1e-1)),
  ];
  let mut pass = true;
  let mut notes = Vec::new();
  for (name, (cw, bundle), window) in &cases {
    let coarse = assemble_cochain_complex(cw, bundle).unwrap();
    let sub = barycentric_subdivide(cw).unwrap();
    let fine = assemble_cochain_complex(&sub.fine, bundle).unwrap();
    let r = compare_invariants(&coarse.complex, &fine.complex, *window, 30).unwrap();
    let db = r.degrees.iter().map(|d| d.betti_diff).fold(0.0, f64::max);
    let ds = r.degrees.iter().filter_map(|d| d.slope_diff).fold(0.0, f64::max);
    pass &= r.verdict && db <= 1e-8 && ds <= 0.05;
    notes.push(format!("{name} Δβ {db:.0e} Δslope {ds:.3}"));
  }
  let el = start.elapsed();
  verdict(pass && within(el, 60.0), format!("{}, {:.2}s", notes.join(", "), el.as_secs_f64()))
}

fn criterion_7() -> Verdict {
  let (cw, bundle) = load_system("morse_circle_z2.json", None);
  let InputDoc::System(doc) = load_input(&fixture("morse_circle_z2.json")).unwrap() else { unreachable!() };
  let f = doc.morse.expect("fixture carries Morse data");
  let cx = assemble_cochain_complex(&cw, &bundle).unwrap();
  let grid: Vec<f64> = (1..=10).map(f64::from).collect();
  let report = gap_scan(&cx, &f, &grid, 1.0).unwrap();
  let counts = report.rows.iter().all(|r| r.small_count == report.morse_dims[r.degree]);
  let trends = report.trends.iter().all(|t| t.decreasing && t.slope.is_some_and(|s| s <= -0.4));
  let ratio = report.rows_at(10.0).filter_map(|r| r.ratio).fold(f64::INFINITY, f64::min);
  let zero = deform(&cx, &f, 0.0).unwrap();
  let exact = cx.complex.differentials().iter().zip(zero.complex.differentials()).all(|(a, b)| a.blocks() == b.blocks());
  let slopes: Vec<_> = report.trends.iter().map(|t| t.slope).collect();
  verdict(
    counts && trends && ratio >= 1e3 && exact,
    format!("counts match {counts}, slopes {slopes:.3?}, ratio at t=10 {ratio:.1e}, t=0 bit-exact {exact}"),
  )
}

fn curated_corpus() -> Vec<(&'static str, HilbertComplex)> {
  let mut out = Vec::new();
  for (name, file) in [("Z2 circle", "z2_circle.json"), ("Z3 circle", "z3_circle.json"), ("Z5 circle", "z5_circle.json"), ("Morse circle", "morse_circle_z2.json")] {
    let (cw, b) = load_system(file, None);
    out.push((name, assemble_cochain_complex(&cw, &b).unwrap().complex));
  }
  for (name, cw, b) in [("Z2 wedge", "wedge.json", "z2_wedge_bundle.json"), ("Z2 torus", "torus.json", "z2_torus_bundle.json")] {
    let (cw, b) = load_cw(cw, b);
    let fine = barycentric_subdivide(&cw).unwrap().fine;
    out.push((name, assemble_cochain_complex(&cw, &b).unwrap().complex));
    out.push((if name == "Z2 wedge" { "subdivided Z2 wedge" } else { "subdivided Z2 torus" }, assemble_cochain_complex(&fine, &b).unwrap().complex));
  }
  out
}

fn criterion_8() -> Verdict {
  let mut rng = ChaCha8Rng::seed_from_u64(8);
  let mut worst = (0.0f64, "");
  let mut bad = 0;
  let mut trials = 0;
  for (name, cx) in curated_corpus() {
    let base = cx.betti_numbers().unwrap();
    for _ in 0..10 {
      let maps = corpus::random_automorphisms(&mut rng, &cx, 1e3);
      let b = cx.conjugate(&maps).unwrap().betti_numbers().unwrap();
      let dev = base.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
      trials += 1;
      if dev > 1e-7 {
        bad += 1;
      }
      if dev > worst.0 {
        worst = (dev, name);
      }
    }
  }
  verdict(bad == 0, format!("{bad}/{trials} conjugations moved a Betti number by > 1e-7; worst {:.3} on {}", worst.0, worst.1))
}

fn cli_reports(jobs: usize) -> Vec<String> {
  let f = |n: &str| fixture(n).display().to_string();
  let j = jobs.to_string();
  let commands: Vec<Vec<String>> = vec![
    vec!["validate".into(), f("torus.json"), "--bundle".into(), f("z2_torus_bundle.json")],
    vec!["dim".into(), f("z5_circle.json")],
    vec!["betti".into(), f("cocycle_circle.json")],
    vec!["spectrum".into(), f("wedge.json"), "--bundle".into(), f("sampled_z_wedge_bundle.json")],
    vec!["density".into(), f("sampled_z_circle.json"), "--fibers".into(), "1024".into()],
    vec!["density".into(), f("sampled_z_circle.json"), "--fibers".into(), "256".into(), "--format".into(), "csv".into()],
    vec!["truncate".into(), f("scalar_complex.json"), "--lambda".into(), "1".into()],
    vec!["truncate".into(), f("z3_circle.json"), "--lambda".into(), "1".into()],
    vec!["witten".into(), f("morse_circle_z2.json")],
    vec!["witten".into(), f("morse_circle_z2.json"), "--format".into(), "csv".into()],
    vec!["compare".into(), f("torus.json"), "--bundle".into(), f("sampled_z_torus_bundle.json"), "--lambda-grid".into(), "1e-3:1e-1:30".into()],
    vec!["compare".into(), f("z2_circle.json")],
    vec!["farber".into(), "10".into()],
    vec!["betti".into(), f("bad_d2.json")],
  ];
  commands
    .into_iter()
    .map(|args| {
      let argv = std::iter::once("hilbcx".to_string()).chain(args).chain(["--jobs".to_string(), j.clone()]);
      let out = hilbcx_cli::run(&hilbcx_cli::Cli::parse_from(argv));
      format!("{}\n{}", out.code, out.stdout)
    })
    .collect()
}

fn criterion_9() -> Verdict {
  let (one, eight) = (cli_reports(1), cli_reports(8));
  let differing: Vec<usize> = (0..one.len()).filter(|&i| one[i] != eight[i]).collect();
  // the installed binary must agree with the library entry point
  let bin = std::process::Command::new(env!("CARGO_BIN_EXE_hilbcx"))
    .args(["farber", "10", "--jobs", "8"])
    .output()
    .expect("binary runs");
  let bin_same = format!("{}\n{}", bin.status.code().unwrap_or(-1), String::from_utf8_lossy(&bin.stdout)) == one[12];
  verdict(
    differing.is_empty() && bin_same,
    format!("{} reports, differing {differing:?}, binary matches library {bin_same}", one.len()),
  )
}

#[test]
fn acceptance_suite() {
  let suite = Instant::now();
  let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
  let mut record = |n: usize, name: &'static str, v: Verdict| {
    println!("criterion {n:>2} {:<4} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    results.push((n, name, v));
  };
  record(1, "covering Betti numbers", criterion_1());
  let setup = Instant::now();
  let cases = random_corpus(50);
  let setup = setup.elapsed();
  record(2, "homotopy certificate", criterion_2(&cases, setup));
  record(3, "truncation contracts", criterion_3(&cases));
  record(4, "Farber example", criterion_4());
  record(5, "near-zero density slope", criterion_5());
  record(6, "subdivision invariance", criterion_6());
  record(7, "Witten deformation", criterion_7());
  record(8, "isomorphism invariance", criterion_8());
  record(9, "determinism across job counts", criterion_9());
  let el = suite.elapsed();
  record(10, "suite runtime", verdict(within(el, 120.0), format!("{:.2}s", el.as_secs_f64())));
  let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
  assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
