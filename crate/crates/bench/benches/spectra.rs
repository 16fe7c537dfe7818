use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hilbcx::corpus::{self, RandomComplexSpec};
use hilbcx::flatcw::{assemble_cochain_complex, barycentric_subdivide, GroupSpec};
use hilbcx::witten::gap_scan;
use hilbcx::{homotopy_certificate, truncate};

fn assemble_and_spectrum(c: &mut Criterion) {
  let bundle = corpus::sampled_z_bundle(4096, GroupSpec::free(["g"]), &[("g", 1)]).unwrap();
  let cw = corpus::circle();
  c.bench_function("sampled Z circle, 4096 fibers: assemble + betti", |b| {
    b.iter(|| assemble_cochain_complex(black_box(&cw), &bundle).unwrap().complex.betti_numbers().unwrap())
  });

  let torus = barycentric_subdivide(&corpus::torus()).unwrap().fine;
  let z2 = corpus::cyclic_bundle(2, GroupSpec::commuting(["x", "y"]), &[("x", 1), ("y", 1)]).unwrap();
  c.bench_function("subdivided Z2 torus: assemble + betti", |b| {
    b.iter(|| assemble_cochain_complex(black_box(&torus), &z2).unwrap().complex.betti_numbers().unwrap())
  });
}

fn truncation(c: &mut Criterion) {
  let mut rng = ChaCha8Rng::seed_from_u64(1);
  let (cx, lambda) = loop {
    let cx = corpus::random_complex(&mut rng, RandomComplexSpec::default()).unwrap();
    if let Some(l) = corpus::pick_lambda(&mut rng, &cx, (0.05, 10.0), 1e-3).unwrap() {
      break (cx, l);
    }
  };
  c.bench_function("random complex: truncate", |b| b.iter(|| truncate(black_box(&cx), lambda, false).unwrap()));
  c.bench_function("random complex: homotopy certificate", |b| b.iter(|| homotopy_certificate(black_box(&cx), lambda).unwrap()));
}

fn witten(c: &mut Criterion) {
  let bundle = corpus::cyclic_bundle(2, GroupSpec::cyclic(2, "g"), &[("g", 1)]).unwrap();
  let cx = assemble_cochain_complex(&corpus::circle_two_vertex(), &bundle).unwrap();
  let f = corpus::circle_morse();
  let grid: Vec<f64> = (1..=10).map(f64::from).collect();
  c.bench_function("Morse circle: gap scan t = 1..10", |b| b.iter(|| gap_scan(black_box(&cx), &f, &grid, 1.0).unwrap()));
}

criterion_group!(benches, assemble_and_spectrum, truncation, witten);
criterion_main!(benches);
