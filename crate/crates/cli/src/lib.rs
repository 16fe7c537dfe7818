//! Batch front end: reads JSON documents, runs one analysis and writes a
//! versioned JSON or CSV report.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a numerical
//! precondition (spectral gap, boundary tie, certificate) does not hold.
//! Failures print a single JSON error object and nothing else.

pub mod args;

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use hilbcx::flatcw::{
  assemble_with, barycentric_subdivide, compare_invariants, CellularComplex, CwComplexData, FlatBundle,
};
use hilbcx::io::{load_input, load_json, BuildOptions, BundleDoc, InputDoc, SCHEMA_VERSION};
use hilbcx::witten::{gap_scan, MorseData};
use hilbcx::{check_finitely_generated, farber_example, homotopy_certificate, truncate, Error, ErrorClass, HilbertComplex, Result};

pub use args::{Cli, Command, Common, Format, GridSpec, Input};

/// Process exit status and what goes to stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
  pub code:   i32,
  pub stdout: String,
}

pub fn exit_code(e: &Error) -> i32 {
  match e.class() {
    ErrorClass::Validation => 2,
    ErrorClass::Numerical => 3,
  }
}

pub fn error_object(e: &Error) -> Value {
  let class = match e.class() {
    ErrorClass::Validation => "validation",
    ErrorClass::Numerical => "numerical",
  };
  json!({ "schema_version": SCHEMA_VERSION, "error": { "code": e.code(), "class": class, "message": e.to_string() } })
}

/// Runs a parsed command line, honoring `--jobs` and `--out`.
pub fn run(cli: &Cli) -> Outcome {
  let common = common_of(&cli.command);
  let result = match common.jobs {
    Some(0) => Err(Error::InvalidParameter("--jobs must be at least 1".into())),
    Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
      Ok(pool) => pool.install(|| execute(&cli.command)),
      Err(e) => Err(Error::InvalidParameter(format!("thread pool: {e}"))),
    },
    None => execute(&cli.command),
  };
  let result = result.and_then(|report| match &common.out {
    Some(path) => fs::write(path, &report)
      .map(|_| String::new())
      .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))),
    None => Ok(report),
  });
  match result {
    Ok(stdout) => Outcome { code: 0, stdout },
    Err(e) => Outcome { code: exit_code(&e), stdout: format!("{}\n", error_object(&e)) },
  }
}

fn common_of(cmd: &Command) -> &Common {
  match cmd {
    Command::Validate(i) | Command::Dim(i) | Command::Betti(i) => &i.common,
    Command::Spectrum { input, .. }
    | Command::Density { input, .. }
    | Command::Truncate { input, .. }
    | Command::Witten { input, .. }
    | Command::Compare { input, .. } => &input.common,
    Command::Farber { common, .. } => common,
  }
}

fn usage(msg: String) -> Error { Error::InvalidParameter(msg) }

fn options(common: &Common) -> Result<BuildOptions> {
  Ok(BuildOptions { fibers: common.fibers, tolerances: common.tolerances().map_err(usage)? })
}

/// A loaded input: a bare complex, or a CW complex with its bundle.
enum Loaded {
  Complex(HilbertComplex),
  Cellular { cw: CwComplexData, bundle: FlatBundle, cellular: CellularComplex, morse: Option<MorseData> },
}

impl Loaded {
  fn complex(&self) -> &HilbertComplex {
    match self {
      Loaded::Complex(c) => c,
      Loaded::Cellular { cellular, .. } => &cellular.complex,
    }
  }

  fn kind(&self) -> &'static str {
    match self {
      Loaded::Complex(_) => "complex",
      Loaded::Cellular { .. } => "cellular",
    }
  }
}

fn load(input: &Input) -> Result<Loaded> {
  let opts = options(&input.common)?;
  let (cw, bundle, morse) = match load_input(&input.path)? {
    InputDoc::Complex(doc) => {
      if input.bundle.is_some() {
        return Err(usage("--bundle applies to CW inputs only".into()));
      }
      return Ok(Loaded::Complex(doc.build(&opts)?));
    }
    InputDoc::System(doc) => {
      let bundle = match &input.bundle {
        Some(p) => load_json::<BundleDoc>(p)?.build(&opts)?,
        None => doc.bundle(&opts)?,
      };
      (doc.cw, bundle, doc.morse)
    }
    InputDoc::Cw(cw) => {
      let path = input.bundle.as_ref().ok_or_else(|| usage("a CW input needs --bundle".into()))?;
      (cw, load_json::<BundleDoc>(path)?.build(&opts)?, None)
    }
  };
  let cellular = assemble_with(&cw, &bundle, opts.tolerances)?;
  Ok(Loaded::Cellular { cw, bundle, cellular, morse })
}

fn report(command: &str, body: Value) -> String {
  let mut obj = json!({ "schema_version": SCHEMA_VERSION, "command": command });
  if let (Value::Object(o), Value::Object(b)) = (&mut obj, body) {
    o.extend(b);
  }
  format!("{}\n", serde_json::to_string_pretty(&obj).expect("reports serialize"))
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
  let mut s = format!("{header}\n");
  for r in rows {
    s.push_str(&r);
    s.push('\n');
  }
  s
}

fn degrees(cx: &HilbertComplex, degree: Option<usize>) -> Result<Vec<usize>> {
  match degree {
    Some(p) if p < cx.len() => Ok(vec![p]),
    Some(p) => Err(usage(format!("degree {p} out of range 0..{}", cx.len()))),
    None => Ok((0..cx.len()).collect()),
  }
}

fn execute(cmd: &Command) -> Result<String> {
  match cmd {
    Command::Validate(input) => validate(input),
    Command::Dim(input) => {
      let loaded = load(input)?;
      let cx = loaded.complex();
      let dims: Vec<f64> = cx.modules().iter().map(|m| m.dim_tau()).collect();
      Ok(match input.common.format {
        Format::Json => report("dim", json!({ "dims": dims, "euler_characteristic": cx.euler_characteristic() })),
        Format::Csv => csv("degree,dim_tau", dims.iter().enumerate().map(|(p, d)| format!("{p},{d}"))),
      })
    }
    Command::Betti(input) => {
      let loaded = load(input)?;
      let cx = loaded.complex();
      let betti = (0..cx.len()).map(|p| cx.betti(p)).collect::<Result<Vec<_>>>()?;
      Ok(match input.common.format {
        Format::Json => {
          let values: Vec<f64> = betti.iter().map(|b| b.value).collect();
          report("betti", json!({ "betti": values, "details": betti }))
        }
        Format::Csv => csv(
          "degree,betti,eps_null,ambiguous",
          betti.iter().enumerate().map(|(p, b)| format!("{p},{},{:e},{}", b.value, b.eps_null, b.ambiguous.is_some())),
        ),
      })
    }
    Command::Spectrum { input, degree } => {
      let loaded = load(input)?;
      let cx = loaded.complex();
      let ps = degrees(cx, *degree)?;
      let spectra = ps.iter().map(|&p| cx.spectrum(p)).collect::<Result<Vec<_>>>()?;
      Ok(match input.common.format {
        Format::Json => {
          let labels: Vec<&str> = cx.algebra().blocks().iter().map(|b| b.label.as_str()).collect();
          let body: Vec<Value> = spectra
            .iter()
            .map(|s| {
              let blocks: Vec<Value> = s
                .blocks
                .iter()
                .zip(&labels)
                .map(|(b, l)| json!({ "label": l, "values": b.values, "nu_weight": b.nu_weight }))
                .collect();
              json!({ "degree": s.degree, "blocks": blocks })
            })
            .collect();
          report("spectrum", json!({ "spectra": body }))
        }
        Format::Csv if ps.len() == 1 => spectra[0].to_csv(),
        Format::Csv => {
          let rows = spectra.iter().flat_map(|s| s.to_csv().lines().skip(1).map(|l| format!("{},{l}", s.degree)).collect::<Vec<_>>());
          csv("degree,block,eigenvalue,nu_weight", rows)
        }
      })
    }
    Command::Density { input, degree } => {
      let loaded = load(input)?;
      let cx = loaded.complex();
      let spec = input.common.lambda_grid.unwrap_or(GridSpec { lo: 1e-4, hi: 10.0, steps: 51 });
      let grid = grid_log(&spec)?;
      let ps = degrees(cx, *degree)?;
      let dens = ps.iter().map(|&p| cx.spectral_density(p, &grid)).collect::<Result<Vec<_>>>()?;
      Ok(match input.common.format {
        Format::Json => {
          let body: Vec<Value> = ps.iter().zip(&dens).map(|(p, d)| json!({ "degree": p, "density": d })).collect();
          report("density", json!({ "densities": body }))
        }
        Format::Csv if ps.len() == 1 => dens[0].to_csv(),
        Format::Csv => {
          let rows = ps.iter().zip(&dens).flat_map(|(p, d)| d.to_csv().lines().skip(1).map(|l| format!("{p},{l}")).collect::<Vec<_>>());
          csv("degree,lambda,F", rows)
        }
      })
    }
    Command::Truncate { input, lambda, allow_tie } => {
      let loaded = load(input)?;
      let cx = loaded.complex();
      let t = truncate(cx, *lambda, *allow_tie)?;
      let cert = homotopy_certificate(cx, *lambda)?;
      let summary = cert.summary();
      Ok(match input.common.format {
        Format::Json => report(
          "truncate",
          json!({
            "lambda": summary.lambda,
            "residuals": summary.residuals,
            "dims": summary.dims,
            "gap": summary.gap,
            "tolerance": cert.tolerance,
            "chain_map_residual": t.chain_map_residual,
            "induced_norms": t.induced_norms,
            "norm_bound_holds": t.norm_bound_holds(),
            "ties": t.ties,
          }),
        ),
        Format::Csv => csv(
          "degree,residual,dim",
          summary.residuals.iter().zip(&summary.dims).enumerate().map(|(p, (r, d))| format!("{p},{r:e},{d}")),
        ),
      })
    }
    Command::Witten { input, morse, split } => {
      let loaded = load(input)?;
      let Loaded::Cellular { cw, cellular, morse: inline, .. } = &loaded else {
        return Err(usage("witten needs a CW input".into()));
      };
      let f = match (morse, inline) {
        (Some(p), _) => load_json::<MorseData>(p)?,
        (None, Some(m)) => m.clone(),
        (None, None) => return Err(usage("witten needs Morse data (--morse or a `morse` field)".into())),
      };
      f.validate(cw)?;
      let spec = input.common.t_grid.unwrap_or(GridSpec { lo: 1.0, hi: 10.0, steps: 10 });
      let scan = gap_scan(cellular, &f, &spec.linear(), *split)?;
      Ok(match input.common.format {
        Format::Json => report("witten", serde_json::to_value(&scan).expect("report serializes")),
        Format::Csv => scan.to_csv(),
      })
    }
    Command::Compare { input, against } => compare(input, against.as_deref()),
    Command::Farber { k, common } => {
      let (_, family) = farber_example(*k)?;
      let dim = family.module.dim_tau();
      let fg = check_finitely_generated(&family, *k as f64);
      let expected = 2.0 - (*k as f64 + 2.0) * 0.5f64.powi(*k as i32);
      Ok(match common.format {
        Format::Json => report(
          "farber",
          json!({ "k": k, "dim_tau": dim, "expected_dim_tau": expected, "sup_value": fg.sup_value, "fiber_dims": family.fiber_dims() }),
        ),
        Format::Csv => csv("k,dim_tau,sup_value", [format!("{k},{dim},{}", fg.sup_value)]),
      })
    }
  }
}

fn grid_log(spec: &GridSpec) -> Result<Vec<f64>> { spec.log().map_err(usage) }

fn validate(input: &Input) -> Result<String> {
  let loaded = load(input)?;
  let cx = loaded.complex();
  let mut body = json!({
    "valid": true,
    "kind": loaded.kind(),
    "d2_residuals": cx.d2_residuals()?,
    "eps_d2": cx.eps_d2()?,
  });
  if let Loaded::Cellular { cw, bundle, morse, .. } = &loaded {
    let residuals: serde_json::Map<String, Value> =
      bundle.relation_residuals().iter().map(|(r, v)| (r.clone(), json!(v))).collect();
    body["relation_residuals"] = Value::Object(residuals);
    body["condition_numbers"] = json!(bundle.condition_numbers());
    body["cells"] = json!(cw.cells.iter().map(Vec::len).collect::<Vec<_>>());
    if let Some(m) = morse {
      m.validate(cw)?;
      body["morse"] = json!("valid");
    }
  }
  Ok(match input.common.format {
    Format::Json => report("validate", body),
    Format::Csv => csv(
      "degree,d2_residual",
      cx.d2_residuals()?.iter().enumerate().map(|(p, r)| format!("{p},{r:e}")),
    ),
  })
}

fn compare(input: &Input, against: Option<&Path>) -> Result<String> {
  let loaded = load(input)?;
  let other = match against {
    Some(path) => {
      let second = Input { path: path.to_path_buf(), bundle: input.bundle.clone(), common: input.common.clone() };
      load(&second)?.complex().clone()
    }
    None => {
      let Loaded::Cellular { cw, bundle, .. } = &loaded else {
        return Err(usage("subdivision comparison needs a CW input".into()));
      };
      let sub = barycentric_subdivide(cw)?;
      assemble_with(&sub.fine, bundle, *loaded.complex().tolerances())?.complex
    }
  };
  let spec = input.common.lambda_grid.unwrap_or(GridSpec { lo: 1e-4, hi: 1e-2, steps: 30 });
  let r = compare_invariants(loaded.complex(), &other, (spec.lo, spec.hi), spec.steps)?;
  Ok(match input.common.format {
    Format::Json => report("compare", serde_json::to_value(&r).expect("report serializes")),
    Format::Csv => {
      let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
      csv(
        "degree,betti_a,betti_b,betti_diff,slope_a,slope_b,slope_diff",
        r.degrees.iter().map(|d| {
          let [sa, sb] = d.slopes.map_or([None, None], |[a, b]| [Some(a), Some(b)]);
          format!("{},{},{},{},{},{},{}", d.degree, d.betti[0], d.betti[1], d.betti_diff, opt(sa), opt(sb), opt(d.slope_diff))
        }),
      )
    }
  })
}
