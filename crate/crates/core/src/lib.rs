//! Finite von Neumann algebras, Hilbert cochain complexes and their spectral
//! finite approximations.
//!
//! The crate is organized bottom-up:
//!
//! - [`vna`]: multi-matrix algebras with a normalized trace.
//! - [`module`]: finitely generated Hilbert modules, morphisms, von Neumann dimension.
//! - [`complex`]: cochain complexes, Laplacians, Betti numbers, spectral densities.
//! - [`truncation`]: spectral projections, truncated complexes, homotopy certificates.
//! - [`flatcw`]: CW complexes with flat bundles and their combinatorial cochain complexes.
//! - [`witten`]: Witten deformation by cell weights and spectral-gap scans.
//! - [`io`]: JSON document schemas.

pub mod complex;
pub mod corpus;
pub mod error;
pub mod flatcw;
pub mod io;
pub mod linalg;
pub mod module;
pub mod tolerances;
pub mod truncation;
pub mod vna;
pub mod witten;

pub use complex::{
  ns_exponent, verify_chain_map, verify_homotopy, Betti, ChainHomotopy, ChainMap, DensityFunction, HilbertComplex,
  PowerFit, SpectralData,
};
pub use error::{Error, ErrorClass, Result};
pub use module::{
  adjoint_morphism, check_finitely_generated, compose, farber_example, trace_endomorphism, FiberedModuleFamily,
  FiniteGeneration, HilbertModule, ModuleMorphism,
};
pub use tolerances::Tolerances;
pub use truncation::{
  green_operator, homotopy_certificate, spectral_projection, truncate, HomotopyCertificate, TruncatedComplex,
};
pub use vna::{AlgebraElement, FactorBlock, VnAlgebra};
