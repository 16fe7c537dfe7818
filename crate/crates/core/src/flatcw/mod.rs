//! Flat Hilbert bundles over finite CW complexes.
//!
//! A CW complex is given once, with incidence data in the group ring of its
//! fundamental group; a bundle is a monodromy representation on a fiber
//! module. Together they assemble to the combinatorial cochain complex.

mod bundle;
mod compare;
mod cw;
mod group;
mod subdivide;

pub use bundle::{
  bundle_from_cocycle, make_bundle_from_monodromy, trivial_bundle, CechCocycle, FlatBundle, Transition, MAX_CONDITION,
  RELATION_TOL,
};
pub use compare::{compare_invariants, log_grid, ComparisonReport, DegreeComparison, BETTI_TOL, SLOPE_TOL};
pub use cw::{assemble_cochain_complex, assemble_with, CellularComplex, CwComplexData, Incidence, LiftedVertex, Term, Traversal};
pub use group::{concat, inverse_word, GroupKind, GroupSpec, Word};
pub use subdivide::{barycentric_subdivide, FineChain, Subdivision};
