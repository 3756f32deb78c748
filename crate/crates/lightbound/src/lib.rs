//! Verification toolkit for the boundary phase-space structure of coframe
//! gravity on null (lightlike) hypersurfaces.
//!
//! The crate is organised in layers:
//!
//! * [`forms`] — graded algebra of differential forms with values in wedge
//!   powers of a Minkowski fiber (wedge product, fiber bracket, coframe
//!   contraction, interior product),
//! * [`linalg`] — exact-rational and floating-point linear-map analysis
//!   (kernels, images, intersections, complements, restricted inverses),
//! * [`coframe`] — boundary coframe data, the wedge/bracket operator family
//!   and the kernel-intersection subspaces that control the degenerate
//!   (lightlike) theory,
//! * [`fixer`] — the unique decomposition that fixes a connection
//!   representative on a null boundary,
//! * [`lattice`] — a periodic discretised boundary carrying the constraint
//!   functionals, their Hamiltonian flows, Poisson brackets and the
//!   first/second-class classification,
//! * [`linearized`] — the same analysis for the theory linearised around an
//!   on-shell background,
//! * [`suites`] / [`report`] — reproducible verification suites with
//!   machine-readable reports, shared by the CLI and the acceptance tests.

pub mod coframe;
pub mod fixer;
pub mod forms;
pub mod lattice;
pub mod linalg;
pub mod linearized;
pub mod report;
pub mod scalar;
pub mod suites;

pub use forms::{FormDegree, FormField};
pub use scalar::Scalar;
