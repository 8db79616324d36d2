//! Numerical laboratory for quasi-Poisson actions built from Drinfeld-double
//! quasi-triples, and for the Poisson structure they induce on the BTZ domain
//! of SL(2, R).
//!
//! Module map:
//! - [`lie`]: matrix groups and algebras, invariant forms, involutions.
//! - [`double`]: the double `G × G`, its split pairing and the quasi-triple data.
//! - [`quasi_poisson`]: the bivectors on the double and on `S ≅ G`, Schouten
//!   brackets, the twisted conjugation action and its checks.
//! - [`btz`]: the SL(2, R) chart, coordinate bivector, calibration and leaves.
//! - [`verify`]: seeded verification suites producing serializable reports.

pub mod btz;
pub mod config;
pub mod double;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod quasi_poisson;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use lie::{AlgebraVector, Covector, GroupElement, GroupKind, Involution, LieContext};
