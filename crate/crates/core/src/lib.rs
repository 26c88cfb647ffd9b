//! Analysis of three-dimensional piecewise-smooth (Filippov) vector fields
//! near a two-fold singularity, in the semi-linear normal form.
//!
//! * [`model`]: coefficients, Σ-regions, sliding field and system predicates.
//! * [`flows`]: exact flows, flight times and fold involutions.
//! * [`maps`]: first-return map, crossing compositions, eigen-classification.
//! * [`orbits`]: periodic and pseudo-periodic orbit families, closed orbits.
//! * [`integrator`]: event-driven numerical integration used as an
//!   independent check of the closed forms.

pub mod error;
pub mod flows;
pub mod integrator;
pub mod linalg;
pub mod maps;
pub mod model;
pub mod orbits;

pub use error::{Error, Result};
pub use linalg::LinearMap2;
pub use model::{Coefficients, Point3, Region, SigmaPoint, SingularityClass};
