//! Numerical and exact verification kernels for the G₂-Strominger system on
//! principal T³-bundles over a flat 4-torus.
//!
//! - [`exterior`]: dense exterior algebra in dimension ≤ 8.
//! - [`g2`]: type decompositions, J, torsion and instanton conditions.
//! - [`symbols`]: principal symbols of the deformation complexes and exactness.
//! - [`fibered`]: spectral calculus for T³-invariant forms, Poisson solver.
//! - [`ansatz`]: the warped ansatz, its torsion, and the four residuals.
//! - [`lattice`]: intersection lattices and the existence window.
//! - [`tduality`]: dual data and the exact correspondence-space identity.

pub mod error;
pub mod ansatz;
pub mod exterior;
pub mod fibered;
pub mod g2;
pub mod lattice;
pub mod sampling;
pub mod scalar;
pub mod symbols;
pub mod tduality;

pub use error::{Error, Result};
pub use exterior::{metric_from_positive3form, AlternatingForm, MetricData};
pub use g2::{phi0, G2Point, TorsionComponents};
pub use scalar::Scalar;
pub use ansatz::{Scenario, SolutionReport, UMode};
pub use fibered::{BaseField, FiberedForm, Torus4, TorusBundle};
