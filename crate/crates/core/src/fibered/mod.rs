//! Spectral exterior calculus for T³-invariant forms on a principal
//! T³-bundle over a flat 4-torus.

pub mod form;
pub mod grid;
pub mod io;
pub mod poisson;

pub use form::{form_from_periods, is_asd, FiberedForm, TorusBundle};
pub use grid::{hyperkahler_form, BaseField, Torus4};
pub use io::{read_field, write_field};
pub use poisson::{poisson_solve, PoissonSolution};
