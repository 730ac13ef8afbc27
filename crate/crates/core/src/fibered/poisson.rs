//! FFT solver for Δh = ρ on the flat 4-torus (Δ = δd, nonnegative spectrum).

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fibered::grid::BaseField;

/// Absolute floor below which a source mean is treated as rounding.
const MEAN_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PoissonSolution {
    /// The solution with mean fixed to h₀.
    pub h: BaseField,
    pub min: f64,
}

/// Solves Δh = ρ with mean(h) = `h0`.
///
/// ρ is obstructed when its mean exceeds both `tol · rms(ρ)` and 1e-12; the
/// error then carries ∫ρ over the torus.
pub fn poisson_solve(rho: &BaseField, h0: f64, tol: f64) -> Result<PoissonSolution> {
    if rho.degree() != 0 {
        return Err(Error::Domain("Poisson source must be a scalar field".into()));
    }
    let torus = rho.torus();
    let mean = rho.mean();
    if mean.abs() > tol * rho.rms() && mean.abs() > MEAN_FLOOR {
        return Err(Error::ObstructedSource {
            mismatch: mean * torus.volume(),
        });
    }
    let mut spec = torus.fft4(rho.grid(0));
    let k2 = torus.k_squared();
    let zero_mode = h0 * torus.len() as f64;
    spec.par_iter_mut().zip(k2.par_iter()).enumerate().for_each(|(i, (c, k))| {
        *c = if i == 0 { Complex64::new(zero_mode, 0.0) } else { *c / *k };
    });
    let h = BaseField::from_grids(torus, 0, vec![torus.ifft4(spec)])?;
    let min = h.min_value();
    Ok(PoissonSolution { h, min })
}
