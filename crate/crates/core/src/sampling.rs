//! Seeded random inputs for the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::exterior::{binomial, AlternatingForm};
use crate::g2::phi0;

pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Form with independent standard normal coefficients.
pub fn random_form<R: Rng>(rng: &mut R, dim: usize, degree: usize) -> AlternatingForm {
    let coeffs = (0..binomial(dim, degree))
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    AlternatingForm::new(dim, degree, coeffs).expect("sized by binomial")
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Euclidean unit vector, uniform on the sphere.
pub fn random_unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v = random_vector(rng, dim);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// φ₀ + ε·(random 3-form scaled to unit coefficient norm); positive for ε
/// small (the positive 3-forms are open).
pub fn random_positive_3form<R: Rng>(rng: &mut R, eps: f64) -> AlternatingForm {
    let noise = random_form(rng, 7, 3);
    let n = noise.coeff_norm();
    &phi0() + &(&noise * (eps / n))
}

/// One real Fourier mode c·cos(2π k·x/L) + s·sin(2π k·x/L).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierMode {
    pub k: [i32; 4],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

pub fn field_from_modes(torus: &crate::fibered::Torus4, modes: &[FourierMode]) -> crate::fibered::BaseField {
    let sides = torus.sides();
    let modes = modes.to_vec();
    crate::fibered::BaseField::scalar_from_fn(torus, move |x| {
        modes
            .iter()
            .map(|m| {
                let phase: f64 = (0..4)
                    .map(|a| 2.0 * std::f64::consts::PI * m.k[a] as f64 * x[a] / sides[a])
                    .sum();
                m.cos * phase.cos() + m.sin * phase.sin()
            })
            .sum()
    })
}

/// `count` random modes with wavevectors in {−1,0,1}⁴ \ {0}, plus a random
/// mean, with Σ(|cos|+|sin|) over the oscillating modes equal to `amplitude`.
pub fn random_low_modes<R: Rng>(rng: &mut R, count: usize, amplitude: f64) -> Vec<FourierMode> {
    let mut modes: Vec<FourierMode> = (0..count)
        .map(|_| {
            let k = loop {
                let k: [i32; 4] = std::array::from_fn(|_| rng.random_range(-1..=1));
                if k != [0; 4] {
                    break k;
                }
            };
            FourierMode {
                k,
                cos: rng.random_range(-1.0..1.0),
                sin: rng.random_range(-1.0..1.0),
            }
        })
        .collect();
    let total: f64 = modes.iter().map(|m| m.cos.abs() + m.sin.abs()).sum();
    for m in modes.iter_mut() {
        m.cos *= amplitude / total;
        m.sin *= amplitude / total;
    }
    modes.push(FourierMode {
        k: [0; 4],
        cos: rng.random_range(-1.0..1.0),
        sin: 0.0,
    });
    modes
}
