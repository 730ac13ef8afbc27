//! G₂-specific pointwise linear algebra at a single point carrying a positive
//! 3-form: type projections on Λ² and Λ³ (and on Λ⁴, Λ⁵ through the Hodge
//! star), the operator J, the torsion components τ₁…τ₄, and the instanton and
//! coassociative defects.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{metric_from_positive3form, AlternatingForm, MetricData};

/// The normal form φ₀ = ε¹²³ − ε¹(ε⁴⁵+ε⁶⁷) − ε²(ε⁴⁶+ε⁷⁵) − ε³(ε⁴⁷+ε⁵⁶),
/// written with 0-based indices.
pub fn phi0() -> AlternatingForm {
    AlternatingForm::from_terms(
        7,
        3,
        &[
            (1.0, &[0, 1, 2]),
            (-1.0, &[0, 3, 4]),
            (-1.0, &[0, 5, 6]),
            (-1.0, &[1, 3, 5]),
            (-1.0, &[1, 6, 4]),
            (-1.0, &[2, 3, 6]),
            (-1.0, &[2, 4, 5]),
        ],
    )
}

fn unit(i: usize) -> [f64; 7] {
    let mut e = [0.0; 7];
    e[i] = 1.0;
    e
}

/// Orthogonal projector onto span(columns of `gens`) w.r.t. the inner product
/// with matrix `gram`.
fn projector(gens: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let vtg = gens.transpose() * gram;
    let small = &vtg * gens;
    let inv = small
        .try_inverse()
        .ok_or_else(|| Error::Domain("degenerate generator set".into()))?;
    Ok(gens * inv * vtg)
}

fn apply(m: &DMatrix<f64>, a: &AlternatingForm) -> AlternatingForm {
    let v = m * DVector::from_column_slice(a.coeffs());
    AlternatingForm::new(a.dim(), a.degree(), v.as_slice().to_vec()).expect("projector shape")
}

/// A point of a 7-manifold with a G₂-structure, with its projectors cached.
#[derive(Clone, Debug)]
pub struct G2Point {
    phi: AlternatingForm,
    metric: MetricData,
    star_phi: AlternatingForm,
    pi7_two: DMatrix<f64>,
    pi1_three: DMatrix<f64>,
    pi7_three: DMatrix<f64>,
}

/// Torsion components of dφ = τ₁*φ + 3τ₄∧φ + *τ₃ and d*φ = 4τ₄∧*φ + *τ₂.
#[derive(Clone, Debug)]
pub struct TorsionComponents {
    pub tau1: f64,
    pub tau2: AlternatingForm,
    pub tau3: AlternatingForm,
    pub tau4: AlternatingForm,
    /// Norm of the reconstruction error of (dφ, d*φ).
    pub residual: f64,
}

impl TorsionComponents {
    /// Sum of the norms of all four components.
    pub fn magnitude(&self, metric: &MetricData) -> f64 {
        self.tau1.abs()
            + self.tau2.norm(metric).unwrap_or(f64::NAN)
            + self.tau3.norm(metric).unwrap_or(f64::NAN)
            + self.tau4.norm(metric).unwrap_or(f64::NAN)
    }
}

impl G2Point {
    /// Builds the point from a positive 3-form; the metric is g_φ.
    pub fn new(phi: AlternatingForm) -> Result<Self> {
        let metric = metric_from_positive3form(&phi)?;
        let star_phi = phi.hodge_star(&metric)?;

        let gram2 = metric.form_gram(2);
        let gram3 = metric.form_gram(3);

        // Λ²₇ = {*(α∧*φ)}, Λ³₇ = {*(α∧φ)}
        let mut gens2 = DMatrix::zeros(21, 7);
        let mut gens3 = DMatrix::zeros(35, 7);
        for a in 0..7 {
            let alpha = AlternatingForm::basis(7, &[a]);
            let g2 = alpha.wedge(&star_phi)?.hodge_star(&metric)?;
            let g3 = alpha.wedge(&phi)?.hodge_star(&metric)?;
            gens2.set_column(a, &DVector::from_column_slice(g2.coeffs()));
            gens3.set_column(a, &DVector::from_column_slice(g3.coeffs()));
        }
        let pi7_two = projector(&gens2, &gram2)?;
        let pi7_three = projector(&gens3, &gram3)?;
        let phi_col = DMatrix::from_column_slice(35, 1, phi.coeffs());
        let pi1_three = projector(&phi_col, &gram3)?;

        Ok(Self {
            phi,
            metric,
            star_phi,
            pi7_two,
            pi1_three,
            pi7_three,
        })
    }

    /// The flat structure (R⁷, φ₀).
    pub fn standard() -> Self {
        Self::new(phi0()).expect("φ₀ is positive")
    }

    pub fn phi(&self) -> &AlternatingForm {
        &self.phi
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn star_phi(&self) -> &AlternatingForm {
        &self.star_phi
    }

    pub fn pi7_two(&self) -> &DMatrix<f64> {
        &self.pi7_two
    }

    pub fn pi14_two(&self) -> DMatrix<f64> {
        DMatrix::identity(21, 21) - &self.pi7_two
    }

    pub fn pi1_three(&self) -> &DMatrix<f64> {
        &self.pi1_three
    }

    pub fn pi7_three(&self) -> &DMatrix<f64> {
        &self.pi7_three
    }

    pub fn pi27_three(&self) -> DMatrix<f64> {
        DMatrix::identity(35, 35) - &self.pi1_three - &self.pi7_three
    }

    /// J = 4/3 π₁ + π₇ − π₂₇ on Λ³.
    pub fn j_matrix(&self) -> DMatrix<f64> {
        &self.pi1_three * (4.0 / 3.0) + &self.pi7_three - self.pi27_three()
    }

    fn check(&self, a: &AlternatingForm, degree: usize) -> Result<()> {
        if a.dim() != 7 || a.degree() != degree {
            return Err(Error::DimensionMismatch(format!(
                "expected a {degree}-form on R^7, got degree {} on R^{}",
                a.degree(),
                a.dim()
            )));
        }
        Ok(())
    }

    /// (β₇, β₁₄).
    pub fn project_two_form(
        &self,
        beta: &AlternatingForm,
    ) -> Result<(AlternatingForm, AlternatingForm)> {
        self.check(beta, 2)?;
        let b7 = apply(&self.pi7_two, beta);
        let b14 = beta - &b7;
        Ok((b7, b14))
    }

    /// (γ₁, γ₇, γ₂₇).
    pub fn project_three_form(
        &self,
        gamma: &AlternatingForm,
    ) -> Result<(AlternatingForm, AlternatingForm, AlternatingForm)> {
        self.check(gamma, 3)?;
        let g1 = apply(&self.pi1_three, gamma);
        let g7 = apply(&self.pi7_three, gamma);
        let g27 = &(gamma - &g1) - &g7;
        Ok((g1, g7, g27))
    }

    /// Type components of a 4-form, Λ⁴_k = *Λ³_k.
    pub fn project_four_form(
        &self,
        omega: &AlternatingForm,
    ) -> Result<(AlternatingForm, AlternatingForm, AlternatingForm)> {
        self.check(omega, 4)?;
        let (a, b, c) = self.project_three_form(&omega.hodge_star(&self.metric)?)?;
        Ok((
            a.hodge_star(&self.metric)?,
            b.hodge_star(&self.metric)?,
            c.hodge_star(&self.metric)?,
        ))
    }

    /// Type components (ω₇, ω₁₄) of a 5-form, Λ⁵_k = *Λ²_k.
    pub fn project_five_form(
        &self,
        omega: &AlternatingForm,
    ) -> Result<(AlternatingForm, AlternatingForm)> {
        self.check(omega, 5)?;
        let (a, b) = self.project_two_form(&omega.hodge_star(&self.metric)?)?;
        Ok((a.hodge_star(&self.metric)?, b.hodge_star(&self.metric)?))
    }

    pub fn j_operator(&self, xi: &AlternatingForm) -> Result<AlternatingForm> {
        self.check(xi, 3)?;
        Ok(apply(&self.j_matrix(), xi))
    }

    /// Recovers τ₁…τ₄ from dφ and d*φ, reporting the reconstruction residual.
    ///
    /// τ₃ and τ₂ are read off as the Λ³₂₇ part of *dφ and the Λ²₁₄ part of
    /// *d*φ; (τ₁, τ₄) solve the remaining overdetermined linear system in the
    /// least-squares sense. Fails with [`Error::InconsistentTorsion`] when the
    /// residual exceeds `1e-9 · max(1, |dφ| + |d*φ|)`.
    pub fn torsion_components(
        &self,
        dphi: &AlternatingForm,
        dstarphi: &AlternatingForm,
    ) -> Result<TorsionComponents> {
        self.check(dphi, 4)?;
        self.check(dstarphi, 5)?;
        let m = &self.metric;
        let (_, _, tau3) = self.project_three_form(&dphi.hodge_star(m)?)?;
        let (_, tau2) = self.project_two_form(&dstarphi.hodge_star(m)?)?;

        let rhs4 = dphi - &tau3.hodge_star(m)?;
        let rhs5 = dstarphi - &tau2.hodge_star(m)?;
        let mut a = DMatrix::zeros(56, 8);
        let mut b = DVector::zeros(56);
        for (i, c) in self.star_phi.coeffs().iter().enumerate() {
            a[(i, 0)] = *c;
        }
        for k in 0..7 {
            let e = AlternatingForm::basis(7, &[k]);
            let c4 = &e.wedge(&self.phi)? * 3.0;
            let c5 = &e.wedge(&self.star_phi)? * 4.0;
            for (i, c) in c4.coeffs().iter().enumerate() {
                a[(i, k + 1)] = *c;
            }
            for (i, c) in c5.coeffs().iter().enumerate() {
                a[(35 + i, k + 1)] = *c;
            }
        }
        b.rows_mut(0, 35).copy_from_slice(rhs4.coeffs());
        b.rows_mut(35, 21).copy_from_slice(rhs5.coeffs());
        let x = a
            .clone()
            .svd(true, true)
            .solve(&b, 1e-14)
            .map_err(|e| Error::Domain(e.to_string()))?;

        let tau1 = x[0];
        let tau4 = AlternatingForm::covector(&x.as_slice()[1..8]);
        let recon4 = &(&(&self.star_phi * tau1) + &(&tau4.wedge(&self.phi)? * 3.0))
            + &tau3.hodge_star(m)?;
        let recon5 = &(&tau4.wedge(&self.star_phi)? * 4.0) + &tau2.hodge_star(m)?;
        let residual = (dphi - &recon4).norm(m)? + (dstarphi - &recon5).norm(m)?;
        let tolerance = 1e-9 * (1.0 + dphi.norm(m)? + dstarphi.norm(m)?);
        if residual > tolerance {
            return Err(Error::InconsistentTorsion {
                residual,
                tolerance,
            });
        }
        Ok(TorsionComponents {
            tau1,
            tau2,
            tau3,
            tau4,
            residual,
        })
    }

    /// |F ∧ *φ|; vanishes exactly on Λ²₁₄.
    pub fn instanton_defect(&self, f: &AlternatingForm) -> Result<f64> {
        self.check(f, 2)?;
        f.wedge(&self.star_phi)?.norm(&self.metric)
    }

    /// Norm of φ restricted to the 4-plane spanned by `plane` (vectors in the
    /// dual basis), after orthonormalizing the plane in g_φ.
    pub fn coassociative_defect(&self, plane: &[[f64; 7]; 4]) -> Result<f64> {
        let g = self.metric.gram();
        let dot = |a: &[f64; 7], b: &[f64; 7]| -> f64 {
            let mut s = 0.0;
            for i in 0..7 {
                for j in 0..7 {
                    s += a[i] * g[(i, j)] * b[j];
                }
            }
            s
        };
        let mut basis: Vec<[f64; 7]> = Vec::with_capacity(4);
        for v in plane {
            let scale = dot(v, v).sqrt();
            let mut w = *v;
            for b in &basis {
                let c = dot(&w, b);
                for i in 0..7 {
                    w[i] -= c * b[i];
                }
            }
            let n = dot(&w, &w).sqrt();
            if scale == 0.0 || n <= 1e-10 * scale {
                return Err(Error::Domain("plane vectors are linearly dependent".into()));
            }
            for x in w.iter_mut() {
                *x /= n;
            }
            basis.push(w);
        }
        let mut sum = 0.0;
        for skip in 0..4 {
            let tri: Vec<&[f64]> = (0..4)
                .filter(|&i| i != skip)
                .map(|i| basis[i].as_slice())
                .collect();
            let val = self.phi.evaluate(&tri)?;
            sum += val * val;
        }
        Ok(sum.sqrt())
    }

    /// The generator *(e^a ∧ *φ) of Λ²₇.
    pub fn two_form_generator(&self, a: usize) -> AlternatingForm {
        AlternatingForm::basis(7, &[a])
            .wedge(&self.star_phi)
            .and_then(|w| w.hodge_star(&self.metric))
            .expect("generator")
    }

    /// The generator *(e^a ∧ φ) of Λ³₇.
    pub fn three_form_generator(&self, a: usize) -> AlternatingForm {
        AlternatingForm::basis(7, &[a])
            .wedge(&self.phi)
            .and_then(|w| w.hodge_star(&self.metric))
            .expect("generator")
    }

    /// ι_{e_a} φ.
    pub fn contract_basis(&self, a: usize) -> AlternatingForm {
        self.phi.contract(&unit(a)).expect("degree 3")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_form, random_positive_3form, rng_from_seed};

    fn idempotence(p: &DMatrix<f64>) -> f64 {
        (p * p - p).amax()
    }

    #[test]
    fn projectors_at_phi0() {
        let p = G2Point::standard();
        let p7 = p.pi7_two();
        let p14 = p.pi14_two();
        assert!((p7.trace() - 7.0).abs() < 1e-10);
        assert!((p14.trace() - 14.0).abs() < 1e-10);
        assert!(idempotence(p7) < 1e-10);
        assert!((p7 * &p14).amax() < 1e-10);
        assert!((p.pi1_three().trace() - 1.0).abs() < 1e-10);
        assert!((p.pi7_three().trace() - 7.0).abs() < 1e-10);
        assert!((p.pi27_three().trace() - 27.0).abs() < 1e-10);
    }

    #[test]
    fn pi14_closed_formula() {
        let p = G2Point::standard();
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let beta = random_form(&mut rng, 7, 2);
            let (_, b14) = p.project_two_form(&beta).unwrap();
            let star_phi_beta = p.phi().wedge(&beta).unwrap().hodge_star(p.metric()).unwrap();
            let closed = &(&beta * (2.0 / 3.0)) - &(&star_phi_beta * (1.0 / 3.0));
            assert!((&closed - &b14).is_zero(1e-12));
        }
    }

    #[test]
    fn generator_of_lambda27_projects_to_itself() {
        let p = G2Point::standard();
        let beta = p.two_form_generator(0);
        let (b7, b14) = p.project_two_form(&beta).unwrap();
        assert!((&b7 - &beta).is_zero(1e-12));
        assert!(b14.is_zero(1e-12));
        let (z7, z14) = p
            .project_two_form(&AlternatingForm::zero(7, 2))
            .unwrap();
        assert!(z7.is_zero(0.0) && z14.is_zero(0.0));
    }

    #[test]
    fn lambda14_is_minus_one_eigenspace() {
        let p = G2Point::standard();
        let mut rng = rng_from_seed(5);
        let (_, b14) = p.project_two_form(&random_form(&mut rng, 7, 2)).unwrap();
        let s = p.phi().wedge(&b14).unwrap().hodge_star(p.metric()).unwrap();
        assert!((&s + &b14).is_zero(1e-12));
        assert!(p.star_phi().wedge(&b14).unwrap().is_zero(1e-12));
    }

    #[test]
    fn three_form_projections() {
        let p = G2Point::standard();
        let (g1, g7, g27) = p.project_three_form(p.phi()).unwrap();
        assert!((&g1 - p.phi()).is_zero(1e-12));
        assert!(g7.is_zero(1e-12) && g27.is_zero(1e-12));

        let gen = p.three_form_generator(0);
        let (g1, g7, g27) = p.project_three_form(&gen).unwrap();
        assert!(g1.is_zero(1e-12) && g27.is_zero(1e-12));
        assert!((&g7 - &gen).is_zero(1e-12));

        let mut rng = rng_from_seed(11);
        let q = G2Point::new(random_positive_3form(&mut rng, 0.2)).unwrap();
        let gamma = random_form(&mut rng, 7, 3);
        let (g1, g7, g27) = q.project_three_form(&gamma).unwrap();
        let m = q.metric();
        let lhs = g1.norm(m).unwrap().powi(2) + g7.norm(m).unwrap().powi(2)
            + g27.norm(m).unwrap().powi(2);
        assert!((lhs - gamma.norm(m).unwrap().powi(2)).abs() < 1e-10);
        // γ₁ = ⟨γ, φ⟩/7 φ
        let c = gamma.inner(q.phi(), m).unwrap() / 7.0;
        assert!((&g1 - &(q.phi() * c)).is_zero(1e-10));
    }

    #[test]
    fn j_eigenvalues() {
        let p = G2Point::standard();
        let jphi = p.j_operator(p.phi()).unwrap();
        assert!((&jphi - &(p.phi() * (4.0 / 3.0))).is_zero(1e-12));
        let gen = p.three_form_generator(2);
        assert!((&p.j_operator(&gen).unwrap() - &gen).is_zero(1e-12));

        let j = p.j_matrix();
        let j2 = &j * &j;
        // J² acts as 16/9, 1, 1 on the three types
        let expected = p.pi1_three() * (16.0 / 9.0) + p.pi7_three() + p.pi27_three();
        assert!((j2 - expected).amax() < 1e-10);
    }

    #[test]
    fn torsion_free_input_gives_zero_torsion() {
        let p = G2Point::standard();
        let t = p
            .torsion_components(&AlternatingForm::zero(7, 4), &AlternatingForm::zero(7, 5))
            .unwrap();
        assert_eq!(t.tau1, 0.0);
        assert!(t.tau2.is_zero(0.0) && t.tau3.is_zero(0.0) && t.tau4.is_zero(0.0));
    }

    #[test]
    fn torsion_round_trip_and_inconsistency() {
        let mut rng = rng_from_seed(17);
        let p = G2Point::new(random_positive_3form(&mut rng, 0.1)).unwrap();
        let m = p.metric();
        let tau1 = 0.3;
        let tau4 = random_form(&mut rng, 7, 1);
        let (_, tau2) = p.project_two_form(&random_form(&mut rng, 7, 2)).unwrap();
        let (_, _, tau3) = p.project_three_form(&random_form(&mut rng, 7, 3)).unwrap();
        let dphi = &(&(p.star_phi() * tau1) + &(&tau4.wedge(p.phi()).unwrap() * 3.0))
            + &tau3.hodge_star(m).unwrap();
        let dstar =
            &(&tau4.wedge(p.star_phi()).unwrap() * 4.0) + &tau2.hodge_star(m).unwrap();
        let t = p.torsion_components(&dphi, &dstar).unwrap();
        assert!((t.tau1 - tau1).abs() < 1e-10);
        assert!((&t.tau4 - &tau4).is_zero(1e-10));
        assert!((&t.tau2 - &tau2).is_zero(1e-10));
        assert!((&t.tau3 - &tau3).is_zero(1e-10));

        // d*φ carrying a τ₄ that disagrees with dφ is not a G₂ torsion pair
        let bad = &dstar + &(&random_form(&mut rng, 7, 1).wedge(p.star_phi()).unwrap() * 1.0);
        assert!(matches!(
            p.torsion_components(&dphi, &bad),
            Err(Error::InconsistentTorsion { .. })
        ));
    }

    #[test]
    fn instanton_defect_cases() {
        let p = G2Point::standard();
        let mut rng = rng_from_seed(23);
        let (_, f14) = p.project_two_form(&random_form(&mut rng, 7, 2)).unwrap();
        assert!(p.instanton_defect(&f14).unwrap() < 1e-11);
        assert!(p.instanton_defect(&p.two_form_generator(0)).unwrap() > 0.1);
        assert_eq!(p.instanton_defect(&AlternatingForm::zero(7, 2)).unwrap(), 0.0);
    }

    #[test]
    fn coassociative_planes() {
        let p = G2Point::standard();
        // σ₂, σ₃ fibre directions with the J₁-complex base line span{∂₀, ∂₁}
        let plane = [unit(1), unit(2), unit(3), unit(4)];
        assert!(p.coassociative_defect(&plane).unwrap() < 1e-12);
        // associative fibre extended by a base vector
        let plane = [unit(0), unit(1), unit(2), unit(3)];
        assert!((p.coassociative_defect(&plane).unwrap() - 1.0).abs() < 1e-12);
        let degenerate = [unit(0), unit(1), unit(0), unit(3)];
        assert!(matches!(
            p.coassociative_defect(&degenerate),
            Err(Error::Domain(_))
        ));
    }
}
