//! T³-invariant forms Σ_I σ_I ∧ α_I on a principal T³-bundle over T⁴ with
//! dσ_j = β_j, their exterior derivative, wedge and warped Hodge star.
//!
//! Fiber multi-indices are bitmasks over {σ₁, σ₂, σ₃}. The 7-dimensional
//! pointwise coframe is (σ₁, σ₂, σ₃, dx⁰, …, dx³), oriented by σ₁₂₃∧dvol₄.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::exterior::{wedge_sign, AlternatingForm, MetricData};
use crate::fibered::grid::{BaseField, Torus4};

/// Index of the pair basis (01, 23, 02, 31, 03, 12) of Λ²(ℝ⁴).
const PAIRS: [(usize, usize); 6] = [(0, 1), (2, 3), (0, 2), (3, 1), (0, 3), (1, 2)];

/// The curvature triple of the bundle: constant closed ASD 2-forms with
/// integral periods.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusBundle {
    torus: Torus4,
    periods: [[i64; 6]; 3],
    beta: [AlternatingForm; 3],
}

/// The constant 2-form with ∫_{T_ab} β = 2π n_ab on the coordinate 2-tori, in
/// the pair basis (01, 23, 02, 31, 03, 12).
pub fn form_from_periods(sides: [f64; 4], periods: &[i64; 6]) -> AlternatingForm {
    let mut f = AlternatingForm::zero(4, 2);
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let c = 2.0 * std::f64::consts::PI * periods[k] as f64 / (sides[a] * sides[b]);
        f += &AlternatingForm::from_terms(4, 2, &[(c, &[a, b])]);
    }
    f
}

/// Anti-self-dual in the pair basis iff the periods read (a, −a, b, −b, c, −c)
/// after accounting for side lengths; on a unit torus the coefficient test
/// below is exact.
pub fn is_asd(form: &AlternatingForm, tol: f64) -> bool {
    let star = form.hodge_star(&MetricData::euclidean(4)).expect("flat");
    (&star + form).max_abs() <= tol
}

impl TorusBundle {
    /// Builds the bundle from integer periods; each β_j must be ASD.
    pub fn from_periods(torus: &Torus4, periods: [[i64; 6]; 3]) -> Result<Self> {
        let beta = periods.map(|p| form_from_periods(torus.sides(), &p));
        for (j, b) in beta.iter().enumerate() {
            if !is_asd(b, 1e-10 * (1.0 + b.max_abs())) {
                return Err(Error::Domain(format!(
                    "beta_{} with periods {:?} is not anti-self-dual",
                    j + 1,
                    periods[j]
                )));
            }
        }
        Ok(Self {
            torus: torus.clone(),
            periods,
            beta,
        })
    }

    /// Product bundle T³ × T⁴.
    pub fn trivial(torus: &Torus4) -> Self {
        Self::from_periods(torus, [[0; 6]; 3]).expect("zero is ASD")
    }

    pub fn torus(&self) -> &Torus4 {
        &self.torus
    }

    pub fn periods(&self) -> &[[i64; 6]; 3] {
        &self.periods
    }

    pub fn beta(&self, j: usize) -> &AlternatingForm {
        &self.beta[j]
    }

    /// Σ_j |β_j|² (a constant).
    pub fn beta_norm_sq(&self) -> f64 {
        let m = MetricData::euclidean(4);
        self.beta.iter().map(|b| b.inner(b, &m).unwrap()).sum()
    }
}

fn fiber_count(mask: u8) -> usize {
    mask.count_ones() as usize
}

fn fiber_sign(a: u8, b: u8) -> f64 {
    wedge_sign(a as u16, b as u16)
}

/// Σ_I σ_I ∧ α_I with every term of the same total degree.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberedForm {
    torus: Torus4,
    degree: usize,
    terms: [Option<BaseField>; 8],
}

impl FiberedForm {
    pub fn zero(torus: &Torus4, degree: usize) -> Self {
        assert!(degree <= 7);
        Self {
            torus: torus.clone(),
            degree,
            terms: Default::default(),
        }
    }

    /// σ_I ∧ α for the fiber indices `fiber` (0-based, increasing).
    pub fn term(fiber: &[usize], alpha: BaseField) -> Self {
        let mask = fiber.iter().fold(0u8, |m, &i| m | (1 << i));
        assert_eq!(fiber_count(mask), fiber.len(), "repeated fiber index");
        let sign = crate::exterior::permutation_sign(fiber);
        let alpha = if sign < 0.0 { -&alpha } else { alpha };
        let mut f = Self::zero(&alpha.torus().clone(), fiber.len() + alpha.degree());
        f.terms[mask as usize] = Some(alpha);
        f
    }

    /// The pullback of a base field.
    pub fn base(alpha: BaseField) -> Self {
        Self::term(&[], alpha)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn torus(&self) -> &Torus4 {
        &self.torus
    }

    /// α_I for the fiber mask I, if present.
    pub fn component(&self, mask: u8) -> Option<&BaseField> {
        self.terms[mask as usize].as_ref()
    }

    pub fn components(&self) -> impl Iterator<Item = (u8, &BaseField)> {
        self.terms
            .iter()
            .enumerate()
            .filter_map(|(m, t)| t.as_ref().map(|f| (m as u8, f)))
    }

    fn accumulate(&mut self, mask: u8, alpha: BaseField) {
        debug_assert_eq!(fiber_count(mask) + alpha.degree(), self.degree);
        let slot = &mut self.terms[mask as usize];
        *slot = Some(match slot.take() {
            Some(prev) => &prev + &alpha,
            None => alpha,
        });
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (m, f) in other.components() {
            out.accumulate(m, if sign < 0.0 { -f } else { f.clone() });
        }
        out
    }

    /// Exterior derivative using dσ_j = β_j and spectral d on the base. A
    /// top-degree input returns the zero 7-form.
    pub fn d(&self, bundle: &TorusBundle) -> Self {
        if self.degree == 7 {
            return Self::zero(&self.torus, 7);
        }
        let mut out = Self::zero(&self.torus, self.degree + 1);
        for (mask, alpha) in self.components() {
            let p = fiber_count(mask);
            // dσ_I ∧ α
            let mut r = 0;
            for i in 0..3 {
                if mask & (1 << i) == 0 {
                    continue;
                }
                r += 1;
                let beta = bundle.beta(i);
                if beta.max_abs() == 0.0 || alpha.degree() + 2 > 4 {
                    continue;
                }
                let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
                let b = BaseField::constant(&self.torus, beta);
                let ba = b.wedge(alpha).expect("degree checked");
                out.accumulate(mask & !(1 << i), &ba * sign);
            }
            // (−1)^{|I|} σ_I ∧ dα
            if alpha.degree() < 4 {
                let da = alpha.d();
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                out.accumulate(mask, &da * sign);
            }
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.degree + other.degree > 7 {
            return Err(Error::DegreeOverflow {
                lhs: self.degree,
                rhs: other.degree,
                dim: 7,
            });
        }
        let mut out = Self::zero(&self.torus, self.degree + other.degree);
        for (mi, a) in self.components() {
            for (mj, g) in other.components() {
                if mi & mj != 0 || a.degree() + g.degree() > 4 {
                    continue;
                }
                let sign = fiber_sign(mi, mj) * if (a.degree() * fiber_count(mj)) % 2 == 0 { 1.0 } else { -1.0 };
                out.accumulate(mi | mj, &a.wedge(g)? * sign);
            }
        }
        Ok(out)
    }

    /// Hodge star of g = t²Σσ_i² + e^u g₄:
    /// *(σ_I∧α) = (−1)^{q(3−p)} ε_I t^{3−2p} e^{(2−q)u} σ_{Iᶜ}∧*₄α.
    pub fn star(&self, u: &BaseField, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("fiber scale t = {t} must be positive")));
        }
        if u.degree() != 0 {
            return Err(Error::Domain("conformal factor must be a scalar field".into()));
        }
        let mut out = Self::zero(&self.torus, 7 - self.degree);
        // e^{(2−q)u}, built once per base degree q
        let mut weights: [Option<BaseField>; 5] = Default::default();
        for (mask, alpha) in self.components() {
            let p = fiber_count(mask);
            let q = alpha.degree();
            let comp = !mask & 0b111;
            let sign = if (q * (3 - p)) % 2 == 0 { 1.0 } else { -1.0 } * fiber_sign(mask, comp);
            let scale = sign * t.powi(3 - 2 * p as i32);
            let starred = alpha.star();
            let field = if q == 2 {
                &starred * scale
            } else {
                let c = 2.0 - q as f64;
                let w = weights[q].get_or_insert_with(|| u.map(|x| (c * x).exp()));
                &starred.scale_by(w) * scale
            };
            out.accumulate(comp, field);
        }
        Ok(out)
    }

    /// The 7-dimensional form at grid point `idx` in the (σ, dx) coframe.
    pub fn at(&self, idx: usize) -> AlternatingForm {
        let mut out = AlternatingForm::zero(7, self.degree);
        for (mask, alpha) in self.components() {
            let a = alpha.at(idx);
            for (bm, c) in a.terms() {
                if c == 0.0 {
                    continue;
                }
                let full = (mask as u16) | (bm << 3);
                let mut indices: Vec<usize> = (0..3).filter(|i| mask & (1 << i) != 0).collect();
                indices.extend(crate::exterior::mask_indices(bm).map(|i| i + 3));
                debug_assert_eq!(indices.len(), full.count_ones() as usize);
                out += &AlternatingForm::from_terms(7, self.degree, &[(c, &indices)]);
            }
        }
        out
    }

    /// RMS over the grid of the Euclidean norm of all coefficients.
    pub fn rms(&self) -> f64 {
        self.components()
            .map(|(_, f)| f.rms().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components().map(|(_, f)| f.max_abs()).fold(0.0, f64::max)
    }

    /// Multiplies every component by a scalar field.
    pub fn scale_by(&self, s: &BaseField) -> Self {
        let mut out = Self::zero(&self.torus, self.degree);
        for (m, f) in self.components() {
            out.terms[m as usize] = Some(f.scale_by(s));
        }
        out
    }
}

impl Add for &FiberedForm {
    type Output = FiberedForm;
    fn add(self, rhs: &FiberedForm) -> FiberedForm {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &FiberedForm {
    type Output = FiberedForm;
    fn sub(self, rhs: &FiberedForm) -> FiberedForm {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &FiberedForm {
    type Output = FiberedForm;
    fn neg(self) -> FiberedForm {
        self * -1.0
    }
}

impl Mul<f64> for &FiberedForm {
    type Output = FiberedForm;
    fn mul(self, rhs: f64) -> FiberedForm {
        let mut out = FiberedForm::zero(&self.torus, self.degree);
        for (m, f) in self.components() {
            out.terms[m as usize] = Some(f * rhs);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::binomial;
    use crate::fibered::grid::hyperkahler_form;
    use std::f64::consts::PI;

    fn asd_bundle(torus: &Torus4) -> TorusBundle {
        TorusBundle::from_periods(
            torus,
            [[1, -1, 0, 0, 0, 0], [0, 0, 2, -2, 1, -1], [0, 0, 0, 0, -1, 1]],
        )
        .unwrap()
    }

    fn smooth(torus: &Torus4, shift: f64) -> BaseField {
        BaseField::scalar_from_fn(torus, move |x| {
            0.2 * (2.0 * PI * x[0] + shift).sin() + 0.1 * (2.0 * PI * (x[1] - x[3]) - shift).cos()
                + 0.05 * (2.0 * PI * x[2]).sin()
        })
    }

    fn random_fibered(torus: &Torus4, degree: usize, seed: u64) -> FiberedForm {
        let mut out = FiberedForm::zero(torus, degree);
        let mut k = seed as f64;
        for mask in 0u8..8 {
            let p = fiber_count(mask);
            if degree < p || degree - p > 4 {
                continue;
            }
            let q = degree - p;
            let grids = (0..binomial(4, q))
                .map(|_| {
                    k += 0.37;
                    smooth(torus, k).grids()[0].clone()
                })
                .collect();
            out.accumulate(mask, BaseField::from_grids(torus, q, grids).unwrap());
        }
        out
    }

    #[test]
    fn periods_round_trip() {
        let torus = Torus4::new([1.0, 2.0, 1.0, 0.5], 2).unwrap();
        let b = form_from_periods(torus.sides(), &[3, 0, 0, 0, 0, 0]);
        // ∫ over the (0,1) torus of the constant coefficient = 2π·3
        assert!((b.component(&[0, 1]) * 2.0 - 2.0 * PI * 3.0).abs() < 1e-14);
        assert!(TorusBundle::from_periods(&torus, [[1, 1, 0, 0, 0, 0], [0; 6], [0; 6]]).is_err());
    }

    #[test]
    fn d_of_fiber_volume() {
        let torus = Torus4::unit(2).unwrap();
        let bundle = asd_bundle(&torus);
        let one = BaseField::scalar_const(&torus, 1.0);
        let vol = FiberedForm::term(&[0, 1, 2], one);
        let d = vol.d(&bundle);
        let b = |j| BaseField::constant(&torus, bundle.beta(j));
        let expected = &(&FiberedForm::term(&[1, 2], b(0)) + &FiberedForm::term(&[2, 0], b(1)))
            + &FiberedForm::term(&[0, 1], b(2));
        assert!((&d - &expected).max_abs() < 1e-14);
    }

    #[test]
    fn d_squared_vanishes_on_all_degrees() {
        let torus = Torus4::unit(8).unwrap();
        let bundle = asd_bundle(&torus);
        for degree in 0..=6 {
            let w = random_fibered(&torus, degree, degree as u64);
            let dd = w.d(&bundle).d(&bundle);
            assert!(dd.max_abs() < 1e-10, "degree {degree}: {}", dd.max_abs());
        }
    }

    #[test]
    fn leibniz_rule() {
        let torus = Torus4::unit(8).unwrap();
        let bundle = asd_bundle(&torus);
        for (p, q) in [(1, 2), (2, 2), (3, 1), (2, 3)] {
            let a = random_fibered(&torus, p, 3);
            let b = random_fibered(&torus, q, 7);
            let lhs = a.wedge(&b).unwrap().d(&bundle);
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = &a.d(&bundle).wedge(&b).unwrap() + &(&a.wedge(&b.d(&bundle)).unwrap() * sign);
            assert!((&lhs - &rhs).max_abs() < 1e-9);
        }
    }

    #[test]
    fn wedge_matches_pointwise() {
        let torus = Torus4::unit(4).unwrap();
        let a = random_fibered(&torus, 2, 1);
        let b = random_fibered(&torus, 3, 2);
        let ab = a.wedge(&b).unwrap();
        for idx in [0, 17, 200] {
            let pw = a.at(idx).wedge(&b.at(idx)).unwrap();
            assert!((&ab.at(idx) - &pw).is_zero(1e-13));
        }
    }

    #[test]
    fn star_matches_pointwise_and_squares_to_sign() {
        let torus = Torus4::unit(4).unwrap();
        let u = smooth(&torus, 0.4);
        for t in [0.5, 1.0, 2.0] {
            for degree in 0..=7 {
                let w = random_fibered(&torus, degree, 11 + degree as u64);
                let s = w.star(&u, t).unwrap();
                for idx in [0, 33, 255] {
                    let e = u.value(idx).exp();
                    let m = MetricData::diagonal(&[t * t, t * t, t * t, e, e, e, e]).unwrap();
                    let pw = w.at(idx).hodge_star(&m).unwrap();
                    assert!((&s.at(idx) - &pw).is_zero(1e-10 * (1.0 + pw.max_abs())));
                }
                let ss = s.star(&u, t).unwrap();
                let sign = if (degree * (7 - degree)) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((&ss - &(&w * sign)).max_abs() < 1e-10);
            }
        }
        assert!(FiberedForm::zero(&torus, 3).star(&u, 0.0).is_err());
    }

    #[test]
    fn star_of_one_is_warped_volume() {
        let torus = Torus4::unit(4).unwrap();
        let u = smooth(&torus, 1.0);
        let t = 1.7;
        let s = FiberedForm::base(BaseField::scalar_const(&torus, 1.0)).star(&u, t).unwrap();
        let top = s.component(0b111).unwrap();
        for idx in 0..torus.len() {
            let expected = t.powi(3) * (2.0 * u.value(idx)).exp();
            assert!((top.grid(0)[idx] - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn hyperkahler_forms_pull_back_closed() {
        let torus = Torus4::unit(2).unwrap();
        let bundle = asd_bundle(&torus);
        for i in 0..3 {
            let w = FiberedForm::base(BaseField::constant(&torus, &hyperkahler_form(i)));
            assert_eq!(w.d(&bundle).max_abs(), 0.0);
        }
    }
}
