//! T-dual data (t′ = 1/t, β′ = −t²β) and the exact check of
//! q*Ĥ − q′*Ĥ′ = −d(Σ_j σ_j∧σ′_j) on the correspondence space.
//!
//! Forms are expressed in units of 2π in the normalized base coframe
//! e^a = dx^a/L_a, where the curvature of an integral class has the integer
//! periods as coefficients. The correspondence algebra is the exterior
//! algebra on (e⁰…e³, σ₁…σ₃, σ′₁…σ′₃) with constant coefficients, plus two
//! opaque shared 3-forms pulled back from the base: the Chern–Simons form of
//! the common gauge connection and the dilaton term ½ ι_{∇e^u} ω₁².

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::ansatz::Scenario;
use crate::error::{Error, Result};
use crate::exterior::wedge_sign;
use crate::fibered::TorusBundle;
use crate::scalar::Scalar;

/// Coefficient ring of the correspondence algebra.
pub trait Coefficient:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn recip(&self) -> Self;
    /// The value as an integer, if it is one (floats within 1e-9).
    fn as_integer(&self) -> Option<i64>;
}

impl Coefficient for Rational64 {
    fn from_i64(n: i64) -> Self {
        Rational64::from_integer(n)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn recip(&self) -> Self {
        Rational64::recip(self)
    }
    fn as_integer(&self) -> Option<i64> {
        self.is_integer().then(|| self.to_integer())
    }
}

impl Coefficient for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn as_integer(&self) -> Option<i64> {
        ((self - self.round()).abs() <= 1e-9 * (1.0 + self.abs())).then(|| self.round() as i64)
    }
}

/// Generator indices in the correspondence algebra.
pub const BASE: [usize; 4] = [0, 1, 2, 3];
pub const SIGMA: [usize; 3] = [4, 5, 6];
pub const SIGMA_DUAL: [usize; 3] = [7, 8, 9];

const PAIRS: [(usize, usize); 6] = [(0, 1), (2, 3), (0, 2), (3, 1), (0, 3), (1, 2)];

/// Element of the correspondence algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrespondenceElement<C> {
    terms: BTreeMap<u16, C>,
    /// Coefficient of the shared Chern–Simons 3-form.
    chern_simons: C,
    /// Coefficient of the shared dilaton 3-form.
    dilaton: C,
}

impl<C: Coefficient> CorrespondenceElement<C> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
            chern_simons: C::zero(),
            dilaton: C::zero(),
        }
    }

    pub fn generator(i: usize) -> Self {
        assert!(i < 10, "generator {i} out of range");
        Self::monomial(C::one(), &[i])
    }

    /// c · g_{i₁}∧…∧g_{i_k} (indices in any order).
    pub fn monomial(c: C, indices: &[usize]) -> Self {
        let mut out = Self::from_terms(c);
        for &i in indices {
            out = out.wedge(&Self::generator_raw(i));
        }
        out
    }

    fn from_terms(c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0u16, c);
        }
        Self {
            terms,
            chern_simons: C::zero(),
            dilaton: C::zero(),
        }
    }

    fn generator_raw(i: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(1u16 << i, C::one());
        Self {
            terms,
            chern_simons: C::zero(),
            dilaton: C::zero(),
        }
    }

    pub fn chern_simons() -> Self {
        Self {
            chern_simons: C::one(),
            ..Self::zero()
        }
    }

    pub fn dilaton() -> Self {
        Self {
            dilaton: C::one(),
            ..Self::zero()
        }
    }

    /// Constant base 2-form from pair-basis coefficients (01, 23, 02, 31, 03, 12).
    pub fn base_two_form(coeffs: &[C; 6]) -> Self {
        let mut out = Self::zero();
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            out = &out + &Self::monomial(coeffs[k].clone(), &[a, b]);
        }
        out
    }

    pub fn coefficient(&self, mask: u16) -> C {
        self.terms.get(&mask).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u16, &C)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn has_symbolic_part(&self) -> bool {
        !(self.chern_simons.is_zero() && self.dilaton.is_zero())
    }

    /// Exactly zero, symbolic parts included.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && !self.has_symbolic_part()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .chain([&self.chern_simons, &self.dilaton])
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    fn insert(&mut self, mask: u16, c: C) {
        let entry = self.terms.entry(mask).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (m, x) in &self.terms {
            out.insert(*m, x.clone() * c.clone());
        }
        out.chern_simons = self.chern_simons.clone() * c.clone();
        out.dilaton = self.dilaton.clone() * c.clone();
        out
    }

    /// Wedge of generator parts. The symbolic 3-forms are only ever added,
    /// so wedging them is rejected.
    pub fn wedge(&self, other: &Self) -> Self {
        assert!(
            !self.has_symbolic_part() && !other.has_symbolic_part(),
            "symbolic forms do not take part in products"
        );
        let mut out = Self::zero();
        for (ma, a) in &self.terms {
            for (mb, b) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let s = wedge_sign(*ma, *mb);
                let c = a.clone() * b.clone();
                out.insert(ma | mb, if s < 0.0 { -c } else { c });
            }
        }
        out
    }

    /// Exterior derivative with dσ_j, dσ′_j from `structure` and constant base
    /// coefficients. Symbolic parts have no derivative here.
    pub fn d(&self, structure: &CorrespondenceStructure<C>) -> Result<Self> {
        if self.has_symbolic_part() {
            return Err(Error::Domain("d of a symbolic form is not represented".into()));
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            // Leibniz over the ordered generators
            let mut seen = 0u32;
            for i in 0..10 {
                if m & (1 << i) == 0 {
                    continue;
                }
                let dg = structure.d_generator(i);
                if !dg.is_zero() {
                    let before = m & ((1u16 << i) - 1);
                    let after = m & !((1u16 << (i + 1)) - 1);
                    let sign = if seen % 2 == 0 { C::one() } else { -C::one() };
                    let piece = Self::from_mask(before)
                        .wedge(dg)
                        .wedge(&Self::from_mask(after))
                        .scale(&(sign * c.clone()));
                    out = &out + &piece;
                }
                seen += 1;
            }
        }
        Ok(out)
    }

    fn from_mask(mask: u16) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(mask, C::one());
        Self {
            terms,
            chern_simons: C::zero(),
            dilaton: C::zero(),
        }
    }

    /// q′*: relabels σ_j ↦ σ′_j on an element written over (base, σ).
    pub fn relabel_fiber_to_dual(&self) -> Self {
        let mut out = Self {
            chern_simons: self.chern_simons.clone(),
            dilaton: self.dilaton.clone(),
            ..Self::zero()
        };
        for (m, c) in &self.terms {
            assert!(m & 0b11_1000_0000 == 0, "element already involves dual fibre generators");
            let sig = (m >> 4) & 0b111;
            out.insert((m & 0b1111) | (sig << 7), c.clone());
        }
        out
    }
}

impl<C: Coefficient> Add for &CorrespondenceElement<C> {
    type Output = CorrespondenceElement<C>;
    fn add(self, rhs: &CorrespondenceElement<C>) -> CorrespondenceElement<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(*m, c.clone());
        }
        out.chern_simons = out.chern_simons + rhs.chern_simons.clone();
        out.dilaton = out.dilaton + rhs.dilaton.clone();
        out
    }
}

impl<C: Coefficient> Sub for &CorrespondenceElement<C> {
    type Output = CorrespondenceElement<C>;
    fn sub(self, rhs: &CorrespondenceElement<C>) -> CorrespondenceElement<C> {
        self + &rhs.scale(&-C::one())
    }
}

/// dσ_j = β̃_j, dσ′_j = β̃′_j on the correspondence space.
#[derive(Clone, Debug)]
pub struct CorrespondenceStructure<C> {
    d_sigma: [CorrespondenceElement<C>; 3],
    d_sigma_dual: [CorrespondenceElement<C>; 3],
    zero: CorrespondenceElement<C>,
}

impl<C: Coefficient> CorrespondenceStructure<C> {
    pub fn new(beta: &[[C; 6]; 3], beta_dual: &[[C; 6]; 3]) -> Self {
        Self {
            d_sigma: std::array::from_fn(|j| CorrespondenceElement::base_two_form(&beta[j])),
            d_sigma_dual: std::array::from_fn(|j| CorrespondenceElement::base_two_form(&beta_dual[j])),
            zero: CorrespondenceElement::zero(),
        }
    }

    fn d_generator(&self, i: usize) -> &CorrespondenceElement<C> {
        match i {
            4..=6 => &self.d_sigma[i - 4],
            7..=9 => &self.d_sigma_dual[i - 7],
            _ => &self.zero,
        }
    }
}

/// (t², β̃) of one side of the duality.
#[derive(Clone, Debug, PartialEq)]
pub struct DualData<C> {
    pub t_squared: C,
    pub beta: [[C; 6]; 3],
}

impl<C: Coefficient> DualData<C> {
    pub fn from_periods(t_squared: C, periods: &[[i64; 6]; 3]) -> Self {
        Self {
            t_squared,
            beta: periods.map(|p| p.map(C::from_i64)),
        }
    }

    /// Ĥ = −t² Σ β̃_j∧σ_j − D + CS, written over (base, σ).
    pub fn string_representative(&self) -> CorrespondenceElement<C> {
        let mut h = CorrespondenceElement::zero();
        for j in 0..3 {
            let b = CorrespondenceElement::base_two_form(&self.beta[j]);
            h = &h + &b.wedge(&CorrespondenceElement::generator(SIGMA[j]));
        }
        let h = h.scale(&-self.t_squared.clone());
        &(&h - &CorrespondenceElement::dilaton()) + &CorrespondenceElement::chern_simons()
    }
}

/// A scenario's duality data together with its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPair<C> {
    pub original: DualData<C>,
    pub dual: DualData<C>,
}

/// t′² = 1/t², β′ = −t²β; every β′_j must have integer periods.
pub fn dualize<C: Coefficient>(data: &DualData<C>) -> Result<DualPair<C>> {
    if data.t_squared.is_zero() {
        return Err(Error::Domain("t^2 must be nonzero".into()));
    }
    let mut beta = data.beta.clone();
    for (j, row) in beta.iter_mut().enumerate() {
        for x in row.iter_mut() {
            let y = -(data.t_squared.clone() * x.clone());
            if y.as_integer().is_none() {
                return Err(Error::NotDualizable { index: j + 1 });
            }
            *x = y;
        }
    }
    Ok(DualPair {
        original: data.clone(),
        dual: DualData {
            t_squared: data.t_squared.recip(),
            beta,
        },
    })
}

impl<C: Coefficient> DualPair<C> {
    pub fn structure(&self) -> CorrespondenceStructure<C> {
        CorrespondenceStructure::new(&self.original.beta, &self.dual.beta)
    }

    /// q*Ĥ − q′*Ĥ′.
    pub fn lhs(&self) -> CorrespondenceElement<C> {
        let h = self.original.string_representative();
        let h_dual = self.dual.string_representative().relabel_fiber_to_dual();
        &h - &h_dual
    }

    /// F = −Σ_j σ_j∧σ′_j.
    pub fn pairing_form(&self) -> CorrespondenceElement<C> {
        let mut f = CorrespondenceElement::zero();
        for j in 0..3 {
            f = &f - &CorrespondenceElement::monomial(C::one(), &[SIGMA[j], SIGMA_DUAL[j]]);
        }
        f
    }

    /// dF, i.e. −d(Σ_j σ_j∧σ′_j).
    pub fn rhs(&self) -> Result<CorrespondenceElement<C>> {
        self.pairing_form().d(&self.structure())
    }

    /// LHS − RHS; exactly zero in rational arithmetic when the identity holds.
    pub fn duality_defect(&self) -> Result<CorrespondenceElement<C>> {
        Ok(&self.lhs() - &self.rhs()?)
    }
}

/// Outcome of the duality identity check.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DualityCheck {
    /// Largest coefficient of LHS − RHS.
    pub residual: f64,
    /// LHS − RHS is identically zero, symbolic parts included.
    pub exact_zero: bool,
    /// The shared symbolic terms cancel in the LHS.
    pub symbolic_terms_cancel: bool,
}

pub fn verify_duality_identity<C: Coefficient>(pair: &DualPair<C>) -> Result<DualityCheck> {
    let lhs = pair.lhs();
    let defect = pair.duality_defect()?;
    Ok(DualityCheck {
        residual: defect.max_abs(),
        exact_zero: defect.is_zero(),
        symbolic_terms_cancel: !lhs.has_symbolic_part(),
    })
}

/// The 3×3 matrix M_lk = coefficient of σ_l∧σ′_k in F and its determinant.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PairingCheck {
    pub matrix: [[f64; 3]; 3],
    pub determinant: f64,
    pub nondegenerate: bool,
}

pub fn pairing_matrix<C: Coefficient>(f: &CorrespondenceElement<C>) -> [[C; 3]; 3] {
    std::array::from_fn(|l| {
        std::array::from_fn(|k| f.coefficient((1 << SIGMA[l]) | (1 << SIGMA_DUAL[k])))
    })
}

fn det3<C: Coefficient>(m: &[[C; 3]; 3]) -> C {
    let t = |a: usize, b: usize, c: usize| m[0][a].clone() * m[1][b].clone() * m[2][c].clone();
    t(0, 1, 2) + t(1, 2, 0) + t(2, 0, 1) - t(2, 1, 0) - t(0, 2, 1) - t(1, 0, 2)
}

/// Nondegeneracy of F on Ker dq ⊗ Ker dq′, decided exactly for exact C.
pub fn verify_pairing_nondegeneracy<C: Coefficient>(f: &CorrespondenceElement<C>) -> PairingCheck {
    let m = pairing_matrix(f);
    let det = det3(&m);
    PairingCheck {
        matrix: std::array::from_fn(|l| std::array::from_fn(|k| m[l][k].to_f64())),
        determinant: det.to_f64(),
        nondegenerate: !det.is_zero(),
    }
}

/// Exact duality data of a scenario from its periods and t².
pub fn rational_data(t_squared: Rational64, periods: &[[i64; 6]; 3]) -> DualData<Rational64> {
    DualData::from_periods(t_squared, periods)
}

/// The dual ansatz scenario: t′ = 1/t, periods −t²n, same instantons and u.
/// `t_squared` decides integrality exactly when it is rational.
pub fn dual_scenario(s: &Scenario, t_squared: Scalar) -> Result<Scenario> {
    if (t_squared.to_f64() - s.t * s.t).abs() > 1e-12 * (1.0 + s.t * s.t) {
        return Err(Error::Domain(format!(
            "t^2 = {t_squared} does not match the scenario's t = {}",
            s.t
        )));
    }
    let periods = s.bundle.periods();
    let mut dual = [[0i64; 6]; 3];
    for j in 0..3 {
        dual[j] = crate::lattice::scaled_periods(t_squared, &periods[j])
            .ok_or(Error::NotDualizable { index: j + 1 })?
            .map(|x| -x);
    }
    let bundle = TorusBundle::from_periods(s.torus(), dual)?;
    Scenario::new(bundle, 1.0 / s.t, s.instantons.clone(), s.u_mode.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{balanced_scenario, verify_solution, UNIT_BETA};
    use crate::fibered::Torus4;
    use proptest::prelude::*;

    type Q = Rational64;

    fn r(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn d_sigma_wedge_sigma_dual() {
        let pair = dualize(&rational_data(r(2, 1), &UNIT_BETA)).unwrap();
        let rhs = pair.rhs().unwrap();
        // −d(σ₁∧σ′₁) = −β₁∧σ′₁ + σ₁∧β′₁
        assert_eq!(rhs.coefficient((1 << 0) | (1 << 1) | (1 << SIGMA_DUAL[0])), r(-1, 1));
        assert_eq!(rhs.coefficient((1 << 0) | (1 << 1) | (1 << SIGMA[0])), r(-2, 1));
    }

    #[test]
    fn identity_is_exact() {
        for t2 in [r(1, 1), r(2, 1), r(1, 2), r(3, 1)] {
            let periods = [[2, -2, 0, 0, 2, -2], [0, 0, 4, -4, 0, 0], [6, -6, 2, -2, 0, 0]];
            let pair = dualize(&rational_data(t2, &periods)).unwrap();
            let check = verify_duality_identity(&pair).unwrap();
            assert!(check.exact_zero && check.symbolic_terms_cancel);
            assert_eq!(check.residual, 0.0);
        }
    }

    #[test]
    fn zero_curvature_both_sides_vanish() {
        let pair = dualize(&rational_data(r(5, 3), &[[0; 6]; 3])).unwrap();
        assert!(pair.rhs().unwrap().is_zero());
        assert!(pair.lhs().is_zero());
    }

    #[test]
    fn dual_data_arithmetic() {
        let pair = dualize(&rational_data(r(2, 1), &UNIT_BETA)).unwrap();
        assert_eq!(pair.dual.t_squared, r(1, 2));
        assert_eq!(pair.dual.beta[0][0], r(-2, 1));
        let back = dualize(&pair.dual).unwrap();
        assert_eq!(back.dual, pair.original);
        let t1 = dualize(&rational_data(r(1, 1), &UNIT_BETA)).unwrap();
        assert_eq!(t1.dual.beta[2][5], r(1, 1));
    }

    #[test]
    fn integrality_gate() {
        match dualize(&rational_data(r(1, 3), &UNIT_BETA)) {
            Err(Error::NotDualizable { index }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        let periods = [[3, -3, 0, 0, 0, 0], [0, 0, 1, -1, 0, 0], [0; 6]];
        assert!(matches!(
            dualize(&rational_data(r(1, 3), &periods)),
            Err(Error::NotDualizable { index: 2 })
        ));
    }

    #[test]
    fn pairing_is_minus_identity() {
        let pair = dualize(&rational_data(r(1, 1), &UNIT_BETA)).unwrap();
        let check = verify_pairing_nondegeneracy(&pair.pairing_form());
        assert_eq!(check.matrix, [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        assert_eq!(check.determinant, -1.0);
        assert!(check.nondegenerate);
        assert!(!verify_pairing_nondegeneracy(&CorrespondenceElement::<Q>::zero()).nondegenerate);
        // σ′ labels permuted by a 3-cycle
        let mut f = CorrespondenceElement::<Q>::zero();
        for j in 0..3 {
            f = &f - &CorrespondenceElement::monomial(r(1, 1), &[SIGMA[j], SIGMA_DUAL[(j + 1) % 3]]);
        }
        let c = verify_pairing_nondegeneracy(&f);
        assert!(c.nondegenerate);
        assert_eq!(c.determinant.abs(), 1.0);
    }

    #[test]
    fn pullbacks_fix_base_generators() {
        for a in BASE {
            let g = CorrespondenceElement::<Q>::generator(a);
            assert_eq!(g.relabel_fiber_to_dual(), g);
        }
        let s = CorrespondenceElement::<Q>::generator(SIGMA[1]);
        assert_eq!(s.relabel_fiber_to_dual(), CorrespondenceElement::generator(SIGMA_DUAL[1]));
    }

    #[test]
    fn float_mode_agrees() {
        let pair = dualize(&DualData::<f64>::from_periods(2.0, &UNIT_BETA)).unwrap();
        assert!(verify_duality_identity(&pair).unwrap().residual < 1e-15);
        assert!(dualize(&DualData::<f64>::from_periods(1.0 / 3.0, &UNIT_BETA)).is_err());
    }

    #[test]
    fn dual_scenario_is_balanced_too() {
        let torus = Torus4::unit(4).unwrap();
        // t² = 2 with ΣQ = −6 needs α dividing 24: α = −2 gives c₂ = 12
        let s = balanced_scenario(&torus, UNIT_BETA, 2f64.sqrt(), -2.0).unwrap();
        let d = dual_scenario(&s, Scalar::from_int(2)).unwrap();
        assert!((d.t - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.bundle.periods()[0], [-2, 2, 0, 0, 0, 0]);
        for rep in [verify_solution(&s).unwrap(), verify_solution(&d).unwrap()] {
            for (name, v) in rep.system_residuals() {
                assert!(v < 1e-9, "{name} = {v}");
            }
        }
        assert!(matches!(dual_scenario(&s, Scalar::from_int(3)), Err(Error::Domain(_))));
    }

    fn elem_strategy() -> impl Strategy<Value = CorrespondenceElement<Q>> {
        prop::collection::vec((0u16..1024, -3i64..=3), 0..8).prop_map(|terms| {
            let mut e = CorrespondenceElement::zero();
            for (m, c) in terms {
                e.insert(m, Q::from_integer(c));
            }
            e
        })
    }

    proptest! {
        #[test]
        fn d_squared_is_zero(e in elem_strategy(), n in prop::array::uniform6(-2i64..=2), t2 in 1i64..4) {
            let periods = [n, [n[1], n[0], 0, 0, 0, 0], [0, 0, 0, 0, n[2], -n[2]]];
            let pair = dualize(&rational_data(Q::from_integer(t2), &periods)).unwrap();
            let st = pair.structure();
            let dd = e.d(&st).unwrap().d(&st).unwrap();
            prop_assert!(dd.is_zero());
        }

        #[test]
        fn dualize_is_an_involution(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3, num in 1i64..4) {
            let periods = [[a, -a, 0, 0, 0, 0], [0, 0, b, -b, 0, 0], [0, 0, 0, 0, c, -c]];
            let once = dualize(&rational_data(Q::from_integer(num), &periods)).unwrap();
            let twice = dualize(&once.dual).unwrap();
            prop_assert_eq!(twice.dual, once.original);
        }
    }
}
