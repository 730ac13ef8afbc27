//! The warped ansatz φ = t³σ₁₂₃ − t e^u Σ σ_i∧ω_i on a T³-bundle over flat
//! T⁴, its torsion H, abelian instanton data, and the residuals of the four
//! equations dφ∧φ = 0, d*φ = du∧*φ, dH = ⟨F∧F⟩, F∧*φ = 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{metric_from_positive3form, AlternatingForm, MetricData};
use crate::fibered::{
    form_from_periods, hyperkahler_form, is_asd, poisson_solve, BaseField, FiberedForm, Torus4,
    TorusBundle,
};
use crate::lattice::pair_q;

/// How the conformal factor u (h = e^u) is obtained.
#[derive(Clone, Debug)]
pub enum UMode {
    Constant(f64),
    /// Solve the Bianchi scalar equation with mean(h) = h0.
    Solved { h0: f64 },
    Prescribed(BaseField),
}

/// Abelian instanton data: constant closed ASD curvatures F_i with signed
/// weights, paired as ⟨F∧F⟩ = (α/4) Σ w_i F_i∧F_i.
#[derive(Clone, Debug)]
pub struct InstantonData {
    curvatures: Vec<BaseField>,
    periods: Vec<[i64; 6]>,
    weights: Vec<f64>,
    alpha: f64,
}

impl InstantonData {
    /// No bundle curvature.
    pub fn none(alpha: f64) -> Result<Self> {
        Self::from_periods(&Torus4::unit(2)?, &[], &[], alpha)
    }

    /// Curvatures with the given integer periods; each must be ASD.
    pub fn from_periods(
        torus: &Torus4,
        periods: &[[i64; 6]],
        weights: &[f64],
        alpha: f64,
    ) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::Domain("alpha must be a nonzero real".into()));
        }
        if periods.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} curvatures but {} weights",
                periods.len(),
                weights.len()
            )));
        }
        let mut curvatures = Vec::with_capacity(periods.len());
        for (i, p) in periods.iter().enumerate() {
            let f = form_from_periods(torus.sides(), p);
            if !is_asd(&f, 1e-10 * (1.0 + f.max_abs())) {
                return Err(Error::Domain(format!(
                    "curvature {i} with periods {p:?} is not anti-self-dual"
                )));
            }
            curvatures.push(BaseField::constant(torus, &f));
        }
        Ok(Self {
            curvatures,
            periods: periods.to_vec(),
            weights: weights.to_vec(),
            alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn curvatures(&self) -> &[BaseField] {
        &self.curvatures
    }

    pub fn periods(&self) -> &[[i64; 6]] {
        &self.periods
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ⟨F∧F⟩ as a base 4-form field.
    pub fn pairing(&self, torus: &Torus4) -> BaseField {
        let mut out = BaseField::zeros(torus, 4);
        for (f, w) in self.curvatures.iter().zip(&self.weights) {
            let ff = f.wedge(f).expect("2 + 2 = 4");
            out = &out + &(&ff * (self.alpha / 4.0 * w));
        }
        out
    }

    /// Largest closedness / self-duality defect over the curvatures.
    pub fn asd_defect(&self) -> f64 {
        self.curvatures
            .iter()
            .map(|f| (&f.star() + f).max_abs().max(f.d().max_abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub bundle: TorusBundle,
    pub t: f64,
    pub instantons: InstantonData,
    pub u_mode: UMode,
}

impl Scenario {
    pub fn new(bundle: TorusBundle, t: f64, instantons: InstantonData, u_mode: UMode) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("t = {t} must be positive")));
        }
        if let UMode::Prescribed(u) = &u_mode {
            if u.degree() != 0 || u.torus() != bundle.torus() {
                return Err(Error::Domain("prescribed u must be a scalar field on the base grid".into()));
            }
        }
        Ok(Self {
            bundle,
            t,
            instantons,
            u_mode,
        })
    }

    pub fn torus(&self) -> &Torus4 {
        self.bundle.torus()
    }

    /// Source ρ = t²Σ|β_j|² + *₄⟨F∧F⟩ of Δh = ρ.
    pub fn bianchi_source(&self) -> BaseField {
        let torus = self.torus();
        let fibration = BaseField::scalar_const(torus, self.t * self.t * self.bundle.beta_norm_sq());
        let pairing = self.instantons.pairing(torus);
        if self.instantons.curvatures.is_empty() {
            return fibration;
        }
        &fibration + &pairing.star()
    }

    /// The conformal factor u on the grid.
    pub fn resolve_u(&self) -> Result<BaseField> {
        let torus = self.torus();
        match &self.u_mode {
            UMode::Constant(c) => Ok(BaseField::scalar_const(torus, *c)),
            UMode::Prescribed(u) => Ok(u.clone()),
            UMode::Solved { h0 } => {
                let sol = poisson_solve(&self.bianchi_source(), *h0, 1e-10)?;
                if sol.min <= 0.0 {
                    return Err(Error::Domain(format!(
                        "solved h has minimum {:.3e}; raise h0 to keep h = e^u positive",
                        sol.min
                    )));
                }
                Ok(sol.h.map(f64::ln))
            }
        }
    }
}

/// φ = t³σ₁₂₃ − t e^u Σ σ_i∧ω_i.
pub fn build_phi(torus: &Torus4, u: &BaseField, t: f64) -> FiberedForm {
    let eu = u.exp();
    let mut phi = FiberedForm::term(&[0, 1, 2], BaseField::scalar_const(torus, t.powi(3)));
    for i in 0..3 {
        let w = BaseField::constant(torus, &hyperkahler_form(i)).scale_by(&eu);
        phi = &phi - &FiberedForm::term(&[i], &w * t);
    }
    phi
}

/// *φ = e^{2u}ω₁²/2 − t²e^u(σ₂₃∧ω₁ + σ₃₁∧ω₂ + σ₁₂∧ω₃).
pub fn star_phi_closed_form(torus: &Torus4, u: &BaseField, t: f64) -> FiberedForm {
    let w1 = BaseField::constant(torus, &hyperkahler_form(0));
    let top = &w1.wedge(&w1).expect("4-form").scale_by(&u.map(|x| (2.0 * x).exp())) * 0.5;
    let eu = u.exp();
    let mut out = FiberedForm::base(top);
    for (i, pair) in [[1, 2], [2, 0], [0, 1]].iter().enumerate() {
        let w = BaseField::constant(torus, &hyperkahler_form(i)).scale_by(&eu);
        out = &out - &FiberedForm::term(pair, &w * (t * t));
    }
    out
}

/// H = t² Σ β_j∧σ_j − ½ e^u ι_{∇u} ω₁².
pub fn torsion_closed_form(bundle: &TorusBundle, u: &BaseField, t: f64) -> FiberedForm {
    let torus = bundle.torus();
    let mut h = FiberedForm::zero(torus, 3);
    for j in 0..3 {
        h = &h + &FiberedForm::term(&[j], BaseField::constant(torus, bundle.beta(j)));
    }
    h = &h * (t * t);
    let w1 = BaseField::constant(torus, &hyperkahler_form(0));
    let dil = w1
        .wedge(&w1)
        .and_then(|w| w.interior(&u.d()))
        .expect("4-form contracted with a 1-form");
    &h - &FiberedForm::base(&dil.scale_by(&u.exp()) * 0.5)
}

/// All fields of a scenario needed by the residuals.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub u: BaseField,
    pub phi: FiberedForm,
    pub star_phi: FiberedForm,
    pub dphi: FiberedForm,
    pub dstar_phi: FiberedForm,
    /// H = −*(dφ − du∧φ).
    pub torsion: FiberedForm,
    pub dtorsion: FiberedForm,
    /// π*⟨F∧F⟩.
    pub pairing: FiberedForm,
}

impl Evaluation {
    pub fn new(s: &Scenario) -> Result<Self> {
        let u = s.resolve_u()?;
        Self::with_u(s, u)
    }

    pub fn with_u(s: &Scenario, u: BaseField) -> Result<Self> {
        let torus = s.torus();
        let bundle = &s.bundle;
        let phi = build_phi(torus, &u, s.t);
        let star_phi = phi.star(&u, s.t)?;
        let dphi = phi.d(bundle);
        let dstar_phi = star_phi.d(bundle);
        let du = FiberedForm::base(u.d());
        let torsion = -&(&dphi - &du.wedge(&phi)?).star(&u, s.t)?;
        let dtorsion = torsion.d(bundle);
        let pairing = FiberedForm::base(s.instantons.pairing(torus));
        Ok(Self {
            u,
            phi,
            star_phi,
            dphi,
            dstar_phi,
            torsion,
            dtorsion,
            pairing,
        })
    }

    /// ‖dφ∧φ‖.
    pub fn closure_residual(&self) -> f64 {
        self.dphi.wedge(&self.phi).expect("4 + 3 = 7").rms()
    }

    /// ‖d*φ − du∧*φ‖.
    pub fn coclosure_residual(&self) -> f64 {
        let du = FiberedForm::base(self.u.d());
        (&self.dstar_phi - &du.wedge(&self.star_phi).expect("1 + 4")).rms()
    }

    /// ‖dH − ⟨F∧F⟩‖.
    pub fn bianchi_residual_norm(&self) -> f64 {
        (&self.dtorsion - &self.pairing).rms()
    }

    /// max_i ‖F_i ∧ *φ‖.
    pub fn instanton_residual(&self, s: &Scenario) -> f64 {
        s.instantons
            .curvatures()
            .iter()
            .map(|f| FiberedForm::base(f.clone()).wedge(&self.star_phi).expect("2 + 4").rms())
            .fold(0.0, f64::max)
    }

    /// *₄ of the base part of dH.
    pub fn star4_dtorsion(&self) -> BaseField {
        match self.dtorsion.component(0) {
            Some(f) => f.star(),
            None => BaseField::zeros(self.phi.torus(), 0),
        }
    }
}

/// Δ(e^u) − t²Σ|β_j|² − *₄⟨F∧F⟩ on the grid.
pub fn bianchi_residual(s: &Scenario, u: &BaseField) -> BaseField {
    &u.exp().laplacian() - &s.bianchi_source()
}

/// Residual norms of one scenario. Norms are grid RMS values of the
/// Euclidean coefficient norm in the (σ, dx) coframe.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SolutionReport {
    pub t: f64,
    pub grid: usize,
    /// ‖dφ∧φ‖.
    pub closure: f64,
    /// ‖d*φ − du∧*φ‖.
    pub conformal_coclosure: f64,
    /// ‖dH − ⟨F∧F⟩‖.
    pub bianchi: f64,
    /// max_i ‖F_i∧*φ‖.
    pub instanton: f64,
    /// Pipeline H against t²Σβ_j∧σ_j − ½e^u ι_{∇u}ω₁².
    pub torsion_closed_form: f64,
    /// ‖*₄dH − (Δe^u − t²Σ|β_j|²)‖.
    pub bianchi_scalar_reduction: f64,
    /// ‖fibre parts of dH‖; zero for the ansatz.
    pub dtorsion_fiber_part: f64,
    pub torsion_norm: f64,
    pub phi_norm: f64,
    /// ∫ of the Bianchi source t²Σ|β|² + *₄⟨F∧F⟩ over T⁴.
    pub source_integral: f64,
    pub min_h: f64,
    /// Largest closedness/ASD defect of the instanton curvatures.
    pub curvature_asd_defect: f64,
}

impl SolutionReport {
    /// The four system residuals with names.
    pub fn system_residuals(&self) -> [(&'static str, f64); 4] {
        [
            ("closure", self.closure),
            ("conformal_coclosure", self.conformal_coclosure),
            ("bianchi", self.bianchi),
            ("instanton", self.instanton),
        ]
    }
}

pub fn verify_solution(s: &Scenario) -> Result<SolutionReport> {
    let e = Evaluation::new(s)?;
    Ok(report_from(s, &e))
}

pub fn report_from(s: &Scenario, e: &Evaluation) -> SolutionReport {
    let torus = s.torus();
    let closed = torsion_closed_form(&s.bundle, &e.u, s.t);
    let fib = BaseField::scalar_const(torus, s.t * s.t * s.bundle.beta_norm_sq());
    let reduction = &e.star4_dtorsion() - &(&e.u.exp().laplacian() - &fib);
    let fiber_part = e
        .dtorsion
        .components()
        .filter(|(m, _)| *m != 0)
        .map(|(_, f)| f.rms().powi(2))
        .sum::<f64>()
        .sqrt();
    SolutionReport {
        t: s.t,
        grid: torus.n(),
        closure: e.closure_residual(),
        conformal_coclosure: e.coclosure_residual(),
        bianchi: e.bianchi_residual_norm(),
        instanton: e.instanton_residual(s),
        torsion_closed_form: (&e.torsion - &closed).rms(),
        bianchi_scalar_reduction: reduction.rms(),
        dtorsion_fiber_part: fiber_part,
        torsion_norm: e.torsion.rms(),
        phi_norm: e.phi.rms(),
        source_integral: s.bianchi_source().integral(),
        min_h: e.u.exp().min_value(),
        curvature_asd_defect: s.instantons.asd_defect(),
    }
}

/// Pointwise metric of φ at a grid point against diag(t², t², t², e^u ×4).
pub fn pointwise_metric_defect(e: &Evaluation, t: f64, idx: usize) -> Result<f64> {
    let g = metric_from_positive3form(&e.phi.at(idx))?;
    let eu = e.u.value(idx).exp();
    let expected = MetricData::diagonal(&[t * t, t * t, t * t, eu, eu, eu, eu])?;
    Ok((g.gram() - expected.gram()).amax())
}

/// Unit ASD class used for balancing: ∫ over T_01 is 2π, over T_23 is −2π.
pub const UNIT_ASD_PERIODS: [i64; 6] = [1, -1, 0, 0, 0, 0];

/// Instanton charge c₂ = (2t²/α) Σ_j Q(β_j/2π) for a bundle and coupling.
pub fn instanton_charge(bundle: &TorusBundle, t: f64, alpha: f64) -> f64 {
    let q: i64 = bundle.periods().iter().map(pair_q).sum();
    2.0 * t * t / alpha * q as f64
}

/// A scenario with constant u solving all four equations: c₂/2 pairs of unit
/// ASD curvatures ±F with weights −1, so (α/4)Σw_iF_i∧F_i cancels t²Σ|β|²
/// pointwise.
///
/// Fails with [`Error::Balance`] when c₂ is not a nonnegative even integer
/// (to 1e-9); the error carries ∫t²Σ|β|² and the integral of *₄⟨F∧F⟩ for the
/// nearest admissible candidate (⌊c₂/2⌋ pairs, none if c₂ < 0).
pub fn balanced_scenario(torus: &Torus4, beta_periods: [[i64; 6]; 3], t: f64, alpha: f64) -> Result<Scenario> {
    let bundle = TorusBundle::from_periods(torus, beta_periods)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let c2 = instanton_charge(&bundle, t, alpha);
    let pairs_exact = c2 / 2.0;
    let pairs = pairs_exact.round();
    let realizable = (pairs_exact - pairs).abs() <= 1e-9 * (1.0 + pairs_exact.abs()) && pairs >= 0.0;
    let candidate_pairs = if realizable { pairs } else { pairs_exact.floor().max(0.0) } as usize;

    let mut periods = Vec::with_capacity(2 * candidate_pairs);
    for _ in 0..candidate_pairs {
        periods.push(UNIT_ASD_PERIODS);
        periods.push(UNIT_ASD_PERIODS.map(|x| -x));
    }
    let weights = vec![-1.0; periods.len()];
    let instantons = InstantonData::from_periods(torus, &periods, &weights, alpha)?;
    let scenario = Scenario::new(bundle, t, instantons, UMode::Constant(0.0))?;
    if realizable {
        return Ok(scenario);
    }
    let fibration = t * t * scenario.bundle.beta_norm_sq() * torus.volume();
    let bundle_integral = if scenario.instantons.curvatures().is_empty() {
        0.0
    } else {
        scenario.instantons.pairing(torus).star().integral()
    };
    let reason = if c2 < 0.0 {
        format!("instanton charge {c2} is negative (sign of alpha incompatible with ASD curvature)")
    } else {
        format!("instanton charge {c2} is not an even integer")
    };
    Err(Error::Balance {
        reason,
        fibration,
        bundle: bundle_integral,
    })
}

/// Unit-period ASD triple with Σ_j Q = −6.
pub const UNIT_BETA: [[i64; 6]; 3] = [
    [1, -1, 0, 0, 0, 0],
    [0, 0, 1, -1, 0, 0],
    [0, 0, 0, 0, 1, -1],
];

/// Constant curvature 2-form of an integral class (exposed for oracles).
pub fn constant_curvature(torus: &Torus4, periods: &[i64; 6]) -> AlternatingForm {
    form_from_periods(torus.sides(), periods)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2::G2Point;
    use crate::sampling::{field_from_modes, random_low_modes, rng_from_seed};

    fn low_u(torus: &Torus4, seed: u64, amp: f64) -> BaseField {
        let mut rng = rng_from_seed(seed);
        field_from_modes(torus, &random_low_modes(&mut rng, 4, amp))
    }

    #[test]
    fn metric_and_volume_of_phi() {
        let torus = Torus4::unit(4).unwrap();
        let u = low_u(&torus, 1, 0.3);
        for t in [0.5, 1.0, 2.0] {
            let bundle = TorusBundle::trivial(&torus);
            let s = Scenario::new(bundle, t, InstantonData::none(-1.0).unwrap(), UMode::Prescribed(u.clone())).unwrap();
            let e = Evaluation::with_u(&s, u.clone()).unwrap();
            for idx in [0, 77, 255] {
                assert!(pointwise_metric_defect(&e, t, idx).unwrap() < 1e-11);
                let vol = e.phi.at(idx).wedge(&e.star_phi.at(idx)).unwrap().top_coefficient() / 7.0;
                let expected = t.powi(3) * (2.0 * u.value(idx)).exp();
                assert!((vol - expected).abs() < 1e-11 * expected);
            }
        }
    }

    #[test]
    fn identity_metric_at_origin_values() {
        let torus = Torus4::unit(2).unwrap();
        let u = BaseField::scalar_const(&torus, 0.0);
        let phi = build_phi(&torus, &u, 1.0);
        let p = G2Point::new(phi.at(0)).unwrap();
        assert!((p.metric().gram() - nalgebra::DMatrix::<f64>::identity(7, 7)).amax() < 1e-12);
    }

    #[test]
    fn star_phi_matches_closed_form() {
        let torus = Torus4::unit(8).unwrap();
        let u = low_u(&torus, 2, 0.3);
        let phi = build_phi(&torus, &u, 1.3);
        let diff = &phi.star(&u, 1.3).unwrap() - &star_phi_closed_form(&torus, &u, 1.3);
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn hand_computed_dphi() {
        // dφ = t³(β₁σ₂₃ + β₂σ₃₁ + β₃σ₁₂) − t e^u du∧Σσ_i∧ω_i
        let torus = Torus4::unit(16).unwrap();
        let bundle = TorusBundle::from_periods(&torus, UNIT_BETA).unwrap();
        let u = low_u(&torus, 3, 0.1);
        let t = 0.7;
        let dphi = build_phi(&torus, &u, t).d(&bundle);
        let b = |j| BaseField::constant(&torus, bundle.beta(j));
        let mut expected = &(&FiberedForm::term(&[1, 2], b(0)) + &FiberedForm::term(&[2, 0], b(1)))
            + &FiberedForm::term(&[0, 1], b(2));
        expected = &expected * t.powi(3);
        let du = FiberedForm::base(u.d());
        for i in 0..3 {
            let w = FiberedForm::term(&[i], BaseField::constant(&torus, &hyperkahler_form(i)).scale_by(&u.exp()));
            expected = &expected - &(&du.wedge(&w).unwrap() * t);
        }
        assert!((&dphi - &expected).max_abs() < 1e-9);
    }

    #[test]
    fn universal_identities_and_torsion_cross_checks() {
        let torus = Torus4::unit(16).unwrap();
        let bundle = TorusBundle::from_periods(&torus, UNIT_BETA).unwrap();
        for (seed, t) in [(10, 0.5), (11, 1.0), (12, 2.0)] {
            let u = low_u(&torus, seed, 0.3);
            let s = Scenario::new(bundle.clone(), t, InstantonData::none(-1.0).unwrap(), UMode::Prescribed(u)).unwrap();
            let r = verify_solution(&s).unwrap();
            assert!(r.closure < 1e-9, "{r:?}");
            assert!(r.conformal_coclosure < 1e-9, "{r:?}");
            assert!(r.torsion_closed_form < 1e-9, "{r:?}");
            assert!(r.bianchi_scalar_reduction < 1e-9, "{r:?}");
            assert!(r.dtorsion_fiber_part < 1e-9 * r.torsion_norm, "{r:?}");
        }
    }

    #[test]
    fn constant_u_torsion_is_fibration_term() {
        let torus = Torus4::unit(4).unwrap();
        let bundle = TorusBundle::from_periods(&torus, UNIT_BETA).unwrap();
        let s = Scenario::new(bundle.clone(), 1.5, InstantonData::none(-1.0).unwrap(), UMode::Constant(0.2)).unwrap();
        let e = Evaluation::new(&s).unwrap();
        let mut expected = FiberedForm::zero(&torus, 3);
        for j in 0..3 {
            expected = &expected + &FiberedForm::term(&[j], BaseField::constant(&torus, bundle.beta(j)));
        }
        assert!((&e.torsion - &(&expected * 2.25)).max_abs() < 1e-12);
    }

    #[test]
    fn torsion_free_product() {
        let torus = Torus4::unit(4).unwrap();
        let s = Scenario::new(TorusBundle::trivial(&torus), 1.0, InstantonData::none(1.0).unwrap(), UMode::Constant(0.0)).unwrap();
        let e = Evaluation::new(&s).unwrap();
        let r = report_from(&s, &e);
        for (_, v) in r.system_residuals() {
            assert!(v < 1e-14);
        }
        assert!(r.torsion_norm < 1e-14);
        let p = G2Point::new(e.phi.at(0)).unwrap();
        let tc = p.torsion_components(&e.dphi.at(0), &e.dstar_phi.at(0)).unwrap();
        assert!(tc.magnitude(p.metric()) < 1e-14);
    }

    #[test]
    fn torsion_components_on_ansatz() {
        let torus = Torus4::unit(16).unwrap();
        let bundle = TorusBundle::from_periods(&torus, UNIT_BETA).unwrap();
        let u = low_u(&torus, 5, 0.3);
        let s = Scenario::new(bundle, 1.2, InstantonData::none(-1.0).unwrap(), UMode::Prescribed(u.clone())).unwrap();
        let e = Evaluation::new(&s).unwrap();
        let du = u.d();
        for idx in [0, 100, 4000] {
            let p = G2Point::new(e.phi.at(idx)).unwrap();
            let tc = p.torsion_components(&e.dphi.at(idx), &e.dstar_phi.at(idx)).unwrap();
            assert!(tc.tau1.abs() < 1e-10);
            assert!(tc.tau2.max_abs() < 1e-10);
            let mut expected = vec![0.0; 7];
            for a in 0..4 {
                expected[3 + a] = du.grid(a)[idx] / 4.0;
            }
            assert!((&tc.tau4 - &AlternatingForm::covector(&expected)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn balanced_scenario_is_exact() {
        let torus = Torus4::unit(4).unwrap();
        let s = balanced_scenario(&torus, UNIT_BETA, 1.0, -1.0).unwrap();
        assert_eq!(s.instantons.curvatures().len(), 12);
        let r = verify_solution(&s).unwrap();
        for (name, v) in r.system_residuals() {
            assert!(v < 1e-11, "{name} = {v}");
        }
        assert!(r.torsion_norm > 1.0);
        assert!(bianchi_residual(&s, &BaseField::scalar_const(&torus, 0.0)).max_abs() < 1e-11);
    }

    #[test]
    fn balance_failures() {
        let torus = Torus4::unit(4).unwrap();
        match balanced_scenario(&torus, UNIT_BETA, 1.0, 1.0) {
            Err(Error::Balance { fibration, bundle, .. }) => {
                assert!((fibration - 6.0 * 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
                assert_eq!(bundle, 0.0);
            }
            other => panic!("{other:?}"),
        }
        // c₂ = 12/5 is not an integer
        assert!(matches!(balanced_scenario(&torus, UNIT_BETA, 1.0, -5.0), Err(Error::Balance { .. })));
        let s = balanced_scenario(&torus, [[0; 6]; 3], 1.0, 1.0).unwrap();
        assert!(s.instantons.curvatures().is_empty());
    }

    #[test]
    fn solved_mode_reproduces_constant() {
        let torus = Torus4::unit(4).unwrap();
        let mut s = balanced_scenario(&torus, UNIT_BETA, 1.0, -1.0).unwrap();
        s.u_mode = UMode::Solved { h0: 2.0 };
        let u = s.resolve_u().unwrap();
        assert!((u.mean() - 2f64.ln()).abs() < 1e-12);
        let r = verify_solution(&s).unwrap();
        assert!(r.bianchi < 1e-9);
    }

    #[test]
    fn bundle_free_rigidity() {
        let torus = Torus4::unit(4).unwrap();
        let bundle = TorusBundle::from_periods(&torus, UNIT_BETA).unwrap();
        let s = Scenario::new(bundle.clone(), 2.0, InstantonData::none(-1.0).unwrap(), UMode::Constant(0.0)).unwrap();
        let res = bianchi_residual(&s, &s.resolve_u().unwrap());
        let expected = -4.0 * bundle.beta_norm_sq();
        assert!(res.grid(0).iter().all(|x| (x - expected).abs() < 1e-10));
        assert!(matches!(
            Scenario::new(bundle, 2.0, InstantonData::none(-1.0).unwrap(), UMode::Solved { h0: 1.0 }).unwrap().resolve_u(),
            Err(Error::ObstructedSource { .. })
        ));
    }
}
