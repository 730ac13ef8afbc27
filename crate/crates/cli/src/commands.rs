use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use nalgebra::DMatrix;
use num_rational::Rational64;
use serde::Serialize;

use g2flux_core::ansatz::{report_from, Evaluation, Scenario, UMode};
use g2flux_core::fibered::write_field;
use g2flux_core::g2::G2Point;
use g2flux_core::lattice::{check_constraints, pair_q, tdual_integrality, IntersectionLattice};
use g2flux_core::sampling::{random_form, random_positive_3form, random_unit_vector, rng_from_seed};
use g2flux_core::symbols::{
    check_exactness, symbol_instanton_complex, symbol_lm, symbol_pm, verify_bryant_symbol_identities,
};
use g2flux_core::tduality::{
    dual_scenario, dualize, pairing_matrix, verify_duality_identity, verify_pairing_nondegeneracy, Coefficient,
    DualData,
};
use g2flux_core::{Error, Scalar};

use crate::config::{ConfigError, ScenarioConfig};
use crate::report::Report;

/// Base tolerances, multiplied by `--tol-scale`.
const TOL_ALGEBRA: f64 = 1e-10;
const TOL_SYMBOL: f64 = 1e-11;
const TOL_EXACTNESS: f64 = 1e-8;
const TOL_SYSTEM: f64 = 1e-9;
const TOL_FLOAT_DUALITY: f64 = 1e-12;

/// Random G₂ points stay within this distance of the reference form.
const POINT_SPREAD: f64 = 0.2;

pub fn verify_algebra(report: &mut Report, samples: usize, seed: u64) -> Result<(), Error> {
    let mut rng = rng_from_seed(seed);
    let (mut ranks, mut proj, mut pi14, mut jspec) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut seven, mut fourteen, mut pattern) = (0.0f64, 0.0f64, 0.0f64);
    let mut unit_min = f64::INFINITY;
    let max_dev = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax();
    for _ in 0..samples {
        let p = G2Point::new(random_positive_3form(&mut rng, POINT_SPREAD))?;
        let m = p.metric();
        let (p7, p14) = (p.pi7_two().clone(), p.pi14_two());
        let (p1, q7, p27) = (p.pi1_three().clone(), p.pi7_three().clone(), p.pi27_three());
        for (pm, r) in [(&p7, 7.0), (&p14, 14.0), (&p1, 1.0), (&q7, 7.0), (&p27, 27.0)] {
            ranks = ranks.max((pm.trace() - r).abs());
            proj = proj.max(max_dev(&(pm * pm), pm));
        }
        proj = proj
            .max((&p7 * &p14).amax())
            .max((&p1 * &q7).amax())
            .max((&q7 * &p27).amax())
            .max(max_dev(&(&(&p1 + &q7) + &p27), &DMatrix::identity(35, 35)));

        let beta = random_form(&mut rng, 7, 2);
        let (_, b14) = p.project_two_form(&beta)?;
        let s = p.phi().wedge(&beta)?.hodge_star(m)?;
        pi14 = pi14.max((&(&(&beta * (2.0 / 3.0)) - &(&s * (1.0 / 3.0))) - &b14).max_abs());

        let (_, g7, g27) = p.project_three_form(&random_form(&mut rng, 7, 3))?;
        jspec = jspec
            .max((&p.j_operator(p.phi())? - &(p.phi() * (4.0 / 3.0))).max_abs())
            .max((&p.j_operator(&g7)? - &g7).max_abs())
            .max((&p.j_operator(&g27)? + &g27).max_abs());

        let v = random_unit_vector(&mut rng, 7);
        let r = verify_bryant_symbol_identities(&p, &v, &beta)?;
        seven = seven.max(r.seven_part);
        fourteen = fourteen.max(r.pi7_of_fourteen_part);
        pattern = pattern.max(r.laplacian_pattern);
        unit_min = unit_min.min(r.laplacian_pattern_unit_coefficient);
    }
    report.residual("projector ranks", "tr pi = 7, 14 on 2-forms; 1, 7, 27 on 3-forms", ranks, TOL_ALGEBRA);
    report.residual("projector algebra", "pi^2 = pi, pi_a pi_b = 0, sum pi = 1", proj, TOL_ALGEBRA);
    report.residual("pi14 formula", "pi14(b) = (2b - *(phi ^ b)) / 3", pi14, TOL_ALGEBRA);
    report.residual("J spectrum", "J = 4/3, 1, -1 on 3-forms of type 1, 7, 27", jspec, TOL_ALGEBRA);
    report.residual("dJd on type 7", "v ^ *J(v ^ b7) = 0", seven, TOL_SYMBOL);
    report.residual("dJd on type 14", "pi7(v ^ *J(v ^ b14)) = 0", fourteen, TOL_SYMBOL);
    report.residual(
        "dJd Laplacian pattern",
        "-*(v ^ *J(v ^ b14)) = |v|^2 b14 - (3/2) pi14(v ^ i_v b14)",
        pattern,
        TOL_ALGEBRA,
    );
    report.detail("samples", samples);
    report.detail("unit_coefficient_pattern_min_defect", unit_min);
    Ok(())
}

#[derive(Serialize)]
struct KernelDims {
    complex: &'static str,
    rank_in: usize,
    dim_ker_out: usize,
    constant: bool,
}

pub fn ellipticity(report: &mut Report, samples: usize, seed: u64) -> Result<(), Error> {
    const POINTS: usize = 5;
    let mut rng = rng_from_seed(seed);
    let mut containment = 0.0f64;
    let mut complex = 0.0f64;
    // (name, first dims seen, all agree, exact everywhere)
    let mut dims: Vec<(&'static str, Option<(usize, usize)>, bool, bool)> = vec![
        ("deformation complex", None, true, true),
        ("instanton complex m=1", None, true, true),
        ("instanton complex m=2", None, true, true),
        ("instanton complex m=3", None, true, true),
    ];
    let mut record = |slot: &mut (&'static str, Option<(usize, usize)>, bool, bool),
                      r: &g2flux_core::symbols::ExactnessReport| {
        let d = (r.rank_in, r.dim_ker_out);
        let first = *slot.1.get_or_insert(d);
        slot.2 &= first == d;
        slot.3 &= r.rank_in == r.dim_ker_out;
        containment = containment.max(r.containment_defect);
        complex = complex.max(r.complex_defect);
    };
    let tol = TOL_EXACTNESS * report.tol_scale;
    for _ in 0..POINTS {
        let p = G2Point::new(random_positive_3form(&mut rng, POINT_SPREAD))?;
        for _ in 0..samples {
            let v = random_unit_vector(&mut rng, 7);
            let r = check_exactness(&symbol_pm(&p, &v)?, &symbol_lm(&p, &v)?, tol)?;
            record(&mut dims[0], &r);
            for m in 1..=3 {
                let (s0, s1) = symbol_instanton_complex(&p, &v, m)?;
                record(&mut dims[m], &check_exactness(&s0, &s1, tol)?);
            }
        }
    }
    report.residual("symbol containment", "ker sigma_out = im sigma_in", containment, TOL_EXACTNESS);
    report.residual("symbol composition", "sigma_out sigma_in = 0", complex, TOL_EXACTNESS);
    let mut logged = Vec::new();
    for (name, d, constant, exact) in &dims {
        report.verdict(format!("{name}: rank = kernel"), "rank sigma_in = dim ker sigma_out", *exact);
        report.verdict(format!("{name}: constant dimensions"), "kernel dimension independent of (x, v)", *constant);
        let (rank_in, dim_ker_out) = d.unwrap_or((0, 0));
        logged.push(KernelDims {
            complex: name,
            rank_in,
            dim_ker_out,
            constant: *constant,
        });
    }
    report.detail("points", POINTS);
    report.detail("covectors_per_point", samples);
    report.detail("kernel_dimensions", logged);
    Ok(())
}

/// Residuals of one scenario under `prefix`.
fn scenario_residuals(report: &mut Report, prefix: &str, s: &Scenario) -> Result<(), Error> {
    let e = Evaluation::new(s)?;
    let r = report_from(s, &e);
    let name = |n: &str| format!("{prefix}{n}");
    let key = |n: &str| match prefix.trim_end_matches(": ") {
        "" => n.to_string(),
        p => format!("{p}_{n}"),
    };
    report.residual(name("closure"), "d(phi) ^ phi = 0", r.closure, TOL_SYSTEM);
    report.residual(name("conformal coclosure"), "d(*phi) = du ^ *phi", r.conformal_coclosure, TOL_SYSTEM);
    report.residual(name("bianchi"), "dH = <F ^ F>", r.bianchi, TOL_SYSTEM);
    report.residual(name("instanton"), "F_i ^ *phi = 0", r.instanton, TOL_SYSTEM);
    report.residual(
        name("torsion closed form"),
        "H = t^2 sum beta_j ^ sigma_j - (1/2) e^u i_grad(u) omega_1^2",
        r.torsion_closed_form,
        TOL_SYSTEM,
    );
    report.residual(
        name("bianchi scalar reduction"),
        "*dH = Laplacian(e^u) - t^2 sum |beta_j|^2",
        r.bianchi_scalar_reduction,
        TOL_SYSTEM,
    );
    report.residual(
        name("fibre part of dH"),
        "dH is basic (relative to |H|)",
        r.dtorsion_fiber_part / r.torsion_norm.max(1.0),
        TOL_SYSTEM,
    );
    report.verdict(name("torsion nonzero"), "|H| > 0 when beta != 0", r.torsion_norm > 0.0 || s.bundle.beta_norm_sq() == 0.0);
    report.detail(&key("solution"), &r);
    let phi = r.phi_norm.max(f64::MIN_POSITIVE);
    report.detail(
        &key("relative_to_phi"),
        serde_json::json!({
            "closure": r.closure / phi,
            "conformal_coclosure": r.conformal_coclosure / phi,
            "bianchi": r.bianchi / phi,
            "instanton": r.instanton / phi,
        }),
    );
    Ok(())
}

/// Records a scenario-building failure: unbalanced input is a run failure,
/// anything else a configuration error.
pub fn scenario_or_record(report: &mut Report, config: &ScenarioConfig) -> Result<Option<Scenario>, ConfigError> {
    match config.scenario() {
        Ok(s) => Ok(Some(s)),
        Err(ConfigError::Unbalanced(e)) => {
            if let Error::Balance { fibration, bundle, .. } = &e {
                report.detail("balance", serde_json::json!({ "fibration": fibration, "bundle": bundle }));
            }
            report.error(e.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub fn verify(report: &mut Report, config: &ScenarioConfig, s: &Scenario) -> Result<(), Error> {
    if !resolve_or_record(report, s)? {
        return Ok(());
    }
    scenario_residuals(report, "", s)?;
    report.detail("lattice", lattice_certificate(config, Some(s))?);
    Ok(())
}

/// Solves for u; false (with the obstruction recorded) if the source has a
/// nonzero integral.
fn resolve_or_record(report: &mut Report, s: &Scenario) -> Result<bool, Error> {
    match s.resolve_u() {
        Ok(_) => Ok(true),
        Err(e @ Error::ObstructedSource { mismatch }) => {
            report.detail("obstruction_integral", mismatch);
            report.error(e.to_string());
            Ok(false)
        }
        Err(e) => Err(e),
    }
}

/// Solves for h = e^u and writes it to `field_path`.
pub fn solve(report: &mut Report, s: &mut Scenario, field_path: &Path) -> Result<(), Error> {
    if !matches!(s.u_mode, UMode::Solved { .. }) {
        s.u_mode = UMode::Solved { h0: 1.0 };
    }
    let u = match s.resolve_u() {
        Ok(u) => u,
        Err(e @ Error::ObstructedSource { mismatch }) => {
            report.detail("obstruction_integral", mismatch);
            report.error(e.to_string());
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let h = u.exp();
    let mut w = BufWriter::new(File::create(field_path)?);
    write_field(&mut w, &h)?;
    report.verdict("h positive", "min e^u > 0", h.min_value() > 0.0);
    report.detail("field", field_path.display().to_string());
    report.detail("h_min", h.min_value());
    report.detail("h_mean", h.mean());
    scenario_residuals(report, "", s)
}

#[derive(Serialize)]
struct LatticeDetail {
    kind: String,
    even: bool,
    unimodular: bool,
    certificate: g2flux_core::lattice::ConstraintCertificate,
    tdual_integrality: bool,
}

fn lattice_certificate(config: &ScenarioConfig, s: Option<&Scenario>) -> Result<LatticeDetail, Error> {
    let kind = config.lattice_kind();
    let lattice = IntersectionLattice::new(kind);
    let q = config.beta.map(|p| pair_q(&p));
    let cert = check_constraints(config.t_squared, config.alpha, config.lattice_rank(s), q, kind.c2_base())?;
    Ok(LatticeDetail {
        kind: format!("{kind:?}"),
        even: lattice.is_even(),
        unimodular: lattice.is_unimodular(),
        certificate: cert,
        tdual_integrality: tdual_integrality(config.t_squared, &config.beta),
    })
}

/// The charge window needs no solution; `s` only supplies a default rank.
pub fn lattice_check(report: &mut Report, config: &ScenarioConfig, s: Option<&Scenario>) -> Result<(), Error> {
    let d = lattice_certificate(config, s)?;
    report.verdict("lattice even unimodular", "Q even, det Q = +-1", d.even && d.unimodular);
    report.verdict("charge integrality", "c2 = c2(base) + (2 t^2 / alpha) sum Q(beta_j) is an integer", d.certificate.integrality_ok);
    report.verdict("rank window", "rank V <= c2", d.certificate.rank_ok);
    if let Some(w) = &d.certificate.warning {
        report.detail("warning", w);
    }
    report.detail("lattice", d);
    Ok(())
}

#[derive(Serialize)]
struct DualitySummary {
    exact: bool,
    t_squared_dual: String,
    dual_periods: [[i64; 6]; 3],
    pairing_matrix: [[f64; 3]; 3],
    pairing_determinant: f64,
}

fn duality_checks<C: Coefficient>(report: &mut Report, data: DualData<C>, exact: bool) -> Result<bool, Error> {
    let pair = match dualize(&data) {
        Ok(p) => p,
        Err(e @ Error::NotDualizable { .. }) => {
            report.error(e.to_string());
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    let check = verify_duality_identity(&pair)?;
    let tol = if exact { 0.0 } else { TOL_FLOAT_DUALITY };
    report.residual(
        "duality identity",
        "q*H - q'*H' = -d(sum sigma_j ^ sigma'_j)",
        check.residual,
        tol,
    );
    if exact {
        report.verdict("duality identity exactly zero", "LHS - RHS = 0 over the rationals", check.exact_zero);
    }
    report.verdict("shared terms cancel", "dilaton and Chern-Simons terms cancel in q*H - q'*H'", check.symbolic_terms_cancel);
    let back = dualize(&pair.dual)?;
    report.verdict("involution", "dual of the dual is the original", back.dual == pair.original);
    let f = pair.pairing_form();
    let pc = verify_pairing_nondegeneracy(&f);
    let m = pairing_matrix(&f);
    let minus_id = (0..3).all(|l| (0..3).all(|k| m[l][k] == if l == k { -C::one() } else { C::zero() }));
    report.verdict("pairing nondegenerate", "F = -sum sigma_j ^ sigma'_j nondegenerate on fibre directions", pc.nondegenerate);
    report.verdict("pairing matrix", "F = -I_3 in the natural bases", minus_id);
    report.detail(
        "duality",
        DualitySummary {
            exact,
            t_squared_dual: pair.dual.t_squared.to_string(),
            dual_periods: pair.dual.beta.clone().map(|r| r.map(|x| x.as_integer().unwrap_or(i64::MIN))),
            pairing_matrix: pc.matrix,
            pairing_determinant: pc.determinant,
        },
    );
    Ok(true)
}

pub fn tdual(report: &mut Report, config: &ScenarioConfig, s: &Scenario) -> Result<(), Error> {
    let dualizable = match config.t_squared {
        Scalar::Exact(t2) => duality_checks(report, DualData::<Rational64>::from_periods(t2, &config.beta), true)?,
        Scalar::Float(t2) => duality_checks(report, DualData::<f64>::from_periods(t2, &config.beta), false)?,
    };
    if !dualizable {
        return Ok(());
    }
    if !resolve_or_record(report, s)? {
        return Ok(());
    }
    let dual = dual_scenario(s, config.t_squared)?;
    scenario_residuals(report, "original: ", s)?;
    scenario_residuals(report, "dual: ", &dual)
}

/// verify + lattice-check, plus tdual when the integrality gate allows it.
pub fn full_report(report: &mut Report, config: &ScenarioConfig, s: &Scenario) -> Result<(), Error> {
    verify(report, config, s)?;
    if !report.errors.is_empty() {
        return Ok(());
    }
    lattice_check(report, config, Some(s))?;
    if tdual_integrality(config.t_squared, &config.beta) {
        let mut sub = Report::new("tdual", None, report.seed, report.tol_scale);
        tdual(&mut sub, config, s)?;
        // the original scenario's residuals are already in the report
        for mut r in sub.residuals.into_iter().filter(|r| !r.name.starts_with("original: ")) {
            r.name = format!("tdual/{}", r.name);
            report.residuals.push(r);
        }
        for mut v in sub.verdicts.into_iter().filter(|v| !v.name.starts_with("original: ")) {
            v.name = format!("tdual/{}", v.name);
            report.verdicts.push(v);
        }
        report.errors.extend(sub.errors);
        if let Some(d) = sub.details.remove("duality") {
            report.details.insert("duality".into(), d);
        }
    } else {
        report.detail("duality", "skipped: t^2 beta has non-integral periods");
    }
    Ok(())
}
