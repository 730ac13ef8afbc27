//! Principal symbols of the deformation complexes at a covector, as explicit
//! dense linear maps between based graded spaces, and the exactness check.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::AlternatingForm;
use crate::g2::G2Point;

/// A direct sum of named summands; the basis is the concatenation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedSpace {
    pub label: String,
    pub summands: Vec<(String, usize)>,
}

impl GradedSpace {
    pub fn new(label: &str, summands: &[(&str, usize)]) -> Self {
        Self {
            label: label.to_string(),
            summands: summands.iter().map(|(n, d)| (n.to_string(), *d)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.summands.iter().map(|s| s.1).sum()
    }

    /// First basis index of summand `i`.
    pub fn offset(&self, i: usize) -> usize {
        self.summands[..i].iter().map(|s| s.1).sum()
    }

    /// Each summand tensored with ℝ^m; Lie-algebra index runs fastest.
    pub fn tensor(&self, m: usize) -> Self {
        Self {
            label: format!("{} ⊗ R^{m}", self.label),
            summands: self
                .summands
                .iter()
                .map(|(n, d)| (format!("{n}⊗g"), d * m))
                .collect(),
        }
    }
}

/// Principal symbol at `covector`; `row_orders[i]` is the homogeneity degree
/// of the rows in codomain summand `i`.
#[derive(Clone, Debug)]
pub struct SymbolMap {
    pub domain: GradedSpace,
    pub codomain: GradedSpace,
    pub matrix: DMatrix<f64>,
    pub covector: Vec<f64>,
    pub row_orders: Vec<u32>,
}

impl SymbolMap {
    fn new(
        domain: GradedSpace,
        codomain: GradedSpace,
        matrix: DMatrix<f64>,
        covector: &[f64],
        row_orders: Vec<u32>,
    ) -> Self {
        debug_assert_eq!(matrix.shape(), (codomain.dim(), domain.dim()));
        debug_assert_eq!(row_orders.len(), codomain.summands.len());
        Self {
            domain,
            codomain,
            matrix,
            covector: covector.to_vec(),
            row_orders,
        }
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix)
    }

    /// max |scaled − λ^order · self| over all blocks, where `scaled` was built
    /// at λ·v.
    pub fn homogeneity_defect(&self, scaled: &SymbolMap, lambda: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &order) in self.row_orders.iter().enumerate() {
            let off = self.codomain.offset(i);
            let rows = self.codomain.summands[i].1;
            let a = self.matrix.rows(off, rows) * lambda.powi(order as i32);
            let b = scaled.matrix.rows(off, rows);
            worst = worst.max((b - a).amax());
        }
        worst
    }

    /// Kronecker product with the identity of ℝ^m.
    fn tensor_identity(&self, m: usize) -> Self {
        let (r, c) = self.matrix.shape();
        let mut out = DMatrix::zeros(r * m, c * m);
        for i in 0..r {
            for j in 0..c {
                let x = self.matrix[(i, j)];
                if x != 0.0 {
                    for k in 0..m {
                        out[(i * m + k, j * m + k)] = x;
                    }
                }
            }
        }
        Self::new(
            self.domain.tensor(m),
            self.codomain.tensor(m),
            out,
            &self.covector,
            self.row_orders.clone(),
        )
    }
}

const RANK_REL_THRESHOLD: f64 = 1e-8;

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_REL_THRESHOLD * max).count()
}

fn check_covector(p: &G2Point, v: &[f64]) -> Result<AlternatingForm> {
    if v.len() != 7 {
        return Err(Error::DimensionMismatch(format!(
            "covector has {} components, expected 7",
            v.len()
        )));
    }
    if v.iter().all(|x| *x == 0.0) || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("symbol requested at the zero covector".into()));
    }
    let _ = p;
    Ok(AlternatingForm::covector(v))
}

fn put_column(m: &mut DMatrix<f64>, col: usize, row_offset: usize, form: &AlternatingForm) {
    for (i, c) in form.coeffs().iter().enumerate() {
        m[(row_offset + i, col)] = *c;
    }
}

/// Symbol of the infinitesimal diffeomorphism action: V ↦ (v∧ι_Vφ, 0).
pub fn symbol_pm(p: &G2Point, v: &[f64]) -> Result<SymbolMap> {
    let vf = check_covector(p, v)?;
    let mut m = DMatrix::zeros(36, 7);
    for a in 0..7 {
        let col = vf.wedge(&p.contract_basis(a))?;
        put_column(&mut m, a, 0, &col);
    }
    Ok(SymbolMap::new(
        GradedSpace::new("TM", &[("T", 7)]),
        GradedSpace::new("L3+R", &[("L3", 35), ("R", 1)]),
        m,
        v,
        vec![1, 1],
    ))
}

/// Symbol of the linearized system on (φ̇, ḟ):
/// (v∧φ̇∧φ, v∧*Jφ̇ + 4ḟ v∧*φ, −v∧*(v∧(φ̇ + 4ḟφ))).
pub fn symbol_lm(p: &G2Point, v: &[f64]) -> Result<SymbolMap> {
    let vf = check_covector(p, v)?;
    let metric = p.metric();
    let jm = p.j_matrix();
    let mut m = DMatrix::zeros(1 + 21 + 35, 36);
    let row3 = |xi: &AlternatingForm| -> Result<AlternatingForm> {
        Ok(-&vf.wedge(&vf.wedge(xi)?.hodge_star(metric)?)?)
    };
    for col in 0..35 {
        let mut coeffs = vec![0.0; 35];
        coeffs[col] = 1.0;
        let xi = AlternatingForm::new(7, 3, coeffs)?;
        let jxi = AlternatingForm::new(7, 3, jm.column(col).iter().copied().collect())?;
        put_column(&mut m, col, 0, &vf.wedge(&xi)?.wedge(p.phi())?);
        put_column(&mut m, col, 1, &vf.wedge(&jxi.hodge_star(metric)?)?);
        put_column(&mut m, col, 22, &row3(&xi)?);
    }
    let fcol = 35;
    put_column(&mut m, fcol, 1, &(&vf.wedge(p.star_phi())? * 4.0));
    put_column(&mut m, fcol, 22, &row3(&(p.phi() * 4.0))?);
    Ok(SymbolMap::new(
        GradedSpace::new("L3+R", &[("L3", 35), ("R", 1)]),
        GradedSpace::new("L7+L5+L4", &[("L7", 1), ("L5", 21), ("L4", 35)]),
        m,
        v,
        vec![1, 1, 2],
    ))
}

/// Symbols of the instanton deformation complex with adjoint dimension m:
/// S0: r ↦ (v⊗r, 0) and S1: (θ̇, s) ↦ *φ∧v∧θ̇ + *(v s).
pub fn symbol_instanton_complex(
    p: &G2Point,
    v: &[f64],
    m: usize,
) -> Result<(SymbolMap, SymbolMap)> {
    if m < 1 {
        return Err(Error::Domain("adjoint dimension must be at least 1".into()));
    }
    let vf = check_covector(p, v)?;
    let metric = p.metric();

    let mut s0 = DMatrix::zeros(8, 1);
    for a in 0..7 {
        s0[(a, 0)] = v[a];
    }
    let mid = GradedSpace::new("L1+L0", &[("L1", 7), ("L0", 1)]);
    let s0 = SymbolMap::new(
        GradedSpace::new("L0", &[("L0", 1)]),
        mid.clone(),
        s0,
        v,
        vec![1, 1],
    );

    let mut s1 = DMatrix::zeros(7, 8);
    let sv = p.star_phi().wedge(&vf)?;
    for a in 0..7 {
        put_column(&mut s1, a, 0, &sv.wedge(&AlternatingForm::basis(7, &[a]))?);
    }
    put_column(&mut s1, 7, 0, &vf.hodge_star(metric)?);
    let s1 = SymbolMap::new(mid, GradedSpace::new("L6", &[("L6", 7)]), s1, v, vec![1]);

    Ok((s0.tensor_identity(m), s1.tensor_identity(m)))
}

/// Outcome of the middle-term exactness test for S_in followed by S_out.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ExactnessReport {
    pub rank_in: usize,
    pub dim_ker_out: usize,
    /// ‖S_out S_in‖ (Frobenius).
    pub complex_defect: f64,
    /// ‖(I − P_im S_in) K‖ for K an orthonormal kernel basis of S_out.
    pub containment_defect: f64,
    pub exact: bool,
}

pub fn check_exactness(s_in: &SymbolMap, s_out: &SymbolMap, tol: f64) -> Result<ExactnessReport> {
    if s_in.codomain.dim() != s_out.domain.dim() {
        return Err(Error::Domain(format!(
            "cannot compose: codomain of S_in has dimension {}, domain of S_out {}",
            s_in.codomain.dim(),
            s_out.domain.dim()
        )));
    }
    let complex_defect = (&s_out.matrix * &s_in.matrix).norm();
    if complex_defect > tol {
        return Err(Error::NotAComplex {
            defect: complex_defect,
        });
    }
    let n = s_out.domain.dim();

    // orthonormal basis of im S_in
    let svd_in = s_in.matrix.clone().svd(true, false);
    let max_in = svd_in.singular_values.max();
    let u = svd_in.u.expect("requested");
    let im_cols: Vec<usize> = (0..svd_in.singular_values.len())
        .filter(|&i| max_in > 0.0 && svd_in.singular_values[i] > RANK_REL_THRESHOLD * max_in)
        .collect();
    let rank_in = im_cols.len();
    let image = u.select_columns(im_cols.iter());

    // orthonormal basis of ker S_out, padding to at least n rows so the
    // thin SVD exposes the full right singular basis
    let rows = s_out.matrix.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded
        .view_mut((0, 0), (s_out.matrix.nrows(), n))
        .copy_from(&s_out.matrix);
    let svd_out = padded.svd(false, true);
    let max_out = svd_out.singular_values.max();
    let vt = svd_out.v_t.expect("requested");
    let ker_rows: Vec<usize> = (0..svd_out.singular_values.len())
        .filter(|&i| max_out == 0.0 || svd_out.singular_values[i] <= RANK_REL_THRESHOLD * max_out)
        .collect();
    let dim_ker_out = ker_rows.len();
    let kernel = vt.select_rows(ker_rows.iter()).transpose();

    let residual = if rank_in == 0 {
        kernel.clone()
    } else {
        &kernel - &image * (image.transpose() * &kernel)
    };
    let containment_defect = residual.norm();
    Ok(ExactnessReport {
        rank_in,
        dim_ker_out,
        complex_defect,
        containment_defect,
        exact: rank_in == dim_ker_out && containment_defect < tol,
    })
}

/// Residuals of the symbol-level identities for the operator d*Jd on Λ².
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BryantResiduals {
    /// ‖v∧*J(v∧β₇)‖.
    pub seven_part: f64,
    /// ‖π₇(v∧*J(v∧β₁₄))‖.
    pub pi7_of_fourteen_part: f64,
    /// ‖−*(v∧*J(v∧β₁₄)) − (|v|²β₁₄ − (3/2)π₁₄(v∧ι_vβ₁₄))‖.
    pub laplacian_pattern: f64,
    /// The same comparison with coefficient 1 in place of 3/2. Kept as a
    /// diagnostic: this variant does not hold.
    pub laplacian_pattern_unit_coefficient: f64,
}

/// −*(v∧*J(v∧β)) as a 2-form.
pub fn djd_symbol(p: &G2Point, v: &AlternatingForm, beta: &AlternatingForm) -> Result<AlternatingForm> {
    let m = p.metric();
    let inner = p.j_operator(&v.wedge(beta)?)?.hodge_star(m)?;
    Ok(-&v.wedge(&inner)?.hodge_star(m)?)
}

pub fn verify_bryant_symbol_identities(
    p: &G2Point,
    v: &[f64],
    beta: &AlternatingForm,
) -> Result<BryantResiduals> {
    let vf = check_covector(p, v)?;
    let m = p.metric();
    let (b7, b14) = p.project_two_form(beta)?;

    let seven = vf.wedge(&p.j_operator(&vf.wedge(&b7)?)?.hodge_star(m)?)?;
    let fourteen = vf.wedge(&p.j_operator(&vf.wedge(&b14)?)?.hodge_star(m)?)?;
    let (f7, _) = p.project_five_form(&fourteen)?;

    let lhs = -&fourteen.hodge_star(m)?;
    let vsharp = m.sharp(v);
    let v2: f64 = v.iter().zip(&vsharp).map(|(a, b)| a * b).sum();
    let (_, mixed14) = p.project_two_form(&vf.wedge(&b14.contract(&vsharp)?)?)?;
    let pattern = |c: f64| -> Result<f64> {
        (&(&lhs - &(&b14 * v2)) + &(&mixed14 * c)).norm(m)
    };

    Ok(BryantResiduals {
        seven_part: seven.norm(m)?,
        pi7_of_fourteen_part: f7.norm(m)?,
        laplacian_pattern: pattern(1.5)?,
        laplacian_pattern_unit_coefficient: pattern(1.0)?,
    })
}
