//! Pointwise exterior algebra over an oriented inner-product space of
//! dimension at most 8.
//!
//! Forms are stored densely: a degree-k form on R^n keeps one coefficient per
//! strictly increasing multi-index, in lexicographic order. Multi-indices are
//! handled internally as bitmasks.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

struct IndexTable {
    masks: Vec<u16>,
    // position of each mask of popcount k in `masks`; u16::MAX if not of degree k
    position: Vec<u16>,
}

fn tables() -> &'static Vec<Vec<IndexTable>> {
    static TABLES: OnceLock<Vec<Vec<IndexTable>>> = OnceLock::new();
    TABLES.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|n| {
                (0..=n)
                    .map(|k| {
                        let mut masks = Vec::new();
                        combinations(n, k, 0, 0, &mut masks);
                        let mut position = vec![u16::MAX; 1 << n];
                        for (i, &m) in masks.iter().enumerate() {
                            position[m as usize] = i as u16;
                        }
                        IndexTable { masks, position }
                    })
                    .collect()
            })
            .collect()
    })
}

// lexicographic enumeration of increasing k-tuples from {start..n}
fn combinations(n: usize, k: usize, start: usize, acc: u16, out: &mut Vec<u16>) {
    if k == 0 {
        out.push(acc);
        return;
    }
    for i in start..n {
        if n - i < k {
            break;
        }
        combinations(n, k - 1, i + 1, acc | (1 << i), out);
    }
}

/// Binomial coefficient C(n, k) for n ≤ [`MAX_DIM`].
pub fn binomial(n: usize, k: usize) -> usize {
    assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
    if k > n {
        return 0;
    }
    tables()[n][k].masks.len()
}

/// Bitmasks of the degree-k multi-indices on R^n, in storage order.
pub fn multi_indices(n: usize, k: usize) -> &'static [u16] {
    assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
    &tables()[n][k].masks
}

/// Storage position of a multi-index bitmask.
pub fn index_of(n: usize, mask: u16) -> usize {
    let p = tables()[n][mask.count_ones() as usize].position[mask as usize];
    debug_assert!(p != u16::MAX);
    p as usize
}

/// The set bits of a mask, increasing.
pub fn mask_indices(mask: u16) -> impl Iterator<Item = usize> {
    (0..16).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of e^A ∧ e^B relative to e^{A∪B} for disjoint masks.
pub fn wedge_sign(a: u16, b: u16) -> f64 {
    debug_assert_eq!(a & b, 0);
    // count pairs (i in A, j in B) with i > j
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of the permutation sorting `indices`; zero on repeats.
pub fn permutation_sign(indices: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            if indices[i] == indices[j] {
                return 0.0;
            }
            if indices[i] > indices[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// A degree-k alternating tensor on R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct AlternatingForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl AlternatingForm {
    pub fn new(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim > MAX_DIM || degree > dim {
            return Err(Error::Domain(format!(
                "unsupported degree {degree} in dimension {dim}"
            )));
        }
        if coeffs.len() != binomial(dim, degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a degree-{degree} form on R^{dim}, expected {}",
                coeffs.len(),
                binomial(dim, degree)
            )));
        }
        Ok(Self {
            dim,
            degree,
            coeffs,
        })
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM && degree <= dim);
        Self {
            dim,
            degree,
            coeffs: vec![0.0; binomial(dim, degree)],
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut f = Self::zero(dim, 0);
        f.coeffs[0] = value;
        f
    }

    /// The 1-form with the given components.
    pub fn covector(components: &[f64]) -> Self {
        Self::new(components.len(), 1, components.to_vec()).expect("covector dimension")
    }

    /// ε^{i₁} ∧ … ∧ ε^{i_k} for 0-based, not necessarily sorted, indices.
    pub fn basis(dim: usize, indices: &[usize]) -> Self {
        Self::from_terms(dim, indices.len(), &[(1.0, indices)])
    }

    /// Sum of `c · ε^{I}` over the given terms (0-based indices, any order).
    pub fn from_terms(dim: usize, degree: usize, terms: &[(f64, &[usize])]) -> Self {
        let mut f = Self::zero(dim, degree);
        for (c, idx) in terms {
            assert_eq!(idx.len(), degree, "term degree");
            let sign = permutation_sign(idx);
            if sign == 0.0 {
                continue;
            }
            let mask = idx.iter().fold(0u16, |m, &i| m | (1 << i));
            f.coeffs[index_of(dim, mask)] += sign * c;
        }
        f
    }

    /// The volume form ε^{1…n}.
    pub fn volume(dim: usize) -> Self {
        Self::scalar(dim, 1.0).with_degree_top()
    }

    fn with_degree_top(self) -> Self {
        let mut f = Self::zero(self.dim, self.dim);
        f.coeffs[0] = self.coeffs[0];
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient on ε^{I} for an increasing multi-index given as a mask.
    pub fn coeff_mask(&self, mask: u16) -> f64 {
        self.coeffs[index_of(self.dim, mask)]
    }

    /// Signed component a(e_{i₁}, …, e_{i_k}).
    pub fn component(&self, indices: &[usize]) -> f64 {
        let sign = permutation_sign(indices);
        if sign == 0.0 {
            return 0.0;
        }
        let mask = indices.iter().fold(0u16, |m, &i| m | (1 << i));
        sign * self.coeff_mask(mask)
    }

    /// Iterator over (mask, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (u16, f64)> + '_ {
        multi_indices(self.dim, self.degree)
            .iter()
            .copied()
            .zip(self.coeffs.iter().copied())
    }

    /// Single coefficient of a degree-0 or degree-n form.
    pub fn top_coefficient(&self) -> f64 {
        debug_assert!(self.degree == 0 || self.degree == self.dim);
        self.coeffs[0]
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::DimensionMismatch(format!(
                "forms of shape ({}, {}) and ({}, {})",
                self.dim, self.degree, other.dim, other.degree
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        out += other;
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "wedge of forms on R^{} and R^{}",
                self.dim, other.dim
            )));
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(Error::DegreeOverflow {
                lhs: self.degree,
                rhs: other.degree,
                dim: self.dim,
            });
        }
        let mut out = Self::zero(self.dim, degree);
        for (ma, a) in self.terms() {
            if a == 0.0 {
                continue;
            }
            for (mb, b) in other.terms() {
                if b == 0.0 || ma & mb != 0 {
                    continue;
                }
                out.coeffs[index_of(self.dim, ma | mb)] += wedge_sign(ma, mb) * a * b;
            }
        }
        Ok(out)
    }

    /// Interior product ι_v with a vector given in the dual basis.
    pub fn contract(&self, v: &[f64]) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Domain("contraction of a 0-form".into()));
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against forms on R^{}",
                v.len(),
                self.dim
            )));
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (mask, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            for (r, i) in mask_indices(mask).enumerate() {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[index_of(self.dim, mask & !(1 << i))] += sign * v[i] * c;
            }
        }
        Ok(out)
    }

    /// Hodge star with the convention a ∧ *b = ⟨a, b⟩ vol.
    pub fn hodge_star(&self, metric: &MetricData) -> Result<Self> {
        if metric.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "metric on R^{} applied to a form on R^{}",
                metric.dim(),
                self.dim
            )));
        }
        let raised = metric.raise(self);
        let full: u16 = ((1u32 << self.dim) - 1) as u16;
        let scale = metric.sqrt_det * metric.orientation as f64;
        let mut out = Self::zero(self.dim, self.dim - self.degree);
        for (i, &mask) in multi_indices(self.dim, self.degree).iter().enumerate() {
            let c = raised[i];
            if c == 0.0 {
                continue;
            }
            let comp = full & !mask;
            out.coeffs[index_of(self.dim, comp)] += scale * wedge_sign(mask, comp) * c;
        }
        Ok(out)
    }

    /// Pointwise inner product ⟨a, b⟩ induced by the metric.
    pub fn inner(&self, other: &Self, metric: &MetricData) -> Result<f64> {
        self.check_same_shape(other)?;
        let raised = metric.raise(other);
        Ok(self.coeffs.iter().zip(&raised).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self, metric: &MetricData) -> Result<f64> {
        Ok(self.inner(self, metric)?.max(0.0).sqrt())
    }

    /// a(v₁, …, v_k) for vectors in the dual basis.
    pub fn evaluate(&self, vectors: &[&[f64]]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors for a degree-{} form",
                vectors.len(),
                self.degree
            )));
        }
        let k = self.degree;
        let mut sum = 0.0;
        let mut m = vec![0.0; k * k];
        for (mask, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            for (r, i) in mask_indices(mask).enumerate() {
                for (col, v) in vectors.iter().enumerate() {
                    m[r * k + col] = v[i];
                }
            }
            sum += c * small_det(&mut m, k);
        }
        Ok(sum)
    }
}

impl AddAssign<&AlternatingForm> for AlternatingForm {
    fn add_assign(&mut self, rhs: &AlternatingForm) {
        assert!(self.dim == rhs.dim && self.degree == rhs.degree, "shape");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&AlternatingForm> for AlternatingForm {
    fn sub_assign(&mut self, rhs: &AlternatingForm) {
        assert!(self.dim == rhs.dim && self.degree == rhs.degree, "shape");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Add for &AlternatingForm {
    type Output = AlternatingForm;
    fn add(self, rhs: &AlternatingForm) -> AlternatingForm {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &AlternatingForm {
    type Output = AlternatingForm;
    fn sub(self, rhs: &AlternatingForm) -> AlternatingForm {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &AlternatingForm {
    type Output = AlternatingForm;
    fn neg(self) -> AlternatingForm {
        self * -1.0
    }
}

impl Mul<f64> for &AlternatingForm {
    type Output = AlternatingForm;
    fn mul(self, s: f64) -> AlternatingForm {
        AlternatingForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }
}

/// Determinant of a row-major k×k matrix by partial-pivot elimination.
/// The buffer is overwritten.
pub(crate) fn small_det(m: &mut [f64], k: usize) -> f64 {
    match k {
        0 => return 1.0,
        1 => return m[0],
        2 => return m[0] * m[3] - m[1] * m[2],
        _ => {}
    }
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if m[r * k + col].abs() > m[piv * k + col].abs() {
                piv = r;
            }
        }
        let p = m[piv * k + col];
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..k {
                m.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..k {
            let f = m[r * k + col] / p;
            if f != 0.0 {
                for c in col..k {
                    m[r * k + c] -= f * m[col * k + c];
                }
            }
        }
    }
    det
}

/// An inner product on R^n (gram matrix on basis vectors) with orientation.
#[derive(Clone, Debug)]
pub struct MetricData {
    gram: DMatrix<f64>,
    inverse: DMatrix<f64>,
    diagonal: bool,
    sqrt_det: f64,
    orientation: i8,
    volume_form: AlternatingForm,
}

impl MetricData {
    /// Validates symmetry and positive-definiteness of `gram`.
    pub fn new(gram: DMatrix<f64>, orientation: i8) -> Result<Self> {
        let n = gram.nrows();
        if n != gram.ncols() || n == 0 || n > MAX_DIM {
            return Err(Error::DimensionMismatch(format!(
                "gram matrix of shape {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::Domain("orientation must be ±1".into()));
        }
        let scale = gram.amax().max(1.0);
        if (&gram - gram.transpose()).amax() > 1e-12 * scale {
            return Err(Error::NotPositiveDefinite);
        }
        let sym = (&gram + gram.transpose()) * 0.5;
        let chol = sym.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let inverse = chol.inverse();
        let det: f64 = chol.l_dirty().diagonal().iter().map(|d| d * d).product();
        let sqrt_det = det.sqrt();
        let mut diagonal = true;
        for i in 0..n {
            for j in 0..n {
                if i != j && sym[(i, j)] != 0.0 {
                    diagonal = false;
                }
            }
        }
        let mut volume_form = AlternatingForm::zero(n, n);
        volume_form.coeffs[0] = sqrt_det * orientation as f64;
        Ok(Self {
            gram: sym,
            inverse,
            diagonal,
            sqrt_det,
            orientation,
            volume_form,
        })
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), 1).expect("identity metric")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries)), 1)
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn inverse_gram(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn volume_form(&self) -> &AlternatingForm {
        &self.volume_form
    }

    pub fn sqrt_det(&self) -> f64 {
        self.sqrt_det
    }

    /// Metric dual of a covector.
    pub fn sharp(&self, covector: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.inverse[(i, j)] * covector[j]).sum())
            .collect()
    }

    /// Matrix of the induced inner product on degree-k forms (k×k minors of
    /// the inverse gram), in storage order.
    pub fn form_gram(&self, k: usize) -> DMatrix<f64> {
        let n = self.dim();
        let idx = multi_indices(n, k);
        let mut out = DMatrix::zeros(idx.len(), idx.len());
        let mut buf = vec![0.0; k * k];
        for (a, &ma) in idx.iter().enumerate() {
            for (b, &mb) in idx.iter().enumerate() {
                for (r, i) in mask_indices(ma).enumerate() {
                    for (c, j) in mask_indices(mb).enumerate() {
                        buf[r * k + c] = self.inverse[(i, j)];
                    }
                }
                out[(a, b)] = small_det(&mut buf, k);
            }
        }
        out
    }

    /// Contravariant coefficients a^I of a form.
    fn raise(&self, a: &AlternatingForm) -> Vec<f64> {
        let n = self.dim();
        let k = a.degree;
        let idx = multi_indices(n, k);
        if self.diagonal {
            return idx
                .iter()
                .zip(&a.coeffs)
                .map(|(&m, &c)| c * mask_indices(m).map(|i| self.inverse[(i, i)]).product::<f64>())
                .collect();
        }
        let g = self.form_gram(k);
        (0..idx.len())
            .map(|i| (0..idx.len()).map(|j| g[(i, j)] * a.coeffs[j]).sum())
            .collect()
    }
}

/// Bilinear form B(u,v) with B(u,v)·ε^{1…7} = (ι_u φ)∧(ι_v φ)∧φ / 6.
pub fn positive3form_bilinear(phi: &AlternatingForm) -> Result<DMatrix<f64>> {
    if phi.dim() != 7 || phi.degree() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 3-form on R^7, got degree {} on R^{}",
            phi.degree(),
            phi.dim()
        )));
    }
    let mut contracted = Vec::with_capacity(7);
    for i in 0..7 {
        let mut e = [0.0; 7];
        e[i] = 1.0;
        contracted.push(phi.contract(&e)?);
    }
    let mut b = DMatrix::zeros(7, 7);
    for i in 0..7 {
        for j in i..7 {
            let v = contracted[i]
                .wedge(&contracted[j])?
                .wedge(phi)?
                .top_coefficient()
                / 6.0;
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    Ok(b)
}

/// The metric g_φ of a positive 3-form, normalized as det(B)^{-1/9} B.
pub fn metric_from_positive3form(phi: &AlternatingForm) -> Result<MetricData> {
    let b = positive3form_bilinear(phi)?;
    let Some(chol) = b.clone().cholesky() else {
        let min_eigenvalue = b.symmetric_eigenvalues().min();
        return Err(Error::NotPositive { min_eigenvalue });
    };
    let det: f64 = chol.l_dirty().diagonal().iter().map(|d| d * d).product();
    let g = b * det.powf(-1.0 / 9.0);
    MetricData::new(g, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2::phi0;

    const TOL: f64 = 1e-12;

    #[test]
    fn index_tables_are_lexicographic() {
        let idx = multi_indices(4, 2);
        let as_pairs: Vec<Vec<usize>> = idx.iter().map(|&m| mask_indices(m).collect()).collect();
        assert_eq!(
            as_pairs,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(7, 0), 1);
        assert_eq!(binomial(7, 7), 1);
    }

    #[test]
    fn wedge_of_basis_covectors() {
        let e1 = AlternatingForm::basis(7, &[0]);
        let e2 = AlternatingForm::basis(7, &[1]);
        let w = e1.wedge(&e2).unwrap();
        assert_eq!(w, AlternatingForm::basis(7, &[0, 1]));
        assert_eq!(w.coeffs()[0], 1.0);
        assert_eq!(e2.wedge(&e1).unwrap(), &w * -1.0);
    }

    #[test]
    fn wedge_errors() {
        let a = AlternatingForm::basis(4, &[0, 1, 2]);
        let b = AlternatingForm::basis(4, &[3, 1]);
        assert!(matches!(a.wedge(&b), Err(Error::DegreeOverflow { .. })));
        let c = AlternatingForm::basis(7, &[0]);
        assert!(matches!(a.wedge(&c), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn phi0_wedge_star_phi0_is_seven_vol() {
        let phi = phi0();
        let m = MetricData::euclidean(7);
        let star = phi.hodge_star(&m).unwrap();
        let top = phi.wedge(&star).unwrap();
        assert!((top.top_coefficient() - 7.0).abs() < TOL);
    }

    #[test]
    fn contraction_of_phi0() {
        let phi = phi0();
        let i1 = phi.contract(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let expected = AlternatingForm::from_terms(
            7,
            2,
            &[(1.0, &[1, 2]), (-1.0, &[3, 4]), (-1.0, &[5, 6])],
        );
        assert!((&i1 - &expected).is_zero(TOL));
        let e12 = AlternatingForm::basis(7, &[0, 1]);
        assert_eq!(
            e12.contract(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap(),
            AlternatingForm::basis(7, &[1])
        );
        assert!(matches!(
            AlternatingForm::scalar(7, 1.0).contract(&[0.0; 7]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn star_of_unit_and_volume() {
        let m = MetricData::euclidean(7);
        let one = AlternatingForm::scalar(7, 1.0);
        let vol = one.hodge_star(&m).unwrap();
        assert_eq!(vol, AlternatingForm::volume(7));
        assert_eq!(vol.hodge_star(&m).unwrap(), one);
    }

    #[test]
    fn four_dimensional_self_duality() {
        let m = MetricData::euclidean(4);
        let omega1 = AlternatingForm::from_terms(4, 2, &[(1.0, &[0, 1]), (1.0, &[2, 3])]);
        let beta = AlternatingForm::from_terms(4, 2, &[(1.0, &[0, 1]), (-1.0, &[2, 3])]);
        assert!((&omega1.hodge_star(&m).unwrap() - &omega1).is_zero(TOL));
        assert!((&beta.hodge_star(&m).unwrap() + &beta).is_zero(TOL));
        let omega2 = AlternatingForm::from_terms(4, 2, &[(1.0, &[0, 2]), (1.0, &[3, 1])]);
        assert!(omega1.wedge(&omega2).unwrap().is_zero(TOL));
        assert!((omega1.wedge(&omega1).unwrap().top_coefficient() - 2.0).abs() < TOL);
    }

    #[test]
    fn non_positive_gram_rejected() {
        let mut g = DMatrix::identity(3, 3);
        g[(2, 2)] = -1.0;
        assert!(matches!(MetricData::new(g, 1), Err(Error::NotPositiveDefinite)));
        let mut g = DMatrix::identity(3, 3);
        g[(0, 1)] = 0.5;
        assert!(matches!(MetricData::new(g, 1), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn metric_of_phi0_is_identity() {
        let m = metric_from_positive3form(&phi0()).unwrap();
        assert!((m.gram() - DMatrix::<f64>::identity(7, 7)).amax() < TOL);
        assert!((m.volume_form().top_coefficient() - 1.0).abs() < TOL);
    }

    #[test]
    fn metric_has_conformal_weight_two() {
        let c: f64 = 1.7;
        let phi = &phi0() * c.powi(3);
        let m = metric_from_positive3form(&phi).unwrap();
        let expected = DMatrix::<f64>::identity(7, 7) * c * c;
        assert!((m.gram() - expected).amax() < 1e-12);
    }

    #[test]
    fn negative_phi_is_not_positive() {
        let phi = &phi0() * -1.0;
        assert!(matches!(
            metric_from_positive3form(&phi),
            Err(Error::NotPositive { .. })
        ));
        let degenerate = AlternatingForm::basis(7, &[0, 1, 2]);
        assert!(metric_from_positive3form(&degenerate).is_err());
    }

    #[test]
    fn evaluate_matches_components() {
        let phi = phi0();
        let e = |i: usize| {
            let mut v = vec![0.0; 7];
            v[i] = 1.0;
            v
        };
        let (a, b, c) = (e(0), e(3), e(4));
        assert_eq!(phi.evaluate(&[&a, &b, &c]).unwrap(), -1.0);
        assert_eq!(phi.evaluate(&[&b, &a, &c]).unwrap(), 1.0);
    }
}
