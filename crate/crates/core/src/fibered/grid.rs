//! Flat 4-torus with a uniform grid, and periodic fields of forms on it.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exterior::{binomial, multi_indices, wedge_sign, AlternatingForm, MetricData};

struct TorusInner {
    sides: [f64; 4],
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Flat T⁴ = Π ℝ/L_aℤ sampled on an N⁴ grid. Cheap to clone.
#[derive(Clone)]
pub struct Torus4(Arc<TorusInner>);

impl fmt::Debug for Torus4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Torus4")
            .field("sides", &self.0.sides)
            .field("n", &self.0.n)
            .finish()
    }
}

impl PartialEq for Torus4 {
    fn eq(&self, other: &Self) -> bool {
        self.0.sides == other.0.sides && self.0.n == other.0.n
    }
}

impl Torus4 {
    /// `n` must be a power of two ≥ 2 and all sides positive.
    pub fn new(sides: [f64; 4], n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("grid size {n} is not a power of two >= 2")));
        }
        if sides.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::Domain(format!("side lengths must be positive, got {sides:?}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self(Arc::new(TorusInner {
            sides,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })))
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::new([1.0; 4], n)
    }

    pub fn sides(&self) -> [f64; 4] {
        self.0.sides
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    /// Number of grid points N⁴.
    pub fn len(&self) -> usize {
        self.0.n.pow(4)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.0.sides.iter().product()
    }

    /// Grid index → integer coordinates, axis 0 slowest.
    pub fn multi_index(&self, idx: usize) -> [usize; 4] {
        let n = self.0.n;
        [idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n]
    }

    pub fn point(&self, idx: usize) -> [f64; 4] {
        let m = self.multi_index(idx);
        let n = self.0.n as f64;
        std::array::from_fn(|a| self.0.sides[a] * m[a] as f64 / n)
    }

    /// Angular wavenumber 2πk/L_a of FFT bin `j` along `axis`.
    pub fn wavenumber(&self, axis: usize, j: usize) -> f64 {
        let n = self.0.n;
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        2.0 * std::f64::consts::PI * k / self.0.sides[axis]
    }

    pub fn flat_metric(&self) -> MetricData {
        MetricData::euclidean(4)
    }

    /// Hyperkähler triple ω₁ = dx⁰¹+dx²³, ω₂ = dx⁰²+dx³¹, ω₃ = dx⁰³+dx¹².
    pub fn omega(&self, i: usize) -> AlternatingForm {
        hyperkahler_form(i)
    }

    fn transform_axis(&self, buf: &mut [Complex64], axis: usize, inverse: bool) {
        let n = self.0.n;
        let stride = n.pow(3 - axis as u32);
        let plan = if inverse { &self.0.inverse } else { &self.0.forward };
        if axis == 3 {
            buf.par_chunks_mut(n * 64).for_each(|chunk| plan.process(chunk));
            return;
        }
        let lines = self.len() / n;
        let mut gathered = vec![Complex64::default(); self.len()];
        gathered
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(l, line)| {
                let base = (l / stride) * stride * n + l % stride;
                for (j, x) in line.iter_mut().enumerate() {
                    *x = buf[base + j * stride];
                }
                plan.process(line);
            });
        // scatter back sequentially by line
        for l in 0..lines {
            let base = (l / stride) * stride * n + l % stride;
            for j in 0..n {
                buf[base + j * stride] = gathered[l * n + j];
            }
        }
    }

    pub(crate) fn fft4(&self, grid: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for axis in 0..4 {
            self.transform_axis(&mut buf, axis, false);
        }
        buf
    }

    pub(crate) fn ifft4(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        for axis in 0..4 {
            self.transform_axis(&mut buf, axis, true);
        }
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Spectral ∂/∂x^axis of a periodic grid; the Nyquist mode is dropped.
    pub fn partial(&self, grid: &[f64], axis: usize) -> Vec<f64> {
        let n = self.0.n;
        if is_constant(grid) {
            return vec![0.0; grid.len()];
        }
        let stride = n.pow(3 - axis as u32);
        let mut buf: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform_axis(&mut buf, axis, false);
        let mult: Vec<Complex64> = (0..n)
            .map(|j| {
                if j == n / 2 {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, self.wavenumber(axis, j) / n as f64)
                }
            })
            .collect();
        buf.par_iter_mut()
            .enumerate()
            .for_each(|(i, c)| *c *= mult[(i / stride) % n]);
        self.transform_axis(&mut buf, axis, true);
        buf.iter().map(|c| c.re).collect()
    }

    /// Positive-spectrum Laplacian Δ = −Σ∂² of a periodic grid.
    pub fn laplacian(&self, grid: &[f64]) -> Vec<f64> {
        if is_constant(grid) {
            return vec![0.0; grid.len()];
        }
        let mut spec = self.fft4(grid);
        let k2 = self.k_squared();
        spec.par_iter_mut().zip(k2.par_iter()).for_each(|(c, k)| *c *= *k);
        self.ifft4(spec)
    }

    /// |k|² at every FFT bin, in grid order.
    pub(crate) fn k_squared(&self) -> Vec<f64> {
        let n = self.0.n;
        let ks: Vec<[f64; 4]> = (0..n)
            .map(|j| std::array::from_fn(|a| self.wavenumber(a, j).powi(2)))
            .collect();
        (0..self.len())
            .map(|i| {
                let m = self.multi_index(i);
                (0..4).map(|a| ks[m[a]][a]).sum()
            })
            .collect()
    }
}

pub fn hyperkahler_form(i: usize) -> AlternatingForm {
    match i {
        0 => AlternatingForm::from_terms(4, 2, &[(1.0, &[0, 1]), (1.0, &[2, 3])]),
        1 => AlternatingForm::from_terms(4, 2, &[(1.0, &[0, 2]), (1.0, &[3, 1])]),
        2 => AlternatingForm::from_terms(4, 2, &[(1.0, &[0, 3]), (1.0, &[1, 2])]),
        _ => panic!("hyperkahler index {i} out of range 0..3"),
    }
}

fn is_constant(grid: &[f64]) -> bool {
    let first = grid[0];
    grid.iter().all(|&x| x == first)
}

/// A periodic degree-k form on the grid: C(4,k) coefficient grids.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseField {
    torus: Torus4,
    degree: usize,
    grids: Vec<Vec<f64>>,
}

impl BaseField {
    pub fn zeros(torus: &Torus4, degree: usize) -> Self {
        assert!(degree <= 4, "degree {degree} exceeds 4");
        Self {
            torus: torus.clone(),
            degree,
            grids: vec![vec![0.0; torus.len()]; binomial(4, degree)],
        }
    }

    pub fn from_grids(torus: &Torus4, degree: usize, grids: Vec<Vec<f64>>) -> Result<Self> {
        if degree > 4 || grids.len() != binomial(4, degree) || grids.iter().any(|g| g.len() != torus.len())
        {
            return Err(Error::DimensionMismatch(format!(
                "degree {degree} field needs {} grids of {} points",
                binomial(4, degree.min(4)),
                torus.len()
            )));
        }
        Ok(Self {
            torus: torus.clone(),
            degree,
            grids,
        })
    }

    pub fn constant(torus: &Torus4, form: &AlternatingForm) -> Self {
        assert_eq!(form.dim(), 4, "base forms live on R^4");
        Self {
            torus: torus.clone(),
            degree: form.degree(),
            grids: form.coeffs().iter().map(|&c| vec![c; torus.len()]).collect(),
        }
    }

    pub fn scalar_const(torus: &Torus4, value: f64) -> Self {
        Self::constant(torus, &AlternatingForm::scalar(4, value))
    }

    /// Scalar field sampled from a function of the point.
    pub fn scalar_from_fn(torus: &Torus4, f: impl Fn([f64; 4]) -> f64 + Sync) -> Self {
        let g = (0..torus.len())
            .into_par_iter()
            .map(|i| f(torus.point(i)))
            .collect();
        Self {
            torus: torus.clone(),
            degree: 0,
            grids: vec![g],
        }
    }

    pub fn torus(&self) -> &Torus4 {
        &self.torus
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grids(&self) -> &[Vec<f64>] {
        &self.grids
    }

    /// Grid of the coefficient at `indices` (increasing).
    pub fn grid(&self, component: usize) -> &[f64] {
        &self.grids[component]
    }

    /// The form at grid point `idx`.
    pub fn at(&self, idx: usize) -> AlternatingForm {
        AlternatingForm::new(4, self.degree, self.grids.iter().map(|g| g[idx]).collect())
            .expect("consistent shape")
    }

    /// Scalar value at `idx` of a degree-0 field.
    pub fn value(&self, idx: usize) -> f64 {
        debug_assert_eq!(self.degree, 0);
        self.grids[0][idx]
    }

    fn same_grid(&self, other: &Self) {
        assert!(self.torus == other.torus, "fields live on different grids");
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self {
            torus: self.torus.clone(),
            degree: self.degree,
            grids: self.grids.iter().map(|g| g.par_iter().map(|&x| f(x)).collect()).collect(),
        }
    }

    pub fn exp(&self) -> Self {
        self.map(f64::exp)
    }

    /// Pointwise product of a form field with a scalar field.
    pub fn scale_by(&self, s: &BaseField) -> Self {
        assert_eq!(s.degree, 0, "scale_by expects a scalar field");
        self.same_grid(s);
        let sg = &s.grids[0];
        Self {
            torus: self.torus.clone(),
            degree: self.degree,
            grids: self
                .grids
                .iter()
                .map(|g| g.par_iter().zip(sg.par_iter()).map(|(a, b)| a * b).collect())
                .collect(),
        }
    }

    /// Pointwise wedge product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.same_grid(other);
        let deg = self.degree + other.degree;
        if deg > 4 {
            return Err(Error::DegreeOverflow {
                lhs: self.degree,
                rhs: other.degree,
                dim: 4,
            });
        }
        let mut out = Self::zeros(&self.torus, deg);
        let ia = multi_indices(4, self.degree);
        let ib = multi_indices(4, other.degree);
        let ic = multi_indices(4, deg);
        for (a, &ma) in ia.iter().enumerate() {
            if self.grids[a].iter().all(|&x| x == 0.0) {
                continue;
            }
            for (b, &mb) in ib.iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let s = wedge_sign(ma, mb);
                let c = ic.iter().position(|&m| m == ma | mb).expect("mask present");
                let (ga, gb) = (&self.grids[a], &other.grids[b]);
                out.grids[c]
                    .par_iter_mut()
                    .zip(ga.par_iter().zip(gb.par_iter()))
                    .for_each(|(o, (x, y))| *o += s * x * y);
            }
        }
        Ok(out)
    }

    /// Spectral exterior derivative.
    pub fn d(&self) -> Self {
        if self.degree == 4 {
            return Self::zeros(&self.torus, 4);
        }
        let mut out = Self::zeros(&self.torus, self.degree + 1);
        let ia = multi_indices(4, self.degree);
        let ic = multi_indices(4, self.degree + 1);
        for (a, &ma) in ia.iter().enumerate() {
            if is_constant(&self.grids[a]) {
                continue;
            }
            for axis in 0..4 {
                let bit = 1u16 << axis;
                if ma & bit != 0 {
                    continue;
                }
                let s = wedge_sign(bit, ma);
                let c = ic.iter().position(|&m| m == ma | bit).expect("mask present");
                let der = self.torus.partial(&self.grids[a], axis);
                for (o, x) in out.grids[c].iter_mut().zip(der) {
                    *o += s * x;
                }
            }
        }
        out
    }

    /// Flat Hodge star on T⁴.
    pub fn star(&self) -> Self {
        let m = self.torus.flat_metric();
        let k = self.degree;
        let mut out = Self::zeros(&self.torus, 4 - k);
        for c in 0..self.grids.len() {
            let mut unit = AlternatingForm::zero(4, k);
            unit.coeffs_mut()[c] = 1.0;
            let image = unit.hodge_star(&m).expect("flat metric");
            for (t, coef) in image.terms() {
                if coef != 0.0 {
                    let j = multi_indices(4, 4 - k).iter().position(|&x| x == t).unwrap();
                    out.grids[j] = self.grids[c].iter().map(|x| coef * x).collect();
                }
            }
        }
        out
    }

    /// Interior product with the flat-metric dual of a 1-form field.
    pub fn interior(&self, v: &BaseField) -> Result<Self> {
        if v.degree != 1 || self.degree == 0 {
            return Err(Error::Domain("interior needs a 1-form field and a positive degree".into()));
        }
        self.same_grid(v);
        let mut out = Self::zeros(&self.torus, self.degree - 1);
        let ia = multi_indices(4, self.degree);
        let ic = multi_indices(4, self.degree - 1);
        for (a, &ma) in ia.iter().enumerate() {
            for axis in 0..4 {
                let bit = 1u16 << axis;
                if ma & bit == 0 {
                    continue;
                }
                let rest = ma & !bit;
                let s = wedge_sign(bit, rest);
                let c = ic.iter().position(|&m| m == rest).unwrap();
                let (ga, gv) = (&self.grids[a], &v.grids[axis]);
                out.grids[c]
                    .par_iter_mut()
                    .zip(ga.par_iter().zip(gv.par_iter()))
                    .for_each(|(o, (x, y))| *o += s * x * y);
            }
        }
        Ok(out)
    }

    /// Positive-spectrum Laplacian of a scalar field.
    pub fn laplacian(&self) -> Self {
        assert_eq!(self.degree, 0, "laplacian is implemented for scalar fields");
        Self {
            torus: self.torus.clone(),
            degree: 0,
            grids: vec![self.torus.laplacian(&self.grids[0])],
        }
    }

    /// Grid mean of a scalar field.
    pub fn mean(&self) -> f64 {
        assert_eq!(self.degree, 0);
        self.grids[0].iter().sum::<f64>() / self.torus.len() as f64
    }

    /// ∫ over T⁴ of a scalar or top-degree field (trapezoid = exact for
    /// band-limited data).
    pub fn integral(&self) -> f64 {
        assert!(self.degree == 0 || self.degree == 4);
        self.grids[0].iter().sum::<f64>() / self.torus.len() as f64 * self.torus.volume()
    }

    /// Root mean square over the grid of the Euclidean coefficient norm.
    pub fn rms(&self) -> f64 {
        let s: f64 = self.grids.iter().flat_map(|g| g.iter()).map(|x| x * x).sum();
        (s / self.torus.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.grids.iter().flat_map(|g| g.iter()).fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn min_value(&self) -> f64 {
        assert_eq!(self.degree, 0);
        self.grids[0].iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        self.same_grid(other);
        assert_eq!(self.degree, other.degree, "degree mismatch");
        Self {
            torus: self.torus.clone(),
            degree: self.degree,
            grids: self
                .grids
                .iter()
                .zip(&other.grids)
                .map(|(a, b)| a.par_iter().zip(b.par_iter()).map(|(x, y)| f(*x, *y)).collect())
                .collect(),
        }
    }
}

impl Add for &BaseField {
    type Output = BaseField;
    fn add(self, rhs: &BaseField) -> BaseField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &BaseField {
    type Output = BaseField;
    fn sub(self, rhs: &BaseField) -> BaseField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &BaseField {
    type Output = BaseField;
    fn neg(self) -> BaseField {
        self.map(|x| -x)
    }
}

impl Mul<f64> for &BaseField {
    type Output = BaseField;
    fn mul(self, rhs: f64) -> BaseField {
        self.map(|x| x * rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn band_limited(torus: &Torus4, seed: u64) -> BaseField {
        // deterministic mixture of low modes
        let s = seed as f64;
        let l = torus.sides();
        BaseField::scalar_from_fn(torus, move |x| {
            let p: [f64; 4] = std::array::from_fn(|a| 2.0 * PI * x[a] / l[a]);
            (p[0] + 0.3 * s).sin() * (p[1] - s).cos()
                + 0.5 * (2.0 * p[2] + p[3] + s).cos()
                + 0.2 * (p[0] - p[3]).sin()
        })
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Torus4::new([1.0; 4], 12).is_err());
        assert!(Torus4::new([1.0, 0.0, 1.0, 1.0], 8).is_err());
    }

    #[test]
    fn hyperkahler_triple_relations() {
        let m = MetricData::euclidean(4);
        for i in 0..3 {
            let wi = hyperkahler_form(i);
            assert!((&wi.hodge_star(&m).unwrap() - &wi).is_zero(1e-15));
            assert!((wi.norm(&m).unwrap() - 2f64.sqrt()).abs() < 1e-15);
            for j in 0..3 {
                let top = wi.wedge(&hyperkahler_form(j)).unwrap().top_coefficient();
                assert_eq!(top, if i == j { 2.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn derivative_of_sine() {
        let t = Torus4::new([2.0, 1.0, 1.5, 1.0], 8).unwrap();
        let f = BaseField::scalar_from_fn(&t, |x| (2.0 * PI * x[0] / 2.0).sin());
        let df = f.d();
        for i in 0..t.len() {
            let x = t.point(i);
            let expected = PI * (PI * x[0]).cos();
            assert!((df.grid(0)[i] - expected).abs() < 1e-12);
            for c in 1..4 {
                assert!(df.grid(c)[i].abs() < 1e-12);
            }
        }
        assert_eq!(BaseField::scalar_const(&t, 3.0).d().max_abs(), 0.0);
    }

    #[test]
    fn derivative_along_every_axis() {
        let t = Torus4::new([1.0, 2.0, 3.0, 4.0], 8).unwrap();
        for axis in 0..4 {
            let l = t.sides()[axis];
            let f = BaseField::scalar_from_fn(&t, |x| (4.0 * PI * x[axis] / l).cos());
            let df = f.d();
            for i in 0..t.len() {
                let x = t.point(i);
                let expected = -4.0 * PI / l * (4.0 * PI * x[axis] / l).sin();
                assert!((df.grid(axis)[i] - expected).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn d_squared_vanishes() {
        let t = Torus4::new([1.0, 1.3, 0.7, 2.0], 8).unwrap();
        let f = band_limited(&t, 1);
        assert!(f.d().d().max_abs() < 1e-11);
        let a = f.d().wedge(&BaseField::constant(&t, &AlternatingForm::basis(4, &[2]))).unwrap();
        let b = &a.scale_by(&band_limited(&t, 2)) + &a;
        assert!(b.d().d().max_abs() < 1e-10);
    }

    fn fd_error(n: usize) -> f64 {
        let t = Torus4::unit(n).unwrap();
        let f = band_limited(&t, 3);
        let df = f.d();
        let h = 1.0 / n as f64;
        let mut worst: f64 = 0.0;
        for i in 0..t.len() {
            let m = t.multi_index(i);
            let at = |k: i64| {
                let j = ((m[1] as i64 + k).rem_euclid(n as i64)) as usize;
                f.grid(0)[((m[0] * n + j) * n + m[2]) * n + m[3]]
            };
            let fd = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
            worst = worst.max((fd - df.grid(1)[i]).abs());
        }
        worst
    }

    #[test]
    fn finite_differences_converge_at_fourth_order() {
        let (coarse, fine) = (fd_error(16), fd_error(32));
        assert!(coarse < 1e-2);
        assert!(coarse / fine > 12.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn star_on_flat_torus() {
        let t = Torus4::unit(2).unwrap();
        let w = BaseField::constant(&t, &hyperkahler_form(1));
        assert_eq!(&w.star() - &w, BaseField::zeros(&t, 2));
        let one = BaseField::scalar_const(&t, 1.0);
        assert_eq!(one.star().grid(0)[0], 1.0);
        let asd = BaseField::constant(&t, &AlternatingForm::from_terms(4, 2, &[(1.0, &[0, 1]), (-1.0, &[2, 3])]));
        assert_eq!((&asd.star() + &asd).max_abs(), 0.0);
    }

    #[test]
    fn interior_matches_pointwise_contraction() {
        let t = Torus4::unit(4).unwrap();
        let u = band_limited(&t, 4);
        let du = u.d();
        let vol = BaseField::constant(&t, &AlternatingForm::volume(4));
        let lhs = vol.interior(&du).unwrap();
        // ι_v vol = *v on flat R⁴
        assert!((&lhs - &du.star()).max_abs() < 1e-14);
    }

    #[test]
    fn laplacian_of_eigenfunction() {
        let t = Torus4::new([1.0, 2.0, 1.0, 1.0], 8).unwrap();
        let f = BaseField::scalar_from_fn(&t, |x| (2.0 * PI * x[1] / 2.0).sin() * (2.0 * PI * x[3]).cos());
        let lap = f.laplacian();
        let k2 = PI * PI + 4.0 * PI * PI;
        assert!((&lap - &(&f * k2)).max_abs() < 1e-11);
        let alt = f.d().star().d().star();
        assert!((&lap + &alt).max_abs() < 1e-10);
    }
}
