//! Integer intersection lattices of K3 and T⁴, and the arithmetic window
//! for instanton charge, bundle rank and T-dual integrality.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LatticeKind {
    /// E₈(−1) ⊕ E₈(−1) ⊕ U ⊕ U ⊕ U, rank 22.
    K3,
    /// U ⊕ U ⊕ U in the pair basis (01, 23, 02, 31, 03, 12), rank 6.
    T4,
}

impl LatticeKind {
    /// c₂ of the base's tangent bundle entering the charge balance.
    pub fn c2_base(self) -> i64 {
        match self {
            LatticeKind::K3 => 24,
            LatticeKind::T4 => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionLattice {
    kind: LatticeKind,
    gram: Vec<Vec<i64>>,
}

fn e8_negative() -> Vec<Vec<i64>> {
    // Bourbaki labelling: chain 1-3-4-5-6-7-8 with 2 attached to 4
    let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = -2;
    }
    for (a, b) in edges {
        g[a][b] = 1;
        g[b][a] = 1;
    }
    g
}

fn hyperbolic() -> Vec<Vec<i64>> {
    vec![vec![0, 1], vec![1, 0]]
}

fn block_sum(blocks: &[Vec<Vec<i64>>]) -> Vec<Vec<i64>> {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut g = vec![vec![0i64; n]; n];
    let mut off = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                g[off + i][off + j] = *x;
            }
        }
        off += b.len();
    }
    g
}

/// Exact determinant by fraction-free Gaussian elimination.
pub fn bareiss_determinant(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

impl IntersectionLattice {
    pub fn new(kind: LatticeKind) -> Self {
        let gram = match kind {
            LatticeKind::K3 => block_sum(&[e8_negative(), e8_negative(), hyperbolic(), hyperbolic(), hyperbolic()]),
            LatticeKind::T4 => block_sum(&[hyperbolic(), hyperbolic(), hyperbolic()]),
        };
        let lattice = Self { kind, gram };
        debug_assert!(lattice.is_even() && lattice.is_unimodular());
        lattice
    }

    pub fn k3() -> Self {
        Self::new(LatticeKind::K3)
    }

    pub fn t4() -> Self {
        Self::new(LatticeKind::T4)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn is_even(&self) -> bool {
        self.gram.iter().enumerate().all(|(i, r)| r[i] % 2 == 0)
    }

    pub fn determinant(&self) -> i128 {
        bareiss_determinant(&self.gram)
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs() == 1
    }

    pub fn pairing(&self, a: &[i64], b: &[i64]) -> Result<i64> {
        let n = self.rank();
        if a.len() != n || b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "class vectors must have length {n}, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        let mut s = 0i64;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * self.gram[i][j] * b[j];
            }
        }
        Ok(s)
    }

    /// Q(c) = cᵀ G c.
    pub fn q_value(&self, c: &[i64]) -> Result<i64> {
        self.pairing(c, c)
    }
}

/// Q of a class given by its periods in the T⁴ pair basis.
pub fn pair_q(p: &[i64; 6]) -> i64 {
    2 * (p[0] * p[1] + p[2] * p[3] + p[4] * p[5])
}

/// Q of a rational period vector in the T⁴ pair basis.
pub fn pair_q_rational(p: &[Rational64; 6]) -> Rational64 {
    Rational64::from_integer(2) * (p[0] * p[1] + p[2] * p[3] + p[4] * p[5])
}

/// Verdicts on the charge window for given (t², α, r) and classes of β_j.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCertificate {
    pub t_squared: Scalar,
    pub alpha: Scalar,
    pub rank: u32,
    pub q_values: [i64; 3],
    pub c2_base: i64,
    /// (2t²/α) Σ Q(β_j/2π).
    pub ratio: Scalar,
    /// c₂(V) = c2_base + ratio when integral.
    pub c2_target: Option<i64>,
    pub integrality_ok: bool,
    /// r ≤ c2_base + ratio.
    pub rank_ok: bool,
    /// Both inputs were exact rationals.
    pub exact: bool,
    /// Set when the verdicts used floating-point tolerance.
    pub warning: Option<String>,
}

impl ConstraintCertificate {
    /// Recomputes the verdicts from the stored inputs.
    pub fn is_consistent(&self) -> bool {
        check_constraints(self.t_squared, self.alpha, self.rank, self.q_values, self.c2_base)
            .map(|c| c == *self)
            .unwrap_or(false)
    }
}

const FLOAT_INTEGRALITY_TOL: f64 = 1e-9;

pub fn check_constraints(
    t_squared: Scalar,
    alpha: Scalar,
    rank: u32,
    q_values: [i64; 3],
    c2_base: i64,
) -> Result<ConstraintCertificate> {
    if alpha.is_zero() {
        return Err(Error::Domain("alpha must be nonzero".into()));
    }
    if rank == 0 {
        return Err(Error::Domain("bundle rank must be at least 1".into()));
    }
    if t_squared.to_f64() <= 0.0 {
        return Err(Error::Domain("t^2 must be positive".into()));
    }
    let q: i64 = q_values.iter().sum();
    let (ratio, c2_target, integrality_ok, rank_ok, warning) = match (t_squared.exact(), alpha.exact()) {
        (Some(t2), Some(a)) => {
            let ratio = Rational64::from_integer(2 * q) * t2 / a;
            let total = ratio + Rational64::from_integer(c2_base);
            let integral = ratio.is_integer();
            let rank_ok = Rational64::from_integer(rank as i64) <= total;
            (Scalar::Exact(ratio), integral.then(|| total.to_integer()), integral, rank_ok, None)
        }
        _ => {
            let ratio = 2.0 * q as f64 * t_squared.to_f64() / alpha.to_f64();
            let total = ratio + c2_base as f64;
            let nearest = total.round();
            let integral = (total - nearest).abs() <= FLOAT_INTEGRALITY_TOL * (1.0 + total.abs());
            let rank_ok = rank as f64 <= total + FLOAT_INTEGRALITY_TOL * (1.0 + total.abs());
            (
                Scalar::Float(ratio),
                integral.then_some(nearest as i64),
                integral,
                rank_ok,
                Some("non-rational input: integrality decided within 1e-9".to_string()),
            )
        }
    };
    Ok(ConstraintCertificate {
        t_squared,
        alpha,
        rank,
        q_values,
        c2_base,
        ratio,
        c2_target,
        integrality_ok,
        rank_ok,
        exact: warning.is_none(),
        warning,
    })
}

/// True iff every t²-scaled period of every β_j is an integer. Periods are
/// already normalized by 2π and the 2-cycle areas, so side lengths drop out.
pub fn tdual_integrality(t_squared: Scalar, periods: &[[i64; 6]; 3]) -> bool {
    periods.iter().all(|p| scaled_periods(t_squared, p).is_some())
}

/// t²·n as integers, or None if some entry is not integral.
pub fn scaled_periods(t_squared: Scalar, p: &[i64; 6]) -> Option<[i64; 6]> {
    let mut out = [0i64; 6];
    for (o, &n) in out.iter_mut().zip(p) {
        *o = match t_squared {
            Scalar::Exact(t2) => {
                let v = t2 * Rational64::from_integer(n);
                if !v.is_integer() {
                    return None;
                }
                v.to_integer()
            }
            Scalar::Float(t2) => {
                let v = t2 * n as f64;
                if (v - v.round()).abs() > FLOAT_INTEGRALITY_TOL * (1.0 + v.abs()) {
                    return None;
                }
                v.round() as i64
            }
        };
    }
    Some(out)
}
