//! Dense complex linear algebra with singular-value based rank decisions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Thresholds for rank and residual decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Singular values below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Absolute residual accepted for consistency checks.
    pub residual_abs: f64,
    /// Lower bound for the reference scale of rank decisions: the threshold is
    /// `rank_rel * max(sigma_max, floor)`, so pure round-off is not mistaken
    /// for rank when the expected entry size is known.
    pub floor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-8,
            residual_abs: 1e-9,
            floor: 0.0,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, residual_abs: f64) -> Self {
        assert!(
            rank_rel > 0.0 && rank_rel < 1.0,
            "rank tolerance must lie in (0,1)"
        );
        assert!(
            residual_abs > 0.0 && residual_abs < 1.0,
            "residual tolerance must lie in (0,1)"
        );
        Tolerance {
            rank_rel,
            residual_abs,
            floor: 0.0,
        }
    }

    pub fn with_floor(&self, floor: f64) -> Self {
        Tolerance { floor, ..*self }
    }

    /// The same tolerance with the rank threshold scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerance {
            rank_rel: self.rank_rel * factor,
            ..*self
        }
    }
}

fn to_faer(m: &CMatrix) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        C64::new(z.re, z.im)
    })
}

/// Full SVD of `m`: `(u, sigma, v)` with `u` rows x rows, `v` cols x cols and
/// `sigma` sorted descending (length min(rows, cols)).
pub fn full_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (CMatrix::identity(r, r), Vec::new(), CMatrix::identity(c, c));
    }
    if !all_finite(m) {
        panic!("SVD of a matrix with non-finite entries");
    }
    let svd = to_faer(m).svd().expect("SVD did not converge");
    let sigma: Vec<f64> = (0..r.min(c)).map(|i| svd.S()[i].re).collect();
    (from_faer(svd.U()), sigma, from_faer(svd.V()))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let s = to_faer(m).singular_values().expect("SVD did not converge");
    let mut s: Vec<f64> = s.into_iter().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn rank_from_sigma(sigma: &[f64], tol: &Tolerance) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0).max(tol.floor);
    if max <= f64::MIN_POSITIVE {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol.rank_rel * max).count()
}

/// Number of singular values above `rank_rel * sigma_max`.
pub fn rank(m: &CMatrix, tol: &Tolerance) -> usize {
    rank_from_sigma(&singular_values(m), tol)
}

/// Rank together with a stability flag: `true` when the rank is unchanged
/// with the threshold multiplied and divided by 10.
pub fn rank_checked(m: &CMatrix, tol: &Tolerance) -> (usize, bool) {
    let s = singular_values(m);
    let r = rank_from_sigma(&s, tol);
    let hi = rank_from_sigma(&s, &tol.scaled(10.0));
    let lo = rank_from_sigma(&s, &tol.scaled(0.1));
    (r, hi == r && lo == r)
}

/// Orthonormal basis of the numerical kernel, `cols - rank` vectors.
pub fn nullspace(m: &CMatrix, tol: &Tolerance) -> Vec<CVector> {
    let c = m.ncols();
    if c == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return identity_columns(c);
    }
    let (_, sigma, v) = full_svd(m);
    let r = rank_from_sigma(&sigma, tol);
    (r..c).map(|j| v.column(j).into_owned()).collect()
}

/// Orthonormal basis of the column space.
pub fn column_space(m: &CMatrix, tol: &Tolerance) -> Vec<CVector> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let (u, sigma, _) = full_svd(m);
    let r = rank_from_sigma(&sigma, tol);
    (0..r).map(|j| u.column(j).into_owned()).collect()
}

fn identity_columns(c: usize) -> Vec<CVector> {
    (0..c)
        .map(|i| {
            let mut e = CVector::zeros(c);
            e[i] = C64::new(1.0, 0.0);
            e
        })
        .collect()
}

/// Minimum-norm least-squares solution and the 2-norm of `m x - b`.
pub fn solve_least_squares(m: &CMatrix, b: &CVector, tol: &Tolerance) -> (CVector, f64) {
    assert_eq!(
        m.nrows(),
        b.len(),
        "right-hand side length must equal row count"
    );
    let c = m.ncols();
    if c == 0 || m.nrows() == 0 {
        return (CVector::zeros(c), b.norm());
    }
    let (u, sigma, v) = full_svd(m);
    let r = rank_from_sigma(&sigma, tol);
    let mut x = CVector::zeros(c);
    for j in 0..r {
        let coef = u.column(j).dotc(b) / C64::new(sigma[j], 0.0);
        x += v.column(j) * coef;
    }
    let res = (m * &x - b).norm();
    (x, res)
}

/// Stacks vectors as the columns of a matrix.
pub fn columns_to_matrix(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Row-major flattening of an n x n matrix.
pub fn flatten(m: &CMatrix) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub fn unflatten(n: usize, v: &[C64]) -> CMatrix {
    CMatrix::from_row_slice(n, n, v)
}

/// `exp(i * theta)`.
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
