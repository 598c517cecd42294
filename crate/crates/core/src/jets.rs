//! Truncated power series in one variable `t`, modulo `t^(N+1)`, with scalar
//! and matrix coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::presentation::{FreeWord, Presentation};

/// Scalar jet `c_0 + c_1 t + ... + c_N t^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<C64>,
}

impl Jet {
    /// Jet of order `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a jet needs at least the constant coefficient"
        );
        Jet { coeffs }
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order());
        Jet::new(self.coeffs[..=order].to_vec())
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::JetOrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let n = self.order();
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(Jet::new(out))
    }

    /// Multiplicative inverse by the power-series recursion.
    pub fn inv(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return Err(Error::JetNotInvertible);
        }
        let mut b = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        b[0] = a0.inv();
        for k in 1..b.len() {
            let s: C64 = (1..=k).map(|j| self.coeffs[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Ok(Jet::new(b))
    }
}

/// Square matrix over `C[t]/(t^(N+1))`, stored as `N+1` coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct JetMatrix {
    coeffs: Vec<CMatrix>,
}

impl JetMatrix {
    pub fn from_coeffs(coeffs: Vec<CMatrix>) -> Self {
        assert!(!coeffs.is_empty());
        let n = coeffs[0].nrows();
        assert!(
            coeffs.iter().all(|c| c.nrows() == n && c.ncols() == n),
            "jet matrix coefficients must be n x n"
        );
        JetMatrix { coeffs }
    }

    pub fn constant(m: &CMatrix, order: usize) -> Self {
        let n = m.nrows();
        let mut coeffs = vec![CMatrix::zeros(n, n); order + 1];
        coeffs[0] = m.clone();
        JetMatrix { coeffs }
    }

    pub fn identity(n: usize, order: usize) -> Self {
        Self::constant(&CMatrix::identity(n, n), order)
    }

    pub fn zero(n: usize, order: usize) -> Self {
        JetMatrix {
            coeffs: vec![CMatrix::zeros(n, n); order + 1],
        }
    }

    /// `t^k m` as a jet of the given order (zero if `k > order`).
    pub fn monomial(m: &CMatrix, k: usize, order: usize) -> Self {
        let mut j = Self::zero(m.nrows(), order);
        if k <= order {
            j.coeffs[k] = m.clone();
        }
        j
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &CMatrix {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn entry(&self, i: usize, j: usize) -> Jet {
        Jet::new(self.coeffs.iter().map(|c| c[(i, j)]).collect())
    }

    pub fn truncate(&self, order: usize) -> JetMatrix {
        assert!(order <= self.order());
        JetMatrix {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Same coefficients, padded with zeros up to `order`.
    pub fn extend(&self, order: usize) -> JetMatrix {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, CMatrix::zeros(self.n(), self.n()));
        JetMatrix { coeffs }
    }

    pub fn scale(&self, s: C64) -> JetMatrix {
        JetMatrix {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn check(&self, other: &JetMatrix) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::JetOrderMismatch(self.order(), other.order()));
        }
        if self.n() != other.n() {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.n(),
                self.n(),
                other.n(),
                other.n()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &JetMatrix) -> Result<JetMatrix> {
        self.check(other)?;
        Ok(JetMatrix {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &JetMatrix) -> Result<JetMatrix> {
        self.check(other)?;
        let n = self.order();
        let mut out = vec![CMatrix::zeros(self.n(), self.n()); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(JetMatrix { coeffs: out })
    }

    /// Inverse via the order-0 inverse and a Neumann series in the nilpotent part.
    pub fn inv(&self) -> Result<JetMatrix> {
        let a0inv = self.coeffs[0]
            .clone()
            .try_inverse()
            .ok_or(Error::JetNotInvertible)?;
        let order = self.order();
        // A = A0 (I + X), X = A0^{-1} (A - A0), so A^{-1} = sum (-X)^k A0^{-1}
        let mut x = self.clone();
        x.coeffs[0] = CMatrix::zeros(self.n(), self.n());
        let x = &JetMatrix::constant(&a0inv, order) * &x;
        let neg_x = -&x;
        let mut term = JetMatrix::identity(self.n(), order);
        let mut sum = term.clone();
        for _ in 0..order {
            term = &term * &neg_x;
            sum = &sum + &term;
        }
        Ok(&sum * &JetMatrix::constant(&a0inv, order))
    }

    /// `sum_k a^k / k!`, which is a finite sum when the constant term vanishes.
    pub fn exp(&self) -> Result<JetMatrix> {
        if self.coeffs[0].iter().any(|c| c.norm() != 0.0) {
            return Err(Error::JetExpConstantTerm);
        }
        let order = self.order();
        let mut term = JetMatrix::identity(self.n(), order);
        let mut sum = term.clone();
        for k in 1..=order {
            term = (&term * self).scale(C64::new(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        Ok(sum)
    }

    /// `sum_k t^k C_k` at a numeric `t`.
    pub fn eval_at(&self, t: f64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n(), self.n());
        for c in self.coeffs.iter().rev() {
            acc = acc * C64::new(t, 0.0) + c;
        }
        acc
    }

    /// Largest entry modulus of each coefficient.
    pub fn order_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(crate::linalg::max_abs).collect()
    }
}

impl Add for &JetMatrix {
    type Output = JetMatrix;
    /// Panics on mismatched shapes; see [`JetMatrix::try_add`].
    fn add(self, other: &JetMatrix) -> JetMatrix {
        self.try_add(other).expect("jet matrix shapes differ")
    }
}

impl Sub for &JetMatrix {
    type Output = JetMatrix;
    fn sub(self, other: &JetMatrix) -> JetMatrix {
        self.try_add(&-other).expect("jet matrix shapes differ")
    }
}

impl Neg for &JetMatrix {
    type Output = JetMatrix;
    fn neg(self) -> JetMatrix {
        JetMatrix {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &JetMatrix {
    type Output = JetMatrix;
    /// Panics on mismatched shapes; see [`JetMatrix::try_mul`].
    fn mul(self, other: &JetMatrix) -> JetMatrix {
        self.try_mul(other).expect("jet matrix shapes differ")
    }
}

/// Evaluates a word on jet-matrix images with precomputed inverses.
pub fn jet_word_eval(w: &FreeWord, images: &[JetMatrix], inverses: &[JetMatrix]) -> JetMatrix {
    let n = images[0].n();
    let order = images[0].order();
    let mut acc = JetMatrix::identity(n, order);
    for l in w.letters() {
        let m = if l.inverse {
            &inverses[l.generator]
        } else {
            &images[l.generator]
        };
        acc = &acc * m;
    }
    acc
}

/// `W_j(images) - I` for every relator.
pub fn relator_residual(p: &Presentation, images: &[JetMatrix]) -> Result<Vec<JetMatrix>> {
    if images.len() != p.generator_count() {
        return Err(Error::Dimension(format!(
            "{} images for {} generators",
            images.len(),
            p.generator_count()
        )));
    }
    let order = images[0].order();
    let n = images[0].n();
    for m in images {
        if m.order() != order {
            return Err(Error::JetOrderMismatch(order, m.order()));
        }
        if m.n() != n {
            return Err(Error::Dimension("images of different sizes".into()));
        }
    }
    let inverses = images.iter().map(|m| m.inv()).collect::<Result<Vec<_>>>()?;
    let id = JetMatrix::identity(n, order);
    Ok(p.relators()
        .iter()
        .map(|w| &jet_word_eval(w, images, &inverses) - &id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn scalar_examples() {
        let a = Jet::new(vec![c(1.0), c(1.0), c(0.0)]);
        let b = Jet::new(vec![c(1.0), c(-1.0), c(0.0)]);
        assert_eq!(
            a.try_mul(&b).unwrap(),
            Jet::new(vec![c(1.0), c(0.0), c(-1.0)])
        );
        assert_eq!(a.inv().unwrap(), Jet::new(vec![c(1.0), c(-1.0), c(1.0)]));
        assert_eq!(
            Jet::new(vec![c(0.0), c(1.0)]).inv(),
            Err(Error::JetNotInvertible)
        );
        assert_eq!(
            a.try_mul(&a.truncate(1)),
            Err(Error::JetOrderMismatch(2, 1))
        );
    }

    #[test]
    fn exp_examples() {
        assert_eq!(
            JetMatrix::zero(2, 3).exp().unwrap(),
            JetMatrix::identity(2, 3)
        );
        let mut e12 = CMatrix::zeros(2, 2);
        e12[(0, 1)] = c(1.0);
        let e = JetMatrix::monomial(&e12, 1, 2).exp().unwrap();
        assert_eq!(
            e,
            &JetMatrix::identity(2, 2) + &JetMatrix::monomial(&e12, 1, 2)
        );
        assert_eq!(
            JetMatrix::identity(2, 2).exp(),
            Err(Error::JetExpConstantTerm)
        );
    }

    #[test]
    fn exp_group_law_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 3);
            let x = JetMatrix::monomial(&a, 1, 5);
            let prod = &x.exp().unwrap() * &(-&x).exp().unwrap();
            let diff = &prod - &JetMatrix::identity(3, 5);
            assert!(diff.order_norms().iter().all(|&v| v < 1e-12));
            let g = &JetMatrix::constant(
                &(random_matrix(&mut rng, 3) + CMatrix::identity(3, 3) * c(3.0)),
                5,
            ) + &JetMatrix::monomial(&a, 2, 5);
            let diff = &(&g * &g.inv().unwrap()) - &JetMatrix::identity(3, 5);
            assert!(diff.order_norms().iter().all(|&v| v < 1e-12));
        }
    }

    #[test]
    fn residual_of_constant_representation() {
        let p = Presentation::from_strings("xy", &["xyxYXY"], None).unwrap();
        let d = CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![
            crate::linalg::cis(0.5),
            crate::linalg::cis(-0.5),
        ]));
        let imgs = vec![JetMatrix::constant(&d, 2); 2];
        let res = relator_residual(&p, &imgs).unwrap();
        assert!(res[0].order_norms().iter().all(|&v| v < 1e-14));
        // order-0 images that violate the relator
        let mut bad = imgs.clone();
        let mut m = d.clone();
        m[(0, 1)] = c(1.0);
        bad[1] = JetMatrix::constant(&m, 2);
        bad[0] = JetMatrix::constant(&m.transpose(), 2);
        let res = relator_residual(&p, &bad).unwrap();
        assert!(max_abs(res[0].coeff(0)) > 1e-3);
    }

    proptest! {
        #[test]
        fn truncation_is_coherent(seed in 0u64..1000, n in 1usize..4, hi in 2usize..6, lo in 0usize..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mk = |rng: &mut ChaCha8Rng| {
                let mut cs: Vec<CMatrix> = (0..=hi).map(|_| random_matrix(rng, n)).collect();
                cs[0] += CMatrix::identity(n, n) * c(4.0);
                JetMatrix::from_coeffs(cs)
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let full = (&a * &b.inv().unwrap()).truncate(lo);
            let low = &a.truncate(lo) * &b.truncate(lo).inv().unwrap();
            let d = &full - &low;
            prop_assert!(d.order_norms().iter().all(|&v| v < 1e-10));
        }
    }
}
