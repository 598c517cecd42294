//! Local dimension bookkeeping for the character variety at the character of
//! the diagonal representation: torus weights on `H^1`, the slice quotient,
//! and the tangent data of the triangular component.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cone::TangentBasis;
use crate::error::{Error, Result};
use crate::foxcoh::{twisted_complex, CoefficientModule, SlBasis};
use crate::linalg::{columns_to_matrix, rank, CMatrix, CVector, Tolerance, C64};
use crate::presentation::Presentation;
use crate::repbuild::{build_triangular, Cocycle, EigenvalueData, Representation};

/// Which `H^1` representative a weight belongs to (0-based `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightLabel {
    H(usize),
    UPlus(usize),
    UMinus(usize),
}

/// Character of the diagonal torus acting on one basis direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusWeight {
    pub label: WeightLabel,
    pub weight: Vec<i64>,
}

impl TorusWeight {
    pub fn is_zero(&self) -> bool {
        self.weight.iter().all(|&w| w == 0)
    }

    /// `prod s_i^{w_i}`.
    pub fn character(&self, s: &[C64]) -> C64 {
        self.weight
            .iter()
            .zip(s)
            .fold(C64::new(1.0, 0.0), |acc, (&w, &si)| acc * si.powi(w as i32))
    }
}

/// `H_i -> 0`, `U_i^+ -> e_i - e_(i+1)`, `U_i^- -> e_(i+1) - e_i`.
pub fn standard_weights(n: usize) -> Vec<TorusWeight> {
    let e = |i: usize, j: usize, sign: i64| -> Vec<i64> {
        let mut w = vec![0; n];
        w[i] += sign;
        w[j] -= sign;
        w
    };
    let mut out = Vec::new();
    for i in 0..n - 1 {
        out.push(TorusWeight {
            label: WeightLabel::UPlus(i),
            weight: e(i, i + 1, 1),
        });
        out.push(TorusWeight {
            label: WeightLabel::UMinus(i),
            weight: e(i, i + 1, -1),
        });
        out.push(TorusWeight {
            label: WeightLabel::H(i),
            weight: vec![0; n],
        });
    }
    out
}

/// Dimension of the invariant quotient of a torus representation whose
/// nonzero weights come in opposite pairs: zero weights contribute one each,
/// the rest contribute their count minus the rank of the weight lattice.
pub fn slice_quotient_dim(n: usize, weights: &[TorusWeight]) -> Result<usize> {
    let mut unmatched: Vec<&Vec<i64>> = Vec::new();
    let mut nonzero = Vec::new();
    for w in weights {
        if w.weight.len() != n {
            return Err(Error::WeightPattern(format!(
                "weight {:?} has length {}",
                w.label,
                w.weight.len()
            )));
        }
        if w.is_zero() {
            continue;
        }
        nonzero.push(&w.weight);
        let neg: Vec<i64> = w.weight.iter().map(|x| -x).collect();
        match unmatched.iter().position(|u| **u == neg) {
            Some(pos) => {
                unmatched.swap_remove(pos);
            }
            None => unmatched.push(&w.weight),
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::WeightPattern(format!(
            "{} weights without an opposite partner",
            unmatched.len()
        )));
    }
    let zeros = weights.len() - nonzero.len();
    if nonzero.is_empty() {
        return Ok(zeros);
    }
    let cols: Vec<CVector> = nonzero
        .iter()
        .map(|w| CVector::from_iterator(n, w.iter().map(|&x| C64::new(x as f64, 0.0))))
        .collect();
    let r = rank(&columns_to_matrix(n, &cols), &Tolerance::default());
    Ok(zeros + nonzero.len() - r)
}

/// Slice and tangent dimensions at the diagonal character.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub n: usize,
    pub dim_h1_quotient: usize,
    pub dim_tx_abelian: usize,
    pub dim_tx_component: usize,
    pub intersection_dim: usize,
    pub rank_dt: usize,
    pub h0_triangular: usize,
    pub h1_triangular: usize,
    /// Zero-weight and paired basis directions.
    pub zero_weights: usize,
    pub paired_weights: usize,
    /// Worst deviation of the torus action from the predicted characters.
    pub torus_residual: f64,
}

impl SliceReport {
    /// `(2(n-1), n-1, n-1, 0, n-1, 0)`.
    pub fn expected(n: usize) -> (usize, usize, usize, usize, usize, usize) {
        (2 * (n - 1), n - 1, n - 1, 0, n - 1, 0)
    }

    pub fn tuple(&self) -> (usize, usize, usize, usize, usize, usize) {
        (
            self.dim_h1_quotient,
            self.dim_tx_abelian,
            self.dim_tx_component,
            self.intersection_dim,
            self.rank_dt,
            self.h0_triangular,
        )
    }

    /// Failed identities, empty when the report is as predicted.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.tuple() != Self::expected(self.n) {
            out.push(format!(
                "slice report {:?} differs from {:?}",
                self.tuple(),
                Self::expected(self.n)
            ));
        }
        if self.rank_dt != self.h1_triangular {
            out.push(format!(
                "rank dt = {} but h1 = {}",
                self.rank_dt, self.h1_triangular
            ));
        }
        if self.zero_weights != self.n - 1 || self.paired_weights != 2 * (self.n - 1) {
            out.push(format!(
                "weight bookkeeping: {} zero, {} paired",
                self.zero_weights, self.paired_weights
            ));
        }
        if self.torus_residual >= 1e-8 {
            out.push(format!("torus action residual {:.3e}", self.torus_residual));
        }
        out
    }
}

/// `max |s U s^{-1} - chi(s) U|` over random diagonal `s` and the `H^1`
/// representatives of the tangent basis.
pub fn torus_action_residual(basis: &TangentBasis, samples: usize, seed: u64) -> f64 {
    let n = basis.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = standard_weights(n);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s: Vec<C64> = (0..n)
            .map(|_| {
                C64::from_polar(
                    rng.gen_range(0.5..2.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let g = CMatrix::from_diagonal(&CVector::from_vec(s.clone()));
        let gi = CMatrix::from_diagonal(&CVector::from_vec(s.iter().map(|z| z.inv()).collect()));
        for w in &weights {
            let u: &Cocycle = match w.label {
                WeightLabel::H(i) => &basis.h[i],
                WeightLabel::UPlus(i) => &basis.u_plus[i],
                WeightLabel::UMinus(i) => &basis.u_minus[i],
            };
            let chi = w.character(&s);
            for m in &u.values {
                let d = &g * m * &gi - m * chi;
                let scale = 1.0 + crate::linalg::max_abs(m);
                worst = worst.max(crate::linalg::max_abs(&d) / scale);
            }
        }
    }
    worst
}

/// Dimension of `(V_abelian ∩ V_triangular) / B^1` from the cocycle spans.
pub fn tangent_intersection_dim(basis: &TangentBasis, tol: &Tolerance) -> usize {
    let sl = SlBasis::new(basis.n);
    let coords = |cs: &[&Cocycle]| -> Vec<CVector> {
        cs.iter().map(|c| sl.cochain_coords(&c.values)).collect()
    };
    let b: Vec<&Cocycle> = basis.coboundaries.iter().collect();
    let ab: Vec<&Cocycle> = basis.h.iter().chain(&basis.coboundaries).collect();
    let tri: Vec<&Cocycle> = basis
        .u_plus
        .iter()
        .chain(&basis.u_minus)
        .chain(&basis.coboundaries)
        .collect();
    let both: Vec<&Cocycle> = basis
        .h
        .iter()
        .chain(&basis.u_plus)
        .chain(&basis.u_minus)
        .chain(&basis.coboundaries)
        .collect();
    let rows = sl.dim() * basis.rho.images.len();
    let r = |cs: &[&Cocycle]| rank(&columns_to_matrix(rows, &coords(cs)), tol);
    let inter = r(&ab) + r(&tri) - r(&both);
    inter - r(&b)
}

/// Tangent data of the triangular representation and the slice bookkeeping.
pub fn character_report(
    p: &Presentation,
    ev: &EigenvalueData,
    basis: &TangentBasis,
    tol: &Tolerance,
) -> Result<(SliceReport, Representation)> {
    let n = ev.n();
    let tri = build_triangular(p, ev, tol)?;
    let cx = twisted_complex(p, &tri.images, CoefficientModule::AdjointTraceless, tol)?;
    let weights = standard_weights(n);
    let report = SliceReport {
        n,
        dim_h1_quotient: slice_quotient_dim(n, &weights)?,
        dim_tx_abelian: n - 1,
        dim_tx_component: cx.h1,
        intersection_dim: tangent_intersection_dim(basis, tol),
        rank_dt: cx.dim_z1().saturating_sub(n * n - 1),
        h0_triangular: cx.h0,
        h1_triangular: cx.h1,
        zero_weights: weights.iter().filter(|w| w.is_zero()).count(),
        paired_weights: weights.iter().filter(|w| !w.is_zero()).count(),
        torus_residual: torus_action_residual(basis, 20, 0),
    };
    Ok((report, tri))
}
