//! Irreducibility through the dimension of the generated matrix algebra.

use crate::linalg::{CMatrix, CVector, Tolerance, C64};
use crate::repbuild::Representation;

/// Orthonormal basis (as row-major `n^2` vectors) of the unital algebra
/// generated by a set of matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraSpan {
    pub n: usize,
    pub basis: Vec<CVector>,
    pub closed: bool,
    /// Smallest relative norm of an accepted new direction after projection
    /// onto the complement of the current span; small values flag
    /// near-degenerate certifications.
    pub margin: f64,
}

impl AlgebraSpan {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.n * self.n
    }
}

fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_vec(crate::linalg::flatten(m))
}

fn matrixize(n: usize, v: &CVector) -> CMatrix {
    CMatrix::from_row_slice(n, n, v.as_slice())
}

/// Projects `v` off the span (two Gram-Schmidt passes) and appends it when its
/// relative remaining norm exceeds the rank tolerance.
fn try_add(basis: &mut Vec<CVector>, v: &CVector, tol: &Tolerance, margin: &mut f64) -> bool {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    let mut w = v / C64::new(norm, 0.0);
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dotc(&w);
            w -= b * c;
        }
    }
    let r = w.norm();
    if r > tol.rank_rel {
        *margin = margin.min(r);
        basis.push(w / C64::new(r, 0.0));
        true
    } else {
        false
    }
}

/// Closes `span{I, gens}` under right multiplication by the generators.
pub fn algebra_span(gens: &[CMatrix], tol: &Tolerance) -> AlgebraSpan {
    assert!(!gens.is_empty(), "algebra span needs at least one matrix");
    let n = gens[0].nrows();
    let mut basis = Vec::new();
    let mut margin = f64::INFINITY;
    try_add(
        &mut basis,
        &vectorize(&CMatrix::identity(n, n)),
        tol,
        &mut margin,
    );
    for g in gens {
        try_add(&mut basis, &vectorize(g), tol, &mut margin);
    }
    let mut frontier = 0;
    while frontier < basis.len() && basis.len() < n * n {
        let b = matrixize(n, &basis[frontier]);
        for g in gens {
            try_add(&mut basis, &vectorize(&(&b * g)), tol, &mut margin);
        }
        frontier += 1;
    }
    AlgebraSpan {
        n,
        closed: true,
        margin: if margin.is_finite() { margin } else { 0.0 },
        basis,
    }
}

pub fn algebra_span_dim(gens: &[CMatrix]) -> usize {
    algebra_span(gens, &Tolerance::default()).dim()
}

/// The images generate all of `M_n(C)`.
pub fn is_irreducible(rho: &Representation) -> bool {
    let span = algebra_span(&rho.images, &Tolerance::default());
    span.is_full()
}

/// `max_S |rho(S)_(i,j)|` for `|i - j| = 1`: the entries of `E_ii rho(S) E_jj`
/// that produce the elementary directions next to the diagonal.
pub fn ladder_entries(images: &[CMatrix]) -> Vec<((usize, usize), f64)> {
    let n = images[0].nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in [i.wrapping_sub(1), i + 1] {
            if j >= n {
                continue;
            }
            let m = images.iter().map(|g| g[(i, j)].norm()).fold(0.0, f64::max);
            out.push(((i, j), m));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize, i: usize, j: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    fn random(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn span_examples() {
        assert_eq!(algebra_span_dim(&[unit(2, 0, 1), unit(2, 1, 0)]), 4);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(0.5, 0.0),
            C64::new(1.0, 0.0),
        ]));
        assert_eq!(algebra_span_dim(&[d]), 3);
        assert_eq!(algebra_span_dim(&[CMatrix::identity(3, 3)]), 1);
        // upper triangular pair stays in the Borel algebra
        let a = &CMatrix::identity(2, 2) + &unit(2, 0, 1);
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(0.5, 0.0),
        ]));
        assert_eq!(algebra_span_dim(&[a, b]), 3);
    }

    #[test]
    fn ladder() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = C64::new(0.5, 0.0);
        let l = ladder_entries(&[m]);
        assert_eq!(l.len(), 4);
        assert_eq!(l[0], ((0, 1), 0.5));
        assert!(l[1..].iter().all(|(_, v)| *v == 0.0));
    }

    proptest! {
        #[test]
        fn conjugation_invariance_and_monotonicity(seed in 0u64..500, n in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut gens = vec![CMatrix::from_diagonal(&CVector::from_fn(n, |i, _| C64::new(1.0 + i as f64, 0.0)))];
            if seed % 3 == 0 {
                gens.push(&CMatrix::identity(n, n) + unit(n, 0, 1));
            } else if seed % 3 == 1 {
                gens.push(random(&mut rng, n));
            }
            let g = random(&mut rng, n) + CMatrix::identity(n, n) * C64::new(2.0, 0.0);
            let gi = g.clone().try_inverse().unwrap();
            let conj: Vec<CMatrix> = gens.iter().map(|m| &g * m * &gi).collect();
            let d = algebra_span_dim(&gens);
            prop_assert_eq!(d, algebra_span_dim(&conj));
            let mut more = gens.clone();
            more.push(random(&mut rng, n));
            prop_assert!(algebra_span_dim(&more) >= d);
        }
    }
}
