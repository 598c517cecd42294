//! Fox calculus, the Alexander polynomial, and twisted cohomology of the
//! presentation 2-complex.

use std::sync::Mutex;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::jets::{relator_residual, JetMatrix};
use crate::laurent::{LaurentPoly, RootSpec};
use crate::linalg::{
    column_space, max_abs, nullspace, rank_checked, solve_least_squares, CMatrix, CVector,
    Tolerance, C64,
};
use crate::presentation::{free_reduce, invert_images, word_eval_with, FreeWord, Presentation};

/// Integer combination of free-group words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupRingElement {
    terms: Vec<(i64, FreeWord)>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Collects like terms, reduces words and drops zero coefficients.
    pub fn from_terms(terms: Vec<(i64, FreeWord)>) -> Self {
        let mut collected: Vec<(i64, FreeWord)> = Vec::new();
        for (c, w) in terms {
            let w = free_reduce(&w);
            match collected.iter_mut().find(|(_, v)| *v == w) {
                Some(slot) => slot.0 += c,
                None => collected.push((c, w)),
            }
        }
        collected.retain(|(c, _)| *c != 0);
        GroupRingElement { terms: collected }
    }

    pub fn terms(&self) -> &[(i64, FreeWord)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Image in `Z[t^{±1}]` under `S_l -> t^{h_l}`.
    pub fn abelianize(&self, h: &[i64]) -> LaurentPoly {
        self.terms.iter().fold(LaurentPoly::zero(), |acc, (c, w)| {
            &acc + &LaurentPoly::monomial(BigRational::from_integer((*c).into()), w.weight(h))
        })
    }

    /// `sum c * w(images)`.
    pub fn eval_matrix(&self, images: &[CMatrix], inverses: &[CMatrix]) -> CMatrix {
        let n = images[0].nrows();
        self.terms.iter().fold(CMatrix::zeros(n, n), |acc, (c, w)| {
            acc + word_eval_with(w, images, inverses) * C64::new(*c as f64, 0.0)
        })
    }
}

/// Fox derivative `dW/dS_l` (`l` is 0-based).
pub fn fox_derivative(w: &FreeWord, l: usize) -> GroupRingElement {
    let letters = w.letters();
    let mut terms = Vec::new();
    for (p, letter) in letters.iter().enumerate() {
        if letter.generator != l {
            continue;
        }
        if letter.inverse {
            terms.push((-1, w.prefix(p + 1)));
        } else {
            terms.push((1, w.prefix(p)));
        }
    }
    GroupRingElement::from_terms(terms)
}

/// The Alexander matrix `A_jl = abelianized dW_j/dS_l`.
pub fn alexander_matrix(p: &Presentation) -> Vec<Vec<LaurentPoly>> {
    p.relators()
        .iter()
        .map(|w| {
            (0..p.generator_count())
                .map(|l| fox_derivative(w, l).abelianize(p.weights()))
                .collect()
        })
        .collect()
}

/// Fraction-free (Bareiss) determinant over `Q[t^{±1}]`.
pub fn laurent_det(m: &[Vec<LaurentPoly>]) -> Result<LaurentPoly> {
    let n = m.len();
    if n == 0 {
        return Ok(LaurentPoly::one());
    }
    let mut a: Vec<Vec<LaurentPoly>> = m.to_vec();
    let mut sign = false;
    let mut prev = LaurentPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = !sign;
                }
                None => return Ok(LaurentPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.divexact(&prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if sign { -&d } else { d })
}

/// Normalized Alexander polynomial with the value at 1 of the normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct Alexander {
    pub poly: LaurentPoly,
    pub at_one: BigRational,
    pub warnings: Vec<String>,
}

impl Alexander {
    /// `Delta(1) = ±1`, as for knot groups.
    pub fn is_unit_at_one(&self) -> bool {
        self.at_one.abs().is_one()
    }
}

/// Gcd over `l` of `M_l (t-1)/(t^{h_l}-1)`, `M_l` the minor with column `l` deleted.
pub fn alexander_polynomial(p: &Presentation) -> Result<Alexander> {
    let k = p.generator_count();
    if k == 1 {
        return Ok(Alexander {
            poly: LaurentPoly::one(),
            at_one: BigRational::one(),
            warnings: Vec::new(),
        });
    }
    let a = alexander_matrix(p);
    let t_minus_one = LaurentPoly::t_pow_minus_one(1);
    let mut g = LaurentPoly::zero();
    for l in 0..k {
        let h = p.weights()[l];
        if h == 0 {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly>> = a
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != l)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let m = laurent_det(&minor)?;
        let term = (&m * &t_minus_one).divexact(&LaurentPoly::t_pow_minus_one(h))?;
        g = if g.is_zero() {
            term.normalized()
        } else {
            g.gcd(&term)
        };
    }
    let (poly, at_one) = g.alexander_normalized();
    let mut warnings = Vec::new();
    if !at_one.abs().is_one() {
        warnings.push(format!(
            "Delta(1) = {at_one}; not a knot group presentation"
        ));
    }
    Ok(Alexander {
        poly,
        at_one,
        warnings,
    })
}

/// Basis of traceless n x n matrices: off-diagonal units `E_ij` in row-major
/// order, then `H_k = E_kk - E_(k+1)(k+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlBasis {
    n: usize,
    offdiag: Vec<(usize, usize)>,
}

impl SlBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let offdiag = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        SlBasis { n, offdiag }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n - 1
    }

    pub fn offdiag_index(&self, i: usize, j: usize) -> usize {
        assert!(i != j && i < self.n && j < self.n);
        i * (self.n - 1) + if j > i { j - 1 } else { j }
    }

    /// Index of `H_k`, `k` 0-based in `0..n-1`.
    pub fn diag_index(&self, k: usize) -> usize {
        self.n * (self.n - 1) + k
    }

    pub fn element(&self, b: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        let one = C64::new(1.0, 0.0);
        if b < self.offdiag.len() {
            let (i, j) = self.offdiag[b];
            m[(i, j)] = one;
        } else {
            let k = b - self.offdiag.len();
            m[(k, k)] = one;
            m[(k + 1, k + 1)] = -one;
        }
        m
    }

    /// Coordinates of the traceless part of `x`.
    pub fn coords(&self, x: &CMatrix) -> CVector {
        let mut v = CVector::zeros(self.dim());
        for (b, &(i, j)) in self.offdiag.iter().enumerate() {
            v[b] = x[(i, j)];
        }
        let mean = x.trace() / C64::new(self.n as f64, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.n - 1 {
            acc += x[(k, k)] - mean;
            v[self.offdiag.len() + k] = acc;
        }
        v
    }

    pub fn matrix(&self, v: &[C64]) -> CMatrix {
        assert_eq!(v.len(), self.dim());
        let mut m = CMatrix::zeros(self.n, self.n);
        for (b, &(i, j)) in self.offdiag.iter().enumerate() {
            m[(i, j)] = v[b];
        }
        let d = self.offdiag.len();
        for k in 0..self.n {
            let up = if k < self.n - 1 {
                v[d + k]
            } else {
                C64::new(0.0, 0.0)
            };
            let down = if k > 0 {
                v[d + k - 1]
            } else {
                C64::new(0.0, 0.0)
            };
            m[(k, k)] = up - down;
        }
        m
    }

    /// Stacked coordinates of generator-indexed matrices.
    pub fn cochain_coords(&self, mats: &[CMatrix]) -> CVector {
        let d = self.dim();
        let mut v = CVector::zeros(d * mats.len());
        for (l, m) in mats.iter().enumerate() {
            v.rows_mut(l * d, d).copy_from(&self.coords(m));
        }
        v
    }

    pub fn cochain_matrices(&self, v: &CVector) -> Vec<CMatrix> {
        let d = self.dim();
        assert_eq!(v.len() % d, 0);
        (0..v.len() / d)
            .map(|l| self.matrix(v.rows(l * d, d).as_slice()))
            .collect()
    }
}

/// Matrix of `X -> g X g^{-1}` in the [`SlBasis`] coordinates.
pub fn adjoint_action(basis: &SlBasis, g: &CMatrix, ginv: &CMatrix) -> CMatrix {
    let d = basis.dim();
    let mut a = CMatrix::zeros(d, d);
    for b in 0..d {
        let img = g * basis.element(b) * ginv;
        a.set_column(b, &basis.coords(&img));
    }
    a
}

/// Coefficient module of the twisted complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientModule {
    /// Traceless matrices under conjugation by the representation.
    AdjointTraceless,
    /// `C` with `S_l` acting by `alpha^{h_l}`.
    Scalar(RootSpec),
}

/// Running statistics over every twisted complex built in this process.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuditStats {
    pub complexes: usize,
    pub euler_violations: usize,
    pub max_d2d1: f64,
}

static AUDIT: Mutex<AuditStats> = Mutex::new(AuditStats {
    complexes: 0,
    euler_violations: 0,
    max_d2d1: 0.0,
});

pub fn audit_snapshot() -> AuditStats {
    *AUDIT.lock().unwrap_or_else(|e| e.into_inner())
}

/// Cochain complex `C^0 -> C^1 -> C^2` of the presentation 2-complex.
#[derive(Debug, Clone)]
pub struct TwistedComplex {
    pub module_dim: usize,
    pub generators: usize,
    pub d1: CMatrix,
    pub d2: CMatrix,
    pub rank_d1: usize,
    pub rank_d2: usize,
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
    /// Some rank changed when the threshold was scaled by 10 or 1/10.
    pub marginal: bool,
    /// `max |D2 D1|` relative to the operator scales.
    pub d2d1_residual: f64,
    tol: Tolerance,
}

impl TwistedComplex {
    /// Builds the complex from the action matrices of the generators on the module.
    pub fn from_actions(p: &Presentation, actions: &[CMatrix], tol: &Tolerance) -> Result<Self> {
        let k = p.generator_count();
        if actions.len() != k {
            return Err(Error::Dimension(format!(
                "{} actions for {k} generators",
                actions.len()
            )));
        }
        let d = actions[0].nrows();
        // module actions are O(1); entries below rank_rel are round-off
        let tol = &tol.with_floor(1.0);
        let inverses = invert_images(actions)?;
        let id = CMatrix::identity(d, d);
        let mut d1 = CMatrix::zeros(d * k, d);
        for (l, a) in actions.iter().enumerate() {
            d1.view_mut((l * d, 0), (d, d)).copy_from(&(a - &id));
        }
        let rels = p.relators();
        let mut d2 = CMatrix::zeros(d * rels.len(), d * k);
        for (j, w) in rels.iter().enumerate() {
            let mut prefix = id.clone();
            for letter in w.letters() {
                let l = letter.generator;
                let mut block = d2.view_mut((j * d, l * d), (d, d));
                if letter.inverse {
                    prefix = &prefix * &inverses[l];
                    block -= &prefix;
                } else {
                    block += &prefix;
                    prefix = &prefix * &actions[l];
                }
            }
        }
        let (rank_d1, s1) = rank_checked(&d1, tol);
        let (rank_d2, s2) = rank_checked(&d2, tol);
        let h0 = d - rank_d1;
        let h1 = (d * k - rank_d2)
            .checked_sub(rank_d1)
            .ok_or_else(|| Error::Dimension("rank D1 exceeds dim Z1".into()))?;
        let h2 = d * rels.len() - rank_d2;
        let d2d1_residual = max_abs(&(&d2 * &d1)) / (1.0 + max_abs(&d2) * max_abs(&d1));
        let cx = TwistedComplex {
            module_dim: d,
            generators: k,
            d1,
            d2,
            rank_d1,
            rank_d2,
            h0,
            h1,
            h2,
            marginal: !(s1 && s2),
            d2d1_residual,
            tol: *tol,
        };
        let mut audit = AUDIT.lock().unwrap_or_else(|e| e.into_inner());
        audit.complexes += 1;
        if cx.euler_characteristic() != 0 {
            audit.euler_violations += 1;
        }
        audit.max_d2d1 = audit.max_d2d1.max(d2d1_residual);
        Ok(cx)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.h0 as i64 - self.h1 as i64 + self.h2 as i64
    }

    pub fn dim_z1(&self) -> usize {
        self.h1 + self.rank_d1
    }

    pub fn dim_b1(&self) -> usize {
        self.rank_d1
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// Orthonormal basis of `Z^1 = ker D2`.
    pub fn cocycle_space(&self) -> Vec<CVector> {
        nullspace(&self.d2, &self.tol)
    }

    /// Orthonormal basis of `B^1 = im D1`.
    pub fn coboundary_space(&self) -> Vec<CVector> {
        column_space(&self.d1, &self.tol)
    }

    /// `|D2 v|`.
    pub fn cocycle_residual(&self, v: &CVector) -> f64 {
        (&self.d2 * v).norm()
    }

    /// Distance of `v` from `B^1`.
    pub fn coboundary_distance(&self, v: &CVector) -> f64 {
        solve_least_squares(&self.d1, v, &self.tol).1
    }
}

/// Twisted complex of `images` with coefficients in `module`.
pub fn twisted_complex(
    p: &Presentation,
    images: &[CMatrix],
    module: CoefficientModule,
    tol: &Tolerance,
) -> Result<TwistedComplex> {
    match module {
        CoefficientModule::AdjointTraceless => {
            let residual = p.relator_residual(images)?;
            let limit = 10.0 * tol.residual_abs;
            if residual > limit {
                return Err(Error::NotARepresentation {
                    residual,
                    tol: limit,
                });
            }
            let basis = SlBasis::new(images[0].nrows());
            let inverses = invert_images(images)?;
            let actions: Vec<CMatrix> = images
                .iter()
                .zip(&inverses)
                .map(|(g, gi)| adjoint_action(&basis, g, gi))
                .collect();
            TwistedComplex::from_actions(p, &actions, tol)
        }
        CoefficientModule::Scalar(alpha) => scalar_complex(p, &alpha, tol),
    }
}

/// Twisted complex with coefficients `C_alpha`.
pub fn scalar_complex(
    p: &Presentation,
    alpha: &RootSpec,
    tol: &Tolerance,
) -> Result<TwistedComplex> {
    let actions: Vec<CMatrix> = p
        .weights()
        .iter()
        .map(|&h| CMatrix::from_element(1, 1, alpha.pow(h).value()))
        .collect();
    TwistedComplex::from_actions(p, &actions, tol)
}

/// A 1-cocycle given by its generator values in module coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub values: Vec<CVector>,
    pub is_principal: bool,
}

impl Derivation {
    fn from_flat(v: &CVector, module_dim: usize, is_principal: bool) -> Self {
        Derivation {
            values: (0..v.len() / module_dim)
                .map(|l| v.rows(l * module_dim, module_dim).into_owned())
                .collect(),
            is_principal,
        }
    }

    pub fn flat(&self) -> CVector {
        let parts: Vec<C64> = self.values.iter().flat_map(|v| v.iter().copied()).collect();
        CVector::from_vec(parts)
    }

    /// Values of a scalar derivation.
    pub fn scalars(&self) -> Vec<C64> {
        self.values.iter().map(|v| v[0]).collect()
    }
}

/// Basis of `Z^1` of a twisted complex: an orthonormal basis of the
/// complement of `B^1` (non-principal, listed first), then one of `B^1`.
pub fn derivation_basis(cx: &TwistedComplex) -> Vec<Derivation> {
    let z = cx.cocycle_space();
    let b = cx.coboundary_space();
    let dim = cx.d2.ncols();
    let projected: Vec<CVector> = z
        .iter()
        .map(|v| {
            let mut w = v.clone();
            for e in &b {
                w -= e * e.dotc(v);
            }
            w
        })
        .collect();
    let complement = column_space(&crate::linalg::columns_to_matrix(dim, &projected), &cx.tol);
    let mut out: Vec<Derivation> = complement
        .iter()
        .take(z.len().saturating_sub(b.len()))
        .map(|v| Derivation::from_flat(v, cx.module_dim, false))
        .collect();
    out.extend(
        b.iter()
            .map(|v| Derivation::from_flat(v, cx.module_dim, true)),
    );
    out
}

/// Derivations `Gamma -> C_alpha`, non-principal classes first.
pub fn solve_derivations(
    p: &Presentation,
    alpha: &RootSpec,
    tol: &Tolerance,
) -> Result<Vec<Derivation>> {
    let cx = scalar_complex(p, alpha, tol)?;
    Ok(derivation_basis(&cx))
}

/// `|D2 U|` for generator-indexed traceless matrices `U` at `rho`.
pub fn adjoint_cocycle_residual(
    p: &Presentation,
    rho: &[CMatrix],
    u: &[CMatrix],
    tol: &Tolerance,
) -> Result<f64> {
    let cx = twisted_complex(p, rho, CoefficientModule::AdjointTraceless, tol)?;
    let basis = SlBasis::new(rho[0].nrows());
    Ok(cx.cocycle_residual(&basis.cochain_coords(u)))
}

/// Jet images `exp(t U + sum_{k>=2} t^k C_k) rho` of the given order.
///
/// `higher[k - 2]` holds the generator-indexed `C_k`.
pub fn deformation_images(
    rho: &[CMatrix],
    u: &[CMatrix],
    higher: &[Vec<CMatrix>],
    order: usize,
) -> Result<Vec<JetMatrix>> {
    let n = rho[0].nrows();
    (0..rho.len())
        .map(|l| {
            let mut coeffs = vec![CMatrix::zeros(n, n); order + 1];
            if order >= 1 {
                coeffs[1] = u[l].clone();
            }
            for (i, c) in higher.iter().enumerate() {
                if i + 2 <= order {
                    coeffs[i + 2] = c[l].clone();
                }
            }
            let e = JetMatrix::from_coeffs(coeffs).exp()?;
            Ok(&e * &JetMatrix::constant(&rho[l], order))
        })
        .collect()
}

fn stack_coeff(res: &[JetMatrix], k: usize) -> CVector {
    CVector::from_vec(
        res.iter()
            .flat_map(|r| crate::linalg::flatten(r.coeff(k)))
            .collect(),
    )
}

/// Outcome of an order-by-order solvability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstructionReport {
    pub vanishes: bool,
    /// Least-squares residual of the correction system.
    pub residual: f64,
    /// Norm of the uncorrected residual.
    pub scale: f64,
    /// Relator residual at order one (zero for cocycles).
    pub first_order: f64,
}

/// The linear map `V -> t^m part of W(exp(t^m V) rho)`, which is the same for
/// every order `m`, probed through jets at order 2.
#[derive(Debug, Clone)]
pub struct RelatorLinearization {
    pub presentation: Presentation,
    pub rho: Vec<CMatrix>,
    pub basis: SlBasis,
    pub map: CMatrix,
    tol: Tolerance,
}

impl RelatorLinearization {
    pub fn new(p: &Presentation, rho: &[CMatrix], tol: &Tolerance) -> Result<Self> {
        let n = rho[0].nrows();
        let basis = SlBasis::new(n);
        let d = basis.dim();
        let k = rho.len();
        let zero = vec![CMatrix::zeros(n, n); k];
        let rows = p.relators().len() * n * n;
        let mut map = CMatrix::zeros(rows, d * k);
        for l in 0..k {
            for b in 0..d {
                let mut v = zero.clone();
                v[l] = basis.element(b);
                let imgs = deformation_images(rho, &zero, &[v], 2)?;
                let res = relator_residual(p, &imgs)?;
                map.set_column(l * d + b, &stack_coeff(&res, 2));
            }
        }
        Ok(RelatorLinearization {
            presentation: p.clone(),
            rho: rho.to_vec(),
            basis,
            map,
            tol: *tol,
        })
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// Solves for the generator-indexed correction `C_m` killing the order-`m`
    /// residual, given `U` and the lower coefficients `C_2..C_{m-1}`.
    pub fn solve_order(
        &self,
        u: &[CMatrix],
        lower: &[Vec<CMatrix>],
    ) -> Result<(Vec<CMatrix>, ObstructionReport)> {
        let m = lower.len() + 2;
        let imgs = deformation_images(&self.rho, u, lower, m)?;
        let res = relator_residual(&self.presentation, &imgs)?;
        let r = stack_coeff(&res, m);
        let first_order = stack_coeff(&res, 1).norm();
        let (x, residual) = solve_least_squares(&self.map, &(-&r), &self.tol);
        let scale = r.norm();
        let vanishes = residual <= self.tol.residual_abs * (1.0 + scale);
        Ok((
            self.basis.cochain_matrices(&x),
            ObstructionReport {
                vanishes,
                residual,
                scale,
                first_order,
            },
        ))
    }
}

/// Whether `exp(tU + t^2 V) rho` satisfies the relators mod `t^3` for some `V`.
pub fn obstruction_vanishes(
    p: &Presentation,
    rho: &[CMatrix],
    u: &[CMatrix],
    tol: &Tolerance,
) -> Result<ObstructionReport> {
    let lin = RelatorLinearization::new(p, rho, tol)?;
    Ok(lin.solve_order(u, &[])?.1)
}
