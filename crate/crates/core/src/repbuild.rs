//! Diagonal and upper-triangular representations from eigenvalue data,
//! the hypothesis check on Alexander roots, order-by-order integration of
//! cocycles, and Gauss-Newton refinement to genuine representations.

use std::fmt;

use crate::error::{Error, Result};
use crate::foxcoh::{
    alexander_polynomial, deformation_images, solve_derivations, Alexander, RelatorLinearization,
};
use crate::jets::{relator_residual, JetMatrix};
use crate::laurent::{LaurentPoly, RootSpec};
use crate::linalg::{max_abs, nullspace, solve_least_squares, CMatrix, CVector, Tolerance, C64};
use crate::presentation::{invert_images, word_eval_with, Presentation};

/// Diagonal entries `lambda_1..lambda_n` of a regular `D` in `SL(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueData {
    lambdas: Vec<RootSpec>,
}

impl EigenvalueData {
    /// Checks `prod lambda_i = 1` and pairwise distinctness.
    pub fn new(lambdas: Vec<RootSpec>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::BadEigenvalues("no eigenvalues".into()));
        }
        let prod = lambdas.iter().fold(RootSpec::one(), |acc, l| acc.mul(l));
        if (prod.value() - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::BadEigenvalues(format!(
                "product of eigenvalues is {prod}, not 1"
            )));
        }
        for i in 0..lambdas.len() {
            for j in i + 1..lambdas.len() {
                if (lambdas[i].value() - lambdas[j].value()).norm() <= 1e-10 {
                    return Err(Error::BadEigenvalues(format!(
                        "lambda_{} and lambda_{} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(EigenvalueData { lambdas })
    }

    /// Parses a comma list of root specs; its length must be `n`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let lambdas = crate::laurent::parse_root_list(s)?;
        if lambdas.len() != n {
            return Err(Error::BadEigenvalues(format!(
                "{} eigenvalues given for n = {n}",
                lambdas.len()
            )));
        }
        Self::new(lambdas)
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[RootSpec] {
        &self.lambdas
    }

    /// `lambda_i / lambda_j` (0-based).
    pub fn ratio(&self, i: usize, j: usize) -> RootSpec {
        self.lambdas[i].ratio(&self.lambdas[j])
    }

    /// `D^e` as a diagonal matrix.
    pub fn diagonal_power(&self, e: i64) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(
            self.lambdas.iter().map(|l| l.pow(e).value()).collect(),
        ))
    }

    /// The consecutive block `lambda_from..lambda_to` (0-based, exclusive end).
    pub fn block(&self, from: usize, to: usize) -> Vec<RootSpec> {
        self.lambdas[from..to].to_vec()
    }
}

impl fmt::Display for EigenvalueData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lambdas.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Role of an eigenvalue ratio in the hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    /// `lambda_i / lambda_(i+1)`: must be a simple root.
    Consecutive,
    /// `lambda_(i+1) / lambda_i`: must be a simple root.
    ConsecutiveInverse,
    /// `|i - j| >= 2`: must not be a root.
    Distant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRecord {
    /// 1-based indices of `lambda_i / lambda_j`.
    pub i: usize,
    pub j: usize,
    pub value: RootSpec,
    pub delta_abs: f64,
    pub multiplicity: usize,
    pub kind: RatioKind,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub records: Vec<RatioRecord>,
    pub verdict: Verdict,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn reasons(&self) -> &[String] {
        match &self.verdict {
            Verdict::Pass => &[],
            Verdict::Fail(r) => r,
        }
    }
}

/// Consecutive ratios and their inverses must be simple roots of `delta`;
/// ratios of non-adjacent eigenvalues must not be roots.
pub fn check_hypotheses_with(delta: &LaurentPoly, ev: &EigenvalueData) -> HypothesisReport {
    let n = ev.n();
    let mut records = Vec::new();
    let mut reasons = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let kind = if j == i + 1 {
                RatioKind::Consecutive
            } else if i == j + 1 {
                RatioKind::ConsecutiveInverse
            } else {
                RatioKind::Distant
            };
            let value = ev.ratio(i, j);
            let multiplicity = delta.root_multiplicity(&value);
            let ok = match kind {
                RatioKind::Distant => multiplicity == 0,
                _ => multiplicity == 1,
            };
            if !ok {
                reasons.push(match kind {
                    RatioKind::Distant => format!(
                        "lambda_{}/lambda_{} = {value} is a root of the Alexander polynomial (multiplicity {multiplicity})",
                        i + 1,
                        j + 1
                    ),
                    _ => format!(
                        "lambda_{}/lambda_{} = {value} has multiplicity {multiplicity}, a simple root is required",
                        i + 1,
                        j + 1
                    ),
                });
            }
            records.push(RatioRecord {
                i: i + 1,
                j: j + 1,
                value,
                delta_abs: delta.evaluate(&value).norm(),
                multiplicity,
                kind,
                ok,
            });
        }
    }
    let verdict = if reasons.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail(reasons)
    };
    HypothesisReport { records, verdict }
}

pub fn check_hypotheses(p: &Presentation, ev: &EigenvalueData) -> Result<HypothesisReport> {
    let Alexander { poly, .. } = alexander_polynomial(p)?;
    Ok(check_hypotheses_with(&poly, ev))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    Diagonal,
    Triangular,
    Deformed,
}

/// Generator images of a representation into `SL(n, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub images: Vec<CMatrix>,
    pub relator_residual: f64,
    pub kind: RepKind,
}

impl Representation {
    pub fn new(p: &Presentation, images: Vec<CMatrix>, kind: RepKind) -> Result<Self> {
        let relator_residual = p.relator_residual(&images)?;
        Ok(Representation {
            images,
            relator_residual,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.images[0].nrows()
    }

    /// `max_l |det rho(S_l) - 1|`.
    pub fn det_deviation(&self) -> f64 {
        self.images
            .iter()
            .map(|m| (m.determinant() - C64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// Conjugation `g rho g^{-1}`.
    pub fn conjugate(&self, g: &CMatrix) -> Result<Self> {
        let gi = g.clone().try_inverse().ok_or(Error::SingularImage(0))?;
        Ok(Representation {
            images: self.images.iter().map(|m| g * m * &gi).collect(),
            ..self.clone()
        })
    }
}

/// `S_l -> D^{h_l}`.
pub fn diagonal_rep(p: &Presentation, ev: &EigenvalueData) -> Result<Representation> {
    let images = p.weights().iter().map(|&h| ev.diagonal_power(h)).collect();
    Representation::new(p, images, RepKind::Diagonal)
}

/// Generator-indexed traceless matrices, a 1-cocycle for some representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle {
    pub values: Vec<CMatrix>,
}

impl Cocycle {
    pub fn new(values: Vec<CMatrix>) -> Self {
        Cocycle { values }
    }

    pub fn zero(n: usize, k: usize) -> Self {
        Cocycle {
            values: vec![CMatrix::zeros(n, n); k],
        }
    }

    pub fn n(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Cocycle {
            values: self.values.iter().map(|m| m * c).collect(),
        }
    }

    pub fn plus(&self, other: &Cocycle) -> Self {
        Cocycle {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn max_trace(&self) -> f64 {
        self.values
            .iter()
            .map(|m| m.trace().norm())
            .fold(0.0, f64::max)
    }

    /// `|D2 U|` for the adjoint complex of `rho`.
    pub fn residual(&self, p: &Presentation, rho: &Representation, tol: &Tolerance) -> Result<f64> {
        crate::foxcoh::adjoint_cocycle_residual(p, &rho.images, &self.values, tol)
    }

    /// The principal derivation `gamma -> rho(gamma) A rho(gamma)^{-1} - A`.
    pub fn principal(rho: &Representation, a: &CMatrix) -> Result<Self> {
        let inv = invert_images(&rho.images)?;
        Ok(Cocycle {
            values: rho
                .images
                .iter()
                .zip(&inv)
                .map(|(g, gi)| g * a * gi - a)
                .collect(),
        })
    }
}

/// Non-principal derivation into `C_alpha` (generator values), scaled to unit maximum.
pub fn nonprincipal_derivation(
    p: &Presentation,
    alpha: &RootSpec,
    tol: &Tolerance,
) -> Result<Vec<C64>> {
    let ders = solve_derivations(p, alpha, tol)?;
    let d = ders.iter().find(|d| !d.is_principal).ok_or_else(|| {
        Error::HypothesisFailure(format!("no non-principal derivation for alpha = {alpha}"))
    })?;
    let vals = d.scalars();
    let m = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(vals.iter().map(|z| z / m).collect())
}

/// Upper-triangular representation with diagonal `D^{h}` and superdiagonal
/// given by non-principal derivations; higher strata solved by least squares.
pub fn build_triangular(
    p: &Presentation,
    ev: &EigenvalueData,
    tol: &Tolerance,
) -> Result<Representation> {
    let report = check_hypotheses(p, ev)?;
    if !report.passed() {
        return Err(Error::HypothesisFailure(report.reasons().join("; ")));
    }
    let n = ev.n();
    let k = p.generator_count();
    let mut unip: Vec<CMatrix> = vec![CMatrix::identity(n, n); k];
    for i in 0..n.saturating_sub(1) {
        let u = nonprincipal_derivation(p, &ev.ratio(i, i + 1), tol)?;
        for l in 0..k {
            unip[l][(i, i + 1)] = u[l];
        }
    }
    let diag: Vec<CMatrix> = p.weights().iter().map(|&h| ev.diagonal_power(h)).collect();
    let images_of =
        |unip: &[CMatrix]| -> Vec<CMatrix> { unip.iter().zip(&diag).map(|(u, d)| u * d).collect() };

    for dist in 2..n {
        let cells: Vec<(usize, usize)> = (0..n - dist).map(|i| (i, i + dist)).collect();
        let unknowns = cells.len() * k;
        let stratum_entries = |imgs: &[CMatrix]| -> Result<CVector> {
            let inv = invert_images(imgs)?;
            let mut v = Vec::new();
            for w in p.relators() {
                let r = word_eval_with(w, imgs, &inv);
                v.extend(cells.iter().map(|&(i, j)| r[(i, j)]));
            }
            Ok(CVector::from_vec(v))
        };
        let set = |vals: &CVector| -> Vec<CMatrix> {
            let mut u = unip.clone();
            for l in 0..k {
                for (c, &(i, j)) in cells.iter().enumerate() {
                    u[l][(i, j)] = vals[l * cells.len() + c];
                }
            }
            u
        };
        let base = stratum_entries(&images_of(&set(&CVector::zeros(unknowns))))?;
        let mut a = CMatrix::zeros(base.len(), unknowns);
        for col in 0..unknowns {
            let mut e = CVector::zeros(unknowns);
            e[col] = C64::new(1.0, 0.0);
            let v = stratum_entries(&images_of(&set(&e)))?;
            a.set_column(col, &(v - &base));
        }
        let (x, residual) = solve_least_squares(&a, &(-&base), tol);
        if residual > tol.residual_abs * (1.0 + base.norm()) {
            return Err(Error::StratumUnsolvable {
                distance: dist,
                residual,
            });
        }
        unip = set(&x);
    }
    let rep = Representation::new(p, images_of(&unip), RepKind::Triangular)?;
    if rep.relator_residual > tol.residual_abs {
        return Err(Error::NotARepresentation {
            residual: rep.relator_residual,
            tol: tol.residual_abs,
        });
    }
    Ok(rep)
}

/// `max_l |C_t rho(S_l) C_t^{-1} - diag(rho(S_l))|` with `C_t = diag(t^{n-1}, ..., 1)`.
pub fn limit_conjugation_check(rho: &Representation, t_values: &[f64]) -> Vec<f64> {
    let n = rho.n();
    t_values
        .iter()
        .map(|&t| {
            rho.images
                .iter()
                .map(|m| {
                    let mut dev = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            if i == j {
                                continue;
                            }
                            let s = t.powi(j as i32 - i as i32);
                            dev += (m[(i, j)] * s).norm_sqr();
                        }
                    }
                    dev.sqrt()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// A formal curve `exp(tU + sum_{k>=2} t^k C_k) rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetFamily {
    pub base: Vec<CMatrix>,
    pub u: Vec<CMatrix>,
    /// `higher[k - 2] = C_k`.
    pub higher: Vec<Vec<CMatrix>>,
    /// Least-squares residual of the correction system at orders `2..=N`.
    pub residuals: Vec<f64>,
}

impl JetFamily {
    pub fn order(&self) -> usize {
        self.higher.len() + 1
    }

    pub fn jets(&self) -> Result<Vec<JetMatrix>> {
        deformation_images(&self.base, &self.u, &self.higher, self.order())
    }

    /// Relator residual norms of the jet family at each order `0..=N`.
    pub fn order_residuals(&self, p: &Presentation) -> Result<Vec<f64>> {
        let res = relator_residual(p, &self.jets()?)?;
        Ok((0..=self.order())
            .map(|k| res.iter().map(|r| max_abs(r.coeff(k))).fold(0.0, f64::max))
            .collect())
    }

    /// Generator images at a numeric `t`, using the matrix exponential.
    pub fn eval_at(&self, t: f64) -> Vec<CMatrix> {
        (0..self.base.len())
            .map(|l| {
                let mut x = &self.u[l] * C64::new(t, 0.0);
                for (i, c) in self.higher.iter().enumerate() {
                    x += &c[l] * C64::new(t.powi(i as i32 + 2), 0.0);
                }
                x.exp() * &self.base[l]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Integration {
    Family(JetFamily),
    Obstructed { order: usize, residual: f64 },
}

impl Integration {
    pub fn is_family(&self) -> bool {
        matches!(self, Integration::Family(_))
    }
}

/// Solves for `C_2..C_N`. When order `m >= 3` is not solvable, `C_{m-1}` is
/// corrected by a cocycle (which leaves order `m-1` untouched) jointly with `C_m`.
pub fn integrate_cocycle(
    p: &Presentation,
    rho: &Representation,
    u: &Cocycle,
    order: usize,
    tol: &Tolerance,
) -> Result<Integration> {
    let lin = RelatorLinearization::new(p, &rho.images, tol)?;
    integrate_with(&lin, u, order)
}

/// [`integrate_cocycle`] with a precomputed linearization.
pub fn integrate_with(
    lin: &RelatorLinearization,
    u: &Cocycle,
    order: usize,
) -> Result<Integration> {
    let tol = *lin.tolerance();
    let mut higher: Vec<Vec<CMatrix>> = Vec::new();
    let mut residuals = Vec::new();
    let mut kernel: Option<Vec<CVector>> = None;
    for m in 2..=order {
        let (c, report) = lin.solve_order(&u.values, &higher)?;
        if report.vanishes {
            higher.push(c);
            residuals.push(report.residual);
            continue;
        }
        if m == 2 {
            return Ok(Integration::Obstructed {
                order: 2,
                residual: report.residual,
            });
        }
        let z1 = kernel.get_or_insert_with(|| nullspace(&lin.map, &tol));
        let base_r = order_coefficient(lin, &u.values, &higher, m)?;
        let mut e = CMatrix::zeros(base_r.len(), z1.len());
        for (col, z) in z1.iter().enumerate() {
            let mut shifted = higher.clone();
            let dz = lin.basis.cochain_matrices(z);
            for (a, b) in shifted[m - 3].iter_mut().zip(&dz) {
                *a += b;
            }
            e.set_column(
                col,
                &(order_coefficient(lin, &u.values, &shifted, m)? - &base_r),
            );
        }
        let cols = lin.map.ncols();
        let mut joint = CMatrix::zeros(base_r.len(), cols + z1.len());
        joint
            .view_mut((0, 0), (base_r.len(), cols))
            .copy_from(&lin.map);
        joint
            .view_mut((0, cols), (base_r.len(), z1.len()))
            .copy_from(&e);
        let (x, residual) = solve_least_squares(&joint, &(-&base_r), &tol);
        if residual > tol.residual_abs * (1.0 + base_r.norm()) {
            return Ok(Integration::Obstructed { order: m, residual });
        }
        let delta = z1
            .iter()
            .enumerate()
            .fold(CVector::zeros(cols), |acc, (i, z)| acc + z * x[cols + i]);
        for (a, b) in higher[m - 3]
            .iter_mut()
            .zip(lin.basis.cochain_matrices(&delta))
        {
            *a += b;
        }
        higher.push(lin.basis.cochain_matrices(&x.rows(0, cols).into_owned()));
        residuals.push(residual);
    }
    Ok(Integration::Family(JetFamily {
        base: lin.rho.clone(),
        u: u.values.clone(),
        higher,
        residuals,
    }))
}

fn order_coefficient(
    lin: &RelatorLinearization,
    u: &[CMatrix],
    higher: &[Vec<CMatrix>],
    m: usize,
) -> Result<CVector> {
    let imgs = deformation_images(&lin.rho, u, higher, m)?;
    let res = relator_residual(&lin.presentation, &imgs)?;
    Ok(CVector::from_vec(
        res.iter()
            .flat_map(|r| crate::linalg::flatten(r.coeff(m)))
            .collect(),
    ))
}

/// Default basin threshold for [`refine_representation`].
pub const REFINE_BASIN: f64 = 1e-2;
/// Target relator residual of [`refine_representation`].
pub const REFINE_TARGET: f64 = 1e-11;
pub const REFINE_MAX_ITER: usize = 50;
const REFINE_ROUNDOFF: f64 = 1e-14;

/// Gauss-Newton projection of approximate generator images onto the relator
/// variety intersected with `det = 1`; returns the representation and the
/// iteration count.
pub fn refine_representation(
    p: &Presentation,
    approx: &[CMatrix],
    tol: &Tolerance,
) -> Result<(Representation, usize)> {
    let k = approx.len();
    let n = approx[0].nrows();
    let mut x: Vec<CMatrix> = approx.to_vec();
    let residual_of = |x: &[CMatrix]| -> Result<f64> {
        let det = x
            .iter()
            .map(|m| (m.determinant() - C64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        Ok(p.relator_residual(x)?.max(det))
    };
    let mut res = residual_of(&x)?;
    if !res.is_finite() || res > REFINE_BASIN {
        return Err(Error::NoConvergence {
            residual: res,
            iterations: 0,
        });
    }
    let mut iterations = 0;
    // at least one step unless already at round-off level
    while res >= REFINE_TARGET || (iterations == 0 && res > REFINE_ROUNDOFF) {
        if iterations >= REFINE_MAX_ITER {
            return Err(Error::NoConvergence {
                residual: res,
                iterations,
            });
        }
        let consts: Vec<JetMatrix> = x.iter().map(|m| JetMatrix::constant(m, 1)).collect();
        let f = equations(p, &consts, 0)?;
        let mut jac = CMatrix::zeros(f.len(), k * n * n);
        for l in 0..k {
            for a in 0..n {
                for b in 0..n {
                    let mut e = CMatrix::zeros(n, n);
                    e[(a, b)] = C64::new(1.0, 0.0);
                    let mut imgs = consts.clone();
                    imgs[l] = &imgs[l] + &JetMatrix::monomial(&e, 1, 1);
                    let col = equations(p, &imgs, 1)?;
                    jac.set_column(l * n * n + a * n + b, &col);
                }
            }
        }
        let (step, _) = solve_least_squares(&jac, &(-&f), tol);
        for l in 0..k {
            for a in 0..n {
                for b in 0..n {
                    x[l][(a, b)] += step[l * n * n + a * n + b];
                }
            }
        }
        iterations += 1;
        let before = res;
        res = residual_of(&x)?;
        if before < REFINE_TARGET && !(res < before) {
            // the optional polishing step did not help
            for l in 0..k {
                for a in 0..n {
                    for b in 0..n {
                        x[l][(a, b)] -= step[l * n * n + a * n + b];
                    }
                }
            }
            break;
        }
        if !res.is_finite() || res > 1e3 {
            return Err(Error::NoConvergence {
                residual: res,
                iterations,
            });
        }
    }
    Ok((Representation::new(p, x, RepKind::Deformed)?, iterations))
}

/// Relator entries followed by `det - 1` per generator (`k = 0`), or their
/// first-order variation along the `t` coefficients of `imgs` (`k = 1`).
fn equations(p: &Presentation, imgs: &[JetMatrix], k: usize) -> Result<CVector> {
    let res = relator_residual(p, imgs)?;
    let mut v: Vec<C64> = res
        .iter()
        .flat_map(|r| crate::linalg::flatten(r.coeff(k)))
        .collect();
    for m in imgs {
        let a = m.coeff(0);
        let det = a.determinant();
        if k == 0 {
            v.push(det - C64::new(1.0, 0.0));
        } else {
            // d det = det * tr(A^{-1} dA)
            let ai = a.clone().try_inverse().ok_or(Error::SingularImage(0))?;
            v.push(det * (ai * m.coeff(1)).trace());
        }
    }
    Ok(CVector::from_vec(v))
}

/// Conjugation by `diag(c_1, ..., c_n)`, which rescales the superdiagonal
/// derivations of a triangular representation (entry `(i,j)` by `c_i/c_j`).
pub fn rescale_triangular(rho: &Representation, c: &[C64]) -> Result<Representation> {
    let g = CMatrix::from_diagonal(&CVector::from_vec(c.to_vec()));
    rho.conjugate(&g)
}

/// Decomposition of `{0..n}` into consecutive blocks separated at the
/// positions not in `iota` (0-based superdiagonal indices).
pub fn blocks_of(n: usize, iota: &[usize]) -> Vec<(usize, usize)> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..n.saturating_sub(1) {
        if !iota.contains(&i) {
            blocks.push((start, i + 1));
            start = i + 1;
        }
    }
    blocks.push((start, n));
    blocks
}

/// Curve `exp(tF) * (⊕_s z_s^{h} rho_t^{(s)})` for a direction whose
/// off-diagonal part is block diagonal along `blocks_of(n, iota)`.
///
/// `u_blocks[s]` is the generator-indexed block cocycle at the normalized
/// block representation `D_s = z_s^{-1} D|_s`, and `f` the diagonal part
/// outside the blocks' traceless parts. Each block is integrated to `order`.
pub fn block_path(
    p: &Presentation,
    ev: &EigenvalueData,
    iota: &[usize],
    u_blocks: &[Vec<CMatrix>],
    f: &[CMatrix],
    order: usize,
    tol: &Tolerance,
) -> Result<Integration> {
    let n = ev.n();
    let blocks = blocks_of(n, iota);
    if u_blocks.len() != blocks.len() {
        return Err(Error::Dimension(format!(
            "{} block cocycles for {} blocks",
            u_blocks.len(),
            blocks.len()
        )));
    }
    let k = p.generator_count();
    // block family jets, each at order `order`
    let mut block_jets: Vec<Vec<JetMatrix>> = Vec::new();
    for (s, &(a, b)) in blocks.iter().enumerate() {
        let ns = b - a;
        let lam = ev.block(a, b);
        let det = lam
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, l| acc * l.value());
        let z = det.powf(1.0 / ns as f64);
        let scaled: Vec<C64> = lam.iter().map(|l| l.value() / z).collect();
        let base: Vec<CMatrix> = p
            .weights()
            .iter()
            .map(|&h| {
                CMatrix::from_diagonal(&CVector::from_vec(
                    scaled.iter().map(|x| x.powi(h as i32)).collect(),
                ))
            })
            .collect();
        let jets = if ns == 1 {
            base.iter().map(|m| JetMatrix::constant(m, order)).collect()
        } else {
            let lin = RelatorLinearization::new(p, &base, tol)?;
            match integrate_with(&lin, &Cocycle::new(u_blocks[s].clone()), order)? {
                Integration::Family(fam) => fam.jets()?,
                obstructed => return Ok(obstructed),
            }
        };
        let zs: Vec<C64> = p.weights().iter().map(|&h| z.powi(h as i32)).collect();
        block_jets.push(jets.into_iter().zip(zs).map(|(j, c)| j.scale(c)).collect());
    }
    let mut images = Vec::with_capacity(k);
    for l in 0..k {
        let mut coeffs = vec![CMatrix::zeros(n, n); order + 1];
        for (s, &(a, b)) in blocks.iter().enumerate() {
            for (c, m) in coeffs.iter_mut().zip(block_jets[s][l].coeffs()) {
                c.view_mut((a, a), (b - a, b - a)).copy_from(m);
            }
        }
        let e = JetMatrix::monomial(&f[l], 1, order).exp()?;
        images.push(&e * &JetMatrix::from_coeffs(coeffs));
    }
    Ok(Integration::Family(jet_images_to_family(
        p, ev, images, tol,
    )?))
}

/// Recovers the exponent form `exp(tU + sum t^k C_k) rho_D` of a jet curve
/// through `rho_D` by a truncated logarithm.
fn jet_images_to_family(
    p: &Presentation,
    ev: &EigenvalueData,
    images: Vec<JetMatrix>,
    tol: &Tolerance,
) -> Result<JetFamily> {
    let order = images[0].order();
    let n = ev.n();
    let base: Vec<CMatrix> = p.weights().iter().map(|&h| ev.diagonal_power(h)).collect();
    let mut u = Vec::new();
    let mut higher: Vec<Vec<CMatrix>> = vec![Vec::new(); order.saturating_sub(1)];
    for (l, img) in images.iter().enumerate() {
        let binv = base[l]
            .clone()
            .try_inverse()
            .ok_or(Error::SingularImage(l))?;
        // X = img * base^{-1} - I is t-adically nilpotent; log(I + X) = sum (-1)^{k+1} X^k / k
        let x = &(img * &JetMatrix::constant(&binv, order)) - &JetMatrix::identity(n, order);
        let mut term = x.clone();
        let mut log = x.clone();
        for kk in 2..=order {
            term = &term * &x;
            let sign = if kk % 2 == 0 { -1.0 } else { 1.0 };
            log = &log + &term.scale(C64::new(sign / kk as f64, 0.0));
        }
        u.push(log.coeff(1).clone());
        for kk in 2..=order {
            higher[kk - 2].push(log.coeff(kk).clone());
        }
    }
    let fam = JetFamily {
        base,
        u,
        higher,
        residuals: Vec::new(),
    };
    let res = fam.order_residuals(p)?;
    let worst = res.iter().copied().fold(0.0, f64::max);
    if worst > tol.residual_abs * 10.0 {
        return Err(Error::NotARepresentation {
            residual: worst,
            tol: tol.residual_abs * 10.0,
        });
    }
    Ok(JetFamily {
        residuals: res[2..].to_vec(),
        ..fam
    })
}
