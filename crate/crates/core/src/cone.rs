//! Tangent space at the diagonal representation, the quadratic cone
//! equations and its decomposition into linear components `V_iota`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::foxcoh::{RelatorLinearization, SlBasis};
use crate::linalg::{
    columns_to_matrix, nullspace, rank, solve_least_squares, CMatrix, CVector, Tolerance, C64,
};
use crate::presentation::Presentation;
use crate::repbuild::{
    check_hypotheses, diagonal_rep, nonprincipal_derivation, Cocycle, EigenvalueData,
    Representation,
};

/// Membership tolerance factor: residual `< MEMBERSHIP_TOL * (1 + |c|)`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Basis of `Z^1(Gamma; Ad rho_D)`: `U_i^+`, `U_i^-`, `H_i` (each `i = 1..n-1`)
/// and the coboundaries `B_k^l`, `k != l`, in row-major order.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    pub n: usize,
    pub rho: Representation,
    pub u_plus: Vec<Cocycle>,
    pub u_minus: Vec<Cocycle>,
    pub h: Vec<Cocycle>,
    pub coboundaries: Vec<Cocycle>,
    /// `(k, l)` of each coboundary, 0-based.
    pub coboundary_index: Vec<(usize, usize)>,
}

fn unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Builds the basis from non-principal derivations for `alpha_i^{±1}`.
pub fn tangent_basis(
    p: &Presentation,
    ev: &EigenvalueData,
    tol: &Tolerance,
) -> Result<TangentBasis> {
    let report = check_hypotheses(p, ev)?;
    if !report.passed() {
        return Err(Error::HypothesisFailure(report.reasons().join("; ")));
    }
    let n = ev.n();
    let h = p.weights();
    let rho = diagonal_rep(p, ev)?;
    let mut u_plus = Vec::new();
    let mut u_minus = Vec::new();
    let mut hs = Vec::new();
    for i in 0..n - 1 {
        let up = nonprincipal_derivation(p, &ev.ratio(i, i + 1), tol)?;
        let um = nonprincipal_derivation(p, &ev.ratio(i + 1, i), tol)?;
        u_plus.push(Cocycle::new(
            up.iter().map(|&c| unit(n, i, i + 1) * c).collect(),
        ));
        u_minus.push(Cocycle::new(
            um.iter().map(|&c| unit(n, i + 1, i) * c).collect(),
        ));
        let diag = &unit(n, i, i) - &unit(n, i + 1, i + 1);
        hs.push(Cocycle::new(
            h.iter().map(|&w| &diag * C64::new(w as f64, 0.0)).collect(),
        ));
    }
    let mut coboundaries = Vec::new();
    let mut coboundary_index = Vec::new();
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let r = ev.ratio(k, l);
            coboundaries.push(Cocycle::new(
                h.iter()
                    .map(|&w| unit(n, k, l) * (r.pow(w).value() - C64::new(1.0, 0.0)))
                    .collect(),
            ));
            coboundary_index.push((k, l));
        }
    }
    Ok(TangentBasis {
        n,
        rho,
        u_plus,
        u_minus,
        h: hs,
        coboundaries,
        coboundary_index,
    })
}

/// Coordinates `(x, y, z, t)` of a cocycle at `rho_D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeCoordinates {
    pub x: Vec<C64>,
    pub y: Vec<C64>,
    pub z: Vec<C64>,
    pub t: Vec<C64>,
}

impl ConeCoordinates {
    pub fn zero(n: usize) -> Self {
        ConeCoordinates {
            x: vec![C64::new(0.0, 0.0); n - 1],
            y: vec![C64::new(0.0, 0.0); n - 1],
            z: vec![C64::new(0.0, 0.0); n - 1],
            t: vec![C64::new(0.0, 0.0); n * n - n],
        }
    }

    pub fn n(&self) -> usize {
        self.x.len() + 1
    }

    pub fn to_vec(&self) -> Vec<C64> {
        [&self.x[..], &self.y[..], &self.z[..], &self.t[..]].concat()
    }

    pub fn from_vec(n: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), n * n + 2 * n - 3);
        let m = n - 1;
        ConeCoordinates {
            x: v[..m].to_vec(),
            y: v[m..2 * m].to_vec(),
            z: v[2 * m..3 * m].to_vec(),
            t: v[3 * m..].to_vec(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_vec()
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `2 z_i - z_(i-1) - z_(i+1)` with `z_0 = z_n = 0` (0-based `i`).
    pub fn z_form(&self, i: usize) -> C64 {
        let zero = C64::new(0.0, 0.0);
        let prev = if i == 0 { zero } else { self.z[i - 1] };
        let next = self.z.get(i + 1).copied().unwrap_or(zero);
        self.z[i] * 2.0 - prev - next
    }
}

impl TangentBasis {
    pub fn len(&self) -> usize {
        self.u_plus.len() * 3 + self.coboundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All basis cocycles in coordinate order.
    pub fn all(&self) -> Vec<&Cocycle> {
        self.u_plus
            .iter()
            .chain(&self.u_minus)
            .chain(&self.h)
            .chain(&self.coboundaries)
            .collect()
    }

    /// Stacked cochain coordinates of the basis as matrix columns.
    pub fn matrix(&self) -> CMatrix {
        let sl = SlBasis::new(self.n);
        let cols: Vec<CVector> = self
            .all()
            .iter()
            .map(|c| sl.cochain_coords(&c.values))
            .collect();
        columns_to_matrix(cols[0].len(), &cols)
    }

    pub fn independence_rank(&self, tol: &Tolerance) -> usize {
        rank(&self.matrix(), tol)
    }

    /// Rank of the cohomology representatives modulo the coboundaries.
    pub fn cohomology_rank_mod_coboundaries(&self, tol: &Tolerance) -> usize {
        let sl = SlBasis::new(self.n);
        let full = self.matrix();
        let b: Vec<CVector> = self
            .coboundaries
            .iter()
            .map(|c| sl.cochain_coords(&c.values))
            .collect();
        rank(&full, tol) - rank(&columns_to_matrix(full.nrows(), &b), tol)
    }

    pub fn assemble(&self, c: &ConeCoordinates) -> Cocycle {
        let weights = c.to_vec();
        let k = self.rho.images.len();
        self.all()
            .iter()
            .zip(weights)
            .fold(Cocycle::zero(self.n, k), |acc, (b, w)| {
                acc.plus(&b.scaled(w))
            })
    }

    /// Expansion coefficients of a cocycle at `rho_D`.
    pub fn coordinates(&self, u: &Cocycle, tol: &Tolerance) -> Result<ConeCoordinates> {
        let sl = SlBasis::new(self.n);
        let target = sl.cochain_coords(&u.values);
        let (x, residual) = solve_least_squares(&self.matrix(), &target, tol);
        if residual > tol.residual_abs * (1.0 + target.norm()) {
            return Err(Error::CoordinateResidual(residual));
        }
        Ok(ConeCoordinates::from_vec(self.n, x.as_slice()))
    }
}

/// `[(2z_i - z_(i-1) - z_(i+1)) x_i, (...) y_i]` for `i = 1..n-1`.
pub fn cone_equations(c: &ConeCoordinates) -> Vec<C64> {
    (0..c.x.len())
        .flat_map(|i| {
            let q = c.z_form(i);
            [q * c.x[i], q * c.y[i]]
        })
        .collect()
}

/// A linear component `V_iota` of the quadratic cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeComponent {
    /// 1-based superdiagonal positions.
    pub iota: Vec<usize>,
    pub dim: usize,
    pub label: Option<&'static str>,
    /// Every deformation tangent to this component is reducible.
    pub reducible_only: bool,
}

/// All subsets of `{1..n-1}` ordered by size, then lexicographically.
pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    let m = n - 1;
    let mut all: Vec<Vec<usize>> = (0..1u64 << m)
        .map(|mask| {
            (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| i + 1)
                .collect()
        })
        .collect();
    all.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    all
}

pub fn enumerate_components(n: usize) -> Vec<ConeComponent> {
    assert!(n >= 2);
    subsets(n)
        .into_iter()
        .map(|iota| {
            let full = iota.len() == n - 1;
            let label = if iota.is_empty() {
                Some("abelian component tangent")
            } else if full {
                Some("triangular component tangent")
            } else {
                None
            };
            ConeComponent {
                dim: n * n - 1 + iota.len(),
                reducible_only: !full,
                label,
                iota,
            }
        })
        .collect()
}

/// Every `iota` whose linear conditions hold at `c`.
pub fn membership(c: &ConeCoordinates) -> Vec<Vec<usize>> {
    let n = c.n();
    let eps = MEMBERSHIP_TOL * (1.0 + c.norm());
    subsets(n)
        .into_iter()
        .filter(|iota| {
            (0..n - 1).all(|i| {
                if iota.contains(&(i + 1)) {
                    c.z_form(i).norm() < eps
                } else {
                    c.x[i].norm() < eps && c.y[i].norm() < eps
                }
            })
        })
        .collect()
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random point of `V_iota`.
pub fn sample_in_component(n: usize, iota: &[usize], rng: &mut ChaCha8Rng) -> ConeCoordinates {
    let m = n - 1;
    let mut c = ConeCoordinates::zero(n);
    let mut constraints = CMatrix::zeros(iota.len(), m);
    for (r, &i) in iota.iter().enumerate() {
        let i = i - 1;
        constraints[(r, i)] = C64::new(2.0, 0.0);
        if i > 0 {
            constraints[(r, i - 1)] = C64::new(-1.0, 0.0);
        }
        if i + 1 < m {
            constraints[(r, i + 1)] = C64::new(-1.0, 0.0);
        }
    }
    let kernel = nullspace(&constraints, &Tolerance::default());
    for v in &kernel {
        let w = random_c64(rng);
        for (zi, vi) in c.z.iter_mut().zip(v.iter()) {
            *zi += vi * w;
        }
    }
    for &i in iota {
        c.x[i - 1] = random_c64(rng);
        c.y[i - 1] = random_c64(rng);
    }
    for t in c.t.iter_mut() {
        *t = random_c64(rng);
    }
    c
}

/// Random point with every coordinate drawn independently.
pub fn sample_generic(n: usize, rng: &mut ChaCha8Rng) -> ConeCoordinates {
    let v: Vec<C64> = (0..n * n + 2 * n - 3).map(|_| random_c64(rng)).collect();
    ConeCoordinates::from_vec(n, &v)
}

/// One oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub coords: ConeCoordinates,
    pub sampled_inside: bool,
    pub in_cone: bool,
    pub unobstructed: bool,
    pub residual: f64,
}

impl OracleSample {
    pub fn agrees(&self) -> bool {
        self.in_cone == self.unobstructed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStats {
    pub samples: usize,
    pub inside: usize,
    pub generic: usize,
    pub agreements: usize,
    pub disagreements: Vec<usize>,
}

impl OracleStats {
    pub fn rate(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.agreements as f64 / self.samples as f64
        }
    }
}

/// Seeded samples: the first half inside random components, the rest generic.
pub fn oracle_samples(n: usize, count: usize, seed: u64) -> Vec<(ConeCoordinates, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = subsets(n);
    let inside = count.div_ceil(2);
    (0..count)
        .map(|s| {
            if s < inside {
                let iota = &comps[rng.gen_range(0..comps.len())];
                (sample_in_component(n, iota, &mut rng), true)
            } else {
                (sample_generic(n, &mut rng), false)
            }
        })
        .collect()
}

/// Compares membership in the cone with second-order solvability of the
/// assembled cocycle; samples are split across `jobs` threads and merged in order.
pub fn oracle_agreement(
    p: &Presentation,
    basis: &TangentBasis,
    count: usize,
    seed: u64,
    jobs: usize,
    tol: &Tolerance,
) -> Result<(OracleStats, Vec<OracleSample>)> {
    let lin = RelatorLinearization::new(p, &basis.rho.images, tol)?;
    let samples = oracle_samples(basis.n, count, seed);
    let jobs = jobs.max(1).min(samples.len().max(1));
    let chunk = samples.len().div_ceil(jobs).max(1);
    let evaluate = |part: &[(ConeCoordinates, bool)]| -> Result<Vec<OracleSample>> {
        part.iter()
            .map(|(c, inside)| {
                let u = basis.assemble(c);
                let (_, rep) = lin.solve_order(&u.values, &[])?;
                Ok(OracleSample {
                    coords: c.clone(),
                    sampled_inside: *inside,
                    in_cone: !membership(c).is_empty(),
                    unobstructed: rep.vanishes,
                    residual: rep.residual,
                })
            })
            .collect()
    };
    let results: Vec<OracleSample> = if jobs == 1 {
        evaluate(&samples)?
    } else {
        let parts: Vec<Result<Vec<OracleSample>>> = std::thread::scope(|s| {
            let handles: Vec<_> = samples
                .chunks(chunk)
                .map(|part| s.spawn(|| evaluate(part)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("oracle worker panicked"))
                .collect()
        });
        let mut all = Vec::with_capacity(samples.len());
        for p in parts {
            all.extend(p?);
        }
        all
    };
    let disagreements: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.agrees())
        .map(|(i, _)| i)
        .collect();
    let stats = OracleStats {
        samples: results.len(),
        inside: results.iter().filter(|r| r.sampled_inside).count(),
        generic: results.iter().filter(|r| !r.sampled_inside).count(),
        agreements: results.len() - disagreements.len(),
        disagreements,
    };
    Ok((stats, results))
}
