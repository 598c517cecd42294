//! End-to-end pipeline: Alexander polynomial, hypotheses, cohomology at the
//! diagonal and triangular representations, the cone lattice with its oracle
//! cross-check, an irreducible deformation and the slice bookkeeping.
//!
//! Every measured dimension is stored next to the closed-form value it is
//! compared with, and every comparison is also listed under `checks`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::burnside::algebra_span;
use crate::charvar::character_report;
use crate::cone::{
    enumerate_components, oracle_agreement, sample_in_component, subsets, tangent_basis,
    ConeCoordinates, TangentBasis,
};
use crate::error::{Error, Result};
use crate::foxcoh::{alexander_polynomial, twisted_complex, CoefficientModule, TwistedComplex};
use crate::laurent::LaurentPoly;
use crate::linalg::{c64, Tolerance};
use crate::presentation::Presentation;
use crate::repbuild::{
    build_triangular, check_hypotheses_with, diagonal_rep, integrate_cocycle,
    refine_representation, EigenvalueData, HypothesisReport, Integration, Representation,
};

/// Exit status of a run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub tol: Tolerance,
    pub samples: usize,
    pub seed: u64,
    pub jobs: usize,
    /// Jet order for per-component integration and the deformation.
    pub order: usize,
    /// Curve parameter at which the deformation is evaluated.
    pub t: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            tol: Tolerance::default(),
            samples: 100,
            seed: 0,
            jobs: 1,
            order: 4,
            t: 1e-2,
        }
    }
}

/// A dimension with its predicted value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quantity {
    pub measured: usize,
    pub expected: usize,
    pub formula: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Accumulates checks while the sections are built.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Checks {
    pub items: Vec<Check>,
    pub errors: Vec<String>,
}

impl Checks {
    pub fn quantity(
        &mut self,
        name: &str,
        formula: &str,
        expected: usize,
        measured: usize,
    ) -> Quantity {
        let pass = expected == measured;
        self.items.push(Check {
            name: name.to_string(),
            pass,
            detail: format!("{formula} = {expected}, measured {measured}"),
        });
        Quantity {
            measured,
            expected,
            formula: formula.to_string(),
            pass,
        }
    }

    pub fn flag(&mut self, name: &str, pass: bool, detail: impl Into<String>) -> bool {
        self.items.push(Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
        pass
    }

    pub fn error(&mut self, stage: &str, e: &Error) {
        self.errors.push(format!("{stage}: {e}"));
    }

    pub fn all_pass(&self) -> bool {
        self.errors.is_empty() && self.items.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresentationSection {
    pub text: String,
    pub generators: Vec<String>,
    pub relators: Vec<String>,
    pub weights: Vec<i64>,
}

impl PresentationSection {
    pub fn new(p: &Presentation) -> Self {
        PresentationSection {
            text: p.to_string(),
            generators: p.names().iter().map(|c| c.to_string()).collect(),
            relators: p.relators().iter().map(|r| r.format(p.names())).collect(),
            weights: p.weights().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclotomicFactor {
    pub order: u64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlexanderSection {
    /// Factored form when there are at least two factors, plain otherwise.
    pub display: String,
    pub polynomial: String,
    pub ascending: String,
    pub factored: String,
    /// Integer coefficients from the constant term up.
    pub coefficients: Vec<i64>,
    pub cyclotomic_factors: Vec<CyclotomicFactor>,
    pub non_cyclotomic_part: String,
    pub at_one: String,
    pub unit_at_one: bool,
    pub symmetric: bool,
    pub warnings: Vec<String>,
}

/// `t^2 - t + 1`, or `(t^2-t+1)(t^4-t^2+1)` for products.
pub fn alexander_display(poly: &LaurentPoly) -> String {
    let (factors, rest) = poly.cyclotomic_factorization();
    let count: usize = factors.iter().map(|(_, e)| e).sum::<usize>() + usize::from(rest.span() > 0);
    if count >= 2 {
        poly.factored_string()
    } else {
        poly.to_string()
    }
}

impl AlexanderSection {
    pub fn new(p: &Presentation) -> Result<(Self, LaurentPoly)> {
        let a = alexander_polynomial(p)?;
        let (factors, rest) = a.poly.cyclotomic_factorization();
        let section = AlexanderSection {
            display: alexander_display(&a.poly),
            polynomial: a.poly.to_string(),
            ascending: a.poly.ascending_string(),
            factored: a.poly.factored_string(),
            coefficients: a.poly.integer_coeffs().unwrap_or_default(),
            cyclotomic_factors: factors
                .iter()
                .map(|&(order, multiplicity)| CyclotomicFactor {
                    order,
                    multiplicity,
                })
                .collect(),
            non_cyclotomic_part: rest.to_string(),
            at_one: a.at_one.to_string(),
            unit_at_one: a.is_unit_at_one(),
            symmetric: a.poly.is_symmetric(),
            warnings: a.warnings.clone(),
        };
        Ok((section, a.poly))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEntry {
    pub i: usize,
    pub j: usize,
    pub value: String,
    pub kind: String,
    pub delta_abs: f64,
    pub multiplicity: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesesSection {
    pub n: usize,
    pub eigenvalues: Vec<String>,
    pub passed: bool,
    pub reasons: Vec<String>,
    pub ratios: Vec<RatioEntry>,
}

impl HypothesesSection {
    pub fn new(ev: &EigenvalueData, report: &HypothesisReport) -> Self {
        HypothesesSection {
            n: ev.n(),
            eigenvalues: ev.lambdas().iter().map(|l| l.to_string()).collect(),
            passed: report.passed(),
            reasons: report.reasons().to_vec(),
            ratios: report
                .records
                .iter()
                .map(|r| RatioEntry {
                    i: r.i,
                    j: r.j,
                    value: r.value.to_string(),
                    kind: format!("{:?}", r.kind),
                    delta_abs: r.delta_abs,
                    multiplicity: r.multiplicity,
                    ok: r.ok,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologyTable {
    pub h0: Quantity,
    pub h1: Quantity,
    pub h2: Quantity,
    pub dim_z1: Quantity,
    pub dim_b1: Quantity,
    pub euler_characteristic: i64,
    pub marginal: bool,
    pub d2d1_residual: f64,
    /// Dimensions unchanged with the rank tolerance scaled by 10 and 1/10.
    pub tolerance_stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologySection {
    pub diagonal: CohomologyTable,
    pub triangular: CohomologyTable,
    pub triangular_relator_residual: f64,
    /// Tangent dimension at the triangular representation, `dim Z^1`.
    pub component_dim: Quantity,
}

fn dims(cx: &TwistedComplex) -> [usize; 5] {
    [cx.h0, cx.h1, cx.h2, cx.dim_z1(), cx.dim_b1()]
}

fn cohomology_table(
    checks: &mut Checks,
    label: &str,
    p: &Presentation,
    rho: &Representation,
    expected: [(&str, usize); 5],
    tol: &Tolerance,
) -> Result<CohomologyTable> {
    let cx = twisted_complex(p, &rho.images, CoefficientModule::AdjointTraceless, tol)?;
    let d = dims(&cx);
    let mut stable = true;
    for f in [10.0, 0.1] {
        let other = twisted_complex(
            p,
            &rho.images,
            CoefficientModule::AdjointTraceless,
            &tol.scaled(f),
        )?;
        stable &= dims(&other) == d;
    }
    let names = ["h0", "h1", "h2", "dim_z1", "dim_b1"];
    let q: Vec<Quantity> = (0..5)
        .map(|i| {
            checks.quantity(
                &format!("{label}.{}", names[i]),
                expected[i].0,
                expected[i].1,
                d[i],
            )
        })
        .collect();
    checks.flag(
        &format!("{label}.tolerance_stable"),
        stable,
        "dimensions unchanged with the rank tolerance scaled by 10 and 0.1",
    );
    checks.flag(
        &format!("{label}.rank_gap"),
        !cx.marginal,
        "no singular value near the rank threshold",
    );
    checks.flag(
        &format!("{label}.euler"),
        cx.euler_characteristic() == 0,
        format!("h0 - h1 + h2 = {}", cx.euler_characteristic()),
    );
    let mut it = q.into_iter();
    Ok(CohomologyTable {
        h0: it.next().unwrap(),
        h1: it.next().unwrap(),
        h2: it.next().unwrap(),
        dim_z1: it.next().unwrap(),
        dim_b1: it.next().unwrap(),
        euler_characteristic: cx.euler_characteristic(),
        marginal: cx.marginal,
        d2d1_residual: cx.d2d1_residual,
        tolerance_stable: stable,
    })
}

impl CohomologySection {
    pub fn new(
        checks: &mut Checks,
        p: &Presentation,
        diag: &Representation,
        tri: &Representation,
        tol: &Tolerance,
    ) -> Result<Self> {
        let n = diag.n();
        let diagonal = cohomology_table(
            checks,
            "cohomology.diagonal",
            p,
            diag,
            [
                ("n-1", n - 1),
                ("3(n-1)", 3 * (n - 1)),
                ("2(n-1)", 2 * (n - 1)),
                ("n^2+2n-3", n * n + 2 * n - 3),
                ("n^2-n", n * n - n),
            ],
            tol,
        )?;
        let triangular = cohomology_table(
            checks,
            "cohomology.triangular",
            p,
            tri,
            [
                ("0", 0),
                ("n-1", n - 1),
                ("n-1", n - 1),
                ("n^2+n-2", n * n + n - 2),
                ("n^2-1", n * n - 1),
            ],
            tol,
        )?;
        let component_dim = checks.quantity(
            "cohomology.component_dim",
            "n^2+n-2",
            n * n + n - 2,
            triangular.dim_z1.measured,
        );
        checks.flag(
            "cohomology.triangular_residual",
            tri.relator_residual < 1e-9,
            format!("relator residual {:.3e} < 1e-9", tri.relator_residual),
        );
        Ok(CohomologySection {
            diagonal,
            triangular,
            triangular_relator_residual: tri.relator_residual,
            component_dim,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentEntry {
    pub iota: Vec<usize>,
    pub dim: Quantity,
    pub label: Option<&'static str>,
    pub reducible_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEntry {
    pub samples: usize,
    pub inside: usize,
    pub generic: usize,
    pub agreements: usize,
    pub rate: f64,
    pub disagreements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationEntry {
    pub iota: Option<Vec<usize>>,
    pub order: usize,
    pub integrated: bool,
    pub obstructed_at: Option<usize>,
    /// Residual of the correction system at orders `2..`.
    pub residuals: Vec<f64>,
}

impl IntegrationEntry {
    fn from(iota: Option<Vec<usize>>, order: usize, r: &Integration) -> Self {
        match r {
            Integration::Family(f) => IntegrationEntry {
                iota,
                order,
                integrated: true,
                obstructed_at: None,
                residuals: f.residuals.clone(),
            },
            Integration::Obstructed {
                order: at,
                residual,
            } => IntegrationEntry {
                iota,
                order,
                integrated: false,
                obstructed_at: Some(*at),
                residuals: vec![*residual],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeSection {
    pub components: Vec<ComponentEntry>,
    pub count: Quantity,
    pub tangent_rank: Quantity,
    pub oracle: OracleEntry,
    pub integration: Vec<IntegrationEntry>,
    /// A point off the cone; expected to be obstructed at order 2.
    pub off_cone: IntegrationEntry,
}

/// `x_1 = 1` and `z_1 = 1` with everything else zero: the first cone
/// equation reads `2 * 1 * 1 != 0`.
pub fn off_cone_point(n: usize) -> ConeCoordinates {
    let mut c = ConeCoordinates::zero(n);
    c.x[0] = c64(1.0, 0.0);
    c.z[0] = c64(1.0, 0.0);
    c
}

impl ConeSection {
    pub fn new(
        checks: &mut Checks,
        p: &Presentation,
        basis: &TangentBasis,
        order: usize,
        cfg: &AnalysisConfig,
    ) -> Result<Self> {
        let n = basis.n;
        let tol = &cfg.tol;
        let comps = enumerate_components(n);
        let components: Vec<ComponentEntry> = comps
            .iter()
            .map(|c| ComponentEntry {
                dim: checks.quantity(
                    &format!("cone.dim{:?}", c.iota),
                    "n^2-1+|iota|",
                    n * n - 1 + c.iota.len(),
                    c.dim,
                ),
                iota: c.iota.clone(),
                label: c.label,
                reducible_only: c.reducible_only,
            })
            .collect();
        let count = checks.quantity("cone.count", "2^(n-1)", 1 << (n - 1), components.len());
        let tangent_rank = checks.quantity(
            "cone.tangent_rank",
            "n^2+2n-3",
            n * n + 2 * n - 3,
            basis.independence_rank(tol),
        );
        let (stats, _) = oracle_agreement(p, basis, cfg.samples, cfg.seed, cfg.jobs, tol)?;
        checks.flag(
            "cone.oracle",
            stats.disagreements.is_empty(),
            format!("{}/{} samples agree", stats.agreements, stats.samples),
        );
        let oracle = OracleEntry {
            samples: stats.samples,
            inside: stats.inside,
            generic: stats.generic,
            agreements: stats.agreements,
            rate: stats.rate(),
            disagreements: stats.disagreements.clone(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        let mut integration = Vec::new();
        for iota in subsets(n) {
            let u = basis.assemble(&sample_in_component(n, &iota, &mut rng));
            let r = integrate_cocycle(p, &basis.rho, &u, order, tol)?;
            let e = IntegrationEntry::from(Some(iota.clone()), order, &r);
            let worst = e.residuals.iter().copied().fold(0.0, f64::max);
            checks.flag(
                &format!("cone.integrate{iota:?}"),
                e.integrated && worst < 1e-9,
                format!("order {order}, worst residual {worst:.3e}"),
            );
            integration.push(e);
        }
        let off = integrate_cocycle(
            p,
            &basis.rho,
            &basis.assemble(&off_cone_point(n)),
            order.max(2),
            tol,
        )?;
        let off_cone = IntegrationEntry::from(None, order.max(2), &off);
        checks.flag(
            "cone.off_cone_obstructed",
            off_cone.obstructed_at == Some(2),
            format!("obstructed at {:?}", off_cone.obstructed_at),
        );
        Ok(ConeSection {
            components,
            count,
            tangent_rank,
            oracle,
            integration,
            off_cone,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformationSection {
    pub t: f64,
    pub order: usize,
    pub approx_residual: f64,
    pub refined_residual: f64,
    pub iterations: usize,
    pub det_deviation: f64,
    pub span: Quantity,
    pub margin: f64,
    pub irreducible: bool,
    pub diagonal_span: Quantity,
    pub triangular_span: usize,
    pub triangular_reducible: bool,
}

impl DeformationSection {
    /// Integrates a random point of the full component, evaluates at `t`,
    /// refines and certifies irreducibility.
    pub fn new(
        checks: &mut Checks,
        p: &Presentation,
        basis: &TangentBasis,
        tri: &Representation,
        cfg: &AnalysisConfig,
    ) -> Result<Self> {
        let n = basis.n;
        let tol = &cfg.tol;
        let full: Vec<usize> = (1..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
        let c = sample_in_component(n, &full, &mut rng);
        let u = basis.assemble(&c);
        let family = match integrate_cocycle(p, &basis.rho, &u, cfg.order, tol)? {
            Integration::Family(f) => f,
            Integration::Obstructed { order, residual } => {
                return Err(Error::NoConvergence {
                    residual,
                    iterations: order,
                })
            }
        };
        let approx = family.eval_at(cfg.t);
        let approx_residual = p.relator_residual(&approx)?;
        let (rho, iterations) = refine_representation(p, &approx, tol)?;
        let span = algebra_span(&rho.images, tol);
        let diag_span = algebra_span(&basis.rho.images, tol).dim();
        let tri_span = algebra_span(&tri.images, tol).dim();
        checks.flag(
            "deformation.refined_residual",
            rho.relator_residual < 1e-11,
            format!("{:.3e} < 1e-11", rho.relator_residual),
        );
        let span_q = checks.quantity("deformation.span", "n^2", n * n, span.dim());
        checks.flag(
            "deformation.margin",
            span.margin > 1e-6,
            format!("{:.3e} > 1e-6", span.margin),
        );
        let diagonal_span = checks.quantity("deformation.diagonal_span", "n", n, diag_span);
        checks.flag(
            "deformation.triangular_reducible",
            tri_span < n * n,
            format!("span {tri_span} < n^2 = {}", n * n),
        );
        Ok(DeformationSection {
            t: cfg.t,
            order: cfg.order,
            approx_residual,
            refined_residual: rho.relator_residual,
            iterations,
            det_deviation: rho.det_deviation(),
            irreducible: span.is_full(),
            span: span_q,
            margin: span.margin,
            diagonal_span,
            triangular_span: tri_span,
            triangular_reducible: tri_span < n * n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterSection {
    pub dim_h1_quotient: Quantity,
    pub dim_tx_abelian: Quantity,
    pub dim_tx_component: Quantity,
    pub intersection_dim: Quantity,
    pub rank_dt: Quantity,
    pub h0_triangular: Quantity,
    pub h1_triangular: usize,
    pub zero_weights: usize,
    pub paired_weights: usize,
    pub torus_residual: f64,
}

impl CharacterSection {
    pub fn new(
        checks: &mut Checks,
        p: &Presentation,
        ev: &EigenvalueData,
        basis: &TangentBasis,
        tol: &Tolerance,
    ) -> Result<Self> {
        let (r, _) = character_report(p, ev, basis, tol)?;
        let n = r.n;
        let mut q = |name: &str, formula: &str, e: usize, m: usize| {
            checks.quantity(&format!("character.{name}"), formula, e, m)
        };
        let section = CharacterSection {
            dim_h1_quotient: q("dim_h1_quotient", "2(n-1)", 2 * (n - 1), r.dim_h1_quotient),
            dim_tx_abelian: q("dim_tx_abelian", "n-1", n - 1, r.dim_tx_abelian),
            dim_tx_component: q("dim_tx_component", "n-1", n - 1, r.dim_tx_component),
            intersection_dim: q("intersection_dim", "0", 0, r.intersection_dim),
            rank_dt: q("rank_dt", "n-1", n - 1, r.rank_dt),
            h0_triangular: q("h0_triangular", "0", 0, r.h0_triangular),
            h1_triangular: r.h1_triangular,
            zero_weights: r.zero_weights,
            paired_weights: r.paired_weights,
            torus_residual: r.torus_residual,
        };
        checks.flag(
            "character.rank_dt_is_h1",
            r.rank_dt == r.h1_triangular,
            format!("rank dt = {}, h1 = {}", r.rank_dt, r.h1_triangular),
        );
        checks.flag(
            "character.torus_action",
            r.torus_residual < 1e-8,
            format!("residual {:.3e}", r.torus_residual),
        );
        Ok(section)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChecksSection {
    pub settings: AnalysisConfig,
    pub items: Vec<Check>,
    pub errors: Vec<String>,
    pub passed: bool,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub presentation: PresentationSection,
    pub alexander: AlexanderSection,
    pub hypotheses: HypothesesSection,
    pub cohomology: Option<CohomologySection>,
    pub cone: Option<ConeSection>,
    pub deformation: Option<DeformationSection>,
    pub character: Option<CharacterSection>,
    pub checks: ChecksSection,
}

impl AnalysisReport {
    pub fn exit_code(&self) -> i32 {
        self.checks.exit_code
    }
}

/// Runs a stage, recording an error instead of aborting the run.
fn stage<T>(
    checks: &mut Checks,
    name: &str,
    f: impl FnOnce(&mut Checks) -> Result<T>,
) -> Option<T> {
    match f(checks) {
        Ok(v) => Some(v),
        Err(e) => {
            checks.error(name, &e);
            None
        }
    }
}

/// Full pipeline. Fails only when the Alexander polynomial cannot be
/// computed; later failures are recorded in the report.
pub fn analyze(
    p: &Presentation,
    ev: &EigenvalueData,
    cfg: &AnalysisConfig,
) -> Result<AnalysisReport> {
    let (alexander, delta) = AlexanderSection::new(p)?;
    let hyp = check_hypotheses_with(&delta, ev);
    let hypotheses = HypothesesSection::new(ev, &hyp);
    let mut checks = Checks::default();
    checks.flag("hypotheses", hyp.passed(), hyp.reasons().join("; "));
    let finish = |checks: Checks, code: i32| ChecksSection {
        settings: *cfg,
        passed: code == EXIT_OK,
        items: checks.items,
        errors: checks.errors,
        exit_code: code,
    };
    if !hyp.passed() {
        return Ok(AnalysisReport {
            presentation: PresentationSection::new(p),
            alexander,
            hypotheses,
            cohomology: None,
            cone: None,
            deformation: None,
            character: None,
            checks: finish(checks, EXIT_HYPOTHESIS),
        });
    }
    let tol = cfg.tol;
    let diag = stage(&mut checks, "diagonal representation", |_| {
        diagonal_rep(p, ev)
    });
    let tri = stage(&mut checks, "triangular representation", |_| {
        build_triangular(p, ev, &tol)
    });
    let basis = stage(&mut checks, "tangent basis", |_| tangent_basis(p, ev, &tol));
    let cohomology = match (&diag, &tri) {
        (Some(d), Some(t)) => stage(&mut checks, "cohomology", |c| {
            CohomologySection::new(c, p, d, t, &tol)
        }),
        _ => None,
    };
    let (cone, deformation, character) = match &basis {
        Some(b) => (
            stage(&mut checks, "cone", |c| {
                ConeSection::new(c, p, b, cfg.order, cfg)
            }),
            match &tri {
                Some(t) => stage(&mut checks, "deformation", |c| {
                    DeformationSection::new(c, p, b, t, cfg)
                }),
                None => None,
            },
            stage(&mut checks, "character", |c| {
                CharacterSection::new(c, p, ev, b, &tol)
            }),
        ),
        None => (None, None, None),
    };
    let code = if checks.all_pass() {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    };
    Ok(AnalysisReport {
        presentation: PresentationSection::new(p),
        alexander,
        hypotheses,
        cohomology,
        cone,
        deformation,
        character,
        checks: finish(checks, code),
    })
}
