//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use repcone::analysis::off_cone_point;
use repcone::burnside::algebra_span;
use repcone::catalog::lookup;
use repcone::charvar::{character_report, SliceReport};
use repcone::cone::{
    enumerate_components, membership, oracle_agreement, sample_in_component, subsets, tangent_basis,
};
use repcone::foxcoh::{
    alexander_polynomial, audit_snapshot, solve_derivations, twisted_complex, CoefficientModule,
};
use repcone::laurent::{LaurentPoly, RootSpec};
use repcone::linalg::Tolerance;
use repcone::presentation::Presentation;
use repcone::repbuild::{
    build_triangular, check_hypotheses, diagonal_rep, integrate_cocycle, refine_representation,
    EigenvalueData, Integration,
};

const TREFOIL_2: &str = "cyc:12/1,cyc:12/11";
const TREFOIL_3: &str = "cyc:6/1,cyc:1/0,cyc:6/5";
const TREFOIL_4: &str = "cyc:4/1,cyc:12/1,cyc:12/11,cyc:4/3";
const T34_XI: &str = "cyc:36/4,cyc:36/1,cyc:36/31";
const T34_FAIL: &str = "cyc:12/1,cyc:1/0,cyc:12/11";

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn knot(name: &str) -> Result<Presentation, String> {
    lookup(name).map_err(|e| e.to_string())
}

fn eig(s: &str) -> Result<EigenvalueData, String> {
    EigenvalueData::parse(s.split(',').count(), s).map_err(|e| e.to_string())
}

fn alexander_invariants() -> Outcome {
    let phi6 = LaurentPoly::from_ints(0, &[1, -1, 1]);
    let phi12 = LaurentPoly::from_ints(0, &[1, 0, -1, 0, 1]);
    let cases = [
        ("trefoil", phi6.clone()),
        ("torus:3,4", (&phi6 * &phi12).normalized()),
    ];
    let mut out = Vec::new();
    for (name, expected) in cases {
        let a = alexander_polynomial(&knot(name)?).map_err(|e| e.to_string())?;
        let got = a.poly.integer_coeffs();
        ensure(got == expected.integer_coeffs(), || {
            format!("{name}: {got:?} != {:?}", expected.integer_coeffs())
        })?;
        ensure(a.is_unit_at_one(), || {
            format!("{name}: Delta(1) = {}", a.at_one)
        })?;
        ensure(a.poly.is_symmetric(), || format!("{name}: not symmetric"))?;
        out.push(format!("{name}: {:?}", got.unwrap_or_default()));
    }
    Ok(out.join("; "))
}

fn cohomology_at_diagonal() -> Outcome {
    let p = knot("trefoil")?;
    let ev = eig(TREFOIL_2)?;
    let rho = diagonal_rep(&p, &ev).map_err(|e| e.to_string())?;
    let n = 2;
    let expected = (
        n * n + 2 * n - 3,
        n * n - n,
        3 * (n - 1),
        2 * (n - 1),
        n - 1,
    );
    let base = Tolerance::default();
    for tol in [base, base.scaled(10.0), base.scaled(0.1)] {
        let cx = twisted_complex(&p, &rho.images, CoefficientModule::AdjointTraceless, &tol)
            .map_err(|e| e.to_string())?;
        let got = (cx.dim_z1(), cx.dim_b1(), cx.h1, cx.h2, cx.h0);
        ensure(got == expected, || {
            format!("rank_rel {:e}: (Z1,B1,h1,h2,h0) = {got:?}", tol.rank_rel)
        })?;
    }
    Ok(format!(
        "(Z1, B1, h1, h2, h0) = {expected:?} at rank_rel x1, x10, x0.1"
    ))
}

fn triangular_representations() -> Outcome {
    let tol = Tolerance::default();
    let mut out = Vec::new();
    for (name, data) in [
        ("trefoil", TREFOIL_2),
        ("trefoil", TREFOIL_3),
        ("torus:3,4", T34_XI),
    ] {
        let start = Instant::now();
        let p = knot(name)?;
        let ev = eig(data)?;
        let n = ev.n();
        let tri = build_triangular(&p, &ev, &tol).map_err(|e| format!("{name} n={n}: {e}"))?;
        ensure(tri.relator_residual < 1e-9, || {
            format!("{name} n={n}: residual {:e}", tri.relator_residual)
        })?;
        let cx = twisted_complex(&p, &tri.images, CoefficientModule::AdjointTraceless, &tol)
            .map_err(|e| e.to_string())?;
        ensure(cx.h0 == 0 && cx.h1 == n - 1, || {
            format!("{name} n={n}: h0 = {}, h1 = {}", cx.h0, cx.h1)
        })?;
        ensure(cx.dim_z1() == n * n + n - 2, || {
            format!(
                "{name} n={n}: component dim {} != {}",
                cx.dim_z1(),
                n * n + n - 2
            )
        })?;
        ensure(start.elapsed() < Duration::from_secs(10), || {
            format!("{name} n={n}: too slow")
        })?;
        out.push(format!(
            "{name} n={n} residual {:.1e}",
            tri.relator_residual
        ));
    }
    Ok(out.join("; "))
}

fn hypothesis_checker() -> Outcome {
    let t34 = knot("torus:3,4")?;
    let trefoil = knot("trefoil")?;
    let verdict =
        |p: &Presentation, s: &str| check_hypotheses(p, &eig(s)?).map_err(|e| e.to_string());
    ensure(verdict(&t34, T34_XI)?.passed(), || {
        "torus:3,4 xi data rejected".into()
    })?;
    ensure(verdict(&trefoil, TREFOIL_3)?.passed(), || {
        "trefoil n=3 data rejected".into()
    })?;
    ensure(verdict(&trefoil, TREFOIL_2)?.passed(), || {
        "trefoil n=2 data rejected".into()
    })?;
    let fail = verdict(&t34, T34_FAIL)?;
    ensure(!fail.passed(), || "torus:3,4 second data accepted".into())?;
    ensure(
        fail.reasons()
            .iter()
            .any(|r| r.starts_with("lambda_1/lambda_3")),
        || format!("reasons {:?}", fail.reasons()),
    )?;
    Ok(format!("rejection: {}", fail.reasons().join("; ")))
}

fn cone_lattice() -> Outcome {
    let p = knot("trefoil")?;
    let tol = Tolerance::default();
    let mut out = Vec::new();
    for data in [TREFOIL_2, TREFOIL_3, TREFOIL_4] {
        let ev = eig(data)?;
        let n = ev.n();
        let eta = RootSpec::cyclotomic(6, 1);
        ensure((0..n - 1).all(|i| ev.ratio(i, i + 1) == eta), || {
            format!("n={n}: ratios are not eta")
        })?;
        let comps = enumerate_components(n);
        ensure(comps.len() == 1 << (n - 1), || {
            format!("n={n}: {} components", comps.len())
        })?;
        ensure(
            comps.iter().all(|c| c.dim == n * n - 1 + c.iota.len()),
            || format!("n={n}: dims"),
        )?;
        let count = |d: usize| comps.iter().filter(|c| c.dim == d).count();
        ensure(count(n * n - 1) == 1 && count(n * n + n - 2) == 1, || {
            format!("n={n}: extreme dims")
        })?;
        let basis = tangent_basis(&p, &ev, &tol).map_err(|e| e.to_string())?;
        let rank = basis.independence_rank(&tol);
        ensure(rank == n * n + 2 * n - 3, || {
            format!("n={n}: tangent rank {rank}")
        })?;
        let dims: Vec<usize> = comps.iter().map(|c| c.dim).collect();
        out.push(format!("n={n} {dims:?}"));
    }
    Ok(out.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let p = knot("trefoil")?;
    let tol = Tolerance::default();
    let mut out = Vec::new();
    for data in [TREFOIL_2, TREFOIL_3, TREFOIL_4] {
        let ev = eig(data)?;
        let basis = tangent_basis(&p, &ev, &tol).map_err(|e| e.to_string())?;
        let (stats, _) =
            oracle_agreement(&p, &basis, 100, 0, 1, &tol).map_err(|e| e.to_string())?;
        ensure(
            stats.samples >= 100 && stats.inside >= 50 && stats.generic >= 50,
            || format!("{stats:?}"),
        )?;
        ensure(stats.disagreements.is_empty(), || {
            format!("n={}: disagreements at {:?}", ev.n(), stats.disagreements)
        })?;
        out.push(format!(
            "n={} {}/{}",
            ev.n(),
            stats.agreements,
            stats.samples
        ));
    }
    Ok(out.join("; "))
}

fn cone_integrability() -> Outcome {
    let p = knot("trefoil")?;
    let tol = Tolerance::default();
    let ev = eig(TREFOIL_3)?;
    let basis = tangent_basis(&p, &ev, &tol).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for iota in subsets(3) {
        let c = sample_in_component(3, &iota, &mut rng);
        ensure(membership(&c).contains(&iota), || {
            format!("sample not in V{iota:?}")
        })?;
        let u = basis.assemble(&c);
        match integrate_cocycle(&p, &basis.rho, &u, 4, &tol).map_err(|e| e.to_string())? {
            Integration::Family(f) => {
                let res = f.order_residuals(&p).map_err(|e| e.to_string())?;
                let w = res.iter().copied().fold(0.0, f64::max);
                ensure(f.order() == 4 && w < 1e-9, || {
                    format!("V{iota:?}: residuals {res:?}")
                })?;
                worst = worst.max(w);
            }
            Integration::Obstructed { order, residual } => {
                return Err(format!(
                    "V{iota:?} obstructed at order {order} ({residual:e})"
                ))
            }
        }
    }
    let off = integrate_cocycle(&p, &basis.rho, &basis.assemble(&off_cone_point(3)), 4, &tol)
        .map_err(|e| e.to_string())?;
    ensure(
        matches!(off, Integration::Obstructed { order: 2, .. }),
        || format!("off-cone: {off:?}"),
    )?;
    Ok(format!(
        "4 components to order 4, worst residual {worst:.1e}; off-cone obstructed at order 2"
    ))
}

fn irreducible_deformation() -> Outcome {
    let p = knot("trefoil")?;
    let tol = Tolerance::default();
    let mut out = Vec::new();
    for data in [TREFOIL_2, TREFOIL_3] {
        let ev = eig(data)?;
        let n = ev.n();
        let basis = tangent_basis(&p, &ev, &tol).map_err(|e| e.to_string())?;
        let full: Vec<usize> = (1..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = sample_in_component(n, &full, &mut rng);
        ensure(c.x.iter().chain(&c.y).all(|v| v.norm() > 1e-3), || {
            "vanishing u_i components".into()
        })?;
        let Integration::Family(f) =
            integrate_cocycle(&p, &basis.rho, &basis.assemble(&c), 4, &tol)
                .map_err(|e| e.to_string())?
        else {
            return Err(format!("n={n}: full-cone cocycle obstructed"));
        };
        let (rho, _) =
            refine_representation(&p, &f.eval_at(1e-2), &tol).map_err(|e| e.to_string())?;
        ensure(rho.relator_residual < 1e-11, || {
            format!("n={n}: residual {:e}", rho.relator_residual)
        })?;
        let span = algebra_span(&rho.images, &tol);
        ensure(span.dim() == n * n && span.margin > 1e-6, || {
            format!("n={n}: span {} margin {:e}", span.dim(), span.margin)
        })?;
        let diag = algebra_span(&basis.rho.images, &tol).dim();
        let tri = build_triangular(&p, &ev, &tol).map_err(|e| e.to_string())?;
        let tri_span = algebra_span(&tri.images, &tol).dim();
        ensure(diag == n && tri_span < n * n, || {
            format!("n={n}: reducible spans {diag}, {tri_span}")
        })?;
        out.push(format!(
            "n={n} residual {:.1e} span {} margin {:.1e}",
            rho.relator_residual,
            span.dim(),
            span.margin
        ));
    }
    Ok(out.join("; "))
}

fn character_bookkeeping() -> Outcome {
    let tol = Tolerance::default();
    let mut out = Vec::new();
    for (name, data) in [
        ("trefoil", TREFOIL_2),
        ("trefoil", TREFOIL_3),
        ("torus:3,4", T34_XI),
    ] {
        let p = knot(name)?;
        let ev = eig(data)?;
        let basis = tangent_basis(&p, &ev, &tol).map_err(|e| e.to_string())?;
        let (r, _) = character_report(&p, &ev, &basis, &tol).map_err(|e| e.to_string())?;
        ensure(r.tuple() == SliceReport::expected(r.n), || {
            format!("{name} n={}: {:?}", r.n, r.tuple())
        })?;
        ensure(r.rank_dt == r.h1_triangular, || {
            format!("{name}: rank dt {} != h1 {}", r.rank_dt, r.h1_triangular)
        })?;
        ensure(r.failures().is_empty(), || r.failures().join("; "))?;
        out.push(format!("{name} n={} {:?}", r.n, r.tuple()));
    }
    Ok(out.join("; "))
}

fn negative_controls() -> Outcome {
    let p = knot("fig8")?;
    let tol = Tolerance::default();
    for m in [6u64, 12] {
        let ders =
            solve_derivations(&p, &RootSpec::cyclotomic(m, 1), &tol).map_err(|e| e.to_string())?;
        let np = ders.iter().filter(|d| !d.is_principal).count();
        ensure(np == 0, || {
            format!("cyc:{m}/1: {np} non-principal derivations")
        })?;
    }
    for data in [TREFOIL_2, TREFOIL_3] {
        let r = check_hypotheses(&p, &eig(data)?).map_err(|e| e.to_string())?;
        ensure(!r.passed(), || format!("fig8 accepted {data}"))?;
    }
    let audit = audit_snapshot();
    ensure(
        audit.complexes > 0 && audit.euler_violations == 0 && audit.max_d2d1 < 1e-10,
        || format!("{audit:?}"),
    )?;
    Ok(format!(
        "no non-principal derivations; {} complexes audited, max |D2 D1| {:.1e}",
        audit.complexes, audit.max_d2d1
    ))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("Alexander invariants", 1, alexander_invariants),
        (
            "cohomology at the diagonal representation",
            5,
            cohomology_at_diagonal,
        ),
        ("triangular representations", 10, triangular_representations),
        ("hypothesis checker", 1, hypothesis_checker),
        ("cone lattice", 1, cone_lattice),
        ("oracle equivalence", 60, oracle_equivalence),
        ("integrability of the cone", 60, cone_integrability),
        ("irreducible deformation", 30, irreducible_deformation),
        ("character-variety bookkeeping", 10, character_bookkeeping),
        ("negative controls", 10, negative_controls),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(*limit) => Err(format!(
                "took {:.2}s, limit {limit}s ({detail})",
                elapsed.as_secs_f64()
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "PASS {:>2} {name} [{:.3}s]: {detail}",
                i + 1,
                elapsed.as_secs_f64()
            ),
            Err(reason) => {
                failures += 1;
                println!(
                    "FAIL {:>2} {name} [{:.3}s]: {reason}",
                    i + 1,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
