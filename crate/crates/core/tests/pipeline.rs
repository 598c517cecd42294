use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use repcone::analysis::{analyze, off_cone_point, AnalysisConfig};
use repcone::catalog::lookup;
use repcone::cone::{membership, sample_generic, sample_in_component, subsets, tangent_basis};
use repcone::foxcoh::{
    adjoint_cocycle_residual, alexander_polynomial, audit_snapshot, deformation_images,
    solve_derivations, twisted_complex, CoefficientModule,
};
use repcone::jets::relator_residual;
use repcone::laurent::{LaurentPoly, RootSpec};
use repcone::linalg::{c64, max_abs, CMatrix, CVector, Tolerance, C64};
use repcone::repbuild::{
    block_path, build_triangular, check_hypotheses, diagonal_rep, integrate_cocycle,
    nonprincipal_derivation, Cocycle, EigenvalueData, Integration,
};

const TREFOIL_3: &str = "cyc:6/1,cyc:1/0,cyc:6/5";

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

#[test]
fn torus_knot_alexander_matches_closed_form() {
    for p in 2..8u32 {
        for q in 2..8u32 {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let got = alexander_polynomial(&lookup(&format!("torus:{p},{q}")).unwrap()).unwrap();
            // (t^pq - 1)(t - 1) / ((t^p - 1)(t^q - 1))
            let num =
                &LaurentPoly::t_pow_minus_one((p * q) as i64) * &LaurentPoly::t_pow_minus_one(1);
            let den =
                &LaurentPoly::t_pow_minus_one(p as i64) * &LaurentPoly::t_pow_minus_one(q as i64);
            let expected = num.divexact(&den).unwrap().normalized();
            assert_eq!(got.poly, expected, "torus:{p},{q}");
            assert!(got.is_unit_at_one());
            assert!(got.poly.is_symmetric());
        }
    }
}

#[test]
fn first_order_jets_vanish_exactly_on_cocycles() {
    let p = lookup("trefoil").unwrap();
    let tol = Tolerance::default();
    let ev = EigenvalueData::parse(3, TREFOIL_3).unwrap();
    let basis = tangent_basis(&p, &ev, &tol).unwrap();
    let rho = &basis.rho.images;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for s in 0..50 {
        let u: Vec<CMatrix> = if s % 2 == 0 {
            basis.assemble(&sample_generic(3, &mut rng)).values
        } else {
            (0..2)
                .map(|_| {
                    let m = random_matrix(&mut rng, 3);
                    let tr = m.trace() / c64(3.0, 0.0);
                    m - CMatrix::identity(3, 3) * tr
                })
                .collect()
        };
        let jets = deformation_images(rho, &u, &[], 1).unwrap();
        let first = relator_residual(&p, &jets)
            .unwrap()
            .iter()
            .map(|r| max_abs(r.coeff(1)))
            .fold(0.0, f64::max);
        let cocycle = adjoint_cocycle_residual(&p, rho, &u, &tol).unwrap();
        assert_eq!(
            first < 1e-10,
            cocycle < 1e-10,
            "sample {s}: jet {first:e}, cocycle {cocycle:e}"
        );
        assert_eq!(first < 1e-10, s % 2 == 0);
    }
}

#[test]
fn cohomology_is_conjugation_invariant() {
    let p = lookup("trefoil").unwrap();
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (n, eig) in [(2, "cyc:12/1,cyc:12/11"), (3, TREFOIL_3)] {
        let ev = EigenvalueData::parse(n, eig).unwrap();
        for rho in [
            diagonal_rep(&p, &ev).unwrap(),
            build_triangular(&p, &ev, &tol).unwrap(),
        ] {
            let base = twisted_complex(&p, &rho.images, CoefficientModule::AdjointTraceless, &tol)
                .unwrap();
            for _ in 0..3 {
                let g = random_matrix(&mut rng, n) + CMatrix::identity(n, n) * c64(2.0, 0.0);
                let conj = rho.conjugate(&g).unwrap();
                let cx =
                    twisted_complex(&p, &conj.images, CoefficientModule::AdjointTraceless, &tol)
                        .unwrap();
                assert_eq!((cx.h0, cx.h1, cx.h2), (base.h0, base.h1, base.h2));
            }
        }
    }
}

#[test]
fn every_component_integrates_for_torus_3_4() {
    let p = lookup("torus:3,4").unwrap();
    let tol = Tolerance::default();
    let ev = EigenvalueData::parse(3, "cyc:36/4,cyc:36/1,cyc:36/31").unwrap();
    let basis = tangent_basis(&p, &ev, &tol).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for iota in subsets(3) {
        for _ in 0..3 {
            let u = basis.assemble(&sample_in_component(3, &iota, &mut rng));
            match integrate_cocycle(&p, &basis.rho, &u, 4, &tol).unwrap() {
                Integration::Family(f) => {
                    let worst = f
                        .order_residuals(&p)
                        .unwrap()
                        .into_iter()
                        .fold(0.0, f64::max);
                    assert!(worst < 1e-9, "iota {iota:?}: {worst:e}");
                }
                other => panic!("iota {iota:?}: {other:?}"),
            }
        }
    }
}

#[test]
fn off_cone_points_are_obstructed_at_order_two() {
    let p = lookup("trefoil").unwrap();
    let tol = Tolerance::default();
    for (n, eig) in [
        (2, "cyc:12/1,cyc:12/11"),
        (3, TREFOIL_3),
        (4, "cyc:4/1,cyc:12/1,cyc:12/11,cyc:4/3"),
    ] {
        let ev = EigenvalueData::parse(n, eig).unwrap();
        let basis = tangent_basis(&p, &ev, &tol).unwrap();
        let c = off_cone_point(n);
        assert!(membership(&c).is_empty());
        let r = integrate_cocycle(&p, &basis.rho, &basis.assemble(&c), 4, &tol).unwrap();
        assert!(
            matches!(r, Integration::Obstructed { order: 2, .. }),
            "n = {n}: {r:?}"
        );
    }
}

#[test]
fn block_path_is_tangent_to_its_component() {
    let p = lookup("trefoil").unwrap();
    let tol = Tolerance::default();
    let ev = EigenvalueData::parse(3, TREFOIL_3).unwrap();
    let basis = tangent_basis(&p, &ev, &tol).unwrap();
    // iota = {1}: one 2x2 block on coordinates 1,2 and a 1x1 block
    let up = nonprincipal_derivation(&p, &ev.ratio(0, 1), &tol).unwrap();
    let um = nonprincipal_derivation(&p, &ev.ratio(1, 0), &tol).unwrap();
    let block: Vec<CMatrix> = up
        .iter()
        .zip(&um)
        .map(|(&a, &b)| {
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(0.0, 0.0),
                    a * c64(0.7, 0.2),
                    b * c64(-0.4, 0.9),
                    C64::new(0.0, 0.0),
                ],
            )
        })
        .collect();
    let f_diag = CMatrix::from_diagonal(&CVector::from_vec(vec![
        c64(0.3, 0.1),
        c64(0.3, 0.1),
        c64(-0.6, -0.2),
    ]));
    let f: Vec<CMatrix> = p
        .weights()
        .iter()
        .map(|&h| &f_diag * c64(h as f64, 0.0))
        .collect();
    let one = vec![CMatrix::zeros(1, 1); 2];
    let r = block_path(&p, &ev, &[0], &[block, one], &f, 4, &tol).unwrap();
    let Integration::Family(fam) = r else {
        panic!("{r:?}")
    };
    assert!(fam
        .order_residuals(&p)
        .unwrap()
        .into_iter()
        .all(|x| x < 1e-9));
    let coords = basis
        .coordinates(&Cocycle::new(fam.u.clone()), &tol)
        .unwrap();
    assert!(membership(&coords).contains(&vec![1]), "{coords:?}");
    assert!(coords.x[0].norm() > 1e-3 && coords.x[1].norm() < 1e-9);
}

#[test]
fn figure_eight_negative_control() {
    let p = lookup("fig8").unwrap();
    let tol = Tolerance::default();
    for m in [6u64, 12] {
        let alpha = RootSpec::cyclotomic(m, 1);
        let ders = solve_derivations(&p, &alpha, &tol).unwrap();
        assert!(ders.iter().all(|d| d.is_principal), "cyc:{m}/1");
        let cx = twisted_complex(&p, &[], CoefficientModule::Scalar(alpha), &tol).unwrap();
        assert_eq!((cx.h0, cx.h1, cx.h2), (0, 0, 0));
    }
    for eig in ["cyc:12/1,cyc:12/11", "cyc:6/1,cyc:1/0,cyc:6/5"] {
        let ev = EigenvalueData::parse(eig.split(',').count(), eig).unwrap();
        assert!(!check_hypotheses(&p, &ev).unwrap().passed());
        assert!(tangent_basis(&p, &ev, &tol).is_err());
    }
    let audit = audit_snapshot();
    assert!(audit.complexes > 0);
    assert_eq!(audit.euler_violations, 0);
    assert!(audit.max_d2d1 < 1e-10);
}

#[test]
fn report_is_deterministic_across_jobs() {
    let p = lookup("trefoil").unwrap();
    let ev = EigenvalueData::parse(3, TREFOIL_3).unwrap();
    let cfg = AnalysisConfig {
        samples: 40,
        seed: 9,
        ..AnalysisConfig::default()
    };
    let a = serde_json::to_string(&analyze(&p, &ev, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&analyze(&p, &ev, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let parallel = analyze(&p, &ev, &AnalysisConfig { jobs: 3, ..cfg }).unwrap();
    let mut c = serde_json::to_value(&parallel).unwrap();
    c["checks"]["settings"]["jobs"] = serde_json::json!(1);
    assert_eq!(
        serde_json::to_value(analyze(&p, &ev, &cfg).unwrap()).unwrap(),
        c
    );
    for key in [
        "presentation",
        "alexander",
        "hypotheses",
        "cohomology",
        "cone",
        "deformation",
        "character",
        "checks",
    ] {
        assert!(c.get(key).is_some(), "missing {key}");
    }
}
