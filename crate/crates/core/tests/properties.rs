use finsler_core::tensor::{
    berwald_from_quantities, fundamental_tensor, landsberg_from_quantities, mean_landsberg,
    point_quantities, spray_conformal, spray_general, tensor_scale,
};
use finsler_core::{
    build_euclidean_conformal, classify_point, custom_phi, riemannian_phi, shen_example_phi,
    unicorn_phi, CoefficientFunction, EuclideanConformal, Expr, PhiModel, Tolerances,
    UnicornParams,
};
use nalgebra::DVector;
use proptest::prelude::*;

fn c(v: f64) -> CoefficientFunction {
    CoefficientFunction::constant(v)
}

fn models() -> Vec<PhiModel> {
    vec![
        shen_example_phi(),
        riemannian_phi(c(0.0), c(1.0), c(1.0)),
        unicorn_phi(UnicornParams {
            c1: c(2.0),
            lambda3: c(1.5),
            ..UnicornParams::example()
        }),
        custom_phi(Expr::c(1.0) + Expr::c(0.5) * Expr::s()),
    ]
}

/// Base point with `|b| = b`, a unit `y` with `s = frac * b`, and a
/// rescaling of `y`.
#[derive(Clone, Debug)]
struct Sample {
    model: usize,
    n: usize,
    b: f64,
    frac: f64,
    b_dir: Vec<f64>,
    w_dir: Vec<f64>,
    scale: f64,
}

fn sample() -> impl Strategy<Value = Sample> {
    (0usize..4, 2usize..=4).prop_flat_map(|(model, n)| {
        (
            Just(model),
            Just(n),
            0.5f64..1.5,
            -0.55f64..0.9,
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            0.2f64..5.0,
        )
            .prop_map(|(model, n, b, frac, b_dir, w_dir, scale)| Sample {
                model,
                n,
                b,
                frac,
                b_dir,
                w_dir,
                scale,
            })
    })
}

struct Point {
    structure: EuclideanConformal,
    phi: PhiModel,
    x: DVector<f64>,
    y: DVector<f64>,
    scale: f64,
}

fn realize(s: &Sample) -> Option<Point> {
    let structure = build_euclidean_conformal(s.n, 1.0, &[]).ok()?;
    let bh = DVector::from_column_slice(&s.b_dir);
    if bh.norm() < 0.1 {
        return None;
    }
    let bh = bh.normalize();
    let mut w = DVector::from_column_slice(&s.w_dir);
    w -= &bh * bh.dot(&w);
    if w.norm() < 0.1 {
        return None;
    }
    let w = w.normalize();
    let phi = models().swap_remove(s.model);
    let iv = phi.admissible(s.b * s.b).ok()?;
    // keep clear of singular directions
    if !(s.frac * s.b > iv.lo + 0.1 * s.b && s.frac * s.b < iv.hi - 0.05 * s.b) {
        return None;
    }
    let x = structure.point_with_one_form(&(&bh * s.b));
    let y = &bh * s.frac + w * (1.0 - s.frac * s.frac).sqrt();
    Some(Point {
        structure,
        phi,
        x,
        y,
        scale: s.scale,
    })
}

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn spray_is_positively_two_homogeneous(s in sample()) {
        let Some(p) = realize(&s) else { return Ok(()) };
        let g1 = spray_conformal(&p.structure, &p.phi, &p.x, &p.y).unwrap();
        let g2 = spray_conformal(&p.structure, &p.phi, &p.x, &(&p.y * p.scale)).unwrap();
        prop_assert!(rel(&(g1 * p.scale * p.scale), &g2) < 1e-12);
    }

    #[test]
    fn general_spray_matches_conformal_spray(s in sample()) {
        let Some(p) = realize(&s) else { return Ok(()) };
        let a = spray_conformal(&p.structure, &p.phi, &p.x, &p.y).unwrap();
        let b = spray_general(&p.structure, &p.phi, &p.x, &p.y).unwrap();
        prop_assert!((a - b).amax() <= 1e-10 * (1.0 + p.x.amax()));
    }

    #[test]
    fn fundamental_tensor_reproduces_the_norm(s in sample()) {
        let Some(p) = realize(&s) else { return Ok(()) };
        let y = &p.y * p.scale;
        let Ok(g) = fundamental_tensor(&p.structure, &p.phi, &p.x, &y) else { return Ok(()) };
        let f = finsler_core::tensor::finsler_norm(&p.structure, &p.phi, &p.x, &y).unwrap();
        let gyy = y.dot(&(&g.g * &y));
        prop_assert!((gyy - f * f).abs() <= 1e-12 * f * f);
    }

    #[test]
    fn berwald_and_landsberg_are_symmetric_and_annihilate_y(s in sample()) {
        let Some(p) = realize(&s) else { return Ok(()) };
        let (f, q) = point_quantities(&p.structure, &p.phi, &p.x, &p.y).unwrap();
        let b = berwald_from_quantities(&f, &q);
        let l = landsberg_from_quantities(&f, &q).tensor;
        let n = f.n;
        let scale = tensor_scale(b.norm_inf().max(l.norm_inf()), q.rho, f.alpha);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let by: f64 = (0..n).map(|m| b.get(i, j, k, m) * f.y[m]).sum();
                    prop_assert!(by.abs() <= 1e-12 * scale);
                    let ly: f64 = (0..n).map(|m| l.get(j, k, m) * f.y[m]).sum();
                    prop_assert!(ly.abs() <= 1e-12 * scale);
                    prop_assert!((l.get(i, j, k) - l.get(k, i, j)).abs() <= 1e-14 * scale);
                    prop_assert!((l.get(i, j, k) - l.get(j, i, k)).abs() <= 1e-14 * scale);
                    for m in 0..n {
                        prop_assert_eq!(b.get(i, j, k, m), b.get(i, m, j, k));
                        prop_assert_eq!(b.get(i, j, k, m), b.get(i, k, j, m));
                    }
                }
            }
        }
    }

    #[test]
    fn verdicts_respect_implication_and_monotonicity(s in sample(), factor in 1.0f64..1e3) {
        let Some(p) = realize(&s) else { return Ok(()) };
        let tol = Tolerances::default();
        let Ok(tight) = classify_point(&p.structure, &p.phi, &p.x, &p.y, &tol) else { return Ok(()) };
        let loose_tol = Tolerances {
            scalar: tol.scalar * factor,
            tensor: tol.tensor * factor,
            ..tol
        };
        let loose = classify_point(&p.structure, &p.phi, &p.x, &p.y, &loose_tol).unwrap();
        for v in [&tight, &loose] {
            prop_assert!(!v.berwald || v.landsberg);
        }
        prop_assert!(!tight.berwald || loose.berwald);
        prop_assert!(!tight.landsberg || loose.landsberg);
    }

    #[test]
    fn mean_landsberg_vanishes_with_landsberg(s in sample()) {
        let Some(p) = realize(&s) else { return Ok(()) };
        // the first three models are Landsberg
        if s.model == 3 { return Ok(()) }
        let (f, q) = point_quantities(&p.structure, &p.phi, &p.x, &p.y).unwrap();
        let l = landsberg_from_quantities(&f, &q).tensor;
        let Ok(g) = fundamental_tensor(&p.structure, &p.phi, &p.x, &p.y) else { return Ok(()) };
        let j = mean_landsberg(&g.g_inv, &l);
        prop_assert!(j.amax() <= 1e-8 * tensor_scale(0.0, q.rho, f.alpha));
    }
}
