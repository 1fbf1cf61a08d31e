//! The scalar tower `Q, Theta, Psi, R, Pi, Omega, X, H` with its
//! `s`-derivatives, and the residuals of the characterization equations.

use serde::Serialize;

use crate::error::QuantityError;
use crate::jet::{Jet, JetScalar, Series};
use crate::phi::{PhiModel, UnicornParams};

/// Scalars at one `(b^2, s)`. Subscript `2` denotes `d/ds`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct QuantitySet {
    pub b2: f64,
    pub s: f64,
    pub q: f64,
    pub q2: f64,
    pub theta: f64,
    pub psi: f64,
    pub r: f64,
    pub pi: f64,
    pub omega: f64,
    pub x: f64,
    pub x2: f64,
    pub x22: f64,
    pub x222: f64,
    pub h: f64,
    pub h2: f64,
    pub h22: f64,
    pub h222: f64,
    /// `phi (phi - s phi_2)`
    pub rho: f64,
    pub ln_phi: f64,
    /// `(phi - s phi_2) / phi`
    pub d1_rel: f64,
    /// `(phi - s phi_2 + (b^2 - s^2) phi_22) / phi`
    pub d2_rel: f64,
}

/// Series in `s` of every quantity of the tower.
#[derive(Clone, Copy, Debug)]
pub struct Tower<const M: usize> {
    pub q: Series<M>,
    pub r: Series<M>,
    pub theta: Series<M>,
    pub psi: Series<M>,
    pub pi: Series<M>,
    pub omega: Series<M>,
    pub x: Series<M>,
    pub h: Series<M>,
    /// `(phi - s phi_2) / phi`
    pub d1: Series<M>,
    /// `(phi - s phi_2 + (b^2 - s^2) phi_22) / phi`
    pub d2: Series<M>,
}

/// Tower truncated at third order in `s`, enough for `X_222` and `H_222`.
pub type QuantitySeries = Tower<4>;

fn nonzero<const M: usize>(
    which: &'static str,
    v: &Series<M>,
    b2: f64,
    s: f64,
) -> Result<(), QuantityError> {
    let x = v.value();
    if x == 0.0 || !x.is_finite() {
        return Err(QuantityError::Singular {
            which,
            value: x,
            b2,
            s,
        });
    }
    Ok(())
}

/// The tower from series of `phi, phi_2, phi_22, phi_1, phi_12` in `s`.
pub fn tower<const M: usize>(
    p: Series<M>,
    p2: Series<M>,
    p22: Series<M>,
    p1: Series<M>,
    p12: Series<M>,
    b2: f64,
    s: f64,
) -> Result<Tower<M>, QuantityError> {
    let sv = Series::<M>::variable(s);
    let w = Series::<M>::constant(b2) - sv * sv;

    nonzero("phi", &p, b2, s)?;
    let d1 = p - sv * p2;
    nonzero("phi - s phi_2", &d1, b2, s)?;
    let d2 = d1 + w * p22;
    nonzero("phi - s phi_2 + (b^2 - s^2) phi_22", &d2, b2, s)?;

    let q = p2 / d1;
    let r = p1 / d1;
    let theta = (d1 * p2 - sv * p * p22) / (p * d2 * 2.0);
    let psi = p22 / (d2 * 2.0);
    let pi = (d1 * p12 - sv * p1 * p22) / (d1 * d2);
    let lever = (sv * p + w * p2) / p;
    let omega = p1 * 2.0 / p - lever * pi;
    let h = (p22 - (p1 - sv * p12) * 2.0) / (d2 * 2.0);
    let x = (p2 + sv * p1 * 2.0) / (p * 2.0) - h * lever;
    Ok(Tower {
        q,
        r,
        theta,
        psi,
        pi,
        omega,
        x,
        h,
        d1: d1 / p,
        d2: d2 / p,
    })
}

/// Quantity series from a jet of `phi` (any positive multiple of `phi` gives
/// the same result).
pub fn quantity_series(jet: &Jet<6>, b2: f64, s: f64) -> Result<QuantitySeries, QuantityError> {
    let p6 = jet.re;
    tower(
        p6.truncate(),
        p6.differentiate().truncate(),
        p6.differentiate().differentiate().truncate(),
        jet.du.truncate(),
        jet.du.differentiate().truncate(),
        b2,
        s,
    )
}

/// Values (no `s`-derivatives) of the tower from a second-order jet.
pub fn tower_values(jet: &Jet<3>, b2: f64, s: f64) -> Result<Tower<1>, QuantityError> {
    let p = jet.re;
    tower(
        p.truncate(),
        p.differentiate().truncate(),
        p.differentiate().differentiate().truncate(),
        jet.du.truncate(),
        jet.du.differentiate().truncate(),
        b2,
        s,
    )
}

/// Quantity set from a jet of `phi`; `ln_phi` fixes the absolute scale used
/// for `rho`.
pub fn quantity_set_scaled(
    jet: &Jet<6>,
    ln_phi: f64,
    b2: f64,
    s: f64,
) -> Result<QuantitySet, QuantityError> {
    let v = jet.value();
    let qs = quantity_series(jet, b2, s)?;
    let ln_phi = ln_phi + v.ln();
    Ok(QuantitySet {
        b2,
        s,
        q: qs.q.value(),
        q2: qs.q.derivative_at(1),
        theta: qs.theta.value(),
        psi: qs.psi.value(),
        r: qs.r.value(),
        pi: qs.pi.value(),
        omega: qs.omega.value(),
        x: qs.x.value(),
        x2: qs.x.derivative_at(1),
        x22: qs.x.derivative_at(2),
        x222: qs.x.derivative_at(3),
        h: qs.h.value(),
        h2: qs.h.derivative_at(1),
        h22: qs.h.derivative_at(2),
        h222: qs.h.derivative_at(3),
        rho: (2.0 * ln_phi).exp() * qs.d1.value(),
        ln_phi,
        d1_rel: qs.d1.value(),
        d2_rel: qs.d2.value(),
    })
}

/// Quantity set for an explicit `phi` jet.
pub fn quantity_set(jet: &Jet<6>, b2: f64, s: f64) -> Result<QuantitySet, QuantityError> {
    let v = jet.value();
    if !(v > 0.0) {
        return Err(QuantityError::Singular {
            which: "phi",
            value: v,
            b2,
            s,
        });
    }
    quantity_set_scaled(&jet.scale(1.0 / v), 0.0, b2, s)
}

/// Quantity set of a model at `(b^2, s)`.
pub fn model_quantities(model: &PhiModel, b2: f64, s: f64) -> Result<QuantitySet, QuantityError> {
    let (jet, ln) = model.jet_scaled::<6>(b2, s)?;
    quantity_set_scaled(&jet, ln, b2, s)
}

/// `(H_2 - s H_22, X - s X_2)`
pub fn berwald_residuals(q: &QuantitySet, s: f64) -> (f64, f64) {
    (q.h2 - s * q.h22, q.x - s * q.x2)
}

/// The three Landsberg combinations: the `E` and `C` coefficients and the
/// two-dimensional combination `(b^2 - s^2) C + 3 E`.
pub fn landsberg_residuals(q: &QuantitySet, b2: f64, s: f64) -> (f64, f64, f64) {
    let e =
        (b2 * q.q + s) * (q.h2 - s * q.h22) - (1.0 + s * q.q) * s * q.x22 + q.q * (q.x - s * q.x2);
    let c = (b2 * q.q + s) * q.h222 + (1.0 + s * q.q) * q.x222 + 3.0 * q.q * q.x22;
    let two_d = (b2 - s * s)
        * ((b2 * q.q + s) * q.h222 + (1.0 + s * q.q) * q.x222 + 3.0 * q.q * q.x22)
        + 3.0
            * ((b2 * q.q + s) * (q.h2 - s * q.h22) - (1.0 + s * q.q) * s * q.x22
                + q.q * (q.x - s * q.x2));
    (e, c, two_d)
}

/// Deviation of `X - s X_2` and `H_2 - s H_22` from the family's ODE
/// solution with constant `c1`.
pub fn unicorn_ode_residuals(
    q: &QuantitySet,
    b2: f64,
    s: f64,
    c1: f64,
) -> Result<(f64, f64), QuantityError> {
    let w = b2 - s * s;
    if !(w > 0.0) {
        return Err(QuantityError::Extremal { s, b: b2.sqrt() });
    }
    let (hb, xb) = berwald_residuals(q, s);
    Ok((xb - c1 / w.sqrt(), hb + c1 / (w * w.sqrt())))
}

/// `(X, H)` of the exponential-integral family in closed form.
pub fn closed_form_xh(params: &UnicornParams, b2: f64, s: f64) -> (f64, f64) {
    let c1 = params.c1.eval(b2);
    let r = (b2 - s * s).max(0.0).sqrt();
    let x = c1 * r / b2 + params.lambda1.eval(b2) * s;
    let h =
        0.5 * params.lambda2.eval(b2) * s * s - c1 * s * r / (b2 * b2) + params.lambda0.eval(b2);
    (x, h)
}

/// Residuals of the structural identities at one point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StructuralRecord {
    pub b2: f64,
    pub s: f64,
    /// `Q - s Q_2`
    pub q_linear: f64,
    /// `X_22 - (H_2 - s H_22)`
    pub x22_vs_h: f64,
    /// `(b^2 - s^2) X_22 + (X - s X_2)`
    pub x_ode: f64,
    /// `(b^2 - s^2) H_222 + 3 (H_2 - s H_22)`
    pub h_ode: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuralReport {
    pub records: Vec<StructuralRecord>,
    pub max_q_linear: f64,
    pub max_x22_vs_h: f64,
    pub max_x_ode: f64,
    pub max_h_ode: f64,
    pub failures: Vec<String>,
}

pub fn structural_lemma_checks(model: &PhiModel, samples: &[(f64, f64)]) -> StructuralReport {
    let mut records = Vec::with_capacity(samples.len());
    let mut failures = Vec::new();
    for &(b2, s) in samples {
        match model_quantities(model, b2, s) {
            Ok(q) => {
                let w = b2 - s * s;
                let (hb, xb) = berwald_residuals(&q, s);
                records.push(StructuralRecord {
                    b2,
                    s,
                    q_linear: q.q - s * q.q2,
                    x22_vs_h: q.x22 - hb,
                    x_ode: w * q.x22 + xb,
                    h_ode: w * q.h222 + 3.0 * hb,
                });
            }
            Err(e) => failures.push(format!("({b2}, {s}): {e}")),
        }
    }
    let max =
        |g: fn(&StructuralRecord) -> f64| records.iter().map(|r| g(r).abs()).fold(0.0, f64::max);
    StructuralReport {
        max_q_linear: max(|r| r.q_linear),
        max_x22_vs_h: max(|r| r.x22_vs_h),
        max_x_ode: max(|r| r.x_ode),
        max_h_ode: max(|r| r.h_ode),
        records,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{Expr, PhiJet};
    use crate::phi::{riemannian_phi, shen_example_phi, CoefficientFunction};

    fn c(v: f64) -> CoefficientFunction {
        CoefficientFunction::constant(v)
    }

    #[test]
    fn constant_phi_has_trivial_tower() {
        let q = quantity_set(&PhiJet::constant(1.0), 1.0, 0.3).unwrap();
        for v in [
            q.q, q.theta, q.psi, q.r, q.pi, q.omega, q.x, q.h, q.h222, q.x222,
        ] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(q.rho, 1.0);
        assert_eq!(berwald_residuals(&q, 0.3), (0.0, 0.0));
        assert_eq!(landsberg_residuals(&q, 1.0, 0.3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn example_at_origin() {
        let q = model_quantities(&shen_example_phi(), 1.0, 0.0).unwrap();
        assert!((q.q - 2.0).abs() < 1e-12);
        assert!((q.x - 1.0).abs() < 1e-12);
        assert!(q.h.abs() < 1e-12);
        let (hb, xb) = berwald_residuals(&q, 0.0);
        assert!((hb + 1.0).abs() < 1e-10 && (xb - 1.0).abs() < 1e-12);
        let (a, b) = unicorn_ode_residuals(&q, 1.0, 0.0, 1.0).unwrap();
        assert!(a.abs() < 1e-12 && b.abs() < 1e-10);
        let (a, b) = unicorn_ode_residuals(&q, 1.0, 0.0, 2.0).unwrap();
        assert!((a + 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn example_is_landsberg() {
        let q = model_quantities(&shen_example_phi(), 1.0, 0.4).unwrap();
        let (e, cc, t) = landsberg_residuals(&q, 1.0, 0.4);
        assert!(e.abs() < 1e-8 && cc.abs() < 1e-8 && t.abs() < 1e-8);
        let s = structural_lemma_checks(&shen_example_phi(), &[(1.0, 0.3)]);
        assert!(s.max_x22_vs_h < 1e-8);
    }

    #[test]
    fn riemannian_tower() {
        let m = riemannian_phi(c(0.0), c(1.0), c(1.0));
        for s in [-0.7, 0.0, 0.5] {
            let q = model_quantities(&m, 1.0, s).unwrap();
            assert!((q.h - 0.25).abs() < 1e-14);
            assert!(q.x.abs() < 1e-14);
            let (hb, xb) = berwald_residuals(&q, s);
            assert!(hb.abs() < 1e-10 && xb.abs() < 1e-10);
        }
    }

    #[test]
    fn spray_coefficient_identities() {
        let m = riemannian_phi(c(0.1), CoefficientFunction(vec![0.3, 0.2]), c(1.5));
        for (b2, s) in [(1.0, 0.2), (0.5, -0.6), (2.0, 1.1)] {
            let q = model_quantities(&m, b2, s).unwrap();
            let x = q.theta * (1.0 + 2.0 * b2 * q.r) + s * q.omega;
            let h = q.psi * (1.0 + 2.0 * b2 * q.r) + s * q.pi - q.r;
            assert!((x - q.x).abs() < 1e-13);
            assert!((h - q.h).abs() < 1e-13);
        }
    }

    #[test]
    fn randers_type_is_not_landsberg() {
        let jet: PhiJet = (Expr::c(1.0) + Expr::s())
            .eval(&PhiJet::var_b2(1.0), &PhiJet::var_s(0.3))
            .unwrap();
        let q = quantity_set(&jet, 1.0, 0.3).unwrap();
        let (e, _, _) = landsberg_residuals(&q, 1.0, 0.3);
        assert!(e.abs() > 1e-3);
    }

    #[test]
    fn closed_form_examples() {
        let ex = UnicornParams::example();
        assert_eq!(closed_form_xh(&ex, 1.0, 0.0), (1.0, 0.0));
        let p = UnicornParams {
            c1: c(0.0),
            lambda1: c(1.0),
            ..UnicornParams::example()
        };
        assert_eq!(closed_form_xh(&p, 1.0, 0.5), (0.5, 0.0));
        let p = UnicornParams {
            lambda0: c(0.2),
            lambda2: c(0.4),
            ..UnicornParams::example()
        };
        let (x, h) = closed_form_xh(&p, 1.0, 0.5);
        assert!((x - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert!((h + 0.183_012_701_892_219_3).abs() < 1e-15);
    }

    #[test]
    fn singular_denominator_is_named() {
        // phi = s: phi - s phi_2 = 0 identically
        let jet: PhiJet = Expr::s()
            .eval(&PhiJet::var_b2(1.0), &PhiJet::var_s(0.5))
            .unwrap();
        let err = quantity_set(&jet, 1.0, 0.5).unwrap_err();
        assert!(matches!(
            err,
            QuantityError::Singular {
                which: "phi - s phi_2",
                ..
            }
        ));
        let _ = jet.value();
    }
}
