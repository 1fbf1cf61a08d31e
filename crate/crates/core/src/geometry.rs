//! Base Riemannian data `(alpha, beta)` and the per-direction frame quantities.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// A Riemannian metric `a_ij` with a closed 1-form `b_i` whose covariant
/// derivative is conformal to it, `b_{i|j} = c a_ij`.
pub trait ConformalStructure: Send + Sync {
    fn dim(&self) -> usize;

    fn metric(&self, x: &DVector<f64>) -> DMatrix<f64>;

    fn one_form(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Covariant derivative `b_{i|j}`, row `i`, column `j`.
    fn one_form_derivative(&self, x: &DVector<f64>) -> DMatrix<f64>;

    fn conformal_factor(&self, x: &DVector<f64>) -> f64;

    /// Spray coefficients `G_alpha^i` of the Riemannian metric.
    fn alpha_spray(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;

    /// `max_ij |b_{i|j} - c a_ij|`
    fn conformal_residual(&self, x: &DVector<f64>) -> f64 {
        let db = self.one_form_derivative(x);
        let a = self.metric(x);
        let c = self.conformal_factor(x);
        (db - a * c).amax()
    }
}

/// Flat model: `a = delta`, `b_i = lambda x_i + shift_i`, `c = lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanConformal {
    n: usize,
    lambda: f64,
    shift: Vec<f64>,
}

impl EuclideanConformal {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// A point `x` with `b(x)` equal to `target`.
    pub fn point_with_one_form(&self, target: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.n,
            (0..self.n).map(|i| (target[i] - self.shift[i]) / self.lambda),
        )
    }
}

pub fn build_euclidean_conformal(
    n: usize,
    lambda: f64,
    shift: &[f64],
) -> Result<EuclideanConformal, GeometryError> {
    if n < 2 {
        return Err(GeometryError::Dimension(n));
    }
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(GeometryError::ZeroConformalFactor);
    }
    let shift = if shift.is_empty() {
        vec![0.0; n]
    } else if shift.len() == n {
        shift.to_vec()
    } else {
        return Err(GeometryError::ShiftLength {
            expected: n,
            got: shift.len(),
        });
    };
    Ok(EuclideanConformal { n, lambda, shift })
}

impl ConformalStructure for EuclideanConformal {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n)
    }

    fn one_form(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.n,
            (0..self.n).map(|i| self.lambda * x[i] + self.shift[i]),
        )
    }

    fn one_form_derivative(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n) * self.lambda
    }

    fn conformal_factor(&self, _x: &DVector<f64>) -> f64 {
        self.lambda
    }

    fn alpha_spray(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.n)
    }
}

/// Quantities attached to a tangent vector `y` at `x`.
#[derive(Clone, Debug)]
pub struct AnisotropicFrame {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub b2: f64,
    pub c: f64,
    pub y: DVector<f64>,
    /// `y_j = a_jk y^k`
    pub y_low: DVector<f64>,
    /// `b_i`
    pub b_low: DVector<f64>,
    /// `b^i = a^{ij} b_j`
    pub b_up: DVector<f64>,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    pub h: DVector<f64>,
    pub hh: DMatrix<f64>,
}

/// Slack allowed on `|s| <= b` before the structure is declared corrupt.
const EXTREMAL_SLACK: f64 = 1e-9;

pub fn frame_at<S: ConformalStructure + ?Sized>(
    structure: &S,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<AnisotropicFrame, GeometryError> {
    let n = structure.dim();
    if x.len() != n || y.len() != n {
        return Err(GeometryError::Dimension(x.len().min(y.len())));
    }
    if y.iter().all(|v| *v == 0.0) {
        return Err(GeometryError::ZeroDirection);
    }
    let a = structure.metric(x);
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or(GeometryError::DegenerateMetric)?;
    let b_low = structure.one_form(x);
    let b_up = &a_inv * &b_low;
    let y_low = &a * y;
    let alpha = y.dot(&y_low).sqrt();
    let beta = b_low.dot(y);
    let s = beta / alpha;
    let b2 = b_low.dot(&b_up);
    if s.abs() > b2.sqrt() * (1.0 + EXTREMAL_SLACK) + EXTREMAL_SLACK {
        return Err(GeometryError::Extremal { s, b: b2.sqrt() });
    }
    let h = &b_low * alpha - &y_low * s;
    let hh = &a * (alpha * alpha) - &y_low * y_low.transpose();
    Ok(AnisotropicFrame {
        n,
        alpha,
        beta,
        s,
        b2,
        c: structure.conformal_factor(x),
        y: y.clone(),
        y_low,
        b_low,
        b_up,
        a,
        a_inv,
        h,
        hh,
    })
}

/// `omega_jk = (b^2 - s^2) h_jk - h_j h_k`
pub fn omega(frame: &AnisotropicFrame) -> DMatrix<f64> {
    &frame.hh * (frame.b2 - frame.s * frame.s) - &frame.h * frame.h.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e3() -> EuclideanConformal {
        build_euclidean_conformal(3, 1.0, &[]).unwrap()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn flat_model_values() {
        let s = e3();
        let x = v(&[1.0, 0.0, 0.0]);
        assert_eq!(s.one_form(&x), v(&[1.0, 0.0, 0.0]));
        assert_eq!(s.conformal_factor(&x), 1.0);
        assert_eq!(s.one_form_derivative(&x), DMatrix::identity(3, 3));

        let s2 = build_euclidean_conformal(3, 2.0, &[]).unwrap();
        let f = frame_at(&s2, &x, &v(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(f.c, 2.0);
        assert_eq!(f.b2, 4.0);

        let s4 = build_euclidean_conformal(4, 1.0, &[0.0, 0.0, 0.0, 0.5]).unwrap();
        let f = frame_at(&s4, &DVector::zeros(4), &v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.b2, 0.25);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            build_euclidean_conformal(3, 0.0, &[]).unwrap_err(),
            GeometryError::ZeroConformalFactor
        );
        assert_eq!(
            build_euclidean_conformal(1, 1.0, &[]).unwrap_err(),
            GeometryError::Dimension(1)
        );
    }

    #[test]
    fn orthogonal_frame() {
        let f = frame_at(&e3(), &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!((f.alpha, f.beta, f.s, f.b2), (1.0, 0.0, 0.0, 1.0));
        assert_eq!(f.h, v(&[1.0, 0.0, 0.0]));
        assert_eq!(f.hh, DMatrix::from_diagonal(&v(&[1.0, 0.0, 1.0])));
        let w = omega(&f);
        assert_eq!(w, DMatrix::from_diagonal(&v(&[0.0, 0.0, 1.0])));
    }

    #[test]
    fn extremal_frame_has_vanishing_h() {
        let f = frame_at(&e3(), &v(&[1.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.s, 1.0);
        assert!(f.h.amax() == 0.0);
        assert!(omega(&f).amax() == 0.0);
    }

    #[test]
    fn oblique_frame() {
        let f = frame_at(&e3(), &v(&[0.6, 0.8, 0.0]), &v(&[1.0, 1.0, 0.0])).unwrap();
        assert!((f.alpha - 2f64.sqrt()).abs() < 1e-15);
        assert!((f.beta - 1.4).abs() < 1e-15);
        assert!((f.s - 0.989_949_493_661_166_5).abs() < 1e-12);
        assert!((f.b2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_direction_is_rejected() {
        assert_eq!(
            frame_at(&e3(), &v(&[1.0, 0.0, 0.0]), &DVector::zeros(3)).unwrap_err(),
            GeometryError::ZeroDirection
        );
    }

    #[test]
    fn two_dimensional_omega_vanishes() {
        let s = build_euclidean_conformal(2, 1.0, &[]).unwrap();
        let f = frame_at(&s, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!(omega(&f).amax() == 0.0);
    }
}
