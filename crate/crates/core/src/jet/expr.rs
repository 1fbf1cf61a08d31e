use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::series::JetScalar;

/// Failures of truncated-Taylor propagation through an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("pole: `{expr}` vanishes at (b2 = {b2}, s = {s})")]
    Pole { expr: String, b2: f64, s: f64 },
    #[error("branch: `{expr}` = {value} is outside the real domain at (b2 = {b2}, s = {s})")]
    Branch {
        expr: String,
        value: f64,
        b2: f64,
        s: f64,
    },
}

/// Expression graph over the two coordinates `b^2` and `s`.
///
/// Any [`JetScalar`] can be pushed through it, so the same graph yields plain
/// values, truncated series, or full [`PhiJet`](super::PhiJet)s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    B2,
    S,
    /// Polynomial in `b^2`, ascending coefficients.
    Poly(Vec<f64>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn b2() -> Expr {
        Expr::B2
    }

    pub fn s() -> Expr {
        Expr::S
    }

    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn poly(coeffs: &[f64]) -> Expr {
        if coeffs.len() == 1 {
            Expr::Const(coeffs[0])
        } else {
            Expr::Poly(coeffs.to_vec())
        }
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn pow(self, p: f64) -> Expr {
        Expr::Pow(Box::new(self), p)
    }

    /// Evaluate with `b2` and `s` already lifted to the scalar type `T`.
    pub fn eval<T: JetScalar>(&self, b2: &T, s: &T) -> Result<T, JetError> {
        Ok(match self {
            Expr::Const(v) => T::constant(*v),
            Expr::B2 => b2.clone(),
            Expr::S => s.clone(),
            Expr::Poly(coeffs) => {
                let mut acc = T::constant(*coeffs.last().unwrap_or(&0.0));
                for c in coeffs.iter().rev().skip(1) {
                    acc = (acc * b2.clone()).add_const(*c);
                }
                acc
            }
            Expr::Add(a, b) => a.eval(b2, s)? + b.eval(b2, s)?,
            Expr::Sub(a, b) => a.eval(b2, s)? - b.eval(b2, s)?,
            Expr::Mul(a, b) => a.eval(b2, s)? * b.eval(b2, s)?,
            Expr::Div(a, b) => {
                let num = a.eval(b2, s)?;
                let den = b.eval(b2, s)?;
                if den.value() == 0.0 || !den.value().is_finite() {
                    return Err(self.pole(b, b2, s));
                }
                num / den
            }
            Expr::Neg(a) => -a.eval(b2, s)?,
            Expr::Sqrt(a) => {
                let v = a.eval(b2, s)?;
                if !(v.value() > 0.0) {
                    return Err(self.branch(a, v.value(), b2, s));
                }
                v.sqrt()
            }
            Expr::Exp(a) => a.eval(b2, s)?.exp(),
            Expr::Pow(a, p) => {
                let v = a.eval(b2, s)?;
                if p.fract() == 0.0 && *p >= 0.0 {
                    v.powi(*p as u32)
                } else if p.fract() == 0.0 {
                    if v.value() == 0.0 {
                        return Err(self.pole(a, b2, s));
                    }
                    T::constant(1.0) / v.powi((-*p) as u32)
                } else {
                    if !(v.value() > 0.0) {
                        return Err(self.branch(a, v.value(), b2, s));
                    }
                    v.powf(*p)
                }
            }
        })
    }

    /// Plain `f64` evaluation at `(b2, s)`.
    pub fn value(&self, b2: f64, s: f64) -> Result<f64, JetError> {
        self.eval(&b2, &s)
    }

    fn pole<T: JetScalar>(&self, sub: &Expr, b2: &T, s: &T) -> JetError {
        JetError::Pole {
            expr: sub.to_string(),
            b2: b2.value(),
            s: s.value(),
        }
    }

    fn branch<T: JetScalar>(&self, sub: &Expr, value: f64, b2: &T, s: &T) -> JetError {
        JetError::Branch {
            expr: sub.to_string(),
            value,
            b2: b2.value(),
            s: s.value(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::B2 => write!(f, "b2"),
            Expr::S => write!(f, "s"),
            Expr::Poly(c) => {
                write!(f, "poly[")?;
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "](b2)")
            }
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a} * {b}"),
            Expr::Div(a, b) => write!(f, "{a} / ({b})"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Pow(a, p) => write!(f, "({a})^{p}"),
        }
    }
}

macro_rules! expr_binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }

        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::Const(rhs)))
            }
        }

        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::PhiJet;

    fn eval_jet(e: &Expr, b2: f64, s: f64) -> Result<PhiJet, JetError> {
        e.eval(&PhiJet::var_b2(b2), &PhiJet::var_s(s))
    }

    #[test]
    fn constant_one() {
        let j = eval_jet(&Expr::c(1.0), 1.0, 0.5).unwrap();
        assert_eq!(j.partial(0, 0), 1.0);
        assert_eq!(j.partial(0, 1), 0.0);
        assert_eq!(j.partial(1, 0), 0.0);
    }

    #[test]
    fn sqrt_of_b2_minus_s2() {
        // d_s = -s/r = 0, d_s^2 = -b2/r^3 = -1, d_b2 = 1/(2r) = 0.5 at (1, 0)
        let e = (Expr::b2() - Expr::s() * Expr::s()).sqrt();
        let j = eval_jet(&e, 1.0, 0.0).unwrap();
        assert!((j.partial(0, 0) - 1.0).abs() < 1e-15);
        assert!(j.partial(0, 1).abs() < 1e-15);
        assert!((j.partial(0, 2) + 1.0).abs() < 1e-14);
        assert!((j.partial(1, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_names_the_denominator() {
        let e = Expr::c(1.0) / (Expr::s() - 0.5);
        let err = eval_jet(&e, 1.0, 0.5).unwrap_err();
        match err {
            JetError::Pole { expr, .. } => assert_eq!(expr, "(s - 0.5)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_radicand_is_a_branch_error() {
        let e = (Expr::s() - 1.0).sqrt();
        assert!(matches!(
            eval_jet(&e, 1.0, 0.2),
            Err(JetError::Branch { .. })
        ));
    }

    #[test]
    fn poly_in_b2_carries_derivative() {
        // 1 + 2 b2 + 3 b2^2 at b2 = 2: value 17, derivative 14
        let e = Expr::poly(&[1.0, 2.0, 3.0]);
        let j = eval_jet(&e, 2.0, 0.0).unwrap();
        assert_eq!(j.partial(0, 0), 17.0);
        assert_eq!(j.partial(1, 0), 14.0);
        assert_eq!(j.partial(0, 1), 0.0);
    }

    #[test]
    fn integer_powers_accept_negative_bases() {
        let e = Expr::s().pow(3.0);
        let j = eval_jet(&e, 1.0, -2.0).unwrap();
        assert_eq!(j.partial(0, 0), -8.0);
        assert_eq!(j.partial(0, 1), 12.0);
        assert_eq!(j.partial(0, 3), 6.0);
    }
}
