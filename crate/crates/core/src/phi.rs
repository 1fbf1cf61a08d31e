//! The functions `phi(b^2, s)`: Riemannian solutions, the Landsberg family
//! defined by an exponential integral, its explicit constant-coefficient
//! member, and arbitrary user expressions.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::PhiError;
use crate::jet::{Expr, Jet, JetScalar, Series};
use crate::quadrature::{gauss_kronrod, QuadOptions};

/// Polynomial in `b^2` with ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientFunction(pub Vec<f64>);

impl CoefficientFunction {
    pub fn constant(v: f64) -> Self {
        CoefficientFunction(vec![v])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn eval(&self, b2: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * b2 + c)
    }

    /// Derivative with respect to `b^2`.
    pub fn derivative(&self, b2: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * b2 + k as f64 * c)
    }

    pub fn jet<T: JetScalar>(&self, b2: &T) -> T {
        let mut acc = T::constant(*self.0.last().unwrap_or(&0.0));
        for c in self.0.iter().rev().skip(1) {
            acc = (acc * b2.clone()).add_const(*c);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().skip(1).all(|c| *c == 0.0)
    }

    fn expr(&self) -> Expr {
        if self.0.is_empty() {
            Expr::c(0.0)
        } else {
            Expr::poly(&self.0)
        }
    }
}

impl Default for CoefficientFunction {
    fn default() -> Self {
        Self::zero()
    }
}

fn one_coeff() -> CoefficientFunction {
    CoefficientFunction::one()
}

/// Coefficient functions of the exponential-integral family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnicornParams {
    #[serde(default)]
    pub c1: CoefficientFunction,
    #[serde(default)]
    pub lambda0: CoefficientFunction,
    #[serde(default)]
    pub lambda1: CoefficientFunction,
    #[serde(default)]
    pub lambda2: CoefficientFunction,
    #[serde(default = "one_coeff")]
    pub lambda3: CoefficientFunction,
}

impl UnicornParams {
    /// `c1 = 1`, all `lambda = 0`, `lambda3 = 1`.
    pub fn example() -> Self {
        UnicornParams {
            c1: CoefficientFunction::one(),
            lambda0: CoefficientFunction::zero(),
            lambda1: CoefficientFunction::zero(),
            lambda2: CoefficientFunction::zero(),
            lambda3: CoefficientFunction::one(),
        }
    }

    /// Integrand denominator `2 t c1 r + b^2 t^2 lambda1 + b^2 - 2 b^2 r^2 lambda0`.
    pub fn denominator(&self, b2: f64, t: f64) -> f64 {
        let r2 = b2 - t * t;
        let r = r2.max(0.0).sqrt();
        2.0 * t * self.c1.eval(b2) * r + b2 * t * t * self.lambda1.eval(b2) + b2
            - 2.0 * b2 * r2 * self.lambda0.eval(b2)
    }

    /// The integrand `A(b^2, t)` over any jet scalar.
    pub fn integrand<T: JetScalar>(&self, b2: &T, t: &T) -> Result<T, PhiError> {
        let rad = b2.clone() - t.clone() * t.clone();
        if !(rad.value() > 0.0) {
            return Err(PhiError::Radicand {
                b2: b2.value(),
                s: t.value(),
            });
        }
        let r = rad.sqrt();
        let c1 = self.c1.jet(b2);
        let l0 = self.lambda0.jet(b2);
        let l1 = self.lambda1.jet(b2);
        let bt = b2.clone() * t.clone();
        let num = (c1.clone() * r.clone()).scale(2.0)
            + bt.clone() * l1.clone()
            + (bt.clone() * l0.clone()).scale(2.0);
        let den = (t.clone() * c1 * r).scale(2.0) + bt * t.clone() * l1 + b2.clone()
            - (b2.clone() * rad * l0).scale(2.0);
        if den.value() == 0.0 {
            return Err(PhiError::DenominatorZero {
                b2: b2.value(),
                s: t.value(),
                root: t.value(),
            });
        }
        Ok(num / den)
    }

    /// `A(b^2, t)` and `A_1 = dA/db^2` at fixed `t`.
    pub fn integrand_with_b2_derivative(&self, b2: f64, t: f64) -> Result<[f64; 2], PhiError> {
        let a = self.integrand(&Jet::<1>::var_b2(b2), &Jet::<1>::constant(t))?;
        Ok([a.re.c[0], a.du.c[0]])
    }
}

/// Parameters of `phi = lambda3 sqrt(s^2 lambda1 + 1 - 2 (b^2 - s^2) lambda0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiemannianParams {
    #[serde(default)]
    pub lambda0: CoefficientFunction,
    #[serde(default)]
    pub lambda1: CoefficientFunction,
    #[serde(default = "one_coeff")]
    pub lambda3: CoefficientFunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKind {
    Riemannian,
    Unicorn,
    ShenExample,
    Custom,
}

impl fmt::Display for PhiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhiKind::Riemannian => "riemannian",
            PhiKind::Unicorn => "unicorn",
            PhiKind::ShenExample => "shen-example",
            PhiKind::Custom => "custom",
        })
    }
}

/// Serializable description of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiSpec {
    Riemannian(RiemannianParams),
    Unicorn(UnicornParams),
    ShenExample,
    Custom { expr: Expr },
}

/// Open admissible `s`-interval at one `b^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Location of a singularity that bounds the interval from below, if any
    /// (otherwise the bound is the extremal direction `-b`).
    pub lower_root: Option<f64>,
    pub upper_root: Option<f64>,
}

impl Interval {
    pub fn contains(&self, s: f64) -> bool {
        s > self.lo && s < self.hi
    }

    /// No singular direction strictly inside `[-b, b]`.
    pub fn is_full(&self) -> bool {
        self.lower_root.is_none() && self.upper_root.is_none()
    }
}

/// Relative margin kept between a detected root and the admissible edge.
pub const DOMAIN_MARGIN: f64 = 1e-6;
const SCAN_STEPS: usize = 2000;

enum Repr {
    Expr(Expr),
    Unicorn(UnicornParams),
}

/// A `phi(b^2, s)` with jet evaluation and a per-`b^2` admissible interval.
pub struct PhiModel {
    kind: PhiKind,
    spec: PhiSpec,
    repr: Repr,
    /// Closed-form antiderivative for the explicit example.
    closed: Option<Expr>,
    quad: QuadOptions,
    domains: RwLock<HashMap<u64, Interval>>,
}

impl Clone for PhiModel {
    fn clone(&self) -> Self {
        PhiModel::from_spec(self.spec.clone()).with_quadrature(self.quad)
    }
}

impl fmt::Debug for PhiModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiModel")
            .field("kind", &self.kind)
            .field("spec", &self.spec)
            .finish()
    }
}

pub fn riemannian_phi(
    lambda0: CoefficientFunction,
    lambda1: CoefficientFunction,
    lambda3: CoefficientFunction,
) -> PhiModel {
    PhiModel::from_spec(PhiSpec::Riemannian(RiemannianParams {
        lambda0,
        lambda1,
        lambda3,
    }))
}

pub fn unicorn_phi(params: UnicornParams) -> PhiModel {
    PhiModel::from_spec(PhiSpec::Unicorn(params))
}

pub fn shen_example_phi() -> PhiModel {
    PhiModel::from_spec(PhiSpec::ShenExample)
}

pub fn custom_phi(expr: Expr) -> PhiModel {
    PhiModel::from_spec(PhiSpec::Custom { expr })
}

/// `phi = g(b^2) sqrt(1 + h(b^2) s^2)`
pub fn sqrt_quadratic_phi(g: CoefficientFunction, h: CoefficientFunction) -> PhiModel {
    let s = Expr::s();
    custom_phi(g.expr() * (1.0 + h.expr() * s.clone() * s).sqrt())
}

/// `exp(s / (s + r)) (s + r) / b` with `r = sqrt(b^2 - s^2)`.
fn example_closed_form() -> Expr {
    let s = Expr::s();
    let r = (Expr::b2() - s.clone() * s.clone()).sqrt();
    let u = s.clone() + r;
    (u.clone() / Expr::b2().sqrt()) * (s / u).exp()
}

impl PhiModel {
    pub fn from_spec(spec: PhiSpec) -> PhiModel {
        let (kind, repr, closed) = match &spec {
            PhiSpec::Riemannian(p) => {
                let s = Expr::s();
                let rad = s.clone() * s.clone() * p.lambda1.expr() + 1.0
                    - 2.0 * (Expr::b2() - s.clone() * s) * p.lambda0.expr();
                (
                    PhiKind::Riemannian,
                    Repr::Expr(p.lambda3.expr() * rad.sqrt()),
                    None,
                )
            }
            PhiSpec::Unicorn(p) => (PhiKind::Unicorn, Repr::Unicorn(p.clone()), None),
            PhiSpec::ShenExample => (
                PhiKind::ShenExample,
                Repr::Unicorn(UnicornParams::example()),
                Some(example_closed_form()),
            ),
            PhiSpec::Custom { expr } => (PhiKind::Custom, Repr::Expr(expr.clone()), None),
        };
        PhiModel {
            kind,
            spec,
            repr,
            closed,
            quad: QuadOptions::default(),
            domains: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_quadrature(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn spec(&self) -> &PhiSpec {
        &self.spec
    }

    /// Coefficient functions of the exponential-integral family, if this
    /// model belongs to it.
    pub fn unicorn_params(&self) -> Option<&UnicornParams> {
        match &self.repr {
            Repr::Unicorn(p) => Some(p),
            Repr::Expr(_) => None,
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.repr {
            Repr::Expr(e) => Some(e),
            Repr::Unicorn(_) => None,
        }
    }

    /// Admissible open `s`-interval at `b2`, cached per `b2`.
    pub fn admissible(&self, b2: f64) -> Result<Interval, PhiError> {
        if !(b2 > 0.0) || !b2.is_finite() {
            return Err(PhiError::B2(b2));
        }
        let key = b2.to_bits();
        if let Some(iv) = self.domains.read().ok().and_then(|m| m.get(&key).copied()) {
            return Ok(iv);
        }
        let iv = match &self.repr {
            Repr::Unicorn(p) => unicorn_domain(p, b2)?,
            Repr::Expr(e) => expr_domain(e, b2),
        };
        if let Ok(mut m) = self.domains.write() {
            m.insert(key, iv);
        }
        Ok(iv)
    }

    fn check_domain(&self, b2: f64, s: f64) -> Result<(), PhiError> {
        let iv = self.admissible(b2)?;
        if !iv.contains(s) {
            return Err(PhiError::Domain {
                b2,
                s,
                lo: iv.lo,
                hi: iv.hi,
            });
        }
        Ok(())
    }

    /// `I(b^2, s) = int_0^s A dt` and `int_0^s A_1 dt`, integrated in
    /// `t = b sin(theta)` so the endpoint behaviour of `sqrt(b^2 - t^2)` is
    /// absorbed by the Jacobian.
    pub fn unicorn_integrals(
        &self,
        params: &UnicornParams,
        b2: f64,
        s: f64,
    ) -> Result<[f64; 2], PhiError> {
        if s == 0.0 {
            return Ok([0.0, 0.0]);
        }
        let b = b2.sqrt();
        let theta = (s / b).clamp(-1.0, 1.0).asin();
        let r = gauss_kronrod(
            |th: f64| -> Result<[f64; 2], PhiError> {
                let t = b * th.sin();
                let jac = b * th.cos();
                let [a, a1] = params.integrand_with_b2_derivative(b2, t)?;
                Ok([a * jac, a1 * jac])
            },
            0.0,
            theta,
            self.quad,
        )?;
        Ok(r.value)
    }

    /// Jet of `phi` divided by its value, together with `ln phi`.
    ///
    /// Near singular directions `phi` itself can underflow while every ratio
    /// of its derivatives stays finite.
    pub fn jet_scaled<const N: usize>(&self, b2: f64, s: f64) -> Result<(Jet<N>, f64), PhiError> {
        self.check_domain(b2, s)?;
        match &self.repr {
            Repr::Expr(e) => {
                let j: Jet<N> = e.eval(&Jet::var_b2(b2), &Jet::var_s(s))?;
                let v = j.value();
                if !(v > 0.0) || !j.is_finite() {
                    return Err(PhiError::Radicand { b2, s });
                }
                Ok((j.scale(1.0 / v), v.ln()))
            }
            Repr::Unicorn(p) => {
                let l3 = p.lambda3.eval(b2);
                if !(l3 > 0.0) {
                    return Err(PhiError::Lambda3 { b2, value: l3 });
                }
                let [i0, i1] = self.unicorn_integrals(p, b2, s)?;
                let a: Jet<N> = p.integrand(&Jet::var_b2(b2), &Jet::var_s(s))?;
                // the jet of I - I(b2, s) is the antiderivative of the jet of A
                let rel = Jet {
                    re: a.re.integrate(0.0),
                    du: a.du.integrate(i1),
                };
                let lam = p.lambda3.jet(&Jet::<N>::var_b2(b2)).scale(1.0 / l3);
                Ok((lam * rel.exp(), l3.ln() + i0))
            }
        }
    }

    /// Full jet of `phi`; may underflow near singular directions.
    pub fn jet<const N: usize>(&self, b2: f64, s: f64) -> Result<Jet<N>, PhiError> {
        let (j, ln) = self.jet_scaled::<N>(b2, s)?;
        Ok(j.scale(ln.exp()))
    }

    pub fn eval_jet(&self, b2: f64, s: f64) -> Result<crate::jet::PhiJet, PhiError> {
        self.jet::<6>(b2, s)
    }

    pub fn value(&self, b2: f64, s: f64) -> Result<f64, PhiError> {
        self.check_domain(b2, s)?;
        match &self.repr {
            Repr::Expr(e) => {
                let v = e.value(b2, s)?;
                if !(v > 0.0) {
                    return Err(PhiError::Radicand { b2, s });
                }
                Ok(v)
            }
            Repr::Unicorn(p) => {
                let l3 = p.lambda3.eval(b2);
                if !(l3 > 0.0) {
                    return Err(PhiError::Lambda3 { b2, value: l3 });
                }
                let [i0, _] = self.unicorn_integrals(p, b2, s)?;
                Ok(l3 * i0.exp())
            }
        }
    }

    /// Jet of the closed-form antiderivative path, for models that carry one.
    pub fn closed_form_jet<const N: usize>(
        &self,
        b2: f64,
        s: f64,
    ) -> Option<Result<Jet<N>, PhiError>> {
        self.closed.as_ref().map(|e| {
            self.check_domain(b2, s)?;
            Ok(e.eval(&Jet::var_b2(b2), &Jet::var_s(s))?)
        })
    }

    /// Closed-form `(phi, phi_2, phi_22)` of the explicit example from the
    /// printed derivative formulas, with `phi` from the quadrature path.
    pub fn example_derivatives(&self, b2: f64, s: f64) -> Option<Result<[f64; 3], PhiError>> {
        if self.kind != PhiKind::ShenExample {
            return None;
        }
        Some(self.value(b2, s).map(|phi| {
            let r = (b2 - s * s).sqrt();
            let d = 2.0 * s * r + b2;
            [phi, phi * 2.0 * r / d, -phi * 2.0 * b2 * s / (r * d * d)]
        }))
    }
}

fn unicorn_domain(p: &UnicornParams, b2: f64) -> Result<Interval, PhiError> {
    let b = b2.sqrt();
    let d0 = p.denominator(b2, 0.0);
    if !(d0 > 0.0) {
        return Err(PhiError::DenominatorZero {
            b2,
            s: 0.0,
            root: 0.0,
        });
    }
    let f = |t: f64| p.denominator(b2, t);
    let lower = first_root(&f, 0.0, -b, b2);
    let upper = first_root(&f, 0.0, b, b2);
    Ok(make_interval(b, lower, upper))
}

fn make_interval(b: f64, lower: Option<f64>, upper: Option<f64>) -> Interval {
    let m = DOMAIN_MARGIN * b;
    Interval {
        lo: lower.map_or(-b, |r| r + m),
        hi: upper.map_or(b, |r| r - m),
        lower_root: lower,
        upper_root: upper,
    }
}

/// First zero of `f` walking from `from` to `to`: sign changes are bisected,
/// local minima of `|f|` are refined by golden-section search to catch
/// double roots.
fn first_root(f: &dyn Fn(f64) -> f64, from: f64, to: f64, scale: f64) -> Option<f64> {
    let touch = 1e-12 * scale.max(1.0);
    let step = (to - from) / SCAN_STEPS as f64;
    let at = |k: usize| from + step * k as f64;
    let mut prev = (at(0), f(at(0)));
    let mut prev2: Option<(f64, f64)> = None;
    for k in 1..=SCAN_STEPS {
        let t = if k == SCAN_STEPS { to } else { at(k) };
        let v = f(t);
        if v == 0.0 {
            return Some(t);
        }
        if v.signum() != prev.1.signum() {
            return Some(bisect(f, prev.0, t));
        }
        if let Some(pp) = prev2 {
            if prev.1.abs() <= pp.1.abs() && prev.1.abs() <= v.abs() {
                let (tm, vm) = golden_min_abs(f, pp.0, t);
                if vm <= touch {
                    return Some(tm);
                }
            }
        }
        prev2 = Some(prev);
        prev = (t, v);
    }
    None
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if f(m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min_abs(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c).abs();
    let mut fd = f(d).abs();
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d).abs();
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn expr_domain(e: &Expr, b2: f64) -> Interval {
    let b = b2.sqrt();
    let good = |s: f64| -> f64 {
        match e.eval::<Series<3>>(&Series::constant(b2), &Series::variable(s)) {
            Ok(v) if v.value() > 0.0 && v.c.iter().all(|c| c.is_finite()) => 1.0,
            _ => -1.0,
        }
    };
    let interior = |to: f64| -> Option<f64> {
        // the closed endpoint s = +-b itself is never part of the open interval
        let inner = to * (1.0 - 1e-12);
        first_sign_change(&good, 0.0, inner)
    };
    make_interval(b, interior(-b), interior(b))
}

fn first_sign_change(f: &dyn Fn(f64) -> f64, from: f64, to: f64) -> Option<f64> {
    let step = (to - from) / SCAN_STEPS as f64;
    let mut prev = (from, f(from));
    for k in 1..=SCAN_STEPS {
        let t = if k == SCAN_STEPS {
            to
        } else {
            from + step * k as f64
        };
        let v = f(t);
        if v.signum() != prev.1.signum() {
            return Some(bisect(f, prev.0, t));
        }
        prev = (t, v);
    }
    None
}

/// Both sides of the compatibility condition on the coefficient functions:
/// `int_0^s A_1 dt` and its closed-form right-hand side.
pub fn compatibility_sides(
    params: &UnicornParams,
    b2: f64,
    s: f64,
) -> Result<(f64, f64), PhiError> {
    if s == 0.0 {
        return Err(PhiError::ZeroS);
    }
    let model = unicorn_phi(params.clone());
    model.check_domain(b2, s)?;
    let [_, lhs] = model.unicorn_integrals(params, b2, s)?;
    let c1 = params.c1.eval(b2);
    let l0 = params.lambda0.eval(b2);
    let l1 = params.lambda1.eval(b2);
    let l2 = params.lambda2.eval(b2);
    let l3 = params.lambda3.eval(b2);
    let l3p = params.lambda3.derivative(b2);
    let b4 = b2 * b2;
    let r2 = b2 - s * s;
    let r3 = r2 * r2.sqrt();
    let a = params.integrand(&b2, &s)?;
    let rhs = ((b4 * r2 * (2.0 * l0 + s * s * l2) - 2.0 * s * c1 * r3 - b4) * l3 * a
        + (b4 * s * (l2 * s * s + 2.0 * l1 + 2.0 * l0) + 2.0 * c1 * r3) * l3
        - 2.0 * b4 * s * l3p)
        / (2.0 * b4 * s * l3);
    Ok((lhs, rhs))
}

/// `|LHS - RHS|` of the compatibility condition.
pub fn family_compatibility_residual(
    params: &UnicornParams,
    b2: f64,
    s: f64,
) -> Result<f64, PhiError> {
    let (l, r) = compatibility_sides(params, b2, s)?;
    Ok((l - r).abs())
}

/// The two coefficient combinations `(sigma, tau)` whose vanishing is
/// necessary for the compatibility condition to hold for all `s`.
pub fn sigma_tau(params: &UnicornParams, b2: f64) -> (f64, f64) {
    let c1 = params.c1.eval(b2);
    let c1p = params.c1.derivative(b2);
    let l0 = params.lambda0.eval(b2);
    let l0p = params.lambda0.derivative(b2);
    let l1 = params.lambda1.eval(b2);
    let l1p = params.lambda1.derivative(b2);
    let l2 = params.lambda2.eval(b2);
    let b4 = b2 * b2;
    let sigma = (2.0 * (2.0 * b2 * l0 + b4 * l2 + b2 * l1 + 1.0) * l0 - l1 + b2 * (4.0 * l0p - l2))
        * c1
        + 2.0 * (1.0 - 2.0 * b2 * l0) * c1p;
    let tau = (2.0 * b2 * l0 - 1.0) * l1 * l1
        + (2.0 * b2 * (b2 * l2 + 2.0 * l0) * l0 + 2.0 * b2 * l0p - b2 * l2) * l1
        + 2.0 * b2 * (l2 - l1p) * l0
        + 4.0 * l0 * l0
        - l2
        + l1p
        + 2.0 * l0p;
    (sigma, tau)
}

/// Positivity quantities at one point.
#[derive(Clone, Debug, Serialize)]
pub struct PositivityRecord {
    pub b2: f64,
    pub s: f64,
    pub phi: f64,
    /// `phi - s phi_2`
    pub d1: f64,
    /// `phi - s phi_2 + (b^2 - s^2) phi_22`
    pub d2: f64,
    /// `d1 / phi`
    pub d1_rel: f64,
    /// `d2 / phi`
    pub d2_rel: f64,
    pub positive: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub records: Vec<PositivityRecord>,
    pub min_d1: f64,
    pub min_d2: f64,
    pub min_d1_rel: f64,
    pub min_d2_rel: f64,
    pub max_d1_rel: f64,
    pub violations: usize,
    pub failures: usize,
}

pub fn positivity_at(model: &PhiModel, b2: f64, s: f64) -> PositivityRecord {
    match model.jet_scaled::<3>(b2, s) {
        Ok((j, ln)) => {
            let p2 = j.partial(0, 1);
            let p22 = j.partial(0, 2);
            let d1_rel = 1.0 - s * p2;
            let d2_rel = d1_rel + (b2 - s * s) * p22;
            let phi = ln.exp();
            PositivityRecord {
                b2,
                s,
                phi,
                d1: phi * d1_rel,
                d2: phi * d2_rel,
                d1_rel,
                d2_rel,
                positive: d1_rel > 0.0 && d2_rel > 0.0,
                error: None,
            }
        }
        Err(e) => PositivityRecord {
            b2,
            s,
            phi: f64::NAN,
            d1: f64::NAN,
            d2: f64::NAN,
            d1_rel: f64::NAN,
            d2_rel: f64::NAN,
            positive: false,
            error: Some(e.to_string()),
        },
    }
}

/// Positivity quantities on `b_grid x s_grid`, with `s` given as fractions
/// of `b`.
pub fn positivity_scan(model: &PhiModel, b_grid: &[f64], s_fractions: &[f64]) -> PositivityReport {
    let mut records = Vec::with_capacity(b_grid.len() * s_fractions.len());
    for &b in b_grid {
        for &f in s_fractions {
            records.push(positivity_at(model, b * b, f * b));
        }
    }
    summarize_positivity(records)
}

/// Positivity scan over `m` evenly spaced points of the detected admissible
/// interval at each `b`, kept `margin * b` away from its edges.
pub fn positivity_scan_admissible(
    model: &PhiModel,
    b_grid: &[f64],
    m: usize,
    margin: f64,
) -> Result<PositivityReport, PhiError> {
    let mut records = Vec::new();
    for &b in b_grid {
        let iv = model.admissible(b * b)?;
        let (lo, hi) = (iv.lo + margin * b, iv.hi - margin * b);
        for k in 0..m {
            let s = if m == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * k as f64 / (m - 1) as f64
            };
            records.push(positivity_at(model, b * b, s));
        }
    }
    Ok(summarize_positivity(records))
}

fn summarize_positivity(records: Vec<PositivityRecord>) -> PositivityReport {
    let ok = || records.iter().filter(|r| r.error.is_none());
    let min = |g: fn(&PositivityRecord) -> f64| ok().map(g).fold(f64::INFINITY, f64::min);
    PositivityReport {
        min_d1: min(|r| r.d1),
        min_d2: min(|r| r.d2),
        min_d1_rel: min(|r| r.d1_rel),
        min_d2_rel: min(|r| r.d2_rel),
        max_d1_rel: ok().map(|r| r.d1_rel).fold(f64::NEG_INFINITY, f64::max),
        violations: ok().filter(|r| !r.positive).count(),
        failures: records.iter().filter(|r| r.error.is_some()).count(),
        records,
    }
}
