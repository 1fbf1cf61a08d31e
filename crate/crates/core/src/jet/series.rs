use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Scalar types that can flow through an [`Expr`](super::Expr) evaluation.
///
/// Implemented by plain `f64`, by univariate truncated series [`Series`] and
/// by the bivariate [`Jet`]. Elementary functions are applied through
/// [`compose`](JetScalar::compose), which only needs the derivatives of the
/// outer function at the base value.
pub trait JetScalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Number of outer-function derivatives `compose` consumes.
    const DERIVS: usize;

    fn constant(v: f64) -> Self;

    fn value(&self) -> f64;

    fn scale(&self, k: f64) -> Self;

    /// `f(self)` given `derivs[k] = f^(k)(self.value())` for `k < DERIVS`.
    fn compose(&self, derivs: &[f64]) -> Self;

    fn add_const(&self, k: f64) -> Self {
        self.clone() + Self::constant(k)
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; Self::DERIVS])
    }

    /// Real power `self^p` for a positive base.
    fn powf(&self, p: f64) -> Self {
        let a = self.value();
        let mut d = Vec::with_capacity(Self::DERIVS);
        let mut coef = 1.0;
        for k in 0..Self::DERIVS {
            d.push(coef * a.powf(p - k as f64));
            coef *= p - k as f64;
        }
        self.compose(&d)
    }

    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    fn ln(&self) -> Self {
        let a = self.value();
        let mut d = Vec::with_capacity(Self::DERIVS);
        d.push(a.ln());
        let mut fact = 1.0;
        for k in 1..Self::DERIVS {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / a.powi(k as i32));
            fact *= k as f64;
        }
        self.compose(&d)
    }

    fn powi(&self, p: u32) -> Self {
        let mut acc = Self::constant(1.0);
        for _ in 0..p {
            acc = acc * self.clone();
        }
        acc
    }
}

impl JetScalar for f64 {
    const DERIVS: usize = 1;

    fn constant(v: f64) -> Self {
        v
    }

    fn value(&self) -> f64 {
        *self
    }

    fn scale(&self, k: f64) -> Self {
        self * k
    }

    fn compose(&self, derivs: &[f64]) -> Self {
        derivs[0]
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }
}

/// Truncated univariate Taylor series `sum_k c[k] v^k`, `v^N = 0`.
///
/// Coefficients are normalized (`c[k] = f^(k) / k!`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Series<N> {
    pub const fn zero() -> Self {
        Series { c: [0.0; N] }
    }

    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Series { c }
    }

    /// The identity function around `v0`.
    pub fn variable(v0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v0;
        if N > 1 {
            c[1] = 1.0;
        }
        Series { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the base point.
    pub fn derivative_at(&self, k: usize) -> f64 {
        self.c[k] * factorial(k)
    }

    /// Series of the derivative; the top coefficient is lost and set to zero.
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N.saturating_sub(1) {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Series { c }
    }

    /// Series of the antiderivative with value `c0` at the base point; the
    /// top input coefficient is dropped.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = c0;
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Series { c }
    }

    /// Keep the first `M` coefficients. Panics if `M > N`.
    pub fn truncate<const M: usize>(&self) -> Series<M> {
        assert!(M <= N, "cannot widen a truncated series");
        let mut c = [0.0; M];
        c.copy_from_slice(&self.c[..M]);
        Series { c }
    }

    fn mul_series(&self, rhs: &Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Series { c }
    }

    fn div_series(&self, rhs: &Self) -> Self {
        let mut q = [0.0; N];
        let b0 = rhs.c[0];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 0..k {
                acc -= q[j] * rhs.c[k - j];
            }
            q[k] = acc / b0;
        }
        Series { c: q }
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl<const N: usize> Add for Series<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl<const N: usize> AddAssign for Series<N> {
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
    }
}

impl<const N: usize> Sub for Series<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl<const N: usize> Neg for Series<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for v in &mut self.c {
            *v = -*v;
        }
        self
    }
}

impl<const N: usize> Mul for Series<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_series(&rhs)
    }
}

impl<const N: usize> Div for Series<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.div_series(&rhs)
    }
}

impl<const N: usize> Mul<f64> for Series<N> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.scale(k)
    }
}

impl<const N: usize> Add<f64> for Series<N> {
    type Output = Self;
    fn add(mut self, k: f64) -> Self {
        self.c[0] += k;
        self
    }
}

impl<const N: usize> Sub<f64> for Series<N> {
    type Output = Self;
    fn sub(mut self, k: f64) -> Self {
        self.c[0] -= k;
        self
    }
}

impl<const N: usize> JetScalar for Series<N> {
    const DERIVS: usize = N;

    fn constant(v: f64) -> Self {
        Series::constant(v)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for v in &mut out.c {
            *v *= k;
        }
        out
    }

    fn compose(&self, derivs: &[f64]) -> Self {
        // Horner in the nilpotent part: f(a0 + d) = sum_k f^(k)(a0) d^k / k!
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut acc = Series::constant(derivs[N - 1] / factorial(N - 1));
        for k in (0..N - 1).rev() {
            acc = acc.mul_series(&delta);
            acc.c[0] += derivs[k] / factorial(k);
        }
        acc
    }
}

/// Truncated bivariate Taylor expansion in `(u, v) = (b^2 - b0^2, s - s0)`
/// with `u^2 = 0` and `v^N = 0`: first order in `b^2`, order `N - 1` in `s`.
///
/// Stored as `re + u * du` with both parts univariate series in `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub re: Series<N>,
    pub du: Series<N>,
}

/// Jet carrying `phi` and every partial needed downstream:
/// `d^i_{b^2} d^j_s phi` for `i <= 1`, `j <= 5`.
pub type PhiJet = Jet<6>;

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        Jet {
            re: Series::constant(v),
            du: Series::zero(),
        }
    }

    /// The coordinate function `b^2` at `b2`.
    pub fn var_b2(b2: f64) -> Self {
        Jet {
            re: Series::constant(b2),
            du: Series::constant(1.0),
        }
    }

    /// The coordinate function `s` at `s0`.
    pub fn var_s(s0: f64) -> Self {
        Jet {
            re: Series::variable(s0),
            du: Series::zero(),
        }
    }

    pub fn value(&self) -> f64 {
        self.re.c[0]
    }

    /// Normalized Taylor coefficient of `u^i v^j`.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        match i {
            0 => self.re.c[j],
            1 => self.du.c[j],
            _ => 0.0,
        }
    }

    /// Partial derivative `d^i_{b^2} d^j_s` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(j)
    }

    pub fn truncate<const M: usize>(&self) -> Jet<M> {
        Jet {
            re: self.re.truncate(),
            du: self.du.truncate(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re
            .c
            .iter()
            .chain(self.du.c.iter())
            .all(|v| v.is_finite())
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Jet {
            re: self.re + rhs.re,
            du: self.du + rhs.du,
        }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Jet {
            re: self.re - rhs.re,
            du: self.du - rhs.du,
        }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet {
            re: -self.re,
            du: -self.du,
        }
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Jet {
            re: self.re.mul_series(&rhs.re),
            du: self.re.mul_series(&rhs.du) + self.du.mul_series(&rhs.re),
        }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.re.div_series(&rhs.re);
        let du = (self.du - q.mul_series(&rhs.du)).div_series(&rhs.re);
        Jet { re: q, du }
    }
}

impl<const N: usize> JetScalar for Jet<N> {
    const DERIVS: usize = N + 1;

    fn constant(v: f64) -> Self {
        Jet::constant(v)
    }

    fn value(&self) -> f64 {
        self.re.c[0]
    }

    fn scale(&self, k: f64) -> Self {
        Jet {
            re: self.re.scale(k),
            du: self.du.scale(k),
        }
    }

    fn compose(&self, derivs: &[f64]) -> Self {
        // f(re + u du) = f(re) + u f'(re) du
        let f = self.re.compose(&derivs[..N]);
        let fp = self.re.compose(&derivs[1..N + 1]);
        Jet {
            re: f,
            du: fp.mul_series(&self.du),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_exp_matches_known_coefficients() {
        let x = Series::<5>::variable(0.0);
        let e = x.exp();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (a, b) in e.c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn series_division_inverts_multiplication() {
        let a = Series::<6> {
            c: [1.5, -0.3, 0.2, 0.7, -1.1, 0.05],
        };
        let b = Series::<6> {
            c: [2.0, 0.4, -0.6, 0.1, 0.3, -0.2],
        };
        let back = (a * b) / b;
        for k in 0..6 {
            assert!((back.c[k] - a.c[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn ln_of_exp_is_identity() {
        let x = Jet::<6>::var_s(0.3) * Jet::var_b2(1.2);
        let y = x.exp().ln();
        for k in 0..6 {
            assert!((y.re.c[k] - x.re.c[k]).abs() < 1e-13);
            assert!((y.du.c[k] - x.du.c[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_jet_has_only_value() {
        let one = PhiJet::constant(1.0);
        assert_eq!(one.partial(0, 0), 1.0);
        for i in 0..2 {
            for j in 0..6 {
                if (i, j) != (0, 0) {
                    assert_eq!(one.partial(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn coordinate_jet_of_s() {
        let s = PhiJet::var_s(0.5);
        assert_eq!(s.partial(0, 0), 0.5);
        assert_eq!(s.partial(0, 1), 1.0);
        assert_eq!(s.partial(1, 0), 0.0);
        assert_eq!(s.partial(0, 2), 0.0);
    }

    #[test]
    fn powers_of_s_have_factorial_partials() {
        // s^5 at s = 0: fifth derivative is 120
        let s = PhiJet::var_s(0.0);
        let p = s.powi(5);
        assert!((p.partial(0, 5) - 120.0).abs() < 1e-12);
        // b2 * s^4: mixed partial d_b2 d_s^4 = 24
        let q = PhiJet::var_b2(2.0) * s.powi(4);
        assert!((q.partial(1, 4) - 24.0).abs() < 1e-12);
        assert!((q.partial(0, 4) - 48.0).abs() < 1e-12);
    }
}
