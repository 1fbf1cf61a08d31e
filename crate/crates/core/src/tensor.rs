//! Pointwise tensors: fundamental tensor, spray, Berwald, Landsberg and mean
//! Landsberg curvature, each by closed form and by finite differences.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::TensorError;
use crate::geometry::{frame_at, AnisotropicFrame, ConformalStructure};
use crate::jet::{fd_partial, fd_partial_vec, DirectionalJet, Series};
use crate::phi::PhiModel;
use crate::quantities::{landsberg_residuals, model_quantities, tower_values, QuantitySet, Tower};

/// Dense rank-3 covariant tensor `T_jkl`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

/// Dense `T^i_jkl`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<f64>,
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    fn idx(&self, j: usize, k: usize, l: usize) -> usize {
        (j * self.n + k) * self.n + l
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(j, k, l)]
    }

    pub fn set(&mut self, j: usize, k: usize, l: usize, v: f64) {
        let i = self.idx(j, k, l);
        self.data[i] = v;
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(n);
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    t.set(j, k, l, f(j, k, l));
                }
            }
        }
        t
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Replace by the symmetrization over all index permutations; returns the
    /// largest deviation from symmetry that was removed.
    pub fn symmetrize(&mut self) -> f64 {
        let n = self.n;
        let src = self.clone();
        let mut asym: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let ix = [j, k, l];
                    let vals = PERMS.map(|p| src.get(ix[p[0]], ix[p[1]], ix[p[2]]));
                    let mean = vals.iter().sum::<f64>() / 6.0;
                    asym = asym.max((src.get(j, k, l) - mean).abs());
                    self.set(j, k, l, mean);
                }
            }
        }
        asym
    }

    /// `T_jkl v^l`
    pub fn contract_last(&self, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |j, k| {
            (0..self.n).map(|l| self.get(j, k, l) * v[l]).sum()
        })
    }
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let x = self.idx(i, j, k, l);
        self.data[x] = v;
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Symmetrize in `(j, k, l)`; returns the removed asymmetry.
    pub fn symmetrize(&mut self) -> f64 {
        let n = self.n;
        let mut asym: f64 = 0.0;
        for i in 0..n {
            let mut slice = Tensor3::from_fn(n, |j, k, l| self.get(i, j, k, l));
            asym = asym.max(slice.symmetrize());
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        self.set(i, j, k, l, slice.get(j, k, l));
                    }
                }
            }
        }
        asym
    }

    /// `w_i T^i_jkl`
    pub fn lower_with(&self, w: &DVector<f64>) -> Tensor3 {
        let n = self.n;
        Tensor3::from_fn(n, |j, k, l| {
            (0..n).map(|i| w[i] * self.get(i, j, k, l)).sum()
        })
    }

    /// `T^i_jkl v^l`
    pub fn contract_last(&self, v: &DVector<f64>) -> Vec<DMatrix<f64>> {
        (0..self.n)
            .map(|i| {
                DMatrix::from_fn(self.n, self.n, |j, k| {
                    (0..self.n).map(|l| self.get(i, j, k, l) * v[l]).sum()
                })
            })
            .collect()
    }
}

/// Where a tensor came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Oracle,
}

/// Step sizes of the finite-difference oracles, relative to `|y|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Step for the third `y`-derivatives of the spray.
    pub third_order_step: f64,
    /// Step for first and second derivatives.
    pub low_order_step: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            third_order_step: 1e-2,
            low_order_step: 1e-3,
        }
    }
}

fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Frame and quantity set at `(x, y)`.
pub fn point_quantities(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<(AnisotropicFrame, QuantitySet), TensorError> {
    let frame = frame_at(structure, x, y)?;
    let q = model_quantities(phi, frame.b2, frame.s)?;
    Ok((frame, q))
}

/// `F(x, y) = alpha phi(b^2, beta / alpha)`
pub fn finsler_norm(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, TensorError> {
    let frame = frame_at(structure, x, y)?;
    Ok(frame.alpha * phi.value(frame.b2, frame.s)?)
}

fn tower_at(phi: &PhiModel, b2: f64, s: f64) -> Result<Tower<1>, TensorError> {
    let (jet, _) = phi.jet_scaled::<3>(b2, s)?;
    Ok(tower_values(&jet, b2, s)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalTensor {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Ratio of extreme eigenvalues of `g`.
    pub condition: f64,
}

/// `g_ij = 1/2 [F^2]_{y^i y^j}` from `phi` and its `s`-derivatives.
pub fn fundamental_tensor(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<FundamentalTensor, TensorError> {
    let f = frame_at(structure, x, y)?;
    let jet = phi.jet::<3>(f.b2, f.s)?;
    let (p, p2, p22) = (jet.partial(0, 0), jet.partial(0, 1), jet.partial(0, 2));
    let s = f.s;
    let k = p * p22 + p2 * p2;
    let rho = p * (p - s * p2);
    let rho1 = p * p2 - s * k;
    let rho2 = s * (s * k - p * p2);
    let al = &f.y_low / f.alpha;
    let bl = &f.b_low;
    let g = &f.a * rho
        + bl * bl.transpose() * k
        + (bl * al.transpose() + &al * bl.transpose()) * rho1
        + &al * al.transpose() * rho2;
    finish_fundamental(g)
}

/// `g_ij = 1/2 [F^2]_{y^i y^j}` by finite differences in `y`.
pub fn fundamental_tensor_oracle(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    opts: &OracleOptions,
) -> Result<FundamentalTensor, TensorError> {
    let n = structure.dim();
    let h = opts.low_order_step * y.norm();
    let f2 = |yy: &[f64]| finsler_norm(structure, phi, x, &dvec(yy)).map(|f| 0.5 * f * f);
    let mut g = DMatrix::zeros(n, n);
    let mut orders = vec![0usize; n];
    for j in 0..n {
        orders[j] += 1;
        for k in j..n {
            orders[k] += 1;
            let v = fd_partial(f2, y.as_slice(), &orders, h)?;
            g[(j, k)] = v;
            g[(k, j)] = v;
            orders[k] -= 1;
        }
        orders[j] -= 1;
    }
    finish_fundamental(g)
}

fn finish_fundamental(g: DMatrix<f64>) -> Result<FundamentalTensor, TensorError> {
    let chol = g
        .clone()
        .cholesky()
        .ok_or(TensorError::NotPositiveDefinite)?;
    let eig = g.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    let condition = hi / lo;
    if !(condition.is_finite() && condition < 1e14) {
        return Err(TensorError::Singular(condition));
    }
    Ok(FundamentalTensor {
        g,
        g_inv: chol.inverse(),
        condition,
    })
}

/// `G^i = G_alpha^i + c alpha X y^i + c alpha^2 H b^i`
pub fn spray_conformal(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, TensorError> {
    let f = frame_at(structure, x, y)?;
    let t = tower_at(phi, f.b2, f.s)?;
    let (xv, hv) = (t.x.value(), t.h.value());
    let a = f.alpha;
    Ok(structure.alpha_spray(x, y) + &f.y * (f.c * a * xv) + &f.b_up * (f.c * a * a * hv))
}

/// Spray in terms of `r_ij` and `s_ij` without assuming the conformal
/// condition.
pub fn spray_general(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, TensorError> {
    let f = frame_at(structure, x, y)?;
    let t = tower_at(phi, f.b2, f.s)?;
    let v = |s: &Series<1>| s.value();
    let (q, r, theta, psi, pi, omega) = (
        v(&t.q),
        v(&t.r),
        v(&t.theta),
        v(&t.psi),
        v(&t.pi),
        v(&t.omega),
    );
    let db = structure.one_form_derivative(x);
    let rij = (&db + db.transpose()) * 0.5;
    let sij = (&db - db.transpose()) * 0.5;
    let yv = &f.y;
    let r00 = yv.dot(&(&rij * yv));
    // r_i = b^j r_ji, s_i = b^j s_ji
    let ri = rij.transpose() * &f.b_up;
    let si = sij.transpose() * &f.b_up;
    let r0 = ri.dot(yv);
    let s0 = si.dot(yv);
    let rr = ri.dot(&f.b_up);
    let r_up = &f.a_inv * &ri;
    let s_up = &f.a_inv * &si;
    let s_up0 = &f.a_inv * (&sij * yv);
    let a = f.alpha;
    let common = -2.0 * a * q * s0 + r00 + 2.0 * a * a * r * rr;
    let p = (theta * common + a * omega * (r0 + s0)) / a;
    let qi = &s_up0 * (a * q) - (r_up + s_up) * (a * a * r)
        + &f.b_up * (psi * common + a * pi * (r0 + s0));
    Ok(structure.alpha_spray(x, y) + yv * p + qi)
}

/// Spray from its definition `G^i = 1/4 g^{il} {[F^2]_{x^k y^l} y^k - [F^2]_{x^l}}`
/// with all derivatives by finite differences in `(x, y)`.
pub fn spray_from_metric(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    opts: &OracleOptions,
) -> Result<DVector<f64>, TensorError> {
    let n = structure.dim();
    let g = fundamental_tensor_oracle(structure, phi, x, y, opts)?;
    let hy = opts.low_order_step * y.norm();
    let hx = opts.low_order_step * (1.0 + x.norm());
    // F^2 on the joint point (x, y) with coordinates rescaled so one step fits both
    let f2 = |p: &[f64]| {
        let xx = dvec(&p[..n]).map(|v| v * hx);
        let yy = dvec(&p[n..]);
        finsler_norm(structure, phi, &xx, &yy).map(|f| f * f)
    };
    let mut point: Vec<f64> = x.iter().map(|v| v / hx).collect();
    point.extend(y.iter());
    let mut rhs = DVector::zeros(n);
    for l in 0..n {
        let mut o = vec![0usize; 2 * n];
        o[l] = 1;
        let dx = fd_partial(f2, &point, &o, hy)? / hx;
        let mut mixed = 0.0;
        for k in 0..n {
            let mut o = vec![0usize; 2 * n];
            o[k] = 1;
            o[n + l] = 1;
            mixed += fd_partial(f2, &point, &o, hy)? / hx * y[k];
        }
        rhs[l] = mixed - dx;
    }
    Ok(&g.g_inv * rhs * 0.25)
}

/// The pieces of the closed-form Landsberg tensor.
#[derive(Clone, Debug, Serialize)]
pub struct LandsbergParts {
    pub tensor: Tensor3,
    pub c_vec: DVector<f64>,
    pub e_vec: DVector<f64>,
    pub rho: f64,
}

fn sym_pair_single(m: &DMatrix<f64>, v: &DVector<f64>, j: usize, k: usize, l: usize) -> f64 {
    m[(j, k)] * v[l] + m[(j, l)] * v[k] + m[(k, l)] * v[j]
}

/// Closed-form Berwald tensor from a frame and quantity set.
pub fn berwald_from_quantities(f: &AnisotropicFrame, q: &QuantitySet) -> Tensor4 {
    let n = f.n;
    let s = f.s;
    let a = f.alpha;
    let hb = q.h2 - s * q.h22;
    let xb = q.x - s * q.x2;
    let (a3, a4, a5) = (a.powi(3), a.powi(4), a.powi(5));
    let t = DMatrix::from_fn(n, n, |k, l| xb * f.hh[(k, l)] + q.x22 * f.h[k] * f.h[l]);
    let mut out = Tensor4::zeros(n);
    for j in 0..n {
        for k in j..n {
            for l in k..n {
                let hhh = f.h[j] * f.h[k] * f.h[l];
                let s1 = sym_pair_single(&f.hh, &f.h, j, k, l);
                let s2 = sym_pair_single(&f.hh, &f.y_low, j, k, l);
                let s3 = f.h[j] * f.h[k] * f.y_low[l]
                    + f.h[j] * f.h[l] * f.y_low[k]
                    + f.h[k] * f.h[l] * f.y_low[j];
                let along_b = (hb * s1 + q.h222 * hhh) / a4;
                let along_y = (xb * s2 + q.x22 * s3 + s * q.x22 * s1 - q.x222 * hhh) / a5;
                for i in 0..n {
                    let mut v = f.b_up[i] * along_b - f.y[i] * along_y;
                    if i == j {
                        v += t[(k, l)] / a3;
                    }
                    if i == k {
                        v += t[(j, l)] / a3;
                    }
                    if i == l {
                        v += t[(j, k)] / a3;
                    }
                    v *= f.c;
                    let ix = [j, k, l];
                    for p in PERMS {
                        out.set(i, ix[p[0]], ix[p[1]], ix[p[2]], v);
                    }
                }
            }
        }
    }
    out
}

/// Closed-form Landsberg tensor with its `C_j` and `E_j` covectors.
pub fn landsberg_from_quantities(f: &AnisotropicFrame, q: &QuantitySet) -> LandsbergParts {
    let n = f.n;
    let a = f.alpha;
    let (e, c, _) = landsberg_residuals(q, f.b2, f.s);
    let c_vec = &f.h * (f.c * a * a * c);
    let e_vec = &f.h * (f.c * a * a * e);
    let pre = -q.rho / (6.0 * a.powi(5));
    let tensor = Tensor3::from_fn(n, |j, k, l| {
        let hh = &f.hh;
        let h = &f.h;
        pre * (h[j] * h[k] * c_vec[l]
            + h[j] * h[l] * c_vec[k]
            + h[k] * h[l] * c_vec[j]
            + 3.0 * e_vec[j] * hh[(k, l)]
            + 3.0 * e_vec[k] * hh[(j, l)]
            + 3.0 * e_vec[l] * hh[(j, k)])
    });
    LandsbergParts {
        tensor,
        c_vec,
        e_vec,
        rho: q.rho,
    }
}

/// `-1/2 rho (alpha Q b_i + y_i) B^i_jkl`
pub fn landsberg_from_berwald(f: &AnisotropicFrame, q: &QuantitySet, b: &Tensor4) -> Tensor3 {
    let w = (&f.b_low * (f.alpha * q.q) + &f.y_low) * (-0.5 * q.rho);
    b.lower_with(&w)
}

pub fn berwald_closed(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<Tensor4, TensorError> {
    let (f, q) = point_quantities(structure, phi, x, y)?;
    Ok(berwald_from_quantities(&f, &q))
}

pub fn landsberg_closed(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<Tensor3, TensorError> {
    let (f, q) = point_quantities(structure, phi, x, y)?;
    Ok(landsberg_from_quantities(&f, &q).tensor)
}

/// Step for the third-order oracle at `y`, shrunk so that every stencil
/// point stays clear of a singular direction of `phi`.
fn oracle_step(phi: &PhiModel, frame: &AnisotropicFrame, rel: f64) -> Result<f64, TensorError> {
    let iv = phi.admissible(frame.b2)?;
    let room = [
        iv.lower_root.map(|_| frame.s - iv.lo),
        iv.upper_root.map(|_| iv.hi - frame.s),
    ]
    .into_iter()
    .flatten()
    .fold(f64::INFINITY, f64::min);
    // |ds| <= 2 b |dy| / alpha, and the widest stencil reaches 2 h per axis
    let b = frame.b2.sqrt().max(1e-300);
    let reach = 4.0 * b * (frame.n as f64).sqrt() / frame.alpha;
    Ok((rel * frame.y.norm()).min(0.5 * room / reach))
}

/// Third `y`-derivatives of the spray by central differences.
pub fn berwald_oracle(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    opts: &OracleOptions,
) -> Result<Tensor4, TensorError> {
    let frame = frame_at(structure, x, y)?;
    let h = oracle_step(phi, &frame, opts.third_order_step)?;
    berwald_oracle_of(
        |yy: &[f64]| spray_conformal(structure, phi, x, &dvec(yy)).map(|g| g.as_slice().to_vec()),
        y,
        h,
    )
}

/// Third derivatives of an arbitrary spray-like field.
pub fn berwald_oracle_of<F, E>(spray: F, y: &DVector<f64>, h: f64) -> Result<Tensor4, TensorError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
    E: std::fmt::Display,
{
    let n = y.len();
    let jet = DirectionalJet::compute(spray, y.as_slice(), h)?;
    let mut out = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out.set(i, j, k, l, jet.third(i, j, k, l));
                }
            }
        }
    }
    Ok(out)
}

/// `F_{y^i}` by central differences.
pub fn norm_gradient(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    opts: &OracleOptions,
) -> Result<DVector<f64>, TensorError> {
    let n = structure.dim();
    let h = opts.low_order_step * y.norm();
    let f = |yy: &[f64]| finsler_norm(structure, phi, x, &dvec(yy)).map(|v| vec![v]);
    let mut grad = DVector::zeros(n);
    let mut orders = vec![0usize; n];
    for i in 0..n {
        orders[i] = 1;
        grad[i] = fd_partial_vec(f, y.as_slice(), &orders, h)?[0];
        orders[i] = 0;
    }
    Ok(grad)
}

/// `L_jkl = -1/2 F F_{y^i} B^i_jkl` with every derivative by finite
/// differences.
pub fn landsberg_oracle(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    opts: &OracleOptions,
) -> Result<Tensor3, TensorError> {
    let b = berwald_oracle(structure, phi, x, y, opts)?;
    landsberg_oracle_with(structure, phi, x, y, &b, opts)
}

/// Landsberg oracle reusing an already computed oracle Berwald tensor.
pub fn landsberg_oracle_with(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    b: &Tensor4,
    opts: &OracleOptions,
) -> Result<Tensor3, TensorError> {
    let f = finsler_norm(structure, phi, x, y)?;
    let grad = norm_gradient(structure, phi, x, y, opts)?;
    Ok(b.lower_with(&(grad * (-0.5 * f))))
}

/// `J_k = g^{ij} L_ijk`
pub fn mean_landsberg(g_inv: &DMatrix<f64>, l: &Tensor3) -> DVector<f64> {
    let n = l.n;
    DVector::from_fn(n, |k, _| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += g_inv[(i, j)] * l.get(i, j, k);
            }
        }
        acc
    })
}

/// `max(norm, rho / alpha^3)`
pub fn tensor_scale(norm: f64, rho: f64, alpha: f64) -> f64 {
    norm.max(rho / alpha.powi(3))
}

/// All tensors at one `(x, y)`.
#[derive(Clone, Debug, Serialize)]
pub struct TensorBundle {
    pub provenance: Provenance,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub spray: DVector<f64>,
    pub berwald: Tensor4,
    pub landsberg: Tensor3,
    pub mean_landsberg: DVector<f64>,
    /// Asymmetry removed from the oracle tensors (zero for closed forms).
    pub asymmetry: f64,
}

pub fn tensor_bundle(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    provenance: Provenance,
    opts: &OracleOptions,
) -> Result<TensorBundle, TensorError> {
    let g = match provenance {
        Provenance::ClosedForm => fundamental_tensor(structure, phi, x, y)?,
        Provenance::Oracle => fundamental_tensor_oracle(structure, phi, x, y, opts)?,
    };
    let spray = spray_conformal(structure, phi, x, y)?;
    let (berwald, landsberg, asymmetry) = match provenance {
        Provenance::ClosedForm => {
            let (f, q) = point_quantities(structure, phi, x, y)?;
            (
                berwald_from_quantities(&f, &q),
                landsberg_from_quantities(&f, &q).tensor,
                0.0,
            )
        }
        Provenance::Oracle => {
            let mut b = berwald_oracle(structure, phi, x, y, opts)?;
            let a1 = b.symmetrize();
            let mut l = landsberg_oracle_with(structure, phi, x, y, &b, opts)?;
            let a2 = l.symmetrize();
            (b, l, a1.max(a2))
        }
    };
    let mean_landsberg = mean_landsberg(&g.g_inv, &landsberg);
    Ok(TensorBundle {
        provenance,
        g: g.g,
        g_inv: g.g_inv,
        spray,
        berwald,
        landsberg,
        mean_landsberg,
        asymmetry,
    })
}
