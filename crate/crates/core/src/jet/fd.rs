use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("stencil point {point:?} is outside the admissible region: {reason}")]
    Stencil { point: Vec<f64>, reason: String },
    #[error("unsupported derivative order {0} (at most 5 per coordinate)")]
    Order(usize),
    #[error("step must be positive, got {0}")]
    Step(f64),
}

/// Central-difference weights for a single coordinate, in units of `h`.
fn stencil(order: usize) -> Result<&'static [(i32, f64)], FdError> {
    Ok(match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        5 => &[
            (-3, -0.5),
            (-2, 2.0),
            (-1, -2.5),
            (1, 2.5),
            (2, -2.0),
            (3, 0.5),
        ],
        k => return Err(FdError::Order(k)),
    })
}

fn tensor_stencil<F, E>(f: &F, point: &[f64], orders: &[usize], h: f64) -> Result<Vec<f64>, FdError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
    E: std::fmt::Display,
{
    let stencils = orders
        .iter()
        .map(|&k| stencil(k))
        .collect::<Result<Vec<_>, _>>()?;
    let total: usize = orders.iter().sum();
    let mut idx = vec![0usize; orders.len()];
    let mut acc: Option<Vec<f64>> = None;
    let mut p = point.to_vec();
    loop {
        let mut w = 1.0;
        for (d, st) in stencils.iter().enumerate() {
            let (off, wd) = st[idx[d]];
            p[d] = point[d] + off as f64 * h;
            w *= wd;
        }
        let v = f(&p).map_err(|e| FdError::Stencil {
            point: p.clone(),
            reason: e.to_string(),
        })?;
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| w * x).collect()),
            Some(a) => {
                for (ai, vi) in a.iter_mut().zip(&v) {
                    *ai += w * vi;
                }
            }
        }
        // odometer over the per-coordinate stencils
        let mut d = 0;
        loop {
            if d == idx.len() {
                let scale = h.powi(total as i32);
                let mut out = acc.unwrap_or_default();
                for v in &mut out {
                    *v /= scale;
                }
                return Ok(out);
            }
            idx[d] += 1;
            if idx[d] < stencils[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Mixed partial `prod_d d^{orders[d]} / dx_d^{orders[d]}` of a vector field by
/// tensor-product central differences with one Richardson level (steps `h`
/// and `h/2`).
pub fn fd_partial_vec<F, E>(
    f: F,
    point: &[f64],
    orders: &[usize],
    h: f64,
) -> Result<Vec<f64>, FdError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
    E: std::fmt::Display,
{
    assert_eq!(point.len(), orders.len(), "one order per coordinate");
    if !(h > 0.0) {
        return Err(FdError::Step(h));
    }
    let coarse = tensor_stencil(&f, point, orders, h)?;
    let fine = tensor_stencil(&f, point, orders, 0.5 * h)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

/// Scalar version of [`fd_partial_vec`].
pub fn fd_partial<F, E>(f: F, point: &[f64], orders: &[usize], h: f64) -> Result<f64, FdError>
where
    F: Fn(&[f64]) -> Result<f64, E>,
    E: std::fmt::Display,
{
    let v = fd_partial_vec(|p: &[f64]| f(p).map(|x| vec![x]), point, orders, h)?;
    Ok(v[0])
}

/// Value and first three derivatives of an `m`-vector field of `n` variables.
///
/// Only the index combinations `j <= k <= l` are differenced; the remaining
/// entries are filled by symmetry.
#[derive(Clone, Debug)]
pub struct DirectionalJet {
    pub n: usize,
    pub m: usize,
    pub value: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    third: Vec<f64>,
}

impl DirectionalJet {
    pub fn compute<F, E>(f: F, y: &[f64], h: f64) -> Result<Self, FdError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, E>,
        E: std::fmt::Display,
    {
        let n = y.len();
        let value = f(y).map_err(|e| FdError::Stencil {
            point: y.to_vec(),
            reason: e.to_string(),
        })?;
        let m = value.len();
        let mut jet = DirectionalJet {
            n,
            m,
            value,
            first: vec![0.0; n * m],
            second: vec![0.0; n * n * m],
            third: vec![0.0; n * n * n * m],
        };
        let mut orders = vec![0usize; n];
        for j in 0..n {
            orders[j] += 1;
            let d = fd_partial_vec(&f, y, &orders, h)?;
            jet.first[j * m..(j + 1) * m].copy_from_slice(&d);
            for k in j..n {
                orders[k] += 1;
                let d = fd_partial_vec(&f, y, &orders, h)?;
                for (a, b) in [(j, k), (k, j)] {
                    let o = (a * n + b) * m;
                    jet.second[o..o + m].copy_from_slice(&d);
                }
                for l in k..n {
                    orders[l] += 1;
                    let d = fd_partial_vec(&f, y, &orders, h)?;
                    for (a, b, c) in [
                        (j, k, l),
                        (j, l, k),
                        (k, j, l),
                        (k, l, j),
                        (l, j, k),
                        (l, k, j),
                    ] {
                        let o = ((a * n + b) * n + c) * m;
                        jet.third[o..o + m].copy_from_slice(&d);
                    }
                    orders[l] -= 1;
                }
                orders[k] -= 1;
            }
            orders[j] -= 1;
        }
        Ok(jet)
    }

    /// `d f_i / d y_j`
    pub fn first(&self, i: usize, j: usize) -> f64 {
        self.first[j * self.m + i]
    }

    /// `d^2 f_i / d y_j d y_k`
    pub fn second(&self, i: usize, j: usize, k: usize) -> f64 {
        self.second[(j * self.n + k) * self.m + i]
    }

    /// `d^3 f_i / d y_j d y_k d y_l`
    pub fn third(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.third[((j * self.n + k) * self.n + l) * self.m + i]
    }
}
