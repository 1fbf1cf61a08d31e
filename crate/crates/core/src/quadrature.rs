//! Adaptive quadrature of small vector-valued integrands.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error(
        "quadrature did not converge: error estimate {estimate:e} after {intervals} intervals"
    )]
    NonConvergence { estimate: f64, intervals: usize },
    #[error("integrand failed at t = {t}: {reason}")]
    Integrand { t: f64, reason: String },
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// Tolerance on every component: absolute for values below one in
    /// magnitude, relative above.
    pub tol: f64,
    /// Upper bound on the number of subintervals.
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-12,
            max_intervals: 1 << 16,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<const M: usize> {
    pub value: [f64; M],
    pub error: f64,
    pub intervals: usize,
}

fn call<const M: usize, F, E>(f: &F, t: f64) -> Result<[f64; M], QuadError>
where
    F: Fn(f64) -> Result<[f64; M], E>,
    E: std::fmt::Display,
{
    let v = f(t).map_err(|e| QuadError::Integrand {
        t,
        reason: e.to_string(),
    })?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(QuadError::Integrand {
            t,
            reason: "non-finite integrand".into(),
        });
    }
    Ok(v)
}

fn max_abs_diff<const M: usize>(a: &[f64; M], b: &[f64; M]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Adaptive Simpson rule with Richardson correction on accepted panels.
/// `opts.tol` is used as an absolute tolerance.
pub fn adaptive_simpson<const M: usize, F, E>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult<M>, QuadError>
where
    F: Fn(f64) -> Result<[f64; M], E>,
    E: std::fmt::Display,
{
    struct Panel<const M: usize> {
        a: f64,
        b: f64,
        fa: [f64; M],
        fm: [f64; M],
        fb: [f64; M],
        whole: [f64; M],
        tol: f64,
    }

    fn simpson<const M: usize>(h: f64, fa: &[f64; M], fm: &[f64; M], fb: &[f64; M]) -> [f64; M] {
        std::array::from_fn(|k| h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]))
    }

    if a == b {
        return Ok(QuadResult {
            value: [0.0; M],
            error: 0.0,
            intervals: 0,
        });
    }
    let fa = call(&f, a)?;
    let fb = call(&f, b)?;
    let fm = call(&f, 0.5 * (a + b))?;
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(b - a, &fa, &fm, &fb),
        tol: opts.tol,
    }];
    let mut total = [0.0; M];
    let mut error = 0.0;
    let mut intervals = 1usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = call(&f, 0.5 * (p.a + m))?;
        let frm = call(&f, 0.5 * (m + p.b))?;
        let left = simpson(m - p.a, &p.fa, &flm, &p.fm);
        let right = simpson(p.b - m, &p.fm, &frm, &p.fb);
        let two: [f64; M] = std::array::from_fn(|k| left[k] + right[k]);
        let delta = max_abs_diff(&two, &p.whole);
        if delta <= 15.0 * p.tol || intervals >= opts.max_intervals {
            if delta > 15.0 * p.tol {
                return Err(QuadError::NonConvergence {
                    estimate: delta / 15.0,
                    intervals,
                });
            }
            for k in 0..M {
                total[k] += two[k] + (two[k] - p.whole[k]) / 15.0;
            }
            error += delta / 15.0;
            continue;
        }
        intervals += 1;
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
        });
    }
    Ok(QuadResult {
        value: total,
        error,
        intervals,
    })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_panel<const M: usize, F, E>(f: &F, a: f64, b: f64) -> Result<([f64; M], f64), QuadError>
where
    F: Fn(f64) -> Result<[f64; M], E>,
    E: std::fmt::Display,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; M];
    let mut g = [0.0; M];
    let fc = call(f, c)?;
    for m in 0..M {
        k[m] = WGK[7] * fc[m];
        g[m] = WG[3] * fc[m];
    }
    for j in 0..7 {
        let f1 = call(f, c - h * XGK[j])?;
        let f2 = call(f, c + h * XGK[j])?;
        for m in 0..M {
            let s = f1[m] + f2[m];
            k[m] += WGK[j] * s;
            if j % 2 == 1 {
                g[m] += WG[j / 2] * s;
            }
        }
    }
    let kv: [f64; M] = std::array::from_fn(|m| k[m] * h);
    let gv: [f64; M] = std::array::from_fn(|m| g[m] * h);
    Ok((kv, max_abs_diff(&kv, &gv)))
}

/// Bisections that fail to reduce a panel's error before round-off is assumed.
const ROUNDOFF_STALLS: usize = 24;
/// Tolerance relaxation accepted once round-off dominates.
const ROUNDOFF_SLACK: f64 = 1e3;

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature.
///
/// The panel with the largest Gauss-Kronrod difference is bisected until the
/// summed estimate falls below the tolerance. When bisection repeatedly stops
/// reducing the estimate the integrand is dominated by evaluation noise and
/// the tolerance is relaxed by `ROUNDOFF_SLACK`; the returned `error` is
/// always the unrelaxed estimate.
pub fn gauss_kronrod<const M: usize, F, E>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult<M>, QuadError>
where
    F: Fn(f64) -> Result<[f64; M], E>,
    E: std::fmt::Display,
{
    if a == b {
        return Ok(QuadResult {
            value: [0.0; M],
            error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = kronrod_panel(&f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    let mut stalled = 0usize;
    loop {
        let error: f64 = panels.iter().map(|p| p.3).sum();
        let mut value = [0.0; M];
        for p in &panels {
            for m in 0..M {
                value[m] += p.2[m];
            }
        }
        let magnitude = value.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let floor = if stalled >= ROUNDOFF_STALLS {
            ROUNDOFF_SLACK
        } else {
            1.0
        };
        if error <= floor * opts.tol * magnitude {
            return Ok(QuadResult {
                value,
                error,
                intervals: panels.len(),
            });
        }
        if panels.len() >= opts.max_intervals {
            return Err(QuadError::NonConvergence {
                estimate: error,
                intervals: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (pa, pb, _, pe) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if !(mid > pa.min(pb) && mid < pa.max(pb)) {
            return Err(QuadError::NonConvergence {
                estimate: error,
                intervals: panels.len() + 1,
            });
        }
        let (v1, e1) = kronrod_panel(&f, pa, mid)?;
        let (v2, e2) = kronrod_panel(&f, mid, pb)?;
        if e1 + e2 >= 0.99 * pe {
            stalled += 1;
        }
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}
