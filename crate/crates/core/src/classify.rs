//! Pointwise Berwald / Landsberg classification, grid scans and the theorem
//! suites built on them.

use indexmap::IndexMap;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridSpec, RunConfig, Tolerances};
use crate::error::{ConfigError, TensorError};
use crate::geometry::{frame_at, AnisotropicFrame, ConformalStructure, EuclideanConformal};
use crate::phi::{
    family_compatibility_residual, sigma_tau, PhiKind, PhiModel, PhiSpec, UnicornParams,
};
use crate::quantities::{
    berwald_residuals, landsberg_residuals, unicorn_ode_residuals, QuantitySet,
};
use crate::tensor::{
    berwald_from_quantities, fundamental_tensor, landsberg_from_quantities, mean_landsberg,
    point_quantities, FundamentalTensor,
};

/// Relative size of the `y` perturbations used by the Riemannian test.
const RIEMANNIAN_PROBE: f64 = 0.25;

/// Classification of one `(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointVerdict {
    pub berwald: bool,
    pub landsberg: bool,
    /// `None` when no perturbed direction was admissible.
    pub riemannian: Option<bool>,
    pub residuals: IndexMap<&'static str, f64>,
}

/// One grid point with its verdict, or the reason it could not be classified.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub b2: f64,
    pub s: f64,
    pub positive_d1: bool,
    pub positive_d2: bool,
    pub verdict: Option<PointVerdict>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// Index into the point records.
    pub argmax: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdicts {
    pub berwald: bool,
    pub landsberg: bool,
    pub riemannian_excluded: bool,
    pub classified: usize,
    pub unclassifiable: usize,
}

/// Outcome of a named suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub theorem: String,
    pub passed: bool,
    /// Fraction of unclassifiable points within tolerance.
    pub coverage_ok: bool,
    pub label: String,
    pub details: IndexMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub model: String,
    pub tolerances: Tolerances,
    pub points: Vec<PointRecord>,
    pub aggregates: IndexMap<String, Aggregate>,
    pub verdicts: Verdicts,
    pub suite: Option<SuiteOutcome>,
}

impl ResidualReport {
    /// Every classified point that is Berwald is also Landsberg.
    pub fn berwald_implies_landsberg(&self) -> bool {
        self.points
            .iter()
            .filter_map(|p| p.verdict.as_ref())
            .all(|v| !v.berwald || v.landsberg)
            && (!self.verdicts.berwald || self.verdicts.landsberg)
    }

    pub fn unclassifiable_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.verdicts.unclassifiable as f64 / self.points.len() as f64
    }

    fn finish(model: String, tolerances: Tolerances, points: Vec<PointRecord>) -> Self {
        let mut aggregates: IndexMap<String, Aggregate> = IndexMap::new();
        for (i, p) in points.iter().enumerate() {
            let Some(v) = &p.verdict else { continue };
            for (name, &val) in &v.residuals {
                if val.is_nan() {
                    continue;
                }
                let a = aggregates.entry(name.to_string()).or_insert(Aggregate {
                    max: f64::NEG_INFINITY,
                    min: f64::INFINITY,
                    mean: 0.0,
                    argmax: i,
                    count: 0,
                });
                if val > a.max {
                    a.max = val;
                    a.argmax = i;
                }
                a.min = a.min.min(val);
                a.mean += val;
                a.count += 1;
            }
        }
        for a in aggregates.values_mut() {
            a.mean /= a.count as f64;
        }
        let classified: Vec<&PointVerdict> =
            points.iter().filter_map(|p| p.verdict.as_ref()).collect();
        let verdicts = Verdicts {
            berwald: classified.iter().all(|v| v.berwald),
            landsberg: classified.iter().all(|v| v.landsberg),
            riemannian_excluded: classified.iter().any(|v| v.riemannian == Some(false)),
            classified: classified.len(),
            unclassifiable: points.len() - classified.len(),
        };
        let report = ResidualReport {
            model,
            tolerances,
            points,
            aggregates,
            verdicts,
            suite: None,
        };
        debug_assert!(report.berwald_implies_landsberg());
        report
    }

    fn aggregate_max(&self, name: &str) -> f64 {
        self.aggregates.get(name).map_or(f64::NAN, |a| a.max)
    }

    fn aggregate_min(&self, name: &str) -> f64 {
        self.aggregates.get(name).map_or(f64::NAN, |a| a.min)
    }
}

/// Weights bounding the Landsberg combinations by the Berwald quantities, so
/// that a Berwald point is always Landsberg at the same tolerance.
fn landsberg_weights(q: &QuantitySet, b2: f64, s: f64) -> (f64, f64, f64) {
    let u = (b2 * q.q + s).abs();
    let v = (1.0 + s * q.q).abs();
    let w_e = u + v * s.abs() + q.q.abs();
    let w_c = u + v + 3.0 * q.q.abs();
    let w_2d = (b2 - s * s).abs() * w_c + 3.0 * w_e;
    (w_e.max(1.0), w_c.max(1.0), w_2d.max(1.0))
}

fn riemannian_probe(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    g0: &FundamentalTensor,
    tol: f64,
) -> Option<(bool, f64)> {
    let scale = g0.g.amax();
    let n = y.len();
    let mut dev: Option<f64> = None;
    for k in 0..n.min(2) {
        let mut y1 = y.clone();
        y1[k] += RIEMANNIAN_PROBE * y.norm();
        if let Ok(g1) = fundamental_tensor(structure, phi, x, &y1) {
            let d = (&g1.g - &g0.g).amax() / scale;
            dev = Some(dev.map_or(d, |v| v.max(d)));
        }
    }
    dev.map(|d| (d <= tol, d))
}

fn verdict_from(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    frame: &AnisotropicFrame,
    q: &QuantitySet,
    tol: &Tolerances,
) -> PointVerdict {
    let (b2, s) = (frame.b2, frame.s);
    let (hb, xb) = berwald_residuals(q, s);
    let five = [hb.abs(), xb.abs(), q.x22.abs(), q.x222.abs(), q.h222.abs()];
    let berwald_res = five.iter().fold(0.0f64, |m, v| m.max(*v));
    let (e, c, two_d) = landsberg_residuals(q, b2, s);
    let (w_e, w_c, w_2d) = landsberg_weights(q, b2, s);
    let landsberg_res = if frame.n == 2 {
        two_d.abs() / w_2d
    } else {
        (e.abs() / w_e).max(c.abs() / w_c)
    };
    let nat = q.rho / frame.alpha.powi(3);
    let bt = berwald_from_quantities(frame, q);
    let lt = landsberg_from_quantities(frame, q).tensor;
    let g = fundamental_tensor(structure, phi, x, &frame.y).ok();
    let j = g
        .as_ref()
        .map_or(f64::NAN, |g| mean_landsberg(&g.g_inv, &lt).amax() / nat);
    let riem = g
        .as_ref()
        .and_then(|g| riemannian_probe(structure, phi, x, &frame.y, g, tol.riemannian));
    let mut residuals = IndexMap::new();
    residuals.insert("h2_sh22", hb.abs());
    residuals.insert("x_sx2", xb.abs());
    residuals.insert("x22", q.x22.abs());
    residuals.insert("x222", q.x222.abs());
    residuals.insert("h222", q.h222.abs());
    residuals.insert("berwald", berwald_res);
    residuals.insert("landsberg_e", e.abs());
    residuals.insert("landsberg_c", c.abs());
    residuals.insert("landsberg_2d", two_d.abs());
    residuals.insert("landsberg", landsberg_res);
    residuals.insert("berwald_tensor", bt.norm_inf() / nat);
    residuals.insert("landsberg_tensor", lt.norm_inf() / nat);
    residuals.insert("mean_landsberg", j);
    residuals.insert("riemannian_dev", riem.map_or(f64::NAN, |r| r.1));
    residuals.insert("d1_rel", q.d1_rel);
    residuals.insert("d2_rel", q.d2_rel);
    if let PhiSpec::Unicorn(p) = phi.spec() {
        insert_ode(&mut residuals, q, b2, s, p);
    } else if phi.kind() == PhiKind::ShenExample {
        insert_ode(&mut residuals, q, b2, s, &UnicornParams::example());
    }
    let berwald = berwald_res <= tol.scalar;
    PointVerdict {
        berwald,
        landsberg: berwald || landsberg_res <= tol.scalar,
        riemannian: riem.map(|r| r.0),
        residuals,
    }
}

fn insert_ode(
    residuals: &mut IndexMap<&'static str, f64>,
    q: &QuantitySet,
    b2: f64,
    s: f64,
    p: &UnicornParams,
) {
    if let Ok((dx, dh)) = unicorn_ode_residuals(q, b2, s, p.c1.eval(b2)) {
        residuals.insert("ode_x", dx.abs());
        residuals.insert("ode_h", dh.abs());
    }
}

/// Berwald and Landsberg verdicts at one `(x, y)`; fails where `F` is not
/// positive definite.
pub fn classify_point(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tol: &Tolerances,
) -> Result<PointVerdict, TensorError> {
    let (frame, q) = point_quantities(structure, phi, x, y)?;
    if !(q.d1_rel > 0.0 && q.d2_rel > 0.0) {
        return Err(TensorError::NotPositiveDefinite);
    }
    Ok(verdict_from(structure, phi, x, &frame, &q, tol))
}

/// One sampled `(x, y)` with its target `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

/// Stratified sample of `x_points` base points with `|b|` in `b_range` and
/// `directions` unit directions per point whose `s / b` covers the requested
/// range, clipped to the admissible interval with margin `edge_margin * b`.
pub fn build_grid(
    structure: &EuclideanConformal,
    phi: &PhiModel,
    b_range: [f64; 2],
    grid: &GridSpec,
) -> Result<Vec<GridPoint>, ConfigError> {
    if grid.x_points == 0 || grid.directions == 0 {
        return Err(ConfigError::EmptyGrid);
    }
    let n = structure.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut out = Vec::with_capacity(grid.x_points * grid.directions);
    for i in 0..grid.x_points {
        let u: f64 = rng.random();
        let b = b_range[0] + (b_range[1] - b_range[0]) * (i as f64 + u) / grid.x_points as f64;
        let b_hat = random_unit(&mut rng, n);
        let x = structure.point_with_one_form(&(&b_hat * b));
        let iv = phi.admissible(b * b)?;
        let lo = (grid.s_range[0] * b).max(iv.lo + grid.edge_margin * b);
        let hi = (grid.s_range[1] * b).min(iv.hi - grid.edge_margin * b);
        if !(lo < hi) {
            return Err(ConfigError::Invalid(format!(
                "no admissible s in the requested range at b = {b}"
            )));
        }
        for k in 0..grid.directions {
            let v: f64 = rng.random();
            let s = lo + (hi - lo) * (k as f64 + v) / grid.directions as f64;
            let f = s / b;
            let mut w = random_unit(&mut rng, n);
            w -= &b_hat * b_hat.dot(&w);
            let wn = w.norm();
            if wn < 1e-6 {
                w = DVector::zeros(n);
                w[if b_hat[0].abs() < 0.9 { 0 } else { 1 }] = 1.0;
                w -= &b_hat * b_hat.dot(&w);
            }
            let w = w.normalize();
            let y = &b_hat * f + w * (1.0 - f * f).max(0.0).sqrt();
            out.push(GridPoint { x: x.clone(), y });
        }
    }
    Ok(out)
}

fn record(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    p: &GridPoint,
    tol: &Tolerances,
) -> PointRecord {
    let base = |b2: f64, s: f64| PointRecord {
        x: p.x.as_slice().to_vec(),
        y: p.y.as_slice().to_vec(),
        b2,
        s,
        positive_d1: false,
        positive_d2: false,
        verdict: None,
        error: None,
    };
    let frame = match frame_at(structure, &p.x, &p.y) {
        Ok(f) => f,
        Err(e) => {
            return PointRecord {
                error: Some(e.to_string()),
                ..base(f64::NAN, f64::NAN)
            }
        }
    };
    match point_quantities(structure, phi, &p.x, &p.y) {
        Ok((frame, q)) => {
            let (d1, d2) = (q.d1_rel > 0.0, q.d2_rel > 0.0);
            let (verdict, error) = if d1 && d2 {
                (
                    Some(verdict_from(structure, phi, &p.x, &frame, &q, tol)),
                    None,
                )
            } else {
                (None, Some(TensorError::NotPositiveDefinite.to_string()))
            };
            PointRecord {
                positive_d1: d1,
                positive_d2: d2,
                verdict,
                error,
                ..base(frame.b2, frame.s)
            }
        }
        Err(e) => PointRecord {
            error: Some(e.to_string()),
            ..base(frame.b2, frame.s)
        },
    }
}

/// Classify every grid point. `jobs = 0` uses the global thread pool; the
/// record order always follows the grid.
pub fn scan_points(
    structure: &dyn ConformalStructure,
    phi: &PhiModel,
    points: &[GridPoint],
    tol: &Tolerances,
    jobs: usize,
) -> ResidualReport {
    let run = || -> Vec<PointRecord> {
        points
            .par_iter()
            .map(|p| record(structure, phi, p, tol))
            .collect()
    };
    let records = if jobs == 0 {
        run()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    };
    ResidualReport::finish(phi.kind().to_string(), *tol, records)
}

/// Grid scan of the configured model.
pub fn scan(config: &RunConfig, jobs: usize) -> Result<ResidualReport, ConfigError> {
    config.validate()?;
    let structure = config.structure()?;
    let phi = config.phi();
    let points = build_grid(&structure, &phi, config.model.b_range, &config.grid)?;
    Ok(scan_points(
        &structure,
        &phi,
        &points,
        &config.tolerances,
        jobs,
    ))
}

/// The named verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// The exponential-integral model is Landsberg on the whole grid.
    UnicornLandsberg,
    /// The same model is strictly non-Berwald on the whole grid.
    UnicornNonBerwald,
    /// Berwald points of the model are Riemannian.
    BerwaldRiemannian,
    /// For regular models, Landsberg points are Riemannian.
    LandsbergRiemannian,
    /// The scalar Berwald test agrees with the vanishing of the tensor.
    BerwaldCriterion,
    /// Compatibility of the coefficient functions over a `b^2` grid.
    FamilyCompat,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::UnicornLandsberg,
        Theorem::UnicornNonBerwald,
        Theorem::BerwaldRiemannian,
        Theorem::LandsbergRiemannian,
        Theorem::BerwaldCriterion,
        Theorem::FamilyCompat,
    ];

    /// Canonical command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Theorem::UnicornLandsberg => "thm1.2-landsberg",
            Theorem::UnicornNonBerwald => "thm1.2-nonberwald",
            Theorem::BerwaldRiemannian => "thm1.3",
            Theorem::LandsbergRiemannian => "cor1.3",
            Theorem::BerwaldCriterion => "prop-berwald",
            Theorem::FamilyCompat => "family-compat",
        }
    }

    fn alias(self) -> &'static str {
        match self {
            Theorem::UnicornLandsberg => "unicorn-landsberg",
            Theorem::UnicornNonBerwald => "unicorn-nonberwald",
            Theorem::BerwaldRiemannian => "berwald-riemannian",
            Theorem::LandsbergRiemannian => "landsberg-riemannian",
            Theorem::BerwaldCriterion => "berwald-criterion",
            Theorem::FamilyCompat => "family-compat",
        }
    }

    pub fn parse(name: &str) -> Result<Theorem, ConfigError> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == name || t.alias() == name)
            .ok_or_else(|| ConfigError::UnknownTheorem(name.to_string()))
    }
}

/// `s / b` fractions and `b^2` samples of the compatibility suite.
const COMPAT_S_FRACTIONS: [f64; 3] = [0.1, 0.3, 0.5];

fn unicorn_params(spec: &PhiSpec) -> Option<UnicornParams> {
    match spec {
        PhiSpec::Unicorn(p) => Some(p.clone()),
        PhiSpec::ShenExample => Some(UnicornParams::example()),
        _ => None,
    }
}

fn family_compat(config: &RunConfig) -> Result<ResidualReport, ConfigError> {
    config.validate()?;
    let params = unicorn_params(&config.model.phi).ok_or_else(|| {
        ConfigError::Invalid("family-compat needs an exponential-integral model".into())
    })?;
    let tol = config.tolerances;
    let phi = config.phi();
    let [lo, hi] = config.model.b_range;
    let m = config.grid.x_points.max(1);
    let mut points = Vec::new();
    for i in 0..m {
        let b = if m == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (m - 1) as f64
        };
        let b2 = b * b;
        let (sigma, tau) = sigma_tau(&params, b2);
        for f in COMPAT_S_FRACTIONS {
            let s = f * b;
            let mut rec = PointRecord {
                x: Vec::new(),
                y: Vec::new(),
                b2,
                s,
                positive_d1: false,
                positive_d2: false,
                verdict: None,
                error: None,
            };
            if let Ok(pos) = phi.jet_scaled::<3>(b2, s) {
                let (j, _) = pos;
                let d1 = 1.0 - s * j.partial(0, 1);
                rec.positive_d1 = d1 > 0.0;
                rec.positive_d2 = d1 + (b2 - s * s) * j.partial(0, 2) > 0.0;
            }
            match family_compatibility_residual(&params, b2, s) {
                Ok(r) => {
                    let ok = r <= tol.compatibility && sigma == 0.0 && tau == 0.0;
                    let mut residuals = IndexMap::new();
                    residuals.insert("compatibility", r);
                    residuals.insert("sigma", sigma.abs());
                    residuals.insert("tau", tau.abs());
                    rec.verdict = Some(PointVerdict {
                        berwald: false,
                        landsberg: ok,
                        riemannian: None,
                        residuals,
                    });
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            points.push(rec);
        }
    }
    Ok(ResidualReport::finish(phi.kind().to_string(), tol, points))
}

/// Run one named suite on the configured model.
pub fn verify_theorem(
    theorem: Theorem,
    config: &RunConfig,
    jobs: usize,
) -> Result<ResidualReport, ConfigError> {
    let mut report = match theorem {
        Theorem::FamilyCompat => family_compat(config)?,
        _ => scan(config, jobs)?,
    };
    let tol = config.tolerances;
    let coverage_ok = report.unclassifiable_fraction() <= tol.coverage;
    let classified = || report.points.iter().filter_map(|p| p.verdict.as_ref());
    let mut details: IndexMap<String, f64> = IndexMap::new();
    let (passed, label) = match theorem {
        Theorem::UnicornLandsberg => {
            let lt = report.aggregate_max("landsberg_tensor");
            details.insert("max_landsberg".into(), report.aggregate_max("landsberg"));
            details.insert("max_landsberg_tensor".into(), lt);
            let ok = report.verdicts.landsberg && lt <= tol.tensor;
            (ok, if ok { "landsberg" } else { "not landsberg" })
        }
        Theorem::UnicornNonBerwald => {
            let min_b = report.aggregate_min("berwald");
            details.insert("min_berwald".into(), min_b);
            details.insert("min_x_sx2".into(), report.aggregate_min("x_sx2"));
            details.insert("max_x_sx2".into(), report.aggregate_max("x_sx2"));
            let ok = min_b >= tol.nonberwald_margin;
            (
                ok,
                if ok {
                    "non-berwald"
                } else {
                    "berwald somewhere"
                },
            )
        }
        Theorem::BerwaldRiemannian => {
            let bad = classified()
                .filter(|v| v.berwald && v.riemannian == Some(false))
                .count();
            details.insert("berwald_non_riemannian_points".into(), bad as f64);
            let ok = bad == 0;
            (ok, if ok { "consistent" } else { "counterexample" })
        }
        Theorem::LandsbergRiemannian => {
            let phi = config.phi();
            let regular = report
                .points
                .iter()
                .filter(|p| p.b2.is_finite())
                .all(|p| phi.admissible(p.b2).is_ok_and(|iv| iv.is_full()));
            let bad = classified()
                .filter(|v| v.landsberg && v.riemannian == Some(false))
                .count();
            details.insert("landsberg_non_riemannian_points".into(), bad as f64);
            details.insert("regular".into(), if regular { 1.0 } else { 0.0 });
            if !regular {
                (true, "not applicable: singular directions present")
            } else {
                let ok = bad == 0;
                (ok, if ok { "consistent" } else { "counterexample" })
            }
        }
        Theorem::BerwaldCriterion => {
            let bad = classified()
                .filter(|v| {
                    let tensor_zero = v.residuals["berwald_tensor"] <= tol.tensor;
                    v.berwald != tensor_zero
                })
                .count();
            details.insert("disagreements".into(), bad as f64);
            let ok = bad == 0;
            (ok, if ok { "consistent" } else { "inconsistent" })
        }
        Theorem::FamilyCompat => {
            details.insert(
                "max_compatibility".into(),
                report.aggregate_max("compatibility"),
            );
            details.insert("max_sigma".into(), report.aggregate_max("sigma"));
            details.insert("max_tau".into(), report.aggregate_max("tau"));
            let ok = report.verdicts.landsberg;
            (ok, if ok { "compatible" } else { "incompatible" })
        }
    };
    report.suite = Some(SuiteOutcome {
        theorem: theorem.name().to_string(),
        passed: passed && coverage_ok,
        coverage_ok,
        label: label.to_string(),
        details,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_euclidean_conformal;
    use crate::jet::Expr;
    use crate::phi::{custom_phi, shen_example_phi, CoefficientFunction, RiemannianParams};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn constant_phi_is_berwald_and_riemannian() {
        let e3 = build_euclidean_conformal(3, 1.0, &[]).unwrap();
        let one = custom_phi(Expr::c(1.0));
        let p = classify_point(
            &e3,
            &one,
            &v(&[0.3, 0.4, 0.2]),
            &v(&[1.0, -0.5, 0.1]),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(p.berwald && p.landsberg);
        assert_eq!(p.riemannian, Some(true));
    }

    #[test]
    fn example_is_landsberg_not_berwald() {
        let e3 = build_euclidean_conformal(3, 1.0, &[]).unwrap();
        let p = classify_point(
            &e3,
            &shen_example_phi(),
            &v(&[0.6, 0.2, -0.1]),
            &v(&[0.2, 1.0, 0.4]),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(!p.berwald && p.landsberg, "{p:?}");
        assert_eq!(p.riemannian, Some(false));
    }

    #[test]
    fn linear_phi_is_neither() {
        let e3 = build_euclidean_conformal(3, 1.0, &[]).unwrap();
        let randers = custom_phi(Expr::c(1.0) + Expr::s());
        let p = classify_point(
            &e3,
            &randers,
            &v(&[0.6, 0.2, -0.1]),
            &v(&[0.2, 1.0, 0.4]),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(!p.berwald && !p.landsberg);
    }

    #[test]
    fn grid_has_requested_size_and_range() {
        let e3 = build_euclidean_conformal(3, 1.0, &[]).unwrap();
        let phi = shen_example_phi();
        let grid = GridSpec {
            x_points: 4,
            directions: 8,
            s_range: [-0.6, 0.95],
            seed: 3,
            edge_margin: 1e-3,
        };
        let pts = build_grid(&e3, &phi, [0.5, 1.5], &grid).unwrap();
        assert_eq!(pts.len(), 32);
        for p in &pts {
            let f = frame_at(&e3, &p.x, &p.y).unwrap();
            let b = f.b2.sqrt();
            assert!(f.s > -0.6 * b - 1e-12 && f.s < 0.95 * b + 1e-12);
            assert!((f.alpha - 1.0).abs() < 1e-12);
        }
        assert_eq!(pts, build_grid(&e3, &phi, [0.5, 1.5], &grid).unwrap());
    }

    #[test]
    fn empty_grid_is_an_error() {
        let e3 = build_euclidean_conformal(3, 1.0, &[]).unwrap();
        let grid = GridSpec {
            x_points: 0,
            ..GridSpec::default()
        };
        assert_eq!(
            build_grid(&e3, &shen_example_phi(), [0.5, 1.5], &grid),
            Err(ConfigError::EmptyGrid)
        );
    }

    #[test]
    fn riemannian_scan_is_berwald() {
        let mut cfg = RunConfig::example();
        cfg.model.phi = PhiSpec::Riemannian(RiemannianParams {
            lambda0: CoefficientFunction::zero(),
            lambda1: CoefficientFunction::one(),
            lambda3: CoefficientFunction::one(),
        });
        cfg.grid = GridSpec {
            x_points: 3,
            directions: 6,
            ..GridSpec::default()
        };
        let r = scan(&cfg, 1).unwrap();
        assert!(r.verdicts.berwald && r.verdicts.landsberg && !r.verdicts.riemannian_excluded);
        assert!(r.berwald_implies_landsberg());
    }

    #[test]
    fn theorem_names_parse() {
        for t in Theorem::ALL {
            assert_eq!(Theorem::parse(t.name()).unwrap(), t);
            assert_eq!(Theorem::parse(t.alias()).unwrap(), t);
        }
        assert!(matches!(
            Theorem::parse("bogus"),
            Err(ConfigError::UnknownTheorem(_))
        ));
    }

    #[test]
    fn aggregates_are_extrema_of_records() {
        let mut cfg = RunConfig::example();
        cfg.grid = GridSpec {
            x_points: 2,
            directions: 5,
            ..GridSpec::default()
        };
        let r = scan(&cfg, 2).unwrap();
        for (name, a) in &r.aggregates {
            let vals: Vec<f64> = r
                .points
                .iter()
                .filter_map(|p| p.verdict.as_ref())
                .filter_map(|v| v.residuals.get(name.as_str()).copied())
                .filter(|x| !x.is_nan())
                .collect();
            assert_eq!(
                a.max,
                vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            );
            assert_eq!(a.min, vals.iter().cloned().fold(f64::INFINITY, f64::min));
        }
    }
}
