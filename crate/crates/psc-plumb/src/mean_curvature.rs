//! Mean curvature of the boundary `X × S^{q-1}` over the profile collar, the
//! numeric check over the `Z₂` collar, and the second fundamental forms at
//! the two gluing interfaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cap::{cap_boundary_form, cap_from_geodesic, perelman_form_sums, BlockDiagonalForm};
use crate::curvature::{
    fill_sphere_block, numeric_curvature_steps, numeric_second_fundamental_form, sphere_domain, sphere_sample_point,
    GraphHypersurface, MetricPatch, WarpedJet,
};
use crate::par::{self, Exec};
use crate::profile::{EpsilonProfile, ProfilePair};
use crate::CHECK_TOL;
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Error, PartialEq)]
pub enum MeanCurvatureError {
    #[error("f = {f:e} outside the arcsin domain for beta N = {beta_n:e}")]
    ArcsinDomain { f: f64, beta_n: f64 },
    #[error("curve is not a graph at t = {t}: 1 - f^2/(beta N)^2 - f'^2 = {u:e}")]
    NotGraph { t: f64, u: f64 },
    #[error("curvature oracle: {0}")]
    Oracle(String),
    #[error("cap: {0}")]
    Cap(String),
}

/// `w = 1 - f²/(βN)²` and `u = w - f'²`, with tiny negative `u` from
/// rounding clamped to zero.
pub fn graph_factors(jet: &WarpedJet, beta_n: f64) -> Result<(f64, f64), MeanCurvatureError> {
    let x = jet.f / beta_n;
    if !(x > 0.0 && x < 1.0) {
        return Err(MeanCurvatureError::ArcsinDomain { f: jet.f, beta_n });
    }
    let w = 1.0 - x * x;
    let u = w - jet.f1 * jet.f1;
    if u < -1e-12 {
        return Err(MeanCurvatureError::NotGraph { t: jet.t, u });
    }
    Ok((w, u.max(0.0)))
}

/// The pair `(A, B)` whose difference decides the sign of the mean curvature
/// on the profile collar, in its published form.
pub fn ab_terms(jet: &WarpedJet, beta_n: f64, p: usize, q: usize) -> Result<(f64, f64), MeanCurvatureError> {
    let (w, u) = graph_factors(jet, beta_n)?;
    let cot = 1.0 / (jet.f / beta_n).asin().tan();
    let a = (p - 1) as f64 * u * u * w.sqrt() * cot / beta_n;
    let b = jet.f2 * w + jet.f1 * jet.f1 * jet.f / (beta_n * beta_n) + (q - 1) as f64 * u * w * jet.f1 * jet.h1 * jet.h;
    Ok((a, b))
}

/// Same pair after the `F''` and normalisation corrections: `A_c - B_c`
/// has exactly the sign of the displayed mean curvature.
pub fn ab_terms_corrected(jet: &WarpedJet, beta_n: f64, p: usize, q: usize) -> Result<(f64, f64), MeanCurvatureError> {
    let (w, u) = graph_factors(jet, beta_n)?;
    let cot = 1.0 / (jet.f / beta_n).asin().tan();
    let a = (p - 1) as f64 * u * w.sqrt() * cot / beta_n;
    let b = jet.f2 * w + jet.f1 * jet.f1 * jet.f / (beta_n * beta_n) + (q - 1) as f64 * w * jet.f1 * jet.h1 * jet.h;
    Ok((a, b))
}

/// One sample of the boundary curve `s = F(t̃)` in `ℝ × S^p(βN)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    /// Arc-length coordinate `t̃ = φ(t)`.
    pub tt: f64,
    pub big_f: f64,
    /// `φ'(t) = sqrt(u/w)`.
    pub phi1: f64,
    /// `F'` and `F''` in `t̃`; `None` where the curve is vertical.
    pub big_f1: Option<f64>,
    pub big_f2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEmbedding {
    pub beta_n: f64,
    pub points: Vec<CurvePoint>,
}

/// `u` below this counts as a vertical tangent.
pub const VERTICAL_U: f64 = 1e-14;

pub fn build_curve(jets: &[WarpedJet], beta_n: f64) -> Result<CurveEmbedding, MeanCurvatureError> {
    let mut points: Vec<CurvePoint> = Vec::with_capacity(jets.len());
    for j in jets {
        let (w, u) = graph_factors(j, beta_n)?;
        let phi1 = (u / w).sqrt();
        let br = j.f2 * w + j.f1 * j.f1 * j.f / (beta_n * beta_n);
        let (f1, f2) = if u > VERTICAL_U { (Some(j.f1 / u.sqrt()), Some(w.sqrt() * br / (u * u))) } else { (None, None) };
        let tt = match points.last() {
            Some(prev) => prev.tt + 0.5 * (prev.phi1 + phi1) * (j.t - prev.t),
            None => 0.0,
        };
        points.push(CurvePoint { t: j.t, tt, big_f: beta_n * (j.f / beta_n).asin(), phi1, big_f1: f1, big_f2: f2 });
    }
    Ok(CurveEmbedding { beta_n, points })
}

impl CurveEmbedding {
    /// `max |φ' sqrt(1 + F'²) - 1|` over non-vertical points.
    pub fn arc_length_defect(&self) -> f64 {
        self.points
            .iter()
            .filter_map(|p| p.big_f1.map(|f1| (p.phi1 * (1.0 + f1 * f1).sqrt() - 1.0).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest relative gap between the closed-form `F''` and a centered
    /// difference of `F'` in `t̃`, over interior points of `[from, to]`.
    pub fn second_derivative_defect(&self, from: f64, to: f64) -> f64 {
        let pts = &self.points;
        let mut worst: f64 = 0.0;
        for i in 1..pts.len().saturating_sub(1) {
            let (a, b, c) = (&pts[i - 1], &pts[i], &pts[i + 1]);
            if b.t < from || b.t > to {
                continue;
            }
            if let (Some(fa), Some(fc), Some(f2)) = (a.big_f1, c.big_f1, b.big_f2) {
                let d = (fc - fa) / (c.tt - a.tt);
                worst = worst.max((d - f2).abs() / f2.abs().max(1e-300));
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvatureRow {
    pub t: f64,
    /// Curve principal curvature, `-F''/(1+F'²)^{3/2}`.
    pub curve: Option<f64>,
    /// Principal curvature along `S^{p-1}`.
    pub sphere: f64,
    /// Principal curvature along `S^{q-1}` as displayed (`-F' h' h`).
    pub fiber: Option<f64>,
    /// Principal curvature along `S^{q-1}` from the unit normal (`-F' h'/h`).
    pub fiber_geometric: Option<f64>,
    pub mean: Option<f64>,
    pub mean_geometric: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub margin: f64,
    pub a_corrected: f64,
    pub b_corrected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvatureReport {
    pub rows: Vec<MeanCurvatureRow>,
    pub min_margin: f64,
    pub min_margin_t: f64,
    /// `min (A - B)/(|A| + |B|)`.
    pub min_scale_free_margin: f64,
    pub passed: bool,
    /// Points where the displayed mean curvature and `A - B` disagree in sign.
    pub sign_mismatch_published: usize,
    /// Same against the corrected pair; zero up to rounding.
    pub sign_mismatch_corrected: usize,
    pub arc_length_defect: f64,
}

fn strict_sign(x: f64, scale: f64) -> i8 {
    if x > 1e-9 * scale {
        1
    } else if x < -1e-9 * scale {
        -1
    } else {
        0
    }
}

fn sign_mismatch(x: f64, sx: f64, y: f64, sy: f64) -> bool {
    let (a, b) = (strict_sign(x, sx), strict_sign(y, sy));
    a != 0 && b != 0 && a != b
}

pub fn z3_mean_curvature(pair: &ProfilePair, exec: Exec) -> Result<MeanCurvatureReport, MeanCurvatureError> {
    let (p, q, bn) = (pair.p, pair.q, pair.beta_n());
    let curve = build_curve(&pair.jets, bn)?;
    let rows = par::map_range(exec, pair.jets.len(), |i| mean_curvature_row(&pair.jets[i], &curve.points[i], bn, p, q));
    let rows: Vec<MeanCurvatureRow> = rows.into_iter().collect::<Result<_, _>>()?;
    let margins: Vec<f64> = rows.iter().map(|r| r.margin).collect();
    let (imin, min_margin) = par::argmin(&margins).unwrap_or((0, f64::NAN));
    let mut rel = f64::INFINITY;
    let (mut mis_pub, mut mis_cor) = (0, 0);
    for (r, j) in rows.iter().zip(&pair.jets) {
        let s = r.a.abs() + r.b.abs();
        if s > 0.0 {
            rel = rel.min(r.margin / s);
        }
        if let Some(m) = r.mean {
            let (w, u) = graph_factors(j, bn)?;
            let scale = m.abs().max(s / (w * u.sqrt()));
            mis_pub += sign_mismatch(m, scale, r.margin, s) as usize;
            let sc = r.a_corrected.abs() + r.b_corrected.abs();
            mis_cor += sign_mismatch(m, scale, r.a_corrected - r.b_corrected, sc) as usize;
        }
    }
    Ok(MeanCurvatureReport {
        min_margin_t: pair.jets[imin].t,
        passed: min_margin >= -CHECK_TOL,
        min_margin,
        min_scale_free_margin: rel,
        sign_mismatch_published: mis_pub,
        sign_mismatch_corrected: mis_cor,
        arc_length_defect: curve.arc_length_defect(),
        rows,
    })
}

fn mean_curvature_row(j: &WarpedJet, c: &CurvePoint, bn: f64, p: usize, q: usize) -> Result<MeanCurvatureRow, MeanCurvatureError> {
    let (a, b) = ab_terms(j, bn, p, q)?;
    let (ac, bc) = ab_terms_corrected(j, bn, p, q)?;
    let cot = 1.0 / (c.big_f / bn).tan();
    let sphere = c.phi1 * cot / bn;
    let (curve, fiber, fiber_g) = match (c.big_f1, c.big_f2) {
        (Some(f1), Some(f2)) => {
            let n = (1.0 + f1 * f1).sqrt();
            (Some(-f2 / n.powi(3)), Some(-f1 * j.h1 * j.h), Some(-f1 * j.h1 / j.h))
        }
        _ => (None, None, None),
    };
    let (pm, qm) = ((p - 1) as f64, (q - 1) as f64);
    let mean = curve.zip(fiber).map(|(k, f)| k + pm * sphere + qm * f);
    let mean_g = curve.zip(fiber_g).map(|(k, f)| k + pm * sphere + qm * f);
    Ok(MeanCurvatureRow {
        t: j.t,
        curve,
        sphere,
        fiber,
        fiber_geometric: fiber_g,
        mean,
        mean_geometric: mean_g,
        a,
        b,
        margin: a - b,
        a_corrected: ac,
        b_corrected: bc,
    })
}

/// Second fundamental forms of the collar ends, blocks `(S^{q-1}, S^{p-1})`.
pub fn interface_forms(pair: &ProfilePair) -> (BlockDiagonalForm, BlockDiagonalForm) {
    let (s, e) = (pair.first(), pair.last());
    let (p, q) = (pair.p, pair.q);
    (
        BlockDiagonalForm::new(vec![(-s.h1 / s.h, q - 1), (-s.f1 / s.f, p - 1)]),
        BlockDiagonalForm::new(vec![(e.h1 / e.h, q - 1), (e.f1 / e.f, p - 1)]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceCheck {
    pub name: String,
    pub form: BlockDiagonalForm,
    pub other: BlockDiagonalForm,
    pub sums: Vec<f64>,
    pub passed: bool,
}

/// Gluing checks at `a3` (against the `Z₂` collar end, `(λ/α) I ⊕ 0`) and
/// at `b3` (against the complementary cap of the big sphere).
pub fn interface_checks(pair: &ProfilePair) -> Result<Vec<InterfaceCheck>, MeanCurvatureError> {
    let (a3, b3) = interface_forms(pair);
    let (p, q) = (pair.p, pair.q);
    let lp = &pair.left;
    let z2_end = BlockDiagonalForm::new(vec![(lp.lambda / lp.alpha, q - 1), (0.0, p - 1)]);
    let bn = pair.beta_n();
    let cap = cap_from_geodesic(bn, bn * (PI - pair.r_over_n), p).map_err(|e| MeanCurvatureError::Cap(e.to_string()))?;
    let mut v_side = vec![(0.0, q - 1)];
    v_side.extend(cap_boundary_form(&cap).blocks.iter().map(|b| (b.coef, b.mult)));
    let v_side = BlockDiagonalForm::new(v_side);
    let mut out = vec![];
    for (name, form, other) in [("a3", a3, z2_end), ("b3", b3, v_side)] {
        let sums = perelman_form_sums(&form, &other).map_err(|e| MeanCurvatureError::Cap(e.to_string()))?;
        let passed = sums.iter().all(|s| *s >= -CHECK_TOL);
        out.push(InterfaceCheck { name: name.into(), form, other, sums, passed });
    }
    Ok(out)
}

/// Bulk metric `φ'(t)² dt² + ds² + h(t)² ds²_{q-1} + (βN)² sin²(s/βN) ds²_{p-1}`
/// in coordinates `(t, s, S^{q-1} angles, S^{p-1} angles)`.
pub fn bulk_patch(pair: &Arc<ProfilePair>) -> MetricPatch {
    let (p, q) = (pair.p, pair.q);
    let bn = pair.beta_n();
    let mut domain = vec![(f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY)];
    domain.extend(sphere_domain(q - 1));
    domain.extend(sphere_domain(p - 1));
    let pr = Arc::clone(pair);
    MetricPatch::new(domain, move |x| {
        let d = p + q;
        let j = pr.eval(x[0]);
        let xf = j.f / bn;
        let w = 1.0 - xf * xf;
        let mut g = DMatrix::zeros(d, d);
        g[(0, 0)] = ((w - j.f1 * j.f1) / w).max(0.0);
        g[(1, 1)] = 1.0;
        fill_sphere_block(&mut g, 2, &x[2..q + 1], j.h * j.h);
        fill_sphere_block(&mut g, q + 1, &x[q + 1..], (bn * (x[1] / bn).sin()).powi(2));
        g
    })
}

/// Indices of up to `n` interior grid points, chosen evenly, whose
/// `φ'` is at least `1e-6`.
fn oracle_samples(pair: &ProfilePair, n: usize) -> Vec<usize> {
    let bn = pair.beta_n();
    let ok: Vec<usize> = (1..pair.jets.len() - 1)
        .filter(|&i| graph_factors(&pair.jets[i], bn).map(|(w, u)| (u / w).sqrt() >= 1e-6).unwrap_or(false))
        .collect();
    if ok.len() <= n {
        return ok;
    }
    (0..n).map(|k| ok[k * (ok.len() - 1) / (n - 1).max(1)]).collect()
}

fn bulk_point(pair: &ProfilePair, i: usize) -> (Vec<f64>, Vec<f64>) {
    let j = &pair.jets[i];
    let bn = pair.beta_n();
    let dt = (pair.jets[i].t - pair.jets[i - 1].t).min(pair.jets[i + 1].t - pair.jets[i].t);
    let s = bn * (j.f / bn).asin();
    let mut x = vec![j.t, s];
    x.extend(sphere_sample_point(pair.q - 1));
    x.extend(sphere_sample_point(pair.p - 1));
    let mut steps = vec![(0.1 * dt).max(1e-3), 1e-3 * s];
    steps.extend(std::iter::repeat_n(1e-3, pair.p + pair.q - 2));
    (x, steps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkSample {
    pub t: f64,
    pub scalar: f64,
    /// Oracle trace of the boundary shape operator.
    pub oracle_mean: f64,
    /// Geometric mean curvature from the profile formulas.
    pub formula_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkReport {
    pub samples: Vec<BulkSample>,
    pub min_scalar: f64,
    pub scalar_positive: bool,
    /// Sign disagreements between oracle and geometric formula.
    pub sign_mismatches: usize,
    /// Largest relative gap between oracle and geometric formula.
    pub max_relative_gap: f64,
    pub skipped_vertical: usize,
}

/// Scalar curvature of the bulk metric and the oracle mean curvature of
/// the boundary `s = F(φ(t))` at up to `n` boundary points.
pub fn bulk_check(pair: &ProfilePair, n: usize, exec: Exec) -> Result<BulkReport, MeanCurvatureError> {
    let shared = Arc::new(pair.clone());
    let patch = bulk_patch(&shared);
    let idx = oracle_samples(pair, n);
    let bn = pair.beta_n();
    let mc = z3_mean_curvature(pair, Exec::Sequential)?;
    let results = par::map(exec, &idx, |&i| -> Result<BulkSample, MeanCurvatureError> {
        let (x, steps) = bulk_point(pair, i);
        let rep = numeric_curvature_steps(&patch, &x, &steps).map_err(|e| MeanCurvatureError::Oracle(e.to_string()))?;
        let pr = Arc::clone(&shared);
        let surf = GraphHypersurface::new(1, -1.0, move |y: &[f64]| bn * (pr.eval(y[0]).f / bn).asin());
        let mut y = x.clone();
        y.remove(1);
        let sff = numeric_second_fundamental_form(&patch, &surf, &y, &steps).map_err(|e| MeanCurvatureError::Oracle(e.to_string()))?;
        Ok(BulkSample { t: x[0], scalar: rep.scalar, oracle_mean: sff.mean, formula_mean: mc.rows[i].mean_geometric })
    });
    let samples: Vec<BulkSample> = results.into_iter().collect::<Result<_, _>>()?;
    let min_scalar = samples.iter().map(|s| s.scalar).fold(f64::INFINITY, f64::min);
    let mut mism = 0;
    let mut gap: f64 = 0.0;
    for s in &samples {
        if let Some(fm) = s.formula_mean {
            let scale = fm.abs().max(s.oracle_mean.abs());
            mism += sign_mismatch(fm, scale, s.oracle_mean, scale) as usize;
            if scale > 0.0 {
                gap = gap.max((fm - s.oracle_mean).abs() / scale);
            }
        }
    }
    Ok(BulkReport {
        scalar_positive: min_scalar > 0.0,
        min_scalar,
        sign_mismatches: mism,
        max_relative_gap: gap,
        skipped_vertical: pair.jets.len() - 2 - oracle_samples(pair, usize::MAX).len(),
        samples,
    })
}

/// Warping `k(t) = 1 + λ t - μ t²/2` of `S^{q-1}` on the `Z₂` collar, so
/// that `k(b2) = 1` and `k'(b2) = λ` at `b2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KProfile {
    pub lambda: f64,
    pub mu: f64,
}

impl KProfile {
    pub fn eval(&self, t: f64) -> f64 {
        1.0 + self.lambda * t - 0.5 * self.mu * t * t
    }
}

/// Disk fibre radius function `f(t, s) = (r/sin ε) sin(s sin ε / r)`.
pub fn z2_fiber(eps: f64, r: f64, s: f64) -> f64 {
    let se = eps.sin();
    r / se * (s * se / r).sin()
}

pub fn z2_boundary(eps: f64, r: f64) -> f64 {
    eps * r / eps.sin()
}

/// `dt² + ds² + k(t)² ds²_{q-1} + f(t, s)² ds²_{p-1}` in coordinates
/// `(t, s, S^{q-1} angles, S^{p-1} angles)`.
pub fn z2_patch(eps: &EpsilonProfile, k: KProfile, r: f64, p: usize, q: usize) -> MetricPatch {
    let mut domain = vec![(eps.a2 - 1.0, eps.b2 + 1.0), (0.0, f64::INFINITY)];
    domain.extend(sphere_domain(q - 1));
    domain.extend(sphere_domain(p - 1));
    let ep = eps.clone();
    MetricPatch::new(domain, move |x| {
        let d = p + q;
        let mut g = DMatrix::zeros(d, d);
        g[(0, 0)] = 1.0;
        g[(1, 1)] = 1.0;
        fill_sphere_block(&mut g, 2, &x[2..q + 1], k.eval(x[0]).powi(2));
        fill_sphere_block(&mut g, q + 1, &x[q + 1..], z2_fiber(ep.eval(x[0])[0], r, x[1]).powi(2));
        g
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Z2Point {
    pub t: f64,
    pub eps: f64,
    pub mean: f64,
    pub min_principal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z2Report {
    pub r: f64,
    pub points: Vec<Z2Point>,
    pub min_mean: f64,
    pub min_mean_t: f64,
    pub passed: bool,
}

pub fn z2_mean_curvature(
    eps: &EpsilonProfile,
    k: KProfile,
    r: f64,
    p: usize,
    q: usize,
    n: usize,
    exec: Exec,
) -> Result<Z2Report, MeanCurvatureError> {
    let patch = z2_patch(eps, k, r, p, q);
    let ts: Vec<f64> = (0..n).map(|i| eps.a2 + (eps.b2 - eps.a2) * i as f64 / (n - 1).max(1) as f64).collect();
    let ep = eps.clone();
    let surf = GraphHypersurface::new(1, -1.0, move |y: &[f64]| z2_boundary(ep.eval(y[0])[0], r));
    let results = par::map(exec, &ts, |&t| -> Result<Z2Point, MeanCurvatureError> {
        let e = eps.eval(t)[0];
        let mut y = vec![t];
        y.extend(sphere_sample_point(q - 1));
        y.extend(sphere_sample_point(p - 1));
        let mut steps = vec![1e-3 * (eps.b2 - eps.a2), 1e-3 * r];
        steps.extend(std::iter::repeat_n(1e-3, p + q - 2));
        let sff = numeric_second_fundamental_form(&patch, &surf, &y, &steps).map_err(|e| MeanCurvatureError::Oracle(e.to_string()))?;
        Ok(Z2Point { t, eps: e, mean: sff.mean, min_principal: sff.principal[0] })
    });
    let points: Vec<Z2Point> = results.into_iter().collect::<Result<_, _>>()?;
    let means: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let (i, min_mean) = par::argmin(&means).unwrap_or((0, f64::NAN));
    Ok(Z2Report { r, min_mean_t: points[i].t, passed: min_mean >= -CHECK_TOL, min_mean, points })
}

/// Largest `r` in `[lo, hi]` (to 1% by bisection in `log r`) for which the
/// `Z₂` check passes, or `None` when it fails already at `lo`.
#[allow(clippy::too_many_arguments)]
pub fn z2_threshold(
    eps: &EpsilonProfile,
    k: KProfile,
    p: usize,
    q: usize,
    lo: f64,
    hi: f64,
    n: usize,
    exec: Exec,
) -> Result<Option<f64>, MeanCurvatureError> {
    let pass = |r: f64| z2_mean_curvature(eps, k, r, p, q, n, exec).map(|rep| rep.passed);
    if !pass(lo)? {
        return Ok(None);
    }
    if pass(hi)? {
        return Ok(Some(hi));
    }
    let (mut a, mut b) = (lo, hi);
    while b / a > 1.01 {
        let m = (a * b).sqrt();
        if pass(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(a))
}
