//! Closed-form curvature of doubly warped products and a finite-difference
//! curvature oracle for metrics given in coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Value and first two derivatives of both warping functions at `t` for
/// `dt^2 + h(t)^2 ds^2_{q-1} + f(t)^2 ds^2_{p-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedJet {
    pub t: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Ricci curvature on unit vectors along `∂t`, the `S^{q-1}` factor and the
/// `S^{p-1}` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedRicci {
    pub t: f64,
    pub h: f64,
    pub f: f64,
}

impl WarpedRicci {
    pub fn min(&self) -> f64 {
        self.t.min(self.h).min(self.f)
    }
}

pub fn doubly_warped_ricci(jet: &WarpedJet, p: usize, q: usize) -> WarpedRicci {
    let (pm, qm) = ((p - 1) as f64, (q - 1) as f64);
    let WarpedJet { f, f1, f2, h, h1, h2, .. } = *jet;
    let mixed = f1 * h1 / (f * h);
    WarpedRicci {
        t: -qm * h2 / h - pm * f2 / f,
        h: -h2 / h + (qm - 1.0) * (1.0 - h1 * h1) / (h * h) - pm * mixed,
        f: -f2 / f + (pm - 1.0) * (1.0 - f1 * f1) / (f * f) - qm * mixed,
    }
}

pub fn doubly_warped_scalar(jet: &WarpedJet, p: usize, q: usize) -> f64 {
    let ric = doubly_warped_ricci(jet, p, q);
    ric.t + (q - 1) as f64 * ric.h + (p - 1) as f64 * ric.f
}

#[derive(Debug, Error, PartialEq)]
pub enum CurvatureError {
    #[error("point {coord} on axis {axis} is within {margin} of the patch boundary")]
    NearBoundary { axis: usize, coord: f64, margin: f64 },
    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite(Vec<f64>),
    #[error("point has dimension {got}, patch has {want}")]
    Dimension { got: usize, want: usize },
    #[error("hypersurface normal is degenerate")]
    DegenerateNormal,
}

type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// A metric on a coordinate box.
#[derive(Clone)]
pub struct MetricPatch {
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    g: Arc<MetricFn>,
}

impl std::fmt::Debug for MetricPatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricPatch").field("dim", &self.dim).field("domain", &self.domain).finish()
    }
}

impl MetricPatch {
    pub fn new<F>(domain: Vec<(f64, f64)>, g: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self { dim: domain.len(), domain, g: Arc::new(g) }
    }

    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        (self.g)(x)
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(vec![(-1.0, 1.0); dim], move |_| DMatrix::identity(dim, dim))
    }

    /// `S^n(r)` in polar angles `r^2 (dθ1^2 + sin^2 θ1 dθ2^2 + ...)`, with the
    /// last angle a full circle.
    pub fn round_sphere_polar(n: usize, r: f64) -> Self {
        let margin = POLE_MARGIN;
        let mut domain = vec![(margin, std::f64::consts::PI - margin); n];
        domain[n - 1] = (-std::f64::consts::PI, std::f64::consts::PI);
        Self::new(domain, move |x| {
            let mut g = DMatrix::zeros(n, n);
            let mut w = r * r;
            for i in 0..n {
                g[(i, i)] = w;
                w *= x[i].sin().powi(2);
            }
            g
        })
    }

    /// `S^n(r)` in stereographic coordinates `4 r^4 / (r^2 + |x|^2)^2 δ`.
    pub fn round_sphere_stereographic(n: usize, r: f64) -> Self {
        Self::new(vec![(-3.0 * r, 3.0 * r); n], move |x| {
            let s: f64 = x.iter().map(|v| v * v).sum();
            let c = 4.0 * r.powi(4) / (r * r + s).powi(2);
            DMatrix::identity(n, n) * c
        })
    }

    /// Doubly warped product `dt^2 + h^2 ds^2_{q-1} + f^2 ds^2_{p-1}` in
    /// coordinates `(t, polar angles of S^{q-1}, polar angles of S^{p-1})`.
    pub fn doubly_warped<F, H>(p: usize, q: usize, t_range: (f64, f64), f: F, h: H) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let dim = p + q - 1;
        let mut domain = vec![t_range];
        domain.extend(sphere_domain(q - 1));
        domain.extend(sphere_domain(p - 1));
        Self::new(domain, move |x| {
            let mut g = DMatrix::zeros(dim, dim);
            g[(0, 0)] = 1.0;
            let (fv, hv) = (f(x[0]), h(x[0]));
            fill_sphere_block(&mut g, 1, &x[1..q], hv * hv);
            fill_sphere_block(&mut g, q, &x[q..], fv * fv);
            g
        })
    }
}

/// Angular margin kept away from the poles of polar charts.
pub const POLE_MARGIN: f64 = 0.05;

pub(crate) fn sphere_domain(n: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(POLE_MARGIN, std::f64::consts::PI - POLE_MARGIN); n];
    if n > 0 {
        d[n - 1] = (-std::f64::consts::PI, std::f64::consts::PI);
    }
    d
}

/// Writes `scale * (round unit metric of S^n in polar angles)` on the
/// diagonal starting at `offset`, where `n = angles.len()`.
pub(crate) fn fill_sphere_block(g: &mut DMatrix<f64>, offset: usize, angles: &[f64], scale: f64) {
    let mut w = scale;
    for (i, a) in angles.iter().enumerate() {
        g[(offset + i, offset + i)] = w;
        w *= a.sin().powi(2);
    }
}

/// A reasonable interior point of a polar chart of `S^n`.
pub fn sphere_sample_point(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { 0.3 } else { 1.1 + 0.1 * i as f64 }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    /// Ricci tensor in coordinates.
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
    /// Smallest eigenvalue of Ricci measured against `g`.
    pub min_ricci_eigenvalue: f64,
}

/// First and second coordinate derivatives of `g` at a point.
struct MetricDerivatives {
    g: DMatrix<f64>,
    dg: Vec<DMatrix<f64>>,
    ddg: Vec<Vec<DMatrix<f64>>>,
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn raw_derivatives(patch: &MetricPatch, x: &[f64], steps: &[f64]) -> (Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>) {
    let d = patch.dim;
    let g0 = patch.metric(x);
    let mut dg = Vec::with_capacity(d);
    let mut plus = Vec::with_capacity(d);
    let mut minus = Vec::with_capacity(d);
    for (a, &h) in steps.iter().enumerate().take(d) {
        let gp = patch.metric(&shifted(x, &[(a, h)]));
        let gm = patch.metric(&shifted(x, &[(a, -h)]));
        dg.push((&gp - &gm) / (2.0 * h));
        plus.push(gp);
        minus.push(gm);
    }
    let mut ddg = vec![vec![DMatrix::zeros(d, d); d]; d];
    for a in 0..d {
        ddg[a][a] = (&plus[a] - &g0 * 2.0 + &minus[a]) / (steps[a] * steps[a]);
        for b in 0..a {
            let (ha, hb) = (steps[a], steps[b]);
            let pp = patch.metric(&shifted(x, &[(a, ha), (b, hb)]));
            let pm = patch.metric(&shifted(x, &[(a, ha), (b, -hb)]));
            let mp = patch.metric(&shifted(x, &[(a, -ha), (b, hb)]));
            let mm = patch.metric(&shifted(x, &[(a, -ha), (b, -hb)]));
            let m = (pp - pm - mp + mm) / (4.0 * ha * hb);
            ddg[b][a] = m.clone();
            ddg[a][b] = m;
        }
    }
    (dg, ddg)
}

fn derivatives(patch: &MetricPatch, x: &[f64], steps: &[f64]) -> MetricDerivatives {
    let half: Vec<f64> = steps.iter().map(|s| s / 2.0).collect();
    let (dg1, ddg1) = raw_derivatives(patch, x, steps);
    let (dg2, ddg2) = raw_derivatives(patch, x, &half);
    let rich = |coarse: &DMatrix<f64>, fine: &DMatrix<f64>| (fine * 4.0 - coarse) / 3.0;
    let dg = dg1.iter().zip(&dg2).map(|(c, f)| rich(c, f)).collect();
    let ddg = ddg1
        .iter()
        .zip(&ddg2)
        .map(|(rc, rf)| rc.iter().zip(rf).map(|(c, f)| rich(c, f)).collect())
        .collect();
    MetricDerivatives { g: patch.metric(x), dg, ddg }
}

fn check_point(patch: &MetricPatch, x: &[f64], steps: &[f64]) -> Result<(), CurvatureError> {
    if x.len() != patch.dim || steps.len() != patch.dim {
        return Err(CurvatureError::Dimension { got: x.len(), want: patch.dim });
    }
    for (axis, ((&c, &(lo, hi)), &s)) in x.iter().zip(&patch.domain).zip(steps).enumerate() {
        if c - lo < 2.0 * s || hi - c < 2.0 * s {
            return Err(CurvatureError::NearBoundary { axis, coord: c, margin: 2.0 * s });
        }
    }
    Ok(())
}

/// Christoffel symbols `gamma[e][b][c] = Γ^e_{bc}`.
fn christoffel(ginv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Vec<Vec<Vec<f64>>> {
    let d = ginv.nrows();
    let mut lower = vec![vec![vec![0.0; d]; d]; d];
    for k in 0..d {
        for b in 0..d {
            for c in 0..d {
                lower[k][b][c] = 0.5 * (dg[b][(k, c)] + dg[c][(k, b)] - dg[k][(b, c)]);
            }
        }
    }
    let mut gamma = vec![vec![vec![0.0; d]; d]; d];
    for e in 0..d {
        for b in 0..d {
            for c in 0..d {
                gamma[e][b][c] = (0..d).map(|k| ginv[(e, k)] * lower[k][b][c]).sum();
            }
        }
    }
    gamma
}

fn cholesky(g: &DMatrix<f64>, x: &[f64]) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>, CurvatureError> {
    let sym = (g + g.transpose()) * 0.5;
    sym.cholesky().ok_or_else(|| CurvatureError::NotPositiveDefinite(x.to_vec()))
}

pub const DEFAULT_STEP: f64 = 1e-3;

pub fn numeric_curvature(patch: &MetricPatch, point: &[f64], step: f64) -> Result<CurvatureReport, CurvatureError> {
    numeric_curvature_steps(patch, point, &vec![step; patch.dim])
}

/// As [`numeric_curvature`] with a separate finite-difference step per axis,
/// for patches whose axes carry very different length scales.
pub fn numeric_curvature_steps(
    patch: &MetricPatch,
    point: &[f64],
    steps: &[f64],
) -> Result<CurvatureReport, CurvatureError> {
    check_point(patch, point, steps)?;
    let d = patch.dim;
    let md = derivatives(patch, point, steps);
    let chol = cholesky(&md.g, point)?;
    let ginv = chol.inverse();
    let gamma = christoffel(&ginv, &md.dg);
    let g = &md.g;
    // R_abcd with the convention that round spheres have positive Ricci.
    let riem = |a: usize, b: usize, c: usize, dd: usize| -> f64 {
        let second = 0.5
            * (md.ddg[b][c][(a, dd)] + md.ddg[a][dd][(b, c)] - md.ddg[a][c][(b, dd)] - md.ddg[b][dd][(a, c)]);
        let mut quad = 0.0;
        for e in 0..d {
            for f in 0..d {
                quad += g[(e, f)] * (gamma[e][b][c] * gamma[f][a][dd] - gamma[e][b][dd] * gamma[f][a][c]);
            }
        }
        second + quad
    };
    let mut ric = DMatrix::zeros(d, d);
    for b in 0..d {
        for dd in b..d {
            let mut s = 0.0;
            for a in 0..d {
                for c in 0..d {
                    if ginv[(a, c)] != 0.0 {
                        s += ginv[(a, c)] * riem(a, b, c, dd);
                    }
                }
            }
            ric[(b, dd)] = s;
            ric[(dd, b)] = s;
        }
    }
    let scalar = (0..d).map(|a| (0..d).map(|b| ginv[(a, b)] * ric[(a, b)]).sum::<f64>()).sum();
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| CurvatureError::NotPositiveDefinite(point.to_vec()))?;
    let normalized = &linv * &ric * linv.transpose();
    let eig = nalgebra::SymmetricEigen::new((&normalized + normalized.transpose()) * 0.5);
    let min_ricci_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(CurvatureReport {
        point: point.to_vec(),
        ricci: (0..d).map(|i| (0..d).map(|j| ric[(i, j)]).collect()).collect(),
        scalar,
        min_ricci_eigenvalue,
    })
}

type GraphFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Hypersurface `x_k = phi(y)` where `y` lists the remaining coordinates in
/// order. `inward` is `+1` when the inward normal points toward increasing
/// `x_k` and `-1` otherwise.
#[derive(Clone)]
pub struct GraphHypersurface {
    pub k: usize,
    pub inward: f64,
    phi: Arc<GraphFn>,
}

impl GraphHypersurface {
    pub fn new<F>(k: usize, inward: f64, phi: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { k, inward: inward.signum(), phi: Arc::new(phi) }
    }

    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        x.insert(self.k, (self.phi)(y));
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFundamentalForm {
    /// `II(X_i, X_j)` in the coordinate tangent basis `X_i = ∂_{y_i} + ∂_i phi ∂_k`.
    pub matrix: Vec<Vec<f64>>,
    pub induced_metric: Vec<Vec<f64>>,
    /// Eigenvalues of the shape operator, ascending.
    pub principal: Vec<f64>,
    /// Trace of the shape operator.
    pub mean: f64,
}

/// `II(X, Y) = -g(∇_X ν, Y)` for the inward unit normal `ν`.
pub fn numeric_second_fundamental_form(
    patch: &MetricPatch,
    surf: &GraphHypersurface,
    y: &[f64],
    steps: &[f64],
) -> Result<SecondFundamentalForm, CurvatureError> {
    let d = patch.dim;
    let m = d - 1;
    if y.len() != m || steps.len() != d {
        return Err(CurvatureError::Dimension { got: y.len() + 1, want: d });
    }
    let x = surf.embed(y);
    check_point(patch, &x, steps)?;
    let ysteps: Vec<f64> = (0..d).filter(|&i| i != surf.k).map(|i| steps[i]).collect();
    let phi = |v: &[f64]| (surf.phi)(v);
    // first and second derivatives of phi with one Richardson level
    let grad_hess = |hs: &[f64]| {
        let mut grad = vec![0.0; m];
        let mut hess = vec![vec![0.0; m]; m];
        let p0 = phi(y);
        for a in 0..m {
            let pp = phi(&shifted(y, &[(a, hs[a])]));
            let pm = phi(&shifted(y, &[(a, -hs[a])]));
            grad[a] = (pp - pm) / (2.0 * hs[a]);
            hess[a][a] = (pp - 2.0 * p0 + pm) / (hs[a] * hs[a]);
            for b in 0..a {
                let v = (phi(&shifted(y, &[(a, hs[a]), (b, hs[b])])) - phi(&shifted(y, &[(a, hs[a]), (b, -hs[b])]))
                    - phi(&shifted(y, &[(a, -hs[a]), (b, hs[b])]))
                    + phi(&shifted(y, &[(a, -hs[a]), (b, -hs[b])])))
                    / (4.0 * hs[a] * hs[b]);
                hess[a][b] = v;
                hess[b][a] = v;
            }
        }
        (grad, hess)
    };
    let half: Vec<f64> = ysteps.iter().map(|s| s / 2.0).collect();
    let (g1, h1) = grad_hess(&ysteps);
    let (g2, h2) = grad_hess(&half);
    let grad: Vec<f64> = g1.iter().zip(&g2).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    let hess: Vec<Vec<f64>> =
        h1.iter().zip(&h2).map(|(rc, rf)| rc.iter().zip(rf).map(|(c, f)| (4.0 * f - c) / 3.0).collect()).collect();

    let md = derivatives(patch, &x, steps);
    let chol = cholesky(&md.g, &x)?;
    let ginv = chol.inverse();
    let gamma = christoffel(&ginv, &md.dg);
    // full-coordinate index of tangent coordinate i
    let full = |i: usize| if i < surf.k { i } else { i + 1 };
    // dF for F = x_k - phi(y)
    let mut df = vec![0.0; d];
    df[surf.k] = 1.0;
    for i in 0..m {
        df[full(i)] = -grad[i];
    }
    let norm2: f64 = (0..d).map(|a| (0..d).map(|b| df[a] * ginv[(a, b)] * df[b]).sum::<f64>()).sum();
    if !(norm2 > 0.0) {
        return Err(CurvatureError::DegenerateNormal);
    }
    let norm = norm2.sqrt();
    let mut hess_f = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut v = 0.0;
            if a != surf.k && b != surf.k {
                let (ia, ib) = (if a < surf.k { a } else { a - 1 }, if b < surf.k { b } else { b - 1 });
                v -= hess[ia][ib];
            }
            for c in 0..d {
                v -= gamma[c][a][b] * df[c];
            }
            hess_f[(a, b)] = v;
        }
    }
    // tangent basis in full coordinates
    let mut basis = DMatrix::zeros(d, m);
    for i in 0..m {
        basis[(full(i), i)] = 1.0;
        basis[(surf.k, i)] = grad[i];
    }
    let two = basis.transpose() * &hess_f * &basis * (-surf.inward / norm);
    let two = (&two + two.transpose()) * 0.5;
    let induced = basis.transpose() * &md.g * &basis;
    let induced = (&induced + induced.transpose()) * 0.5;
    let ichol = induced.clone().cholesky().ok_or(CurvatureError::DegenerateNormal)?;
    let linv = ichol.l().try_inverse().ok_or(CurvatureError::DegenerateNormal)?;
    let shape = &linv * &two * linv.transpose();
    let eig = nalgebra::SymmetricEigen::new((&shape + shape.transpose()) * 0.5);
    let mut principal: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    principal.sort_by(|a, b| a.total_cmp(b));
    let mean = principal.iter().sum();
    let to_rows = |mat: &DMatrix<f64>| (0..m).map(|i| (0..m).map(|j| mat[(i, j)]).collect()).collect();
    Ok(SecondFundamentalForm { matrix: to_rows(&two), induced_metric: to_rows(&induced), principal, mean })
}

/// Convenience: curvature vector of the oracle as a `DVector` of diagonal
/// Ricci entries measured on unit coordinate vectors.
pub fn unit_diagonal_ricci(report: &CurvatureReport, g: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(g.nrows(), (0..g.nrows()).map(|i| report.ricci[i][i] / g[(i, i)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn flat_patch() {
        let rep = numeric_curvature(&MetricPatch::euclidean(3), &[0.1, 0.2, -0.3], DEFAULT_STEP).unwrap();
        assert!(rep.scalar.abs() < 1e-10);
        assert!(rep.ricci.iter().flatten().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn round_s3_polar_and_stereo() {
        for r in [0.5, 1.0, 2.0] {
            let pol = numeric_curvature(&MetricPatch::round_sphere_polar(3, r), &sphere_sample_point(3), DEFAULT_STEP)
                .unwrap();
            let st =
                numeric_curvature(&MetricPatch::round_sphere_stereographic(3, r), &[0.1 * r, -0.2 * r, 0.3 * r], DEFAULT_STEP)
                    .unwrap();
            let want = 6.0 / (r * r);
            assert!(rel(pol.scalar, want) < 1e-6, "{} vs {want}", pol.scalar);
            assert!(rel(st.scalar, want) < 1e-6, "{} vs {want}", st.scalar);
            assert!(rel(pol.min_ricci_eigenvalue, 2.0 / (r * r)) < 1e-6);
        }
    }

    #[test]
    fn cylinder_degenerate_line() {
        let b = 3.0;
        let patch = MetricPatch::new(vec![(-1.0, 1.0), (0.05, 3.0), (-3.0, 3.0)], move |x| {
            let mut g = DMatrix::zeros(3, 3);
            g[(0, 0)] = 1.0;
            g[(1, 1)] = b * b;
            g[(2, 2)] = b * b * x[1].sin().powi(2);
            g
        });
        let rep = numeric_curvature(&patch, &[0.0, 1.0, 0.2], DEFAULT_STEP).unwrap();
        assert!(rel(rep.scalar, 2.0 / (b * b)) < 1e-6);
        assert!(rep.min_ricci_eigenvalue.abs() < 1e-9);
    }

    #[test]
    fn boundary_and_spd_errors() {
        let e = numeric_curvature(&MetricPatch::euclidean(2), &[0.9995, 0.0], DEFAULT_STEP);
        assert!(matches!(e, Err(CurvatureError::NearBoundary { axis: 0, .. })));
        let bad = MetricPatch::new(vec![(-1.0, 1.0); 2], |_| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert!(matches!(numeric_curvature(&bad, &[0.0, 0.0], DEFAULT_STEP), Err(CurvatureError::NotPositiveDefinite(_))));
    }

    #[test]
    fn warped_sphere_slice() {
        // f = sin t, h = cos t gives the unit round sphere
        for p in 2..5 {
            let jet = WarpedJet {
                t: FRAC_PI_4,
                f: FRAC_PI_4.sin(),
                f1: FRAC_PI_4.cos(),
                f2: -FRAC_PI_4.sin(),
                h: FRAC_PI_4.cos(),
                h1: -FRAC_PI_4.sin(),
                h2: -FRAC_PI_4.cos(),
            };
            let ric = doubly_warped_ricci(&jet, p, p);
            let n = (2 * p - 1) as f64;
            for v in [ric.t, ric.h, ric.f] {
                assert!((v - (n - 1.0)).abs() < 1e-12);
            }
            assert!((doubly_warped_scalar(&jet, p, p) - n * (n - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn warped_products_of_spheres() {
        let jet = WarpedJet { t: 0.0, f: 1.0, f1: 0.0, f2: 0.0, h: 1.0, h1: 0.0, h2: 0.0 };
        let ric = doubly_warped_ricci(&jet, 4, 3);
        assert_eq!((ric.t, ric.h, ric.f), (0.0, 1.0, 2.0));
        assert_eq!(doubly_warped_scalar(&jet, 4, 3), 2.0 + 6.0);
    }

    #[test]
    fn warped_matches_oracle_slice() {
        let (p, q) = (3, 2);
        let r = 1.5;
        let patch = MetricPatch::doubly_warped(p, q, (0.1, 4.0), move |t| r * (t / r).sin(), |_| 1.0);
        let t = 1.2;
        let mut x = vec![t];
        x.extend(sphere_sample_point(q - 1));
        x.extend(sphere_sample_point(p - 1));
        let rep = numeric_curvature(&patch, &x, DEFAULT_STEP).unwrap();
        let jet =
            WarpedJet { t, f: r * (t / r).sin(), f1: (t / r).cos(), f2: -(t / r).sin() / r, h: 1.0, h1: 0.0, h2: 0.0 };
        let ric = doubly_warped_ricci(&jet, p, q);
        assert!((ric.f - (p - 1) as f64 / (r * r)).abs() < 1e-12);
        assert!(rel(rep.scalar, doubly_warped_scalar(&jet, p, q)) < 1e-6);
        let g = patch.metric(&x);
        let diag = unit_diagonal_ricci(&rep, &g);
        assert!((diag[0] - ric.t).abs() < 1e-6 && (diag[q] - ric.f).abs() < 1e-6);
    }

    fn polar_s2(r: f64) -> MetricPatch {
        MetricPatch::round_sphere_polar(2, r)
    }

    #[test]
    fn cap_boundary_via_oracle() {
        // boundary of the cap θ1 <= R/r: graph θ1 = R/r over θ2, inward is decreasing θ1
        for (r, big_r) in [(1.0, FRAC_PI_4), (2.0, 1.0), (1.0, 2.0)] {
            let surf = GraphHypersurface::new(0, -1.0, move |_| big_r / r);
            let sff = numeric_second_fundamental_form(&polar_s2(r), &surf, &[0.4], &[1e-3, 1e-3]).unwrap();
            let want = (big_r / r).cos() / (big_r / r).sin() / r;
            assert!((sff.mean - want).abs() < 1e-7, "{} vs {want}", sff.mean);
        }
        let eq = GraphHypersurface::new(0, -1.0, |_| FRAC_PI_2);
        let sff = numeric_second_fundamental_form(&polar_s2(1.0), &eq, &[0.4], &[1e-3, 1e-3]).unwrap();
        assert!(sff.mean.abs() < 1e-8);
    }

    #[test]
    fn euclidean_circle() {
        let a = 0.7;
        let patch = MetricPatch::new(vec![(-2.0, 2.0); 2], |_| DMatrix::identity(2, 2));
        let surf = GraphHypersurface::new(1, -1.0, move |y| (a * a - y[0] * y[0]).sqrt());
        for x in [0.0, 0.3] {
            let sff = numeric_second_fundamental_form(&patch, &surf, &[x], &[1e-3, 1e-3]).unwrap();
            assert!((sff.mean - 1.0 / a).abs() < 1e-7, "{}", sff.mean);
        }
    }
}
