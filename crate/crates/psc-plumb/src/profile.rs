//! Warping profiles `(f, h)` for the boundary collar: the left piece from
//! the `h0`/`f_C` ODEs, a smooth transition window, and a right piece that
//! reaches the round-sphere jets at `b3`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

use crate::curvature::{doubly_warped_ricci, WarpedJet};
use crate::mean_curvature::ab_terms;
use crate::ode::{Dopri5, OdeError, OdeOptions};
use crate::par::{self, Exec};
use crate::CHECK_TOL;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("boundary condition {0} violated")]
    Clause(&'static str),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no feasible parameters within budget; best ricci {best_ricci:e}, best margin {best_margin:e}")]
    Budget { best_ricci: f64, best_margin: f64 },
    #[error("profile csv: {0}")]
    Csv(String),
}

/// Order 7 smoothstep on `[0, 1]` with its first two derivatives.
pub fn smoothstep7(x: f64) -> [f64; 3] {
    if x <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if x >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let y = 1.0 - x;
    [
        x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3)),
        140.0 * x.powi(3) * y.powi(3),
        420.0 * x * x * y * y * (1.0 - 2.0 * x),
    ]
}

/// Quintic Hermite interpolation of `(y, y', y'')` between two nodes.
pub fn hermite5(t0: f64, t1: f64, a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    let h = t1 - t0;
    let u = (t - t0) / h;
    let (u2, u3, u4, u5) = (u * u, u.powi(3), u.powi(4), u.powi(5));
    // basis values, first and second u-derivatives
    let basis = [
        [1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5, -30.0 * u2 + 60.0 * u3 - 30.0 * u4, -60.0 * u + 180.0 * u2 - 120.0 * u3],
        [u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5, 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4, -36.0 * u + 96.0 * u2 - 60.0 * u3],
        [
            0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5),
            0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4),
            0.5 * (2.0 - 18.0 * u + 36.0 * u2 - 20.0 * u3),
        ],
        [10.0 * u3 - 15.0 * u4 + 6.0 * u5, 30.0 * u2 - 60.0 * u3 + 30.0 * u4, 60.0 * u - 180.0 * u2 + 120.0 * u3],
        [-4.0 * u3 + 7.0 * u4 - 3.0 * u5, -12.0 * u2 + 28.0 * u3 - 15.0 * u4, -24.0 * u + 84.0 * u2 - 60.0 * u3],
        [0.5 * (u3 - 2.0 * u4 + u5), 0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4), 0.5 * (6.0 * u - 24.0 * u2 + 20.0 * u3)],
    ];
    let w = [a[0], h * a[1], h * h * a[2], b[0], h * b[1], h * h * b[2]];
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let s: f64 = (0..6).map(|i| w[i] * basis[i][k]).sum();
        *o = s / h.powi(k as i32);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeftParams {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "C")]
    pub c_coef: f64,
    pub a3: f64,
    pub r: f64,
    pub alpha: f64,
}

impl LeftParams {
    pub fn new(lambda: f64, a: f64, b: f64, c_coef: f64) -> Result<Self, ProfileError> {
        if !(lambda > 0.0 && lambda < 0.5) {
            return Err(ProfileError::Domain(format!("lambda = {lambda} must lie in (0, 1/2)")));
        }
        if !(a > 0.0) {
            return Err(ProfileError::Domain(format!("a = {a} must be positive")));
        }
        if a > 1.0 {
            return Err(ProfileError::Clause("bc1.h_prime"));
        }
        if !(b > 0.0) {
            return Err(ProfileError::Domain(format!("b = {b} must be positive")));
        }
        if !(c_coef > 0.0 && c_coef < 1.0) {
            return Err(ProfileError::Domain(format!("C = {c_coef} must lie in (0, 1)")));
        }
        let alpha = a * h0_start(lambda);
        Ok(Self { lambda, a, b, c_coef, a3: 0.0, r: b / alpha, alpha })
    }
}

pub fn h0_start(lambda: f64) -> f64 {
    (-2.0 * lambda.ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RightParams {
    pub t1: f64,
    /// End of the transition window, where the right piece starts.
    pub ts: f64,
    pub b3: f64,
    pub beta: f64,
    pub rho: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

impl RightParams {
    pub fn beta_n(&self) -> f64 {
        self.beta * self.n
    }
}

/// `h0, h0', h0''` and `f_C, f_C', f_C''` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseJet {
    pub t: f64,
    pub h0: [f64; 3],
    pub fc: [f64; 3],
}

fn base_rhs(c_coef: f64) -> impl Fn(f64, &[f64], &mut [f64]) {
    move |_t, y, dy| {
        let e = (-0.5 * y[0] * y[0]).exp();
        dy[0] = e;
        dy[1] = y[2];
        dy[2] = c_coef * e * e * y[1];
    }
}

fn base_jet(t: f64, y: &[f64], c_coef: f64) -> BaseJet {
    let e = (-0.5 * y[0] * y[0]).exp();
    BaseJet { t, h0: [y[0], e, -y[0] * e * e], fc: [y[1], y[2], c_coef * e * e * y[1]] }
}

/// Joint solution of `h0' = exp(-h0^2/2)`, `f_C'' = C exp(-h0^2) f_C` from
/// `a3 = 0`, sampled at increasing `times`.
pub fn integrate_base(lambda: f64, c_coef: f64, times: &[f64]) -> Result<Vec<BaseJet>, ProfileError> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(ProfileError::Domain(format!("lambda = {lambda} must lie in (0, 1/2)")));
    }
    if !(c_coef > 0.0 && c_coef < 1.0) {
        return Err(ProfileError::Domain(format!("C = {c_coef} must lie in (0, 1)")));
    }
    if times.iter().any(|&t| t < 0.0) {
        return Err(ProfileError::Domain("sample times must be >= a3 = 0".into()));
    }
    let mut ode = Dopri5::new(base_rhs(c_coef), 0.0, &[h0_start(lambda), 1.0, 0.0], OdeOptions::default());
    Ok(ode.sample(times)?.iter().zip(times).map(|(y, &t)| base_jet(t, y, c_coef)).collect())
}

/// `h0` and its derivatives at `times`.
pub fn integrate_h0(lambda: f64, times: &[f64]) -> Result<Vec<[f64; 3]>, ProfileError> {
    // h0 does not depend on C
    Ok(integrate_base(lambda, 0.5, times)?.into_iter().map(|j| j.h0).collect())
}

/// `f_C` and its derivatives at `times`.
pub fn integrate_fc(c_coef: f64, lambda: f64, times: &[f64]) -> Result<Vec<[f64; 3]>, ProfileError> {
    Ok(integrate_base(lambda, c_coef, times)?.into_iter().map(|j| j.fc).collect())
}

/// First time where `b f_C'` reaches `slope`.
pub fn slope_crossing(lp: &LeftParams, slope: f64, t_max: f64) -> Result<f64, ProfileError> {
    let mut ode = Dopri5::new(base_rhs(lp.c_coef), 0.0, &[h0_start(lp.lambda), 1.0, 0.0], OdeOptions::default());
    let b = lp.b;
    ode.find_crossing(|_, y| slope - b * y[2], t_max).map_err(|e| match e {
        OdeError::NoCrossing(t) => ProfileError::Infeasible(format!("b f_C' stays below {slope} up to t = {t:e}")),
        other => other.into(),
    })
}

/// Left piece `h = a h0`, `f = b f_C` as warped jets.
pub fn left_jet(lp: &LeftParams, base: &BaseJet) -> WarpedJet {
    WarpedJet {
        t: base.t,
        f: lp.b * base.fc[0],
        f1: lp.b * base.fc[1],
        f2: lp.b * base.fc[2],
        h: lp.a * base.h0[0],
        h1: lp.a * base.h0[1],
        h2: lp.a * base.h0[2],
    }
}

/// Angular radius `ε(t)` on the `Z₂` collar `[a2, b2]`: `π/2` up to `τ1`,
/// `eps_end` from `τ2`, order 7 smoothstep between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonProfile {
    pub a2: f64,
    pub b2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub eps_end: f64,
}

impl EpsilonProfile {
    pub fn new(a2: f64, b2: f64, eps_end: f64) -> Result<Self, ProfileError> {
        if !(b2 > a2) {
            return Err(ProfileError::Domain(format!("empty collar [{a2}, {b2}]")));
        }
        if !(eps_end > 0.0 && eps_end < FRAC_PI_2) {
            return Err(ProfileError::Domain(format!("eps(b2) = {eps_end} must lie in (0, pi/2)")));
        }
        let l = b2 - a2;
        Ok(Self { a2, b2, tau1: a2 + 0.3 * l, tau2: a2 + 0.7 * l, eps_end })
    }

    /// `(ε, ε', ε'')` at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let w = self.tau2 - self.tau1;
        let [s, s1, s2] = smoothstep7((t - self.tau1) / w);
        let d = self.eps_end - FRAC_PI_2;
        if s >= 1.0 {
            return [self.eps_end, 0.0, 0.0];
        }
        [FRAC_PI_2 + d * s, d * s1 / w, d * s2 / (w * w)]
    }

    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let t = self.a2 + (self.b2 - self.a2) * i as f64 / (n - 1).max(1) as f64;
                (t, self.eval(t)[0])
            })
            .collect()
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Transition window starting at `t1`: on `[t1, t1 + width]` the second
/// derivative is `(1-χ) f_l'' + χ k_end` with `χ` the order 7 smoothstep,
/// so it stays between the two one-sided values. `left` must be defined on
/// the whole window. Returns `(f, f', f'')` at `times`; times `<= t1` get
/// the left piece unchanged.
pub fn smooth_c1_join<L>(left: L, t1: f64, width: f64, k_end: f64, times: &[f64]) -> Result<Vec<[f64; 3]>, ProfileError>
where
    L: Fn(f64) -> [f64; 3],
{
    if !(width > 0.0) {
        return Err(ProfileError::Domain(format!("window width {width} must be positive")));
    }
    if times.iter().any(|&t| t > t1 + width * (1.0 + 1e-12)) {
        return Err(ProfileError::Domain("sample beyond the transition window".into()));
    }
    let chi = |t: f64| smoothstep7((t - t1) / width)[0];
    // deviation e = f - f_l with e'' = g = χ (k_end - f_l''), by Gauss-Legendre
    // quadrature: e'(t) = ∫ g and e(t) = ∫ (t - s) g ds from t1
    let g = |s: f64| chi(s) * (k_end - left(s)[2]);
    let (mut i0, mut i1, mut at) = (0.0, 0.0, t1);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let l = left(t);
        if t <= t1 {
            out.push(l);
            continue;
        }
        if t < at {
            return Err(ProfileError::Domain("window sample times must increase".into()));
        }
        let pieces = ((4096.0 * (t - at) / width).ceil() as usize).max(4);
        let h = (t - at) / pieces as f64;
        for k in 0..pieces {
            let (lo, hi) = (at + k as f64 * h, at + (k + 1) as f64 * h);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, wt) in GAUSS5 {
                let sx = mid + half * x;
                let gv = g(sx) * wt * half;
                i0 += gv;
                i1 += (sx - t1) * gv;
            }
        }
        at = t;
        let c = chi(t);
        out.push([l[0] + (t - t1) * i0 - i1, l[1] + i0, (1.0 - c) * l[2] + c * k_end]);
    }
    Ok(out)
}

/// Closed-form right piece in the polar angle `σ = s/(βN)` of the big
/// sphere: `f = βN sin σ`, `f' = c + D K0/(K0 + D)` with `D = cos σ - c`,
/// `c = cos(R/N)`. The boundary curve turns vertical exactly at `σ = R/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RightPiece {
    pub beta_n: f64,
    pub r_over_n: f64,
    pub c: f64,
    pub k0: f64,
    pub sigma_s: f64,
    pub t_s: f64,
    /// `h'` at the start of the piece.
    pub h1_s: f64,
    pub h_s: f64,
    pub tau: f64,
    pub cos_theta_s: f64,
}

impl RightPiece {
    /// Right piece continuing the jet `(f, f')` and `(h, h', h'')` at `t_s`.
    pub fn new(beta_n: f64, r_over_n: f64, t_s: f64, f: [f64; 2], h: [f64; 3]) -> Result<Self, ProfileError> {
        let c = r_over_n.cos();
        if !(r_over_n > 0.0 && r_over_n < FRAC_PI_2) {
            return Err(ProfileError::Domain(format!("R/N = {r_over_n} must lie in (0, pi/2)")));
        }
        if !(f[0] > 0.0 && f[0] < beta_n * r_over_n.sin()) {
            return Err(ProfileError::Infeasible(format!("f = {:e} not below beta N sin(R/N) = {:e}", f[0], beta_n * r_over_n.sin())));
        }
        let sigma_s = (f[0] / beta_n).asin();
        let d1 = sigma_s.cos() - c;
        let delta = f[1] - c;
        if !(delta > 0.0) {
            return Err(ProfileError::Infeasible(format!("slope {} not above cos(R/N) = {c}", f[1])));
        }
        if !(delta < d1) {
            return Err(ProfileError::Infeasible(format!("slope {} leaves no room below cos(sigma) = {}", f[1], sigma_s.cos())));
        }
        if !(h[1] > 0.0 && h[2] < 0.0) {
            return Err(ProfileError::Infeasible("h must be increasing and concave at the start of the right piece".into()));
        }
        let k0 = delta * d1 / (d1 - delta);
        let mut rp = Self { beta_n, r_over_n, c, k0, sigma_s, t_s, h1_s: h[1], h_s: h[0], tau: 0.0, cos_theta_s: 0.0 };
        rp.cos_theta_s = rp.cos_theta(sigma_s);
        // C² match of h at t_s
        let rate = h[2] / h[1] - rp.dcos_theta_dt(sigma_s) / rp.cos_theta_s;
        if !(rate < 0.0) {
            return Err(ProfileError::Infeasible("h cannot be matched to second order at the start of the right piece".into()));
        }
        rp.tau = -2.0 / rate;
        Ok(rp)
    }

    fn d(&self, s: f64) -> f64 {
        s.cos() - self.c
    }

    pub fn f(&self, s: f64) -> f64 {
        self.beta_n * s.sin()
    }

    pub fn f1(&self, s: f64) -> f64 {
        let d = self.d(s);
        self.c + d * self.k0 / (self.k0 + d)
    }

    /// `df'/dσ`.
    pub fn df1(&self, s: f64) -> f64 {
        let k = self.k0 / (self.k0 + self.d(s));
        -s.sin() * k * k
    }

    pub fn sin_theta(&self, s: f64) -> f64 {
        self.f1(s) / s.cos()
    }

    pub fn cos_theta(&self, s: f64) -> f64 {
        let d = self.d(s);
        d * ((s.cos() + self.f1(s)) / (self.k0 + d)).sqrt() / s.cos()
    }

    pub fn dcos_theta_dsigma(&self, s: f64) -> f64 {
        let (sn, cs) = s.sin_cos();
        let d = self.d(s);
        let kd = self.k0 + d;
        let g = (cs + self.f1(s)) / kd;
        let dg = ((-sn + self.df1(s)) * kd + (cs + self.f1(s)) * sn) / (kd * kd);
        let sq = g.sqrt();
        (-sn * sq + d * dg / (2.0 * sq)) / cs + self.cos_theta(s) * sn / cs
    }

    pub fn dsigma_dt(&self, s: f64) -> f64 {
        self.f1(s) / (self.beta_n * s.cos())
    }

    pub fn f2(&self, s: f64) -> f64 {
        self.df1(s) * self.dsigma_dt(s)
    }

    pub fn dcos_theta_dt(&self, s: f64) -> f64 {
        self.dcos_theta_dsigma(s) * self.dsigma_dt(s)
    }

    /// `(h', h'')` at time `t` and angle `σ`.
    pub fn h_derivs(&self, t: f64, s: f64) -> [f64; 2] {
        let z = 1.0 + (t - self.t_s) / self.tau;
        let k = self.h1_s / self.cos_theta_s;
        let ct = self.cos_theta(s);
        [k * ct / (z * z), k * (-2.0 / self.tau * ct / z.powi(3) + self.dcos_theta_dt(s) / (z * z))]
    }

    /// Jets at increasing angles in `[σ_s, R/N]`, integrating `t(σ)` and `h(σ)`.
    pub fn jets(&self, sigmas: &[f64]) -> Result<Vec<WarpedJet>, ProfileError> {
        let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
            let dt = self.beta_n * s.cos() / self.f1(s);
            dy[0] = dt;
            dy[1] = self.h_derivs(y[0], s)[0] * dt;
        };
        let mut ode = Dopri5::new(rhs, self.sigma_s, &[self.t_s, self.h_s], OdeOptions::default());
        let states = ode.sample(sigmas)?;
        Ok(states
            .iter()
            .zip(sigmas)
            .map(|(y, &s)| {
                let [h1, h2] = self.h_derivs(y[0], s);
                WarpedJet { t: y[0], f: self.f(s), f1: self.f1(s), f2: self.f2(s), h: y[1], h1, h2 }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Left,
    Window,
    Right,
}

impl Segment {
    pub fn name(self) -> &'static str {
        match self {
            Segment::Left => "left",
            Segment::Window => "window",
            Segment::Right => "right",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Segment::Left, Segment::Window, Segment::Right].into_iter().find(|g| g.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Markers {
    pub a3: f64,
    pub t1: f64,
    /// The transition window is `[t1, ts]`.
    pub ts: f64,
    pub b3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub p: usize,
    pub q: usize,
    pub r_over_n: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub grid: usize,
    /// `δ = delta_frac (1 - cos(R/N))` sets the slope reached at `t1`.
    pub delta_frac: f64,
    /// Window width as a fraction of `t1 - a3`.
    pub window_frac: f64,
    pub t1_max: f64,
    /// Length of the `Z₂` collar `[a2, b2] = [-L, 0]`.
    pub z2_length: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            p: 4,
            q: 4,
            r_over_n: std::f64::consts::FRAC_PI_4,
            lambda: 0.1,
            n: 1.0,
            grid: 2048,
            delta_frac: 0.02,
            window_frac: 0.05,
            t1_max: 1e14,
            z2_length: 8.0,
        }
    }
}

impl ProfileConfig {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.p < 3 || self.q < 3 {
            return Err(ProfileError::Domain(format!("p = {}, q = {} must both be at least 3", self.p, self.q)));
        }
        if !(self.r_over_n > 0.0 && self.r_over_n < FRAC_PI_2) {
            return Err(ProfileError::Domain(format!("R/N = {} must lie in (0, pi/2)", self.r_over_n)));
        }
        if !(self.lambda > 0.0 && self.lambda < 0.5) {
            return Err(ProfileError::Domain(format!("lambda = {} must lie in (0, 1/2)", self.lambda)));
        }
        if self.grid < 64 {
            return Err(ProfileError::Domain(format!("grid = {} too coarse", self.grid)));
        }
        if !(self.n > 0.0 && self.delta_frac > 0.0 && self.delta_frac < 1.0 && self.window_frac > 0.0 && self.window_frac <= 0.5) {
            return Err(ProfileError::Domain("N, delta_frac, window_frac out of range".into()));
        }
        Ok(())
    }

    pub fn target_slope(&self) -> f64 {
        let c = self.r_over_n.cos();
        c + self.delta_frac * (1.0 - c)
    }
}

/// Left piece and window samples, independent of `β`.
#[derive(Debug, Clone)]
pub struct LeftSamples {
    pub params: LeftParams,
    pub t1: f64,
    pub width: f64,
    pub left: Vec<WarpedJet>,
    /// Fine samples of the left piece across the window, `dense[0].t = t1`.
    pub dense: Vec<WarpedJet>,
    pub window_stride: usize,
}

impl LeftSamples {
    pub fn compute(cfg: &ProfileConfig, lp: &LeftParams, t1: f64) -> Result<Self, ProfileError> {
        let n_left = cfg.grid / 2;
        let n_win = (cfg.grid / 8).max(16);
        let stride = 16;
        let width = cfg.window_frac * (t1 - lp.a3);
        let t_lo = (1e-3f64).min(1e-6 * t1);
        let mut times = vec![0.0];
        let ratio = (t1 / t_lo).ln() / (n_left - 2) as f64;
        times.extend((0..n_left - 2).map(|i| t_lo * (ratio * i as f64).exp()));
        times.push(t1);
        let n_dense = n_win * stride;
        times.extend((1..=n_dense).map(|i| t1 + width * i as f64 / n_dense as f64));
        let jets: Vec<WarpedJet> = integrate_base(lp.lambda, lp.c_coef, &times)?.iter().map(|b| left_jet(lp, b)).collect();
        let dense = jets[n_left - 1..].to_vec();
        let left = jets[..n_left].to_vec();
        Ok(Self { params: *lp, t1, width, left, dense, window_stride: stride })
    }

    /// Left piece `(f, f', f'')` inside the window.
    pub fn f_in_window(&self, t: f64) -> [f64; 3] {
        let d = &self.dense;
        let i = d.partition_point(|j| j.t <= t).clamp(1, d.len() - 1);
        let (a, b) = (&d[i - 1], &d[i]);
        hermite5(a.t, b.t, [a.f, a.f1, a.f2], [b.f, b.f1, b.f2], t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePair {
    pub p: usize,
    pub q: usize,
    pub r_over_n: f64,
    pub left: LeftParams,
    pub right: RightParams,
    pub right_piece: RightPiece,
    pub markers: Markers,
    /// `f''` imposed at the end of the window.
    pub window_k_end: f64,
    /// Stored in the profile CSV rather than alongside the parameters.
    #[serde(skip)]
    pub jets: Vec<WarpedJet>,
    #[serde(skip)]
    pub segments: Vec<Segment>,
}

/// Profile for the given left samples and `βN`.
pub fn assemble_profile(cfg: &ProfileConfig, ls: &LeftSamples, beta_n: f64) -> Result<ProfilePair, ProfileError> {
    let (t1, width) = (ls.t1, ls.width);
    let ts = ls.dense.last().unwrap().t;
    let hs = ls.dense.last().unwrap();
    let window_nodes: Vec<&WarpedJet> = ls.dense.iter().skip(ls.window_stride).step_by(ls.window_stride).collect();
    let left_f = |t: f64| ls.f_in_window(t);

    let mut k = 0.0;
    let mut rp;
    let mut iter = 0;
    loop {
        let end = smooth_c1_join(left_f, t1, width, k, &[ts])?[0];
        rp = RightPiece::new(beta_n, cfg.r_over_n, ts, [end[0], end[1]], [hs.h, hs.h1, hs.h2])?;
        let kn = rp.f2(rp.sigma_s);
        iter += 1;
        if (kn - k).abs() <= 1e-12 * kn.abs() || iter == 6 {
            break;
        }
        k = kn;
    }
    let wt: Vec<f64> = window_nodes.iter().map(|j| j.t).collect();
    let wf = smooth_c1_join(left_f, t1, width, k, &wt)?;

    let n_right = cfg.grid - ls.left.len();
    let span = cfg.r_over_n - rp.sigma_s;
    let mut sigmas: Vec<f64> = (1..n_right).map(|i| rp.sigma_s + span * i as f64 / n_right as f64).collect();
    sigmas.push(cfg.r_over_n);
    let right = rp.jets(&sigmas)?;

    let mut jets = ls.left.clone();
    let mut segments = vec![Segment::Left; jets.len()];
    for (j, f) in window_nodes.iter().zip(&wf) {
        jets.push(WarpedJet { f: f[0], f1: f[1], f2: f[2], ..**j });
        segments.push(Segment::Window);
    }
    segments.extend(std::iter::repeat_n(Segment::Right, right.len()));
    jets.extend(right);
    let b3 = jets.last().unwrap().t;
    let beta = beta_n / cfg.n;
    let rho = jets.last().unwrap().h / beta;
    Ok(ProfilePair {
        p: cfg.p,
        q: cfg.q,
        r_over_n: cfg.r_over_n,
        left: ls.params,
        right: RightParams { t1, ts, b3, beta, rho, n: cfg.n, big_r: cfg.r_over_n * cfg.n },
        right_piece: rp,
        markers: Markers { a3: ls.params.a3, t1, ts, b3 },
        window_k_end: k,
        jets,
        segments,
    })
}

impl ProfilePair {
    pub fn beta_n(&self) -> f64 {
        self.right.beta_n()
    }

    pub fn first(&self) -> &WarpedJet {
        &self.jets[0]
    }

    pub fn last(&self) -> &WarpedJet {
        self.jets.last().unwrap()
    }

    /// Quintic Hermite evaluation between grid nodes.
    pub fn eval(&self, t: f64) -> WarpedJet {
        let j = &self.jets;
        let i = j.partition_point(|x| x.t <= t).clamp(1, j.len() - 1);
        let (a, b) = (&j[i - 1], &j[i]);
        let f = hermite5(a.t, b.t, [a.f, a.f1, a.f2], [b.f, b.f1, b.f2], t);
        let h = hermite5(a.t, b.t, [a.h, a.h1, a.h2], [b.h, b.h1, b.h2], t);
        WarpedJet { t, f: f[0], f1: f[1], f2: f[2], h: h[0], h1: h[1], h2: h[2] }
    }

    pub fn window_jets(&self) -> impl Iterator<Item = &WarpedJet> {
        self.jets.iter().zip(&self.segments).filter(|(_, s)| **s == Segment::Window).map(|(j, _)| j)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for (j, seg) in self.jets.iter().zip(&self.segments) {
            let mut rec: Vec<String> = [j.t, j.f, j.f1, j.f2, j.h, j.h1, j.h2].iter().map(|v| format!("{v:e}")).collect();
            rec.push(seg.name().to_string());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Replace jets and segments by the rows of a CSV written by `write_csv`.
    pub fn read_csv<R: std::io::Read>(&mut self, r: R) -> Result<(), ProfileError> {
        let bad = |m: String| ProfileError::Csv(m);
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(bad(format!("unexpected header {:?}", header)));
        }
        let (mut jets, mut segs) = (vec![], vec![]);
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let v: Vec<f64> = rec
                .iter()
                .take(7)
                .map(|x| x.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", line + 1))))
                .collect::<Result<_, _>>()?;
            let seg = Segment::from_name(&rec[7]).ok_or_else(|| bad(format!("row {}: segment {:?}", line + 1, &rec[7])))?;
            jets.push(WarpedJet { t: v[0], f: v[1], f1: v[2], f2: v[3], h: v[4], h1: v[5], h2: v[6] });
            segs.push(seg);
        }
        if jets.len() < 2 {
            return Err(bad("fewer than two rows".into()));
        }
        self.jets = jets;
        self.segments = segs;
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 8] = ["t", "f", "f'", "f''", "h", "h'", "h''", "segment"];

pub const BC_CLAUSES: [&str; 9] = [
    "bc1.h", "bc1.h_prime", "bc1.f", "bc1.f_prime", "bc1.eps", "bc2.h", "bc2.h_prime", "bc2.f", "bc2.f_prime",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcClause {
    pub name: String,
    pub value: f64,
    pub target: f64,
    /// `true` for `value <= target`, otherwise equality up to tolerance.
    pub upper_bound: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcReport {
    pub tol: f64,
    pub clauses: Vec<BcClause>,
}

impl BcReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.clauses.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// All nine boundary clauses at `a3` and `b3`. Equalities are checked to
/// `tol · max(1, |target|)`.
pub fn check_bc(pair: &ProfilePair, eps: &EpsilonProfile, tol: f64) -> BcReport {
    let (lp, rp) = (&pair.left, &pair.right);
    let (s, e) = (pair.first(), pair.last());
    let bn = rp.beta_n();
    let ron = rp.big_r / rp.n;
    let rows = [
        (s.h, lp.alpha, false),
        (s.h1, lp.lambda, true),
        (s.f, lp.alpha * lp.r, false),
        (s.f1, 0.0, false),
        (eps.eval(eps.b2)[0], (s.f / bn).asin(), false),
        (e.h, rp.beta * rp.rho, false),
        (e.h1, 0.0, false),
        (e.f, bn * ron.sin(), false),
        (e.f1, ron.cos(), false),
    ];
    let clauses = BC_CLAUSES
        .iter()
        .zip(rows)
        .map(|(name, (value, target, upper_bound))| {
            let passed = if upper_bound {
                value <= target + tol
            } else {
                (value - target).abs() <= tol * target.abs().max(1.0)
            };
            BcClause { name: name.to_string(), value, target, upper_bound, passed }
        })
        .collect();
    BcReport { tol, clauses }
}

/// Perturb exactly the quantity tested by `clause`, far beyond tolerance.
pub fn inject_bc_fault(pair: &mut ProfilePair, eps: &mut EpsilonProfile, clause: &str) -> Result<(), ProfileError> {
    let bump = |v: &mut f64| *v += 1e-3 * v.abs().max(1.0);
    let lambda = pair.left.lambda;
    let n = pair.jets.len();
    match clause {
        "bc1.h" => bump(&mut pair.jets[0].h),
        "bc1.h_prime" => pair.jets[0].h1 = lambda + 1e-3,
        "bc1.f" => bump(&mut pair.jets[0].f),
        "bc1.f_prime" => bump(&mut pair.jets[0].f1),
        "bc1.eps" => bump(&mut eps.eps_end),
        "bc2.h" => bump(&mut pair.jets[n - 1].h),
        "bc2.h_prime" => bump(&mut pair.jets[n - 1].h1),
        "bc2.f" => bump(&mut pair.jets[n - 1].f),
        "bc2.f_prime" => bump(&mut pair.jets[n - 1].f1),
        other => return Err(ProfileError::Domain(format!("unknown clause {other}"))),
    }
    Ok(())
}

/// Margins of an assembled profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMargins {
    pub ricci_min: f64,
    pub ricci_min_t: f64,
    pub ricci_min_left: f64,
    /// Verbatim `min(A - B)`.
    pub ab_min: f64,
    pub ab_min_t: f64,
    /// `min (A - B)/(|A| + |B|)`.
    pub ab_scale_free_min: f64,
    /// Window `f''` range and the range spanned by the two one-sided pieces.
    pub window_f2: [f64; 2],
    pub window_f2_bounds: [f64; 2],
    pub window_f2_within_bounds: bool,
}

pub fn profile_margins(pair: &ProfilePair, exec: Exec) -> Result<ProfileMargins, ProfileError> {
    let (p, q, bn) = (pair.p, pair.q, pair.beta_n());
    let ric = par::map(exec, &pair.jets, |j| doubly_warped_ricci(j, p, q).min());
    let (ri, ricci_min) = par::argmin(&ric).unwrap();
    let ricci_min_left = pair
        .segments
        .iter()
        .zip(&ric)
        .filter(|(s, _)| **s == Segment::Left)
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    let ab = par::map(exec, &pair.jets, |j| ab_terms(j, bn, p, q));
    let mut diff = Vec::with_capacity(ab.len());
    let mut rel = f64::INFINITY;
    for r in &ab {
        let (a, b) = r.as_ref().map_err(|e| ProfileError::Infeasible(e.to_string()))?;
        diff.push(a - b);
        let s = a.abs() + b.abs();
        if s > 0.0 {
            rel = rel.min((a - b) / s);
        }
    }
    let (ai, ab_min) = par::argmin(&diff).unwrap();
    let w: Vec<f64> = pair.window_jets().map(|j| j.f2).collect();
    let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ls_hi = pair.jets.iter().zip(&pair.segments).rfind(|(_, s)| **s == Segment::Left).map(|(j, _)| j.f2).unwrap();
    // f_l'' decreases across the window, so its value at t1 is the upper end
    let bounds = [pair.window_k_end.min(ls_hi), ls_hi.max(pair.window_k_end)];
    Ok(ProfileMargins {
        ricci_min,
        ricci_min_t: pair.jets[ri].t,
        ricci_min_left,
        ab_min,
        ab_min_t: pair.jets[ai].t,
        ab_scale_free_min: rel,
        window_f2: [lo, hi],
        window_f2_bounds: bounds,
        window_f2_within_bounds: lo >= bounds[0] - 1e-12 * bounds[1].abs() && hi <= bounds[1] * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_doublings: u32,
    /// Initial `βN` as a multiple of `f(ts)/sin(R/N)`.
    pub initial_beta_factor: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_doublings: 48, initial_beta_factor: 4.0 }
    }
}

/// One point of the `(C, b, a)` ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(rename = "C")]
    pub c_coef: f64,
    /// `b` as a fraction of the bound `sqrt((p-2)/(C λ²))` from Ricci positivity at `a3`.
    pub b_frac: f64,
    pub a: f64,
}

pub fn default_ladder() -> Vec<Candidate> {
    let mut out = vec![];
    for c_coef in [0.99, 0.9, 0.75] {
        for b_frac in [0.97, 0.9] {
            for a in [0.85, 0.6, 0.4] {
                out.push(Candidate { c_coef, b_frac, a });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub pair: ProfilePair,
    pub eps: EpsilonProfile,
    pub margins: ProfileMargins,
    pub bc: BcReport,
    pub candidate: Candidate,
    pub doublings: u32,
}

impl Construction {
    pub fn passed(&self) -> bool {
        self.bc.passed() && self.margins.ricci_min > 0.0 && self.margins.ab_min >= -CHECK_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub candidate: Candidate,
    pub ricci_min: Option<f64>,
    pub ab_min: Option<f64>,
    pub passed: bool,
    pub note: String,
}

/// Build the full profile for one candidate, doubling `β` until the
/// verbatim margin clears `-CHECK_TOL`. Returns the last attempt.
pub fn evaluate_candidate(cfg: &ProfileConfig, cand: &Candidate, budget: &SearchBudget, bc_tol: f64) -> Result<Construction, ProfileError> {
    let bound = ((cfg.p - 2) as f64 / (cand.c_coef * cfg.lambda * cfg.lambda)).sqrt();
    let lp = LeftParams::new(cfg.lambda, cand.a, cand.b_frac * bound, cand.c_coef)?;
    let t1 = slope_crossing(&lp, cfg.target_slope(), cfg.t1_max)?;
    let ls = LeftSamples::compute(cfg, &lp, t1)?;
    let fs = ls.dense.last().unwrap().f;
    let mut beta_n = budget.initial_beta_factor * fs / cfg.r_over_n.sin();
    let mut last = None;
    for doublings in 0..=budget.max_doublings {
        let pair = assemble_profile(cfg, &ls, beta_n)?;
        let margins = profile_margins(&pair, Exec::Sequential)?;
        let eps = EpsilonProfile::new(-cfg.z2_length, 0.0, (pair.first().f / beta_n).asin())?;
        let bc = check_bc(&pair, &eps, bc_tol);
        let done = margins.ab_min >= -CHECK_TOL || margins.ricci_min_left <= 0.0;
        let c = Construction { pair, eps, margins, bc, candidate: *cand, doublings };
        if done {
            return Ok(c);
        }
        last = Some(c);
        beta_n *= 2.0;
    }
    Ok(last.unwrap())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub construction: Construction,
    pub candidates: Vec<CandidateOutcome>,
}

/// Evaluate the ladder concurrently and keep the passing candidate with the
/// best verbatim margin (lowest ladder index on ties).
pub fn search_parameters(
    cfg: &ProfileConfig,
    ladder: &[Candidate],
    budget: &SearchBudget,
    bc_tol: f64,
    exec: Exec,
) -> Result<SearchOutcome, ProfileError> {
    cfg.validate()?;
    let results = par::map(exec, ladder, |c| evaluate_candidate(cfg, c, budget, bc_tol));
    let candidates = ladder
        .iter()
        .zip(&results)
        .map(|(c, r)| match r {
            Ok(k) => CandidateOutcome {
                candidate: *c,
                ricci_min: Some(k.margins.ricci_min),
                ab_min: Some(k.margins.ab_min),
                passed: k.passed(),
                note: format!("beta N = {:e} after {} doublings", k.pair.beta_n(), k.doublings),
            },
            Err(e) => CandidateOutcome { candidate: *c, ricci_min: None, ab_min: None, passed: false, note: e.to_string() },
        })
        .collect::<Vec<_>>();
    let mut best: Option<&Construction> = None;
    for k in results.iter().flatten().filter(|k| k.passed()) {
        if best.is_none_or(|b| k.margins.ab_min > b.margins.ab_min) {
            best = Some(k);
        }
    }
    match best {
        Some(k) => Ok(SearchOutcome { construction: k.clone(), candidates }),
        None => {
            let ok = results.iter().flatten();
            Err(ProfileError::Budget {
                best_ricci: ok.clone().map(|k| k.margins.ricci_min).fold(f64::NEG_INFINITY, f64::max),
                best_margin: ok.map(|k| k.margins.ab_min).fold(f64::NEG_INFINITY, f64::max),
            })
        }
    }
}
