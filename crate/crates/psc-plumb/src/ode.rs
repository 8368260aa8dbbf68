//! Adaptive Dormand–Prince 5(4) integrator.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepCollapse { t: f64, h: f64 },
    #[error("exceeded {0} steps")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("output times must be monotone in the direction of integration")]
    Unordered,
    #[error("no crossing found before t = {0}")]
    NoCrossing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-14, max_steps: 10_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state; keeps the last accepted step size between calls.
pub struct Dopri5<F> {
    rhs: F,
    pub opts: OdeOptions,
    pub t: f64,
    pub y: Vec<f64>,
    h: f64,
    k1: Vec<f64>,
    err_prev: f64,
    pub steps: usize,
}

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

impl<F> Dopri5<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(rhs: F, t0: f64, y0: &[f64], opts: OdeOptions) -> Self {
        let mut k1 = vec![0.0; y0.len()];
        rhs(t0, y0, &mut k1);
        Self { rhs, opts, t: t0, y: y0.to_vec(), h: 0.0, k1, err_prev: 1e-4, steps: 0 }
    }

    fn initial_step(&self, dir: f64) -> f64 {
        let n = self.y.len() as f64;
        let sc = |i: usize| self.opts.atol + self.opts.rtol * self.y[i].abs();
        let d0 = (self.y.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self.k1.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        dir * h
    }

    /// Attempt one step of size `h`; returns (new y, new k1, error norm).
    fn try_step(&self, h: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.y.len();
        let (t, y, k1) = (self.t, &self.y, &self.k1);
        let mut tmp = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        axpy(&mut tmp, y, h, &[(A21, k1)]);
        (self.rhs)(t + C2 * h, &tmp, &mut k2);
        axpy(&mut tmp, y, h, &[(A31, k1), (A32, &k2)]);
        (self.rhs)(t + C3 * h, &tmp, &mut k3);
        axpy(&mut tmp, y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]);
        (self.rhs)(t + C4 * h, &tmp, &mut k4);
        axpy(&mut tmp, y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        (self.rhs)(t + C5 * h, &tmp, &mut k5);
        axpy(&mut tmp, y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        (self.rhs)(t + h, &tmp, &mut k6);
        let mut ynew = vec![0.0; n];
        axpy(&mut ynew, y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        (self.rhs)(t + h, &ynew, &mut k7);
        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        (ynew, k7, (err / n as f64).sqrt())
    }

    /// Advance exactly to `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<(), OdeError> {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = self.initial_step(dir);
        }
        loop {
            let remaining = t_end - self.t;
            if remaining * dir <= 0.0 {
                self.t = t_end;
                return Ok(());
            }
            let last = self.h.abs() >= remaining.abs();
            let h = if last { remaining } else { self.h };
            let (ynew, knew, err) = self.try_step(h);
            if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
                self.h = h * 0.2;
                if self.h.abs() <= 1e-14 * self.t.abs().max(1.0) {
                    return Err(OdeError::NonFinite(self.t));
                }
                continue;
            }
            if err <= 1.0 {
                self.steps += 1;
                if self.steps > self.opts.max_steps {
                    return Err(OdeError::TooManySteps(self.opts.max_steps));
                }
                self.t = if last { t_end } else { self.t + h };
                self.y = ynew;
                self.k1 = knew;
                // PI controller
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * self.err_prev.powf(0.4 / 5.0);
                let fac = fac.clamp(0.2, 10.0);
                self.err_prev = err.max(1e-4);
                if !last || fac < 1.0 || (h * fac).abs() > self.h.abs() {
                    self.h = h * fac;
                }
                if last {
                    return Ok(());
                }
            } else {
                let fac = (0.9 * err.powf(-0.2)).max(0.2);
                self.h = h * fac;
                if self.h.abs() <= 1e-14 * self.t.abs().max(1.0) {
                    return Err(OdeError::StepCollapse { t: self.t, h: self.h });
                }
            }
        }
    }

    pub fn derivative(&self) -> &[f64] {
        &self.k1
    }

    /// States at the given monotone output times.
    pub fn sample(&mut self, times: &[f64]) -> Result<Vec<Vec<f64>>, OdeError> {
        let dirs: Vec<f64> = std::iter::once(self.t)
            .chain(times.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|w| w[1] != w[0])
            .map(|w| (w[1] - w[0]).signum())
            .collect();
        if dirs.windows(2).any(|w| w[0] != w[1]) {
            return Err(OdeError::Unordered);
        }
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            self.advance_to(t)?;
            out.push(self.y.clone());
        }
        Ok(out)
    }

    /// Integrate forward until `g(t, y)` changes sign from positive to
    /// non-positive, then locate the crossing by bisection to relative
    /// accuracy `1e-13`. Returns the crossing time; the integrator is left
    /// at that time.
    pub fn find_crossing<G>(&mut self, g: G, t_max: f64) -> Result<f64, OdeError>
    where
        G: Fn(f64, &[f64]) -> f64,
    {
        loop {
            if self.t >= t_max {
                return Err(OdeError::NoCrossing(t_max));
            }
            let (t0, y0, k0, h0, e0) = (self.t, self.y.clone(), self.k1.clone(), self.h, self.err_prev);
            let target = if self.h > 0.0 { (self.t + self.h).min(t_max) } else { (self.t + 1.0).min(t_max) };
            self.advance_to(target)?;
            if g(self.t, &self.y) <= 0.0 {
                let (mut lo, mut hi) = (t0, self.t);
                while hi - lo > 1e-13 * hi.abs().max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    self.t = t0;
                    self.y = y0.clone();
                    self.k1 = k0.clone();
                    self.h = h0;
                    self.err_prev = e0;
                    self.advance_to(mid)?;
                    if g(self.t, &self.y) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                self.t = t0;
                self.y = y0;
                self.k1 = k0;
                self.h = h0;
                self.err_prev = e0;
                self.advance_to(hi)?;
                return Ok(hi);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential() {
        let mut s = Dopri5::new(|_t, y, dy: &mut [f64]| dy[0] = y[0], 0.0, &[1.0], OdeOptions::default());
        s.advance_to(5.0).unwrap();
        assert!((s.y[0] - 5f64.exp()).abs() / 5f64.exp() < 1e-9);
    }

    #[test]
    fn harmonic_samples_and_backward() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let mut s = Dopri5::new(rhs, 0.0, &[0.0, 1.0], OdeOptions::default());
        let ts: Vec<f64> = (1..=20).map(|i| i as f64 * 0.5).collect();
        let ys = s.sample(&ts).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
        }
        let mut b = Dopri5::new(rhs, 0.0, &[0.0, 1.0], OdeOptions::default());
        b.advance_to(-2.0).unwrap();
        assert!((b.y[0] - (-2f64).sin()).abs() < 1e-9);
    }

    #[test]
    fn crossing() {
        let mut s = Dopri5::new(|_t, _y, dy: &mut [f64]| dy[0] = 1.0, 0.0, &[0.0], OdeOptions::default());
        let t = s.find_crossing(|_, y| 0.75 - y[0], 10.0).unwrap();
        assert!((t - 0.75).abs() < 1e-12);
        let mut s2 = Dopri5::new(|_t, _y, dy: &mut [f64]| dy[0] = 1.0, 0.0, &[0.0], OdeOptions::default());
        assert!(matches!(s2.find_crossing(|_, y| 20.0 - y[0], 10.0), Err(OdeError::NoCrossing(_))));
    }
}
