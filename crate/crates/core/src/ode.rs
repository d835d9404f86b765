//! Explicit Runge-Kutta integration on fixed-size state vectors.
//!
//! The adaptive driver is the Dormand-Prince 5(4) pair with first-same-as-last
//! reuse. Every accepted step is recorded, so a [`Trajectory`] is the raw step
//! sequence rather than an interpolated grid. Event localization brackets a sign
//! change of a scalar function on accepted steps and then bisects in time, each
//! probe being a single fifth-order step from the start of the bracketing step.

use crate::error::{Error, Result};

/// Smallest step the adaptive driver accepts before giving up.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on any accepted step, in units of 1/Omega0.
    pub max_step: f64,
    /// Width of the final time bracket around an event.
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: 1e-2,
            event_tol: 1e-10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.abs_tol, self.rel_tol, self.max_step, self.event_tol]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::InvalidConfig(
                "integrator tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.max_step <= self.event_tol {
            return Err(Error::InvalidConfig("max_step must exceed event_tol".into()));
        }
        Ok(())
    }
}

/// Accepted steps of an integration, `states[k]` taken at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    fn start(t0: f64, y0: [f64; N]) -> Self {
        Self {
            times: vec![t0],
            states: vec![y0],
        }
    }

    fn push(&mut self, t: f64, y: [f64; N]) {
        self.times.push(t);
        self.states.push(y);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, [f64; N]) {
        (
            *self.times.last().expect("trajectory has at least one sample"),
            *self.states.last().expect("trajectory has at least one sample"),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64; N])> + '_ {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Linear interpolation between recorded steps; clamps outside the time range.
    pub fn sample(&self, t: f64) -> [f64; N] {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.states[0];
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1];
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (&self.states[k], &self.states[k + 1]);
        std::array::from_fn(|i| a[i] + w * (b[i] - a[i]))
    }
}

/// First crossing found by [`locate_event`]. The trajectory ends at the crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct EventHit<const N: usize> {
    pub t: f64,
    pub state: [f64; N],
    pub trajectory: Trajectory<N>,
}

// Dormand-Prince 5(4) tableau.
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
// Fifth-order minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn checked<const N: usize>(t: f64, v: [f64; N]) -> Result<[f64; N]> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite { t })
    }
}

struct DpStep<const N: usize> {
    y: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    k7: [f64; N],
    err: [f64; N],
}

fn dp_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Result<DpStep<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = checked(t, rhs(t + C2 * h, &combine(y, h, &[(A21, k1)]))?)?;
    let k3 = checked(t, rhs(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]))?)?;
    let k4 = checked(
        t,
        rhs(t + C4 * h, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?,
    )?;
    let k5 = checked(
        t,
        rhs(
            t + C5 * h,
            &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?,
    )?;
    let k6 = checked(
        t,
        rhs(
            t + h,
            &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?,
    )?;
    let y_new = combine(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = checked(t + h, rhs(t + h, &y_new)?)?;
    let err =
        std::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
    Ok(DpStep { y: y_new, k7, err })
}

fn error_norm<const N: usize>(cfg: &IntegratorConfig, y: &[f64; N], step: &DpStep<N>) -> f64 {
    if N == 0 {
        return 0.0;
    }
    let sum: f64 = (0..N)
        .map(|i| {
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(step.y[i].abs());
            (step.err[i] / scale).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

/// Drives the adaptive integrator, calling `accept` after each accepted step with
/// `(t_prev, y_prev, k1_prev, t_new, y_new)`. Returning `Ok(true)` stops the run.
fn drive<const N: usize, F, A>(
    rhs: &mut F,
    y0: [f64; N],
    (t0, t1): (f64, f64),
    cfg: &IntegratorConfig,
    mut accept: A,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    A: FnMut(&mut F, f64, &[f64; N], &[f64; N], f64, &[f64; N], &mut Trajectory<N>) -> Result<bool>,
{
    cfg.validate()?;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidConfig(format!("empty time span [{t0}, {t1}]")));
    }
    let mut traj = Trajectory::start(t0, y0);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = checked(t, rhs(t, &y)?)?;
    let mut h = cfg.max_step.min(t1 - t0);

    while t < t1 {
        let remaining = t1 - t;
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };
        let step = dp_step(rhs, t, &y, &k1, h_try)?;
        let err = error_norm(cfg, &y, &step);
        if err <= 1.0 {
            let t_new = if last { t1 } else { t + h_try };
            let stop = accept(rhs, t, &y, &k1, t_new, &step.y, &mut traj)?;
            if stop {
                return Ok(traj);
            }
            traj.push(t_new, step.y);
            t = t_new;
            y = step.y;
            k1 = step.k7;
            let growth = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // A truncated final step says nothing about the natural step size.
            if !last {
                h = (h_try * growth).min(cfg.max_step);
            }
        } else {
            h = h_try * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < MIN_STEP {
                return Err(Error::StepUnderflow { t, h });
            }
        }
    }
    Ok(traj)
}

/// Adaptive Dormand-Prince integration over `t_span`, recording every accepted step.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    drive(&mut rhs, y0, t_span, cfg, |_, _, _, _, _, _, _| Ok(false))
}

/// Integrates until `event(t, y)` first changes sign, then bisects the crossing
/// down to `cfg.event_tol` in time. Returns `Ok(None)` when no sign change occurs.
pub fn locate_event<const N: usize, F, G>(
    mut rhs: F,
    y0: [f64; N],
    t_span: (f64, f64),
    mut event: G,
    cfg: &IntegratorConfig,
) -> Result<Option<EventHit<N>>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    G: FnMut(f64, &[f64; N]) -> f64,
{
    let mut g_prev = event(t_span.0, &y0);
    let mut hit: Option<(f64, [f64; N])> = None;
    let traj = drive(&mut rhs, y0, t_span, cfg, |rhs, t0, y0, k1, t1, y1, traj| {
        let g1 = event(t1, y1);
        let crossed = (g_prev < 0.0 && g1 >= 0.0) || (g_prev > 0.0 && g1 <= 0.0);
        if !crossed {
            g_prev = g1;
            return Ok(false);
        }
        let (mut lo, mut hi) = (t0, t1);
        let mut y_hi = *y1;
        let g_lo_sign = g_prev.signum();
        while hi - lo > cfg.event_tol {
            let mid = 0.5 * (lo + hi);
            let y_mid = dp_step(rhs, t0, y0, k1, mid - t0)?.y;
            let g_mid = event(mid, &y_mid);
            if g_mid.signum() == g_lo_sign && g_mid != 0.0 {
                lo = mid;
            } else {
                hi = mid;
                y_hi = y_mid;
            }
        }
        traj.push(hi, y_hi);
        hit = Some((hi, y_hi));
        Ok(true)
    })?;
    Ok(hit.map(|(t, state)| EventHit {
        t,
        state,
        trajectory: traj,
    }))
}

/// Classical fourth-order Runge-Kutta with `n_steps` equal steps. Returns the final state.
pub fn integrate_rk4<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    (t0, t1): (f64, f64),
    n_steps: usize,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if n_steps == 0 {
        return Err(Error::InvalidConfig("rk4 needs at least one step".into()));
    }
    let h = (t1 - t0) / n_steps as f64;
    let mut y = y0;
    for k in 0..n_steps {
        let t = t0 + k as f64 * h;
        let k1 = checked(t, rhs(t, &y)?)?;
        let k2 = checked(t, rhs(t + 0.5 * h, &combine(&y, h, &[(0.5, &k1)]))?)?;
        let k3 = checked(t, rhs(t + 0.5 * h, &combine(&y, h, &[(0.5, &k2)]))?)?;
        let k4 = checked(t, rhs(t + h, &combine(&y, h, &[(1.0, &k3)]))?)?;
        y = combine(
            &y,
            h,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
        );
    }
    Ok(y)
}

/// Composite Simpson quadrature over a non-uniform grid. An odd number of
/// intervals closes with the quadratic through the last three samples.
pub fn simpson_nonuniform(xs: &[f64], fs: &[f64]) -> f64 {
    assert_eq!(xs.len(), fs.len(), "abscissae and samples differ in length");
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]);
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += simpson_pair(&xs[i..i + 3], &fs[i..i + 3]);
        i += 2;
    }
    if i + 1 < n {
        // one interval left: integrate the parabola through the last three points over it
        let (x0, x1, x2) = (xs[n - 3], xs[n - 2], xs[n - 1]);
        let (f0, f1, f2) = (fs[n - 3], fs[n - 2], fs[n - 1]);
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        total += h2 / 6.0
            * (f2 * (2.0 * h2 + 3.0 * h1) / (h1 + h2) + f1 * (h2 + 3.0 * h1) / h1 - f0 * h2 * h2 / (h1 * (h1 + h2)));
    }
    total
}

fn simpson_pair(x: &[f64], f: &[f64]) -> f64 {
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let s = h0 + h1;
    s / 6.0 * (f[0] * (2.0 - h1 / h0) + f[1] * s * s / (h0 * h1) + f[2] * (2.0 - h0 / h1))
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 30)
}
