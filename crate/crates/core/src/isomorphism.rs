//! Two-level counterpart of the real three-level dynamics.
//!
//! With `rho_z = x1`, `rho_y = -sqrt(2) y2`, `rho_x = sqrt(2) x3` and the
//! couplings `P = Omega_p / sqrt(2)`, `S = Omega_s / 2`, the three-level flow
//! becomes
//!
//! ```text
//! rho_z' = -P rho_z rho_y,   rho_y' = P rho_z^2 + S rho_x,   rho_x' = -S rho_y,
//! ```
//!
//! the Bloch flow of `H = (1/2) [[-S, P w], [P w, S]]` with `w = |a1|^2 - |a2|^2`.
//! Complete transfer corresponds to `|rho_x| = 1`, reached only after an
//! infinite pump area.

use num_complex::Complex64;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::lambda3::{self, CartesianState3, ControlLaw, PulsePair};
use crate::ode::{self, IntegratorConfig};
use crate::shooting::{self, Optimum, ShotConfig};

/// Guard on `sin(theta)` in [`iso_angle_rhs`].
pub const THETA_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IsoState {
    pub rho_z: f64,
    pub rho_y: f64,
    pub rho_x: f64,
}

impl IsoState {
    pub fn norm_sq(&self) -> f64 {
        self.rho_z * self.rho_z + self.rho_y * self.rho_y + self.rho_x * self.rho_x
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.rho_z, self.rho_y, self.rho_x]
    }

    pub fn from_array(y: &[f64; 3]) -> Self {
        Self {
            rho_z: y[0],
            rho_y: y[1],
            rho_x: y[2],
        }
    }

    pub fn max_abs_diff(&self, other: &IsoState) -> f64 {
        (self.rho_z - other.rho_z)
            .abs()
            .max((self.rho_y - other.rho_y).abs())
            .max((self.rho_x - other.rho_x).abs())
    }
}

/// `a1 = cos(theta/2) e^{-i gamma}`, `a2 = sin(theta/2) e^{-i(phi + gamma)}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IsoAngles {
    pub theta: f64,
    pub phi: f64,
    pub gamma: f64,
}

impl IsoAngles {
    pub fn amplitudes(&self) -> [Complex64; 2] {
        let (sh, ch) = (0.5 * self.theta).sin_cos();
        [
            Complex64::from_polar(ch, -self.gamma),
            Complex64::from_polar(sh, -(self.phi + self.gamma)),
        ]
    }

    /// Inverse of [`IsoAngles::amplitudes`] with `theta` in `[0, pi]`.
    pub fn from_amplitudes(a: &[Complex64; 2]) -> Self {
        let (g1, g2) = (a[0].arg(), a[1].arg());
        Self {
            theta: 2.0 * a[1].norm().atan2(a[0].norm()),
            phi: g1 - g2,
            gamma: -g1,
        }
    }

    pub fn state(&self) -> IsoState {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        IsoState {
            rho_z: ct,
            rho_y: st * sp,
            rho_x: st * cp,
        }
    }
}

/// Pump and Stokes couplings of the two-level counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub pump: f64,
    pub stokes: f64,
}

pub fn map_3to2(s: &CartesianState3) -> IsoState {
    IsoState {
        rho_z: s.x1,
        rho_y: -SQRT_2 * s.y2,
        rho_x: SQRT_2 * s.x3,
    }
}

pub fn iso_couplings(u: &PulsePair) -> Couplings {
    Couplings {
        pump: u.pump / SQRT_2,
        stokes: u.stokes / 2.0,
    }
}

pub fn iso_bloch_rhs(s: &IsoState, c: &Couplings) -> IsoState {
    IsoState {
        rho_z: -c.pump * s.rho_z * s.rho_y,
        rho_y: c.pump * s.rho_z * s.rho_z + c.stokes * s.rho_x,
        rho_x: -c.stokes * s.rho_y,
    }
}

pub fn state_from_amplitudes(a: &[Complex64; 2]) -> IsoState {
    let coh = a[0] * a[1].conj();
    IsoState {
        rho_z: a[0].norm_sqr() - a[1].norm_sqr(),
        rho_y: 2.0 * coh.im,
        rho_x: 2.0 * coh.re,
    }
}

/// Schrodinger flow `i a' = H a` of the nonlinear two-level Hamiltonian.
pub fn amplitude_rhs(a: &[Complex64; 2], c: &Couplings) -> [Complex64; 2] {
    let w = a[0].norm_sqr() - a[1].norm_sqr();
    let half_i = Complex64::new(0.0, -0.5);
    let pw = c.pump * w;
    [
        half_i * (-c.stokes * a[0] + pw * a[1]),
        half_i * (pw * a[0] + c.stokes * a[1]),
    ]
}

pub fn iso_angle_rhs(a: &IsoAngles, c: &Couplings) -> Result<IsoAngles> {
    let (st, ct) = a.theta.sin_cos();
    if st.abs() <= THETA_GUARD {
        return Err(Error::ThetaSingularity { theta: a.theta });
    }
    let (sp, cp) = a.phi.sin_cos();
    Ok(IsoAngles {
        theta: c.pump * ct * sp,
        phi: c.stokes + c.pump * ct * ct / st * cp,
        gamma: -0.5 * c.stokes + 0.5 * c.pump * ct * (0.5 * a.theta).tan() * cp,
    })
}

/// `theta` from the accumulated area `int P sin(phi) dt`: `tan(theta/2) = tanh(area/2)`.
pub fn exact_theta(area: f64) -> f64 {
    2.0 * (0.5 * area).tanh().atan()
}

/// Running integral `int_{x_0}^{x_k} f` at every sample. Each interval uses
/// the mean of the two neighbouring interpolating parabolas where both exist.
pub fn cumulative_quadrature(xs: &[f64], fs: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), fs.len(), "abscissae and samples differ in length");
    let n = xs.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(0.0);
    for k in 0..n - 1 {
        let (a, b) = (xs[k], xs[k + 1]);
        let piece = if n == 2 {
            0.5 * (b - a) * (fs[k] + fs[k + 1])
        } else {
            let fwd = (k + 2 < n).then(|| parabola_integral(&xs[k..k + 3], &fs[k..k + 3], a, b));
            let bwd = (k >= 1).then(|| parabola_integral(&xs[k - 1..k + 2], &fs[k - 1..k + 2], a, b));
            match (fwd, bwd) {
                (Some(f), Some(g)) => 0.5 * (f + g),
                (Some(f), None) | (None, Some(f)) => f,
                (None, None) => unreachable!(),
            }
        };
        out.push(out[k] + piece);
    }
    out
}

fn parabola_integral(x: &[f64], f: &[f64], a: f64, b: f64) -> f64 {
    let lagrange = |t: f64| {
        (0..3)
            .map(|i| {
                let mut w = f[i];
                for j in (0..3).filter(|&j| j != i) {
                    w *= (t - x[j]) / (x[i] - x[j]);
                }
                w
            })
            .sum::<f64>()
    };
    // two-point Gauss-Legendre is exact for the quadratic
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let g = h / 3f64.sqrt();
    h * (lagrange(m - g) + lagrange(m + g))
}

/// [`exact_theta`] along a sampled history of `P sin(phi)`.
pub fn exact_theta_series(times: &[f64], integrand: &[f64]) -> Vec<f64> {
    cumulative_quadrature(times, integrand)
        .into_iter()
        .map(exact_theta)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CheckConfig {
    /// `S / Omega_s`. Anything other than 1/2 breaks the mapping.
    pub stokes_factor: f64,
    /// Length of the Cartesian start before switching to angles.
    pub seed_time: f64,
    pub state_tol: f64,
    pub theta_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            stokes_factor: 0.5,
            seed_time: 0.01,
            state_tol: 1e-7,
            theta_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IsoCheck {
    pub eps: f64,
    pub t_final: f64,
    pub samples: usize,
    /// Mapped three-level state against the integrated Bloch vector.
    pub bloch_deviation: f64,
    /// Mapped three-level state against the amplitude evolution.
    pub amplitude_deviation: f64,
    /// Mapped three-level state against the angle evolution.
    pub angle_deviation: f64,
    /// Amplitudes rebuilt from `(theta, phi, gamma)` against the amplitude evolution.
    pub round_trip_deviation: f64,
    /// Quadrature `theta` against the integrated `theta`.
    pub theta_deviation: f64,
    pub max_abs_rho_x: f64,
    pub norm_drift: f64,
    pub final_theta: f64,
    pub state_tol: f64,
    pub theta_tol: f64,
}

impl IsoCheck {
    pub fn state_deviation(&self) -> f64 {
        self.bloch_deviation
            .max(self.amplitude_deviation)
            .max(self.angle_deviation)
            .max(self.round_trip_deviation)
    }

    pub fn passed(&self) -> bool {
        self.state_deviation() < self.state_tol
            && self.theta_deviation < self.theta_tol
            && self.max_abs_rho_x < 1.0
            && self.norm_drift < 1e-9
    }
}

const LAW: ControlLaw = ControlLaw::TimeOptimal { omega0: 1.0 };

// Shared layout: [phi, theta, l_phi, l_theta, Re a1, Im a1, Re a2, Im a2, rho_z, rho_y, rho_x, ...]
fn base_rhs(y: &[f64], stokes_factor: f64) -> Result<([f64; 11], Couplings)> {
    let ext: [f64; 4] = [y[0], y[1], y[2], y[3]];
    let (a, c) = lambda3::split_extended(&ext);
    let u = LAW.pulses(&a, &c)?;
    let cpl = Couplings {
        pump: u.pump / SQRT_2,
        stokes: stokes_factor * u.stokes,
    };
    let d_ext = lambda3::extremal_rhs(LAW, &ext)?;
    let amps = [Complex64::new(y[4], y[5]), Complex64::new(y[6], y[7])];
    let da = amplitude_rhs(&amps, &cpl);
    let rho = IsoState {
        rho_z: y[8],
        rho_y: y[9],
        rho_x: y[10],
    };
    let dr = iso_bloch_rhs(&rho, &cpl);
    Ok((
        [
            d_ext[0], d_ext[1], d_ext[2], d_ext[3], da[0].re, da[0].im, da[1].re, da[1].im, dr.rho_z, dr.rho_y,
            dr.rho_x,
        ],
        cpl,
    ))
}

fn amplitudes_of(y: &[f64]) -> [Complex64; 2] {
    [Complex64::new(y[4], y[5]), Complex64::new(y[6], y[7])]
}

/// Re-integrates the time optimum alongside its two-level counterpart in
/// three forms (Bloch vector, amplitudes, angles) and compares them.
pub fn check(opt: &Optimum, cfg: &CheckConfig, integrator: &IntegratorConfig) -> Result<IsoCheck> {
    integrator.validate()?;
    if !(cfg.seed_time > 0.0 && cfg.seed_time < opt.t_min) {
        return Err(Error::InvalidConfig(format!(
            "seed time {} must lie inside (0, {})",
            cfg.seed_time, opt.t_min
        )));
    }
    let factor = cfg.stokes_factor;
    let y0 = [0.0, 0.0, opt.l_phi, opt.l_theta, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    let seed = ode::integrate(
        |_, y: &[f64; 11]| Ok(base_rhs(y, factor)?.0),
        y0,
        (0.0, cfg.seed_time),
        integrator,
    )?;

    let (t_seed, y_seed) = seed.last();
    let start = IsoAngles::from_amplitudes(&amplitudes_of(&y_seed));
    let mut z0 = [0.0; 14];
    z0[..11].copy_from_slice(&y_seed);
    z0[11..].copy_from_slice(&[start.theta, start.phi, start.gamma]);
    let main = ode::integrate(
        |_, z: &[f64; 14]| {
            let (d, cpl) = base_rhs(z, factor)?;
            let da = iso_angle_rhs(
                &IsoAngles {
                    theta: z[11],
                    phi: z[12],
                    gamma: z[13],
                },
                &cpl,
            )?;
            let mut out = [0.0; 14];
            out[..11].copy_from_slice(&d);
            out[11..].copy_from_slice(&[da.theta, da.phi, da.gamma]);
            Ok(out)
        },
        z0,
        (t_seed, opt.t_min),
        integrator,
    )?;

    let mut out = IsoCheck {
        eps: opt.eps,
        t_final: opt.t_min,
        samples: 0,
        bloch_deviation: 0.0,
        amplitude_deviation: 0.0,
        angle_deviation: 0.0,
        round_trip_deviation: 0.0,
        theta_deviation: 0.0,
        max_abs_rho_x: 0.0,
        norm_drift: 0.0,
        final_theta: 0.0,
        state_tol: cfg.state_tol,
        theta_tol: cfg.theta_tol,
    };
    let mut times = Vec::new();
    let mut integrand = Vec::new();
    let mut thetas = Vec::new();

    let mut visit = |t: f64, y: &[f64], angles: Option<IsoAngles>| -> Result<()> {
        let ext: [f64; 4] = [y[0], y[1], y[2], y[3]];
        let (a, c) = lambda3::split_extended(&ext);
        let direct = map_3to2(&lambda3::cartesian_from_angles(&a));
        let amps = amplitudes_of(y);
        let from_amps = state_from_amplitudes(&amps);
        let rho = IsoState {
            rho_z: y[8],
            rho_y: y[9],
            rho_x: y[10],
        };
        out.bloch_deviation = out.bloch_deviation.max(direct.max_abs_diff(&rho));
        out.amplitude_deviation = out.amplitude_deviation.max(direct.max_abs_diff(&from_amps));
        out.norm_drift = out
            .norm_drift
            .max((rho.norm_sq() - 1.0).abs())
            .max((amps[0].norm_sqr() + amps[1].norm_sqr() - 1.0).abs());
        for r in [&direct, &rho, &from_amps] {
            out.max_abs_rho_x = out.max_abs_rho_x.max(r.rho_x.abs());
        }
        let ang = match angles {
            Some(g) => {
                out.angle_deviation = out.angle_deviation.max(direct.max_abs_diff(&g.state()));
                let back = g.amplitudes();
                let d = (back[0] - amps[0]).norm().max((back[1] - amps[1]).norm());
                out.round_trip_deviation = out.round_trip_deviation.max(d);
                out.max_abs_rho_x = out.max_abs_rho_x.max(g.state().rho_x.abs());
                g
            }
            None => IsoAngles::from_amplitudes(&amps),
        };
        let u = LAW.pulses(&a, &c)?;
        let p = u.pump / SQRT_2;
        // sin(phi) -> 1 as theta -> 0 from the ground state
        let f = if t == 0.0 { p.abs() } else { p * ang.phi.sin() };
        times.push(t);
        integrand.push(f);
        thetas.push(ang.theta);
        Ok(())
    };
    for (t, y) in seed.iter() {
        visit(t, y, None)?;
    }
    for (t, z) in main.iter().skip(1) {
        visit(
            t,
            z,
            Some(IsoAngles {
                theta: z[11],
                phi: z[12],
                gamma: z[13],
            }),
        )?;
    }

    let exact = exact_theta_series(&times, &integrand);
    out.theta_deviation = exact
        .iter()
        .zip(&thetas)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.samples = times.len();
    out.final_theta = *thetas.last().expect("at least one sample");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DivergencePoint {
    pub eps: f64,
    /// `int |P| dt = int |Omega_p| dt / sqrt(2)` along the time optimum.
    pub pump_area: f64,
    pub a_min: f64,
    pub l_theta: f64,
    pub max_abs_rho_x: f64,
}

pub fn pump_area(opt: &Optimum) -> f64 {
    let f: Vec<f64> = opt.pulses.iter().map(|u| u.pump.abs() / SQRT_2).collect();
    ode::simpson_nonuniform(&opt.trajectory.times, &f)
}

/// Pump area of the time optimum for each `eps`, in ascending `eps`.
pub fn area_divergence_check(eps_list: &[f64], l_phi: f64, base: &ShotConfig) -> Result<Vec<DivergencePoint>> {
    let curve = shooting::area_curve(eps_list, l_phi, base)?;
    curve
        .iter()
        .map(|p| {
            let opt = shooting::extremal(l_phi, p.l_theta, &ShotConfig { eps: p.eps, ..*base })?;
            let max_abs_rho_x = opt
                .trajectory
                .states
                .iter()
                .map(|y| y[0].cos().abs() * y[1].sin().abs())
                .fold(0.0, f64::max);
            Ok(DivergencePoint {
                eps: p.eps,
                pump_area: pump_area(&opt),
                a_min: opt.a_min,
                l_theta: p.l_theta,
                max_abs_rho_x,
            })
        })
        .collect()
}

/// Pump area strictly grows as `eps` shrinks (`points` in ascending `eps`).
pub fn strictly_divergent(points: &[DivergencePoint]) -> bool {
    points.windows(2).all(|w| w[0].pump_area > w[1].pump_area)
}
