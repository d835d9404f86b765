//! Three-level Raman (Lambda) system with the 1:2 nonlinearity on the pump.
//!
//! Only the real-initial-condition branch is evolved. Its amplitudes
//! `(x1, y2, x3)` are parameterized by two angles,
//!
//! ```text
//! x1 = cos(phi) cos(theta),  y2 = -sin(phi)/sqrt(2),  x3 = -cos(phi) sin(theta)/sqrt(2),
//! ```
//!
//! which keeps `x1^2 + 2(y2^2 + x3^2) = 1` exactly. The Pontryagin control
//! Hamiltonian is `H_c = lambda_phi phi' + lambda_theta theta'`, linear in the
//! pulses through the switching pair `(H1, H2)`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Guard on `|cos phi|` (and `|sin phi|` where it divides).
pub const ANGLE_GUARD: f64 = 1e-12;
/// Below this `H1^2 + H2^2` the bang direction is undefined.
pub const SWITCHING_GUARD: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleState {
    pub phi: f64,
    pub theta: f64,
}

impl AngleState {
    pub const INITIAL: Self = Self { phi: 0.0, theta: 0.0 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState3 {
    pub x1: f64,
    pub y2: f64,
    pub x3: f64,
}

impl CartesianState3 {
    pub const GROUND: Self = Self {
        x1: 1.0,
        y2: 0.0,
        x3: 0.0,
    };

    pub fn norm(&self) -> f64 {
        self.x1 * self.x1 + 2.0 * (self.y2 * self.y2 + self.x3 * self.x3)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x1, self.y2, self.x3]
    }

    pub fn from_array(y: &[f64; 3]) -> Self {
        Self {
            x1: y[0],
            y2: y[1],
            x3: y[2],
        }
    }

    /// `y2^2 + x3^2`, half the population outside the ground state.
    pub fn upper_weight(&self) -> f64 {
        self.y2 * self.y2 + self.x3 * self.x3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costate3 {
    pub l_phi: f64,
    pub l_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PulsePair {
    pub pump: f64,
    pub stokes: f64,
}

impl PulsePair {
    pub fn magnitude_sq(&self) -> f64 {
        self.pump * self.pump + self.stokes * self.stokes
    }
}

fn guard_cos_phi(phi: f64) -> Result<f64> {
    let c = phi.cos();
    if c.abs() <= ANGLE_GUARD {
        Err(Error::PhiSingularity { phi })
    } else {
        Ok(c)
    }
}

pub fn cartesian_from_angles(a: &AngleState) -> CartesianState3 {
    let (sp, cp) = a.phi.sin_cos();
    let (st, ct) = a.theta.sin_cos();
    CartesianState3 {
        x1: cp * ct,
        y2: -sp / SQRT_2,
        x3: -cp * st / SQRT_2,
    }
}

/// Angle equations, with the removable `0/0` at `theta = 0` simplified away.
pub fn angle_rhs(a: &AngleState, u: &PulsePair) -> Result<AngleState> {
    let cp = guard_cos_phi(a.phi)?;
    let sp = a.phi.sin();
    let (st, ct) = a.theta.sin_cos();
    Ok(AngleState {
        phi: u.pump * cp * ct * ct / SQRT_2 - u.stokes * st / 2.0,
        theta: u.stokes * ct * (sp / cp) / 2.0 + u.pump * ct * st * sp / SQRT_2,
    })
}

pub fn xcoordinate_rhs(s: &CartesianState3, u: &PulsePair) -> CartesianState3 {
    CartesianState3 {
        x1: u.pump * s.x1 * s.y2,
        y2: -u.stokes * s.x3 / 2.0 - u.pump * s.x1 * s.x1 / 2.0,
        x3: u.stokes * s.y2 / 2.0,
    }
}

/// Adjoint flow `-dH_c/d(phi, theta)`.
pub fn costate_rhs(a: &AngleState, c: &Costate3, u: &PulsePair) -> Result<Costate3> {
    let cp = guard_cos_phi(a.phi)?;
    let sp = a.phi.sin();
    let (st, ct) = a.theta.sin_cos();
    let (s2t, c2t) = (2.0 * a.theta).sin_cos();
    let tp = sp / cp;
    let (p, s) = (u.pump, u.stokes);
    Ok(Costate3 {
        l_phi: c.l_phi * p * sp * ct * ct / SQRT_2
            - c.l_theta * (s * ct / (2.0 * cp * cp) + p * s2t * cp / (2.0 * SQRT_2)),
        l_theta: c.l_phi * (p * cp * s2t / SQRT_2 + s * ct / 2.0)
            + c.l_theta * (s * st * tp / 2.0 - p * c2t * sp / SQRT_2),
    })
}

/// Switching functions: `H_c = Omega_p H1 + Omega_s H2`.
pub fn h1h2(a: &AngleState, c: &Costate3) -> Result<(f64, f64)> {
    let cp = guard_cos_phi(a.phi)?;
    let sp = a.phi.sin();
    let (st, ct) = a.theta.sin_cos();
    let h1 = c.l_phi * cp * ct * ct / SQRT_2 + c.l_theta * (2.0 * a.theta).sin() * sp / (2.0 * SQRT_2);
    let h2 = c.l_theta * ct * (sp / cp) / 2.0 - c.l_phi * st / 2.0;
    Ok((h1, h2))
}

pub fn control_hamiltonian(a: &AngleState, c: &Costate3, u: &PulsePair) -> Result<f64> {
    let (h1, h2) = h1h2(a, c)?;
    Ok(u.pump * h1 + u.stokes * h2)
}

/// Time-optimal pulses: the field magnitude saturates at `omega0` and points along `(H1, H2)`.
pub fn bang_control(a: &AngleState, c: &Costate3, omega0: f64) -> Result<PulsePair> {
    let (h1, h2) = h1h2(a, c)?;
    bang_from_switching(h1, h2, omega0)
}

pub fn bang_from_switching(h1: f64, h2: f64, omega0: f64) -> Result<PulsePair> {
    let norm_sq = h1 * h1 + h2 * h2;
    if norm_sq <= SWITCHING_GUARD {
        return Err(Error::SwitchingDegeneracy { norm_sq });
    }
    let n = norm_sq.sqrt();
    Ok(PulsePair {
        pump: omega0 * h1 / n,
        stokes: omega0 * h2 / n,
    })
}

/// Inverts the angle equations for the pulses. Used to validate recorded pulses.
pub fn pulses_from_angle_rates(a: &AngleState, rates: &AngleState) -> Result<PulsePair> {
    let (sp, cp) = a.phi.sin_cos();
    if rates.phi == 0.0 && rates.theta == 0.0 {
        return Ok(PulsePair { pump: 0.0, stokes: 0.0 });
    }
    if sp.abs() <= ANGLE_GUARD || cp.abs() <= ANGLE_GUARD {
        return Err(Error::AngleSingularity {
            phi: a.phi,
            theta: a.theta,
        });
    }
    let (st, ct) = a.theta.sin_cos();
    Ok(PulsePair {
        stokes: 2.0 * (rates.theta * (cp / sp) * ct - rates.phi * st),
        pump: SQRT_2 * (rates.phi / cp + rates.theta * (st / ct) / sp),
    })
}

/// Energy-optimal pulses, `(Omega_p, Omega_s) = (H1, H2)`.
pub fn energy_control(a: &AngleState, c: &Costate3) -> Result<PulsePair> {
    let (pump, stokes) = h1h2(a, c)?;
    Ok(PulsePair { pump, stokes })
}

/// `(1/2) tanh^2(omega0 t / sqrt 2)`, an approximation of `y2^2 + x3^2` on the time optimum.
pub fn ansatz_population(t: f64, omega0: f64) -> f64 {
    0.5 * (omega0 * t / SQRT_2).tanh().powi(2)
}

/// One- and two-photon detunings `(Delta_P, Delta_S)` that absorb the Kerr shifts `K1..K3`.
pub fn raman_lock(k1: f64, k2: f64, k3: f64) -> (f64, f64) {
    (2.0 * k1 - k2, k3 - k2)
}

/// Control law closing the state-costate loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    /// Bang control with field magnitude `omega0`.
    TimeOptimal { omega0: f64 },
    /// Pulses equal to the switching pair.
    EnergyOptimal,
}

impl ControlLaw {
    pub fn pulses(&self, a: &AngleState, c: &Costate3) -> Result<PulsePair> {
        match *self {
            ControlLaw::TimeOptimal { omega0 } => bang_control(a, c, omega0),
            ControlLaw::EnergyOptimal => energy_control(a, c),
        }
    }
}

/// Unpacks `[phi, theta, lambda_phi, lambda_theta]`.
pub fn split_extended(y: &[f64]) -> (AngleState, Costate3) {
    (
        AngleState { phi: y[0], theta: y[1] },
        Costate3 {
            l_phi: y[2],
            l_theta: y[3],
        },
    )
}

/// Right-hand side of the closed-loop extended system `[phi, theta, lambda_phi, lambda_theta]`.
///
/// Same result as composing [`ControlLaw::pulses`], [`angle_rhs`] and
/// [`costate_rhs`], with the trigonometry evaluated once.
pub fn extremal_rhs(law: ControlLaw, y: &[f64; 4]) -> Result<[f64; 4]> {
    let [phi, theta, lp, lt] = *y;
    let (sp, cp) = phi.sin_cos();
    if cp.abs() <= ANGLE_GUARD {
        return Err(Error::PhiSingularity { phi });
    }
    let (st, ct) = theta.sin_cos();
    let tp = sp / cp;
    let s2t = 2.0 * st * ct;
    let c2t = ct * ct - st * st;
    let h1 = lp * cp * ct * ct / SQRT_2 + lt * s2t * sp / (2.0 * SQRT_2);
    let h2 = lt * ct * tp / 2.0 - lp * st / 2.0;
    let (p, s) = match law {
        ControlLaw::TimeOptimal { omega0 } => {
            let u = bang_from_switching(h1, h2, omega0)?;
            (u.pump, u.stokes)
        }
        ControlLaw::EnergyOptimal => (h1, h2),
    };
    Ok([
        p * cp * ct * ct / SQRT_2 - s * st / 2.0,
        s * ct * tp / 2.0 + p * ct * st * sp / SQRT_2,
        lp * p * sp * ct * ct / SQRT_2 - lt * (s * ct / (2.0 * cp * cp) + p * s2t * cp / (2.0 * SQRT_2)),
        lp * (p * cp * s2t / SQRT_2 + s * ct / 2.0) + lt * (s * st * tp / 2.0 - p * c2t * sp / SQRT_2),
    ])
}
