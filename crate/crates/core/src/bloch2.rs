//! Two-level system with a 1:2 resonance.
//!
//! The amplitudes obey `|psi1|^2 + 2|psi2|^2 = 1` and map onto a generalized
//! Bloch surface `eta1^2 + eta2^2 = (1/2 - eta3)^2 (1/2 + eta3)` whose north pole
//! (`eta3 = 1/2`) is a hyperbolic fixed point. Kerr shifts enter only through an
//! effective detuning, so choosing the detuning schedule from [`lock_detuning`]
//! leaves the resonant flow. The time-optimal control is a constant resonant
//! pulse, which makes the minimum area a closed form in `eta3`.

use num_complex::Complex64;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::ode::{self, IntegratorConfig, Trajectory};

/// Distance from the north pole below which a target is rejected as unreachable.
pub const NORTH_POLE_GUARD: f64 = 1e-15;

/// Third-order (Kerr) couplings, in units of Omega0. `Lambda21 = Lambda12`.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KerrParams {
    pub l11: f64,
    pub l12: f64,
    pub l22: f64,
}

impl KerrParams {
    pub fn new(l11: f64, l12: f64, l22: f64) -> Self {
        Self { l11, l12, l22 }
    }

    /// Population-dependent part, `2 L11 + L22/2 - 2 L12`.
    pub fn lambda_s(&self) -> f64 {
        2.0 * self.l11 + 0.5 * self.l22 - 2.0 * self.l12
    }

    /// Static part, `2 L11 - L21`.
    pub fn lambda_a(&self) -> f64 {
        2.0 * self.l11 - self.l12
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState2 {
    pub psi1: Complex64,
    pub psi2: Complex64,
}

impl AmplitudeState2 {
    pub fn ground() -> Self {
        Self {
            psi1: Complex64::new(1.0, 0.0),
            psi2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm(&self) -> f64 {
        self.psi1.norm_sqr() + 2.0 * self.psi2.norm_sqr()
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.psi1.re, self.psi1.im, self.psi2.re, self.psi2.im]
    }

    pub fn from_array(y: &[f64; 4]) -> Self {
        Self {
            psi1: Complex64::new(y[0], y[1]),
            psi2: Complex64::new(y[2], y[3]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl BlochState {
    pub const SOUTH_POLE: Self = Self {
        eta1: 0.0,
        eta2: 0.0,
        eta3: -0.5,
    };
    pub const NORTH_POLE: Self = Self {
        eta1: 0.0,
        eta2: 0.0,
        eta3: 0.5,
    };

    /// Left-hand side of the surface equation; zero on the generalized sphere.
    pub fn surface_residual(&self) -> f64 {
        self.eta1 * self.eta1 + self.eta2 * self.eta2 - (0.5 - self.eta3).powi(2) * (0.5 + self.eta3)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.eta1, self.eta2, self.eta3]
    }

    pub fn from_array(y: &[f64; 3]) -> Self {
        Self {
            eta1: y[0],
            eta2: y[1],
            eta3: y[2],
        }
    }
}

/// Conjugate momenta of `(eta1, eta2, eta3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costate2 {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

pub fn eta_from_amplitudes(s: &AmplitudeState2) -> BlochState {
    let z = s.psi1 * s.psi1 * s.psi2.conj();
    BlochState {
        eta1: SQRT_2 * z.re,
        eta2: SQRT_2 * z.im,
        eta3: s.psi2.norm_sqr() - 0.5 * s.psi1.norm_sqr(),
    }
}

pub fn effective_detuning(detuning: f64, eta3: f64, kerr: &KerrParams) -> f64 {
    -detuning + kerr.lambda_a() - kerr.lambda_s() * (0.5 + eta3)
}

/// Detuning that cancels the effective detuning for the current inversion.
pub fn lock_detuning(eta3: f64, kerr: &KerrParams) -> f64 {
    kerr.lambda_a() - kerr.lambda_s() * (0.5 + eta3)
}

fn coupling_factor(eta3: f64) -> f64 {
    3.0 * eta3 * eta3 - eta3 - 0.25
}

pub fn bloch_rhs(s: &BlochState, omega: f64, eff_detuning: f64) -> BlochState {
    BlochState {
        eta1: eff_detuning * s.eta2,
        eta2: 0.5 * omega * coupling_factor(s.eta3) - eff_detuning * s.eta1,
        eta3: omega * s.eta2,
    }
}

pub fn amplitude_rhs(s: &AmplitudeState2, omega: f64, detuning: f64, kerr: &KerrParams) -> AmplitudeState2 {
    let n1 = s.psi1.norm_sqr();
    let n2 = s.psi2.norm_sqr();
    let minus_i = Complex64::new(0.0, -1.0);
    let diag1 = -detuning / 3.0 + kerr.l11 * n1 + kerr.l12 * n2;
    let diag2 = detuning / 3.0 + kerr.l12 * n1 + kerr.l22 * n2;
    AmplitudeState2 {
        psi1: minus_i * (diag1 * s.psi1 + omega / SQRT_2 * s.psi1.conj() * s.psi2),
        psi2: minus_i * (diag2 * s.psi2 + omega / (2.0 * SQRT_2) * s.psi1 * s.psi1),
    }
}

/// Costate flow `-dh_c/deta` for a given effective detuning that depends on eta3 with
/// slope `d_eff_detuning_d_eta3`.
pub fn costate_rhs(
    s: &BlochState,
    c: &Costate2,
    omega: f64,
    eff_detuning: f64,
    d_eff_detuning_d_eta3: f64,
) -> Costate2 {
    Costate2 {
        l1: c.l2 * eff_detuning,
        l2: -c.l1 * eff_detuning - c.l3 * omega,
        l3: -0.5 * c.l2 * omega * (6.0 * s.eta3 - 1.0) - d_eff_detuning_d_eta3 * switching_function(s, c),
    }
}

/// `lambda1 eta2 - lambda2 eta1`, which must vanish on a time-optimal extremal.
pub fn switching_function(s: &BlochState, c: &Costate2) -> f64 {
    c.l1 * s.eta2 - c.l2 * s.eta1
}

/// Field implied by the renormalized control Hamiltonian (`h_c = 1`).
pub fn renormalized_field(s: &BlochState, c: &Costate2) -> f64 {
    2.0 / (c.l2 * coupling_factor(s.eta3) + 2.0 * c.l3 * s.eta2)
}

/// Inversion along the resonant constant pulse started at the south pole.
pub fn analytic_eta3(t: f64, omega0: f64) -> f64 {
    (0.5 * omega0 * t).tanh().powi(2) - 0.5
}

/// Same resonant meridian flow, returned as a full Bloch vector (`eta1 = 0`).
pub fn analytic_state(t: f64, omega0: f64) -> BlochState {
    let th = (0.5 * omega0 * t).tanh();
    let eta3 = th * th - 0.5;
    // eta2 = d(eta3)/dt / Omega0 = th (1 - th^2)
    BlochState {
        eta1: 0.0,
        eta2: th * (1.0 - th * th),
        eta3,
    }
}

fn check_inversion(eta3: f64) -> Result<()> {
    if !(-0.5..=0.5).contains(&eta3) {
        return Err(Error::Domain(format!("eta3 = {eta3} outside [-1/2, 1/2]")));
    }
    if 0.5 - eta3 < NORTH_POLE_GUARD {
        return Err(Error::Domain("north pole is unreachable: infinite pulse area".into()));
    }
    Ok(())
}

/// Minimum pulse area `Omega0 T_min` between two inversions on the meridian.
pub fn min_area(eta3_initial: f64, eta3_final: f64) -> Result<f64> {
    check_inversion(eta3_initial)?;
    check_inversion(eta3_final)?;
    let branch = |e: f64| (0.5 + e).sqrt().atanh();
    Ok(2.0 * (branch(eta3_final) - branch(eta3_initial)).abs())
}

/// Minimum area computed by adaptive quadrature of `d eta3 / sqrt((1/2 - eta3)^2 (1/2 + eta3))`.
///
/// The square-root endpoint at `eta3 = -1/2` is removed with `eta3 = u^2 - 1/2`,
/// after which the integrand `2 / (1 - u^2)` is smooth on the integration range.
pub fn min_area_quadrature(eta3_initial: f64, eta3_final: f64, tol: f64) -> Result<f64> {
    check_inversion(eta3_initial)?;
    check_inversion(eta3_final)?;
    let u0 = (0.5 + eta3_initial).sqrt();
    let u1 = (0.5 + eta3_final).sqrt();
    let (lo, hi) = if u0 <= u1 { (u0, u1) } else { (u1, u0) };
    Ok(ode::adaptive_simpson(|u| 2.0 / (1.0 - u * u), lo, hi, tol))
}

/// Minimum area for reaching `eta3 = 1/2 - eps` from the south pole.
pub fn area_for_epsilon(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("epsilon = {eps} outside (0, 1]")));
    }
    min_area(-0.5, 0.5 - eps)
}

/// Final transfer probability `tanh^2(A/2)` of the nonlinear system.
pub fn transfer_probability(area: f64) -> f64 {
    (0.5 * area).tanh().powi(2)
}

/// Rabi transfer probability `sin^2(A/2)` of the linear two-level system.
pub fn linear_probability(area: f64) -> f64 {
    (0.5 * area).sin().powi(2)
}

pub fn asymptotic_epsilon(area: f64) -> f64 {
    4.0 * (-area).exp()
}

pub fn asymptotic_area(eps: f64) -> f64 {
    -(eps / 4.0).ln()
}

/// Minimum coupling and energy (hbar = 1) for a transfer in fixed duration `duration`.
pub fn energy_optimum(duration: f64, eta3_initial: f64, eta3_final: f64) -> Result<(f64, f64)> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::Domain(format!("duration {duration} must be positive")));
    }
    let area = min_area(eta3_initial, eta3_final)?;
    let omega = area / duration;
    Ok((omega, omega * omega * duration))
}

/// One row of the time-optimal two-level history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSample {
    pub t: f64,
    pub bloch: BlochState,
    pub ground_population: f64,
    pub upper_population: f64,
    pub lock_detuning: f64,
}

/// Integrates the amplitude equations under the resonant constant pulse
/// `omega0` with the Kerr-locking detuning, from the ground state to `duration`.
pub fn simulate_locked(
    kerr: &KerrParams,
    omega0: f64,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<TwoLevelSample>> {
    let traj = integrate_locked(kerr, omega0, duration, cfg)?;
    Ok(traj
        .iter()
        .map(|(t, y)| {
            let s = AmplitudeState2::from_array(y);
            let bloch = eta_from_amplitudes(&s);
            TwoLevelSample {
                t,
                bloch,
                ground_population: s.psi1.norm_sqr(),
                upper_population: 2.0 * s.psi2.norm_sqr(),
                lock_detuning: lock_detuning(bloch.eta3, kerr),
            }
        })
        .collect())
}

pub fn integrate_locked(
    kerr: &KerrParams,
    omega0: f64,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<4>> {
    let kerr = *kerr;
    ode::integrate(
        move |_, y| {
            let s = AmplitudeState2::from_array(y);
            let eta3 = s.psi2.norm_sqr() - 0.5 * s.psi1.norm_sqr();
            let d = amplitude_rhs(&s, omega0, lock_detuning(eta3, &kerr), &kerr);
            Ok(d.to_array())
        },
        AmplitudeState2::ground().to_array(),
        (0.0, duration),
        cfg,
    )
}

/// Integrates the Bloch equations at zero effective detuning from the south pole.
pub fn integrate_resonant(omega0: f64, duration: f64, cfg: &IntegratorConfig) -> Result<Trajectory<3>> {
    ode::integrate(
        move |_, y| Ok(bloch_rhs(&BlochState::from_array(y), omega0, 0.0).to_array()),
        BlochState::SOUTH_POLE.to_array(),
        (0.0, duration),
        cfg,
    )
}

/// State and costate along the time-optimal meridian, with `lambda1 = 0`,
/// `lambda2(0) = 2 / omega0` and a free `lambda3(0)`. Layout: `[eta1, eta2, eta3, l1, l2, l3]`.
pub fn integrate_extremal(
    omega0: f64,
    lambda3_initial: f64,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<6>> {
    let y0 = [0.0, 0.0, -0.5, 0.0, 2.0 / omega0, lambda3_initial];
    ode::integrate(
        move |_, y| {
            let s = BlochState::from_array(&[y[0], y[1], y[2]]);
            let c = Costate2 {
                l1: y[3],
                l2: y[4],
                l3: y[5],
            };
            let ds = bloch_rhs(&s, omega0, 0.0);
            let dc = costate_rhs(&s, &c, omega0, 0.0, 0.0);
            Ok([ds.eta1, ds.eta2, ds.eta3, dc.l1, dc.l2, dc.l3])
        },
        y0,
        (0.0, duration),
        cfg,
    )
}

/// Probability laws sampled against pulse area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityPoint {
    pub area: f64,
    pub nonlinear: f64,
    pub linear: f64,
    pub asymptotic: f64,
}

pub fn probability_curve(area_max: f64, step: f64) -> Result<Vec<ProbabilityPoint>> {
    if !(step > 0.0 && area_max.is_finite() && area_max >= 0.0) {
        return Err(Error::Domain(format!(
            "curve needs area_max >= 0 and step > 0 (got {area_max}, {step})"
        )));
    }
    let n = (area_max / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| {
            let area = k as f64 * step;
            ProbabilityPoint {
                area,
                nonlinear: transfer_probability(area),
                linear: linear_probability(area),
                asymptotic: 1.0 - asymptotic_epsilon(area),
            }
        })
        .collect())
}
