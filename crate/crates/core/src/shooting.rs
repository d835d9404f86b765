//! Indirect (shooting) solution of the three-level time-optimal transfer.
//!
//! A shot integrates the closed-loop state/costate system from
//! `(phi, theta) = (0, 0)` with a chosen initial costate and reports the first
//! time `x3^2` reaches `(1 - eps)/2`. The bang control only depends on the
//! direction of the costate, so every initial costate on a ray through the
//! origin gives the same shot.

use rayon::prelude::*;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::lambda3::{self, AngleState, ControlLaw, Costate3, PulsePair};
use crate::ode::{self, EventHit, IntegratorConfig, Trajectory};
use crate::simplex::NelderMead;

/// Initial costate used throughout when only the ratio matters.
pub const DEFAULT_LAMBDA_PHI: f64 = 1.85;
pub const DEFAULT_HORIZON: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShotConfig {
    pub eps: f64,
    /// Search horizon for the hit time, in units of 1/Omega0.
    pub horizon: f64,
    pub integrator: IntegratorConfig,
}

impl ShotConfig {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            horizon: DEFAULT_HORIZON,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(format!("epsilon {} outside (0, 1)", self.eps)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "horizon {} must be positive",
                self.horizon
            )));
        }
        self.integrator.validate()
    }

    /// Target value of `x3^2`.
    pub fn target(&self) -> f64 {
        0.5 * (1.0 - self.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum NoHitReason {
    Horizon,
    PhiSingularity,
    SwitchingDegeneracy,
    IntegratorFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum ShotOutcome {
    Hit(f64),
    NoHit(NoHitReason),
}

impl ShotOutcome {
    pub fn time(&self) -> Option<f64> {
        match self {
            ShotOutcome::Hit(t) => Some(*t),
            ShotOutcome::NoHit(_) => None,
        }
    }
}

fn x3_sq(y: &[f64; 4]) -> f64 {
    let x3 = -y[0].cos() * y[1].sin() / SQRT_2;
    x3 * x3
}

/// Closed-loop integration to the target; `Ok(None)` when the horizon passes first.
pub fn integrate_to_target(
    law: ControlLaw,
    costate: Costate3,
    target: f64,
    horizon: f64,
    integrator: &IntegratorConfig,
) -> Result<Option<EventHit<4>>> {
    let y0 = [0.0, 0.0, costate.l_phi, costate.l_theta];
    ode::locate_event(
        move |_, y| lambda3::extremal_rhs(law, y),
        y0,
        (0.0, horizon),
        move |_, y| x3_sq(y) - target,
        integrator,
    )
}

fn classify(err: &Error) -> NoHitReason {
    match err {
        Error::PhiSingularity { .. } => NoHitReason::PhiSingularity,
        Error::SwitchingDegeneracy { .. } => NoHitReason::SwitchingDegeneracy,
        _ => NoHitReason::IntegratorFailure,
    }
}

/// Time-optimal shot with `Omega0 = 1` from the initial costate `(l_phi, l_theta)`.
pub fn shoot(l_phi: f64, l_theta: f64, cfg: &ShotConfig) -> Result<ShotOutcome> {
    cfg.validate()?;
    Ok(shoot_unchecked(l_phi, l_theta, cfg))
}

fn shoot_unchecked(l_phi: f64, l_theta: f64, cfg: &ShotConfig) -> ShotOutcome {
    let law = ControlLaw::TimeOptimal { omega0: 1.0 };
    match integrate_to_target(
        law,
        Costate3 { l_phi, l_theta },
        cfg.target(),
        cfg.horizon,
        &cfg.integrator,
    ) {
        Ok(Some(hit)) => ShotOutcome::Hit(hit.t),
        Ok(None) => ShotOutcome::NoHit(NoHitReason::Horizon),
        Err(e) => ShotOutcome::NoHit(classify(&e)),
    }
}

/// A converged time-optimal extremal with its sampled history.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub l_phi: f64,
    pub l_theta: f64,
    pub eps: f64,
    pub t_min: f64,
    /// Generalized pulse area `Omega0 T_min` (`Omega0 = 1`).
    pub a_min: f64,
    /// `[phi, theta, lambda_phi, lambda_theta]` at each accepted step, ending at the hit.
    pub trajectory: Trajectory<4>,
    pub pulses: Vec<PulsePair>,
}

impl Optimum {
    pub fn angles(&self) -> impl Iterator<Item = AngleState> + '_ {
        self.trajectory.states.iter().map(|y| lambda3::split_extended(y).0)
    }

    /// Largest `|Omega_p^2 + Omega_s^2 - 1|` over the samples.
    pub fn max_magnitude_defect(&self) -> f64 {
        self.pulses
            .iter()
            .map(|u| (u.magnitude_sq() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `(max - min) / mean` of the control Hamiltonian along the extremal.
    pub fn hamiltonian_variation(&self) -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for (y, u) in self.trajectory.states.iter().zip(&self.pulses) {
            let (a, c) = lambda3::split_extended(y);
            let hc = lambda3::control_hamiltonian(&a, &c, u)?;
            lo = lo.min(hc);
            hi = hi.max(hc);
            sum += hc;
        }
        let mean = sum / self.pulses.len() as f64;
        Ok((hi - lo) / mean.abs())
    }
}

/// Shot that keeps the full trajectory and pulse history.
pub fn extremal(l_phi: f64, l_theta: f64, cfg: &ShotConfig) -> Result<Optimum> {
    cfg.validate()?;
    let law = ControlLaw::TimeOptimal { omega0: 1.0 };
    let hit = integrate_to_target(
        law,
        Costate3 { l_phi, l_theta },
        cfg.target(),
        cfg.horizon,
        &cfg.integrator,
    )?
    .ok_or(Error::NoHit)?;
    let pulses = hit
        .trajectory
        .states
        .iter()
        .map(|y| {
            let (a, c) = lambda3::split_extended(y);
            law.pulses(&a, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Optimum {
        l_phi,
        l_theta,
        eps: cfg.eps,
        t_min: hit.t,
        a_min: hit.t,
        trajectory: hit.trajectory,
        pulses,
    })
}

/// Hit times over a rectangular grid of initial costates. `NaN` marks cells
/// that miss the target inside the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub l_phi: Vec<f64>,
    pub l_theta: Vec<f64>,
    /// Row-major, `times[i * l_theta.len() + j]` for `(l_phi[i], l_theta[j])`.
    pub times: Vec<f64>,
}

impl LandscapeGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.times[i * self.l_theta.len() + j]
    }

    /// Smallest finite hit time as `(i, j, T)`.
    pub fn min(&self) -> Option<(usize, usize, f64)> {
        let n = self.l_theta.len();
        self.times
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, t)| (k / n, k % n, *t))
    }

    pub fn hit_count(&self) -> usize {
        self.times.iter().filter(|t| t.is_finite()).count()
    }
}

/// `log10(T - T_min)`, clamped below at `log10(1e-12)`.
pub fn log_excess(t: f64, t_min: f64) -> f64 {
    (t - t_min).max(1e-12).log10()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn landscape_cells(l_phi: &[f64], l_theta: &[f64], cfg: &ShotConfig, parallel: bool) -> Result<LandscapeGrid> {
    cfg.validate()?;
    if l_phi.is_empty() || l_theta.is_empty() {
        return Err(Error::InvalidConfig("landscape axes must be nonempty".into()));
    }
    let cell = |k: usize| {
        let (i, j) = (k / l_theta.len(), k % l_theta.len());
        shoot_unchecked(l_phi[i], l_theta[j], cfg).time().unwrap_or(f64::NAN)
    };
    let total = l_phi.len() * l_theta.len();
    let times = if parallel {
        (0..total).into_par_iter().map(cell).collect()
    } else {
        (0..total).map(cell).collect()
    };
    Ok(LandscapeGrid {
        l_phi: l_phi.to_vec(),
        l_theta: l_theta.to_vec(),
        times,
    })
}

/// Grid of shots, evaluated in parallel on the current rayon pool.
pub fn landscape(l_phi: &[f64], l_theta: &[f64], cfg: &ShotConfig) -> Result<LandscapeGrid> {
    landscape_cells(l_phi, l_theta, cfg, true)
}

pub fn landscape_serial(l_phi: &[f64], l_theta: &[f64], cfg: &ShotConfig) -> Result<LandscapeGrid> {
    landscape_cells(l_phi, l_theta, cfg, false)
}

/// Objective for the simplex: hit time, or `horizon + 1` for a miss.
fn penalized_time(l_phi: f64, l_theta: f64, cfg: &ShotConfig) -> f64 {
    shoot_unchecked(l_phi, l_theta, cfg).time().unwrap_or(cfg.horizon + 1.0)
}

/// Initial simplex edge used by [`refine`].
pub const REFINE_STEP: f64 = 0.05;

/// Spacing and reach of the outward search in [`nearest_feasible`].
pub const FEASIBILITY_STEP: f64 = 0.01;
pub const FEASIBILITY_STEPS: usize = 100;

/// The guess itself if it hits, else the closest hitting `lambda_theta` on a
/// grid of spacing [`FEASIBILITY_STEP`] around it (lower side first on ties).
pub fn nearest_feasible(l_phi: f64, l_theta_guess: f64, cfg: &ShotConfig) -> Option<f64> {
    let hits = |lt: f64| shoot_unchecked(l_phi, lt, cfg).time().is_some();
    if hits(l_theta_guess) {
        return Some(l_theta_guess);
    }
    (1..=FEASIBILITY_STEPS).find_map(|k| {
        let d = k as f64 * FEASIBILITY_STEP;
        [l_theta_guess - d, l_theta_guess + d].into_iter().find(|&lt| hits(lt))
    })
}

/// Minimizes the hit time over `lambda_theta` at fixed `lambda_phi`. A guess
/// that misses the target is first moved to [`nearest_feasible`].
pub fn refine(l_phi: f64, l_theta_guess: f64, cfg: &ShotConfig) -> Result<Optimum> {
    refine_with(&NelderMead::default(), l_phi, l_theta_guess, cfg)
}

pub fn refine_with(nm: &NelderMead, l_phi: f64, l_theta_guess: f64, cfg: &ShotConfig) -> Result<Optimum> {
    cfg.validate()?;
    let start = nearest_feasible(l_phi, l_theta_guess, cfg).ok_or(Error::NoHit)?;
    let min = nm.minimize(|x: &[f64; 1]| penalized_time(l_phi, x[0], cfg), [start], [REFINE_STEP])?;
    extremal(l_phi, min.x[0], cfg)
}

/// Minimizes over both initial costates. The minimum is a ray, so the result
/// is only meaningful through its ratio `lambda_theta / lambda_phi`.
pub fn refine_2d(l_phi_guess: f64, l_theta_guess: f64, cfg: &ShotConfig) -> Result<Optimum> {
    cfg.validate()?;
    if shoot_unchecked(l_phi_guess, l_theta_guess, cfg).time().is_none() {
        return Err(Error::NoHit);
    }
    let min = NelderMead::default().minimize(
        |x: &[f64; 2]| penalized_time(x[0], x[1], cfg),
        [l_phi_guess, l_theta_guess],
        [REFINE_STEP, REFINE_STEP],
    )?;
    extremal(min.x[0], min.x[1], cfg)
}

/// Best `lambda_theta` on a uniform 1-D grid at fixed `lambda_phi`.
pub fn scan_l_theta(l_phi: f64, lo: f64, hi: f64, n: usize, cfg: &ShotConfig) -> Result<Option<(f64, f64)>> {
    cfg.validate()?;
    Ok(linspace(lo, hi, n)
        .into_iter()
        .filter_map(|lt| shoot_unchecked(l_phi, lt, cfg).time().map(|t| (lt, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1)))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AreaPoint {
    pub eps: f64,
    pub a_min: f64,
    pub l_theta: f64,
}

/// Minimum generalized area for each `eps`, returned in ascending `eps`.
///
/// The optimum sits on the edge of the region of costates whose first
/// approach reaches the target, and that edge moves to larger
/// `lambda_theta` as `eps` grows. Walking `eps` upwards therefore keeps each
/// warm start (the previous optimum) on the feasible side of the new edge.
/// A cold start, or a warm start that misses, scans `lambda_theta` over `[0, 3]`.
pub fn area_curve(eps_list: &[f64], l_phi: f64, base: &ShotConfig) -> Result<Vec<AreaPoint>> {
    let mut sorted = eps_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(sorted.len());
    let mut warm: Option<f64> = None;
    for eps in sorted {
        let cfg = ShotConfig { eps, ..*base };
        cfg.validate()?;
        let guess = match warm.filter(|&g| shoot_unchecked(l_phi, g, &cfg).time().is_some()) {
            Some(g) => g,
            None => scan_l_theta(l_phi, 0.0, 3.0, 121, &cfg)?.ok_or(Error::NoHit)?.0,
        };
        let opt = refine(l_phi, guess, &cfg)?;
        warm = Some(opt.l_theta);
        out.push(AreaPoint {
            eps,
            a_min: opt.a_min,
            l_theta: opt.l_theta,
        });
    }
    Ok(out)
}

/// Least-squares line `A = slope ln(eps) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits the points with `eps <= 0.1`; at least five are required.
pub fn fit_asymptote(curve: &[(f64, f64)]) -> Result<LogFit> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(eps, a)| *eps > 0.0 && *eps <= 0.1 && a.is_finite())
        .map(|(eps, a)| (eps.ln(), *a))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LogFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EnergyOptimum3 {
    pub duration: f64,
    pub a_min: f64,
    pub omega0_min: f64,
    pub e_min: f64,
    pub l_phi: f64,
    pub l_theta: f64,
}

/// Minimum energy for a transfer of fixed duration, derived from the time optimum.
pub fn energy_optimum3(duration: f64, l_phi: f64, l_theta_guess: f64, cfg: &ShotConfig) -> Result<EnergyOptimum3> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::Domain(format!("duration {duration} must be positive")));
    }
    let opt = refine(l_phi, l_theta_guess, cfg)?;
    Ok(energy_from_optimum(&opt, duration))
}

pub fn energy_from_optimum(opt: &Optimum, duration: f64) -> EnergyOptimum3 {
    let omega0_min = opt.a_min / duration;
    EnergyOptimum3 {
        duration,
        a_min: opt.a_min,
        omega0_min,
        e_min: opt.a_min * opt.a_min / duration,
        l_phi: opt.l_phi,
        l_theta: opt.l_theta,
    }
}

/// Initial costate for the energy-optimal law that reproduces the time optimum
/// with field magnitude `omega0_min`. At `(phi, theta) = (0, 0)` the switching
/// pair is `(lambda_phi / sqrt 2, 0)`.
pub fn energy_costate(opt: &Optimum, omega0_min: f64) -> Costate3 {
    let scale = omega0_min * SQRT_2 / opt.l_phi.abs();
    Costate3 {
        l_phi: opt.l_phi * scale,
        l_theta: opt.l_theta * scale,
    }
}

/// Hit time of the energy-optimal closed loop started from [`energy_costate`].
pub fn energy_shot(opt: &Optimum, energy: &EnergyOptimum3, cfg: &ShotConfig) -> Result<Option<EventHit<4>>> {
    let horizon = cfg.horizon.max(2.0 * energy.duration);
    let integrator = IntegratorConfig {
        max_step: cfg.integrator.max_step / energy.omega0_min.max(1.0),
        ..cfg.integrator
    };
    integrate_to_target(
        ControlLaw::EnergyOptimal,
        energy_costate(opt, energy.omega0_min),
        cfg.target(),
        horizon,
        &integrator,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_costate_never_hits() {
        let out = shoot(0.0, 0.0, &ShotConfig::new(0.002)).unwrap();
        assert_eq!(out, ShotOutcome::NoHit(NoHitReason::SwitchingDegeneracy));
        let grid = landscape(&[0.0], &[0.0], &ShotConfig::new(0.002)).unwrap();
        assert!(grid.times[0].is_nan());
        assert!(grid.min().is_none());
    }

    #[test]
    fn invalid_configs() {
        assert!(shoot(1.0, 0.4, &ShotConfig::new(0.0)).is_err());
        assert!(shoot(1.0, 0.4, &ShotConfig::new(1.0)).is_err());
        let cfg = ShotConfig {
            horizon: -1.0,
            ..ShotConfig::new(0.1)
        };
        assert!(shoot(1.0, 0.4, &cfg).is_err());
        assert!(landscape(&[], &[1.0], &ShotConfig::new(0.1)).is_err());
    }

    #[test]
    fn fit_exact_line() {
        let pts: Vec<(f64, f64)> = (0..7)
            .map(|k| {
                let eps = 10f64.powf(-1.0 - 0.3 * k as f64);
                (eps, -0.7 * eps.ln() + 2.5)
            })
            .collect();
        let fit = fit_asymptote(&pts).unwrap();
        assert!((fit.slope + 0.7).abs() < 1e-12 && (fit.intercept - 2.5).abs() < 1e-12);
        assert_eq!(fit.points, 7);
        assert!(matches!(
            fit_asymptote(&pts[..4]),
            Err(Error::InsufficientData { needed: 5, got: 4 })
        ));
        // points above eps = 0.1 are ignored
        let mut wide = pts.clone();
        wide.push((0.5, 100.0));
        assert_eq!(fit_asymptote(&wide).unwrap(), fit);
    }

    #[test]
    fn two_level_law_fit() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|k| {
                let eps = 10f64.powf(-6.0 - 0.3 * k as f64);
                (eps, crate::bloch2::area_for_epsilon(eps).unwrap())
            })
            .collect();
        let fit = fit_asymptote(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-4, "{fit:?}");
        assert!((fit.intercept - 4f64.ln()).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn excess_clamp() {
        assert_eq!(log_excess(7.4, 7.4), -12.0);
        assert!((log_excess(8.4, 7.4) - 0.0).abs() < 1e-12);
        assert_eq!(linspace(-3.0, 3.0, 3), vec![-3.0, 0.0, 3.0]);
    }
}
