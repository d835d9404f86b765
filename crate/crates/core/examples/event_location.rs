//! Event location on the adaptive integrator.

use qsl::bloch2::{self, BlochState};
use qsl::lambda3::{self, ControlLaw};
use qsl::ode::{self, IntegratorConfig};

fn main() -> qsl::Result<()> {
    let cfg = IntegratorConfig::default();

    let equator = ode::locate_event(
        |_, y: &[f64; 3]| Ok(bloch2::bloch_rhs(&BlochState::from_array(y), 1.0, 0.0).to_array()),
        BlochState::SOUTH_POLE.to_array(),
        (0.0, 10.0),
        |_, y| y[2],
        &cfg,
    )?
    .expect("the resonant flow crosses the equator");
    println!(
        "eta3 = 0 at t = {:.10} (2 atanh(1/sqrt 2) = {:.10})",
        equator.t,
        2.0 * 0.5f64.sqrt().atanh()
    );

    let target = 0.5 * (1.0 - 0.002);
    let hit = ode::locate_event(
        |_, y: &[f64; 4]| lambda3::extremal_rhs(ControlLaw::TimeOptimal { omega0: 1.0 }, y),
        [0.0, 0.0, 1.85, 0.45266],
        (0.0, 15.0),
        |_, y| {
            let s = lambda3::cartesian_from_angles(&lambda3::split_extended(y).0);
            s.upper_weight() - target
        },
        &cfg,
    )?
    .expect("the optimal extremal reaches the target");
    println!(
        "y2^2 + x3^2 = {target} at t = {:.6} after {} steps",
        hit.t,
        hit.trajectory.len()
    );
    Ok(())
}
