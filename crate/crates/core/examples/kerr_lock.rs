//! Kerr terms only shift the effective detuning. Driving with the locking
//! detuning reproduces the Kerr-free resonant history.

use qsl::bloch2::{self, KerrParams};
use qsl::ode::IntegratorConfig;

fn main() -> qsl::Result<()> {
    let cfg = IntegratorConfig::default();
    let duration = bloch2::area_for_epsilon(0.002)?;
    let reference = bloch2::integrate_locked(&KerrParams::default(), 1.0, duration, &cfg)?;

    for kerr in [KerrParams::new(0.3, -0.1, 0.8), KerrParams::new(-2.0, 1.5, 0.25)] {
        let run = bloch2::simulate_locked(&kerr, 1.0, duration, &cfg)?;
        let mut worst: f64 = 0.0;
        for s in &run {
            let r = bloch2::eta_from_amplitudes(&bloch2::AmplitudeState2::from_array(&reference.sample(s.t)));
            worst = worst.max((s.bloch.eta3 - r.eta3).abs());
        }
        let last = run.last().expect("nonempty history");
        println!(
            "{kerr:?}: Lambda_s = {:.3}, Lambda_a = {:.3}, final eta3 = {:.9}, max |d eta3| = {worst:.2e}",
            kerr.lambda_s(),
            kerr.lambda_a(),
            last.bloch.eta3
        );
        println!(
            "  locking detuning from {:.4} to {:.4}",
            run[0].lock_detuning, last.lock_detuning
        );
    }
    Ok(())
}
