//! Energy-optimal three-level transfer in a prescribed time, checked by
//! re-integrating the energy-optimal closed loop.

use qsl::shooting::{self, ShotConfig};

fn main() -> qsl::Result<()> {
    let cfg = ShotConfig::new(0.002);
    let opt = shooting::refine(1.85, 0.45, &cfg)?;
    for duration in [10.0, 20.0] {
        let e = shooting::energy_from_optimum(&opt, duration);
        let hit = shooting::energy_shot(&opt, &e, &cfg)?.ok_or(qsl::Error::NoHit)?;
        println!(
            "T = {duration}: Omega0_min = {:.6}, E_min = {:.6}, closed loop reaches the target at {:.8}",
            e.omega0_min, e.e_min, hit.t
        );
    }
    Ok(())
}
