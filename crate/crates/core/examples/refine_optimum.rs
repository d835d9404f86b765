//! Nelder-Mead refinement of the time-optimal costate and the properties of
//! the resulting extremal.

use qsl::lambda3;
use qsl::shooting::{self, ShotConfig};

fn main() -> qsl::Result<()> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(0.002), |s| s.parse())
        .expect("eps must be a number");
    let cfg = ShotConfig::new(eps);
    let opt = shooting::refine(1.85, 0.5, &cfg)?;
    println!(
        "eps = {eps}: lambda_theta = {:.6}, T_min = {:.6}",
        opt.l_theta, opt.t_min
    );
    println!("max |Omega^2 - 1|   = {:.2e}", opt.max_magnitude_defect());
    println!("H_c relative spread = {:.2e}", opt.hamiltonian_variation()?);

    let mut ansatz_gap: f64 = 0.0;
    for (t, y) in opt.trajectory.iter() {
        let s = lambda3::cartesian_from_angles(&lambda3::split_extended(y).0);
        ansatz_gap = ansatz_gap.max((s.upper_weight() - lambda3::ansatz_population(t, 1.0)).abs());
    }
    println!("sup |y2^2 + x3^2 - tanh^2(t/sqrt2)/2| = {ansatz_gap:.4}");

    // the optimum is a ray in costate space
    for lp in [1.0, 2.5] {
        let other = shooting::refine(lp, opt.l_theta / opt.l_phi * lp, &cfg)?;
        println!("lambda_phi = {lp}: T_min = {:.6}", other.t_min);
    }

    println!(
        "\n{:>8} {:>9} {:>9} {:>9} {:>9}",
        "t", "Omega_p", "Omega_s", "phi", "theta"
    );
    let stride = (opt.pulses.len() / 15).max(1);
    for ((t, y), u) in opt.trajectory.iter().zip(&opt.pulses).step_by(stride) {
        println!("{t:>8.4} {:>9.5} {:>9.5} {:>9.5} {:>9.5}", u.pump, u.stokes, y[0], y[1]);
    }
    Ok(())
}
