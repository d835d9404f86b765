//! The three-level optimum seen as a nonlinear two-level problem.

use qsl::isomorphism::{self, CheckConfig};
use qsl::ode::IntegratorConfig;
use qsl::shooting::{self, ShotConfig};

fn main() -> qsl::Result<()> {
    let opt = shooting::refine(1.85, 0.45, &ShotConfig::new(0.002))?;
    let c = isomorphism::check(&opt, &CheckConfig::default(), &IntegratorConfig::default())?;
    println!("{c:#?}");
    println!("passed: {}", c.passed());
    println!(
        "final theta = {:.6} (complete transfer needs pi/2 = {:.6})",
        c.final_theta,
        std::f64::consts::FRAC_PI_2
    );

    let points =
        isomorphism::area_divergence_check(&[0.3, 0.1, 0.03, 0.01, 0.003, 0.001], 1.85, &ShotConfig::new(0.1))?;
    println!("\n{:>8} {:>10} {:>10}", "eps", "pump area", "max|rho_x|");
    for p in &points {
        println!("{:>8} {:>10.5} {:>10.7}", p.eps, p.pump_area, p.max_abs_rho_x);
    }
    println!(
        "strictly growing as eps -> 0: {}",
        isomorphism::strictly_divergent(&points)
    );
    Ok(())
}
