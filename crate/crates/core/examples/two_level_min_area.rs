//! Minimum pulse area of the 1:2 two-level transfer, closed form against
//! quadrature and the large-area asymptote.

use qsl::bloch2;

fn main() -> qsl::Result<()> {
    println!(
        "{:>8} {:>12} {:>12} {:>12}",
        "eps", "closed", "quadrature", "-ln(eps/4)"
    );
    for eps in [0.5, 0.1, 0.01, 0.002, 1e-4] {
        let closed = bloch2::area_for_epsilon(eps)?;
        let quad = bloch2::min_area_quadrature(-0.5, 0.5 - eps, 1e-11)?;
        println!(
            "{eps:>8} {closed:>12.6} {quad:>12.6} {:>12.6}",
            bloch2::asymptotic_area(eps)
        );
    }

    // the north pole itself needs an infinite area
    println!("north pole: {}", bloch2::min_area(-0.5, 0.5).unwrap_err());

    println!("\n{:>6} {:>10} {:>10} {:>10}", "area", "tanh^2", "sin^2", "1-4e^-A");
    for p in bloch2::probability_curve(12.0, 1.5)? {
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>10.6}",
            p.area, p.nonlinear, p.linear, p.asymptotic
        );
    }
    Ok(())
}
