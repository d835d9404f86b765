//! Minimum generalized pulse area against eps and its logarithmic fit,
//! next to the two-level law `A = -ln(eps) + ln 4`.

use qsl::bloch2;
use qsl::shooting::{self, ShotConfig};

fn main() -> qsl::Result<()> {
    let eps: Vec<f64> = (0..9).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)).collect();
    let curve = shooting::area_curve(&eps, shooting::DEFAULT_LAMBDA_PHI, &ShotConfig::new(eps[0]))?;

    println!(
        "{:>10} {:>10} {:>10} {:>10}",
        "eps", "A_3level", "A_2level", "lambda_th"
    );
    for p in &curve {
        println!(
            "{:>10.3e} {:>10.5} {:>10.5} {:>10.5}",
            p.eps,
            p.a_min,
            bloch2::area_for_epsilon(p.eps)?,
            p.l_theta
        );
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.eps, p.a_min)).collect();
    let fit = shooting::fit_asymptote(&pts)?;
    println!(
        "three-level fit: A = {:.4} ln(eps) + {:.4}  (-1/sqrt 2 = {:.4})",
        fit.slope,
        fit.intercept,
        -std::f64::consts::FRAC_1_SQRT_2
    );
    let two: Vec<(f64, f64)> = eps.iter().map(|&e| (e, bloch2::area_for_epsilon(e).unwrap())).collect();
    let fit2 = shooting::fit_asymptote(&two)?;
    println!("two-level fit:   A = {:.4} ln(eps) + {:.4}", fit2.slope, fit2.intercept);
    Ok(())
}
