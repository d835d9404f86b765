use qsl::bloch2;

fn main() -> qsl::Result<()> {
    let eps = 0.002;
    println!("A_min = {:.6}", bloch2::area_for_epsilon(eps)?);
    for duration in [5.0, 10.0, 20.0, 40.0] {
        let (omega, energy) = bloch2::energy_optimum(duration, -0.5, 0.5 - eps)?;
        println!("T = {duration:>5}: Omega0_min = {omega:.6}, E_min = {energy:.6} hbar/T-units");
    }
    Ok(())
}
