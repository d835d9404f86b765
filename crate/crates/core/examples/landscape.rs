//! Hit-time landscape over initial costates, printed as a coarse character map.
//!
//! `cargo run --release --example landscape -- 0.005 61`

use qsl::shooting::{self, ShotConfig};

fn main() -> qsl::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(0.005, |s| s.parse().expect("eps"));
    let res: usize = args.next().map_or(41, |s| s.parse().expect("resolution"));

    let axis = shooting::linspace(-3.0, 3.0, res);
    let start = std::time::Instant::now();
    let grid = shooting::landscape(&axis, &axis, &ShotConfig::new(eps))?;
    let (i, j, t_min) = grid.min().ok_or(qsl::Error::NoHit)?;
    println!(
        "{res}x{res} shots in {:.1?}: {} hits, T_min = {t_min:.4} at ({:.3}, {:.3})",
        start.elapsed(),
        grid.hit_count(),
        grid.l_phi[i],
        grid.l_theta[j]
    );

    // rows: lambda_theta from top (+3) to bottom (-3); columns: lambda_phi
    let shades = b"#*+-.";
    for j in (0..res).rev() {
        let line: String = (0..res)
            .map(|i| {
                let t = grid.get(i, j);
                if t.is_nan() {
                    ' '
                } else {
                    let level = (shooting::log_excess(t, t_min) + 2.0).clamp(0.0, 4.0) as usize;
                    shades[level] as char
                }
            })
            .collect();
        println!("|{line}|");
    }
    Ok(())
}
