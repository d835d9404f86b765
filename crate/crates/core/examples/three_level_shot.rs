//! Single shots of the three-level extremal from chosen initial costates.

use qsl::shooting::{self, ShotConfig};

fn main() -> qsl::Result<()> {
    let cfg = ShotConfig::new(0.002);
    for (lp, lt) in [
        (1.85, 0.45266),
        (-1.85, -0.45266),
        (1.85, -0.45266),
        (3.7, 0.90532),
        (1.85, 0.6),
        (0.0, 0.0),
    ] {
        println!("({lp:>6}, {lt:>8}) -> {:?}", shooting::shoot(lp, lt, &cfg)?);
    }
    Ok(())
}
