//! Glues two flat planes through a Schwarzschild neck and measures the neck
//! for shrinking radii.

use isolab::neck::{build_glued, Side};

fn main() -> isolab::Result<()> {
    println!("{:>7} {:>10} {:>10} {:>8}", "r", "diameter", "bound", "levels");
    for r in [0.2, 0.1, 0.05, 0.025] {
        let g = build_glued(0.0, 0.0, r, 1.0)?;
        let d = g.neck_diameter();
        println!("{r:>7} {:>10.5} {:>10.4} {:>8}", d.value, d.bound, g.levels().len() - 1);
        if let Some(w) = d.warning {
            println!("  warning: {w}");
        }
    }

    // Two points on opposite sides, each at distance 0.5 from its center.
    let g = build_glued(0.0, 0.0, 0.05, 1.0)?;
    let x = g.exterior(Side::One, 0.5, 0.0)?;
    let y = g.exterior(Side::Two, 0.5, 0.0)?;
    println!("\ncross-neck distance at r = 0.05: {:.6}", g.distance(&x, &y));
    println!("\n{}", g.to_toml()?);
    Ok(())
}
