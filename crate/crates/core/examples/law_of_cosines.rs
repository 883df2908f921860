//! The triangle function `F_K(theta, s, t)` on the three model surfaces,
//! and its inversion.

use std::f64::consts::PI;

use isolab::spaceform::{invert_angle, law_of_cosines, SpaceFormParams};

fn main() -> isolab::Result<()> {
    println!("3-4-5 right triangle: {}", law_of_cosines(0.0, PI / 2.0, 3.0, 4.0)?);

    println!("\n{:>6} {:>10} {:>10} {:>10}", "theta", "K=1", "K=0", "K=-1");
    for i in 0..=6 {
        let th = PI * i as f64 / 6.0;
        let row: Vec<f64> = [1.0, 0.0, -1.0]
            .iter()
            .map(|&k| law_of_cosines(k, th, 1.0, 1.0))
            .collect::<isolab::Result<_>>()?;
        println!("{th:>6.3} {:>10.6} {:>10.6} {:>10.6}", row[0], row[1], row[2]);
    }

    // The closed form against distances in the embedded models.
    for k in [1.0, -1.0] {
        let m = SpaceFormParams::surface(k)?;
        let o = m.origin();
        let x = m.exp_map(&o, &m.direction(&o, 0.0)?, 0.8)?;
        let y = m.exp_map(&o, &m.direction(&o, 2.0)?, 1.3)?;
        println!(
            "\nK = {k}: model distance {:.12}, formula {:.12}",
            m.distance(&x, &y)?,
            law_of_cosines(k, 2.0, 0.8, 1.3)?
        );
    }

    let theta = invert_angle(1.0, 1.0, 1.0, 0.5)?;
    println!("\nangle giving F_1(theta, 1, 1) = 0.5: {theta:.10}");
    Ok(())
}
