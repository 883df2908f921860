//! Directions that see a small ball form one cap; small enough balls are
//! almost unseen, larger nearby ones are not.

use isolab::isotropy::{bad_directions, unseen_check, Region, DIRECTION_COUNT};
use isolab::spaceform::{law_of_cosines, SpaceFormParams};

fn main() -> isolab::Result<()> {
    let plane = SpaceFormParams::surface(0.0)?;
    let p = plane.origin();
    let eps = 0.2;
    let f = law_of_cosines(0.0, eps, eps, eps)?;
    println!("F_0(eps, eps, eps) at eps = {eps}: {f:.6}");

    for (factor, d) in [(0.9, eps + 0.9 * f), (0.9, 0.5), (1.5, 1.5 * f + 0.01)] {
        let rho = factor * f;
        let q = plane.point(vec![d, 0.0])?;
        let bad = bad_directions(&plane, &p, &Region::Balls(vec![(q, rho)]), 1.0, DIRECTION_COUNT)?;
        match unseen_check(&bad, eps) {
            Ok(cover) => println!(
                "rho = {rho:.5} at distance {d:.4}: unseen, cap radius {:.5} (tangent angle {:.5})",
                cover.caps[0].radius,
                (rho / d).asin()
            ),
            Err(why) => println!("rho = {rho:.5} at distance {d:.4}: seen, {why:?}"),
        }
    }
    Ok(())
}
