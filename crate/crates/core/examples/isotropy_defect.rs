//! Sampled isotropy functions: exact space forms have zero defect, and a
//! glued surface looks isotropic away from its neck.

use isolab::isotropy::{bad_directions, estimate_f, verify_axioms, IsotropyGrid, Region, DIRECTION_COUNT};
use isolab::neck::{build_glued, Side};
use isolab::spaceform::{law_of_cosines, SpaceFormParams};

fn main() -> isolab::Result<()> {
    for k in [1.0, 0.0, -1.0] {
        let m = SpaceFormParams::surface(k)?;
        let grid = IsotropyGrid::standard(1.0);
        let est = estimate_f(&m, &m.origin(), 1.0, 12, &grid, None)?;
        let dev = est.max_deviation(|th, s, t| law_of_cosines(k, th, s, t))?;
        let report = verify_axioms(&est, 1.0);
        println!(
            "K = {k:>4}: defect {:.2e}, max |F_hat - F_K| {:.2e}, axioms {}",
            est.defect(),
            dev,
            if report.passed() { "pass" } else { "fail" }
        );
    }

    let g = build_glued(0.0, 0.0, 0.05, 0.5)?;
    let p = g.exterior(Side::One, 1.0, 0.0)?;
    let bad = bad_directions(&g, &p, &Region::Neck, 1.0, DIRECTION_COUNT)?;
    let est = estimate_f(&g, &p, 0.95, 12, &IsotropyGrid::standard(0.95), Some(&bad))?;
    let dev = est.max_deviation(|th, s, t| law_of_cosines(0.0, th, s, t))?;
    println!(
        "\nglued, r = 0.05, base at distance 1: {} bad directions, max |F_hat - F_0| {:.2e}",
        bad.bad_count(),
        dev
    );

    println!("\nfirst rows of the glued estimate:");
    for line in est.to_csv().lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
