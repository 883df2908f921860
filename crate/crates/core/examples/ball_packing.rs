//! Packing counts of sampled balls against the volume-ratio ceiling.

use isolab::metricspace::{bishop_gromov_ceiling, epsilon_net_sample, packing_number, NetOptions};
use isolab::spaceform::SpaceFormParams;

fn main() -> isolab::Result<()> {
    let t = 1.0;
    println!("{:>5} {:>6} {:>7} {:>7} {:>10}", "K", "s", "lower", "upper", "ceiling");
    for k in [1.0, 0.0, -1.0] {
        let m = SpaceFormParams::surface(k)?;
        let x = epsilon_net_sample(&m, &m.origin(), t, 0.08, NetOptions::seeded(1))?;
        for s in [0.15, 0.25, 0.4] {
            let n = packing_number(&x, s, t, 0);
            let c = bishop_gromov_ceiling(2, k, s, t)?;
            println!("{k:>5} {s:>6} {:>7} {:>7} {c:>10.3}", n.lower(), n.upper());
        }
    }
    Ok(())
}
