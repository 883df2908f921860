//! Distances in the glued surfaces approach the wedge distances as the
//! neck shrinks.

use isolab::neck::{build_glued, Side};
use isolab::wedge::WedgeSpace;

#[test]
fn glued_distances_approach_the_wedge() {
    let wedge = WedgeSpace::pair(0.0, 0.0).unwrap();
    let pairs = [
        ((Side::One, 0.5, 0.0), (Side::Two, 0.5, 1.0)),
        ((Side::One, 0.8, 0.0), (Side::One, 0.8, 3.1)),
        ((Side::One, 0.3, 2.0), (Side::Two, 1.0, 2.0)),
    ];
    let mut last = vec![f64::INFINITY; pairs.len()];
    for r in [0.2, 0.1, 0.05] {
        let g = build_glued(0.0, 0.0, r, 1.0).unwrap();
        for (i, (a, b)) in pairs.iter().enumerate() {
            let x = g.exterior(a.0, a.1, a.2).unwrap();
            let y = g.exterior(b.0, b.1, b.2).unwrap();
            let wx = wedge.polar(a.0.index(), a.1, a.2).unwrap();
            let wy = wedge.polar(b.0.index(), b.1, b.2).unwrap();
            let gap = (g.distance(&x, &y) - wedge.distance(&wx, &wy).unwrap()).abs();
            assert!(gap <= last[i] + 1e-12, "pair {i} at r = {r}: {gap} after {}", last[i]);
            assert!(gap <= 16.0 * (r + 4.0 * r * r), "pair {i} at r = {r}: {gap}");
            last[i] = gap;
        }
    }
}
