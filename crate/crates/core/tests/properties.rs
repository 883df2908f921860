//! Property tests for the metric and isotropy invariants.

use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;

use isolab::isotropy::{bad_directions, estimate_f, unseen_check, IsotropyGrid, Region, DIRECTION_COUNT};
use isolab::neck::{build_glued, GluedManifold, Side};
use isolab::spaceform::{invert_angle, law_of_cosines, SpaceFormParams};
use isolab::wedge::{ricci_violation, Junction, WedgeSpace};

fn glued() -> &'static GluedManifold {
    static G: OnceLock<GluedManifold> = OnceLock::new();
    G.get_or_init(|| build_glued(0.0, -1.0, 0.1, 1.0).unwrap())
}

fn wedge() -> &'static WedgeSpace {
    static W: OnceLock<WedgeSpace> = OnceLock::new();
    W.get_or_init(|| {
        let m: Vec<_> = [1.0, 0.0, -1.0].iter().map(|&k| SpaceFormParams::surface(k).unwrap()).collect();
        let js = vec![
            Junction { a: (0, m[0].origin()), b: (1, m[1].origin()) },
            Junction { a: (1, m[1].point(vec![2.0, 0.0]).unwrap()), b: (2, m[2].origin()) },
            Junction { a: (0, m[0].polar(2.0, 1.0).unwrap()), b: (2, m[2].polar(1.0, 2.0).unwrap()) },
        ];
        WedgeSpace::new(m, js, 0.5).unwrap()
    })
}

fn curvature() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), Just(-1.0), -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn triangle_function_bounds(k in curvature(), th in 0.0..PI, a in 0.0..1.5f64, b in 0.0..1.5f64) {
        let f = law_of_cosines(k, th, a, b).unwrap();
        prop_assert!(f >= (a - b).abs() - 1e-12 && f <= a + b + 1e-12);
        prop_assert!((f - law_of_cosines(k, th, b, a).unwrap()).abs() < 1e-12);
        let g = law_of_cosines(k, (th + 0.1).min(PI), a, b).unwrap();
        prop_assert!(g >= f - 1e-12);
    }

    #[test]
    fn angle_inversion_round_trip(k in curvature(), th in 0.01..3.1f64, a in 0.1..1.4f64, b in 0.1..1.4f64) {
        let d = law_of_cosines(k, th, a, b).unwrap();
        let back = invert_angle(k, a, b, d).unwrap();
        prop_assert!((law_of_cosines(k, back, a, b).unwrap() - d).abs() < 1e-10);
    }

    #[test]
    fn wedge_is_a_metric(
        c in proptest::collection::vec(0usize..3, 3),
        t in proptest::collection::vec(0.0..2.5f64, 3),
        phi in proptest::collection::vec(0.0..6.28f64, 3),
    ) {
        let w = wedge();
        let p: Vec<_> = (0..3).map(|i| w.polar(c[i], t[i], phi[i]).unwrap()).collect();
        let d = |i: usize, j: usize| w.distance(&p[i], &p[j]).unwrap();
        prop_assert!(d(0, 0).abs() < 1e-12);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
    }

    #[test]
    fn ricci_flag_for_small_radii(n in 2usize..4, k1 in -1.0..1.0f64, k2 in -1.0..1.0f64, drop in 0.0..1.0f64, r in 0.001..0.02f64) {
        let h = k1.min(k2) - drop;
        let row = ricci_violation(n, k1, k2, h, &[r]).unwrap()[0];
        prop_assert!(row.violated, "{row:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn glued_triangle_inequality(
        side in proptest::collection::vec(0usize..2, 3),
        t in proptest::collection::vec(0.1..1.5f64, 3),
        phi in proptest::collection::vec(0.0..6.28f64, 3),
    ) {
        let g = glued();
        let p: Vec<_> = (0..3)
            .map(|i| g.exterior(if side[i] == 0 { Side::One } else { Side::Two }, t[i], phi[i]).unwrap())
            .collect();
        let d = |i: usize, j: usize| g.distance(&p[i], &p[j]);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-9);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        if side[0] != side[1] {
            prop_assert!(d(0, 1) >= t[0] + t[1] - 0.2 - 1e-9);
        }
    }

    #[test]
    fn small_balls_are_unseen(eps in 0.1..0.4f64, frac in 0.2..0.95f64, extra in 0.0..0.5f64) {
        let plane = SpaceFormParams::surface(0.0).unwrap();
        let rho = frac * law_of_cosines(0.0, eps, eps, eps).unwrap();
        let q = plane.point(vec![eps + rho + extra, 0.0]).unwrap();
        let bad = bad_directions(&plane, &plane.origin(), &Region::Balls(vec![(q, rho)]), 1.0, DIRECTION_COUNT).unwrap();
        let cover = unseen_check(&bad, eps);
        prop_assert!(cover.is_ok(), "{cover:?}");
    }

    #[test]
    fn measured_distances_exceed_gap(k in curvature(), x in -0.5..0.5f64, y in -0.5..0.5f64) {
        let m = SpaceFormParams::surface(k).unwrap();
        let p = m.polar(x.abs(), y * 6.0).unwrap();
        let grid = IsotropyGrid { thetas: vec![0.0, 0.3, 1.5, PI], radii: vec![0.0, 0.4, 0.9] };
        let est = estimate_f(&m, &p, 0.9, 3, &grid, None).unwrap();
        prop_assert!(est.defect() < 1e-5);
        for i in 0..4 {
            for j in 0..3 {
                for l in 0..3 {
                    let (s, t) = (grid.radii[j], grid.radii[l]);
                    prop_assert!(est.f_hat(i, j, l) >= (s - t).abs() - 1e-12);
                    prop_assert!(est.f_hat(i, j, l) <= s + t + est.defect() + 1e-12);
                    prop_assert!((est.f_hat(i, j, l) - est.f_hat(i, l, j)).abs() <= est.defect() + 1e-12);
                }
            }
        }
    }
}
