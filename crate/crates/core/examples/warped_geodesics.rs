//! Geodesics on surfaces of revolution: radial curvature, shooting,
//! Clairaut drift and distances, including the curvature-changing family.

use isolab::warped::{
    build_ballchange, geodesic_shoot, radial_curvature, warped_distance, WarpProfile, WarpedPoint,
};

fn main() -> isolab::Result<()> {
    for k in [1.0, 0.0, -1.0] {
        let p = WarpProfile::space_form(k)?;
        println!("K = {k:>4}: radial curvature at t = 0.7 is {:.10}", radial_curvature(&p, 0.7)?);
    }

    let sphere = WarpProfile::space_form(1.0)?;
    let path = geodesic_shoot(&sphere, WarpedPoint::new(0.5, 0.0), 1.1, 2.0)?;
    let end = path.end();
    println!(
        "\nsphere shot: end (t, phi) = ({:.6}, {:.6}), Clairaut drift {:.2e}, speed error {:.2e}",
        end.t,
        end.phi,
        path.clairaut_drift(&sphere),
        path.speed_error(&sphere)
    );

    let hyp = WarpProfile::space_form(-1.0)?;
    let d = warped_distance(&hyp, WarpedPoint::new(0.4, 0.0), WarpedPoint::new(0.9, 2.5))?;
    println!("hyperbolic distance by shooting: {d:.9}");

    let s = 0.6;
    let family = build_ballchange(s)?;
    let bc = family.ballchange().expect("ballchange profile");
    println!("\nballchange s = {s}: outer blend starts at t = {:.3}", bc.outer_start());
    for t in [0.5, 1.5, 2.5, 5.0] {
        let (kp, _, _) = bc.curvature_parameter(t);
        println!(
            "  t = {t:>4}: K_s = {kp:.5}, sectional {:+.6}, -K_s^2 = {:+.6}",
            radial_curvature(&family, t)?,
            -kp * kp
        );
    }
    Ok(())
}
