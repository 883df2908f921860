//! Gromov-Hausdorff bounds between balls in the glued surfaces and in the
//! wedge of two planes, for shrinking neck radii.

use std::time::Instant;

use isolab::wedge::{convergence_experiment, ConvergenceSettings};

fn main() -> isolab::Result<()> {
    let settings = ConvergenceSettings::flat(vec![0.2, 0.1, 0.05]);
    let start = Instant::now();
    let rows = convergence_experiment(&settings)?;
    println!("{:>6} {:>6} {:>6} {:>9} {:>9} {:>9} {:>9}", "r", "n_x", "n_y", "upper", "lower", "neck", "budget");
    for row in rows {
        match row.error {
            Some(e) => println!("{:>6} failed: {e}", row.r),
            None => println!(
                "{:>6} {:>6} {:>6} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
                row.r, row.samples_x, row.samples_y, row.gh_upper, row.gh_lower, row.neck_diameter, row.budget
            ),
        }
    }
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
