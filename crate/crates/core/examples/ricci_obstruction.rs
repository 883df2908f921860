//! Annulus volume ratios around a wedge junction against what volume
//! comparison allows.

use isolab::wedge::ricci_violation;

fn main() -> isolab::Result<()> {
    let cases = [(2, 0.0, 0.0, 0.0), (3, 0.0, 0.0, 0.0), (2, 1.0, 0.0, 0.0), (2, 1.0, -1.0, -1.0), (3, -1.0, 1.0, -1.0)];
    println!("{:>2} {:>5} {:>5} {:>5} {:>6} {:>10} {:>10}", "n", "K1", "K2", "H", "r", "lhs", "rhs");
    for (n, k1, k2, h) in cases {
        for row in ricci_violation(n, k1, k2, h, &[0.5, 0.1, 0.01])? {
            println!(
                "{n:>2} {k1:>5} {k2:>5} {h:>5} {:>6} {:>10.5} {:>10.5} {}",
                row.r,
                row.lhs,
                row.rhs,
                if row.violated { "violated" } else { "" }
            );
        }
    }
    Ok(())
}
