//! Build an explicit finite-dimensional realization of a slice point and
//! verify it entry by entry.
//!
//! ```text
//! cargo run --example realize_point
//! ```

use syncorr::point::{CorrPoint3, MarginalVec};
use syncorr::realize::{evaluate_correlation, realize_hull_point, verify_realization};
use syncorr::record::Precision;
use syncorr::slices::slice_membership;

fn main() -> syncorr::error::Result<()> {
    let r = MarginalVec::new(0.3, 0.8, 0.6);
    let p = CorrPoint3::new(0.2, 0.25, 0.45);
    let cert = slice_membership(&r, &p, 1e-10)?;
    assert!(cert.is_member());

    let real = realize_hull_point(&cert)?;
    println!(
        "blocks {:?} with weights {:?} (total dimension {})",
        real.algebra.blocks,
        real.algebra.weights,
        real.total_dim()
    );

    let tensor = evaluate_correlation(&real);
    println!("p(i,j|x,y), outcome 0 = projection:");
    for x in 0..3 {
        for y in 0..3 {
            let row: Vec<String> = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| format!("{:.4}", tensor.get(x, y, i, j)))
                .collect();
            println!("  x={} y={}: {}", x + 1, y + 1, row.join(" "));
        }
    }

    let report = verify_realization(&real, &r, &p, 1e-9);
    println!("{}", report.to_record(Precision::Human));
    Ok(())
}
