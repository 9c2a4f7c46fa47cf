//! Split a projection triple into triples on a smaller space without
//! changing its normalized trace triple.
//!
//! ```text
//! cargo run --example reduce_dimension
//! ```

use syncorr::oracle::{blow_up, iterate_reduction, recombine, reduce_dimension, sample_ranked_triple};

fn main() -> syncorr::error::Result<()> {
    let rt = sample_ranked_triple(6, [2, 2, 3], 7)?;
    println!("d = 6, ranks {:?}, T = {:.6?}", rt.ranks(), rt.trace_triple().0);

    let step = reduce_dimension(&rt, (0, 1))?;
    println!("one step along (1,2): t = {:.6}", step.t);
    for (name, child) in [("decremented", &step.decremented), ("retained", &step.retained)] {
        if let Some(c) = child {
            println!("  {name}: ranks {:?}, T = {:.6?}", c.ranks(), c.trace_triple().0);
        }
    }
    println!("  identity residual {:.1e}", step.residual(&rt));

    let terminals = iterate_reduction(&rt)?;
    println!("full reduction: {} terminal triples", terminals.len());
    for (w, t) in &terminals {
        println!("  weight {w:.4}  d = {}  ranks {:?}", t.d(), t.ranks());
    }
    println!("recombined T = {:.6?}", recombine(&terminals, rt.d()));

    // blowing up adds one dimension; reducing along the complementary pair undoes it
    let small = sample_ranked_triple(3, [1, 2, 1], 1)?;
    let big = blow_up(&small, 2)?;
    let back = reduce_dimension(&big, (0, 1))?;
    println!(
        "blow-up round trip: {:.6?} -> {:.6?}",
        small.trace_triple().0,
        back.decremented.expect("n3 > 0").trace_triple().0
    );
    Ok(())
}
