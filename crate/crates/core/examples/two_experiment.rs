//! The range of `tr(P1 P2) / d` for projections of fixed ranks.
//!
//! ```text
//! cargo run --example two_experiment
//! ```

use syncorr::oracle::{check_inclusion, CheckOptions, Ensemble, Proposition};
use syncorr::slices::two_experiment_slice;

fn main() -> syncorr::error::Result<()> {
    let (lo, hi) = two_experiment_slice(0.5, 0.5)?;
    println!("r = (1/2, 1/2): [{lo}, {hi}]");

    for (n1, n2, d) in [(1, 1, 2), (2, 3, 4), (3, 4, 6)] {
        let report = check_inclusion(
            &Proposition::TwoExp { n1, n2, d },
            &CheckOptions {
                trials: 20_000,
                seed: 3,
                ensemble: Ensemble::Mixed,
                ..CheckOptions::default()
            },
        )?;
        let r = report.range.expect("two-experiment reports carry a range");
        println!(
            "n = ({n1},{n2}), d = {d}: analytic [{:.4}, {:.4}], sampled [{:.4}, {:.4}], {} outside",
            r.lower, r.upper, r.empirical_min, r.empirical_max, report.violations
        );
    }
    Ok(())
}
