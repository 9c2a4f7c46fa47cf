//! Monte-Carlo checks that sampled trace triples stay inside the predicted
//! convex hulls.
//!
//! ```text
//! cargo run --release --example check_propositions [trials]
//! ```

use syncorr::oracle::{check_inclusion, CheckOptions, Ensemble, Proposition};
use syncorr::record::Precision;

fn main() -> syncorr::error::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("trials must be an integer"))
        .unwrap_or(2000);
    let props = [
        Proposition::TypeI { n: 2, d: 5 },
        Proposition::TypeISwap { n: 2, d: 6 },
        Proposition::TypeII { n: 1, k: 1, d: 6 },
        Proposition::TypeIISwap { n: 1, k: 2, d: 7 },
        Proposition::TypeIII { n: 1, k: 1, kp: 2, d: 8 },
        Proposition::TwoExp { n1: 2, n2: 3, d: 4 },
        Proposition::Slice { ranks: [1, 2, 2], d: 4 },
    ];
    for prop in &props {
        let report = check_inclusion(
            prop,
            &CheckOptions {
                trials,
                seed: 11,
                ensemble: Ensemble::Mixed,
                ..CheckOptions::default()
            },
        )?;
        println!("{}", report.to_record(Precision::Human));
    }
    println!(
        "{} admissible hull statements with d <= 8",
        Proposition::admissible(8).len()
    );
    Ok(())
}
