//! Decide membership in a slice and read the certificate.
//!
//! ```text
//! cargo run --example membership
//! ```

use syncorr::point::{CorrPoint3, MarginalVec};
use syncorr::record::Precision;
use syncorr::slices::{slice_membership, HullCertificate};

fn main() -> syncorr::error::Result<()> {
    let r = MarginalVec::new(0.5, 0.5, 0.5);
    for p in [
        CorrPoint3::new(0.25, 0.25, 0.25),
        CorrPoint3::new(0.5, 0.5, 0.5),
        CorrPoint3::new(0.0, 0.0, 0.0),
    ] {
        let cert = slice_membership(&r, &p, 1e-7)?;
        match &cert.hull {
            HullCertificate::Member { atoms, residual } => {
                println!("{p} is a member ({} atoms, residual {residual:.1e})", atoms.len());
            }
            HullCertificate::NonMember { .. } => {
                let (dir, margin) = cert.separation().expect("non-member");
                println!("{p} is outside: direction {dir:.4?} separates by {margin:.4}");
            }
            HullCertificate::Inconclusive { distance_upper, .. } => {
                println!("{p} undecided, distance at most {distance_upper:.1e}");
            }
        }
        for rec in cert.to_records(Precision::Human) {
            println!("  {rec}");
        }
    }

    // a non-standard marginal vector is mapped to the standard frame first
    let r = MarginalVec::new(0.9, 0.2, 0.6);
    let p = CorrPoint3::new(0.15, 0.55, 0.1);
    let cert = slice_membership(&r, &p, 1e-7)?;
    println!(
        "r = {:?} standardizes to {:?}; verdict {}",
        r.0,
        cert.r_std.0,
        cert.hull.verdict()
    );
    Ok(())
}
