//! The 3x3 elliptope and its image `S2(1)` of rank-one qubit projections.
//!
//! ```text
//! cargo run --example elliptope
//! ```

use syncorr::elliptope::{
    elliptope_membership, elliptope_project, elliptope_support, realize_s2_point,
    s2_from_elliptope, EllipPoint,
};
use syncorr::matcore::trace_triple;

fn main() -> syncorr::error::Result<()> {
    let q = EllipPoint([0.5, -0.2, 0.3]);
    let m = elliptope_membership(&q, 1e-9);
    println!("{:?}: member {}, min eigenvalue {:.4}", q.0, m.member, m.min_eigenvalue);

    let [p1, p2, p3] = realize_s2_point(&q)?;
    println!(
        "Pauli projections give {:.6?}, expected {:.6?}",
        trace_triple(&p1, &p2, &p3)?.0,
        s2_from_elliptope(&q).0
    );

    let c = [1.0, 1.0, -1.0];
    let s = elliptope_support(c);
    println!("support in {c:?}: {} at {:?}", s.value, s.argmax.0);

    let outside = [1.0, 1.0, -1.0];
    let near = elliptope_project(outside)?;
    println!("nearest point to {outside:?}: {:.6?}", near.0);
    Ok(())
}
