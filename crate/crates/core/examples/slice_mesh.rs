//! Export a boundary point cloud of a slice for plotting.
//!
//! ```text
//! cargo run --example slice_mesh -- half.xyz
//! ```

use std::path::PathBuf;

use syncorr::point::MarginalVec;
use syncorr::slices::{slice_mesh, write_mesh, MeshMeta};

fn main() -> syncorr::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("slice.xyz"));
    let r = MarginalVec::new(0.3, 0.4, 0.45);
    let mesh = slice_mesh(&r, 4000)?;

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for m in &mesh {
        for k in 0..3 {
            lo[k] = lo[k].min(m.point[k]);
            hi[k] = hi[k].max(m.point[k]);
        }
    }
    println!("bounding box {lo:.4?} .. {hi:.4?}");

    let meta = MeshMeta {
        r: r.0,
        resolution: mesh.len(),
        eps: 1e-7,
        seed: 0,
    };
    write_mesh(&path, &mesh, &meta)?;
    println!("wrote {} points to {}", mesh.len(), path.display());
    Ok(())
}
