//! Boundary point clouds of slices.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{slice_support, MarginalVec};
use crate::error::{Error, Result};
use crate::record::fmt_sig;

/// A boundary point and the support value in its direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPoint {
    pub direction: [f64; 3],
    pub point: [f64; 3],
    pub support: f64,
}

/// Parameters recorded next to an exported mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshMeta {
    pub r: [f64; 3],
    pub resolution: usize,
    pub eps: f64,
    pub seed: u64,
}

/// `n` nearly uniform unit vectors on a golden-angle spiral.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rad = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rad * phi.cos(), rad * phi.sin(), z]
        })
        .collect()
}

/// Support maximizers of the `r`-slice over `resolution` Fibonacci directions,
/// in direction order.
pub fn slice_mesh(r: &MarginalVec, resolution: usize) -> Result<Vec<MeshPoint>> {
    if resolution < 6 {
        return Err(Error::InvalidArgument(format!(
            "mesh resolution {resolution} below 6"
        )));
    }
    fibonacci_sphere(resolution)
        .into_par_iter()
        .map(|c| {
            let s = slice_support(r, c)?;
            Ok(MeshPoint {
                direction: c,
                point: s.point,
                support: s.value,
            })
        })
        .collect()
}

fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes `x,y,z` lines to `path` and the metadata record to `path.meta`.
pub fn write_mesh(path: &Path, points: &[MeshPoint], meta: &MeshMeta) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidArgument(format!("{}: {e}", path.display()));
    let mut out = fs::File::create(path).map_err(io)?;
    for p in points {
        let [x, y, z] = p.point.map(|v| fmt_sig(v, 6));
        writeln!(out, "{x},{y},{z}").map_err(io)?;
    }
    let r = meta.r.map(|v| fmt_sig(v, 17)).join(",");
    fs::write(
        meta_path(path),
        format!(
            "mesh r={r} resolution={} eps={} seed={}\n",
            meta.resolution,
            fmt_sig(meta.eps, 17),
            meta.seed
        ),
    )
    .map_err(io)
}

/// Reads the points of a mesh file.
pub fn read_mesh(path: &Path) -> Result<Vec<[f64; 3]>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let v: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("{line:?}: {e}")))?;
            <[f64; 3]>::try_from(v).map_err(|_| Error::Parse(format!("{line:?}: expected x,y,z")))
        })
        .collect()
}
