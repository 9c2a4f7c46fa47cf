//! Test-side oracles, written without the library's geometry code.

#![allow(dead_code)]

use nalgebra::{Matrix3, SymmetricEigen};
use rand::Rng;
use syncorr::elliptope::{elliptope_support, EllipPoint};
use syncorr::point::MarginalVec;
use syncorr::slices::{build_d_sets, standardize, DSet, DWitness};

/// `1 + 2xyz - x^2 - y^2 - z^2 >= 0` on the box.
pub fn sylvester(q: [f64; 3]) -> bool {
    let [x, y, z] = q;
    q.iter().all(|v| v.abs() <= 1.0) && 1.0 + 2.0 * x * y * z - x * x - y * y - z * z >= 0.0
}

/// Uniform elliptope point by rejection from the cube.
pub fn uniform_elliptope<R: Rng>(rng: &mut R) -> EllipPoint {
    loop {
        let q = [0; 3].map(|_| rng.random_range(-1.0..=1.0));
        if sylvester(q) {
            return EllipPoint(q);
        }
    }
}

/// Monte-Carlo volume of the elliptope from the Sylvester inequality.
pub fn elliptope_volume_mc<R: Rng>(rng: &mut R, samples: usize) -> (f64, f64) {
    let mut hits = 0usize;
    for _ in 0..samples {
        let q = [0; 3].map(|_| rng.random_range(-1.0..=1.0));
        if sylvester(q) {
            hits += 1;
        }
    }
    let f = hits as f64 / samples as f64;
    (8.0 * f, 8.0 * (f * (1.0 - f) / samples as f64).sqrt())
}

pub fn random_marginals<R: Rng>(rng: &mut R) -> MarginalVec {
    // occasionally hit the faces and ties of the cube
    let pick = |rng: &mut R| match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        2 => 0.5,
        _ => rng.random_range(0.0..=1.0),
    };
    let mut r = [pick(rng), pick(rng), pick(rng)];
    if rng.random_bool(0.1) {
        r[1] = r[0];
    }
    MarginalVec(r)
}

/// A random point of the `r`-slice as a convex combination of body points,
/// in the original frame.
pub fn random_member<R: Rng>(rng: &mut R, r: &MarginalVec) -> [f64; 3] {
    let (r_std, map) = standardize(r).unwrap();
    let bodies = build_d_sets(&r_std).unwrap();
    let atoms = rng.random_range(1..=4);
    let mut weights: Vec<f64> = (0..atoms).map(|_| -rng.random::<f64>().ln()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut p = [0.0; 3];
    for w in weights {
        let body = &bodies[rng.random_range(0..3)];
        let h = body.half_length();
        let s = if h > 0.0 { rng.random_range(-h..=h) } else { 0.0 };
        let y = body.point(&DWitness {
            q: uniform_elliptope(rng),
            s,
        });
        for k in 0..3 {
            p[k] += w * y[k];
        }
    }
    map.apply_w(&r_std.0, p)
}

/// Rigorous upper bound on `max { c . q : q in elliptope }` from a feasible
/// dual point `y` with `diag(y) - C >= 0`.
pub fn elliptope_support_upper(c: [f64; 3]) -> f64 {
    let cm = Matrix3::new(
        0.0,
        c[0] / 2.0,
        c[1] / 2.0,
        c[0] / 2.0,
        0.0,
        c[2] / 2.0,
        c[1] / 2.0,
        c[2] / 2.0,
        0.0,
    );
    // complementary slackness guess from a primal maximizer
    let x = elliptope_support(c).argmax.completed();
    let xm = Matrix3::from_fn(|i, j| x[i][j]);
    let cx = cm * xm;
    let mut y = [cx[(0, 0)], cx[(1, 1)], cx[(2, 2)]];
    let slack = |y: &[f64; 3]| {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(y[0], y[1], y[2])) - cm;
        SymmetricEigen::new(m).eigenvalues.min()
    };
    let mut shift = (-slack(&y)).max(0.0) + 1e-14;
    loop {
        let z = y.map(|v| v + shift);
        if slack(&z) >= 0.0 {
            y = z;
            break;
        }
        shift *= 2.0;
    }
    y.iter().sum::<f64>() + 1e-14
}

/// Upper bound on the support of `offset + scale * S2 + segment` in direction `c`.
pub fn dset_support_upper(d: &DSet, c: [f64; 3]) -> f64 {
    let lin: f64 = (0..3).map(|k| c[k] * d.offset[k]).sum();
    let seg = d.interval.map_or(0.0, |iv| iv.half_length * c[iv.axis].abs());
    let sum: f64 = c.iter().sum();
    let e = elliptope_support_upper(c);
    lin + seg + d.scale * (sum + e) / 4.0 + 1e-15
}

pub fn unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [0; 3].map(|_| rng.random_range(-1.0f64..=1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|t| t / n);
        }
    }
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
