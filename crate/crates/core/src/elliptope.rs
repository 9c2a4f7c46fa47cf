//! The 3x3 elliptope and its affine image `S2(1)`.
//!
//! A point `q = (x', y', z')` stands for the unit-diagonal symmetric matrix
//!
//! ```text
//! [ 1   x'  y' ]
//! [ x'  1   z' ]
//! [ y'  z'  1  ]
//! ```
//!
//! and belongs to the elliptope when that matrix is positive semidefinite.
//! `S2(1)`, the trace triples of three rank-one projections on `C^2`, is the
//! image `p = (q + 1) / 4`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matcore::{Projection, C64};
use crate::point::{dot, norm};
use crate::rng;

/// Default tolerance on the minimum eigenvalue for membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const PROJECT_MAX_ITER: usize = 10_000;
const PROJECT_TARGET: f64 = 1e-10;

/// Above-diagonal entries of a unit-diagonal symmetric 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EllipPoint(pub [f64; 3]);

/// A point of `S2(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct S2Point(pub [f64; 3]);

/// Three unit vectors whose Gram matrix is an elliptope point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVecTriple {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
}

impl UnitVecTriple {
    pub fn new(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Result<Self> {
        for v in [a, b, c] {
            if (norm(v) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("{v:?} is not a unit vector")));
            }
        }
        Ok(Self { a, b, c })
    }

    /// `(<a,b>, <a,c>, <b,c>)`.
    pub fn gram(&self) -> EllipPoint {
        EllipPoint([dot(self.a, self.b), dot(self.a, self.c), dot(self.b, self.c)])
    }

    fn vectors(&self) -> [[f64; 3]; 3] {
        [self.a, self.b, self.c]
    }
}

impl EllipPoint {
    pub fn completed(&self) -> [[f64; 3]; 3] {
        let [x, y, z] = self.0;
        [[1.0, x, y], [x, 1.0, z], [y, z, 1.0]]
    }

    /// `1 + 2x'y'z' - x'^2 - y'^2 - z'^2`.
    pub fn determinant(&self) -> f64 {
        let [x, y, z] = self.0;
        1.0 + 2.0 * x * y * z - x * x - y * y - z * z
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sym3_eig(self.completed()).0[2]
    }

    /// Sylvester's criterion: box constraints and a nonnegative determinant.
    pub fn sylvester(&self, tol: f64) -> bool {
        self.0.iter().all(|v| v.abs() <= 1.0 + tol) && self.determinant() >= -tol
    }
}

/// Membership verdict with the eigenvalue diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub min_eigenvalue: f64,
    pub sylvester: bool,
}

/// Member iff the completed matrix has minimum eigenvalue `>= -tol`.
pub fn elliptope_membership(q: &EllipPoint, tol: f64) -> Membership {
    let min_eigenvalue = q.min_eigenvalue();
    Membership {
        member: min_eigenvalue >= -tol,
        min_eigenvalue,
        sylvester: q.sylvester(tol),
    }
}

/// `p = (q + (1, 1, 1)) / 4`.
pub fn s2_from_elliptope(q: &EllipPoint) -> S2Point {
    S2Point(q.0.map(|v| (v + 1.0) / 4.0))
}

/// `q = 4p - (1, 1, 1)`, without a membership check.
pub fn elliptope_from_s2(p: &S2Point) -> EllipPoint {
    EllipPoint(p.0.map(|v| 4.0 * v - 1.0))
}

/// `q = 4p - (1, 1, 1)`, rejected when the preimage is not in the elliptope.
pub fn elliptope_from_s2_checked(p: &S2Point, tol: f64) -> Result<EllipPoint> {
    let q = elliptope_from_s2(p);
    let m = elliptope_membership(&q, tol);
    if !m.member {
        return Err(Error::NotInElliptope {
            min_eig: m.min_eigenvalue,
        });
    }
    Ok(q)
}

/// Nearest elliptope point in Euclidean norm.
///
/// Dykstra's alternating projections between the PSD cone (eigenvalue
/// clipping) and the unit-diagonal affine space. Distances between completed
/// matrices are `sqrt(2)` times distances between the off-diagonal vectors, so
/// both problems share the minimizer.
pub fn elliptope_project(v: [f64; 3]) -> Result<EllipPoint> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input".into()));
    }
    let start = EllipPoint(v);
    if start.min_eigenvalue() >= 0.0 {
        return Ok(start);
    }
    let mut y = start.completed();
    let mut correction = [[0.0; 3]; 3];
    let mut residual = f64::INFINITY;
    for _ in 0..PROJECT_MAX_ITER {
        let r = mat_sub(&y, &correction);
        let x = psd_part(&r);
        correction = mat_sub(&x, &r);
        let mut y_next = x;
        for (i, row) in y_next.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let step = frob(&mat_sub(&y_next, &y));
        residual = step.max(frob(&mat_sub(&x, &y_next)));
        y = y_next;
        if residual < PROJECT_TARGET {
            let q = EllipPoint([y[0][1], y[0][2], y[1][2]]);
            return Ok(pull_inside(q));
        }
    }
    Err(Error::NoConvergence {
        iterations: PROJECT_MAX_ITER,
        residual,
    })
}

/// Shrinks a point with a slightly negative minimum eigenvalue `-e` to
/// `q / (1 + e)`, which is an elliptope member.
pub fn pull_inside(q: EllipPoint) -> EllipPoint {
    let lam = q.min_eigenvalue();
    if lam >= 0.0 {
        q
    } else {
        EllipPoint(q.0.map(|v| v / (1.0 - lam)))
    }
}

/// Support value and a maximizer of `c . q` over the elliptope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub value: f64,
    pub argmax: EllipPoint,
}

/// Exact support function of the elliptope.
///
/// When `c1 c2 c3 >= 0` a sign vertex attains `|c1| + |c2| + |c3|`. Otherwise
/// the SDP dual `min sum(y)` over `Diag(y) - C >= 0` has a rank-one candidate
/// `Diag(y) - C = v v^T`; a primal maximizer complementary to it exists iff
/// `|v|` satisfies the triangle inequalities, and then its Gram entries follow
/// from `sum v_i u_i = 0` by the law of cosines. If not, the best vertex wins.
pub fn elliptope_support(c: [f64; 3]) -> Support {
    let big = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if big == 0.0 {
        return Support {
            value: 0.0,
            argmax: EllipPoint([0.0; 3]),
        };
    }
    // homogeneous: work with max |c_i| = 1 and flush underflow-prone entries
    let cn = c.map(|v| if v.abs() < 1e-150 * big { 0.0 } else { v / big });
    let argmax = if cn[0] * cn[1] * cn[2] >= 0.0 {
        best_vertex(cn)
    } else {
        let v1 = (-cn[0] * cn[1] / (2.0 * cn[2])).sqrt();
        let v2 = -cn[0] / (2.0 * v1);
        let v3 = -cn[1] / (2.0 * v1);
        let (a1, a2, a3) = (v1.abs(), v2.abs(), v3.abs());
        if a1 <= a2 + a3 && a2 <= a1 + a3 && a3 <= a1 + a2 {
            let x = (v3 * v3 - v1 * v1 - v2 * v2) / (2.0 * v1 * v2);
            let y = (v2 * v2 - v1 * v1 - v3 * v3) / (2.0 * v1 * v3);
            let z = (v1 * v1 - v2 * v2 - v3 * v3) / (2.0 * v2 * v3);
            pull_inside(EllipPoint([x, y, z].map(|t| t.clamp(-1.0, 1.0))))
        } else {
            best_vertex(cn)
        }
    };
    Support {
        value: dot(c, argmax.0),
        argmax,
    }
}

/// The four rank-one elliptope points `(s1 s2, s1 s3, s2 s3)`.
pub const VERTICES: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

fn best_vertex(c: [f64; 3]) -> EllipPoint {
    let mut best = VERTICES[0];
    for v in &VERTICES[1..] {
        if dot(c, *v) > dot(c, best) {
            best = *v;
        }
    }
    EllipPoint(best)
}

/// Block-coordinate ascent on unit vectors with `restarts` seeded starts.
///
/// Each update replaces one vector by the normalized weighted sum of the
/// other two, which maximizes the objective in that block. Stops when a sweep
/// changes the value by less than `1e-12`.
pub fn elliptope_support_ascent(c: [f64; 3], restarts: usize, seed: u64) -> (f64, UnitVecTriple) {
    let mut best: Option<(f64, UnitVecTriple)> = None;
    for k in 0..restarts.max(1) {
        let mut rng = rng::stream(seed, k as u64);
        let mut vs = [
            random_unit(&mut rng),
            random_unit(&mut rng),
            random_unit(&mut rng),
        ];
        let objective = |vs: &[[f64; 3]; 3]| {
            c[0] * dot(vs[0], vs[1]) + c[1] * dot(vs[0], vs[2]) + c[2] * dot(vs[1], vs[2])
        };
        let mut value = objective(&vs);
        for _ in 0..100_000 {
            // weights of the other two vectors in each block objective
            let blocks = [(1, c[0], 2, c[1]), (0, c[0], 2, c[2]), (0, c[1], 1, c[2])];
            for (i, &(j, wj, k2, wk)) in blocks.iter().enumerate() {
                let s = [
                    wj * vs[j][0] + wk * vs[k2][0],
                    wj * vs[j][1] + wk * vs[k2][1],
                    wj * vs[j][2] + wk * vs[k2][2],
                ];
                let n = norm(s);
                if n > 1e-300 {
                    vs[i] = s.map(|t| t / n);
                }
            }
            let next = objective(&vs);
            let done = (next - value).abs() < 1e-12;
            value = next;
            if done {
                break;
            }
        }
        let triple = UnitVecTriple {
            a: vs[0],
            b: vs[1],
            c: vs[2],
        };
        if best.is_none_or(|(b, _)| value > b) {
            best = Some((value, triple));
        }
    }
    best.expect("at least one restart")
}

/// Factors an elliptope point into unit vectors via the PSD square root of
/// its completed matrix, rows renormalized.
pub fn factor(q: &EllipPoint) -> Result<UnitVecTriple> {
    let m = elliptope_membership(q, MEMBERSHIP_TOL);
    if !m.member {
        return Err(Error::NotInElliptope {
            min_eig: m.min_eigenvalue,
        });
    }
    let (vals, vecs) = sym3_eig(q.completed());
    let mut rows = [[0.0; 3]; 3];
    for (i, row) in rows.iter_mut().enumerate() {
        for k in 0..3 {
            row[k] = vecs[i][k] * vals[k].max(0.0).sqrt();
        }
        let n = norm(*row);
        if n < 1e-12 {
            // only reachable for a degenerate factorization; any unit vector works
            *row = [1.0, 0.0, 0.0];
        } else {
            *row = row.map(|t| t / n);
        }
    }
    Ok(UnitVecTriple {
        a: rows[0],
        b: rows[1],
        c: rows[2],
    })
}

/// Rank-one projection `(I + n . sigma) / 2` for a unit Bloch vector `n`.
pub fn pauli_projection(n: [f64; 3]) -> Projection {
    let half = |re: f64, im: f64| C64::new(re / 2.0, im / 2.0);
    let m = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            half(1.0 + n[2], 0.0),
            half(n[0], -n[1]),
            half(n[0], n[1]),
            half(1.0 - n[2], 0.0),
        ],
    );
    Projection::new(m).expect("unit Bloch vector gives a projection")
}

/// The Pauli construction for unit vectors `a, b, c`.
pub fn realize_s2(t: &UnitVecTriple) -> [Projection; 3] {
    t.vectors().map(pauli_projection)
}

/// Factors `q` then applies the Pauli construction.
pub fn realize_s2_point(q: &EllipPoint) -> Result<[Projection; 3]> {
    Ok(realize_s2(&factor(q)?))
}

/// An elliptope point from three independent uniform unit vectors.
pub fn sample_elliptope_with<R: Rng + ?Sized>(rng: &mut R) -> EllipPoint {
    UnitVecTriple {
        a: random_unit(rng),
        b: random_unit(rng),
        c: random_unit(rng),
    }
    .gram()
}

pub fn sample_s2(seed: u64) -> S2Point {
    s2_from_elliptope(&sample_elliptope_with(&mut rng::seeded(seed)))
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = norm(v);
        if n > 1e-8 {
            return v.map(|t| t / n);
        }
    }
}

/// Eigen-decomposition of a real symmetric 3x3 matrix by cyclic Jacobi.
/// Eigenvalues descending; eigenvectors are the columns of the second value.
pub fn sym3_eig(m: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..50 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if theta >= 0.0 {
                1.0 / (theta + (theta * theta + 1.0).sqrt())
            } else {
                -1.0 / (-theta + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (kp, kq) = (row[p], row[q]);
                row[p] = c * kp - s * kq;
                row[q] = s * kp + c * kq;
            }
            for k in 0..3 {
                let (pk, qk) = (a[p][k], a[q][k]);
                a[p][k] = c * pk - s * qk;
                a[q][k] = s * pk + c * qk;
            }
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            for row in v.iter_mut() {
                let (kp, kq) = (row[p], row[q]);
                row[p] = c * kp - s * kq;
                row[q] = s * kp + c * kq;
            }
        }
    }
    let mut order = [0, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let vals = order.map(|i| a[i][i]);
    let mut vecs = [[0.0; 3]; 3];
    for (row, vrow) in vecs.iter_mut().zip(v.iter()) {
        for (k, &o) in order.iter().enumerate() {
            row[k] = vrow[o];
        }
    }
    (vals, vecs)
}

fn psd_part(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let (vals, vecs) = sym3_eig(*m);
    let mut out = [[0.0; 3]; 3];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += lam * vecs[i][k] * vecs[j][k];
            }
        }
    }
    out
}

fn mat_sub(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] - b[i][j];
        }
    }
    out
}

fn frob(a: &[[f64; 3]; 3]) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Bloch vector of a rank-one 2x2 projection, the inverse of
/// [`pauli_projection`].
pub fn bloch_vector(p: &Projection) -> [f64; 3] {
    let m = p.matrix();
    [2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, 2.0 * m[(0, 0)].re - 1.0]
}
