//! Minimum-norm-point search over the convex hull of several bodies.
//!
//! Wolfe's method in `R^3`: the iterate is the affine minimizer of a corral
//! of at most four support points, and each major step adds the point
//! returned by the linear oracle. The oracle also yields a certified lower
//! bound on the distance, so a non-member verdict always carries a separating
//! direction with a strictly positive margin.

use super::{dset_membership, DSet, DWitness};
use crate::elliptope::EllipPoint;
use crate::point::{add, dot, norm, scale, sub};

/// Rounding allowance subtracted from computed margins.
const MARGIN_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullOptions {
    /// Distance at or below which a point counts as a member.
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for HullOptions {
    fn default() -> Self {
        Self {
            eps: 1e-7,
            max_iter: 10_000,
        }
    }
}

impl HullOptions {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }
}

/// One body's share of a convex combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyWitness {
    pub body: usize,
    pub weight: f64,
    pub witness: DWitness,
    pub point: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub enum HullCertificate {
    /// `sum weight_i point_i` lies within `residual` of the query point.
    Member {
        atoms: Vec<BodyWitness>,
        residual: f64,
    },
    /// `direction . p - max_i support_i(direction) >= margin > eps`, with
    /// `direction` a unit vector.
    NonMember { direction: [f64; 3], margin: f64 },
    /// The distance is known to lie in `[distance_lower, distance_upper]`.
    Inconclusive {
        distance_lower: f64,
        distance_upper: f64,
        iterations: usize,
    },
}

impl HullCertificate {
    pub fn verdict(&self) -> &'static str {
        match self {
            HullCertificate::Member { .. } => "member",
            HullCertificate::NonMember { .. } => "non-member",
            HullCertificate::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Maximum of `c . y` over the union of the bodies: value, body and witness.
pub fn hull_support(bodies: &[DSet], c: [f64; 3]) -> (f64, usize, DWitness) {
    let mut best: Option<(f64, usize, DWitness)> = None;
    for (i, b) in bodies.iter().enumerate() {
        let (v, w) = b.support(c);
        if best.is_none_or(|(bv, _, _)| v > bv) {
            best = Some((v, i, w));
        }
    }
    best.expect("at least one body")
}

#[derive(Clone, Copy)]
struct Atom {
    body: usize,
    witness: DWitness,
    /// Support point minus the query point.
    z: [f64; 3],
}

/// Decides whether `p` lies in the convex hull of `bodies`.
pub fn hull_membership(bodies: &[DSet], p: [f64; 3], opts: &HullOptions) -> HullCertificate {
    for (i, b) in bodies.iter().enumerate() {
        let m = dset_membership(b, p, opts.eps);
        if m.member {
            return HullCertificate::Member {
                atoms: vec![BodyWitness {
                    body: i,
                    weight: 1.0,
                    witness: m.witness,
                    point: b.point(&m.witness),
                }],
                residual: m.distance_upper,
            };
        }
    }

    let oracle = |x: [f64; 3]| -> Atom {
        let (_, body, witness) = hull_support(bodies, scale(-1.0, x));
        Atom {
            body,
            witness,
            z: sub(bodies[body].point(&witness), p),
        }
    };

    let centre = bodies
        .iter()
        .fold([0.0; 3], |acc, b| add(acc, scale(1.0 / bodies.len() as f64, b.center())));
    let mut toward = sub(p, centre);
    if norm(toward) < 1e-12 {
        toward = [1.0, 1.0, 1.0];
    }
    let mut atoms = vec![oracle(scale(-1.0, toward))];
    let mut lambda = vec![1.0];
    let mut x = atoms[0].z;
    let mut lower: f64 = 0.0;

    for it in 0..opts.max_iter {
        let nx = norm(x);
        if nx <= opts.eps {
            return member_certificate(bodies, p, &atoms, &lambda);
        }
        let s = oracle(x);
        let xs = dot(x, s.z);
        let margin = xs / nx - MARGIN_SLACK;
        lower = lower.max(margin);
        if margin > opts.eps {
            return HullCertificate::NonMember {
                direction: scale(-1.0 / nx, x),
                margin,
            };
        }
        let gap = nx * nx - xs;
        if gap <= 1e-15 * nx * nx || atoms.len() >= 4 {
            return inconclusive(lower, nx, it);
        }
        atoms.push(s);
        lambda.push(0.0);
        if !minor_cycle(&mut atoms, &mut lambda) {
            return inconclusive(lower, nx, it);
        }
        let next = combine(&atoms, &lambda);
        if norm(next) >= nx {
            return inconclusive(lower, nx, it);
        }
        x = next;
    }
    inconclusive(lower, norm(x), opts.max_iter)
}

fn inconclusive(lower: f64, upper: f64, iterations: usize) -> HullCertificate {
    HullCertificate::Inconclusive {
        distance_lower: lower.max(0.0),
        distance_upper: upper,
        iterations,
    }
}

fn combine(atoms: &[Atom], lambda: &[f64]) -> [f64; 3] {
    atoms
        .iter()
        .zip(lambda)
        .fold([0.0; 3], |acc, (a, &l)| add(acc, scale(l, a.z)))
}

/// Wolfe's inner loop. Returns false when the corral is affinely degenerate.
fn minor_cycle(atoms: &mut Vec<Atom>, lambda: &mut Vec<f64>) -> bool {
    loop {
        let Some(alpha) = affine_minimizer(atoms) else {
            atoms.pop();
            lambda.pop();
            return false;
        };
        if alpha.iter().all(|&a| a > 0.0) {
            *lambda = alpha;
            return true;
        }
        let mut theta: f64 = 1.0;
        for (l, a) in lambda.iter().zip(&alpha) {
            if *a <= 0.0 {
                theta = theta.min(l / (l - a));
            }
        }
        let mut kept_atoms = Vec::with_capacity(atoms.len());
        let mut kept_lambda = Vec::with_capacity(atoms.len());
        let mut dropped = false;
        for (i, atom) in atoms.iter().enumerate() {
            let l = (1.0 - theta) * lambda[i] + theta * alpha[i];
            if l > 1e-15 {
                kept_atoms.push(*atom);
                kept_lambda.push(l);
            } else {
                dropped = true;
            }
        }
        if !dropped {
            // the blocking atom sits just above the cutoff
            let (imin, _) = kept_lambda
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            kept_atoms.remove(imin);
            kept_lambda.remove(imin);
        }
        let total: f64 = kept_lambda.iter().sum();
        *atoms = kept_atoms;
        *lambda = kept_lambda.into_iter().map(|l| l / total).collect();
        if atoms.len() == 1 {
            *lambda = vec![1.0];
            return true;
        }
    }
}

/// Weights `alpha` with `sum alpha = 1` minimizing `|sum alpha_i z_i|`, via
/// modified Gram-Schmidt on the edge vectors `z_i - z_0`.
fn affine_minimizer(atoms: &[Atom]) -> Option<Vec<f64>> {
    let m = atoms.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let z0 = atoms[0].z;
    let edges: Vec<[f64; 3]> = atoms[1..].iter().map(|a| sub(a.z, z0)).collect();
    let size = edges.iter().map(|e| norm(*e)).fold(0.0, f64::max);
    if size == 0.0 {
        return None;
    }
    // R upper-triangular, Q orthonormal columns
    let k = edges.len();
    let mut q: Vec<[f64; 3]> = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for (j, e) in edges.iter().enumerate() {
        let mut v = *e;
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(*qi, v);
                r[i][j] += c;
                v = sub(v, scale(c, *qi));
            }
        }
        let n = norm(v);
        if n <= 1e-12 * size {
            return None;
        }
        r[j][j] = n;
        q.push(scale(1.0 / n, v));
    }
    // minimize |z0 + E beta|: R beta = -Q^T z0
    let rhs: Vec<f64> = q.iter().map(|qi| -dot(*qi, z0)).collect();
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = rhs[i];
        for j in i + 1..k {
            acc -= r[i][j] * beta[j];
        }
        beta[i] = acc / r[i][i];
    }
    let mut alpha = Vec::with_capacity(m);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    Some(alpha)
}

/// Merges the corral per body. Averaging preimages is exact because each
/// body is an affine image of a convex set.
fn member_certificate(bodies: &[DSet], p: [f64; 3], atoms: &[Atom], lambda: &[f64]) -> HullCertificate {
    let mut merged: Vec<BodyWitness> = Vec::new();
    for body in 0..bodies.len() {
        let mut t = 0.0;
        let mut q = [0.0; 3];
        let mut s = 0.0;
        for (a, &l) in atoms.iter().zip(lambda) {
            if a.body == body {
                t += l;
                q = add(q, scale(l, a.witness.q.0));
                s += l * a.witness.s;
            }
        }
        if t > 0.0 {
            let witness = DWitness {
                q: EllipPoint(scale(1.0 / t, q)),
                s: s / t,
            };
            merged.push(BodyWitness {
                body,
                weight: t,
                witness,
                point: bodies[body].point(&witness),
            });
        }
    }
    let total: f64 = merged.iter().map(|b| b.weight).sum();
    for b in &mut merged {
        b.weight /= total;
    }
    let combo = merged
        .iter()
        .fold([0.0; 3], |acc, b| add(acc, scale(b.weight, b.point)));
    HullCertificate::Member {
        residual: norm(sub(combo, p)),
        atoms: merged,
    }
}
