//! Slices of the three-experiment synchronous correlation set.
//!
//! For a standard marginal vector `r` the slice is the convex hull of three
//! bodies `D1, D2, D3`, each a scaled and translated copy of `S2(1)`, one of
//! them thickened by a segment. Any other `r` is reached by flipping outcomes
//! and relabeling experiments, which acts affinely on the slice.

mod hull;
mod map;
mod mesh;

pub use hull::{hull_membership, hull_support, BodyWitness, HullCertificate, HullOptions};
pub use map::{standardize, SliceMap};
pub use mesh::{fibonacci_sphere, read_mesh, slice_mesh, write_mesh, MeshMeta, MeshPoint};

use crate::elliptope::{
    elliptope_support, s2_from_elliptope, EllipPoint, MEMBERSHIP_TOL,
};
pub use crate::point::{CorrPoint3, MarginalVec};
use crate::error::{Error, Result};
use crate::record::{Precision, Record};
use crate::point::{add, dot, norm, pair_index, scale, sub};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Which of the three bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DKind {
    D1,
    D2,
    D3,
}

impl DKind {
    pub const ALL: [DKind; 3] = [DKind::D1, DKind::D2, DKind::D3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }
}

/// Segment thickening `[-half_length, half_length] * e_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub axis: usize,
    pub half_length: f64,
}

/// The set `offset + scale * S2(1) + segment`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DSet {
    pub scale: f64,
    pub offset: [f64; 3],
    pub interval: Option<Interval>,
}

/// A preimage in a [`DSet`]: an elliptope point and a segment coordinate
/// measured from the segment's midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DWitness {
    pub q: EllipPoint,
    pub s: f64,
}

/// Result of [`dset_membership`].
///
/// The distance bounds come from the minimum eigenvalue `lam` of the
/// completed matrix at the best segment coordinate: the distance to the
/// elliptope lies in `[-lam / sqrt(2), -sqrt(3) lam]`, scaled by `scale / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DMembership {
    pub member: bool,
    pub witness: DWitness,
    pub distance_lower: f64,
    pub distance_upper: f64,
}

impl DSet {
    pub fn s2(scale: f64) -> Self {
        Self {
            scale,
            offset: [0.0; 3],
            interval: None,
        }
    }

    pub fn half_length(&self) -> f64 {
        self.interval.map_or(0.0, |i| i.half_length)
    }

    /// Image of a witness.
    pub fn point(&self, w: &DWitness) -> [f64; 3] {
        let mut y = add(self.offset, scale(self.scale, s2_from_elliptope(&w.q).0));
        if let Some(iv) = self.interval {
            y[iv.axis] += w.s;
        }
        y
    }

    /// Image of the elliptope centre `q = 0` at the segment midpoint.
    pub fn center(&self) -> [f64; 3] {
        self.point(&DWitness::default())
    }

    /// Maximum of `c . y` over the set, with a maximizer.
    pub fn support(&self, c: [f64; 3]) -> (f64, DWitness) {
        let e = elliptope_support(c);
        let s = match self.interval {
            Some(iv) if c[iv.axis] > 0.0 => iv.half_length,
            Some(iv) if c[iv.axis] < 0.0 => -iv.half_length,
            _ => 0.0,
        };
        let w = DWitness { q: e.argmax, s };
        (dot(c, self.point(&w)), w)
    }

    /// Support value computed from the formula rather than the maximizer.
    pub fn support_value(&self, c: [f64; 3]) -> f64 {
        let e = elliptope_support(c).value;
        let seg = self
            .interval
            .map_or(0.0, |iv| iv.half_length * c[iv.axis].abs());
        dot(c, self.offset) + seg + self.scale * (c[0] + c[1] + c[2] + e) / 4.0
    }

    fn is_degenerate(&self) -> bool {
        self.scale <= 1e-14
    }
}

/// `D1, D2, D3` for a standard marginal vector.
pub fn build_d_sets(r: &MarginalVec) -> Result<[DSet; 3]> {
    if !r.is_standard() {
        return Err(Error::NotStandard(r.0));
    }
    let [r1, r2, r3] = r.0;
    let d1 = DSet::s2(2.0 * (r1 + r2 + r3 - 1.0).max(0.0));
    let h = (r2 - r1) / 2.0;
    let d2 = DSet {
        scale: 2.0 * r1,
        offset: [0.0, 0.0, h],
        interval: (h > 0.0).then_some(Interval {
            axis: 2,
            half_length: h,
        }),
    };
    let d3 = DSet {
        scale: 2.0 * (r1 + r2 - r3).max(0.0),
        offset: [0.0, r1.min(r3 - r2), r2.min(r3 - r1)],
        interval: None,
    };
    Ok([d1, d2, d3])
}

/// Membership of `p` in a single body, with a witness on success.
///
/// The segment coordinate is chosen by golden-section search on the minimum
/// eigenvalue, which is concave along the segment. A point whose preimage has
/// minimum eigenvalue `-e < 0` gets the shrunken witness `q / (1 + e)`.
pub fn dset_membership(d: &DSet, p: [f64; 3], tol: f64) -> DMembership {
    if d.is_degenerate() {
        let rel = sub(p, d.offset);
        let (s, dist) = match d.interval {
            Some(iv) => {
                let s = rel[iv.axis].clamp(-iv.half_length, iv.half_length);
                let mut v = rel;
                v[iv.axis] -= s;
                (s, norm(v))
            }
            None => (0.0, norm(rel)),
        };
        let witness = DWitness {
            q: EllipPoint::default(),
            s,
        };
        let residual = norm(sub(d.point(&witness), p));
        return DMembership {
            member: residual <= tol,
            witness,
            distance_lower: dist,
            distance_upper: residual,
        };
    }
    let preimage = |s: f64| {
        let mut v = sub(p, d.offset);
        if let Some(iv) = d.interval {
            v[iv.axis] -= s;
        }
        EllipPoint(v.map(|t| 4.0 * t / d.scale - 1.0))
    };
    let s = match d.interval {
        Some(iv) => golden_max(
            |s| preimage(s).min_eigenvalue(),
            -iv.half_length,
            iv.half_length,
        ),
        None => 0.0,
    };
    let q = preimage(s);
    let lam = q.min_eigenvalue();
    let shrunk = if lam < 0.0 {
        EllipPoint(q.0.map(|t| t / (1.0 - lam)))
    } else {
        q
    };
    let witness = DWitness { q: shrunk, s };
    let deficit = (-lam).max(0.0);
    let residual = norm(sub(d.point(&witness), p));
    let distance_upper = residual.max(d.scale / 4.0 * SQRT3 * deficit);
    DMembership {
        member: distance_upper <= tol && shrunk.min_eigenvalue() >= -MEMBERSHIP_TOL,
        witness,
        distance_lower: d.scale / 4.0 * deficit / std::f64::consts::SQRT_2,
        distance_upper,
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs().max(lo.abs())) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        }
    }
    let mid = (lo + hi) / 2.0;
    // the endpoints matter when the maximum sits on the segment boundary
    [lo, mid, hi]
        .into_iter()
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(mid)
}

/// Outcome of [`slice_membership`], in both frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCertificate {
    pub r: MarginalVec,
    pub p: CorrPoint3,
    pub r_std: MarginalVec,
    pub p_std: CorrPoint3,
    /// Maps the standard frame to the original one.
    pub map: SliceMap,
    pub bodies: [DSet; 3],
    /// Certificate in the standard frame.
    pub hull: HullCertificate,
}

impl SliceCertificate {
    pub fn is_member(&self) -> bool {
        matches!(self.hull, HullCertificate::Member { .. })
    }

    pub fn is_non_member(&self) -> bool {
        matches!(self.hull, HullCertificate::NonMember { .. })
    }

    /// Separating direction and margin in the original frame.
    ///
    /// The w-action of a slice map is a signed permutation plus a shift, so
    /// directions transform by the same signed permutation and margins are
    /// unchanged.
    pub fn separation(&self) -> Option<([f64; 3], f64)> {
        match &self.hull {
            HullCertificate::NonMember { direction, margin } => {
                let (a, _) = self.map.affine_w(&self.r_std.0);
                Some((mat_vec(&a, *direction), *margin))
            }
            _ => None,
        }
    }

    /// Weighted witness points mapped to the original frame.
    pub fn member_points(&self) -> Option<Vec<(f64, [f64; 3])>> {
        match &self.hull {
            HullCertificate::Member { atoms, .. } => Some(
                atoms
                    .iter()
                    .map(|a| (a.weight, self.map.apply_w(&self.r_std.0, a.point)))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// A `certificate` record, followed by one `atom` record per body for
    /// members. Points and directions are in the original frame.
    pub fn to_records(&self, prec: Precision) -> Vec<Record> {
        let head = Record::new("certificate")
            .field("verdict", self.hull.verdict())
            .field("r", prec.vec(&self.r.0))
            .field("p", prec.vec(&self.p.0));
        match &self.hull {
            HullCertificate::Member { atoms, residual } => {
                let mut out = vec![head
                    .field("residual", prec.num(*residual))
                    .field("atoms", atoms.len().to_string())];
                for a in atoms {
                    let kind = DKind::from_index(a.body);
                    out.push(
                        Record::new("atom")
                            .field("body", format!("D{}", kind.index() + 1))
                            .field("weight", prec.num(a.weight))
                            .field("point", prec.vec(&self.map.apply_w(&self.r_std.0, a.point)))
                            .field("q", prec.vec(&a.witness.q.0))
                            .field("s", prec.num(a.witness.s)),
                    );
                }
                out
            }
            HullCertificate::NonMember { .. } => {
                let (dir, margin) = self.separation().expect("non-member");
                vec![head
                    .field("direction", prec.vec(&dir))
                    .field("margin", prec.num(margin))]
            }
            HullCertificate::Inconclusive {
                distance_lower,
                distance_upper,
                iterations,
            } => vec![head
                .field("distance_lower", prec.num(*distance_lower))
                .field("distance_upper", prec.num(*distance_upper))
                .field("iterations", iterations.to_string())],
        }
    }
}

pub(crate) fn mat_vec(a: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [dot(a[0], v), dot(a[1], v), dot(a[2], v)]
}

pub(crate) fn mat_t_vec(a: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, row) in a.iter().enumerate() {
        for j in 0..3 {
            out[j] += row[j] * v[i];
        }
    }
    out
}

fn check_marginals(r: &MarginalVec) -> Result<()> {
    if !r.in_unit_cube() {
        return Err(Error::InvalidArgument(format!(
            "marginals {:?} outside [0,1]^3",
            r.0
        )));
    }
    Ok(())
}

fn check_finite(v: [f64; 3], what: &str) -> Result<()> {
    if v.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite {what}")));
    }
    Ok(())
}

/// Decides `p` against the `r`-slice with the default options and tolerance `eps`.
pub fn slice_membership(r: &MarginalVec, p: &CorrPoint3, eps: f64) -> Result<SliceCertificate> {
    slice_membership_with(
        r,
        p,
        &HullOptions {
            eps,
            ..HullOptions::default()
        },
    )
}

pub fn slice_membership_with(
    r: &MarginalVec,
    p: &CorrPoint3,
    opts: &HullOptions,
) -> Result<SliceCertificate> {
    check_marginals(r)?;
    check_finite(p.0, "point")?;
    let (r_std, map) = standardize(r)?;
    let p_std = CorrPoint3(map.inverse().apply_w(&r.0, p.0));
    let bodies = build_d_sets(&r_std)?;
    let hull = hull_membership(&bodies, p_std.0, opts);
    Ok(SliceCertificate {
        r: *r,
        p: *p,
        r_std,
        p_std,
        map,
        bodies,
        hull,
    })
}

/// Support of the `r`-slice in direction `c`, with a maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSupport {
    pub value: f64,
    /// Maximizer in the original frame.
    pub point: [f64; 3],
    /// Maximizer in the standard frame.
    pub point_std: [f64; 3],
    pub body: DKind,
    pub witness: DWitness,
}

pub fn slice_support(r: &MarginalVec, c: [f64; 3]) -> Result<SliceSupport> {
    check_marginals(r)?;
    check_finite(c, "direction")?;
    let (r_std, map) = standardize(r)?;
    let bodies = build_d_sets(&r_std)?;
    let (a, b) = map.affine_w(&r_std.0);
    // c . (A w + b) = (A^T c) . w + c . b
    let c_std = mat_t_vec(&a, c);
    let (_, body, witness) = hull_support(&bodies, c_std);
    let point_std = bodies[body].point(&witness);
    let point = map.apply_w(&r_std.0, point_std);
    Ok(SliceSupport {
        value: dot(c_std, point_std) + dot(c, b),
        point,
        point_std,
        body: DKind::from_index(body),
        witness,
    })
}

/// `[max(0, r1 + r2 - 1), min(r1, r2)]`.
pub fn two_experiment_slice(r1: f64, r2: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&r1) || !(0.0..=1.0).contains(&r2) {
        return Err(Error::InvalidArgument(format!(
            "marginals ({r1}, {r2}) outside [0,1]"
        )));
    }
    Ok(((r1 + r2 - 1.0).max(0.0), r1.min(r2)))
}

/// Full table `p(i, j | x, y)` for two outcomes and three experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor {
    /// Indexed `[x][y][i][j]`, zero-based.
    pub p: [[[[f64; 2]; 2]; 3]; 3],
}

impl CorrelationTensor {
    pub fn get(&self, x: usize, y: usize, i: usize, j: usize) -> f64 {
        self.p[x][y][i][j]
    }

    pub fn marginals(&self) -> [f64; 3] {
        [0, 1, 2].map(|x| self.p[x][x][0][0])
    }

    pub fn w(&self) -> [f64; 3] {
        [self.p[0][1][0][0], self.p[0][2][0][0], self.p[1][2][0][0]]
    }

    fn entries(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), f64)> + '_ {
        (0..3).flat_map(move |x| {
            (0..3).flat_map(move |y| {
                (0..2).flat_map(move |i| (0..2).map(move |j| ((x, y, i, j), self.p[x][y][i][j])))
            })
        })
    }

    /// Entries below `-tol`.
    pub fn negative_entries(&self, tol: f64) -> Vec<((usize, usize, usize, usize), f64)> {
        self.entries().filter(|(_, v)| *v < -tol).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.entries().map(|(_, v)| v).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|p(i, j | x, x)|` over `i != j`.
    pub fn synchrony_defect(&self) -> f64 {
        (0..3)
            .map(|x| self.p[x][x][0][1].abs().max(self.p[x][x][1][0].abs()))
            .fold(0.0, f64::max)
    }

    /// Largest `|sum_ij p(i, j | x, y) - 1|`.
    pub fn normalization_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..3 {
            for y in 0..3 {
                let s: f64 = self.p[x][y].iter().flatten().sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }

    /// Largest `|p(i, j | x, y) - p(j, i | y, x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ((x, y, i, j), v) in self.entries() {
            worst = worst.max((v - self.p[y][x][j][i]).abs());
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &CorrelationTensor) -> f64 {
        self.entries()
            .zip(other.entries())
            .map(|((_, a), (_, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds the tensor determined by marginals and joint-zero probabilities.
/// Validity is reported by the tensor's defect methods, not enforced.
pub fn correlation_tensor(r: &MarginalVec, w: &CorrPoint3) -> CorrelationTensor {
    let mut p = [[[[0.0; 2]; 2]; 3]; 3];
    for x in 0..3 {
        for y in 0..3 {
            let (rx, ry) = (r.0[x], r.0[y]);
            p[x][y] = if x == y {
                [[rx, 0.0], [0.0, 1.0 - rx]]
            } else {
                let v = w.0[pair_index(x, y)];
                [[v, rx - v], [ry - v, v + 1.0 - rx - ry]]
            };
        }
    }
    CorrelationTensor { p }
}
