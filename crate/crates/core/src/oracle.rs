//! Projection triples of fixed ranks: sampling, dimension reduction and
//! blow-up, and Monte-Carlo checks of the inclusion statements for slices.

use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_eig, normalized_trace_product, random_projection_with, random_unitary_with,
    trace_triple, CMatrix, Projection, C64,
};
use crate::point::{pair_of, CorrPoint3, MarginalVec};
use crate::record::{parse_matrix, Precision, Record};
use crate::rng::{self, StreamRng};
use crate::slices::{
    hull_membership, slice_membership_with, two_experiment_slice, DSet, HullCertificate,
    HullOptions, Interval,
};

/// Eigenvalues of `P_a + P_b` below this count as kernel.
pub const KERNEL_TOL: f64 = 1e-8;

/// Three projections on `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedTriple {
    projections: [Projection; 3],
}

impl RankedTriple {
    pub fn new(projections: [Projection; 3]) -> Result<Self> {
        let d = projections[0].dim();
        for p in &projections[1..] {
            if p.dim() != d {
                return Err(Error::DimensionMismatch(d, p.dim()));
            }
        }
        Ok(Self { projections })
    }

    pub fn d(&self) -> usize {
        self.projections[0].dim()
    }

    pub fn ranks(&self) -> [usize; 3] {
        [0, 1, 2].map(|i| self.projections[i].rank())
    }

    pub fn projections(&self) -> &[Projection; 3] {
        &self.projections
    }

    /// `(tr_d(P1 P2), tr_d(P1 P3), tr_d(P2 P3))`.
    pub fn trace_triple(&self) -> CorrPoint3 {
        let [a, b, c] = &self.projections;
        trace_triple(a, b, c).expect("dimensions checked on construction")
    }

    pub fn marginals(&self) -> MarginalVec {
        let d = self.d() as f64;
        MarginalVec(self.ranks().map(|n| n as f64 / d))
    }

    /// Pairs `(a, b)` with `n_a + n_b < d`, in lexicographic order.
    pub fn reducible_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.ranks();
        (0..3)
            .map(pair_of)
            .filter(|&(a, b)| n[a] + n[b] < self.d())
            .collect()
    }

    pub fn to_record(&self, prec: Precision) -> Record {
        let ranks = self.ranks().map(|n| n.to_string()).join(",");
        let mut rec = Record::new("ranked_triple")
            .field("d", self.d().to_string())
            .field("ranks", ranks);
        for (i, p) in self.projections.iter().enumerate() {
            rec = rec.field(&format!("p{}", i + 1), prec.matrix(p.matrix()));
        }
        rec
    }

    pub fn from_record(rec: &Record) -> Result<Self> {
        if rec.kind != "ranked_triple" {
            return Err(Error::Parse(format!("expected ranked_triple, got {}", rec.kind)));
        }
        let d = rec.get_usize("d")?;
        let ps: Vec<Projection> = (1..=3)
            .map(|i| Projection::new(parse_matrix(rec.get(&format!("p{i}"))?)?))
            .collect::<Result<_>>()?;
        let t = RankedTriple::new(ps.try_into().expect("three projections"))?;
        if t.d() != d {
            return Err(Error::DimensionMismatch(d, t.d()));
        }
        if let Ok(ranks) = rec.get("ranks") {
            let expect = t.ranks().map(|n| n.to_string()).join(",");
            if ranks != expect {
                return Err(Error::Parse(format!("ranks {ranks} do not match matrices ({expect})")));
            }
        }
        Ok(t)
    }
}

/// How projection triples are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    /// Independent Haar-random projections.
    Haar,
    /// Half Haar, half small random rotations of coordinate projections
    /// under a common Haar frame. Reaches the extreme trace values that
    /// independent Haar sampling almost never produces in higher dimension.
    Mixed,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(Ensemble::Haar),
            "mixed" => Ok(Ensemble::Mixed),
            _ => Err(Error::InvalidArgument(format!("unknown ensemble {s:?}"))),
        }
    }
}

fn check_ranks(d: usize, ranks: &[usize]) -> Result<()> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    for &n in ranks {
        if n > d {
            return Err(Error::RankOutOfRange { rank: n, dim: d });
        }
    }
    Ok(())
}

/// Independent Haar-random projections of the given ranks.
pub fn sample_ranked_triple(d: usize, ranks: [usize; 3], seed: u64) -> Result<RankedTriple> {
    sample_ranked_triple_with(&mut rng::seeded(seed), d, ranks, Ensemble::Haar)
}

pub fn sample_ranked_triple_with<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    ranks: [usize; 3],
    ensemble: Ensemble,
) -> Result<RankedTriple> {
    check_ranks(d, &ranks)?;
    let ps = sample_projections(rng, d, &ranks, ensemble)?;
    RankedTriple::new(ps.try_into().expect("three projections"))
}

fn sample_projections<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    ranks: &[usize],
    ensemble: Ensemble,
) -> Result<Vec<Projection>> {
    if ensemble == Ensemble::Haar || rng.random_bool(0.5) {
        return ranks
            .iter()
            .map(|&n| random_projection_with(rng, d, n))
            .collect();
    }
    let frame = random_unitary_with(rng, d)?;
    ranks
        .iter()
        .map(|&n| {
            let angle = rng.random_range(0.0..0.5);
            let v = &frame * small_rotation(rng, d, angle)?;
            let cols: Vec<_> = sample_indices(rng, d, n)
                .into_iter()
                .map(|k| v.column(k).into_owned())
                .collect();
            Ok(Projection::from_orthonormal_columns(&cols, d))
        })
        .collect()
}

/// `exp(i t H)` for a GUE matrix `H` normalized to unit spectral scale.
fn small_rotation<R: Rng + ?Sized>(rng: &mut R, d: usize, t: f64) -> Result<CMatrix> {
    let mut h = CMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = C64::new(rng.sample::<f64, _>(StandardNormal), 0.0);
        for j in i + 1..d {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                * std::f64::consts::FRAC_1_SQRT_2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    let e = hermitian_eig(&h)?;
    let scale = t / (d as f64).sqrt();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        e.values.iter().map(|&l| C64::from_polar(1.0, scale * l)),
    ));
    Ok(&e.vectors * phases * e.vectors.adjoint())
}

/// One application of the dimension-reduction decomposition.
///
/// With `u` a common kernel vector of `P_a` and `P_b` moved to the last basis
/// position, the compression `B` of `P_c` to `u`'s complement has spectrum
/// `1^(n_c - 1), lambda, 0, ...`, so `B = t P~_c + (1 - t) P^_c` with
/// `t = 1 - lambda`, `P~_c` of rank `n_c - 1` and `P^_c` of rank `n_c`. Then
/// `T(rt) = (d - 1)/d (t T(decremented) + (1 - t) T(retained))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionStep {
    pub pair: (usize, usize),
    pub experiment: usize,
    pub t: f64,
    /// `(P~_a, P~_b, P~_c)`, absent when `n_c = 0`.
    pub decremented: Option<RankedTriple>,
    /// `(P~_a, P~_b, P^_c)`, absent when `n_c = d`.
    pub retained: Option<RankedTriple>,
}

impl ReductionStep {
    pub fn combined_triple(&self, d: usize) -> [f64; 3] {
        let f = (d - 1) as f64 / d as f64;
        let part = |o: &Option<RankedTriple>, w: f64| {
            o.as_ref()
                .map_or([0.0; 3], |rt| rt.trace_triple().0.map(|v| f * w * v))
        };
        let a = part(&self.decremented, self.t);
        let b = part(&self.retained, 1.0 - self.t);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    /// Largest deviation of the convex identity.
    pub fn residual(&self, original: &RankedTriple) -> f64 {
        let lhs = original.trace_triple().0;
        let rhs = self.combined_triple(original.d());
        (0..3).map(|k| (lhs[k] - rhs[k]).abs()).fold(0.0, f64::max)
    }

    pub fn to_record(&self, prec: Precision) -> Record {
        Record::new("reduction_step")
            .field("pair", format!("{},{}", self.pair.0 + 1, self.pair.1 + 1))
            .field("experiment", (self.experiment + 1).to_string())
            .field("t", prec.num(self.t))
            .field("decremented", self.decremented.is_some().to_string())
            .field("retained", self.retained.is_some().to_string())
    }
}

fn block(m: &CMatrix, n: usize) -> CMatrix {
    m.view((0, 0), (n, n)).into_owned()
}

/// Reduces `rt` along a pair `(a, b)` with `n_a + n_b < d`.
pub fn reduce_dimension(rt: &RankedTriple, pair: (usize, usize)) -> Result<ReductionStep> {
    let (a, b) = (pair.0.min(pair.1), pair.0.max(pair.1));
    if a == b || b > 2 {
        return Err(Error::InvalidArgument(format!("invalid pair {pair:?}")));
    }
    let c = 3 - a - b;
    let d = rt.d();
    if d < 2 {
        return Err(Error::Precondition("dimension 1 cannot be reduced".into()));
    }
    let ranks = rt.ranks();
    if ranks[a] + ranks[b] >= d {
        return Err(Error::Precondition(format!(
            "n{} + n{} = {} is not below d = {d}",
            a + 1,
            b + 1,
            ranks[a] + ranks[b]
        )));
    }
    let ps = rt.projections();
    let sum = ps[a].matrix() + ps[b].matrix();
    let e = hermitian_eig(&sum)?;
    let smallest = e.values[d - 1];
    if smallest.abs() > KERNEL_TOL {
        return Err(Error::Precondition(format!(
            "P{} + P{} has no kernel (smallest eigenvalue {smallest:.3e})",
            a + 1,
            b + 1
        )));
    }
    // eigenvalues are descending, so the kernel vector is already last
    let u = &e.vectors;
    let conj = |p: &Projection| u.adjoint() * p.matrix() * u;
    let m = d - 1;
    let pa = Projection::round_from(&block(&conj(&ps[a]), m), ranks[a])?;
    let pb = Projection::round_from(&block(&conj(&ps[b]), m), ranks[b])?;
    let bc = block(&conj(&ps[c]), m);
    let nc = ranks[c];
    let eb = hermitian_eig(&bc)?;
    let cols = |k: usize| (0..k).map(|i| eb.vector(i)).collect::<Vec<_>>();

    let assemble = |pc: Projection| {
        let mut v = [pa.clone(), pb.clone(), pa.clone()];
        v[a] = pa.clone();
        v[b] = pb.clone();
        v[c] = pc;
        RankedTriple::new(v)
    };
    let (t, decremented, retained) = if nc == 0 {
        (0.0, None, Some(assemble(Projection::zero(m))?))
    } else if nc == d {
        (1.0, Some(assemble(Projection::identity(m))?), None)
    } else {
        let t = (1.0 - eb.values[nc - 1]).clamp(0.0, 1.0);
        let dec = assemble(Projection::from_orthonormal_columns(&cols(nc - 1), m))?;
        let ret = assemble(Projection::from_orthonormal_columns(&cols(nc), m))?;
        (t, Some(dec), Some(ret))
    };
    Ok(ReductionStep {
        pair: (a, b),
        experiment: c,
        t,
        decremented,
        retained,
    })
}

/// `P_which (+) 1` and `P_other (+) 0` on `C^(d+1)`.
pub fn blow_up(rt: &RankedTriple, which: usize) -> Result<RankedTriple> {
    if which > 2 {
        return Err(Error::InvalidArgument(format!("experiment index {which}")));
    }
    let ps = rt.projections();
    RankedTriple::new([0, 1, 2].map(|i| ps[i].extend(i == which)))
}

/// Branch weights below this are discarded by [`iterate_reduction`].
const BRANCH_FLOOR: f64 = 1e-14;

/// Reduces greedily until no pair satisfies `n_a + n_b < d`.
///
/// The pair with the smallest `n_a + n_b` goes first, ties broken
/// lexicographically. The result satisfies
/// `sum_k w_k (d_k / d) T(rt_k) = T(rt)`.
pub fn iterate_reduction(rt: &RankedTriple) -> Result<Vec<(f64, RankedTriple)>> {
    let mut done = Vec::new();
    let mut work = vec![(1.0, rt.clone())];
    while let Some((w, cur)) = work.pop() {
        let pairs = cur.reducible_pairs();
        let ranks = cur.ranks();
        let Some(&pair) = pairs.iter().min_by_key(|&&(a, b)| (ranks[a] + ranks[b], a, b)) else {
            done.push((w, cur));
            continue;
        };
        if cur.d() == 1 {
            // the children have dimension zero and contribute nothing
            continue;
        }
        let step = reduce_dimension(&cur, pair)?;
        for (o, tw) in [(step.decremented, step.t), (step.retained, 1.0 - step.t)] {
            if let Some(child) = o {
                if w * tw > BRANCH_FLOOR {
                    work.push((w * tw, child));
                }
            }
        }
    }
    Ok(done)
}

/// `sum_k w_k (d_k / d) T(rt_k)`.
pub fn recombine(terminals: &[(f64, RankedTriple)], d: usize) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for (w, rt) in terminals {
        let f = w * rt.d() as f64 / d as f64;
        let t = rt.trace_triple().0;
        for k in 0..3 {
            acc[k] += f * t[k];
        }
    }
    acc
}

/// Inclusion statements that can be checked by sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposition {
    /// `S_d(n, n, n)` against `co{max(0, (6n-2d)/d) S2, (2n/d) S2}`.
    TypeI { n: usize, d: usize },
    /// `S_d(n, d-n, d-n)` against the shifted type I bodies.
    TypeISwap { n: usize, d: usize },
    /// `S_d(n, n+k, n+k)` against `co{A1, A2}`.
    TypeII { n: usize, k: usize, d: usize },
    /// `S_d(n, n+k, d-n-k)` against `co{A1 + a, A2}`.
    TypeIISwap { n: usize, k: usize, d: usize },
    /// `S_d(n, n+k, n+k')` against `co{B1, B2, B3}`.
    TypeIII { n: usize, k: usize, kp: usize, d: usize },
    /// `tr_d(P1 P2)` for ranks `n1, n2` against the closed interval.
    TwoExp { n1: usize, n2: usize, d: usize },
    /// Any ranks against the slice of the marginal vector `ranks / d`.
    Slice { ranks: [usize; 3], d: usize },
}

fn pos(v: f64) -> f64 {
    v.max(0.0)
}

impl Proposition {
    pub fn name(&self) -> &'static str {
        match self {
            Proposition::TypeI { .. } => "typeI",
            Proposition::TypeISwap { .. } => "typeI-swap",
            Proposition::TypeII { .. } => "typeII",
            Proposition::TypeIISwap { .. } => "typeII-swap",
            Proposition::TypeIII { .. } => "typeIII",
            Proposition::TwoExp { .. } => "two-exp",
            Proposition::Slice { .. } => "slice",
        }
    }

    pub fn d(&self) -> usize {
        match *self {
            Proposition::TypeI { d, .. }
            | Proposition::TypeISwap { d, .. }
            | Proposition::TypeII { d, .. }
            | Proposition::TypeIISwap { d, .. }
            | Proposition::TypeIII { d, .. }
            | Proposition::TwoExp { d, .. }
            | Proposition::Slice { d, .. } => d,
        }
    }

    /// Named integer parameters, for reports.
    pub fn params(&self) -> Vec<(&'static str, usize)> {
        match *self {
            Proposition::TypeI { n, d } | Proposition::TypeISwap { n, d } => {
                vec![("n", n), ("d", d)]
            }
            Proposition::TypeII { n, k, d } | Proposition::TypeIISwap { n, k, d } => {
                vec![("n", n), ("k", k), ("d", d)]
            }
            Proposition::TypeIII { n, k, kp, d } => vec![("n", n), ("k", k), ("kp", kp), ("d", d)],
            Proposition::TwoExp { n1, n2, d } => vec![("n1", n1), ("n2", n2), ("d", d)],
            Proposition::Slice { ranks, d } => vec![
                ("n1", ranks[0]),
                ("n2", ranks[1]),
                ("n3", ranks[2]),
                ("d", d),
            ],
        }
    }

    /// Ranks of the sampled projections (the third is unused for `TwoExp`).
    pub fn ranks(&self) -> [usize; 3] {
        match *self {
            Proposition::TypeI { n, .. } => [n, n, n],
            Proposition::TypeISwap { n, d } => [n, d - n, d - n],
            Proposition::TypeII { n, k, .. } => [n, n + k, n + k],
            Proposition::TypeIISwap { n, k, d } => [n, n + k, d - n - k],
            Proposition::TypeIII { n, k, kp, .. } => [n, n + k, n + kp],
            Proposition::TwoExp { n1, n2, .. } => [n1, n2, 0],
            Proposition::Slice { ranks, .. } => ranks,
        }
    }

    /// Checks the rank and dimension hypotheses.
    pub fn validate(&self) -> Result<()> {
        let fail = |why: &str| Err(Error::Precondition(format!("{}: {why}", self.name())));
        let d = self.d();
        if d == 0 {
            return fail("d must be positive");
        }
        match *self {
            Proposition::TypeI { n, d } | Proposition::TypeISwap { n, d } => {
                if n == 0 || 2 * n > d {
                    return fail("need 1 <= n and 2n <= d");
                }
            }
            Proposition::TypeII { n, k, d } | Proposition::TypeIISwap { n, k, d } => {
                if n == 0 || k == 0 || 2 * (n + k) > d {
                    return fail("need n, k >= 1 and 2(n + k) <= d");
                }
            }
            Proposition::TypeIII { n, k, kp, d } => {
                if n == 0 || k == 0 || k > kp || 2 * (n + kp) > d {
                    return fail("need n, k >= 1, k <= k' and 2(n + k') <= d");
                }
            }
            Proposition::TwoExp { n1, n2, d } => {
                if n1 > d || n2 > d {
                    return fail("ranks must not exceed d");
                }
            }
            Proposition::Slice { ranks, d } => {
                if ranks.iter().any(|&n| n > d) {
                    return fail("ranks must not exceed d");
                }
            }
        }
        Ok(())
    }

    /// Convex bodies whose hull should contain the sampled trace triples.
    pub fn hull(&self) -> Option<Vec<DSet>> {
        let body = |scale: f64, offset: [f64; 3]| DSet {
            scale,
            offset,
            interval: None,
        };
        // (2n/d) S2 + (0, 0, [0, k/d])
        let a2 = |n: usize, k: usize, d: f64| DSet {
            scale: 2.0 * n as f64 / d,
            offset: [0.0, 0.0, k as f64 / (2.0 * d)],
            interval: (k > 0).then_some(Interval {
                axis: 2,
                half_length: k as f64 / (2.0 * d),
            }),
        };
        Some(match *self {
            Proposition::TypeI { n, d } => {
                let (n, d) = (n as f64, d as f64);
                vec![DSet::s2(pos((6.0 * n - 2.0 * d) / d)), DSet::s2(2.0 * n / d)]
            }
            Proposition::TypeISwap { n, d } => {
                let m = n.min(d - 2 * n) as f64;
                let (n, d) = (n as f64, d as f64);
                let e = (d - 2.0 * n) / d;
                vec![
                    body(pos((6.0 * n - 2.0 * d) / d), [m / d, m / d, e]),
                    body(2.0 * n / d, [0.0, 0.0, e]),
                ]
            }
            Proposition::TypeII { n, k, d } => {
                let (nf, kf, df) = (n as f64, k as f64, d as f64);
                vec![
                    DSet::s2(pos((6.0 * nf + 4.0 * kf - 2.0 * df) / df)),
                    a2(n, k, df),
                ]
            }
            Proposition::TypeIISwap { n, k, d } => {
                let m = n.min(d - 2 * n - 2 * k) as f64;
                let (nf, kf, df) = (n as f64, k as f64, d as f64);
                vec![
                    body(
                        pos((6.0 * nf + 4.0 * kf - 2.0 * df) / df),
                        [0.0, m / df, (m + kf) / df],
                    ),
                    a2(n, k, df),
                ]
            }
            Proposition::TypeIII { n, k, kp, d } => {
                let m = n.min(kp - k) as f64;
                let (nf, kf, kpf, df) = (n as f64, k as f64, kp as f64, d as f64);
                vec![
                    DSet::s2(pos((6.0 * nf + 2.0 * kf + 2.0 * kpf - 2.0 * df) / df)),
                    a2(n, k, df),
                    body(
                        pos(2.0 * (nf + kf - kpf) / df),
                        [0.0, m / df, (m + kf) / df],
                    ),
                ]
            }
            Proposition::TwoExp { .. } | Proposition::Slice { .. } => return None,
        })
    }

    /// Every admissible parameter choice of the five hull statements with
    /// `d <= max_d`.
    pub fn admissible(max_d: usize) -> Vec<Proposition> {
        let mut out = Vec::new();
        for d in 1..=max_d {
            for n in 1..=d / 2 {
                out.push(Proposition::TypeI { n, d });
                out.push(Proposition::TypeISwap { n, d });
            }
            for n in 1..=d / 2 {
                for k in 1..=d / 2 {
                    if 2 * (n + k) <= d {
                        out.push(Proposition::TypeII { n, k, d });
                        out.push(Proposition::TypeIISwap { n, k, d });
                    }
                    for kp in k..=d / 2 {
                        if 2 * (n + kp) <= d {
                            out.push(Proposition::TypeIII { n, k, kp, d });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Sampling parameters for [`check_inclusion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub trials: usize,
    pub seed: u64,
    /// Points farther than this outside the hull are violations.
    pub eps: f64,
    pub ensemble: Ensemble,
    pub max_iter: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            eps: 1e-6,
            ensemble: Ensemble::Haar,
            max_iter: 10_000,
        }
    }
}

/// Observed against analytic range of a two-projection trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRange {
    pub empirical_min: f64,
    pub empirical_max: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub proposition: Proposition,
    pub trials: usize,
    pub violations: usize,
    pub inconclusive: usize,
    /// Largest certified distance outside the hull (0 when none).
    pub max_outward: f64,
    /// Seconds.
    pub wall_time: f64,
    pub range: Option<TraceRange>,
}

impl InclusionReport {
    pub fn to_record(&self, prec: Precision) -> Record {
        let mut rec = Record::new("report").field("prop", self.proposition.name());
        for (k, v) in self.proposition.params() {
            rec = rec.field(k, v.to_string());
        }
        rec = rec
            .field("trials", self.trials.to_string())
            .field("violations", self.violations.to_string())
            .field("inconclusive", self.inconclusive.to_string())
            .field("max_outward", prec.num(self.max_outward));
        if let Some(r) = self.range {
            rec = rec
                .field("min", prec.num(r.empirical_min))
                .field("max", prec.num(r.empirical_max))
                .field("lower", prec.num(r.lower))
                .field("upper", prec.num(r.upper));
        }
        rec.field("wall_time", prec.num(self.wall_time))
    }
}

#[derive(Clone, Copy)]
struct Tally {
    violations: usize,
    inconclusive: usize,
    max_outward: f64,
    min: f64,
    max: f64,
}

impl Tally {
    fn empty() -> Self {
        Self {
            violations: 0,
            inconclusive: 0,
            max_outward: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            violations: self.violations + o.violations,
            inconclusive: self.inconclusive + o.inconclusive,
            max_outward: self.max_outward.max(o.max_outward),
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }
}

enum Verdict {
    Inside,
    Outside(f64),
    Unknown,
}

fn decide(check: impl Fn(usize) -> HullCertificate, max_iter: usize) -> Verdict {
    let judge = |c: HullCertificate| match c {
        HullCertificate::Member { .. } => Some(Verdict::Inside),
        HullCertificate::NonMember { margin, .. } => Some(Verdict::Outside(margin)),
        HullCertificate::Inconclusive { .. } => None,
    };
    judge(check(max_iter))
        .or_else(|| judge(check(10 * max_iter)))
        .unwrap_or(Verdict::Unknown)
}

/// Samples trace triples and tests them against the statement's hull.
///
/// Trial `i` draws from stream `i` of the seed, so results do not depend on
/// the thread count. Inconclusive hull tests are retried with ten times the
/// iteration budget before being counted as inconclusive.
pub fn check_inclusion(prop: &Proposition, opts: &CheckOptions) -> Result<InclusionReport> {
    prop.validate()?;
    let start = Instant::now();
    let d = prop.d();
    let ranks = prop.ranks();
    let hull = prop.hull();
    let (lower, upper) = match *prop {
        Proposition::TwoExp { n1, n2, d } => {
            two_experiment_slice(n1 as f64 / d as f64, n2 as f64 / d as f64)?
        }
        _ => (0.0, 0.0),
    };

    let trial = |i: usize| -> Result<Tally> {
        let mut rng: StreamRng = rng::stream(opts.seed, i as u64);
        let mut tally = Tally::empty();
        let mut record = |v: Verdict| match v {
            Verdict::Inside => {}
            Verdict::Outside(m) => {
                tally.violations += 1;
                tally.max_outward = tally.max_outward.max(m);
            }
            Verdict::Unknown => tally.inconclusive += 1,
        };
        match *prop {
            Proposition::TwoExp { .. } => {
                let ps = sample_projections(&mut rng, d, &ranks[..2], opts.ensemble)?;
                let v = normalized_trace_product(ps[0].matrix(), ps[1].matrix());
                let outside = (lower - v).max(v - upper);
                // exact statement; allow only rounding
                record(if outside > 1e-12 {
                    Verdict::Outside(outside)
                } else {
                    Verdict::Inside
                });
                tally.min = v;
                tally.max = v;
            }
            Proposition::Slice { .. } => {
                let rt = sample_ranked_triple_with(&mut rng, d, ranks, opts.ensemble)?;
                let (r, p) = (rt.marginals(), rt.trace_triple());
                let verdict = decide(
                    |max_iter| {
                        let o = HullOptions {
                            eps: opts.eps,
                            max_iter,
                        };
                        slice_membership_with(&r, &p, &o)
                            .map(|c| c.hull)
                            .unwrap_or(HullCertificate::Inconclusive {
                                distance_lower: 0.0,
                                distance_upper: f64::INFINITY,
                                iterations: 0,
                            })
                    },
                    opts.max_iter,
                );
                record(verdict);
            }
            _ => {
                let bodies = hull.as_ref().expect("hull statements have bodies");
                let rt = sample_ranked_triple_with(&mut rng, d, ranks, opts.ensemble)?;
                let p = rt.trace_triple().0;
                let verdict = decide(
                    |max_iter| {
                        hull_membership(
                            bodies,
                            p,
                            &HullOptions {
                                eps: opts.eps,
                                max_iter,
                            },
                        )
                    },
                    opts.max_iter,
                );
                record(verdict);
            }
        }
        Ok(tally)
    };

    let tally = (0..opts.trials)
        .into_par_iter()
        .map(trial)
        .try_reduce(Tally::empty, |a, b| Ok(a.merge(b)))?;

    Ok(InclusionReport {
        proposition: *prop,
        trials: opts.trials,
        violations: tally.violations,
        inconclusive: tally.inconclusive,
        max_outward: tally.max_outward,
        wall_time: start.elapsed().as_secs_f64(),
        range: matches!(prop, Proposition::TwoExp { .. }).then_some(TraceRange {
            empirical_min: tally.min,
            empirical_max: tally.max,
            lower,
            upper,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptope::{elliptope_from_s2_checked, S2Point};
    use crate::matcore::max_abs_diff;

    fn diag(bits: &[u8]) -> Projection {
        Projection::diagonal(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        (0..3).all(|k| (a[k] - b[k]).abs() <= tol)
    }

    #[test]
    fn sampling_examples() {
        for seed in 0..200 {
            let rt = sample_ranked_triple(2, [1, 1, 1], seed).unwrap();
            elliptope_from_s2_checked(&S2Point(rt.trace_triple().0), 1e-9).unwrap();
        }
        let rt = sample_ranked_triple(4, [0, 2, 3], 1).unwrap();
        let w = rt.trace_triple().0;
        assert_eq!((w[0], w[1]), (0.0, 0.0));
        let rt = sample_ranked_triple(3, [3, 3, 3], 1).unwrap();
        assert_eq!(rt.trace_triple().0, [1.0; 3]);
        assert!(sample_ranked_triple(3, [4, 0, 0], 1).is_err());
    }

    #[test]
    fn mixed_ensemble_gives_valid_projections() {
        let mut rng = rng::seeded(3);
        for _ in 0..200 {
            let rt = sample_ranked_triple_with(&mut rng, 5, [1, 2, 3], Ensemble::Mixed).unwrap();
            assert_eq!(rt.ranks(), [1, 2, 3]);
            for p in rt.projections() {
                let m = p.matrix();
                assert!(max_abs_diff(&(m * m), m) < 1e-12);
            }
        }
    }

    #[test]
    fn hand_computed_reduction() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = nalgebra::DVector::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)]);
        let p3 = Projection::from_orthonormal_columns(&[v], 3);
        let rt = RankedTriple::new([diag(&[1, 0, 0]), diag(&[0, 1, 0]), p3]).unwrap();
        assert!(close3(rt.trace_triple().0, [0.0, 1.0 / 6.0, 0.0], 1e-15));
        let step = reduce_dimension(&rt, (0, 1)).unwrap();
        assert!((step.t - 0.5).abs() < 1e-14);
        let dec = step.decremented.as_ref().unwrap().trace_triple().0;
        let ret = step.retained.as_ref().unwrap().trace_triple().0;
        assert!(close3(dec, [0.0; 3], 1e-14));
        assert!(close3(ret, [0.0, 0.5, 0.0], 1e-14));
        assert!(step.residual(&rt) < 1e-15);
    }

    #[test]
    fn aligned_kernel_gives_zero_weight() {
        let rt = RankedTriple::new([diag(&[1, 0, 0]), diag(&[0, 1, 0]), diag(&[1, 1, 0])]).unwrap();
        let step = reduce_dimension(&rt, (0, 1)).unwrap();
        assert!(step.t.abs() < 1e-14);
        assert_eq!(step.retained.as_ref().unwrap().ranks(), [1, 1, 2]);
        assert!(step.residual(&rt) < 1e-15);
    }

    #[test]
    fn reduction_preconditions() {
        let rt = sample_ranked_triple(3, [2, 1, 1], 4).unwrap();
        assert!(matches!(reduce_dimension(&rt, (0, 1)), Err(Error::Precondition(_))));
        assert!(reduce_dimension(&rt, (1, 2)).is_ok());
        assert!(reduce_dimension(&rt, (1, 1)).is_err());
    }

    #[test]
    fn edge_ranks_of_third_projection() {
        for (ranks, t) in [([1, 1, 0], 0.0), ([1, 1, 4], 1.0)] {
            let rt = sample_ranked_triple(4, ranks, 9).unwrap();
            let step = reduce_dimension(&rt, (0, 1)).unwrap();
            assert_eq!(step.t, t);
            assert!(step.residual(&rt) < 1e-12);
        }
    }

    #[test]
    fn random_reductions_satisfy_identity() {
        for seed in 0..1000 {
            let rt = sample_ranked_triple(4, [1, 1, 2], seed).unwrap();
            let step = reduce_dimension(&rt, (0, 1)).unwrap();
            assert!(step.residual(&rt) < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn blow_up_examples() {
        let id = Projection::identity(2);
        let rt = RankedTriple::new([id.clone(), id.clone(), id]).unwrap();
        let up = blow_up(&rt, 0).unwrap();
        assert!(close3(up.trace_triple().0, [2.0 / 3.0; 3], 1e-15));

        for seed in 0..100 {
            let rt = sample_ranked_triple(3, [1, 2, 1], seed).unwrap();
            for which in 0..3 {
                let up = blow_up(&rt, which).unwrap();
                let scaled = up.trace_triple().0.map(|v| v * 4.0 / 3.0);
                assert!(close3(scaled, rt.trace_triple().0, 1e-14));
            }
            let twice0 = blow_up(&blow_up(&rt, 0).unwrap(), 0).unwrap();
            let twice1 = blow_up(&blow_up(&rt, 1).unwrap(), 1).unwrap();
            assert!(close3(twice0.trace_triple().0, twice1.trace_triple().0, 1e-15));
        }
    }

    #[test]
    fn blow_up_then_reduce_recovers_original() {
        for seed in 0..200 {
            // n1 + n2 = d, so the appended coordinate spans the common kernel
            let rt = sample_ranked_triple(3, [1, 2, 1], seed).unwrap();
            let up = blow_up(&rt, 2).unwrap();
            let step = reduce_dimension(&up, (0, 1)).unwrap();
            assert!((step.t - 1.0).abs() < 1e-12);
            let back = step.decremented.unwrap().trace_triple().0;
            assert!(close3(back, rt.trace_triple().0, 1e-12));
        }
    }

    #[test]
    fn iterate_reduction_examples() {
        let rt = sample_ranked_triple(2, [1, 1, 1], 0).unwrap();
        let out = iterate_reduction(&rt).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, 1.0);

        let rt = sample_ranked_triple(3, [1, 1, 1], 0).unwrap();
        let out = iterate_reduction(&rt).unwrap();
        assert!(out.iter().all(|(_, t)| t.d() <= 2 && t.reducible_pairs().is_empty()));
        assert!(close3(recombine(&out, 3), rt.trace_triple().0, 1e-10));

        for seed in 0..100 {
            let rt = sample_ranked_triple(6, [2, 2, 2], seed).unwrap();
            let out = iterate_reduction(&rt).unwrap();
            assert!(close3(recombine(&out, 6), rt.trace_triple().0, 1e-8));
            assert!(out.iter().all(|(_, t)| t.reducible_pairs().is_empty()));
        }
    }

    #[test]
    fn check_inclusion_examples() {
        let opts = CheckOptions {
            trials: 2000,
            seed: 1,
            ..CheckOptions::default()
        };
        for prop in [
            Proposition::TypeI { n: 1, d: 2 },
            Proposition::TypeI { n: 2, d: 5 },
            Proposition::TypeIISwap { n: 1, k: 1, d: 5 },
            Proposition::TypeIII { n: 1, k: 1, kp: 2, d: 7 },
        ] {
            let rep = check_inclusion(&prop, &opts).unwrap();
            assert_eq!(rep.violations, 0, "{rep:?}");
            assert_eq!(rep.inconclusive, 0, "{rep:?}");
        }
        assert!(check_inclusion(&Proposition::TypeI { n: 3, d: 5 }, &opts).is_err());
    }

    #[test]
    fn two_exp_range() {
        let opts = CheckOptions {
            trials: 100_000,
            seed: 2,
            ..CheckOptions::default()
        };
        let rep = check_inclusion(&Proposition::TwoExp { n1: 2, n2: 2, d: 3 }, &opts).unwrap();
        let r = rep.range.unwrap();
        assert_eq!(rep.violations, 0);
        assert!((r.lower - 1.0 / 3.0).abs() < 1e-15 && (r.upper - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.empirical_min - r.lower < 5e-3 && r.upper - r.empirical_max < 5e-3);
    }

    #[test]
    fn admissible_counts() {
        let all = Proposition::admissible(8);
        let count = |name| all.iter().filter(|p| p.name() == name).count();
        assert_eq!(count("typeI"), 16);
        assert_eq!(count("typeII"), 14);
        assert_eq!(count("typeIII"), 20);
        assert!(all.iter().all(|p| p.validate().is_ok()));
    }

    #[test]
    fn record_round_trip() {
        let rt = sample_ranked_triple(3, [1, 2, 0], 5).unwrap();
        let rec = rt.to_record(Precision::Full);
        let back = RankedTriple::from_record(&Record::parse(&rec.to_string()).unwrap()).unwrap();
        assert_eq!(back.ranks(), rt.ranks());
        for (a, b) in back.projections().iter().zip(rt.projections()) {
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
        }
    }
}
