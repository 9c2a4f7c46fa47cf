//! Explicit realizations of slice points by projections on a finite-dimensional
//! algebra with a weighted normalized trace.

use crate::elliptope::{elliptope_membership, realize_s2_point, EllipPoint, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::matcore::{direct_sum, max_abs_diff, CMatrix, Projection, C64};
use crate::point::{norm, sub, CorrPoint3, MarginalVec};
use crate::record::{parse_matrix, Precision, Record};
use crate::slices::{
    build_d_sets, correlation_tensor, CorrelationTensor, DKind, DWitness, HullCertificate,
    SliceCertificate,
};

/// Largest total dimension produced by [`realize_hull_point`].
pub const DIMENSION_BOUND: usize = 16;

/// Certificate weights below this are dropped before realization.
const WEIGHT_FLOOR: f64 = 1e-12;

/// `tau(A) = sum_k weights[k] * Tr(A_k) / blocks[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedAlgebra {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
}

impl TracedAlgebra {
    pub fn new(blocks: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if blocks.len() != weights.len() {
            return Err(Error::DimensionMismatch(blocks.len(), weights.len()));
        }
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::ZeroDimension);
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-12) {
            return Err(Error::InvalidArgument(format!("negative weight in {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        Ok(Self { blocks, weights })
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Real part of the trace of a block-diagonal element.
    pub fn tau(&self, blocks: &[CMatrix]) -> f64 {
        self.blocks
            .iter()
            .zip(&self.weights)
            .zip(blocks)
            .map(|((&d, &w), m)| w * m.trace().re / d as f64)
            .sum()
    }
}

/// Three block-diagonal projections and a traced algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub algebra: TracedAlgebra,
    /// `projections[x][k]` is block `k` of `P_x`.
    pub projections: [Vec<CMatrix>; 3],
}

impl Realization {
    pub fn new(algebra: TracedAlgebra, projections: [Vec<CMatrix>; 3]) -> Result<Self> {
        for p in &projections {
            if p.len() != algebra.blocks.len() {
                return Err(Error::DimensionMismatch(p.len(), algebra.blocks.len()));
            }
            for (m, &d) in p.iter().zip(&algebra.blocks) {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::DimensionMismatch(m.nrows(), d));
                }
            }
        }
        Ok(Self {
            algebra,
            projections,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.algebra.total_dim()
    }

    /// `P_x` as one block-diagonal matrix.
    pub fn full_matrix(&self, x: usize) -> CMatrix {
        let blocks: Vec<&CMatrix> = self.projections[x].iter().collect();
        direct_sum(&blocks)
    }

    pub fn marginals(&self) -> [f64; 3] {
        [0, 1, 2].map(|x| self.algebra.tau(&self.projections[x]))
    }

    /// `(tau(P1 P2), tau(P1 P3), tau(P2 P3))`.
    pub fn correlation(&self) -> CorrPoint3 {
        let pair = |x: usize, y: usize| {
            let prods: Vec<CMatrix> = self.projections[x]
                .iter()
                .zip(&self.projections[y])
                .map(|(a, b)| a * b)
                .collect();
            self.algebra.tau(&prods)
        };
        CorrPoint3([pair(0, 1), pair(0, 2), pair(1, 2)])
    }

    /// Direct sum with outer weights folded into the block weights.
    pub fn direct_sum(parts: &[(f64, Realization)]) -> Result<Realization> {
        let mut blocks = Vec::new();
        let mut weights = Vec::new();
        let mut projections: [Vec<CMatrix>; 3] = Default::default();
        for (t, r) in parts {
            blocks.extend(&r.algebra.blocks);
            weights.extend(r.algebra.weights.iter().map(|w| t * w));
            for x in 0..3 {
                projections[x].extend(r.projections[x].iter().cloned());
            }
        }
        Realization::new(TracedAlgebra::new(blocks, weights)?, projections)
    }

    /// Applies outcome flips and relabeling to the projections themselves.
    pub fn apply_map(&self, map: &crate::slices::SliceMap) -> Realization {
        let projections = map.apply_ops(&self.projections, |blocks: &Vec<CMatrix>| {
            blocks
                .iter()
                .map(|m| CMatrix::identity(m.nrows(), m.ncols()) - m)
                .collect()
        });
        Realization {
            algebra: self.algebra.clone(),
            projections,
        }
    }

    pub fn to_record(&self, prec: Precision) -> Record {
        let blocks = self
            .algebra
            .blocks
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut rec = Record::new("realization")
            .field("dim", self.total_dim().to_string())
            .field("blocks", blocks)
            .field("weights", prec.vec(&self.algebra.weights));
        for (x, p) in self.projections.iter().enumerate() {
            let text = p.iter().map(|m| prec.matrix(m)).collect::<Vec<_>>().join(";");
            rec = rec.field(&format!("p{}", x + 1), text);
        }
        rec
    }

    pub fn from_record(rec: &Record) -> Result<Self> {
        if rec.kind != "realization" {
            return Err(Error::Parse(format!("expected realization, got {}", rec.kind)));
        }
        let blocks = rec
            .get("blocks")?
            .split(',')
            .map(|b| b.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let weights = rec.get_vec("weights")?;
        let mut projections: [Vec<CMatrix>; 3] = Default::default();
        for (x, slot) in projections.iter_mut().enumerate() {
            *slot = rec
                .get(&format!("p{}", x + 1))?
                .split(';')
                .map(parse_matrix)
                .collect::<Result<_>>()?;
        }
        Realization::new(TracedAlgebra::new(blocks, weights)?, projections)
    }
}

fn real(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, C64::new(v, 0.0))
}

fn bit(b: bool) -> CMatrix {
    real(if b { 1.0 } else { 0.0 })
}

/// Rank-one projection onto `(sqrt f, sqrt(1 - f))`, which has overlap `f`
/// with the first basis vector.
fn tilted(f: f64) -> CMatrix {
    let f = f.clamp(0.0, 1.0);
    let (a, b) = (f.sqrt(), (1.0 - f).sqrt());
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(a * a, 0.0),
            C64::new(a * b, 0.0),
            C64::new(a * b, 0.0),
            C64::new(b * b, 0.0),
        ],
    )
}

fn first_axis() -> CMatrix {
    tilted(1.0)
}

/// Realizes the image of `witness` in body `which` for standard `r`,
/// following the block templates of the slice construction. The image must
/// equal `target` within `1e-9`.
pub fn realize_d_point(
    r: &MarginalVec,
    which: DKind,
    witness: &DWitness,
    target: &CorrPoint3,
) -> Result<Realization> {
    let bodies = build_d_sets(r)?;
    let body = &bodies[which.index()];
    if !elliptope_membership(&witness.q, MEMBERSHIP_TOL).member {
        return Err(Error::BadWitness(format!("{:?} is not an elliptope point", witness.q)));
    }
    if witness.s.abs() > body.half_length() + 1e-12 {
        return Err(Error::BadWitness(format!(
            "segment coordinate {} outside +-{}",
            witness.s,
            body.half_length()
        )));
    }
    let image = body.point(witness);
    if norm(sub(image, target.0)) > 1e-9 {
        return Err(Error::BadWitness(format!(
            "witness image {image:?} differs from target {:?}",
            target.0
        )));
    }

    let [r1, r2, r3] = r.0;
    let pauli = |q: &EllipPoint| -> Result<[CMatrix; 3]> {
        Ok(realize_s2_point(q)?.map(|p: Projection| p.matrix().clone()))
    };
    let (blocks, weights, projections): (Vec<usize>, Vec<f64>, [Vec<CMatrix>; 3]) = match which {
        DKind::D1 => {
            let s = r1 + r2 + r3 - 1.0;
            if s <= 0.0 {
                (
                    vec![1, 1, 1, 1],
                    vec![r1, r2, r3, -s],
                    [0, 1, 2].map(|i| (0..4).map(|k| bit(k == i)).collect()),
                )
            } else {
                let ph = pauli(&witness.q)?;
                (
                    vec![2, 1, 1, 1],
                    vec![2.0 * s, 1.0 - r2 - r3, 1.0 - r1 - r3, 1.0 - r1 - r2],
                    [0, 1, 2].map(|i| {
                        let mut v = vec![ph[i].clone()];
                        v.extend((0..3).map(|k| bit(k == i)));
                        v
                    }),
                )
            }
        }
        DKind::D2 => {
            let ph = pauli(&witness.q)?;
            let width = r2 - r1;
            let u = body.half_length() + witness.s;
            let f = if width > 0.0 { u / width } else { 0.0 };
            let zero2 = CMatrix::zeros(2, 2);
            (
                vec![2, 2, 1, 1],
                vec![2.0 * r1, 2.0 * width, r3 - r2, 1.0 - r3 - r2],
                [
                    vec![ph[0].clone(), zero2, bit(false), bit(false)],
                    vec![ph[1].clone(), first_axis(), bit(false), bit(false)],
                    vec![ph[2].clone(), tilted(f), bit(true), bit(false)],
                ],
            )
        }
        DKind::D3 => {
            let s = r1 + r2 - r3;
            if s <= 0.0 {
                (
                    vec![1, 1, 1, 1],
                    vec![r1, r2, -s, 1.0 - r3],
                    [
                        vec![bit(true), bit(false), bit(false), bit(false)],
                        vec![bit(false), bit(true), bit(false), bit(false)],
                        vec![bit(true), bit(true), bit(true), bit(false)],
                    ],
                )
            } else {
                let ph = pauli(&witness.q)?;
                (
                    vec![2, 1, 1, 1],
                    vec![2.0 * s, r3 - r2, r3 - r1, 1.0 - r1 - r2],
                    [
                        vec![ph[0].clone(), bit(true), bit(false), bit(false)],
                        vec![ph[1].clone(), bit(false), bit(true), bit(false)],
                        vec![ph[2].clone(), bit(true), bit(true), bit(false)],
                    ],
                )
            }
        }
    };
    // clamp rounding noise such as 1 - r3 - r2 = -1e-17
    let weights: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Realization::new(TracedAlgebra::new(blocks, weights)?, projections)
}

/// Realizes a certified member point for the certificate's original `r`.
pub fn realize_hull_point(cert: &SliceCertificate) -> Result<Realization> {
    let HullCertificate::Member { atoms, .. } = &cert.hull else {
        return Err(Error::NotMembership);
    };
    let kept: Vec<_> = atoms.iter().filter(|a| a.weight >= WEIGHT_FLOOR).collect();
    let total: f64 = kept.iter().map(|a| a.weight).sum();
    let mut parts = Vec::with_capacity(kept.len());
    for a in kept {
        let real = realize_d_point(
            &cert.r_std,
            DKind::from_index(a.body),
            &a.witness,
            &CorrPoint3(a.point),
        )?;
        parts.push((a.weight / total, real));
    }
    Ok(Realization::direct_sum(&parts)?.apply_map(&cert.map))
}

/// `p(i, j | x, y) = tau(E_{x,i} E_{y,j})` with `E_{x,0} = P_x`,
/// `E_{x,1} = I - P_x`.
pub fn evaluate_correlation(real: &Realization) -> CorrelationTensor {
    let pvm = |x: usize, i: usize| -> Vec<CMatrix> {
        real.projections[x]
            .iter()
            .map(|m| {
                if i == 0 {
                    m.clone()
                } else {
                    CMatrix::identity(m.nrows(), m.ncols()) - m
                }
            })
            .collect()
    };
    let elements: [[Vec<CMatrix>; 2]; 3] = [0, 1, 2].map(|x| [pvm(x, 0), pvm(x, 1)]);
    let mut p = [[[[0.0; 2]; 2]; 3]; 3];
    for x in 0..3 {
        for y in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    let prods: Vec<CMatrix> = elements[x][i]
                        .iter()
                        .zip(&elements[y][j])
                        .map(|(a, b)| a * b)
                        .collect();
                    p[x][y][i][j] = real.algebra.tau(&prods);
                }
            }
        }
    }
    CorrelationTensor { p }
}

/// One named pass/fail check with its worst observed defect.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_record(&self, prec: Precision) -> Record {
        let mut rec = Record::new("verification").field("passed", self.passed().to_string());
        for c in &self.checks {
            rec = rec.field(
                c.name,
                format!("{}:{}", if c.passed { "pass" } else { "fail" }, prec.num(c.defect)),
            );
        }
        rec
    }
}

/// Re-evaluates a realization against marginals `r` and point `p`.
pub fn verify_realization(
    real: &Realization,
    r: &MarginalVec,
    p: &CorrPoint3,
    tol: f64,
) -> VerificationReport {
    let mut checks = Vec::new();
    let mut push = |name, defect: f64, limit: f64| {
        checks.push(Check {
            name,
            passed: defect <= limit,
            defect,
        })
    };

    let weights = &real.algebra.weights;
    let neg = weights.iter().fold(0.0_f64, |m, w| m.max(-w));
    let sum_defect = (weights.iter().sum::<f64>() - 1.0).abs();
    push("weights", neg.max(sum_defect), tol);

    let mut proj: f64 = 0.0;
    let mut pvm: f64 = 0.0;
    for blocks in &real.projections {
        for m in blocks {
            let adj = m.adjoint();
            proj = proj.max(max_abs_diff(&(m * m), m)).max(max_abs_diff(&adj, m));
            let comp = CMatrix::identity(m.nrows(), m.ncols()) - m;
            pvm = pvm
                .max(max_abs_diff(&(&comp * &comp), &comp))
                .max((m * &comp).iter().fold(0.0, |a, z| a.max(z.norm())));
        }
    }
    push("projectionhood", proj, tol);
    push("pvm", pvm, tol);

    let tensor = evaluate_correlation(real);
    let marg = tensor.marginals();
    push(
        "marginals",
        (0..3).map(|x| (marg[x] - r.0[x]).abs()).fold(0.0, f64::max),
        tol,
    );
    let w = tensor.w();
    push(
        "correlation",
        (0..3).map(|k| (w[k] - p.0[k]).abs()).fold(0.0, f64::max),
        tol,
    );
    push("synchrony", tensor.synchrony_defect(), tol);
    push("nonnegativity", (-tensor.min_entry()).max(0.0), tol);
    push("normalization", tensor.normalization_defect(), tol);
    push(
        "tensor",
        tensor.max_abs_diff(&correlation_tensor(r, p)),
        tol,
    );
    push(
        "dimension",
        real.total_dim().saturating_sub(DIMENSION_BOUND) as f64,
        0.0,
    );
    VerificationReport { checks }
}
