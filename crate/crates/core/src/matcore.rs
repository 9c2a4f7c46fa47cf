//! Dense complex Hermitian kernel for the small dimensions used here (<= 32).
//!
//! Eigendecomposition is a cyclic complex Jacobi iteration with a fixed sweep
//! order, which keeps results bit-stable across platforms.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::point::CorrPoint3;
use crate::rng;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Entrywise tolerance for `M = M^dagger`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Entrywise tolerance for `P^2 = P`.
pub const IDEMPOTENT_TOL: f64 = 1e-10;
/// Tolerance between `Tr(P)` and its integer rank.
pub const RANK_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 64;

/// A validated Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix {
    m: CMatrix,
}

impl HermMatrix {
    /// Accepts `m` if it is Hermitian within [`HERMITIAN_TOL`] and stores its
    /// exact Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let asym = max_asymmetry(&m);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(Self {
            m: hermitian_part(&m),
        })
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix rows must be square".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eig(&self) -> Eigen {
        jacobi(&self.m)
    }
}

/// Eigenvalues in descending order with orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= lam;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.vectors.column(k).into_owned()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose asymmetry exceeds [`HERMITIAN_TOL`] relative to
/// `max(1, max |m_ij|)`, reporting the observed asymmetry.
pub fn hermitian_eig(m: &CMatrix) -> Result<Eigen> {
    check_square(m)?;
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let asym = max_asymmetry(m);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(jacobi(&hermitian_part(m)))
}

fn jacobi(m: &CMatrix) -> Eigen {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = CMatrix::identity(n, n);
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Eigen { values, vectors }
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
///
/// The rotation is `G = D R` where `D = diag(1, e^{-i phi})` makes the pivot
/// real and `R` is the classical real rotation.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = a.nrows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// An orthogonal projection `P = P^dagger = P^2` with integer rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: CMatrix,
    rank: usize,
}

impl Projection {
    /// Validates the projection invariants on `m`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let asym = max_asymmetry(&m);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotProjection(format!("asymmetry {asym:.3e}")));
        }
        let idem = max_abs_diff(&(&m * &m), &m);
        if idem > IDEMPOTENT_TOL {
            return Err(Error::NotProjection(format!("|P^2 - P| = {idem:.3e}")));
        }
        let tr = m.trace().re;
        let rank = tr.round();
        if (tr - rank).abs() > RANK_TOL || rank < 0.0 {
            return Err(Error::NotProjection(format!("trace {tr} is not an integer")));
        }
        Ok(Self {
            matrix: hermitian_part(&m),
            rank: rank as usize,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            rank: dim,
        }
    }

    /// Real diagonal 0/1 projection.
    pub fn diagonal(bits: &[bool]) -> Self {
        let n = bits.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j && bits[i] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let rank = bits.iter().filter(|&&b| b).count();
        Self { matrix: m, rank }
    }

    /// Projection onto the span of the given orthonormal columns.
    pub fn from_orthonormal_columns(cols: &[DVector<C64>], dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for c in cols {
            m += c * c.adjoint();
        }
        Self {
            matrix: m,
            rank: cols.len(),
        }
    }

    /// Rank-`rank` spectral rounding of a nearly-projection Hermitian matrix.
    pub fn round_from(m: &CMatrix, rank: usize) -> Result<Self> {
        let n = m.nrows();
        if rank > n {
            return Err(Error::RankOutOfRange { rank, dim: n });
        }
        let e = hermitian_eig(m)?;
        let cols: Vec<_> = (0..rank).map(|k| e.vector(k)).collect();
        Ok(Self::from_orthonormal_columns(&cols, n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        Self {
            matrix: CMatrix::identity(n, n) - &self.matrix,
            rank: n - self.rank,
        }
    }

    /// `U P U^dagger`.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self {
            matrix: hermitian_part(&(u * &self.matrix * u.adjoint())),
            rank: self.rank,
        }
    }

    /// `P (+) 1` when `append_one`, else `P (+) 0`.
    pub fn extend(&self, append_one: bool) -> Self {
        let n = self.dim();
        let mut m = CMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&self.matrix);
        if append_one {
            m[(n, n)] = C64::new(1.0, 0.0);
        }
        Self {
            matrix: m,
            rank: self.rank + append_one as usize,
        }
    }
}

/// A projection valued measure: projections of one dimension summing to `I`.
#[derive(Debug, Clone)]
pub struct Pvm {
    elements: Vec<Projection>,
}

impl Pvm {
    pub fn new(elements: Vec<Projection>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidArgument("empty PVM".into()));
        };
        let n = first.dim();
        let mut sum = CMatrix::zeros(n, n);
        for e in &elements {
            if e.dim() != n {
                return Err(Error::DimensionMismatch(n, e.dim()));
            }
            sum += e.matrix();
        }
        let err = max_abs_diff(&sum, &CMatrix::identity(n, n));
        if err > IDEMPOTENT_TOL {
            return Err(Error::InvalidArgument(format!(
                "PVM elements sum to identity only within {err:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    /// The two-outcome PVM `{P, I - P}`.
    pub fn binary(p: &Projection) -> Self {
        Self {
            elements: vec![p.clone(), p.complement()],
        }
    }

    pub fn elements(&self) -> &[Projection] {
        &self.elements
    }
}

/// Haar-random unitary of size `dim`, deterministic in `seed`.
pub fn random_unitary(dim: usize, seed: u64) -> Result<CMatrix> {
    random_unitary_with(&mut rng::seeded(seed), dim)
}

/// Haar-random unitary drawn from `rng`: a complex Ginibre matrix
/// orthonormalized column by column (QR with positive `R` diagonal).
pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    for j in 0..dim {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..dim).map(|i| g[(i, k)].conj() * g[(i, j)]).sum();
                for i in 0..dim {
                    let gik = g[(i, k)];
                    g[(i, j)] -= gik * proj;
                }
            }
        }
        let nrm = (0..dim).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..dim {
            g[(i, j)] /= nrm;
        }
    }
    Ok(g)
}

/// `U diag(1^rank, 0^(dim-rank)) U^dagger` for Haar-random `U`.
pub fn random_projection(dim: usize, rank: usize, seed: u64) -> Result<Projection> {
    random_projection_with(&mut rng::seeded(seed), dim, rank)
}

pub fn random_projection_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    rank: usize,
) -> Result<Projection> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    if rank == 0 {
        return Ok(Projection::zero(dim));
    }
    if rank == dim {
        return Ok(Projection::identity(dim));
    }
    let u = random_unitary_with(rng, dim)?;
    let cols: Vec<_> = (0..rank).map(|k| u.column(k).into_owned()).collect();
    Ok(Projection::from_orthonormal_columns(&cols, dim))
}

/// `tr_d(A B) = Tr(A B) / d` for Hermitian `A`, `B`, imaginary residue dropped.
pub fn normalized_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc / n as f64
}

/// `(tr_d(P1 P2), tr_d(P1 P3), tr_d(P2 P3))`.
pub fn trace_triple(p1: &Projection, p2: &Projection, p3: &Projection) -> Result<CorrPoint3> {
    let d = p1.dim();
    for p in [p2, p3] {
        if p.dim() != d {
            return Err(Error::DimensionMismatch(d, p.dim()));
        }
    }
    Ok(CorrPoint3([
        normalized_trace_product(p1.matrix(), p2.matrix()),
        normalized_trace_product(p1.matrix(), p3.matrix()),
        normalized_trace_product(p2.matrix(), p3.matrix()),
    ]))
}

pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
    }
    if m.nrows() == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(())
}

/// Block-diagonal assembly.
pub fn direct_sum(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        m.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    m
}

#[cfg(test)]
pub(crate) fn real_matrix(rows: &[[f64; 3]; 3]) -> CMatrix {
    CMatrix::from_fn(3, 3, |i, j| C64::new(rows[i][j], 0.0))
}
