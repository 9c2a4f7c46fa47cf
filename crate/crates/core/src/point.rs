//! Small coordinate newtypes shared by every layer.

use std::fmt;

/// Joint-zero probabilities `(w12, w13, w23)` of a three-experiment correlation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorrPoint3(pub [f64; 3]);

/// Marginal probabilities `(r1, r2, r3)` of outcome 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MarginalVec(pub [f64; 3]);

impl CorrPoint3 {
    pub fn new(w12: f64, w13: f64, w23: f64) -> Self {
        Self([w12, w13, w23])
    }

    pub fn w12(&self) -> f64 {
        self.0[0]
    }

    pub fn w13(&self) -> f64 {
        self.0[1]
    }

    pub fn w23(&self) -> f64 {
        self.0[2]
    }

    /// Component for the unordered experiment pair `(x, y)`, zero-based.
    pub fn pair(&self, x: usize, y: usize) -> f64 {
        self.0[pair_index(x, y)]
    }

    pub fn set_pair(&mut self, x: usize, y: usize, value: f64) {
        self.0[pair_index(x, y)] = value;
    }

    pub fn dist(&self, other: &CorrPoint3) -> f64 {
        norm(sub(self.0, other.0))
    }
}

impl MarginalVec {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Self {
        Self([r1, r2, r3])
    }

    /// `0 <= r1 <= r2 <= r3 <= 1/2`.
    pub fn is_standard(&self) -> bool {
        let [a, b, c] = self.0;
        0.0 <= a && a <= b && b <= c && c <= 0.5
    }

    pub fn in_unit_cube(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

impl fmt::Display for CorrPoint3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// Index of the pair `(x, y)` in `(12, 13, 23)` order.
pub fn pair_index(x: usize, y: usize) -> usize {
    match (x.min(y), x.max(y)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => panic!("invalid experiment pair ({x}, {y})"),
    }
}

/// Experiment indices of pair slot `k`.
pub fn pair_of(k: usize) -> (usize, usize) {
    [(0, 1), (0, 2), (1, 2)][k]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(s: f64, a: [f64; 3]) -> [f64; 3] {
    [s * a[0], s * a[1], s * a[2]]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
