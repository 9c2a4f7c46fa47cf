use crate::error::Result;
use crate::point::{pair_index, pair_of, MarginalVec};

/// An outcome-flip and relabeling symmetry of the correlation set.
///
/// Acting on a correlation, experiments `i` with `flips[i]` first have their
/// outcomes reversed (`P -> I - P`), then target experiment `k` is taken from
/// source experiment `perm[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SliceMap {
    pub flips: [bool; 3],
    pub perm: [usize; 3],
}

impl Default for SliceMap {
    fn default() -> Self {
        Self::identity()
    }
}

/// Affine form `coeffs . w + constant` in the source coordinates.
#[derive(Clone, Copy)]
struct Form {
    coeffs: [f64; 3],
    constant: f64,
}

impl SliceMap {
    pub fn identity() -> Self {
        Self {
            flips: [false; 3],
            perm: [0, 1, 2],
        }
    }

    /// Swaps experiments `x` and `y`.
    pub fn swap(x: usize, y: usize) -> Self {
        let mut perm = [0, 1, 2];
        perm.swap(x, y);
        Self {
            flips: [false; 3],
            perm,
        }
    }

    /// Reverses the outcomes of experiment `x`.
    pub fn flip(x: usize) -> Self {
        let mut flips = [false; 3];
        flips[x] = true;
        Self {
            flips,
            perm: [0, 1, 2],
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &SliceMap) -> SliceMap {
        let inv = inverse_perm(self.perm);
        SliceMap {
            flips: [0, 1, 2].map(|i| self.flips[i] ^ next.flips[inv[i]]),
            perm: [0, 1, 2].map(|m| self.perm[next.perm[m]]),
        }
    }

    pub fn inverse(&self) -> SliceMap {
        SliceMap {
            flips: [0, 1, 2].map(|k| self.flips[self.perm[k]]),
            perm: inverse_perm(self.perm),
        }
    }

    pub fn apply_r(&self, r: &[f64; 3]) -> [f64; 3] {
        let flipped = [0, 1, 2].map(|i| if self.flips[i] { 1.0 - r[i] } else { r[i] });
        self.perm.map(|s| flipped[s])
    }

    /// `w -> A w + b` for source marginals `r`. `A` is a signed permutation.
    pub fn affine_w(&self, r: &[f64; 3]) -> ([[f64; 3]; 3], [f64; 3]) {
        let forms = self.forms(r);
        (forms.map(|f| f.coeffs), forms.map(|f| f.constant))
    }

    pub fn apply_w(&self, r: &[f64; 3], w: [f64; 3]) -> [f64; 3] {
        self.forms(r).map(|f| {
            let mut v = f.constant;
            for (c, x) in f.coeffs.iter().zip(w) {
                if *c != 0.0 {
                    v += c * x;
                }
            }
            v
        })
    }

    /// Applies the map to per-experiment objects, using `complement` for flips.
    pub fn apply_ops<T: Clone>(&self, ops: &[T; 3], complement: impl Fn(&T) -> T) -> [T; 3] {
        let flipped: [T; 3] = [0, 1, 2].map(|i| {
            if self.flips[i] {
                complement(&ops[i])
            } else {
                ops[i].clone()
            }
        });
        self.perm.map(|s| flipped[s].clone())
    }

    fn forms(&self, r: &[f64; 3]) -> [Form; 3] {
        let mut forms = [0, 1, 2].map(|k| {
            let mut coeffs = [0.0; 3];
            coeffs[k] = 1.0;
            Form {
                coeffs,
                constant: 0.0,
            }
        });
        let mut r = *r;
        for x in 0..3 {
            if !self.flips[x] {
                continue;
            }
            for y in (0..3).filter(|&y| y != x) {
                let f = &mut forms[pair_index(x, y)];
                f.coeffs = f.coeffs.map(|c| -c);
                f.constant = r[y] - f.constant;
            }
            r[x] = 1.0 - r[x];
        }
        [0, 1, 2].map(|k| {
            let (a, b) = pair_of(k);
            forms[pair_index(self.perm[a], self.perm[b])]
        })
    }
}

fn inverse_perm(p: [usize; 3]) -> [usize; 3] {
    let mut inv = [0; 3];
    for (k, &s) in p.iter().enumerate() {
        inv[s] = k;
    }
    inv
}

/// Standard form of `r` and the map from the standard slice onto the `r`-slice.
///
/// Experiments with `r_x > 1/2` are flipped, then all are sorted ascending
/// with a stable sort.
pub fn standardize(r: &MarginalVec) -> Result<(MarginalVec, SliceMap)> {
    let flips = r.0.map(|v| v > 0.5);
    let flipped = [0, 1, 2].map(|i| if flips[i] { 1.0 - r.0[i] } else { r.0[i] });
    let mut perm = [0, 1, 2];
    perm.sort_by(|&a, &b| flipped[a].total_cmp(&flipped[b]));
    let to_std = SliceMap { flips, perm };
    let r_std = MarginalVec(to_std.apply_r(&r.0));
    Ok((r_std, to_std.inverse()))
}
