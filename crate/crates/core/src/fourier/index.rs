use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A frequency vector `k` in `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(components: Vec<i64>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// `e_j` scaled by `value`.
    pub fn axis(d: usize, j: usize, value: i64) -> Self {
        let mut k = vec![0; d];
        k[j] = value;
        MultiIndex(k)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Self {
        MultiIndex(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// True for the canonical representative of each pair `{k, -k}`:
    /// the first nonzero component is positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }

    /// `prod_j max(|k_j|, 1)`.
    pub fn star_product(&self) -> u128 {
        self.0
            .iter()
            .map(|&c| c.unsigned_abs().max(1) as u128)
            .product()
    }

    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[i64; N]> for MultiIndex {
    fn from(v: [i64; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

/// Finite truncation domain for coefficient sums.
///
/// Both shapes are symmetric under `k -> -k` and contain `0` (a hyperbolic
/// cross needs `limit >= 1` for that).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyBox {
    /// `|k_j| <= limit` for every coordinate.
    Tensor { d: usize, limit: u64 },
    /// `prod_j max(|k_j|, 1) <= limit`.
    HyperbolicCross { d: usize, limit: u64 },
}

impl FrequencyBox {
    pub fn tensor(d: usize, limit: u64) -> Self {
        FrequencyBox::Tensor { d, limit }
    }

    pub fn hyperbolic(d: usize, limit: u64) -> Self {
        FrequencyBox::HyperbolicCross { d, limit }
    }

    pub fn dim(&self) -> usize {
        match *self {
            FrequencyBox::Tensor { d, .. } | FrequencyBox::HyperbolicCross { d, .. } => d,
        }
    }

    /// Largest `|k_j|` any member can have.
    pub fn coordinate_extent(&self) -> u64 {
        match *self {
            FrequencyBox::Tensor { limit, .. } | FrequencyBox::HyperbolicCross { limit, .. } => {
                limit
            }
        }
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        if k.dim() != self.dim() {
            return false;
        }
        match *self {
            FrequencyBox::Tensor { limit, .. } => k.max_abs() <= limit,
            FrequencyBox::HyperbolicCross { limit, .. } => k.star_product() <= limit as u128,
        }
    }

    /// All members in lexicographic order.
    pub fn points(&self) -> Vec<MultiIndex> {
        let d = self.dim();
        let mut out = Vec::new();
        if d == 0 {
            return out;
        }
        match *self {
            FrequencyBox::Tensor { limit, .. } => {
                let l = limit as i64;
                let mut cur = vec![-l; d];
                loop {
                    out.push(MultiIndex(cur.clone()));
                    let mut j = d;
                    loop {
                        if j == 0 {
                            return out;
                        }
                        j -= 1;
                        if cur[j] < l {
                            cur[j] += 1;
                            break;
                        }
                        cur[j] = -l;
                    }
                }
            }
            FrequencyBox::HyperbolicCross { limit, .. } => {
                if limit == 0 {
                    return out;
                }
                let mut cur = Vec::with_capacity(d);
                hyperbolic_rec(d, limit, &mut cur, &mut out);
                out
            }
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            FrequencyBox::Tensor { d, limit } => (2 * limit as usize + 1).pow(d as u32),
            FrequencyBox::HyperbolicCross { .. } => self.points().len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn hyperbolic_rec(d: usize, budget: u64, cur: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
    if cur.len() == d {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    let b = budget as i64;
    for c in -b..=b {
        let star = c.unsigned_abs().max(1);
        if star > budget {
            continue;
        }
        cur.push(c);
        hyperbolic_rec(d, budget / star, cur, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_box_enumeration() {
        let b = FrequencyBox::tensor(2, 1);
        let pts = b.points();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts.len(), b.len());
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.contains(&MultiIndex::zero(2)));
    }

    #[test]
    fn hyperbolic_cross_membership() {
        let b = FrequencyBox::hyperbolic(2, 4);
        let pts = b.points();
        for p in &pts {
            assert!(p.star_product() <= 4);
            assert!(pts.contains(&p.neg()));
        }
        assert!(pts.contains(&MultiIndex::from([2, 2])));
        assert!(pts.contains(&MultiIndex::from([-4, 1])));
        assert!(!pts.contains(&MultiIndex::from([3, 2])));
        // brute force count over the enclosing tensor box
        let brute = FrequencyBox::tensor(2, 4)
            .points()
            .into_iter()
            .filter(|k| k.star_product() <= 4)
            .count();
        assert_eq!(pts.len(), brute);
        assert!(FrequencyBox::hyperbolic(3, 0).is_empty());
    }

    #[test]
    fn positive_representatives_split_pairs() {
        for k in FrequencyBox::tensor(3, 2).points() {
            if k.is_zero() {
                assert!(!k.is_positive());
            } else {
                assert_ne!(k.is_positive(), k.neg().is_positive());
            }
        }
    }
}
