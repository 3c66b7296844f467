use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{FrequencyBox, MultiIndex};
use crate::lattice::{CubatureRule, Rank1Generator};

/// The dual lattice `{k : k . g = 0 mod m for every generator g}` restricted to a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualLatticeSet {
    pub modulus: u64,
    pub generators: Vec<Vec<u64>>,
    #[serde(rename = "box")]
    pub bx: FrequencyBox,
    /// Sorted lexicographically; always contains `0`.
    pub points: Vec<MultiIndex>,
}

impl DualLatticeSet {
    pub fn contains(&self, k: &MultiIndex) -> bool {
        self.points.binary_search(k).is_ok()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points other than the origin.
    pub fn nonzero(&self) -> impl Iterator<Item = &MultiIndex> {
        self.points.iter().filter(|k| !k.is_zero())
    }
}

/// Dual lattice of a rank-1 rule inside `bx`.
pub fn dual_lattice(gen: &Rank1Generator, bx: &FrequencyBox) -> Result<DualLatticeSet> {
    dual_points(gen.m, std::slice::from_ref(&gen.z), bx)
}

/// Dual lattice of any lattice-type rule (rank-1, Fibonacci, tensor grid).
pub fn rule_dual_lattice(rule: &CubatureRule, bx: &FrequencyBox) -> Result<DualLatticeSet> {
    let (m, gens) = rule
        .lattice_structure()
        .ok_or_else(|| Error::NotLattice(rule.id()))?;
    dual_points(m, gens, bx)
}

fn dual_points(modulus: u64, generators: &[Vec<u64>], bx: &FrequencyBox) -> Result<DualLatticeSet> {
    let d = bx.dim();
    if let Some(g) = generators.iter().find(|g| g.len() != d) {
        return Err(Error::DimensionMismatch { expected: g.len(), found: d });
    }
    let mut points = Vec::new();
    match *bx {
        FrequencyBox::Tensor { limit, .. } => {
            for_each_dual_point(modulus, generators, d, limit, |k| points.push(MultiIndex::new(k.to_vec())));
        }
        FrequencyBox::HyperbolicCross { .. } => {
            points = bx
                .points()
                .into_iter()
                .filter(|k| in_dual(modulus, generators, k.components()))
                .collect();
        }
    }
    points.sort();
    Ok(DualLatticeSet {
        modulus,
        generators: generators.to_vec(),
        bx: bx.clone(),
        points,
    })
}

/// `k . g = 0 (mod m)` for all generators, in exact integer arithmetic.
pub fn in_dual(modulus: u64, generators: &[Vec<u64>], k: &[i64]) -> bool {
    let m = modulus as i128;
    generators.iter().all(|g| {
        let s: i128 = k.iter().zip(g).map(|(&a, &b)| a as i128 * b as i128).sum();
        s.rem_euclid(m) == 0
    })
}

/// Calls `visit` on every dual point with `|k_j| <= limit`.
///
/// One coordinate with an invertible generator entry is solved for, so the
/// cost is about `(2K+1)^d / m` instead of `(2K+1)^d`.
pub(crate) fn for_each_dual_point(
    modulus: u64,
    generators: &[Vec<u64>],
    d: usize,
    limit: u64,
    mut visit: impl FnMut(&[i64]),
) {
    let l = limit as i64;
    let m = modulus as i128;
    let pivot = generators
        .first()
        .and_then(|g| (0..d).find_map(|j| mod_inverse(g[j] as i128, m).map(|inv| (j, inv))));
    let Some((pivot, inv)) = pivot else {
        let mut k = vec![-l; d];
        loop {
            if in_dual(modulus, generators, &k) {
                visit(&k);
            }
            if !advance(&mut k, l, usize::MAX) {
                return;
            }
        }
    };
    let g0 = &generators[0];
    let rest = &generators[1..];
    let mut k = vec![-l; d];
    k[pivot] = 0;
    loop {
        let s: i128 = (0..d)
            .filter(|&i| i != pivot)
            .map(|i| k[i] as i128 * g0[i] as i128)
            .sum();
        let residue = (-s * inv).rem_euclid(m);
        // smallest value >= -l congruent to residue
        let mut kp = (-l as i128) + (residue - (-l as i128)).rem_euclid(m);
        while kp <= l as i128 {
            k[pivot] = kp as i64;
            if in_dual(modulus, rest, &k) {
                visit(&k);
            }
            kp += m;
        }
        k[pivot] = 0;
        if !advance(&mut k, l, pivot) {
            return;
        }
    }
}

/// Odometer step over `[-l, l]^d`, skipping coordinate `skip`.
fn advance(k: &mut [i64], l: i64, skip: usize) -> bool {
    for j in (0..k.len()).rev() {
        if j == skip {
            continue;
        }
        if k[j] < l {
            k[j] += 1;
            return true;
        }
        k[j] = -l;
    }
    false
}

pub(crate) fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TrigPolynomial;

    fn brute(modulus: u64, gens: &[Vec<u64>], d: usize, limit: u64) -> Vec<MultiIndex> {
        FrequencyBox::tensor(d, limit)
            .points()
            .into_iter()
            .filter(|k| {
                gens.iter().all(|g| {
                    let mut s = 0i64;
                    for (a, b) in k.components().iter().zip(g) {
                        s += a * *b as i64;
                    }
                    s % modulus as i64 == 0
                })
            })
            .collect()
    }

    #[test]
    fn small_rank1_dual() {
        let gen = Rank1Generator::new(5, vec![1, 3]).unwrap();
        let dual = dual_lattice(&gen, &FrequencyBox::tensor(2, 3)).unwrap();
        for k in [[2, 1], [-2, -1], [1, 3], [0, 0]] {
            assert!(dual.contains(&MultiIndex::from(k)), "{k:?}");
        }
        assert!(!dual.contains(&MultiIndex::from([1, 0])));
        assert_eq!(dual.points, brute(5, &[vec![1, 3]], 2, 3));
    }

    #[test]
    fn matches_brute_force() {
        for (m, z) in [(7u64, vec![2u64, 3]), (13, vec![1, 5, 8]), (6, vec![2, 3]), (1, vec![0, 0])] {
            let gen = Rank1Generator::new(m, z.clone()).unwrap();
            let d = z.len();
            let dual = dual_lattice(&gen, &FrequencyBox::tensor(d, 6)).unwrap();
            assert_eq!(dual.points, brute(m, &[z], d, 6));
        }
        let grid = CubatureRule::tensor_grid(3, 2).unwrap();
        let dual = rule_dual_lattice(&grid, &FrequencyBox::tensor(2, 7)).unwrap();
        assert_eq!(dual.points, brute(3, &[vec![1, 0], vec![0, 1]], 2, 7));
    }

    #[test]
    fn membership_agrees_with_rule() {
        let rule = CubatureRule::fibonacci(6).unwrap();
        let bx = FrequencyBox::tensor(2, 15);
        let dual = rule_dual_lattice(&rule, &bx).unwrap();
        for k in bx.points() {
            let v = rule.apply(&TrigPolynomial::monomial(k.clone(), 1.0)).unwrap();
            let expected = if dual.contains(&k) { 1.0 } else { 0.0 };
            assert!((v.re - expected).abs() < 1e-10 && v.im.abs() < 1e-10, "{k:?}");
        }
    }

    #[test]
    fn hyperbolic_box() {
        let gen = Rank1Generator::new(5, vec![1, 3]).unwrap();
        let bx = FrequencyBox::hyperbolic(2, 2);
        let dual = dual_lattice(&gen, &bx).unwrap();
        assert!(dual.points.iter().all(|k| bx.contains(k)));
        assert!(dual.contains(&MultiIndex::from([2, 1])));
        assert!(!dual.contains(&MultiIndex::from([1, 3])));
    }

    #[test]
    fn inverses() {
        assert_eq!(mod_inverse(3, 5), Some(2));
        assert_eq!(mod_inverse(2, 6), None);
        assert_eq!(mod_inverse(0, 1), Some(0));
        assert_eq!(mod_inverse(0, 5), None);
    }
}
