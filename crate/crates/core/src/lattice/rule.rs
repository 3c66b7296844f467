use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::TrigPolynomial;
use crate::seed;

/// Generating vector `z` of the rank-1 lattice `{ frac(nu z / m) : nu = 0..m-1 }`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rank1Generator {
    pub m: u64,
    pub z: Vec<u64>,
}

impl Rank1Generator {
    /// Requires `m >= 1`, `d >= 1` and `1 <= z_j < m` (for `m = 1` the only
    /// admissible generator is `z = 0`).
    pub fn new(m: u64, z: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("lattice modulus must be at least 1"));
        }
        if z.is_empty() {
            return Err(Error::invalid("generator must have at least one component"));
        }
        for &zj in &z {
            let ok = if m == 1 { zj == 0 } else { (1..m).contains(&zj) };
            if !ok {
                return Err(Error::invalid(format!(
                    "generator component {zj} outside [1, {m}) for modulus {m}"
                )));
            }
        }
        Ok(Rank1Generator { m, z })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }
}

/// How the node set was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum RuleTag {
    Fibonacci { n: u32 },
    Rank1 { m: u64, z: Vec<u64> },
    TensorGrid { n: u64 },
    MonteCarlo { m: u64, seed: u64 },
    Explicit,
}

/// Node coordinates. Lattice-type rules keep exact numerators over a common
/// modulus; the angle `2 pi num / modulus` is only formed at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub enum Nodes {
    Rational { modulus: u64, numerators: Vec<Vec<u64>> },
    Points(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    /// `1/m` each.
    Equal,
    Explicit(Vec<f64>),
}

/// A cubature formula `Lambda(f) = sum_j lambda_j f(xi^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    d: usize,
    nodes: Nodes,
    weights: Weights,
    tag: RuleTag,
    /// Generators of the node group for lattice rules (dual: `k . g = 0 mod m` for all `g`).
    lattice: Option<Vec<Vec<u64>>>,
}

/// `b_0 = b_1 = 1`, `b_n = b_{n-1} + b_{n-2}`; overflow is reported, never wrapped.
pub fn fibonacci_number(n: u32) -> Result<u64> {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 1..n {
        let next = a.checked_add(b).ok_or(Error::Overflow("fibonacci_number"))?;
        a = b;
        b = next;
    }
    Ok(b)
}

impl CubatureRule {
    /// The Fibonacci rule `b_n^{-1} sum_{mu=1}^{b_n} f(2 pi mu / b_n, 2 pi {mu b_{n-1} / b_n})`, `n >= 2`.
    pub fn fibonacci(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("fibonacci rule needs n >= 2"));
        }
        let m = fibonacci_number(n)?;
        let prev = fibonacci_number(n - 1)?;
        let numerators = (1..=m)
            .map(|mu| vec![mu % m, mulmod(mu, prev, m)])
            .collect();
        Ok(CubatureRule {
            d: 2,
            nodes: Nodes::Rational { modulus: m, numerators },
            weights: Weights::Equal,
            tag: RuleTag::Fibonacci { n },
            lattice: Some(vec![vec![1, prev % m]]),
        })
    }

    /// Nodes `2 pi frac(nu z / m)`, `nu = 0..m-1`, equal weights.
    pub fn rank1(gen: &Rank1Generator) -> Self {
        let m = gen.m;
        let numerators = (0..m)
            .map(|nu| gen.z.iter().map(|&zj| mulmod(nu, zj, m)).collect())
            .collect();
        CubatureRule {
            d: gen.dim(),
            nodes: Nodes::Rational { modulus: m, numerators },
            weights: Weights::Equal,
            tag: RuleTag::Rank1 { m, z: gen.z.clone() },
            lattice: Some(vec![gen.z.clone()]),
        }
    }

    /// The full product grid with `n` points per axis (`n^d` nodes).
    pub fn tensor_grid(n: u64, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid("tensor grid needs n >= 1 and d >= 1"));
        }
        let count = (n as u128).pow(d as u32);
        if count > 50_000_000 {
            return Err(Error::invalid(format!("tensor grid with {count} nodes is too large")));
        }
        let mut numerators = Vec::with_capacity(count as usize);
        for idx in 0..count as u64 {
            let mut rem = idx;
            let mut p = vec![0u64; d];
            for slot in p.iter_mut().rev() {
                *slot = rem % n;
                rem /= n;
            }
            numerators.push(p);
        }
        let generators = (0..d)
            .map(|j| {
                let mut g = vec![0u64; d];
                g[j] = 1 % n;
                g
            })
            .collect();
        Ok(CubatureRule {
            d,
            nodes: Nodes::Rational { modulus: n, numerators },
            weights: Weights::Equal,
            tag: RuleTag::TensorGrid { n },
            lattice: Some(generators),
        })
    }

    /// `m` i.i.d. uniform nodes on `[0, 2 pi)^d`, equal weights.
    pub fn monte_carlo(m: u64, d: usize, seed: u64) -> Result<Self> {
        Self::monte_carlo_with(m, d, &mut seed::rng(seed), seed)
    }

    pub(crate) fn monte_carlo_with(m: u64, d: usize, rng: &mut seed::Rng, seed: u64) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(Error::invalid("monte carlo rule needs m >= 1 and d >= 1"));
        }
        let points = (0..m)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        let x = TAU * rng.random::<f64>();
                        if x >= TAU {
                            0.0
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(CubatureRule {
            d,
            nodes: Nodes::Points(points),
            weights: Weights::Equal,
            tag: RuleTag::MonteCarlo { m, seed },
            lattice: None,
        })
    }

    /// Arbitrary nodes (angles in `[0, 2 pi)`) with optional weights.
    pub fn explicit(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let d = points.first().map(Vec::len).ok_or_else(|| Error::invalid("rule needs at least one node"))?;
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("all nodes must share a positive dimension"));
        }
        let points = points
            .into_iter()
            .map(|p| p.into_iter().map(|x| x.rem_euclid(TAU)).collect())
            .collect();
        Self::assemble(d, Nodes::Points(points), weights)
    }

    /// Arbitrary rational nodes `2 pi num / modulus` with optional weights.
    pub fn explicit_rational(modulus: u64, numerators: Vec<Vec<u64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::invalid("modulus must be positive"));
        }
        let d = numerators
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("rule needs at least one node"))?;
        if d == 0 || numerators.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("all nodes must share a positive dimension"));
        }
        let numerators = numerators
            .into_iter()
            .map(|p| p.into_iter().map(|v| v % modulus).collect())
            .collect();
        Self::assemble(d, Nodes::Rational { modulus, numerators }, weights)
    }

    fn assemble(d: usize, nodes: Nodes, weights: Option<Vec<f64>>) -> Result<Self> {
        let m = match &nodes {
            Nodes::Rational { numerators, .. } => numerators.len(),
            Nodes::Points(p) => p.len(),
        };
        let weights = match weights {
            None => Weights::Equal,
            Some(w) if w.len() == m => Weights::Explicit(w),
            Some(w) => {
                return Err(Error::invalid(format!("{} weights for {m} nodes", w.len())));
            }
        };
        Ok(CubatureRule {
            d,
            nodes,
            weights,
            tag: RuleTag::Explicit,
            lattice: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        match &self.nodes {
            Nodes::Rational { numerators, .. } => numerators.len(),
            Nodes::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tag(&self) -> &RuleTag {
        &self.tag
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn weight(&self, j: usize) -> f64 {
        match &self.weights {
            Weights::Equal => 1.0 / self.len() as f64,
            Weights::Explicit(w) => w[j],
        }
    }

    /// `sum_j lambda_j`; exactly 1 for equal weights.
    pub fn weight_sum(&self) -> f64 {
        match &self.weights {
            Weights::Equal => 1.0,
            Weights::Explicit(w) => w.iter().sum(),
        }
    }

    pub fn has_equal_weights(&self) -> bool {
        matches!(self.weights, Weights::Equal)
    }

    /// Modulus and group generators when this is an equal-weight lattice rule.
    pub fn lattice_structure(&self) -> Option<(u64, &[Vec<u64>])> {
        match (&self.nodes, &self.lattice, &self.weights) {
            (Nodes::Rational { modulus, .. }, Some(g), Weights::Equal) => Some((*modulus, g.as_slice())),
            _ => None,
        }
    }

    /// Node `j` as angles in `[0, 2 pi)^d`.
    pub fn node(&self, j: usize) -> Vec<f64> {
        match &self.nodes {
            Nodes::Rational { modulus, numerators } => numerators[j]
                .iter()
                .map(|&p| TAU * p as f64 / *modulus as f64)
                .collect(),
            Nodes::Points(p) => p[j].clone(),
        }
    }

    /// All nodes as angles.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }

    /// Human-readable identifier, e.g. `fib10`, `rank1_m5_z1-3`, `mc_m100_s7`.
    pub fn id(&self) -> String {
        match &self.tag {
            RuleTag::Fibonacci { n } => format!("fib{n}"),
            RuleTag::Rank1 { m, z } => {
                let zs: Vec<String> = z.iter().map(u64::to_string).collect();
                format!("rank1_m{m}_z{}", zs.join("-"))
            }
            RuleTag::TensorGrid { n } => format!("grid{n}^{}", self.d),
            RuleTag::MonteCarlo { m, seed } => format!("mc_m{m}_s{seed}"),
            RuleTag::Explicit => format!("explicit_m{}", self.len()),
        }
    }

    /// `f(xi^j)` for every node.
    pub fn evaluations(&self, f: &TrigPolynomial) -> Result<Vec<Complex64>> {
        if f.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: f.dim(),
            });
        }
        match &self.nodes {
            Nodes::Rational { modulus, numerators } => {
                let m = *modulus;
                let twiddle: Vec<Complex64> = (0..m)
                    .map(|t| Complex64::from_polar(1.0, TAU * t as f64 / m as f64))
                    .collect();
                let terms: Vec<(Vec<i128>, Complex64)> = f
                    .coeffs()
                    .iter()
                    .map(|(k, c)| (k.components().iter().map(|&v| v as i128).collect(), *c))
                    .collect();
                Ok(numerators
                    .iter()
                    .map(|p| {
                        terms
                            .iter()
                            .map(|(k, c)| {
                                let phase: i128 = k.iter().zip(p).map(|(a, &b)| a * b as i128).sum();
                                c * twiddle[phase.rem_euclid(m as i128) as usize]
                            })
                            .sum()
                    })
                    .collect())
            }
            Nodes::Points(points) => points.iter().map(|x| f.evaluate(x)).collect(),
        }
    }

    /// `Lambda(f) = sum_j lambda_j f(xi^j)`.
    pub fn apply(&self, f: &TrigPolynomial) -> Result<Complex64> {
        let values = self.evaluations(f)?;
        Ok(self.weighted_sum(values.into_iter()))
    }

    pub(crate) fn weighted_sum<I: Iterator<Item = Complex64>>(&self, values: I) -> Complex64 {
        match &self.weights {
            Weights::Equal => values.sum::<Complex64>() / self.len() as f64,
            Weights::Explicit(w) => values.zip(w).map(|(v, &wj)| v * wj).sum(),
        }
    }

    /// Same rule with nodes reordered by `perm` (node `j` of the result is node `perm[j]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() || {
            let mut seen = vec![false; perm.len()];
            perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true))
        } {
            return Err(Error::invalid("not a permutation of the node indices"));
        }
        let nodes = match &self.nodes {
            Nodes::Rational { modulus, numerators } => Nodes::Rational {
                modulus: *modulus,
                numerators: perm.iter().map(|&p| numerators[p].clone()).collect(),
            },
            Nodes::Points(pts) => Nodes::Points(perm.iter().map(|&p| pts[p].clone()).collect()),
        };
        let weights = match &self.weights {
            Weights::Equal => Weights::Equal,
            Weights::Explicit(w) => Weights::Explicit(perm.iter().map(|&p| w[p]).collect()),
        };
        Ok(CubatureRule {
            d: self.d,
            nodes,
            weights,
            tag: self.tag.clone(),
            lattice: self.lattice.clone(),
        })
    }
}

pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}
