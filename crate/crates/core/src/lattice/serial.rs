use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CubatureRule, Nodes, Rank1Generator, RuleTag, Weights};

/// On-disk form of a [`CubatureRule`].
///
/// Generated rules are stored by their parameters and rebuilt on load;
/// explicit rules carry `nodes` (rational `[numerator, denominator]` pairs)
/// or `points` (angles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleJson {
    pub tag: String,
    pub d: usize,
    pub m: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<Vec<[u64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl CubatureRule {
    /// Serializable description; `with_nodes` also lists the nodes of generated rules.
    pub fn to_json(&self, with_nodes: bool) -> RuleJson {
        let mut out = RuleJson {
            tag: String::new(),
            d: self.dim(),
            m: self.len() as u64,
            n: None,
            generator: None,
            seed: None,
            nodes: None,
            points: None,
            weights: None,
        };
        let explicit = match self.tag() {
            RuleTag::Fibonacci { n } => {
                out.tag = "fibonacci".into();
                out.n = Some(*n as u64);
                false
            }
            RuleTag::Rank1 { z, .. } => {
                out.tag = "rank1".into();
                out.generator = Some(z.clone());
                false
            }
            RuleTag::TensorGrid { n } => {
                out.tag = "tensor_grid".into();
                out.n = Some(*n);
                false
            }
            RuleTag::MonteCarlo { seed, .. } => {
                out.tag = "monte_carlo".into();
                out.seed = Some(*seed);
                false
            }
            RuleTag::Explicit => {
                out.tag = "explicit".into();
                true
            }
        };
        if explicit || with_nodes {
            match self.nodes() {
                Nodes::Rational { modulus, numerators } => {
                    out.nodes = Some(
                        numerators
                            .iter()
                            .map(|p| p.iter().map(|&v| [v, *modulus]).collect())
                            .collect(),
                    );
                }
                Nodes::Points(p) => out.points = Some(p.clone()),
            }
        }
        if let Weights::Explicit(w) = self.weights() {
            out.weights = Some(w.clone());
        }
        out
    }

    pub fn from_json(j: &RuleJson) -> Result<Self> {
        let need = |o: Option<u64>, what: &str| o.ok_or_else(|| Error::Config(format!("{} rule needs `{what}`", j.tag)));
        let rule = match j.tag.as_str() {
            "fibonacci" => {
                let n = need(j.n, "n")?;
                CubatureRule::fibonacci(u32::try_from(n).map_err(|_| Error::invalid("fibonacci index too large"))?)?
            }
            "rank1" => {
                let z = j.generator.clone().ok_or_else(|| Error::Config("rank1 rule needs `generator`".into()))?;
                CubatureRule::rank1(&Rank1Generator::new(j.m, z)?)
            }
            "tensor_grid" => CubatureRule::tensor_grid(need(j.n, "n")?, j.d)?,
            "monte_carlo" => CubatureRule::monte_carlo(j.m, j.d, need(j.seed, "seed")?)?,
            "explicit" => match (&j.nodes, &j.points) {
                (Some(nodes), _) => {
                    let modulus = nodes
                        .iter()
                        .flatten()
                        .map(|p| p[1])
                        .try_fold(1u64, |acc, den| {
                            if den == 0 {
                                return Err(Error::invalid("zero denominator in node"));
                            }
                            lcm(acc, den)
                        })?;
                    let numerators = nodes
                        .iter()
                        .map(|p| p.iter().map(|&[num, den]| num * (modulus / den)).collect())
                        .collect();
                    CubatureRule::explicit_rational(modulus, numerators, j.weights.clone())?
                }
                (None, Some(points)) => CubatureRule::explicit(points.clone(), j.weights.clone())?,
                (None, None) => return Err(Error::Config("explicit rule needs `nodes` or `points`".into())),
            },
            other => return Err(Error::Config(format!("unknown rule tag `{other}`"))),
        };
        if rule.dim() != j.d {
            return Err(Error::DimensionMismatch {
                expected: j.d,
                found: rule.dim(),
            });
        }
        if rule.len() as u64 != j.m {
            return Err(Error::Config(format!("rule has {} nodes but `m` = {}", rule.len(), j.m)));
        }
        Ok(rule)
    }
}

fn lcm(a: u64, b: u64) -> Result<u64> {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    (a / x).checked_mul(b).ok_or(Error::Overflow("node denominator lcm"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let rules = [
            CubatureRule::fibonacci(7).unwrap(),
            CubatureRule::rank1(&Rank1Generator::new(7, vec![1, 3, 2]).unwrap()),
            CubatureRule::tensor_grid(3, 2).unwrap(),
            CubatureRule::monte_carlo(9, 2, 5).unwrap(),
            CubatureRule::explicit(vec![vec![0.5, 1.0], vec![2.0, 3.0]], Some(vec![0.3, 0.7])).unwrap(),
            CubatureRule::explicit_rational(4, vec![vec![1, 3], vec![2, 0]], None).unwrap(),
        ];
        for rule in rules {
            for with_nodes in [false, true] {
                let text = serde_json::to_string(&rule.to_json(with_nodes)).unwrap();
                let back = CubatureRule::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
                assert_eq!(back.points(), rule.points(), "{text}");
                assert_eq!(back.tag(), rule.tag());
            }
        }
    }

    #[test]
    fn layout() {
        let j = CubatureRule::fibonacci(4).unwrap().to_json(false);
        assert_eq!(serde_json::to_string(&j).unwrap(), r#"{"tag":"fibonacci","d":2,"m":5,"n":4}"#);
        let r: RuleJson = serde_json::from_str(r#"{"tag":"explicit","d":1,"m":2,"nodes":[[[1,2]],[[1,3]]]}"#).unwrap();
        let rule = CubatureRule::from_json(&r).unwrap();
        assert!((rule.node(0)[0] - std::f64::consts::PI).abs() < 1e-15);
        let bad: RuleJson = serde_json::from_str(r#"{"tag":"rank1","d":2,"m":5}"#).unwrap();
        assert!(CubatureRule::from_json(&bad).is_err());
    }
}
