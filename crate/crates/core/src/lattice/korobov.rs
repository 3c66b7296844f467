use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::ClassSpec;
use crate::lattice::quality::{worst_case_error, Precision};
use crate::lattice::rule::mulmod;
use crate::lattice::{CubatureRule, Rank1Generator};
use crate::Bracket;

/// Relative gap below which two candidate qualities count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KorobovChoice {
    pub generator: Rank1Generator,
    pub a: u64,
    pub quality: Bracket,
}

/// `z = (1, a, a^2, ..., a^{d-1}) mod m`.
pub fn korobov_generator(m: u64, a: u64, d: usize) -> Result<Rank1Generator> {
    let mut z = Vec::with_capacity(d);
    let mut p = 1 % m;
    for _ in 0..d {
        z.push(p);
        p = mulmod(p, a, m);
    }
    Rank1Generator::new(m, z)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

/// Exhaustive search over `a in 1..m` for the Korobov generator minimizing the
/// upper end of [`worst_case_error`]; ties go to the smallest `a`.
pub fn korobov_search(m: u64, spec: &ClassSpec, precision: Precision) -> Result<KorobovChoice> {
    if !is_prime(m) {
        return Err(Error::NotPrime(m));
    }
    if spec.d < 2 {
        return Err(Error::invalid("korobov search needs d >= 2"));
    }
    let candidates: Vec<Result<KorobovChoice>> = (1..m)
        .into_par_iter()
        .map(|a| {
            let generator = korobov_generator(m, a, spec.d)?;
            let quality = worst_case_error(&CubatureRule::rank1(&generator), spec, precision)?;
            Ok(KorobovChoice { generator, a, quality })
        })
        .collect();
    let mut best: Option<KorobovChoice> = None;
    for c in candidates {
        let c = c?;
        let better = match &best {
            None => true,
            Some(b) => c.quality.hi < b.quality.hi * (1.0 - TIE_TOLERANCE),
        };
        if better {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::invalid("empty search range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(1_000_003));
        assert!(!is_prime(1_000_001));
    }

    #[test]
    fn generators() {
        assert_eq!(korobov_generator(101, 10, 3).unwrap().z, vec![1, 10, 100]);
        assert_eq!(korobov_generator(7, 3, 4).unwrap().z, vec![1, 3, 2, 6]);
    }

    #[test]
    fn exhaustive_m5() {
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        let best = korobov_search(5, &spec, Precision::ClosedForm).unwrap();
        for a in 1..5 {
            let q = worst_case_error(
                &CubatureRule::rank1(&korobov_generator(5, a, 2).unwrap()),
                &spec,
                Precision::ClosedForm,
            )
            .unwrap();
            assert!(best.quality.hi <= q.hi * (1.0 + TIE_TOLERANCE));
            if a < best.a {
                assert!(q.hi > best.quality.hi);
            }
        }
        let diagonal = worst_case_error(
            &CubatureRule::rank1(&Rank1Generator::new(5, vec![1, 1]).unwrap()),
            &spec,
            Precision::ClosedForm,
        )
        .unwrap();
        assert!(best.quality.hi <= diagonal.hi);
        // a = 2 and a = 3 are mirror images with equal quality; smallest wins
        assert_eq!(best.a, 2);
    }

    #[test]
    fn beats_random_median_d3() {
        let spec = ClassSpec::sobolev(2.0, 3).unwrap();
        let best = korobov_search(101, &spec, Precision::ClosedForm).unwrap();
        let mut rng = seed::rng(2024);
        let mut qs: Vec<f64> = (0..50)
            .map(|_| {
                let z = (0..3).map(|_| rng.random_range(1..101u64)).collect();
                let rule = CubatureRule::rank1(&Rank1Generator::new(101, z).unwrap());
                worst_case_error(&rule, &spec, Precision::ClosedForm).unwrap().hi
            })
            .collect();
        qs.sort_by(f64::total_cmp);
        assert!(best.quality.hi < qs[25]);
    }

    #[test]
    fn rejects_composite() {
        let spec = ClassSpec::sobolev(1.0, 2).unwrap();
        assert!(matches!(korobov_search(6, &spec, Precision::ClosedForm), Err(Error::NotPrime(6))));
        let one_d = ClassSpec::sobolev(1.0, 1).unwrap();
        assert!(korobov_search(5, &one_d, Precision::ClosedForm).is_err());
    }
}
