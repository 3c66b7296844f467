use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use super::MultiIndex;
use crate::error::{Error, Result};

/// A trigonometric polynomial `f(x) = sum_k c_k e^{i(k,x)}` on `[0, 2pi)^d`.
///
/// Coefficients live in a sparse ordered map, so iteration order (and with it
/// every floating-point reduction) is deterministic. The measure is the
/// normalized Lebesgue measure, hence `integral(f) = c_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    d: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl TrigPolynomial {
    pub fn zero(d: usize) -> Self {
        TrigPolynomial {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: impl Into<Complex64>) -> Self {
        let mut p = Self::zero(d);
        p.insert(MultiIndex::zero(d), c.into());
        p
    }

    pub fn monomial(k: MultiIndex, c: impl Into<Complex64>) -> Self {
        let mut p = Self::zero(k.dim());
        p.insert(k, c.into());
        p
    }

    /// Builds from `(k, c_k)` pairs, summing repeated indices.
    pub fn from_coeffs<I>(d: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut p = Self::zero(d);
        for (k, c) in coeffs {
            k.check_dim(d)?;
            *p.coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        p.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(p)
    }

    fn insert(&mut self, k: MultiIndex, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            self.coeffs.insert(k, c);
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, k: &MultiIndex) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// `integral f dmu = c_0`.
    pub fn mean(&self) -> Complex64 {
        self.coeff(&MultiIndex::zero(self.d))
    }

    /// Largest `|k_j|` in the support.
    pub fn degree(&self) -> u64 {
        self.coeffs.keys().map(MultiIndex::max_abs).max().unwrap_or(0)
    }

    /// Conjugate-symmetry defect `max_k |c_{-k} - conj(c_k)|`; zero iff f is real.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in &self.coeffs {
            let mirror = self.coeff(&k.neg());
            worst = worst.max((mirror - c.conj()).norm());
        }
        worst
    }

    /// Real-valued test: `c_{-k} = conj(c_k)` within the global absolute tolerance.
    pub fn is_real(&self) -> bool {
        self.conjugate_symmetry_defect() <= crate::tol::abs()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.components().iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum())
    }

    /// `sum_k |c_k|^2`, the squared `L_2` norm by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// `sum_k |c_k|`, an upper bound for the sup norm.
    pub fn sup_norm_bound(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// The complex conjugate function `x -> conj(f(x))`.
    pub fn conj(&self) -> Self {
        TrigPolynomial {
            d: self.d,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.neg(), c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let mut out = Self::zero(self.d);
        for (k, c) in &self.coeffs {
            out.insert(k.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            *coeffs.entry(k.clone()).or_default() += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(TrigPolynomial { d: self.d, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// `f + c` for a constant `c`.
    pub fn shift(&self, c: impl Into<Complex64>) -> Self {
        self.add(&Self::constant(self.d, c)).expect("same dimension")
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Ok(())
    }

    /// The pointwise product `fg`: full discrete convolution of the
    /// coefficient maps, supported on the Minkowski sum of the supports.
    pub fn pointwise_product(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut acc: HashMap<MultiIndex, Complex64> =
            HashMap::with_capacity(self.coeffs.len() * other.coeffs.len() / 2 + 1);
        for (k, a) in &self.coeffs {
            for (l, b) in &other.coeffs {
                *acc.entry(k.add(l)).or_default() += a * b;
            }
        }
        let coeffs = acc
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        Ok(TrigPolynomial { d: self.d, coeffs })
    }

    /// `f^n` by repeated squaring.
    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::constant(self.d, 1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.pointwise_product(&base).expect("same dimension");
            }
            e >>= 1;
            if e > 0 {
                base = base.pointwise_product(&base).expect("same dimension");
            }
        }
        result
    }

    /// Zeroth coefficient of `fg` without forming the product.
    pub fn product_mean(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, a)| a * other.coeff(&k.neg()))
            .sum()
    }

    /// `||f||_q^q = integral |f|^q dmu` for even `q`, computed exactly as the
    /// zeroth coefficient of `(f conj(f))^{q/2}`.
    pub fn lq_norm_q(&self, q: u32) -> Result<f64> {
        check_even(q)?;
        if q == 2 {
            return Ok(self.l2_norm_sq());
        }
        let modulus_sq = self.pointwise_product(&self.conj())?;
        let rest = modulus_sq.pow(q / 2 - 1);
        Ok(modulus_sq.product_mean(&rest).re)
    }

    /// The polynomial `|f|^q` for even `q`.
    pub fn abs_pow(&self, q: u32) -> Result<Self> {
        check_even(q)?;
        Ok(self.pointwise_product(&self.conj())?.pow(q / 2))
    }

    /// Coefficients with magnitude at most `eps` dropped.
    pub fn pruned(&self, eps: f64) -> Self {
        TrigPolynomial {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.norm() > eps)
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Replaces `c_{-k}` by `conj(c_k)` averages, projecting onto the real subspace.
    pub fn real_part(&self) -> Self {
        let mut out = BTreeMap::new();
        for (k, c) in &self.coeffs {
            let mirror = self.coeff(&k.neg());
            let v = (c + mirror.conj()) * 0.5;
            if v != Complex64::new(0.0, 0.0) {
                out.insert(k.clone(), v);
                out.insert(k.neg(), v.conj());
            }
        }
        TrigPolynomial {
            d: self.d,
            coeffs: out,
        }
    }
}

pub(crate) fn check_even(q: u32) -> Result<()> {
    if q == 0 || q % 2 == 1 {
        return Err(Error::UnsupportedExponent(q));
    }
    Ok(())
}

// JSON: {"d": 2, "coeffs": [[k1, k2, re, im], ...]}

struct CoeffRow<'a>(&'a MultiIndex, &'a Complex64);

impl Serialize for CoeffRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.dim() + 2))?;
        for c in self.0.components() {
            seq.serialize_element(c)?;
        }
        seq.serialize_element(&self.1.re)?;
        seq.serialize_element(&self.1.im)?;
        seq.end()
    }
}

struct CoeffRows<'a>(&'a BTreeMap<MultiIndex, Complex64>);

impl Serialize for CoeffRows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|(k, c)| CoeffRow(k, c)))
    }
}

impl Serialize for TrigPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TrigPolynomial", 2)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("coeffs", &CoeffRows(&self.coeffs))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for TrigPolynomial {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            d: usize,
            coeffs: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(de)?;
        let mut pairs = Vec::with_capacity(raw.coeffs.len());
        for row in raw.coeffs {
            if row.len() != raw.d + 2 {
                return Err(de::Error::custom(format!(
                    "coefficient row has {} entries, expected d + 2 = {}",
                    row.len(),
                    raw.d + 2
                )));
            }
            let mut k = Vec::with_capacity(raw.d);
            for &v in &row[..raw.d] {
                if v.fract() != 0.0 || v.abs() > 2f64.powi(53) {
                    return Err(de::Error::custom(format!("non-integer frequency {v}")));
                }
                k.push(v as i64);
            }
            pairs.push((
                MultiIndex::new(k),
                Complex64::new(row[raw.d], row[raw.d + 1]),
            ));
        }
        TrigPolynomial::from_coeffs(raw.d, pairs).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos1() -> TrigPolynomial {
        TrigPolynomial::from_coeffs(
            1,
            [
                (MultiIndex::from([1]), Complex64::new(0.5, 0.0)),
                (MultiIndex::from([-1]), Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_constant_and_cosine() {
        let one = TrigPolynomial::constant(2, 1.0);
        assert_eq!(one.evaluate(&[0.3, 1.7]).unwrap(), Complex64::new(1.0, 0.0));
        let c = TrigPolynomial::from_coeffs(
            2,
            [
                (MultiIndex::from([1, 0]), Complex64::new(0.5, 0.0)),
                (MultiIndex::from([-1, 0]), Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        assert!((c.evaluate(&[0.0, 0.0]).unwrap() - 1.0).norm() < 1e-15);
        assert!(c.evaluate(&[0.0]).is_err());
    }

    #[test]
    fn l2_examples() {
        assert_eq!(TrigPolynomial::constant(1, 1.0).l2_norm_sq(), 1.0);
        let f = TrigPolynomial::from_coeffs(
            2,
            [
                (MultiIndex::zero(2), Complex64::new(3.0, 0.0)),
                (MultiIndex::from([1, 0]), Complex64::new(0.0, 4.0)),
            ],
        )
        .unwrap();
        assert_eq!(f.l2_norm_sq(), 25.0);
    }

    #[test]
    fn product_identity_and_double_angle() {
        let f = cos1();
        let one = TrigPolynomial::constant(1, 1.0);
        assert_eq!(f.pointwise_product(&one).unwrap(), f);
        let sq = f.pointwise_product(&f).unwrap();
        assert_eq!(sq.support_len(), 3);
        assert_eq!(sq.coeff(&MultiIndex::from([0])), Complex64::new(0.5, 0.0));
        assert_eq!(sq.coeff(&MultiIndex::from([2])), Complex64::new(0.25, 0.0));
        assert_eq!(sq.coeff(&MultiIndex::from([-2])), Complex64::new(0.25, 0.0));
    }

    #[test]
    fn lq_norms_of_cosine() {
        let f = cos1();
        assert!((TrigPolynomial::constant(1, 1.0).lq_norm_q(4).unwrap() - 1.0).abs() < 1e-15);
        assert!((f.lq_norm_q(2).unwrap() - 0.5).abs() < 1e-15);
        // cos^4 = 3/8 + cos(2x)/2 + cos(4x)/8
        assert!((f.lq_norm_q(4).unwrap() - 0.375).abs() < 1e-15);
        // oracle: midpoint quadrature of cos^6 on a fine grid (exact for trig degree < N)
        let n = 64;
        let quad: f64 = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos().powi(6)).sum::<f64>() / n as f64;
        assert!((f.lq_norm_q(6).unwrap() - quad).abs() < 1e-14);
        assert!(matches!(f.lq_norm_q(3), Err(Error::UnsupportedExponent(3))));
        assert!(f.lq_norm_q(0).is_err());
    }

    #[test]
    fn conjugation_and_reality() {
        let f = cos1();
        assert!(f.is_real());
        let g = TrigPolynomial::monomial(MultiIndex::from([1]), Complex64::new(0.0, 1.0));
        assert!(!g.is_real());
        assert!(g.pointwise_product(&g.conj()).unwrap().is_real());
        assert!(g.real_part().is_real());
    }

    #[test]
    fn json_layout() {
        let f = TrigPolynomial::from_coeffs(
            2,
            [(MultiIndex::from([1, -2]), Complex64::new(0.5, -0.25))],
        )
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"d":2,"coeffs":[[1,-2,0.5,-0.25]]}"#);
        let back: TrigPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<TrigPolynomial>(r#"{"d":2,"coeffs":[[1.5,0,1,0]]}"#).is_err());
        assert!(serde_json::from_str::<TrigPolynomial>(r#"{"d":2,"coeffs":[[1,1,0]]}"#).is_err());
    }
}
