//! Bound reports and exact comparison against sums of radicals.
//!
//! The bounds checked here mix integers with square roots and `e`-th roots
//! (`|Delta_Q|^(1/2)`, `z^(1/e_P)`). A comparison `exact <= sum` is decided
//! with rational interval enclosures refined until the interval clears the
//! left-hand side; when every radical is a perfect power the comparison is
//! plain rational arithmetic.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::Value;

/// `base^(num/den)` with `base >= 1` whenever `num < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    pub base: BigUint,
    pub num: i32,
    pub den: u32,
}

impl Radical {
    pub fn new(base: impl Into<BigUint>, num: i32, den: u32) -> Self {
        let base = base.into();
        assert!(den >= 1, "radical index must be positive");
        assert!(num >= 0 || !base.is_zero(), "negative power of zero");
        Radical { base, num, den }
    }

    /// Rational enclosure `[lo, hi]` with width at most `2^-bits` relative
    /// to the root (before any inversion).
    fn enclose(&self, bits: u32) -> (BigRational, BigRational) {
        let pow = num_traits::pow(self.base.clone(), self.num.unsigned_abs() as usize);
        let scaled = pow << (bits as usize * self.den as usize);
        let r = scaled.nth_root(self.den);
        let denom = BigInt::one() << bits as usize;
        let exact = num_traits::pow(r.clone(), self.den as usize) == scaled;
        let lo = BigRational::new(BigInt::from(r.clone()), denom.clone());
        let hi = if exact {
            lo.clone()
        } else {
            BigRational::new(BigInt::from(r + 1u32), denom)
        };
        if self.num >= 0 {
            (lo, hi)
        } else {
            (hi.recip(), lo.recip())
        }
    }

    fn exact_value(&self) -> Option<BigRational> {
        let (lo, hi) = self.enclose(0);
        (lo == hi).then_some(lo)
    }
}

/// `coeff * prod(factors)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootTerm {
    pub coeff: BigRational,
    pub factors: Vec<Radical>,
}

impl RootTerm {
    pub fn new(coeff: BigRational, factors: Vec<Radical>) -> Self {
        RootTerm { coeff, factors }
    }

    pub fn rational(coeff: BigRational) -> Self {
        RootTerm {
            coeff,
            factors: Vec::new(),
        }
    }

    fn enclose(&self, bits: u32) -> (BigRational, BigRational) {
        let mut lo = BigRational::one();
        let mut hi = BigRational::one();
        for f in &self.factors {
            let (a, b) = f.enclose(bits);
            lo *= a;
            hi *= b;
        }
        let (lo, hi) = (&lo * &self.coeff, &hi * &self.coeff);
        if self.coeff.is_negative() {
            (hi, lo)
        } else {
            (lo, hi)
        }
    }
}

const START_BITS: u32 = 32;
const MAX_BITS: u32 = 8192;

/// Exact decision of `lhs <= sum(terms)`.
pub fn le_sum(lhs: &BigRational, terms: &[RootTerm]) -> bool {
    if let Some(total) = exact_sum(terms) {
        return *lhs <= total;
    }
    let mut bits = START_BITS;
    loop {
        let (lo, hi) = enclose_sum(terms, bits);
        if *lhs <= lo {
            return true;
        }
        if *lhs > hi {
            return false;
        }
        if bits >= MAX_BITS {
            // lhs agrees with the bound to MAX_BITS bits: treat as equal.
            return true;
        }
        bits *= 2;
    }
}

fn exact_sum(terms: &[RootTerm]) -> Option<BigRational> {
    let mut total = BigRational::zero();
    for t in terms {
        let mut v = t.coeff.clone();
        for f in &t.factors {
            v *= f.exact_value()?;
        }
        total += v;
    }
    Some(total)
}

fn enclose_sum(terms: &[RootTerm], bits: u32) -> (BigRational, BigRational) {
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    for t in terms {
        let (a, b) = t.enclose(bits);
        lo += a;
        hi += b;
    }
    (lo, hi)
}

/// Floating approximation of `sum(terms)`, for display.
pub fn approx_sum(terms: &[RootTerm]) -> f64 {
    let (lo, hi) = enclose_sum(terms, 64);
    let mid = (lo + hi) / BigInt::from(2);
    mid.to_f64().unwrap_or(f64::INFINITY)
}

/// JSON number carrying an arbitrary-precision integer exactly.
pub fn json_int(n: &impl ToString) -> Value {
    serde_json::from_str(&n.to_string()).expect("integer literal is valid JSON")
}

/// One comparison of an exactly computed quantity against a bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub quantity_name: String,
    #[serde(serialize_with = "ser_bigint")]
    pub exact: BigInt,
    /// Bound value, `f64` precision; `holds` is decided exactly.
    pub bound: f64,
    pub holds: bool,
    pub inputs: BTreeMap<String, Value>,
    /// True when the bound uses a caller-chosen stand-in for an implicit constant.
    pub advisory: bool,
}

fn ser_bigint<S: serde::Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    json_int(n).serialize(s)
}

impl BoundReport {
    /// Builds the report, deciding `exact <= sum(terms)` exactly.
    pub fn evaluate(
        quantity_name: &str,
        exact: BigInt,
        terms: &[RootTerm],
        inputs: BTreeMap<String, Value>,
        advisory: bool,
    ) -> Self {
        let holds = le_sum(&BigRational::from_integer(exact.clone()), terms);
        BoundReport {
            quantity_name: quantity_name.to_string(),
            exact,
            bound: approx_sum(terms),
            holds,
            inputs,
            advisory,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn sqrt(n: u64) -> Radical {
        Radical::new(n, 1, 2)
    }

    #[test]
    fn perfect_powers_compare_exactly() {
        // 3 <= 1 * sqrt(9)
        assert!(le_sum(&r(3), &[RootTerm::new(r(1), vec![sqrt(9)])]));
        assert!(!le_sum(&r(4), &[RootTerm::new(r(1), vec![sqrt(9)])]));
        // 14 = 4 * (1 + 10 / 4^(1/1))
        let terms = [
            RootTerm::rational(r(4)),
            RootTerm::new(r(40), vec![Radical::new(4u32, -1, 1)]),
        ];
        assert!(le_sum(&r(14), &terms));
        assert!(!le_sum(&r(15), &terms));
    }

    #[test]
    fn irrational_bounds() {
        // sqrt(2) ~ 1.41421356; 10 * sqrt(2) ~ 14.142
        let t = [RootTerm::new(r(10), vec![sqrt(2)])];
        assert!(le_sum(&r(14), &t));
        assert!(!le_sum(&r(15), &t));
        // 1 + 10 / 2^(1/3) ~ 8.937
        let t = [
            RootTerm::rational(r(1)),
            RootTerm::new(r(10), vec![Radical::new(2u32, -1, 3)]),
        ];
        assert!(le_sum(&r(8), &t));
        assert!(!le_sum(&r(9), &t));
        assert!((approx_sum(&t) - (1.0 + 10.0 / 2f64.cbrt())).abs() < 1e-12);
    }

    #[test]
    fn negative_coefficients_flip_enclosures() {
        // 5 - sqrt(2) ~ 3.586
        let t = [
            RootTerm::rational(r(5)),
            RootTerm::new(r(-1), vec![sqrt(2)]),
        ];
        assert!(le_sum(&r(3), &t));
        assert!(!le_sum(&r(4), &t));
    }

    #[test]
    fn large_integers_serialize_exactly() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        assert_eq!(json_int(&big).to_string(), "123456789012345678901234567890");
    }
}
