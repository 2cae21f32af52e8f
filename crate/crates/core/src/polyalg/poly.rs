use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense univariate polynomial over the integers.
///
/// Coefficients are stored in ascending degree order and never carry
/// trailing zeros; the zero polynomial is the single coefficient `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly {
            coeffs: vec![BigInt::zero()],
        }
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// Index of the highest nonzero coefficient (0 for constants and zero).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("nonempty")
    }

    /// Horner evaluation; exact for any integer argument.
    pub fn eval(&self, n: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * n + c;
        }
        acc
    }

    pub fn eval_i64(&self, n: i64) -> BigInt {
        self.eval(&BigInt::from(n))
    }

    /// `self(n) mod m` as a least non-negative residue, `m >= 1`.
    pub fn eval_mod(&self, n: u64, m: u64) -> u64 {
        debug_assert!(m >= 1);
        let m128 = m as u128;
        let n = (n % m) as u128;
        let mut acc: u128 = 0;
        for c in self.coeffs.iter().rev() {
            acc = (acc * n + reduce_mod(c, m) as u128) % m128;
        }
        acc as u64
    }

    /// Coefficients reduced into `[0, m)`.
    pub fn coeffs_mod(&self, m: u64) -> Vec<u64> {
        self.coeffs.iter().map(|c| reduce_mod(c, m)).collect()
    }

    /// `self(n) mod m` for an arbitrary-precision modulus.
    pub fn eval_mod_big(&self, n: &BigUint, m: &BigUint) -> BigUint {
        let m_int = BigInt::from(m.clone());
        let n_int = BigInt::from(n % m);
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc * &n_int + c).mod_floor(&m_int);
        }
        acc.to_biguint().expect("non-negative residue")
    }

    pub fn derivative(&self) -> Self {
        if self.is_constant() {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(BigInt::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// gcd of the coefficients, non-negative.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Pseudo-remainder `lc(d)^(deg self - deg d + 1) * self mod d`.
    pub fn pseudo_rem(&self, divisor: &Self) -> Self {
        assert!(!divisor.is_zero(), "pseudo-remainder by zero polynomial");
        let dd = divisor.degree();
        let lc = divisor.leading().clone();
        let mut rem = self.coeffs.clone();
        if self.is_zero() || self.degree() < dd {
            return self.clone();
        }
        let steps = self.degree() - dd + 1;
        let mut applied = 0;
        while rem.len() > dd && !(rem.len() == 1 && rem[0].is_zero()) {
            let top = rem.len() - 1;
            let t = rem[top].clone();
            let shift = top - dd;
            for c in rem.iter_mut() {
                *c *= &lc;
            }
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &t * dc;
            }
            applied += 1;
            rem.pop();
            while rem.len() > 1 && rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
            if rem.len() <= dd {
                break;
            }
        }
        let mut out = Self::new(rem);
        for _ in applied..steps {
            out = out.scale(&lc);
        }
        out
    }

    /// Exact quotient in `Z[x]`, or `None` if `divisor` does not divide `self`
    /// with an integral quotient.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.degree() < divisor.degree() {
            return None;
        }
        let dd = divisor.degree();
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); self.degree() - dd + 1];
        for top in (dd..rem.len()).rev() {
            if rem[top].is_zero() {
                continue;
            }
            let (q, r) = rem[top].div_rem(lc);
            if !r.is_zero() {
                return None;
            }
            let shift = top - dd;
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &q * dc;
            }
            quot[shift] = q;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(Self::new(quot))
        } else {
            None
        }
    }

    /// Divisibility over the rationals.
    pub fn divides(&self, other: &Self) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.pseudo_rem(self).is_zero()
    }

    /// Primitive gcd with positive leading coefficient, via the primitive
    /// polynomial remainder sequence.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part()
    }

    /// `self(x + s)`, via repeated synthetic division.
    pub fn taylor_shift(&self, s: &BigInt) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = &c[j + 1] * s;
                c[j] += t;
            }
        }
        Self::new(c)
    }

    /// Comma-separated ascending coefficients, the CLI text format.
    pub fn to_coeff_string(&self) -> String {
        self.coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Largest absolute value of any coefficient.
    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }

    /// Coefficients as `f64`, saturating for huge values.
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

fn reduce_mod(c: &BigInt, m: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue fits in u64")
}

impl From<Vec<BigInt>> for IntPoly {
    fn from(c: Vec<BigInt>) -> Self {
        Self::new(c)
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            out[i] += c;
        }
        IntPoly::new(out)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        self + &(-rhs)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.sign() == Sign::Minus;
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => {}
                _ => write!(f, "{mag}*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}
