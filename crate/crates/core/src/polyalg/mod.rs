//! Exact integer-polynomial arithmetic and the derived invariants of `P`:
//! squarefree kernel, maximal root multiplicity, discriminant, positivity
//! and growth thresholds.

mod parse;
mod poly;

pub use parse::parse_poly;
pub use poly::IntPoly;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::json_int;

/// Upper limit for linear scans over candidate thresholds.
const SCAN_LIMIT: u64 = 100_000_000;

/// `Q = pp(p / gcd(p, p'))` with positive leading coefficient.
pub fn squarefree_kernel(p: &IntPoly) -> Result<IntPoly> {
    require_nonconstant(p)?;
    let g = p.gcd(&p.derivative());
    let pp = p.primitive_part();
    let q = pp
        .div_exact(&g)
        .ok_or_else(|| Error::Inconsistency(format!("gcd {g} does not divide {pp}")))?
        .primitive_part();
    if !q.divides(p) {
        return Err(Error::Inconsistency(format!(
            "kernel {q} does not divide {p}"
        )));
    }
    Ok(q)
}

/// Smallest `e` with `p | Q^e`; the largest multiplicity of a complex root.
pub fn max_multiplicity(p: &IntPoly) -> Result<u32> {
    let q = squarefree_kernel(p)?;
    let mut power = q.clone();
    for e in 1..=p.degree() as u32 {
        if p.divides(&power) {
            return Ok(e);
        }
        power = &power * &q;
    }
    Err(Error::Inconsistency(format!(
        "{p} does not divide any power of its kernel {q}"
    )))
}

/// Determinant by Bareiss fraction-free elimination.
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Resultant via the Sylvester matrix.
pub fn resultant(a: &IntPoly, b: &IntPoly) -> BigInt {
    let (n, m) = (a.degree(), b.degree());
    let size = n + m;
    if size == 0 {
        return BigInt::one();
    }
    let mut rows = vec![vec![BigInt::zero(); size]; size];
    let desc = |p: &IntPoly| p.coeffs().iter().rev().cloned().collect::<Vec<_>>();
    let (da, db) = (desc(a), desc(b));
    for i in 0..m {
        for (j, c) in da.iter().enumerate() {
            rows[i][i + j] = c.clone();
        }
    }
    for i in 0..n {
        for (j, c) in db.iter().enumerate() {
            rows[m + i][i + j] = c.clone();
        }
    }
    bareiss_det(rows)
}

/// Discriminant `(-1)^(n(n-1)/2) Res(q, q') / lc(q)`.
pub fn discriminant(q: &IntPoly) -> Result<BigInt> {
    require_nonconstant(q)?;
    let n = q.degree();
    let res = resultant(q, &q.derivative());
    let (disc, r) = res.div_rem(q.leading());
    if !r.is_zero() {
        return Err(Error::Inconsistency(format!(
            "resultant {res} not divisible by leading coefficient of {q}"
        )));
    }
    let disc = if (n * (n - 1) / 2) % 2 == 1 {
        -disc
    } else {
        disc
    };
    if disc.is_zero() {
        return Err(Error::Inconsistency(format!("{q} has a repeated root")));
    }
    Ok(disc)
}

/// Whether `p` has at least two distinct complex roots, with the reason when not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Eligibility {
    pub eligible: bool,
    pub reason: Option<String>,
}

pub fn eligibility(p: &IntPoly) -> Eligibility {
    let reason = if p.is_zero() {
        Some("zero polynomial".to_string())
    } else if p.is_constant() {
        Some("constant polynomial".to_string())
    } else {
        let q = squarefree_kernel(p).expect("nonconstant");
        if q.degree() >= 2 {
            None
        } else if p.degree() == 1 {
            Some(format!("linear polynomial {p} (shape c(ax-r)^1)"))
        } else {
            Some(format!(
                "{p} has a single distinct root (shape c(ax-r)^{})",
                p.degree()
            ))
        }
    };
    Eligibility {
        eligible: reason.is_none(),
        reason,
    }
}

/// Integer `B >= 1` exceeding every positive real root of `p` (Cauchy's rule
/// applied to the negative coefficients only).
fn positive_root_bound(p: &IntPoly) -> BigInt {
    let lc = p.leading().abs();
    let d = p.degree();
    let sign = p.leading().signum();
    let neg: Vec<(usize, BigInt)> = p.coeffs()[..d]
        .iter()
        .enumerate()
        .filter(|(_, c)| (*c * &sign).is_negative())
        .map(|(i, c)| (i, c.abs()))
        .collect();
    let k = BigInt::from(neg.len());
    let mut bound = BigInt::one();
    for (i, c) in neg {
        let e = (d - i) as u32;
        let t = Integer::div_ceil(&(&k * c), &lc);
        let mut r = t.nth_root(e);
        if num_traits::pow(r.clone(), e as usize) < t {
            r += 1;
        }
        bound = bound.max(r + 1);
    }
    bound
}

fn scan_bound(b: &BigInt, what: &str) -> Result<u64> {
    b.to_u64()
        .filter(|&v| v <= SCAN_LIMIT)
        .ok_or_else(|| Error::Resource(format!("{what} scan horizon {b} exceeds {SCAN_LIMIT}")))
}

/// Smallest `n0 >= 0` with `p(n) > 0` for every integer `n > n0`.
pub fn positivity_threshold(p: &IntPoly) -> Result<u64> {
    require_nonconstant(p)?;
    if !p.leading().is_positive() {
        return Err(Error::Precondition(format!(
            "leading coefficient of {p} must be positive"
        )));
    }
    let limit = scan_bound(&positive_root_bound(p), "positivity")?;
    let n0 = (1..=limit)
        .rev()
        .find(|&n| !p.eval(&BigInt::from(n)).is_positive())
        .unwrap_or(0);
    Ok(n0)
}

/// Sign-flips and shifts so the result is positive on every positive integer.
/// Works for any nonconstant `p`; returns the shift `n0`.
pub fn shift_to_positive(p: &IntPoly) -> Result<(IntPoly, u64)> {
    require_nonconstant(p)?;
    let p = if p.leading().is_negative() {
        -p
    } else {
        p.clone()
    };
    let n0 = positivity_threshold(&p)?;
    Ok((p.taylor_shift(&BigInt::from(n0)), n0))
}

/// `(p(x + n0), n0)` after making the leading coefficient positive.
pub fn normalize(p: &IntPoly) -> Result<(IntPoly, u64)> {
    let e = eligibility(p);
    if !e.eligible {
        return Err(Error::Precondition(format!(
            "normalize needs an eligible polynomial: {}",
            e.reason.unwrap_or_default()
        )));
    }
    shift_to_positive(p)
}

/// Smallest `M >= 1` such that every `n >= M` has
/// `p(n) > max(p(0), ..., p(n-1))` and `p(n) >= n^d / 2`.
pub fn growth_threshold(p: &IntPoly) -> Result<u64> {
    let d = p.degree();
    if d < 2 {
        return Err(Error::Precondition(format!("{p} has degree {d} < 2")));
    }
    let lc = p.leading();
    if !lc.is_positive() {
        return Err(Error::Precondition(format!(
            "leading coefficient of {p} must be positive"
        )));
    }
    // Beyond h1, lc*n^d - sum|c| n^(d-1) >= n^d/2.
    let abs_sum: BigInt = p.coeffs().iter().map(|c| c.abs()).sum();
    let h1 = Integer::div_ceil(&(BigInt::from(2) * &abs_sum), &(BigInt::from(2) * lc - 1));
    // Beyond c1, p' > 0 so p is strictly increasing.
    let c1 = positive_root_bound(&p.derivative());
    let spec_h = std::cmp::max(h1, &c1 + 1) + 1;
    let c1 = scan_bound(&c1, "growth")?;
    // Past the increasing region p must also clear every earlier value.
    let early_max = (0..=c1)
        .map(|n| p.eval(&BigInt::from(n)))
        .max()
        .expect("nonempty range");
    let mut clear = c1 + 1;
    while p.eval(&BigInt::from(clear)) <= early_max {
        clear += 1;
        if clear > SCAN_LIMIT {
            return Err(Error::Resource("growth horizon scan exhausted".into()));
        }
    }
    let horizon = std::cmp::max(scan_bound(&spec_h, "growth")?, clear);

    let mut prefix_max = p.eval(&BigInt::zero());
    let mut last_fail = 0u64;
    for n in 1..=horizon {
        let nb = BigInt::from(n);
        let v = p.eval(&nb);
        let grows = v > prefix_max;
        let big = BigInt::from(2) * &v >= num_traits::pow(nb, d);
        if !(grows && big) {
            last_fail = n;
        }
        if v > prefix_max {
            prefix_max = v;
        }
    }
    Ok(last_fail + 1)
}

fn require_nonconstant(p: &IntPoly) -> Result<()> {
    if p.is_constant() {
        return Err(Error::Degenerate(format!("{p} is constant")));
    }
    Ok(())
}

/// Derived invariants of a polynomial with positive leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyProfile {
    pub p: IntPoly,
    pub d: usize,
    pub leading: BigInt,
    pub eligible: bool,
    pub ineligible_reason: Option<String>,
    /// Maximal multiplicity of a complex root.
    pub e_p: u32,
    /// Squarefree kernel, primitive with positive leading coefficient.
    pub q: IntPoly,
    pub disc_q: BigInt,
    pub n0: u64,
    /// `None` for linear polynomials, or when the threshold lies beyond the scan limit.
    pub m_p: Option<u64>,
}

impl PolyProfile {
    pub fn new(p: &IntPoly) -> Result<Self> {
        require_nonconstant(p)?;
        if !p.leading().is_positive() {
            return Err(Error::Precondition(format!(
                "leading coefficient of {p} must be positive"
            )));
        }
        let q = squarefree_kernel(p)?;
        let e_p = max_multiplicity(p)?;
        let disc_q = discriminant(&q)?;
        let elig = eligibility(p);
        let n0 = positivity_threshold(p)?;
        // Left unset for linear p, or when the scan would be too long.
        let m_p = match growth_threshold(p) {
            Ok(m) => Some(m),
            Err(Error::Precondition(_) | Error::Resource(_)) => None,
            Err(e) => return Err(e),
        };
        let profile = PolyProfile {
            p: p.clone(),
            d: p.degree(),
            leading: p.leading().clone(),
            eligible: elig.eligible,
            ineligible_reason: elig.reason,
            e_p,
            q,
            disc_q,
            n0,
            m_p,
        };
        profile.check()?;
        Ok(profile)
    }

    /// Flips sign and shifts by `n0` first, so the profile is positive on `[N]`.
    /// Accepts ineligible polynomials. Returns the applied shift.
    pub fn normalized(p: &IntPoly) -> Result<(Self, u64)> {
        let (shifted, n0) = shift_to_positive(p)?;
        Ok((Self::new(&shifted)?, n0))
    }

    pub fn parse_normalized(text: &str) -> Result<(Self, u64)> {
        Self::normalized(&parse_poly(text)?)
    }

    /// True when `p(n) > 0` for every `n >= 1`.
    pub fn is_normalized(&self) -> bool {
        self.n0 == 0
    }

    pub fn require_normalized(&self) -> Result<()> {
        if !self.is_normalized() {
            return Err(Error::Precondition(format!(
                "{} is not positive on all positive integers (n0 = {}); normalize first",
                self.p, self.n0
            )));
        }
        Ok(())
    }

    pub fn require_eligible(&self) -> Result<()> {
        if !self.eligible {
            return Err(Error::Precondition(format!(
                "ineligible polynomial: {}",
                self.ineligible_reason.clone().unwrap_or_default()
            )));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        self.p.to_coeff_string()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "poly": self.p.to_string(),
            "coeffs": self.id(),
            "d": self.d,
            "leading": json_int(&self.leading),
            "eligible": self.eligible,
            "ineligible_reason": self.ineligible_reason,
            "e_p": self.e_p,
            "q": self.q.to_string(),
            "disc_q": json_int(&self.disc_q),
            "n0": self.n0,
            "m_p": self.m_p,
        })
    }

    fn check(&self) -> Result<()> {
        let q_pow = self.q.pow(self.e_p);
        if !self.q.divides(&self.p) || !self.p.divides(&q_pow) {
            return Err(Error::Inconsistency(format!(
                "Q | P | Q^e fails for P = {}, Q = {}, e = {}",
                self.p, self.q, self.e_p
            )));
        }
        if self.eligible != (self.q.degree() >= 2) {
            return Err(Error::Inconsistency(
                "eligibility disagrees with kernel degree".into(),
            ));
        }
        if self.eligible && !(1..self.d as u32).contains(&self.e_p) {
            return Err(Error::Inconsistency(format!(
                "e_P = {} outside [1, d-1] for eligible {}",
                self.e_p, self.p
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    fn battery() -> Vec<IntPoly> {
        vec![
            p(&[0, 1, 1]),
            p(&[0, 0, 1, 1]),
            p(&[1, 0, 1]),
            p(&[0, 2, 1]),
            p(&[0, 1, 2]),
            p(&[9, -12, 4]),
            p(&[0, 1]),
            p(&[30, -10, 1]),
            p(&[0, -2, 1]),
            p(&[-1, 0, 0, 0, 1]),
            parse_poly("(x-1)^3*(x+2)^2*(3x+5)").unwrap(),
        ]
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(squarefree_kernel(&p(&[0, 0, 1, 1])).unwrap(), p(&[0, 1, 1]));
        assert_eq!(squarefree_kernel(&p(&[0, 1, 1])).unwrap(), p(&[0, 1, 1]));
        assert_eq!(squarefree_kernel(&p(&[9, -12, 4])).unwrap(), p(&[-3, 2]));
        assert!(matches!(
            squarefree_kernel(&p(&[5])),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            squarefree_kernel(&IntPoly::zero()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(max_multiplicity(&p(&[0, 0, 1, 1])).unwrap(), 2);
        assert_eq!(max_multiplicity(&p(&[0, 1, 1])).unwrap(), 1);
        assert_eq!(max_multiplicity(&p(&[-3, 2]).pow(4)).unwrap(), 4);
        assert!(max_multiplicity(&p(&[7])).is_err());
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&p(&[0, 1, 1])).unwrap(), BigInt::from(1));
        assert_eq!(discriminant(&p(&[-1, 0, 1])).unwrap(), BigInt::from(4));
        assert_eq!(discriminant(&p(&[1, 0, 1])).unwrap(), BigInt::from(-4));
        assert!(matches!(
            discriminant(&p(&[1, 2, 1])),
            Err(Error::Inconsistency(_))
        ));
    }

    #[test]
    fn discriminant_matches_quadratic_and_cubic_formulas() {
        for (a, b, c) in [(1i64, 5, 6), (3, -7, 2), (-2, 1, 9), (5, 0, -3)] {
            let got = discriminant(&p(&[c, b, a])).unwrap();
            assert_eq!(got, BigInt::from(b * b - 4 * a * c));
        }
        // cubic: b^2c^2 - 4ac^3 - 4b^3d - 27a^2d^2 + 18abcd
        for (a, b, c, d) in [(1i64, 0, -3, 1), (2, -1, 4, 7), (1, 1, 0, -2)] {
            let want = b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
                + 18 * a * b * c * d;
            assert_eq!(discriminant(&p(&[d, c, b, a])).unwrap(), BigInt::from(want));
        }
    }

    #[test]
    fn eligibility_examples() {
        assert!(eligibility(&p(&[0, 1, 1])).eligible);
        let e = eligibility(&p(&[-3, 2]).pow(5));
        assert!(!e.eligible);
        assert!(e.reason.unwrap().contains("c(ax-r)^5"));
        assert!(!eligibility(&p(&[0, 1])).eligible);
        assert!(!eligibility(&p(&[4])).eligible);
    }

    #[test]
    fn positivity_examples() {
        assert_eq!(positivity_threshold(&p(&[0, 1, 1])).unwrap(), 0);
        assert_eq!(positivity_threshold(&p(&[0, -2, 1])).unwrap(), 2);
        assert_eq!(positivity_threshold(&p(&[1, 0, 1])).unwrap(), 0);
        assert!(matches!(
            positivity_threshold(&p(&[0, 1, -1])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn positivity_matches_scan_oracle() {
        // oracle: largest n in 1..=cauchy with p(n) <= 0, by direct scan
        for poly in [
            p(&[0, -2, 1]),
            p(&[-30, 1, 1]),
            p(&[6, -5, 1]),
            p(&[-100, 0, 0, 1]),
        ] {
            let bound = 1 + poly
                .coeffs()
                .iter()
                .map(|c| c.abs().to_i64().unwrap())
                .max()
                .unwrap();
            let want = (1..=bound)
                .filter(|&n| poly.eval_i64(n) <= BigInt::zero())
                .max()
                .unwrap_or(0) as u64;
            assert_eq!(positivity_threshold(&poly).unwrap(), want, "{poly}");
        }
    }

    #[test]
    fn normalize_examples() {
        let (r, s) = normalize(&p(&[0, -2, 1])).unwrap();
        assert_eq!(s, 2);
        for n in 1..=10 {
            assert_eq!(r.eval_i64(n), p(&[0, -2, 1]).eval_i64(n + 2));
        }
        assert_eq!(r.eval_i64(1), BigInt::from(3));
        assert_eq!(r, p(&[0, 2, 1]));
        assert_eq!(normalize(&p(&[0, 1, 1])).unwrap(), (p(&[0, 1, 1]), 0));
        assert_eq!(normalize(&p(&[0, -1, -1])).unwrap(), (p(&[0, 1, 1]), 0));
        assert!(matches!(
            normalize(&p(&[0, 1])),
            Err(Error::Precondition(_))
        ));
    }

    fn growth_ok(poly: &IntPoly, n: u64) -> bool {
        let v = poly.eval_i64(n as i64);
        let prev = (0..n).map(|m| poly.eval_i64(m as i64)).max().unwrap();
        v > prev && BigInt::from(2) * &v >= num_traits::pow(BigInt::from(n), poly.degree())
    }

    #[test]
    fn growth_examples() {
        assert_eq!(growth_threshold(&p(&[0, 1, 1])).unwrap(), 1);
        assert_eq!(growth_threshold(&p(&[0, 0, 1, 1])).unwrap(), 1);
        let q = p(&[30, -10, 1]);
        let m = growth_threshold(&q).unwrap();
        // oracle: brute-force condition check at and beyond m, and failure just before
        for n in m..m + 1000 {
            assert!(growth_ok(&q, n), "fails at {n}");
        }
        assert!(m == 1 || !growth_ok(&q, m - 1));
        // 2(n^2 - 10n + 30) >= n^2 first holds at n = 17 (126 < 128 at n = 16).
        assert_eq!(m, 17);
        assert!(matches!(
            growth_threshold(&p(&[0, 1])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn growth_threshold_is_minimal_on_battery() {
        for poly in battery() {
            if poly.degree() < 2 || !poly.leading().is_positive() {
                continue;
            }
            let m = growth_threshold(&poly).unwrap();
            for n in m..m + 300 {
                assert!(growth_ok(&poly, n), "{poly} fails at {n}");
            }
            assert!(
                m == 1 || !growth_ok(&poly, m - 1),
                "{poly}: {m} not minimal"
            );
        }
    }

    #[test]
    fn kernel_divisibility_on_battery() {
        for poly in battery() {
            let q = squarefree_kernel(&poly).unwrap();
            let e = max_multiplicity(&poly).unwrap();
            assert!(q.divides(&poly));
            assert!(poly.divides(&q.pow(e)));
            assert!(!discriminant(&q).unwrap().is_zero());
        }
    }

    #[test]
    fn multiplicity_scales_with_powers() {
        for poly in battery() {
            let e = max_multiplicity(&poly).unwrap();
            for m in 1..=3u32 {
                assert_eq!(max_multiplicity(&poly.pow(m)).unwrap(), m * e, "{poly}^{m}");
            }
        }
    }

    #[test]
    fn eligibility_ignores_scaling() {
        for poly in battery() {
            for c in [1i64, 2, -3] {
                let scaled = poly.scale(&BigInt::from(c));
                assert_eq!(eligibility(&scaled).eligible, eligibility(&poly).eligible);
            }
        }
    }

    #[test]
    fn profile_of_unit_discriminant_case() {
        let prof = PolyProfile::new(&p(&[0, 1, 1])).unwrap();
        assert!(prof.eligible);
        assert_eq!(prof.e_p, 1);
        assert_eq!(prof.disc_q, BigInt::from(1));
        assert_eq!(prof.n0, 0);
        assert_eq!(prof.m_p, Some(1));
        let (prof, shift) = PolyProfile::normalized(&p(&[0, -2, 1])).unwrap();
        assert_eq!(shift, 2);
        assert!(prof.is_normalized());
    }

    proptest! {
        #[test]
        fn shifted_normalization_agrees_with_evaluation(
            c in proptest::collection::vec(-20i64..20, 2..5),
            lead in 1i64..4,
            neg in any::<bool>(),
        ) {
            let mut coeffs = c.clone();
            coeffs.push(if neg { -lead } else { lead });
            let poly = p(&coeffs);
            let (shifted, s) = shift_to_positive(&poly).unwrap();
            let base = if neg { -&poly } else { poly.clone() };
            for n in 1..=100i64 {
                prop_assert_eq!(shifted.eval_i64(n), base.eval_i64(n + s as i64));
                prop_assert!(shifted.eval_i64(n) > BigInt::zero());
            }
        }

        #[test]
        fn kernel_of_random_products(
            roots in proptest::collection::vec((-6i64..6, 1u32..4), 1..4),
            scale in 1i64..5,
        ) {
            let mut poly = IntPoly::constant(BigInt::from(scale));
            for &(r, m) in &roots {
                poly = &poly * &p(&[-r, 1]).pow(m);
            }
            let q = squarefree_kernel(&poly).unwrap();
            let e = max_multiplicity(&poly).unwrap();
            let mut distinct: Vec<(i64, u32)> = Vec::new();
            for &(r, m) in &roots {
                match distinct.iter_mut().find(|(x, _)| *x == r) {
                    Some(slot) => slot.1 += m,
                    None => distinct.push((r, m)),
                }
            }
            prop_assert_eq!(q.degree(), distinct.len());
            prop_assert_eq!(e, distinct.iter().map(|x| x.1).max().unwrap());
            prop_assert!(poly.divides(&q.pow(e)));
        }
    }
}
