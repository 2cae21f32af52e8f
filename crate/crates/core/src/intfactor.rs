//! Integer factorization and the multiplicative functions built on it:
//! `omega`, `tau_k` and the smallest `l` with `z | l^e`.
//!
//! Factorization is trial division by the primes below `10^6`, followed by
//! Brent's variant of Pollard rho on the cofactor. Primality uses
//! Miller-Rabin with the first thirteen prime bases, which is deterministic
//! below `3.3 * 10^24`; larger candidates get extra bases and are reported as
//! probable primes.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::{binomial, Integer};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const TRIAL_DIVISION_LIMIT: u32 = 1_000_000;

/// Miller-Rabin with the first 13 primes is exact below this value.
const DETERMINISTIC_MR_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const EXTRA_MR_ROUNDS: u64 = 32;
const RHO_BIG_BUDGET: u64 = 2_000_000;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_DIVISION_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

/// Prime factorization with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Factorization {
    pub pairs: Vec<(BigUint, u32)>,
    /// False if some factor was only shown to be a probable prime.
    pub certified: bool,
}

impl Factorization {
    pub fn reconstruct(&self) -> BigUint {
        self.pairs.iter().fold(BigUint::one(), |acc, (p, e)| {
            acc * num_traits::pow(p.clone(), *e as usize)
        })
    }

    pub fn omega(&self) -> usize {
        self.pairs.len()
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|(_, e)| *e)
    }

    /// Primes as `u64`, if they all fit.
    pub fn small_pairs(&self) -> Option<Vec<(u64, u32)>> {
        self.pairs
            .iter()
            .map(|(p, e)| p.to_u64().map(|p| (p, *e)))
            .collect()
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<BigUint> {
        let mut divs = vec![BigUint::one()];
        for (p, e) in &self.pairs {
            let mut next = Vec::with_capacity(divs.len() * (*e as usize + 1));
            for d in &divs {
                let mut pk = d.clone();
                next.push(pk.clone());
                for _ in 0..*e {
                    pk *= p;
                    next.push(pk.clone());
                }
            }
            divs = next;
        }
        divs.sort();
        divs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Primality {
    Composite,
    Prime,
    /// Passed extra random-base rounds; error probability below 2^-64.
    ProbablePrime,
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &MR_BASES[..12] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn mr_round_big(n: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let one = BigUint::one();
    let nm1 = n - &one;
    let mut x = a.modpow(d, n);
    if x == one || x == nm1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == nm1 {
            return true;
        }
    }
    false
}

pub fn primality(n: &BigUint) -> Primality {
    if let Some(v) = n.to_u64() {
        return if is_prime_u64(v) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return Primality::Composite;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().expect("n > 1");
    let d = &nm1 >> s;
    for &a in &MR_BASES {
        if !mr_round_big(n, &d, s, &BigUint::from(a)) {
            return Primality::Composite;
        }
    }
    if n.to_u128().is_some_and(|v| v < DETERMINISTIC_MR_LIMIT) {
        return Primality::Prime;
    }
    // Fixed pseudo-random bases keep the outcome reproducible.
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    for _ in 0..EXTRA_MR_ROUNDS {
        state = splitmix(&mut state);
        let a = BigUint::from(state) % (n - 3u32) + 2u32;
        if !mr_round_big(n, &d, s, &a) {
            return Primality::Composite;
        }
    }
    Primality::ProbablePrime
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Brent's cycle finding; returns a nontrivial factor of odd composite `n`.
fn rho_u64(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, m) = (2u64, 1u64, 1u64, 128u64);
        let (mut g, mut x, mut ys) = (1u64, 0u64, 0u64);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn rho_big(n: &BigUint) -> Option<BigUint> {
    let one = BigUint::one();
    for c in 1u32..=8 {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let (mut x, mut y) = (BigUint::from(2u32), BigUint::from(2u32));
        let mut steps = 0u64;
        let mut q = BigUint::one();
        let mut saved = (x.clone(), y.clone());
        loop {
            for _ in 0..64 {
                x = f(&x);
                y = f(&f(&y));
                let diff = if x > y { &x - &y } else { &y - &x };
                q = q * diff % n;
            }
            steps += 64;
            let g = q.gcd(n);
            if g == *n {
                // Retrace one step at a time from the last checkpoint.
                let (mut x2, mut y2) = saved.clone();
                loop {
                    x2 = f(&x2);
                    y2 = f(&f(&y2));
                    let diff = if x2 > y2 { &x2 - &y2 } else { &y2 - &x2 };
                    let g = diff.gcd(n);
                    if g != one {
                        if g != *n {
                            return Some(g);
                        }
                        break;
                    }
                }
                break;
            }
            if g != one {
                return Some(g);
            }
            saved = (x.clone(), y.clone());
            if steps > RHO_BIG_BUDGET {
                return None;
            }
        }
    }
    None
}

/// `(r, k)` with `r^k = n` and `k >= 2` maximal-first, if `n` is a perfect power.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    (2..=bits).rev().find_map(|k| {
        let r = n.nth_root(k);
        (r > BigUint::one() && num_traits::pow(r.clone(), k as usize) == *n).then_some((r, k))
    })
}

fn split_cofactor(n: BigUint, out: &mut Vec<BigUint>, certified: &mut bool) -> Result<()> {
    if n.is_one() {
        return Ok(());
    }
    let limit = BigUint::from(TRIAL_DIVISION_LIMIT as u64 * TRIAL_DIVISION_LIMIT as u64);
    if n < limit {
        out.push(n);
        return Ok(());
    }
    match primality(&n) {
        Primality::Prime => {
            out.push(n);
            return Ok(());
        }
        Primality::ProbablePrime => {
            *certified = false;
            out.push(n);
            return Ok(());
        }
        Primality::Composite => {}
    }
    if let Some((root, k)) = perfect_power(&n) {
        for _ in 0..k {
            split_cofactor(root.clone(), out, certified)?;
        }
        return Ok(());
    }
    let factor = match n.to_u64() {
        Some(v) => BigUint::from(rho_u64(v)),
        None => rho_big(&n)
            .ok_or_else(|| Error::Resource(format!("could not split composite cofactor {n}")))?,
    };
    let other = &n / &factor;
    split_cofactor(factor, out, certified)?;
    split_cofactor(other, out, certified)
}

pub fn factorize(n: &BigUint) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut rest = n.clone();
    let mut primes: Vec<BigUint> = Vec::new();
    let mut pairs: Vec<(BigUint, u32)> = Vec::new();
    for &p in small_primes() {
        let pb = p as u64;
        match rest.to_u64() {
            Some(r) if pb * pb > r => break,
            _ => {}
        }
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            pairs.push((BigUint::from(p), e));
        }
    }
    let mut certified = true;
    split_cofactor(rest, &mut primes, &mut certified)?;
    primes.sort();
    for p in primes {
        match pairs.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => pairs.push((p, 1)),
        }
    }
    pairs.sort();
    Ok(Factorization { pairs, certified })
}

pub fn factorize_u64(n: u64) -> Result<Factorization> {
    factorize(&BigUint::from(n))
}

/// Number of distinct prime factors.
pub fn omega(n: &BigUint) -> Result<usize> {
    Ok(factorize(n)?.omega())
}

/// Number of ordered factorizations of `n` into `k` positive factors.
pub fn tau_k(n: &BigUint, k: u32) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::Domain("tau_k needs k >= 1".into()));
    }
    Ok(tau_k_of(&factorize(n)?, k))
}

pub fn tau_k_of(f: &Factorization, k: u32) -> BigUint {
    f.exponents()
        .map(|a| binomial(BigUint::from(a + k - 1), BigUint::from(k - 1)))
        .product()
}

/// Smallest `l >= 1` with `z | l^e`, i.e. the product of `p^ceil(a_p / e)`.
pub fn min_root_cover(z: &BigUint, e: u32) -> Result<BigUint> {
    if e == 0 {
        return Err(Error::Domain("min_root_cover needs e >= 1".into()));
    }
    let f = factorize(z)?;
    let l = min_root_cover_of(&f, e);
    debug_assert!((z % &l).is_zero());
    debug_assert!(num_traits::pow(l.clone(), e as usize) >= *z);
    Ok(l)
}

pub fn min_root_cover_of(f: &Factorization, e: u32) -> BigUint {
    f.pairs
        .iter()
        .map(|(p, a)| num_traits::pow(p.clone(), u32::div_ceil(*a, e) as usize))
        .product()
}
