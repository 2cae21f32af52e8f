//! Roots of polynomials modulo `l`, exact divisibility counts over `[N]`,
//! and checkers for the root-count bound `d^omega(l) |Delta_Q|^(1/2)` and
//! its consequence for `#{x in [N] : z | P(x)}`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::intfactor::{factorize, factorize_u64};
use crate::polyalg::{IntPoly, PolyProfile};
use crate::report::{json_int, BoundReport, Radical, RootTerm};

/// Primes up to this size are handled by probing every residue.
pub const SCAN_PRIME_LIMIT: u64 = 100_000;

/// Sorted roots of `q` modulo `l`.
pub fn roots_mod(q: &IntPoly, l: u64) -> Result<Vec<u64>> {
    if l == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let mut acc: (u64, Vec<u64>) = (1, vec![0]);
    for (p, e) in factorize_u64(l)?.small_pairs().expect("factors of a u64") {
        let pe = p.pow(e);
        let local = roots_mod_prime_power(q, p, e)?;
        acc = crt_combine(&acc, &(pe, local));
        if acc.1.is_empty() {
            return Ok(Vec::new());
        }
    }
    acc.1.sort_unstable();
    Ok(acc.1)
}

/// Roots modulo `p^e`: roots mod `p`, then every one of the `p` lifts of
/// each root is tested at each step. Singular roots need no special care.
pub fn roots_mod_prime_power(q: &IntPoly, p: u64, e: u32) -> Result<Vec<u64>> {
    let mut roots = roots_mod_prime(q, p)?;
    let mut modulus = p;
    for _ in 1..e {
        let next = modulus
            .checked_mul(p)
            .ok_or_else(|| Error::Domain("prime power exceeds u64".into()))?;
        let mut lifted = Vec::new();
        for &r in &roots {
            for t in 0..p {
                let c = r + t * modulus;
                if q.eval_mod(c, next) == 0 {
                    lifted.push(c);
                }
            }
        }
        roots = lifted;
        modulus = next;
        if roots.is_empty() {
            break;
        }
    }
    roots.sort_unstable();
    Ok(roots)
}

fn roots_mod_prime(q: &IntPoly, p: u64) -> Result<Vec<u64>> {
    if p <= SCAN_PRIME_LIMIT {
        return Ok((0..p).filter(|&x| q.eval_mod(x, p) == 0).collect());
    }
    let f = trim(q.coeffs_mod(p));
    if f.len() == 1 && f[0] == 0 {
        return Err(Error::Resource(format!(
            "every residue modulo the prime {p} is a root"
        )));
    }
    let mut roots = zp::linear_roots(&f, p);
    roots.sort_unstable();
    Ok(roots)
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    if v.is_empty() {
        v.push(0);
    }
    v
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "not invertible");
    old_s.rem_euclid(m as i128) as u64
}

fn crt_combine(a: &(u64, Vec<u64>), b: &(u64, Vec<u64>)) -> (u64, Vec<u64>) {
    let (m1, m2) = (a.0, b.0);
    let m = m1 * m2;
    let inv = mod_inverse(m1 % m2, m2) as u128;
    let mut out = Vec::with_capacity(a.1.len() * b.1.len());
    for &x in &a.1 {
        for &y in &b.1 {
            let diff = (y as u128 + m2 as u128 - (x % m2) as u128) % m2 as u128;
            let t = diff * inv % m2 as u128;
            out.push((x as u128 + m1 as u128 * t) as u64);
        }
    }
    debug_assert!(out.iter().all(|&v| v < m));
    (m, out)
}

/// Arithmetic in `F_p[x]` for primes that are too large to scan.
mod zp {
    fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul_mod(r, b, p);
            }
            b = mul_mod(b, b, p);
            e >>= 1;
        }
        r
    }

    fn inv(a: u64, p: u64) -> u64 {
        pow_mod(a, p - 2, p)
    }

    fn trim(v: &mut Vec<u64>) {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    }

    fn is_zero(v: &[u64]) -> bool {
        v.iter().all(|&c| c == 0)
    }

    fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let li = inv(m[dm], p);
        while r.len() > dm && !is_zero(&r) {
            let top = r.len() - 1;
            let c = mul_mod(r[top], li, p);
            let shift = top - dm;
            for (i, &mc) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - mul_mod(c, mc, p)) % p;
            }
            r.pop();
            trim(&mut r);
        }
        if r.is_empty() {
            r.push(0);
        }
        r
    }

    fn mul_rem(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        rem(&out, m, p)
    }

    fn pow_rem(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut result = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mul_rem(&result, &b, m, p);
            }
            b = mul_rem(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    fn monic(mut a: Vec<u64>, p: u64) -> Vec<u64> {
        trim(&mut a);
        let li = inv(*a.last().unwrap(), p);
        a.iter_mut().for_each(|c| *c = mul_mod(*c, li, p));
        a
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        trim(&mut a);
        trim(&mut b);
        while !is_zero(&b) {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(a, p)
    }

    fn sub_x(mut a: Vec<u64>, p: u64) -> Vec<u64> {
        if a.len() < 2 {
            a.resize(2, 0);
        }
        a[1] = (a[1] + p - 1) % p;
        trim(&mut a);
        a
    }

    /// Distinct roots in `F_p` of `f` (coefficients ascending, nonzero).
    pub(super) fn linear_roots(f: &[u64], p: u64) -> Vec<u64> {
        if f.len() == 1 {
            return Vec::new();
        }
        let f = monic(f.to_vec(), p);
        let xp = pow_rem(&[0, 1], p, &f, p);
        let g = gcd(&f, &sub_x(xp, p), p);
        let mut out = Vec::new();
        let mut seed = 0x2545_F491_4F6C_DD1Du64;
        split(g, p, &mut seed, &mut out);
        out
    }

    fn split(g: Vec<u64>, p: u64, seed: &mut u64, out: &mut Vec<u64>) {
        match g.len() {
            0 | 1 => {}
            2 => out.push((p - g[0]) % p),
            _ => loop {
                *seed ^= *seed << 13;
                *seed ^= *seed >> 7;
                *seed ^= *seed << 17;
                let a = *seed % p;
                let h = pow_rem(&[a, 1], (p - 1) / 2, &g, p);
                let mut h1 = h.clone();
                h1[0] = (h1[0] + p - 1) % p;
                let d = gcd(&g, &h1, p);
                if d.len() > 1 && d.len() < g.len() {
                    let other = quotient(&g, &d, p);
                    split(d, p, seed, out);
                    split(other, p, seed, out);
                    return;
                }
            },
        }
    }

    fn quotient(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let dm = m.len() - 1;
        let li = inv(m[dm], p);
        let mut r = a.to_vec();
        let mut q = vec![0u64; a.len() - dm];
        for top in (dm..a.len()).rev() {
            let c = mul_mod(r[top], li, p);
            q[top - dm] = c;
            for (i, &mc) in m.iter().enumerate() {
                r[top - dm + i] = (r[top - dm + i] + p - mul_mod(c, mc, p)) % p;
            }
        }
        q
    }
}

/// `#{x in [N] : z | p(x)}`.
pub fn divisibility_count(p: &IntPoly, z: &BigUint, n: u64) -> u64 {
    assert!(!z.is_zero(), "z must be positive");
    match z.to_u64() {
        Some(zu) if zu <= n => (0..zu)
            .filter(|&r| p.eval_mod(r, zu) == 0)
            .map(|r| count_in_class(r, zu, n))
            .sum(),
        Some(zu) => (1..=n).filter(|&x| p.eval_mod(x, zu) == 0).count() as u64,
        None => (1..=n)
            .filter(|&x| p.eval_mod_big(&BigUint::from(x), z).is_zero())
            .count() as u64,
    }
}

/// `#{x in [1, n] : x = r mod m}` for `0 <= r < m`.
fn count_in_class(r: u64, m: u64, n: u64) -> u64 {
    if r == 0 {
        n / m
    } else if r > n {
        0
    } else {
        (n - r) / m + 1
    }
}

fn input(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn disc_abs(profile: &PolyProfile) -> BigUint {
    profile.disc_q.magnitude().clone()
}

/// `#{x mod l : Q(x) = 0 mod l} <= d^omega(l) |Delta_Q|^(1/2)`.
pub fn root_count_check(profile: &PolyProfile, l: u64) -> Result<BoundReport> {
    profile.require_eligible()?;
    let roots = roots_mod(&profile.q, l)?.len();
    let omega = factorize_u64(l)?.omega();
    let d_pow = num_traits::pow(BigInt::from(profile.d), omega);
    let terms = [RootTerm::new(
        BigRational::from_integer(d_pow),
        vec![Radical::new(disc_abs(profile), 1, 2)],
    )];
    Ok(BoundReport::evaluate(
        "roots_mod_l",
        BigInt::from(roots),
        &terms,
        input(&[
            ("l", json_int(&l)),
            ("d", json_int(&profile.d)),
            ("omega_l", json_int(&omega)),
            ("disc_q", json_int(&profile.disc_q)),
        ]),
        false,
    ))
}

/// `#{x in [N] : z | P(x)} <= d^omega(z) |Delta_Q|^(1/2) (1 + N / z^(1/e_P))`.
pub fn divisibility_check(profile: &PolyProfile, z: &BigUint, n: u64) -> Result<BoundReport> {
    profile.require_eligible()?;
    if z.is_zero() || n == 0 {
        return Err(Error::Domain("z and N must be positive".into()));
    }
    let count = divisibility_count(&profile.p, z, n);
    let fz = factorize(z)?;
    let omega = fz.omega();
    let d_pow = BigRational::from_integer(num_traits::pow(BigInt::from(profile.d), omega));
    let sqrt_disc = Radical::new(disc_abs(profile), 1, 2);
    let terms = [
        RootTerm::new(d_pow.clone(), vec![sqrt_disc.clone()]),
        RootTerm::new(
            d_pow * BigInt::from(n),
            vec![sqrt_disc, Radical::new(z.clone(), -1, profile.e_p)],
        ),
    ];
    let mut inputs = input(&[
        ("z", json_int(z)),
        ("N", json_int(&n)),
        ("d", json_int(&profile.d)),
        ("e_p", json_int(&profile.e_p)),
        ("omega_z", json_int(&omega)),
        ("disc_q", json_int(&profile.disc_q)),
    ]);
    if !fz.certified {
        inputs.insert("probable_prime_factors".into(), Value::Bool(true));
    }
    Ok(BoundReport::evaluate(
        "divisibility_count",
        BigInt::from(count),
        &terms,
        inputs,
        !fz.certified,
    ))
}
