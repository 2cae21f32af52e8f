//! Counters for "almost-trivial" coincidences: `G_{P,lambda}([N], z)` and
//! the tuple count `T` whose product is divisible by `z`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use super::base_values;
use crate::error::{Error, Result};
use crate::intfactor::{factorize, tau_k_of};
use crate::polyalg::PolyProfile;
use crate::report::{json_int, BoundReport, Radical, RootTerm};

/// Largest divisor lattice the `T` dynamic program will allocate.
const MAX_DIVISORS: u64 = 20_000_000;

/// Preimages of each value `P(x)`, `x in [N]`.
#[derive(Clone, Debug)]
pub struct ValueIndex {
    preimages: HashMap<BigUint, Vec<u64>>,
    values: Vec<BigUint>,
}

impl ValueIndex {
    pub fn new(profile: &PolyProfile, n: u64) -> Result<Self> {
        let values = base_values(profile, n)?;
        let mut preimages: HashMap<BigUint, Vec<u64>> = HashMap::with_capacity(values.len());
        for (x, v) in (1..).zip(&values) {
            preimages.entry(v.clone()).or_default().push(x);
        }
        Ok(ValueIndex { preimages, values })
    }

    /// `#{x in [N] : P(x) = v}`.
    pub fn count(&self, v: &BigUint) -> u64 {
        self.preimages(v).len() as u64
    }

    /// All `x in [N]` with `P(x) = v`, ascending.
    pub fn preimages(&self, v: &BigUint) -> &[u64] {
        self.preimages.get(v).map_or(&[], Vec::as_slice)
    }

    /// `P(x)` for `x in [N]`; index `x - 1`.
    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn n(&self) -> u64 {
        self.values.len() as u64
    }

    /// `G_{P,lambda}([N], z)`.
    pub fn g_count(&self, z: &BigUint, lambda: u64) -> u64 {
        let mut total = 0;
        for b in 2..=lambda {
            for a in 1..b {
                let (q, r) = (z * a).div_rem(&BigUint::from(b));
                if r.is_zero() {
                    total += self.count(&q);
                }
            }
        }
        total
    }
}

/// `#{(x, a, b) in [N] x [lambda]^2 : a z = b P(x), a < b}`.
pub fn g_count(profile: &PolyProfile, n: u64, z: &BigUint, lambda: u64) -> Result<u64> {
    if lambda == 0 {
        return Err(Error::Domain("lambda must be at least 1".into()));
    }
    Ok(ValueIndex::new(profile, n)?.g_count(z, lambda))
}

/// `#{x in [N]^k : z | prod P(x_i), every P(x_i) < z}`, by dynamic
/// programming over the divisor lattice of `z` with state
/// `gcd(z, running product)`.
pub fn t_count(profile: &PolyProfile, n: u64, k: u32, z: &BigUint) -> Result<BigUint> {
    if z.is_zero() || k == 0 {
        return Err(Error::Domain("z and k must be positive".into()));
    }
    let values = base_values(profile, n)?;
    let fz = factorize(z)?;
    let primes: Vec<(BigUint, u32)> = fz.pairs.clone();
    let size: u64 = primes.iter().map(|(_, a)| *a as u64 + 1).product();
    if size > MAX_DIVISORS {
        return Err(Error::Resource(format!("z = {z} has {size} divisors")));
    }
    let mut strides = Vec::with_capacity(primes.len());
    let mut s = 1usize;
    for (_, a) in &primes {
        strides.push(s);
        s *= *a as usize + 1;
    }
    let size = size as usize;

    // gcd(z, P(x)) as an exponent vector, grouped.
    let mut steps: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for v in values.iter().filter(|v| *v < z) {
        let exps: Vec<u32> = primes
            .iter()
            .map(|(p, a)| {
                let mut e = 0;
                let mut w = v.clone();
                while e < *a && (&w % p).is_zero() {
                    w /= p;
                    e += 1;
                }
                e
            })
            .collect();
        *steps.entry(exps).or_insert(0) += 1;
    }

    let decode = |mut idx: usize| -> Vec<u32> {
        primes
            .iter()
            .map(|(_, a)| {
                let r = (idx % (*a as usize + 1)) as u32;
                idx /= *a as usize + 1;
                r
            })
            .collect()
    };
    let mut state = vec![BigUint::zero(); size];
    state[0] = BigUint::from(1u32);
    for _ in 0..k {
        let mut next = vec![BigUint::zero(); size];
        for (g, count) in state.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            let ge = decode(g);
            for (h, mult) in &steps {
                let idx: usize = ge
                    .iter()
                    .zip(h)
                    .zip(&primes)
                    .zip(&strides)
                    .map(|(((x, y), (_, a)), st)| (*a).min(x + y) as usize * st)
                    .sum();
                next[idx] += count * mult;
            }
        }
        state = next;
    }
    Ok(state[size - 1].clone())
}

/// Compares `T` with
/// `k G N^(k-1) + tau_k(z) (C d^omega(z))^k |Delta_Q|^(k/2) (N^k / z^(1/e) + N^(k-1) / lambda^(1/e) + N^(k-2))`.
///
/// The `O(d^omega(z))` constant is not explicit, so the report is advisory
/// and `holds` refers to the supplied `c`.
pub fn tuple_divisibility_report(
    profile: &PolyProfile,
    n: u64,
    k: u32,
    z: &BigUint,
    lambda: u64,
    c: &BigRational,
) -> Result<BoundReport> {
    profile.require_eligible()?;
    if lambda == 0 || n == 0 {
        return Err(Error::Domain("lambda and N must be positive".into()));
    }
    if *c <= BigRational::zero() {
        return Err(Error::Domain("constant C must be positive".into()));
    }
    let t = t_count(profile, n, k, z)?;
    let g = g_count(profile, n, z, lambda)?;
    let fz = factorize(z)?;
    let omega = fz.omega();
    let tau = tau_k_of(&fz, k);

    let nr = BigRational::from_integer(BigInt::from(n));
    let n_pow = |e: i32| -> BigRational {
        if e >= 0 {
            num_traits::pow(nr.clone(), e as usize)
        } else {
            num_traits::pow(nr.recip(), (-e) as usize)
        }
    };
    let k_i = k as i32;
    let d_omega = BigRational::from_integer(num_traits::pow(BigInt::from(profile.d), omega));
    let prefactor = BigRational::from_integer(BigInt::from(tau.clone()))
        * num_traits::pow(c * d_omega, k as usize);
    let disc = Radical::new(profile.disc_q.magnitude().clone(), k as i32, 2);
    let gcd_term = BigRational::from_integer(BigInt::from(k) * BigInt::from(g)) * n_pow(k_i - 1);
    let terms = [
        RootTerm::rational(gcd_term),
        RootTerm::new(
            &prefactor * n_pow(k_i),
            vec![disc.clone(), Radical::new(z.clone(), -1, profile.e_p)],
        ),
        RootTerm::new(
            &prefactor * n_pow(k_i - 1),
            vec![disc.clone(), Radical::new(lambda, -1, profile.e_p)],
        ),
        RootTerm::new(&prefactor * n_pow(k_i - 2), vec![disc]),
    ];
    let inputs = [
        ("N", json_int(&n)),
        ("k", json_int(&k)),
        ("z", json_int(z)),
        ("lambda", json_int(&lambda)),
        ("C", serde_json::Value::String(c.to_string())),
        ("G", json_int(&g)),
        ("tau_k_z", json_int(&tau)),
        ("omega_z", json_int(&omega)),
        ("d", json_int(&profile.d)),
        ("e_p", json_int(&profile.e_p)),
        ("disc_q", json_int(&profile.disc_q)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(BoundReport::evaluate(
        "tuple_divisibility_count",
        BigInt::from(t),
        &terms,
        inputs,
        true,
    ))
}
