//! Steinhaus random multiplicative functions and Monte Carlo estimates of
//! the moments of `sum_{n0 < n <= N} f(P(n))`.
//!
//! Angles are kept as 64-bit fixed-point turns, so `f(n)` is an exact
//! wrapping sum of prime angles and does not depend on evaluation order.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_a, mixed_count, ratio_f64};
use crate::error::{Error, Result};
use crate::intfactor::factorize;
use crate::polyalg::PolyProfile;

const TURN: f64 = std::f64::consts::TAU / 18_446_744_073_709_551_616.0;

fn cis(turns: u64) -> Complex64 {
    Complex64::from_polar(1.0, turns as f64 * TURN)
}

/// A Steinhaus function `f`, identified by `(seed, trial)`. The angle of
/// `f(p)` is drawn from a ChaCha stream keyed by the pair and indexed by `p`.
#[derive(Clone, Debug)]
pub struct SteinhausSampler {
    pub seed: u64,
    pub trial: u64,
    cache: HashMap<BigUint, u64>,
}

impl SteinhausSampler {
    pub fn new(seed: u64) -> Self {
        Self::for_trial(seed, 0)
    }

    pub fn for_trial(seed: u64, trial: u64) -> Self {
        SteinhausSampler {
            seed,
            trial,
            cache: HashMap::new(),
        }
    }

    /// `theta_p * 2^64`, computed without touching the cache.
    pub fn angle(&self, p: &BigUint) -> u64 {
        let digits = p.to_u64_digits();
        let low = digits.first().copied().unwrap_or(0);
        // Primes past 2^64 fold their high digits into the key.
        let high = digits[1.min(digits.len())..]
            .iter()
            .fold(0u64, |acc, &w| splitmix(acc ^ w));
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trial.to_le_bytes());
        key[16..24].copy_from_slice(&high.to_le_bytes());
        key[24] = (digits.len() > 1) as u8;
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(low);
        rng.next_u64()
    }

    fn cached_angle(&mut self, p: &BigUint) -> u64 {
        if let Some(&a) = self.cache.get(p) {
            return a;
        }
        let a = self.angle(p);
        self.cache.insert(p.clone(), a);
        a
    }

    /// `f(p)` for a prime `p`.
    pub fn f_prime(&mut self, p: &BigUint) -> Complex64 {
        cis(self.cached_angle(p))
    }

    /// `f(n)`, extended completely multiplicatively.
    pub fn f_value(&mut self, n: &BigUint) -> Result<Complex64> {
        Ok(cis(self.angle_of(n)?))
    }

    fn angle_of(&mut self, n: &BigUint) -> Result<u64> {
        if n.is_one() {
            return Ok(0);
        }
        let fac = factorize(n)?;
        Ok(fac.pairs.iter().fold(0u64, |acc, (p, e)| {
            acc.wrapping_add(self.cached_angle(p).wrapping_mul(*e as u64))
        }))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `P(n)` for `n0 < n <= N`.
fn shifted_values(profile: &PolyProfile, n: u64) -> Result<Vec<BigUint>> {
    if n <= profile.n0 {
        return Err(Error::Domain(format!(
            "N = {n} must exceed n0 = {}",
            profile.n0
        )));
    }
    Ok((profile.n0 + 1..=n)
        .map(|x| {
            profile
                .p
                .eval(&BigInt::from(x))
                .to_biguint()
                .expect("P is positive past n0")
        })
        .collect())
}

/// `sum_{n0 < n <= N} f(P(n))`.
pub fn partial_sum(
    sampler: &mut SteinhausSampler,
    profile: &PolyProfile,
    n: u64,
) -> Result<Complex64> {
    let mut s = Complex64::default();
    for v in shifted_values(profile, n)? {
        s += sampler.f_value(&v)?;
    }
    Ok(s)
}

/// Factorizations of `P(n)`, `n0 < n <= N`, as indices into a shared
/// prime list.
struct FactorTable {
    primes: Vec<BigUint>,
    terms: Vec<Vec<(usize, u64)>>,
}

impl FactorTable {
    fn new(profile: &PolyProfile, n: u64) -> Result<Self> {
        let values = shifted_values(profile, n)?;
        let facs = values
            .par_iter()
            .map(factorize)
            .collect::<Result<Vec<_>>>()?;
        let mut index: HashMap<BigUint, usize> = HashMap::new();
        let mut primes = Vec::new();
        let terms = facs
            .iter()
            .map(|f| {
                f.pairs
                    .iter()
                    .map(|(p, e)| {
                        let i = *index.entry(p.clone()).or_insert_with(|| {
                            primes.push(p.clone());
                            primes.len() - 1
                        });
                        (i, *e as u64)
                    })
                    .collect()
            })
            .collect();
        Ok(FactorTable { primes, terms })
    }

    fn sum(&self, sampler: &SteinhausSampler) -> Complex64 {
        let angles: Vec<u64> = self.primes.iter().map(|p| sampler.angle(p)).collect();
        self.terms
            .iter()
            .map(|t| {
                cis(t.iter().fold(0u64, |acc, &(i, e)| {
                    acc.wrapping_add(angles[i].wrapping_mul(e))
                }))
            })
            .sum()
    }
}

/// Double-double accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (o.hi - bb);
        let lo = err + self.lo + o.lo;
        let hi = s + lo;
        Dd {
            hi,
            lo: lo - (hi - s),
        }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Pairwise sum in a fixed tree shape.
fn tree_sum(xs: &[f64]) -> f64 {
    fn go(xs: &[f64]) -> Dd {
        match xs.len() {
            0 => Dd::default(),
            1 => Dd { hi: xs[0], lo: 0.0 },
            n => go(&xs[..n / 2]).add(go(&xs[n / 2..])),
        }
    }
    go(xs).value()
}

/// Result of [`moment_estimate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub k: u32,
    /// Mean of `|S|^(2k) / N^k` over trials.
    pub normalized_estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub n: u64,
    pub n0_used: u64,
    /// `A_{P,2k}` over `(n0, N]`, divided by `N^k`.
    pub exact_target: f64,
    /// Sample mean of `S` as `[re, im]`.
    pub mean_s: [f64; 2],
    /// `sqrt(sum |S - mean|^2 / (trials - 1)) / sqrt(trials)`.
    pub mean_s_std_error: f64,
}

impl MomentEstimate {
    /// Distance from the exact target in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.normalized_estimate - self.exact_target).abs() / self.std_error
    }
}

/// Monte Carlo estimate of `E |S|^(2k) / N^k` with `S = sum_{n0 < n <= N} f(P(n))`.
pub fn moment_estimate(
    profile: &PolyProfile,
    n: u64,
    k: u32,
    trials: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if trials < 100 {
        return Err(Error::Domain(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    let table = FactorTable::new(profile, n)?;
    let sums: Vec<Complex64> = (0..trials)
        .into_par_iter()
        .map(|t| table.sum(&SteinhausSampler::for_trial(seed, t)))
        .collect();
    let norm = (n as f64).powi(k as i32);
    let moments: Vec<f64> = sums
        .iter()
        .map(|s| s.norm_sqr().powi(k as i32) / norm)
        .collect();
    let tf = trials as f64;
    let mean = tree_sum(&moments) / tf;
    let dev: Vec<f64> = moments.iter().map(|m| (m - mean) * (m - mean)).collect();
    let std_error = (tree_sum(&dev) / (tf - 1.0)).sqrt() / tf.sqrt();

    let re: Vec<f64> = sums.iter().map(|s| s.re).collect();
    let im: Vec<f64> = sums.iter().map(|s| s.im).collect();
    let mean_s = Complex64::new(tree_sum(&re) / tf, tree_sum(&im) / tf);
    let dev_s: Vec<f64> = sums.iter().map(|s| (s - mean_s).norm_sqr()).collect();
    let mean_s_std_error = (tree_sum(&dev_s) / (tf - 1.0)).sqrt() / tf.sqrt();

    let exact = exact_moment(profile, n, k)?;
    let exact_target = ratio_f64(&exact, &num_traits::pow(BigUint::from(n), k as usize));
    Ok(MomentEstimate {
        k,
        normalized_estimate: mean,
        std_error,
        trials,
        seed,
        n,
        n0_used: profile.n0,
        exact_target,
        mean_s: [mean_s.re, mean_s.im],
        mean_s_std_error,
    })
}

/// `A_{P,2k}` over the box `(n0, N]`.
pub fn exact_moment(profile: &PolyProfile, n: u64, k: u32) -> Result<BigUint> {
    if n <= profile.n0 {
        return Err(Error::Domain(format!(
            "N = {n} must exceed n0 = {}",
            profile.n0
        )));
    }
    if profile.is_normalized() {
        return count_a(profile, n, k);
    }
    let shifted = PolyProfile::new(&profile.p.taylor_shift(&BigInt::from(profile.n0)))?;
    count_a(&shifted, n - profile.n0, k)
}

/// `E_f[S^a conj(S)^b]` with `S = sum_{n <= N} f(P(n))`, as an exact count.
pub fn mixed_moment_exact(profile: &PolyProfile, n: u64, a: u32, b: u32) -> Result<BigUint> {
    mixed_count(profile, n, a, b)
}

/// Whether `|S| <= N - n0`, the triangle-inequality ceiling.
pub fn partial_sum_within_bound(s: Complex64, profile: &PolyProfile, n: u64) -> bool {
    s.norm() <= (n - profile.n0).to_f64().unwrap_or(f64::INFINITY) + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::IntPoly;

    fn prof(c: &[i64]) -> PolyProfile {
        PolyProfile::new(&IntPoly::from_i64s(c)).unwrap()
    }

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn close(x: Complex64, y: Complex64) -> bool {
        (x - y).norm() < 1e-12
    }

    #[test]
    fn f_value_examples() {
        let mut s = SteinhausSampler::new(7);
        assert_eq!(s.f_value(&b(1)).unwrap(), Complex64::new(1.0, 0.0));
        let (f2, f3) = (s.f_prime(&b(2)), s.f_prime(&b(3)));
        assert!(close(s.f_value(&b(6)).unwrap(), f2 * f3));
        assert!(close(s.f_value(&b(8)).unwrap(), f2 * f2 * f2));
        for p in [2u64, 3, 5, 1_000_000_007] {
            assert!((s.f_prime(&b(p)).norm() - 1.0).abs() < 1e-12);
        }
        let big = num_traits::pow(b(2), 89) - 1u32;
        assert!((s.f_prime(&big).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angles_depend_only_on_key() {
        let primes: Vec<BigUint> = [2u64, 3, 5, 7, 11, 13, 101].iter().map(|&p| b(p)).collect();
        let mut fwd = SteinhausSampler::new(42);
        let a: Vec<u64> = primes.iter().map(|p| fwd.cached_angle(p)).collect();
        let mut rev = SteinhausSampler::new(42);
        let mut r: Vec<u64> = primes.iter().rev().map(|p| rev.cached_angle(p)).collect();
        r.reverse();
        assert_eq!(a, r);
        let other = SteinhausSampler::for_trial(42, 1);
        assert_ne!(a[0], other.angle(&primes[0]));
        assert_ne!(a[0], SteinhausSampler::new(43).angle(&primes[0]));
        // a prime past 2^64 with the same low digit gets its own angle
        let hi = (b(1) << 64) + 2u32;
        assert_ne!(fwd.angle(&hi), fwd.angle(&b(2)));
    }

    #[test]
    fn partial_sum_examples() {
        let p = prof(&[0, 1, 1]);
        let mut s = SteinhausSampler::new(3);
        let one = partial_sum(&mut s, &p, 1).unwrap();
        assert!((one.norm() - 1.0).abs() < 1e-12);
        let got = partial_sum(&mut s, &p, 3).unwrap();
        let (f2, f3) = (s.f_prime(&b(2)), s.f_prime(&b(3)));
        assert!(close(got, f2 * (Complex64::new(1.0, 0.0) + f3 + f2 * f3)));
        for n in 1..30 {
            let v = partial_sum(&mut s, &p, n).unwrap();
            assert!(partial_sum_within_bound(v, &p, n));
        }
        // n0 = 5 for x^2 - 5x
        let q = prof(&[0, -5, 1]);
        assert_eq!(q.n0, 5);
        let v = partial_sum(&mut s, &q, 6).unwrap();
        assert!(close(v, s.f_value(&b(6)).unwrap()));
        assert!(matches!(partial_sum(&mut s, &q, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn fast_table_matches_sampler() {
        let p = prof(&[1, 0, 1]);
        let table = FactorTable::new(&p, 50).unwrap();
        for t in 0..5 {
            let mut s = SteinhausSampler::for_trial(9, t);
            assert!(close(table.sum(&s), partial_sum(&mut s, &p, 50).unwrap()));
        }
    }

    #[test]
    fn moment_preconditions() {
        let p = prof(&[0, 1, 1]);
        assert!(matches!(
            moment_estimate(&p, 10, 0, 200, 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            moment_estimate(&p, 10, 1, 99, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn moments_track_exact_targets() {
        let p = prof(&[0, 1, 1]);
        let m1 = moment_estimate(&p, 100, 1, 4000, 1).unwrap();
        assert_eq!(m1.exact_target, 1.0);
        assert!(m1.z_score() <= 4.0, "{m1:?}");
        let m2 = moment_estimate(&p, 100, 2, 4000, 1).unwrap();
        let exact = count_a(&p, 100, 2).unwrap();
        assert_eq!(m2.exact_target, ratio_f64(&exact, &b(10_000)));
        assert!(m2.z_score() <= 4.0, "{m2:?}");
        let mean = Complex64::new(m2.mean_s[0], m2.mean_s[1]);
        assert!(mean.norm() <= 4.0 * m2.mean_s_std_error);
    }

    #[test]
    fn unnormalized_target_uses_shifted_box() {
        let q = prof(&[0, -5, 1]);
        let m = moment_estimate(&q, 30, 1, 200, 5).unwrap();
        assert_eq!(m.n0_used, 5);
        // x^2 - 5x is injective past 5
        assert_eq!(exact_moment(&q, 30, 1).unwrap(), b(25));
        assert_eq!(m.exact_target, 25.0 / 30.0);
    }

    #[test]
    fn estimates_ignore_thread_count() {
        let p = prof(&[0, 0, 1, 1]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| moment_estimate(&p, 60, 2, 500, 11).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(3));
    }

    #[test]
    fn mixed_moment_examples() {
        let p = prof(&[0, 1, 1]);
        assert_eq!(mixed_moment_exact(&p, 10, 1, 0).unwrap(), b(0));
        assert_eq!(mixed_moment_exact(&p, 10, 1, 2).unwrap(), b(4));
        for (x, y) in [(1, 2), (1, 3), (2, 3), (0, 2)] {
            assert_eq!(
                mixed_moment_exact(&p, 12, x, y).unwrap(),
                mixed_moment_exact(&p, 12, y, x).unwrap()
            );
        }
        assert_eq!(
            mixed_moment_exact(&p, 10, 2, 2).unwrap(),
            count_a(&p, 10, 2).unwrap()
        );
    }

    #[test]
    fn tree_sum_is_accurate() {
        let xs = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(tree_sum(&xs), 2.0);
        let ys: Vec<f64> = (0..1000).map(|i| 0.1 * i as f64).collect();
        assert!((tree_sum(&ys) - 49950.0).abs() < 1e-9);
    }
}
