//! Exact counts of solutions to `P(x_1)...P(x_k) = P(y_1)...P(y_k)` over
//! `[N]^(2k)`, the trivial/nontrivial split, and the large-gcd counters.
//!
//! `A_{P,2k}([N]) = sum_v m_k(v)^2` where `m_k(v)` is the number of
//! `k`-tuples in `[N]^k` with product `v`; `m_k` is built by repeated
//! multiplicative convolution with the base table of values `P(1..N)`.

pub mod engine;
mod gcd;

pub use gcd::{tuple_divisibility_report, g_count, t_count, ValueIndex};

use std::collections::HashMap;
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::polyalg::PolyProfile;
use crate::report::json_int;
use engine::{ProductKey, Table};

/// Memory and work limits for counting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Ceiling on the bytes of any materialized multiplicity table.
    pub memory_bytes: usize,
    /// Products generated per parallel chunk.
    pub chunk_pairs: usize,
    /// Largest `N^k` for which solutions are enumerated one by one.
    pub enumeration_tuples: u64,
    /// Largest `A` for which solutions are classified one by one.
    pub enumeration_solutions: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            memory_bytes: 2 << 30,
            chunk_pairs: 1 << 23,
            enumeration_tuples: 2_000_000,
            enumeration_solutions: 200_000_000,
        }
    }
}

/// Multiplicity of each product `prod P(x_i)` over `k`-tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductMultiset {
    /// Sorted by product, keys unique, multiplicities positive.
    pub counts: Vec<(BigUint, u64)>,
    pub n: u64,
    pub k: u32,
    pub poly_id: String,
}

impl ProductMultiset {
    pub fn get(&self, v: &BigUint) -> u64 {
        self.counts
            .binary_search_by(|(k, _)| k.cmp(v))
            .map_or(0, |i| self.counts[i].1)
    }

    pub fn total_mass(&self) -> BigUint {
        self.counts.iter().map(|(_, m)| BigUint::from(*m)).sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn sum_squares(&self) -> BigUint {
        self.counts
            .iter()
            .map(|(_, m)| BigUint::from(*m) * BigUint::from(*m))
            .sum()
    }

    /// Adds the counts of `other`, which must describe the same `(P, N, k)`.
    pub fn merge(&mut self, other: &ProductMultiset) {
        assert_eq!(
            (self.n, self.k, &self.poly_id),
            (other.n, other.k, &other.poly_id),
            "merging multisets of different shapes"
        );
        let mut out = Vec::with_capacity(self.counts.len() + other.counts.len());
        let (mut a, mut b) = (
            self.counts.iter().peekable(),
            other.counts.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    std::cmp::Ordering::Less => out.push(a.next().unwrap().clone()),
                    std::cmp::Ordering::Greater => out.push(b.next().unwrap().clone()),
                    std::cmp::Ordering::Equal => {
                        out.push((x.0.clone(), x.1 + y.1));
                        a.next();
                        b.next();
                    }
                },
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => out.push(b.next().unwrap().clone()),
                (None, None) => break,
            }
        }
        self.counts = out;
    }
}

/// `P(1), ..., P(n)`; requires `P > 0` on `[N]`.
pub(crate) fn base_values(profile: &PolyProfile, n: u64) -> Result<Vec<BigUint>> {
    profile.require_normalized()?;
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    Ok((1..=n)
        .map(|x| {
            profile
                .p
                .eval(&BigInt::from(x))
                .to_biguint()
                .expect("normalized polynomial is positive on [N]")
        })
        .collect())
}

fn require_mass_fits(n: u64, k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    match n.checked_pow(k) {
        Some(_) => Ok(()),
        None => Err(Error::Resource(format!(
            "N^k = {n}^{k} overflows 64-bit multiplicities"
        ))),
    }
}

/// Chooses the narrowest key type that holds every `k`-fold product.
macro_rules! with_key_type {
    ($values:expr, $k:expr, $K:ident => $body:expr) => {{
        let max = $values.iter().max().cloned().unwrap_or_else(BigUint::one);
        let bits = max.bits() * $k as u64;
        if bits <= 64 {
            type $K = u64;
            $body
        } else if bits <= 128 {
            type $K = u128;
            $body
        } else {
            type $K = BigUint;
            $body
        }
    }};
}

pub(crate) fn base_table<K: ProductKey>(values: &[BigUint]) -> Table<K> {
    engine::run_length(values.iter().map(|v| (K::from_big(v), 1)).collect())
}

fn check_table_size<K: ProductKey>(t: &[(K, u64)], budget: &Budget) -> Result<()> {
    if t.len().saturating_mul(K::ENTRY_BYTES) > budget.memory_bytes {
        return Err(Error::Resource(format!(
            "multiplicity table reached {} distinct keys, over the {} byte budget",
            t.len(),
            budget.memory_bytes
        )));
    }
    Ok(())
}

/// `m_k` over `first x [N]^(k-1)` as a table.
pub(crate) fn materialize<K: ProductKey>(
    first: &[(K, u64)],
    base: &[(K, u64)],
    k: u32,
    budget: &Budget,
) -> Result<Table<K>> {
    let mut acc = first.to_vec();
    for _ in 1..k {
        let projected = engine::pair_count(acc.len(), base.len(), false);
        if projected > (budget.memory_bytes / K::ENTRY_BYTES) as u128 * 4 {
            return Err(Error::Resource(format!(
                "convolution would visit {projected} pairs from {} distinct keys",
                acc.len()
            )));
        }
        acc = engine::convolve(&acc, base, budget.chunk_pairs);
        check_table_size(&acc, budget)?;
    }
    Ok(acc)
}

fn to_multiset<K: ProductKey>(
    t: Table<K>,
    profile: &PolyProfile,
    n: u64,
    k: u32,
) -> ProductMultiset {
    ProductMultiset {
        counts: t.into_iter().map(|(v, m)| (v.to_big(), m)).collect(),
        n,
        k,
        poly_id: profile.id(),
    }
}

pub fn product_multiset(profile: &PolyProfile, n: u64, k: u32) -> Result<ProductMultiset> {
    product_multiset_with(profile, n, k, &Budget::default())
}

pub fn product_multiset_with(
    profile: &PolyProfile,
    n: u64,
    k: u32,
    budget: &Budget,
) -> Result<ProductMultiset> {
    product_multiset_partial(profile, n, k, 1..=n, budget)
}

/// Multiset over tuples whose first coordinate lies in `first`; merging the
/// results for a partition of `[N]` gives the full multiset.
pub fn product_multiset_partial(
    profile: &PolyProfile,
    n: u64,
    k: u32,
    first: RangeInclusive<u64>,
    budget: &Budget,
) -> Result<ProductMultiset> {
    require_mass_fits(n, k)?;
    let values = base_values(profile, n)?;
    let lo = (*first.start()).max(1) as usize;
    let hi = (*first.end()).min(n) as usize;
    let first_vals: &[BigUint] = if lo <= hi { &values[lo - 1..hi] } else { &[] };
    with_key_type!(values, k, K => {
        let base = base_table::<K>(&values);
        let head = base_table::<K>(first_vals);
        let t = materialize(&head, &base, k, budget)?;
        Ok(to_multiset(t, profile, n, k))
    })
}

/// `A_{P,2k}([N])`.
pub fn count_a(profile: &PolyProfile, n: u64, k: u32) -> Result<BigUint> {
    count_a_with(profile, n, k, &Budget::default())
}

pub fn count_a_with(profile: &PolyProfile, n: u64, k: u32, budget: &Budget) -> Result<BigUint> {
    require_mass_fits(n, k)?;
    let values = base_values(profile, n)?;
    with_key_type!(values, k, K => {
        let base = base_table::<K>(&values);
        count_a_table(&base, k, budget)
    })
}

fn count_a_table<K: ProductKey>(base: &[(K, u64)], k: u32, budget: &Budget) -> Result<BigUint> {
    Ok(match k {
        1 => engine::sum_squares(base),
        2 => engine::convolve_map(base, base, true, budget.chunk_pairs, |c| {
            engine::sum_squares(&c)
        })
        .into_iter()
        .sum(),
        _ => {
            let left = materialize(base, base, k - 1, budget)?;
            engine::convolve_map(&left, base, false, budget.chunk_pairs, |c| {
                engine::sum_squares(&c)
            })
            .into_iter()
            .sum()
        }
    })
}

/// `sum_v m_a(v) m_b(v)`, counting `(x, y) in [N]^a x [N]^b` with equal
/// products; `m_0` is the indicator of the empty product `1`.
pub fn mixed_count(profile: &PolyProfile, n: u64, a: u32, b: u32) -> Result<BigUint> {
    mixed_count_with(profile, n, a, b, &Budget::default())
}

pub fn mixed_count_with(
    profile: &PolyProfile,
    n: u64,
    a: u32,
    b: u32,
    budget: &Budget,
) -> Result<BigUint> {
    if a + b == 0 {
        return Err(Error::Domain("a + b must be at least 1".into()));
    }
    if a == b {
        return count_a_with(profile, n, a, budget);
    }
    let (small, large) = (a.min(b), a.max(b));
    require_mass_fits(n, large)?;
    let values = base_values(profile, n)?;
    if small == 0 {
        // only the empty product equals 1
        let ones = values.iter().filter(|v| v.is_one()).count() as u64;
        return Ok(BigUint::from(ones).pow(large));
    }
    with_key_type!(values, large, K => {
        let base = base_table::<K>(&values);
        let s = materialize(&base, &base, small, budget)?;
        let left = materialize(&base, &base, large - 1, budget)?;
        let parts = engine::convolve_map(&left, &base, false, budget.chunk_pairs, |c| {
            engine::inner_product(&c, &s)
        });
        Ok(parts.into_iter().map(BigUint::from).sum())
    })
}

/// Ordered pairs of `k`-tuples from `[N]` that are rearrangements of each other.
///
/// Sums over multiplicity shapes (partitions of `k`) the number of ways to
/// pick the distinct values times the squared multinomial coefficient.
pub fn trivial_count(n: u64, k: u32) -> BigUint {
    let mut total = BigUint::zero();
    let k_fact = factorial(k);
    for parts in partitions(k) {
        let r = parts.len() as u64;
        if r > n {
            continue;
        }
        let falling: BigUint = (0..r).map(|i| BigUint::from(n - i)).product();
        let mut same = HashMap::new();
        for &p in &parts {
            *same.entry(p).or_insert(0u32) += 1;
        }
        let sym: BigUint = same.values().map(|&c| factorial(c)).product();
        let multinomial = &k_fact / parts.iter().map(|&p| factorial(p)).product::<BigUint>();
        total += falling / sym * &multinomial * &multinomial;
    }
    total
}

fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Partitions of `k` as non-increasing part lists.
fn partitions(k: u32) -> Vec<Vec<u32>> {
    fn go(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            go(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, k, &mut Vec::new(), &mut out);
    out
}

/// Counts of all, trivial and nontrivial solutions, plus the split of the
/// nontrivial ones by where the largest variable sits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionTally {
    pub a_count: BigUint,
    pub trivial: BigUint,
    pub nontrivial: BigUint,
    /// Nontrivial with `y_k = max(y) = max(x) = x_k`.
    pub r_count: Option<BigUint>,
    /// Nontrivial with `y_k = max(y) > max(x)`.
    pub nprime_count: Option<BigUint>,
    pub n: u64,
    pub k: u32,
}

impl SolutionTally {
    pub fn to_json(&self) -> Value {
        let opt = |v: &Option<BigUint>| v.as_ref().map_or(Value::Null, json_int);
        json!({
            "N": self.n,
            "k": self.k,
            "A": json_int(&self.a_count),
            "trivial": json_int(&self.trivial),
            "nontrivial": json_int(&self.nontrivial),
            "R": opt(&self.r_count),
            "N_prime": opt(&self.nprime_count),
        })
    }

    /// `nontrivial <= k^2 R + 2k N'`, when the split is available.
    pub fn recursion_inequality_holds(&self) -> Option<bool> {
        let (r, np) = (self.r_count.as_ref()?, self.nprime_count.as_ref()?);
        let k = BigUint::from(self.k);
        Some(self.nontrivial <= &k * &k * r + BigUint::from(2u32) * &k * np)
    }
}

/// Solution classes found by enumerating every solution.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Enumerated {
    pub total: u64,
    pub trivial: u64,
    pub r_count: u64,
    pub nprime_count: u64,
}

/// Enumerates all solutions by grouping `k`-tuples by product.
pub fn enumerate_solutions(
    profile: &PolyProfile,
    n: u64,
    k: u32,
    budget: &Budget,
) -> Result<Enumerated> {
    let tuples = n
        .checked_pow(k)
        .filter(|&t| t <= budget.enumeration_tuples)
        .ok_or_else(|| Error::Resource(format!("{n}^{k} tuples exceed enumeration budget")))?;
    let values = base_values(profile, n)?;
    let mut keyed: Vec<(BigUint, Vec<u64>)> = (0..tuples)
        .map(|mut idx| {
            let mut t = vec![0u64; k as usize];
            for slot in t.iter_mut().rev() {
                *slot = idx % n + 1;
                idx /= n;
            }
            let prod = t.iter().map(|&x| values[x as usize - 1].clone()).product();
            (prod, t)
        })
        .collect();
    keyed.sort_unstable();
    let solutions: u128 = keyed
        .chunk_by(|a, b| a.0 == b.0)
        .map(|g| (g.len() as u128).pow(2))
        .sum();
    if solutions > budget.enumeration_solutions as u128 {
        return Err(Error::Resource(format!(
            "{solutions} solutions exceed enumeration budget"
        )));
    }
    let mut out = Enumerated::default();
    for group in keyed.chunk_by(|a, b| a.0 == b.0) {
        let sorted: Vec<Vec<u64>> = group
            .iter()
            .map(|(_, t)| {
                let mut s = t.clone();
                s.sort_unstable();
                s
            })
            .collect();
        for (xi, (_, x)) in group.iter().enumerate() {
            let max_x = *x.iter().max().unwrap();
            let last_x = *x.last().unwrap();
            for (yi, (_, y)) in group.iter().enumerate() {
                out.total += 1;
                if sorted[xi] == sorted[yi] {
                    out.trivial += 1;
                    continue;
                }
                let max_y = *y.iter().max().unwrap();
                let last_y = *y.last().unwrap();
                if last_y == max_y && max_y == max_x && last_x == max_x {
                    out.r_count += 1;
                } else if last_y == max_y && max_y > max_x {
                    out.nprime_count += 1;
                }
            }
        }
    }
    Ok(out)
}

pub fn tally(profile: &PolyProfile, n: u64, k: u32) -> Result<SolutionTally> {
    tally_with(profile, n, k, &Budget::default())
}

/// Core counts always; `R` and `N'` only when enumeration fits the budget.
pub fn tally_with(profile: &PolyProfile, n: u64, k: u32, budget: &Budget) -> Result<SolutionTally> {
    let a_count = count_a_with(profile, n, k, budget)?;
    let trivial = trivial_count(n, k);
    if a_count < trivial {
        return Err(Error::Inconsistency(format!(
            "A = {a_count} below trivial count {trivial} at N = {n}, k = {k}"
        )));
    }
    let nontrivial = &a_count - &trivial;
    let mut t = SolutionTally {
        a_count,
        trivial,
        nontrivial,
        r_count: None,
        nprime_count: None,
        n,
        k,
    };
    match enumerate_solutions(profile, n, k, budget) {
        Ok(e) => {
            if BigUint::from(e.total) != t.a_count || BigUint::from(e.trivial) != t.trivial {
                return Err(Error::Inconsistency(format!(
                    "enumeration ({} solutions, {} trivial) disagrees with counting ({}, {})",
                    e.total, e.trivial, t.a_count, t.trivial
                )));
            }
            t.r_count = Some(BigUint::from(e.r_count));
            t.nprime_count = Some(BigUint::from(e.nprime_count));
            if t.recursion_inequality_holds() == Some(false) {
                return Err(Error::Inconsistency(format!(
                    "nontrivial {} exceeds k^2 R + 2k N' at N = {n}, k = {k}",
                    t.nontrivial
                )));
            }
        }
        Err(Error::Resource(_)) => {}
        Err(e) => return Err(e),
    }
    check_trivial_range(&t)?;
    Ok(t)
}

fn check_trivial_range(t: &SolutionTally) -> Result<()> {
    let k_fact = factorial(t.k);
    let lower: BigUint = &k_fact
        * (0..t.k as u64)
            .map(|i| BigUint::from(t.n.saturating_sub(i)))
            .product::<BigUint>();
    let upper = &k_fact * BigUint::from(t.n).pow(t.k);
    if t.trivial < lower || t.trivial > upper {
        return Err(Error::Inconsistency(format!(
            "trivial count {} outside [{lower}, {upper}]",
            t.trivial
        )));
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`, skipping non-positive `y`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `a / b` as `f64` for exact integers of any size.
pub fn ratio_f64(a: &BigUint, b: &BigUint) -> f64 {
    match (a.to_f64(), b.to_f64()) {
        (Some(x), Some(y)) if x.is_finite() && y.is_finite() => x / y,
        _ => {
            let shift = b.bits().saturating_sub(60);
            let (a, b) = (a >> shift, b >> shift);
            a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(1.0)
        }
    }
}
