//! Sorted multiplicative convolution of multiplicity tables.
//!
//! A table is a `Vec<(key, multiplicity)>` sorted by key with unique keys.
//! Convolving a table with the base table `{P(x) : x in [N]}` is split into
//! disjoint key ranges; each range is generated independently (for every
//! base value `b` the matching left keys form a contiguous slice), sorted,
//! and run-length encoded. Ranges are processed in parallel and returned in
//! key order, so every result is independent of the thread count.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

/// Product key: a positive integer with exact multiplication.
pub trait ProductKey: Ord + Clone + Send + Sync + std::fmt::Debug {
    /// Approximate in-memory size of a `(key, u64)` entry.
    const ENTRY_BYTES: usize;
    fn from_big(v: &BigUint) -> Self;
    fn to_big(&self) -> BigUint;
    fn times(&self, o: &Self) -> Self;
}

impl ProductKey for u64 {
    const ENTRY_BYTES: usize = 16;
    fn from_big(v: &BigUint) -> Self {
        v.to_u64().expect("key fits in u64")
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
}

impl ProductKey for u128 {
    const ENTRY_BYTES: usize = 32;
    fn from_big(v: &BigUint) -> Self {
        v.to_u128().expect("key fits in u128")
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
}

impl ProductKey for BigUint {
    const ENTRY_BYTES: usize = 64;
    fn from_big(v: &BigUint) -> Self {
        v.clone()
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
}

pub type Table<K> = Vec<(K, u64)>;

/// Sorts by key and merges equal keys.
pub fn run_length<K: ProductKey>(mut v: Vec<(K, u64)>) -> Table<K> {
    v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut out: Table<K> = Vec::with_capacity(v.len());
    for (k, m) in v {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += m,
            _ => out.push((k, m)),
        }
    }
    out
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SAMPLES_PER_CHUNK: usize = 64;

/// Number of `(left, base)` pairs the convolution visits.
pub fn pair_count(left_len: usize, base_len: usize, symmetric: bool) -> u128 {
    if symmetric {
        base_len as u128 * (base_len as u128 + 1) / 2
    } else {
        left_len as u128 * base_len as u128
    }
}

/// Chunk boundaries from quantiles of a fixed pseudo-random sample of products.
fn plan<K: ProductKey>(
    left: &[(K, u64)],
    base: &[(K, u64)],
    symmetric: bool,
    chunk_pairs: usize,
) -> Vec<K> {
    let total = pair_count(left.len(), base.len(), symmetric);
    let chunks = total.div_ceil(chunk_pairs.max(1) as u128) as usize;
    if chunks <= 1 {
        return Vec::new();
    }
    let samples = chunks * SAMPLES_PER_CHUNK;
    let mut state = 0x5EED_0FC0_FFEE_u64;
    let mut keys: Vec<K> = (0..samples)
        .map(|_| {
            let mut j = (splitmix(&mut state) % base.len() as u64) as usize;
            let mut i = (splitmix(&mut state) % left.len() as u64) as usize;
            if symmetric && j < i {
                std::mem::swap(&mut i, &mut j);
            }
            left[i].0.times(&base[j].0)
        })
        .collect();
    keys.sort_unstable();
    let mut bounds: Vec<K> = (1..chunks)
        .map(|c| keys[c * samples / chunks].clone())
        .collect();
    bounds.dedup();
    bounds
}

/// All products with key in `[lo, hi)`; `None` means unbounded.
fn chunk<K: ProductKey>(
    left: &[(K, u64)],
    base: &[(K, u64)],
    symmetric: bool,
    lo: Option<&K>,
    hi: Option<&K>,
) -> Table<K> {
    let mut buf: Vec<(K, u64)> = Vec::new();
    for (i, (b, mb)) in base.iter().enumerate() {
        let start = lo.map_or(0, |lo| left.partition_point(|(w, _)| b.times(w) < *lo));
        let end = hi.map_or(left.len(), |hi| {
            left.partition_point(|(w, _)| b.times(w) < *hi)
        });
        let start = if symmetric { start.max(i) } else { start };
        for (j, (w, mw)) in left.iter().enumerate().take(end).skip(start) {
            let weight = if symmetric && j != i {
                2 * mb * mw
            } else {
                mb * mw
            };
            buf.push((b.times(w), weight));
        }
    }
    run_length(buf)
}

/// Convolves `left` with `base` range by range, applying `f` to each sorted
/// chunk. Results come back in ascending key order. With `symmetric`,
/// `left` must equal `base` and only the upper triangle is generated.
pub fn convolve_map<K, R, F>(
    left: &[(K, u64)],
    base: &[(K, u64)],
    symmetric: bool,
    chunk_pairs: usize,
    f: F,
) -> Vec<R>
where
    K: ProductKey,
    R: Send,
    F: Fn(Table<K>) -> R + Sync,
{
    if left.is_empty() || base.is_empty() {
        return Vec::new();
    }
    debug_assert!(!symmetric || left == base);
    let bounds = plan(left, base, symmetric, chunk_pairs);
    let ranges: Vec<(Option<&K>, Option<&K>)> = (0..=bounds.len())
        .map(|c| {
            let lo = if c == 0 { None } else { Some(&bounds[c - 1]) };
            let hi = bounds.get(c);
            (lo, hi)
        })
        .collect();
    ranges
        .into_par_iter()
        .map(|(lo, hi)| f(chunk(left, base, symmetric, lo, hi)))
        .collect()
}

/// Full convolution as one sorted table.
pub fn convolve<K: ProductKey>(
    left: &[(K, u64)],
    base: &[(K, u64)],
    chunk_pairs: usize,
) -> Table<K> {
    convolve_map(left, base, false, chunk_pairs, |c| c).concat()
}

/// Sum of `m(v)^2` over a table.
pub fn sum_squares<K>(t: &[(K, u64)]) -> BigUint {
    let s: u128 = t.iter().map(|(_, m)| *m as u128 * *m as u128).sum();
    BigUint::from(s)
}

/// `sum_v a(v) b(v)` where `b` is sorted; `a` is a sorted chunk.
pub fn inner_product<K: ProductKey>(a: &[(K, u64)], b: &[(K, u64)]) -> u128 {
    let (first, last) = match (a.first(), a.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return 0,
    };
    let start = b.partition_point(|(k, _)| *k < first.0);
    let end = b.partition_point(|(k, _)| *k <= last.0);
    let b = &b[start..end];
    let (mut i, mut j, mut acc) = (0, 0, 0u128);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 as u128 * b[j].1 as u128;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn naive(left: &[(u64, u64)], base: &[(u64, u64)]) -> Vec<(u64, u64)> {
        let mut m = BTreeMap::new();
        for (a, ma) in left {
            for (b, mb) in base {
                *m.entry(a * b).or_insert(0) += ma * mb;
            }
        }
        m.into_iter().collect()
    }

    fn table(vals: &[u64]) -> Vec<(u64, u64)> {
        run_length(vals.iter().map(|&v| (v, 1)).collect())
    }

    #[test]
    fn chunked_matches_naive_for_any_chunk_size() {
        let base = table(&(1..=40u64).map(|x| x * x + x).collect::<Vec<_>>());
        let left = naive(&base, &base);
        let want = naive(&left, &base);
        for chunk_pairs in [1usize, 7, 100, 5000, usize::MAX] {
            assert_eq!(
                convolve(&left, &base, chunk_pairs),
                want,
                "chunk {chunk_pairs}"
            );
        }
    }

    #[test]
    fn symmetric_triangle_matches_full_square() {
        let base = table(&[2, 6, 6, 12, 20, 30, 42, 30, 2]);
        let want = naive(&base, &base);
        for chunk_pairs in [1usize, 3, 1000] {
            let got = convolve_map(&base, &base, true, chunk_pairs, |c| c).concat();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn inner_product_on_chunks() {
        let a = table(&[1, 2, 2, 5, 9]);
        let b = table(&[2, 3, 5, 5, 5, 9, 11]);
        assert_eq!(inner_product(&a, &b), 2 + 3 + 1);
        assert_eq!(inner_product::<u64>(&[], &b), 0);
    }
}
