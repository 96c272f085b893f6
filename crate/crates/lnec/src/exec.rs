//! Index-space scan helpers for the brute-force enumerations, with both a
//! sequential path and (behind the `parallel` feature) a rayon path.
//!
//! Every scan runs over `0..count` and is deterministic: "first" always
//! means lowest index, regardless of how many threads participate. Callers
//! encode their search space (subsets, coefficient tuples, ...) as an index
//! and decode inside the closure; [`unrank_combination`] does the decoding
//! for fixed-size subsets in lexicographic order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Scans below this size stay sequential even with `parallel` enabled;
/// fork-join overhead dominates tiny index spaces.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: u64 = 4096;

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// The `rank`-th k-subset of `{0, .., n-1}` in lexicographic order.
pub fn unrank_combination(n: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut combo = Vec::with_capacity(k);
    let mut next = 0;
    for i in 0..k {
        for c in next..n {
            let rest = binomial((n - c - 1) as u64, (k - i - 1) as u64)
                .expect("combination rank fits in u64, so partial counts fit in u128");
            if (rank as u128) < rest {
                combo.push(c);
                next = c + 1;
                break;
            }
            rank -= rest as u64;
        }
    }
    combo
}

pub fn find_first_map_seq<R>(count: u64, f: impl Fn(u64) -> Option<R>) -> Option<R> {
    (0..count).find_map(f)
}

#[cfg(feature = "parallel")]
pub fn find_first_map_par<R: Send>(
    count: u64,
    f: impl Fn(u64) -> Option<R> + Sync + Send,
) -> Option<R> {
    (0..count).into_par_iter().find_map_first(f)
}

/// First `Some` over `0..count`, by index order.
pub fn find_first_map<R: Send>(
    count: u64,
    f: impl Fn(u64) -> Option<R> + Sync + Send,
) -> Option<R> {
    #[cfg(feature = "parallel")]
    if count >= PAR_THRESHOLD {
        return find_first_map_par(count, f);
    }
    find_first_map_seq(count, f)
}

pub fn filter_map_collect_seq<R>(count: u64, f: impl Fn(u64) -> Option<R>) -> Vec<R> {
    (0..count).filter_map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn filter_map_collect_par<R: Send>(
    count: u64,
    f: impl Fn(u64) -> Option<R> + Sync + Send,
) -> Vec<R> {
    (0..count).into_par_iter().filter_map(f).collect()
}

/// All `Some` results over `0..count`, in index order.
pub fn filter_map_collect<R: Send>(
    count: u64,
    f: impl Fn(u64) -> Option<R> + Sync + Send,
) -> Vec<R> {
    #[cfg(feature = "parallel")]
    if count >= PAR_THRESHOLD {
        return filter_map_collect_par(count, f);
    }
    filter_map_collect_seq(count, f)
}

pub fn min_map_seq<R: Ord>(count: u64, f: impl Fn(u64) -> Option<R>) -> Option<R> {
    (0..count).filter_map(f).min()
}

#[cfg(feature = "parallel")]
pub fn min_map_par<R: Ord + Send>(
    count: u64,
    f: impl Fn(u64) -> Option<R> + Sync + Send,
) -> Option<R> {
    (0..count).into_par_iter().filter_map(f).min()
}

/// Minimum `Some` result over `0..count`.
pub fn min_map<R: Ord + Send>(count: u64, f: impl Fn(u64) -> Option<R> + Sync + Send) -> Option<R> {
    #[cfg(feature = "parallel")]
    if count >= PAR_THRESHOLD {
        return min_map_par(count, f);
    }
    min_map_seq(count, f)
}

/// True iff `f` holds on every index.
pub fn all_of(count: u64, f: impl Fn(u64) -> bool + Sync + Send) -> bool {
    #[cfg(feature = "parallel")]
    if count >= PAR_THRESHOLD {
        return (0..count).into_par_iter().all(f);
    }
    (0..count).all(f)
}
