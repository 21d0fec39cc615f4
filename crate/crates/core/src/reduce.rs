//! Fixed-order floating point reductions.
//!
//! Every sum that ends up in a reported number goes through [`pairwise_sum_by`]
//! so the result depends only on the data, never on how work was split
//! between threads.

const BASE: usize = 64;

/// Pairwise (cascade) summation of `f(0) + ... + f(n - 1)`.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        let len = hi - lo;
        if len <= BASE {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + len / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    rec(0, n, &f)
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}
