//! Fixtures shared by the criterion benches.

use hecke_loops::random;
use hecke_loops::{canonicalize, ConjClass, Sl2};

/// Seeded words of length at most `max_len`.
pub fn matrices(n: usize, max_len: usize) -> Vec<Sl2> {
    random::corpus(0xbe_7c4, n, max_len)
}

pub fn classes(n: usize, max_len: usize) -> Vec<ConjClass> {
    matrices(n, max_len).iter().map(canonicalize).collect()
}
