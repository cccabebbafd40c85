//! Reproducible random corpora.
//!
//! Every stream is ChaCha20 seeded through `SeedableRng::seed_from_u64`, so a
//! `(seed, length)` pair names the same matrices on every platform.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::sl2::Sl2;

pub type Rng64 = ChaCha20Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Product of `1..=max_len` letters drawn uniformly from `{S, T, T^-1}`.
pub fn random_word<R: Rng>(rng: &mut R, max_len: usize) -> Sl2 {
    let len = rng.gen_range(1..=max_len.max(1));
    let s = Sl2::s();
    let t = Sl2::t();
    let ti = t.inverse();
    let mut m = Sl2::identity();
    for _ in 0..len {
        m = match rng.gen_range(0..3) {
            0 => &m * &s,
            1 => &m * &t,
            _ => &m * &ti,
        };
    }
    m
}

/// `n` words of length at most `max_len`.
pub fn corpus(seed: u64, n: usize, max_len: usize) -> Vec<Sl2> {
    let mut r = rng(seed);
    (0..n).map(|_| random_word(&mut r, max_len)).collect()
}

/// Random word whose absolute trace exceeds 2.
pub fn random_hyperbolic<R: Rng>(rng: &mut R, max_len: usize) -> Sl2 {
    let two = BigInt::from(2);
    loop {
        let m = random_word(rng, max_len);
        let t = m.trace();
        if t > two || t < -&two {
            return m;
        }
    }
}
