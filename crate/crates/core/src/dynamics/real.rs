//! Lazily refined uniform reals and the exact test-hook inputs.
//!
//! A [`LazyUniformReal`] is a uniform sample from (0,1) represented by an
//! on-demand stream of random bits. After `P` bits with prefix value `k` the
//! real is known to lie in the open dyadic interval `(k/2^P, (k+1)/2^P)`;
//! endpoints are excluded by construction (conceptually a final 1-bit is
//! always appended, and the all-ones tail has probability zero). Orbit code
//! refines the bracket by drawing more bits and certifies every emitted
//! symbol against both endpoints, so refinement never changes a symbol that
//! was already produced.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bignat::Nat;
use crate::error::{Error, Result};

use super::surd::QuadSurd;

/// Word-aligned refinement chunk, in bits.
pub(crate) const REFINE_CHUNK_BITS: usize = 128;

/// A uniform random real in (0,1) given by deterministic lazy bit refinement.
#[derive(Clone, Debug)]
pub struct LazyUniformReal {
    seed: u64,
    rng: ChaCha8Rng,
    /// Bit i of the binary expansion is bit (63 - i%64) of `words[i/64]`.
    words: Vec<u64>,
    refined_len: usize,
}

impl LazyUniformReal {
    pub fn new(seed: u64) -> Self {
        LazyUniformReal {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            words: Vec::new(),
            refined_len: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of bits generated so far.
    pub fn refined_len(&self) -> usize {
        self.refined_len
    }

    /// Make at least `n` bits available.
    pub fn ensure_bits(&mut self, n: usize) {
        while self.refined_len < n {
            self.words.push(self.rng.next_u64());
            self.refined_len += 64;
        }
    }

    pub fn bit(&mut self, i: usize) -> u8 {
        self.ensure_bits(i + 1);
        ((self.words[i / 64] >> (63 - (i % 64))) & 1) as u8
    }

    /// The first `p` bits as an integer (the dyadic prefix `k`).
    pub fn prefix(&mut self, p: usize) -> BigUint {
        self.ensure_bits(p);
        let mut k = BigUint::zero();
        let full_words = p / 64;
        for w in 0..full_words {
            k = (k << 64) | BigUint::from(self.words[w]);
        }
        let rest = p % 64;
        if rest > 0 {
            k = (k << rest) | BigUint::from(self.words[full_words] >> (64 - rest));
        }
        k
    }

    /// Exact rational bounds implied by the first `p` bits:
    /// the real lies in the open interval (lo, hi).
    pub fn rational_bounds(&mut self, p: usize) -> (BigRational, BigRational) {
        let k = BigInt::from(self.prefix(p));
        let den = BigInt::one() << p;
        (
            BigRational::new(k.clone(), den.clone()),
            BigRational::new(k + 1, den),
        )
    }

    /// Word-aligned chunk of bits [start, start+len) as a `Nat`
    /// (earlier bits are more significant). Both arguments must be
    /// multiples of 64.
    pub(crate) fn aligned_chunk(&mut self, start: usize, len: usize) -> Nat {
        debug_assert!(start % 64 == 0 && len % 64 == 0);
        self.ensure_bits(start + len);
        let limbs: Vec<u64> = (start / 64..(start + len) / 64)
            .rev()
            .map(|w| self.words[w])
            .collect();
        Nat::from_limbs(limbs)
    }

    /// Bits [start, start+len) as an integer, len <= 128.
    pub(crate) fn window_u128(&mut self, start: usize, len: usize) -> u128 {
        debug_assert!(len <= 128);
        self.ensure_bits(start + len);
        let mut acc: u128 = 0;
        let mut got = 0;
        let mut w = start / 64;
        let mut offset = start % 64;
        while got < len {
            let take = (64 - offset).min(len - got);
            let word = self.words[w];
            let shifted = if take == 64 {
                word
            } else {
                (word >> (64 - offset - take)) & ((1u64 << take) - 1)
            };
            acc = (acc << take) | shifted as u128;
            got += take;
            w += 1;
            offset = 0;
        }
        acc
    }
}

/// A point of (0,1) fed to the orbit generators: either a lazily refined
/// uniform sample, or an exact rational / quadratic-irrational test hook.
#[derive(Clone, Debug)]
pub enum RealInput {
    Lazy(LazyUniformReal),
    Rational(BigRational),
    Quadratic(QuadSurd),
}

impl RealInput {
    pub fn seeded(seed: u64) -> Self {
        RealInput::Lazy(LazyUniformReal::new(seed))
    }

    /// Exact rational hook. Only the fractional part is kept: digit indexing
    /// starts at a_1, the integer part a_0 is discarded.
    pub fn rational(value: BigRational) -> Result<Self> {
        let frac = &value - value.floor();
        if frac.is_negative() || frac >= BigRational::one() {
            return Err(Error::InvalidRational {
                input: value.to_string(),
                reason: "fractional part out of range".into(),
            });
        }
        Ok(RealInput::Rational(frac))
    }

    /// Parse a test-hook rational given as "p/q" (or a plain integer "p").
    pub fn rational_str(s: &str) -> Result<Self> {
        Self::rational(parse_rational(s)?)
    }

    /// Exact quadratic-irrational hook (p + r*sqrt(d))/q, reduced mod 1.
    pub fn quadratic(p: i64, r: i64, d: i64, q: i64) -> Result<Self> {
        let surd = QuadSurd::new(p, r, d, q)?;
        Ok(RealInput::Quadratic(surd.reduced_mod_one()))
    }
}

/// Parse "p/q" (or "p") into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = |reason: &str| Error::InvalidRational {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num_s.parse().map_err(|_| bad("numerator is not an integer"))?;
    let den: BigInt = den_s.parse().map_err(|_| bad("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_replays_identical_bits() {
        let mut a = LazyUniformReal::new(42);
        let mut b = LazyUniformReal::new(42);
        for i in 0..128 {
            assert_eq!(a.bit(i), b.bit(i));
        }
    }

    #[test]
    fn distinct_seeds_differ_early() {
        // pinned after one run of the generator: seeds 1 and 2 disagree
        // within their first 64 bits
        let mut a = LazyUniformReal::new(1);
        let mut b = LazyUniformReal::new(2);
        let wa = a.window_u128(0, 64);
        let wb = b.window_u128(0, 64);
        assert_ne!(wa, wb);
    }

    #[test]
    fn bounds_nest_under_refinement() {
        for seed in [0u64, 7, 42, 123456] {
            let mut x = LazyUniformReal::new(seed);
            let (lo32, hi32) = x.rational_bounds(32);
            let (lo64, hi64) = x.rational_bounds(64);
            assert!(lo32 <= lo64);
            assert!(hi64 <= hi32);
            assert!(lo64 < hi64);
        }
    }

    #[test]
    fn window_matches_prefix() {
        let mut x = LazyUniformReal::new(9);
        let k = x.prefix(40);
        let w = x.window_u128(0, 40);
        assert_eq!(BigUint::from(w), k);
        // arbitrary offset window against bit-by-bit reconstruction
        let mut expect: u128 = 0;
        for i in 13..77 {
            expect = (expect << 1) | x.bit(i) as u128;
        }
        assert_eq!(x.window_u128(13, 64), expect);
    }

    #[test]
    fn rational_hook_takes_fractional_part() {
        let x = RealInput::rational_str("415/93").unwrap();
        match x {
            RealInput::Rational(r) => {
                assert_eq!(r, BigRational::new(43.into(), 93.into()));
            }
            _ => panic!("expected rational"),
        }
    }

    #[test]
    fn rational_parse_errors() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("3/4").is_ok());
        assert!(parse_rational("5").is_ok());
    }
}
