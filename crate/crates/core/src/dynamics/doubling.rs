//! Doubling-map orbits with the reciprocal-floor observable.
//!
//! The shift symbols are the binary digits of the sample itself. The
//! observable floor(1/{2^n x}) is certified from a bit window starting at
//! position n: with `m` window bits of value `k` the fractional part lies in
//! the open interval (k/2^m, (k+1)/2^m), so the floor is pinned as soon as
//! no integer separates 2^m/(k+1) from 2^m/k.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::gauss::default_bit_budget;
use super::real::RealInput;
use super::OrbitDigits;

/// Binary-shift orbit of length `n`: symbols are the bits b_0..b_{n-1} of x
/// and values are floor(1/{2^k x}) for k = 0..n-1, certified exactly.
///
/// The value partition (level sets of the reciprocal floor) is finer than the
/// binary coding partition; symbol-indexed observables such as the half-
/// interval indicator are functions of the symbol alone.
pub fn doubling_orbit(x: &mut RealInput, n: usize, budget: Option<u64>) -> Result<OrbitDigits> {
    let budget = budget.unwrap_or_else(|| default_bit_budget(n));
    match x {
        RealInput::Lazy(real) => {
            let mut symbols = Vec::with_capacity(n);
            let mut values = Vec::with_capacity(n);
            for step in 0..n {
                symbols.push(real.bit(step) as u64);
                values.push(certified_floor(real, step, budget)?);
            }
            Ok(OrbitDigits {
                symbols,
                values,
                exact: true,
            })
        }
        RealInput::Rational(r) => rational_orbit(r, n),
        RealInput::Quadratic(_) => Err(Error::InvalidConfig(
            "doubling orbits support seeded and rational inputs only".into(),
        )),
    }
}

fn certified_floor(
    real: &mut super::real::LazyUniformReal,
    start: usize,
    budget: u64,
) -> Result<u64> {
    // u128 fast path for windows up to 96 bits
    let mut m = 16usize;
    while m <= 96 {
        if (start + m) as u64 > budget {
            return Err(Error::RefinementBudgetExceeded {
                used: (start + m) as u64,
                budget,
                step: start,
            });
        }
        let k = real.window_u128(start, m);
        if k != 0 {
            let pow = 1u128 << m;
            let v = pow / (k + 1);
            if pow <= (v + 1) * k {
                return v.to_u64().ok_or(Error::DigitOverflow { step: start });
            }
        }
        m *= 2;
    }
    // fall back to arbitrary precision; values this large are astronomically
    // rare for random samples but the certification stays exact
    let mut m = 128usize;
    loop {
        if (start + m) as u64 > budget {
            return Err(Error::RefinementBudgetExceeded {
                used: (start + m) as u64,
                budget,
                step: start,
            });
        }
        real.ensure_bits(start + m);
        let mut k = BigUint::zero();
        for i in start..start + m {
            k = (k << 1u8) | BigUint::from(real.bit(i));
        }
        if !k.is_zero() {
            let pow = BigUint::one() << m;
            let v = &pow / (&k + 1u32);
            if pow <= (&v + 1u32) * &k {
                return v.to_u64().ok_or(Error::DigitOverflow { step: start });
            }
        }
        m *= 2;
    }
}

fn rational_orbit(x: &BigRational, n: usize) -> Result<OrbitDigits> {
    let half = BigRational::new(1.into(), 2.into());
    let one = BigRational::one();
    let mut y = x.clone();
    let mut symbols = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for step in 0..n {
        if y.is_zero() {
            return Err(Error::RationalOrbitHitZero { step });
        }
        symbols.push(u64::from(y >= half));
        let v = y.denom().div_floor(y.numer());
        values.push(v.to_u64().ok_or(Error::DigitOverflow { step })?);
        y = &y + &y;
        if y >= one {
            y -= &one;
        }
    }
    Ok(OrbitDigits {
        symbols,
        values,
        exact: true,
    })
}
