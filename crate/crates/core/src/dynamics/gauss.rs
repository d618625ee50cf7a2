//! Certified continued-fraction digits.
//!
//! For a lazily refined real the digits come from running the Euclidean
//! algorithm on both endpoints of the current dyadic bracket in lockstep.
//! With prefix `k` of `P` bits the endpoints are `k/2^P` and `(k+1)/2^P`;
//! their Euclid remainder sequences `r_n` and `s_n` share the quotient
//! history while the quotients agree, and a digit is certified exactly when
//! the next quotient agrees on both endpoints (the digit of every interior
//! point is then pinned, because the Gauss iterate is monotone on the
//! bracket). When the quotients disagree the real is refined by another bit
//! chunk, which maps onto the remainder state by
//!
//!   r' = r * 2^m + (s - r) * j,    s' = r' + (s - r)
//!
//! for a chunk of `m` bits with value `j` - no restart and no big-integer
//! division beyond the one Euclid step per digit.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::bignat::{div_rem_into, sub_mul_into, Nat};
use crate::error::{Error, Result};

use super::real::{LazyUniformReal, RealInput, REFINE_CHUNK_BITS};
use super::OrbitDigits;

/// Default refinement budget in bits for an orbit of length `n`.
pub fn default_bit_budget(n: usize) -> u64 {
    64 * n as u64 + 4096
}

/// First `n` continued-fraction digits a_1..a_n of `x`.
///
/// The integer part a_0 is discarded (rational hooks are reduced mod 1 on
/// construction). For rational inputs the expansion may terminate early, in
/// which case fewer than `n` digits are returned; `exact` is true in every
/// successful return.
pub fn gauss_digits(x: &mut RealInput, n: usize, budget: Option<u64>) -> Result<OrbitDigits> {
    let budget = budget.unwrap_or_else(|| default_bit_budget(n));
    let symbols = match x {
        RealInput::Lazy(real) => lazy_digits(real, n, budget)?,
        RealInput::Rational(r) => rational_digits(r, n)?,
        RealInput::Quadratic(s) => {
            let mut y = s.clone();
            let mut out = Vec::with_capacity(n);
            for step in 0..n {
                let inv = y.recip();
                let a = inv.floor();
                let digit = a.to_u64().ok_or(Error::DigitOverflow { step })?;
                debug_assert!(digit >= 1);
                out.push(digit);
                y = inv.sub_int(&a);
            }
            out
        }
    };
    Ok(OrbitDigits {
        values: symbols.clone(),
        symbols,
        exact: true,
    })
}

fn rational_digits(x: &BigRational, n: usize) -> Result<Vec<u64>> {
    let mut r_hi = x.denom().magnitude().clone();
    let mut r_lo = x.numer().magnitude().clone();
    let mut out = Vec::new();
    for step in 0..n {
        if r_lo.is_zero() {
            break; // terminating expansion
        }
        let (q, rem) = r_hi.div_rem(&r_lo);
        out.push(q.to_u64().ok_or(Error::DigitOverflow { step })?);
        r_hi = r_lo;
        r_lo = rem;
    }
    Ok(out)
}

/// Working-bracket precision for the block accelerator, in bits. Digits are
/// extracted from a truncated copy of the endpoint state and folded back
/// into the exact state in blocks, so the expensive full-precision numbers
/// are touched once per ~1000 digits instead of once per digit.
const BLOCK_TRUNC_BITS: usize = 4096;

/// A pair of endpoint Euclid states: `(r_hi, r_lo)` are consecutive
/// remainders for one bracket endpoint, `(s_hi, s_lo)` for the other. The
/// current iterate of any point strictly inside the bracket lies strictly
/// between `r_lo/r_hi` and `s_lo/s_hi`.
#[derive(Clone, Debug, Default)]
struct EndpointPair {
    r_hi: Nat,
    r_lo: Nat,
    s_hi: Nat,
    s_lo: Nat,
}

impl EndpointPair {
    /// One certified digit: the quotient must agree on both endpoint runs.
    /// Returns None when the bracket is too wide (or degenerate) to decide.
    fn try_digit(&mut self, r_next: &mut Nat, s_next: &mut Nat) -> Option<u64> {
        if self.r_lo.is_zero() || self.s_lo.is_zero() {
            return None;
        }
        let quotient = div_rem_into(&self.r_hi, &self.r_lo, r_next)?;
        if quotient == 0 {
            return None;
        }
        let certified = sub_mul_into(s_next, &self.s_hi, &self.s_lo, quotient)
            && s_next.cmp_nat(&self.s_lo) == Ordering::Less;
        if !certified {
            return None;
        }
        std::mem::swap(&mut self.r_hi, &mut self.r_lo);
        std::mem::swap(&mut self.r_lo, r_next);
        std::mem::swap(&mut self.s_hi, &mut self.s_lo);
        std::mem::swap(&mut self.s_lo, s_next);
        Some(quotient)
    }
}

/// Pending digits since the last synchronization of the exact state,
/// accumulated as continuants: with block digits b_1..b_k,
/// r_{n+k} = (-1)^(k+1) * (P_k * r_{n-1} - Q_k * r_n) where P and Q follow
/// the continuant recurrence X_{j+1} = b_{j+1} X_j + X_{j-1} from
/// (P_0, P_-1) = (0, 1) and (Q_0, Q_-1) = (1, 0).
#[derive(Clone, Debug)]
struct PendingBlock {
    p_prev: Nat,
    p_cur: Nat,
    q_prev: Nat,
    q_cur: Nat,
    count: usize,
}

impl PendingBlock {
    fn identity() -> Self {
        PendingBlock {
            p_prev: Nat::from_u64(1),
            p_cur: Nat::zero(),
            q_prev: Nat::zero(),
            q_cur: Nat::from_u64(1),
            count: 0,
        }
    }

    fn push(&mut self, digit: u64) {
        let mut p_next = self.p_cur.mul(&Nat::from_u64(digit));
        p_next.add_assign(&self.p_prev);
        self.p_prev = std::mem::replace(&mut self.p_cur, p_next);
        let mut q_next = self.q_cur.mul(&Nat::from_u64(digit));
        q_next.add_assign(&self.q_prev);
        self.q_prev = std::mem::replace(&mut self.q_cur, q_next);
        self.count += 1;
    }
}

struct IntervalEuclid<'a> {
    real: &'a mut LazyUniformReal,
    bits: usize,
    budget: u64,
    trunc_bits: usize,
    /// Exact state, synchronized every block.
    exact: EndpointPair,
    /// True while the r-side endpoint of `exact` is the smaller value of
    /// the bracket (the Gauss step reverses orientation every digit).
    r_is_lower: bool,
    /// Truncated working copy, Some while usable.
    working: Option<EndpointPair>,
    pending: PendingBlock,
    scratch_a: Nat,
    scratch_b: Nat,
    diff: Nat,
}

impl<'a> IntervalEuclid<'a> {
    fn new(real: &'a mut LazyUniformReal, budget: u64, trunc_bits: usize) -> Self {
        IntervalEuclid {
            real,
            bits: 0,
            budget,
            trunc_bits,
            exact: EndpointPair {
                r_hi: Nat::from_u64(1),
                r_lo: Nat::zero(),
                s_hi: Nat::from_u64(1),
                s_lo: Nat::from_u64(1),
            },
            r_is_lower: true,
            working: None,
            pending: PendingBlock::identity(),
            scratch_a: Nat::zero(),
            scratch_b: Nat::zero(),
            diff: Nat::zero(),
        }
    }

    /// Fold the pending digit block into the exact state.
    fn sync(&mut self) {
        let k = self.pending.count;
        if k == 0 {
            return;
        }
        let (new_r_hi, new_r_lo) = apply_block(&self.exact.r_hi, &self.exact.r_lo, &self.pending);
        let (new_s_hi, new_s_lo) = apply_block(&self.exact.s_hi, &self.exact.s_lo, &self.pending);
        self.exact.r_hi = new_r_hi;
        self.exact.r_lo = new_r_lo;
        self.exact.s_hi = new_s_hi;
        self.exact.s_lo = new_s_lo;
        if k % 2 == 1 {
            self.r_is_lower = !self.r_is_lower;
        }
        self.pending = PendingBlock::identity();
    }

    /// Rebuild the truncated working bracket from the exact state, rounding
    /// outward so the true iterate stays strictly inside it.
    fn refresh_working(&mut self) {
        let len = self
            .exact
            .r_hi
            .bit_len()
            .max(self.exact.s_hi.bit_len());
        let shift = len.saturating_sub(self.trunc_bits);
        let down = |n: &Nat| n.shr_bits(shift);
        let up = |n: &Nat| {
            let mut v = n.shr_bits(shift);
            v.add_assign(&Nat::from_u64(1));
            v
        };
        // lower endpoint value shrinks (numerator down, denominator up);
        // upper endpoint value grows (numerator up, denominator down)
        let working = if self.r_is_lower {
            EndpointPair {
                r_hi: up(&self.exact.r_hi),
                r_lo: down(&self.exact.r_lo),
                s_hi: down(&self.exact.s_hi),
                s_lo: up(&self.exact.s_lo),
            }
        } else {
            EndpointPair {
                r_hi: down(&self.exact.r_hi),
                r_lo: up(&self.exact.r_lo),
                s_hi: up(&self.exact.s_hi),
                s_lo: down(&self.exact.s_lo),
            }
        };
        self.working = Some(working);
    }

    fn refine(&mut self, step: usize) -> Result<()> {
        self.sync();
        self.working = None;
        // draw enough bits to fill a whole working bracket, so syncs and
        // refinements stay amortized over ~trunc_bits/3.4 digits
        let m = REFINE_CHUNK_BITS.max(self.trunc_bits / 64 * 64);
        if (self.bits + m) as u64 > self.budget {
            return Err(Error::RefinementBudgetExceeded {
                used: (self.bits + m) as u64,
                budget: self.budget,
                step,
            });
        }
        let j = self.real.aligned_chunk(self.bits, m);
        refine_pair(
            &mut self.exact.r_hi,
            &mut self.exact.s_hi,
            &j,
            m,
            &mut self.diff,
        );
        refine_pair(
            &mut self.exact.r_lo,
            &mut self.exact.s_lo,
            &j,
            m,
            &mut self.diff,
        );
        self.bits += m;
        Ok(())
    }

    fn next_digit(&mut self, step: usize) -> Result<u64> {
        loop {
            if self.working.is_none() {
                self.refresh_working();
            }
            if let Some(working) = self.working.as_mut() {
                if let Some(digit) =
                    working.try_digit(&mut self.scratch_a, &mut self.scratch_b)
                {
                    self.pending.push(digit);
                    return Ok(digit);
                }
            }
            // working bracket exhausted: fall back to one exact step
            self.sync();
            self.working = None;
            if let Some(digit) = self
                .exact
                .try_digit(&mut self.scratch_a, &mut self.scratch_b)
            {
                self.r_is_lower = !self.r_is_lower;
                return Ok(digit);
            }
            self.refine(step)?;
        }
    }
}

/// Evaluate the remainder pair after a digit block: the combination
/// P*hi - Q*lo (or its negation) with signs fixed by the block parity.
fn apply_block(hi: &Nat, lo: &Nat, block: &PendingBlock) -> (Nat, Nat) {
    let k = block.count;
    // index n+k-1 uses (P_{k-1}, Q_{k-1}) with sign (-1)^k,
    // index n+k uses (P_k, Q_k) with sign (-1)^(k+1)
    let combine = |p: &Nat, q: &Nat, negate: bool| -> Nat {
        let pu = p.mul(hi);
        let qv = q.mul(lo);
        let (mut a, b) = if negate { (qv, pu) } else { (pu, qv) };
        a.sub_assign(&b);
        a
    };
    let new_hi = combine(&block.p_prev, &block.q_prev, k % 2 == 1);
    let new_lo = combine(&block.p_cur, &block.q_cur, k % 2 == 0);
    (new_hi, new_lo)
}

fn lazy_digits(real: &mut LazyUniformReal, n: usize, budget: u64) -> Result<Vec<u64>> {
    lazy_digits_with_trunc(real, n, budget, BLOCK_TRUNC_BITS)
}

fn lazy_digits_with_trunc(
    real: &mut LazyUniformReal,
    n: usize,
    budget: u64,
    trunc_bits: usize,
) -> Result<Vec<u64>> {
    let mut state = IntervalEuclid::new(real, budget, trunc_bits);
    let mut out = Vec::with_capacity(n);
    for step in 0..n {
        out.push(state.next_digit(step)?);
    }
    Ok(out)
}

fn refine_pair(r: &mut Nat, s: &mut Nat, j: &Nat, m: usize, diff: &mut Nat) {
    let s_ge = s.cmp_nat(r) != Ordering::Less;
    if s_ge {
        diff.assign(s);
        diff.sub_assign(r);
    } else {
        diff.assign(r);
        diff.sub_assign(s);
    }
    r.shl_bits_assign(m);
    let t = diff.mul(j);
    if s_ge {
        r.add_assign(&t);
        s.assign(r);
        s.add_assign(diff);
    } else {
        r.sub_assign(&t);
        s.assign(r);
        s.sub_assign(diff);
    }
}

/// The rational [0; a_1, ..., a_k] determined by a digit word.
pub fn convergent(digits: &[u64]) -> BigRational {
    let mut value = BigRational::zero();
    for &a in digits.iter().rev() {
        value = (BigRational::from_integer(a.into()) + value).recip();
    }
    value
}

/// Endpoints of the continued-fraction cylinder {x : a_1..a_k(x) = digits},
/// returned in increasing order.
pub fn cylinder_interval(digits: &[u64]) -> (BigRational, BigRational) {
    debug_assert!(!digits.is_empty());
    let a = convergent(digits);
    let mut bumped = digits.to_vec();
    *bumped.last_mut().unwrap() += 1;
    let b = convergent(&bumped);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
