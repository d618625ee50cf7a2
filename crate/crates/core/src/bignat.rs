//! Minimal unsigned big integer with the fused in-place operations the orbit
//! Euclid loop needs. `num-bigint` allocates a fresh quotient and remainder on
//! every division; the digit loop below runs tens of millions of divisions
//! whose quotients are tiny, so we keep a handful of reusable limb buffers and
//! a division that subtracts `q * divisor` in a single pass.
//!
//! Limbs are little-endian `u64` with no trailing zero limbs.

use std::cmp::Ordering;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Nat {
    limbs: Vec<u64>,
}

impl Nat {
    pub fn zero() -> Self {
        Nat { limbs: Vec::new() }
    }

    pub fn from_u64(v: u64) -> Self {
        let mut n = Nat::zero();
        if v != 0 {
            n.limbs.push(v);
        }
        n
    }

    /// Little-endian limbs; trailing zeros are trimmed.
    pub fn from_limbs(limbs: Vec<u64>) -> Self {
        let mut n = Nat { limbs };
        n.normalize();
        n
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn bit_len(&self) -> usize {
        match self.limbs.last() {
            None => 0,
            Some(&hi) => self.limbs.len() * 64 - hi.leading_zeros() as usize,
        }
    }

    fn normalize(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    pub fn set_zero(&mut self) {
        self.limbs.clear();
    }

    pub fn assign(&mut self, other: &Nat) {
        self.limbs.clear();
        self.limbs.extend_from_slice(&other.limbs);
    }

    pub fn cmp_nat(&self, other: &Nat) -> Ordering {
        match self.limbs.len().cmp(&other.limbs.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in (0..self.limbs.len()).rev() {
            match self.limbs[i].cmp(&other.limbs[i]) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// self <<= m
    pub fn shl_bits_assign(&mut self, m: usize) {
        if self.is_zero() || m == 0 {
            return;
        }
        let words = m / 64;
        let bits = m % 64;
        let old_len = self.limbs.len();
        self.limbs.resize(old_len + words + 1, 0);
        // move from the top down so nothing is clobbered
        for i in (0..old_len).rev() {
            let v = self.limbs[i];
            let lo = if bits == 0 { v } else { v << bits };
            let hi = if bits == 0 { 0 } else { v >> (64 - bits) };
            self.limbs[i + words + 1] |= hi;
            self.limbs[i + words] = lo;
        }
        for limb in self.limbs.iter_mut().take(words) {
            *limb = 0;
        }
        self.normalize();
    }

    pub fn add_assign(&mut self, other: &Nat) {
        if self.limbs.len() < other.limbs.len() {
            self.limbs.resize(other.limbs.len(), 0);
        }
        let mut carry = false;
        for i in 0..other.limbs.len() {
            let (s1, c1) = self.limbs[i].overflowing_add(other.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            self.limbs[i] = s2;
            carry = c1 || c2;
        }
        let mut i = other.limbs.len();
        while carry {
            if i == self.limbs.len() {
                self.limbs.push(1);
                carry = false;
            } else {
                let (s, c) = self.limbs[i].overflowing_add(1);
                self.limbs[i] = s;
                carry = c;
                i += 1;
            }
        }
    }

    /// self -= other; panics if the result would be negative.
    pub fn sub_assign(&mut self, other: &Nat) {
        let ok = self.try_sub_assign(other);
        debug_assert!(ok, "Nat::sub_assign underflow");
        if !ok {
            panic!("Nat::sub_assign underflow");
        }
    }

    /// self -= other; returns false (leaving self unspecified) on underflow.
    pub fn try_sub_assign(&mut self, other: &Nat) -> bool {
        if self.limbs.len() < other.limbs.len() {
            return false;
        }
        let mut borrow = false;
        for i in 0..other.limbs.len() {
            let (d1, b1) = self.limbs[i].overflowing_sub(other.limbs[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            self.limbs[i] = d2;
            borrow = b1 || b2;
        }
        let mut i = other.limbs.len();
        while borrow && i < self.limbs.len() {
            let (d, b) = self.limbs[i].overflowing_sub(1);
            self.limbs[i] = d;
            borrow = b;
            i += 1;
        }
        if borrow {
            return false;
        }
        self.normalize();
        true
    }

    /// value >> shift, as a new Nat.
    pub fn shr_bits(&self, shift: usize) -> Nat {
        if shift == 0 {
            return self.clone();
        }
        if shift >= self.bit_len() {
            return Nat::zero();
        }
        let words = shift / 64;
        let bits = shift % 64;
        let mut out = Vec::with_capacity(self.limbs.len() - words);
        if bits == 0 {
            out.extend_from_slice(&self.limbs[words..]);
        } else {
            for i in words..self.limbs.len() {
                let lo = self.limbs[i] >> bits;
                let hi = if i + 1 < self.limbs.len() {
                    self.limbs[i + 1] << (64 - bits)
                } else {
                    0
                };
                out.push(lo | hi);
            }
        }
        Nat::from_limbs(out)
    }

    /// Reserve space without changing the value.
    fn fill_zero(&mut self, len: usize) {
        self.limbs.clear();
        self.limbs.resize(len, 0);
    }

    /// Schoolbook product. Only used on the cold refinement path.
    pub fn mul(&self, other: &Nat) -> Nat {
        if self.is_zero() || other.is_zero() {
            return Nat::zero();
        }
        let mut out = vec![0u64; self.limbs.len() + other.limbs.len()];
        for (i, &a) in self.limbs.iter().enumerate() {
            let mut carry: u64 = 0;
            for (j, &b) in other.limbs.iter().enumerate() {
                let t = a as u128 * b as u128 + out[i + j] as u128 + carry as u128;
                out[i + j] = t as u64;
                carry = (t >> 64) as u64;
            }
            out[i + other.limbs.len()] = carry;
        }
        Nat::from_limbs(out)
    }

    /// value >> shift, which the caller guarantees fits in 128 bits.
    fn shr_to_u128(&self, shift: usize) -> u128 {
        debug_assert!(self.bit_len() <= shift + 128);
        let word = shift / 64;
        let bits = shift % 64;
        let get = |i: usize| -> u64 { self.limbs.get(i).copied().unwrap_or(0) };
        let w0 = get(word);
        let w1 = get(word + 1);
        let w2 = get(word + 2);
        if bits == 0 {
            (w1 as u128) << 64 | w0 as u128
        } else {
            let lo = (w0 >> bits) | (w1 << (64 - bits));
            let hi = (w1 >> bits) | (w2 << (64 - bits));
            (hi as u128) << 64 | lo as u128
        }
    }

    fn to_u128(&self) -> u128 {
        debug_assert!(self.bit_len() <= 128);
        let get = |i: usize| -> u64 { self.limbs.get(i).copied().unwrap_or(0) };
        (get(1) as u128) << 64 | get(0) as u128
    }

    #[cfg(test)]
    pub fn to_biguint(&self) -> num_bigint::BigUint {
        let bytes: Vec<u8> = self
            .limbs
            .iter()
            .flat_map(|l| l.to_le_bytes())
            .collect();
        num_bigint::BigUint::from_bytes_le(&bytes)
    }

    #[cfg(test)]
    pub fn from_biguint(v: &num_bigint::BigUint) -> Self {
        Nat::from_limbs(v.to_u64_digits())
    }
}

/// dest = num - den * m in one fused pass; returns false on underflow
/// (dest is then unspecified).
pub(crate) fn sub_mul_into(dest: &mut Nat, num: &Nat, den: &Nat, m: u64) -> bool {
    if m == 0 || den.is_zero() {
        dest.assign(num);
        return true;
    }
    let nlen = num.limbs.len();
    let dlen = den.limbs.len();
    if nlen < dlen {
        return false;
    }
    dest.fill_zero(nlen);
    let mut carry: u64 = 0;
    let mut borrow: u64 = 0;
    // product-and-subtract over den's span, without bounds checks; the
    // wrapping ops never actually wrap (e*m + carry < 2^128) and the borrow
    // is read off the high half of the 128-bit difference
    for ((d, &n), &e) in dest.limbs[..dlen]
        .iter_mut()
        .zip(&num.limbs[..dlen])
        .zip(&den.limbs[..dlen])
    {
        let prod = (e as u128)
            .wrapping_mul(m as u128)
            .wrapping_add(carry as u128);
        let lo = prod as u64;
        carry = (prod >> 64) as u64;
        let diff = (n as u128)
            .wrapping_sub(lo as u128)
            .wrapping_sub(borrow as u128);
        *d = diff as u64;
        borrow = (diff >> 127) as u64;
    }
    // propagate the leftover multiply carry and borrow through num's tail
    let mut i = dlen;
    while i < nlen && (carry != 0 || borrow != 0) {
        let diff = (num.limbs[i] as u128)
            .wrapping_sub(carry as u128)
            .wrapping_sub(borrow as u128);
        dest.limbs[i] = diff as u64;
        carry = 0;
        borrow = (diff >> 127) as u64;
        i += 1;
    }
    if i < nlen {
        dest.limbs[i..].copy_from_slice(&num.limbs[i..]);
    }
    if carry != 0 || borrow != 0 {
        return false;
    }
    dest.normalize();
    true
}

/// Computes `q = floor(num / den)` and writes `num - q * den` into `rem`.
/// `den` must be nonzero. Returns `None` when the quotient does not fit in a
/// `u64` (the caller treats that as a pathological orbit).
pub(crate) fn div_rem_into(num: &Nat, den: &Nat, rem: &mut Nat) -> Option<u64> {
    debug_assert!(!den.is_zero());
    if num.cmp_nat(den) == Ordering::Less {
        rem.assign(num);
        return Some(0);
    }
    let shift = num.bit_len() - den.bit_len();
    if shift > 63 {
        return None;
    }
    if num.bit_len() <= 128 {
        let n = num.to_u128();
        let d = den.to_u128();
        let q = n / d;
        let r = n % d;
        rem.set_zero();
        if r != 0 {
            rem.limbs.push(r as u64);
            if r >> 64 != 0 {
                rem.limbs.push((r >> 64) as u64);
            }
        }
        return Some(q as u64);
    }
    // Underestimate from aligned top bits: x has 127 bits, y has 127 - shift,
    // so x/(y+1) is below the true quotient by at most a couple of units.
    let t = num.bit_len() - 127;
    let y = den.shr_to_u128(t);
    let x = num.shr_to_u128(t);
    let mut q = (x / (y + 1)) as u64;
    if !sub_mul_into(rem, num, den, q) {
        // cannot happen: q underestimates; keep a safe fallback anyway
        rem.assign(num);
        q = 0;
    }
    let mut guard = 0;
    while rem.cmp_nat(den) != Ordering::Less {
        rem.sub_assign(den);
        q = q.checked_add(1)?;
        guard += 1;
        debug_assert!(guard < 8, "division estimate off by more than expected");
        if guard > 64 {
            return None;
        }
    }
    Some(q)
}
