//! Exact arithmetic on real quadratic irrationals (a + b*sqrt(d))/c.
//!
//! Only what continued-fraction extraction needs: exact floor, reciprocal,
//! and integer subtraction. All decisions are integer comparisons; squaring
//! against isqrt bounds decides the position of b*sqrt(d) relative to any
//! integer (equality is impossible because d is not a perfect square).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    a: BigInt,
    b: BigInt,
    c: BigInt, // always > 0
    d: BigInt, // >= 2, not a perfect square
}

impl QuadSurd {
    pub fn new(p: i64, r: i64, d: i64, q: i64) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidQuadratic {
            p,
            r,
            d,
            q,
            reason: reason.to_string(),
        };
        if q == 0 {
            return Err(invalid("zero denominator"));
        }
        if r == 0 {
            return Err(invalid("r = 0 is rational; use the rational hook"));
        }
        if d < 2 {
            return Err(invalid("d must be at least 2"));
        }
        let d_big = BigInt::from(d);
        let root = d_big.sqrt();
        if &root * &root == d_big {
            return Err(invalid("d is a perfect square; the value is rational"));
        }
        let mut s = QuadSurd {
            a: BigInt::from(p),
            b: BigInt::from(r),
            c: BigInt::from(q),
            d: d_big,
        };
        s.normalize();
        Ok(s)
    }

    fn normalize(&mut self) {
        if self.c.is_negative() {
            self.a = -&self.a;
            self.b = -&self.b;
            self.c = -&self.c;
        }
        let g = self.a.gcd(&self.b).gcd(&self.c);
        if !g.is_zero() && g != BigInt::from(1) {
            self.a /= &g;
            self.b /= &g;
            self.c /= &g;
        }
    }

    /// Ordering of b*sqrt(d) against the integer m (never Equal).
    fn cmp_surd_part(&self, m: &BigInt) -> Ordering {
        let b = &self.b;
        if b.is_positive() {
            if m.is_negative() {
                return Ordering::Greater;
            }
            (b * b * &self.d).cmp(&(m * m))
        } else {
            // b < 0 so b*sqrt(d) < 0
            if !m.is_negative() {
                return Ordering::Less;
            }
            (m * m).cmp(&(b * b * &self.d))
        }
    }

    /// Exact floor of (a + b*sqrt(d))/c.
    pub fn floor(&self) -> BigInt {
        // integer bracket for b*sqrt(d): value in the open interval (t, t+1)
        let s = (&self.b * &self.b * &self.d).sqrt();
        let t = if self.b.is_positive() { s } else { -s - 1 };
        let f1 = (&self.a + &t).div_floor(&self.c);
        let f2 = (&self.a + &t + BigInt::from(1)).div_floor(&self.c);
        if f1 == f2 {
            return f1;
        }
        // candidates differ by one; decide f2 <= x exactly
        let m = &f2 * &self.c - &self.a;
        if self.cmp_surd_part(&m) == Ordering::Greater {
            f2
        } else {
            f1
        }
    }

    /// 1 / self, exact. self must be nonzero (always true: irrational).
    pub fn recip(&self) -> QuadSurd {
        let e = &self.a * &self.a - &self.b * &self.b * &self.d;
        debug_assert!(!e.is_zero());
        let mut out = QuadSurd {
            a: &self.c * &self.a,
            b: -(&self.c * &self.b),
            c: e,
            d: self.d.clone(),
        };
        out.normalize();
        out
    }

    pub fn sub_int(&self, n: &BigInt) -> QuadSurd {
        let mut out = QuadSurd {
            a: &self.a - n * &self.c,
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
        };
        out.normalize();
        out
    }

    /// The value reduced mod 1 (an irrational always lands strictly inside (0,1)).
    pub fn reduced_mod_one(&self) -> QuadSurd {
        self.sub_int(&self.floor())
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let c = self.c.to_f64().unwrap_or(f64::NAN);
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        (a + b * d.sqrt()) / c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_fraction_is_fixed_point() {
        // (sqrt(5) - 1)/2 = 1/(1 + (sqrt(5) - 1)/2)
        let x = QuadSurd::new(-1, 1, 5, 2).unwrap();
        assert_eq!(x.floor(), BigInt::zero());
        let inv = x.recip();
        assert_eq!(inv.floor(), BigInt::from(1));
        let next = inv.sub_int(&BigInt::from(1));
        assert_eq!(next, x);
    }

    #[test]
    fn floor_of_sqrt_two() {
        let x = QuadSurd::new(0, 1, 2, 1).unwrap();
        assert_eq!(x.floor(), BigInt::from(1));
        let neg = QuadSurd::new(0, -1, 2, 1).unwrap();
        assert_eq!(neg.floor(), BigInt::from(-2));
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(QuadSurd::new(1, 1, 4, 2).is_err()); // square d
        assert!(QuadSurd::new(1, 0, 5, 2).is_err()); // rational
        assert!(QuadSurd::new(1, 1, 5, 0).is_err()); // zero denominator
    }

    #[test]
    fn floor_matches_float_on_spot_checks() {
        for (p, r, d, q) in [(3, 2, 7, 5), (-4, 3, 11, 7), (10, -2, 3, 4), (0, 5, 13, 9)] {
            let x = QuadSurd::new(p, r, d, q).unwrap();
            let approx = x.to_f64().floor() as i64;
            assert_eq!(x.floor(), BigInt::from(approx), "({p}+{r}√{d})/{q}");
        }
    }
}
