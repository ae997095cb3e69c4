//! Exact comparison of objective values of the form `u − λ·d` where `u` and
//! `d` are ratios of pair counts and `λ` is an arbitrary finite `f64`.
//!
//! Every finite `f64` is a dyadic rational `m·2^e`, so these comparisons can
//! be carried out in integer arithmetic. The fast path uses checked `i128`;
//! anything that would overflow is redone with arbitrary precision.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// A rational `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };

    pub fn new(num: i128, den: i128) -> Frac {
        debug_assert!(den > 0, "non-positive denominator {den}");
        Frac { num, den }
    }

    pub fn from_counts(num: u128, den: u128) -> Frac {
        Frac::new(num as i128, den as i128)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self − other`; `None` on overflow.
    pub fn checked_sub(self, other: Frac) -> Option<Frac> {
        if self.den == other.den {
            return Some(Frac::new(self.num.checked_sub(other.num)?, self.den));
        }
        let a = self.num.checked_mul(other.den)?;
        let b = other.num.checked_mul(self.den)?;
        Some(Frac::new(a.checked_sub(b)?, self.den.checked_mul(other.den)?))
    }

    pub fn abs(self) -> Frac {
        Frac::new(self.num.abs(), self.den)
    }

    /// `|self − other|`, reduced.
    pub fn abs_diff(self, other: Frac) -> Frac {
        match self.checked_sub(other) {
            Some(d) => d.abs().reduced(),
            None => {
                let (n, d) = big_sub(self, other);
                let g = num_integer::Integer::gcd(&n, &d);
                let n: BigInt = n.abs() / &g;
                let d: BigInt = d / g;
                Frac::new(
                    i128::try_from(n).expect("reduced disparity fits i128"),
                    i128::try_from(d).expect("reduced disparity fits i128"),
                )
            }
        }
    }

    /// `self − other`, reduced only when the unreduced form would overflow.
    pub(crate) fn diff(self, other: Frac) -> Frac {
        self.checked_sub(other).unwrap_or_else(|| self - other)
    }

    pub fn reduced(self) -> Frac {
        let g = num_integer::gcd(self.num, self.den);
        if g <= 1 {
            self
        } else {
            Frac::new(self.num / g, self.den / g)
        }
    }

    pub fn exact_cmp(&self, other: &Frac) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => (BigInt::from(self.num) * other.den).cmp(&(BigInt::from(other.num) * self.den)),
        }
    }
}

impl std::ops::Sub for Frac {
    type Output = Frac;

    /// `self − other`, reduced.
    fn sub(self, other: Frac) -> Frac {
        match self.checked_sub(other) {
            Some(d) => d.reduced(),
            None => {
                let (n, d) = big_sub(self, other);
                let g = num_integer::Integer::gcd(&n, &d);
                Frac::new(
                    i128::try_from(n / &g).expect("reduced difference fits i128"),
                    i128::try_from(d / g).expect("reduced difference fits i128"),
                )
            }
        }
    }
}

fn big_sub(a: Frac, b: Frac) -> (BigInt, BigInt) {
    let n = BigInt::from(a.num) * b.den - BigInt::from(b.num) * a.den;
    (n, BigInt::from(a.den) * b.den)
}

/// `λ = mantissa · 2^exponent` with `mantissa ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda {
    value: f64,
    mantissa: i128,
    exponent: i32,
}

impl Lambda {
    /// Decomposes a finite, non-negative `λ`.
    pub fn new(value: f64) -> Option<Lambda> {
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        if value == 0.0 {
            return Some(Lambda {
                value: 0.0,
                mantissa: 0,
                exponent: 0,
            });
        }
        let bits = value.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut m, mut e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let tz = m.trailing_zeros();
        m >>= tz;
        e += tz as i32;
        Some(Lambda {
            value,
            mantissa: m as i128,
            exponent: e,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }
}

/// An objective value `utility − λ·disparity` kept in exact form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub utility: Frac,
    pub disparity: Frac,
}

impl Score {
    pub fn new(utility: Frac, disparity: Frac) -> Score {
        Score { utility, disparity }
    }

    pub fn value(&self, lambda: f64) -> f64 {
        self.utility.to_f64() - lambda * self.disparity.to_f64()
    }

    /// Exact comparison of `self` and `other` at the given `λ`.
    pub fn cmp_at(&self, other: &Score, lambda: &Lambda) -> Ordering {
        if let Some(o) = float_cmp(self, other, lambda) {
            return o;
        }
        fast_cmp(self, other, lambda).unwrap_or_else(|| big_cmp(self, other, lambda))
    }
}

/// The sign from `f64` arithmetic when it is far outside the rounding error.
fn float_cmp(s1: &Score, s2: &Score, lambda: &Lambda) -> Option<Ordering> {
    let l = lambda.value;
    let (u1, u2) = (s1.utility.to_f64(), s2.utility.to_f64());
    let (d1, d2) = (s1.disparity.to_f64(), s2.disparity.to_f64());
    let diff = (u1 - u2) - l * (d1 - d2);
    let scale = u1.abs() + u2.abs() + l * (d1.abs() + d2.abs());
    if !diff.is_finite() || !scale.is_finite() || diff.abs() <= 1e-12 * scale {
        return None;
    }
    Some(if diff > 0.0 { Ordering::Greater } else { Ordering::Less })
}

/// Sign of `(u1 − u2) − λ(d1 − d2)` using `i128`, or `None` on overflow.
fn fast_cmp(s1: &Score, s2: &Score, lambda: &Lambda) -> Option<Ordering> {
    let du = s1.utility.checked_sub(s2.utility)?;
    if lambda.is_zero() {
        return Some(du.num.cmp(&0));
    }
    let dd = s1.disparity.checked_sub(s2.disparity)?;
    if dd.num == 0 {
        return Some(du.num.cmp(&0));
    }
    // du.num/du.den vs m·2^e·dd.num/dd.den  <=>  du.num·dd.den vs m·dd.num·du.den·2^e
    let left = du.num.checked_mul(dd.den)?;
    let right = lambda.mantissa.checked_mul(dd.num)?.checked_mul(du.den)?;
    let e = lambda.exponent;
    if e >= 0 {
        let right = shl_checked(right, e as u32)?;
        Some(left.cmp(&right))
    } else {
        let left = shl_checked(left, (-e) as u32)?;
        Some(left.cmp(&right))
    }
}

fn shl_checked(x: i128, s: u32) -> Option<i128> {
    if x == 0 {
        return Some(0);
    }
    if s >= 127 {
        return None;
    }
    let limit = i128::MAX >> s;
    if x.abs() > limit {
        None
    } else {
        Some(x << s)
    }
}

fn big_cmp(s1: &Score, s2: &Score, lambda: &Lambda) -> Ordering {
    let (un, ud) = big_sub(s1.utility, s2.utility);
    let (dn, dd) = big_sub(s1.disparity, s2.disparity);
    let mut left = un * &dd;
    let mut right = BigInt::from(lambda.mantissa) * dn * ud;
    if lambda.exponent >= 0 {
        right <<= lambda.exponent as usize;
    } else {
        left <<= (-lambda.exponent) as usize;
    }
    if right.is_zero() && left.is_zero() {
        return Ordering::Equal;
    }
    left.cmp(&right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lambda_decomposition_is_exact() {
        for v in [0.0, 0.5, 1.0, 2.0, 10.0, 1e6, 0.1, 1e-300, 3.75] {
            let l = Lambda::new(v).unwrap();
            let rebuilt = (l.mantissa as f64) * 2f64.powi(l.exponent);
            assert_eq!(rebuilt, v, "{v}");
        }
        assert!(Lambda::new(-1.0).is_none());
        assert!(Lambda::new(f64::NAN).is_none());
        assert!(Lambda::new(f64::INFINITY).is_none());
    }

    #[test]
    fn equal_values_compare_equal_across_representations() {
        let l = Lambda::new(0.5).unwrap();
        // 1/2 − 0.5·(1/2) = 1/4 and 3/8 − 0.5·(1/4) = 1/4
        let a = Score::new(Frac::new(1, 2), Frac::new(1, 2));
        let b = Score::new(Frac::new(3, 8), Frac::new(1, 4));
        assert_eq!(a.cmp_at(&b, &l), Ordering::Equal);
        assert_eq!(big_cmp(&a, &b, &l), Ordering::Equal);
    }

    #[test]
    fn overflowing_operands_fall_back_to_bigint() {
        let l = Lambda::new(0.1).unwrap();
        let big = i128::MAX / 3;
        let a = Score::new(Frac::new(big, big - 1), Frac::new(1, big));
        let b = Score::new(Frac::new(big - 2, big - 3), Frac::new(2, big));
        assert_eq!(a.cmp_at(&b, &l), big_cmp(&a, &b, &l));
    }

    proptest! {
        #[test]
        fn fast_path_agrees_with_bigint(
            un1 in -1000i128..1000, ud1 in 1i128..1000,
            un2 in -1000i128..1000, ud2 in 1i128..1000,
            dn1 in -1000i128..1000, dd1 in 1i128..1000,
            dn2 in -1000i128..1000, dd2 in 1i128..1000,
            lam in 0.0f64..100.0,
        ) {
            let l = Lambda::new(lam).unwrap();
            let a = Score::new(Frac::new(un1, ud1), Frac::new(dn1, dd1));
            let b = Score::new(Frac::new(un2, ud2), Frac::new(dn2, dd2));
            let expected = big_cmp(&a, &b, &l);
            prop_assert_eq!(a.cmp_at(&b, &l), expected);
            prop_assert_eq!(b.cmp_at(&a, &l), expected.reverse());
        }

        #[test]
        fn frac_cmp_matches_float_when_separated(n1 in -500i128..500, d1 in 1i128..500, n2 in -500i128..500, d2 in 1i128..500) {
            let a = Frac::new(n1, d1);
            let b = Frac::new(n2, d2);
            let (fa, fb) = (a.to_f64(), b.to_f64());
            if (fa - fb).abs() > 1e-9 {
                prop_assert_eq!(a.exact_cmp(&b), fa.partial_cmp(&fb).unwrap());
            }
        }
    }
}
