//! Arbitrary-precision rational numbers and small helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The exact coefficient type used throughout the certification path.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `n / d`. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}

/// Exact integer power with non-negative exponent.
pub fn pow(base: &Rat, exp: u32) -> Rat {
    let mut acc = Rat::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

/// Nearest `f64`; used only on evidence paths, never for certification.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact dyadic midpoint of two rationals.
pub fn midpoint(a: &Rat, b: &Rat) -> Rat {
    (a + b) / int(2)
}

/// Format as `p/q` (or `p` for integers); parseable by the frontend.
pub fn display(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_matches_repeated_multiplication() {
        let b = frac(-3, 2);
        let mut acc = one();
        for e in 0..8u32 {
            assert_eq!(pow(&b, e), acc);
            acc *= &b;
        }
    }

    #[test]
    fn display_round_trips_integers_and_fractions() {
        assert_eq!(display(&int(-7)), "-7");
        assert_eq!(display(&frac(1, 4)), "1/4");
    }
}
