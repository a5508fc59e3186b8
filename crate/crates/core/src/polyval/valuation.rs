use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::is_prime_u64;
use crate::{Error, Result};

/// A valuation value: an integer or `+inf` (the valuation of zero).
///
/// Variant order makes `Infinity` compare greater than every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValOrInf {
    Finite(i64),
    Infinity,
}

impl ValOrInf {
    pub fn is_infinite(self) -> bool {
        matches!(self, ValOrInf::Infinity)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ValOrInf::Finite(v) => Some(v),
            ValOrInf::Infinity => None,
        }
    }

    /// Strict comparison against a rational bound; `+inf` exceeds everything.
    pub fn exceeds(self, bound: &BigRational) -> bool {
        match self {
            ValOrInf::Infinity => true,
            ValOrInf::Finite(v) => BigRational::from_integer(BigInt::from(v)) > *bound,
        }
    }
}

impl Add for ValOrInf {
    type Output = ValOrInf;

    fn add(self, rhs: ValOrInf) -> ValOrInf {
        match (self, rhs) {
            (ValOrInf::Finite(a), ValOrInf::Finite(b)) => ValOrInf::Finite(a + b),
            _ => ValOrInf::Infinity,
        }
    }
}

impl Add<i64> for ValOrInf {
    type Output = ValOrInf;

    fn add(self, rhs: i64) -> ValOrInf {
        self + ValOrInf::Finite(rhs)
    }
}

impl fmt::Display for ValOrInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValOrInf::Finite(v) => write!(f, "{v}"),
            ValOrInf::Infinity => f.write_str("+inf"),
        }
    }
}

/// Exponent of `p` in a nonzero integer, `+inf` for zero. `p` is assumed
/// prime; callers that take `p` from users go through [`padic_val`].
pub fn padic_val_int(x: &BigInt, p: u64) -> ValOrInf {
    if x.is_zero() {
        return ValOrInf::Infinity;
    }
    let p_big = BigInt::from(p);
    let mut v = 0i64;
    let mut cur = x.clone();
    loop {
        let (q, r) = cur.div_rem(&p_big);
        if !r.is_zero() {
            break;
        }
        cur = q;
        v += 1;
    }
    ValOrInf::Finite(v)
}

pub(crate) fn padic_val_rat_unchecked(x: &BigRational, p: u64) -> ValOrInf {
    if x.is_zero() {
        return ValOrInf::Infinity;
    }
    let num = padic_val_int(x.numer(), p).finite().unwrap_or(0);
    let den = padic_val_int(x.denom(), p).finite().unwrap_or(0);
    ValOrInf::Finite(num - den)
}

/// The p-adic valuation of a rational number.
pub fn padic_val(x: &BigRational, p: u64) -> Result<ValOrInf> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    Ok(padic_val_rat_unchecked(x, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fixtures() {
        assert_eq!(padic_val(&rat(0, 1), 7).unwrap(), ValOrInf::Infinity);
        assert_eq!(padic_val(&rat(4 * 7i64.pow(6), 1), 7).unwrap(), ValOrInf::Finite(6));
        assert_eq!(padic_val(&rat(86, 338), 13).unwrap(), ValOrInf::Finite(-2));
    }

    #[test]
    fn rejects_composite() {
        assert!(matches!(padic_val(&rat(4, 1), 6), Err(Error::NotPrime(_))));
        assert!(padic_val(&rat(4, 1), 1).is_err());
    }

    #[test]
    fn ordering_and_addition() {
        assert!(ValOrInf::Infinity > ValOrInf::Finite(i64::MAX));
        assert_eq!(ValOrInf::Infinity + 5, ValOrInf::Infinity);
        assert_eq!(ValOrInf::Finite(2) + ValOrInf::Finite(-5), ValOrInf::Finite(-3));
        assert!(ValOrInf::Finite(1).exceeds(&rat(1, 2)));
        assert!(!ValOrInf::Finite(1).exceeds(&rat(1, 1)));
    }
}
