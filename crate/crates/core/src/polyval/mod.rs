//! Exact polynomial arithmetic over the integers, the rationals and prime
//! fields, with p-adic valuations and resultants.

mod int_poly;
pub mod modp;
mod parse;
mod rat_poly;
mod resultant;
mod roots;
mod valuation;

pub use int_poly::IntPoly;
pub use parse::{parse_int_poly, parse_rat_poly};
pub use rat_poly::RatPoly;
pub use resultant::{bareiss_det, resultant, resultant_at, sylvester_matrix};
pub use roots::{integer_roots, rational_roots};
pub use valuation::{padic_val, padic_val_int, ValOrInf};

use num_bigint::BigInt;

use crate::arith::is_prime_u64;
use crate::{Error, Result};

/// Minimum p-adic valuation over the coefficients; `+inf` for zero.
pub fn poly_val(f: &RatPoly, p: u64) -> Result<ValOrInf> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    Ok(f.valuation(p))
}

/// gcd of the coefficients, 0 for the zero polynomial.
pub fn content(f: &IntPoly) -> BigInt {
    f.content()
}

pub fn primitive_part(f: &IntPoly) -> IntPoly {
    f.primitive_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_val_fixtures() {
        let f = RatPoly::from(&IntPoly::from_i64s(&[343, 49, 7]));
        assert_eq!(poly_val(&f, 7).unwrap(), ValOrInf::Finite(1));
        let g = RatPoly::from(&IntPoly::from_i64s(&[49, -7, 1]));
        assert_eq!(poly_val(&g, 7).unwrap(), ValOrInf::Finite(0));
        assert_eq!(poly_val(&RatPoly::zero(), 5).unwrap(), ValOrInf::Infinity);
        assert!(poly_val(&g, 9).is_err());
    }

    #[test]
    fn content_fixtures() {
        assert_eq!(content(&IntPoly::from_i64s(&[343, 49, 7])), BigInt::from(7));
        assert_eq!(content(&IntPoly::from_i64s(&[1, 1, 1])), BigInt::from(1));
        assert_eq!(content(&IntPoly::zero()), BigInt::from(0));
        let f = IntPoly::from_i64s(&[-343, 49, -7]);
        assert_eq!(&primitive_part(&f).scale(&content(&f)), &f);
    }
}
