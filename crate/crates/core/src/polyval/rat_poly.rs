use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::int_poly::{render_terms, IntPoly};
use super::valuation::{padic_val_rat_unchecked, ValOrInf};

/// Dense univariate polynomial with rational coefficients. `BigRational`
/// keeps every coefficient in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        RatPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `f(a z + b)`.
    pub fn compose_affine(&self, a: &BigRational, b: &BigRational) -> Self {
        let lin = RatPoly::new(vec![b.clone(), a.clone()]);
        let mut acc = RatPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &RatPoly::new(vec![c.clone()]);
        }
        acc
    }

    pub fn valuation(&self, p: u64) -> ValOrInf {
        self.coeffs
            .iter()
            .map(|c| padic_val_rat_unchecked(c, p))
            .min()
            .unwrap_or(ValOrInf::Infinity)
    }

    /// Integral iff every denominator is 1.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// The integer polynomial with the same coefficients; `None` unless
    /// integral.
    pub fn to_int(&self) -> Option<IntPoly> {
        if !self.is_integral() {
            return None;
        }
        Some(IntPoly::new(self.coeffs.iter().map(|c| c.to_integer()).collect()))
    }

    /// lcm of the coefficient denominators (1 for the zero polynomial).
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn display_with(&self, var: &str) -> String {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, c.is_negative(), c.abs().to_string()));
        render_terms(terms, var)
    }
}

impl From<&IntPoly> for RatPoly {
    fn from(p: &IntPoly) -> Self {
        p.to_rat()
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("z"))
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;

    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RatPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;

    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RatPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;

    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn lowest_terms_and_clearing() {
        let f = RatPoly::new(vec![r(2, 4), r(3, 9), r(0, 1)]);
        assert_eq!(f.coeffs()[0], r(1, 2));
        assert_eq!(f.degree(), Some(1));
        assert_eq!(f.denominator_lcm(), BigInt::from(6));
        assert!(f.to_int().is_none());
        assert_eq!(f.scale(&r(6, 1)).to_int().unwrap(), IntPoly::from_i64s(&[3, 2]));
    }

    #[test]
    fn affine_composition() {
        let f = RatPoly::new(vec![r(1, 1), r(1, 1), r(1, 1)]);
        let g = f.compose_affine(&r(1, 7), &r(0, 1));
        assert_eq!(g.coeffs(), &[r(1, 1), r(1, 7), r(1, 49)]);
        assert_eq!(g.to_string(), "1/49*z^2 + 1/7*z + 1");
    }

    #[test]
    fn valuation_of_rational_coefficients() {
        let f = RatPoly::new(vec![r(1, 4), r(6, 1)]);
        assert_eq!(f.valuation(2), ValOrInf::Finite(-2));
        assert_eq!(RatPoly::zero().valuation(3), ValOrInf::Infinity);
    }
}
