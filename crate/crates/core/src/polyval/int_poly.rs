use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::valuation::{padic_val_int, ValOrInf};
use crate::arith::big_mod_u64;

/// Dense univariate polynomial over the integers in the variable `z`.
///
/// `coeffs[i]` is the coefficient of `z^i`; trailing zeros are never stored,
/// so the zero polynomial has an empty coefficient vector and degree `None`
/// (standing for minus infinity, which sorts below every `Some(n)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `z`.
    pub fn z() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn monomial(c: BigInt, exp: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); exp + 1];
        coeffs[exp] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Coefficient of `z^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> &BigInt {
        self.coeffs.get(i).unwrap_or(&BigInt::ZERO)
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    /// Number of trailing zero coefficients, i.e. the multiplicity of the
    /// root `z = 0`. Zero polynomial gives 0.
    pub fn low_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rat(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    /// Homogeneous evaluation `sum c_i a^i b^(n-i)` at declared degree `n`,
    /// which equals `b^n f(a/b)` for `b != 0`.
    pub fn eval_homogeneous(&self, a: &BigInt, b: &BigInt, n: usize) -> BigInt {
        debug_assert!(self.degree().map_or(true, |dg| dg <= n));
        let mut acc = BigInt::zero();
        let mut bpow = BigInt::one();
        // Horner in `a`; at step i the b-power is b^(n-i).
        for i in (0..=n).rev() {
            acc = acc * a + self.coeff(i) * &bpow;
            if i > 0 {
                bpow *= b;
            }
        }
        acc
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Exact division of every coefficient by `k`.
    pub fn div_exact(&self, k: &BigInt) -> Self {
        IntPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    debug_assert!((c % k).is_zero());
                    c / k
                })
                .collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// gcd of the coefficients; 0 for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// `self / content`, with the sign kept (so `f = content * primitive_part`).
    pub fn primitive_part(&self) -> Self {
        let c = self.content();
        if c.is_zero() || c.is_one() {
            return self.clone();
        }
        self.div_exact(&c)
    }

    /// Minimum p-adic valuation of the coefficients.
    pub fn valuation(&self, p: u64) -> ValOrInf {
        self.coeffs
            .iter()
            .map(|c| padic_val_int(c, p))
            .min()
            .unwrap_or(ValOrInf::Infinity)
    }

    /// `f(a z + b)` for integers `a`, `b`.
    pub fn compose_linear(&self, a: &BigInt, b: &BigInt) -> Self {
        let lin = IntPoly::new(vec![b.clone(), a.clone()]);
        let mut acc = IntPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &IntPoly::constant(c.clone());
        }
        acc
    }

    /// `f(z)` with `z` replaced by `z + b`.
    pub fn shift(&self, b: &BigInt) -> Self {
        self.compose_linear(&BigInt::one(), b)
    }

    /// Coefficients reduced into `[0, p)`, trimmed.
    pub fn reduce_mod(&self, p: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self.coeffs.iter().map(|c| big_mod_u64(c, p)).collect();
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }

    pub fn to_rat(&self) -> super::RatPoly {
        super::RatPoly::new(
            self.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    /// Pseudo-division: returns `(q, r)` with `lc(g)^k f = q g + r`,
    /// `k = deg f - deg g + 1`.
    pub fn pseudo_divrem(&self, g: &IntPoly) -> (IntPoly, IntPoly) {
        let gd = g.degree().expect("division by zero polynomial");
        let Some(fd) = self.degree() else {
            return (IntPoly::zero(), IntPoly::zero());
        };
        if fd < gd {
            return (IntPoly::zero(), self.clone());
        }
        let lc = g.leading().unwrap().clone();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); fd - gd + 1];
        for k in (0..=fd - gd).rev() {
            let top = r[k + gd].clone();
            for c in q.iter_mut() {
                *c *= &lc;
            }
            for c in r.iter_mut() {
                *c *= &lc;
            }
            q[k] += &top;
            for (j, gc) in g.coeffs.iter().enumerate() {
                r[k + j] -= &top * gc;
            }
        }
        (IntPoly::new(q), IntPoly::new(r))
    }

    /// Exact division by `g` when `g` divides `self` over the rationals and
    /// the quotient is integral; `None` otherwise.
    pub fn div_exact_poly(&self, g: &IntPoly) -> Option<IntPoly> {
        let gd = g.degree()?;
        let Some(fd) = self.degree() else {
            return Some(IntPoly::zero());
        };
        if fd < gd {
            return None;
        }
        let lc = g.leading().unwrap();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); fd - gd + 1];
        for k in (0..=fd - gd).rev() {
            let (quo, rem) = r[k + gd].div_rem(lc);
            if !rem.is_zero() {
                return None;
            }
            for (j, gc) in g.coeffs.iter().enumerate() {
                r[k + j] -= &quo * gc;
            }
            q[k] = quo;
        }
        if r.iter().all(|c| c.is_zero()) {
            Some(IntPoly::new(q))
        } else {
            None
        }
    }

    /// Greatest common divisor over the integers (primitive PRS), normalised
    /// to positive leading coefficient. `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() {
            return other.normalize_sign();
        }
        if other.is_zero() {
            return self.normalize_sign();
        }
        let content = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let (_, r) = a.pseudo_divrem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part().normalize_sign().scale(&content)
    }

    /// Multiply by -1 if the leading coefficient is negative.
    pub fn normalize_sign(&self) -> IntPoly {
        if self.leading().is_some_and(|c| c.is_negative()) {
            -self
        } else {
            self.clone()
        }
    }

    /// Squarefree part over the rationals, as a primitive integer polynomial.
    pub fn squarefree_part(&self) -> IntPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.primitive_part().normalize_sign();
        }
        let g = self.gcd(&self.derivative());
        let pp = self.primitive_part();
        let gp = g.primitive_part();
        pp.div_exact_poly(&gp)
            .expect("gcd divides the polynomial")
            .primitive_part()
            .normalize_sign()
    }

    /// Reverse the coefficient list at declared degree `n`:
    /// `z^n f(1/z)`.
    pub fn reversed(&self, n: usize) -> IntPoly {
        let mut c: Vec<BigInt> = (0..=n).map(|i| self.coeff(i).clone()).collect();
        c.reverse();
        IntPoly::new(c)
    }

    /// Render with a chosen variable name.
    pub fn display_with(&self, var: &str) -> String {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, c.is_negative(), c.magnitude().to_string()));
        render_terms(terms, var)
    }
}

pub(crate) fn render_terms(
    terms: impl Iterator<Item = (usize, bool, String)>,
    var: &str,
) -> String {
    let mut out = String::new();
    for (i, negative, mag) in terms {
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        match i {
            0 => out.push_str(&mag),
            _ => {
                if mag != "1" {
                    out.push_str(&mag);
                    out.push('*');
                }
                out.push_str(var);
                if i > 1 {
                    out.push('^');
                    out.push_str(&i.to_string());
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("z"))
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;

    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;

    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;

    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;

    fn neg(self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: IntPoly) -> IntPoly {
        &self + &rhs
    }
}

impl Sub for IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: IntPoly) -> IntPoly {
        &self - &rhs
    }
}

impl Mul for IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: IntPoly) -> IntPoly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    #[test]
    fn degree_sentinel() {
        assert_eq!(IntPoly::zero().degree(), None);
        assert!(IntPoly::zero().degree() < p(&[5]).degree());
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
    }

    #[test]
    fn content_and_primitive_part() {
        let f = p(&[343, 49, 7]);
        assert_eq!(f.content(), BigInt::from(7));
        assert_eq!(f.primitive_part(), p(&[49, 7, 1]));
        assert_eq!(p(&[1, 1, 1]).content(), BigInt::one());
        assert_eq!(IntPoly::zero().content(), BigInt::zero());
        let g = p(&[-6, 4]);
        assert_eq!(&g.primitive_part().scale(&g.content()), &g);
    }

    #[test]
    fn valuation_of_polynomials() {
        assert_eq!(p(&[343, 49, 7]).valuation(7), ValOrInf::Finite(1));
        assert_eq!(p(&[49, -7, 1]).valuation(7), ValOrInf::Finite(0));
        assert_eq!(IntPoly::zero().valuation(5), ValOrInf::Infinity);
    }

    #[test]
    fn compose_and_eval() {
        let f = p(&[1, 1, 1]);
        let g = f.compose_linear(&BigInt::from(2), &BigInt::from(3));
        for x in -5..5 {
            let x = BigInt::from(x);
            assert_eq!(g.eval(&x), f.eval(&(BigInt::from(2) * &x + 3)));
        }
    }

    #[test]
    fn homogeneous_eval_matches_affine() {
        let f = p(&[-338, -1068, 86]);
        let (a, b) = (BigInt::from(41), BigInt::from(13));
        let h = f.eval_homogeneous(&a, &b, 2);
        let direct = f.eval_rat(&BigRational::new(a, b.clone())) * BigRational::from_integer(b.pow(2));
        assert_eq!(BigRational::from_integer(h), direct);
        // declared degree above the actual one
        let h3 = f.eval_homogeneous(&BigInt::from(2), &BigInt::from(3), 3);
        assert_eq!(h3, BigInt::from(3) * f.eval_homogeneous(&BigInt::from(2), &BigInt::from(3), 2));
    }

    #[test]
    fn gcd_and_squarefree() {
        let a = p(&[-1, 1]); // z - 1
        let b = p(&[2, 1]); // z + 2
        let f = &(&a * &a) * &b;
        let g = &a * &p(&[5, 0, 1]);
        assert_eq!(f.gcd(&g), a);
        assert_eq!(f.squarefree_part(), &a * &b);
        assert_eq!(p(&[6, 12]).gcd(&p(&[4, 8])), p(&[2, 4]));
    }

    #[test]
    fn exact_poly_division() {
        let a = p(&[3, 2]);
        let b = p(&[-7, 0, 5]);
        let prod = &a * &b;
        assert_eq!(prod.div_exact_poly(&a), Some(b.clone()));
        assert_eq!((&prod + &p(&[1])).div_exact_poly(&a), None);
    }

    #[test]
    fn display() {
        assert_eq!(p(&[-338, -1068, 86]).to_string(), "86*z^2 - 1068*z - 338");
        assert_eq!(p(&[0, -1, 1]).to_string(), "z^2 - z");
        assert_eq!(p(&[-4, 0, 0, 1]).to_string(), "z^3 - 4");
        assert_eq!(IntPoly::zero().to_string(), "0");
        assert_eq!(p(&[0, 0, -1]).to_string(), "-z^2");
    }
}
