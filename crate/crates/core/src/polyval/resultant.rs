use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::int_poly::IntPoly;
use crate::{Error, Result};

/// Determinant of a square integer matrix by Bareiss fraction-free
/// elimination. Every intermediate division is exact.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    debug_assert!(m.iter().all(|row| row.len() == n));
    let mut sign_negative = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign_negative = !sign_negative;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign_negative {
        -det
    } else {
        det
    }
}

/// Sylvester matrix of `f` (declared degree `m`) and `g` (declared degree
/// `n`): `n` shifted rows of `f` followed by `m` shifted rows of `g`,
/// coefficients from the top degree down.
pub fn sylvester_matrix(f: &IntPoly, m: usize, g: &IntPoly, n: usize) -> Vec<Vec<BigInt>> {
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for shift in 0..n {
        let mut row = vec![BigInt::zero(); size];
        for i in 0..=m {
            row[shift + i] = f.coeff(m - i).clone();
        }
        rows.push(row);
    }
    for shift in 0..m {
        let mut row = vec![BigInt::zero(); size];
        for i in 0..=n {
            row[shift + i] = g.coeff(n - i).clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant of `f` and `g` treated as polynomials of the declared degrees
/// (which may exceed the actual degrees, giving the homogeneous resultant
/// of the corresponding forms).
pub fn resultant_at(f: &IntPoly, m: usize, g: &IntPoly, n: usize) -> Result<BigInt> {
    if f.is_zero() && g.is_zero() {
        return Err(Error::ZeroPolynomials);
    }
    for (p, declared) in [(f, m), (g, n)] {
        if let Some(actual) = p.degree() {
            if actual > declared {
                return Err(Error::DegreeTooSmall { declared, actual });
            }
        }
    }
    Ok(bareiss_det(sylvester_matrix(f, m, g, n)))
}

/// Classical univariate resultant `res(f, g)` at the actual degrees.
/// Zero if either polynomial is zero (and the other is not).
pub fn resultant(f: &IntPoly, g: &IntPoly) -> Result<BigInt> {
    match (f.degree(), g.degree()) {
        (None, None) => Err(Error::ZeroPolynomials),
        (None, _) | (_, None) => Ok(BigInt::zero()),
        (Some(m), Some(n)) => resultant_at(f, m, g, n),
    }
}
