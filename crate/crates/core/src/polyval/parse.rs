//! Text syntax for univariate polynomials, e.g. `86*z^2 - 1068*z - 338`.
//!
//! A polynomial is a signed sum of terms `[coef][*][var[^exp]]` where the
//! coefficient is an integer or a fraction `a/b`. The variable may be `z` or
//! `x`; spaces are ignored and `*` is optional.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{IntPoly, RatPoly};
use crate::{Error, Result};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }
}

fn is_var(c: u8) -> bool {
    c == b'z' || c == b'x'
}

/// Parse a polynomial with rational coefficients.
pub fn parse_rat_poly(s: &str) -> Result<RatPoly> {
    let mut cur = Cursor { src: s.as_bytes(), pos: 0 };
    let mut coeffs: Vec<BigRational> = Vec::new();
    let mut first = true;
    let mut var_seen: Option<u8> = None;
    if cur.peek().is_none() {
        return cur.err("empty polynomial");
    }
    while cur.peek().is_some() {
        let mut negative = false;
        if cur.eat(b'+') {
        } else if cur.eat(b'-') {
            negative = true;
        } else if !first {
            return cur.err("expected '+' or '-'");
        }
        first = false;

        let mut coef = match cur.digits() {
            Some(num) => {
                let num: BigInt = num.parse().unwrap();
                if cur.eat(b'/') {
                    let Some(den) = cur.digits() else {
                        return cur.err("expected denominator");
                    };
                    let den: BigInt = den.parse().unwrap();
                    if den.is_zero() {
                        return cur.err("zero denominator");
                    }
                    BigRational::new(num, den)
                } else {
                    BigRational::from_integer(num)
                }
            }
            None => BigRational::from_integer(1.into()),
        };
        let had_coef = cur.pos > 0 && cur.src[cur.pos - 1].is_ascii_digit();
        let star = cur.eat(b'*');

        let exp = match cur.peek() {
            Some(c) if is_var(c) => {
                if var_seen.is_some_and(|v| v != c) {
                    return cur.err("mixed variable names");
                }
                var_seen = Some(c);
                cur.pos += 1;
                if cur.eat(b'^') {
                    match cur.digits() {
                        Some(e) => e.parse::<usize>().or_else(|_| cur.err("exponent too large"))?,
                        None => return cur.err("expected exponent"),
                    }
                } else {
                    1
                }
            }
            _ if star || !had_coef => return cur.err("expected variable"),
            _ => 0,
        };
        if negative {
            coef = -coef;
        }
        if coeffs.len() <= exp {
            coeffs.resize(exp + 1, BigRational::zero());
        }
        coeffs[exp] += coef;
    }
    Ok(RatPoly::new(coeffs))
}

/// Parse a polynomial that must have integer coefficients.
pub fn parse_int_poly(s: &str) -> Result<IntPoly> {
    parse_rat_poly(s)?.to_int().ok_or_else(|| Error::Parse {
        pos: 0,
        msg: "non-integral coefficient".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in ["86*z^2 - 1068*z - 338", "z^2 + 7*z - 338", "-z^3 + 1", "0", "z", "-4"] {
            assert_eq!(parse_int_poly(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn lenient_forms() {
        let a = parse_int_poly("7z^2+49z+343").unwrap();
        assert_eq!(a, IntPoly::from_i64s(&[343, 49, 7]));
        let b = parse_int_poly("  3 x ^ 2 - x + 2 * x^2 ").unwrap();
        assert_eq!(b, IntPoly::from_i64s(&[0, -1, 5]));
        let c = parse_rat_poly("1/2 z - 3/4").unwrap();
        assert_eq!(c.to_string(), "1/2*z - 3/4");
    }

    #[test]
    fn rejects() {
        for s in ["", "z +", "2**z", "3 4", "z^", "1/0", "z + x", "1/2 z"] {
            let res = if s == "1/2 z" { parse_int_poly(s).map(|_| ()) } else { parse_rat_poly(s).map(|_| ()) };
            assert!(res.is_err(), "{s:?} should fail");
        }
    }
}
