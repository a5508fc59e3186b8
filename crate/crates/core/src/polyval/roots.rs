//! Rational roots of integer polynomials.
//!
//! Two routes, both exact. Small end coefficients go through the rational
//! root theorem directly (divisors of the trailing and leading coefficient).
//! Otherwise the roots are found modulo a prime, Hensel-lifted past
//! `2 |h_0| |lc|`, and every lift is checked by exact evaluation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::int_poly::IntPoly;
use super::modp;
use crate::arith::{big_mod_u64, inv_mod, is_prime_u64, mul_mod};

/// Bound on `|h_0|` and `|lc|` under which the divisor route is used.
const DIVISOR_ROUTE_LIMIT: u64 = 1 << 40;

/// The distinct rational roots of a nonzero polynomial, in ascending order.
pub fn rational_roots(f: &IntPoly) -> Vec<BigRational> {
    assert!(!f.is_zero(), "rational_roots of the zero polynomial");
    let k = f.low_order();
    let mut out = Vec::new();
    if k > 0 {
        out.push(BigRational::zero());
    }
    let h = IntPoly::new(f.coeffs()[k..].to_vec()).primitive_part();
    if h.degree().unwrap_or(0) > 0 {
        let small = |x: &BigInt| x.magnitude().to_u64().is_some_and(|v| v <= DIVISOR_ROUTE_LIMIT);
        let nonzero = if small(h.coeff(0)) && small(h.leading().unwrap()) {
            divisor_route(&h)
        } else {
            modular_route(&h)
        };
        out.extend(nonzero);
    }
    out.sort();
    out.dedup();
    out
}

/// Integer roots only.
pub fn integer_roots(f: &IntPoly) -> Vec<BigInt> {
    rational_roots(f)
        .into_iter()
        .filter(|r| r.is_integer())
        .map(|r| r.to_integer())
        .collect()
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `h` has nonzero constant term and degree at least 1.
pub(crate) fn divisor_route(h: &IntPoly) -> Vec<BigRational> {
    let a0 = h.coeff(0).magnitude().to_u64().expect("small trailing coefficient");
    let lc = h.leading().unwrap().magnitude().to_u64().expect("small leading coefficient");
    let h1 = h.eval(&BigInt::one());
    let hm1 = h.eval(&-BigInt::one());
    let mut out = Vec::new();
    for &b in &divisors(lc) {
        for &a in &divisors(a0) {
            if a.gcd(&b) != 1 {
                continue;
            }
            for a in [BigInt::from(a), -BigInt::from(a)] {
                let b = BigInt::from(b);
                // h = (b z - a) q with q integral, so (b - a) | h(1), (b + a) | h(-1)
                let d1 = &b - &a;
                if !d1.is_zero() && !(&h1 % &d1).is_zero() {
                    continue;
                }
                let d2 = &b + &a;
                if !d2.is_zero() && !(&hm1 % &d2).is_zero() {
                    continue;
                }
                if h.eval_homogeneous(&a, &b, h.degree().unwrap()).is_zero() {
                    out.push(BigRational::new(a, b));
                }
            }
        }
    }
    out
}

/// `h` has nonzero constant term and degree at least 1.
pub(crate) fn modular_route(h: &IntPoly) -> Vec<BigRational> {
    let h = h.squarefree_part();
    let n = h.degree().unwrap();
    if n == 0 {
        return Vec::new();
    }
    let lc = h.leading().unwrap().clone();
    let bound: BigInt = BigInt::from(2) * h.coeff(0).abs() * lc.abs();
    let (q, roots_mod_q) = good_prime(&h);
    let q_big = BigInt::from(q);
    let mut modulus = q_big.clone();
    let mut k = 1u32;
    while modulus <= bound {
        modulus *= &q_big;
        k += 1;
    }
    let dh = h.derivative();
    let mut out = Vec::new();
    for r0 in roots_mod_q {
        let inv_d = inv_mod(modp::eval(&dh.reduce_mod(q), r0, q), q);
        // linear lifting: r is a root modulo q^j
        let mut r = BigInt::from(r0);
        let mut qj = q_big.clone();
        for _ in 1..k {
            let val = h.eval(&r);
            debug_assert!((&val % &qj).is_zero());
            let t = big_mod_u64(&(val / &qj), q);
            let step = mul_mod(t, inv_d, q);
            r = (&r - BigInt::from(step) * &qj).mod_floor(&(&qj * &q_big));
            qj *= &q_big;
        }
        // the root a/b has b | lc, so lc * root is an integer below bound / 2
        let mut t = (&lc * &r).mod_floor(&modulus);
        if &t * 2 > modulus {
            t -= &modulus;
        }
        let cand = BigRational::new(t, lc.clone());
        let (a, b) = (cand.numer().clone(), cand.denom().clone());
        if h.eval_homogeneous(&a, &b, n).is_zero() {
            out.push(cand);
        }
    }
    out
}

/// First prime above 2^31 not dividing the leading coefficient at which `h`
/// stays squarefree, with the roots of the reduction.
fn good_prime(h: &IntPoly) -> (u64, Vec<u64>) {
    let mut q = (1u64 << 31) + 1;
    loop {
        if is_prime_u64(q) {
            let hb = h.reduce_mod(q);
            if modp::degree(&hb) == h.degree() {
                let g = modp::gcd(&hb, &modp::derivative(&hb, q), q);
                if modp::degree(&g) == Some(0) {
                    return (q, modp::roots(&hb, q));
                }
            }
        }
        q += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fixtures() {
        assert_eq!(rational_roots(&p(&[-1, 0, 1])), vec![r(-1, 1), r(1, 1)]);
        assert!(rational_roots(&p(&[1, 0, 1])).is_empty());
        assert!(rational_roots(&p(&[8, -41, 8])).is_empty());
        assert_eq!(rational_roots(&p(&[0, 0, -3, 1])), vec![r(0, 1), r(3, 1)]);
    }

    fn brute_force(f: &IntPoly) -> Vec<BigRational> {
        let mut out = Vec::new();
        for b in 1..=20i64 {
            for a in -20..=20i64 {
                let x = r(a, b);
                if f.eval_rat(&x).is_zero() {
                    out.push(x);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn random_with_roots(rng: &mut impl Rng) -> IntPoly {
        let mut f = p(&[rng.gen_range(1..=4)]);
        for _ in 0..rng.gen_range(0..=3) {
            let (a, b) = (rng.gen_range(-6..=6), rng.gen_range(1..=5));
            f = &f * &p(&[-a, b]);
        }
        while f.degree().unwrap_or(0) < 5 && rng.gen_bool(0.5) {
            f = &f * &p(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3), 1]);
        }
        f
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = random_with_roots(&mut rng);
            if f.is_zero() {
                continue;
            }
            // all roots of these polynomials have |a|, |b| <= 20
            assert_eq!(rational_roots(&f), brute_force(&f), "{f}");
        }
    }

    #[test]
    fn both_routes_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let f = random_with_roots(&mut rng);
            if f.is_zero() || f.low_order() > 0 || f.degree() == Some(0) {
                continue;
            }
            let mut a = divisor_route(&f);
            let mut b = modular_route(&f);
            a.sort();
            a.dedup();
            b.sort();
            assert_eq!(a, b, "{f}");
        }
    }

    #[test]
    fn large_coefficients() {
        // (123456789012345 z - 987654321098765) (z^2 + 3) (7 z + 1)^2
        let a: BigInt = "987654321098765".parse().unwrap();
        let b: BigInt = "123456789012345".parse().unwrap();
        let lin = IntPoly::new(vec![-a.clone(), b.clone()]);
        let f = &(&lin * &p(&[3, 0, 1])) * &(&p(&[1, 7]) * &p(&[1, 7]));
        let roots = rational_roots(&f);
        assert_eq!(roots, vec![r(-1, 7), BigRational::new(a, b)]);
    }
}
