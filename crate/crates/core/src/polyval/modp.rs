//! Dense polynomials over the prime field `F_p`, `p < 2^64`.
//!
//! Coefficient vectors are ascending and trimmed; the zero polynomial is the
//! empty vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{add_mod, inv_mod, mul_mod, pow_mod, sub_mod};

pub type FpPoly = Vec<u64>;

pub fn trim(mut a: FpPoly) -> FpPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn from_residues(coeffs: &[u64], p: u64) -> FpPoly {
    trim(coeffs.iter().map(|&c| c % p).collect())
}

pub fn degree(a: &[u64]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn eval(a: &[u64], x: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    for &c in a.iter().rev() {
        acc = add_mod(mul_mod(acc, x, p), c, p);
    }
    acc
}

pub fn add(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| add_mod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
            .collect(),
    )
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| sub_mod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
            .collect(),
    )
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
        }
    }
    trim(out)
}

pub fn derivative(a: &[u64], p: u64) -> FpPoly {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
            .collect(),
    )
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (FpPoly, FpPoly) {
    let db = degree(b).expect("division by zero polynomial");
    let mut r = a.to_vec();
    if r.len() <= db {
        return (Vec::new(), trim(r));
    }
    let inv = inv_mod(b[db], p);
    let mut q = vec![0u64; r.len() - db];
    for k in (0..q.len()).rev() {
        let top = r[k + db];
        if top == 0 {
            continue;
        }
        let factor = mul_mod(top, inv, p);
        q[k] = factor;
        for (j, &bc) in b.iter().enumerate() {
            r[k + j] = sub_mod(r[k + j], mul_mod(factor, bc, p), p);
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

pub fn rem(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    divrem(a, b, p).1
}

pub fn make_monic(a: &[u64], p: u64) -> FpPoly {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => {
            let inv = inv_mod(lc, p);
            a.iter().map(|&c| mul_mod(c, inv, p)).collect()
        }
    }
}

/// Monic gcd; `gcd(0, 0) = 0`.
pub fn gcd(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    make_monic(&x, p)
}

/// `base^e mod modulus`.
pub fn pow_mod_poly(base: &[u64], mut e: u64, modulus: &[u64], p: u64) -> FpPoly {
    let mut acc: FpPoly = rem(&[1], modulus, p);
    let mut b = rem(base, modulus, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), modulus, p);
        }
        b = rem(&mul(&b, &b, p), modulus, p);
        e >>= 1;
    }
    acc
}

/// Distinct roots of a nonzero polynomial in `F_p`, ascending.
///
/// Small fields are scanned exhaustively; otherwise the product of linear
/// factors `gcd(f, z^p - z)` is split by Cantor-Zassenhaus with a fixed seed.
pub fn roots(f: &[u64], p: u64) -> Vec<u64> {
    let f = trim(f.to_vec());
    let Some(deg) = degree(&f) else {
        panic!("roots of the zero polynomial");
    };
    if deg == 0 {
        return Vec::new();
    }
    if p <= 256 || (p as u128) <= 8 * deg as u128 {
        return (0..p).filter(|&x| eval(&f, x, p) == 0).collect();
    }
    let f = make_monic(&f, p);
    let xp = pow_mod_poly(&[0, 1], p, &f, p);
    let linear_part = gcd(&f, &sub(&xp, &[0, 1], p), p);
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ p);
    split_linear(&linear_part, p, &mut rng, &mut out);
    out.sort_unstable();
    out.dedup();
    out
}

fn split_linear(g: &[u64], p: u64, rng: &mut ChaCha8Rng, out: &mut Vec<u64>) {
    match degree(g) {
        None | Some(0) => {}
        Some(1) => {
            let g = make_monic(g, p);
            out.push(sub_mod(0, g[0], p));
        }
        Some(d) => loop {
            let a = rng.gen_range(0..p);
            let h = pow_mod_poly(&[a, 1], (p - 1) / 2, g, p);
            let cand = gcd(g, &sub(&h, &[1], p), p);
            let dc = degree(&cand).unwrap_or(0);
            if dc > 0 && dc < d {
                let (q, _) = divrem(g, &cand, p);
                split_linear(&cand, p, rng, out);
                split_linear(&q, p, rng, out);
                return;
            }
        },
    }
}

/// `f'(x)` style helper: value of the derivative at a point.
pub fn eval_derivative(f: &[u64], x: u64, p: u64) -> u64 {
    eval(&derivative(f, p), x, p)
}

/// Scalar power helper re-exported for callers working in `F_p`.
pub fn scalar_pow(a: u64, e: u64, p: u64) -> u64 {
    pow_mod(a, e, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_identity() {
        let p = 101;
        let a = vec![5, 0, 3, 99, 1, 7];
        let b = vec![2, 1, 4];
        let (q, r) = divrem(&a, &b, p);
        assert_eq!(add(&mul(&q, &b, p), &r, p), trim(a));
        assert!(degree(&r) < degree(&b));
    }

    #[test]
    fn gcd_is_monic_common_factor() {
        let p = 97;
        let common = vec![3, 1]; // z + 3
        let a = mul(&common, &[5, 0, 1], p);
        let b = mul(&common, &[1, 1], p);
        assert_eq!(gcd(&a, &b, p), common);
    }

    #[test]
    fn roots_small_and_large_fields_agree_with_scan() {
        // product of (z - r) for chosen roots times an irreducible quadratic
        for &p in &[7u64, 257, 1_000_003, 4_294_967_291] {
            let rs = [1u64, 5, 6];
            let mut f: FpPoly = vec![1];
            for &r in &rs {
                f = mul(&f, &[sub_mod(0, r % p, p), 1], p);
            }
            // z^2 - n with n a non-residue has no roots
            let nonres = (2..p).find(|&n| pow_mod(n, (p - 1) / 2, p) == p - 1).unwrap();
            f = mul(&f, &[sub_mod(0, nonres, p), 0, 1], p);
            let mut expected: Vec<u64> = rs.iter().map(|r| r % p).collect();
            expected.sort_unstable();
            expected.dedup();
            assert_eq!(roots(&f, p), expected, "p = {p}");
        }
    }

    #[test]
    fn repeated_roots_reported_once() {
        let p = 1_000_003;
        let f = mul(&mul(&[p - 2, 1], &[p - 2, 1], p), &[p - 9, 1], p);
        assert_eq!(roots(&f, p), vec![2, 9]);
    }
}
