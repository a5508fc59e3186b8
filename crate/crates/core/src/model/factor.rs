//! Integer factorisation: trial division, perfect powers, Pollard-Brent rho.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{is_probable_prime, primes_up_to};

/// Trial division bound. Any prime left in an unfactored part exceeds it.
pub const TRIAL_BOUND: u64 = 100_000;

/// Default iteration budget for rho on each composite part.
pub const DEFAULT_RHO_BUDGET: u64 = 10_000_000;

/// `sign * prod p^e * prod unfactored`.
///
/// Listed primes pass a strong probable-prime test (deterministic below
/// 3.3e24). Unfactored parts are composite, coprime to every listed prime,
/// and free of primes up to [`TRIAL_BOUND`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredInteger {
    pub sign: i8,
    pub factors: Vec<(BigUint, u32)>,
    pub unfactored: Vec<BigUint>,
}

impl FactoredInteger {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }

    /// Product of the unfactored parts (1 when complete).
    pub fn cofactor(&self) -> BigUint {
        self.unfactored.iter().product()
    }

    pub fn value(&self) -> BigInt {
        let mut v: BigUint = self.cofactor();
        for (p, e) in &self.factors {
            v *= num_traits::pow(p.clone(), *e as usize);
        }
        let sign = match self.sign {
            0 => Sign::NoSign,
            s if s < 0 => Sign::Minus,
            _ => Sign::Plus,
        };
        BigInt::from_biguint(sign, v)
    }

    /// Radical of the represented integer; needs a complete factorisation.
    pub fn radical(&self) -> Option<BigUint> {
        self.is_complete()
            .then(|| self.factors.iter().map(|(p, _)| p.clone()).product())
    }

    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.factors.iter().find(|(q, _)| q == p).map_or(0, |(_, e)| *e)
    }
}

impl std::fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        parts.extend(self.unfactored.iter().map(|c| format!("[{c}]")));
        if parts.is_empty() {
            parts.push("1".into());
        }
        let body = parts.join(" * ");
        if self.sign < 0 {
            write!(f, "-{body}")
        } else {
            f.write_str(&body)
        }
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_BOUND))
}

/// Factor a nonzero integer with at most `budget` rho iterations per
/// composite part. Parts below `skip_below` are not attacked with rho and go
/// straight to `unfactored` (callers that only care about high prime powers
/// use this to skip hopeless work).
pub fn factor_integer(n: &BigInt, budget: u64, skip_below: Option<&BigUint>) -> FactoredInteger {
    assert!(!n.is_zero(), "cannot factor zero");
    let sign = if n.sign() == Sign::Minus { -1 } else { 1 };
    let mut m = n.magnitude().clone();
    let mut found: Vec<(BigUint, u32)> = Vec::new();

    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > m {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        if e > 0 {
            found.push((pb, e));
        }
    }
    // m is now 1, a prime, or has all prime factors above the trial bound
    // (or above sqrt of itself when the loop stopped early, i.e. m is prime)

    let mut pending: Vec<BigUint> = Vec::new();
    if !m.is_one() {
        pending.push(m);
    }
    let mut unfactored = Vec::new();
    while let Some(c) = pending.pop() {
        if c.is_one() {
            continue;
        }
        if is_probable_prime(&c) {
            let mut e = 1u32;
            let mut rest = Vec::new();
            for other in pending.drain(..).chain(unfactored.drain(..)) {
                let (o, k) = remove_factor(other, &c);
                e += k;
                rest.push(o);
            }
            pending = rest;
            found.push((c, e));
            continue;
        }
        if let Some((root, k)) = perfect_power(&c) {
            for _ in 0..k {
                pending.push(root.clone());
            }
            continue;
        }
        if skip_below.is_some_and(|s| &c < s) {
            unfactored.push(c);
            continue;
        }
        match pollard_brent(&c, budget) {
            Some(d) => {
                let other = &c / &d;
                pending.push(d);
                pending.push(other);
            }
            None => unfactored.push(c),
        }
    }

    // merge duplicate primes and sort
    found.sort();
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    for (p, e) in found {
        match factors.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => factors.push((p, e)),
        }
    }
    // a composite part may still contain a listed prime if it was split off
    // earlier than the prime was found; remove it now
    let mut cleaned = Vec::new();
    for mut u in unfactored {
        for (p, e) in factors.iter_mut() {
            let (rest, k) = remove_factor(u, p);
            u = rest;
            *e += k;
        }
        if !u.is_one() {
            cleaned.push(u);
        }
    }
    cleaned.sort();
    FactoredInteger { sign, factors, unfactored: cleaned }
}

fn remove_factor(mut n: BigUint, p: &BigUint) -> (BigUint, u32) {
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return (n, k);
        }
        n = q;
        k += 1;
    }
}

/// `n = r^k` with `k >= 2` maximal-prime exponent found first.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    // every prime factor exceeds the trial bound (> 2^16), so k <= bits / 16
    for k in 2..=(bits / 16).max(2) {
        let r = n.nth_root(k);
        if num_traits::pow(r.clone(), k as usize) == *n {
            return Some((r, k));
        }
    }
    None
}

/// Brent's cycle-finding variant of Pollard rho, batching gcds. Returns a
/// nontrivial factor or `None` when the budget runs out.
pub fn pollard_brent(n: &BigUint, budget: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    if let Some(small) = n.to_u64() {
        return pollard_brent_u64(small, budget).map(BigUint::from);
    }
    let one = BigUint::one();
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let (mut y, mut r, mut q) = (BigUint::from(2u32), 1u64, one.clone());
        let m = 128u64;
        let mut g = one.clone();
        let (mut x, mut ys) = (y.clone(), y.clone());
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
            spent += r;
            if spent > budget {
                return None;
            }
        }
        if &g == n {
            // backtrack one step at a time
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    unreachable!()
}

fn pollard_brent_u64(n: u64, budget: u64) -> Option<u64> {
    use crate::arith::{add_mod, mul_mod};
    if n % 2 == 0 {
        return Some(2);
    }
    let gcd = |a: u64, b: u64| a.gcd(&b);
    let mut spent = 0u64;
    for c in 1u64.. {
        let f = |x: u64| add_mod(mul_mod(x, x, n), c % n, n);
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let (mut x, mut ys) = (y, y);
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
            spent += r;
            if spent > budget {
                return None;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    unreachable!()
}
