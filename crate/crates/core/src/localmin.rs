//! Minimality at a single prime and the local minimiser.
//!
//! A resultant-reducing transformation at `p` has the shape
//! `(p^e1, [[p^e2, beta], [0, 1]])`. For fixed `e2` the requirement on `beta`
//! is a finite list of valuation inequalities `v(h_i(beta)) > c_i`, which
//! [`inequality_solutions`] decides by walking the p-adic digits of `beta`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{big_pow, is_prime_u64};
use crate::model::{Model, ScaledTransform};
use crate::polyval::{modp, padic_val_int, resultant, IntPoly, RatPoly, ValOrInf};
use crate::{Error, Result};

/// One condition `v(h(beta)) > c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub h: IntPoly,
    pub c: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalitySystem {
    pub p: u64,
    pub entries: Vec<Inequality>,
}

/// `(lambda, A) = (p^e1, [[p^e2, beta], [0, 1]])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalTransform {
    pub p: u64,
    pub e1: i64,
    pub e2: i64,
    pub beta: BigRational,
}

impl LocalTransform {
    pub fn identity(p: u64) -> Self {
        LocalTransform { p, e1: 0, e2: 0, beta: BigRational::zero() }
    }

    pub fn is_identity(&self) -> bool {
        self.e1 == 0 && self.e2 == 0 && self.beta.is_zero()
    }

    pub fn to_scaled(&self) -> ScaledTransform {
        ScaledTransform::affine(p_pow(self.p, self.e1), p_pow(self.p, self.e2), self.beta.clone())
            .expect("powers of p are invertible")
    }
}

/// `p^e` for any integer `e`.
pub fn p_pow(p: u64, e: i64) -> BigRational {
    let m = big_pow(p, e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(m)
    } else {
        BigRational::new(BigInt::one(), m)
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime_u64(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p.to_string()))
    }
}

/// `v_p(Res_d)` threshold below which no transformation can help:
/// `d` for even `d`, `2d` for odd `d`.
pub fn triviality_threshold(d: usize) -> i64 {
    (d * (d + 1).gcd(&2)) as i64
}

/// The valuation of `Res_d` is too small to be reduced by a
/// `gcd(2d, d^2 + d)`-th power.
pub fn trivially_minimal_at(m: &Model, p: u64) -> bool {
    let v = padic_val_int(m.res_d(), p).finite().expect("Res_d is nonzero");
    v < triviality_threshold(m.d())
}

/// `f` and `g` monic with `2 deg g < deg f`: minimal at every prime.
///
/// Both leading coefficients are units everywhere, so the `f_d` row forces
/// `e2 > 0` while the `g` leading row forces `e2 < 0` (or is unsatisfiable
/// when `2 deg g = d - 1`). At `2 deg g = d` the `g` row also gives a lower
/// bound and the claim fails, e.g. `(z^2 + 4)/z` conjugates to `(z^2 + 1)/z`.
pub fn monic_shortcut(m: &Model) -> bool {
    let (f, g) = (m.f(), m.g());
    match (f.degree(), g.degree()) {
        (Some(df), Some(dg)) => f.is_monic() && g.is_monic() && 2 * dg < df,
        _ => false,
    }
}

fn binomial_table(n: usize) -> Vec<Vec<BigInt>> {
    let mut t = vec![vec![BigInt::one()]];
    for i in 1..=n {
        let prev = &t[i - 1];
        let mut row = vec![BigInt::one(); i + 1];
        for j in 1..i {
            row[j] = &prev[j - 1] + &prev[j];
        }
        t.push(row);
    }
    t
}

/// The conditions on `beta` for a fixed `e2`: the `f`-rows
/// `v(P_j(beta)) > (d+1-2j)/2 e2` and the `g`-rows `v(Q_j(beta)) > (d-1-2j)/2 e2`,
/// where `P_j`, `Q_j` are the Taylor coefficients at `beta` of `f - z g` and
/// `g`.
pub fn beta_conditions(f: &IntPoly, g: &IntPoly, d: usize, e2: i64) -> Vec<Inequality> {
    let binom = binomial_table(d + 1);
    let mut out = Vec::with_capacity(2 * d + 2);
    for j in 0..=d {
        let mut pc = vec![BigInt::zero(); d - j + 2];
        let mut qc = vec![BigInt::zero(); d - j + 1];
        for i in j..=d {
            let k = i - j;
            let b = &binom[i][j];
            pc[k] += b * f.coeff(i);
            pc[k + 1] -= b * g.coeff(i);
            qc[k] += b * g.coeff(i);
        }
        let two_j = 2 * j as i64;
        out.push(Inequality {
            h: IntPoly::new(pc),
            c: BigRational::new(BigInt::from((d as i64 + 1 - two_j) * e2), BigInt::from(2)),
        });
        out.push(Inequality {
            h: IntPoly::new(qc),
            c: BigRational::new(BigInt::from((d as i64 - 1 - two_j) * e2), BigInt::from(2)),
        });
    }
    out
}

/// Strict bounds `lo < e2 < hi` as an inclusive integer range, or `None`
/// when no integer qualifies.
///
/// Lower and upper bounds come from every row whose condition does not
/// involve `beta` (the `g_{d_G}` row, and the `f_d` row when `d_G < d`); the
/// upper bound `e2 < 2 v(res(f - z g, g)) / (d - 1)` always applies.
pub fn e2_range_polys(f: &IntPoly, g: &IntPoly, d: usize, p: u64) -> Option<(i64, i64)> {
    let mut lo: Option<i64> = None;
    let mut hi: Option<i64> = None;
    let mut raise_lo = |q: BigRational| {
        let v: BigInt = q.floor().to_integer() + 1;
        let v: i64 = v.try_into().expect("bound fits in i64");
        lo = Some(lo.map_or(v, |l: i64| l.max(v)));
    };
    let mut hi_bounds: Vec<BigRational> = Vec::new();
    // rows free of beta: v(K) > a e2
    let mut constant_rows: Vec<(BigInt, BigRational)> = Vec::new();
    for row in beta_conditions(f, g, d, 1) {
        if row.h.is_constant() && !row.h.is_zero() {
            constant_rows.push((row.h.coeff(0).clone(), row.c.clone()));
        }
    }
    for (k, a) in constant_rows {
        let v = padic_val_int(&k, p).finite().unwrap();
        // a e2 < v
        if a.is_zero() {
            if v == 0 {
                return None;
            }
        } else if a.is_positive() {
            hi_bounds.push(rat(v) / a);
        } else {
            raise_lo(rat(v) / a);
        }
    }
    let fz = f - &(&IntPoly::z() * g);
    let r = resultant(&fz, g).expect("f - z g and g are not both zero");
    match padic_val_int(&r, p) {
        ValOrInf::Finite(v) => hi_bounds.push(BigRational::new(BigInt::from(2 * v), BigInt::from(d as i64 - 1))),
        ValOrInf::Infinity => {}
    }
    for q in hi_bounds {
        let v: BigInt = q.ceil().to_integer() - 1;
        let v: i64 = v.try_into().expect("bound fits in i64");
        hi = Some(hi.map_or(v, |h: i64| h.min(v)));
    }
    match (lo, hi) {
        (Some(l), Some(h)) if l <= h => Some((l, h)),
        (Some(_), Some(_)) => None,
        _ => panic!("e2 range unbounded; model is degenerate"),
    }
}

/// The admissible exponents `e2` for the current model at `p`.
pub fn e2_range(m: &Model, p: u64) -> Result<Option<(i64, i64)>> {
    check_prime(p)?;
    Ok(e2_range_polys(m.f(), m.g(), m.d(), p))
}

fn val(x: &BigInt, p: u64) -> Option<i64> {
    padic_val_int(x, p).finite()
}

/// Lower bound on `v(beta)` for any `beta` with `v(h(beta)) > c`.
pub fn beta_floor(h: &IntPoly, c: &BigRational, p: u64) -> Result<BigRational> {
    check_prime(p)?;
    let n = match h.degree() {
        Some(n) if n >= 1 => n,
        _ => return Err(Error::ConstantPolynomial),
    };
    let vn = val(h.coeff(n), p).unwrap();
    let mut b = (c - rat(vn)) / rat(n as i64);
    for i in 0..n {
        if let Some(vi) = val(h.coeff(i), p) {
            let cand = BigRational::new(BigInt::from(vi - vn), BigInt::from((n - i) as i64));
            if cand < b {
                b = cand;
            }
        }
    }
    Ok(b)
}

/// Substitute `beta = p^(-s) beta'`.
///
/// For `s > 0` each entry becomes `(p^(n s) h(p^(-s) z), c + n s)` with
/// `n = deg h`; for `s <= 0` it becomes `(h(p^(-s) z), c)`. Solutions
/// `beta'` of the result correspond exactly to solutions `beta` of the input.
pub fn shift_system(sys: &InequalitySystem, s: i64) -> InequalitySystem {
    let p = sys.p;
    let entries = sys
        .entries
        .iter()
        .map(|e| {
            let n = e.h.degree().unwrap_or(0);
            if s > 0 {
                // coefficient i picks up p^(s (n - i))
                let coeffs = (0..=n)
                    .map(|i| e.h.coeff(i) * big_pow(p, (s as u64 * (n - i) as u64) as u32))
                    .collect();
                Inequality { h: IntPoly::new(coeffs), c: &e.c + rat(n as i64 * s) }
            } else {
                let k = (-s) as u32;
                let coeffs = (0..=n).map(|i| e.h.coeff(i) * big_pow(p, k * i as u32)).collect();
                Inequality { h: IntPoly::new(coeffs), c: e.c.clone() }
            }
        })
        .collect();
    InequalitySystem { p, entries }
}

/// An integer `beta` with `v(h_i(beta)) > c_i` for every entry, or `None`
/// when no p-adic integer solves the system. Entries must be p-integral.
pub fn inequality_solutions(sys: &InequalitySystem) -> Option<BigInt> {
    let p = sys.p;
    let pb = BigInt::from(p);
    // step 1: drop vacuous conditions, make each polynomial primitive at p
    let mut live: Vec<Inequality> = Vec::new();
    for e in &sys.entries {
        let Some(v) = e.h.valuation(p).finite() else { continue };
        if e.c < rat(v) {
            continue;
        }
        live.push(Inequality { h: e.h.div_exact(&big_pow(p, v as u32)), c: &e.c - rat(v) });
    }
    if live.is_empty() {
        return Some(BigInt::zero());
    }
    // steps 3-4: common roots modulo p
    let mut gbar = live[0].h.reduce_mod(p);
    for e in &live[1..] {
        gbar = modp::gcd(&gbar, &e.h.reduce_mod(p), p);
    }
    for beta0 in modp::roots(&gbar, p) {
        let b0 = BigInt::from(beta0);
        let next = InequalitySystem {
            p,
            entries: live
                .iter()
                .map(|e| Inequality {
                    h: e.h.compose_linear(&pb, &b0).div_exact(&pb),
                    c: &e.c - rat(1),
                })
                .collect(),
        };
        if let Some(beta1) = inequality_solutions(&next) {
            return Some(b0 + &pb * beta1);
        }
    }
    None
}

/// Check `v(h(beta)) > c` for every entry by direct evaluation.
pub fn satisfies(entries: &[Inequality], beta: &BigRational, p: u64) -> bool {
    entries.iter().all(|e| {
        let value = e.h.eval_rat(beta);
        crate::polyval::padic_val(&value, p).expect("prime").exceeds(&e.c)
    })
}

/// A `beta` meeting all conditions for this `e2`, if one exists.
pub fn find_beta(f: &IntPoly, g: &IntPoly, d: usize, p: u64, e2: i64) -> Option<BigRational> {
    let mut entries = Vec::new();
    for row in beta_conditions(f, g, d, e2) {
        match row.h.degree() {
            None => {}
            Some(0) => {
                let v = val(row.h.coeff(0), p).unwrap();
                if !(rat(v) > row.c) {
                    return None;
                }
            }
            Some(_) => entries.push(row),
        }
    }
    if entries.is_empty() {
        return Some(BigRational::zero());
    }
    let bound = entries
        .iter()
        .map(|e| beta_floor(&e.h, &e.c, p).unwrap())
        .max()
        .unwrap();
    let floor: i64 = bound.floor().to_integer().try_into().expect("small bound");
    let s = -floor;
    let sys = shift_system(&InequalitySystem { p, entries }, s);
    let beta_prime = inequality_solutions(&sys)?;
    Some(BigRational::from_integer(beta_prime) * p_pow(p, -s))
}

/// `(f, g) -> (f(p^e2 z + beta) - beta g(p^e2 z + beta), p^e2 g(p^e2 z + beta))`.
pub(crate) fn apply_affine(f: &RatPoly, g: &RatPoly, p: u64, e2: i64, beta: &BigRational) -> (RatPoly, RatPoly) {
    let a = p_pow(p, e2);
    let fs = f.compose_affine(&a, beta);
    let gs = g.compose_affine(&a, beta);
    (&fs - &gs.scale(beta), gs.scale(&a))
}

/// Scale `(f, g)` by `p^e1` with `e1 = -min(v(f), v(g))`; returns the
/// integral pair and `e1`.
fn clear_p(f: &RatPoly, g: &RatPoly, p: u64) -> (IntPoly, IntPoly, i64) {
    let v = f.valuation(p).min(g.valuation(p)).finite().expect("nonzero model");
    let k = p_pow(p, -v);
    let fi = f.scale(&k).to_int().expect("only p in denominators");
    let gi = g.scale(&k).to_int().expect("only p in denominators");
    (fi, gi, -v)
}

/// A model minimal over `Z_(p)` and the transformation reaching it.
///
/// The returned model equals `normalize(act(m, transform))`; when `m` is
/// already minimal at `p` the transform is the identity and the model is `m`.
pub fn local_minimal_model(m: &Model, p: u64) -> Result<(LocalTransform, Model)> {
    check_prime(p)?;
    let d = m.d();
    let threshold = triviality_threshold(d);
    let mut tot = LocalTransform::identity(p);
    let (mut f, mut g) = (m.f().clone(), m.g().clone());
    let mut current = m.clone();
    loop {
        let v_res = val(current.res_d(), p).expect("Res_d is nonzero");
        if v_res < threshold {
            break;
        }
        let Some((lo, hi)) = e2_range_polys(&f, &g, d, p) else { break };
        let mut step = None;
        for e2 in lo..=hi {
            if let Some(beta) = find_beta(&f, &g, d, p, e2) {
                step = Some((e2, beta));
                break;
            }
        }
        let Some((e2, beta)) = step else { break };
        let (fr, gr) = apply_affine(&f.to_rat(), &g.to_rat(), p, e2, &beta);
        let (fi, gi, e1) = clear_p(&fr, &gr, p);
        tot.e1 += e1;
        tot.beta += p_pow(p, tot.e2) * &beta;
        tot.e2 += e2;
        f = fi;
        g = gi;
        let next = Model::new(d, f.clone(), g.clone())?;
        debug_assert!(val(next.res_d(), p).unwrap() < v_res);
        current = next;
    }
    Ok((tot, current))
}

/// No resultant-reducing transformation exists at `p`.
pub fn is_minimal_at(m: &Model, p: u64) -> Result<bool> {
    Ok(local_minimal_model(m, p)?.0.is_identity())
}

/// Brute-force reference for the local minimiser: no inequality solver and
/// a generous `e2` window. Exponential in the precision; for testing.
pub mod oracle {
    use super::*;

    /// Depth-first search over residues of beta modulo p^k, pruning a branch
    /// as soon as some condition is decided false at that precision.
    pub fn tree_search(entries: &[Inequality], p: u64) -> Option<BigInt> {
        let depth = entries
            .iter()
            .map(|e| e.c.floor().to_integer())
            .max()
            .map_or(BigInt::zero(), |m| m.max(BigInt::zero()));
        let depth = u32::try_from(depth).unwrap() + 1;
        fn go(entries: &[Inequality], p: u64, beta: BigInt, k: u32, depth: u32) -> Option<BigInt> {
            // with beta known modulo p^k, v(h(beta)) is determined when < k
            for e in entries {
                let v = padic_val_int(&e.h.eval(&beta), p);
                if let ValOrInf::Finite(v) = v {
                    if v < k as i64 && !(rat(v) > e.c) {
                        return None;
                    }
                }
            }
            if k == depth {
                let b = BigRational::from_integer(beta.clone());
                return satisfies(entries, &b, p).then_some(beta);
            }
            let pk = big_pow(p, k);
            (0..p).find_map(|digit| go(entries, p, &beta + &pk * digit, k + 1, depth))
        }
        go(entries, p, BigInt::zero(), 0, depth)
    }

    /// Exhaustive local step: any `e2` in a wide window, `beta` from the tree.
    ///
    /// Panics if a solution turns up outside [`e2_range_polys`], which would
    /// mean the range is unsound.
    pub fn oracle_step(f: &IntPoly, g: &IntPoly, d: usize, p: u64) -> Option<(i64, BigRational)> {
        let (lo, hi) = e2_range_polys(f, g, d, p).unwrap_or((0, -1));
        for e2 in lo.min(-6)..=hi.max(6) {
            let rows = beta_conditions(f, g, d, e2);
            let mut entries = Vec::new();
            let mut ok = true;
            for row in rows {
                match row.h.degree() {
                    None => {}
                    Some(0) => ok &= rat(val(row.h.coeff(0), p).unwrap()) > row.c,
                    Some(_) => entries.push(row),
                }
            }
            if !ok {
                continue;
            }
            let beta = if entries.is_empty() {
                Some(BigRational::zero())
            } else {
                let b = entries.iter().map(|e| beta_floor(&e.h, &e.c, p).unwrap()).max().unwrap();
                let s = -i64::try_from(b.floor().to_integer()).unwrap();
                let shifted = shift_system(&InequalitySystem { p, entries: entries.clone() }, s);
                tree_search(&shifted.entries, p)
                    .map(|bp| BigRational::from_integer(bp) * p_pow(p, -s))
            };
            if let Some(beta) = beta {
                assert!(lo <= e2 && e2 <= hi, "solution outside the e2 range: {e2} not in {lo}..{hi}");
                assert!(satisfies(&beta_conditions(f, g, d, e2), &beta, p));
                return Some((e2, beta));
            }
        }
        None
    }

    /// Smallest `v_p(Res_d)` reached by repeating [`oracle_step`].
    pub fn min_valuation(m: &Model, p: u64) -> i64 {
        let (mut f, mut g) = (m.f().clone(), m.g().clone());
        let d = m.d();
        while let Some((e2, beta)) = oracle_step(&f, &g, d, p) {
            let (fr, gr) = apply_affine(&f.to_rat(), &g.to_rat(), p, e2, &beta);
            let (fi, gi, _) = clear_p(&fr, &gr, p);
            f = fi;
            g = gi;
        }
        val(Model::new(d, f, g).unwrap().res_d(), p).unwrap()
    }
}
