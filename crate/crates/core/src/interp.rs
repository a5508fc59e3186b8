//! Interpolating degree-d maps through orbit prefixes, the polynomials `N`
//! and `D` with `c_{2d+2} = N / D`, and fast exact evaluation of both.
//!
//! Row `i` of the interpolation matrix is
//! `[c_i^d, ..., 1, -c_{i+1} c_i^d, ..., -c_{i+1}]` against the unknowns
//! `(f_d, ..., f_0, g_d, ..., g_0)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::model::Model;
use crate::polyval::IntPoly;
use crate::{Error, Result};

/// Why a prefix does not determine a degree-d map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Degenerate {
    /// The solution space has this dimension (greater than one).
    Nullspace(usize),
    /// The unique solution has `Res_d = 0`: a lower-degree map padded by a
    /// common factor.
    ZeroResultant { f: IntPoly, g: IntPoly },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Map(Model),
    Degenerate(Degenerate),
}

impl Interpolation {
    pub fn model(&self) -> Option<&Model> {
        match self {
            Interpolation::Map(m) => Some(m),
            Interpolation::Degenerate(_) => None,
        }
    }
}

/// The `(n-1) x 2(d+1)` system for consecutive pairs of `values`.
pub fn interpolation_matrix(d: usize, values: &[BigInt]) -> Vec<Vec<BigInt>> {
    values
        .windows(2)
        .map(|w| {
            let (c, next) = (&w[0], &w[1]);
            let mut pows = vec![BigInt::one()];
            for i in 1..=d {
                pows.push(&pows[i - 1] * c);
            }
            let mut row: Vec<BigInt> = pows.iter().rev().cloned().collect();
            row.extend(pows.iter().rev().map(|p| -(p * next)));
            row
        })
        .collect()
}

/// Integer basis of the right kernel, each vector primitive.
pub fn nullspace(mat: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let ncols = mat.first().map_or(0, |r| r.len());
    let mut rows: Vec<Vec<BigInt>> = mat.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(k) = (r..rows.len()).find(|&k| !rows[k][col].is_zero()) else { continue };
        rows.swap(r, k);
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let (a, b) = (rows[r][col].clone(), rows[i][col].clone());
            for j in 0..ncols {
                let v = &rows[i][j] * &a - &rows[r][j] * &b;
                rows[i][j] = v;
            }
            make_primitive(&mut rows[i]);
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            // x_fc = L, x_pivot = -L a_{r,fc} / piv_r with L the lcm of the pivots
            let l = pivots.iter().enumerate().fold(BigInt::one(), |acc, (ri, &pc)| acc.lcm(&rows[ri][pc]));
            let mut x = vec![BigInt::zero(); ncols];
            x[fc] = l.clone();
            for (ri, &pc) in pivots.iter().enumerate() {
                x[pc] = -(&l * &rows[ri][fc]) / &rows[ri][pc];
            }
            make_primitive(&mut x);
            x
        })
        .collect()
}

fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

fn check_len(d: usize, values: &[BigInt]) -> Result<()> {
    if values.len() != 2 * d + 2 {
        return Err(Error::PrefixLength { expected: 2 * d + 2, got: values.len() });
    }
    Ok(())
}

/// The unique degree-d map with `phi(c_i) = c_{i+1}` for `i < 2d + 1`.
pub fn interpolate(d: usize, values: &[BigInt]) -> Result<Interpolation> {
    check_len(d, values)?;
    let basis = nullspace(&interpolation_matrix(d, values));
    if basis.len() != 1 {
        return Ok(Interpolation::Degenerate(Degenerate::Nullspace(basis.len())));
    }
    let v = &basis[0];
    // v lists f_d..f_0 then g_d..g_0
    let f = IntPoly::new(v[..=d].iter().rev().cloned().collect());
    let g = IntPoly::new(v[d + 1..].iter().rev().cloned().collect());
    match Model::new(d, f.clone(), g.clone()) {
        Ok(m) => Ok(Interpolation::Map(m)),
        Err(_) => Ok(Interpolation::Degenerate(Degenerate::ZeroResultant { f, g })),
    }
}

pub fn interpolate_i64(d: usize, values: &[i64]) -> Result<Interpolation> {
    interpolate(d, &values.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>())
}

/// Sparse integer polynomial in `nvars` variables, terms in descending
/// graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    pub nvars: usize,
    pub terms: Vec<(Vec<u8>, BigInt)>,
}

fn grlex_key(e: &[u8]) -> (u32, &[u8]) {
    (e.iter().map(|&x| x as u32).sum(), e)
}

impl SparsePoly {
    pub fn from_map(nvars: usize, map: HashMap<Vec<u8>, BigInt>) -> Self {
        let mut terms: Vec<(Vec<u8>, BigInt)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| grlex_key(&b.0).cmp(&grlex_key(&a.0)));
        SparsePoly { nvars, terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| grlex_key(e).0).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u8 {
        self.terms.iter().map(|(e, _)| e[var]).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms.iter().map(|(_, c)| c.abs()).max().unwrap_or_default()
    }

    pub fn abs_coeff_sum(&self) -> BigInt {
        self.terms.iter().map(|(_, c)| c.abs()).sum()
    }

    pub fn leading_coeff(&self) -> Option<&BigInt> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn neg(&self) -> Self {
        SparsePoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    /// Substitute zero for `var`.
    pub fn at_zero(&self, var: usize) -> Self {
        SparsePoly { nvars: self.nvars, terms: self.terms.iter().filter(|(e, _)| e[var] == 0).cloned().collect() }
    }

    pub fn eval(&self, x: &[BigInt]) -> BigInt {
        assert_eq!(x.len(), self.nvars);
        let maxdeg = self.terms.iter().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0) as usize;
        let pows: Vec<Vec<BigInt>> = x
            .iter()
            .map(|v| {
                let mut p = vec![BigInt::one()];
                for i in 1..=maxdeg {
                    p.push(&p[i - 1] * v);
                }
                p
            })
            .collect();
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= &pows[i][k as usize];
                }
            }
            acc += t;
        }
        acc
    }

    /// One `coeff:e0,e1,...` line per term.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.terms {
            let ex: Vec<String> = e.iter().map(|k| k.to_string()).collect();
            s.push_str(&format!("{c}:{}\n", ex.join(",")));
        }
        s
    }

    pub fn from_lines(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        let mut nvars = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse { pos: ln, msg: msg.to_string() };
            let (c, ex) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let c: BigInt = c.parse().map_err(|_| bad("bad coefficient"))?;
            let e: Vec<u8> = ex.split(',').map(|k| k.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad("bad exponent"))?;
            if *nvars.get_or_insert(e.len()) != e.len() {
                return Err(bad("exponent vectors differ in length"));
            }
            if map.insert(e, c).is_some() {
                return Err(bad("repeated exponent vector"));
            }
        }
        Ok(SparsePoly::from_map(nvars.unwrap_or(0), map))
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mut mono = Vec::new();
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => mono.push(format!("c{v}")),
                    _ => mono.push(format!("c{v}^{k}")),
                }
            }
            let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
            let mag = c.abs();
            let sep = if i > 0 { " " } else { "" };
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => mono.join("*"),
                (false, false) => format!("{mag}*{}", mono.join("*")),
            };
            write!(f, "{sep}{sign}{}{body}", if i > 0 { " " } else { "" })?;
        }
        Ok(())
    }
}

/// Sign of a permutation given as an index list.
fn heap_permutations(n: usize, mut visit: impl FnMut(&[usize], i64)) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1i64;
    visit(&a, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            visit(&a, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `N` and `D` in `c_0, ..., c_{2d+1}` with `c_{2d+2} = N / D` on orbits.
///
/// The extended matrix has one more row for `(c_{2d+1}, c_{2d+2})`; its
/// determinant is `A + c_{2d+2} B`, and `(N, D) = ±(A, -B)` with the sign
/// chosen so that `D` has a positive leading coefficient.
pub fn nd_polynomials(d: usize, c0_zero: bool) -> (SparsePoly, SparsePoly) {
    let n = 2 * d + 2;
    let nv = 2 * d + 3;
    // entry (row i, col j) is sign * monomial
    let mut entries: Vec<Vec<(i64, Vec<u8>)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..=d {
            let mut e = vec![0u8; nv];
            e[i] = (d - j) as u8;
            row.push((1, e));
        }
        for j in 0..=d {
            let mut e = vec![0u8; nv];
            e[i] = (d - j) as u8;
            e[i + 1] += 1;
            row.push((-1, e));
        }
        entries.push(row);
    }
    let mut acc: HashMap<Vec<u8>, i64> = HashMap::new();
    let mut e = vec![0u8; nv];
    heap_permutations(n, |perm, sign| {
        e.iter_mut().for_each(|x| *x = 0);
        let mut s = sign;
        for (row, &col) in perm.iter().enumerate() {
            let (c, ex) = &entries[row][col];
            s *= c;
            for (t, k) in e.iter_mut().zip(ex) {
                *t += k;
            }
        }
        if c0_zero && e[0] > 0 {
            return;
        }
        *acc.entry(e.clone()).or_insert(0) += s;
    });
    let last = 2 * d + 2;
    let mut a = HashMap::new();
    let mut b = HashMap::new();
    for (mut ex, c) in acc {
        if c == 0 {
            continue;
        }
        let k = ex[last];
        ex.pop();
        match k {
            0 => *a.entry(ex).or_insert_with(BigInt::zero) += c,
            1 => *b.entry(ex).or_insert_with(BigInt::zero) -= c,
            _ => unreachable!("c_(2d+2) appears linearly"),
        }
    }
    let np = SparsePoly::from_map(nv - 1, a);
    let dp = SparsePoly::from_map(nv - 1, b);
    if dp.leading_coeff().is_some_and(|c| c.is_negative()) {
        (np.neg(), dp.neg())
    } else {
        (np, dp)
    }
}

type NdPair = Arc<(SparsePoly, SparsePoly)>;

/// Process-wide cache of `nd_polynomials`.
pub fn nd_cached(d: usize, c0_zero: bool) -> NdPair {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), NdPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(d, c0_zero)) {
        return v.clone();
    }
    let v = Arc::new(nd_polynomials(d, c0_zero));
    cache.lock().unwrap().insert((d, c0_zero), v.clone());
    v
}

/// `N / D` at a prefix `c_0, ..., c_{2d+1}`, or `None` when `D` vanishes.
pub fn next_value(d: usize, values: &[BigInt]) -> Result<Option<BigRational>> {
    check_len(d, values)?;
    let nd = nd_cached(d, false);
    let den = nd.1.eval(values);
    if den.is_zero() {
        return Ok(None);
    }
    Ok(Some(BigRational::new(nd.0.eval(values), den)))
}

/// 64-bit divisibility test `D(c) != 0 and D(c) | N(c)`.
///
/// Each term of `N` is reduced modulo `|D(c)|` before it is added, so no
/// intermediate leaves a machine word. Tuples outside the range where every
/// monomial value provably fits fall back to big integers.
pub struct Kernel64 {
    d: usize,
    /// Largest `max |c_i|` for which the word-size bounds hold.
    pub bound: i64,
    n_terms: Vec<(i64, Vec<u8>)>,
    d_terms: Vec<(i64, Vec<u8>)>,
    nd: NdPair,
}

impl Kernel64 {
    pub fn new(d: usize) -> Self {
        let nd = nd_cached(d, false);
        let lim = BigInt::from(i64::MAX);
        let fits = |b: i64| {
            let bb = BigInt::from(b);
            let dsum = nd.1.abs_coeff_sum() * num_traits::pow(bb.clone(), nd.1.total_degree() as usize);
            let nmax = nd.0.max_abs_coeff() * num_traits::pow(bb, nd.0.total_degree() as usize);
            dsum <= lim && nmax <= lim
        };
        let mut bound = 0;
        while fits(bound + 1) {
            bound += 1;
        }
        let small = |p: &SparsePoly| p.terms.iter().map(|(e, c)| (c.to_i64().unwrap(), e.clone())).collect();
        Kernel64 { d, bound, n_terms: small(&nd.0), d_terms: small(&nd.1), nd }
    }

    fn term(c: i64, e: &[u8], pows: &[[i64; 8]]) -> i64 {
        let mut t = c;
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                t *= pows[i][k as usize];
            }
        }
        t
    }

    pub fn divides(&self, values: &[i64]) -> bool {
        assert_eq!(values.len(), 2 * self.d + 2);
        if values.iter().any(|v| v.unsigned_abs() > self.bound as u64) {
            return self.divides_big(values);
        }
        let mut pows = vec![[0i64; 8]; values.len()];
        for (p, &v) in pows.iter_mut().zip(values) {
            p[0] = 1;
            for k in 1..8.min(self.d + 2) {
                p[k] = p[k - 1] * v;
            }
        }
        let mut den = 0i64;
        for (c, e) in &self.d_terms {
            den += Self::term(*c, e, &pows);
        }
        if den == 0 {
            return false;
        }
        let m = den.unsigned_abs();
        let mut acc = 0u64;
        for (c, e) in &self.n_terms {
            let t = Self::term(*c, e, &pows).rem_euclid(den.abs()) as u64;
            // acc, t < m <= 2^63, so the sum fits in a u64
            acc = (acc + t) % m;
        }
        acc == 0
    }

    pub fn divides_big(&self, values: &[i64]) -> bool {
        let x: Vec<BigInt> = values.iter().map(|&v| BigInt::from(v)).collect();
        let den = self.nd.1.eval(&x);
        !den.is_zero() && (self.nd.0.eval(&x) % den).is_zero()
    }
}

/// `nd_eval_divides` with a fresh kernel; prefer [`Kernel64`] in loops.
pub fn nd_eval_divides(d: usize, values: &[i64]) -> bool {
    Kernel64::new(d).divides(values)
}

/// Exact staged evaluation of `N` and `D` at `c_0 = 0` over `i128`.
///
/// Both polynomials are held densely in `c_1, ..., c_{2d+1}` with each
/// exponent at most `d + 1`. Fixing `c_1`, then `c_2`, and so on contracts
/// one axis at a time, so a depth-first enumeration pays for the inner
/// coordinates only.
#[derive(Clone, Debug)]
pub struct Staged {
    pub d: usize,
    /// Exponent base `d + 2`.
    pub base: usize,
    pub nvars: usize,
    /// Window for which every partial value provably fits in an `i128`.
    pub bound: i64,
    n: Vec<i128>,
    den: Vec<i128>,
}

impl Staged {
    pub fn new(d: usize) -> Self {
        let nd = nd_cached(d, true);
        let nvars = 2 * d + 1;
        let base = d + 2;
        let size = base.pow(nvars as u32);
        let dense = |p: &SparsePoly| {
            let mut v = vec![0i128; size];
            for (e, c) in &p.terms {
                // variable c_1 is the most significant digit
                let idx = e[1..].iter().fold(0usize, |acc, &k| acc * base + k as usize);
                v[idx] = c.to_i128().expect("small coefficients");
            }
            v
        };
        let lim = BigInt::from(i128::MAX) >> 1;
        let fits = |b: i64| {
            let bb = BigInt::from(b);
            [&nd.0, &nd.1].iter().all(|p| p.abs_coeff_sum() * num_traits::pow(bb.clone(), p.total_degree() as usize) <= lim)
        };
        let mut bound = 0;
        while bound < 1 << 20 && fits(bound + 1) {
            bound += 1;
        }
        Staged { d, base, nvars, bound, n: dense(&nd.0), den: dense(&nd.1) }
    }

    /// The root stage: no coordinate fixed.
    pub fn root(&self) -> Stage {
        Stage { n: self.n.clone(), den: self.den.clone(), remaining: self.nvars }
    }

    /// Fix the leading remaining coordinate to `v`.
    pub fn fix(&self, s: &Stage, v: i64, out: &mut Stage) {
        let inner = self.base.pow(s.remaining as u32 - 1);
        out.remaining = s.remaining - 1;
        contract(&s.n, inner, self.base, v as i128, &mut out.n);
        contract(&s.den, inner, self.base, v as i128, &mut out.den);
    }

    /// `(N, D)` once only the last coordinate is free.
    #[inline]
    pub fn eval_last(&self, s: &Stage, v: i64) -> (i128, i128) {
        debug_assert_eq!(s.remaining, 1);
        let v = v as i128;
        let mut a = 0i128;
        let mut b = 0i128;
        for k in (0..self.base).rev() {
            a = a * v + s.n[k];
            b = b * v + s.den[k];
        }
        (a, b)
    }

    pub fn empty_stage(&self) -> Stage {
        Stage { n: Vec::new(), den: Vec::new(), remaining: 0 }
    }
}

/// A partially specialised pair `(N, D)`.
#[derive(Clone, Debug)]
pub struct Stage {
    n: Vec<i128>,
    den: Vec<i128>,
    pub remaining: usize,
}

/// Horner along the leading axis: `out[j] = sum_k src[k * inner + j] v^k`.
fn contract(src: &[i128], inner: usize, base: usize, v: i128, out: &mut Vec<i128>) {
    out.clear();
    out.resize(inner, 0);
    for k in (0..base).rev() {
        let slab = &src[k * inner..(k + 1) * inner];
        for (o, &s) in out.iter_mut().zip(slab) {
            *o = *o * v + s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{eval, ProjPoint};
    use rand::{Rng, SeedableRng};

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn model(d: usize, f: &[i64], g: &[i64]) -> Model {
        Model::from_i64s_desc(d, f, g).unwrap()
    }

    #[test]
    fn interpolation_fixtures() {
        let t1 = interpolate_i64(2, &[0, 1, 4, 11, 12, 7]).unwrap();
        assert_eq!(t1, Interpolation::Map(model(2, &[86, -1068, -338], &[1, 7, -338])));
        let t3 = interpolate_i64(3, &[0, 2, -6, 6, -3, 3, -9, 5]).unwrap();
        assert_eq!(t3, Interpolation::Map(model(3, &[7, -41, -216, 180], &[2, -1, -21, 90])));
        assert!(matches!(interpolate_i64(2, &[0, 1, 3, 7, 15, 31]).unwrap(), Interpolation::Degenerate(_)));
        assert!(interpolate_i64(2, &[0, 1, 3]).is_err());
    }

    #[test]
    fn next_value_fixtures() {
        let q = |n: i64| Some(BigRational::from_integer(n.into()));
        assert_eq!(next_value(2, &big(&[0, 1, 4, 11, 12, 7])).unwrap(), q(15));
        assert_eq!(next_value(3, &big(&[0, 2, -6, 6, -3, 3, -9, 5])).unwrap(), q(-5));
        assert_eq!(next_value(2, &big(&[0, 1, 3, 7, 15, 31])).unwrap(), None);
    }

    #[test]
    fn nd_statistics() {
        let (n, d) = nd_polynomials(2, true);
        assert_eq!((n.len(), n.max_abs_coeff(), n.total_degree()), (70, BigInt::from(4), 9));
        assert_eq!((d.len(), d.max_abs_coeff(), d.total_degree()), (76, BigInt::from(3), 8));
        let (n, d) = nd_polynomials(2, false);
        assert_eq!((n.total_degree(), d.total_degree()), (9, 8));
        for v in 1..6 {
            assert!(n.degree_in(v) <= 3 && d.degree_in(v) <= 3);
        }
        assert!(n.degree_in(0) <= 2 && d.degree_in(0) <= 2);
        let (n3z, d3z) = nd_cached(3, true).as_ref().clone();
        assert_eq!((n3z.len(), n3z.max_abs_coeff(), d3z.len(), d3z.max_abs_coeff()), (2803, BigInt::from(8), 2853, BigInt::from(6)));
        let (n3, d3) = nd_cached(3, false).as_ref().clone();
        assert_eq!((n3.total_degree(), d3.total_degree()), (16, 15));
        for v in 1..8 {
            assert!(n3.degree_in(v) <= 4 && d3.degree_in(v) <= 4);
        }
        assert!(n3.degree_in(0) <= 3 && d3.degree_in(0) <= 3);
    }

    #[test]
    fn sparse_round_trip() {
        let (n, _) = nd_polynomials(2, true);
        assert_eq!(SparsePoly::from_lines(&n.to_lines()).unwrap(), n);
        assert!(SparsePoly::from_lines("1:0,1\n2:0,1\n").is_err());
        assert!(SparsePoly::from_lines("1:0,1\n2:0\n").is_err());
    }

    fn random_prefix(rng: &mut impl Rng, d: usize, b: i64, c0: bool) -> Vec<i64> {
        loop {
            let mut v: Vec<i64> = (0..2 * d + 2).map(|_| rng.gen_range(-b..=b)).collect();
            if !c0 {
                v[0] = 0;
            }
            let mut s = v.clone();
            s.sort();
            s.dedup();
            if s.len() == v.len() {
                return v;
            }
        }
    }

    #[test]
    fn interpolation_reproduces_prefix_and_next_value() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for i in 0..200 {
            let d = if i % 4 == 0 { 3 } else { 2 };
            let v = random_prefix(&mut rng, d, 12, true);
            let Interpolation::Map(m) = interpolate_i64(d, &v).unwrap() else { continue };
            let mut x = ProjPoint::int(v[0]);
            for &c in &v[1..] {
                x = eval(&m, &x);
                assert_eq!(x, ProjPoint::int(c));
            }
            let next = next_value(d, &big(&v)).unwrap();
            let img = eval(&m, &ProjPoint::int(*v.last().unwrap()));
            match (next, img) {
                (Some(q), ProjPoint::Finite(r)) => assert_eq!(q, r),
                (None, ProjPoint::Infinity) => {}
                (a, b) => panic!("{v:?}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn kernel64_matches_big_integers() {
        let k = Kernel64::new(2);
        assert!(k.bound >= 100);
        assert!(k.divides(&[0, 1, 4, 11, 12, 7]));
        assert_eq!(k.divides(&[0, 1, 2, 3, 4, 5]), k.divides_big(&[0, 1, 2, 3, 4, 5]));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let mut hits = 0;
        for i in 0..100_000 {
            let b = if i % 2 == 0 { 100 } else { 6 };
            let v: Vec<i64> = (0..6).map(|_| rng.gen_range(-b..=b)).collect();
            let fast = k.divides(&v);
            assert_eq!(fast, k.divides_big(&v), "{v:?}");
            hits += fast as u32;
        }
        assert!(hits > 0);
        // outside the certified window the big-integer path answers
        assert_eq!(k.divides(&[0, 1000, 4, 11, 12, 7]), k.divides_big(&[0, 1000, 4, 11, 12, 7]));
        // degree 3 does not fit a word at window 10; the fallback still answers
        let k3 = Kernel64::new(3);
        assert!(k3.bound < 10);
        assert!(k3.divides(&[0, 2, -6, 6, -3, 3, -9, 5]));
        let v = [0, 2, -6, 6, -3, 3, -9, 6];
        assert_eq!(k3.divides(&v), k3.divides_big(&v));
    }

    #[test]
    fn staged_matches_sparse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for d in [2usize, 3] {
            let st = Staged::new(d);
            let nd = nd_cached(d, true);
            assert!(st.bound >= if d == 2 { 100 } else { 10 });
            for _ in 0..300 {
                let b = if d == 2 { 100 } else { 10 };
                let v: Vec<i64> = (0..2 * d + 2).map(|i| if i == 0 { 0 } else { rng.gen_range(-b..=b) }).collect();
                let mut cur = st.root();
                let mut next = st.empty_stage();
                for &x in &v[1..2 * d + 1] {
                    st.fix(&cur, x, &mut next);
                    std::mem::swap(&mut cur, &mut next);
                }
                let (n, den) = st.eval_last(&cur, v[2 * d + 1]);
                let xb = big(&v);
                assert_eq!(BigInt::from(n), nd.0.eval(&xb));
                assert_eq!(BigInt::from(den), nd.1.eval(&xb));
            }
        }
    }
}
