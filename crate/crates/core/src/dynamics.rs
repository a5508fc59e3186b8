//! Orbits on the projective line over the rationals, cycle structure of good
//! reductions, rational periodic and preperiodic points, and wandering
//! certificates.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::arith::{big_mod_u64, inv_mod, is_prime_u64, mul_mod, multiplicative_order, next_prime, sub_mod};
use crate::model::Model;
use crate::polyval::{bareiss_det, modp, rational_roots, IntPoly};
use crate::{Error, Result};

/// A point of `P^1(Q)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProjPoint {
    Finite(BigRational),
    Infinity,
}

// The derived hash of `Ratio` recurses through the continued fraction,
// which overflows the stack on points with tens of thousands of bits.
impl std::hash::Hash for ProjPoint {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        match self {
            ProjPoint::Finite(x) => {
                0u8.hash(h);
                x.numer().hash(h);
                x.denom().hash(h);
            }
            ProjPoint::Infinity => 1u8.hash(h),
        }
    }
}

impl ProjPoint {
    pub fn int(n: i64) -> Self {
        ProjPoint::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(n: BigInt) -> Self {
        ProjPoint::Finite(BigRational::from_integer(n))
    }

    /// From homogeneous coordinates, not both zero.
    pub fn from_coords(x: BigInt, y: BigInt) -> Self {
        if y.is_zero() {
            debug_assert!(!x.is_zero());
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(BigRational::new(x, y))
        }
    }

    /// Coprime homogeneous coordinates `(x, y)` with `y >= 0`.
    pub fn coords(&self) -> (BigInt, BigInt) {
        match self {
            ProjPoint::Finite(q) => (q.numer().clone(), q.denom().clone()),
            ProjPoint::Infinity => (BigInt::one(), BigInt::zero()),
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, ProjPoint::Finite(q) if q.is_integer())
    }

    /// `max(|x|, |y|)` for coprime coordinates.
    pub fn naive_height(&self) -> BigInt {
        let (x, y) = self.coords();
        x.abs().max(y)
    }

    pub fn bits(&self) -> u64 {
        self.naive_height().bits()
    }

    /// Reduction to `P^1(F_p)`, with `p` standing for infinity.
    pub fn reduce(&self, p: u64) -> u64 {
        let (x, y) = self.coords();
        let yr = big_mod_u64(&y, p);
        if yr == 0 {
            p
        } else {
            mul_mod(big_mod_u64(&x, p), inv_mod(yr, p), p)
        }
    }

    /// `(a z + b) / (c z + d)` with integer entries and `ad - bc != 0`.
    pub fn mobius(&self, a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> ProjPoint {
        let (x, y) = self.coords();
        ProjPoint::from_coords(a * &x + b * &y, c * &x + d * &y)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(q) => write!(f, "{q}"),
            ProjPoint::Infinity => write!(f, "Infinity"),
        }
    }
}

impl FromStr for ProjPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "Infinity" | "infinity" | "inf" | "oo" | "∞") {
            return Ok(ProjPoint::Infinity);
        }
        let bad = || Error::Parse { pos: 0, msg: format!("not a rational number or Infinity: {t:?}") };
        let q = match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                BigRational::new(n, d)
            }
            None => BigRational::from_integer(t.parse().map_err(|_| bad())?),
        };
        Ok(ProjPoint::Finite(q))
    }
}

/// `phi(x)` by homogeneous evaluation.
pub fn eval(m: &Model, x: &ProjPoint) -> ProjPoint {
    let (a, b) = x.coords();
    let d = m.d();
    ProjPoint::from_coords(m.f().eval_homogeneous(&a, &b, d), m.g().eval_homogeneous(&a, &b, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitStatus {
    Wandering,
    Preperiodic,
    Inconclusive,
}

impl OrbitStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitStatus::Wandering => "wandering",
            OrbitStatus::Preperiodic => "preperiodic",
            OrbitStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRecord {
    pub alpha: ProjPoint,
    pub points: Vec<ProjPoint>,
    pub integer_count: usize,
    pub status: OrbitStatus,
    /// `(tail length, cycle length)` once a repeat is seen.
    pub cycle_info: Option<(usize, usize)>,
    /// Iteration stopped early because a point exceeded the size cap.
    pub truncated: bool,
}

impl OrbitRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha.to_string(),
            "points": self.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "integers": self.integer_count,
            "status": self.status.as_str(),
        })
    }
}

/// Points above this many bits stop an orbit computation.
pub const DEFAULT_HEIGHT_CAP_BITS: u64 = 1 << 22;

pub fn orbit(m: &Model, alpha: &ProjPoint, horizon: usize) -> OrbitRecord {
    orbit_capped(m, alpha, horizon, DEFAULT_HEIGHT_CAP_BITS)
}

/// The first `horizon` points of the orbit. Status is `Preperiodic` on a
/// repeat, `Wandering` when the height certificate fires, else
/// `Inconclusive`.
pub fn orbit_capped(m: &Model, alpha: &ProjPoint, horizon: usize, cap_bits: u64) -> OrbitRecord {
    let k = height_constant(m);
    let mut seen: HashMap<ProjPoint, usize> = HashMap::new();
    let mut points = Vec::with_capacity(horizon);
    let mut cycle_info = None;
    let mut certified = false;
    let mut truncated = false;
    let mut x = alpha.clone();
    for i in 0..horizon {
        if i > 0 {
            if x.bits() > cap_bits {
                truncated = true;
                break;
            }
            x = eval(m, &x);
        }
        if cycle_info.is_none() {
            if let Some(&j) = seen.get(&x) {
                cycle_info = Some((j, i - j));
            } else {
                seen.insert(x.clone(), i);
            }
        }
        certified |= escapes(&x, m.d(), &k);
        points.push(x.clone());
    }
    let status = if cycle_info.is_some() {
        OrbitStatus::Preperiodic
    } else if certified {
        OrbitStatus::Wandering
    } else {
        OrbitStatus::Inconclusive
    };
    let integer_count = points.iter().filter(|p| p.is_integer()).count();
    OrbitRecord { alpha: alpha.clone(), points, integer_count, status, cycle_info, truncated }
}

/// Solve `A F + B G = D X^(2d-1)` and `= D Y^(2d-1)` for forms `A`, `B` of
/// degree `d - 1`, where `D = ±Res_d`. Returns the larger of the two
/// coefficient 1-norms `sum |A| + sum |B|`.
fn bezout_norm(m: &Model) -> BigInt {
    let d = m.d();
    let n = 2 * d;
    // column i < d holds X^i Y^(d-1-i) * F, column d + i the same times G
    let mut mat = vec![vec![BigInt::zero(); n]; n];
    for i in 0..d {
        for j in 0..=d {
            mat[i + j][i] = m.f().coeff(j).clone();
            mat[i + j][d + i] = m.g().coeff(j).clone();
        }
    }
    let det = bareiss_det(mat.clone());
    let mut best = BigInt::zero();
    for target in [0, n - 1] {
        // Cramer: x_c = det(M with column c replaced by det * e_target) / det
        //            = (-1)^(target + c) * minor(target, c)
        let mut norm = BigInt::zero();
        for c in 0..n {
            let minor: Vec<Vec<BigInt>> = (0..n)
                .filter(|&r| r != target)
                .map(|r| (0..n).filter(|&cc| cc != c).map(|cc| mat[r][cc].clone()).collect())
                .collect();
            norm += bareiss_det(minor).abs();
        }
        best = best.max(norm);
    }
    debug_assert_eq!(det.abs(), m.res_d().abs());
    best
}

/// `K` with `H(phi(P)) >= H(P)^d / K` for every `P` in `P^1(Q)`.
///
/// `gcd(F(a, b), G(a, b))` divides `Res_d`, and the Bezout identities above
/// give `max(|F(a, b)|, |G(a, b)|) >= |Res_d| H^d / K`.
pub fn height_constant(m: &Model) -> BigInt {
    bezout_norm(m).max(BigInt::one())
}

/// `H(P)^(d-1) > K`: from here on heights strictly increase, so `P` is
/// wandering.
fn escapes(x: &ProjPoint, d: usize, k: &BigInt) -> bool {
    let h = x.naive_height();
    // cheap size test before the exact power
    let hb = h.bits();
    if (hb.saturating_sub(1)) * (d as u64 - 1) > k.bits() {
        return true;
    }
    if hb * (d as u64 - 1) <= k.bits().saturating_sub(1) {
        return false;
    }
    num_traits::pow(h, d - 1) > *k
}

/// Numerator and denominator of `phi^2` in lowest terms; true when the
/// denominator is constant.
pub fn is_polynomial_sq(m: &Model) -> bool {
    let (f2, g2) = iterate_forms(m, m.f(), m.g(), m.d());
    let common = f2.gcd(&g2);
    let g_red = g2.div_exact_poly(&common).expect("gcd divides");
    g_red.degree() == Some(0)
}

/// `(F(P, Q), G(P, Q))` for forms `P`, `Q` of degree `n`, as affine
/// polynomials of declared degree `d n`, with common content removed.
fn iterate_forms(m: &Model, p: &IntPoly, q: &IntPoly, _n: usize) -> (IntPoly, IntPoly) {
    let d = m.d();
    let mut ppow = vec![IntPoly::constant(BigInt::one())];
    let mut qpow = vec![IntPoly::constant(BigInt::one())];
    for i in 1..=d {
        ppow.push(&ppow[i - 1] * p);
        qpow.push(&qpow[i - 1] * q);
    }
    let mut f = IntPoly::zero();
    let mut g = IntPoly::zero();
    for i in 0..=d {
        let term = &ppow[i] * &qpow[d - i];
        if !m.f().coeff(i).is_zero() {
            f = &f + &term.scale(m.f().coeff(i));
        }
        if !m.g().coeff(i).is_zero() {
            g = &g + &term.scale(m.g().coeff(i));
        }
    }
    let c = f.content().gcd(&g.content());
    (f.div_exact(&c), g.div_exact(&c))
}

/// Forms of `phi^k` as affine polynomials of declared degree `d^k`.
pub fn iterate(m: &Model, k: usize) -> (IntPoly, IntPoly) {
    let mut f = IntPoly::z();
    let mut g = IntPoly::constant(BigInt::one());
    let mut n = 1;
    for _ in 0..k {
        let next = iterate_forms(m, &f, &g, n);
        f = next.0;
        g = next.1;
        n *= m.d();
    }
    (f, g)
}

/// A cycle of the reduced map: its points (with `p` for infinity) and
/// multiplier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedCycle {
    pub points: Vec<u64>,
    pub multiplier: u64,
}

impl ReducedCycle {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

struct ReducedMap {
    p: u64,
    f: modp::FpPoly,
    g: modp::FpPoly,
    frev: modp::FpPoly,
    grev: modp::FpPoly,
    fd: u64,
    gd: u64,
}

impl ReducedMap {
    fn new(m: &Model, p: u64) -> Self {
        let d = m.d();
        let (f, g) = m.reduce_mod_p(p);
        ReducedMap {
            p,
            frev: m.f().reversed(d).reduce_mod(p),
            grev: m.g().reversed(d).reduce_mod(p),
            fd: big_mod_u64(m.f().coeff(d), p),
            gd: big_mod_u64(m.g().coeff(d), p),
            f,
            g,
        }
    }

    fn apply(&self, x: u64) -> u64 {
        let p = self.p;
        let (num, den) = if x == p {
            (self.fd, self.gd)
        } else {
            (modp::eval(&self.f, x, p), modp::eval(&self.g, x, p))
        };
        if den == 0 {
            p
        } else {
            mul_mod(num, inv_mod(den, p), p)
        }
    }

    /// Derivative of the map from the chart at `x` to the chart at
    /// `phi(x)`; the chart at infinity is `w = 1/z`.
    fn local_derivative(&self, x: u64) -> u64 {
        let p = self.p;
        let (num, den, at) = if x == p { (&self.frev, &self.grev, 0) } else { (&self.f, &self.g, x) };
        let y = self.apply(x);
        // target chart: y finite uses num/den, infinity uses den/num
        let (u, v) = if y == p { (den, num) } else { (num, den) };
        let (u0, v0) = (modp::eval(u, at, p), modp::eval(v, at, p));
        let (u1, v1) = (modp::eval_derivative(u, at, p), modp::eval_derivative(v, at, p));
        let top = sub_mod(mul_mod(u1, v0, p), mul_mod(u0, v1, p), p);
        mul_mod(top, inv_mod(mul_mod(v0, v0, p), p), p)
    }
}

fn check_good(m: &Model, p: u64) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    if !m.good_reduction(p) {
        return Err(Error::BadReduction(p));
    }
    Ok(())
}

/// All cycles of the reduced map on the `p + 1` points of `P^1(F_p)`.
pub fn reduced_cycles(m: &Model, p: u64) -> Result<Vec<ReducedCycle>> {
    check_good(m, p)?;
    let rm = ReducedMap::new(m, p);
    let n = (p + 1) as usize;
    let next: Vec<u64> = (0..=p).map(|x| rm.apply(x)).collect();
    // 0 unvisited, 1 on the current path, 2 done
    let mut state = vec![0u8; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut x = start;
        while state[x] == 0 {
            state[x] = 1;
            path.push(x);
            x = next[x] as usize;
        }
        if state[x] == 1 {
            let pos = path.iter().position(|&y| y == x).unwrap();
            let pts: Vec<u64> = path[pos..].iter().map(|&y| y as u64).collect();
            let multiplier = pts.iter().fold(1u64, |acc, &y| mul_mod(acc, rm.local_derivative(y), p));
            cycles.push(ReducedCycle { points: pts, multiplier });
        }
        for y in path {
            state[y] = 2;
        }
    }
    Ok(cycles)
}

/// Possible exact periods of rational periodic points, from one good prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodSet {
    pub prime: u64,
    pub periods: BTreeSet<u64>,
}

pub const DEFAULT_E_MAX: u32 = 2;

/// `{m} ∪ {m p^e, m r p^e : e <= e_max}` over the reduced cycles, where `m`
/// is the cycle length and `r` the order of a nonzero multiplier.
pub fn period_set(m: &Model, p: u64, e_max: u32) -> Result<PeriodSet> {
    let mut periods = BTreeSet::new();
    for c in reduced_cycles(m, p)? {
        let len = c.len() as u64;
        periods.insert(len);
        if c.multiplier == 0 {
            continue;
        }
        let r = multiplicative_order(c.multiplier, p);
        let mut pe = 1u64;
        for _ in 0..=e_max {
            periods.insert(len * pe);
            periods.insert(len * r * pe);
            pe *= p;
        }
    }
    Ok(PeriodSet { prime: p, periods })
}

/// Search limit for good primes used by the period intersection.
pub const GOOD_PRIME_LIMIT: u64 = 100_000;
/// Skip periods `k` with `d^k` above this.
pub const DEFAULT_K_CAP: u64 = 20_000;

/// The three smallest good primes `>= 3`.
pub fn small_good_primes(m: &Model, count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 3;
    while out.len() < count && p < GOOD_PRIME_LIMIT {
        if m.good_reduction(p) {
            out.push(p);
        }
        p = next_prime(p + 1);
    }
    out
}

/// Candidate periods: the intersection of the period sets at three good
/// primes.
pub fn candidate_periods(m: &Model) -> Option<BTreeSet<u64>> {
    let primes = small_good_primes(m, 3);
    if primes.len() < 3 {
        return None;
    }
    let mut acc: Option<BTreeSet<u64>> = None;
    for p in primes {
        let s = period_set(m, p, DEFAULT_E_MAX).expect("good prime").periods;
        acc = Some(match acc {
            None => s,
            Some(a) => a.intersection(&s).copied().collect(),
        });
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointSet {
    Complete(BTreeSet<ProjPoint>),
    Inconclusive,
}

/// Fixed points of `phi^k`.
pub fn fixed_points_of_iterate(m: &Model, k: usize) -> BTreeSet<ProjPoint> {
    let (fk, gk) = iterate(m, k);
    let h = &fk - &(&IntPoly::z() * &gk);
    let mut out: BTreeSet<ProjPoint> = rational_roots(&h).into_iter().map(ProjPoint::Finite).collect();
    let mut x = ProjPoint::Infinity;
    for _ in 0..k {
        x = eval(m, &x);
    }
    if x == ProjPoint::Infinity {
        out.insert(x);
    }
    out
}

/// All rational periodic points, when every candidate period fits under
/// `k_cap`.
pub fn periodic_points(m: &Model, k_cap: u64) -> PointSet {
    let Some(periods) = candidate_periods(m) else { return PointSet::Inconclusive };
    let d = m.d() as u64;
    let mut out = BTreeSet::new();
    for k in periods {
        let fits = u32::try_from(k).ok().and_then(|k| d.checked_pow(k)).is_some_and(|n| n <= k_cap);
        if !fits {
            return PointSet::Inconclusive;
        }
        out.extend(fixed_points_of_iterate(m, k as usize));
    }
    PointSet::Complete(out)
}

/// Rational preimages of `y`.
pub fn preimages(m: &Model, y: &ProjPoint) -> BTreeSet<ProjPoint> {
    let d = m.d();
    let (a, b) = y.coords();
    // b F - a G, as a form of degree d
    let h = &m.f().scale(&b) - &m.g().scale(&a);
    let mut out: BTreeSet<ProjPoint> = rational_roots(&h).into_iter().map(ProjPoint::Finite).collect();
    if h.coeff(d).is_zero() {
        out.insert(ProjPoint::Infinity);
    }
    out
}

/// Backward closure of the periodic points under rational preimages.
pub fn preperiodic_points(m: &Model, k_cap: u64) -> PointSet {
    let PointSet::Complete(periodic) = periodic_points(m, k_cap) else { return PointSet::Inconclusive };
    let mut all = periodic.clone();
    let mut frontier: Vec<ProjPoint> = periodic.into_iter().collect();
    while let Some(y) = frontier.pop() {
        for x in preimages(m, &y) {
            if all.insert(x.clone()) {
                frontier.push(x);
            }
        }
    }
    PointSet::Complete(all)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WanderingStatus {
    CertifiedWandering,
    Preperiodic,
    Inconclusive,
}

impl WanderingStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            WanderingStatus::CertifiedWandering => "CERTIFIED_WANDERING",
            WanderingStatus::Preperiodic => "PREPERIODIC",
            WanderingStatus::Inconclusive => "INCONCLUSIVE",
        }
    }
}

pub const WANDERING_HORIZON: usize = 64;

/// Decide whether `alpha` is wandering.
///
/// A repeat within the horizon proves preperiodicity. An orbit point with
/// `H^(d-1) > K` proves wandering outright; failing that, membership in a
/// complete preperiodic set decides.
pub fn is_wandering(m: &Model, alpha: &ProjPoint) -> WanderingStatus {
    let k = height_constant(m);
    let mut seen = BTreeSet::new();
    let mut x = alpha.clone();
    for _ in 0..WANDERING_HORIZON {
        if !seen.insert(x.clone()) {
            return WanderingStatus::Preperiodic;
        }
        if escapes(&x, m.d(), &k) {
            return WanderingStatus::CertifiedWandering;
        }
        x = eval(m, &x);
    }
    match preperiodic_points(m, DEFAULT_K_CAP) {
        PointSet::Complete(s) if s.contains(alpha) => WanderingStatus::Preperiodic,
        PointSet::Complete(_) => WanderingStatus::CertifiedWandering,
        PointSet::Inconclusive => WanderingStatus::Inconclusive,
    }
}

/// Orbit record whose status is upgraded by [`is_wandering`].
pub fn classified_orbit(m: &Model, alpha: &ProjPoint, horizon: usize) -> OrbitRecord {
    let mut rec = orbit(m, alpha, horizon);
    if rec.status == OrbitStatus::Inconclusive {
        rec.status = match is_wandering(m, alpha) {
            WanderingStatus::CertifiedWandering => OrbitStatus::Wandering,
            WanderingStatus::Preperiodic => OrbitStatus::Preperiodic,
            WanderingStatus::Inconclusive => OrbitStatus::Inconclusive,
        };
    }
    rec
}

/// Largest point size (in bits) in a record, for diagnostics.
pub fn max_bits(rec: &OrbitRecord) -> u64 {
    rec.points.iter().map(|p| p.bits()).max().unwrap_or(0)
}

/// The integer in a point, if it is one and fits in `i64`.
pub fn as_i64(p: &ProjPoint) -> Option<i64> {
    match p {
        ProjPoint::Finite(q) if q.is_integer() => q.numer().to_i64(),
        _ => None,
    }
}
