//! Models `[F, G]` of degree-d rational maps and the `(lambda, A)` action.
//!
//! A model is stored through its affine polynomials `f(z) = F(z, 1)` and
//! `g(z) = G(z, 1)` together with the degree `d` of the forms, so that the
//! homogeneous forms are recovered by padding with powers of `Y`.

mod factor;

pub use factor::{factor_integer, pollard_brent, FactoredInteger, DEFAULT_RHO_BUDGET, TRIAL_BOUND};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::arith::big_mod_u64;
use crate::polyval::{modp, parse_rat_poly, resultant_at, IntPoly, RatPoly};
use crate::{Error, Result};

/// A primitive integral model of a degree-d map with `Res_d != 0`, normalised
/// so the leading nonzero coefficient of `G` is positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Model {
    d: usize,
    f: IntPoly,
    g: IntPoly,
    res: BigInt,
}

impl Model {
    /// Normalise `[f, g]` (content removed, sign fixed) and check it is a
    /// model of degree exactly `d`.
    pub fn new(d: usize, f: IntPoly, g: IntPoly) -> Result<Model> {
        Self::normalized(d, f, g).map(|(m, _)| m)
    }

    /// As [`Model::new`], also returning the integer `s` with `model = [f, g] / s`.
    pub fn normalized(d: usize, f: IntPoly, g: IntPoly) -> Result<(Model, BigInt)> {
        if d < 2 {
            return Err(Error::InvalidModel(format!("degree {d} < 2")));
        }
        for (name, p) in [("f", &f), ("g", &g)] {
            if p.degree().is_some_and(|k| k > d) {
                return Err(Error::InvalidModel(format!("deg {name} exceeds {d}")));
            }
        }
        if g.is_zero() {
            return Err(Error::InvalidModel("g is zero".into()));
        }
        let mut s = f.content().gcd(&g.content());
        if g.leading().unwrap().is_negative() {
            s = -s;
        }
        let (f, g) = (f.div_exact(&s), g.div_exact(&s));
        let res = resultant_at(&f, d, &g, d)?;
        if res.is_zero() {
            return Err(Error::InvalidModel("Res_d vanishes".into()));
        }
        Ok((Model { d, f, g, res }, s))
    }

    /// Build from coefficient lists ordered from degree `d` down to 0.
    pub fn from_desc(d: usize, f: &[BigInt], g: &[BigInt]) -> Result<Model> {
        if f.len() != d + 1 || g.len() != d + 1 {
            return Err(Error::InvalidModel(format!("expected {} coefficients", d + 1)));
        }
        let rev = |v: &[BigInt]| IntPoly::new(v.iter().rev().cloned().collect());
        Model::new(d, rev(f), rev(g))
    }

    pub fn from_i64s_desc(d: usize, f: &[i64], g: &[i64]) -> Result<Model> {
        let big = |v: &[i64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        Model::from_desc(d, &big(f), &big(g))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn f(&self) -> &IntPoly {
        &self.f
    }

    pub fn g(&self) -> &IntPoly {
        &self.g
    }

    /// Homogeneous resultant of the two degree-d forms.
    pub fn res_d(&self) -> &BigInt {
        &self.res
    }

    pub fn f_desc(&self) -> Vec<BigInt> {
        (0..=self.d).rev().map(|i| self.f.coeff(i).clone()).collect()
    }

    pub fn g_desc(&self) -> Vec<BigInt> {
        (0..=self.d).rev().map(|i| self.g.coeff(i).clone()).collect()
    }

    /// Coefficientwise reduction `(f mod p, g mod p)` over `F_p`.
    pub fn reduce_mod_p(&self, p: u64) -> (modp::FpPoly, modp::FpPoly) {
        (self.f.reduce_mod(p), self.g.reduce_mod(p))
    }

    pub fn good_reduction(&self, p: u64) -> bool {
        big_mod_u64(&self.res, p) != 0
    }

    /// Factorisation of `|Res_d|` (sign kept separately).
    pub fn factor_resultant(&self, budget: u64) -> FactoredInteger {
        factor_integer(&self.res, budget, None)
    }

    /// Product of the distinct primes dividing `Res_d`.
    pub fn conductor(&self, budget: u64) -> Result<BigInt> {
        let fac = self.factor_resultant(budget);
        fac.radical()
            .map(BigInt::from)
            .ok_or_else(|| Error::IncompleteFactorization(fac.cofactor().to_string()))
    }

    /// Parse `"(F)/(G)"`, or a bare polynomial meaning `G = 1`. The degree
    /// is the larger of the two polynomial degrees.
    pub fn parse(s: &str) -> Result<Model> {
        Model::parse_with_degree(s, None)
    }

    pub fn parse_with_degree(s: &str, d: Option<usize>) -> Result<Model> {
        let (fs, gs) = split_fraction(s)?;
        let f = parse_rat_poly(fs)?;
        let g = parse_rat_poly(gs)?;
        let pair = RatModel { d: 0, f, g };
        let deg = d.unwrap_or_else(|| {
            pair.f.degree().unwrap_or(0).max(pair.g.degree().unwrap_or(0))
        });
        RatModel { d: deg, ..pair }.normalize().map(|(m, _)| m)
    }

    pub fn to_json(&self) -> Value {
        let nums = |v: Vec<BigInt>| -> Vec<Value> {
            v.iter()
                .map(|c| Value::Number(c.to_string().parse().expect("integer literal")))
                .collect()
        };
        json!({ "d": self.d, "f": nums(self.f_desc()), "g": nums(self.g_desc()) })
    }

    pub fn from_json(v: &Value) -> Result<Model> {
        let bad = |m: &str| Error::InvalidModel(m.to_string());
        let d = v["d"].as_u64().ok_or_else(|| bad("missing d"))? as usize;
        let coeffs = |key: &str| -> Result<Vec<BigInt>> {
            v[key]
                .as_array()
                .ok_or_else(|| bad("missing coefficients"))?
                .iter()
                .map(|c| match c {
                    Value::Number(n) => n.to_string().parse().map_err(|_| bad("non-integer")),
                    Value::String(s) => s.parse().map_err(|_| bad("non-integer")),
                    _ => Err(bad("non-integer")),
                })
                .collect()
        };
        Model::from_desc(d, &coeffs("f")?, &coeffs("g")?)
    }

    pub fn to_rat(&self) -> RatModel {
        RatModel { d: self.d, f: self.f.to_rat(), g: self.g.to_rat() }
    }

    /// `[lambda F_A, lambda G_A]` over the rationals.
    pub fn act(&self, t: &ScaledTransform) -> RatModel {
        self.to_rat().act(t)
    }
}

fn split_fraction(s: &str) -> Result<(&str, &str)> {
    let t = s.trim();
    if !t.starts_with('(') {
        return Ok((t, "1"));
    }
    // find the parenthesis closing the first group
    let mut depth = 0i32;
    for (i, ch) in t.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    let num = &t[1..i];
                    let rest = t[i + 1..].trim_start();
                    let Some(rest) = rest.strip_prefix('/') else {
                        return if rest.is_empty() {
                            Ok((num, "1"))
                        } else {
                            Err(Error::Parse { pos: i + 1, msg: "expected '/'".into() })
                        };
                    };
                    let rest = rest.trim();
                    let den = rest
                        .strip_prefix('(')
                        .and_then(|r| r.strip_suffix(')'))
                        .unwrap_or(rest);
                    return Ok((num, den));
                }
            }
            _ => {}
        }
    }
    Err(Error::Parse { pos: t.len(), msg: "unbalanced parentheses".into() })
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.f, self.g)
    }
}

/// A pair of rational polynomials representing degree-d forms, before
/// clearing denominators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatModel {
    pub d: usize,
    pub f: RatPoly,
    pub g: RatPoly,
}

impl RatModel {
    /// Apply `(lambda, A)`:
    /// `F_A = delta F(aX+bY, cX+dY) - beta G(..)`, `G_A = -gamma F(..) + alpha G(..)`.
    pub fn act(&self, t: &ScaledTransform) -> RatModel {
        let fs = homogeneous_substitute(&self.f, self.d, t);
        let gs = homogeneous_substitute(&self.g, self.d, t);
        let fa = &fs.scale(&t.dd) - &gs.scale(&t.b);
        let ga = &gs.scale(&t.a) - &fs.scale(&t.c);
        RatModel { d: self.d, f: fa.scale(&t.lambda), g: ga.scale(&t.lambda) }
    }

    /// Homogeneous resultant of the rational forms.
    pub fn res_d(&self) -> BigRational {
        let den = self.f.denominator_lcm().lcm(&self.g.denominator_lcm());
        let k = BigRational::from_integer(den.clone());
        let fi = self.f.scale(&k).to_int().unwrap();
        let gi = self.g.scale(&k).to_int().unwrap();
        let r = resultant_at(&fi, self.d, &gi, self.d).unwrap_or_else(|_| BigInt::zero());
        BigRational::new(r, num_traits::pow(den, 2 * self.d))
    }

    /// Clear denominators and content. Returns the primitive model and the
    /// rational `s` with `model = s * self`.
    pub fn normalize(&self) -> Result<(Model, BigRational)> {
        let den = self.f.denominator_lcm().lcm(&self.g.denominator_lcm());
        let k = BigRational::from_integer(den.clone());
        let fi = self.f.scale(&k).to_int().unwrap();
        let gi = self.g.scale(&k).to_int().unwrap();
        let (m, s) = Model::normalized(self.d, fi, gi)?;
        Ok((m, BigRational::new(den, s)))
    }
}

/// `P(alpha z + beta, gamma z + delta)` for `P` a degree-`d` form given by
/// its affine polynomial.
fn homogeneous_substitute(p: &RatPoly, d: usize, t: &ScaledTransform) -> RatPoly {
    let x = RatPoly::new(vec![t.b.clone(), t.a.clone()]);
    let y = RatPoly::new(vec![t.dd.clone(), t.c.clone()]);
    let mut xp = vec![RatPoly::new(vec![BigRational::one()])];
    let mut yp = xp.clone();
    for i in 1..=d {
        xp.push(&xp[i - 1] * &x);
        yp.push(&yp[i - 1] * &y);
    }
    let mut acc = RatPoly::zero();
    for i in 0..=d {
        let c = p.coeff(i);
        if c.is_zero() {
            continue;
        }
        acc = &acc + &(&xp[i] * &yp[d - i]).scale(&c);
    }
    acc
}

/// `(lambda, [[a, b], [c, dd]])` with `lambda != 0` and `a dd - b c != 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScaledTransform {
    pub lambda: BigRational,
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub dd: BigRational,
}

impl ScaledTransform {
    pub fn new(
        lambda: BigRational,
        a: BigRational,
        b: BigRational,
        c: BigRational,
        dd: BigRational,
    ) -> Result<Self> {
        let t = ScaledTransform { lambda, a, b, c, dd };
        if t.det().is_zero() || t.lambda.is_zero() {
            return Err(Error::DegenerateTransform);
        }
        Ok(t)
    }

    pub fn from_i64s(lambda: (i64, i64), a: (i64, i64), b: (i64, i64), c: (i64, i64), dd: (i64, i64)) -> Result<Self> {
        let r = |(n, d): (i64, i64)| BigRational::new(n.into(), d.into());
        Self::new(r(lambda), r(a), r(b), r(c), r(dd))
    }

    pub fn identity() -> Self {
        let (o, z) = (BigRational::one(), BigRational::zero());
        ScaledTransform { lambda: o.clone(), a: o.clone(), b: z.clone(), c: z, dd: o }
    }

    /// `(lambda, [[alpha, beta], [0, 1]])`.
    pub fn affine(lambda: BigRational, alpha: BigRational, beta: BigRational) -> Result<Self> {
        Self::new(lambda, alpha, beta, BigRational::zero(), BigRational::one())
    }

    pub fn det(&self) -> BigRational {
        &self.a * &self.dd - &self.b * &self.c
    }

    /// `(l1, A1) o (l2, A2) = (l1 l2, A1 A2)`; acting by the result equals
    /// acting by `self` and then by `other`.
    pub fn compose(&self, other: &ScaledTransform) -> ScaledTransform {
        ScaledTransform {
            lambda: &self.lambda * &other.lambda,
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.dd,
            c: &self.c * &other.a + &self.dd * &other.c,
            dd: &self.c * &other.b + &self.dd * &other.dd,
        }
    }

    pub fn inverse(&self) -> ScaledTransform {
        let det = self.det();
        ScaledTransform {
            lambda: self.lambda.recip(),
            a: &self.dd / &det,
            b: -&self.b / &det,
            c: -&self.c / &det,
            dd: &self.a / &det,
        }
    }

    /// The Moebius map `z -> (a z + b) / (c z + dd)` on a finite point,
    /// `None` for the point at infinity.
    pub fn apply_to_point(&self, z: &BigRational) -> Option<BigRational> {
        let den = &self.c * z + &self.dd;
        (!den.is_zero()).then(|| (&self.a * z + &self.b) / den)
    }
}

/// Check `Res_d(lambda F_A, lambda G_A) = lambda^{2d} det(A)^{d^2+d} Res_d(F, G)`.
pub fn res_transform_check(m: &Model, t: &ScaledTransform) -> bool {
    let d = m.d();
    let lhs = m.act(t).res_d();
    let rhs = num_traits::pow(t.lambda.clone(), 2 * d)
        * num_traits::pow(t.det(), d * d + d)
        * BigRational::from_integer(m.res_d().clone());
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn m(d: usize, f: &[i64], g: &[i64]) -> Model {
        Model::from_i64s_desc(d, f, g).unwrap()
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn resultant_fixtures() {
        assert_eq!(m(2, &[1, 1, 1], &[1, -1, 1]).res_d(), &BigInt::from(4));
        assert_eq!(
            m(2, &[7, 49, 343], &[1, -7, 49]).res_d(),
            &(BigInt::from(4) * BigInt::from(7).pow(6))
        );
    }

    #[test]
    fn remark_relation_for_low_degree_g() {
        // Res_d = f_d^(d - d_g) ((-1)^d g_dg)^(d - d_f) res(f, g)
        let model = m(3, &[1, 0, 0, -4], &[0, 0, 1, 0]);
        let res = crate::polyval::resultant(model.f(), model.g()).unwrap();
        assert_eq!(res, BigInt::from(4));
        // d - d_g = 2, d - d_f = 0, f_d = 1
        assert_eq!(model.res_d(), &res);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 50 {
            let d = rng.gen_range(2..=4usize);
            let df = d;
            let dg = rng.gen_range(0..=d);
            let mut f: Vec<i64> = (0..df).map(|_| rng.gen_range(-5..=5)).collect();
            f.push(1);
            let mut g: Vec<i64> = (0..dg).map(|_| rng.gen_range(-5..=5)).collect();
            g.push(1);
            let (f, g) = (IntPoly::from_i64s(&f), IntPoly::from_i64s(&g));
            let sylv = resultant_at(&f, d, &g, d).unwrap();
            if sylv.is_zero() {
                continue;
            }
            let res = crate::polyval::resultant(&f, &g).unwrap();
            // f monic of degree d, g monic: the correction is f_d^(d - d_g) = 1
            assert_eq!(sylv, res, "{f} / {g}");
            checked += 1;
        }
    }

    #[test]
    fn act_fixtures() {
        let base = m(2, &[1, 1, 1], &[1, -1, 1]);
        let t = ScaledTransform::from_i64s((343, 1), (1, 7), (0, 1), (0, 1), (1, 1)).unwrap();
        let (out, _) = base.act(&t).normalize().unwrap();
        assert_eq!(out, m(2, &[7, 49, 343], &[1, -7, 49]));
        let scaled = base.act(&t);
        assert_eq!(scaled.f, m(2, &[7, 49, 343], &[1, -7, 49]).f().to_rat());

        assert_eq!(base.act(&ScaledTransform::identity()), base.to_rat());

        let cubic = m(3, &[1, 0, 0, -4], &[0, 0, 1, 0]);
        let t = ScaledTransform::from_i64s((1, 4), (2, 1), (0, 1), (0, 1), (1, 1)).unwrap();
        let out = cubic.act(&t);
        assert_eq!(out.f, IntPoly::from_i64s(&[-1, 0, 0, 2]).to_rat());
        assert_eq!(out.g, IntPoly::from_i64s(&[0, 1]).to_rat());
    }

    fn random_model(rng: &mut impl Rng, d: usize, bound: i64) -> Model {
        loop {
            let f: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
            let g: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
            if let Ok(m) = Model::new(d, IntPoly::from_i64s(&f), IntPoly::from_i64s(&g)) {
                return m;
            }
        }
    }

    fn random_transform(rng: &mut impl Rng, bound: i64) -> ScaledTransform {
        loop {
            let mut q = || {
                BigRational::new(rng.gen_range(-bound..=bound).into(), rng.gen_range(1..=bound).into())
            };
            let (l, a, b, c, d) = (q(), q(), q(), q(), q());
            if let Ok(t) = ScaledTransform::new(l, a, b, c, d) {
                return t;
            }
        }
    }

    #[test]
    fn transformation_law_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let d = rng.gen_range(2..=3);
            let model = random_model(&mut rng, d, 20);
            let t = random_transform(&mut rng, 20);
            assert!(res_transform_check(&model, &t));
        }
        let base = m(2, &[1, 1, 1], &[1, -1, 1]);
        assert!(res_transform_check(&base, &ScaledTransform::identity()));
    }

    #[test]
    fn composition_and_inverse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let model = random_model(&mut rng, 2, 10);
            let t1 = random_transform(&mut rng, 6);
            let t2 = random_transform(&mut rng, 6);
            assert_eq!(model.act(&t1).act(&t2), model.act(&t1.compose(&t2)));
            let (there, _) = model.act(&t1).normalize().unwrap();
            let (back, _) = there.act(&t1.inverse()).normalize().unwrap();
            assert_eq!(back, model);
        }
    }

    #[test]
    fn unimodular_preserves_resultant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let model = random_model(&mut rng, 3, 10);
            // product of elementary matrices
            let k = rng.gen_range(-4..=4);
            let t = ScaledTransform::new(r(1), r(1), r(k), r(0), r(1))
                .unwrap()
                .compose(&ScaledTransform::new(r(1), r(0), r(1), r(-1), r(0)).unwrap())
                .compose(&ScaledTransform::new(r(1), r(1), r(0), r(k + 1), r(-1)).unwrap());
            let out = model.act(&t);
            assert_eq!(out.res_d().abs(), BigRational::from_integer(model.res_d().abs()));
        }
    }

    #[test]
    fn reduction() {
        let base = m(2, &[1, 1, 1], &[1, -1, 1]);
        assert!(base.good_reduction(3));
        assert!(!base.good_reduction(2));
        assert!(!m(2, &[7, 49, 343], &[1, -7, 49]).good_reduction(7));
        assert_eq!(base.reduce_mod_p(3), (vec![1, 1, 1], vec![1, 2, 1]));
    }

    #[test]
    fn factorisation_and_conductor() {
        let scaled = m(2, &[7, 49, 343], &[1, -7, 49]);
        let fac = scaled.factor_resultant(DEFAULT_RHO_BUDGET);
        assert_eq!(fac.to_string(), "2^2 * 7^6");
        assert_eq!(scaled.conductor(DEFAULT_RHO_BUDGET).unwrap(), BigInt::from(14));
        let base = m(2, &[1, 1, 1], &[1, -1, 1]);
        assert_eq!(base.factor_resultant(DEFAULT_RHO_BUDGET).to_string(), "2^2");
        assert_eq!(base.conductor(DEFAULT_RHO_BUDGET).unwrap(), BigInt::from(2));
        let unit = m(2, &[1, 0, 0], &[0, 0, 1]);
        assert_eq!(unit.res_d(), &BigInt::from(1));
        assert!(unit.factor_resultant(DEFAULT_RHO_BUDGET).factors.is_empty());
        assert_eq!(unit.conductor(DEFAULT_RHO_BUDGET).unwrap(), BigInt::from(1));
    }

    #[test]
    fn normalisation_and_validation() {
        let model = Model::new(2, IntPoly::from_i64s(&[-2, 0, -4]), IntPoly::from_i64s(&[-6, -2])).unwrap();
        assert_eq!(model.f_desc(), vec![2.into(), 0.into(), 1.into()]);
        assert_eq!(model.g_desc(), vec![0.into(), 1.into(), 3.into()]);
        assert!(Model::new(2, IntPoly::from_i64s(&[0, 1]), IntPoly::from_i64s(&[0, 2])).is_err());
        assert!(Model::new(2, IntPoly::from_i64s(&[0, 0, 0, 1]), IntPoly::from_i64s(&[1])).is_err());
        assert!(Model::new(1, IntPoly::from_i64s(&[0, 1]), IntPoly::from_i64s(&[1])).is_err());
        assert!(ScaledTransform::from_i64s((1, 1), (1, 1), (2, 1), (2, 1), (4, 1)).is_err());
    }

    #[test]
    fn text_and_json_round_trip() {
        let s = "(86*z^2 - 1068*z - 338)/(z^2 + 7*z - 338)";
        let model = Model::parse(s).unwrap();
        assert_eq!(model.to_string(), s);
        assert_eq!(
            model.to_json().to_string(),
            r#"{"d":2,"f":[86,-1068,-338],"g":[1,7,-338]}"#
        );
        assert_eq!(Model::from_json(&model.to_json()).unwrap(), model);
        let cubic = Model::parse("(z^3 + 1024)/(z)").unwrap();
        assert_eq!(cubic.d(), 3);
        assert_eq!(Model::parse(&cubic.to_string()).unwrap(), cubic);
        let poly = Model::parse("z^2 + 1").unwrap();
        assert_eq!(poly.to_string(), "(z^2 + 1)/(1)");
        let halves = Model::parse("(z^2/2 + 1)/(1)");
        assert!(halves.is_err());
        let scaled = Model::parse("(1/2*z^2 + 1)/(3)").unwrap();
        assert_eq!(scaled.to_string(), "(z^2 + 2)/(6)");
    }
}
