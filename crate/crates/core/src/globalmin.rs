//! Global minimal models over the integers.
//!
//! Only primes whose exponent in `Res_d` reaches `d gcd(2, d+1)` can be
//! reduced, so the local minimiser runs on those, smallest first. A local
//! translation has only powers of `p` in its denominator and is therefore
//! integral and invertible at every other prime.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::localmin::{local_minimal_model, p_pow, triviality_threshold};
use crate::model::{factor_integer, FactoredInteger, Model, ScaledTransform, DEFAULT_RHO_BUDGET, TRIAL_BOUND};
use crate::Result;

/// `(lambda, [[alpha, beta], [0, 1]])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalTransform {
    pub lambda: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
}

impl GlobalTransform {
    pub fn identity() -> Self {
        GlobalTransform { lambda: BigRational::one(), alpha: BigRational::one(), beta: BigRational::zero() }
    }

    pub fn is_identity(&self) -> bool {
        self.lambda.is_one() && self.alpha.is_one() && self.beta.is_zero()
    }

    pub fn to_scaled(&self) -> ScaledTransform {
        ScaledTransform::affine(self.lambda.clone(), self.alpha.clone(), self.beta.clone())
            .expect("alpha and lambda are nonzero")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinimalStatus {
    Exact,
    /// Some part of `Res_d` could not be factored and might hide a prime
    /// to a high enough power.
    MinimalModuloCofactor,
}

impl MinimalStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MinimalStatus::Exact => "EXACT",
            MinimalStatus::MinimalModuloCofactor => "MINIMAL_MODULO_COFACTOR",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GlobalResult {
    pub transform: GlobalTransform,
    pub model: Model,
    pub status: MinimalStatus,
    /// Factorisation of the input resultant.
    pub factorization: FactoredInteger,
    /// Primes where the local minimiser made a change.
    pub reduced_at: Vec<u64>,
}

pub fn minimal_model(m: &Model) -> Result<GlobalResult> {
    minimal_model_with_budget(m, DEFAULT_RHO_BUDGET)
}

pub fn minimal_model_with_budget(m: &Model, budget: u64) -> Result<GlobalResult> {
    let t = triviality_threshold(m.d()) as u32;
    // an unfactored part below TRIAL_BOUND^t cannot hold a t-th prime power
    let skip = BigUint::from(TRIAL_BOUND).pow(t);
    let fac = factor_integer(m.res_d(), budget, Some(&skip));
    let mut status = if fac.unfactored.iter().product::<BigUint>() < skip {
        MinimalStatus::Exact
    } else {
        MinimalStatus::MinimalModuloCofactor
    };
    let mut tot = GlobalTransform::identity();
    let mut current = m.clone();
    let mut reduced_at = Vec::new();
    for (p, e) in &fac.factors {
        if *e < t {
            continue;
        }
        let Some(p) = p.to_u64() else {
            status = MinimalStatus::MinimalModuloCofactor;
            continue;
        };
        let (lt, next) = local_minimal_model(&current, p)?;
        if lt.is_identity() {
            continue;
        }
        let (check, s) = current.act(&lt.to_scaled()).normalize()?;
        debug_assert_eq!(check, next);
        tot.lambda *= p_pow(p, lt.e1) * s;
        tot.beta += &tot.alpha * &lt.beta;
        tot.alpha *= p_pow(p, lt.e2);
        current = next;
        reduced_at.push(p);
    }
    Ok(GlobalResult { transform: tot, model: current, status, factorization: fac, reduced_at })
}

/// Whether `m` is already minimal, and how sure the answer is.
pub fn is_minimal(m: &Model) -> Result<(bool, MinimalStatus)> {
    let r = minimal_model(m)?;
    Ok((r.transform.is_identity(), r.status))
}

/// `|Res_d|` ratio between input and output, for reporting.
pub fn resultant_drop(input: &Model, output: &Model) -> BigInt {
    (input.res_d() / output.res_d()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::distinct_prime_factors_u64;
    use crate::polyval::padic_val_int;
    use rand::{Rng, SeedableRng};

    fn model(d: usize, f: &[i64], g: &[i64]) -> Model {
        Model::from_i64s_desc(d, f, g).unwrap()
    }

    fn check_sound(m: &Model, r: &GlobalResult) {
        let (out, s) = m.act(&r.transform.to_scaled()).normalize().unwrap();
        assert_eq!(out, r.model);
        assert!(s.is_one());
    }

    #[test]
    fn scaled_map_is_not_minimal() {
        let m = model(2, &[7, 49, 343], &[1, -7, 49]);
        let r = minimal_model(&m).unwrap();
        check_sound(&m, &r);
        assert_eq!(r.model.res_d().abs(), BigInt::from(4));
        assert_eq!(r.status, MinimalStatus::Exact);
        // unimodular conjugate of the unscaled map
        let base = model(2, &[1, 1, 1], &[1, -1, 1]);
        assert_eq!(r.model.res_d().abs(), base.res_d().abs());
        assert_eq!(is_minimal(&m).unwrap(), (false, MinimalStatus::Exact));
    }

    #[test]
    fn section_six_example() {
        let m = model(2, &[-54, 16, 128], &[1, -41, 64]);
        let r = minimal_model(&m).unwrap();
        check_sound(&m, &r);
        assert!(r.model.res_d().abs() < m.res_d().abs());
        // the explicit conjugate by z -> 8z
        let t = ScaledTransform::from_i64s((1, 1), (8, 1), (0, 1), (0, 1), (1, 1)).unwrap();
        let (psi, _) = m.act(&t).normalize().unwrap();
        assert_eq!(psi, model(2, &[-54, 2, 2], &[8, -41, 8]));
        assert_eq!(r.model.res_d().abs(), psi.res_d().abs());
    }

    #[test]
    fn minimal_inputs_are_unchanged() {
        for m in [
            model(2, &[86, -1068, -338], &[1, 7, -338]),
            model(3, &[1, 0, 0, 1024], &[0, 0, 1, 0]),
            model(3, &[2, 0, 0, -1], &[0, 0, 1, 0]),
        ] {
            let r = minimal_model(&m).unwrap();
            assert!(r.transform.is_identity());
            assert_eq!(r.model, m);
            assert_eq!(is_minimal(&m).unwrap(), (true, MinimalStatus::Exact));
        }
    }

    fn random_model(rng: &mut impl Rng, d: usize, bound: i64) -> Model {
        loop {
            let f: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
            let g: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
            if let Ok(m) = Model::from_i64s_desc(d, &f, &g) {
                return m;
            }
        }
    }

    fn random_gl2z(rng: &mut impl Rng) -> ScaledTransform {
        loop {
            let v: Vec<i64> = (0..4).map(|_| rng.gen_range(-3..=3)).collect();
            if (v[0] * v[3] - v[1] * v[2]).abs() == 1 {
                return ScaledTransform::from_i64s((1, 1), (v[0], 1), (v[1], 1), (v[2], 1), (v[3], 1)).unwrap();
            }
        }
    }

    /// Random model conjugated by a scaling so that several primes need work.
    fn random_scaled(rng: &mut impl Rng, d: usize) -> Model {
        let base = random_model(rng, d, 5);
        let a = [1i64, 2, 3, 5, 6, 10][rng.gen_range(0..6)];
        let b = rng.gen_range(-4..=4);
        let den = [1i64, 2, 3][rng.gen_range(0..3)];
        let t = ScaledTransform::from_i64s((1, 1), (a, den), (b, den), (0, 1), (1, 1)).unwrap();
        base.act(&t).normalize().unwrap().0
    }

    #[test]
    fn global_invariants() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for i in 0..60 {
            let d = if i % 3 == 0 { 3 } else { 2 };
            let m = if i % 2 == 0 { random_model(&mut rng, d, 20) } else { random_scaled(&mut rng, d) };
            let r = minimal_model(&m).unwrap();
            check_sound(&m, &r);
            assert_eq!(r.status, MinimalStatus::Exact);
            // prime-by-prime drop is a multiple of gcd(2d, d^2 + d)
            let q = resultant_drop(&m, &r.model);
            assert!((m.res_d() % r.model.res_d()).is_zero());
            let step = num_integer::gcd(2 * d, d * d + d) as i64;
            let qn = q.to_u64().unwrap();
            for p in distinct_prime_factors_u64(qn) {
                let k = padic_val_int(&q, p).finite().unwrap();
                assert_eq!(k % step, 0, "{m}: drop {q}");
            }
            if r.transform.is_identity() {
                assert_eq!(r.model, m);
            }
            let again = minimal_model(&r.model).unwrap();
            assert!(again.transform.is_identity());
            // affine sufficiency: GL2(Z) conjugates minimise to the same |Res|
            let (conj, _) = r.model.act(&random_gl2z(&mut rng)).normalize().unwrap();
            assert_eq!(conj.res_d().abs(), r.model.res_d().abs());
            let rc = minimal_model(&conj).unwrap();
            assert_eq!(rc.model.res_d().abs(), r.model.res_d().abs());
        }
    }

    #[test]
    fn unfactorable_cofactor_degrades_status() {
        // z^2 / (p1 p2) is conjugate to z^2 by z -> p1 p2 z; Res_d = (p1 p2)^2
        let c = BigInt::from(1_099_511_627_791u64) * BigInt::from(1_099_511_628_401u64);
        let f = [BigInt::one(), BigInt::zero(), BigInt::zero()];
        let g = [BigInt::zero(), BigInt::zero(), c];
        let m = Model::from_desc(2, &f, &g).unwrap();
        let stuck = minimal_model_with_budget(&m, 0).unwrap();
        assert_eq!(stuck.status, MinimalStatus::MinimalModuloCofactor);
        assert!(stuck.transform.is_identity());
        let solved = minimal_model(&m).unwrap();
        assert_eq!(solved.status, MinimalStatus::Exact);
        check_sound(&m, &solved);
        assert!(solved.model.res_d().abs().is_one());
    }
}
