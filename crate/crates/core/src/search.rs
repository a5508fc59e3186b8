//! The integer-orbit search: enumerate prefixes `(0, c_1, ..., c_{2d+1})`
//! of distinct integers, keep those where `D | N`, then interpolate and
//! classify each survivor.
//!
//! Work is split into units, one per `(c_1, c_2)`, and units into
//! contiguous shards. Each shard checkpoints after every unit; the final
//! report is assembled from sorted records and is independent of sharding.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dynamics::{eval, is_polynomial_sq, is_wandering, orbit_capped, preimages, ProjPoint, WanderingStatus};
use crate::globalmin::{minimal_model_with_budget, MinimalStatus};
use crate::interp::{interpolate_i64, nd_cached, Degenerate, Interpolation, Stage, Staged};
use crate::model::{Model, ScaledTransform, DEFAULT_RHO_BUDGET};
use crate::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;
pub const DEFAULT_HORIZON: usize = 32;
/// Orbit points above this size end the integer scan.
pub const SCAN_CAP_BITS: u64 = 1 << 12;
const WORKER_STACK: usize = 256 << 20;
/// A checkpoint rewrites every record so far, so it is throttled.
const CHECKPOINT_EVERY: Duration = Duration::from_secs(5);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub d: usize,
    /// Inclusive range of `c_1`, positive.
    pub c1: (i64, i64),
    /// `c_2, ..., c_{2d+1}` range over `[-window, window]`.
    pub window: i64,
    pub horizon: usize,
    pub budget: u64,
    pub shards: usize,
    /// Worker threads; shards are handed out in order.
    pub threads: usize,
    /// Stop shard `.0` after it completes `.1` units, as if killed.
    pub kill_after: Option<(usize, usize)>,
}

impl SearchConfig {
    pub fn new(d: usize, c1: (i64, i64), window: i64) -> Self {
        SearchConfig {
            d,
            c1,
            window,
            horizon: DEFAULT_HORIZON,
            budget: DEFAULT_RHO_BUDGET,
            shards: 1,
            threads: 1,
            kill_after: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config("degree must be at least 2".into()));
        }
        if self.c1.0 < 1 || self.c1.0 > self.c1.1 {
            return Err(Error::Config(format!("bad c1 range {}..{}", self.c1.0, self.c1.1)));
        }
        if self.window < 1 || self.shards == 0 || self.threads == 0 || self.horizon == 0 {
            return Err(Error::Config("window, shards, threads and horizon must be positive".into()));
        }
        Ok(())
    }

    /// Fields that determine the results; shard layout is excluded.
    pub fn identity_json(&self) -> Value {
        json!({
            "d": self.d,
            "c1": [self.c1.0, self.c1.1],
            "window": self.window,
            "horizon": self.horizon,
        })
    }
}

/// Values available to `c_2, ...` once `c_1` is chosen.
pub fn pool(cfg: &SearchConfig, c1: i64) -> Vec<i64> {
    (-cfg.window..=cfg.window).filter(|&v| v != 0 && v != c1).collect()
}

fn falling(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| n - i).product()
}

/// Closed-form candidate count: `sum over c_1 of P(|pool|, 2d)`.
pub fn count_candidates(cfg: &SearchConfig) -> u128 {
    (cfg.c1.0..=cfg.c1.1).map(|c1| falling(pool(cfg, c1).len() as u128, 2 * cfg.d as u128)).sum()
}

/// All candidate prefixes `(0, c_1, ..., c_{2d+1})` in lexicographic order.
pub struct CandidateIter {
    slots: usize,
    c1: i64,
    c1_hi: i64,
    pool: Vec<i64>,
    idx: Vec<usize>,
    used: Vec<bool>,
    cfg: SearchConfig,
    done: bool,
}

impl CandidateIter {
    fn start(cfg: &SearchConfig, c1: i64, c1_hi: i64) -> Self {
        let mut it = CandidateIter {
            slots: 2 * cfg.d,
            c1,
            c1_hi,
            pool: pool(cfg, c1),
            idx: Vec::new(),
            used: Vec::new(),
            cfg: cfg.clone(),
            done: false,
        };
        it.reset();
        it
    }

    fn reset(&mut self) {
        self.used = vec![false; self.pool.len()];
        self.idx.clear();
        if !self.fill() {
            self.next_c1();
        }
    }

    /// Complete `idx` with the smallest unused entries.
    fn fill(&mut self) -> bool {
        while self.idx.len() < self.slots {
            match (0..self.pool.len()).find(|&i| !self.used[i]) {
                Some(i) => {
                    self.used[i] = true;
                    self.idx.push(i);
                }
                None => return false,
            }
        }
        true
    }

    fn next_c1(&mut self) {
        if self.c1 >= self.c1_hi {
            self.done = true;
            return;
        }
        self.c1 += 1;
        self.pool = pool(&self.cfg, self.c1);
        self.reset();
    }

    fn advance(&mut self) {
        while let Some(i) = self.idx.pop() {
            self.used[i] = false;
            if let Some(j) = (i + 1..self.pool.len()).find(|&j| !self.used[j]) {
                self.used[j] = true;
                self.idx.push(j);
                if self.fill() {
                    return;
                }
                // cannot happen: fewer free entries only if the pool is short
            }
        }
        self.next_c1();
    }
}

impl Iterator for CandidateIter {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let mut out = vec![0, self.c1];
        out.extend(self.idx.iter().map(|&i| self.pool[i]));
        self.advance();
        Some(out)
    }
}

pub fn enumerate_candidates(cfg: &SearchConfig) -> CandidateIter {
    CandidateIter::start(cfg, cfg.c1.0, cfg.c1.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    /// Degenerate interpolation reducing to a map of degree below 2.
    DegreeBelowTwo,
    /// Degenerate interpolation reducing to a minimal map of lower degree.
    NonDegree,
    NonMinimal,
    Polynomial,
    Preperiodic,
    Wandering,
    Inconclusive,
}

impl Class {
    pub fn as_str(&self) -> &'static str {
        match self {
            Class::DegreeBelowTwo => "degree_below_2",
            Class::NonDegree => "non_degree_d",
            Class::NonMinimal => "non_minimal",
            Class::Polynomial => "polynomial",
            Class::Preperiodic => "preperiodic",
            Class::Wandering => "wandering",
            Class::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Class> {
        [Class::DegreeBelowTwo, Class::NonDegree, Class::NonMinimal, Class::Polynomial, Class::Preperiodic, Class::Wandering, Class::Inconclusive]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

/// One prefix with `D | N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    /// `c_0, ..., c_{2d+1}`.
    pub c: Vec<i64>,
    /// `c_{2d+2} = N / D`.
    pub next: BigInt,
    pub model: Option<Model>,
    /// Integers among the first `horizon` orbit points of 0.
    pub integers: usize,
    pub leading_integers: usize,
    /// Some integer maps to 0.
    pub integer_preimage: bool,
    pub minimal: Option<bool>,
    pub cofactor_unknown: bool,
    pub class: Class,
}

impl Record {
    pub fn to_json(&self) -> Value {
        json!({
            "v": FORMAT_VERSION,
            "c": self.c,
            "next": self.next.to_string(),
            "model": self.model.as_ref().map(|m| m.to_json()),
            "integers": self.integers,
            "leading_integers": self.leading_integers,
            "integer_preimage": self.integer_preimage,
            "minimal": self.minimal,
            "cofactor_unknown": self.cofactor_unknown,
            "class": self.class.as_str(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Record> {
        let bad = |what: &str| Error::Checkpoint(format!("bad record field {what}"));
        let c = v["c"].as_array().ok_or_else(|| bad("c"))?.iter().map(|x| x.as_i64().ok_or_else(|| bad("c"))).collect::<Result<Vec<_>>>()?;
        let next: BigInt = v["next"].as_str().ok_or_else(|| bad("next"))?.parse().map_err(|_| bad("next"))?;
        let model = match &v["model"] {
            Value::Null => None,
            m => Some(Model::from_json(m)?),
        };
        Ok(Record {
            c,
            next,
            model,
            integers: v["integers"].as_u64().ok_or_else(|| bad("integers"))? as usize,
            leading_integers: v["leading_integers"].as_u64().ok_or_else(|| bad("leading_integers"))? as usize,
            integer_preimage: v["integer_preimage"].as_bool().ok_or_else(|| bad("integer_preimage"))?,
            minimal: v["minimal"].as_bool(),
            cofactor_unknown: v["cofactor_unknown"].as_bool().ok_or_else(|| bad("cofactor_unknown"))?,
            class: Class::parse(v["class"].as_str().ok_or_else(|| bad("class"))?).ok_or_else(|| bad("class"))?,
        })
    }
}

/// Leading run of integers in the orbit of 0, at most `horizon` long and
/// stopping at the scan cap.
fn leading_integers(m: &Model, horizon: usize) -> usize {
    let mut x = ProjPoint::int(0);
    for k in 0..horizon {
        if !x.is_integer() || x.bits() > SCAN_CAP_BITS {
            return k;
        }
        x = eval(m, &x);
    }
    horizon
}

fn has_integer_preimage_of_zero(m: &Model) -> bool {
    preimages(m, &ProjPoint::int(0)).iter().any(|z| z.is_integer())
}

/// Interpolate and classify a prefix that passed the divisibility filter.
///
/// A degenerate interpolation is a lower-degree map times a common factor.
/// When that map has degree at least 2 it is minimised like any other and,
/// if minimal, counted in `non_degree_d`; a Mobius or constant map is set
/// aside as `degree_below_2`.
pub fn classify(d: usize, c: &[i64], next: BigInt, horizon: usize, budget: u64) -> Result<Record> {
    let mut rec = Record {
        c: c.to_vec(),
        next,
        model: None,
        integers: 0,
        leading_integers: 0,
        integer_preimage: false,
        minimal: None,
        cofactor_unknown: false,
        class: Class::DegreeBelowTwo,
    };
    let (model, full_degree) = match interpolate_i64(d, c)? {
        Interpolation::Map(m) => (m, true),
        Interpolation::Degenerate(Degenerate::ZeroResultant { f, g }) => {
            let h = f.gcd(&g);
            let f = f.div_exact_poly(&h).expect("gcd divides");
            let g = g.div_exact_poly(&h).expect("gcd divides");
            let e = f.degree().unwrap_or(0).max(g.degree().unwrap_or(0));
            if e < 2 {
                return Ok(rec);
            }
            (Model::new(e, f, g)?, false)
        }
        Interpolation::Degenerate(Degenerate::Nullspace(_)) => return Ok(rec),
    };
    rec.integers = orbit_capped(&model, &ProjPoint::int(0), horizon, SCAN_CAP_BITS).integer_count;
    rec.leading_integers = leading_integers(&model, horizon);
    rec.integer_preimage = has_integer_preimage_of_zero(&model);
    let gm = minimal_model_with_budget(&model, budget)?;
    let minimal = gm.transform.is_identity();
    rec.minimal = Some(minimal);
    rec.cofactor_unknown = gm.status == MinimalStatus::MinimalModuloCofactor;
    rec.class = if !minimal {
        Class::NonMinimal
    } else if !full_degree {
        Class::NonDegree
    } else if is_polynomial_sq(&model) {
        Class::Polynomial
    } else {
        match is_wandering(&model, &ProjPoint::int(0)) {
            WanderingStatus::Preperiodic => Class::Preperiodic,
            WanderingStatus::CertifiedWandering => Class::Wandering,
            WanderingStatus::Inconclusive => Class::Inconclusive,
        }
    };
    rec.model = Some(model);
    Ok(rec)
}

/// Summary counts, derived from the sorted records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub candidates: u128,
    pub survivors_divisibility: u64,
    pub degree_below_2: u64,
    pub non_minimal: u64,
    /// Minimal maps of degree d together with minimal lower-degree fits.
    pub minimal_maps: u64,
    pub non_degree_d: u64,
    pub polynomials: u64,
    pub preperiodic: u64,
    pub inconclusive: u64,
    pub final_wandering: u64,
    /// Minimal only up to an unfactored part of the resultant.
    pub minimal_modulo_cofactor: u64,
    /// Final maps up to translates `phi(z + b) - b` and `z -> -z`.
    pub final_up_to_translation: u64,
    /// Final maps whose orbit of 0 starts with `2d + 4` integers.
    pub final_extra_integer: u64,
    /// Final maps sending some integer to 0.
    pub final_integer_preimage: u64,
    /// Translation classes of maps with `2d + 4` consecutive integers in an
    /// orbit, from the two rows above.
    pub long_orbit_classes: u64,
}

impl Counts {
    pub fn from_records(candidates: u128, records: &[Record]) -> Counts {
        let mut c = Counts { candidates, survivors_divisibility: records.len() as u64, ..Counts::default() };
        for r in records {
            match r.class {
                Class::DegreeBelowTwo => c.degree_below_2 += 1,
                Class::NonMinimal => c.non_minimal += 1,
                Class::NonDegree => c.non_degree_d += 1,
                Class::Polynomial => c.polynomials += 1,
                Class::Preperiodic => c.preperiodic += 1,
                Class::Wandering => {
                    c.final_wandering += 1;
                    c.final_extra_integer += (r.leading_integers >= r.c.len() + 2) as u64;
                    c.final_integer_preimage += r.integer_preimage as u64;
                }
                Class::Inconclusive => c.inconclusive += 1,
            }
            if r.minimal == Some(true) && r.cofactor_unknown {
                c.minimal_modulo_cofactor += 1;
            }
        }
        c.minimal_maps = c.survivors_divisibility - c.non_minimal - c.degree_below_2;
        let finals: Vec<&Record> = records.iter().filter(|r| r.class == Class::Wandering).collect();
        c.final_up_to_translation = translation_classes(&finals);
        let long: Vec<&Record> = finals
            .iter()
            .copied()
            .filter(|r| r.leading_integers >= r.c.len() + 2 || r.integer_preimage)
            .collect();
        c.long_orbit_classes = translation_classes(&long);
        c
    }

    /// `final + preperiodic + polynomials + non-degree (+ inconclusive) = minimal`.
    pub fn identity_holds(&self) -> bool {
        self.final_wandering + self.preperiodic + self.polynomials + self.non_degree_d + self.inconclusive == self.minimal_maps
    }

    pub fn to_json(&self) -> Value {
        json!({
            "size_of_search_space": self.candidates.to_string(),
            "orbits_with_next_integer": self.survivors_divisibility,
            "degree_below_2": self.degree_below_2,
            "non_minimal": self.non_minimal,
            "orbits_belonging_to_minimal_maps": self.minimal_maps,
            "non_degree_d": self.non_degree_d,
            "polynomials": self.polynomials,
            "preperiodic": self.preperiodic,
            "inconclusive": self.inconclusive,
            "final_wandering": self.final_wandering,
            "minimal_modulo_cofactor": self.minimal_modulo_cofactor,
            "final_up_to_translation": self.final_up_to_translation,
            "final_extra_integer": self.final_extra_integer,
            "final_integer_preimage": self.final_integer_preimage,
            "long_orbit_classes": self.long_orbit_classes,
        })
    }
}

fn translate(m: &Model, b: &BigRational) -> Option<Model> {
    affine_conj(m, 1, b)
}

fn affine_conj(m: &Model, a: i64, b: &BigRational) -> Option<Model> {
    let one = BigRational::from_integer(1.into());
    let t = ScaledTransform::affine(one, BigRational::from_integer(a.into()), b.clone()).ok()?;
    m.act(&t).normalize().ok().map(|(moved, _)| moved)
}

/// `m` up to `z -> -z`, which the search removes by taking `c_1 > 0`.
fn up_to_sign(m: Model) -> Model {
    let neg = affine_conj(&m, -1, &BigRational::zero()).expect("unimodular");
    std::cmp::min_by_key(m, neg, |x| x.to_json().to_string())
}

/// Integers `b` such that the orbit of 0 under `phi(z + b) - b` is a
/// shifted piece of the integer orbit of 0 under `phi`: the orbit points
/// themselves and the integer preimages of 0.
fn orbit_shifts(r: &Record) -> Vec<BigRational> {
    let m = r.model.as_ref().expect("final records carry a model");
    let mut out = vec![BigRational::zero()];
    let mut x = ProjPoint::int(0);
    for _ in 0..r.leading_integers.max(1) {
        x = eval(m, &x);
        match &x {
            ProjPoint::Finite(b) if b.is_integer() => out.push(b.clone()),
            _ => break,
        }
    }
    for z in preimages(m, &ProjPoint::int(0)) {
        if let ProjPoint::Finite(b) = z {
            if b.is_integer() {
                out.push(b);
            }
        }
    }
    out
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Number of classes among `rs` under `phi ~ phi(z + b) - b` with `b` one
/// of the orbit shifts, and `phi ~ -phi(-z)`.
fn translation_classes(rs: &[&Record]) -> u64 {
    let mut parent: Vec<usize> = (0..rs.len()).collect();
    let mut owner: HashMap<Model, usize> = HashMap::new();
    for (i, r) in rs.iter().enumerate() {
        let m = r.model.as_ref().unwrap();
        for b in orbit_shifts(r) {
            let Some(key) = translate(m, &b).map(up_to_sign) else { continue };
            match owner.get(&key) {
                Some(&j) => {
                    let (x, y) = (find(&mut parent, i), find(&mut parent, j));
                    parent[x.max(y)] = x.min(y);
                }
                None => {
                    owner.insert(key, i);
                }
            }
        }
    }
    (0..rs.len()).filter(|&i| find(&mut parent, i) == i).count() as u64
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub counts: Counts,
    pub records: Vec<Record>,
}

impl SearchReport {
    pub fn to_json(&self) -> Value {
        json!({
            "v": FORMAT_VERSION,
            "config": self.config.identity_json(),
            "counts": self.counts.to_json(),
            "identity_holds": self.counts.identity_holds(),
        })
    }

    pub fn records_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&r.to_json().to_string());
            s.push('\n');
        }
        s
    }
}

/// `(c_1, c_2)` pairs in lexicographic order.
pub fn units(cfg: &SearchConfig) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for c1 in cfg.c1.0..=cfg.c1.1 {
        for c2 in pool(cfg, c1) {
            out.push((c1, c2));
        }
    }
    out
}

pub fn shard_range(n_units: usize, shards: usize, k: usize) -> std::ops::Range<usize> {
    (n_units * k / shards)..(n_units * (k + 1) / shards)
}

enum Evaluator {
    Staged(Staged),
    Big,
}

fn evaluator(cfg: &SearchConfig) -> Evaluator {
    let st = Staged::new(cfg.d);
    if cfg.window.max(cfg.c1.1) <= st.bound {
        Evaluator::Staged(st)
    } else {
        Evaluator::Big
    }
}

/// All candidates in one unit: returns the count and the prefixes with
/// `D | N` together with `N / D`.
fn scan_unit(cfg: &SearchConfig, ev: &Evaluator, unit: (i64, i64)) -> (u128, Vec<(Vec<i64>, BigInt)>) {
    let (c1, c2) = unit;
    let pool: Vec<i64> = pool(cfg, c1).into_iter().filter(|&v| v != c2).collect();
    let slots = 2 * cfg.d - 1;
    let mut hits = Vec::new();
    let mut count = 0u128;
    let mut prefix = vec![0i64, c1, c2];
    let mut used = vec![false; pool.len()];
    match ev {
        Evaluator::Staged(st) => {
            let mut stages: Vec<Stage> = (0..=2 * cfg.d).map(|_| st.empty_stage()).collect();
            stages[0] = st.root();
            let (a, b) = stages.split_at_mut(1);
            st.fix(&a[0], c1, &mut b[0]);
            let (a, b) = stages.split_at_mut(2);
            st.fix(&a[1], c2, &mut b[0]);
            staged_dfs(st, &pool, &mut used, &mut prefix, &mut stages, 2, slots, &mut count, &mut hits);
        }
        Evaluator::Big => {
            let nd = nd_cached(cfg.d, true);
            big_dfs(&nd, &pool, &mut used, &mut prefix, slots, &mut count, &mut hits);
        }
    }
    (count, hits)
}

#[allow(clippy::too_many_arguments)]
fn staged_dfs(
    st: &Staged,
    pool: &[i64],
    used: &mut [bool],
    prefix: &mut Vec<i64>,
    stages: &mut [Stage],
    level: usize,
    left: usize,
    count: &mut u128,
    hits: &mut Vec<(Vec<i64>, BigInt)>,
) {
    if left == 1 {
        let s = &stages[level];
        for (i, &v) in pool.iter().enumerate() {
            if used[i] {
                continue;
            }
            *count += 1;
            let (n, den) = st.eval_last(s, v);
            if den != 0 && n % den == 0 {
                let mut c = prefix.clone();
                c.push(v);
                hits.push((c, BigInt::from(n / den)));
            }
        }
        return;
    }
    for i in 0..pool.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        prefix.push(pool[i]);
        let (a, b) = stages.split_at_mut(level + 1);
        st.fix(&a[level], pool[i], &mut b[0]);
        staged_dfs(st, pool, used, prefix, stages, level + 1, left - 1, count, hits);
        prefix.pop();
        used[i] = false;
    }
}

fn big_dfs(
    nd: &(crate::interp::SparsePoly, crate::interp::SparsePoly),
    pool: &[i64],
    used: &mut [bool],
    prefix: &mut Vec<i64>,
    left: usize,
    count: &mut u128,
    hits: &mut Vec<(Vec<i64>, BigInt)>,
) {
    if left == 0 {
        *count += 1;
        let x: Vec<BigInt> = prefix.iter().map(|&v| BigInt::from(v)).collect();
        let den = nd.1.eval(&x);
        if !den.is_zero() {
            let n = nd.0.eval(&x);
            if (&n % &den).is_zero() {
                hits.push((prefix.clone(), n / den));
            }
        }
        return;
    }
    for i in 0..pool.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        prefix.push(pool[i]);
        big_dfs(nd, pool, used, prefix, left - 1, count, hits);
        prefix.pop();
        used[i] = false;
    }
}

/// Scan and classify every unit in `range`.
pub fn run_units(cfg: &SearchConfig, range: std::ops::Range<usize>) -> Result<(u128, Vec<Record>)> {
    let ev = evaluator(cfg);
    let all = units(cfg);
    let mut total = 0;
    let mut records = Vec::new();
    for u in &all[range] {
        let (n, hits) = scan_unit(cfg, &ev, *u);
        total += n;
        for (c, next) in hits {
            records.push(classify(cfg.d, &c, next, cfg.horizon, cfg.budget)?);
        }
    }
    Ok((total, records))
}

struct ShardState {
    next_unit: usize,
    candidates: u128,
    records: Vec<Record>,
}

fn checkpoint_path(dir: &Path, k: usize) -> PathBuf {
    dir.join("checkpoints").join(format!("shard-{k:04}.json"))
}

fn sha256_hex(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_checkpoint(cfg: &SearchConfig, dir: &Path, k: usize, last: (i64, i64), st: &ShardState) -> Result<()> {
    let payload = json!({
        "v": FORMAT_VERSION,
        "config": cfg.identity_json(),
        "shard": k,
        "shards": cfg.shards,
        "next_unit": st.next_unit,
        "candidates": st.candidates.to_string(),
        "records": st.records.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });
    let body = payload.to_string();
    let file = json!({
        "v": FORMAT_VERSION,
        "shard": k,
        "last_prefix": [0, last.0, last.1],
        "checksum": sha256_hex(&body),
        "payload": body,
    });
    let path = checkpoint_path(dir, k);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, file.to_string())?;
    fs::rename(&tmp, &path)?;
    Ok(())
}

/// A valid checkpoint for this shard, or `None` (missing, corrupt or from a
/// different configuration), in which case the shard restarts.
fn read_checkpoint(cfg: &SearchConfig, dir: &Path, k: usize) -> Option<ShardState> {
    let text = fs::read_to_string(checkpoint_path(dir, k)).ok()?;
    let file: Value = serde_json::from_str(&text).ok()?;
    let body = file["payload"].as_str()?;
    if file["checksum"].as_str()? != sha256_hex(body) {
        return None;
    }
    let p: Value = serde_json::from_str(body).ok()?;
    if p["v"] != json!(FORMAT_VERSION)
        || p["config"] != cfg.identity_json()
        || p["shard"].as_u64()? != k as u64
        || p["shards"].as_u64()? != cfg.shards as u64
    {
        return None;
    }
    let records = p["records"].as_array()?.iter().map(Record::from_json).collect::<Result<Vec<_>>>().ok()?;
    Some(ShardState {
        next_unit: p["next_unit"].as_u64()? as usize,
        candidates: p["candidates"].as_str()?.parse().ok()?,
        records,
    })
}

fn run_shard(cfg: &SearchConfig, ev: &Evaluator, all: &[(i64, i64)], k: usize, dir: Option<&Path>) -> Result<ShardState> {
    let range = shard_range(all.len(), cfg.shards, k);
    let mut st = dir
        .and_then(|d| read_checkpoint(cfg, d, k))
        .filter(|s| range.contains(&s.next_unit) || s.next_unit == range.end)
        .unwrap_or(ShardState { next_unit: range.start, candidates: 0, records: Vec::new() });
    let mut done_here = 0;
    let mut last_write = Instant::now();
    while st.next_unit < range.end {
        if let Some((ks, n)) = cfg.kill_after {
            if ks == k && done_here == n {
                if let (Some(d), true) = (dir, n > 0) {
                    write_checkpoint(cfg, d, k, all[st.next_unit - 1], &st)?;
                }
                return Err(Error::Interrupted(format!("shard {k} stopped after {n} units")));
            }
        }
        let (n, hits) = scan_unit(cfg, ev, all[st.next_unit]);
        st.candidates += n;
        for (c, next) in hits {
            st.records.push(classify(cfg.d, &c, next, cfg.horizon, cfg.budget)?);
        }
        st.next_unit += 1;
        done_here += 1;
        if let Some(d) = dir {
            if st.next_unit == range.end || last_write.elapsed() >= CHECKPOINT_EVERY {
                write_checkpoint(cfg, d, k, all[st.next_unit - 1], &st)?;
                last_write = Instant::now();
            }
        }
    }
    Ok(st)
}

/// Run all shards (on `cfg.threads` workers), merge, and write
/// `report.json` and `survivors.jsonl` under `out` when given.
pub fn run_search(cfg: &SearchConfig, out: Option<&Path>) -> Result<SearchReport> {
    cfg.validate()?;
    if let Some(dir) = out {
        fs::create_dir_all(dir.join("checkpoints"))?;
    }
    let ev = evaluator(cfg);
    let all = units(cfg);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<Result<ShardState>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.threads.min(cfg.shards))
            .map(|_| {
                std::thread::Builder::new().stack_size(WORKER_STACK).spawn_scoped(scope, || {
                    let mut mine = Vec::new();
                    loop {
                        let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                        if k >= cfg.shards {
                            break;
                        }
                        mine.push((k, run_shard(cfg, &ev, &all, k, out)));
                    }
                    mine
                })
                .expect("spawn worker")
            })
            .collect();
        let mut flat: Vec<(usize, Result<ShardState>)> = handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect();
        flat.sort_by_key(|(k, _)| *k);
        flat.into_iter().map(|(_, r)| r).collect()
    });
    let mut candidates = 0;
    let mut records = Vec::new();
    for r in results {
        let st = r?;
        candidates += st.candidates;
        records.extend(st.records);
    }
    records.sort_by(|a, b| a.c.cmp(&b.c));
    let counts = Counts::from_records(candidates, &records);
    let report = SearchReport { config: cfg.clone(), counts, records };
    if let Some(dir) = out {
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report.to_json())? + "\n")?;
        fs::write(dir.join("survivors.jsonl"), report.records_jsonl())?;
    }
    Ok(report)
}

/// Per-candidate cost of the divisibility scan, in nanoseconds, measured on
/// the first unit of `cfg`.
pub fn benchmark_scan(cfg: &SearchConfig) -> (u128, f64) {
    let ev = evaluator(cfg);
    let u = units(cfg)[0];
    let t = Instant::now();
    let (n, _) = scan_unit(cfg, &ev, u);
    let ns = t.elapsed().as_nanos() as f64 / n.max(1) as f64;
    (n, ns)
}

/// `next` as an `i64`, for display.
pub fn next_i64(r: &Record) -> Option<i64> {
    r.next.to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_counts() {
        assert_eq!(count_candidates(&SearchConfig::new(3, (1, 10), 10)), 195_350_400);
        assert_eq!(count_candidates(&SearchConfig::new(2, (1, 2), 2)), 0);
        assert_eq!(count_candidates(&SearchConfig::new(2, (1, 2), 3)), 240);
        assert_eq!(count_candidates(&SearchConfig::new(2, (1, 100), 100)), 152_139_002_400);
        assert_eq!(enumerate_candidates(&SearchConfig::new(2, (1, 2), 2)).count(), 0);
    }

    #[test]
    fn stream_matches_brute_force() {
        for (d, c1, w) in [(2usize, (1i64, 2i64), 3i64), (2, (1, 5), 3), (3, (1, 3), 4)] {
            let cfg = SearchConfig::new(d, c1, w);
            let stream: Vec<Vec<i64>> = enumerate_candidates(&cfg).collect();
            let mut brute = Vec::new();
            let n = 2 * d;
            for c1 in c1.0..=c1.1 {
                let mut idx = vec![0usize; n];
                let vals: Vec<i64> = (-w..=w).collect();
                'outer: loop {
                    let t: Vec<i64> = idx.iter().map(|&i| vals[i]).collect();
                    let mut all = vec![0, c1];
                    all.extend(&t);
                    let mut s = all.clone();
                    s.sort();
                    s.dedup();
                    if s.len() == all.len() {
                        brute.push(all);
                    }
                    for k in (0..n).rev() {
                        idx[k] += 1;
                        if idx[k] < vals.len() {
                            continue 'outer;
                        }
                        idx[k] = 0;
                    }
                    break;
                }
            }
            assert_eq!(stream, brute);
            assert_eq!(stream.len() as u128, count_candidates(&cfg));
            let total: u128 = run_units(&cfg, 0..units(&cfg).len()).unwrap().0;
            assert_eq!(total, count_candidates(&cfg));
        }
    }

    #[test]
    fn known_prefix_survives() {
        let cfg = SearchConfig::new(2, (1, 1), 15);
        let all = units(&cfg);
        let k = all.iter().position(|&u| u == (1, 4)).unwrap();
        let (_, recs) = run_units(&cfg, k..k + 1).unwrap();
        let r = recs.iter().find(|r| r.c == vec![0, 1, 4, 11, 12, 7]).expect("survivor");
        assert_eq!(r.next, BigInt::from(15));
        assert_eq!(r.minimal, Some(true));
        assert!(r.integers >= 8);
        assert_eq!(r.class, Class::Wandering);
    }

    #[test]
    fn scanning_agrees_with_big_integers() {
        let cfg = SearchConfig::new(2, (3, 3), 7);
        let staged = evaluator(&cfg);
        assert!(matches!(staged, Evaluator::Staged(_)));
        for u in units(&cfg) {
            let a = scan_unit(&cfg, &staged, u);
            let b = scan_unit(&cfg, &Evaluator::Big, u);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn records_round_trip() {
        let r = classify(2, &[0, 1, 4, 11, 12, 7], BigInt::from(15), 16, DEFAULT_RHO_BUDGET).unwrap();
        assert_eq!(Record::from_json(&r.to_json()).unwrap(), r);
        let deg = classify(2, &[0, 1, 3, 7, 15, 31], BigInt::from(63), 16, DEFAULT_RHO_BUDGET).unwrap();
        assert_eq!(deg.class, Class::DegreeBelowTwo);
        assert_eq!(Record::from_json(&deg.to_json()).unwrap(), deg);
    }

    #[test]
    fn shards_and_resume_are_deterministic() {
        let base = SearchConfig::new(2, (1, 4), 6);
        let one = run_search(&base, None).unwrap();
        assert!(one.counts.identity_holds());
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = base.clone();
        cfg.shards = 5;
        cfg.threads = 3;
        cfg.kill_after = Some((2, 1));
        assert!(run_search(&cfg, Some(dir.path())).is_err());
        cfg.kill_after = None;
        let resumed = run_search(&cfg, Some(dir.path())).unwrap();
        assert_eq!(resumed.to_json(), one.to_json());
        assert_eq!(resumed.records_jsonl(), one.records_jsonl());
        // a corrupted checkpoint is discarded and the shard recomputed
        let p = checkpoint_path(dir.path(), 0);
        let text = fs::read_to_string(&p).unwrap().replacen("next_unit", "next_unlt", 1);
        fs::write(&p, text).unwrap();
        assert!(read_checkpoint(&cfg, dir.path(), 0).is_none());
        let again = run_search(&cfg, Some(dir.path())).unwrap();
        assert_eq!(again.records_jsonl(), one.records_jsonl());
    }
}
