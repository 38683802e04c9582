//! `(n, ε)`-basic special convex combinations: generation by repeated
//! averages, the defining check, renormalization and block lifting.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::schreier::{max_schreier_sum, member};
use crate::vector::{format_rational, successive, Rational, SparseVector};

/// Largest support the generator will build.
pub const MAX_SCC_SUPPORT: usize = 4096;

/// Where the support of a generated combination is drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ground {
    /// `start, start + step, start + 2·step, ...`
    Progression { start: u64, step: u64 },
    /// An explicit increasing finite pool.
    Pool(Vec<u64>),
}

impl Ground {
    pub fn from(start: u64) -> Self {
        Ground::Progression { start, step: 1 }
    }

    fn nth(&self, k: usize) -> Option<u64> {
        match self {
            Ground::Progression { start, step } => step.checked_mul(k as u64).and_then(|o| o.checked_add(*start)),
            Ground::Pool(p) => p.get(k).copied(),
        }
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ground::Progression { start, step: 1 } => write!(f, "{start}.."),
            Ground::Progression { start, step } => write!(f, "{start}..:{step}"),
            Ground::Pool(p) => {
                let s: Vec<String> = p.iter().map(u64::to_string).collect();
                write!(f, "{{{}}}", s.join(","))
            }
        }
    }
}

impl FromStr for Ground {
    type Err = Error;

    /// `4..` (all `k >= 4`), `4..:3` (step 3) or a pool `{4,6,9}`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad ground set `{s}`"));
        if let Some(body) = s.strip_prefix('{').and_then(|b| b.strip_suffix('}')) {
            let mut pool = Vec::new();
            for t in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let v: u64 = t.parse().map_err(|_| bad())?;
                if v == 0 || pool.last().map_or(false, |&p| p >= v) {
                    return Err(Error::Parse(format!("pool `{s}` must be increasing and positive")));
                }
                pool.push(v);
            }
            return Ok(Ground::Pool(pool));
        }
        let (head, step) = match s.split_once("..") {
            Some((h, rest)) if rest.is_empty() => (h, 1),
            Some((h, rest)) => (h, rest.strip_prefix(':').ok_or_else(bad)?.parse().map_err(|_| bad())?),
            None => return Err(bad()),
        };
        let start: u64 = head.parse().map_err(|_| bad())?;
        if start == 0 || step == 0 {
            return Err(bad());
        }
        Ok(Ground::Progression { start, step })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccSpec {
    pub n: usize,
    pub eps: Rational,
    pub ground: Ground,
}

impl SccSpec {
    pub fn new(n: usize, eps: Rational, ground: Ground) -> Result<Self> {
        if !(eps.is_positive() && eps < Rational::one()) {
            return Err(Error::Invalid(format!("ε = {} must lie in (0, 1)", format_rational(&eps))));
        }
        if n == 0 {
            return Err(Error::Invalid("an s.c.c. needs n >= 1".into()));
        }
        Ok(Self { n, eps, ground })
    }
}

/// Outcome of [`check_basic_scc`] with the reason it failed, if it did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccCheck {
    pub ok: bool,
    pub diagnostics: Vec<String>,
    /// `max Σ_{k∈G} c_k` over `G ⊆ F` in `S_{n-1}`, when computed.
    pub schreier_sum: Option<Rational>,
}

/// The `n`-th repeated average rooted at ground position `pos`: `e_m` for
/// `n = 0`, else the average of `m` successive `(n-1)`-averages, where `m`
/// is the ground element at `pos`. Returns the entries and the next free
/// ground position.
fn repeated_average(ground: &Ground, n: usize, pos: usize, out: &mut Vec<(u64, Rational)>, scale: &Rational) -> Result<usize> {
    let m = ground.nth(pos).ok_or_else(|| Error::Budget("ground pool exhausted".into()))?;
    if n == 0 {
        out.push((m, scale.clone()));
        return Ok(pos + 1);
    }
    let inner = scale / Rational::from_integer(m.into());
    let mut next = pos;
    for _ in 0..m {
        next = repeated_average(ground, n - 1, next, out, &inner)?;
        if out.len() > MAX_SCC_SUPPORT {
            return Err(Error::Budget(format!("repeated average exceeds {MAX_SCC_SUPPORT} terms")));
        }
    }
    Ok(next)
}

/// Averages of `k` successive `(n-1)`-fold repeated averages rooted at
/// increasing ground elements `m`, for `k = 1..=m`, until one passes
/// [`check_basic_scc`]. Taking the fewest top-level blocks keeps the
/// support small.
pub fn generate_basic_scc(spec: &SccSpec) -> Result<SparseVector> {
    let exhausted = |msg: String| {
        Error::Budget(format!("no ({}, {})-basic s.c.c. found on {}: {msg}", spec.n, format_rational(&spec.eps), spec.ground))
    };
    for pos in 0.. {
        let m = spec.ground.nth(pos).ok_or_else(|| exhausted("ground pool exhausted".into()))?;
        let mut blocks: Vec<Vec<(u64, Rational)>> = Vec::new();
        let mut next = pos;
        for k in 1..=m {
            let mut block = Vec::new();
            next = match repeated_average(&spec.ground, spec.n - 1, next, &mut block, &Rational::one()) {
                Ok(p) => p,
                Err(Error::Budget(msg)) => return Err(exhausted(msg)),
                Err(e) => return Err(e),
            };
            blocks.push(block);
            if blocks.iter().map(Vec::len).sum::<usize>() > MAX_SCC_SUPPORT {
                return Err(exhausted(format!("support exceeds {MAX_SCC_SUPPORT} terms")));
            }
            let w = Rational::from_integer(k.into()).recip();
            let entries: Vec<(u64, Rational)> = blocks.iter().flatten().map(|(i, c)| (*i, c * &w)).collect();
            let x = SparseVector::from_pairs(&entries);
            if check_basic_scc(&x, spec.n, &spec.eps).ok {
                return Ok(x);
            }
        }
    }
    unreachable!("the loop only exits by returning")
}

/// Whether `x = Σ c_k e_k` is an `(n, ε)`-basic s.c.c.: `F ∈ S_n`,
/// `c_k >= 0` summing to 1, and every `G ⊆ F` in `S_{n-1}` has mass `< ε`.
pub fn check_basic_scc(x: &SparseVector, n: usize, eps: &Rational) -> SccCheck {
    let fail = |msg: String, sum: Option<Rational>| SccCheck { ok: false, diagnostics: vec![msg], schreier_sum: sum };
    if n == 0 {
        return fail("n must be >= 1".into(), None);
    }
    if x.len() == 0 {
        return fail("empty support".into(), None);
    }
    if let Some((k, c)) = x.iter().find(|(_, c)| c.is_negative()) {
        return fail(format!("negative coefficient {} at {k}", format_rational(c)), None);
    }
    if x.sum() != Rational::one() {
        return fail(format!("coefficients sum to {}", format_rational(&x.sum())), None);
    }
    let f = x.support();
    match member(n, &f) {
        Ok(true) => {}
        Ok(false) => return fail(format!("support is not in S_{n}"), None),
        Err(e) => return fail(format!("support: {e}"), None),
    }
    let sum = match max_schreier_sum(n - 1, x) {
        Ok(s) => s,
        Err(e) => return fail(format!("S_{} mass: {e}", n - 1), None),
    };
    if sum >= *eps {
        let msg = format!("a set in S_{} carries mass {} >= ε = {}", n - 1, format_rational(&sum), format_rational(eps));
        return fail(msg, Some(sum));
    }
    SccCheck { ok: true, diagnostics: Vec::new(), schreier_sum: Some(sum) }
}

/// Drops `min F` and rescales the rest to sum 1. For an `(n, ε)`-basic
/// s.c.c. the result is an `(n, 2ε)`-basic s.c.c.
pub fn drop_min_renormalize(x: &SparseVector, eps: &Rational) -> Result<SparseVector> {
    if *eps >= Rational::new(1.into(), 2.into()) {
        return Err(Error::Invalid(format!("ε = {} must be below 1/2", format_rational(eps))));
    }
    let min = x.min_supp().ok_or_else(|| Error::Invalid("empty vector".into()))?;
    let mut rest = x.clone();
    rest.set(min.clone(), Rational::zero());
    let total = rest.sum();
    if !total.is_positive() {
        return Err(Error::Invalid("no mass left after dropping min F".into()));
    }
    Ok(rest.scale(&total.recip()))
}

/// `Σ c_k x_k` for successive blocks, provided `Σ c_k e_{ψ(k)}` with
/// `ψ(k) = min supp x_k` is an `(n, ε)`-basic s.c.c.
pub fn lift_to_scc(blocks: &[SparseVector], coeffs: &[Rational], n: usize, eps: &Rational) -> Result<SparseVector> {
    if blocks.len() != coeffs.len() {
        return Err(Error::Invalid(format!("{} blocks but {} coefficients", blocks.len(), coeffs.len())));
    }
    if !successive(blocks)? {
        return Err(Error::Invalid("blocks are not successive".into()));
    }
    let mut basic = SparseVector::default();
    let mut out = SparseVector::default();
    for (x, c) in blocks.iter().zip(coeffs) {
        basic.add_at(x.min_supp().expect("non-zero block").clone(), c.clone());
        out = out.plus(&x.scale(c));
    }
    let check = check_basic_scc(&basic, n, eps);
    if !check.ok {
        return Err(Error::Invalid(format!("ψ-projection is not a basic s.c.c.: {}", check.diagnostics.join("; "))));
    }
    Ok(out)
}

/// Elements of `F` as naturals, for callers that enumerate subsets.
pub fn support_vec(x: &SparseVector) -> Vec<BigUint> {
    x.iter().map(|(k, _)| k.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::rat;

    fn uniform(range: std::ops::RangeInclusive<u64>) -> SparseVector {
        let k = range.clone().count() as i64;
        SparseVector::from_pairs(&range.map(|i| (i, rat(1, k))).collect::<Vec<_>>())
    }

    #[test]
    fn generator_examples() {
        let x = generate_basic_scc(&SccSpec::new(1, rat(3, 10), Ground::from(4)).unwrap()).unwrap();
        assert_eq!(x, uniform(4..=7));
        let x = generate_basic_scc(&SccSpec::new(1, rat(1, 2), Ground::from(2)).unwrap()).unwrap();
        assert_eq!(x, uniform(3..=5));
        let spec = SccSpec::new(2, rat(1, 4), Ground::from(4)).unwrap();
        let x = generate_basic_scc(&spec).unwrap();
        assert!(check_basic_scc(&x, 2, &rat(1, 4)).ok);
        // Rooted at 5: five 1-averages of sizes 5, 10, 20, 40, 80.
        assert_eq!(x.len(), 155);
        assert_eq!(x.get(&5u32.into()), rat(1, 25));
    }

    #[test]
    fn exhausted_pool() {
        let spec = SccSpec::new(1, rat(1, 10), Ground::Pool(vec![3, 4, 5, 6])).unwrap();
        assert!(matches!(generate_basic_scc(&spec), Err(Error::Budget(_))));
    }

    #[test]
    fn check_examples() {
        let x = uniform(4..=7);
        assert!(check_basic_scc(&x, 1, &rat(3, 10)).ok);
        let c = check_basic_scc(&x, 1, &rat(1, 5));
        assert!(!c.ok);
        assert_eq!(c.schreier_sum, Some(rat(1, 4)));
        let neg = SparseVector::from_pairs(&[(4, rat(3, 2)), (5, rat(-1, 2))]);
        assert!(!check_basic_scc(&neg, 1, &rat(9, 10)).ok);
        assert!(!check_basic_scc(&uniform(2..=4), 1, &rat(1, 2)).ok);
    }

    #[test]
    fn drop_min_examples() {
        let y = drop_min_renormalize(&uniform(4..=7), &rat(3, 10)).unwrap();
        assert_eq!(y, uniform(5..=7));
        assert!(check_basic_scc(&y, 1, &rat(3, 5)).ok);
        let two = SparseVector::from_pairs(&[(3, rat(1, 4)), (4, rat(3, 4))]);
        assert_eq!(drop_min_renormalize(&two, &rat(1, 3)).unwrap(), SparseVector::from_pairs(&[(4, rat(1, 1))]));
        assert!(drop_min_renormalize(&uniform(4..=7), &rat(1, 2)).is_err());
    }

    #[test]
    fn lift_examples() {
        let blocks: Vec<SparseVector> = (0..4u64)
            .map(|k| SparseVector::from_pairs(&[(4 + 2 * k, rat(1, 1)), (5 + 2 * k, rat(-1, 1))]))
            .collect();
        let c = vec![rat(1, 4); 4];
        // ψ = {4, 6, 8, 10}: uniform 1/4 on four points with min 4.
        let x = lift_to_scc(&blocks, &c, 1, &rat(3, 10)).unwrap();
        assert_eq!(x.len(), 8);
        assert_eq!(x.get(&5u32.into()), rat(-1, 4));
        assert!(lift_to_scc(&blocks, &c, 1, &rat(1, 5)).is_err());
        let mut swapped = blocks.clone();
        swapped.swap(0, 1);
        assert!(lift_to_scc(&swapped, &c, 1, &rat(3, 10)).is_err());
    }

    #[test]
    fn ground_text() {
        for s in ["4..", "4..:3", "{2,5,9}"] {
            assert_eq!(s.parse::<Ground>().unwrap().to_string(), s);
        }
        assert!("{5,2}".parse::<Ground>().is_err());
        assert!("0..".parse::<Ground>().is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn generated_sccs_pass_and_renormalize(n in 1usize..3, start in 1u64..6, step in 1u64..3, e in 2i64..9) {
            let eps = rat(e.max(n as i64 + 1), 10);
            let spec = SccSpec::new(n, eps.clone(), Ground::Progression { start, step }).unwrap();
            let x = generate_basic_scc(&spec).unwrap();
            proptest::prop_assert!(check_basic_scc(&x, n, &eps).ok);
            if eps < rat(1, 2) {
                let y = drop_min_renormalize(&x, &eps).unwrap();
                proptest::prop_assert!(check_basic_scc(&y, n, &(&eps * rat(2, 1))).ok);
            }
        }
    }
}
