//! Exact rationals and finitely supported sequences on `N = {1, 2, ...}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator.
pub type Rational = BigRational;

/// Largest exponent accepted by [`pow2`]. Beyond this the number no longer
/// fits comfortably in memory.
pub const MAX_POW2_EXPONENT: u64 = 1 << 22;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn nat(n: u64) -> BigUint {
    BigUint::from(n)
}

pub fn big_to_rational(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

/// `2^e` for an arbitrary-precision exponent, refusing exponents whose result
/// would not fit in memory.
pub fn pow2(e: &BigUint) -> Result<BigUint> {
    let small = e
        .to_u64()
        .filter(|&v| v <= MAX_POW2_EXPONENT)
        .ok_or_else(|| Error::Budget(format!("2^{e} is too large to materialize")))?;
    Ok(BigUint::one() << small)
}

/// `1 / 2^e` as an exact rational.
pub fn inv_pow2(e: &BigUint) -> Result<Rational> {
    Ok(Rational::new(BigInt::one(), BigInt::from(pow2(e)?)))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A closed interval `[lo, hi]` of naturals, or the empty interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Interval {
    Empty,
    Closed { lo: BigUint, hi: BigUint },
}

impl Interval {
    pub fn new(lo: BigUint, hi: BigUint) -> Result<Self> {
        if lo > hi {
            return Err(Error::Invalid(format!("interval [{lo},{hi}] has lo > hi")));
        }
        Ok(Interval::Closed { lo, hi })
    }

    pub fn from_u64(lo: u64, hi: u64) -> Result<Self> {
        Self::new(nat(lo), nat(hi))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn contains(&self, i: &BigUint) -> bool {
        match self {
            Interval::Empty => false,
            Interval::Closed { lo, hi } => lo <= i && i <= hi,
        }
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Interval) -> bool {
        match (self, other) {
            (Interval::Empty, _) => true,
            (_, Interval::Empty) => false,
            (Interval::Closed { lo: a, hi: b }, Interval::Closed { lo: c, hi: d }) => c <= a && b <= d,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Closed { lo: a, hi: b }, Interval::Closed { lo: c, hi: d }) => {
                let lo = a.max(c).clone();
                let hi = b.min(d).clone();
                if lo <= hi {
                    Interval::Closed { lo, hi }
                } else {
                    Interval::Empty
                }
            }
            _ => Interval::Empty,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Empty => write!(f, "[]"),
            Interval::Closed { lo, hi } => write!(f, "[{lo},{hi}]"),
        }
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("bad interval `{s}`")))?
            .trim();
        if inner.is_empty() {
            return Ok(Interval::Empty);
        }
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad interval `{s}`")))?;
        let p = |v: &str| BigUint::from_str(v.trim()).map_err(|_| Error::Parse(format!("bad interval `{s}`")));
        Interval::new(p(lo)?, p(hi)?)
    }
}

/// A finitely supported rational sequence. Zero coefficients are never
/// stored, so equal vectors have equal representations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVector {
    entries: BTreeMap<BigUint, Rational>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(index, value)` pairs; later duplicates add up.
    pub fn from_entries<I: IntoIterator<Item = (BigUint, Rational)>>(it: I) -> Result<Self> {
        let mut v = Self::new();
        for (i, c) in it {
            if i.is_zero() {
                return Err(Error::Invalid("indices start at 1".into()));
            }
            v.add_at(i, c);
        }
        Ok(v)
    }

    pub fn from_pairs(pairs: &[(u64, Rational)]) -> Self {
        Self::from_entries(pairs.iter().map(|(i, c)| (nat(*i), c.clone()))).expect("indices >= 1")
    }

    pub fn unit(i: u64) -> Self {
        Self::from_pairs(&[(i, int(1))])
    }

    /// `c` on every index of `lo..=hi`.
    pub fn constant(lo: u64, hi: u64, c: Rational) -> Self {
        Self::from_entries((lo..=hi).map(|i| (nat(i), c.clone()))).expect("indices >= 1")
    }

    pub fn get(&self, i: &BigUint) -> Rational {
        self.entries.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, i: BigUint, c: Rational) {
        if c.is_zero() {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, c);
        }
    }

    pub fn add_at(&mut self, i: BigUint, c: Rational) {
        let cur = self.get(&i);
        self.set(i, cur + c);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.entries.iter()
    }

    pub fn support(&self) -> BTreeSet<BigUint> {
        self.entries.keys().cloned().collect()
    }

    pub fn min_supp(&self) -> Option<&BigUint> {
        self.entries.keys().next()
    }

    pub fn max_supp(&self) -> Option<&BigUint> {
        self.entries.keys().next_back()
    }

    pub fn range(&self) -> Interval {
        match (self.min_supp(), self.max_supp()) {
            (Some(lo), Some(hi)) => Interval::Closed { lo: lo.clone(), hi: hi.clone() },
            _ => Interval::Empty,
        }
    }

    pub fn restrict(&self, set: &BTreeSet<BigUint>) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| set.contains(*i))
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn restrict_interval(&self, e: &Interval) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| e.contains(i))
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, c) in other.iter() {
            out.add_at(i.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::new();
        }
        Self { entries: self.entries.iter().map(|(i, c)| (i.clone(), c * s)).collect() }
    }

    pub fn abs(&self) -> Self {
        Self { entries: self.entries.iter().map(|(i, c)| (i.clone(), c.abs())).collect() }
    }

    pub fn l1(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |acc, c| acc + c.abs())
    }

    pub fn sum(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |acc, c| acc + c)
    }

    pub fn linf(&self) -> Rational {
        self.entries.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn dot(&self, other: &Self) -> Rational {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small
            .entries
            .iter()
            .filter_map(|(i, c)| big.entries.get(i).map(|d| c * d))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.values().all(|c| !c.is_negative())
    }
}

/// `max supp x_i < min supp x_{i+1}` for every consecutive pair. Zero
/// vectors are rejected rather than silently accepted.
pub fn successive(xs: &[SparseVector]) -> Result<bool> {
    for (k, x) in xs.iter().enumerate() {
        if x.is_zero() {
            return Err(Error::ZeroVector { position: k });
        }
    }
    Ok(xs.windows(2).all(|w| w[0].max_supp() < w[1].min_supp()))
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, c)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", i, format_rational(c))?;
        }
        write!(f, "}}")
    }
}

fn strip_braces(s: &str) -> Result<&str> {
    s.trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .map(str::trim)
        .ok_or_else(|| Error::Parse(format!("expected `{{...}}`, got `{s}`")))
}

impl FromStr for SparseVector {
    type Err = Error;

    /// Parses `{i1:r1, i2:r2, ...}`. Zero coefficients and repeated indices
    /// are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let inner = strip_braces(s)?;
        let mut v = SparseVector::new();
        if inner.is_empty() {
            return Ok(v);
        }
        for item in inner.split(',') {
            let (i, c) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad entry `{item}`")))?;
            let i = BigUint::from_str(i.trim()).map_err(|_| Error::Parse(format!("bad index `{i}`")))?;
            if i.is_zero() {
                return Err(Error::Parse("indices start at 1".into()));
            }
            let c = parse_rational(c)?;
            if c.is_zero() {
                return Err(Error::Parse(format!("zero coefficient at index {i}")));
            }
            if v.entries.insert(i.clone(), c).is_some() {
                return Err(Error::Parse(format!("repeated index {i}")));
            }
        }
        Ok(v)
    }
}

pub fn parse_index_set(s: &str) -> Result<BTreeSet<BigUint>> {
    let inner = strip_braces(s)?;
    let mut out = BTreeSet::new();
    if inner.is_empty() {
        return Ok(out);
    }
    for item in inner.split(',') {
        let i = BigUint::from_str(item.trim()).map_err(|_| Error::Parse(format!("bad index `{item}`")))?;
        if i.is_zero() {
            return Err(Error::Parse("indices start at 1".into()));
        }
        out.insert(i);
    }
    Ok(out)
}

pub fn format_index_set(set: &BTreeSet<BigUint>) -> String {
    let items: Vec<String> = set.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

pub fn set_of(items: &[u64]) -> BTreeSet<BigUint> {
    items.iter().map(|&i| nat(i)).collect()
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Floor of a non-negative rational as a natural.
pub fn floor_nat(r: &Rational) -> BigUint {
    r.floor().to_integer().to_biguint().unwrap_or_default()
}

pub fn lcm_denoms<'a, I: IntoIterator<Item = &'a Rational>>(it: I) -> BigInt {
    it.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(s: &str) -> SparseVector {
        s.parse().unwrap()
    }

    #[test]
    fn support_examples() {
        assert!(v("{}").support().is_empty());
        assert_eq!(v("{3:1/2, 7:-2}").support(), set_of(&[3, 7]));
        let mut x = v("{5:1}");
        x.add_at(nat(5), int(-1));
        assert!(x.support().is_empty());
        assert!(x.is_zero());
    }

    #[test]
    fn range_examples() {
        assert_eq!(v("{3:1, 7:-1}").range(), Interval::from_u64(3, 7).unwrap());
        assert_eq!(v("{4:2}").range(), Interval::from_u64(4, 4).unwrap());
        assert_eq!(v("{}").range(), Interval::Empty);
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(v("{1:1, 2:1, 3:1}").restrict(&set_of(&[2, 3])), v("{2:1, 3:1}"));
        assert_eq!(v("{1:1, 2:1}").restrict(&set_of(&[])), v("{}"));
        assert_eq!(v("{5:1/3}").restrict(&set_of(&[5])), v("{5:1/3}"));
    }

    #[test]
    fn successive_examples() {
        assert!(successive(&[v("{1:1}"), v("{3:1}")]).unwrap());
        assert!(!successive(&[v("{1:1, 4:1}"), v("{3:1}")]).unwrap());
        assert!(successive(&[v("{2:1}")]).unwrap());
        assert_eq!(successive(&[v("{2:1}"), v("{}")]), Err(Error::ZeroVector { position: 1 }));
    }

    #[test]
    fn canonical_text() {
        for s in ["{}", "{1:1}", "{3:1/2, 7:-2}", "{100000000000000000000000:-7/3}"] {
            assert_eq!(v(s).to_string(), s);
        }
        assert_eq!(v("{ 7:-4/2 ,3: 2/4 }").to_string(), "{3:1/2, 7:-2}");
        assert!("{3:0}".parse::<SparseVector>().is_err());
        assert!("{3:1, 3:2}".parse::<SparseVector>().is_err());
        assert!("{0:1}".parse::<SparseVector>().is_err());
        assert!("3:1".parse::<SparseVector>().is_err());
    }

    #[test]
    fn interval_ops() {
        let a = Interval::from_u64(2, 8).unwrap();
        let b = Interval::from_u64(5, 12).unwrap();
        assert_eq!(a.intersect(&b), Interval::from_u64(5, 8).unwrap());
        assert!(Interval::Empty.is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!("[2,8]".parse::<Interval>().unwrap(), a);
        assert!(Interval::from_u64(3, 2).is_err());
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (any::<i64>(), 1..i64::MAX).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_vector() -> impl Strategy<Value = SparseVector> {
        proptest::collection::vec((1u64..40, arb_rational()), 0..12).prop_map(|es| {
            SparseVector::from_entries(es.into_iter().map(|(i, c)| (nat(i), c))).unwrap()
        })
    }

    fn arb_set() -> impl Strategy<Value = BTreeSet<BigUint>> {
        proptest::collection::btree_set(1u64..40, 0..20).prop_map(|s| s.into_iter().map(nat).collect())
    }

    proptest! {
        #[test]
        fn restrict_composes(x in arb_vector(), e in arb_set(), f in arb_set()) {
            let both: BTreeSet<BigUint> = e.intersection(&f).cloned().collect();
            prop_assert_eq!(x.restrict(&e).restrict(&f), x.restrict(&both));
        }

        #[test]
        fn restrict_range_shrinks(x in arb_vector(), e in arb_set()) {
            prop_assert!(x.restrict(&e).range().is_subset(&x.range()));
        }

        #[test]
        fn rational_arithmetic_is_exact(a in arb_rational(), b in arb_rational()) {
            let big = &b * &b * &b;
            prop_assert_eq!((&a + &big) - &big, a);
        }

        #[test]
        fn text_round_trip(x in arb_vector()) {
            let s = x.to_string();
            let back: SparseVector = s.parse().unwrap();
            prop_assert_eq!(back.to_string(), s);
            prop_assert_eq!(back, x);
        }
    }
}
