//! The Schreier families `S_n`.
//!
//! `S_0` is the family of singletons, `S_1 = {F : #F <= min F}` and `S_{n+1}`
//! collects unions `F_1 < ... < F_k` of `S_n` sets with `k <= min F_1`. The
//! empty set belongs to every `S_n`.
//!
//! Membership is decided by a streaming automaton that reads `F` in
//! increasing order and always extends the innermost open piece when it can.
//! Heredity makes the greedy decomposition optimal: moving the first element
//! of the next piece into the current one leaves a subset of an `S_{n-1}` set
//! behind and never increases the number of pieces.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::vector::{ceil_log2, successive, Rational, SparseVector};

pub const DEFAULT_MAX_LEVEL: usize = 4;

/// Converts an element to a piece capacity, clamped so it fits in a `usize`.
fn cap_of(e: &BigUint, clamp: usize) -> usize {
    e.to_usize().map_or(clamp, |v| v.min(clamp))
}

/// Automaton state for `S_n` after reading some increasing prefix.
///
/// `rem[l]` is the number of further level-`l` pieces the open level-`l+1`
/// piece can still take (`rem[0]` counts plain elements of the innermost
/// `S_1` piece).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchreierState {
    started: bool,
    rem: Vec<usize>,
}

impl SchreierState {
    pub fn new(level: usize) -> Self {
        Self { started: false, rem: vec![0; level] }
    }

    pub fn level(&self) -> usize {
        self.rem.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.started
    }

    /// Whether the set read so far can take one more (larger) element. The
    /// answer does not depend on the element's value.
    pub fn can_push(&self) -> bool {
        !self.started || self.rem.iter().any(|&r| r > 0)
    }

    /// Reads the next element `e` (larger than all previous ones).
    pub fn push(&self, e: &BigUint) -> Option<Self> {
        self.push_clamped(e, usize::MAX)
    }

    pub fn push_clamped(&self, e: &BigUint, clamp: usize) -> Option<Self> {
        let fresh = cap_of(e, clamp).saturating_sub(1);
        let mut next = self.clone();
        if !self.started {
            next.started = true;
            next.rem.iter_mut().for_each(|r| *r = fresh);
            return Some(next);
        }
        let l = self.rem.iter().position(|&r| r > 0)?;
        next.rem[l] -= 1;
        next.rem[..l].iter_mut().for_each(|r| *r = fresh);
        Some(next)
    }

    /// Caps every counter at `remaining`, the number of elements that may
    /// still arrive. States that agree after capping accept the same futures.
    pub fn normalized(&self, remaining: usize) -> Self {
        Self { started: self.started, rem: self.rem.iter().map(|&r| r.min(remaining)).collect() }
    }
}

/// The level that decides membership of a set with `len` elements in `S_n`.
///
/// A set with `min F >= 2` and `#F <= 2^n` is always in `S_n`, so levels
/// above `ceil(log2 #F)` add nothing.
pub fn effective_level(n: usize, len: usize) -> usize {
    n.min(ceil_log2(len))
}

fn check_level(n: usize, len: usize, max_level: usize) -> Result<usize> {
    let eff = effective_level(n, len);
    if eff > max_level {
        return Err(Error::SchreierLimit { requested: n, max: max_level });
    }
    Ok(eff)
}

pub fn member(n: usize, f: &BTreeSet<BigUint>) -> Result<bool> {
    member_with_max(n, f, DEFAULT_MAX_LEVEL)
}

pub fn member_with_max(n: usize, f: &BTreeSet<BigUint>, max_level: usize) -> Result<bool> {
    let eff = check_level(n, f.len(), max_level)?;
    if f.iter().any(|e| e.is_zero()) {
        return Err(Error::Invalid("Schreier sets live in {1, 2, ...}".into()));
    }
    Ok(read_all(eff, f.iter()).is_some())
}

/// Membership for an increasing slice of plain integers.
pub fn member_u64(n: usize, f: &[u64]) -> Result<bool> {
    let set: BTreeSet<BigUint> = f.iter().map(|&v| BigUint::from(v)).collect();
    member(n, &set)
}

fn read_all<'a, I: Iterator<Item = &'a BigUint>>(level: usize, it: I) -> Option<SchreierState> {
    let mut st = SchreierState::new(level);
    for e in it {
        st = st.push(e)?;
    }
    Some(st)
}

/// `F` is in `S_n` and no `F ∪ {j}` with `j > max F` is.
pub fn maximal(n: usize, f: &BTreeSet<BigUint>) -> Result<bool> {
    if !member(n, f)? {
        return Err(Error::NotMember { n });
    }
    // The extension test is independent of j, and max F + 1 may need one
    // more level of saturation than F itself.
    let eff = check_level(n, f.len() + 1, DEFAULT_MAX_LEVEL)?;
    let st = read_all(eff, f.iter()).expect("member");
    Ok(!st.can_push())
}

/// `{min supp x_i}` is in `S_n` for a successive block sequence.
pub fn admissible(n: usize, xs: &[SparseVector]) -> Result<bool> {
    if !successive(xs)? {
        return Err(Error::NotSuccessive { position: first_overlap(xs) });
    }
    let mins: BTreeSet<BigUint> = xs.iter().map(|x| x.min_supp().expect("nonzero").clone()).collect();
    member(n, &mins)
}

fn first_overlap(xs: &[SparseVector]) -> usize {
    xs.windows(2).position(|w| w[0].max_supp() >= w[1].min_supp()).map_or(0, |p| p + 1)
}

/// `max { Σ_{k∈G} x_k : G ⊆ supp x, G ∈ S_n }` for a non-negative vector.
pub fn max_schreier_sum(n: usize, x: &SparseVector) -> Result<Rational> {
    if !x.is_nonnegative() {
        return Err(Error::Invalid("max_schreier_sum needs non-negative entries".into()));
    }
    let eff = check_level(n, x.len(), DEFAULT_MAX_LEVEL)?;
    let entries: Vec<(BigUint, Rational)> = x.iter().map(|(i, c)| (i.clone(), c.clone())).collect();
    let mut memo = HashMap::new();
    Ok(best_sum(&entries, 0, SchreierState::new(eff), &mut memo))
}

fn best_sum(
    entries: &[(BigUint, Rational)],
    pos: usize,
    st: SchreierState,
    memo: &mut HashMap<(usize, SchreierState), Rational>,
) -> Rational {
    if pos == entries.len() || !st.can_push() {
        return Rational::zero();
    }
    let remaining = entries.len() - pos;
    let st = st.normalized(remaining);
    let key = (pos, st.clone());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let skip = best_sum(entries, pos + 1, st.clone(), memo);
    let (e, c) = &entries[pos];
    let take = match st.push_clamped(e, remaining) {
        Some(next) => c + best_sum(entries, pos + 1, next, memo),
        None => Rational::zero(),
    };
    let best = skip.max(take);
    memo.insert(key, best.clone());
    best
}
