//! Exact norm engines: the Tsirelson norm and the norm of the mixed
//! Tsirelson-type space induced by the norming set `W_α`.
//!
//! Both work on `|x|`: the norming sets are symmetric and closed under
//! restriction to subsets, so signs never matter, and a witness for `|x|`
//! becomes a witness for `x` by giving each unit the sign of its coordinate.
//!
//! For `W_α` the value on the positions `lo..=hi` of the support is
//!
//! ```text
//! N(lo,hi) = max( max |x_p|,  max_{k>=2} Q(lo,hi,k)/k,  max_n 2^-n W_n(lo,hi) )
//! ```
//!
//! where `Q(lo,hi,k)` is the best sum of `N` over `k` consecutive pieces
//! covering `lo..=hi` and `W_n` is the best sum over a very fast growing,
//! `S_n`-admissible family of averages. The `m`-norms
//! `(1/m) sup Σ ‖G_i x‖` are exactly the `Q(·,·,m)/m` layer, so they need
//! no separate engine.
//!
//! Two dominance rules make this finite. An average of `d` children is
//! best taken with size `d` (or the smallest size allowed), because
//! `Q(k)/k` does not increase with `k`. A weighted functional of weight `n`
//! is worth at most `‖x‖_1 / 2^n`, so weights stop once that drops below
//! the value already found.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::schreier::{effective_level, SchreierState};
use crate::vector::{big_to_rational, inv_pow2, pow2, Rational, SparseVector};
use crate::wt::{AvgKind, Functional, Sign};

/// Largest support index whose `2^i` size bound the engine will build.
pub const MAX_INDEX_EXPONENT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBudget {
    /// Hard cap on the weights tried.
    pub max_weight: u64,
    /// Hard cap on the support size, which bounds every useful average size.
    pub max_avg_size: u64,
    /// Derive the weight cutoff from the support so that the result is the
    /// exact supremum. Without it the result is the best value within the
    /// caps, a lower bound.
    pub proof_of_exactness: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_weight: 64, max_avg_size: 40, proof_of_exactness: true }
    }
}

/// Why no larger weight can win: every weighted functional of weight above
/// `last_weight` is worth at most `l1 / 2^(last_weight+1) <= value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightCutoff {
    pub last_weight: u64,
    pub l1: Rational,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormResult {
    pub value: Rational,
    pub witness: Option<Functional>,
    pub cutoff: Option<WeightCutoff>,
}

fn check_support(x: &SparseVector, budget: &SearchBudget) -> Result<()> {
    if x.len() as u64 > budget.max_avg_size {
        return Err(Error::Budget(format!(
            "support of size {} exceeds the budget of {}",
            x.len(),
            budget.max_avg_size
        )));
    }
    Ok(())
}

/// `sup { f(x) : f ∈ W_α }`, with a witness attaining it.
pub fn walpha_norm(x: &SparseVector, budget: &SearchBudget) -> Result<NormResult> {
    check_support(x, budget)?;
    if x.is_zero() {
        return Ok(NormResult { value: Rational::zero(), witness: None, cutoff: None });
    }
    let mut e = Engine::new(x, budget)?;
    let hi = e.len() - 1;
    let value = e.n(0, hi)?;
    let witness = e.build_n(0, hi)?;
    let cutoff = e.cutoffs.get(&(0, hi)).cloned();
    Ok(NormResult { value, witness: Some(witness), cutoff })
}

pub fn walpha_value(x: &SparseVector, budget: &SearchBudget) -> Result<Rational> {
    check_support(x, budget)?;
    if x.is_zero() {
        return Ok(Rational::zero());
    }
    let mut e = Engine::new(x, budget)?;
    let hi = e.len() - 1;
    e.n(0, hi)
}

/// `sup f(x)` over weighted functionals of `W_α` of weight exactly `j`.
pub fn walpha_weighted_sup(x: &SparseVector, j: u64, budget: &SearchBudget) -> Result<Rational> {
    if j == 0 {
        return Err(Error::Invalid("weights start at 1".into()));
    }
    check_support(x, budget)?;
    if x.is_zero() {
        return Ok(Rational::zero());
    }
    let mut e = Engine::new(x, budget)?;
    let hi = e.len() - 1;
    let family = e.family(j as usize, 0, hi, &BigUint::one(), 1)?;
    Ok(family * inv_pow2(&BigUint::from(j))?)
}

/// `max Σ_q |α_q(x)|` over very fast growing, `S_n`-admissible families of
/// `W_α` averages whose sizes are all at least `floor`.
pub fn alpha_family_sup(x: &SparseVector, n: usize, floor: &BigUint, budget: &SearchBudget) -> Result<Rational> {
    if floor.is_zero() {
        return Err(Error::Invalid("size floor starts at 1".into()));
    }
    check_support(x, budget)?;
    if x.is_zero() {
        return Ok(Rational::zero());
    }
    let mut e = Engine::new(x, budget)?;
    let hi = e.len() - 1;
    e.family(n, 0, hi, floor, 1)
}

type GKey = (usize, usize, usize, SchreierState, BigUint);

struct Engine {
    idx: Vec<BigUint>,
    a: Vec<Rational>,
    signs: Vec<Sign>,
    prefix: Vec<Rational>,
    vfg: Vec<Option<BigUint>>,
    budget: SearchBudget,
    n_memo: HashMap<(usize, usize), Rational>,
    q_memo: HashMap<(usize, usize, usize), Rational>,
    g_memo: HashMap<GKey, Rational>,
    wtd_memo: HashMap<(usize, usize), (Rational, Option<(usize, Rational)>)>,
    cutoffs: HashMap<(usize, usize), WeightCutoff>,
}

impl Engine {
    fn new(x: &SparseVector, budget: &SearchBudget) -> Result<Self> {
        let idx: Vec<BigUint> = x.iter().map(|(i, _)| i.clone()).collect();
        let a: Vec<Rational> = x.iter().map(|(_, c)| c.abs()).collect();
        let signs = x.iter().map(|(_, c)| Sign::of(c)).collect();
        let mut prefix = vec![Rational::zero()];
        for v in &a {
            let next = prefix.last().expect("nonempty") + v;
            prefix.push(next);
        }
        let vfg = vec![None; idx.len()];
        Ok(Self {
            idx,
            a,
            signs,
            prefix,
            vfg,
            budget: budget.clone(),
            n_memo: HashMap::new(),
            q_memo: HashMap::new(),
            g_memo: HashMap::new(),
            wtd_memo: HashMap::new(),
            cutoffs: HashMap::new(),
        })
    }

    fn len(&self) -> usize {
        self.idx.len()
    }

    fn sum(&self, lo: usize, hi: usize) -> Rational {
        &self.prefix[hi + 1] - &self.prefix[lo]
    }

    /// Smallest size allowed for an average following one that ends at
    /// position `p`.
    fn vfg_size(&mut self, p: usize) -> Result<BigUint> {
        if let Some(s) = &self.vfg[p] {
            return Ok(s.clone());
        }
        let i = &self.idx[p];
        if *i > BigUint::from(MAX_INDEX_EXPONENT) {
            return Err(Error::Budget(format!("size bound 2^{i} is too large")));
        }
        let s = pow2(i)? + 1u32;
        self.vfg[p] = Some(s.clone());
        Ok(s)
    }

    fn n(&mut self, lo: usize, hi: usize) -> Result<Rational> {
        if lo == hi {
            return Ok(self.a[lo].clone());
        }
        if let Some(v) = self.n_memo.get(&(lo, hi)) {
            return Ok(v.clone());
        }
        let mut best = self.max_a(lo, hi).1;
        best = best.max(self.avg(lo, hi)?.0);
        let w = self.wtd(lo, hi, &best)?.0;
        best = best.max(w);
        self.n_memo.insert((lo, hi), best.clone());
        Ok(best)
    }

    fn max_a(&self, lo: usize, hi: usize) -> (usize, Rational) {
        let mut arg = lo;
        for p in lo..=hi {
            if self.a[p] > self.a[arg] {
                arg = p;
            }
        }
        (arg, self.a[arg].clone())
    }

    /// Best average with at least two children: `(value, children)`.
    fn avg(&mut self, lo: usize, hi: usize) -> Result<(Rational, usize)> {
        let len = hi - lo + 1;
        let mut best = (Rational::zero(), 0);
        for k in 2..=len {
            let v = self.q(lo, hi, k)? / Rational::from_integer(k.into());
            if v > best.0 {
                best = (v, k);
            }
        }
        Ok(best)
    }

    fn q(&mut self, lo: usize, hi: usize, k: usize) -> Result<Rational> {
        let len = hi - lo + 1;
        debug_assert!(k >= 1 && k <= len);
        if k == 1 {
            return self.n(lo, hi);
        }
        if k == len {
            return Ok(self.sum(lo, hi));
        }
        if let Some(v) = self.q_memo.get(&(lo, hi, k)) {
            return Ok(v.clone());
        }
        let mut best = Rational::zero();
        for b in lo..=hi + 1 - k {
            let v = self.n(lo, b)? + self.q(b + 1, hi, k - 1)?;
            if v > best {
                best = v;
            }
        }
        self.q_memo.insert((lo, hi, k), best.clone());
        Ok(best)
    }

    /// Best weighted functional with at least two averages, given the value
    /// `floor` already known; returns the value and `(weight, family sum)`.
    fn wtd(&mut self, lo: usize, hi: usize, floor: &Rational) -> Result<(Rational, Option<(usize, Rational)>)> {
        if let Some(v) = self.wtd_memo.get(&(lo, hi)) {
            return Ok(v.clone());
        }
        let l1 = self.sum(lo, hi);
        let mut best = floor.clone();
        let mut found: Option<(usize, Rational)> = None;
        let mut value = Rational::zero();
        let mut n: u64 = 0;
        loop {
            let next = n + 1;
            let bound = &l1 * inv_pow2(&BigUint::from(next))?;
            let exhausted = self.budget.proof_of_exactness && bound <= best;
            if exhausted {
                break;
            }
            if next > self.budget.max_weight {
                if self.budget.proof_of_exactness {
                    return Err(Error::Budget(format!("weights beyond {} would be needed", self.budget.max_weight)));
                }
                break;
            }
            n = next;
            let fam = self.family(n as usize, lo, hi, &BigUint::one(), 2)?;
            let v = &fam * inv_pow2(&BigUint::from(n))?;
            if v > value {
                value = v.clone();
                found = Some((n as usize, fam));
            }
            if v > best {
                best = v;
            }
        }
        self.cutoffs.insert((lo, hi), WeightCutoff { last_weight: n, l1, value: best });
        let out = (value, found);
        self.wtd_memo.insert((lo, hi), out.clone());
        Ok(out)
    }

    /// Value of an average of size at least `floor` placed first in a family.
    fn first_piece(&mut self, a: usize, b: usize, floor: &BigUint) -> Result<(Rational, usize, BigUint)> {
        if floor.is_one() {
            return Ok((self.n(a, b)?, 1, BigUint::one()));
        }
        let len = b - a + 1;
        let mut best = (Rational::zero(), 1, floor.clone());
        for d in 1..=len {
            let size = floor.clone().max(BigUint::from(d));
            let v = self.q(a, b, d)? / big_to_rational(&size);
            if v > best.0 {
                best = (v, d, size);
            }
        }
        Ok(best)
    }

    /// Value of an average on `c..=e` following an average that ends at
    /// `prev`, with its size and number of children.
    fn later_piece(&mut self, prev: usize, c: usize, e: usize, floor: &BigUint) -> Result<(Rational, usize, BigUint)> {
        let size = self.vfg_size(prev)?.max(floor.clone());
        let len = e - c + 1;
        let d = size.to_usize().map_or(len, |s| s.min(len));
        let v = self.q(c, e, d)? / big_to_rational(&size);
        Ok((v, d, size))
    }

    /// Best `Σ_q |α_q(x)|` over families on `lo..=hi` with at least
    /// `min_pieces` averages.
    fn family(&mut self, n: usize, lo: usize, hi: usize, floor: &BigUint, min_pieces: usize) -> Result<Rational> {
        let level = effective_level(n, hi - lo + 1);
        let mut best = Rational::zero();
        for a in lo..=hi {
            let st = SchreierState::new(level).push(&self.idx[a]).expect("empty state accepts");
            for b in a..=hi {
                // Computing the rest first keeps N(lo,hi) from calling itself.
                let rest = self.rest(n, hi, b, st.clone(), floor, min_pieces > 1)?;
                let Some(rest) = rest else { continue };
                let v = self.first_piece(a, b, floor)?.0 + rest;
                if v > best {
                    best = v;
                }
            }
        }
        Ok(best)
    }

    /// Best sum of further averages after one ending at `prev`; `None` when
    /// at least one is required and none fits.
    fn rest(
        &mut self,
        n: usize,
        hi: usize,
        prev: usize,
        st: SchreierState,
        floor: &BigUint,
        required: bool,
    ) -> Result<Option<Rational>> {
        let remaining = hi - prev;
        if remaining == 0 || !st.can_push() {
            return Ok((!required).then(Rational::zero));
        }
        let st = st.normalized(remaining);
        let key = (n, hi, prev, st.clone(), floor.clone());
        let any = match self.g_memo.get(&key) {
            Some(v) => v.clone(),
            None => {
                let mut best: Option<Rational> = None;
                for c in prev + 1..=hi {
                    let Some(next) = st.push_clamped(&self.idx[c], remaining) else { break };
                    for e in c..=hi {
                        let piece = self.later_piece(prev, c, e, floor)?.0;
                        let tail = self.rest(n, hi, e, next.clone(), floor, false)?.unwrap_or_else(Rational::zero);
                        let v = piece + tail;
                        if best.as_ref().map_or(true, |b| v > *b) {
                            best = Some(v);
                        }
                    }
                }
                let v = best.expect("at least one piece fits");
                self.g_memo.insert(key, v.clone());
                v
            }
        };
        if required {
            Ok(Some(any))
        } else {
            Ok(Some(any.max(Rational::zero())))
        }
    }

    // Witness reconstruction: re-scan the choices and take the first one
    // that reproduces the memoized value.

    fn unit_at(&self, p: usize) -> Functional {
        Functional::Unit { sign: self.signs[p], index: self.idx[p].clone() }
    }

    fn build_n(&mut self, lo: usize, hi: usize) -> Result<Functional> {
        let target = self.n(lo, hi)?;
        let (arg, m) = self.max_a(lo, hi);
        if m == target {
            return Ok(self.unit_at(arg));
        }
        let (av, k) = self.avg(lo, hi)?;
        if av == target {
            let children = self.build_q(lo, hi, k)?;
            return Ok(wrap_average(BigUint::from(k), children));
        }
        let (wv, found) = self.wtd(lo, hi, &Rational::zero())?;
        let (n, fam) = found.filter(|_| wv == target).ok_or_else(|| Error::Invalid("witness reconstruction failed".into()))?;
        let children = self.build_family(n, lo, hi, &BigUint::one(), 2, &fam)?;
        Ok(Functional::Weighted { weight: BigUint::from(n), children })
    }

    fn build_q(&mut self, lo: usize, hi: usize, k: usize) -> Result<Vec<Functional>> {
        let len = hi - lo + 1;
        if k == 1 {
            return Ok(vec![self.build_n(lo, hi)?]);
        }
        if k == len {
            return Ok((lo..=hi).map(|p| self.unit_at(p)).collect());
        }
        let target = self.q(lo, hi, k)?;
        for b in lo..=hi + 1 - k {
            if self.n(lo, b)? + self.q(b + 1, hi, k - 1)? == target {
                let mut out = vec![self.build_n(lo, b)?];
                out.extend(self.build_q(b + 1, hi, k - 1)?);
                return Ok(out);
            }
        }
        Err(Error::Invalid("witness reconstruction failed".into()))
    }

    fn build_piece(&mut self, a: usize, b: usize, d: usize, size: BigUint) -> Result<Functional> {
        let children = self.build_q(a, b, d)?;
        Ok(wrap_average(size, children))
    }

    fn build_family(
        &mut self,
        n: usize,
        lo: usize,
        hi: usize,
        floor: &BigUint,
        min_pieces: usize,
        target: &Rational,
    ) -> Result<Vec<Functional>> {
        let level = effective_level(n, hi - lo + 1);
        for a in lo..=hi {
            let st = SchreierState::new(level).push(&self.idx[a]).expect("empty state accepts");
            for b in a..=hi {
                let Some(rest) = self.rest(n, hi, b, st.clone(), floor, min_pieces > 1)? else { continue };
                let (first, d, size) = self.first_piece(a, b, floor)?;
                if first.clone() + &rest == *target {
                    let mut out = vec![self.build_piece(a, b, d, size)?];
                    self.build_rest(n, hi, b, st, floor, &rest, &mut out)?;
                    return Ok(out);
                }
            }
        }
        Err(Error::Invalid("witness reconstruction failed".into()))
    }

    #[allow(clippy::too_many_arguments)]
    fn build_rest(
        &mut self,
        n: usize,
        hi: usize,
        prev: usize,
        st: SchreierState,
        floor: &BigUint,
        target: &Rational,
        out: &mut Vec<Functional>,
    ) -> Result<()> {
        if target.is_zero() {
            return Ok(());
        }
        let remaining = hi - prev;
        let st = st.normalized(remaining);
        for c in prev + 1..=hi {
            let Some(next) = st.push_clamped(&self.idx[c], remaining) else { break };
            for e in c..=hi {
                let (piece, d, size) = self.later_piece(prev, c, e, floor)?;
                let tail = self.rest(n, hi, e, next.clone(), floor, false)?.unwrap_or_else(Rational::zero);
                if piece.clone() + &tail == *target {
                    out.push(self.build_piece(c, e, d, size)?);
                    return self.build_rest(n, hi, e, next, floor, &tail, out);
                }
            }
        }
        Err(Error::Invalid("witness reconstruction failed".into()))
    }
}

fn wrap_average(size: BigUint, children: Vec<Functional>) -> Functional {
    let kind = if children.iter().all(Functional::is_unit) { AvgKind::Basic } else { AvgKind::Alpha };
    Functional::average(kind, size, children)
}

// ---------------------------------------------------------------------------
// Tsirelson norm

type TKey = Vec<(BigUint, Rational)>;

thread_local! {
    static T_CACHE: RefCell<HashMap<TKey, Rational>> = RefCell::new(HashMap::new());
}

/// Drops the memo shared by all Tsirelson evaluations on this thread.
pub fn clear_tsirelson_cache() {
    T_CACHE.with(|c| c.borrow_mut().clear());
}

/// `‖x‖_T = max(‖x‖_∞, (1/2) sup Σ_j ‖E_j x‖_T)` over successive intervals
/// `E_1 < ... < E_k` with `k <= min E_1`, with a witness functional.
///
/// The witness is a Tsirelson functional: `(1/2)Σ f_j` over admissible
/// pieces, written as a weight-1 term whose children are size-1 averages.
/// It attains the value but is not in general an element of `W_α`.
pub fn tsirelson_norm(x: &SparseVector) -> NormResult {
    let t = TEngine::new(x);
    if t.len() == 0 {
        return NormResult { value: Rational::zero(), witness: None, cutoff: None };
    }
    let value = t.t(0, t.len() - 1);
    let witness = t.build(0, t.len() - 1);
    NormResult { value, witness: Some(witness), cutoff: None }
}

pub fn tsirelson_value(x: &SparseVector) -> Rational {
    let t = TEngine::new(x);
    if t.len() == 0 {
        return Rational::zero();
    }
    t.t(0, t.len() - 1)
}

/// The right-hand side of the implicit equation, recomputed from the
/// engine's values on interval restrictions of `x`.
pub fn tsirelson_rhs(x: &SparseVector) -> Rational {
    let entries: Vec<(BigUint, Rational)> = x.iter().map(|(i, c)| (i.clone(), c.clone())).collect();
    let len = entries.len();
    let mut best = x.linf();
    if len < 2 {
        return best;
    }
    let piece = |a: usize, b: usize| -> Rational {
        let sub = SparseVector::from_entries(entries[a..=b].iter().cloned()).expect("valid");
        tsirelson_value(&sub)
    };
    // Best sum of at most `k` pieces covering positions p..len-1.
    let mut memo: HashMap<(usize, usize), Rational> = HashMap::new();
    fn cover(
        p: usize,
        k: usize,
        len: usize,
        piece: &dyn Fn(usize, usize) -> Rational,
        memo: &mut HashMap<(usize, usize), Rational>,
    ) -> Rational {
        if p == len {
            return Rational::zero();
        }
        if k == 0 {
            return Rational::zero();
        }
        if let Some(v) = memo.get(&(p, k)) {
            return v.clone();
        }
        let mut best = Rational::zero();
        for b in p..len {
            let v = piece(p, b) + cover(b + 1, k - 1, len, piece, memo);
            best = best.max(v);
        }
        memo.insert((p, k), best.clone());
        best
    }
    let half = Rational::new(1.into(), 2.into());
    for p in 0..len {
        let k = entries[p].0.to_usize().unwrap_or(usize::MAX).min(len - p);
        if k < 2 {
            continue;
        }
        memo.clear();
        let v = cover(p, k, len, &piece, &mut memo) * &half;
        best = best.max(v);
    }
    best
}

struct TEngine {
    idx: Vec<BigUint>,
    a: Vec<Rational>,
    signs: Vec<Sign>,
}

impl TEngine {
    fn new(x: &SparseVector) -> Self {
        Self {
            idx: x.iter().map(|(i, _)| i.clone()).collect(),
            a: x.iter().map(|(_, c)| c.abs()).collect(),
            signs: x.iter().map(|(_, c)| Sign::of(c)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.idx.len()
    }

    fn key(&self, lo: usize, hi: usize) -> TKey {
        (lo..=hi).map(|p| (self.idx[p].clone(), self.a[p].clone())).collect()
    }

    fn sum(&self, lo: usize, hi: usize) -> Rational {
        self.a[lo..=hi].iter().fold(Rational::zero(), |s, v| s + v)
    }

    /// Pieces allowed when the family starts at position `p` and must stay
    /// within `..=hi`.
    fn pieces(&self, p: usize, hi: usize) -> usize {
        self.idx[p].to_usize().unwrap_or(usize::MAX).min(hi - p + 1)
    }

    fn t(&self, lo: usize, hi: usize) -> Rational {
        if lo == hi {
            return self.a[lo].clone();
        }
        let key = self.key(lo, hi);
        if let Some(v) = T_CACHE.with(|c| c.borrow().get(&key).cloned()) {
            return v;
        }
        let mut best = self.a[lo..=hi].iter().max().expect("nonempty").clone();
        let mut qt = HashMap::new();
        for p in lo..=hi {
            let k = self.pieces(p, hi);
            if k < 2 {
                continue;
            }
            let v = self.qt(p, hi, k, &mut qt) / Rational::from_integer(2.into());
            if v > best {
                best = v;
            }
        }
        T_CACHE.with(|c| c.borrow_mut().insert(key, best.clone()));
        best
    }

    /// Best sum of `‖·‖_T` over `k` consecutive pieces covering `p..=hi`.
    fn qt(&self, p: usize, hi: usize, k: usize, memo: &mut HashMap<(usize, usize), Rational>) -> Rational {
        let len = hi - p + 1;
        if k == 1 {
            return self.t(p, hi);
        }
        if k >= len {
            return self.sum(p, hi);
        }
        if let Some(v) = memo.get(&(p, k)) {
            return v.clone();
        }
        let mut best = Rational::zero();
        for b in p..=hi + 1 - k {
            let v = self.t(p, b) + self.qt(b + 1, hi, k - 1, memo);
            if v > best {
                best = v;
            }
        }
        memo.insert((p, k), best.clone());
        best
    }

    fn build(&self, lo: usize, hi: usize) -> Functional {
        let target = self.t(lo, hi);
        if let Some(p) = (lo..=hi).find(|&p| self.a[p] == target) {
            return Functional::Unit { sign: self.signs[p], index: self.idx[p].clone() };
        }
        let mut memo = HashMap::new();
        let two = Rational::from_integer(2.into());
        for p in lo..=hi {
            let k = self.pieces(p, hi);
            if k >= 2 && self.qt(p, hi, k, &mut memo) / &two == target {
                let children = self
                    .build_qt(p, hi, k, &mut memo)
                    .into_iter()
                    .map(|c| Functional::average(AvgKind::Alpha, 1u32, vec![c]))
                    .collect();
                return Functional::weighted(1u32, children);
            }
        }
        unreachable!("the optimum is attained by one of the scanned choices")
    }

    fn build_qt(&self, p: usize, hi: usize, k: usize, memo: &mut HashMap<(usize, usize), Rational>) -> Vec<Functional> {
        let len = hi - p + 1;
        if k == 1 {
            return vec![self.build(p, hi)];
        }
        if k >= len {
            return (p..=hi).map(|q| Functional::Unit { sign: self.signs[q], index: self.idx[q].clone() }).collect();
        }
        let target = self.qt(p, hi, k, memo);
        for b in p..=hi + 1 - k {
            if self.t(p, b) + self.qt(b + 1, hi, k - 1, memo) == target {
                let mut out = vec![self.build(p, b)];
                out.extend(self.build_qt(b + 1, hi, k - 1, memo));
                return out;
            }
        }
        unreachable!("the optimum is attained by one of the scanned choices")
    }
}
