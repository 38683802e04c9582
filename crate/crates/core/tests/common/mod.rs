//! Independent oracles and sample generators shared by the integration
//! tests. Nothing here calls the engines it is used to check.

#![allow(dead_code)]

pub mod synth;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// Schreier families straight from the recursive definition.

/// `F ∈ S_n` for an increasing list, by the least number of consecutive
/// `S_{n-1}` pieces needed to cover `F`.
pub fn schreier(n: usize, f: &[u64]) -> bool {
    if f.len() <= 1 {
        return true;
    }
    if n == 0 {
        return false;
    }
    if n == 1 {
        return f.len() as u64 <= f[0];
    }
    min_pieces(n - 1, f) as u64 <= f[0]
}

fn min_pieces(m: usize, f: &[u64]) -> usize {
    // best[i]: fewest S_m pieces covering f[i..].
    let len = f.len();
    let mut best = vec![usize::MAX; len + 1];
    best[len] = 0;
    for i in (0..len).rev() {
        for j in i + 1..=len {
            if best[j] != usize::MAX && schreier(m, &f[i..j]) {
                best[i] = best[i].min(best[j] + 1);
            }
        }
    }
    best[0]
}

/// `F ∈ S_n * S_m`: a cover by consecutive `S_m` pieces whose minima form
/// a set in `S_n`, searched over every split.
pub fn schreier_product(n: usize, m: usize, f: &[u64]) -> bool {
    fn go(n: usize, m: usize, f: &[u64], mins: &mut Vec<u64>) -> bool {
        if f.is_empty() {
            return schreier(n, mins);
        }
        for j in 1..=f.len() {
            if schreier(m, &f[..j]) {
                mins.push(f[0]);
                let ok = go(n, m, &f[j..], mins);
                mins.pop();
                if ok {
                    return true;
                }
            }
        }
        false
    }
    go(n, m, f, &mut Vec::new())
}

// ---------------------------------------------------------------------------
// The Tsirelson norm by plain recursion over pieces of the support.

/// `‖x‖_T` for `x` given as `(index, coefficient)` in increasing index order.
pub fn tsirelson(x: &[(u64, Q)]) -> Q {
    if x.is_empty() {
        return Q::zero();
    }
    let mut memo = TMemo::default();
    t_range(x, 0, x.len(), &mut memo)
}

#[derive(Default)]
struct TMemo {
    ranges: HashMap<(usize, usize), Q>,
    pieces: HashMap<(usize, usize, usize, usize), Q>,
}

fn t_range(x: &[(u64, Q)], a: usize, b: usize, memo: &mut TMemo) -> Q {
    if let Some(v) = memo.ranges.get(&(a, b)) {
        return v.clone();
    }
    let mut best = x[a..b].iter().map(|(_, c)| c.abs()).max().unwrap_or_else(Q::zero);
    // Every family of disjoint increasing pieces of positions a..b, the
    // first starting at s, with at most x[s].0 pieces. The single piece
    // a..b only contributes half of what is being computed, so it is left out.
    for s in a..b {
        let cap = x[s].0 as usize;
        let sum = pieces(x, s, (a, b), cap, memo);
        let half = sum / q(2, 1);
        if half > best {
            best = half;
        }
    }
    memo.ranges.insert((a, b), best.clone());
    best
}

/// Best `Σ ‖piece‖_T` over at most `cap` pieces inside `range`, the first
/// starting at `s`.
fn pieces(x: &[(u64, Q)], s: usize, range: (usize, usize), cap: usize, memo: &mut TMemo) -> Q {
    let b = range.1;
    if cap == 0 || s >= b {
        return Q::zero();
    }
    let cap = cap.min(b - s);
    let key = (s, range.0, b, cap);
    if let Some(v) = memo.pieces.get(&key) {
        return v.clone();
    }
    let mut best = Q::zero();
    for e in s + 1..=b {
        if (s, e) == range {
            continue;
        }
        let here = t_range(x, s, e, memo);
        let mut rest = Q::zero();
        for s2 in e..b {
            let r = pieces(x, s2, range, cap - 1, memo);
            if r > rest {
                rest = r;
            }
        }
        let total = here + rest;
        if total > best {
            best = total;
        }
    }
    memo.pieces.insert(key, best.clone());
    best
}

// ---------------------------------------------------------------------------
// W_α on {1..8} by closure.
//
// Every functional is tracked by its coefficient array. Since W_α is
// closed under sign changes of units, sup f(x) = sup f(|x|) over the
// non-negative members, and among non-negative functionals with the same
// support a coordinatewise larger one can replace a smaller one anywhere
// in the construction (admissibility and fast growth only see supports).
// So each support keeps its Pareto frontier, and the closure is iterated
// until nothing new appears.

pub const WA_N: usize = 8;

type Coeffs = Vec<Q>;

pub struct WalphaOracle {
    /// Frontier per support bitmask (bit i is index i + 1).
    pub frontier: Vec<Vec<Coeffs>>,
    /// Float shadows of the frontier, used only to skip hopeless members.
    approx: Vec<Vec<Vec<f64>>>,
    /// Each member as integer numerators over one common denominator.
    scaled: Vec<Vec<(Vec<BigInt>, BigInt)>>,
    pub rounds: usize,
}

fn to_f64(r: &Q) -> f64 {
    num_traits::ToPrimitive::to_f64(r).expect("finite")
}

fn common_denominator(f: &[Q]) -> (Vec<BigInt>, BigInt) {
    let den = f.iter().fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    (f.iter().map(|c| c.numer() * (&den / c.denom())).collect(), den)
}

fn dominated(c: &Coeffs, by: &Coeffs) -> bool {
    c.iter().zip(by).all(|(a, b)| a <= b)
}

fn insert(front: &mut Vec<Coeffs>, c: Coeffs) -> bool {
    if front.iter().any(|e| dominated(&c, e)) {
        return false;
    }
    front.retain(|e| !dominated(e, &c));
    front.push(c);
    true
}

fn bits(mask: usize) -> Vec<usize> {
    (0..WA_N).filter(|i| mask >> i & 1 == 1).collect()
}

fn index_of(i: usize) -> u64 {
    i as u64 + 1
}

fn add(a: &Coeffs, b: &Coeffs) -> Coeffs {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scale(a: &Coeffs, s: &Q) -> Coeffs {
    a.iter().map(|x| x * s).collect()
}

/// Minkowski sums of two frontiers, pruned.
fn sum_fronts(a: &[Coeffs], b: &[Coeffs]) -> Vec<Coeffs> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            insert(&mut out, add(x, y));
        }
    }
    out
}

/// Splits of `mask` into a non-empty lower part and non-empty upper part.
fn prefix_splits(mask: usize) -> Vec<(usize, usize)> {
    let b = bits(mask);
    (1..b.len())
        .map(|t| {
            let lo: usize = b[..t].iter().map(|i| 1 << i).sum();
            (lo, mask & !lo)
        })
        .collect()
}

/// Every way to cut `mask` into consecutive non-empty blocks.
fn block_partitions(mask: usize) -> Vec<Vec<usize>> {
    let b = bits(mask);
    let mut out = Vec::new();
    for cuts in 0..1usize << (b.len() - 1) {
        let mut parts = Vec::new();
        let mut cur = 0usize;
        for (k, i) in b.iter().enumerate() {
            cur |= 1 << i;
            if k + 1 == b.len() || cuts >> k & 1 == 1 {
                parts.push(cur);
                cur = 0;
            }
        }
        out.push(parts);
    }
    out
}

impl WalphaOracle {
    pub fn build() -> Self {
        let masks = 1usize << WA_N;
        let mut frontier: Vec<Vec<Coeffs>> = vec![Vec::new(); masks];
        for i in 0..WA_N {
            let mut c = vec![Q::zero(); WA_N];
            c[i] = Q::one();
            frontier[1 << i].push(c);
        }
        let mut order: Vec<usize> = (1..masks).collect();
        order.sort_by_key(|m| (m.count_ones(), *m));
        let mut rounds = 0;
        loop {
            rounds += 1;
            assert!(rounds < 50, "closure did not stabilize");
            let mut changed = false;
            // chains[mask][d]: frontier of unnormalized sums of d successive
            // members whose supports partition mask.
            let mut chains: Vec<Vec<Vec<Coeffs>>> = vec![Vec::new(); masks];
            for &mask in &order {
                let len = mask.count_ones() as usize;
                let mut by_d: Vec<Vec<Coeffs>> = vec![Vec::new(); len + 1];
                by_d[1] = frontier[mask].clone();
                for (lo, hi) in prefix_splits(mask) {
                    for d in 2..=len {
                        let rest = match chains[hi].get(d - 1) {
                            Some(r) if !r.is_empty() => r.clone(),
                            _ => continue,
                        };
                        for c in sum_fronts(&frontier[lo], &rest) {
                            insert(&mut by_d[d], c);
                        }
                    }
                }
                // α-averages of size d (larger sizes are dominated).
                for d in 2..=len {
                    let s = q(1, d as i64);
                    for c in by_d[d].clone() {
                        changed |= insert(&mut frontier[mask], scale(&c, &s));
                    }
                }
                by_d[1] = frontier[mask].clone();
                chains[mask] = by_d;
                // Weighted functionals of weights 1..=4.
                for parts in block_partitions(mask) {
                    let mins: Vec<u64> = parts.iter().map(|p| index_of(p.trailing_zeros() as usize)).collect();
                    let mut acc: Vec<Coeffs> = frontier[parts[0]].clone();
                    for k in 1..parts.len() {
                        let prev_max = (usize::BITS - 1 - parts[k - 1].leading_zeros()) as usize;
                        let floor = (1i64 << index_of(prev_max)) + 1;
                        let mut alphas = Vec::new();
                        for (d, front) in chains[parts[k]].iter().enumerate().skip(1) {
                            let s = q(1, floor.max(d as i64));
                            for c in front {
                                insert(&mut alphas, scale(c, &s));
                            }
                        }
                        acc = sum_fronts(&acc, &alphas);
                    }
                    for w in 1..=4usize {
                        if !schreier(w, &mins) {
                            continue;
                        }
                        let s = q(1, 1 << w);
                        for c in &acc {
                            changed |= insert(&mut frontier[mask], scale(c, &s));
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let approx = frontier
            .iter()
            .map(|fs| fs.iter().map(|f| f.iter().map(to_f64).collect()).collect())
            .collect();
        let scaled = frontier.iter().map(|fs| fs.iter().map(|f| common_denominator(f)).collect()).collect();
        WalphaOracle { frontier, approx, scaled, rounds }
    }

    /// `sup f(x)` over `W_α` for `x` with support in `{1..8}`.
    pub fn value(&self, x: &[Q]) -> Q {
        let supp: usize = (0..WA_N).filter(|&i| !x[i].is_zero()).map(|i| 1 << i).sum();
        let abs: Vec<Q> = x.iter().map(|c| c.abs()).collect();
        let fabs: Vec<f64> = abs.iter().map(to_f64).collect();
        let masks: Vec<usize> = (1..1usize << WA_N).filter(|m| m & !supp == 0).collect();
        let dot = |f: &[f64]| -> f64 { f.iter().zip(&fabs).map(|(a, b)| a * b).sum() };
        let mut top = 0f64;
        for &m in &masks {
            for f in &self.approx[m] {
                top = top.max(dot(f));
            }
        }
        // Exact pass over everything within float error of the top,
        // comparing fractions by cross-multiplication.
        let (xn, xd) = common_denominator(&abs);
        let mut best = (BigInt::zero(), BigInt::one());
        for &m in &masks {
            for ((nums, den), a) in self.scaled[m].iter().zip(&self.approx[m]) {
                if dot(a) >= top - 1e-9 {
                    let num: BigInt = nums.iter().zip(&xn).map(|(a, b)| a * b).sum();
                    if &num * &best.1 > &best.0 * den {
                        best = (num, den.clone());
                    }
                }
            }
        }
        Q::new(best.0, best.1 * xd)
    }

    pub fn size(&self) -> usize {
        self.frontier.iter().map(Vec::len).sum()
    }
}
