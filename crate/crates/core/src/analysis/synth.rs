use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{AnalysisParams, Decomposition, DependentSequence, ExactPair};
use crate::coding::CodeBook;
use crate::error::{Error, Result};
use crate::norms::{walpha_value, SearchBudget};
use crate::tree::{is_maximal, NodeStore, SubtreePolicy, TreeNode};
use crate::vector::{big_to_rational, format_rational, pow2, rat, Rational, SparseVector};
use crate::wt::{check_certificate, AvgKind, Certificate, Functional, Sign, Witness, WtContext};

/// `wtd[w](avg[basic;1;+](unit(+,i)))` and `θ 2^w e_i`, with the
/// one-block decomposition `x = 2^w · 1 · (θ e_i)`.
pub fn single_coordinate_pair(w: &BigUint, i: u64, params: &AnalysisParams) -> Result<ExactPair> {
    let f = Functional::weighted(w.clone(), vec![Functional::basic(1u32, &[(Sign::Plus, i)])]);
    let block = SparseVector::from_pairs(&[(i, params.theta.clone())]);
    let x = block.scale(&big_to_rational(&pow2(w)?));
    let eps_max = (rat(36, 1) * &params.c * big_to_rational(&pow2(&(w * 3u32))?)).recip();
    let decomposition = Decomposition {
        blocks: vec![block],
        coeffs: vec![Rational::one()],
        eps: eps_max / rat(2, 1),
        ns: Some(vec![pow2(&(w * 2u32))? + 1u32]),
    };
    Ok(ExactPair { cert: Certificate::new(f), x, decomposition })
}

/// A toy dependent sequence of `len` single-coordinate pairs at indices
/// `start, start+1, ...`: the first weight is `min L`, each later weight is
/// coded from the prefix. Refuses to extend a node that is maximal in the
/// subtree. The final node is stored.
pub fn synthesize_dependent(
    params: &AnalysisParams,
    len: usize,
    start: u64,
    codebook: &mut CodeBook,
    store: &mut NodeStore,
    policy: &SubtreePolicy,
) -> Result<DependentSequence> {
    if !params.mode.is_toy() {
        return Err(Error::Invalid("synthesis runs in toy mode only".into()));
    }
    if start == 0 || len == 0 {
        return Err(Error::Invalid("need start >= 1 and length >= 1".into()));
    }
    let mut pairs: Vec<ExactPair> = Vec::new();
    let mut node = TreeNode::default();
    for k in 0..len {
        let w = if k == 0 {
            params.mode.min_l()
        } else {
            if is_maximal(&node, policy)? {
                return Err(Error::Tree(format!(
                    "cannot extend past pair {k}: is_maximal holds for node {} under {}",
                    short_hash(&node),
                    policy.name()
                )));
            }
            codebook.sigma_assign(&node)?
        };
        let p = single_coordinate_pair(&w, start + k as u64, params)?;
        node = node.extended(p.cert.functional.clone(), p.x.clone());
        pairs.push(p);
    }
    store.insert(&node);
    Ok(DependentSequence { pairs })
}

fn short_hash(node: &TreeNode) -> String {
    node.hash()[..12].to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiReport {
    pub n: usize,
    pub pairs: Vec<ExactPair>,
    pub f: Certificate,
    /// `f(x - y)`, a lower bound for `‖x - y‖`.
    pub lower: Rational,
    /// `W_α` norm of `x + y`, an upper bound for `‖x + y‖`.
    pub upper: Rational,
    /// `W_α` norm of `x - y`, the upper side of the bracket on `‖x - y‖`.
    pub upper_diff: Rational,
    pub ratio: Rational,
}

impl std::fmt::Display for HiReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "f = {}", self.f.functional)?;
        writeln!(f, "lower f(x-y) = {}", format_rational(&self.lower))?;
        writeln!(f, "upper W_α(x-y) = {}", format_rational(&self.upper_diff))?;
        writeln!(f, "upper W_α(x+y) = {}", format_rational(&self.upper))?;
        write!(f, "ratio = {}", format_rational(&self.ratio))
    }
}

/// Toy separation: `n` root pairs `(f_q, x_q)` at consecutive indices from
/// `max(3, n)`, `x` the odd ones and `y` the even ones, and
/// `f = (1/2) Σ α_q` with `α_q` a one-child conditional average of `±f_q`
/// of the least very-fast-growing size. Returns `f(x - y)` against the
/// `W_α` norm of `x + y`.
pub fn hi_demo(
    n: usize,
    params: &AnalysisParams,
    codebook: &mut CodeBook,
    store: &mut NodeStore,
    policy: &SubtreePolicy,
    budget: &SearchBudget,
) -> Result<HiReport> {
    if !params.mode.is_toy() {
        return Err(Error::Invalid("the separation demo runs in toy mode only".into()));
    }
    if n == 0 {
        return Err(Error::Invalid("need n >= 1".into()));
    }
    let first = 3.max(n as u64);
    let mut pairs = Vec::new();
    let mut alphas = Vec::new();
    let (mut x, mut y) = (SparseVector::new(), SparseVector::new());
    let mut size = BigUint::one();
    for q in 0..n {
        let i = first + q as u64;
        let seq = synthesize_dependent(params, 1, i, codebook, store, policy)?;
        let pair = seq.pairs.into_iter().next().expect("length 1");
        let root = TreeNode::new(vec![(pair.cert.functional.clone(), pair.x.clone())]);
        let sign = if q % 2 == 0 { Sign::Plus } else { Sign::Minus };
        alphas.push(Functional::Average {
            kind: AvgKind::Co,
            size: size.clone(),
            signs: vec![sign],
            witness: Some(Witness { node: root.hash(), indices: vec![1] }),
            children: vec![pair.cert.functional.clone()],
        });
        if q % 2 == 0 {
            x = x.plus(&pair.x);
        } else {
            y = y.plus(&pair.x);
        }
        size = pow2(&BigUint::from(i))? + 1u32;
        pairs.push(pair);
    }
    let f = Certificate::new(Functional::weighted(1u32, alphas));
    let ctx = WtContext { params: &params.mode, codebook, store, policy, co_reading: Default::default() };
    let rep = check_certificate(&f, &ctx)?;
    if let Some(fail) = rep.failure {
        return Err(Error::Invalid(format!("demo functional fails at term {}: {} {}", fail.position, fail.clause, fail.message)));
    }
    let lower = f.functional.evaluate(&x.minus(&y))?;
    let upper = walpha_value(&x.plus(&y), budget)?;
    let upper_diff = walpha_value(&x.minus(&y), budget)?;
    let ratio = if upper.is_zero() { Rational::zero() } else { &lower / &upper };
    Ok(HiReport { n, pairs, f, lower, upper, upper_diff, ratio })
}
