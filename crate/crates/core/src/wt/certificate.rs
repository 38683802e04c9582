//! Restricted averages (incomparable, conditional, irrelevant) and
//! stage-annotated membership certificates for `W_𝒯`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{Signed, Zero};

use crate::coding::{CodeBook, ModeParams};
use crate::error::{Error, Result};
use crate::tree::{in_subtree, validate_special, Failure, NodeStore, Report, SubtreePolicy, TreeNode};
use crate::vector::{Interval, Rational, SparseVector};
use crate::wt::{AvgKind, Functional, Sign, Witness};

/// Which index bound the conditional clause uses: `k_d <= m` (the node
/// length, as in the irrelevant clause) or the literal `k_d <= n`, which
/// with `n` indices forces `k_i = i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoReading {
    #[default]
    UpToM,
    UpToN,
}

/// Everything a `W_𝒯` check consults.
#[derive(Clone, Copy)]
pub struct WtContext<'a> {
    pub params: &'a ModeParams,
    pub codebook: &'a CodeBook,
    pub store: &'a NodeStore,
    pub policy: &'a SubtreePolicy,
    pub co_reading: CoReading,
}

/// Result of classifying a family of weighted functionals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub kind: Option<AvgKind>,
    /// Why each kind that was tried did not apply.
    pub rejected: Vec<(AvgKind, String)>,
}

fn precondition(gs: &[Functional], ctx: &WtContext) -> std::result::Result<Vec<BigUint>, String> {
    let min_l = ctx.params.min_l();
    let mut phis = Vec::with_capacity(gs.len());
    for (i, g) in gs.iter().enumerate() {
        let w = g.weight().ok_or_else(|| format!("g_{} is not weighted", i + 1))?;
        if *w < min_l {
            return Err(format!("w(g_{}) = {w} is below min L = {min_l}", i + 1));
        }
        let p = ctx.codebook.phi(w).map_err(|e| e.to_string())?;
        if let Some(prev) = phis.last() {
            if p <= *prev {
                return Err(format!("φ(w(g_{})) = {p} does not increase", i + 1));
            }
        }
        phis.push(p);
    }
    for (i, w) in gs.windows(2).enumerate() {
        if w[0].max_supp() >= w[1].min_supp() {
            return Err(format!("g_{} and g_{} are not successive", i + 1, i + 2));
        }
    }
    Ok(phis)
}

/// Pairwise incomparable weights.
pub fn check_incomparable(gs: &[Functional], ctx: &WtContext) -> Result<std::result::Result<(), String>> {
    if let Err(e) = precondition(gs, ctx) {
        return Ok(Err(e));
    }
    for i in 0..gs.len() {
        for j in i + 1..gs.len() {
            let (wi, wj) = (gs[i].weight().expect("weighted"), gs[j].weight().expect("weighted"));
            if ctx.codebook.comparable(wi, wj, ctx.store)? {
                return Ok(Err(format!("w(g_{}) = {wi} and w(g_{}) = {wj} are comparable", i + 1, j + 1)));
            }
        }
    }
    Ok(Ok(()))
}

fn witness_node<'a>(witness: Option<&Witness>, d: usize, ctx: &WtContext<'a>) -> Result<std::result::Result<&'a TreeNode, String>> {
    let Some(w) = witness else {
        return Ok(Err("no witness node supplied".into()));
    };
    let node = ctx
        .store
        .get(&w.node)
        .ok_or_else(|| Error::Tree(format!("witness node {} is not stored", w.node)))?;
    if w.indices.len() != d {
        return Err(Error::Tree(format!("witness has {} indices for {d} functionals", w.indices.len())));
    }
    let m = node.len();
    if !w.indices.windows(2).all(|p| p[0] < p[1]) || w.indices.first().map_or(false, |&k| k == 0) {
        return Ok(Err("witness indices are not 1 <= k_1 < ... < k_d".into()));
    }
    if w.indices.last().map_or(false, |&k| k > m) {
        return Ok(Err(format!("witness index beyond the node length {m}")));
    }
    if ctx.co_reading == CoReading::UpToN && w.indices.iter().enumerate().any(|(i, &k)| k != i + 1) {
        return Ok(Err("literal reading k_d <= n requires k_i = i".into()));
    }
    let special = validate_special(node, ctx.codebook, ctx.params);
    if !special.ok() {
        return Ok(Err(format!("witness node is not a special sequence: {special}")));
    }
    if !in_subtree(node, ctx.policy)? {
        return Ok(Err(format!("witness node is not in the {} subtree", ctx.policy.name())));
    }
    Ok(Ok(node))
}

/// `|g_i(x_{k_i})|` for each `i`, after checking `w(f_{k_i}) = φ(w(g_i))`.
fn matched_values(gs: &[Functional], node: &TreeNode, w: &Witness, ctx: &WtContext) -> Result<std::result::Result<Vec<Rational>, String>> {
    let mut out = Vec::new();
    for (i, (g, &k)) in gs.iter().zip(&w.indices).enumerate() {
        let (f, x) = &node.pairs[k - 1];
        let target = ctx.codebook.phi(g.weight().expect("weighted"))?;
        if f.weight() != Some(&target) {
            return Ok(Err(format!("w(f_{k}) differs from φ(w(g_{})) = {target}", i + 1)));
        }
        out.push(g.evaluate(x)?);
    }
    Ok(Ok(out))
}

/// Comparable family: clauses (a)-(c) against the witness node.
pub fn check_comparable(gs: &[Functional], witness: Option<&Witness>, ctx: &WtContext) -> Result<std::result::Result<(), String>> {
    if let Err(e) = precondition(gs, ctx) {
        return Ok(Err(e));
    }
    let d = gs.len();
    let node = match witness_node(witness, d, ctx)? {
        Ok(n) => n,
        Err(e) => return Ok(Err(e)),
    };
    let vals = match matched_values(gs, node, witness.expect("checked"), ctx)? {
        Ok(v) => v,
        Err(e) => return Ok(Err(e)),
    };
    if d >= 3 {
        let t = ctx.params.irrelevance_threshold();
        for i in 2..d {
            if vals[i - 1].abs() > t {
                return Ok(Err(format!("|g_{i}(x_k)| > {t}")));
            }
        }
    }
    if d >= 4 {
        for i in 2..d {
            for j in i + 1..d {
                let gap = ctx.params.co_gap(i);
                if (&vals[i - 1] - &vals[j - 1]).abs() >= gap {
                    return Ok(Err(format!("|g_{i}(x) - g_{j}(x)| >= {gap}")));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// Irrelevant family: clause (a) and large interior values.
pub fn check_irrelevant(gs: &[Functional], witness: Option<&Witness>, ctx: &WtContext) -> Result<std::result::Result<(), String>> {
    if let Err(e) = precondition(gs, ctx) {
        return Ok(Err(e));
    }
    let d = gs.len();
    let node = match witness_node(witness, d, ctx)? {
        Ok(n) => n,
        Err(e) => return Ok(Err(e)),
    };
    let vals = match matched_values(gs, node, witness.expect("checked"), ctx)? {
        Ok(v) => v,
        Err(e) => return Ok(Err(e)),
    };
    if d >= 3 {
        let t = ctx.params.irrelevance_threshold();
        for i in 2..d {
            if vals[i - 1].abs() <= t {
                return Ok(Err(format!("|g_{i}(x_k)| <= {t}")));
            }
        }
    }
    Ok(Ok(()))
}

/// First of IC, CO, IR that the family satisfies, given the witness.
pub fn classify_average(gs: &[Functional], witness: Option<&Witness>, ctx: &WtContext) -> Result<Classification> {
    let mut rejected = Vec::new();
    for kind in [AvgKind::Ic, AvgKind::Co, AvgKind::Ir] {
        let r = check_family(kind, gs, witness, ctx)?;
        match r {
            Ok(()) => return Ok(Classification { kind: Some(kind), rejected }),
            Err(e) => rejected.push((kind, e)),
        }
    }
    Ok(Classification { kind: None, rejected })
}

fn check_family(kind: AvgKind, gs: &[Functional], witness: Option<&Witness>, ctx: &WtContext) -> Result<std::result::Result<(), String>> {
    match kind {
        AvgKind::Ic => check_incomparable(gs, ctx),
        AvgKind::Co => check_comparable(gs, witness, ctx),
        AvgKind::Ir => check_irrelevant(gs, witness, ctx),
        AvgKind::Basic | AvgKind::Alpha => Ok(Err(format!("{} is not a tree-coded kind", kind.name()))),
    }
}

/// Looks through the stored nodes for a witness under which the family is
/// of the given kind. Only nodes already in the store are searched.
pub fn find_witness(kind: AvgKind, gs: &[Functional], ctx: &WtContext) -> Result<Option<Witness>> {
    let d = gs.len();
    let mut targets = Vec::new();
    for g in gs {
        let Some(w) = g.weight() else { return Ok(None) };
        targets.push(ctx.codebook.phi(w)?);
    }
    let mut hashes: Vec<&String> = ctx.store.hashes().collect();
    hashes.sort();
    for h in hashes {
        let node = ctx.store.get(h).expect("listed");
        let mut indices = Vec::with_capacity(d);
        let mut start = 0;
        for t in &targets {
            match (start..node.len()).find(|&k| node.pairs[k].0.weight() == Some(t)) {
                Some(k) => {
                    indices.push(k + 1);
                    start = k + 1;
                }
                None => break,
            }
        }
        if indices.len() != d {
            continue;
        }
        let w = Witness { node: h.clone(), indices };
        if check_family(kind, gs, Some(&w), ctx)?.is_ok() {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// A functional together with its stage in the increasing union
/// `W_0 ⊆ W_1 ⊆ ...`, one stage per subterm in pre-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub functional: Functional,
    pub stages: Vec<usize>,
}

impl Certificate {
    /// Annotates `f` with the least stages the rules allow.
    pub fn new(functional: Functional) -> Self {
        let mut stages = Vec::new();
        least_stages(&functional, &mut stages);
        Self { functional, stages }
    }
}

fn least_stages(f: &Functional, out: &mut Vec<usize>) -> usize {
    let slot = out.len();
    out.push(0);
    let child_max = f.children().iter().map(|c| least_stages(c, out)).max().unwrap_or(0);
    let s = match f {
        Functional::Unit { .. } => 0,
        Functional::Average { .. } => child_max + 1,
        Functional::Weighted { .. } => child_max,
    };
    out[slot] = s;
    s
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.stages.iter().map(|s| s.to_string()).collect();
        write!(f, "{}\nstages: {}", self.functional, s.join(" "))
    }
}

impl FromStr for Certificate {
    type Err = Error;

    /// The functional on the first non-empty line and an optional
    /// `stages:` line; without one the least stages are used.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let functional: Functional = lines.next().ok_or_else(|| Error::Parse("empty certificate".into()))?.parse()?;
        match lines.next() {
            None => Ok(Certificate::new(functional)),
            Some(l) => {
                let body = l
                    .strip_prefix("stages:")
                    .ok_or_else(|| Error::Parse(format!("expected `stages:` line, got `{l}`")))?;
                let stages = body
                    .split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad stage `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Certificate { functional, stages })
            }
        }
    }
}

/// Full `W_𝒯` check of a certificate: structural membership in `W_α`,
/// the stage rules, and each restricted average against its witness.
/// Failure positions are 1-based pre-order term numbers.
pub fn check_certificate(cert: &Certificate, ctx: &WtContext) -> Result<Report> {
    let f = &cert.functional;
    if let Err(e) = f.check_structure() {
        return Ok(Report::fail(0, "W_α structure", e));
    }
    if cert.stages.len() != f.term_count() {
        return Ok(Report::fail(
            0,
            "stages",
            format!("{} stages for {} subterms", cert.stages.len(), f.term_count()),
        ));
    }
    let mut pos = 0;
    check_term(f, &cert.stages, &mut pos, ctx)
}

fn check_term(f: &Functional, stages: &[usize], pos: &mut usize, ctx: &WtContext) -> Result<Report> {
    let me = *pos;
    let my_stage = stages[me];
    *pos += 1;
    let mut child_stages = Vec::new();
    for c in f.children() {
        child_stages.push(stages[*pos]);
        let r = check_term(c, stages, pos, ctx)?;
        if !r.ok() {
            return Ok(r);
        }
    }
    let at = me + 1;
    match f {
        Functional::Unit { .. } => {
            if my_stage != 0 {
                return Ok(Report::fail(at, "stages", format!("unit at stage {my_stage}, expected 0")));
            }
        }
        Functional::Average { kind, signs, witness, children, .. } => {
            if let Some(s) = child_stages.iter().find(|&&s| s >= my_stage) {
                return Ok(Report::fail(at, "stages", format!("average at stage {my_stage} over a stage-{s} term")));
            }
            match kind {
                AvgKind::Basic => {}
                AvgKind::Alpha => {
                    return Ok(Report::fail(at, "kind", "an unrestricted average is not an α_c-average"));
                }
                AvgKind::Co => {
                    if !signs.windows(2).all(|p| p[0] != p[1]) {
                        return Ok(Report::fail(at, "CO signs", "signs do not alternate"));
                    }
                }
                AvgKind::Ic | AvgKind::Ir => {
                    if !signs.windows(2).all(|p| p[0] == p[1]) {
                        return Ok(Report::fail(at, "signs", "signs must agree"));
                    }
                }
            }
            if matches!(kind, AvgKind::Ic | AvgKind::Co | AvgKind::Ir) {
                if let Err(e) = check_family(*kind, children, witness.as_ref(), ctx)? {
                    return Ok(Report::fail(at, kind.name(), e));
                }
            }
        }
        Functional::Weighted { .. } => {
            if let Some(s) = child_stages.iter().find(|&&s| s > my_stage) {
                return Ok(Report::fail(at, "stages", format!("weighted at stage {my_stage} over a stage-{s} average")));
            }
        }
    }
    Ok(Report::pass())
}

/// `max |f(x)|` over the certificates, each of which must pass. Every
/// value is a lower bound for the norm induced by `W_𝒯`.
pub fn xt_lower_bound(x: &SparseVector, certs: &[Certificate], ctx: &WtContext) -> Result<Rational> {
    let mut best = Rational::zero();
    for (k, c) in certs.iter().enumerate() {
        let r = check_certificate(c, ctx)?;
        if let Some(Failure { position, clause, message }) = r.failure {
            return Err(Error::Invalid(format!("certificate {} fails at term {position} [{clause}]: {message}", k + 1)));
        }
        best = best.max(c.functional.evaluate(x)?.abs());
    }
    Ok(best)
}

/// The certificate of `Ef` for an interval `E`, keeping kinds, sizes,
/// weights and the stages of surviving terms. `None` when `Ef = 0`.
pub fn restrict_certificate(cert: &Certificate, e: &Interval) -> Option<Certificate> {
    let functional = cert.functional.restrict(e)?;
    let mut stages = Vec::new();
    surviving_stages(&cert.functional, &cert.stages, &mut 0, e, &mut stages);
    Some(Certificate { functional, stages })
}

fn surviving_stages(f: &Functional, stages: &[usize], pos: &mut usize, e: &Interval, out: &mut Vec<usize>) {
    if f.restrict(e).is_none() {
        *pos += f.term_count();
        return;
    }
    out.push(stages.get(*pos).copied().unwrap_or(0));
    *pos += 1;
    for c in f.children() {
        surviving_stages(c, stages, pos, e, out);
    }
}

/// Signs `+, -, +, ...` or the reverse.
pub fn alternating(d: usize, start: Sign) -> Vec<Sign> {
    let mut s = start;
    (0..d)
        .map(|_| {
            let out = s;
            s = s.flip();
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{nat, rat};

    fn g(w: u64, i: u64) -> Functional {
        Functional::weighted(w, vec![Functional::basic(1u32, &[(Sign::Plus, i)])])
    }

    /// Toy special sequence at indices `start, start+1, ...` with
    /// `x_k = c_k e_{start+k}`.
    fn chain(start: u64, coeffs: &[Rational], book: &mut CodeBook) -> TreeNode {
        let mut node = TreeNode::default();
        let mut w = nat(2);
        for (k, c) in coeffs.iter().enumerate() {
            let i = start + k as u64;
            let f = Functional::weighted(w.clone(), vec![Functional::basic(1u32, &[(Sign::Plus, i)])]);
            node = node.extended(f, SparseVector::from_pairs(&[(i, c.clone())]));
            if k + 1 < coeffs.len() {
                w = book.sigma_assign(&node).unwrap();
            }
        }
        node
    }

    fn avg(kind: AvgKind, signs: Vec<Sign>, witness: Option<Witness>, children: Vec<Functional>) -> Functional {
        Functional::Average { kind, size: nat(children.len() as u64), signs, witness, children }
    }

    struct Fixture {
        params: ModeParams,
        book: CodeBook,
        store: NodeStore,
        policy: SubtreePolicy,
    }

    impl Fixture {
        fn new() -> Self {
            let params = ModeParams::toy();
            Self { book: CodeBook::new(params.clone()), params, store: NodeStore::default(), policy: SubtreePolicy::S2Bounded }
        }

        fn ctx(&self) -> WtContext<'_> {
            WtContext { params: &self.params, codebook: &self.book, store: &self.store, policy: &self.policy, co_reading: CoReading::UpToM }
        }

        /// Stores a length-3 chain at 2,3,4 with middle coefficient `c`.
        fn node(&mut self, c: Rational) -> (TreeNode, String) {
            let node = chain(2, &[rat(1, 1), c, rat(1, 1)], &mut self.book);
            let h = self.store.insert(&node);
            (node, h)
        }
    }

    #[test]
    fn distinct_l0_weights_are_incomparable() {
        let fx = Fixture::new();
        let gs = vec![g(2, 1), g(8, 2)];
        let c = classify_average(&gs, None, &fx.ctx()).unwrap();
        assert_eq!(c.kind, Some(AvgKind::Ic));
        let cert = Certificate::new(avg(AvgKind::Ic, vec![Sign::Plus; 2], None, gs.clone()));
        assert!(check_certificate(&cert, &fx.ctx()).unwrap().ok());
        let mixed = Certificate::new(avg(AvgKind::Ic, alternating(2, Sign::Plus), None, gs));
        assert_eq!(check_certificate(&mixed, &fx.ctx()).unwrap().failure.unwrap().clause, "signs");
    }

    #[test]
    fn non_increasing_weights_classify_as_none() {
        let fx = Fixture::new();
        let c = classify_average(&[g(2, 1), g(3, 2)], None, &fx.ctx()).unwrap();
        assert_eq!(c.kind, None);
        assert_eq!(c.rejected.len(), 3);
    }

    #[test]
    fn interior_size_separates_comparable_from_irrelevant() {
        let mut fx = Fixture::new();
        // f_2 has weight 16, so x_2 = 12·2^16 e_3 gives f_2(x_2) = 12 > 10.
        let (big, hb) = fx.node(rat(786432, 1));
        let (small, hs) = fx.node(rat(1, 1));
        let fs = |n: &TreeNode| n.pairs.iter().map(|p| p.0.clone()).collect::<Vec<_>>();
        let wb = Witness { node: hb.clone(), indices: vec![1, 2, 3] };
        let ws = Witness { node: hs, indices: vec![1, 2, 3] };
        let ctx = fx.ctx();
        assert_eq!(classify_average(&fs(&big), Some(&wb), &ctx).unwrap().kind, Some(AvgKind::Ir));
        assert_eq!(classify_average(&fs(&small), Some(&ws), &ctx).unwrap().kind, Some(AvgKind::Co));
        assert_eq!(classify_average(&fs(&big), None, &ctx).unwrap().kind, None);

        let ir = Certificate::new(avg(AvgKind::Ir, vec![Sign::Minus; 3], Some(wb.clone()), fs(&big)));
        assert!(check_certificate(&ir, &ctx).unwrap().ok());
        let co = Certificate::new(avg(AvgKind::Co, alternating(3, Sign::Plus), Some(wb), fs(&big)));
        let r = check_certificate(&co, &ctx).unwrap();
        assert_eq!(r.failure.unwrap().clause, "co");
    }

    #[test]
    fn literal_index_reading_forces_identity() {
        let mut fx = Fixture::new();
        let (node, h) = fx.node(rat(1, 1));
        let gs: Vec<Functional> = node.pairs[1..].iter().map(|p| p.0.clone()).collect();
        let w = Witness { node: h, indices: vec![2, 3] };
        let mut ctx = fx.ctx();
        assert!(check_comparable(&gs, Some(&w), &ctx).unwrap().is_ok());
        ctx.co_reading = CoReading::UpToN;
        assert!(check_comparable(&gs, Some(&w), &ctx).unwrap().is_err());
    }

    #[test]
    fn unstored_witness_is_an_error() {
        let fx = Fixture::new();
        let w = Witness { node: "00".into(), indices: vec![1] };
        assert!(check_comparable(&[g(2, 1)], Some(&w), &fx.ctx()).is_err());
    }

    #[test]
    fn find_witness_searches_store() {
        let mut fx = Fixture::new();
        let (node, h) = fx.node(rat(786432, 1));
        let gs: Vec<Functional> = node.pairs.iter().map(|p| p.0.clone()).collect();
        let w = find_witness(AvgKind::Ir, &gs, &fx.ctx()).unwrap().unwrap();
        assert_eq!(w, Witness { node: h, indices: vec![1, 2, 3] });
        assert_eq!(find_witness(AvgKind::Co, &gs, &fx.ctx()).unwrap(), None);
    }

    #[test]
    fn stage_rules() {
        let fx = Fixture::new();
        let f = Functional::weighted(2u32, vec![avg(AvgKind::Ic, vec![Sign::Plus; 2], None, vec![g(2, 1), g(8, 2)])]);
        let cert = Certificate::new(f.clone());
        // wtd, avg, (wtd, avg, unit), (wtd, avg, unit)
        assert_eq!(cert.stages, vec![2, 2, 1, 1, 0, 1, 1, 0]);
        let mut bad = cert.clone();
        bad.stages[1] = 1;
        assert_eq!(check_certificate(&bad, &fx.ctx()).unwrap().failure.unwrap().position, 2);
        let mut high = cert.clone();
        high.stages[0] = 5;
        assert!(check_certificate(&high, &fx.ctx()).unwrap().ok());
        let back: Certificate = cert.to_string().parse().unwrap();
        assert_eq!(back, cert);
        let alpha = Certificate::new(Functional::average(AvgKind::Alpha, 2u32, vec![g(2, 1), g(8, 2)]));
        assert_eq!(check_certificate(&alpha, &fx.ctx()).unwrap().failure.unwrap().clause, "kind");
    }

    #[test]
    fn restriction_keeps_kind_and_validity() {
        let mut fx = Fixture::new();
        let (node, h) = fx.node(rat(786432, 1));
        let gs: Vec<Functional> = node.pairs.iter().map(|p| p.0.clone()).collect();
        let w = Witness { node: h.clone(), indices: vec![1, 2, 3] };
        let cert = Certificate::new(avg(AvgKind::Ir, vec![Sign::Plus; 3], Some(w), gs));
        let r = restrict_certificate(&cert, &Interval::from_u64(3, 9).unwrap()).unwrap();
        match &r.functional {
            Functional::Average { kind, size, witness, children, .. } => {
                assert_eq!(*kind, AvgKind::Ir);
                assert_eq!(*size, nat(3));
                assert_eq!(children.len(), 2);
                assert_eq!(witness.as_ref().unwrap().indices, vec![2, 3]);
            }
            other => panic!("unexpected {other}"),
        }
        assert_eq!(r.stages.len(), r.functional.term_count());
        assert!(check_certificate(&r, &fx.ctx()).unwrap().ok());
        assert!(restrict_certificate(&cert, &Interval::from_u64(10, 20).unwrap()).is_none());
    }

    #[test]
    fn lower_bound_uses_absolute_values() {
        let fx = Fixture::new();
        let cert = Certificate::new(avg(AvgKind::Ic, vec![Sign::Minus; 2], None, vec![g(2, 1), g(8, 2)]));
        let x = SparseVector::from_pairs(&[(1, rat(4, 1)), (2, rat(8, 1))]);
        // -(1/2)(4/2^2 + 8/2^8) = -33/64
        assert_eq!(xt_lower_bound(&x, &[cert], &fx.ctx()).unwrap(), rat(33, 64));
        let bad = Certificate::new(Functional::average(AvgKind::Alpha, 2u32, vec![g(2, 1)]));
        assert!(xt_lower_bound(&x, &[bad], &fx.ctx()).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn kinds_survive_subsequences(mask in 1u8..8, odd in proptest::collection::btree_set(0u32..6, 3)) {
            let mut fx = Fixture::new();
            let (big, hb) = fx.node(rat(786432, 1));
            let (small, hs) = fx.node(rat(1, 1));
            let keep: Vec<usize> = (0..3).filter(|k| mask & (1 << k) != 0).collect();
            let ctx = fx.ctx();
            for (node, h, ir) in [(&big, &hb, true), (&small, &hs, false)] {
                let gs: Vec<Functional> = keep.iter().map(|&k| node.pairs[k].0.clone()).collect();
                let w = Witness { node: h.clone(), indices: keep.iter().map(|k| k + 1).collect() };
                let r = if ir { check_irrelevant(&gs, Some(&w), &ctx) } else { check_comparable(&gs, Some(&w), &ctx) };
                proptest::prop_assert!(r.unwrap().is_ok());
            }
            let ic: Vec<Functional> = odd.iter().enumerate().map(|(i, e)| g(1 << (2 * e + 1), i as u64 + 1)).collect();
            proptest::prop_assert!(check_incomparable(&ic, &ctx).unwrap().is_ok());
            let sub: Vec<Functional> = keep.iter().map(|&k| ic[k].clone()).collect();
            proptest::prop_assert!(check_incomparable(&sub, &ctx).unwrap().is_ok());
        }
    }
}
