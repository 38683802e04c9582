use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use super::{AnalysisParams, AnalysisReport, Status};
use crate::error::{Error, Result};
use crate::norms::{walpha_value, walpha_weighted_sup, SearchBudget};
use crate::scc::check_basic_scc;
use crate::tree::{in_subtree, validate_special, TreeNode};
use crate::vector::{big_to_rational, ceil_log2, format_rational, inv_pow2, pow2, rat, successive, Rational, SparseVector};
use crate::wt::{check_certificate, Certificate, Functional, WtContext};

/// How a `(C, θ, n)`-vector is put together: `x = 2^n Σ c_k x_k` with
/// `Σ c_k x_k` an `(n, ε)`-s.c.c., and optionally RIS indices `n_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub blocks: Vec<SparseVector>,
    pub coeffs: Vec<Rational>,
    pub eps: Rational,
    pub ns: Option<Vec<BigUint>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorKind {
    Exact,
    Vector,
    None,
}

impl VectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            VectorKind::Exact => "exact-vector",
            VectorKind::Vector => "vector",
            VectorKind::None => "none",
        }
    }
}

fn c_over_pow2(c: &Rational, j: u64) -> Result<Rational> {
    Ok(c * inv_pow2(&BigUint::from(j))?)
}

/// `max supp x < 2^d`, without building `2^d` when `d` is large.
fn below_pow2(m: &BigUint, d: &BigUint) -> bool {
    match u64::try_from(d) {
        Ok(d) => m.bits() <= d,
        Err(_) => true,
    }
}

/// Rapidly increasing sequence check. Clause (ii) is exact. Clause (i) and
/// `‖x_k‖ <= C` are tested against `W_α`, which contains `W_𝒯`: a pass is
/// a pass, a miss is inconclusive.
pub fn check_ris(xs: &[SparseVector], c: &Rational, ns: &[BigUint], budget: &SearchBudget) -> Result<AnalysisReport> {
    if !successive(xs)? {
        return Err(Error::Invalid("RIS blocks must be successive".into()));
    }
    let mut r = AnalysisReport::default();
    r.check(
        "n_k increasing",
        ns.len() == xs.len() && ns.windows(2).all(|w| w[0] < w[1]),
        false,
        format!("{} indices for {} blocks", ns.len(), xs.len()),
    );
    if ns.len() != xs.len() {
        return Ok(r);
    }
    for (k, (x, n_k)) in xs.iter().zip(ns).enumerate() {
        let k1 = k + 1;
        let linf = x.linf();
        let upper = walpha_value(x, budget)?;
        let status = if upper <= *c {
            Status::Pass
        } else if linf > *c {
            Status::Fail
        } else {
            Status::Inconclusive
        };
        r.push(format!("‖x_{k1}‖ <= C"), status, format!("W_α norm {}", format_rational(&upper)));

        // Beyond the saturation level the S_j family sup is constant, and
        // the clause reads `sup < C` at every such j.
        let sat = ceil_log2(x.len()).max(1) as u64;
        let top = if *n_k > BigUint::one() { (n_k - 1u32).min(BigUint::from(sat)) } else { BigUint::zero() };
        let top = u64::try_from(&top).expect("bounded by sat");
        let mut worst: Option<(u64, Rational)> = None;
        for j in 1..=top {
            let s = walpha_weighted_sup(x, j, budget)?;
            if s >= c_over_pow2(c, j)? {
                worst = Some((j, s));
                break;
            }
        }
        let (status, detail) = match worst {
            None => (Status::Pass, format!("weights 1..{top} checked against W_α (conservative)")),
            Some((j, s)) => (
                Status::Inconclusive,
                format!("W_α weight-{j} sup {} >= C/2^{j} (conservative)", format_rational(&s)),
            ),
        };
        r.push(format!("(i) at k={k1}"), status, detail);
        if k1 < xs.len() {
            let m = x.max_supp().expect("non-zero block");
            let holds = &ns[k1] > n_k && below_pow2(m, &(&ns[k1] - n_k));
            r.check(format!("(ii) at k={k1}"), holds, false, format!("max supp x_{k1} = {m}"));
        }
    }
    Ok(r)
}

/// Turns every decided clause into a report entry.
fn as_reported(mut r: AnalysisReport) -> AnalysisReport {
    for c in &mut r.clauses {
        c.status = match c.status {
            Status::Pass => Status::Reported(true),
            Status::Fail | Status::Inconclusive => Status::Reported(false),
            s => s,
        };
    }
    r
}

/// `(C, θ, n)`-vector check against a supplied decomposition. `‖x‖ >= θ`
/// is only established through a passing certificate.
pub fn check_vector(
    x: &SparseVector,
    n: u64,
    d: &Decomposition,
    params: &AnalysisParams,
    lower: Option<(&Certificate, &WtContext)>,
    budget: &SearchBudget,
) -> Result<(AnalysisReport, VectorKind)> {
    if d.blocks.is_empty() || d.blocks.len() != d.coeffs.len() {
        return Err(Error::Invalid("decomposition needs one coefficient per block".into()));
    }
    let analytic = params.report_analytic;
    let c = &params.c;
    let nb = BigUint::from(n);
    let mut r = AnalysisReport::default();

    let eps_max = (rat(36, 1) * c * big_to_rational(&pow2(&(&nb * 3u32))?)).recip();
    r.check(
        "ε < 1/(36C2^{3n})",
        d.eps.is_positive() && d.eps < eps_max,
        analytic,
        format!("ε = {}", format_rational(&d.eps)),
    );
    let succ = successive(&d.blocks)?;
    r.check("blocks successive", succ, false, "");
    if !succ {
        return Ok((r, VectorKind::None));
    }
    for (k, b) in d.blocks.iter().enumerate() {
        let (holds, detail) = match walpha_value(b, budget) {
            Ok(v) => (v <= *c, format!("W_α norm {}", format_rational(&v))),
            Err(e) => (false, e.to_string()),
        };
        r.check(format!("‖x_{}‖ <= C", k + 1), holds, analytic, detail);
    }
    let min1 = big_to_rational(d.blocks[0].min_supp().expect("non-zero block"));
    let need = rat(8, 1) * c * big_to_rational(&pow2(&(&nb * 2u32))?);
    r.check("(i) min supp x_1 >= 8C2^{2n}", min1 >= need, analytic, format!("min supp x_1 = {min1}"));

    let mut psi = SparseVector::new();
    for (b, ck) in d.blocks.iter().zip(&d.coeffs) {
        psi.add_at(b.min_supp().expect("non-zero block").clone(), ck.clone());
    }
    let scc = check_basic_scc(&psi, n as usize, &d.eps);
    r.check("(ii) s.c.c.", scc.ok, analytic, scc.diagnostics.join("; "));

    let scale = big_to_rational(&pow2(&nb)?);
    let mut sum = SparseVector::new();
    for (b, ck) in d.blocks.iter().zip(&d.coeffs) {
        sum = sum.plus(&b.scale(&(ck * &scale)));
    }
    r.check("(iii) x = 2^n Σ c_k x_k", sum == *x, false, "");
    match lower {
        Some((cert, ctx)) => {
            let rep = check_certificate(cert, ctx)?;
            if let Some(f) = rep.failure {
                r.push("(iii) ‖x‖ >= θ", Status::Inconclusive, format!("certificate fails: {} {}", f.clause, f.message));
            } else {
                let v = cert.functional.evaluate(x)?.abs();
                r.check("(iii) ‖x‖ >= θ", v >= params.theta, false, format!("certificate gives {}", format_rational(&v)));
            }
        }
        None => r.push("(iii) ‖x‖ >= θ", Status::Inconclusive, "no certificate supplied"),
    }
    match walpha_value(x, budget) {
        Ok(v) => r.push(
            "upper: ‖x‖ < 7C",
            Status::Reported(v < rat(7, 1) * c),
            format!("W_α norm {}", format_rational(&v)),
        ),
        Err(e) => r.push("upper: ‖x‖ < 7C", Status::Reported(false), e.to_string()),
    }
    let base_ok = r.ok();

    let Some(ns) = &d.ns else {
        return Ok((r, if base_ok { VectorKind::Vector } else { VectorKind::None }));
    };
    let n1 = ns.first().cloned().unwrap_or_default();
    r.check("exact: n_1 > 2^{2n}", n1 > pow2(&(&nb * 2u32))?, analytic, "");
    let ris = match check_ris(&d.blocks, c, ns, budget) {
        Ok(rep) => rep,
        Err(e) => {
            let mut rep = AnalysisReport::default();
            rep.push("budget", Status::Inconclusive, e.to_string());
            rep
        }
    };
    r.extend("RIS ", if analytic { as_reported(ris) } else { ris });
    let kind = match (base_ok, r.ok()) {
        (true, true) => VectorKind::Exact,
        (true, false) => VectorKind::Vector,
        _ => VectorKind::None,
    };
    Ok((r, kind))
}

/// One pair of a dependent sequence with the data needed to check it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPair {
    pub cert: Certificate,
    pub x: SparseVector,
    pub decomposition: Decomposition,
}

impl ExactPair {
    pub fn weight(&self) -> Option<&BigUint> {
        self.cert.functional.weight()
    }
}

/// `(C, θ, n)`-exact pair: `w(f) = n`, `ran f ⊂ ran x`, `f(x) = θ`, and `x`
/// an exact vector certified by `f` itself.
pub fn check_exact_pair(
    pair: &ExactPair,
    n: u64,
    params: &AnalysisParams,
    ctx: &WtContext,
    budget: &SearchBudget,
) -> Result<AnalysisReport> {
    let f = &pair.cert.functional;
    let mut r = AnalysisReport::default();
    let weighted = matches!(f, Functional::Weighted { .. });
    r.check(
        "w(f) = n",
        weighted && f.weight() == Some(&BigUint::from(n)),
        false,
        format!("w(f) = {}", f.weight().map_or("none".to_string(), |w| w.to_string())),
    );
    r.check("ran f ⊂ ran x", f.range().is_subset(&pair.x.range()), false, format!("ran f = {}, ran x = {}", f.range(), pair.x.range()));
    let v = f.evaluate(&pair.x)?;
    r.check("f(x) = θ", v == params.theta, false, format!("f(x) = {}", format_rational(&v)));
    let cert = check_certificate(&pair.cert, ctx)?;
    r.check("f ∈ W_𝒯", cert.ok(), false, cert.to_string().trim().to_string());
    let (vr, kind) = check_vector(&pair.x, n, &pair.decomposition, params, Some((&pair.cert, ctx)), budget)?;
    r.extend("vector ", vr);
    r.check("x exact", kind == VectorKind::Exact, false, kind.name());
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependentSequence {
    pub pairs: Vec<ExactPair>,
}

impl DependentSequence {
    pub fn node(&self) -> TreeNode {
        TreeNode::new(self.pairs.iter().map(|p| (p.cert.functional.clone(), p.x.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `(C, θ)`-dependent sequence: every pair exact at its own weight, and
/// the node in the subtree.
pub fn check_dependent(
    seq: &DependentSequence,
    params: &AnalysisParams,
    ctx: &WtContext,
    budget: &SearchBudget,
) -> Result<AnalysisReport> {
    let mut r = AnalysisReport::default();
    for (k, p) in seq.pairs.iter().enumerate() {
        let name = format!("(i) pair {}", k + 1);
        let Some(w) = p.weight().and_then(|w| u64::try_from(w).ok()) else {
            r.push(name, Status::Fail, "f is not weighted");
            continue;
        };
        let pr = check_exact_pair(p, w, params, ctx, budget)?;
        match pr.first_failure() {
            None => r.push(name, Status::Pass, format!("{} report-only clauses", pr.reported())),
            Some(c) => r.push(name, Status::Fail, format!("{}: {}", c.name, c.detail)),
        }
    }
    let node = seq.node();
    let special = validate_special(&node, ctx.codebook, ctx.params);
    r.check("(ii) special sequence", special.ok(), false, special.to_string().trim().to_string());
    let sub = in_subtree(&node, ctx.policy)?;
    r.check("(ii) in subtree", sub, false, ctx.policy.name());
    Ok(r)
}
