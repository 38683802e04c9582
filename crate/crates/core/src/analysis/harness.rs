use std::fmt;

use num_bigint::BigUint;
use num_traits::{Signed, Zero};

use super::{check_dependent, check_vector, AnalysisParams, Decomposition, DependentSequence, VectorKind};
use crate::error::{Error, Result};
use crate::norms::{alpha_family_sup, tsirelson_value, walpha_value, walpha_weighted_sup, SearchBudget};
use crate::scc::check_basic_scc;
use crate::vector::{big_to_rational, ceil_log2, format_rational, inv_pow2, rat, successive, Rational, SparseVector};
use crate::wt::{check_certificate, Certificate, WtContext};

/// Inputs the harness knows how to instantiate inequalities on.
#[derive(Debug, Clone)]
pub enum HarnessObject {
    /// An `(n, ε)`-basic s.c.c.
    Scc { id: String, x: SparseVector, n: usize, eps: Rational },
    /// Blocks with `‖x_k‖ <= 1` and coefficients.
    Blocks { id: String, blocks: Vec<SparseVector>, coeffs: Vec<Rational> },
    /// A `(C, θ, n)`-vector with its decomposition.
    Vector { id: String, x: SparseVector, n: u64, decomposition: Decomposition },
    /// An exact vector and weighted functionals `g_1 < ... < g_d`.
    LargeWeights { id: String, x: SparseVector, n: u64, decomposition: Decomposition, gs: Vec<Certificate> },
    /// A dependent sequence and weighted functionals to test it against.
    Dependent { id: String, seq: DependentSequence, fs: Vec<Certificate> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// A strict-mode violation: a bug in a checker or an engine.
    Violation,
    /// Toy mode: evaluated, not asserted.
    Holds,
    Fails,
    NoInstance,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::Violation => "VIOLATION",
            Verdict::Holds => "report:holds",
            Verdict::Fails => "report:fails",
            Verdict::NoInstance => "no-instance",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnessRow {
    pub id: String,
    pub inequality: &'static str,
    pub lhs: Rational,
    pub rhs: Rational,
    pub verdict: Verdict,
    /// Which quantity stands in for the left side.
    pub side: &'static str,
}

pub const SCC_NORM: &str = "‖x‖ <= 6/2^n + 12ε";
pub const SCC_TSIRELSON: &str = "‖Σ_G c_k e_k‖_T <= (1/2^n) Σ_G c_k + ε";
pub const DOMINATION: &str = "‖Σ c_k x_k‖ <= 6 ‖Σ c_k e_φ(k)‖_T";
pub const AVERAGE_FAMILY: &str = "Σ|α_q(x)| < 6C/s(α_1) + 1/2^n";
pub const SMALL_WEIGHT: &str = "|f(x)| < 7C/2^j";
pub const LARGE_WEIGHTS: &str = "Σ_{I_2}|g_j(x)| < dC/2^n";
pub const DEPENDENT_SUM_24C: &str = "‖Σ_{k=a}^b x_k‖ <= 24C";
pub const DEPENDENT_SUM_27: &str = "‖Σ_{k=a}^b x_k‖ <= 27";
pub const DEPENDENT_FUNCTIONAL: &str = "|f(Σ_D x_k)| <= 47C/2^w(f)";

pub const ALL_INEQUALITIES: [&str; 9] =
    [SCC_NORM, SCC_TSIRELSON, DOMINATION, AVERAGE_FAMILY, SMALL_WEIGHT, LARGE_WEIGHTS, DEPENDENT_SUM_24C, DEPENDENT_SUM_27, DEPENDENT_FUNCTIONAL];

/// Size floors tried for the first average of a family.
const FLOORS: [u32; 4] = [1, 2, 4, 8];

struct Rows<'a> {
    params: &'a AnalysisParams,
    out: Vec<HarnessRow>,
}

impl Rows<'_> {
    fn add(&mut self, id: &str, inequality: &'static str, lhs: Rational, rhs: Rational, strict_lt: bool, side: &'static str) {
        let holds = if strict_lt { lhs < rhs } else { lhs <= rhs };
        let verdict = match (self.params.mode.is_toy(), holds) {
            (false, true) => Verdict::Pass,
            (false, false) => Verdict::Violation,
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Fails,
        };
        self.out.push(HarnessRow { id: id.to_string(), inequality, lhs, rhs, verdict, side });
    }
}

fn uncertified(id: &str, why: impl fmt::Display) -> Error {
    Error::Invalid(format!("object {id} is not certified: {why}"))
}

/// Instantiates each applicable inequality on each object, with exact
/// arithmetic. Norms of the space are replaced by the `W_α` upper bound;
/// functional values are exact certificate evaluations. Inequalities
/// with no instance get a `no-instance` row.
pub fn estimate_harness(
    objects: &[HarnessObject],
    params: &AnalysisParams,
    ctx: &WtContext,
    budget: &SearchBudget,
) -> Result<Vec<HarnessRow>> {
    let mut rows = Rows { params, out: Vec::new() };
    let c = &params.c;
    for obj in objects {
        match obj {
            HarnessObject::Scc { id, x, n, eps } => {
                let chk = check_basic_scc(x, *n, eps);
                if !chk.ok {
                    return Err(uncertified(id, chk.diagnostics.join("; ")));
                }
                let two_n = big_to_rational(&crate::vector::pow2(&BigUint::from(*n))?);
                let upper = walpha_value(x, budget)?;
                rows.add(id, SCC_NORM, upper, rat(6, 1) / &two_n + rat(12, 1) * eps, false, "upper:W_α");
                let t = tsirelson_value(x);
                rows.add(id, SCC_TSIRELSON, t, x.sum() / &two_n + eps, false, "exact:T");
            }
            HarnessObject::Blocks { id, blocks, coeffs } => {
                if blocks.len() != coeffs.len() || !successive(blocks)? {
                    return Err(uncertified(id, "blocks must be successive with one coefficient each"));
                }
                let mut sum = SparseVector::new();
                let mut proj = SparseVector::new();
                for (b, ck) in blocks.iter().zip(coeffs) {
                    if walpha_value(b, budget)? > rat(1, 1) {
                        return Err(uncertified(id, "a block has W_α norm above 1"));
                    }
                    sum = sum.plus(&b.scale(ck));
                    proj.add_at(b.max_supp().expect("non-zero block").clone(), ck.clone());
                }
                let upper = walpha_value(&sum, budget)?;
                rows.add(id, DOMINATION, upper, rat(6, 1) * tsirelson_value(&proj), false, "upper:W_α");
            }
            HarnessObject::Vector { id, x, n, decomposition } => {
                let (rep, kind) = check_vector(x, *n, decomposition, params, None, budget)?;
                if kind == VectorKind::None && rep.first_failure().map_or(true, |f| f.name != "(iii) ‖x‖ >= θ") {
                    return Err(uncertified(id, rep.first_failure().map_or(String::new(), |f| f.name.clone())));
                }
                let inv_2n = inv_pow2(&BigUint::from(*n))?;
                let top = (*n).saturating_sub(1).min(ceil_log2(x.len()).max(1) as u64);
                for j in 1..=top {
                    for s in FLOORS {
                        let lhs = alpha_family_sup(x, j as usize, &BigUint::from(s), budget)?;
                        rows.add(id, AVERAGE_FAMILY, lhs, rat(6, 1) * c / rat(s as i64, 1) + &inv_2n, true, "upper:W_α");
                    }
                    let lhs = walpha_weighted_sup(x, j, budget)?;
                    rows.add(id, SMALL_WEIGHT, lhs, rat(7, 1) * c * inv_pow2(&BigUint::from(j))?, true, "upper:W_α");
                }
            }
            HarnessObject::LargeWeights { id, x, n, decomposition, gs } => {
                if *n < 2 {
                    return Err(uncertified(id, "the large-weight estimate needs n >= 2"));
                }
                let (rep, _) = check_vector(x, *n, decomposition, params, None, budget)?;
                if rep.clauses.iter().any(|cl| cl.name.starts_with("(iii) x =") && cl.status != super::Status::Pass) {
                    return Err(uncertified(id, "x is not 2^n Σ c_k x_k"));
                }
                let bound = BigUint::from(4u32).pow((*n).min(u32::MAX as u64) as u32);
                let mut lhs = Rational::zero();
                for (k, g) in gs.iter().enumerate() {
                    let rep = check_certificate(g, ctx)?;
                    if !rep.ok() {
                        return Err(uncertified(id, format!("g_{}: {rep}", k + 1)));
                    }
                    let w = g.functional.weight().ok_or_else(|| uncertified(id, format!("g_{} is not weighted", k + 1)))?;
                    if *w >= bound {
                        lhs += g.functional.evaluate(x)?.abs();
                    }
                }
                let rhs = rat(gs.len() as i64, 1) * c * inv_pow2(&BigUint::from(*n))?;
                rows.add(id, LARGE_WEIGHTS, lhs, rhs, true, "exact:certificates");
            }
            HarnessObject::Dependent { id, seq, fs } => {
                let rep = check_dependent(seq, params, ctx, budget)?;
                if !rep.ok() {
                    return Err(uncertified(id, rep.first_failure().map_or(String::new(), |f| format!("{} {}", f.name, f.detail))));
                }
                if *c > rat(10, 7) {
                    continue;
                }
                let l = seq.len();
                for a in 0..l {
                    let mut sum = SparseVector::new();
                    for b in a..l {
                        sum = sum.plus(&seq.pairs[b].x);
                        let sid = format!("{id}[{}..{}]", a + 1, b + 1);
                        let upper = walpha_value(&sum, budget)?;
                        rows.add(&sid, DEPENDENT_SUM_24C, upper.clone(), rat(24, 1) * c, false, "upper:W_α");
                        rows.add(&sid, DEPENDENT_SUM_27, upper, rat(27, 1), false, "upper:W_α");
                        for (q, f) in fs.iter().enumerate() {
                            let Some(wf) = f.functional.weight() else { continue };
                            if !check_certificate(f, ctx)?.ok() {
                                return Err(uncertified(id, format!("f_{} fails its certificate", q + 1)));
                            }
                            let mut d = SparseVector::new();
                            for p in &seq.pairs[a..=b] {
                                if p.weight().map_or(false, |w| w > wf) {
                                    d = d.plus(&p.x);
                                }
                            }
                            let lhs = f.functional.evaluate(&d)?.abs();
                            let rhs = rat(47, 1) * c * inv_pow2(wf)?;
                            rows.add(&format!("{sid}/f{}", q + 1), DEPENDENT_FUNCTIONAL, lhs, rhs, false, "exact:certificate");
                        }
                    }
                }
            }
        }
    }
    let mut out = rows.out;
    for ineq in ALL_INEQUALITIES {
        if !out.iter().any(|r| r.inequality == ineq) {
            out.push(HarnessRow {
                id: "-".into(),
                inequality: ineq,
                lhs: Rational::zero(),
                rhs: Rational::zero(),
                verdict: Verdict::NoInstance,
                side: "-",
            });
        }
    }
    Ok(out)
}

/// Tab-separated table with a header line.
pub fn format_harness(rows: &[HarnessRow]) -> String {
    let mut s = String::from("id\tinequality\tlhs\trhs\tverdict\tside\n");
    for r in rows {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.id,
            r.inequality,
            format_rational(&r.lhs),
            format_rational(&r.rhs),
            r.verdict,
            r.side
        ));
    }
    s
}

/// `grid[j-1][k] = max Σ_q |α_q(x_k)|` over very fast growing
/// `S_n`-admissible families of averages with sizes at least `j`, for
/// `j = 1..=max_floor`.
pub fn alpha_index_profile(xs: &[SparseVector], n: usize, max_floor: u64, budget: &SearchBudget) -> Result<Vec<Vec<Rational>>> {
    if !successive(xs)? {
        return Err(Error::Invalid("profile blocks must be successive".into()));
    }
    (1..=max_floor)
        .map(|j| xs.iter().map(|x| alpha_family_sup(x, n, &BigUint::from(j), budget)).collect())
        .collect()
}

/// Whether every row of the grid is no larger than the previous one.
pub fn profile_decays(grid: &[Vec<Rational>]) -> bool {
    grid.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b <= a)) && grid.iter().flatten().all(|v| !v.is_negative())
}
