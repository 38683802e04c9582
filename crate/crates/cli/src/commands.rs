use std::path::PathBuf;

use clap::Subcommand;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use xt_core::analysis::{
    alpha_index_profile, check_dependent, check_exact_pair, check_ris, check_vector, estimate_harness, format_harness,
    hi_demo, profile_decays, single_coordinate_pair, synthesize_dependent, AnalysisParams, AnalysisReport,
    DependentSequence, HarnessObject, Verdict,
};
use xt_core::norms::{tsirelson_norm, walpha_norm, NormResult};
use xt_core::scc::{check_basic_scc, drop_min_renormalize, generate_basic_scc, lift_to_scc, Ground, SccSpec};
use xt_core::schreier::{max_schreier_sum, maximal, member};
use xt_core::tree::{in_subtree, is_maximal, validate_special, Report, SubtreePolicy, TreeNode};
use xt_core::vector::{format_rational, parse_index_set, parse_rational, rat};
use xt_core::wt::{check_certificate, restrict_certificate, xt_lower_bound, Certificate};
use xt_core::{Error, Interval, Rational, Result, SparseVector};

use crate::{files, Env, Out};

#[derive(Subcommand, Debug)]
pub enum SchreierCmd {
    /// Is the set in `S_n`?
    Member {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        set: String,
    },
    /// Is the set maximal in `S_n`?
    Maximal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        set: String,
    },
    /// `max Σ_{k∈G} |c_k|` over `G` in `S_n`, for a vector or a 0/1 set.
    Maxsum {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "vector")]
        set: Option<String>,
        #[arg(long)]
        vector: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum NormCmd {
    /// The Tsirelson norm.
    T {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        witness: bool,
    },
    /// The norm induced by `W_α`.
    Walpha {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        witness: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum CodebookCmd {
    /// Replay and audit the log.
    Audit,
    /// List the assignments.
    Show,
    /// Code a node, persisting the assignment when `--codebook` is given.
    Assign {
        #[arg(long)]
        node: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum TreeCmd {
    /// Is the node a special sequence?
    Validate {
        #[arg(long)]
        node: PathBuf,
    },
    /// Is the node in the subtree?
    Member {
        #[arg(long)]
        node: PathBuf,
    },
    /// Is the node maximal in the subtree?
    Maximal {
        #[arg(long)]
        node: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum WtCmd {
    /// Check a certificate of membership in `W_𝒯`.
    Check {
        #[arg(long)]
        cert: PathBuf,
    },
    /// `f(x)`.
    Eval {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        vector: PathBuf,
    },
    /// The certificate of `Ef`.
    Restrict {
        #[arg(long)]
        cert: PathBuf,
        /// `[lo,hi]`
        #[arg(long)]
        interval: String,
    },
    /// `max |f(x)|` over checked certificates.
    LowerBound {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long = "cert", required = true)]
        certs: Vec<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SccCmd {
    /// Generate an `(n, ε)`-basic s.c.c. on a ground set.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: String,
        /// `4..`, `4..:3` or `{4,6,9}`.
        #[arg(long, default_value = "1..")]
        ground: String,
    },
    /// Is the vector an `(n, ε)`-basic s.c.c.?
    Check {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: String,
    },
    /// Drop `min F` and renormalize.
    DropMin {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        eps: String,
    },
    /// `Σ c_k x_k` over blocks whose minima carry an s.c.c.
    Lift {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        coeffs: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum AnalysisCmd {
    /// Rapidly increasing sequence check.
    Ris {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        ns: String,
        #[arg(long)]
        c: Option<String>,
    },
    /// `(C, θ, n)`-vector check.
    Vector {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        decomp: PathBuf,
        /// Certificate used for the lower bound on the norm.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Exact pair check.
    Pair {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        decomp: PathBuf,
    },
    /// Dependent sequence check on a node of single-coordinate pairs.
    Dependent {
        #[arg(long)]
        node: PathBuf,
    },
    /// Synthesize a toy dependent sequence and print its node.
    Synth {
        #[arg(long, default_value_t = 2)]
        len: usize,
        #[arg(long, default_value_t = 2)]
        start: u64,
    },
    /// Estimate harness over sampled s.c.c.s and optional extra objects.
    Harness {
        /// Number of s.c.c.s sampled from the seed.
        #[arg(long, default_value_t = 8)]
        sccs: usize,
        /// Toy mode: also synthesize a dependent sequence of this length.
        #[arg(long, default_value_t = 0)]
        dependent: usize,
        #[arg(long, requires_all = ["n", "decomp"])]
        vector: Option<PathBuf>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        decomp: Option<PathBuf>,
    },
    /// `max Σ|α_q(x_k)|` over families of averages with growing size floors.
    AlphaProfile {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        max_floor: u64,
    },
    /// Toy separation demo.
    HiDemo {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

pub fn run(cmd: crate::Command, env: &mut Env) -> Result<Out> {
    use crate::Command::*;
    match cmd {
        Schreier(c) => schreier(c),
        Norm(c) => norm(c, env),
        Codebook(c) => codebook(c, env),
        Tree(c) => tree(c, env),
        Wt(c) => wt(c, env),
        Scc(c) => scc(c),
        Analysis(c) => analysis(c, env),
    }
}

fn r(x: &Rational) -> String {
    format_rational(x)
}

fn eps_arg(s: &str) -> Result<Rational> {
    parse_rational(s)
}

fn boolean(b: bool) -> Out {
    Out::verdict(b, vec![b.to_string()], json!(b))
}

fn schreier(c: SchreierCmd) -> Result<Out> {
    match c {
        SchreierCmd::Member { n, set } => Ok(boolean(member(n, &parse_index_set(&set)?)?)),
        SchreierCmd::Maximal { n, set } => Ok(boolean(maximal(n, &parse_index_set(&set)?)?)),
        SchreierCmd::Maxsum { n, set, vector } => {
            let x = match (set, vector) {
                (Some(s), None) => {
                    let mut x = SparseVector::new();
                    for i in parse_index_set(&s)? {
                        x.set(i, rat(1, 1));
                    }
                    x
                }
                (None, Some(p)) => files::vector(&p)?,
                _ => return Err(Error::Invalid("give exactly one of --set and --vector".into())),
            };
            let v = max_schreier_sum(n, &x)?;
            Ok(Out::value(r(&v), json!(r(&v))))
        }
    }
}

fn norm_out(res: NormResult, witness: bool) -> Out {
    let mut text = vec![r(&res.value)];
    let mut j = json!({ "value": r(&res.value) });
    if witness {
        if let Some(w) = &res.witness {
            text.push(format!("witness: {w}"));
            j["witness"] = json!(w.to_string());
        }
        if let Some(c) = &res.cutoff {
            let line = format!(
                "cutoff: weights above {} give at most {}/2^{} <= {}",
                c.last_weight,
                r(&c.l1),
                c.last_weight + 1,
                r(&c.value)
            );
            text.push(line);
            j["cutoff"] = json!({ "last_weight": c.last_weight, "l1": r(&c.l1) });
        }
    }
    Out { text, json: j, verdict: None }
}

fn norm(c: NormCmd, env: &Env) -> Result<Out> {
    match c {
        NormCmd::T { vector, witness } => Ok(norm_out(tsirelson_norm(&files::vector(&vector)?), witness)),
        NormCmd::Walpha { vector, witness } => Ok(norm_out(walpha_norm(&files::vector(&vector)?, &env.budget)?, witness)),
    }
}

fn codebook(c: CodebookCmd, env: &mut Env) -> Result<Out> {
    match c {
        CodebookCmd::Audit => {
            let problems = env.codebook.audit();
            let mut text = vec![format!("{} assignments, {} problems", env.codebook.len(), problems.len())];
            text.extend(problems.iter().cloned());
            Ok(Out::verdict(problems.is_empty(), text, json!({ "assignments": env.codebook.len(), "problems": problems })))
        }
        CodebookCmd::Show => {
            let rows: Vec<Value> = env
                .codebook
                .assignments()
                .iter()
                .map(|a| json!({ "hash": a.hash, "weight": a.weight.to_string(), "bound": r(&a.bound) }))
                .collect();
            let mut text: Vec<String> = env.codebook.log_text().lines().map(String::from).collect();
            text.push(format!("version {}", env.codebook.version_hash()));
            Ok(Out { text, json: json!({ "assignments": rows, "version": env.codebook.version_hash() }), verdict: None })
        }
        CodebookCmd::Assign { node } => {
            let (node, _) = files::node(&node)?;
            let w = env.codebook.sigma_assign(&node)?;
            let text = vec![format!("σ = {w}"), format!("node {}", node.hash()), format!("version {}", env.codebook.version_hash())];
            Ok(Out { text, json: json!({ "weight": w.to_string(), "node": node.hash(), "version": env.codebook.version_hash() }), verdict: None })
        }
    }
}

fn policy_for(env: &Env, file_policy: Option<String>) -> Result<SubtreePolicy> {
    match file_policy {
        Some(p) => p.parse(),
        None => Ok(env.policy.clone()),
    }
}

fn report_out(rep: Report) -> Out {
    let text: Vec<String> = rep.to_string().lines().map(String::from).collect();
    let j = match &rep.failure {
        None => json!({ "ok": true }),
        Some(f) => json!({ "ok": false, "position": f.position, "clause": f.clause, "message": f.message }),
    };
    Out::verdict(rep.ok(), text, j)
}

fn tree(c: TreeCmd, env: &Env) -> Result<Out> {
    match c {
        TreeCmd::Validate { node } => {
            let (node, _) = files::node(&node)?;
            Ok(report_out(validate_special(&node, &env.codebook, &env.params)))
        }
        TreeCmd::Member { node } => {
            let (node, p) = files::node(&node)?;
            Ok(boolean(in_subtree(&node, &policy_for(env, p)?)?))
        }
        TreeCmd::Maximal { node } => {
            let (node, p) = files::node(&node)?;
            Ok(boolean(is_maximal(&node, &policy_for(env, p)?)?))
        }
    }
}

fn wt(c: WtCmd, env: &Env) -> Result<Out> {
    match c {
        WtCmd::Check { cert } => Ok(report_out(check_certificate(&files::certificate(&cert)?, &env.ctx())?)),
        WtCmd::Eval { cert, vector } => {
            let v = files::certificate(&cert)?.functional.evaluate(&files::vector(&vector)?)?;
            Ok(Out::value(r(&v), json!(r(&v))))
        }
        WtCmd::Restrict { cert, interval } => {
            let e: Interval = interval.parse()?;
            match restrict_certificate(&files::certificate(&cert)?, &e) {
                Some(c) => {
                    let text = c.to_string();
                    Ok(Out { text: text.lines().map(String::from).collect(), json: json!(text), verdict: None })
                }
                None => Ok(Out::value("0", Value::Null)),
            }
        }
        WtCmd::LowerBound { vector, certs } => {
            let certs: Vec<Certificate> = certs.iter().map(|p| files::certificate(p)).collect::<Result<_>>()?;
            let v = xt_lower_bound(&files::vector(&vector)?, &certs, &env.ctx())?;
            Ok(Out::value(r(&v), json!(r(&v))))
        }
    }
}

fn scc(c: SccCmd) -> Result<Out> {
    match c {
        SccCmd::Gen { n, eps, ground } => {
            let ground: Ground = ground.parse()?;
            let x = generate_basic_scc(&SccSpec::new(n, eps_arg(&eps)?, ground)?)?;
            Ok(Out::value(x.to_string(), json!(x.to_string())))
        }
        SccCmd::Check { vector, n, eps } => {
            let chk = check_basic_scc(&files::vector(&vector)?, n, &eps_arg(&eps)?);
            let mut text = vec![chk.ok.to_string()];
            if let Some(s) = &chk.schreier_sum {
                text.push(format!("max S_{} mass {}", n - 1, r(s)));
            }
            text.extend(chk.diagnostics.iter().cloned());
            let j = json!({ "ok": chk.ok, "schreier_sum": chk.schreier_sum.as_ref().map(r), "diagnostics": chk.diagnostics });
            Ok(Out::verdict(chk.ok, text, j))
        }
        SccCmd::DropMin { vector, eps } => {
            let y = drop_min_renormalize(&files::vector(&vector)?, &eps_arg(&eps)?)?;
            Ok(Out::value(y.to_string(), json!(y.to_string())))
        }
        SccCmd::Lift { blocks, coeffs, n, eps } => {
            let y = lift_to_scc(&files::blocks(&blocks)?, &files::rationals(&coeffs)?, n, &eps_arg(&eps)?)?;
            Ok(Out::value(y.to_string(), json!(y.to_string())))
        }
    }
}

fn analysis_out(rep: AnalysisReport, extra: Vec<String>) -> Out {
    let mut text = extra;
    text.extend(rep.to_string().lines().map(|l| l.trim_end().to_string()));
    let clauses: Vec<Value> = rep
        .clauses
        .iter()
        .map(|c| json!({ "name": c.name, "status": c.status.to_string(), "detail": c.detail }))
        .collect();
    Out::verdict(rep.ok(), text, json!({ "clauses": clauses }))
}

fn substitutions(params: &AnalysisParams) -> Vec<String> {
    params.substitutions().into_iter().map(|s| format!("# {s}")).collect()
}

/// Reads each pair `(f_k, x_k)` of a node as a single-coordinate exact
/// pair: `x_k = 2^w · (x_k / 2^w)` with one block.
fn one_block_pairs(node: &TreeNode, params: &AnalysisParams) -> Result<DependentSequence> {
    let mut pairs = Vec::new();
    for (k, (f, x)) in node.pairs.iter().enumerate() {
        let w = f.weight().ok_or_else(|| Error::Invalid(format!("f_{} is not weighted", k + 1)))?;
        let i = x.min_supp().ok_or_else(|| Error::Invalid(format!("x_{} is zero", k + 1)))?;
        let i = u64::try_from(i).map_err(|_| Error::Invalid(format!("x_{} index too large", k + 1)))?;
        let mut p = single_coordinate_pair(w, i, params)?;
        p.cert = Certificate::new(f.clone());
        p.decomposition.blocks = vec![x.scale(&xt_core::vector::inv_pow2(w)?)];
        p.x = x.clone();
        pairs.push(p);
    }
    Ok(DependentSequence { pairs })
}

fn sample_sccs(rng: &mut ChaCha8Rng, count: usize) -> Vec<HarnessObject> {
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count.max(1) {
        attempts += 1;
        let n = rng.gen_range(1..=2usize);
        let eps = rat(rng.gen_range(1..=9), 10);
        let ground = Ground::Progression { start: rng.gen_range(1..=9), step: rng.gen_range(1..=3) };
        let Ok(spec) = SccSpec::new(n, eps.clone(), ground) else { continue };
        if let Ok(x) = generate_basic_scc(&spec) {
            if x.len() <= 24 {
                let id = format!("scc{}", out.len() + 1);
                out.push(HarnessObject::Scc { id, x, n, eps });
            }
        }
    }
    out
}

fn analysis(c: AnalysisCmd, env: &mut Env) -> Result<Out> {
    let params = AnalysisParams::for_mode(env.params.clone());
    match c {
        AnalysisCmd::Ris { blocks, ns, c } => {
            let cc = match c {
                Some(s) => parse_rational(&s)?,
                None => params.c.clone(),
            };
            let rep = check_ris(&files::blocks(&blocks)?, &cc, &files::naturals(&ns)?, &env.budget)?;
            Ok(analysis_out(rep, Vec::new()))
        }
        AnalysisCmd::Vector { vector, n, decomp, cert } => {
            let x = files::vector(&vector)?;
            let d = files::decomposition(&decomp)?;
            let cert = cert.map(|p| files::certificate(&p)).transpose()?;
            let ctx = env.ctx();
            let lower = cert.as_ref().map(|c| (c, &ctx));
            let (rep, kind) = check_vector(&x, n, &d, &params, lower, &env.budget)?;
            let mut extra = substitutions(&params);
            extra.push(format!("kind: {}", kind.name()));
            Ok(analysis_out(rep, extra))
        }
        AnalysisCmd::Pair { cert, vector, n, decomp } => {
            let pair = xt_core::analysis::ExactPair {
                cert: files::certificate(&cert)?,
                x: files::vector(&vector)?,
                decomposition: files::decomposition(&decomp)?,
            };
            let rep = check_exact_pair(&pair, n, &params, &env.ctx(), &env.budget)?;
            Ok(analysis_out(rep, substitutions(&params)))
        }
        AnalysisCmd::Dependent { node } => {
            let (node, p) = files::node(&node)?;
            let seq = one_block_pairs(&node, &params)?;
            env.store.insert(&node);
            if let Some(p) = p {
                env.policy = p.parse()?;
            }
            let rep = check_dependent(&seq, &params, &env.ctx(), &env.budget)?;
            Ok(analysis_out(rep, substitutions(&params)))
        }
        AnalysisCmd::Synth { len, start } => {
            let seq = synthesize_dependent(&params, len, start, &mut env.codebook, &mut env.store, &env.policy)?;
            let node = seq.node();
            let mut text = vec![format!("policy {}", env.policy.name())];
            text.extend(node.to_string().lines().map(String::from));
            let weights: Vec<String> = seq.pairs.iter().filter_map(|p| p.weight().map(BigUint::to_string)).collect();
            text.push(format!("# weights {}", weights.join(", ")));
            text.push(format!("# node {}", node.hash()));
            Ok(Out { text, json: json!({ "node": node.to_string(), "weights": weights, "hash": node.hash() }), verdict: None })
        }
        AnalysisCmd::Harness { sccs, dependent, vector, n, decomp } => {
            let mut rng = ChaCha8Rng::seed_from_u64(env.global.seed);
            let mut objects = sample_sccs(&mut rng, sccs);
            for k in 0..objects.len() {
                if let HarnessObject::Scc { id, x, .. } = &objects[k] {
                    let blocks: Vec<SparseVector> = x.iter().map(|(i, _)| SparseVector::unit(u64::try_from(i).expect("small"))).collect();
                    let coeffs: Vec<Rational> = x.iter().map(|(_, c)| c.clone()).collect();
                    objects.push(HarnessObject::Blocks { id: format!("{id}/blocks"), blocks, coeffs });
                }
            }
            if let (Some(v), Some(n), Some(d)) = (vector, n, decomp) {
                objects.push(HarnessObject::Vector {
                    id: "vector".into(),
                    x: files::vector(&v)?,
                    n,
                    decomposition: files::decomposition(&d)?,
                });
            }
            if dependent > 0 {
                let seq = synthesize_dependent(&params, dependent, 2, &mut env.codebook, &mut env.store, &env.policy)?;
                let fs = seq.pairs.iter().map(|p| p.cert.clone()).collect();
                objects.push(HarnessObject::Dependent { id: "dep".into(), seq, fs });
            }
            let rows = estimate_harness(&objects, &params, &env.ctx(), &env.budget)?;
            let violations = rows.iter().filter(|r| r.verdict == Verdict::Violation).count();
            let mut text: Vec<String> = substitutions(&params);
            text.extend(format_harness(&rows).lines().map(String::from));
            text.push(format!("# {} rows, {} violations", rows.len(), violations));
            let j: Vec<Value> = rows
                .iter()
                .map(|row| {
                    json!({ "id": row.id, "inequality": row.inequality, "lhs": r(&row.lhs), "rhs": r(&row.rhs),
                            "verdict": row.verdict.to_string(), "side": row.side })
                })
                .collect();
            Ok(Out::verdict(violations == 0, text, json!({ "rows": j })))
        }
        AnalysisCmd::AlphaProfile { blocks, n, max_floor } => {
            let grid = alpha_index_profile(&files::blocks(&blocks)?, n, max_floor, &env.budget)?;
            let decays = profile_decays(&grid);
            let mut text = Vec::new();
            for (j, row) in grid.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(r).collect();
                text.push(format!("{}\t{}", j + 1, cells.join("\t")));
            }
            text.push(format!("decays {decays}"));
            let j: Vec<Vec<String>> = grid.iter().map(|row| row.iter().map(r).collect()).collect();
            Ok(Out { text, json: json!({ "grid": j, "decays": decays }), verdict: None })
        }
        AnalysisCmd::HiDemo { n } => {
            let rep = hi_demo(n, &params, &mut env.codebook, &mut env.store, &env.policy, &env.budget)?;
            let mut text = substitutions(&params);
            text.extend(rep.to_string().lines().map(String::from));
            let j = json!({
                "n": n, "f": rep.f.functional.to_string(), "lower": r(&rep.lower),
                "upper_diff": r(&rep.upper_diff), "upper": r(&rep.upper), "ratio": r(&rep.ratio),
            });
            Ok(Out { text, json: j, verdict: None })
        }
    }
}
