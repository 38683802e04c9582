//! `xt`: one entry point for every engine and checker.
//!
//! Exit status: 0 on success or a positive verdict, 1 on a negative
//! verdict, 2 on usage or engine errors.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use xt_core::coding::{CodeBook, Mode, ModeParams};
use xt_core::norms::SearchBudget;
use xt_core::tree::{NodeStore, SubtreePolicy};
use xt_core::wt::{CoReading, WtContext};

#[derive(Parser, Debug)]
#[command(name = "xt", version, about = "Schreier families, Tsirelson-type norms and tree-coded norming sets, in exact arithmetic")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Full-scale parameters (strict) or small desk-scale ones (toy).
    #[arg(long, global = true, default_value = "strict", value_parser = parse_mode)]
    pub mode: Mode,
    /// Append-only codebook log realizing the coding function.
    #[arg(long, global = true)]
    pub codebook: Option<PathBuf>,
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest weight the `W_α` engine tries.
    #[arg(long, global = true, default_value_t = 64)]
    pub budget_max_weight: u64,
    /// Largest support the `W_α` engine accepts.
    #[arg(long, global = true, default_value_t = 40)]
    pub budget_max_support: u64,
    /// Drop the exactness cutoff: results become lower bounds within the caps.
    #[arg(long, global = true)]
    pub budget_inexact: bool,
    /// Node files loaded into the store that witnesses averages refer to.
    #[arg(long = "nodes", global = true)]
    pub nodes: Vec<PathBuf>,
    /// Subtree policy: `full` or `s2_bounded`.
    #[arg(long, global = true, default_value = "s2_bounded")]
    pub policy: String,
    /// Read the conditional-average indices as `k_i = i`.
    #[arg(long, global = true)]
    pub co_literal: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: xt_core::Error| e.to_string())
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Schreier families `S_n`.
    #[command(subcommand)]
    Schreier(commands::SchreierCmd),
    /// Tsirelson and `W_α` norms.
    #[command(subcommand)]
    Norm(commands::NormCmd),
    /// The persistent coding function.
    #[command(subcommand)]
    Codebook(commands::CodebookCmd),
    /// Special sequences and subtree policies.
    #[command(subcommand)]
    Tree(commands::TreeCmd),
    /// `W_𝒯` certificates.
    #[command(subcommand)]
    Wt(commands::WtCmd),
    /// Basic special convex combinations.
    #[command(subcommand)]
    Scc(commands::SccCmd),
    /// Composite checkers, harness, profile and separation demo.
    #[command(subcommand)]
    Analysis(commands::AnalysisCmd),
}

/// Everything a command needs besides its own arguments.
pub struct Env {
    pub global: Global,
    pub params: ModeParams,
    pub codebook: CodeBook,
    pub store: NodeStore,
    pub policy: SubtreePolicy,
    pub budget: SearchBudget,
}

impl Env {
    fn new(global: Global) -> xt_core::Result<Self> {
        let params = ModeParams::for_mode(global.mode);
        let codebook = match &global.codebook {
            Some(p) => CodeBook::open(p, params.clone())?,
            None => CodeBook::new(params.clone()),
        };
        let mut store = NodeStore::default();
        for p in &global.nodes {
            store.insert(&files::node(p)?.0);
        }
        let policy = global.policy.parse()?;
        let budget = SearchBudget {
            max_weight: global.budget_max_weight,
            max_avg_size: global.budget_max_support,
            proof_of_exactness: !global.budget_inexact,
        };
        Ok(Self { global, params, codebook, store, policy, budget })
    }

    pub fn ctx(&self) -> WtContext<'_> {
        WtContext {
            params: &self.params,
            codebook: &self.codebook,
            store: &self.store,
            policy: &self.policy,
            co_reading: if self.global.co_literal { CoReading::UpToN } else { CoReading::UpToM },
        }
    }
}

/// A command's result: text lines, the same data as JSON, and a verdict
/// when the command answers a yes/no question.
pub struct Out {
    pub text: Vec<String>,
    pub json: Value,
    pub verdict: Option<bool>,
}

impl Out {
    pub fn value(text: impl Into<String>, json: Value) -> Self {
        Self { text: vec![text.into()], json, verdict: None }
    }

    pub fn verdict(ok: bool, text: Vec<String>, json: Value) -> Self {
        Self { text, json, verdict: Some(ok) }
    }
}

fn header(env: &Env, codebook_hash: &str) -> Vec<String> {
    let mut h = vec![format!("# mode={} seed={} codebook={}", env.global.mode, env.global.seed, &codebook_hash[..16])];
    if let Some(b) = env.params.banner() {
        h.push(format!("# {b}"));
    }
    h
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.global.format;
    let mut env = match Env::new(cli.global) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let codebook_hash = env.codebook.version_hash();
    let out = match commands::run(cli.command, &mut env) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match format {
        Format::Text => {
            for l in header(&env, &codebook_hash) {
                println!("{l}");
            }
            for l in &out.text {
                println!("{l}");
            }
        }
        Format::Json => {
            let doc = json!({
                "mode": env.global.mode.to_string(),
                "seed": env.global.seed,
                "codebook": codebook_hash,
                "banner": env.params.banner(),
                "verdict": out.verdict,
                "result": out.json,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
    }
    match out.verdict {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}
