//! Browser bindings: norms, Schreier membership and s.c.c. generation.
//!
//! Every function takes and returns plain strings so the page can show the
//! exact rationals as typed.

use wasm_bindgen::prelude::*;
use xt_core::norms::{tsirelson_norm, walpha_norm, SearchBudget};
use xt_core::scc::{check_basic_scc, generate_basic_scc, Ground, SccSpec};
use xt_core::schreier;
use xt_core::vector::{format_rational, parse_index_set, parse_rational};
use xt_core::SparseVector;

fn vector(s: &str) -> Result<SparseVector, String> {
    s.trim().parse().map_err(|e: xt_core::Error| e.to_string())
}

/// Both norms of `{i:c, ...}`, one per line, each followed by its norming functional.
#[wasm_bindgen]
pub fn norms(x: &str, max_support: u32) -> Result<String, String> {
    let x = vector(x)?;
    let t = tsirelson_norm(&x);
    let budget = SearchBudget { max_avg_size: max_support.into(), ..SearchBudget::default() };
    let w = walpha_norm(&x, &budget).map_err(|e| e.to_string())?;
    let witness = |f: &Option<_>| f.as_ref().map(|f: &xt_core::wt::Functional| f.to_string()).unwrap_or_else(|| "-".into());
    Ok(format!(
        "‖x‖_T = {}\n  attained by {}\n‖x‖_W = {}\n  attained by {}",
        format_rational(&t.value),
        witness(&t.witness),
        format_rational(&w.value),
        witness(&w.witness)
    ))
}

/// Membership of a finite set in S_n, and maximality when it is a member.
#[wasm_bindgen]
pub fn schreier_member(n: usize, set: &str) -> Result<String, String> {
    let f = parse_index_set(set).map_err(|e| e.to_string())?;
    if !schreier::member(n, &f).map_err(|e| e.to_string())? {
        return Ok(format!("not in S_{n}"));
    }
    let maximal = schreier::maximal(n, &f).map_err(|e| e.to_string())?;
    Ok(format!("in S_{n}{}", if maximal { ", maximal" } else { ", not maximal" }))
}

/// A basic (n, ε)-s.c.c. on the ground set, with the checker's verdict.
#[wasm_bindgen]
pub fn scc(n: usize, eps: &str, ground: &str) -> Result<String, String> {
    let eps = parse_rational(eps.trim()).map_err(|e| e.to_string())?;
    let ground: Ground = ground.trim().parse().map_err(|e: xt_core::Error| e.to_string())?;
    let spec = SccSpec::new(n, eps.clone(), ground).map_err(|e| e.to_string())?;
    let x = generate_basic_scc(&spec).map_err(|e| e.to_string())?;
    let check = check_basic_scc(&x, n, &eps);
    let mut out = format!("{x}\nsupport {}, check {}", x.len(), if check.ok { "pass" } else { "fail" });
    for d in check.diagnostics {
        out.push_str("\n  ");
        out.push_str(&d);
    }
    Ok(out)
}
