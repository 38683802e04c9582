//! Readers for the text files the commands take.

use std::path::Path;

use num_bigint::BigUint;
use xt_core::analysis::Decomposition;
use xt_core::tree::TreeNode;
use xt_core::vector::parse_rational;
use xt_core::wt::Certificate;
use xt_core::{Error, Rational, Result, SparseVector};

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// A vector file: `{i:c, ...}`, possibly across several lines.
pub fn vector(path: &Path) -> Result<SparseVector> {
    let text = read(path)?;
    let lines: Vec<&str> = content_lines(&text).collect();
    lines.join(" ").parse()
}

/// One vector per line.
pub fn blocks(path: &Path) -> Result<Vec<SparseVector>> {
    content_lines(&read(path)?).map(str::parse).collect()
}

pub fn certificate(path: &Path) -> Result<Certificate> {
    read(path)?.parse()
}

pub fn node(path: &Path) -> Result<(TreeNode, Option<String>)> {
    let text = read(path)?;
    Ok((text.parse()?, xt_core::tree::policy_line(&text)))
}

pub fn rationals(s: &str) -> Result<Vec<Rational>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_rational).collect()
}

pub fn naturals(s: &str) -> Result<Vec<BigUint>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad natural `{t}`"))))
        .collect()
}

/// A decomposition file:
///
/// ```text
/// block {3:1}
/// block {9:1/2, 10:1/2}
/// coeffs 1/2, 1/2
/// eps 1/1000
/// ns 3, 40
/// ```
///
/// `ns` is optional.
pub fn decomposition(path: &Path) -> Result<Decomposition> {
    let text = read(path)?;
    let mut blocks = Vec::new();
    let mut coeffs = None;
    let mut eps = None;
    let mut ns = None;
    for line in content_lines(&text) {
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match key {
            "block" => blocks.push(rest.parse()?),
            "coeffs" => coeffs = Some(rationals(rest)?),
            "eps" => eps = Some(parse_rational(rest.trim())?),
            "ns" => ns = Some(naturals(rest)?),
            other => return Err(Error::Parse(format!("unknown decomposition key `{other}`"))),
        }
    }
    Ok(Decomposition {
        blocks,
        coeffs: coeffs.ok_or_else(|| Error::Parse("decomposition needs a `coeffs` line".into()))?,
        eps: eps.ok_or_else(|| Error::Parse("decomposition needs an `eps` line".into()))?,
        ns,
    })
}
