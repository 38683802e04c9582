//! Weight sets `L′ = L_0 ∪ L_1′`, the floor function `φ`, comparability of
//! weights, and a persistent coding function `σ`.
//!
//! `L_1` is the set of weights the codebook has actually handed out, so `φ`
//! depends on the codebook state. Reports pin that state with
//! [`CodeBook::version_hash`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tree::{NodeStore, TreeNode};
use crate::vector::{big_to_rational, format_rational, parse_rational, pow2, Rational, MAX_POW2_EXPONENT};

pub const TOY_BANNER: &str = "NOTE: toy mode, non-paper parameters";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Strict,
    Toy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Toy => "toy",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "toy" => Ok(Mode::Toy),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// Parameters shared by every checker.
///
/// Strict: `ℓ_1 = 8`, `ℓ_{k+1} = 2^{2ℓ_k} + 1`. Toy: `ℓ_k = 2^k`. In both,
/// odd-numbered `ℓ_k` go to `L_0` and even-numbered ones to `L_1′`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeParams {
    pub mode: Mode,
    /// Multiplies the irrelevance threshold and the conditional gaps.
    pub toy_factor: Rational,
}

impl ModeParams {
    pub fn strict() -> Self {
        Self { mode: Mode::Strict, toy_factor: Rational::one() }
    }

    pub fn toy() -> Self {
        Self { mode: Mode::Toy, toy_factor: Rational::one() }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Strict => Self::strict(),
            Mode::Toy => Self::toy(),
        }
    }

    pub fn is_toy(&self) -> bool {
        self.mode == Mode::Toy
    }

    pub fn banner(&self) -> Option<&'static str> {
        self.is_toy().then_some(TOY_BANNER)
    }

    /// `min L′`.
    pub fn min_l(&self) -> BigUint {
        match self.mode {
            Mode::Strict => BigUint::from(8u32),
            Mode::Toy => BigUint::from(2u32),
        }
    }

    /// Bound in the irrelevant-average clause (`10` at full scale).
    pub fn irrelevance_threshold(&self) -> Rational {
        Rational::from_integer(BigInt::from(10)) * &self.toy_factor
    }

    /// Gap in the conditional-average clause at position `i` (`1/2^i`).
    pub fn co_gap(&self, i: usize) -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << i) * &self.toy_factor
    }

    /// `ℓ_k` for `k >= 1`, if it can be materialized.
    pub fn lprime(&self, k: usize) -> Result<BigUint> {
        if k == 0 {
            return Err(Error::Invalid("L′ is numbered from 1".into()));
        }
        match self.mode {
            Mode::Toy => pow2(&BigUint::from(k)),
            Mode::Strict => {
                let mut l = BigUint::from(8u32);
                for _ in 1..k {
                    l = pow2(&(l * 2u32))
                        .map_err(|_| Error::Budget(format!("ℓ_{k} of strict L′ cannot be materialized")))?
                        + 1u32;
                }
                Ok(l)
            }
        }
    }

    /// The `k` with `ℓ_k = v`, if `v ∈ L′`.
    pub fn lprime_position(&self, v: &BigUint) -> Option<usize> {
        match self.mode {
            Mode::Toy => {
                let k = v.bits().checked_sub(1)?;
                (k >= 1 && *v == BigUint::one() << k).then_some(k as usize)
            }
            Mode::Strict => {
                // ℓ_4 has about 2^131075 bits, so no representable value reaches it.
                if *v == BigUint::from(8u32) {
                    Some(1)
                } else if *v == BigUint::from(65537u32) {
                    Some(2)
                } else if v.bits() == 131075 && *v == self.lprime(3).ok()? {
                    Some(3)
                } else {
                    None
                }
            }
        }
    }

    pub fn in_l0(&self, v: &BigUint) -> bool {
        self.lprime_position(v).map_or(false, |k| k % 2 == 1)
    }

    pub fn in_l1prime(&self, v: &BigUint) -> bool {
        self.lprime_position(v).map_or(false, |k| k % 2 == 0)
    }

    /// Largest element of `L_0` that is `<= i`.
    pub fn l0_floor(&self, i: &BigUint) -> Option<BigUint> {
        match self.mode {
            Mode::Toy => {
                let mut k = i.bits().checked_sub(1)?;
                if k % 2 == 0 {
                    k = k.checked_sub(1)?;
                }
                (k >= 1).then(|| BigUint::one() << k)
            }
            Mode::Strict => {
                if i.bits() >= 131075 {
                    let l3 = self.lprime(3).ok()?;
                    if l3 <= *i {
                        return Some(l3);
                    }
                }
                let l1 = BigUint::from(8u32);
                (l1 <= *i).then_some(l1)
            }
        }
    }

    /// Smallest element of `L_1′` strictly above `bound` that `taken` rejects.
    pub fn l1prime_above(&self, bound: &Rational, taken: impl Fn(&BigUint) -> bool) -> Result<BigUint> {
        let mut k = 2;
        loop {
            if self.mode == Mode::Toy && k as u64 > MAX_POW2_EXPONENT {
                return Err(Error::Budget("toy L′ prefix exhausted".into()));
            }
            let l = self.lprime(k).map_err(|_| {
                Error::Budget(format!(
                    "no materializable element of L_1′ exceeds {} (only ℓ_2 is available in strict mode)",
                    format_rational(bound)
                ))
            })?;
            if big_to_rational(&l) > *bound && !taken(&l) {
                return Ok(l);
            }
            k += 2;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub hash: String,
    pub weight: BigUint,
    pub bound: Rational,
}

impl Assignment {
    fn log_line(&self) -> String {
        format!("ASSIGN {} {} {}", self.hash, self.weight, format_rational(&self.bound))
    }
}

/// Injective registry realizing `σ`, optionally backed by an append-only
/// log file of `ASSIGN <hash> <weight> <bound>` lines.
#[derive(Debug, Clone)]
pub struct CodeBook {
    params: ModeParams,
    log: Vec<Assignment>,
    by_hash: BTreeMap<String, usize>,
    by_weight: BTreeMap<BigUint, usize>,
    path: Option<PathBuf>,
}

impl CodeBook {
    pub fn new(params: ModeParams) -> Self {
        Self { params, log: Vec::new(), by_hash: BTreeMap::new(), by_weight: BTreeMap::new(), path: None }
    }

    /// Opens (or starts) a log file. The log is replayed and audited; any
    /// problem aborts the load.
    pub fn open(path: &Path, params: ModeParams) -> Result<Self> {
        let mut book = Self::new(params);
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            book = Self::from_log(&text, book.params)?;
        }
        book.path = Some(path.to_path_buf());
        Ok(book)
    }

    pub fn from_log(text: &str, params: ModeParams) -> Result<Self> {
        let mut book = Self::new(params);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Codebook(format!("line {}: expected `ASSIGN <hash> <weight> <bound>`", n + 1));
            if parts.len() != 4 || parts[0] != "ASSIGN" {
                return Err(bad());
            }
            let weight = BigUint::from_str(parts[2]).map_err(|_| bad())?;
            let bound = parse_rational(parts[3]).map_err(|_| bad())?;
            book.push(Assignment { hash: parts[1].to_string(), weight, bound });
        }
        let problems = book.audit();
        if let Some(p) = problems.first() {
            return Err(Error::Codebook(p.clone()));
        }
        Ok(book)
    }

    fn push(&mut self, a: Assignment) {
        let pos = self.log.len();
        self.by_hash.entry(a.hash.clone()).or_insert(pos);
        self.by_weight.entry(a.weight.clone()).or_insert(pos);
        self.log.push(a);
    }

    pub fn params(&self) -> &ModeParams {
        &self.params
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.log
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn log_text(&self) -> String {
        self.log.iter().map(|a| a.log_line() + "\n").collect()
    }

    /// SHA-256 of the log text; identifies the codebook state.
    pub fn version_hash(&self) -> String {
        hex(&Sha256::digest(self.log_text().as_bytes()))
    }

    pub fn lookup(&self, hash: &str) -> Option<&BigUint> {
        self.by_hash.get(hash).map(|&p| &self.log[p].weight)
    }

    pub fn preimage(&self, weight: &BigUint) -> Option<&str> {
        self.by_weight.get(weight).map(|&p| self.log[p].hash.as_str())
    }

    /// Problems found when replaying the log: repeated hashes or weights,
    /// weights outside `L_1′`, and weights not above their recorded bound.
    pub fn audit(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut hashes = BTreeMap::new();
        let mut weights = BTreeMap::new();
        for (n, a) in self.log.iter().enumerate() {
            if let Some(prev) = hashes.insert(&a.hash, n) {
                out.push(format!("record {}: node {} already coded by record {}", n + 1, a.hash, prev + 1));
            }
            if let Some(prev) = weights.insert(&a.weight, n) {
                out.push(format!("record {}: weight {} already used by record {} (not injective)", n + 1, a.weight, prev + 1));
            }
            if !self.params.in_l1prime(&a.weight) {
                out.push(format!("record {}: weight {} is not in L_1′", n + 1, a.weight));
            }
            if big_to_rational(&a.weight) <= a.bound {
                out.push(format!(
                    "record {}: weight {} does not exceed its bound {}",
                    n + 1,
                    a.weight,
                    format_rational(&a.bound)
                ));
            }
        }
        out
    }

    /// `σ` on a node identified by `hash` whose growth bound is `bound`:
    /// the existing value if coded, else the smallest free `L_1′` element
    /// above the bound, persisted before returning.
    pub fn assign(&mut self, hash: &str, bound: &Rational) -> Result<BigUint> {
        if let Some(w) = self.lookup(hash) {
            return Ok(w.clone());
        }
        let weight = self.params.l1prime_above(bound, |l| self.by_weight.contains_key(l))?;
        let a = Assignment { hash: hash.to_string(), weight: weight.clone(), bound: bound.clone() };
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::Codebook(format!("cannot write {}: {e}", path.display())))?;
            writeln!(file, "{}", a.log_line()).map_err(|e| Error::Codebook(e.to_string()))?;
        }
        self.push(a);
        Ok(weight)
    }

    /// Codes `node`, with bound `‖f_k‖_∞^{-1} max supp x_k` from its last
    /// pair.
    pub fn sigma_assign(&mut self, node: &TreeNode) -> Result<BigUint> {
        node.check_pairs().map_err(|(k, msg)| Error::Tree(format!("pair {k}: {msg}")))?;
        let bound = sigma_bound(node)?;
        self.assign(&node.hash(), &bound)
    }

    pub fn in_l1(&self, v: &BigUint) -> bool {
        self.by_weight.contains_key(v)
    }

    /// `L = L_0 ∪ L_1`.
    pub fn in_l(&self, v: &BigUint) -> bool {
        self.params.in_l0(v) || self.in_l1(v)
    }

    /// `φ(i) = max { ℓ ∈ L : ℓ <= i }` for `i >= min L`.
    pub fn phi(&self, i: &BigUint) -> Result<BigUint> {
        let min_l = self.params.min_l();
        if *i < min_l {
            return Err(Error::Invalid(format!("φ is defined from min L = {min_l}; got {i}")));
        }
        let l0 = self.params.l0_floor(i).expect("i >= ℓ_1");
        let l1 = self.by_weight.range(..=i.clone()).next_back().map(|(w, _)| w.clone());
        Ok(match l1 {
            Some(w) if w > l0 => w,
            _ => l0,
        })
    }

    /// Negation of incomparability: `i` and `j` are incomparable when
    /// `φ(i) ≠ φ(j)` both lie in `L_0`, or both lie in `L_1` and code nodes
    /// on different branches of the tree.
    pub fn comparable(&self, i: &BigUint, j: &BigUint, store: &NodeStore) -> Result<bool> {
        let (pi, pj) = (self.phi(i)?, self.phi(j)?);
        if self.params.in_l0(&pi) && self.params.in_l0(&pj) {
            return Ok(pi == pj);
        }
        if self.in_l1(&pi) && self.in_l1(&pj) {
            let node = |w: &BigUint| -> Result<&TreeNode> {
                let h = self.preimage(w).expect("in L_1");
                store.get(h).ok_or_else(|| Error::Codebook(format!("weight {w} codes node {h}, which is not stored")))
            };
            let (a, b) = (node(&pi)?, node(&pj)?);
            return Ok(a.is_prefix_of(b) || b.is_prefix_of(a));
        }
        Ok(true)
    }
}

/// `‖f_k‖_∞^{-1} · max supp x_k` for the last pair of `node`.
pub fn sigma_bound(node: &TreeNode) -> Result<Rational> {
    let (f, x) = node.pairs.last().ok_or_else(|| Error::Tree("empty node".into()))?;
    let linf = f.sup_norm()?;
    if linf.is_zero() {
        return Err(Error::Tree("zero functional".into()));
    }
    let top = x.max_supp().ok_or(Error::ZeroVector { position: node.pairs.len() - 1 })?;
    Ok(big_to_rational(top) / linf)
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(text: &str) -> String {
    hex(&Sha256::digest(text.as_bytes()))
}

/// Small integer view of a natural, for reports.
pub fn short(v: &BigUint) -> String {
    match v.to_u64() {
        Some(s) => s.to_string(),
        None => format!("<{}-bit natural>", v.bits()),
    }
}
