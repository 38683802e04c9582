//! Special sequences, the universal tree they form under the prefix order,
//! and well-founded subtree policies.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::coding::{sha256_hex, CodeBook, ModeParams};
use crate::error::{Error, Result};
use crate::schreier;
use crate::vector::{successive, SparseVector};
use crate::wt::Functional;

/// A finite sequence of `(f_k, x_k)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TreeNode {
    pub pairs: Vec<(Functional, SparseVector)>,
}

impl TreeNode {
    pub fn new(pairs: Vec<(Functional, SparseVector)>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn prefix(&self, k: usize) -> TreeNode {
        TreeNode { pairs: self.pairs[..k].to_vec() }
    }

    pub fn extended(&self, f: Functional, x: SparseVector) -> TreeNode {
        let mut pairs = self.pairs.clone();
        pairs.push((f, x));
        TreeNode { pairs }
    }

    pub fn is_prefix_of(&self, other: &TreeNode) -> bool {
        self.len() <= other.len() && other.pairs[..self.len()] == self.pairs[..]
    }

    pub fn weights(&self) -> Vec<Option<&BigUint>> {
        self.pairs.iter().map(|(f, _)| f.weight()).collect()
    }

    /// One `pair <functional> ; <vector>` line per pair.
    pub fn canonical_text(&self) -> String {
        self.pairs.iter().map(|(f, x)| format!("pair {f} ; {x}\n")).collect()
    }

    /// SHA-256 of the canonical text; the node's identity in the codebook.
    pub fn hash(&self) -> String {
        sha256_hex(&self.canonical_text())
    }

    /// `{min supp f_k : k < upto}`.
    pub fn functional_mins(&self, upto: usize) -> BTreeSet<BigUint> {
        self.pairs[..upto].iter().filter_map(|(f, _)| f.min_supp().cloned()).collect()
    }

    /// The conditions for a finite sequence of pairs: successive non-zero
    /// weighted functionals of `W_α` and successive non-zero vectors.
    /// Returns the 1-based position and reason of the first failure.
    pub fn check_pairs(&self) -> std::result::Result<(), (usize, String)> {
        if self.pairs.is_empty() {
            return Err((0, "empty node".into()));
        }
        for (k, (f, x)) in self.pairs.iter().enumerate() {
            let pos = k + 1;
            if !f.is_weighted() {
                return Err((pos, "f is not a weighted functional".into()));
            }
            f.check_structure().map_err(|e| (pos, format!("f is not in W_α: {e}")))?;
            if x.is_zero() {
                return Err((pos, "x is zero".into()));
            }
            if k > 0 {
                let (pf, px) = &self.pairs[k - 1];
                if pf.max_supp() >= f.min_supp() {
                    return Err((pos, "functionals are not successive".into()));
                }
                if px.max_supp() >= x.min_supp() {
                    return Err((pos, "vectors are not successive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn vectors_successive(&self) -> Result<bool> {
        let xs: Vec<SparseVector> = self.pairs.iter().map(|(_, x)| x.clone()).collect();
        successive(&xs)
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

impl FromStr for TreeNode {
    type Err = Error;

    /// Reads `pair <functional> ; <vector>` lines; blank lines, `#`
    /// comments and a `policy` line are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("policy") {
                continue;
            }
            let body = line
                .strip_prefix("pair")
                .ok_or_else(|| Error::Parse(format!("node line must start with `pair`: `{line}`")))?;
            let (f, x) = body
                .rsplit_once(';')
                .ok_or_else(|| Error::Parse(format!("expected `<functional> ; <vector>`: `{line}`")))?;
            pairs.push((f.parse()?, x.parse()?));
        }
        Ok(TreeNode { pairs })
    }
}

/// Reads the `policy <name>` line of a node file, if any.
pub fn policy_line(s: &str) -> Option<String> {
    s.lines().find_map(|l| l.trim().strip_prefix("policy").map(|p| p.trim().to_string()))
}

/// Nodes known to the checker, by hash. Inserting a node also inserts all
/// its prefixes.
#[derive(Debug, Clone, Default)]
pub struct NodeStore {
    nodes: HashMap<String, TreeNode>,
}

impl NodeStore {
    pub fn insert(&mut self, node: &TreeNode) -> String {
        for k in 1..node.len() {
            let p = node.prefix(k);
            self.nodes.entry(p.hash()).or_insert(p);
        }
        let h = node.hash();
        self.nodes.entry(h.clone()).or_insert_with(|| node.clone());
        h
    }

    pub fn get(&self, hash: &str) -> Option<&TreeNode> {
        self.nodes.get(hash)
    }

    pub fn hashes(&self) -> impl Iterator<Item = &String> {
        self.nodes.keys()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Outcome of a clause-by-clause check: the first failing clause, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub failure: Option<Failure>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// 1-based position of the offending element, 0 when global.
    pub position: usize,
    pub clause: String,
    pub message: String,
}

impl Report {
    pub fn pass() -> Self {
        Self { failure: None, notes: Vec::new() }
    }

    pub fn fail(position: usize, clause: &str, message: impl Into<String>) -> Self {
        Self {
            failure: Some(Failure { position, clause: clause.to_string(), message: message.into() }),
            notes: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "pass")?,
            Some(x) => write!(f, "fail at {} [{}]: {}", x.position, x.clause, x.message)?,
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        Ok(())
    }
}

/// Special-sequence check: the pair conditions, `w(f_1) ∈ L_0`, and
/// `w(f_k) = σ(first k-1 pairs)` for `k >= 2` against the codebook.
pub fn validate_special(node: &TreeNode, codebook: &CodeBook, params: &ModeParams) -> Report {
    if let Err((k, msg)) = node.check_pairs() {
        return Report::fail(k, "pairs", msg);
    }
    let w1 = node.pairs[0].0.weight().expect("weighted");
    if !params.in_l0(w1) {
        return Report::fail(1, "w(f_1) in L_0", format!("weight {w1} is not in L_0"));
    }
    for k in 2..=node.len() {
        let prefix = node.prefix(k - 1);
        let w = node.pairs[k - 1].0.weight().expect("weighted");
        match codebook.lookup(&prefix.hash()) {
            None => {
                return Report::fail(k, "w(f_k) = σ(prefix)", format!("the first {} pairs are not coded", k - 1));
            }
            Some(s) if s != w => {
                return Report::fail(k, "w(f_k) = σ(prefix)", format!("weight {w} but σ(prefix) = {s}"));
            }
            Some(_) => {}
        }
    }
    Report::pass()
}

pub type NodePredicate = Arc<dyn Fn(&TreeNode) -> bool + Send + Sync>;

/// Which special sequences form the subtree `𝒯`.
#[derive(Clone)]
pub enum SubtreePolicy {
    /// Every special sequence.
    Full,
    /// Nodes whose functionals, last one excluded, are `S_2`-admissible.
    S2Bounded,
    Custom { name: String, accept: NodePredicate },
}

impl fmt::Debug for SubtreePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl SubtreePolicy {
    pub fn name(&self) -> String {
        match self {
            SubtreePolicy::Full => "full".into(),
            SubtreePolicy::S2Bounded => "s2_bounded".into(),
            SubtreePolicy::Custom { name, .. } => name.clone(),
        }
    }
}

impl FromStr for SubtreePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(SubtreePolicy::Full),
            "s2_bounded" => Ok(SubtreePolicy::S2Bounded),
            other => Err(Error::Parse(format!("unknown subtree policy `{other}`"))),
        }
    }
}

pub fn in_subtree(node: &TreeNode, policy: &SubtreePolicy) -> Result<bool> {
    match policy {
        SubtreePolicy::Full => Ok(true),
        SubtreePolicy::S2Bounded => {
            let d = node.len();
            schreier::member(2, &node.functional_mins(d.saturating_sub(1)))
        }
        SubtreePolicy::Custom { accept, .. } => Ok(accept(node)),
    }
}

/// No successor of `node` in the universal tree belongs to the subtree.
/// For custom policies this is only decidable on supplied successors, so
/// they report non-maximal.
pub fn is_maximal(node: &TreeNode, policy: &SubtreePolicy) -> Result<bool> {
    if !in_subtree(node, policy)? {
        return Err(Error::Tree("node is not in the subtree".into()));
    }
    match policy {
        SubtreePolicy::Full | SubtreePolicy::Custom { .. } => Ok(false),
        // Any successor needs the first d functionals to be S_2-admissible,
        // which does not depend on the successor itself.
        SubtreePolicy::S2Bounded => Ok(!schreier::member(2, &node.functional_mins(node.len()))?),
    }
}

/// Checks the subtree conditions on sample nodes: every prefix of an
/// accepted node is accepted, `S_2`-admissible nodes are accepted, and the
/// given successors of non-maximal accepted nodes are accepted. Returns the
/// violations found.
pub fn policy_self_test(policy: &SubtreePolicy, nodes: &[TreeNode], successors: &[(TreeNode, TreeNode)]) -> Vec<String> {
    let mut out = Vec::new();
    for node in nodes {
        let accepted = in_subtree(node, policy).unwrap_or(false);
        if accepted {
            for k in 1..node.len() {
                if !in_subtree(&node.prefix(k), policy).unwrap_or(false) {
                    out.push(format!("prefix of length {k} of {} rejected", node.hash()));
                }
            }
        }
        let all_admissible = schreier::member(2, &node.functional_mins(node.len())).unwrap_or(false);
        if all_admissible && !accepted {
            out.push(format!("S_2-admissible node {} rejected", node.hash()));
        }
    }
    for (parent, child) in successors {
        let parent_open = in_subtree(parent, policy).unwrap_or(false) && !is_maximal(parent, policy).unwrap_or(true);
        if parent_open && child.len() == parent.len() + 1 && parent.is_prefix_of(child) && !in_subtree(child, policy).unwrap_or(false) {
            out.push(format!("successor {} of non-maximal {} rejected", child.hash(), parent.hash()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{nat, rat};
    use crate::wt::{AvgKind, Sign};

    /// `wtd[w](avg[basic;1;+](unit(+,i)))` paired with `c·e_i`.
    fn pair(w: impl Into<BigUint>, i: u64, c: crate::Rational) -> (Functional, SparseVector) {
        let f = Functional::weighted(
            w.into(),
            vec![Functional::average(AvgKind::Basic, 1u32, vec![Functional::unit(Sign::Plus, nat(i))])],
        );
        (f, SparseVector::from_pairs(&[(i, c)]))
    }

    /// A toy special sequence of `len` pairs at indices `start, start+1, ...`.
    fn chain(start: u64, len: usize, book: &mut CodeBook) -> TreeNode {
        let mut node = TreeNode::default();
        let mut w = nat(2);
        for k in 0..len {
            let (f, x) = pair(w.clone(), start + k as u64, rat(1, 1));
            node = node.extended(f, x);
            if k + 1 < len {
                w = book.sigma_assign(&node).unwrap();
            }
        }
        node
    }

    #[test]
    fn validate_examples() {
        let p = ModeParams::toy();
        let mut book = CodeBook::new(p.clone());
        let one = chain(2, 1, &mut book);
        assert!(validate_special(&one, &book, &p).ok());
        let two = chain(2, 2, &mut book);
        assert!(validate_special(&two, &book, &p).ok());
        let (f, x) = pair(64u32, 3, rat(1, 1));
        let bad = one.extended(f, x);
        let r = validate_special(&bad, &book, &p);
        assert_eq!(r.failure.unwrap().position, 2);
        let (f, x) = pair(4u32, 2, rat(1, 1));
        let r = validate_special(&TreeNode::new(vec![(f, x)]), &book, &p);
        assert_eq!(r.failure.unwrap().clause, "w(f_1) in L_0");
    }

    #[test]
    fn text_round_trip() {
        let mut book = CodeBook::new(ModeParams::toy());
        let node = chain(3, 2, &mut book);
        let back: TreeNode = node.canonical_text().parse().unwrap();
        assert_eq!(back, node);
        assert_eq!(back.hash(), node.hash());
        assert_eq!(policy_line("policy s2_bounded\npair x"), Some("s2_bounded".into()));
    }

    #[test]
    fn policies() {
        let mut book = CodeBook::new(ModeParams::toy());
        // Functionals at 1 then 2: {1} is S_2-admissible, {1,2} is not.
        let root = chain(1, 1, &mut book);
        assert!(in_subtree(&root, &SubtreePolicy::S2Bounded).unwrap());
        assert!(!is_maximal(&root, &SubtreePolicy::S2Bounded).unwrap());
        let two = chain(1, 2, &mut book);
        assert!(in_subtree(&two, &SubtreePolicy::S2Bounded).unwrap());
        assert!(is_maximal(&two, &SubtreePolicy::S2Bounded).unwrap());
        let three = chain(1, 3, &mut book);
        assert!(!in_subtree(&three, &SubtreePolicy::S2Bounded).unwrap());
        assert!(in_subtree(&three, &SubtreePolicy::Full).unwrap());
        assert!(!is_maximal(&three, &SubtreePolicy::Full).unwrap());

        let open = chain(3, 2, &mut book);
        assert!(!is_maximal(&open, &SubtreePolicy::S2Bounded).unwrap());
        let next = chain(3, 3, &mut book);
        let nodes = vec![root, two, three, open.clone(), next.clone()];
        assert!(policy_self_test(&SubtreePolicy::S2Bounded, &nodes, &[(open, next)]).is_empty());
    }

    #[test]
    fn s2_chains_are_bounded() {
        // With root index m, consecutive indices stay S_2-admissible for
        // exactly m(2^m - 1) elements.
        for m in 2..=4u64 {
            let bound = m * ((1 << m) - 1);
            let set = |len: u64| (m..m + len).map(nat).collect::<BTreeSet<_>>();
            assert!(schreier::member(2, &set(bound)).unwrap());
            assert!(!schreier::member(2, &set(bound + 1)).unwrap());
        }
    }
}
