//! Random valid certificates and s.c.c. samples.

use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use xt_core::analysis::{synthesize_dependent, AnalysisParams};
use xt_core::coding::CodeBook;
use xt_core::scc::{generate_basic_scc, Ground, SccSpec};
use xt_core::schreier::member_u64;
use xt_core::tree::{NodeStore, SubtreePolicy};
use xt_core::vector::{pow2, rat};
use xt_core::wt::{alternating, AvgKind, CoReading, Functional, Sign, Witness, WtContext};
use xt_core::{Rational, SparseVector};

/// A toy world holding one stored chain with weights 2 and 16 at indices
/// 1 and 2, which witnesses conditional averages of up to two children.
pub struct World {
    pub params: AnalysisParams,
    pub book: CodeBook,
    pub store: NodeStore,
    pub policy: SubtreePolicy,
    pub chain: String,
}

impl World {
    pub fn toy() -> Self {
        let params = AnalysisParams::toy();
        let mut book = CodeBook::new(params.mode.clone());
        let mut store = NodeStore::default();
        let policy = SubtreePolicy::S2Bounded;
        let seq = synthesize_dependent(&params, 2, 1, &mut book, &mut store, &policy).expect("toy chain");
        let chain = seq.node().hash();
        Self { params, book, store, policy, chain }
    }

    pub fn ctx(&self) -> WtContext<'_> {
        WtContext {
            params: &self.params.mode,
            codebook: &self.book,
            store: &self.store,
            policy: &self.policy,
            co_reading: CoReading::UpToM,
        }
    }
}

fn sign(rng: &mut ChaCha8Rng) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Generates members of `W_𝒯` (toy mode) inside an index window.
pub struct CertGen<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub chain: String,
}

impl CertGen<'_> {
    /// Any functional with support in `lo..=hi`, or `None` if the window
    /// is too small for the shape drawn.
    pub fn any(&mut self, lo: u64, hi: u64, depth: usize) -> Option<Functional> {
        match self.rng.gen_range(0..4) {
            0 => Some(Functional::unit(sign(self.rng), self.rng.gen_range(lo..=hi))),
            1 => self.alpha(lo, hi, &BigUint::from(1u32), depth),
            _ => {
                let w = self.rng.gen_range(1..=3u64);
                self.weighted(lo, hi, w, depth)
            }
        }
    }

    /// `wtd[w]` over a very fast growing `S_w`-admissible run of averages.
    pub fn weighted(&mut self, lo: u64, hi: u64, w: u64, depth: usize) -> Option<Functional> {
        let k = self.rng.gen_range(1..=3);
        let mut alphas: Vec<Functional> = Vec::new();
        let mut start = lo;
        let mut floor = BigUint::from(1u32);
        for _ in 0..k {
            if start > hi {
                break;
            }
            let room = hi - start;
            let end = start + self.rng.gen_range(0..=room.min(3));
            let Some(a) = self.alpha(start, end, &floor, depth) else { break };
            let max = a.max_supp().expect("non-empty").clone();
            let mut mins: Vec<u64> = alphas.iter().map(|a| min_u64(a)).collect();
            mins.push(min_u64(&a));
            if !member_u64(w as usize, &mins).expect("small set") {
                break;
            }
            floor = pow2(&max).expect("small index") + 1u32;
            start = u64::try_from(&max).expect("small") + 1;
            alphas.push(a);
        }
        if alphas.is_empty() {
            return None;
        }
        Some(Functional::weighted(w, alphas))
    }

    /// An `α_c`-average of size at least `floor`.
    pub fn alpha(&mut self, lo: u64, hi: u64, floor: &BigUint, depth: usize) -> Option<Functional> {
        let kind = if depth == 0 { 0 } else { self.rng.gen_range(0..3) };
        let (kind, signs, witness, children) = match kind {
            0 => {
                let d = self.rng.gen_range(1..=3u64).min(hi - lo + 1);
                let mut idx: Vec<u64> = (lo..=hi).collect();
                while idx.len() as u64 > d {
                    let r = self.rng.gen_range(0..idx.len());
                    idx.remove(r);
                }
                let kids: Vec<Functional> = idx.iter().map(|&i| Functional::unit(sign(self.rng), i)).collect();
                (AvgKind::Basic, vec![Sign::Plus; kids.len()], None, kids)
            }
            1 => {
                // Weights whose φ are distinct elements of L_0 = {2, 8, 32}.
                let classes = [(2u64, 7u64), (8, 15), (32, 63)];
                let d = self.rng.gen_range(1..=2usize);
                let first = self.rng.gen_range(0..=classes.len() - d);
                let kids = self.successive_weighted(lo, hi, &classes[first..first + d], depth - 1)?;
                let s = sign(self.rng);
                (AvgKind::Ic, vec![s; kids.len()], None, kids)
            }
            _ => {
                // Matched against the stored chain's weights 2 and 16.
                let classes = [(2u64, 7u64), (16, 31)];
                let d = self.rng.gen_range(1..=2usize);
                let kids = self.successive_weighted(lo, hi, &classes[..d], depth - 1)?;
                let start = sign(self.rng);
                let witness = Witness { node: self.chain.clone(), indices: (1..=kids.len()).collect() };
                (AvgKind::Co, alternating(kids.len(), start), Some(witness), kids)
            }
        };
        if children.is_empty() {
            return None;
        }
        let d = BigUint::from(children.len());
        let size = d.max(floor.clone()) + self.rng.gen_range(0..=1u32);
        Some(Functional::Average { kind, size, signs, witness, children })
    }

    fn successive_weighted(&mut self, lo: u64, hi: u64, classes: &[(u64, u64)], depth: usize) -> Option<Vec<Functional>> {
        let mut out = Vec::new();
        let mut start = lo;
        for &(a, b) in classes {
            if start > hi {
                return None;
            }
            let end = start + self.rng.gen_range(0..=(hi - start).min(2));
            let w = self.rng.gen_range(a..=b);
            let g = self.weighted(start, end, w, depth)?;
            start = u64::try_from(g.max_supp().expect("non-empty")).expect("small") + 1;
            out.push(g);
        }
        Some(out)
    }
}

fn min_u64(f: &Functional) -> u64 {
    u64::try_from(f.min_supp().expect("non-empty")).expect("small")
}

/// A vector on `lo..=hi` with at most `max_len` entries from `±{1, 1/2, 1/3, 2}`.
pub fn random_vector(rng: &mut ChaCha8Rng, lo: u64, hi: u64, max_len: usize) -> SparseVector {
    let values = [rat(1, 1), rat(1, 2), rat(1, 3), rat(2, 1)];
    let mut pairs = Vec::new();
    for i in lo..=hi {
        if pairs.len() < max_len && rng.gen_bool(0.6) {
            let v: Rational = values[rng.gen_range(0..values.len())].clone();
            pairs.push((i, if rng.gen_bool(0.5) { v } else { -v }));
        }
    }
    if pairs.is_empty() {
        pairs.push((lo, rat(1, 1)));
    }
    SparseVector::from_pairs(&pairs)
}

/// `(x, n, ε)` for generated `(n, ε)`-basic s.c.c.s with support at most
/// `max_support`, over progressions and random pools.
pub fn sample_sccs(rng: &mut ChaCha8Rng, count: usize, max_support: usize) -> Vec<(SparseVector, usize, Rational)> {
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 100 * count, "too few small s.c.c.s");
        let n = rng.gen_range(1..=2usize);
        let eps = rat(rng.gen_range(1..=9), 10);
        let ground = if rng.gen_bool(0.5) {
            Ground::Progression { start: rng.gen_range(1..=9), step: rng.gen_range(1..=3) }
        } else {
            let mut pool = Vec::new();
            let mut v = rng.gen_range(1..=6u64);
            for _ in 0..40 {
                pool.push(v);
                v += rng.gen_range(1..=4);
            }
            Ground::Pool(pool)
        };
        let Ok(spec) = SccSpec::new(n, eps.clone(), ground) else { continue };
        match generate_basic_scc(&spec) {
            Ok(x) if x.len() <= max_support => out.push((x, n, eps)),
            _ => {}
        }
    }
    out
}
