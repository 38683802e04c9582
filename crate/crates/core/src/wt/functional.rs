//! Functional terms: units, averages and weighted functionals, with their
//! text grammar, evaluation and interval restriction.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::schreier;
use crate::vector::{big_to_rational, inv_pow2, Interval, Rational, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(r: &Rational) -> Sign {
        if r.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn apply(self, r: Rational) -> Rational {
        match self {
            Sign::Plus => r,
            Sign::Minus => -r,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AvgKind {
    /// Average of unit functionals.
    Basic,
    /// Average of weighted functionals with pairwise incomparable weights.
    Ic,
    /// Conditional average, tied to a tree node.
    Co,
    /// Irrelevant average, tied to a tree node.
    Ir,
    /// Unrestricted average of the larger norming set.
    Alpha,
}

impl AvgKind {
    pub fn name(self) -> &'static str {
        match self {
            AvgKind::Basic => "basic",
            AvgKind::Ic => "ic",
            AvgKind::Co => "co",
            AvgKind::Ir => "ir",
            AvgKind::Alpha => "alpha",
        }
    }
}

impl FromStr for AvgKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "basic" => AvgKind::Basic,
            "ic" => AvgKind::Ic,
            "co" => AvgKind::Co,
            "ir" => AvgKind::Ir,
            "alpha" => AvgKind::Alpha,
            other => return Err(Error::Parse(format!("unknown average kind `{other}`"))),
        })
    }
}

/// Tree node (by hash) and the 1-based positions `k_1 < ... < k_d` in it
/// matched to the children of an average.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Witness {
    pub node: String,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Functional {
    Unit {
        sign: Sign,
        index: BigUint,
    },
    Average {
        kind: AvgKind,
        size: BigUint,
        signs: Vec<Sign>,
        witness: Option<Witness>,
        children: Vec<Functional>,
    },
    Weighted {
        weight: BigUint,
        children: Vec<Functional>,
    },
}

/// `size > 2^m`, decided without building `2^m`.
pub fn exceeds_pow2(size: &BigUint, m: &BigUint) -> bool {
    let bits = BigUint::from(size.bits());
    let m1 = m + 1u32;
    if bits != m1 {
        return bits > m1;
    }
    // size has exactly m+1 bits, so it is 2^m unless some lower bit is set.
    size.trailing_zeros().map_or(false, |tz| BigUint::from(tz) < *m)
}

impl Functional {
    pub fn unit(sign: Sign, index: impl Into<BigUint>) -> Self {
        Functional::Unit { sign, index: index.into() }
    }

    pub fn average(kind: AvgKind, size: impl Into<BigUint>, children: Vec<Functional>) -> Self {
        let signs = vec![Sign::Plus; children.len()];
        Functional::Average { kind, size: size.into(), signs, witness: None, children }
    }

    pub fn weighted(weight: impl Into<BigUint>, children: Vec<Functional>) -> Self {
        Functional::Weighted { weight: weight.into(), children }
    }

    /// Average of the given units with kind `basic` and size `n`.
    pub fn basic(size: impl Into<BigUint>, units: &[(Sign, u64)]) -> Self {
        Self::average(
            AvgKind::Basic,
            size,
            units.iter().map(|&(s, i)| Functional::unit(s, BigUint::from(i))).collect(),
        )
    }

    pub fn children(&self) -> &[Functional] {
        match self {
            Functional::Unit { .. } => &[],
            Functional::Average { children, .. } | Functional::Weighted { children, .. } => children,
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Functional::Unit { .. })
    }

    pub fn is_average(&self) -> bool {
        matches!(self, Functional::Average { .. })
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, Functional::Weighted { .. })
    }

    pub fn weight(&self) -> Option<&BigUint> {
        match self {
            Functional::Weighted { weight, .. } => Some(weight),
            _ => None,
        }
    }

    pub fn size(&self) -> Option<&BigUint> {
        match self {
            Functional::Average { size, .. } => Some(size),
            _ => None,
        }
    }

    /// Smallest unit index in the term. Children are successive and every
    /// term is non-zero, so this is `min supp f`.
    pub fn min_supp(&self) -> Option<&BigUint> {
        match self {
            Functional::Unit { index, .. } => Some(index),
            _ => self.children().first().and_then(Functional::min_supp),
        }
    }

    pub fn max_supp(&self) -> Option<&BigUint> {
        match self {
            Functional::Unit { index, .. } => Some(index),
            _ => self.children().last().and_then(Functional::max_supp),
        }
    }

    pub fn range(&self) -> Interval {
        match (self.min_supp(), self.max_supp()) {
            (Some(lo), Some(hi)) => Interval::Closed { lo: lo.clone(), hi: hi.clone() },
            _ => Interval::Empty,
        }
    }

    pub fn support(&self) -> BTreeSet<BigUint> {
        let mut out = BTreeSet::new();
        self.collect_support(&mut out);
        out
    }

    fn collect_support(&self, out: &mut BTreeSet<BigUint>) {
        match self {
            Functional::Unit { index, .. } => {
                out.insert(index.clone());
            }
            _ => self.children().iter().for_each(|c| c.collect_support(out)),
        }
    }

    /// Number of subterms, this one included.
    pub fn term_count(&self) -> usize {
        1 + self.children().iter().map(Functional::term_count).sum::<usize>()
    }

    /// The pairing `f(x)`.
    pub fn evaluate(&self, x: &SparseVector) -> Result<Rational> {
        match self {
            Functional::Unit { sign, index } => Ok(sign.apply(x.get(index))),
            Functional::Average { size, signs, children, .. } => {
                if signs.len() != children.len() {
                    return Err(Error::Malformed("sign count differs from child count".into()));
                }
                if size.is_zero() {
                    return Err(Error::Malformed("average of size 0".into()));
                }
                let mut sum = Rational::zero();
                for (s, c) in signs.iter().zip(children) {
                    sum += s.apply(c.evaluate_if_touching(x)?);
                }
                if sum.is_zero() {
                    return Ok(sum);
                }
                Ok(sum / big_to_rational(size))
            }
            Functional::Weighted { weight, children } => {
                let mut sum = Rational::zero();
                for c in children {
                    sum += c.evaluate_if_touching(x)?;
                }
                if sum.is_zero() {
                    return Ok(sum);
                }
                Ok(sum * inv_pow2(weight)?)
            }
        }
    }

    fn evaluate_if_touching(&self, x: &SparseVector) -> Result<Rational> {
        let r = self.range();
        if x.restrict_interval(&r).is_zero() {
            return Ok(Rational::zero());
        }
        self.evaluate(x)
    }

    /// The coefficient vector of `f`.
    pub fn to_vector(&self) -> Result<SparseVector> {
        let mut out = SparseVector::new();
        self.accumulate(&Rational::one(), &mut out)?;
        Ok(out)
    }

    fn accumulate(&self, scale: &Rational, out: &mut SparseVector) -> Result<()> {
        match self {
            Functional::Unit { sign, index } => out.add_at(index.clone(), sign.apply(scale.clone())),
            Functional::Average { size, signs, children, .. } => {
                if size.is_zero() || signs.len() != children.len() {
                    return Err(Error::Malformed("bad average".into()));
                }
                let inner = scale / big_to_rational(size);
                for (s, c) in signs.iter().zip(children) {
                    c.accumulate(&s.apply(inner.clone()), out)?;
                }
            }
            Functional::Weighted { weight, children } => {
                let inner = scale * inv_pow2(weight)?;
                for c in children {
                    c.accumulate(&inner, out)?;
                }
            }
        }
        Ok(())
    }

    /// `‖f‖_∞`, the largest absolute coefficient.
    pub fn sup_norm(&self) -> Result<Rational> {
        Ok(self.to_vector()?.linf())
    }

    /// `-f`.
    pub fn negated(&self) -> Functional {
        match self {
            Functional::Unit { sign, index } => Functional::Unit { sign: sign.flip(), index: index.clone() },
            Functional::Average { kind, size, signs, witness, children } => Functional::Average {
                kind: *kind,
                size: size.clone(),
                signs: signs.iter().map(|s| s.flip()).collect(),
                witness: witness.clone(),
                children: children.clone(),
            },
            Functional::Weighted { weight, children } => Functional::Weighted {
                weight: weight.clone(),
                children: children.iter().map(Functional::negated).collect(),
            },
        }
    }

    /// `Ef` for an interval `E`, or `None` when nothing survives. Sizes,
    /// weights and kinds are kept; witness positions follow the surviving
    /// children.
    pub fn restrict(&self, e: &Interval) -> Option<Functional> {
        match self {
            Functional::Unit { index, .. } => e.contains(index).then(|| self.clone()),
            Functional::Average { kind, size, signs, witness, children } => {
                let mut kept_signs = Vec::new();
                let mut kept_children = Vec::new();
                let mut kept_idx = Vec::new();
                for (pos, (s, c)) in signs.iter().zip(children).enumerate() {
                    if let Some(rc) = c.restrict(e) {
                        kept_signs.push(*s);
                        kept_children.push(rc);
                        kept_idx.push(pos);
                    }
                }
                if kept_children.is_empty() {
                    return None;
                }
                let witness = witness.as_ref().map(|w| Witness {
                    node: w.node.clone(),
                    indices: kept_idx.iter().filter_map(|&p| w.indices.get(p).copied()).collect(),
                });
                Some(Functional::Average {
                    kind: *kind,
                    size: size.clone(),
                    signs: kept_signs,
                    witness,
                    children: kept_children,
                })
            }
            Functional::Weighted { weight, children } => {
                let kept: Vec<Functional> = children.iter().filter_map(|c| c.restrict(e)).collect();
                (!kept.is_empty()).then(|| Functional::Weighted { weight: weight.clone(), children: kept })
            }
        }
    }

    /// Structural membership in the larger norming set: successive children,
    /// `d <= n` for averages, and very fast growing, admissible averages under
    /// weighted functionals. Returns the first violation.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        match self {
            Functional::Unit { index, .. } => {
                if index.is_zero() {
                    return Err("unit index 0".into());
                }
                Ok(())
            }
            Functional::Average { size, signs, children, kind, witness } => {
                if children.is_empty() {
                    return Err("average with no children".into());
                }
                if signs.len() != children.len() {
                    return Err("average sign count differs from child count".into());
                }
                if BigUint::from(children.len()) > *size {
                    return Err(format!("average of size {size} has {} children", children.len()));
                }
                if *kind == AvgKind::Basic && !children.iter().all(Functional::is_unit) {
                    return Err("basic average with a non-unit child".into());
                }
                if let Some(w) = witness {
                    if w.indices.len() != children.len() {
                        return Err("witness index count differs from child count".into());
                    }
                }
                check_successive(children)?;
                children.iter().try_for_each(Functional::check_structure)
            }
            Functional::Weighted { weight, children } => {
                if weight.is_zero() {
                    return Err("weighted functional of weight 0".into());
                }
                if children.is_empty() {
                    return Err("weighted functional with no children".into());
                }
                if let Some(p) = children.iter().position(|c| !c.is_average()) {
                    return Err(format!("child {} of a weighted functional is not an average", p + 1));
                }
                check_successive(children)?;
                for q in 1..children.len() {
                    let prev_max = children[q - 1].max_supp().expect("nonempty");
                    let size = children[q].size().expect("average");
                    if !exceeds_pow2(size, prev_max) {
                        return Err(format!(
                            "not very fast growing at child {}: size {size} <= 2^{prev_max}",
                            q + 1
                        ));
                    }
                }
                let mins: BTreeSet<BigUint> = children.iter().map(|c| c.min_supp().expect("nonempty").clone()).collect();
                let level = weight.to_usize().unwrap_or(usize::MAX);
                match schreier::member(level, &mins) {
                    Ok(true) => {}
                    Ok(false) => return Err(format!("children are not S_{weight}-admissible")),
                    Err(e) => return Err(e.to_string()),
                }
                children.iter().try_for_each(Functional::check_structure)
            }
        }
    }
}

fn check_successive(children: &[Functional]) -> std::result::Result<(), String> {
    for (k, w) in children.windows(2).enumerate() {
        if w[0].max_supp() >= w[1].min_supp() {
            return Err(format!("children {} and {} are not successive", k + 1, k + 2));
        }
    }
    Ok(())
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Unit { sign, index } => write!(f, "unit({},{})", sign.symbol(), index),
            Functional::Average { kind, size, signs, witness, children } => {
                let s: String = signs.iter().map(|s| s.symbol()).collect();
                write!(f, "avg[{};{};{}", kind.name(), size, s)?;
                if let Some(w) = witness {
                    let ks: Vec<String> = w.indices.iter().map(|k| k.to_string()).collect();
                    write!(f, ";witness={}:{}", w.node, ks.join(","))?;
                }
                write!(f, "]")?;
                write_children(f, children)
            }
            Functional::Weighted { weight, children } => {
                write!(f, "wtd[{weight}]")?;
                write_children(f, children)
            }
        }
    }
}

fn write_children(f: &mut fmt::Formatter<'_>, children: &[Functional]) -> fmt::Result {
    write!(f, "(")?;
    for (k, c) in children.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, ")")
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { s: &compact, pos: 0 };
        let f = p.functional()?;
        if p.pos != compact.len() {
            return Err(p.error("trailing input"));
        }
        Ok(f)
    }
}

struct Parser<'a> {
    s: &'a [char],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("functional: {what} at offset {}", self.pos))
    }

    fn eat(&mut self, lit: &str) -> bool {
        let n = lit.chars().count();
        if self.s.len() >= self.pos + n && self.s[self.pos..self.pos + n].iter().copied().eq(lit.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{lit}`")))
        }
    }

    fn until(&mut self, stops: &[char]) -> String {
        let start = self.pos;
        while self.pos < self.s.len() && !stops.contains(&self.s[self.pos]) {
            self.pos += 1;
        }
        self.s[start..self.pos].iter().collect()
    }

    fn natural(&mut self, stops: &[char]) -> Result<BigUint> {
        let t = self.until(stops);
        BigUint::from_str(&t).map_err(|_| self.error(&format!("bad natural `{t}`")))
    }

    fn sign(&mut self) -> Result<Sign> {
        if self.eat("+") {
            Ok(Sign::Plus)
        } else if self.eat("-") {
            Ok(Sign::Minus)
        } else {
            Err(self.error("expected sign"))
        }
    }

    fn functional(&mut self) -> Result<Functional> {
        if self.eat("unit(") {
            let sign = self.sign()?;
            self.expect(",")?;
            let index = self.natural(&[')'])?;
            self.expect(")")?;
            if index.is_zero() {
                return Err(self.error("unit index 0"));
            }
            Ok(Functional::Unit { sign, index })
        } else if self.eat("avg[") {
            let kind: AvgKind = self.until(&[';']).parse()?;
            self.expect(";")?;
            let size = self.natural(&[';'])?;
            self.expect(";")?;
            let mut signs = Vec::new();
            while !matches!(self.s.get(self.pos), Some(']') | Some(';') | None) {
                signs.push(self.sign()?);
            }
            let mut witness = None;
            if self.eat(";witness=") {
                let node = self.until(&[':']);
                self.expect(":")?;
                let list = self.until(&[']']);
                let indices = list
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| self.error(&format!("bad witness index `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                witness = Some(Witness { node, indices });
            }
            self.expect("]")?;
            let children = self.children()?;
            if signs.len() != children.len() {
                return Err(self.error("sign count differs from child count"));
            }
            Ok(Functional::Average { kind, size, signs, witness, children })
        } else if self.eat("wtd[") {
            let weight = self.natural(&[']'])?;
            self.expect("]")?;
            let children = self.children()?;
            Ok(Functional::Weighted { weight, children })
        } else {
            Err(self.error("expected unit, avg or wtd"))
        }
    }

    fn children(&mut self) -> Result<Vec<Functional>> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.eat(")") {
            return Ok(out);
        }
        loop {
            out.push(self.functional()?);
            if self.eat(")") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }
}

/// `2^m + 1` as a natural, the smallest size allowed after an average
/// ending at `m`.
pub fn vfg_size(prev_max: &BigUint) -> Result<BigUint> {
    Ok(crate::vector::pow2(prev_max)? + 1u32)
}

pub fn sign_of_int(v: &BigInt) -> Sign {
    if v.is_negative() {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{int, nat, rat};
    use proptest::prelude::*;

    fn f(s: &str) -> Functional {
        s.parse().unwrap()
    }

    fn v(s: &str) -> SparseVector {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(f("unit(+,3)").evaluate(&v("{3:1/2}")).unwrap(), rat(1, 2));
        let a = f("avg[basic;2;++](unit(+,1),unit(+,2))");
        assert_eq!(a.evaluate(&v("{1:1, 2:1}")).unwrap(), int(1));
        let w = f("wtd[1](avg[basic;1;+](unit(+,3)),avg[basic;9;++](unit(+,4),unit(+,5)))");
        assert_eq!(w.evaluate(&v("{3:1, 4:1, 5:1}")).unwrap(), rat(11, 18));
        assert!(w.check_structure().is_ok());
    }

    #[test]
    fn vfg_violation_is_reported() {
        let w = f("wtd[1](avg[basic;1;+](unit(+,3)),avg[basic;8;++](unit(+,4),unit(+,5)))");
        let err = w.check_structure().unwrap_err();
        assert!(err.contains("very fast growing"), "{err}");
    }

    #[test]
    fn exceeds_pow2_cases() {
        assert!(exceeds_pow2(&nat(9), &nat(3)));
        assert!(!exceeds_pow2(&nat(8), &nat(3)));
        assert!(!exceeds_pow2(&nat(7), &nat(3)));
        assert!(exceeds_pow2(&nat(16), &nat(3)));
        assert!(exceeds_pow2(&nat(2), &nat(0)));
        assert!(!exceeds_pow2(&nat(1), &nat(0)));
    }

    #[test]
    fn grammar_round_trip_and_whitespace() {
        let s = "avg[co;3;+-;witness=ab12:1,3](wtd[2](avg[basic;1;+](unit(+,4))),wtd[4](avg[basic;2;-](unit(-,9))))";
        assert_eq!(f(s).to_string(), s);
        let spaced = "avg[ co ; 3 ; + - ; witness=ab12 : 1 , 3 ] ( wtd[2]( avg[basic;1;+]( unit( +, 4 ) ) ),\n wtd[4](avg[basic;2;-](unit(-,9))) )";
        assert_eq!(f(spaced), f(s));
        assert!("unit(+,0)".parse::<Functional>().is_err());
        assert!("avg[basic;2;+](unit(+,1),unit(+,2))".parse::<Functional>().is_err());
        assert!("avg[odd;2;+](unit(+,1))".parse::<Functional>().is_err());
        assert!("wtd[1](unit(+,1)) x".parse::<Functional>().is_err());
    }

    #[test]
    fn restrict_keeps_sizes() {
        let a = f("avg[basic;3;+-+](unit(+,2),unit(-,5),unit(+,7))");
        let r = a.restrict(&Interval::from_u64(3, 9).unwrap()).unwrap();
        assert_eq!(r.to_string(), "avg[basic;3;-+](unit(-,5),unit(+,7))");
        assert!(a.restrict(&Interval::from_u64(8, 9).unwrap()).is_none());
        assert_eq!(a.restrict(&a.range()).unwrap(), a);
    }

    #[test]
    fn coefficient_vector() {
        let w = f("wtd[1](avg[basic;1;+](unit(+,3)),avg[basic;9;+-](unit(+,4),unit(-,5)))");
        assert_eq!(w.to_vector().unwrap(), v("{3:1/2, 4:1/18, 5:1/18}"));
        assert_eq!(w.sup_norm().unwrap(), rat(1, 2));
    }

    fn arb_basic() -> impl Strategy<Value = Functional> {
        (proptest::collection::btree_set(1u64..30, 1..6), proptest::collection::vec(any::<bool>(), 6), 0u64..4)
            .prop_map(|(idx, signs, extra)| {
                let units: Vec<(Sign, u64)> = idx
                    .iter()
                    .zip(signs)
                    .map(|(&i, s)| (if s { Sign::Plus } else { Sign::Minus }, i))
                    .collect();
                Functional::basic(units.len() as u64 + extra, &units)
            })
    }

    proptest! {
        #[test]
        fn evaluate_matches_coefficients(a in arb_basic(), xs in proptest::collection::vec((1u64..30, -5i64..6), 0..10)) {
            let x = SparseVector::from_pairs(&xs.iter().map(|&(i, c)| (i, int(c))).collect::<Vec<_>>());
            prop_assert_eq!(a.evaluate(&x).unwrap(), a.to_vector().unwrap().dot(&x));
            let back: Functional = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
