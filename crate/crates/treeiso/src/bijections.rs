//! Executable bijections on polynomial sets of trees.
//!
//! A derivation move X^{m+1} <-> X^m + X^{m+2} acts on tagged tuples by
//! inspecting the last coordinate: an empty tree is dropped, a non-empty
//! tree is replaced by its two subtrees. Compiling a derivation therefore
//! yields a chain of bijections, which can be flattened into a single
//! finite pattern family. The hand-coded seven-tuple codec, the
//! Cantor-Schroeder-Bernstein bijections and the Garsia-Milne iterator
//! round out the module.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::derivations::{apply_move, check_derivation, Derivation, Move};
use crate::error::{Error, ParseError, Result};
use crate::patterns::{
    match_ptuple, parse_ppattern, substitute_ptuple, summands, unify_components, PPattern,
    PTuple, Pattern, SummandAddress,
};
use crate::semiring::{parse_poly, Polynomial};
use crate::tree::Tree;

/// A very explicit function from P(T) to Q(T): an indexed family of
/// (domain P-pattern, codomain Q-pattern) pairs with identical label sets
/// per pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VEFunction {
    pub domain_poly: Polynomial,
    pub codomain_poly: Polynomial,
    pub pairs: Vec<(PPattern, PPattern)>,
}

impl VEFunction {
    pub fn new(
        domain_poly: Polynomial,
        codomain_poly: Polynomial,
        pairs: Vec<(PPattern, PPattern)>,
    ) -> Result<VEFunction> {
        for (p, q) in &pairs {
            if !p.summand.valid_for(&domain_poly) {
                return Err(Error::TupleMismatch(format!(
                    "domain pattern {} not a summand of {}",
                    p, domain_poly
                )));
            }
            if !q.summand.valid_for(&codomain_poly) {
                return Err(Error::TupleMismatch(format!(
                    "codomain pattern {} not a summand of {}",
                    q, codomain_poly
                )));
            }
            let lp: BTreeSet<String> = p.labels().into_iter().collect();
            let lq: BTreeSet<String> = q.labels().into_iter().collect();
            if lp != lq {
                return Err(Error::Other(format!(
                    "label sets differ in pair {} => {}",
                    p, q
                )));
            }
        }
        Ok(VEFunction { domain_poly, codomain_poly, pairs })
    }

    /// The identity on P(T): one pair of fully labeled tuples per summand.
    pub fn identity(p: &Polynomial) -> VEFunction {
        let pairs = summands(p)
            .into_iter()
            .map(|addr| {
                let components: Vec<Pattern> = (1..=addr.exponent)
                    .map(|i| Pattern::label(format!("x{}", i)))
                    .collect();
                let pp = PPattern { summand: addr, components };
                (pp.clone(), pp)
            })
            .collect();
        VEFunction { domain_poly: p.clone(), codomain_poly: p.clone(), pairs }
    }

    /// Applies the function: find the unique matching domain pattern and
    /// instantiate the paired codomain pattern with the same substitution.
    pub fn apply(&self, x: &PTuple) -> Result<PTuple> {
        for (p, q) in &self.pairs {
            if let Some(s) = match_ptuple(p, x) {
                return substitute_ptuple(q, &s);
            }
        }
        Err(Error::TupleMismatch(format!("{} matches no domain pattern", x)))
    }

    /// Applies the inverse, exchanging the roles of the two sides.
    pub fn apply_inverse(&self, y: &PTuple) -> Result<PTuple> {
        for (p, q) in &self.pairs {
            if let Some(s) = match_ptuple(q, y) {
                return substitute_ptuple(p, &s);
            }
        }
        Err(Error::TupleMismatch(format!("{} matches no codomain pattern", y)))
    }

    /// Relabels every pair canonically and sorts pairs, for stable output.
    pub fn canonicalize(&self) -> VEFunction {
        let mut pairs: Vec<(PPattern, PPattern)> = self
            .pairs
            .iter()
            .map(|(p, q)| {
                let canon = p.canonical();
                let rename: BTreeMap<String, String> = p
                    .labels()
                    .into_iter()
                    .zip(canon.labels())
                    .collect();
                (canon, q.rename_labels(&rename))
            })
            .collect();
        pairs.sort();
        VEFunction {
            domain_poly: self.domain_poly.clone(),
            codomain_poly: self.codomain_poly.clone(),
            pairs,
        }
    }

    /// Header lines `P:` / `Q:`, then one `domain => codomain` line per pair.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "P: {}", self.domain_poly).unwrap();
        writeln!(out, "Q: {}", self.codomain_poly).unwrap();
        for (p, q) in &self.pairs {
            writeln!(out, "{} => {}", p, q).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<VEFunction> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let p_line = lines
            .next()
            .and_then(|l| l.trim().strip_prefix("P:").map(str::to_string))
            .ok_or_else(|| ParseError::new(0, "expected 'P: <poly>'".into()))?;
        let q_line = lines
            .next()
            .and_then(|l| l.trim().strip_prefix("Q:").map(str::to_string))
            .ok_or_else(|| ParseError::new(0, "expected 'Q: <poly>'".into()))?;
        let mut pairs = Vec::new();
        for line in lines {
            let (d, c) = line
                .split_once("=>")
                .ok_or_else(|| ParseError::new(0, format!("expected 'dom => cod': {}", line)))?;
            pairs.push((parse_ppattern(d.trim())?, parse_ppattern(c.trim())?));
        }
        VEFunction::new(parse_poly(&p_line)?, parse_poly(&q_line)?, pairs)
    }
}

/// One derivation move interpreted as a bijection between the tuple sets
/// of two successive polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveLink {
    pub before: Polynomial,
    pub mv: Move,
    pub after: Polynomial,
}

/// The occurrences a link touches: split form (one source, two targets)
/// regardless of the move's direction.
struct LinkShape {
    /// (exponent e, tag) consumed on the single-summand side.
    one: SummandAddress,
    /// e-1 occurrence on the two-summand side.
    low: SummandAddress,
    /// e+1 occurrence on the two-summand side.
    high: SummandAddress,
    /// True when `before` is the single-summand side (a Split move).
    split: bool,
}

fn tag_of(p: &Polynomial, pos: usize) -> SummandAddress {
    let exps = p.exponents();
    let e = exps[pos];
    let first = exps.iter().position(|&x| x == e).unwrap();
    SummandAddress::new(e, pos - first + 1)
}

impl MoveLink {
    pub fn new(before: &Polynomial, mv: Move) -> Result<MoveLink> {
        let after = apply_move(before, &mv)?;
        Ok(MoveLink { before: before.clone(), mv, after })
    }

    fn shape(&self) -> LinkShape {
        match self.mv {
            Move::Split { pos } => {
                let one = tag_of(&self.before, pos);
                let e = one.exponent;
                LinkShape {
                    one,
                    // new occurrences take the tag after all existing ones
                    low: SummandAddress::new(e - 1, self.before.coeff(e - 1) + 1),
                    high: SummandAddress::new(e + 1, self.before.coeff(e + 1) + 1),
                    split: true,
                }
            }
            Move::Merge { pos_low, pos_high } => {
                let low = tag_of(&self.before, pos_low);
                let high = tag_of(&self.before, pos_high);
                let e = low.exponent + 1;
                LinkShape {
                    one: SummandAddress::new(e, self.before.coeff(e) + 1),
                    low,
                    high,
                    split: false,
                }
            }
        }
    }

    /// Bystander tag remapping from the single-summand side to the
    /// two-summand side: the consumed occurrence closes its tag range,
    /// while the introduced occurrences open theirs.
    fn remap_one_to_two(shape: &LinkShape, addr: SummandAddress) -> SummandAddress {
        let mut a = addr;
        if a.exponent == shape.one.exponent && a.tag > shape.one.tag {
            a.tag -= 1;
        }
        if a.exponent == shape.low.exponent && a.tag >= shape.low.tag {
            a.tag += 1;
        }
        if a.exponent == shape.high.exponent && a.tag >= shape.high.tag {
            a.tag += 1;
        }
        a
    }

    fn remap_two_to_one(shape: &LinkShape, addr: SummandAddress) -> SummandAddress {
        let mut a = addr;
        if a.exponent == shape.one.exponent && a.tag >= shape.one.tag {
            a.tag += 1;
        }
        if a.exponent == shape.low.exponent && a.tag > shape.low.tag {
            a.tag -= 1;
        }
        if a.exponent == shape.high.exponent && a.tag > shape.high.tag {
            a.tag -= 1;
        }
        a
    }

    /// Maps a tuple from the single-summand side to the two-summand side.
    /// Takes the tuple by value: coordinates are moved, never copied, so
    /// deep trees stay cheap to push through long iterations.
    fn apply_one_to_two(&self, shape: &LinkShape, x: PTuple) -> Result<PTuple> {
        if x.summand == shape.one {
            let mut components = x.components;
            let last = components.pop().ok_or_else(|| {
                Error::TupleMismatch("split needs at least one coordinate".into())
            })?;
            match last {
                Tree::Empty => PTuple::new(shape.low, components),
                Tree::Node(a, b) => {
                    components.push(*a);
                    components.push(*b);
                    PTuple::new(shape.high, components)
                }
            }
        } else {
            // bystander: tags above the consumed occurrence close ranks
            let addr = Self::remap_one_to_two(shape, x.summand);
            PTuple::new(addr, x.components)
        }
    }

    /// Maps a tuple from the two-summand side to the single-summand side.
    fn apply_two_to_one(&self, shape: &LinkShape, x: PTuple) -> Result<PTuple> {
        if x.summand == shape.low {
            let mut components = x.components;
            components.push(Tree::Empty);
            PTuple::new(shape.one, components)
        } else if x.summand == shape.high {
            let mut components = x.components;
            let b = components.pop().unwrap();
            let a = components.pop().unwrap();
            components.push(Tree::node(a, b));
            PTuple::new(shape.one, components)
        } else {
            let addr = Self::remap_two_to_one(shape, x.summand);
            PTuple::new(addr, x.components)
        }
    }

    /// Applies the link in the direction of the move.
    pub fn apply_forward(&self, x: &PTuple) -> Result<PTuple> {
        self.apply_forward_owned(x.clone())
    }

    /// Applies the exact inverse of `apply_forward`.
    pub fn apply_backward(&self, x: &PTuple) -> Result<PTuple> {
        self.apply_backward_owned(x.clone())
    }

    pub fn apply_forward_owned(&self, x: PTuple) -> Result<PTuple> {
        self.check_membership(&x, &self.before)?;
        let shape = self.shape();
        if shape.split {
            self.apply_one_to_two(&shape, x)
        } else {
            self.apply_two_to_one(&shape, x)
        }
    }

    pub fn apply_backward_owned(&self, x: PTuple) -> Result<PTuple> {
        self.check_membership(&x, &self.after)?;
        let shape = self.shape();
        if shape.split {
            self.apply_two_to_one(&shape, x)
        } else {
            self.apply_one_to_two(&shape, x)
        }
    }

    fn check_membership(&self, x: &PTuple, stage: &Polynomial) -> Result<()> {
        if !x.summand.valid_for(stage) {
            return Err(Error::TupleMismatch(format!(
                "{} is not a summand occurrence of {}",
                x, stage
            )));
        }
        if x.components.len() != x.summand.exponent {
            return Err(Error::TupleMismatch(format!("arity mismatch in {}", x)));
        }
        Ok(())
    }

    /// The link as a two-or-more-pair very explicit function (in the
    /// direction of the move).
    fn family(&self) -> VEFunction {
        let shape = self.shape();
        let mut pairs = Vec::new();
        let (dom, cod) = (&self.before, &self.after);
        let one_side = |addr: SummandAddress, prefix: &str| -> Vec<Pattern> {
            (1..=addr.exponent)
                .map(|i| Pattern::label(format!("{}{}", prefix, i)))
                .collect()
        };
        let (one_poly, _two_poly) = if shape.split { (dom, cod) } else { (cod, dom) };
        for addr in summands(one_poly) {
            if addr == shape.one {
                // empty-last branch
                let mut comps = one_side(shape.one, "x");
                comps.pop();
                comps.push(Pattern::Empty);
                let mut low_comps = one_side(shape.one, "x");
                low_comps.pop();
                let one_pat = PPattern { summand: shape.one, components: comps };
                let low_pat = PPattern { summand: shape.low, components: low_comps };
                // node-last branch
                let mut comps = one_side(shape.one, "x");
                comps.pop();
                comps.push(Pattern::node(Pattern::label("y1"), Pattern::label("y2")));
                let mut high_comps = one_side(shape.one, "x");
                high_comps.pop();
                high_comps.push(Pattern::label("y1"));
                high_comps.push(Pattern::label("y2"));
                let one_pat2 = PPattern { summand: shape.one, components: comps };
                let high_pat = PPattern { summand: shape.high, components: high_comps };
                if shape.split {
                    pairs.push((one_pat, low_pat));
                    pairs.push((one_pat2, high_pat));
                } else {
                    pairs.push((low_pat, one_pat));
                    pairs.push((high_pat, one_pat2));
                }
            } else {
                let comps = one_side(addr, "x");
                let other = MoveLink::remap_one_to_two(&shape, addr);
                let a = PPattern { summand: addr, components: comps.clone() };
                let b = PPattern { summand: other, components: comps };
                if shape.split {
                    pairs.push((a, b));
                } else {
                    pairs.push((b, a));
                }
            }
        }
        VEFunction { domain_poly: dom.clone(), codomain_poly: cod.clone(), pairs }
    }
}

/// A composable chain of move-induced bijections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BijectionChain {
    pub derivation: Derivation,
    links: Vec<MoveLink>,
    inverted: bool,
}

impl BijectionChain {
    pub fn domain_poly(&self) -> &Polynomial {
        if self.inverted { &self.derivation.end } else { &self.derivation.start }
    }

    pub fn codomain_poly(&self) -> &Polynomial {
        if self.inverted { &self.derivation.start } else { &self.derivation.end }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    /// Serialization: a `chain`/`chain inverted` header, then the
    /// underlying derivation text.
    pub fn render(&self) -> String {
        let header = if self.inverted { "chain inverted\n" } else { "chain\n" };
        format!("{}{}", header, self.derivation.render())
    }

    pub fn parse(text: &str) -> Result<BijectionChain> {
        let (header, rest) = text
            .split_once('\n')
            .ok_or_else(|| ParseError::new(0, "expected a chain header".into()))?;
        let inverted = match header.trim() {
            "chain" => false,
            "chain inverted" => true,
            _ => return Err(ParseError::new(0, "expected 'chain' header".into()).into()),
        };
        let d = Derivation::parse(rest)?;
        let ch = compile_derivation(&d)?;
        Ok(BijectionChain { inverted, ..ch })
    }
}

/// Interprets one move as a bijection between two tuple stages.
pub fn move_bijection(stage: &Polynomial, mv: Move) -> Result<MoveLink> {
    MoveLink::new(stage, mv)
}

/// Compiles a checked derivation into a chain of move bijections.
pub fn compile_derivation(d: &Derivation) -> Result<BijectionChain> {
    if !check_derivation(d) {
        return Err(Error::InvalidDerivation {
            index: 0,
            reason: "derivation does not replay".into(),
        });
    }
    let states = d.states()?;
    let mut links = Vec::with_capacity(d.moves.len());
    for (i, mv) in d.moves.iter().enumerate() {
        links.push(MoveLink {
            before: states[i].clone(),
            mv: *mv,
            after: states[i + 1].clone(),
        });
    }
    Ok(BijectionChain { derivation: d.clone(), links, inverted: false })
}

/// The image of `x` under the composite bijection.
pub fn apply_chain(ch: &BijectionChain, x: &PTuple) -> Result<PTuple> {
    apply_chain_owned(ch, x.clone())
}

pub fn apply_chain_owned(ch: &BijectionChain, x: PTuple) -> Result<PTuple> {
    if !x.summand.valid_for(ch.domain_poly()) || x.components.len() != x.summand.exponent {
        return Err(Error::TupleMismatch(format!(
            "{} is not a tuple of {}",
            x,
            ch.domain_poly()
        )));
    }
    let mut cur = x;
    if ch.inverted {
        for link in ch.links.iter().rev() {
            cur = link.apply_backward_owned(cur)?;
        }
    } else {
        for link in &ch.links {
            cur = link.apply_forward_owned(cur)?;
        }
    }
    Ok(cur)
}

/// The inverse chain: same links, walked in the opposite direction.
pub fn invert_chain(ch: &BijectionChain) -> BijectionChain {
    BijectionChain {
        derivation: ch.derivation.clone(),
        links: ch.links.clone(),
        inverted: !ch.inverted,
    }
}

/// Flattens a chain into a single very explicit function, by pairwise
/// unification of adjacent link families.
pub fn flatten_chain(ch: &BijectionChain) -> VEFunction {
    let mut acc = VEFunction::identity(ch.domain_poly());
    let step = |acc: VEFunction, fam: VEFunction| compose_vef(&acc, &fam);
    if ch.inverted {
        for link in ch.links.iter().rev() {
            let fam = swap_vef(&link.family());
            acc = step(acc, fam);
        }
    } else {
        for link in &ch.links {
            acc = step(acc, link.family());
        }
    }
    acc.canonicalize()
}

fn swap_vef(f: &VEFunction) -> VEFunction {
    VEFunction {
        domain_poly: f.codomain_poly.clone(),
        codomain_poly: f.domain_poly.clone(),
        pairs: f.pairs.iter().map(|(p, q)| (q.clone(), p.clone())).collect(),
    }
}

/// Composes two very explicit functions; unreachable pair combinations
/// (no overlap between middle patterns) are discarded.
pub fn compose_vef(f: &VEFunction, g: &VEFunction) -> VEFunction {
    let mut pairs = Vec::new();
    for (p, q) in &f.pairs {
        for (p2, q2) in &g.pairs {
            if q.summand != p2.summand {
                continue;
            }
            // keep label spaces disjoint before unifying
            let rename: BTreeMap<String, String> = p2
                .labels()
                .into_iter()
                .map(|l| (l.clone(), format!("g.{}", l)))
                .collect();
            let p2r = p2.rename_labels(&rename);
            let q2r = q2.rename_labels(&rename);
            if let Some((_, sub_l, sub_r)) =
                unify_components(&q.components, &p2r.components)
            {
                let dom = PPattern {
                    summand: p.summand,
                    components: p
                        .components
                        .iter()
                        .map(|c| c.apply_pattern_subst(&sub_l))
                        .collect(),
                };
                let cod = PPattern {
                    summand: q2r.summand,
                    components: q2r
                        .components
                        .iter()
                        .map(|c| c.apply_pattern_subst(&sub_r))
                        .collect(),
                };
                pairs.push((dom, cod));
            }
        }
    }
    VEFunction {
        domain_poly: f.domain_poly.clone(),
        codomain_poly: g.codomain_poly.clone(),
        pairs,
    }
}

// ---------------------------------------------------------------------
// The seven-tuple codec.
// ---------------------------------------------------------------------

/// Encodes a seven-tuple of trees as a single tree, by cases on the
/// tuple's structure down to depth four.
pub fn seven_encode(ts: &[Tree; 7]) -> Tree {
    let [t1, t2, t3, t4, t5, t6, t7] = ts;
    let spine = |base: Tree, rights: &[&Tree]| {
        rights
            .iter()
            .fold(base, |acc, r| Tree::node(acc, (*r).clone()))
    };
    if !t1.is_empty() || !t2.is_empty() || !t3.is_empty() || !t4.is_empty() {
        // Case 1: [[[[[[7,6],5],4],3],2],1]
        spine(Tree::node(t7.clone(), t6.clone()), &[t5, t4, t3, t2, t1])
    } else if let Tree::Node(t5a, t5b) = t5 {
        // Case 2: [[[[0,7],6],5a],5b]
        spine(Tree::node(Tree::Empty, t7.clone()), &[t6, t5a, t5b])
    } else if !t6.is_empty() {
        // Case 3: [[[[[6,7],0],0],0],0]
        spine(
            Tree::node(t6.clone(), t7.clone()),
            &[&Tree::Empty, &Tree::Empty, &Tree::Empty, &Tree::Empty],
        )
    } else if t7.leftward_path_len() >= 4 {
        // Case 4: 7 = [[[[7a,7b],7c],7d],7e]; output [[[[[0,7a],7b],7c],7d],7e]
        let (x1, t7e) = t7.destructure().unwrap();
        let (x2, t7d) = x1.destructure().unwrap();
        let (x3, t7c) = x2.destructure().unwrap();
        let (t7a, t7b) = x3.destructure().unwrap();
        spine(Tree::node(Tree::Empty, t7a.clone()), &[t7b, t7c, t7d, t7e])
    } else {
        // Case 5
        t7.clone()
    }
}

/// Decodes a tree back into the unique seven-tuple that encodes to it.
/// The case is recognized from the length of the leftward path.
pub fn seven_decode(u: &Tree) -> [Tree; 7] {
    let e = Tree::Empty;
    // spine nodes s1, s2, ...: the root, its left child, and so on
    let mut spine: Vec<&Tree> = Vec::new();
    let mut cur = u;
    while let Tree::Node(l, _) = cur {
        spine.push(cur);
        cur = l;
    }
    let right = |i: usize| match spine[i].destructure() {
        Some((_, r)) => r.clone(),
        None => unreachable!(),
    };
    match spine.len() {
        0..=3 => [e.clone(), e.clone(), e.clone(), e.clone(), e.clone(), e, u.clone()],
        4 => {
            // Case 2: u = [[[[0,7],6],5a],5b]
            let t7 = right(3);
            let t6 = right(2);
            let t5 = Tree::node(right(1), right(0));
            [e.clone(), e.clone(), e.clone(), e.clone(), t5, t6, t7]
        }
        5 => {
            // Case 4: u = [[[[[0,7a],7b],7c],7d],7e]
            let t7 = Tree::node(
                Tree::node(
                    Tree::node(Tree::node(right(4), right(3)), right(2)),
                    right(1),
                ),
                right(0),
            );
            [e.clone(), e.clone(), e.clone(), e.clone(), e.clone(), e, t7]
        }
        _ => {
            let case1 = (0..4).any(|i| !right(i).is_empty());
            if case1 {
                // u = [[[[[[7,6],5],4],3],2],1]
                let (t7, t6) = spine[5].destructure().unwrap();
                [
                    right(0),
                    right(1),
                    right(2),
                    right(3),
                    right(4),
                    t6.clone(),
                    t7.clone(),
                ]
            } else {
                // Case 3: u = [[[[[6,7],0],0],0],0]
                let (t6, t7) = spine[4].destructure().unwrap();
                [e.clone(), e.clone(), e.clone(), e.clone(), e.clone(), t6.clone(), t7.clone()]
            }
        }
    }
}

/// The eleven-pair pattern family realizing `seven_encode`.
pub fn seven_family() -> VEFunction {
    let pair = |d: &str, c: &str| {
        (
            parse_ppattern(d).expect("family domain pattern"),
            parse_ppattern(c).expect("family codomain pattern"),
        )
    };
    let pairs = vec![
        // Case 1, split by the first non-empty tree among t1..t4
        pair(
            "7:1:([?a,?b],?t2,?t3,?t4,?t5,?t6,?t7)",
            "1:1:([[[[[[?t7,?t6],?t5],?t4],?t3],?t2],[?a,?b]])",
        ),
        pair(
            "7:1:(0,[?a,?b],?t3,?t4,?t5,?t6,?t7)",
            "1:1:([[[[[[?t7,?t6],?t5],?t4],?t3],[?a,?b]],0])",
        ),
        pair(
            "7:1:(0,0,[?a,?b],?t4,?t5,?t6,?t7)",
            "1:1:([[[[[[?t7,?t6],?t5],?t4],[?a,?b]],0],0])",
        ),
        pair(
            "7:1:(0,0,0,[?a,?b],?t5,?t6,?t7)",
            "1:1:([[[[[[?t7,?t6],?t5],[?a,?b]],0],0],0])",
        ),
        // Case 2
        pair(
            "7:1:(0,0,0,0,[?a,?b],?t6,?t7)",
            "1:1:([[[[0,?t7],?t6],?a],?b])",
        ),
        // Case 3
        pair(
            "7:1:(0,0,0,0,0,[?a,?b],?t7)",
            "1:1:([[[[[[?a,?b],?t7],0],0],0],0])",
        ),
        // Case 4
        pair(
            "7:1:(0,0,0,0,0,0,[[[[?a,?b],?c],?d],?e])",
            "1:1:([[[[[0,?a],?b],?c],?d],?e])",
        ),
        // Case 5, split by the leftward path length of t7
        pair("7:1:(0,0,0,0,0,0,0)", "1:1:(0)"),
        pair("7:1:(0,0,0,0,0,0,[0,?a])", "1:1:([0,?a])"),
        pair("7:1:(0,0,0,0,0,0,[[0,?a],?b])", "1:1:([[0,?a],?b])"),
        pair(
            "7:1:(0,0,0,0,0,0,[[[0,?a],?b],?c])",
            "1:1:([[[0,?a],?b],?c])",
        ),
    ];
    VEFunction::new(Polynomial::monomial(7), Polynomial::monomial(1), pairs)
        .expect("the eleven-pair family is well formed")
}

// ---------------------------------------------------------------------
// Cantor-Schroeder-Bernstein bijections.
// ---------------------------------------------------------------------

/// The CSB bijection T^2 -> T: pair the trees under a root; if the result
/// is a pure leftward path, shorten it by one node.
pub fn csb_pair(t1: &Tree, t2: &Tree) -> Tree {
    let u = Tree::node(t1.clone(), t2.clone());
    if u.is_leftward_path() {
        Tree::leftward_path(u.leftward_path_len() - 1)
    } else {
        u
    }
}

/// Inverse of `csb_pair`.
pub fn csb_pair_inverse(u: &Tree) -> (Tree, Tree) {
    if u.is_leftward_path() {
        let n = u.leftward_path_len();
        (Tree::leftward_path(n), Tree::Empty)
    } else {
        let (l, r) = u.destructure().unwrap();
        (l.clone(), r.clone())
    }
}

/// Which copy of T a `csb_sum` input comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumSide {
    First,
    Second,
}

/// Exceptional shapes for `csb_sum`: 0, or a leftward spine of zero or
/// more nodes over [p,q] with p and q both non-empty.
fn csb_exceptional(t: &Tree) -> bool {
    match t {
        Tree::Empty => true,
        Tree::Node(l, r) => {
            if !l.is_empty() && !r.is_empty() {
                return true;
            }
            // a spine step: [child, 0]
            r.is_empty() && csb_spine_over_pair(l)
        }
    }
}

fn csb_spine_over_pair(t: &Tree) -> bool {
    match t {
        Tree::Empty => false,
        Tree::Node(l, r) => {
            if !l.is_empty() && !r.is_empty() {
                true
            } else {
                r.is_empty() && csb_spine_over_pair(l)
            }
        }
    }
}

/// The constructive bijection T + T -> T.
pub fn csb_sum(side: SumSide, t: &Tree) -> Tree {
    match side {
        SumSide::First => Tree::node(Tree::Empty, t.clone()),
        SumSide::Second => {
            if csb_exceptional(t) {
                t.clone()
            } else {
                Tree::node(t.clone(), Tree::Empty)
            }
        }
    }
}

/// Inverse of `csb_sum`.
pub fn csb_sum_inverse(u: &Tree) -> (SumSide, Tree) {
    if csb_exceptional(u) {
        return (SumSide::Second, u.clone());
    }
    match u {
        Tree::Empty => unreachable!("0 is exceptional"),
        Tree::Node(l, r) => {
            if l.is_empty() {
                (SumSide::First, (**r).clone())
            } else {
                debug_assert!(r.is_empty(), "non-exceptional trees have an empty side");
                (SumSide::Second, (**l).clone())
            }
        }
    }
}

// ---------------------------------------------------------------------
// Garsia-Milne iteration.
// ---------------------------------------------------------------------

/// A bijection f : A + X -> B + X, with the common part X singled out.
/// Within each exponent, the A (resp. B) occurrences take the low tags
/// and the X occurrences the high tags.
#[derive(Debug, Clone)]
pub struct GMInstance {
    pub a: Polynomial,
    pub b: Polynomial,
    pub x: Polynomial,
    pub f: GmMap,
}

#[derive(Debug, Clone)]
pub enum GmMap {
    Chain(BijectionChain),
    Family(VEFunction),
}

impl GMInstance {
    pub fn new(a: Polynomial, b: Polynomial, x: Polynomial, f: GmMap) -> Result<GMInstance> {
        let dom = a.add(&x);
        let cod = b.add(&x);
        let (fd, fc) = match &f {
            GmMap::Chain(ch) => (ch.domain_poly().clone(), ch.codomain_poly().clone()),
            GmMap::Family(v) => (v.domain_poly.clone(), v.codomain_poly.clone()),
        };
        if fd != dom || fc != cod {
            return Err(Error::TupleMismatch(format!(
                "f maps {} -> {}, expected {} -> {}",
                fd, fc, dom, cod
            )));
        }
        Ok(GMInstance { a, b, x, f })
    }

}

/// Outcome of the Garsia-Milne iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GmOutcome {
    /// Landed in B after the recorded number of applications of f.
    Done(PTuple, usize),
    /// The iteration bound was exhausted.
    NonTerminated(usize),
    /// An X-element repeated: the iteration can never leave X.
    CycleDetected(usize),
}

/// Intermediate elements can grow arbitrarily deep; only ones this small
/// are remembered for cycle detection, which keeps the iteration cheap.
/// A missed cycle degrades to NonTerminated, never to a wrong answer.
const GM_CYCLE_CACHE_SIZE: usize = 64;

/// Iterates f from an element of the A part until the image lands in B.
pub fn garsia_milne(g: &GMInstance, a: &PTuple, max_iter: usize) -> Result<GmOutcome> {
    if !a.summand.valid_for(&g.a) {
        return Err(Error::TupleMismatch(format!(
            "{} is not in the A part {}",
            a, g.a
        )));
    }
    // embed A into A + X: A occupies the low tags, so the address is unchanged
    let mut cur = a.clone();
    let mut seen: HashSet<PTuple> = HashSet::new();
    for i in 0..max_iter {
        let img = match &g.f {
            GmMap::Chain(ch) => apply_chain_owned(ch, cur)?,
            GmMap::Family(v) => v.apply(&cur)?,
        };
        let k = img.summand.exponent;
        let b_count = g.b.coeff(k);
        if img.summand.tag <= b_count {
            return Ok(GmOutcome::Done(img, i + 1));
        }
        // in X: translate the codomain X occurrence to its domain address
        let x_tag = img.summand.tag - b_count;
        let dom_tag = g.a.coeff(k) + x_tag;
        cur = PTuple::new(SummandAddress::new(k, dom_tag), img.components)?;
        if size_within(&cur, GM_CYCLE_CACHE_SIZE) && !seen.insert(cur.clone()) {
            return Ok(GmOutcome::CycleDetected(i + 1));
        }
    }
    dispose_tuple(cur);
    Ok(GmOutcome::NonTerminated(max_iter))
}

/// True when the tuple's total size is within `cap`. Walks iteratively
/// and bails out early, so deep elements cost O(cap), not O(size).
fn size_within(t: &PTuple, cap: usize) -> bool {
    let mut count = 0usize;
    let mut stack: Vec<&Tree> = t.components.iter().collect();
    while let Some(tree) = stack.pop() {
        if let Tree::Node(a, b) = tree {
            count += 1;
            if count > cap {
                return false;
            }
            stack.push(a);
            stack.push(b);
        }
    }
    true
}

/// Dismantles a possibly very deep tuple without recursive drops.
fn dispose_tuple(t: PTuple) {
    let mut stack: Vec<Tree> = t.components;
    while let Some(tree) = stack.pop() {
        if let Tree::Node(a, b) = tree {
            stack.push(*a);
            stack.push(*b);
        }
    }
}

/// Iteration bound from the environment (`TREEISO_MAX_ITER`), defaulting
/// to 100000.
pub fn default_gm_max_iter() -> usize {
    std::env::var("TREEISO_MAX_ITER")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(100_000)
}

/// The Garsia-Milne attempt from the four-step computation
/// T^7 + T^5 + T^4 + T^3 = ... = T^5 + T^4 + T^3 + T, with
/// A = T^7, B = T and X = T^5 + T^4 + T^3.
pub fn gm_seven_instance() -> GMInstance {
    let start = parse_poly("X^7 + X^5 + X^4 + X^3").unwrap();
    let mut b = crate::derivations::DerivationBuilder::new(&start);
    b.merge(5, 7).unwrap();
    b.merge(4, 6).unwrap();
    b.split(3).unwrap();
    b.split(2).unwrap();
    let d = b.finish();
    let ch = compile_derivation(&d).unwrap();
    GMInstance::new(
        Polynomial::monomial(7),
        Polynomial::monomial(1),
        parse_poly("X^5 + X^4 + X^3").unwrap(),
        GmMap::Chain(ch),
    )
    .unwrap()
}
