//! Patterns: trees with distinctly labeled leaves, tagged tuples of
//! patterns, instance matching, development to a fixed depth, the
//! standard families S_n and S_n(P), weights, and unification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::semiring::Polynomial;
use crate::tree::{Tree, TreeParser};

/// A tree in which some leaves carry distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Empty,
    Label(String),
    Node(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    pub fn node(l: Pattern, r: Pattern) -> Pattern {
        Pattern::Node(Box::new(l), Box::new(r))
    }

    pub fn label(name: impl Into<String>) -> Pattern {
        Pattern::Label(name.into())
    }

    /// Labels in left-to-right (preorder) order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Empty => {}
            Pattern::Label(n) => out.push(n.clone()),
            Pattern::Node(l, r) => {
                l.collect_labels(out);
                r.collect_labels(out);
            }
        }
    }

    pub fn num_labels(&self) -> usize {
        match self {
            Pattern::Empty => 0,
            Pattern::Label(_) => 1,
            Pattern::Node(l, r) => l.num_labels() + r.num_labels(),
        }
    }

    /// Max depth of any unlabeled interior node; 0 when there is none.
    pub fn interior_depth(&self) -> usize {
        match self {
            Pattern::Empty | Pattern::Label(_) => 0,
            Pattern::Node(l, r) => 1 + 0usize
                .max(l.interior_depth())
                .max(r.interior_depth()),
        }
    }

    /// Max depth at which a label sits; 0 when there is none.
    /// A pattern consisting of a single label has label depth 1.
    pub fn max_label_depth(&self) -> usize {
        self.max_label_depth_at(1)
    }

    fn max_label_depth_at(&self, d: usize) -> usize {
        match self {
            Pattern::Empty => 0,
            Pattern::Label(_) => d,
            Pattern::Node(l, r) => l.max_label_depth_at(d + 1).max(r.max_label_depth_at(d + 1)),
        }
    }

    /// A tree is a pattern with no labels.
    pub fn from_tree(t: &Tree) -> Pattern {
        match t {
            Tree::Empty => Pattern::Empty,
            Tree::Node(l, r) => Pattern::node(Pattern::from_tree(l), Pattern::from_tree(r)),
        }
    }

    pub fn to_tree(&self) -> Option<Tree> {
        match self {
            Pattern::Empty => Some(Tree::Empty),
            Pattern::Label(_) => None,
            Pattern::Node(l, r) => Some(Tree::node(l.to_tree()?, r.to_tree()?)),
        }
    }

    /// Renames labels to L1, L2, ... in preorder; used for canonical
    /// comparison of pattern sets that differ only in label names.
    pub fn canonical(&self) -> Pattern {
        let mut counter = 0;
        self.relabel_preorder(&mut counter)
    }

    fn relabel_preorder(&self, counter: &mut usize) -> Pattern {
        match self {
            Pattern::Empty => Pattern::Empty,
            Pattern::Label(_) => {
                *counter += 1;
                Pattern::label(format!("L{}", counter))
            }
            Pattern::Node(l, r) => {
                let l = l.relabel_preorder(counter);
                let r = r.relabel_preorder(counter);
                Pattern::node(l, r)
            }
        }
    }

    /// Applies a label renaming produced elsewhere.
    pub fn rename_labels(&self, map: &BTreeMap<String, String>) -> Pattern {
        match self {
            Pattern::Empty => Pattern::Empty,
            Pattern::Label(n) => Pattern::label(map.get(n).cloned().unwrap_or_else(|| n.clone())),
            Pattern::Node(l, r) => {
                Pattern::node(l.rename_labels(map), r.rename_labels(map))
            }
        }
    }

    /// Prefixes every label name; keeps distinctness across components.
    pub fn prefix_labels(&self, prefix: &str) -> Pattern {
        match self {
            Pattern::Empty => Pattern::Empty,
            Pattern::Label(n) => Pattern::label(format!("{}{}", prefix, n)),
            Pattern::Node(l, r) => {
                Pattern::node(l.prefix_labels(prefix), r.prefix_labels(prefix))
            }
        }
    }

    /// Replaces labels by sub-patterns.
    pub fn apply_pattern_subst(&self, sub: &BTreeMap<String, Pattern>) -> Pattern {
        match self {
            Pattern::Empty => Pattern::Empty,
            Pattern::Label(n) => sub.get(n).cloned().unwrap_or_else(|| self.clone()),
            Pattern::Node(l, r) => Pattern::node(
                l.apply_pattern_subst(sub),
                r.apply_pattern_subst(sub),
            ),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Empty => write!(f, "0"),
            Pattern::Label(n) => write!(f, "?{}", n),
            Pattern::Node(l, r) => write!(f, "[{},{}]", l, r),
        }
    }
}

/// Assignment of trees to labels.
pub type Substitution = BTreeMap<String, Tree>;

/// Parses `pat := "0" | "?" ident | "[" pat "," pat "]"`, ident `[A-Za-z0-9.]+`.
pub fn parse_pattern(text: &str) -> Result<Pattern> {
    let mut p = TreeParser::new(text);
    let pat = parse_pattern_inner(&mut p)?;
    p.expect_end()?;
    check_distinct_labels(&pat)?;
    Ok(pat)
}

pub(crate) fn parse_pattern_inner(p: &mut TreeParser) -> Result<Pattern> {
    match p.peek() {
        Some(b'0') => {
            p.pos += 1;
            Ok(Pattern::Empty)
        }
        Some(b'?') => {
            p.pos += 1;
            let ident = parse_ident(p)?;
            Ok(Pattern::label(ident))
        }
        Some(b'[') => {
            p.pos += 1;
            let l = parse_pattern_inner(p)?;
            p.expect(b',')?;
            let r = parse_pattern_inner(p)?;
            p.expect(b']')?;
            Ok(Pattern::node(l, r))
        }
        _ => Err(ParseError::new(p.pos, "expected '0', '?' or '['".into()).into()),
    }
}

fn parse_ident(p: &mut TreeParser) -> Result<String> {
    let start = p.pos;
    let mut ident = String::new();
    loop {
        match p.peek_raw() {
            Some(c) if c.is_ascii_alphanumeric() || c == b'.' => {
                ident.push(c as char);
                p.pos += 1;
            }
            _ => break,
        }
    }
    if ident.is_empty() {
        return Err(ParseError::new(start, "expected a label identifier".into()).into());
    }
    Ok(ident)
}

fn check_distinct_labels(p: &Pattern) -> Result<()> {
    let labels = p.labels();
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.clone()) {
            return Err(Error::DuplicateLabel(l));
        }
    }
    Ok(())
}

/// The instance of `p` under `s`; `s` must bind exactly the labels of `p`.
pub fn substitute(p: &Pattern, s: &Substitution) -> Result<Tree> {
    let labels: BTreeSet<String> = p.labels().into_iter().collect();
    let bound: BTreeSet<String> = s.keys().cloned().collect();
    if labels != bound {
        return Err(Error::SubstitutionDomain {
            missing: labels.difference(&bound).cloned().collect(),
            extra: bound.difference(&labels).cloned().collect(),
        });
    }
    Ok(substitute_unchecked(p, s))
}

fn substitute_unchecked(p: &Pattern, s: &Substitution) -> Tree {
    match p {
        Pattern::Empty => Tree::Empty,
        Pattern::Label(n) => s[n].clone(),
        Pattern::Node(l, r) => {
            Tree::node(substitute_unchecked(l, s), substitute_unchecked(r, s))
        }
    }
}

/// The unique substitution making `t` an instance of `p`, if any.
pub fn match_instance(p: &Pattern, t: &Tree) -> Option<Substitution> {
    let mut s = Substitution::new();
    if match_into(p, t, &mut s) {
        Some(s)
    } else {
        None
    }
}

fn match_into(p: &Pattern, t: &Tree, s: &mut Substitution) -> bool {
    match (p, t) {
        (Pattern::Empty, Tree::Empty) => true,
        (Pattern::Label(n), _) => {
            // labels are distinct, so no conflicting binding can arise
            s.insert(n.clone(), t.clone());
            true
        }
        (Pattern::Node(pl, pr), Tree::Node(tl, tr)) => {
            match_into(pl, tl, s) && match_into(pr, tr, s)
        }
        _ => false,
    }
}

/// One development step at `label`: (leaf deleted, leaf given two labeled
/// children `label.l` / `label.r`).
pub fn develop_once(p: &Pattern, label: &str) -> Result<(Pattern, Pattern)> {
    if !p.labels().iter().any(|l| l == label) {
        return Err(Error::UnknownLabel(label.to_string()));
    }
    let deleted = replace_label(p, label, &Pattern::Empty);
    let expanded = replace_label(
        p,
        label,
        &Pattern::node(
            Pattern::label(format!("{}.l", label)),
            Pattern::label(format!("{}.r", label)),
        ),
    );
    Ok((deleted, expanded))
}

fn replace_label(p: &Pattern, label: &str, with: &Pattern) -> Pattern {
    match p {
        Pattern::Empty => Pattern::Empty,
        Pattern::Label(n) if n == label => with.clone(),
        Pattern::Label(_) => p.clone(),
        Pattern::Node(l, r) => Pattern::node(
            replace_label(l, label, with),
            replace_label(r, label, with),
        ),
    }
}

/// Develops `p` until every label sits at depth n+1; the result is a set
/// of patterns with pairwise-disjoint instance sets whose union is the
/// instance set of `p`. Labels are developed in leftmost-outermost order.
pub fn develop_to_depth(p: &Pattern, n: usize) -> Result<Vec<Pattern>> {
    if p.interior_depth() > n {
        return Err(Error::DevelopPrecondition(format!(
            "unlabeled structure of {} reaches depth {} > {}",
            p,
            p.interior_depth(),
            n
        )));
    }
    if p.max_label_depth() > n + 1 {
        return Err(Error::DevelopPrecondition(format!(
            "label in {} sits at depth {} > {}",
            p,
            p.max_label_depth(),
            n + 1
        )));
    }
    let mut out = Vec::new();
    develop_rec(p.clone(), n, &mut out);
    Ok(out)
}

fn develop_rec(p: Pattern, n: usize, out: &mut Vec<Pattern>) {
    match shallow_label(&p, n, 1) {
        None => out.push(p),
        Some(label) => {
            let (deleted, expanded) = develop_once(&p, &label).expect("label just found");
            develop_rec(deleted, n, out);
            develop_rec(expanded, n, out);
        }
    }
}

/// First (preorder) label at depth <= n.
fn shallow_label(p: &Pattern, n: usize, d: usize) -> Option<String> {
    match p {
        Pattern::Empty => None,
        Pattern::Label(name) => {
            if d <= n {
                Some(name.clone())
            } else {
                None
            }
        }
        Pattern::Node(l, r) => {
            shallow_label(l, n, d + 1).or_else(|| shallow_label(r, n, d + 1))
        }
    }
}

/// The standard family S_n, obtained by developing a single label.
pub fn standard_patterns(n: usize) -> Vec<Pattern> {
    develop_to_depth(&Pattern::label("a"), n).expect("single label always developable")
}

/// Address of one summand occurrence of a polynomial: exponent k and a
/// 1-based tag in the range 1..=c_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SummandAddress {
    pub exponent: usize,
    pub tag: usize,
}

impl SummandAddress {
    pub fn new(exponent: usize, tag: usize) -> Self {
        SummandAddress { exponent, tag }
    }

    pub fn valid_for(&self, p: &Polynomial) -> bool {
        self.tag >= 1 && self.tag <= p.coeff(self.exponent)
    }
}

/// All summand occurrences of `p`, in canonical order (decreasing
/// exponent, increasing tag).
pub fn summands(p: &Polynomial) -> Vec<SummandAddress> {
    let mut out = Vec::new();
    let exps = p.exponents();
    let mut i = 0;
    while i < exps.len() {
        let e = exps[i];
        let c = exps[i..].iter().take_while(|&&x| x == e).count();
        for tag in 1..=c {
            out.push(SummandAddress::new(e, tag));
        }
        i += c;
    }
    out
}

/// A tagged tuple of patterns with globally distinct labels: one summand
/// shape of P(T).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PPattern {
    pub summand: SummandAddress,
    pub components: Vec<Pattern>,
}

impl PPattern {
    pub fn new(summand: SummandAddress, components: Vec<Pattern>) -> Result<Self> {
        if components.len() != summand.exponent {
            return Err(Error::TupleMismatch(format!(
                "{} components for exponent {}",
                components.len(),
                summand.exponent
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &components {
            for l in c.labels() {
                if !seen.insert(l.clone()) {
                    return Err(Error::DuplicateLabel(l));
                }
            }
        }
        Ok(PPattern { summand, components })
    }

    pub fn labels(&self) -> Vec<String> {
        self.components.iter().flat_map(|c| c.labels()).collect()
    }

    pub fn num_labels(&self) -> usize {
        self.components.iter().map(|c| c.num_labels()).sum()
    }

    pub fn interior_depth(&self) -> usize {
        self.components.iter().map(|c| c.interior_depth()).max().unwrap_or(0)
    }

    pub fn max_label_depth(&self) -> usize {
        self.components.iter().map(|c| c.max_label_depth()).max().unwrap_or(0)
    }

    /// Canonical relabeling across all components, in order.
    pub fn canonical(&self) -> PPattern {
        let mut counter = 0;
        let components = self
            .components
            .iter()
            .map(|c| c.relabel_preorder(&mut counter))
            .collect();
        PPattern { summand: self.summand, components }
    }

    pub fn rename_labels(&self, map: &BTreeMap<String, String>) -> PPattern {
        PPattern {
            summand: self.summand,
            components: self.components.iter().map(|c| c.rename_labels(map)).collect(),
        }
    }
}

impl fmt::Display for PPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:(", self.summand.exponent, self.summand.tag)?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

/// A tagged tuple of trees: one element of P(T).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PTuple {
    pub summand: SummandAddress,
    pub components: Vec<Tree>,
}

impl PTuple {
    pub fn new(summand: SummandAddress, components: Vec<Tree>) -> Result<Self> {
        if components.len() != summand.exponent {
            return Err(Error::TupleMismatch(format!(
                "{} components for exponent {}",
                components.len(),
                summand.exponent
            )));
        }
        Ok(PTuple { summand, components })
    }

    pub fn total_size(&self) -> usize {
        self.components.iter().map(|t| t.size()).sum()
    }
}

impl fmt::Display for PTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:(", self.summand.exponent, self.summand.tag)?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

/// Parses `k:τ:(x,...,x)` with tree components.
pub fn parse_ptuple(text: &str) -> Result<PTuple> {
    let (summand, rest) = parse_summand_header(text)?;
    let mut p = TreeParser::new(rest);
    p.expect(b'(')?;
    let mut components = Vec::new();
    if p.peek() != Some(b')') {
        loop {
            components.push(p.parse()?);
            if p.peek() == Some(b',') {
                p.pos += 1;
            } else {
                break;
            }
        }
    }
    p.expect(b')')?;
    p.expect_end()?;
    PTuple::new(summand, components)
}

/// Parses `k:τ:(pat,...,pat)`.
pub fn parse_ppattern(text: &str) -> Result<PPattern> {
    let (summand, rest) = parse_summand_header(text)?;
    let mut p = TreeParser::new(rest);
    p.expect(b'(')?;
    let mut components = Vec::new();
    if p.peek() != Some(b')') {
        loop {
            components.push(parse_pattern_inner(&mut p)?);
            if p.peek() == Some(b',') {
                p.pos += 1;
            } else {
                break;
            }
        }
    }
    p.expect(b')')?;
    p.expect_end()?;
    PPattern::new(summand, components)
}

fn parse_summand_header(text: &str) -> Result<(SummandAddress, &str)> {
    let mut parts = text.splitn(3, ':');
    let k = parts
        .next()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| ParseError::new(0, "expected exponent before ':'".into()))?;
    let tag = parts
        .next()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| ParseError::new(0, "expected tag before second ':'".into()))?;
    let rest = parts
        .next()
        .ok_or_else(|| ParseError::new(text.len(), "expected '(...)' component list".into()))?;
    Ok((SummandAddress::new(k, tag), rest))
}

/// Does `t` instantiate `pp`? Returns the unique substitution if so.
pub fn match_ptuple(pp: &PPattern, t: &PTuple) -> Option<Substitution> {
    if pp.summand != t.summand {
        return None;
    }
    let mut s = Substitution::new();
    for (c, tc) in pp.components.iter().zip(&t.components) {
        if !match_into(c, tc, &mut s) {
            return None;
        }
    }
    Some(s)
}

/// The instance of `pp` under `s`.
pub fn substitute_ptuple(pp: &PPattern, s: &Substitution) -> Result<PTuple> {
    let labels: BTreeSet<String> = pp.labels().into_iter().collect();
    let bound: BTreeSet<String> = s.keys().cloned().collect();
    if labels != bound {
        return Err(Error::SubstitutionDomain {
            missing: labels.difference(&bound).cloned().collect(),
            extra: bound.difference(&labels).cloned().collect(),
        });
    }
    Ok(PTuple {
        summand: pp.summand,
        components: pp.components.iter().map(|c| substitute_unchecked(c, s)).collect(),
    })
}

/// S_n(P): all P-patterns whose component patterns lie in S_n.
/// Every P-tuple is an instance of exactly one member.
pub fn standard_family(p: &Polynomial, n: usize) -> Vec<PPattern> {
    let base = standard_patterns(n);
    let mut out = Vec::new();
    for addr in summands(p) {
        let k = addr.exponent;
        // indices into base, odometer order
        let mut idx = vec![0usize; k];
        loop {
            let components: Vec<Pattern> = idx
                .iter()
                .enumerate()
                .map(|(j, &i)| base[i].prefix_labels(&format!("c{}.", j + 1)))
                .collect();
            out.push(PPattern { summand: addr, components });
            // advance odometer
            let mut j = k;
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < base.len() {
                    break;
                }
                idx[j] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out
}

/// Weight of a pattern: X^(number of labels).
pub fn weight_pattern(p: &Pattern) -> Polynomial {
    Polynomial::monomial(p.num_labels())
}

/// Weight of a P-pattern: X^(total number of labels).
pub fn weight_ppattern(p: &PPattern) -> Polynomial {
    Polynomial::monomial(p.num_labels())
}

/// Weight of a set of patterns: sum of member weights.
pub fn weight_pattern_set<'a>(ps: impl IntoIterator<Item = &'a Pattern>) -> Polynomial {
    ps.into_iter()
        .fold(Polynomial::zero(), |acc, p| acc.add(&weight_pattern(p)))
}

/// Weight of a set of P-patterns.
pub fn weight_ppattern_set<'a>(ps: impl IntoIterator<Item = &'a PPattern>) -> Polynomial {
    ps.into_iter()
        .fold(Polynomial::zero(), |acc, p| acc.add(&weight_ppattern(p)))
}

/// Outcome of unifying two patterns with disjoint label spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unification {
    /// Most general common instance.
    pub unifier: Pattern,
    /// Maps each label of the left pattern to a sub-pattern of `unifier`.
    pub sub_left: BTreeMap<String, Pattern>,
    /// Maps each label of the right pattern to a sub-pattern of `unifier`.
    pub sub_right: BTreeMap<String, Pattern>,
}

/// Most general common instance of two linear patterns, or None when no
/// tree instantiates both. Patterns are linear, so no occurs check is
/// needed.
pub fn unify_patterns(p: &Pattern, q: &Pattern) -> Option<Unification> {
    let mut fresh = FreshLabels::avoiding([p, q]);
    let mut sub_left = BTreeMap::new();
    let mut sub_right = BTreeMap::new();
    let unifier = unify_rec(p, q, &mut sub_left, &mut sub_right, &mut fresh)?;
    Some(Unification { unifier, sub_left, sub_right })
}

pub(crate) struct FreshLabels {
    taken: BTreeSet<String>,
    counter: usize,
}

impl FreshLabels {
    pub(crate) fn avoiding<'a>(ps: impl IntoIterator<Item = &'a Pattern>) -> Self {
        let taken = ps.into_iter().flat_map(|p| p.labels()).collect();
        FreshLabels { taken, counter: 0 }
    }

    pub(crate) fn next(&mut self) -> String {
        loop {
            self.counter += 1;
            let name = format!("f{}", self.counter);
            if !self.taken.contains(&name) {
                self.taken.insert(name.clone());
                return name;
            }
        }
    }
}

fn unify_rec(
    p: &Pattern,
    q: &Pattern,
    sub_left: &mut BTreeMap<String, Pattern>,
    sub_right: &mut BTreeMap<String, Pattern>,
    fresh: &mut FreshLabels,
) -> Option<Pattern> {
    match (p, q) {
        (Pattern::Label(a), Pattern::Label(b)) => {
            let u = Pattern::label(fresh.next());
            sub_left.insert(a.clone(), u.clone());
            sub_right.insert(b.clone(), u.clone());
            Some(u)
        }
        (Pattern::Label(a), _) => {
            sub_left.insert(a.clone(), q.clone());
            for b in q.labels() {
                sub_right.insert(b.clone(), Pattern::label(b));
            }
            Some(q.clone())
        }
        (_, Pattern::Label(b)) => {
            sub_right.insert(b.clone(), p.clone());
            for a in p.labels() {
                sub_left.insert(a.clone(), Pattern::label(a));
            }
            Some(p.clone())
        }
        (Pattern::Empty, Pattern::Empty) => Some(Pattern::Empty),
        (Pattern::Node(l1, r1), Pattern::Node(l2, r2)) => {
            let l = unify_rec(l1, l2, sub_left, sub_right, fresh)?;
            let r = unify_rec(r1, r2, sub_left, sub_right, fresh)?;
            Some(Pattern::node(l, r))
        }
        _ => None,
    }
}

/// Unifies two equal-length component lists simultaneously, sharing one
/// fresh-label supply so the combined unifier stays linear. Returns the
/// componentwise unifiers and the two combined substitutions.
pub fn unify_components(
    left: &[Pattern],
    right: &[Pattern],
) -> Option<(Vec<Pattern>, BTreeMap<String, Pattern>, BTreeMap<String, Pattern>)> {
    if left.len() != right.len() {
        return None;
    }
    let mut fresh = FreshLabels::avoiding(left.iter().chain(right.iter()));
    let mut sub_left = BTreeMap::new();
    let mut sub_right = BTreeMap::new();
    let mut unifiers = Vec::with_capacity(left.len());
    for (p, q) in left.iter().zip(right.iter()) {
        unifiers.push(unify_rec(p, q, &mut sub_left, &mut sub_right, &mut fresh)?);
    }
    Some((unifiers, sub_left, sub_right))
}

/// Patterns in the liberalized sense: labels may repeat. Kept apart from
/// the strict type because a repeated-label family can never be part of a
/// bijection; nothing in the compilation pipeline accepts this type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedPattern(pub Pattern);

impl RelaxedPattern {
    /// Parses the same grammar but allows duplicate labels.
    pub fn parse(text: &str) -> Result<RelaxedPattern> {
        let mut p = TreeParser::new(text);
        let pat = parse_pattern_inner(&mut p)?;
        p.expect_end()?;
        Ok(RelaxedPattern(pat))
    }

    /// Instance formation; repeated labels all receive the same tree.
    pub fn substitute(&self, s: &Substitution) -> Result<Tree> {
        let labels: BTreeSet<String> = self.0.labels().into_iter().collect();
        let bound: BTreeSet<String> = s.keys().cloned().collect();
        if labels != bound {
            return Err(Error::SubstitutionDomain {
                missing: labels.difference(&bound).cloned().collect(),
                extra: bound.difference(&labels).cloned().collect(),
            });
        }
        Ok(substitute_unchecked(&self.0, s))
    }
}

/// All P-tuples of total size <= `size_bound`, in canonical order.
pub fn enumerate_ptuples(p: &Polynomial, size_bound: usize) -> Vec<PTuple> {
    use crate::tree::enumerate_trees_up_to;
    let pool = enumerate_trees_up_to(size_bound);
    let mut out = Vec::new();
    for addr in summands(p) {
        let mut components = Vec::new();
        enum_tuples(&pool, addr.exponent, size_bound, &mut components, &mut |cs| {
            out.push(PTuple { summand: addr, components: cs.to_vec() });
        });
    }
    out
}

fn enum_tuples(
    pool: &[Tree],
    k: usize,
    budget: usize,
    acc: &mut Vec<Tree>,
    emit: &mut impl FnMut(&[Tree]),
) {
    if k == 0 {
        emit(acc);
        return;
    }
    for t in pool {
        let s = t.size();
        if s > budget {
            continue;
        }
        acc.push(t.clone());
        enum_tuples(pool, k - 1, budget - s, acc, emit);
        acc.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::{self, decide_equiv, normal_form, parse_poly};
    use crate::tree::{enumerate_trees_up_to, parse_tree};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pat(s: &str) -> Pattern {
        parse_pattern(s).unwrap()
    }

    fn tree(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    #[test]
    fn parse_pattern_basic() {
        assert_eq!(pat("?a"), Pattern::label("a"));
        assert_eq!(pat("[?a,0]"), Pattern::node(Pattern::label("a"), Pattern::Empty));
        assert!(matches!(
            parse_pattern("[?a,?a]"),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(parse_pattern("[?a,?b] ").is_ok());
        assert!(parse_pattern("?").is_err());
        assert_eq!(pat("[?x.l,?x.r]").labels(), vec!["x.l", "x.r"]);
    }

    #[test]
    fn substitute_examples() {
        let mut s = Substitution::new();
        s.insert("a".into(), tree("[0,0]"));
        assert_eq!(substitute(&pat("?a"), &s).unwrap(), tree("[0,0]"));

        let mut s = Substitution::new();
        s.insert("a".into(), tree("0"));
        assert_eq!(substitute(&pat("[?a,0]"), &s).unwrap(), tree("[0,0]"));

        let mut s = Substitution::new();
        s.insert("a".into(), tree("0"));
        s.insert("b".into(), tree("[0,0]"));
        assert_eq!(substitute(&pat("[?a,?b]"), &s).unwrap(), tree("[0,[0,0]]"));

        // wrong domain
        let s = Substitution::new();
        assert!(substitute(&pat("?a"), &s).is_err());
        let mut s = Substitution::new();
        s.insert("a".into(), tree("0"));
        s.insert("zz".into(), tree("0"));
        assert!(substitute(&pat("?a"), &s).is_err());
    }

    #[test]
    fn match_examples() {
        let s = match_instance(&pat("?a"), &tree("[0,0]")).unwrap();
        assert_eq!(s["a"], tree("[0,0]"));
        assert!(match_instance(&pat("[?a,0]"), &tree("[0,[0,0]]")).is_none());
        let s = match_instance(&pat("[[?a,?b],0]"), &tree("[[0,[0,0]],0]")).unwrap();
        assert_eq!(s["a"], tree("0"));
        assert_eq!(s["b"], tree("[0,0]"));
    }

    #[test]
    fn match_then_substitute_roundtrip() {
        let pats: Vec<Pattern> = ["?a", "[?a,?b]", "[[?a,0],?b]", "[0,[?a,[?b,?c]]]"]
            .iter()
            .map(|s| pat(s))
            .collect();
        for p in &pats {
            for t in enumerate_trees_up_to(6) {
                if let Some(s) = match_instance(p, &t) {
                    assert_eq!(substitute(p, &s).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn develop_once_examples() {
        let (d, e) = develop_once(&pat("?a"), "a").unwrap();
        assert_eq!(d, Pattern::Empty);
        assert_eq!(e.canonical(), pat("[?L1,?L2]").canonical());

        let (d, e) = develop_once(&pat("[?x,0]"), "x").unwrap();
        assert_eq!(d, pat("[0,0]"));
        assert_eq!(e.canonical(), pat("[[?L1,?L2],0]").canonical());

        assert!(develop_once(&pat("?a"), "zz").is_err());

        // weight preserved modulo X = 1 + X^2
        let w_before = weight_pattern(&pat("?x"));
        let w_after = weight_pattern(&d).add(&weight_pattern(&e));
        assert!(decide_equiv(&w_before, &w_after));
    }

    #[test]
    fn develop_to_depth_families() {
        let s1 = develop_to_depth(&pat("?a"), 1).unwrap();
        let canon: Vec<Pattern> = s1.iter().map(|p| p.canonical()).collect();
        assert_eq!(canon, vec![pat("0"), pat("[?L1,?L2]").canonical()]);

        assert_eq!(develop_to_depth(&pat("?a"), 2).unwrap().len(), 5);
        assert_eq!(develop_to_depth(&pat("0"), 3).unwrap(), vec![pat("0")]);

        // |S_n| follows D(0)=1, D(n+1)=1+D(n)^2
        let mut d = 1usize;
        for n in 0..=3 {
            assert_eq!(standard_patterns(n).len(), d, "n={}", n);
            d = 1 + d * d;
        }

        // precondition: unlabeled structure too deep
        assert!(develop_to_depth(&pat("[[0,0],0]"), 1).is_err());
    }

    #[test]
    fn every_tree_matches_exactly_one_standard_pattern() {
        for n in 0..=3 {
            let family = standard_patterns(n);
            for t in enumerate_trees_up_to(6) {
                let matches = family
                    .iter()
                    .filter(|p| match_instance(p, &t).is_some())
                    .count();
                assert_eq!(matches, 1, "tree {} at n={}", t, n);
            }
        }
    }

    #[test]
    fn development_preserves_weight_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let p = random_pattern(&mut rng, 3, &mut 0);
            let labels = p.labels();
            if labels.is_empty() {
                continue;
            }
            let l = &labels[rng.gen_range(0..labels.len())];
            let (d, e) = develop_once(&p, l).unwrap();
            let before = normal_form(&weight_pattern(&p));
            let after = normal_form(&weight_pattern(&d).add(&weight_pattern(&e)));
            assert_eq!(before, after, "pattern {}", p);
        }
    }

    pub(crate) fn random_pattern(
        rng: &mut impl Rng,
        max_depth: usize,
        counter: &mut usize,
    ) -> Pattern {
        if max_depth == 0 {
            if rng.gen_bool(0.5) {
                *counter += 1;
                Pattern::label(format!("v{}", counter))
            } else {
                Pattern::Empty
            }
        } else {
            match rng.gen_range(0..4) {
                0 => Pattern::Empty,
                1 => {
                    *counter += 1;
                    Pattern::label(format!("v{}", counter))
                }
                _ => {
                    let l = random_pattern(rng, max_depth - 1, counter);
                    let r = random_pattern(rng, max_depth - 1, counter);
                    Pattern::node(l, r)
                }
            }
        }
    }

    #[test]
    fn standard_family_examples() {
        let f = standard_family(&parse_poly("X").unwrap(), 0);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].summand, SummandAddress::new(1, 1));
        assert_eq!(f[0].components[0].num_labels(), 1);

        let f = standard_family(&parse_poly("X^2").unwrap(), 1);
        assert_eq!(f.len(), 4);

        let f = standard_family(&parse_poly("2").unwrap(), 3);
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|pp| pp.components.is_empty()));

        // weights: S_n(P) has weight algebraically equivalent to P
        for (ps, n) in [("X", 2), ("1 + X^2", 1), ("2X + 1", 2)] {
            let p = parse_poly(ps).unwrap();
            let f = standard_family(&p, n);
            assert!(decide_equiv(&weight_ppattern_set(&f), &p), "P={}", ps);
        }
        let s1 = standard_patterns(1);
        assert!(decide_equiv(
            &weight_pattern_set(&s1),
            &parse_poly("X").unwrap()
        ));
        assert_eq!(weight_pattern_set(&s1), parse_poly("1 + X^2").unwrap());
    }

    #[test]
    fn every_ptuple_matches_exactly_one_standard_family_member() {
        let p = parse_poly("X^2 + 2X + 1").unwrap();
        for n in 0..=2 {
            let family = standard_family(&p, n);
            for t in enumerate_ptuples(&p, 3) {
                let matches = family
                    .iter()
                    .filter(|pp| match_ptuple(pp, &t).is_some())
                    .count();
                assert_eq!(matches, 1, "tuple {} at n={}", t, n);
            }
        }
    }

    #[test]
    fn unify_examples() {
        let u = unify_patterns(&pat("?a"), &pat("[?b,0]")).unwrap();
        assert_eq!(u.unifier, pat("[?b,0]"));
        assert_eq!(u.sub_left["a"], pat("[?b,0]"));
        assert_eq!(u.sub_right["b"], Pattern::label("b"));

        assert!(unify_patterns(&pat("0"), &pat("[?b,?c]")).is_none());

        let u = unify_patterns(&pat("?a"), &pat("?b")).unwrap();
        assert!(matches!(u.unifier, Pattern::Label(_)));
        assert_eq!(u.sub_left["a"], u.unifier);
        assert_eq!(u.sub_right["b"], u.unifier);
        // fresh: not one of the input labels
        assert_ne!(u.unifier, Pattern::label("a"));
        assert_ne!(u.unifier, Pattern::label("b"));
    }

    #[test]
    fn unify_agrees_with_brute_force_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..300 {
            let mut c1 = 0;
            let p = random_pattern(&mut rng, 2, &mut c1).prefix_labels("p.");
            let mut c2 = 0;
            let q = random_pattern(&mut rng, 2, &mut c2).prefix_labels("q.");
            let bound = p.num_labels() + q.num_labels() + 2
                + p.interior_depth().max(q.interior_depth());
            let brute = enumerate_trees_up_to(bound.min(6)).into_iter().any(|t| {
                match_instance(&p, &t).is_some() && match_instance(&q, &t).is_some()
            });
            let unified = unify_patterns(&p, &q).is_some();
            assert_eq!(unified, brute, "p={} q={}", p, q);
        }
    }

    #[test]
    fn unifier_substitutions_reproduce_unifier() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..300 {
            let mut c1 = 0;
            let p = random_pattern(&mut rng, 3, &mut c1).prefix_labels("p.");
            let mut c2 = 0;
            let q = random_pattern(&mut rng, 3, &mut c2).prefix_labels("q.");
            if let Some(u) = unify_patterns(&p, &q) {
                assert_eq!(p.apply_pattern_subst(&u.sub_left), u.unifier);
                assert_eq!(q.apply_pattern_subst(&u.sub_right), u.unifier);
            }
        }
    }

    #[test]
    fn ptuple_text_roundtrip() {
        for s in ["1:1:([0,0])", "2:3:(0,[0,[0,0]])", "0:2:()"] {
            assert_eq!(parse_ptuple(s).unwrap().to_string(), s);
        }
        for s in ["1:1:(?a)", "2:1:([?a,0],?b)", "0:1:()"] {
            assert_eq!(parse_ppattern(s).unwrap().to_string(), s);
        }
        assert!(parse_ppattern("2:1:(?a,?a)").is_err());
        assert!(parse_ptuple("2:1:(0)").is_err());
    }

    #[test]
    fn relaxed_patterns_allow_repeats() {
        let r = RelaxedPattern::parse("[?a,?a]").unwrap();
        let mut s = Substitution::new();
        s.insert("a".into(), tree("[0,0]"));
        assert_eq!(r.substitute(&s).unwrap(), tree("[[0,0],[0,0]]"));
        // the strict parser rejects the same text
        assert!(parse_pattern("[?a,?a]").is_err());
    }

    #[test]
    fn summand_enumeration() {
        let p = semiring::parse_poly("X^2 + 2X + 1").unwrap();
        let s = summands(&p);
        assert_eq!(
            s,
            vec![
                SummandAddress::new(2, 1),
                SummandAddress::new(1, 1),
                SummandAddress::new(1, 2),
                SummandAddress::new(0, 1),
            ]
        );
    }
}
