//! Finitely presented algebras over the signature {0, [-,-]} and the
//! simplification showing every consistent presentation is free.
//!
//! Simplification repeatedly deletes trivial equations, reports a clash
//! (0 = [t1,t2]) or an occurs failure (a = t with a inside t), eliminates
//! generators, and decomposes pair equations, until no equations remain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{ParseError, Result};
use crate::tree::TreeParser;

/// A variable-free term over generators, 0 and [-,-].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundTerm {
    Zero,
    Gen(String),
    Pair(Box<GroundTerm>, Box<GroundTerm>),
}

impl GroundTerm {
    pub fn pair(l: GroundTerm, r: GroundTerm) -> GroundTerm {
        GroundTerm::Pair(Box::new(l), Box::new(r))
    }

    pub fn gen(name: impl Into<String>) -> GroundTerm {
        GroundTerm::Gen(name.into())
    }

    /// Total number of symbols, the termination measure component.
    pub fn len(&self) -> usize {
        match self {
            GroundTerm::Zero | GroundTerm::Gen(_) => 1,
            GroundTerm::Pair(l, r) => 1 + l.len() + r.len(),
        }
    }

    pub fn contains_gen(&self, name: &str) -> bool {
        match self {
            GroundTerm::Zero => false,
            GroundTerm::Gen(g) => g == name,
            GroundTerm::Pair(l, r) => l.contains_gen(name) || r.contains_gen(name),
        }
    }

    pub fn generators(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_gens(&mut out);
        out
    }

    fn collect_gens(&self, out: &mut BTreeSet<String>) {
        match self {
            GroundTerm::Zero => {}
            GroundTerm::Gen(g) => {
                out.insert(g.clone());
            }
            GroundTerm::Pair(l, r) => {
                l.collect_gens(out);
                r.collect_gens(out);
            }
        }
    }

    pub fn substitute_gen(&self, name: &str, with: &GroundTerm) -> GroundTerm {
        match self {
            GroundTerm::Zero => GroundTerm::Zero,
            GroundTerm::Gen(g) if g == name => with.clone(),
            GroundTerm::Gen(_) => self.clone(),
            GroundTerm::Pair(l, r) => GroundTerm::pair(
                l.substitute_gen(name, with),
                r.substitute_gen(name, with),
            ),
        }
    }

    pub fn substitute_map(&self, map: &BTreeMap<String, GroundTerm>) -> GroundTerm {
        match self {
            GroundTerm::Zero => GroundTerm::Zero,
            GroundTerm::Gen(g) => map.get(g).cloned().unwrap_or_else(|| self.clone()),
            GroundTerm::Pair(l, r) => {
                GroundTerm::pair(l.substitute_map(map), r.substitute_map(map))
            }
        }
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTerm::Zero => write!(f, "0"),
            GroundTerm::Gen(g) => write!(f, "{}", g),
            GroundTerm::Pair(l, r) => write!(f, "[{},{}]", l, r),
        }
    }
}

/// A finite presentation ⟨A | E⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub generators: BTreeSet<String>,
    pub equations: Vec<(GroundTerm, GroundTerm)>,
}

impl Presentation {
    pub fn new(
        generators: impl IntoIterator<Item = String>,
        equations: Vec<(GroundTerm, GroundTerm)>,
    ) -> Result<Presentation> {
        let generators: BTreeSet<String> = generators.into_iter().collect();
        for (l, r) in &equations {
            for g in l.generators().union(&r.generators()) {
                if !generators.contains(g) {
                    return Err(crate::error::Error::Other(format!(
                        "equation mentions unknown generator '{}'",
                        g
                    )));
                }
            }
        }
        Ok(Presentation { generators, equations })
    }

    /// Parses `gens: a b c` followed by `term = term` lines.
    pub fn parse(text: &str) -> Result<Presentation> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ParseError::new(0, "expected 'gens:' header".into()))?;
        let gens_text = header
            .trim()
            .strip_prefix("gens:")
            .ok_or_else(|| ParseError::new(0, "expected 'gens:' header".into()))?;
        let generators: Vec<String> =
            gens_text.split_whitespace().map(|s| s.to_string()).collect();
        let mut equations = Vec::new();
        for line in lines {
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| ParseError::new(0, format!("expected 'term = term': {}", line)))?;
            equations.push((parse_term(lhs)?, parse_term(rhs)?));
        }
        Presentation::new(generators, equations)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gens:")?;
        for g in &self.generators {
            write!(f, " {}", g)?;
        }
        writeln!(f)?;
        for (l, r) in &self.equations {
            writeln!(f, "{} = {}", l, r)?;
        }
        Ok(())
    }
}

/// Parses `term := "0" | ident | "[" term "," term "]"`.
pub fn parse_term(text: &str) -> Result<GroundTerm> {
    let mut p = TreeParser::new(text);
    let t = parse_term_inner(&mut p)?;
    p.expect_end()?;
    Ok(t)
}

fn parse_term_inner(p: &mut TreeParser) -> Result<GroundTerm> {
    match p.peek() {
        Some(b'0') => {
            p.pos += 1;
            Ok(GroundTerm::Zero)
        }
        Some(b'[') => {
            p.pos += 1;
            let l = parse_term_inner(p)?;
            p.expect(b',')?;
            let r = parse_term_inner(p)?;
            p.expect(b']')?;
            Ok(GroundTerm::pair(l, r))
        }
        Some(c) if c.is_ascii_alphanumeric() => {
            let mut name = String::new();
            while let Some(c) = p.peek_raw() {
                if c.is_ascii_alphanumeric() || c == b'_' {
                    name.push(c as char);
                    p.pos += 1;
                } else {
                    break;
                }
            }
            Ok(GroundTerm::Gen(name))
        }
        _ => Err(ParseError::new(p.pos, "expected '0', '[' or a generator".into()).into()),
    }
}

/// Which axiom an inconsistent presentation violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolatedAxiom {
    /// Axiom (1): 0 = [x,y] is false.
    Clash,
    /// Axiom schema (5): no term equals a proper subterm of itself.
    Occurs,
}

impl ViolatedAxiom {
    pub fn number(self) -> u8 {
        match self {
            ViolatedAxiom::Clash => 1,
            ViolatedAxiom::Occurs => 5,
        }
    }
}

/// Result of simplifying a presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplifyResult {
    /// Isomorphic to the free algebra on `basis`; `elimination` rewrites
    /// every removed generator to a term over the basis.
    Free {
        basis: BTreeSet<String>,
        elimination: BTreeMap<String, GroundTerm>,
    },
    Inconsistent {
        witness: (GroundTerm, GroundTerm),
        axiom: ViolatedAxiom,
    },
}

/// Systematically simplifies ⟨A | E⟩ to a free presentation or reports
/// the inconsistent equation. Equation selection is deterministic:
/// smallest total length first, ties by rendered text.
pub fn simplify(pres: &Presentation) -> SimplifyResult {
    let mut gens = pres.generators.clone();
    let mut eqs = pres.equations.clone();
    let mut elimination: BTreeMap<String, GroundTerm> = BTreeMap::new();

    while !eqs.is_empty() {
        // deterministic pick
        let idx = (0..eqs.len())
            .min_by_key(|&i| {
                let (l, r) = &eqs[i];
                (l.len() + r.len(), format!("{} = {}", l, r))
            })
            .unwrap();
        let (lhs, rhs) = eqs.remove(idx);

        if lhs == rhs {
            continue;
        }
        match (&lhs, &rhs) {
            (GroundTerm::Zero, GroundTerm::Pair(..)) | (GroundTerm::Pair(..), GroundTerm::Zero) => {
                return SimplifyResult::Inconsistent {
                    witness: (lhs, rhs),
                    axiom: ViolatedAxiom::Clash,
                };
            }
            (GroundTerm::Gen(a), t) | (t, GroundTerm::Gen(a)) => {
                let (a, t) = (a.clone(), (*t).clone());
                if t.contains_gen(&a) {
                    return SimplifyResult::Inconsistent {
                        witness: (GroundTerm::Gen(a), t),
                        axiom: ViolatedAxiom::Occurs,
                    };
                }
                gens.remove(&a);
                for (l, r) in eqs.iter_mut() {
                    *l = l.substitute_gen(&a, &t);
                    *r = r.substitute_gen(&a, &t);
                }
                for v in elimination.values_mut() {
                    *v = v.substitute_gen(&a, &t);
                }
                elimination.insert(a, t);
            }
            (GroundTerm::Pair(l1, l2), GroundTerm::Pair(r1, r2)) => {
                eqs.push(((**l1).clone(), (**r1).clone()));
                eqs.push(((**l2).clone(), (**r2).clone()));
            }
            // 0 = 0 was caught by the syntactic-equality case
            (GroundTerm::Zero, GroundTerm::Zero) => unreachable!(),
        }
    }
    SimplifyResult::Free { basis: gens, elimination }
}

/// Independent check of a Free result: substituting the elimination map
/// into every original equation must yield syntactic identities.
pub fn validate_free(pres: &Presentation, res: &SimplifyResult) -> bool {
    let SimplifyResult::Free { basis, elimination } = res else {
        return false;
    };
    // elimination values must only mention the basis
    for t in elimination.values() {
        if !t.generators().is_subset(basis) {
            return false;
        }
    }
    pres.equations.iter().all(|(l, r)| {
        l.substitute_map(elimination) == r.substitute_map(elimination)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pres(text: &str) -> Presentation {
        Presentation::parse(text).unwrap()
    }

    #[test]
    fn parse_and_render() {
        let p = pres("gens: a b\na = [b,0]");
        assert_eq!(p.generators.len(), 2);
        assert_eq!(p.equations.len(), 1);
        let back = Presentation::parse(&p.to_string()).unwrap();
        assert_eq!(back, p);
        assert!(Presentation::parse("gens: a\nb = 0").is_err());
        assert!(Presentation::parse("a = 0").is_err());
    }

    #[test]
    fn elimination_example() {
        let p = pres("gens: a b\na = [b,0]");
        let res = simplify(&p);
        match &res {
            SimplifyResult::Free { basis, elimination } => {
                assert_eq!(basis.iter().collect::<Vec<_>>(), vec!["b"]);
                assert_eq!(elimination["a"], parse_term("[b,0]").unwrap());
            }
            _ => panic!("expected Free, got {:?}", res),
        }
        assert!(validate_free(&p, &res));
    }

    #[test]
    fn occurs_and_clash() {
        let res = simplify(&pres("gens: a\na = [a,0]"));
        assert!(matches!(
            res,
            SimplifyResult::Inconsistent { axiom: ViolatedAxiom::Occurs, .. }
        ));

        let res = simplify(&pres("gens: a\n0 = [a,a]"));
        assert!(matches!(
            res,
            SimplifyResult::Inconsistent { axiom: ViolatedAxiom::Clash, .. }
        ));
    }

    #[test]
    fn decompose_then_eliminate() {
        let p = pres("gens: a b\n[a,0] = [0,b]");
        let res = simplify(&p);
        match &res {
            SimplifyResult::Free { basis, elimination } => {
                assert!(basis.is_empty());
                assert_eq!(elimination["a"], GroundTerm::Zero);
                assert_eq!(elimination["b"], GroundTerm::Zero);
            }
            _ => panic!("expected Free"),
        }
        assert!(validate_free(&p, &res));
    }

    #[test]
    fn chained_occurs_cycle_is_detected() {
        // a = [b,0], b = [a,0]: the cycle surfaces after one elimination
        let res = simplify(&pres("gens: a b\na = [b,0]\nb = [a,0]"));
        assert!(matches!(
            res,
            SimplifyResult::Inconsistent { axiom: ViolatedAxiom::Occurs, .. }
        ));
    }

    #[test]
    fn validate_rejects_wrong_elimination() {
        let p = pres("gens: a\na = [0,0]");
        let mut elimination = BTreeMap::new();
        elimination.insert("a".to_string(), GroundTerm::Zero);
        let bogus = SimplifyResult::Free { basis: BTreeSet::new(), elimination };
        assert!(!validate_free(&p, &bogus));
    }

    #[test]
    fn empty_presentation_is_free() {
        let p = pres("gens: a b c");
        let res = simplify(&p);
        assert!(matches!(&res, SimplifyResult::Free { basis, .. } if basis.len() == 3));
        assert!(validate_free(&p, &res));
    }

    pub(crate) fn random_term(
        rng: &mut impl Rng,
        gens: &[String],
        depth: usize,
    ) -> GroundTerm {
        if depth == 0 || rng.gen_bool(0.4) {
            if !gens.is_empty() && rng.gen_bool(0.6) {
                GroundTerm::gen(gens[rng.gen_range(0..gens.len())].clone())
            } else {
                GroundTerm::Zero
            }
        } else {
            GroundTerm::pair(
                random_term(rng, gens, depth - 1),
                random_term(rng, gens, depth - 1),
            )
        }
    }

    /// Random consistent presentation: extra generators defined by terms
    /// over earlier ones (inverse elimination steps), some equations
    /// wrapped in pairs (inverse decomposition steps).
    pub(crate) fn random_consistent(rng: &mut impl Rng) -> Presentation {
        let n_basis = rng.gen_range(0..3);
        let n_extra = rng.gen_range(1..5);
        let mut names: Vec<String> = (0..n_basis).map(|i| format!("b{}", i)).collect();
        let mut eqs = Vec::new();
        for i in 0..n_extra {
            let name = format!("e{}", i);
            let t = random_term(rng, &names, 3);
            let (lhs, rhs) = if rng.gen_bool(0.3) {
                // inverse decomposition: wrap both sides in a pair
                let w = random_term(rng, &names, 2);
                (
                    GroundTerm::pair(GroundTerm::gen(name.clone()), w.clone()),
                    GroundTerm::pair(t, w),
                )
            } else {
                (GroundTerm::gen(name.clone()), t)
            };
            eqs.push(if rng.gen_bool(0.5) { (lhs, rhs) } else { (rhs, lhs) });
            names.push(name);
        }
        // a few trivially true equations
        for _ in 0..rng.gen_range(0..2) {
            let t = random_term(rng, &names, 2);
            eqs.push((t.clone(), t));
        }
        Presentation::new(names, eqs).unwrap()
    }

    #[test]
    fn random_consistent_presentations_simplify_to_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for i in 0..500 {
            let p = random_consistent(&mut rng);
            let res = simplify(&p);
            assert!(
                validate_free(&p, &res),
                "case {}: {:?} on {}",
                i,
                res,
                p
            );
        }
    }

    #[test]
    fn seeded_inconsistencies_are_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..200 {
            let mut p = random_consistent(&mut rng);
            // seed a clash
            let g = p.generators.iter().next().unwrap().clone();
            let mut q = p.clone();
            q.equations.push((
                GroundTerm::Zero,
                GroundTerm::pair(GroundTerm::gen(g.clone()), GroundTerm::Zero),
            ));
            assert!(matches!(simplify(&q), SimplifyResult::Inconsistent { .. }));
            // seed an occurs cycle; other equations may ground the
            // generator first, so only inconsistency itself is certain
            p.equations.push((
                GroundTerm::gen(g.clone()),
                GroundTerm::pair(GroundTerm::gen(g), GroundTerm::Zero),
            ));
            assert!(matches!(
                simplify(&p),
                SimplifyResult::Inconsistent { .. }
            ));
        }
    }

    // The measure (|A|, total length of E) strictly decreases
    // lexicographically at every simplification step.
    #[test]
    fn termination_measure_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..100 {
            let p = random_consistent(&mut rng);
            let mut gens = p.generators.clone();
            let mut eqs = p.equations.clone();
            let mut measure = (
                gens.len(),
                eqs.iter().map(|(l, r)| l.len() + r.len()).sum::<usize>(),
            );
            loop {
                if eqs.is_empty() {
                    break;
                }
                let idx = (0..eqs.len())
                    .min_by_key(|&i| {
                        let (l, r) = &eqs[i];
                        (l.len() + r.len(), format!("{} = {}", l, r))
                    })
                    .unwrap();
                let (lhs, rhs) = eqs.remove(idx);
                if lhs == rhs {
                } else {
                    match (&lhs, &rhs) {
                        (GroundTerm::Gen(a), t) | (t, GroundTerm::Gen(a)) => {
                            assert!(!t.contains_gen(a), "consistent by construction");
                            gens.remove(a);
                            for (l, r) in eqs.iter_mut() {
                                *l = l.substitute_gen(a, t);
                                *r = r.substitute_gen(a, t);
                            }
                        }
                        (GroundTerm::Pair(l1, l2), GroundTerm::Pair(r1, r2)) => {
                            eqs.push(((**l1).clone(), (**r1).clone()));
                            eqs.push(((**l2).clone(), (**r2).clone()));
                        }
                        _ => panic!("unexpected equation in consistent presentation"),
                    }
                }
                let next = (
                    gens.len(),
                    eqs.iter().map(|(l, r)| l.len() + r.len()).sum::<usize>(),
                );
                assert!(next < measure, "{:?} !< {:?}", next, measure);
                measure = next;
            }
        }
    }
}
