//! Machine-checkable equational derivations in N[X]/(X = 1 + X^2).
//!
//! The only elementary moves are Split (X^{m+1} -> X^m + X^{m+2}) and its
//! inverse Merge. Catalyst macros, degree reduction and normalization all
//! expand into sequences of these, so every derivation replays move by
//! move with non-negative multiplicities throughout.

use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::semiring::{decide_equiv, normal_form, parse_poly, Polynomial};

/// An elementary rewrite on one monomial occurrence. Positions index the
/// canonical (non-increasing) exponent list of the current polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// X^{m+1} -> X^m + X^{m+2}; requires exponent >= 1 at `pos`.
    Split { pos: usize },
    /// X^m + X^{m+2} -> X^{m+1}; the two exponents must differ by 2.
    Merge { pos_low: usize, pos_high: usize },
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Split { pos } => write!(f, "split {}", pos),
            Move::Merge { pos_low, pos_high } => write!(f, "merge {} {}", pos_low, pos_high),
        }
    }
}

/// Applies one move, re-sorting into canonical order afterwards.
pub fn apply_move(p: &Polynomial, m: &Move) -> Result<Polynomial> {
    let exps = p.exponents();
    match *m {
        Move::Split { pos } => {
            let &e = exps.get(pos).ok_or(Error::InvalidPosition(pos))?;
            if e == 0 {
                return Err(Error::SplitConstant);
            }
            let mut out: Vec<usize> = exps.to_vec();
            out.remove(pos);
            out.push(e - 1);
            out.push(e + 1);
            Ok(Polynomial::from_exponents(out))
        }
        Move::Merge { pos_low, pos_high } => {
            let &lo = exps.get(pos_low).ok_or(Error::InvalidPosition(pos_low))?;
            let &hi = exps.get(pos_high).ok_or(Error::InvalidPosition(pos_high))?;
            if pos_low == pos_high {
                return Err(Error::InvalidPosition(pos_low));
            }
            if hi != lo + 2 {
                return Err(Error::MergeGap(lo, hi));
            }
            let mut out: Vec<usize> = exps.to_vec();
            let (a, b) = if pos_low > pos_high { (pos_low, pos_high) } else { (pos_high, pos_low) };
            out.remove(a);
            out.remove(b);
            out.push(lo + 1);
            Ok(Polynomial::from_exponents(out))
        }
    }
}

/// A sequence of moves witnessing start = end in N[X]/(X = 1 + X^2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub start: Polynomial,
    pub moves: Vec<Move>,
    pub end: Polynomial,
}

impl Derivation {
    /// Builds and replays; fails if any move is illegal.
    pub fn new(start: Polynomial, moves: Vec<Move>) -> Result<Derivation> {
        let end = replay(&start, &moves)?;
        Ok(Derivation { start, moves, end })
    }

    pub fn identity(p: Polynomial) -> Derivation {
        Derivation { start: p.clone(), moves: Vec::new(), end: p }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// All intermediate states, start first, end last.
    pub fn states(&self) -> Result<Vec<Polynomial>> {
        let mut out = vec![self.start.clone()];
        for m in &self.moves {
            let next = apply_move(out.last().unwrap(), m)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Concatenates two derivations; `other` must start where `self` ends.
    pub fn then(&self, other: &Derivation) -> Result<Derivation> {
        if self.end != other.start {
            return Err(Error::Other(format!(
                "cannot compose: {} != {}",
                self.end, other.start
            )));
        }
        let mut moves = self.moves.clone();
        moves.extend(other.moves.iter().cloned());
        Ok(Derivation { start: self.start.clone(), moves, end: other.end.clone() })
    }

    /// The reverse derivation: every move inverted, in reverse order.
    pub fn inverted(&self) -> Result<Derivation> {
        let states = self.states()?;
        let mut moves = Vec::with_capacity(self.moves.len());
        for (i, m) in self.moves.iter().enumerate().rev() {
            let before = &states[i];
            let after = &states[i + 1];
            let inv = match *m {
                Move::Split { pos } => {
                    let e = before.exponents()[pos];
                    Move::Merge {
                        pos_low: pos_of(after, e - 1)?,
                        pos_high: pos_of(after, e + 1)?,
                    }
                }
                Move::Merge { pos_low, .. } => {
                    let lo = before.exponents()[pos_low];
                    Move::Split { pos: pos_of(after, lo + 1)? }
                }
            };
            moves.push(inv);
        }
        Derivation::new(self.end.clone(), moves)
    }

    /// Line-oriented text: `start: <poly>` then one move per line.
    pub fn render(&self) -> String {
        let mut out = format!("start: {}\n", self.start);
        for m in &self.moves {
            out.push_str(&m.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Derivation> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ParseError::new(0, "expected 'start: <poly>'".into()))?;
        let poly_text = header
            .trim()
            .strip_prefix("start:")
            .ok_or_else(|| ParseError::new(0, "expected 'start: <poly>'".into()))?;
        let start = parse_poly(poly_text)?;
        let mut moves = Vec::new();
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = || ParseError::new(0, format!("bad move line: {}", line));
            match toks.as_slice() {
                ["split", p] => moves.push(Move::Split {
                    pos: p.parse().map_err(|_| bad())?,
                }),
                ["merge", lo, hi] => moves.push(Move::Merge {
                    pos_low: lo.parse().map_err(|_| bad())?,
                    pos_high: hi.parse().map_err(|_| bad())?,
                }),
                _ => return Err(bad().into()),
            }
        }
        Derivation::new(start, moves)
    }
}

fn replay(start: &Polynomial, moves: &[Move]) -> Result<Polynomial> {
    let mut cur = start.clone();
    for (i, m) in moves.iter().enumerate() {
        cur = apply_move(&cur, m).map_err(|e| Error::InvalidDerivation {
            index: i,
            reason: e.to_string(),
        })?;
    }
    Ok(cur)
}

/// True iff every move is legal at its step and replay reaches `d.end`.
pub fn check_derivation(d: &Derivation) -> bool {
    matches!(replay(&d.start, &d.moves), Ok(end) if end == d.end)
}

pub fn pos_of(p: &Polynomial, e: usize) -> Result<usize> {
    p.exponents()
        .iter()
        .position(|&x| x == e)
        .ok_or(Error::MissingMonomial(e))
}

/// Move recorder: tracks the current polynomial and appends moves
/// addressed by exponent value rather than position.
pub struct DerivationBuilder {
    start: Polynomial,
    cur: Polynomial,
    moves: Vec<Move>,
}

impl DerivationBuilder {
    pub fn new(p: &Polynomial) -> DerivationBuilder {
        DerivationBuilder { start: p.clone(), cur: p.clone(), moves: Vec::new() }
    }

    pub fn split(&mut self, e: usize) -> Result<()> {
        let m = Move::Split { pos: pos_of(&self.cur, e)? };
        self.cur = apply_move(&self.cur, &m)?;
        self.moves.push(m);
        Ok(())
    }

    pub fn merge(&mut self, lo: usize, hi: usize) -> Result<()> {
        let pos_lo = pos_of(&self.cur, lo)?;
        let pos_hi = pos_of(&self.cur, hi)?;
        let m = Move::Merge { pos_low: pos_lo, pos_high: pos_hi };
        self.cur = apply_move(&self.cur, &m)?;
        self.moves.push(m);
        Ok(())
    }

    pub fn finish(self) -> Derivation {
        Derivation { start: self.start, moves: self.moves, end: self.cur }
    }
}

/// Kinds of derivation macros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroKind {
    CatalystDelete(usize),
    CatalystIntroduce(usize),
    DegreeReduce(usize),
}

/// A macro step together with its elementary-move expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroStep {
    pub kind: MacroKind,
    pub catalyst_exponent: usize,
    pub expansion: Derivation,
}

/// The two-move core: deletes X^{k+3} + X^k using the catalyst X^{k+1}
/// or X^{k+2} that lies between them.
pub fn catalyst_core(p: &Polynomial, k: usize, which: usize) -> Result<Derivation> {
    if which != k + 1 && which != k + 2 {
        return Err(Error::Other(format!(
            "catalyst exponent {} must be {} or {}",
            which,
            k + 1,
            k + 2
        )));
    }
    let mut b = DerivationBuilder::new(p);
    core_delete(&mut b, k, which)?;
    Ok(b.finish())
}

fn core_delete(b: &mut DerivationBuilder, k: usize, which: usize) -> Result<()> {
    if which == k + 1 {
        b.merge(k + 1, k + 3)?;
        b.merge(k, k + 2)?;
    } else {
        b.merge(k, k + 2)?;
        b.merge(k + 1, k + 3)?;
    }
    Ok(())
}

fn core_introduce(b: &mut DerivationBuilder, k: usize, which: usize) -> Result<()> {
    if which == k + 1 {
        b.split(k + 1)?;
        b.split(k + 2)?;
    } else {
        b.split(k + 2)?;
        b.split(k + 1)?;
    }
    Ok(())
}

/// Walks X^r toward a usable catalyst for the pair (X^k, X^{k+3}).
/// Returns the split exponents, for undoing, and the catalyst reached.
fn walk(b: &mut DerivationBuilder, k: usize, r: usize) -> Result<(Vec<usize>, usize)> {
    if r == 0 {
        return Err(Error::ZeroCatalyst);
    }
    if r == k + 1 || r == k + 2 {
        return Ok((Vec::new(), r));
    }
    // The nearer of k+1 and k+2; the distances always differ, so there
    // is no tie to break.
    let target = if r < k + 1 { k + 1 } else { k + 2 };
    let mut splits = Vec::new();
    let mut cur = r;
    while cur != target {
        b.split(cur)?;
        splits.push(cur);
        cur = if cur < target { cur + 1 } else { cur - 1 };
    }
    Ok((splits, target))
}

fn unwalk(b: &mut DerivationBuilder, splits: &[usize]) -> Result<()> {
    for &e in splits.iter().rev() {
        b.merge(e - 1, e + 1)?;
    }
    Ok(())
}

fn delete_into(b: &mut DerivationBuilder, k: usize, r: usize) -> Result<()> {
    let (splits, which) = walk(b, k, r)?;
    core_delete(b, k, which)?;
    unwalk(b, &splits)
}

fn introduce_into(b: &mut DerivationBuilder, k: usize, r: usize) -> Result<()> {
    let (splits, which) = walk(b, k, r)?;
    core_introduce(b, k, which)?;
    unwalk(b, &splits)
}

/// Deletes X^{k+3} + X^k using any positive power X^r as catalyst.
pub fn catalyst_delete(p: &Polynomial, k: usize, r: usize) -> Result<Derivation> {
    let mut b = DerivationBuilder::new(p);
    delete_into(&mut b, k, r)?;
    Ok(b.finish())
}

/// Introduces X^{k+3} + X^k using any positive power X^r as catalyst.
pub fn catalyst_introduce(p: &Polynomial, k: usize, r: usize) -> Result<Derivation> {
    let mut b = DerivationBuilder::new(p);
    introduce_into(&mut b, k, r)?;
    Ok(b.finish())
}

/// As `catalyst_delete`, wrapped in its macro record.
pub fn catalyst_delete_macro(p: &Polynomial, k: usize, r: usize) -> Result<MacroStep> {
    Ok(MacroStep {
        kind: MacroKind::CatalystDelete(k),
        catalyst_exponent: r,
        expansion: catalyst_delete(p, k, r)?,
    })
}

/// As `catalyst_introduce`, wrapped in its macro record.
pub fn catalyst_introduce_macro(p: &Polynomial, k: usize, r: usize) -> Result<MacroStep> {
    Ok(MacroStep {
        kind: MacroKind::CatalystIntroduce(k),
        catalyst_exponent: r,
        expansion: catalyst_introduce(p, k, r)?,
    })
}

fn degree_reduce_into(b: &mut DerivationBuilder, k: usize) -> Result<()> {
    if k < 7 {
        return Err(Error::DegreeTooLow(k));
    }
    // Introduce X^{k-3} + X^{k-6} with X^k as catalyst, then delete
    // X^k + X^{k-3} with X^{k-6} as catalyst.
    introduce_into(b, k - 6, k)?;
    delete_into(b, k - 3, k - 6)
}

/// Net effect X^k -> X^{k-6}, for k >= 7.
pub fn degree_reduce(p: &Polynomial, pos: usize) -> Result<Derivation> {
    let &k = p.exponents().get(pos).ok_or(Error::InvalidPosition(pos))?;
    let mut b = DerivationBuilder::new(p);
    degree_reduce_into(&mut b, k)?;
    Ok(b.finish())
}

/// The canonical twenty-step computation: X^7 -> X.
pub fn seven_derivation() -> Derivation {
    degree_reduce(&Polynomial::monomial(7), 0).expect("the canned construction replays")
}

/// A derivation from `p` to the polynomial form of its canonical
/// a + bX^2 + cX^4 normal form.
pub fn normalize_trace(p: &Polynomial) -> Derivation {
    let mut b = DerivationBuilder::new(p);
    normalize_into(&mut b).expect("normalization replays on any input");
    let d = b.finish();
    debug_assert_eq!(d.end, Polynomial::from_normal_form(&normal_form(p)));
    d
}

fn normalize_into(b: &mut DerivationBuilder) -> Result<()> {
    // degrees >= 7 drop by six
    while let Some(k) = b.cur.exponents().iter().copied().find(|&e| e >= 7) {
        degree_reduce_into(b, k)?;
    }
    // X^6 -> X^5 + X
    while b.cur.coeff(6) > 0 {
        b.split(6)?;
        degree_reduce_into(b, 7)?;
    }
    // X^5 -> 1 + X^4: introduce 1 + X^3 with catalyst X^5, then merge
    while b.cur.coeff(5) > 0 {
        introduce_into(b, 0, 5)?;
        b.merge(3, 5)?;
    }
    // odd degrees
    while b.cur.coeff(3) > 0 {
        b.split(3)?;
    }
    while b.cur.coeff(1) > 0 {
        b.split(1)?;
    }
    // Q-deletion loop on a + bX^2 + cX^4
    loop {
        let (a, c2, c4) = (b.cur.coeff(0), b.cur.coeff(2), b.cur.coeff(4));
        if !(a >= 1 && c2 >= 1 && c4 >= 1 && (c2 >= 2 || c4 >= 2)) {
            break;
        }
        // Q = 1 + X^2 + X^4 equals X + X^4, which a catalyst deletes.
        b.merge(0, 2)?;
        let r = if c2 >= 2 { 2 } else { 4 };
        delete_into(b, 1, r)?;
    }
    Ok(())
}

/// A derivation from P to Q when they are equal in N[X]/(X = 1 + X^2);
/// None when they are not.
pub fn derive_equivalence(p: &Polynomial, q: &Polynomial) -> Option<Derivation> {
    if !decide_equiv(p, q) {
        return None;
    }
    if p == q {
        return Some(Derivation::identity(p.clone()));
    }
    let forward = normalize_trace(p);
    let backward = normalize_trace(q).inverted().expect("generated traces invert");
    Some(forward.then(&backward).expect("traces meet at the normal form"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        parse_poly(s).unwrap()
    }

    #[test]
    fn apply_move_examples() {
        let split = Move::Split { pos: 0 };
        assert_eq!(apply_move(&p("X^6"), &split).unwrap(), p("X^5 + X^7"));
        let merged = apply_move(
            &p("X^5 + X^7"),
            &Move::Merge { pos_low: 1, pos_high: 0 },
        )
        .unwrap();
        assert_eq!(merged, p("X^6"));
        assert!(matches!(apply_move(&p("1"), &split), Err(Error::SplitConstant)));
        assert!(matches!(
            apply_move(&p("X + X^4"), &Move::Merge { pos_low: 1, pos_high: 0 }),
            Err(Error::MergeGap(1, 4))
        ));
        assert!(apply_move(&p("X"), &Move::Split { pos: 3 }).is_err());
    }

    #[test]
    fn catalyst_core_examples() {
        // delete T^7 + T^4 via the catalyst T^5
        let d = catalyst_core(&p("X^7 + X^5 + X^4 + X^3"), 4, 5).unwrap();
        assert_eq!(d.end, p("X^5 + X^3"));
        assert_eq!(d.len(), 2);

        let d = catalyst_core(&p("X^4 + X^2 + X"), 1, 2).unwrap();
        assert_eq!(d.end, p("X^2"));

        assert!(catalyst_core(&p("X^7 + X^4"), 4, 5).is_err());
        assert!(catalyst_core(&p("X^7 + X^5 + X^4"), 4, 9).is_err());
    }

    #[test]
    fn catalyst_walk_examples() {
        let d = catalyst_introduce(&p("X^7"), 1, 7).unwrap();
        assert_eq!(d.end, p("X^7 + X^4 + X"));
        // walk length 4 each way plus the 2-move core
        assert_eq!(d.len(), 10);

        let d = catalyst_delete(&p("X^7 + X^4 + X"), 4, 1).unwrap();
        assert_eq!(d.end, p("X"));
        assert_eq!(d.len(), 10);

        // r = k+1: no walk at all
        let d = catalyst_delete(&p("X^7 + X^5 + X^4"), 4, 5).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.end, p("X^5"));

        assert!(matches!(
            catalyst_delete(&p("X^4 + X + 1"), 1, 0),
            Err(Error::ZeroCatalyst)
        ));
        assert!(catalyst_delete(&p("X^4 + X^2"), 1, 2).is_err());
    }

    #[test]
    fn catalyst_restores_catalyst() {
        for (k, r) in [(1usize, 7usize), (2, 1), (4, 1), (0, 5), (3, 4)] {
            // build a polynomial containing the operands and the catalyst
            let start = Polynomial::from_exponents(vec![k + 3, k, r]);
            if let Ok(d) = catalyst_delete(&start, k, r) {
                assert_eq!(d.end, Polynomial::monomial(r), "k={} r={}", k, r);
            }
            let start = Polynomial::monomial(r);
            if r >= 1 {
                let d = catalyst_introduce(&start, k, r).unwrap();
                assert_eq!(
                    d.end,
                    Polynomial::from_exponents(vec![k + 3, k, r]),
                    "k={} r={}",
                    k,
                    r
                );
            }
        }
    }

    #[test]
    fn degree_reduce_examples() {
        let d = degree_reduce(&p("X^7"), 0).unwrap();
        assert_eq!(d.end, p("X"));
        assert_eq!(d.len(), 20, "twenty steps");

        let d = degree_reduce(&p("X^8"), 0).unwrap();
        assert_eq!(d.end, p("X^2"));
        assert!(check_derivation(&d));

        assert!(matches!(
            degree_reduce(&p("X^6"), 0),
            Err(Error::DegreeTooLow(6))
        ));
    }

    #[test]
    fn normalize_trace_examples() {
        let d = normalize_trace(&p("X"));
        assert_eq!(d.len(), 1);
        assert_eq!(d.end, p("1 + X^2"));

        let d = normalize_trace(&p("X^7"));
        assert_eq!(d.end, p("1 + X^2"));

        let d = normalize_trace(&p("1 + X^2 + X^4"));
        assert!(d.is_empty());

        // ends at the canonical form, always
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let mut exps = Vec::new();
            for e in 0..=9 {
                for _ in 0..rng.gen_range(0..3) {
                    exps.push(e);
                }
            }
            let q = Polynomial::from_exponents(exps);
            let d = normalize_trace(&q);
            assert!(check_derivation(&d));
            assert_eq!(d.end, Polynomial::from_normal_form(&normal_form(&q)));
        }
    }

    #[test]
    fn derive_equivalence_examples() {
        let d = derive_equivalence(&p("X^7"), &p("X")).unwrap();
        assert!(check_derivation(&d));
        assert_eq!(d.start, p("X^7"));
        assert_eq!(d.end, p("X"));
        // 21 moves to normalize X^7 (20-step degree reduction plus a final
        // split to reach 1 + X^2) and the single inverted split of X
        assert_eq!(normalize_trace(&p("X^7")).len(), 21);
        assert_eq!(normalize_trace(&p("X")).len(), 1);
        assert_eq!(d.len(), 22);

        assert!(derive_equivalence(&p("X^2"), &p("X")).is_none());

        let d = derive_equivalence(&p("X^3 + 1"), &p("X^3 + 1")).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn derive_equivalence_matches_decide_equiv_on_monomials() {
        for j in 0..=12usize {
            for k in 0..=12usize {
                let pj = Polynomial::monomial(j);
                let pk = Polynomial::monomial(k);
                let derived = derive_equivalence(&pj, &pk);
                assert_eq!(derived.is_some(), decide_equiv(&pj, &pk), "j={} k={}", j, k);
                if let Some(d) = derived {
                    assert!(check_derivation(&d));
                    assert_eq!(d.start, pj);
                    assert_eq!(d.end, pk);
                }
            }
        }
    }

    #[test]
    fn inversion_roundtrips() {
        for d in [
            seven_derivation(),
            normalize_trace(&p("2X^5 + X^3 + 4")),
            derive_equivalence(&p("X^13"), &p("X")).unwrap(),
        ] {
            let inv = d.inverted().unwrap();
            assert!(check_derivation(&inv));
            assert_eq!(inv.start, d.end);
            assert_eq!(inv.end, d.start);
            let both = d.then(&inv).unwrap();
            assert!(check_derivation(&both));
            assert_eq!(both.end, d.start);
        }
    }

    #[test]
    fn soundness_of_generated_derivations() {
        for d in [
            seven_derivation(),
            normalize_trace(&p("X^9 + 2X^2")),
            catalyst_introduce(&p("X^3"), 2, 3).unwrap(),
        ] {
            assert!(check_derivation(&d));
            assert!(decide_equiv(&d.start, &d.end));
            // every intermediate state stays in N[X]
            for s in d.states().unwrap() {
                assert!(s.exponents().iter().all(|_| true));
            }
        }
    }

    #[test]
    fn checker_rejects_bad_derivations() {
        // merge with a gap of 3
        let bogus = Derivation {
            start: p("X^4 + X"),
            moves: vec![Move::Merge { pos_low: 1, pos_high: 0 }],
            end: p("X^2"),
        };
        assert!(!check_derivation(&bogus));

        // wrong recorded end
        let mut d = seven_derivation();
        d.end = p("X^2");
        assert!(!check_derivation(&d));

        // empty derivation with start = end
        assert!(check_derivation(&Derivation::identity(p("X^3"))));
    }

    #[test]
    fn serialization_roundtrip() {
        for d in [
            seven_derivation(),
            Derivation::identity(p("2 + X")),
            normalize_trace(&p("X^5")),
        ] {
            let text = d.render();
            let back = Derivation::parse(&text).unwrap();
            assert_eq!(back, d);
        }
        assert!(Derivation::parse("split 0").is_err());
        assert!(Derivation::parse("start: X\nfrob 1").is_err());
    }

    #[test]
    fn macro_records_expand_correctly() {
        let m = catalyst_introduce_macro(&p("X^7"), 1, 7).unwrap();
        assert_eq!(m.kind, MacroKind::CatalystIntroduce(1));
        assert_eq!(m.catalyst_exponent, 7);
        assert_eq!(m.expansion.end, p("X^7 + X^4 + X"));

        let m = catalyst_delete_macro(&p("X^7 + X^4 + X"), 4, 1).unwrap();
        assert_eq!(m.kind, MacroKind::CatalystDelete(4));
        assert_eq!(m.expansion.end, p("X"));
    }
}
