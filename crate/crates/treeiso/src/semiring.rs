//! Arithmetic and decision procedures in N[X] and N[X]/(X = 1 + X^2).
//!
//! A polynomial is kept as the multiset of its monomial exponents, in
//! non-increasing order, so each occurrence of a monomial is addressable.
//! Equality modulo X = 1 + X^2 is decided by the canonical form
//! a + bX^2 + cX^4 and double-checked by two exact evaluation oracles.

use std::fmt;

use crate::error::{Error, ParseError, Result};

/// Element of N[X] as an ordered multiset of exponents.
///
/// `2 + X^3` is `[3, 0, 0]`; the zero polynomial is the empty list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    exps: Vec<usize>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { exps: Vec::new() }
    }

    pub fn monomial(exp: usize) -> Self {
        Polynomial { exps: vec![exp] }
    }

    pub fn constant(n: usize) -> Self {
        Polynomial { exps: vec![0; n] }
    }

    /// Builds from an arbitrary exponent list (re-sorted canonically).
    pub fn from_exponents(mut exps: Vec<usize>) -> Self {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        Polynomial { exps }
    }

    /// Exponents in canonical (non-increasing) order.
    pub fn exponents(&self) -> &[usize] {
        &self.exps
    }

    /// Multiplicity of X^k, the coefficient c_k.
    pub fn coeff(&self, k: usize) -> usize {
        self.exps.iter().filter(|&&e| e == k).count()
    }

    pub fn degree(&self) -> Option<usize> {
        self.exps.first().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty()
    }

    /// Number of monomial occurrences (sum of coefficients).
    pub fn num_terms(&self) -> usize {
        self.exps.len()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut exps = self.exps.clone();
        exps.extend_from_slice(&other.exps);
        Polynomial::from_exponents(exps)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut exps = Vec::with_capacity(self.exps.len() * other.exps.len());
        for &a in &self.exps {
            for &b in &other.exps {
                exps.push(a + b);
            }
        }
        Polynomial::from_exponents(exps)
    }

    /// The polynomial form of a normal form, for reuse in derivations.
    pub fn from_normal_form(nf: &NormalForm) -> Polynomial {
        let mut exps = vec![4; nf.c];
        exps.extend(std::iter::repeat(2).take(nf.b));
        exps.extend(std::iter::repeat(0).take(nf.a));
        Polynomial { exps }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.exps.len() {
            let e = self.exps[i];
            let mut c = 1;
            while i + c < self.exps.len() && self.exps[i + c] == e {
                c += 1;
            }
            i += c;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (c, e) {
                (c, 0) => write!(f, "{}", c)?,
                (1, 1) => write!(f, "X")?,
                (1, e) => write!(f, "X^{}", e)?,
                (c, 1) => write!(f, "{}X", c)?,
                (c, e) => write!(f, "{}X^{}", c, e)?,
            }
        }
        Ok(())
    }
}

/// Parses `c`, `X`, `X^k`, `cX^k` (or `c*X^k` / `c X^k`) joined by `+`.
pub fn parse_poly(text: &str) -> Result<Polynomial> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut exps: Vec<usize> = Vec::new();
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let read_nat = |pos: &mut usize| -> Result<usize> {
        let start = *pos;
        let mut n: usize = 0;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            n = n
                .checked_mul(10)
                .and_then(|n| n.checked_add((bytes[*pos] - b'0') as usize))
                .ok_or(Error::Overflow("polynomial literal"))?;
            *pos += 1;
        }
        if *pos == start {
            return Err(ParseError::new(start, "expected a number".into()).into());
        }
        Ok(n)
    };
    loop {
        skip_ws(&mut pos);
        if pos >= bytes.len() {
            return Err(ParseError::new(pos, "expected a term".into()).into());
        }
        // term := nat [ '*'? X-part ] | X-part
        let mut coeff = 1usize;
        let mut has_coeff = false;
        if bytes[pos].is_ascii_digit() {
            coeff = read_nat(&mut pos)?;
            has_coeff = true;
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == b'*' {
                pos += 1;
                skip_ws(&mut pos);
            }
        } else if bytes[pos] == b'-' {
            return Err(ParseError::new(pos, "negative coefficients are not allowed".into()).into());
        }
        let mut exp = 0usize;
        let mut has_x = false;
        if pos < bytes.len() && (bytes[pos] == b'X' || bytes[pos] == b'x') {
            pos += 1;
            has_x = true;
            exp = 1;
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == b'^' {
                pos += 1;
                skip_ws(&mut pos);
                exp = read_nat(&mut pos)?;
            }
        }
        if !has_coeff && !has_x {
            return Err(ParseError::new(pos, "expected a coefficient or 'X'".into()).into());
        }
        for _ in 0..coeff {
            exps.push(exp);
        }
        skip_ws(&mut pos);
        if pos >= bytes.len() {
            break;
        }
        if bytes[pos] == b'+' {
            pos += 1;
        } else {
            return Err(ParseError::new(pos, "expected '+'".into()).into());
        }
    }
    Ok(Polynomial::from_exponents(exps))
}

/// The canonical form a + bX^2 + cX^4: either some coefficient is zero,
/// or b = c = 1 with a >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormalForm {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl NormalForm {
    pub fn is_canonical(&self) -> bool {
        self.a.min(self.b).min(self.c) == 0 || (self.b == 1 && self.c == 1 && self.a >= 1)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Polynomial::from_normal_form(self))
    }
}

/// Reduces a polynomial to its canonical a + bX^2 + cX^4 form.
///
/// The reduction order is fixed: degrees >= 7 drop by six; then
/// X^6 -> X^5 + X, X^5 -> 1 + X^4, X^3 -> X^2 + X^4, X -> 1 + X^2; finally
/// copies of 1 + X^2 + X^4 are deleted while a catalyst remains.
pub fn normal_form(p: &Polynomial) -> NormalForm {
    // Counts per exponent 0..=6 after folding degrees mod-6 down into 1..=6.
    let mut counts = [0usize; 7];
    for &e in p.exponents() {
        let e = if e >= 7 { 1 + (e - 1) % 6 } else { e };
        counts[e] += 1;
    }
    // X^6 -> X^5 + X
    counts[5] += counts[6];
    counts[1] += counts[6];
    counts[6] = 0;
    // X^5 -> 1 + X^4
    counts[0] += counts[5];
    counts[4] += counts[5];
    counts[5] = 0;
    // X^3 -> X^2 + X^4
    counts[2] += counts[3];
    counts[4] += counts[3];
    counts[3] = 0;
    // X -> 1 + X^2
    counts[0] += counts[1];
    counts[2] += counts[1];
    counts[1] = 0;
    let (mut a, mut b, mut c) = (counts[0], counts[2], counts[4]);
    // Q-deletion: while a catalyst survives, remove a copy of 1 + X^2 + X^4.
    while a >= 1 && b >= 1 && c >= 1 && (b >= 2 || c >= 2) {
        a -= 1;
        b -= 1;
        c -= 1;
    }
    NormalForm { a, b, c }
}

/// Equality in N[X]/(X = 1 + X^2).
pub fn decide_equiv(p: &Polynomial, q: &Polynomial) -> bool {
    normal_form(p) == normal_form(q)
}

/// Exact value u + v t in Z[t], where t = 1/2 + i sqrt(3)/2 and t^2 = t - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SixthRootValue {
    pub u: i128,
    pub v: i128,
}

impl SixthRootValue {
    pub const ZERO: SixthRootValue = SixthRootValue { u: 0, v: 0 };
    pub const ONE: SixthRootValue = SixthRootValue { u: 1, v: 0 };
    pub const T: SixthRootValue = SixthRootValue { u: 0, v: 1 };

    pub fn add(self, o: SixthRootValue) -> SixthRootValue {
        SixthRootValue { u: self.u + o.u, v: self.v + o.v }
    }

    // (u + vt)(u' + v't) = uu' + (uv' + vu')t + vv't^2, with t^2 = t - 1.
    pub fn mul(self, o: SixthRootValue) -> SixthRootValue {
        SixthRootValue {
            u: self.u * o.u - self.v * o.v,
            v: self.u * o.v + self.v * o.u + self.v * o.v,
        }
    }
}

/// Evaluates P at the primitive sixth root of unity, exactly.
pub fn eval_sixth_root(p: &Polynomial) -> SixthRootValue {
    let mut acc = SixthRootValue::ZERO;
    for &e in p.exponents() {
        let mut pow = SixthRootValue::ONE;
        // t^6 = 1, so exponents reduce mod 6.
        for _ in 0..(e % 6) {
            pow = pow.mul(SixthRootValue::T);
        }
        acc = acc.add(pow);
    }
    acc
}

/// The three-element cardinal semiring {0, finite-nonzero, aleph_0}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThreeElementValue {
    Zero,
    Fin,
    Inf,
}

impl ThreeElementValue {
    pub fn add(self, o: ThreeElementValue) -> ThreeElementValue {
        use ThreeElementValue::*;
        match (self, o) {
            (Zero, x) | (x, Zero) => x,
            (Inf, _) | (_, Inf) => Inf,
            (Fin, Fin) => Fin,
        }
    }

    pub fn mul(self, o: ThreeElementValue) -> ThreeElementValue {
        use ThreeElementValue::*;
        match (self, o) {
            (Zero, _) | (_, Zero) => Zero,
            (Inf, _) | (_, Inf) => Inf,
            (Fin, Fin) => Fin,
        }
    }
}

/// Evaluates P with X interpreted as aleph_0.
pub fn eval_three_element(p: &Polynomial) -> ThreeElementValue {
    use ThreeElementValue::*;
    let mut acc = Zero;
    for &e in p.exponents() {
        let term = if e == 0 { Fin } else { Inf };
        acc = acc.add(term);
    }
    acc
}
