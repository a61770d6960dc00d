//! Invariants of links in the solid torus from affine braid words: map the
//! word into W_{r,n}, take the Markov trace, normalize by writhe and strands.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::trace_words;
use crate::diagram::{GenWord, Token};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::ring::RingElem;

/// s(i, +-1) is the braid generator sigma_i^{+-1}; t(+-1) winds the first
/// strand around the flagpole.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum BraidToken {
    S(usize, i8),
    T(i8),
}

impl BraidToken {
    pub fn inverse(self) -> Self {
        match self {
            BraidToken::S(i, s) => BraidToken::S(i, -s),
            BraidToken::T(s) => BraidToken::T(-s),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let ok = match *self {
            BraidToken::S(i, s) => i >= 1 && i < n && (s == 1 || s == -1),
            BraidToken::T(s) => s == 1 || s == -1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("braid token {self} out of range for n = {n}")))
        }
    }
}

impl fmt::Display for BraidToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BraidToken::S(i, 1) => write!(f, "s{i}"),
            BraidToken::S(i, _) => write!(f, "s{i}^-1"),
            BraidToken::T(1) => write!(f, "t"),
            BraidToken::T(_) => write!(f, "t^-1"),
        }
    }
}

/// An affine braid word on n strands.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BraidWord {
    pub n: usize,
    pub tokens: Vec<BraidToken>,
}

impl BraidWord {
    pub fn new(n: usize, tokens: Vec<BraidToken>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("a braid needs at least one strand".into()));
        }
        for t in &tokens {
            t.check(n)?;
        }
        Ok(BraidWord { n, tokens })
    }

    /// Parse whitespace-separated tokens `s<i>`, `s<i>^-1`, `t`, `t^-1`
    /// (integer powers such as `t^3` are expanded).
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for raw in text.split_whitespace() {
            let (head, exp) = match raw.split_once('^') {
                Some((h, e)) => (h, e.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in {raw:?}")))?),
                None => (raw, 1),
            };
            let sign: i8 = if exp < 0 { -1 } else { 1 };
            let tok = if head == "t" {
                BraidToken::T(sign)
            } else if let Some(rest) = head.strip_prefix('s') {
                let i = rest.parse::<usize>().map_err(|_| Error::Parse(format!("bad braid token {raw:?}")))?;
                BraidToken::S(i, sign)
            } else {
                return Err(Error::Parse(format!("bad braid token {raw:?}")));
            };
            tokens.extend(std::iter::repeat_n(tok, exp.unsigned_abs() as usize));
        }
        BraidWord::new(n, tokens)
    }

    /// Exponent sum of the s-tokens; t-tokens carry no writhe.
    pub fn writhe(&self) -> i64 {
        self.tokens.iter().map(|t| if let BraidToken::S(_, s) = t { *s as i64 } else { 0 }).sum()
    }

    /// Exponent sum of the t-tokens.
    pub fn winding(&self) -> i64 {
        self.tokens.iter().map(|t| if let BraidToken::T(s) = t { *s as i64 } else { 0 }).sum()
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord { n: self.n, tokens: self.tokens.iter().rev().map(|t| t.inverse()).collect() }
    }

    /// g * self * g^-1.
    pub fn conjugate(&self, g: BraidToken) -> Result<BraidWord> {
        g.check(self.n)?;
        let mut tokens = vec![g];
        tokens.extend_from_slice(&self.tokens);
        tokens.push(g.inverse());
        Ok(BraidWord { n: self.n, tokens })
    }

    /// iota(self) * s(n, sign) on n + 1 strands.
    pub fn stabilize(&self, sign: i8) -> BraidWord {
        let mut tokens = self.tokens.clone();
        tokens.push(BraidToken::S(self.n, sign));
        BraidWord { n: self.n + 1, tokens }
    }

    /// iota(self): the closure gains a split unknot.
    pub fn add_strand(&self) -> BraidWord {
        BraidWord { n: self.n + 1, tokens: self.tokens.clone() }
    }

    /// The generator word of the image: s -> g, t -> y, with the scalar
    /// rho^{-winding} accounting for t -> rho^-1 y.
    pub fn image(&self, p: &Params) -> Result<(RingElem, GenWord)> {
        let tokens = self
            .tokens
            .iter()
            .map(|t| match *t {
                BraidToken::S(i, s) => Token::G(i, s),
                BraidToken::T(s) => Token::Y(s),
            })
            .collect();
        let scale = p.rho().pow(-self.winding() as i32)?;
        Ok((scale, GenWord::new(self.n, tokens)?))
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tokens.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.tokens.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantValues {
    pub n: usize,
    pub writhe: i64,
    /// Markov trace of the image.
    pub raw: RingElem,
    /// delta_0^{n-1} rho^{-writhe} times the raw value.
    pub normalized: RingElem,
}

pub fn invariant_values(beta: &BraidWord, p: &Params) -> Result<InvariantValues> {
    let (scale, word) = beta.image(p)?;
    let raw = trace_words(&[(scale, word)], p)?;
    let factor = p.delta0().pow(beta.n as i32 - 1)?.mul(&p.rho().pow(-beta.writhe() as i32)?);
    let normalized = factor.mul(&raw);
    Ok(InvariantValues { n: beta.n, writhe: beta.writhe(), raw, normalized })
}

/// The invariant of the closure of `beta`, raw or normalized.
pub fn invariant(beta: &BraidWord, p: &Params, normalized: bool) -> Result<RingElem> {
    let v = invariant_values(beta, p)?;
    Ok(if normalized { v.normalized } else { v.raw })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveCheck {
    pub label: String,
    pub word: BraidWord,
    pub value: RingElem,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovMoveReport {
    pub word: BraidWord,
    pub value: RingElem,
    pub checks: Vec<MoveCheck>,
}

impl MarkovMoveReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Compare the normalized invariant of `beta` with that of every conjugate
/// by a generator (and its inverse) and of both stabilizations.
pub fn markov_move_suite(beta: &BraidWord, p: &Params) -> Result<MarkovMoveReport> {
    let value = invariant(beta, p, true)?;
    let mut moves: Vec<(String, BraidWord)> = Vec::new();
    let mut gens: Vec<BraidToken> = (1..beta.n).map(|i| BraidToken::S(i, 1)).collect();
    gens.push(BraidToken::T(1));
    for g in gens {
        for h in [g, g.inverse()] {
            moves.push((format!("conjugate by {h}"), beta.conjugate(h)?));
        }
    }
    moves.push(("positive stabilization".into(), beta.stabilize(1)));
    moves.push(("negative stabilization".into(), beta.stabilize(-1)));
    let mut checks = Vec::with_capacity(moves.len());
    for (label, word) in moves {
        let v = invariant(&word, p, true)?;
        checks.push(MoveCheck { label, pass: v == value, value: v, word });
    }
    Ok(MarkovMoveReport { word: beta.clone(), value, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RhoBranch;

    #[test]
    fn parse_and_writhe() {
        let b = BraidWord::parse(3, "s1 t t s2^-1 s1^2").unwrap();
        assert_eq!(b.tokens.len(), 6);
        assert_eq!(b.writhe(), 2);
        assert_eq!(b.winding(), 2);
        assert_eq!(b.to_string(), "s1 t t s2^-1 s1 s1");
        assert!(BraidWord::parse(2, "s2").is_err());
        assert!(BraidWord::parse(2, "u1").is_err());
    }

    #[test]
    fn small_values() {
        let p = Params::universal(2, RhoBranch::default_for(2)).unwrap();
        let unknot = BraidWord::parse(1, "").unwrap();
        assert_eq!(invariant(&unknot, &p, true).unwrap(), RingElem::one());
        let s1 = BraidWord::parse(2, "s1").unwrap();
        assert_eq!(invariant(&s1, &p, true).unwrap(), RingElem::one());
        let t = BraidWord::parse(1, "t").unwrap();
        let expect = p.rho().inv().unwrap().mul(&p.delta(1).unwrap()).div(p.delta0()).unwrap();
        assert_eq!(invariant(&t, &p, true).unwrap(), expect);
    }
}
