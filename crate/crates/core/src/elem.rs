//! Algebra elements expressed in the spanning-set basis.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagram::BasisElem;
use crate::error::{Error, Result};
use crate::params::Mode;
use crate::ring::RingElem;

/// A finite combination of basis elements with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgElem {
    pub n: usize,
    pub r: usize,
    pub mode: Mode,
    terms: BTreeMap<BasisElem, RingElem>,
}

impl AlgElem {
    pub fn zero(n: usize, r: usize, mode: Mode) -> Self {
        AlgElem { n, r, mode, terms: BTreeMap::new() }
    }

    pub fn one(n: usize, r: usize, mode: Mode) -> Self {
        Self::basis(BasisElem::identity(n, r), mode)
    }

    pub fn basis(b: BasisElem, mode: Mode) -> Self {
        let mut e = AlgElem::zero(b.n, b.r, mode);
        e.terms.insert(b, RingElem::one());
        e
    }

    pub fn from_terms(n: usize, r: usize, mode: Mode, terms: impl IntoIterator<Item = (BasisElem, RingElem)>) -> Result<Self> {
        let mut e = AlgElem::zero(n, r, mode);
        for (b, c) in terms {
            e.add_term(b, c)?;
        }
        Ok(e)
    }

    pub fn add_term(&mut self, b: BasisElem, c: RingElem) -> Result<()> {
        if b.n != self.n || b.r != self.r {
            return Err(Error::InvalidInput(format!(
                "basis element for (n, r) = ({}, {}) in an element for ({}, {})",
                b.n, b.r, self.n, self.r
            )));
        }
        b.validate()?;
        if c.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&b) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&b);
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisElem, &RingElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, b: &BasisElem) -> RingElem {
        self.terms.get(b).cloned().unwrap_or_else(RingElem::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_compatible(&self, other: &AlgElem) -> Result<()> {
        if (self.n, self.r, self.mode) != (other.n, other.r, other.mode) {
            return Err(Error::InvalidInput("elements of different algebras".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &AlgElem) -> Result<AlgElem> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(b.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &AlgElem) -> Result<AlgElem> {
        self.add(&other.scale(&RingElem::from_int(-1)))
    }

    pub fn scale(&self, c: &RingElem) -> AlgElem {
        let mut out = AlgElem::zero(self.n, self.r, self.mode);
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(b, x)| (b.clone(), x.mul(c))).collect();
        out
    }

    /// For an element of the 0-strand algebra, its scalar value.
    pub fn scalar(&self) -> Result<RingElem> {
        if self.n != 0 {
            return Err(Error::InvalidInput("only 0-strand elements are scalars".into()));
        }
        Ok(self.coeff(&BasisElem::identity(0, self.r)))
    }

    pub fn to_json(&self) -> AlgElemJson {
        AlgElemJson {
            n: self.n,
            r: self.r,
            mode: self.mode,
            terms: self.terms.iter().map(|(b, c)| TermJson { basis: b.clone(), coeff: c.clone() }).collect(),
        }
    }

    pub fn from_json(j: &AlgElemJson) -> Result<Self> {
        AlgElem::from_terms(j.n, j.r, j.mode, j.terms.iter().map(|t| (t.basis.clone(), t.coeff.clone())))
    }
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(b, c)| format!("({c}) [{b}]")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub basis: BasisElem,
    pub coeff: RingElem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgElemJson {
    pub n: usize,
    pub r: usize,
    pub mode: Mode,
    pub terms: Vec<TermJson>,
}

impl Serialize for AlgElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = AlgElemJson::deserialize(d)?;
        AlgElem::from_json(&j).map_err(serde::de::Error::custom)
    }
}
