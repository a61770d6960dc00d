//! Exact rational functions over Q in a finite set of named variables.
//!
//! A [`RingElem`] is a fraction of sparse integer polynomials. Variables
//! declared invertible (q, rho, u_i) may carry negative exponents; the free
//! delta symbols of affine mode may not. Every value is kept in a canonical
//! form, so equality is structural.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable identifier. The numbering is global so that values built by
/// different parameter sets combine without a shared context.
pub type Var = u16;

pub const VAR_Q: Var = 0;
pub const VAR_RHO: Var = 1;
const U_BASE: Var = 1;
const DELTA_BASE: Var = 1000;

/// Variable id of `u_i` (1-based).
pub fn var_u(i: usize) -> Var {
    assert!((1..DELTA_BASE as usize - 1).contains(&i), "u index out of range");
    U_BASE + i as Var
}

/// Variable id of the free symbol `d_j` standing for delta_j in affine mode.
pub fn var_delta(j: usize) -> Var {
    assert!(j >= 1 && j < (Var::MAX - DELTA_BASE) as usize, "delta index out of range");
    DELTA_BASE + j as Var
}

pub fn var_name(v: Var) -> String {
    match v {
        VAR_Q => "q".to_string(),
        VAR_RHO => "rho".to_string(),
        v if v < DELTA_BASE => format!("u{}", v - U_BASE),
        v => format!("d{}", v - DELTA_BASE),
    }
}

pub fn parse_var(name: &str) -> Option<Var> {
    match name {
        "q" => Some(VAR_Q),
        "rho" => Some(VAR_RHO),
        _ => {
            let (head, idx) = name.split_at(1);
            let i: usize = idx.parse().ok()?;
            match head {
                "u" if i >= 1 && i < (DELTA_BASE - U_BASE) as usize => Some(var_u(i)),
                "d" if i >= 1 => Some(var_delta(i)),
                _ => None,
            }
        }
    }
}

/// Whether negative exponents are allowed for `v`.
pub fn is_invertible(v: Var) -> bool {
    v < DELTA_BASE
}

/// A Laurent monomial: sorted `(var, exponent)` pairs, no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Var, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: i32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn from_pairs(mut pairs: Vec<(Var, i32)>) -> Self {
        pairs.sort_unstable();
        let mut out: Vec<(Var, i32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += e,
                _ => out.push((v, e)),
            }
        }
        out.retain(|&(_, e)| e != 0);
        Monomial(out)
    }

    pub fn pairs(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: Var) -> i32 {
        self.0
            .binary_search_by_key(&v, |p| p.0)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|p| p.1 as i64).sum()
    }

    fn merge(&self, other: &Self, sign: i32) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, sign * b[j].1));
                j += 1;
            } else {
                let e = a[i].1 + sign * b[j].1;
                if e != 0 {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
        Monomial(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.merge(other, 1)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.merge(other, -1)
    }

    pub fn pow(&self, k: i32) -> Self {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }

    /// Componentwise minimum (missing exponents count as zero).
    pub fn meet(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                if a[i].1 < 0 {
                    out.push(a[i]);
                }
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                if b[j].1 < 0 {
                    out.push(b[j]);
                }
                j += 1;
            } else {
                out.push((a[i].0, a[i].1.min(b[j].1)));
                i += 1;
                j += 1;
            }
        }
        out.retain(|&(_, e)| e != 0);
        Monomial(out)
    }

    fn without(&self, v: Var) -> (Self, i32) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|p| {
                if p.0 == v {
                    e = p.1;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (Monomial(rest), e)
    }
}

impl Ord for Monomial {
    /// Lexicographic on exponent vectors, lowest variable id most significant.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, ea)), None) => return ea.cmp(&0),
                (None, Some(&(_, eb))) => return 0.cmp(&eb),
                (Some(&(va, ea)), Some(&(vb, eb))) => {
                    if va == vb {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    } else if va < vb {
                        return ea.cmp(&0);
                    } else {
                        return 0.cmp(&eb);
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse integer polynomial with Laurent monomials; terms sorted by
/// decreasing monomial, no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: Vec<(Monomial, BigInt)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Monomial::one(), c)] }
        }
    }

    pub fn monomial(m: Monomial, c: BigInt) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    pub fn var(v: Var) -> Self {
        Poly::monomial(Monomial::var(v, 1), BigInt::one())
    }

    pub fn from_terms(mut terms: Vec<(Monomial, BigInt)>) -> Self {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, BigInt)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => {
                    if let Some(last) = out.last() {
                        if last.1.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c))
                }
            }
        }
        if let Some(last) = out.last() {
            if last.1.is_zero() {
                out.pop();
            }
        }
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Monomial, BigInt)] {
        &self.terms
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

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn lead(&self) -> Option<&(Monomial, BigInt)> {
        self.terms.first()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.0.iter().map(|p| p.0))
            .collect()
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let ord = if i == a.len() {
                Ordering::Less
            } else if j == b.len() {
                Ordering::Greater
            } else {
                a[i].0.cmp(&b[j].0)
            };
            match ord {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Poly { terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, true)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.terms.len() == 1 {
            return other.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        if other.terms.len() == 1 {
            return self.mul_term(&other.terms[0].0, &other.terms[0].1);
        }
        let mut acc: HashMap<Monomial, BigInt> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                *acc.entry(ma.mul(mb)).or_insert_with(BigInt::zero) += c;
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn mul_term(&self, m: &Monomial, c: &BigInt) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(mm, cc)| (mm.mul(m), cc * c)).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        self.mul_term(&Monomial::one(), c)
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        if m.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(mm, cc)| (mm.mul(m), cc.clone())).collect() }
    }

    /// Exact division of every coefficient by `c`.
    pub fn div_int(&self, c: &BigInt) -> Self {
        if c.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(m, cc)| (m.clone(), cc / c)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Gcd of the integer coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// The largest monomial dividing every term (componentwise minimum).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut m = first.clone();
        for (t, _) in it {
            m = m.meet(t);
        }
        m
    }

    fn has_negative_exponent(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.0.iter().any(|p| p.1 < 0))
    }

    pub fn degree_in(&self, v: Var) -> i32 {
        self.terms.iter().map(|(m, _)| m.exponent(v)).max().unwrap_or(0)
    }

    /// Split into coefficients of powers of `v` (exponents must be >= 0).
    fn to_univariate(&self, v: Var) -> Vec<Poly> {
        let d = self.degree_in(v).max(0) as usize;
        let mut buckets: Vec<Vec<(Monomial, BigInt)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.without(v);
            buckets[e as usize].push((rest, c.clone()));
        }
        // Removing a variable keeps the relative order of the remaining
        // monomials within one bucket, so the buckets are already sorted.
        buckets.into_iter().map(|terms| Poly { terms }).collect()
    }

    fn from_univariate(v: Var, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (e, c) in coeffs.iter().enumerate() {
            let m = Monomial::var(v, e as i32);
            for (mm, cc) in &c.terms {
                terms.push((mm.mul(&m), cc.clone()));
            }
        }
        Poly::from_terms(terms)
    }

    /// Exact division; `None` if `other` does not divide `self`.
    /// Both operands must have nonnegative exponents.
    pub fn div_exact(&self, other: &Self) -> Option<Poly> {
        assert!(!other.is_zero(), "division by zero polynomial");
        if other.is_one() {
            return Some(self.clone());
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            let mut terms = Vec::with_capacity(self.terms.len());
            for (mm, cc) in &self.terms {
                let (qc, rc) = cc.div_rem(c);
                if !rc.is_zero() {
                    return None;
                }
                let qm = mm.div(m);
                if qm.0.iter().any(|p| p.1 < 0) {
                    return None;
                }
                terms.push((qm, qc));
            }
            return Some(Poly { terms });
        }
        let (lm, lc) = other.lead().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.lead().cloned() {
            let (qc, rc) = c.div_rem(&lc);
            if !rc.is_zero() {
                return None;
            }
            let qm = m.div(&lm);
            if qm.0.iter().any(|p| p.1 < 0) {
                return None;
            }
            rem = rem.sub(&other.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Poly::from_terms(quot))
    }

    /// Positive leading coefficient.
    fn sign_normalized(self) -> Poly {
        match self.lead() {
            Some((_, c)) if c.is_negative() => self.neg(),
            _ => self,
        }
    }

    pub fn eval(&self, assignment: &HashMap<Var, BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for &(v, e) in &m.0 {
                let x = assignment
                    .get(&v)
                    .ok_or_else(|| Error::MissingVariable(var_name(v)))?;
                if e < 0 && x.is_zero() {
                    return Err(Error::SingularSpecialization);
                }
                t *= pow_rat(x, e);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Substitute values for some variables, keeping the others symbolic.
    pub fn substitute(&self, assignment: &HashMap<Var, RingElem>) -> Result<RingElem> {
        let mut acc = RingElem::zero();
        for (m, c) in &self.terms {
            let mut t = RingElem::from_int(c.clone());
            let mut rest = Vec::new();
            for &(v, e) in &m.0 {
                match assignment.get(&v) {
                    Some(x) => t = t.mul(&x.pow(e)?),
                    None => rest.push((v, e)),
                }
            }
            let mono = RingElem::from_poly(Poly::monomial(Monomial(rest), BigInt::one()));
            acc = acc.add(&t.mul(&mono));
        }
        Ok(acc)
    }
}

fn pow_rat(x: &BigRational, e: i32) -> BigRational {
    if e >= 0 {
        num_traits::pow::pow(x.clone(), e as usize)
    } else {
        num_traits::pow::pow(x.recip(), (-e) as usize)
    }
}

/// Gcd of two polynomials with nonnegative exponents, normalized to a
/// positive leading coefficient. `gcd(0, 0) = 0`.
pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone().sign_normalized();
    }
    if b.is_zero() {
        return a.clone().sign_normalized();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.meet(&mb);
    let a1 = a.mul_monomial(&ma.pow(-1));
    let b1 = b.mul_monomial(&mb.pow(-1));
    gcd_without_monomials(&a1, &b1).mul_monomial(&mg)
}

fn int_gcd(a: &Poly, b: &Poly) -> Poly {
    Poly::constant(a.content().gcd(&b.content()))
}

fn gcd_without_monomials(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return int_gcd(a, b);
    }
    if a == b {
        return a.clone().sign_normalized();
    }
    let va = a.vars();
    let vb = b.vars();
    let common: Vec<Var> = va.intersection(&vb).copied().collect();
    // A modular image of degree 0 in v proves the gcd is free of v. If that
    // holds for every shared variable the gcd is an integer.
    let mut candidates: Vec<(Var, usize)> = Vec::new();
    for &v in &common {
        match modular_gcd_degree(a, b, v) {
            Some(0) => {}
            Some(d) => candidates.push((v, d)),
            None => candidates.push((v, usize::MAX)),
        }
    }
    if candidates.is_empty() {
        return int_gcd(a, b);
    }
    if b.len() <= a.len() {
        if a.div_exact(b).is_some() {
            return b.clone().sign_normalized();
        }
    } else if b.div_exact(a).is_some() {
        return a.clone().sign_normalized();
    }
    candidates.sort_by_key(|&(v, d)| (d, v));
    let v = candidates[0].0;
    let ua = a.to_univariate(v);
    let ub = b.to_univariate(v);
    let ca = univariate_content(&ua);
    let cb = univariate_content(&ub);
    let pa: Vec<Poly> = ua.iter().map(|c| c.div_exact(&ca).expect("content divides")).collect();
    let pb: Vec<Poly> = ub.iter().map(|c| c.div_exact(&cb).expect("content divides")).collect();
    let c = poly_gcd(&ca, &cb);
    let h = subresultant_gcd(pa, pb);
    Poly::from_univariate(v, &h).mul(&c).sign_normalized()
}

fn univariate_content(coeffs: &[Poly]) -> Poly {
    let mut nonzero: Vec<&Poly> = coeffs.iter().filter(|c| !c.is_zero()).collect();
    nonzero.sort_by_key(|c| c.len());
    let mut g = Poly::zero();
    for c in nonzero {
        g = poly_gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn trim(u: &mut Vec<Poly>) {
    while u.last().is_some_and(|c| c.is_zero()) {
        u.pop();
    }
}

fn pseudo_rem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = b.len() - 1;
    let lcb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    trim(&mut r);
    let mut e = a.len() as i64 - db as i64;
    while !r.is_empty() && r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(lcb);
        }
        for (i, bc) in b.iter().enumerate() {
            let t = bc.mul(&lr);
            r[i + shift] = r[i + shift].sub(&t);
        }
        trim(&mut r);
        e -= 1;
    }
    if e > 0 && !r.is_empty() {
        let f = lcb.pow(e as u32);
        for c in r.iter_mut() {
            *c = c.mul(&f);
        }
    }
    r
}

/// Gcd of primitive univariate polynomials via the subresultant sequence;
/// returns a primitive result.
fn subresultant_gcd(mut a: Vec<Poly>, mut b: Vec<Poly>) -> Vec<Poly> {
    trim(&mut a);
    trim(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    if b.is_empty() {
        return a;
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        if b.len() == 1 {
            return vec![Poly::one()];
        }
        let d = (a.len() - b.len()) as u32;
        let r = pseudo_rem(&a, &b);
        if r.is_empty() {
            break;
        }
        if r.len() == 1 {
            return vec![Poly::one()];
        }
        let divisor = g.mul(&h.pow(d));
        let next: Vec<Poly> = r.iter().map(|c| c.div_exact(&divisor).expect("subresultant division")).collect();
        a = b;
        b = next;
        g = a.last().unwrap().clone();
        h = if d == 0 {
            h
        } else {
            g.pow(d).div_exact(&h.pow(d - 1)).expect("subresultant division")
        };
    }
    let c = univariate_content(&b);
    b.iter().map(|x| x.div_exact(&c).expect("content divides")).collect()
}

const MOD_P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD_P as u128) as u64
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    acc
}

fn invmod(a: u64) -> u64 {
    powmod(a, MOD_P - 2)
}

fn bigint_mod(c: &BigInt) -> u64 {
    let p = BigInt::from(MOD_P);
    let m = c.mod_floor(&p);
    m.iter_u64_digits().next().unwrap_or(0)
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Image of `p` in F_p[v] after substituting `point` for the other variables.
fn modular_image(p: &Poly, v: Var, point: &HashMap<Var, u64>) -> Vec<u64> {
    let d = p.degree_in(v).max(0) as usize;
    let mut out = vec![0u64; d + 1];
    for (m, c) in &p.terms {
        let mut t = bigint_mod(c);
        let mut e_v = 0usize;
        for &(w, e) in &m.0 {
            if w == v {
                e_v = e as usize;
            } else {
                t = mulmod(t, powmod(point[&w], e as u64));
            }
        }
        out[e_v] = (out[e_v] + t) % MOD_P;
    }
    out
}

fn trim_mod(u: &mut Vec<u64>) {
    while u.last() == Some(&0) {
        u.pop();
    }
}

fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    trim_mod(&mut a);
    trim_mod(&mut b);
    while !b.is_empty() {
        // a <- a mod b
        let inv = invmod(*b.last().unwrap());
        while a.len() >= b.len() {
            let f = mulmod(*a.last().unwrap(), inv);
            let shift = a.len() - b.len();
            for (i, &bc) in b.iter().enumerate() {
                a[i + shift] = (a[i + shift] + MOD_P - mulmod(f, bc)) % MOD_P;
            }
            trim_mod(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Degree in `v` of the gcd of modular images, an upper bound for the true
/// gcd degree. `None` if no good evaluation point was found.
fn modular_gcd_degree(a: &Poly, b: &Poly, v: Var) -> Option<usize> {
    let mut others: BTreeSet<Var> = a.vars();
    others.extend(b.vars());
    others.remove(&v);
    let mut state = 0x1234_5678_u64 ^ ((a.len() as u64) << 20) ^ (b.len() as u64) ^ ((v as u64) << 40);
    let da = a.degree_in(v) as usize;
    let db = b.degree_in(v) as usize;
    for _ in 0..3 {
        let point: HashMap<Var, u64> = others.iter().map(|&w| (w, splitmix(&mut state) % (MOD_P - 2) + 2)).collect();
        let ia = modular_image(a, v, &point);
        let ib = modular_image(b, v, &point);
        if ia[da] == 0 || ib[db] == 0 {
            continue;
        }
        return Some(gcd_degree_mod(ia, ib));
    }
    None
}

/// Exact element of Q(vars): canonical fraction `num / den`.
///
/// Canonical form: `den` has nonnegative exponents, no monomial factor in
/// invertible variables, positive leading coefficient; `num` and `den` are
/// coprime and their integer contents are jointly coprime.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RingElem {
    num: Poly,
    den: Poly,
}

impl Default for RingElem {
    fn default() -> Self {
        RingElem::zero()
    }
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RingElem { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int<T: Into<BigInt>>(c: T) -> Self {
        RingElem { num: Poly::constant(c.into()), den: Poly::one() }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        RingElem::from_parts(Poly::constant(r.numer().clone()), Poly::constant(r.denom().clone()))
            .expect("nonzero denominator")
    }

    pub fn var(v: Var) -> Self {
        RingElem { num: Poly::var(v), den: Poly::one() }
    }

    pub fn monomial(v: Var, e: i32) -> Self {
        if e < 0 && !is_invertible(v) {
            return RingElem::from_parts(Poly::one(), Poly::monomial(Monomial::var(v, -e), BigInt::one()))
                .expect("nonzero");
        }
        RingElem { num: Poly::monomial(Monomial::var(v, e), BigInt::one()), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        RingElem::from_parts(p, Poly::one()).expect("nonzero denominator")
    }

    /// Build and canonicalize `num / den`.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(normalize(num, den))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.constant_value()?;
        let d = self.den.constant_value()?;
        Some(BigRational::new(n, d))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    pub fn neg(&self) -> Self {
        RingElem { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return RingElem { num: self.num.add(&other.num), den: Poly::one() };
        }
        if self.den == other.den {
            return normalize(self.num.add(&other.num), self.den.clone());
        }
        if let (Some(a), Some(b)) = (self.as_rational(), other.as_rational()) {
            return RingElem::from_rational(&(a + b));
        }
        let g = poly_gcd(&self.den, &other.den);
        let d1 = self.den.div_exact(&g).expect("gcd divides");
        let d2 = other.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&d2).add(&other.num.mul(&d1));
        let den = self.den.mul(&d2);
        normalize(num, den)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RingElem::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            if self.num.len() == 1 || other.num.len() == 1 || self.num.is_constant() || other.num.is_constant() {
                return RingElem { num: self.num.mul(&other.num), den: Poly::one() };
            }
            return RingElem { num: self.num.mul(&other.num), den: Poly::one() };
        }
        if let (Some(a), Some(b)) = (self.as_rational(), other.as_rational()) {
            return RingElem::from_rational(&(a * b));
        }
        // Cross-cancel: gcd(a, d) and gcd(c, b) are the only possible common factors.
        let (a, ma) = shift_nonneg(&self.num);
        let (c, mc) = shift_nonneg(&other.num);
        let g1 = poly_gcd(&a, &other.den);
        let g2 = poly_gcd(&c, &self.den);
        let a = a.div_exact(&g1).expect("gcd divides");
        let d = other.den.div_exact(&g1).expect("gcd divides");
        let c = c.div_exact(&g2).expect("gcd divides");
        let b = self.den.div_exact(&g2).expect("gcd divides");
        let num = a.mul(&c).mul_monomial(&ma.mul(&mc));
        let den = b.mul(&d);
        finish(num, den)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(normalize(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i32) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut out = RingElem::one();
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b);
            }
        }
        Ok(out)
    }

    /// Evaluate at rational values for every variable present.
    pub fn specialize(&self, assignment: &HashMap<Var, BigRational>) -> Result<BigRational> {
        if self.is_zero() {
            return Ok(BigRational::zero());
        }
        let d = self.den.eval(assignment)?;
        if d.is_zero() {
            return Err(Error::SingularSpecialization);
        }
        Ok(self.num.eval(assignment)? / d)
    }

    /// Substitute ring elements for some variables.
    pub fn substitute(&self, assignment: &HashMap<Var, RingElem>) -> Result<RingElem> {
        let n = self.num.substitute(assignment)?;
        let d = self.den.substitute(assignment)?;
        n.div(&d).map_err(|_| Error::SingularSpecialization)
    }

    /// Re-run canonicalization (identity on canonical values).
    pub fn renormalized(&self) -> Self {
        normalize(self.num.clone(), self.den.clone())
    }

    pub fn to_json(&self) -> RingElemJson {
        let vars: Vec<Var> = self.vars().into_iter().collect();
        let enc = |p: &Poly| -> Vec<(Vec<i32>, String)> {
            p.terms
                .iter()
                .map(|(m, c)| (vars.iter().map(|&v| m.exponent(v)).collect(), c.to_string()))
                .collect()
        };
        RingElemJson {
            vars: vars.iter().map(|&v| var_name(v)).collect(),
            num: enc(&self.num),
            den: enc(&self.den),
        }
    }

    pub fn from_json(j: &RingElemJson) -> Result<Self> {
        let vars: Vec<Var> = j
            .vars
            .iter()
            .map(|n| parse_var(n).ok_or_else(|| Error::Parse(format!("unknown variable {n}"))))
            .collect::<Result<_>>()?;
        let dec = |terms: &[(Vec<i32>, String)]| -> Result<Poly> {
            let mut out = Vec::new();
            for (e, c) in terms {
                if e.len() != vars.len() {
                    return Err(Error::Parse("exponent vector length mismatch".into()));
                }
                let c: BigInt = c.parse().map_err(|_| Error::Parse(format!("bad coefficient {c}")))?;
                let m = Monomial::from_pairs(vars.iter().copied().zip(e.iter().copied()).collect());
                out.push((m, c));
            }
            Ok(Poly::from_terms(out))
        };
        RingElem::from_parts(dec(&j.num)?, dec(&j.den)?)
    }
}

/// JSON shape of a [`RingElem`]: variable header plus dense exponent vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingElemJson {
    pub vars: Vec<String>,
    pub num: Vec<(Vec<i32>, String)>,
    pub den: Vec<(Vec<i32>, String)>,
}

impl Serialize for RingElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RingElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RingElemJson::deserialize(d)?;
        RingElem::from_json(&j).map_err(serde::de::Error::custom)
    }
}

fn shift_nonneg(p: &Poly) -> (Poly, Monomial) {
    if !p.has_negative_exponent() {
        return (p.clone(), Monomial::one());
    }
    let m = p.monomial_content().meet(&Monomial::one());
    (p.mul_monomial(&m.pow(-1)), m)
}

fn normalize(num: Poly, den: Poly) -> RingElem {
    if num.is_zero() {
        return RingElem::zero();
    }
    let mn = num.monomial_content();
    let md = den.monomial_content();
    let n = num.mul_monomial(&mn.pow(-1));
    let d = den.mul_monomial(&md.pow(-1));
    let (n, d) = if d.is_constant() || n.is_constant() {
        (n, d)
    } else {
        let g = poly_gcd(&n, &d);
        if g.is_one() {
            (n, d)
        } else {
            (n.div_exact(&g).expect("gcd divides"), d.div_exact(&g).expect("gcd divides"))
        }
    };
    finish(n.mul_monomial(&mn.div(&md)), d)
}

/// Fix units: monomial factors, integer content, and sign. Assumes the
/// polynomial parts of `num` and `den` are already coprime.
fn finish(num: Poly, den: Poly) -> RingElem {
    let md = den.monomial_content();
    let mut num = num.mul_monomial(&md.pow(-1));
    let mut den = den.mul_monomial(&md.pow(-1));
    // Non-invertible variables with negative exponent move to the denominator.
    let mn = num.monomial_content();
    let bad: Vec<(Var, i32)> = mn.0.iter().filter(|p| p.1 < 0 && !is_invertible(p.0)).copied().collect();
    if !bad.is_empty() {
        let m = Monomial(bad);
        num = num.mul_monomial(&m.pow(-1));
        den = den.mul_monomial(&m.pow(-1));
    }
    let c = num.content().gcd(&den.content());
    let mut num = num.div_int(&c);
    let mut den = den.div_int(&c);
    if den.lead().is_some_and(|(_, c)| c.is_negative()) {
        num = num.neg();
        den = den.neg();
    }
    RingElem { num, den }
}

fn fmt_poly(p: &Poly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (i, (m, c)) in p.terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { " - " } else { " + " })?;
        }
        let mut parts = Vec::new();
        if !a.is_one() || m.is_one() {
            parts.push(a.to_string());
        }
        for &(v, e) in &m.0 {
            if e == 1 {
                parts.push(var_name(v));
            } else {
                parts.push(format!("{}^{}", var_name(v), e));
            }
        }
        write!(f, "{}", parts.join("*"))?;
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(self, f)
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            fmt_poly(&self.num, f)
        } else {
            let wrap_num = self.num.len() > 1;
            if wrap_num {
                write!(f, "(")?;
            }
            fmt_poly(&self.num, f)?;
            if wrap_num {
                write!(f, ")")?;
            }
            write!(f, "/")?;
            let wrap_den = self.den.len() > 1 || !self.den.terms[0].0.is_one();
            if wrap_den {
                write!(f, "(")?;
            }
            fmt_poly(&self.den, f)?;
            if wrap_den {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

/// Parse a rational literal such as `3`, `-2/7`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> RingElem {
        RingElem::var(VAR_Q)
    }

    #[test]
    fn inverse_pair() {
        let q = q();
        assert_eq!(q.mul(&q.inv().unwrap()), RingElem::one());
    }

    #[test]
    fn factor_cancellation() {
        let q = q();
        let one = RingElem::one();
        let num = q.mul(&q).sub(&one);
        let den = q.sub(&one);
        assert_eq!(num.div(&den).unwrap(), q.add(&one));
    }

    #[test]
    fn self_division() {
        let q = q();
        let x = q.sub(&q.inv().unwrap());
        assert_eq!(x.div(&x).unwrap(), RingElem::one());
    }

    #[test]
    fn division_by_zero_is_error() {
        assert!(matches!(RingElem::one().div(&RingElem::zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn specialize_q_plus_inverse() {
        let q = q();
        let x = q.add(&q.inv().unwrap());
        let mut a = HashMap::new();
        a.insert(VAR_Q, BigRational::from_integer(2.into()));
        assert_eq!(x.specialize(&a).unwrap(), BigRational::new(5.into(), 2.into()));
        assert_eq!(RingElem::zero().specialize(&HashMap::new()).unwrap(), BigRational::zero());
    }

    #[test]
    fn specialize_singular_point() {
        let q = q();
        let z = q.inv().unwrap().sub(&q);
        let x = RingElem::one().div(&z).unwrap();
        let mut a = HashMap::new();
        a.insert(VAR_Q, BigRational::one());
        assert!(matches!(x.specialize(&a), Err(Error::SingularSpecialization)));
        assert!(matches!(x.specialize(&HashMap::new()), Err(Error::MissingVariable(_))));
    }

    #[test]
    fn multivariate_gcd_cancels() {
        let q = q();
        let u = RingElem::var(var_u(1));
        let one = RingElem::one();
        let f = q.add(&u).mul(&q.mul(&u).sub(&one));
        let g = q.add(&u).mul(&q.add(&one));
        let h = f.div(&g).unwrap();
        assert_eq!(h, q.mul(&u).sub(&one).div(&q.add(&one)).unwrap());
        assert_eq!(h.num().len(), 2);
    }

    #[test]
    fn non_invertible_symbol_stays_in_denominator() {
        let d = RingElem::var(var_delta(1));
        let x = RingElem::one().div(&d).unwrap();
        assert!(x.num().is_one());
        assert_eq!(x.den(), &Poly::var(var_delta(1)));
        assert_eq!(x.mul(&d), RingElem::one());
    }

    #[test]
    fn json_round_trip() {
        let q = q();
        let u = RingElem::var(var_u(2));
        let x = q.add(&u.pow(-3).unwrap()).div(&q.sub(&RingElem::from_int(7))).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let y: RingElem = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        assert_eq!(serde_json::to_string(&y).unwrap(), s);
    }

    #[test]
    fn display_is_readable() {
        let q = q();
        let x = q.sub(&RingElem::one()).div(&q.add(&RingElem::from_int(2))).unwrap();
        assert_eq!(x.to_string(), "(q - 1)/(q + 2)");
    }
}
