//! Ground-ring parameters: rho, q, u_i, the signed symmetric functions a_k and
//! the two-sided table of loop values delta_j.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ring::{self, RingElem, Var, VAR_Q, VAR_RHO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    UniversalCyclotomic,
    NumericCyclotomic,
    FreeAffine,
}

impl Mode {
    pub fn is_cyclotomic(self) -> bool {
        !matches!(self, Mode::FreeAffine)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::UniversalCyclotomic => "universal-cyclotomic",
            Mode::NumericCyclotomic => "numeric-cyclotomic",
            Mode::FreeAffine => "free-affine",
        })
    }
}

/// Root of the quadratic (even r) or sign choice (odd r) for rho.
///
/// Odd r: `Plus` gives rho = a_0, `Minus` gives rho = -a_0.
/// Even r: `A` gives rho = a_0 q^-1, `B` gives rho = -a_0 q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoBranch {
    Plus,
    Minus,
    A,
    B,
}

impl RhoBranch {
    pub fn default_for(r: usize) -> Self {
        if r % 2 == 1 {
            RhoBranch::Plus
        } else {
            RhoBranch::A
        }
    }

    pub fn all_for(r: usize) -> [RhoBranch; 2] {
        if r % 2 == 1 {
            [RhoBranch::Plus, RhoBranch::Minus]
        } else {
            [RhoBranch::A, RhoBranch::B]
        }
    }

    pub fn valid_for(self, r: usize) -> bool {
        self.is_odd_branch() == (r % 2 == 1)
    }

    fn is_odd_branch(self) -> bool {
        matches!(self, RhoBranch::Plus | RhoBranch::Minus)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(RhoBranch::Plus),
            "minus" | "-" => Ok(RhoBranch::Minus),
            "a" => Ok(RhoBranch::A),
            "b" => Ok(RhoBranch::B),
            _ => Err(Error::Parse(format!("unknown rho branch {s:?}"))),
        }
    }
}

impl fmt::Display for RhoBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoBranch::Plus => "plus",
            RhoBranch::Minus => "minus",
            RhoBranch::A => "a",
            RhoBranch::B => "b",
        })
    }
}

/// A complete parameter assignment.
///
/// Immutable apart from the lazily filled delta table.
pub struct Params {
    mode: Mode,
    r: usize,
    branch: Option<RhoBranch>,
    q: RingElem,
    rho: RingElem,
    u: Vec<RingElem>,
    a: Vec<RingElem>,
    /// delta_0 .. delta_{len-1}; beyond this the recurrences apply.
    seeds: Vec<RingElem>,
    /// Free-affine mode: |j| must not exceed this.
    window: Option<usize>,
    /// Numeric mode: the rational values of q and u_i.
    numeric: Option<BTreeMap<String, BigRational>>,
    memo: RwLock<HashMap<i64, RingElem>>,
}

impl Clone for Params {
    fn clone(&self) -> Self {
        Params {
            mode: self.mode,
            r: self.r,
            branch: self.branch,
            q: self.q.clone(),
            rho: self.rho.clone(),
            u: self.u.clone(),
            a: self.a.clone(),
            seeds: self.seeds.clone(),
            window: self.window,
            numeric: self.numeric.clone(),
            memo: RwLock::new(self.memo.read().clone()),
        }
    }
}

impl PartialEq for Params {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode
            && self.r == other.r
            && self.branch == other.branch
            && self.q == other.q
            && self.rho == other.rho
            && self.u == other.u
            && self.a == other.a
            && self.seeds == other.seeds
            && self.window == other.window
            && self.numeric == other.numeric
    }
}

impl fmt::Debug for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Params")
            .field("mode", &self.mode)
            .field("r", &self.r)
            .field("branch", &self.branch)
            .field("rho", &self.rho.to_string())
            .field("seeds", &self.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

/// Coefficients of prod (y - u_i): `a[k]` multiplies y^k, `a[r] = 1`.
pub fn signed_elementary(u: &[RingElem]) -> Vec<RingElem> {
    let mut poly = vec![RingElem::one()];
    for ui in u {
        let mut next = vec![RingElem::zero(); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] = next[k + 1].add(c);
            next[k] = next[k].sub(&c.mul(ui));
        }
        poly = next;
    }
    poly
}

fn ceil_half(x: usize) -> usize {
    x.div_ceil(2)
}

/// The bracketed sum of the admissibility relation for index `l`,
/// restricted to the delta terms with index below `upto`.
fn eq51_bracket(r: usize, l: usize, a: &[RingElem], delta: &[RingElem], upto: usize) -> RingElem {
    let mut s = RingElem::zero();
    for j in 1..=(r - l).min(upto.saturating_sub(1)) {
        s = s.add(&a[j + l].mul(&delta[j]));
    }
    let lo = (l + 1).max(ceil_half(r));
    let hi = (l + r) / 2;
    for j in lo..=hi {
        s = s.sub(&a[2 * j - l]);
    }
    let lo = ceil_half(l);
    let hi = l.min(ceil_half(r).saturating_sub(1));
    if ceil_half(r) >= 1 {
        for j in lo..=hi {
            s = s.add(&a[2 * j - l]);
        }
    }
    s
}

fn rho_for(branch: RhoBranch, a0: &RingElem, q: &RingElem) -> Result<RingElem> {
    Ok(match branch {
        RhoBranch::Plus => a0.clone(),
        RhoBranch::Minus => a0.neg(),
        RhoBranch::A => a0.div(q)?,
        RhoBranch::B => a0.mul(q).neg(),
    })
}

fn delta0_from(rho: &RingElem, q: &RingElem) -> Result<RingElem> {
    let z = q.inv()?.sub(q);
    Ok(rho.inv()?.sub(rho).div(&z)?.add(&RingElem::one()))
}

/// Solve the admissibility relations for rho and delta_0..delta_{r-1}.
fn solve_admissible(
    r: usize,
    branch: RhoBranch,
    q: &RingElem,
    u: &[RingElem],
) -> Result<(RingElem, Vec<RingElem>, Vec<RingElem>)> {
    let a = signed_elementary(u);
    let a0 = a[0].clone();
    let rho = rho_for(branch, &a0, q)?;
    let qq = q.sub(&q.inv()?);
    let mut delta = vec![RingElem::zero(); r];
    delta[0] = delta0_from(&rho, q)?;
    for l in (1..r).rev() {
        let m = r - l;
        let lead = rho.mul(&a[l].sub(&a[r - l].div(&a0)?));
        let s = eq51_bracket(r, l, &a, &delta, m);
        // lead + qq * (s + a_r delta_m) = 0 with a_r = 1
        delta[m] = lead.div(&qq)?.neg().sub(&s);
    }
    Ok((rho, a, delta))
}

impl Params {
    /// Universal admissible parameters over Q(q, u_1..u_r).
    pub fn universal(r: usize, branch: RhoBranch) -> Result<Params> {
        if r == 0 {
            return Err(Error::InvalidInput("r must be at least 1".into()));
        }
        if !branch.valid_for(r) {
            return Err(Error::InvalidInput(format!("branch {branch} does not apply to r = {r}")));
        }
        let q = RingElem::var(VAR_Q);
        let u: Vec<RingElem> = (1..=r).map(|i| RingElem::var(ring::var_u(i))).collect();
        let (rho, a, seeds) = solve_admissible(r, branch, &q, &u)?;
        Ok(Params::assemble(Mode::UniversalCyclotomic, r, Some(branch), q, rho, u, a, seeds, None, None))
    }

    /// Admissible parameters at rational values of q and u_i.
    pub fn numeric(r: usize, branch: RhoBranch, q: BigRational, u: Vec<BigRational>) -> Result<Params> {
        if r == 0 || u.len() != r {
            return Err(Error::InvalidInput(format!("expected {r} values for u, got {}", u.len())));
        }
        if !branch.valid_for(r) {
            return Err(Error::InvalidInput(format!("branch {branch} does not apply to r = {r}")));
        }
        if q.is_zero() || q.abs().is_one() {
            return Err(Error::InvalidInput("q must avoid 0 and +-1 (q - q^-1 must be invertible)".into()));
        }
        if u.iter().any(|x| x.is_zero()) {
            return Err(Error::InvalidInput("u_i must be nonzero".into()));
        }
        let mut numeric = BTreeMap::new();
        numeric.insert("q".to_string(), q.clone());
        for (i, x) in u.iter().enumerate() {
            numeric.insert(format!("u{}", i + 1), x.clone());
        }
        let qe = RingElem::from_rational(&q);
        let ue: Vec<RingElem> = u.iter().map(RingElem::from_rational).collect();
        let (rho, a, seeds) = solve_admissible(r, branch, &qe, &ue)?;
        if seeds[0].is_zero() {
            return Err(Error::InvalidInput("delta_0 vanishes at this specialization".into()));
        }
        Ok(Params::assemble(Mode::NumericCyclotomic, r, Some(branch), qe, rho, ue, a, seeds, None, Some(numeric)))
    }

    /// Affine parameters: q, rho and delta_1..delta_window are free symbols.
    pub fn free_affine(window: usize) -> Result<Params> {
        let q = RingElem::var(VAR_Q);
        let rho = RingElem::var(VAR_RHO);
        let mut seeds = vec![delta0_from(&rho, &q)?];
        for j in 1..=window {
            seeds.push(RingElem::var(ring::var_delta(j)));
        }
        Ok(Params::assemble(Mode::FreeAffine, 0, None, q, rho, vec![], vec![], seeds, Some(window), None))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        mode: Mode,
        r: usize,
        branch: Option<RhoBranch>,
        q: RingElem,
        rho: RingElem,
        u: Vec<RingElem>,
        a: Vec<RingElem>,
        seeds: Vec<RingElem>,
        window: Option<usize>,
        numeric: Option<BTreeMap<String, BigRational>>,
    ) -> Params {
        Params { mode, r, branch, q, rho, u, a, seeds, window, numeric, memo: RwLock::new(HashMap::new()) }
    }

    /// Copy with delta_j pinned to `value` (no admissibility guarantee).
    ///
    /// The seed window is first widened to cover delta_0..delta_max(j, r), so
    /// the pinned value is not recomputed by the recurrences.
    pub fn with_delta(&self, j: usize, value: RingElem) -> Result<Params> {
        let upto = j.max(self.r);
        if let Some(w) = self.window {
            if j > w {
                return Err(Error::DeltaWindow { index: j as i64, window: w });
            }
        }
        let mut seeds = Vec::with_capacity(upto + 1);
        for k in 0..=upto.max(self.seeds.len() - 1) {
            seeds.push(self.delta(k as i64)?);
        }
        seeds[j] = value;
        let mut p = self.clone();
        p.seeds = seeds;
        p.memo = RwLock::new(HashMap::new());
        Ok(p)
    }

    /// Copy with rho replaced (no admissibility guarantee).
    pub fn with_rho(&self, rho: RingElem) -> Params {
        let mut p = self.clone();
        p.rho = rho;
        p.memo = RwLock::new(HashMap::new());
        p
    }

    /// Evaluate every parameter at rational q and u_i.
    pub fn specialize(&self, q: &BigRational, u: &[BigRational]) -> Result<Params> {
        let branch = self.branch.ok_or_else(|| Error::Unsupported("specializing affine parameters".into()))?;
        let p = Params::numeric(self.r, branch, q.clone(), u.to_vec())?;
        let mut asg = HashMap::new();
        asg.insert(VAR_Q, q.clone());
        for (i, x) in u.iter().enumerate() {
            asg.insert(ring::var_u(i + 1), x.clone());
        }
        for (s, t) in self.seeds.iter().zip(&p.seeds) {
            if &RingElem::from_rational(&s.specialize(&asg)?) != t {
                return Err(Error::Invariant("specialized seed disagrees with direct solve".into()));
            }
        }
        Ok(p)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn branch(&self) -> Option<RhoBranch> {
        self.branch
    }

    pub fn q(&self) -> &RingElem {
        &self.q
    }

    pub fn rho(&self) -> &RingElem {
        &self.rho
    }

    pub fn u(&self) -> &[RingElem] {
        &self.u
    }

    /// Signed elementary symmetric functions a_0..a_r (empty in affine mode).
    pub fn a(&self) -> &[RingElem] {
        &self.a
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    pub fn numeric_assignment(&self) -> Option<&BTreeMap<String, BigRational>> {
        self.numeric.as_ref()
    }

    /// Evaluate a ring value at the numeric assignment of these parameters.
    pub fn coerce_rational(&self, x: &RingElem) -> Result<BigRational> {
        if let Some(c) = x.as_rational() {
            return Ok(c);
        }
        let numeric = self
            .numeric
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("{x} is not a rational constant")))?;
        let mut asg = HashMap::new();
        for (name, v) in numeric {
            if let Some(var) = ring::parse_var(name) {
                asg.insert(var, v.clone());
            }
        }
        x.specialize(&asg)
    }

    /// q^-1 - q, the skein coefficient.
    pub fn z(&self) -> RingElem {
        self.q.inv().expect("q invertible").sub(&self.q)
    }

    pub fn delta0(&self) -> &RingElem {
        &self.seeds[0]
    }

    pub fn seeds(&self) -> &[RingElem] {
        &self.seeds
    }

    /// delta_j for any integer j (memoized).
    pub fn delta(&self, j: i64) -> Result<RingElem> {
        if j >= 0 && (j as usize) < self.seeds.len() {
            return Ok(self.seeds[j as usize].clone());
        }
        if let Some(w) = self.window {
            if j.unsigned_abs() as usize > w {
                return Err(Error::DeltaWindow { index: j, window: w });
            }
        }
        if let Some(v) = self.memo.read().get(&j) {
            return Ok(v.clone());
        }
        let mut memo = self.memo.write();
        if let Some(v) = memo.get(&j) {
            return Ok(v.clone());
        }
        let get = |memo: &HashMap<i64, RingElem>, k: i64| -> RingElem {
            if k >= 0 && (k as usize) < self.seeds.len() {
                self.seeds[k as usize].clone()
            } else {
                memo[&k].clone()
            }
        };
        if self.mode.is_cyclotomic() {
            let r = self.r as i64;
            if j >= r {
                for k in r..=j {
                    if memo.contains_key(&k) {
                        continue;
                    }
                    // delta_{b+r} = -sum_{i<r} a_i delta_{b+i}
                    let b = k - r;
                    let mut s = RingElem::zero();
                    for i in 0..r {
                        s = s.add(&self.a[i as usize].mul(&get(&memo, b + i)));
                    }
                    memo.insert(k, s.neg());
                }
            } else {
                let a0inv = self.a[0].inv()?;
                for k in (j..0).rev() {
                    if memo.contains_key(&k) {
                        continue;
                    }
                    // delta_b = -a_0^-1 sum_{i=1}^r a_i delta_{b+i}
                    let mut s = RingElem::zero();
                    for i in 1..=r {
                        s = s.add(&self.a[i as usize].mul(&get(&memo, k + i)));
                    }
                    memo.insert(k, s.mul(&a0inv).neg());
                }
            }
        } else {
            let rho_inv = self.rho.inv()?;
            let rho_inv2 = rho_inv.mul(&rho_inv);
            let z = self.z();
            for m in 1..=(-j) {
                if memo.contains_key(&-m) {
                    continue;
                }
                let mut s = RingElem::zero();
                for k in 1..m {
                    let t = get(&memo, k).mul(&get(&memo, k - m)).sub(&get(&memo, 2 * k - m));
                    s = s.add(&t);
                }
                let v = rho_inv2.mul(&get(&memo, m)).add(&z.mul(&rho_inv).mul(&s));
                memo.insert(-m, v);
            }
        }
        Ok(memo[&j].clone())
    }

    /// sum_{k=0}^r a_k delta_{k+a}.
    pub fn weak_admissibility_residual(&self, shift: i64) -> Result<RingElem> {
        self.require_cyclotomic()?;
        let mut s = RingElem::zero();
        for (k, ak) in self.a.iter().enumerate() {
            s = s.add(&ak.mul(&self.delta(shift + k as i64)?));
        }
        Ok(s)
    }

    /// Left-hand sides of the admissibility relations.
    pub fn check_admissible(&self) -> Result<AdmissibilityReport> {
        self.require_cyclotomic()?;
        let r = self.r;
        let a = &self.a;
        let a0 = &a[0];
        let qq = self.q.sub(&self.q.inv()?);
        let mut relations = Vec::new();
        for l in 1..r {
            let lead = self.rho.mul(&a[l].sub(&a[r - l].div(a0)?));
            let bracket = eq51_bracket(r, l, a, &self.seeds, r - l + 1);
            relations.push(AdmissibilityTerm { l, residual: lead.add(&qq.mul(&bracket)) });
        }
        let lhs = self.rho.inv()?.mul(a0).sub(&self.rho.mul(&a0.inv()?));
        let rhs = if r % 2 == 1 { RingElem::zero() } else { qq };
        let rho_residual = lhs.sub(&rhs);
        let skein_residual = self.rho.inv()?.sub(&self.rho).sub(&self.z().mul(&self.seeds[0].sub(&RingElem::one())));
        let pass = relations.iter().all(|t| t.residual.is_zero()) && rho_residual.is_zero() && skein_residual.is_zero();
        Ok(AdmissibilityReport { relations, rho_residual, skein_residual, pass })
    }

    /// Value of a disjoint union of unlinked loops with the given windings.
    pub fn eval_closed_loops(&self, windings: &[i64]) -> Result<RingElem> {
        let mut acc = RingElem::one();
        for &j in windings {
            acc = acc.mul(&self.rho.pow(-(j as i32))?).mul(&self.delta(j)?);
        }
        Ok(acc)
    }

    fn require_cyclotomic(&self) -> Result<()> {
        if self.mode.is_cyclotomic() {
            Ok(())
        } else {
            Err(Error::Unsupported("operation requires cyclotomic parameters".into()))
        }
    }

    /// Variables appearing in the parameter values.
    pub fn variables(&self) -> Vec<Var> {
        let mut vs = std::collections::BTreeSet::new();
        for x in [&self.q, &self.rho].into_iter().chain(self.u.iter()).chain(self.seeds.iter()) {
            vs.extend(x.vars());
        }
        vs.into_iter().collect()
    }

    pub fn to_json(&self) -> ParamsJson {
        ParamsJson {
            mode: self.mode,
            r: self.r,
            branch: self.branch,
            variables: self.variables().into_iter().map(ring::var_name).collect(),
            q: self.q.clone(),
            rho: self.rho.clone(),
            u: self.u.clone(),
            a: self.a.clone(),
            delta: self.seeds.clone(),
            window: self.window,
            numeric: self
                .numeric
                .as_ref()
                .map(|m| m.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()),
        }
    }

    pub fn from_json(j: &ParamsJson) -> Result<Params> {
        let numeric = match &j.numeric {
            Some(m) => Some(
                m.iter()
                    .map(|(k, v)| Ok((k.clone(), ring::parse_rational(v)?)))
                    .collect::<Result<BTreeMap<_, _>>>()?,
            ),
            None => None,
        };
        if j.delta.is_empty() {
            return Err(Error::Parse("params need delta_0".into()));
        }
        if j.mode.is_cyclotomic() && (j.a.len() != j.r + 1 || j.u.len() != j.r) {
            return Err(Error::Parse("inconsistent r, u and a".into()));
        }
        Ok(Params::assemble(
            j.mode,
            j.r,
            j.branch,
            j.q.clone(),
            j.rho.clone(),
            j.u.clone(),
            j.a.clone(),
            j.delta.clone(),
            j.window,
            numeric,
        ))
    }

    /// Content hash of the parameter values; keys persistent caches.
    pub fn fingerprint(&self) -> String {
        let s = serde_json::to_string(&self.to_json()).expect("params serialize");
        hex::encode(Sha256::digest(s.as_bytes()))
    }
}

/// JSON form of [`Params`]; `delta` holds the seed values delta_0, delta_1, ...
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub mode: Mode,
    pub r: usize,
    pub branch: Option<RhoBranch>,
    pub variables: Vec<String>,
    pub q: RingElem,
    pub rho: RingElem,
    pub u: Vec<RingElem>,
    pub a: Vec<RingElem>,
    pub delta: Vec<RingElem>,
    pub window: Option<usize>,
    pub numeric: Option<BTreeMap<String, String>>,
}

impl Serialize for Params {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ParamsJson::deserialize(d)?;
        Params::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityTerm {
    pub l: usize,
    pub residual: RingElem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// One entry per l in 1..r.
    pub relations: Vec<AdmissibilityTerm>,
    /// rho^-1 a_0 - rho a_0^-1 minus its required value.
    pub rho_residual: RingElem,
    /// rho^-1 - rho - (q^-1 - q)(delta_0 - 1).
    pub skein_residual: RingElem,
    pub pass: bool,
}

/// Rational from a small integer ratio.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u1() -> RingElem {
        RingElem::var(ring::var_u(1))
    }

    #[test]
    fn r1_rho_is_a0() {
        let p = Params::universal(1, RhoBranch::Plus).unwrap();
        assert_eq!(p.rho(), &u1().neg());
        assert_eq!(p.a()[0], u1().neg());
    }

    #[test]
    fn r1_closed_form() {
        let p = Params::universal(1, RhoBranch::Plus).unwrap();
        for j in -5..=5i64 {
            let expect = u1().pow(j as i32).unwrap().mul(p.delta0());
            assert_eq!(p.delta(j).unwrap(), expect, "j = {j}");
        }
    }

    #[test]
    fn r2_branch_a_rho() {
        let p = Params::universal(2, RhoBranch::A).unwrap();
        let u2 = RingElem::var(ring::var_u(2));
        let q = RingElem::var(VAR_Q);
        assert_eq!(p.rho(), &u1().mul(&u2).div(&q).unwrap());
    }

    #[test]
    fn branch_mismatch_rejected() {
        assert!(Params::universal(2, RhoBranch::Plus).is_err());
        assert!(Params::universal(3, RhoBranch::A).is_err());
    }

    #[test]
    fn delta0_relation() {
        for r in 1..=3 {
            for b in RhoBranch::all_for(r) {
                let p = Params::universal(r, b).unwrap();
                let lhs = p.rho().inv().unwrap().sub(p.rho());
                let rhs = p.z().mul(&p.delta0().sub(&RingElem::one()));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn residual_window() {
        for r in 1..=3 {
            for b in RhoBranch::all_for(r) {
                let p = Params::universal(r, b).unwrap();
                for a in -5..=5 {
                    assert!(p.weak_admissibility_residual(a).unwrap().is_zero(), "r={r} {b} a={a}");
                }
                assert!(p.check_admissible().unwrap().pass);
            }
        }
    }

    #[test]
    fn perturbed_delta1_breaks_residual() {
        let p = Params::numeric(2, RhoBranch::A, rat(3, 2), vec![rat(2, 1), rat(-5, 3)]).unwrap();
        let bad = p.with_delta(1, p.delta(1).unwrap().add(&RingElem::one())).unwrap();
        assert!(!bad.weak_admissibility_residual(0).unwrap().is_zero());
        assert!(!bad.check_admissible().unwrap().pass);
    }

    #[test]
    fn scaled_rho_breaks_quadratic() {
        let p = Params::universal(2, RhoBranch::B).unwrap();
        let bad = p.with_rho(p.rho().mul(p.q()));
        assert!(!bad.check_admissible().unwrap().rho_residual.is_zero());
    }

    #[test]
    fn r1_has_no_linear_relations() {
        let p = Params::universal(1, RhoBranch::Minus).unwrap();
        let rep = p.check_admissible().unwrap();
        assert!(rep.relations.is_empty());
        assert!(rep.rho_residual.is_zero());
    }

    #[test]
    fn numeric_rejects_degenerate_q() {
        for q in [rat(1, 1), rat(-1, 1), rat(0, 1)] {
            assert!(Params::numeric(1, RhoBranch::Plus, q, vec![rat(2, 1)]).is_err());
        }
    }

    #[test]
    fn numeric_matches_specialized_universal() {
        let p = Params::universal(3, RhoBranch::Minus).unwrap();
        let q = rat(5, 3);
        let u = vec![rat(2, 1), rat(-3, 7), rat(11, 5)];
        let n = p.specialize(&q, &u).unwrap();
        let mut asg = HashMap::new();
        asg.insert(VAR_Q, q);
        for (i, x) in u.iter().enumerate() {
            asg.insert(ring::var_u(i + 1), x.clone());
        }
        for j in -4..=6 {
            let v = p.delta(j).unwrap().specialize(&asg).unwrap();
            assert_eq!(RingElem::from_rational(&v), n.delta(j).unwrap());
        }
    }

    #[test]
    fn affine_negative_deltas() {
        let p = Params::free_affine(4).unwrap();
        let rho = p.rho().clone();
        let d1 = p.delta(1).unwrap();
        assert_eq!(p.delta(-1).unwrap(), rho.pow(-2).unwrap().mul(&d1));
        assert!(matches!(p.delta(5), Err(Error::DeltaWindow { .. })));
        assert!(matches!(p.delta(-5), Err(Error::DeltaWindow { .. })));
    }

    #[test]
    fn closed_loops() {
        let p = Params::universal(2, RhoBranch::A).unwrap();
        assert_eq!(p.eval_closed_loops(&[]).unwrap(), RingElem::one());
        assert_eq!(p.eval_closed_loops(&[0]).unwrap(), p.delta0().clone());
        let both = p.delta(1).unwrap().mul(&p.delta(-1).unwrap());
        assert_eq!(p.eval_closed_loops(&[1, -1]).unwrap(), both);
    }

    #[test]
    fn json_round_trip() {
        for p in [
            Params::universal(2, RhoBranch::A).unwrap(),
            Params::numeric(2, RhoBranch::B, rat(2, 1), vec![rat(3, 1), rat(1, 2)]).unwrap(),
            Params::free_affine(3).unwrap(),
        ] {
            let s = serde_json::to_string(&p).unwrap();
            let back: Params = serde_json::from_str(&s).unwrap();
            assert_eq!(back, p);
            assert_eq!(back.fingerprint(), p.fingerprint());
        }
    }
}
