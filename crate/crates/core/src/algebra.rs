//! Products, the inclusions W_{n-1} -> W_n, the conditional expectations
//! eps_n : W_n -> W_{n-1}, the Markov trace, Gram matrices of the trace form
//! and relation checks.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::diagram::{BasisElem, GenWord, Token};
use crate::elem::AlgElem;
use crate::engine::{engine, letter_e, letter_g, letter_y, Coeff};
use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::params::{Mode, Params};
use crate::rewrite::{vec_axpy, vec_from_map, Letter, SparseVec};
use crate::ring::RingElem;
use crate::with_field;

/// Rename a letter of the n-strand alphabet into the m-strand alphabet.
fn embed_letter(c: Letter, n: usize, m: usize) -> Letter {
    let c = c as usize;
    if c < n - 1 {
        letter_e(m, c + 1)
    } else if c < 2 * n - 2 {
        letter_g(m, c - (n - 1) + 1)
    } else {
        letter_y(m)
    }
}

fn embed_word(w: &[Letter], n: usize, m: usize) -> Vec<Letter> {
    w.iter().map(|&c| embed_letter(c, n, m)).collect()
}

/// Normal words of W_n; W_0 has only the empty word.
fn normal_words<S: Coeff>(p: &Params, n: usize) -> Result<Vec<Vec<Letter>>> {
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    Ok(engine::<S>(p, n)?.normalizer().words().iter().map(|w| w.0.clone()).collect())
}

/// Data for eps_n: the vectors iota^2(z) e_n in W_{n+1} for normal words z of
/// W_{n-1}, in echelon form, plus memoized values on normal words of W_n.
struct EpsLevel<S> {
    echelon: Echelon<S>,
    delta0_inv: S,
    eps: Vec<OnceLock<SparseVec<S>>>,
    tau: Vec<OnceLock<S>>,
}

/// The tower W_0 < W_1 < ... with its conditional expectations.
pub struct Tower<S: Coeff> {
    params: Params,
    levels: RwLock<HashMap<usize, Arc<EpsLevel<S>>>>,
    build: Mutex<()>,
}

pub trait TowerField: Coeff {
    fn towers() -> &'static RwLock<HashMap<String, Arc<Tower<Self>>>>;
}

impl TowerField for RingElem {
    fn towers() -> &'static RwLock<HashMap<String, Arc<Tower<Self>>>> {
        static T: OnceLock<RwLock<HashMap<String, Arc<Tower<RingElem>>>>> = OnceLock::new();
        T.get_or_init(Default::default)
    }
}

impl TowerField for num_rational::BigRational {
    fn towers() -> &'static RwLock<HashMap<String, Arc<Tower<Self>>>> {
        static T: OnceLock<RwLock<HashMap<String, Arc<Tower<num_rational::BigRational>>>>> = OnceLock::new();
        T.get_or_init(Default::default)
    }
}

pub fn tower<S: TowerField>(p: &Params) -> Arc<Tower<S>> {
    let key = p.fingerprint();
    if let Some(t) = S::towers().read().get(&key) {
        return t.clone();
    }
    let mut all = S::towers().write();
    all.entry(key)
        .or_insert_with(|| Arc::new(Tower { params: p.clone(), levels: RwLock::new(HashMap::new()), build: Mutex::new(()) }))
        .clone()
}

impl<S: TowerField> Tower<S> {
    fn level(&self, n: usize) -> Result<Arc<EpsLevel<S>>> {
        if let Some(l) = self.levels.read().get(&n) {
            return Ok(l.clone());
        }
        let _guard = self.build.lock();
        if let Some(l) = self.levels.read().get(&n) {
            return Ok(l.clone());
        }
        let p = &self.params;
        let big = engine::<S>(p, n + 1)?;
        let en = letter_e(n + 1, n);
        let mut vectors = Vec::new();
        for z in normal_words::<S>(p, n - 1)? {
            let mut w = if n >= 2 { embed_word(&z, n - 1, n + 1) } else { Vec::new() };
            w.push(en);
            vectors.push(big.normalizer().normal_form(&w));
        }
        let echelon = Echelon::new(big.dim(), &vectors)
            .map_err(|e| Error::Extraction(format!("iota^2(W_{}) e_{n} is degenerate: {e}", n - 1)))?;
        let count = normal_words::<S>(p, n)?.len();
        let delta0_inv = S::coerce(p.delta0(), p)?.inv()?;
        let level = Arc::new(EpsLevel {
            echelon,
            delta0_inv,
            eps: (0..count).map(|_| OnceLock::new()).collect(),
            tau: (0..count).map(|_| OnceLock::new()).collect(),
        });
        self.levels.write().insert(n, level.clone());
        Ok(level)
    }

    /// eps_n of the normal word with index m of W_n, over normal words of W_{n-1}.
    pub fn eps_word(&self, n: usize, m: u32) -> Result<SparseVec<S>> {
        let level = self.level(n)?;
        if let Some(v) = level.eps[m as usize].get() {
            return Ok(v.clone());
        }
        let p = &self.params;
        let small = engine::<S>(p, n)?;
        let big = engine::<S>(p, n + 1)?;
        let en = letter_e(n + 1, n);
        let mut w = vec![en];
        w.extend(embed_word(&small.normalizer().words()[m as usize].0, n, n + 1));
        w.push(en);
        let sandwich = big.normalizer().normal_form(&w);
        let coords = level.echelon.solve(&sandwich).map_err(|_| {
            Error::Extraction(format!("e_{n} x e_{n} is not of the form delta_0 iota(z) e_{n} for a normal word of W_{n}"))
        })?;
        let v: SparseVec<S> = coords.into_iter().map(|(k, c)| (k as u32, c.mul(&level.delta0_inv))).collect();
        let _ = level.eps[m as usize].set(v.clone());
        Ok(v)
    }

    pub fn eps_vec(&self, n: usize, v: &[(u32, S)]) -> Result<SparseVec<S>> {
        let mut acc = HashMap::new();
        for (m, c) in v {
            vec_axpy(&mut acc, c, &self.eps_word(n, *m)?);
        }
        Ok(vec_from_map(acc))
    }

    /// The Markov trace of the normal word m of W_n.
    pub fn tau_word(&self, n: usize, m: u32) -> Result<S> {
        if n == 0 {
            return Ok(S::one());
        }
        let level = self.level(n)?;
        if let Some(v) = level.tau[m as usize].get() {
            return Ok(v.clone());
        }
        let mut total = S::zero();
        for (z, c) in self.eps_word(n, m)? {
            total = total.add(&c.mul(&self.tau_word(n - 1, z)?));
        }
        let _ = level.tau[m as usize].set(total.clone());
        Ok(total)
    }

    pub fn tau_vec(&self, n: usize, v: &[(u32, S)]) -> Result<S> {
        if n == 0 {
            return Ok(v.iter().find(|(k, _)| *k == 0).map(|(_, c)| c.clone()).unwrap_or_else(S::zero));
        }
        let mut total = S::zero();
        for (m, c) in v {
            total = total.add(&c.mul(&self.tau_word(n, *m)?));
        }
        Ok(total)
    }

    /// iota: W_{n-1} -> W_n on normal-word vectors.
    pub fn include_vec(&self, n: usize, v: &[(u32, S)]) -> Result<SparseVec<S>> {
        let big = engine::<S>(&self.params, n)?;
        let words = normal_words::<S>(&self.params, n - 1)?;
        let mut acc = HashMap::new();
        for (m, c) in v {
            let w = if n >= 2 { embed_word(&words[*m as usize], n - 1, n) } else { Vec::new() };
            vec_axpy(&mut acc, c, &big.normalizer().normal_form(&w));
        }
        Ok(vec_from_map(acc))
    }
}

fn scalar_elem(r: usize, mode: Mode, c: RingElem) -> AlgElem {
    AlgElem::one(0, r, mode).scale(&c)
}

fn elem_vec<S: Coeff>(x: &AlgElem, p: &Params) -> Result<SparseVec<S>> {
    if x.r != p.r() || x.mode != p.mode() {
        return Err(Error::InvalidInput("element and parameters disagree on (r, mode)".into()));
    }
    if x.n == 0 {
        let c = S::coerce(&x.scalar()?, p)?;
        return Ok(if c.is_zero() { Vec::new() } else { vec![(0, c)] });
    }
    engine::<S>(p, x.n)?.from_elem(x, p)
}

fn vec_elem<S: Coeff>(n: usize, v: &[(u32, S)], p: &Params) -> Result<AlgElem> {
    if n == 0 {
        let c = v.iter().find(|(k, _)| *k == 0).map(|(_, c)| c.to_ring()).unwrap_or_else(RingElem::zero);
        return Ok(scalar_elem(p.r(), p.mode(), c));
    }
    engine::<S>(p, n)?.to_elem(v, p.mode())
}

fn mul_in<S: Coeff>(x: &AlgElem, y: &AlgElem, p: &Params) -> Result<AlgElem> {
    if (x.n, x.r, x.mode) != (y.n, y.r, y.mode) {
        return Err(Error::InvalidInput("elements of different algebras".into()));
    }
    if x.n == 0 {
        return Ok(scalar_elem(x.r, x.mode, x.scalar()?.mul(&y.scalar()?)));
    }
    let alg = engine::<S>(p, x.n)?;
    let w = alg.mul(&alg.from_elem(x, p)?, &alg.from_elem(y, p)?);
    alg.to_elem(&w, p.mode())
}

/// Bilinear product.
pub fn mul(x: &AlgElem, y: &AlgElem, p: &Params) -> Result<AlgElem> {
    with_field!(p, mul_in::<_>(x, y, p))
}

fn include_in<S: TowerField>(x: &AlgElem, p: &Params) -> Result<AlgElem> {
    let v = elem_vec::<S>(x, p)?;
    let w = tower::<S>(p).include_vec(x.n + 1, &v)?;
    vec_elem::<S>(x.n + 1, &w, p)
}

/// iota: adds a strand on the right.
pub fn include(x: &AlgElem, p: &Params) -> Result<AlgElem> {
    with_field!(p, include_in::<_>(x, p))
}

fn cond_expect_in<S: TowerField>(x: &AlgElem, p: &Params) -> Result<AlgElem> {
    if x.n == 0 {
        return Err(Error::InvalidInput("no strand to close".into()));
    }
    let v = elem_vec::<S>(x, p)?;
    let w = tower::<S>(p).eps_vec(x.n, &v)?;
    vec_elem::<S>(x.n - 1, &w, p)
}

/// eps_n: closes the rightmost strand.
pub fn cond_expect(x: &AlgElem, p: &Params) -> Result<AlgElem> {
    with_field!(p, cond_expect_in::<_>(x, p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub value: RingElem,
    /// eps_n(x), eps_{n-1} eps_n(x), ..., down to the 0-strand algebra.
    pub chain: Vec<AlgElem>,
}

/// The Markov trace eps_1 o ... o eps_n, with its intermediate values.
pub fn markov_trace(x: &AlgElem, p: &Params) -> Result<TraceReport> {
    let mut chain = Vec::with_capacity(x.n);
    let mut cur = x.clone();
    while cur.n > 0 {
        cur = cond_expect(&cur, p)?;
        chain.push(cur.clone());
    }
    let value = cur.scalar()?;
    Ok(TraceReport { value, chain })
}

fn trace_words_in<S: TowerField>(input: &[(RingElem, GenWord)], p: &Params) -> Result<RingElem> {
    let n = input.first().map(|(_, w)| w.n).ok_or_else(|| Error::InvalidInput("empty input".into()))?;
    if n == 0 {
        let mut total = RingElem::zero();
        for (c, w) in input {
            if w.n != 0 || !w.tokens.is_empty() {
                return Err(Error::InvalidInput("mixed strand counts".into()));
            }
            total = total.add(c);
        }
        return Ok(S::coerce(&total, p)?.to_ring());
    }
    let v = engine::<S>(p, n)?.combination(input, p)?;
    Ok(tower::<S>(p).tau_vec(n, &v)?.to_ring())
}

/// The Markov trace of a weighted sum of generator words, without passing
/// through basis coordinates.
pub fn trace_words(input: &[(RingElem, GenWord)], p: &Params) -> Result<RingElem> {
    with_field!(p, trace_words_in::<_>(input, p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub n: usize,
    pub r: usize,
    pub size: usize,
    pub rank: usize,
    pub matrix: Vec<Vec<RingElem>>,
}

impl GramReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.size
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.matrix {
            let cells: Vec<String> = row.iter().map(|c| format!("\"{c}\"")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn gram_in<S: TowerField>(n: usize, p: &Params) -> Result<GramReport> {
    let alg = engine::<S>(p, n)?;
    let t = tower::<S>(p);
    let basis = alg.basis()?.to_vec();
    let tau: Vec<S> = (0..alg.dim() as u32).map(|m| t.tau_word(n, m)).collect::<Result<_>>()?;
    let words: Vec<Vec<Token>> = basis.iter().map(|b| b.word().map(|w| w.tokens)).collect::<Result<_>>()?;
    let mut m = vec![vec![S::zero(); basis.len()]; basis.len()];
    for i in 0..basis.len() {
        let vi = alg.basis_vector(i)?;
        for j in 0..basis.len() {
            let prod = alg.mul_tokens(vi, &words[j]);
            let mut s = S::zero();
            for (k, c) in &prod {
                s = s.add(&c.mul(&tau[*k as usize]));
            }
            m[i][j] = s;
        }
    }
    let matrix = m.iter().map(|row| row.iter().map(|c| c.to_ring()).collect()).collect();
    let rk = S::matrix_rank(m)?;
    Ok(GramReport { n, r: p.r(), size: basis.len(), rank: rk, matrix })
}

/// Gram matrix of the trace form (x, y) -> eps(xy) on the basis, with its rank.
pub fn gram(n: usize, p: &Params) -> Result<GramReport> {
    with_field!(p, gram_in::<_>(n, p))
}

/// One relation L = R, as weighted words.
#[derive(Clone, Debug)]
pub struct Relation {
    pub label: String,
    pub lhs: Vec<(RingElem, Vec<Token>)>,
    pub rhs: Vec<(RingElem, Vec<Token>)>,
}

fn word_term(c: RingElem, t: Vec<Token>) -> (RingElem, Vec<Token>) {
    (c, t)
}

/// Every defining relation of W_n (inverses, idempotent, braid, commutation,
/// tangle, skein, untwisting, unwrapping) and the cyclotomic relation, with
/// the pole relation for j = -2..=r+1.
pub fn defining_relations(n: usize, p: &Params) -> Result<Vec<Relation>> {
    use Token::{E, G, Y};
    let one = RingElem::one;
    let mut out = Vec::new();
    let mut push = |label: String, lhs: Vec<(RingElem, Vec<Token>)>, rhs: Vec<(RingElem, Vec<Token>)>| {
        out.push(Relation { label, lhs, rhs });
    };
    let z = p.z();
    let rho = p.rho().clone();
    let rho_inv = rho.inv()?;
    push("inverse y y^-1".into(), vec![word_term(one(), vec![Y(1), Y(-1)])], vec![word_term(one(), vec![])]);
    push("inverse y^-1 y".into(), vec![word_term(one(), vec![Y(-1), Y(1)])], vec![word_term(one(), vec![])]);
    for i in 1..n {
        push(format!("inverse g{i} g{i}^-1"), vec![word_term(one(), vec![G(i, 1), G(i, -1)])], vec![word_term(one(), vec![])]);
        push(format!("inverse g{i}^-1 g{i}"), vec![word_term(one(), vec![G(i, -1), G(i, 1)])], vec![word_term(one(), vec![])]);
        push(format!("idempotent e{i}"), vec![word_term(one(), vec![E(i), E(i)])], vec![word_term(p.delta0().clone(), vec![E(i)])]);
        push(
            format!("skein g{i}"),
            vec![word_term(one(), vec![G(i, 1)]), word_term(RingElem::from_int(-1), vec![G(i, -1)])],
            vec![word_term(z.clone(), vec![E(i)]), word_term(z.neg(), vec![])],
        );
        push(format!("untwisting g{i} e{i}"), vec![word_term(one(), vec![G(i, 1), E(i)])], vec![word_term(rho_inv.clone(), vec![E(i)])]);
        push(format!("untwisting e{i} g{i}"), vec![word_term(one(), vec![E(i), G(i, 1)])], vec![word_term(rho_inv.clone(), vec![E(i)])]);
        for j in 1..n {
            if i.abs_diff(j) >= 2 && i < j {
                push(format!("braid g{i} g{j}"), vec![word_term(one(), vec![G(i, 1), G(j, 1)])], vec![word_term(one(), vec![G(j, 1), G(i, 1)])]);
                push(format!("commutation g{i} e{j}"), vec![word_term(one(), vec![G(i, 1), E(j)])], vec![word_term(one(), vec![E(j), G(i, 1)])]);
                push(format!("commutation g{j} e{i}"), vec![word_term(one(), vec![G(j, 1), E(i)])], vec![word_term(one(), vec![E(i), G(j, 1)])]);
                push(format!("commutation e{i} e{j}"), vec![word_term(one(), vec![E(i), E(j)])], vec![word_term(one(), vec![E(j), E(i)])]);
            }
            if i.abs_diff(j) == 1 {
                push(format!("tangle e{i} e{j} e{i}"), vec![word_term(one(), vec![E(i), E(j), E(i)])], vec![word_term(one(), vec![E(i)])]);
                push(format!("tangle g{i} g{j} e{i}"), vec![word_term(one(), vec![G(i, 1), G(j, 1), E(i)])], vec![word_term(one(), vec![E(j), E(i)])]);
                push(format!("tangle e{i} g{j} g{i}"), vec![word_term(one(), vec![E(i), G(j, 1), G(i, 1)])], vec![word_term(one(), vec![E(i), E(j)])]);
                push(format!("untwisting e{i} g{j} e{i}"), vec![word_term(one(), vec![E(i), G(j, 1), E(i)])], vec![word_term(rho.clone(), vec![E(i)])]);
            }
            if j == i + 1 {
                push(
                    format!("braid g{i} g{j} g{i}"),
                    vec![word_term(one(), vec![G(i, 1), G(j, 1), G(i, 1)])],
                    vec![word_term(one(), vec![G(j, 1), G(i, 1), G(j, 1)])],
                );
            }
        }
        if i >= 2 {
            push(format!("braid y g{i}"), vec![word_term(one(), vec![Y(1), G(i, 1)])], vec![word_term(one(), vec![G(i, 1), Y(1)])]);
            push(format!("commutation y e{i}"), vec![word_term(one(), vec![Y(1), E(i)])], vec![word_term(one(), vec![E(i), Y(1)])]);
        }
    }
    if n >= 2 {
        push(
            "braid y g1 y g1".into(),
            vec![word_term(one(), vec![Y(1), G(1, 1), Y(1), G(1, 1)])],
            vec![word_term(one(), vec![G(1, 1), Y(1), G(1, 1), Y(1)])],
        );
        for j in -2..=(p.r() as i64 + 1) {
            if j == 0 {
                continue;
            }
            let mut w = vec![E(1)];
            w.extend(crate::diagram::y_power(j));
            w.push(E(1));
            push(format!("pole e1 y^{j} e1"), vec![word_term(one(), w)], vec![word_term(p.delta(j)?, vec![E(1)])]);
        }
        push("unwrapping e1 y g1 y".into(), vec![word_term(one(), vec![E(1), Y(1), G(1, 1), Y(1)])], vec![word_term(rho.clone(), vec![E(1)])]);
        push("unwrapping y g1 y e1".into(), vec![word_term(one(), vec![Y(1), G(1, 1), Y(1), E(1)])], vec![word_term(rho.clone(), vec![E(1)])]);
    }
    let mut cyc = Vec::new();
    for (k, a) in p.a().iter().enumerate() {
        cyc.push(word_term(a.clone(), crate::diagram::y_power(k as i64)));
    }
    push("cyclotomic".into(), cyc, vec![]);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub label: String,
    pub pass: bool,
    pub residual: AlgElem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub n: usize,
    pub r: usize,
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn relation_suite_in<S: Coeff>(n: usize, p: &Params) -> Result<RelationReport> {
    let alg = engine::<S>(p, n)?;
    let mut checks = Vec::new();
    for rel in defining_relations(n, p)? {
        let mut acc = HashMap::new();
        for (sign, side) in [(S::one(), &rel.lhs), (S::one().neg(), &rel.rhs)] {
            for (c, w) in side {
                let v = alg.word_vec(w)?;
                vec_axpy(&mut acc, &sign.mul(&S::coerce(c, p)?), &v);
            }
        }
        let v = vec_from_map(acc);
        let residual = alg.to_elem(&v, p.mode())?;
        checks.push(RelationCheck { label: rel.label, pass: residual.is_zero(), residual });
    }
    Ok(RelationReport { n, r: p.r(), checks })
}

/// Reduce both sides of every defining relation and report the residuals.
pub fn relation_suite(n: usize, p: &Params) -> Result<RelationReport> {
    with_field!(p, relation_suite_in::<_>(n, p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeftIdealReport {
    pub r: usize,
    pub checked: usize,
    /// Basis elements w for which w e_1 is outside span{y^k e_1}.
    pub failures: Vec<BasisElem>,
}

fn left_ideal_in<S: Coeff>(p: &Params) -> Result<LeftIdealReport> {
    let alg = engine::<S>(p, 2)?;
    let e1 = Token::E(1);
    let span: Vec<SparseVec<S>> = (0..p.r() as i64)
        .map(|k| {
            let mut w = crate::diagram::y_power(k);
            w.push(e1);
            alg.word_vec(&w)
        })
        .collect::<Result<_>>()?;
    let ech = Echelon::new(alg.dim(), &span)?;
    let mut failures = Vec::new();
    let basis = alg.basis()?.to_vec();
    for (k, b) in basis.iter().enumerate() {
        let v = alg.mul_tokens(alg.basis_vector(k)?, &[e1]);
        if ech.solve(&v).is_err() {
            failures.push(b.clone());
        }
    }
    Ok(LeftIdealReport { r: p.r(), checked: basis.len(), failures })
}

/// W_2 e_1 is spanned by y^k e_1, 0 <= k < r.
pub fn left_ideal_check(p: &Params) -> Result<LeftIdealReport> {
    with_field!(p, left_ideal_in::<_>(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::reduce;
    use crate::params::RhoBranch;

    fn params(r: usize) -> Params {
        Params::universal(r, RhoBranch::default_for(r)).unwrap()
    }

    fn red(n: usize, text: &str, p: &Params) -> AlgElem {
        reduce(&[(RingElem::one(), GenWord::parse(n, text).unwrap())], p).unwrap()
    }

    #[test]
    fn products_and_inclusion() {
        let p = params(2);
        let e = red(2, "e1", &p);
        assert_eq!(mul(&e, &red(2, "g1", &p), &p).unwrap(), e.scale(&p.rho().inv().unwrap()));
        assert_eq!(mul(&AlgElem::one(2, 2, p.mode()), &e, &p).unwrap(), e);
        assert_eq!(include(&e, &p).unwrap(), red(3, "e1", &p));
        assert_eq!(include(&red(1, "y", &p), &p).unwrap(), red(2, "y", &p));
        assert_eq!(include(&AlgElem::one(1, 2, p.mode()), &p).unwrap(), AlgElem::one(2, 2, p.mode()));
    }

    #[test]
    fn conditional_expectation_examples() {
        let p = params(2);
        let d0_inv = p.delta0().inv().unwrap();
        let one1 = AlgElem::one(1, 2, p.mode());
        assert_eq!(cond_expect(&AlgElem::one(2, 2, p.mode()), &p).unwrap(), one1);
        assert_eq!(cond_expect(&red(2, "e1", &p), &p).unwrap(), one1.scale(&d0_inv));
        assert_eq!(cond_expect(&red(2, "g1", &p), &p).unwrap(), one1.scale(&p.rho().mul(&d0_inv)));
    }

    #[test]
    fn trace_examples() {
        let p = params(2);
        assert_eq!(markov_trace(&AlgElem::one(2, 2, p.mode()), &p).unwrap().value, RingElem::one());
        let t = markov_trace(&red(2, "e1", &p), &p).unwrap();
        assert_eq!(t.value, p.delta0().inv().unwrap());
        assert_eq!(t.chain.len(), 2);
        for k in 0..4 {
            let y = red(1, &format!("y^{k}"), &p);
            let expect = p.delta(k).unwrap().div(p.delta0()).unwrap();
            assert_eq!(markov_trace(&y, &p).unwrap().value, expect);
        }
    }

    #[test]
    fn small_gram_matrices() {
        let p = params(1);
        let g = gram(1, &p).unwrap();
        assert_eq!(g.matrix, vec![vec![RingElem::one()]]);
        assert!(gram(2, &p).unwrap().full_rank());
        let p = params(2);
        let g = gram(1, &p).unwrap();
        let d = |j| p.delta(j).unwrap().div(p.delta0()).unwrap();
        assert_eq!(g.matrix, vec![vec![RingElem::one(), d(1)], vec![d(1), d(2)]]);
        assert_eq!(g.rank, 2);
    }

    #[test]
    fn relations_and_left_ideal() {
        let p = params(2);
        assert!(relation_suite(2, &p).unwrap().all_pass());
        assert!(left_ideal_check(&p).unwrap().failures.is_empty());
    }
}
