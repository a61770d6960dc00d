//! Normal forms in the cyclotomic BMW algebra W_{r,n}: a completed rewriting
//! system for the defining presentation, coordinates in the basis of
//! spanning-set words, and caches shared across threads.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_rational::BigRational;
use parking_lot::RwLock;

use crate::cache::StructureCache;
use crate::diagram::{basis_enumerate, bmw_dimension, BasisElem, GenWord, Token};
use crate::elem::AlgElem;
use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::params::{Mode, Params};
use crate::rewrite::{
    poly_add_term, vec_axpy, vec_from_map, FreePoly, Letter, Normalizer, RewriteSystem, SparseVec, Strategy, Word,
};
use crate::ring::RingElem;
use crate::scalar::Scalar;

/// Letter ids: e_i -> i-1, g_i -> n-1+(i-1), y -> 2n-2.
pub fn letter_e(n: usize, i: usize) -> Letter {
    debug_assert!(i >= 1 && i < n);
    (i - 1) as Letter
}

pub fn letter_g(n: usize, i: usize) -> Letter {
    debug_assert!(i >= 1 && i < n);
    (n - 1 + i - 1) as Letter
}

pub fn letter_y(n: usize) -> Letter {
    (2 * n - 2) as Letter
}

/// Structure constants of a parameter set, in the coefficient field.
#[derive(Clone, Debug)]
pub struct Constants<S> {
    pub r: usize,
    pub z: S,
    pub rho: S,
    pub rho_inv: S,
    /// a_0..a_{r-1}; a_r = 1.
    pub a: Vec<S>,
    pub a0_inv: S,
    /// delta_0..delta_{r-1}.
    pub delta: Vec<S>,
}

impl<S: Scalar> Constants<S> {
    pub fn from_params(p: &Params) -> Result<Self> {
        if !p.mode().is_cyclotomic() {
            return Err(Error::Unsupported(
                "normal forms need a cyclotomic relation; the affine algebra is infinite dimensional".into(),
            ));
        }
        let r = p.r();
        let rho = S::from_ring(p.rho())?;
        let a: Vec<S> = p.a()[..r].iter().map(S::from_ring).collect::<Result<_>>()?;
        let delta = (0..r as i64).map(|j| p.delta(j).and_then(|d| S::from_ring(&d))).collect::<Result<_>>()?;
        Ok(Constants {
            r,
            z: S::from_ring(&p.z())?,
            rho_inv: rho.inv()?,
            rho,
            a0_inv: a[0].inv()?,
            a,
            delta,
        })
    }
}

fn rel<S: Scalar>(terms: &[(S, Vec<Letter>)]) -> FreePoly<S> {
    let mut f = FreePoly::new();
    for (c, w) in terms {
        poly_add_term(&mut f, Word(w.clone()), c.clone());
    }
    f
}

/// The defining relations of W_{r,n} over the letters above.
pub fn bmw_relations<S: Scalar>(n: usize, c: &Constants<S>) -> Vec<FreePoly<S>> {
    let one = S::one;
    let m1 = || S::one().neg();
    let e = |i| letter_e(n, i);
    let g = |i| letter_g(n, i);
    let y = letter_y(n);
    let mut out = Vec::new();
    for i in 1..n {
        out.push(rel(&[(one(), vec![e(i), e(i)]), (c.delta[0].neg(), vec![e(i)])]));
        // g^2 = 1 - z g + z rho^-1 e
        out.push(rel(&[
            (one(), vec![g(i), g(i)]),
            (m1(), vec![]),
            (c.z.clone(), vec![g(i)]),
            (c.z.mul(&c.rho_inv).neg(), vec![e(i)]),
        ]));
        out.push(rel(&[(one(), vec![g(i), e(i)]), (c.rho_inv.neg(), vec![e(i)])]));
        out.push(rel(&[(one(), vec![e(i), g(i)]), (c.rho_inv.neg(), vec![e(i)])]));
        for j in 1..n {
            if i.abs_diff(j) >= 2 {
                out.push(rel(&[(one(), vec![g(i), g(j)]), (m1(), vec![g(j), g(i)])]));
                out.push(rel(&[(one(), vec![g(i), e(j)]), (m1(), vec![e(j), g(i)])]));
                out.push(rel(&[(one(), vec![e(i), e(j)]), (m1(), vec![e(j), e(i)])]));
            }
            if i.abs_diff(j) == 1 {
                out.push(rel(&[(one(), vec![e(i), e(j), e(i)]), (m1(), vec![e(i)])]));
                out.push(rel(&[(one(), vec![g(i), g(j), e(i)]), (m1(), vec![e(j), e(i)])]));
                out.push(rel(&[(one(), vec![e(i), g(j), g(i)]), (m1(), vec![e(i), e(j)])]));
                out.push(rel(&[(one(), vec![e(i), g(j), e(i)]), (c.rho.neg(), vec![e(i)])]));
            }
            if j == i + 1 {
                out.push(rel(&[(one(), vec![g(i), g(j), g(i)]), (m1(), vec![g(j), g(i), g(j)])]));
            }
        }
        if i >= 2 {
            out.push(rel(&[(one(), vec![y, g(i)]), (m1(), vec![g(i), y])]));
            out.push(rel(&[(one(), vec![y, e(i)]), (m1(), vec![e(i), y])]));
        }
    }
    if n >= 2 {
        out.push(rel(&[(one(), vec![y, g(1), y, g(1)]), (m1(), vec![g(1), y, g(1), y])]));
        for j in 1..c.r {
            let mut w = vec![e(1)];
            w.extend(std::iter::repeat_n(y, j));
            w.push(e(1));
            out.push(rel(&[(one(), w), (c.delta[j].neg(), vec![e(1)])]));
        }
        out.push(rel(&[(one(), vec![e(1), y, g(1), y]), (c.rho.neg(), vec![e(1)])]));
        out.push(rel(&[(one(), vec![y, g(1), y, e(1)]), (c.rho.neg(), vec![e(1)])]));
    }
    let mut cyc: Vec<(S, Vec<Letter>)> = vec![(one(), vec![y; c.r])];
    for k in 0..c.r {
        cyc.push((c.a[k].clone(), vec![y; k]));
    }
    out.push(rel(&cyc));
    out
}

/// W_{r,n} with a completed rewriting system and basis conversion.
pub struct Bmw<S: Scalar> {
    n: usize,
    consts: Constants<S>,
    nz: Normalizer<S>,
    basis: OnceBasis<S>,
}

struct OnceBasis<S: Scalar> {
    cell: OnceLock<Result<BasisData<S>>>,
}

struct BasisData<S: Scalar> {
    elems: Vec<BasisElem>,
    position: HashMap<BasisElem, usize>,
    /// Basis element k in normal-word coordinates.
    vectors: Vec<SparseVec<S>>,
    echelon: Echelon<S>,
}

impl<S: Scalar> Bmw<S> {
    pub fn build(p: &Params, n: usize, strategy: Strategy) -> Result<Self> {
        Self::build_with_progress(p, n, strategy, |_| {})
    }

    pub fn build_with_progress(
        p: &Params,
        n: usize,
        strategy: Strategy,
        progress: impl FnMut(&crate::rewrite::CompletionStats),
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("need at least one strand".into()));
        }
        let consts = Constants::<S>::from_params(p)?;
        let letters = 2 * n - 1;
        let rels = bmw_relations(n, &consts);
        let max_len = 4 * n * (consts.r + 2) + 8;
        let sys = RewriteSystem::complete(letters, rels, strategy, max_len, progress)?;
        let expected = bmw_dimension(n, consts.r) as usize;
        let nz = Normalizer::new(sys, expected)?;
        if nz.dim() != expected {
            return Err(Error::Invariant(format!(
                "completed presentation has {} normal words, expected {expected}",
                nz.dim()
            )));
        }
        Ok(Bmw { n, consts, nz, basis: OnceBasis { cell: OnceLock::new() } })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.consts.r
    }

    pub fn dim(&self) -> usize {
        self.nz.dim()
    }

    pub fn constants(&self) -> &Constants<S> {
        &self.consts
    }

    pub fn normalizer(&self) -> &Normalizer<S> {
        &self.nz
    }

    pub fn rule_count(&self) -> usize {
        self.nz.system().rule_count()
    }

    pub fn unit(&self) -> SparseVec<S> {
        self.nz.unit()
    }

    /// v * token, with inverses expanded by the skein and cyclotomic relations.
    pub fn mul_token(&self, v: &[(u32, S)], t: Token) -> SparseVec<S> {
        let n = self.n;
        match t {
            Token::E(i) => self.nz.mul_letter(v, letter_e(n, i)),
            Token::G(i, 1) => self.nz.mul_letter(v, letter_g(n, i)),
            Token::G(i, _) => {
                // g^-1 = g - z e + z
                let z = &self.consts.z;
                let mut acc = HashMap::new();
                vec_axpy(&mut acc, &S::one(), &self.nz.mul_letter(v, letter_g(n, i)));
                vec_axpy(&mut acc, &z.neg(), &self.nz.mul_letter(v, letter_e(n, i)));
                vec_axpy(&mut acc, z, v);
                vec_from_map(acc)
            }
            Token::Y(1) => self.nz.mul_letter(v, letter_y(n)),
            Token::Y(_) => {
                // y^-1 = -a0^-1 (y^{r-1} + sum_{k=1}^{r-1} a_k y^{k-1})
                let c = &self.consts;
                let mut acc = HashMap::new();
                let mut cur = v.to_vec();
                for k in 1..=c.r {
                    let coeff = if k == c.r { S::one() } else { c.a[k].clone() };
                    vec_axpy(&mut acc, &coeff.mul(&c.a0_inv).neg(), &cur);
                    if k < c.r {
                        cur = self.nz.mul_letter(&cur, letter_y(n));
                    }
                }
                vec_from_map(acc)
            }
        }
    }

    pub fn mul_tokens(&self, v: &[(u32, S)], tokens: &[Token]) -> SparseVec<S> {
        let mut cur = v.to_vec();
        for &t in tokens {
            cur = self.mul_token(&cur, t);
        }
        cur
    }

    /// Normal-word coordinates of a generator word.
    pub fn word_vec(&self, tokens: &[Token]) -> Result<SparseVec<S>> {
        for t in tokens {
            t.check(self.n)?;
        }
        Ok(self.mul_tokens(&self.unit(), tokens))
    }

    pub fn mul(&self, u: &[(u32, S)], v: &[(u32, S)]) -> SparseVec<S> {
        self.nz.mul(u, v)
    }

    fn basis_data(&self) -> Result<&BasisData<S>> {
        self.basis
            .cell
            .get_or_init(|| {
                let elems = basis_enumerate(self.n, self.consts.r);
                let mut vectors = Vec::with_capacity(elems.len());
                for b in &elems {
                    vectors.push(self.word_vec(&b.word()?.tokens)?);
                }
                let echelon = Echelon::new(self.dim(), &vectors)?;
                let position = elems.iter().enumerate().map(|(k, b)| (b.clone(), k)).collect();
                Ok(BasisData { elems, position, vectors, echelon })
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn basis(&self) -> Result<&[BasisElem]> {
        Ok(&self.basis_data()?.elems)
    }

    pub fn basis_position(&self, b: &BasisElem) -> Result<usize> {
        self.basis_data()?
            .position
            .get(b)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("{b} is not a basis element for this algebra")))
    }

    pub fn basis_vector(&self, k: usize) -> Result<&SparseVec<S>> {
        Ok(&self.basis_data()?.vectors[k])
    }

    /// Coordinates in the spanning-set basis of a normal-word vector.
    pub fn to_basis(&self, v: &[(u32, S)]) -> Result<Vec<(usize, S)>> {
        self.basis_data()?.echelon.solve(v)
    }

    pub fn from_basis(&self, coords: &[(usize, S)]) -> Result<SparseVec<S>> {
        let data = self.basis_data()?;
        let mut acc = HashMap::new();
        for (k, c) in coords {
            vec_axpy(&mut acc, c, &data.vectors[*k]);
        }
        Ok(vec_from_map(acc))
    }
}

/// Completed algebras keyed by (parameter fingerprint, n, field).
pub struct BmwCache<S: Scalar> {
    map: RwLock<HashMap<(String, usize), Arc<Bmw<S>>>>,
    building: parking_lot::Mutex<()>,
}

impl<S: Scalar> Default for BmwCache<S> {
    fn default() -> Self {
        BmwCache { map: RwLock::new(HashMap::new()), building: parking_lot::Mutex::new(()) }
    }
}

impl<S: Scalar> BmwCache<S> {
    pub fn get(&self, p: &Params, n: usize) -> Result<Arc<Bmw<S>>> {
        let key = (p.fingerprint(), n);
        if let Some(b) = self.map.read().get(&key) {
            return Ok(b.clone());
        }
        let _guard = self.building.lock();
        if let Some(b) = self.map.read().get(&key) {
            return Ok(b.clone());
        }
        let b = Arc::new(Bmw::build(p, n, Strategy::Standard)?);
        self.map.write().insert(key, b.clone());
        Ok(b)
    }
}

/// Coefficient fields the public API can run the engine over.
pub trait Coeff: Scalar {
    fn engines() -> &'static BmwCache<Self>;
    /// Bring an input coefficient into the field of `p`.
    fn coerce(x: &RingElem, p: &Params) -> Result<Self>;
    /// Exact rank of a dense matrix over the field.
    fn matrix_rank(m: Vec<Vec<Self>>) -> Result<usize> {
        crate::linalg::rank(m)
    }
}

impl Coeff for RingElem {
    fn engines() -> &'static BmwCache<Self> {
        static CACHE: OnceLock<BmwCache<RingElem>> = OnceLock::new();
        CACHE.get_or_init(BmwCache::default)
    }

    fn coerce(x: &RingElem, _p: &Params) -> Result<Self> {
        Ok(x.clone())
    }

    fn matrix_rank(m: Vec<Vec<Self>>) -> Result<usize> {
        crate::linalg::rank_rational_functions(&m)
    }
}

impl Coeff for BigRational {
    fn engines() -> &'static BmwCache<Self> {
        static CACHE: OnceLock<BmwCache<BigRational>> = OnceLock::new();
        CACHE.get_or_init(BmwCache::default)
    }

    fn coerce(x: &RingElem, p: &Params) -> Result<Self> {
        p.coerce_rational(x)
    }

    fn matrix_rank(m: Vec<Vec<Self>>) -> Result<usize> {
        Ok(crate::linalg::rank_rational(&m))
    }
}

/// Run a generic function in the coefficient field matching the mode.
#[macro_export]
macro_rules! with_field {
    ($p:expr, $f:ident :: <_> ( $($arg:expr),* $(,)? )) => {
        match $p.mode() {
            $crate::params::Mode::UniversalCyclotomic => $f::<$crate::ring::RingElem>($($arg),*),
            $crate::params::Mode::NumericCyclotomic => $f::<num_rational::BigRational>($($arg),*),
            $crate::params::Mode::FreeAffine => Err($crate::error::Error::Unsupported(
                "the affine algebra has no finite normal form; use a cyclotomic quotient".into(),
            )),
        }
    };
}

impl<S: Coeff> Bmw<S> {
    /// Express a normal-word vector as an element over the basis.
    pub fn to_elem(&self, v: &[(u32, S)], mode: Mode) -> Result<AlgElem> {
        let coords = self.to_basis(v)?;
        let basis = self.basis()?;
        AlgElem::from_terms(self.n, self.r(), mode, coords.into_iter().map(|(k, c)| (basis[k].clone(), c.to_ring())))
    }

    pub fn from_elem(&self, x: &AlgElem, p: &Params) -> Result<SparseVec<S>> {
        if x.n != self.n || x.r != self.r() {
            return Err(Error::InvalidInput(format!("element of W(n = {}, r = {}) used in n = {}", x.n, x.r, self.n)));
        }
        let mut coords = Vec::with_capacity(x.len());
        for (b, c) in x.terms() {
            coords.push((self.basis_position(b)?, S::coerce(c, p)?));
        }
        self.from_basis(&coords)
    }

    /// Normal-word vector of a weighted sum of generator words.
    pub fn combination(&self, input: &[(RingElem, GenWord)], p: &Params) -> Result<SparseVec<S>> {
        let mut acc = HashMap::new();
        for (c, w) in input {
            if w.n != self.n {
                return Err(Error::InvalidInput(format!("word on {} strands in an algebra on {}", w.n, self.n)));
            }
            let v = self.word_vec(&w.tokens)?;
            vec_axpy(&mut acc, &S::coerce(c, p)?, &v);
        }
        Ok(vec_from_map(acc))
    }
}

pub fn engine<S: Coeff>(p: &Params, n: usize) -> Result<Arc<Bmw<S>>> {
    S::engines().get(p, n)
}

fn reduce_in<S: Coeff>(input: &[(RingElem, GenWord)], p: &Params) -> Result<AlgElem> {
    let n = input.first().map(|(_, w)| w.n).ok_or_else(|| Error::InvalidInput("empty input".into()))?;
    let alg = engine::<S>(p, n)?;
    let v = alg.combination(input, p)?;
    alg.to_elem(&v, p.mode())
}

/// Normal-form expansion of a weighted sum of generator words.
pub fn reduce(input: &[(RingElem, GenWord)], p: &Params) -> Result<AlgElem> {
    with_field!(p, reduce_in::<_>(input, p))
}

fn mul_basis_in<S: Coeff>(x: &BasisElem, y: &BasisElem, p: &Params) -> Result<AlgElem> {
    let alg = engine::<S>(p, x.n)?;
    let u = alg.basis_vector(alg.basis_position(x)?)?.clone();
    let w = alg.mul_tokens(&u, &y.word()?.tokens);
    alg.to_elem(&w, p.mode())
}

/// Product of two basis elements, memoized in `cache`.
pub fn mul_basis_with(x: &BasisElem, y: &BasisElem, p: &Params, cache: &StructureCache) -> Result<AlgElem> {
    if (x.n, x.r) != (y.n, y.r) || x.r != p.r() {
        return Err(Error::InvalidInput("basis elements of different algebras".into()));
    }
    if let Some(v) = cache.get(p, x, y)? {
        return Ok(v);
    }
    let v = with_field!(p, mul_basis_in::<_>(x, y, p))?;
    cache.insert(p, x, y, v.clone())?;
    Ok(v)
}

/// Product of two basis elements, memoized in the process-wide cache.
pub fn mul_basis(x: &BasisElem, y: &BasisElem, p: &Params) -> Result<AlgElem> {
    mul_basis_with(x, y, p, StructureCache::global())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RhoBranch;

    fn params(r: usize) -> Params {
        Params::universal(r, RhoBranch::default_for(r)).unwrap()
    }

    fn red(n: usize, text: &str, p: &Params) -> AlgElem {
        reduce(&[(RingElem::one(), GenWord::parse(n, text).unwrap())], p).unwrap()
    }

    fn single_term(x: &AlgElem) -> bool {
        x.len() == 1 && x.terms().all(|(_, c)| c.is_one())
    }

    #[test]
    fn inverse_elimination() {
        let p = params(2);
        let (g, e, one) = (red(2, "g1", &p), red(2, "e1", &p), red(2, "", &p));
        assert!(single_term(&g) && single_term(&e) && single_term(&one));
        let z = p.z();
        let expect = g.sub(&e.scale(&z)).unwrap().add(&one.scale(&z)).unwrap();
        assert_eq!(red(2, "g1^-1", &p), expect);
    }

    #[test]
    fn pole_and_cap() {
        let p = params(2);
        assert_eq!(red(2, "e1 y e1", &p), red(2, "e1", &p).scale(&p.delta(1).unwrap()));
        assert_eq!(red(2, "e1 y^-2 e1", &p), red(2, "e1", &p).scale(&p.delta(-2).unwrap()));
        let a = p.a();
        let expect = red(1, "y", &p).scale(&a[1].neg()).sub(&red(1, "", &p).scale(&a[0])).unwrap();
        assert_eq!(red(1, "y^2", &p), expect);
    }

    #[test]
    fn g_squared() {
        let p = params(1);
        let z = p.z();
        let rho_inv = p.rho().inv().unwrap();
        let expect = red(2, "", &p)
            .add(&red(2, "e1", &p).scale(&z.mul(&rho_inv)))
            .unwrap()
            .sub(&red(2, "g1", &p).scale(&z))
            .unwrap();
        // g^2 = 1 + z (rho^-1 e - g) with z = q^-1 - q.
        assert_eq!(red(2, "g1 g1", &p), expect);
    }

    #[test]
    fn mul_basis_laws() {
        let p = params(2);
        let basis = crate::diagram::basis_enumerate(2, 2);
        let one = BasisElem::identity(2, 2);
        for b in basis.iter().take(6) {
            assert_eq!(mul_basis(&one, b, &p).unwrap(), AlgElem::basis(b.clone(), p.mode()));
            assert_eq!(mul_basis(b, &one, &p).unwrap(), AlgElem::basis(b.clone(), p.mode()));
        }
        let e = red(2, "e1", &p);
        let eb = e.terms().next().unwrap().0.clone();
        assert_eq!(mul_basis(&eb, &eb, &p).unwrap(), e.scale(p.delta0()));
    }

    #[test]
    fn affine_mode_is_unsupported() {
        let p = Params::free_affine(3).unwrap();
        let w = GenWord::parse(2, "g1").unwrap();
        assert!(matches!(reduce(&[(RingElem::one(), w)], &p), Err(Error::Unsupported(_))));
    }
}
