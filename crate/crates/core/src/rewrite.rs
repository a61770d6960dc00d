//! Noncommutative polynomial rewriting: completion of a finite presentation
//! into a confluent, terminating rule set, and normal forms with respect to
//! it.
//!
//! Words are ordered degree-lexicographically by letter id. Every rule
//! rewrites its leading word to a combination of strictly smaller words, and
//! the order is compatible with concatenation, so any rewrite sequence
//! terminates.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Letter = u8;

/// A word with the degree-lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(pub Vec<Letter>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn splice(&self, pos: usize, cut: usize, mid: &[Letter]) -> Word {
        let mut v = Vec::with_capacity(self.0.len() - cut + mid.len());
        v.extend_from_slice(&self.0[..pos]);
        v.extend_from_slice(mid);
        v.extend_from_slice(&self.0[pos + cut..]);
        Word(v)
    }
}

/// A polynomial in the free algebra, keyed by word.
pub type FreePoly<S> = BTreeMap<Word, S>;

pub fn poly_add_term<S: Scalar>(f: &mut FreePoly<S>, w: Word, c: S) {
    if c.is_zero() {
        return;
    }
    match f.get_mut(&w) {
        Some(v) => {
            *v = v.add(&c);
            if v.is_zero() {
                f.remove(&w);
            }
        }
        None => {
            f.insert(w, c);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rule<S> {
    pub lead: Word,
    /// lead = sum of coefficient * word.
    pub tail: Vec<(Word, S)>,
}

#[derive(Clone, Debug, Default)]
struct Trie {
    next: Vec<Vec<u32>>,
    terminal: Vec<Option<u32>>,
}

impl Trie {
    fn new(letters: usize) -> Self {
        Trie { next: vec![vec![u32::MAX; letters]], terminal: vec![None] }
    }

    fn insert(&mut self, w: &[Letter], id: u32) {
        let letters = self.next[0].len();
        let mut node = 0usize;
        for &c in w {
            let nx = self.next[node][c as usize];
            node = if nx == u32::MAX {
                self.next.push(vec![u32::MAX; letters]);
                self.terminal.push(None);
                let k = (self.next.len() - 1) as u32;
                self.next[node][c as usize] = k;
                k as usize
            } else {
                nx as usize
            };
        }
        self.terminal[node] = Some(id);
    }

    fn remove(&mut self, w: &[Letter]) {
        let mut node = 0usize;
        for &c in w {
            node = self.next[node][c as usize] as usize;
        }
        self.terminal[node] = None;
    }

    /// Leftmost occurrence of any stored word inside `w`.
    fn find(&self, w: &[Letter]) -> Option<(usize, u32)> {
        for s in 0..w.len() {
            let mut node = 0usize;
            for &c in &w[s..] {
                let nx = self.next[node][c as usize];
                if nx == u32::MAX {
                    break;
                }
                node = nx as usize;
                if let Some(id) = self.terminal[node] {
                    return Some((s, id));
                }
            }
        }
        None
    }

    /// Whether a stored word occurs in `w` touching neither end.
    fn occurs_strictly_inside(&self, w: &[Letter]) -> bool {
        if w.len() < 3 {
            return false;
        }
        let inner = &w[1..w.len() - 1];
        self.find(inner).is_some()
    }

    /// A stored word that is a suffix of `w`.
    fn find_suffix(&self, w: &[Letter]) -> Option<(usize, u32)> {
        for s in 0..w.len() {
            let mut node = 0usize;
            let mut ok = true;
            for &c in &w[s..] {
                let nx = self.next[node][c as usize];
                if nx == u32::MAX {
                    ok = false;
                    break;
                }
                node = nx as usize;
            }
            if ok {
                if let Some(id) = self.terminal[node] {
                    return Some((s, id));
                }
            }
        }
        None
    }
}

/// Order in which critical pairs are processed. Both give the same reduced
/// rule set; the shuffled one exists to test that claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Standard,
    Shuffled(u64),
}

#[derive(Clone, Debug, Default)]
pub struct CompletionStats {
    pub rules: usize,
    pub pairs_processed: usize,
    pub pairs_zero: usize,
    pub pairs_skipped: usize,
}

/// A rule set with its lookup trie.
#[derive(Clone, Debug)]
pub struct RewriteSystem<S> {
    letters: usize,
    rules: Vec<Option<Rule<S>>>,
    trie: Trie,
    pub stats: CompletionStats,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum Pending {
    /// Index into the polynomial store.
    Poly(usize),
    /// Overlap of rule `a` (suffix) with rule `b` (prefix) of length k.
    Pair(u32, u32, usize),
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl<S: Scalar> RewriteSystem<S> {
    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule<S>> {
        self.rules.iter().flatten()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().flatten().count()
    }

    /// Full normal form of a polynomial.
    pub fn reduce(&self, mut f: FreePoly<S>) -> FreePoly<S> {
        let mut out = FreePoly::new();
        while let Some((w, c)) = f.pop_last() {
            match self.trie.find(&w.0) {
                Some((pos, id)) => {
                    let rule = self.rules[id as usize].as_ref().expect("live rule");
                    for (tw, tc) in &rule.tail {
                        poly_add_term(&mut f, w.splice(pos, rule.lead.len(), &tw.0), c.mul(tc));
                    }
                }
                None => {
                    out.insert(w, c);
                }
            }
        }
        out
    }

    pub fn is_normal(&self, w: &[Letter]) -> bool {
        self.trie.find(w).is_none()
    }

    /// Complete a presentation. `max_len` bounds the overlap words considered
    /// and guards against runaway completion.
    pub fn complete(
        letters: usize,
        relations: Vec<FreePoly<S>>,
        strategy: Strategy,
        max_len: usize,
        mut progress: impl FnMut(&CompletionStats),
    ) -> Result<Self> {
        let mut sys = RewriteSystem::<S> { letters, rules: Vec::new(), trie: Trie::new(letters), stats: CompletionStats::default() };
        let mut store: Vec<Option<FreePoly<S>>> = Vec::new();
        let mut heap: BinaryHeap<Reverse<(usize, u64, Word, Pending)>> = BinaryHeap::new();
        let mut rng = match strategy {
            Strategy::Standard => 0,
            Strategy::Shuffled(seed) => seed | 1,
        };
        let tie = |rng: &mut u64| -> u64 {
            if *rng == 0 {
                0
            } else {
                splitmix(rng)
            }
        };
        for f in relations {
            if let Some((w, _)) = f.last_key_value() {
                let w = w.clone();
                store.push(Some(f));
                let t = tie(&mut rng);
                heap.push(Reverse((w.len(), t, w, Pending::Poly(store.len() - 1))));
            }
        }
        let mut last_report = 0usize;
        while let Some(Reverse((_, _, overlap, item))) = heap.pop() {
            let f = match item {
                Pending::Poly(k) => store[k].take().expect("pending polynomial"),
                Pending::Pair(a, b, k) => {
                    let (Some(ra), Some(rb)) = (&sys.rules[a as usize], &sys.rules[b as usize]) else {
                        continue;
                    };
                    // Chain criterion: a leading word strictly inside the
                    // overlap splits it into two shorter obstructions.
                    if sys.trie.occurs_strictly_inside(&overlap.0) {
                        sys.stats.pairs_skipped += 1;
                        continue;
                    }
                    sys.stats.pairs_processed += 1;
                    // overlap = u v w, lead_a = u v, lead_b = v w
                    let u_len = ra.lead.len() - k;
                    let w_suffix = &rb.lead.0[k..];
                    let u_prefix = &ra.lead.0[..u_len];
                    debug_assert_eq!(overlap.0.len(), u_len + rb.lead.len());
                    let mut f = FreePoly::new();
                    for (tw, tc) in &ra.tail {
                        let mut v = tw.0.clone();
                        v.extend_from_slice(w_suffix);
                        poly_add_term(&mut f, Word(v), tc.clone());
                    }
                    for (tw, tc) in &rb.tail {
                        let mut v = u_prefix.to_vec();
                        v.extend_from_slice(&tw.0);
                        poly_add_term(&mut f, Word(v), tc.neg());
                    }
                    f
                }
            };
            let h = sys.reduce(f);
            let Some((lead, lc)) = h.last_key_value() else {
                sys.stats.pairs_zero += 1;
                continue;
            };
            let lead = lead.clone();
            if lead.len() > max_len {
                return Err(Error::Termination(format!(
                    "completion produced a rule of length {} beyond the bound {max_len}",
                    lead.len()
                )));
            }
            let inv = lc.inv()?;
            let tail: Vec<(Word, S)> = h
                .iter()
                .rev()
                .skip(1)
                .map(|(w, c)| (w.clone(), c.mul(&inv).neg()))
                .collect();
            if tail.iter().any(|(w, _)| *w >= lead) {
                return Err(Error::Termination(format!("rule for {:?} has a tail word not below its lead", lead.0)));
            }
            let id = sys.rules.len() as u32;
            // Rules whose lead contains the new lead are retired and requeued.
            for k in 0..sys.rules.len() {
                let contains = match &sys.rules[k] {
                    Some(r) => r.lead.0.windows(lead.len()).any(|win| win == lead.0.as_slice()),
                    None => false,
                };
                if contains {
                    let r = sys.rules[k].take().unwrap();
                    sys.trie.remove(&r.lead.0);
                    let mut g = FreePoly::new();
                    g.insert(r.lead.clone(), S::one());
                    for (w, c) in r.tail {
                        poly_add_term(&mut g, w, c.neg());
                    }
                    store.push(Some(g));
                    let t = tie(&mut rng);
                    heap.push(Reverse((r.lead.len(), t, r.lead, Pending::Poly(store.len() - 1))));
                }
            }
            sys.trie.insert(&lead.0, id);
            sys.rules.push(Some(Rule { lead: lead.clone(), tail }));
            // Overlaps with every live rule, both ways, and with itself.
            for k in 0..sys.rules.len() {
                let Some(other) = &sys.rules[k] else { continue };
                let ol = other.lead.0.clone();
                for (a, la, b, lb) in [(id, &lead.0, k as u32, &ol), (k as u32, &ol, id, &lead.0)] {
                    let m = la.len().min(lb.len());
                    for kk in 1..m {
                        if la[la.len() - kk..] == lb[..kk] {
                            let mut w = la.clone();
                            w.extend_from_slice(&lb[kk..]);
                            if w.len() <= max_len + 1 {
                                let t = tie(&mut rng);
                                heap.push(Reverse((w.len(), t, Word(w), Pending::Pair(a, b, kk))));
                            }
                        }
                    }
                    if a == b {
                        break;
                    }
                }
            }
            sys.stats.rules = sys.rule_count();
            if sys.stats.pairs_processed >= last_report + 2000 {
                last_report = sys.stats.pairs_processed;
                progress(&sys.stats);
            }
        }
        // Fully reduce every tail.
        let ids: Vec<usize> = (0..sys.rules.len()).filter(|&k| sys.rules[k].is_some()).collect();
        for k in ids {
            let tail = std::mem::take(&mut sys.rules[k].as_mut().unwrap().tail);
            let f: FreePoly<S> = tail.into_iter().collect();
            let g = sys.reduce(f);
            sys.rules[k].as_mut().unwrap().tail = g.into_iter().rev().collect();
        }
        sys.stats.rules = sys.rule_count();
        Ok(sys)
    }

    /// All normal words, by degree-lexicographic order. Fails if more than
    /// `limit` exist.
    pub fn standard_words(&self, limit: usize) -> Result<Vec<Word>> {
        let mut all = vec![Word::default()];
        let mut frontier = vec![Word::default()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in &frontier {
                for c in 0..self.letters as Letter {
                    let mut v = w.0.clone();
                    v.push(c);
                    if self.trie.find_suffix(&v).is_none() {
                        next.push(Word(v));
                    }
                }
            }
            next.sort();
            all.extend(next.iter().cloned());
            if all.len() > limit {
                return Err(Error::Invariant(format!("more than {limit} normal words: the quotient is not finite")));
            }
            frontier = next;
        }
        Ok(all)
    }
}

/// Sparse vector over the normal words, sorted by index.
pub type SparseVec<S> = Vec<(u32, S)>;

pub fn vec_axpy<S: Scalar>(acc: &mut HashMap<u32, S>, c: &S, v: &[(u32, S)]) {
    if c.is_zero() {
        return;
    }
    for (i, x) in v {
        let t = c.mul(x);
        match acc.get_mut(i) {
            Some(y) => *y = y.add(&t),
            None => {
                acc.insert(*i, t);
            }
        }
    }
}

pub fn vec_from_map<S: Scalar>(acc: HashMap<u32, S>) -> SparseVec<S> {
    let mut v: SparseVec<S> = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
    v.sort_by_key(|p| p.0);
    v
}

/// Normal forms of right multiples of normal words by single letters,
/// memoized so that concurrent callers share work.
pub struct Normalizer<S> {
    sys: RewriteSystem<S>,
    words: Vec<Word>,
    index: HashMap<Word, u32>,
    memo: Vec<OnceLock<Box<[(u32, S)]>>>,
}

impl<S: Scalar> Normalizer<S> {
    pub fn new(sys: RewriteSystem<S>, limit: usize) -> Result<Self> {
        let words = sys.standard_words(limit)?;
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        let memo = (0..words.len() * sys.letters).map(|_| OnceLock::new()).collect();
        Ok(Normalizer { sys, words, index, memo })
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn system(&self) -> &RewriteSystem<S> {
        &self.sys
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn index_of(&self, w: &Word) -> Option<u32> {
        self.index.get(w).copied()
    }

    pub fn unit(&self) -> SparseVec<S> {
        vec![(0, S::one())]
    }

    /// NF(word_m * letter).
    pub fn step(&self, m: u32, t: Letter) -> &[(u32, S)] {
        let slot = m as usize * self.sys.letters + t as usize;
        if let Some(v) = self.memo[slot].get() {
            return v;
        }
        let mut stack = vec![(m, t)];
        while let Some(&(m, t)) = stack.last() {
            let slot = m as usize * self.sys.letters + t as usize;
            if self.memo[slot].get().is_some() {
                stack.pop();
                continue;
            }
            match self.try_step(m, t) {
                Ok(v) => {
                    let _ = self.memo[slot].set(v.into_boxed_slice());
                    stack.pop();
                }
                Err(missing) => stack.extend(missing),
            }
        }
        self.memo[slot].get().expect("filled")
    }

    fn try_step(&self, m: u32, t: Letter) -> std::result::Result<SparseVec<S>, Vec<(u32, Letter)>> {
        let mut w = self.words[m as usize].0.clone();
        w.push(t);
        let word = Word(w);
        if let Some(&i) = self.index.get(&word) {
            return Ok(vec![(i, S::one())]);
        }
        let (pos, id) = self.sys.trie.find_suffix(&word.0).expect("a rule applies to a non-normal word");
        let rule = self.sys.rules[id as usize].as_ref().expect("live rule");
        let prefix = self.index[&Word(word.0[..pos].to_vec())];
        let mut acc: HashMap<u32, S> = HashMap::new();
        let mut missing = Vec::new();
        for (tw, tc) in &rule.tail {
            let mut cur: SparseVec<S> = vec![(prefix, tc.clone())];
            for &c in &tw.0 {
                let mut next: HashMap<u32, S> = HashMap::new();
                for (i, x) in &cur {
                    let slot = *i as usize * self.sys.letters + c as usize;
                    match self.memo[slot].get() {
                        Some(v) => vec_axpy(&mut next, x, v),
                        None => missing.push((*i, c)),
                    }
                }
                if !missing.is_empty() {
                    break;
                }
                cur = vec_from_map(next);
            }
            if !missing.is_empty() {
                return Err(missing);
            }
            for (i, x) in cur {
                vec_axpy(&mut acc, &S::one(), &[(i, x)]);
            }
        }
        Ok(vec_from_map(acc))
    }

    /// v * letter.
    pub fn mul_letter(&self, v: &[(u32, S)], t: Letter) -> SparseVec<S> {
        let mut acc = HashMap::new();
        for (i, x) in v {
            vec_axpy(&mut acc, x, self.step(*i, t));
        }
        vec_from_map(acc)
    }

    /// v * word.
    pub fn mul_word(&self, v: &[(u32, S)], w: &[Letter]) -> SparseVec<S> {
        let mut cur = v.to_vec();
        for &t in w {
            cur = self.mul_letter(&cur, t);
        }
        cur
    }

    /// u * v for arbitrary vectors.
    pub fn mul(&self, u: &[(u32, S)], v: &[(u32, S)]) -> SparseVec<S> {
        let mut acc = HashMap::new();
        for (j, y) in v {
            let part = self.mul_word(u, &self.words[*j as usize].0);
            vec_axpy(&mut acc, y, &part);
        }
        vec_from_map(acc)
    }

    /// Normal form of a word via the memoized steps.
    pub fn normal_form(&self, w: &[Letter]) -> SparseVec<S> {
        self.mul_word(&self.unit(), w)
    }

    pub fn filled_entries(&self) -> usize {
        self.memo.iter().filter(|m| m.get().is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    fn poly(terms: &[(&[u8], i64)]) -> FreePoly<Q> {
        let mut f = FreePoly::new();
        for (w, c) in terms {
            poly_add_term(&mut f, Word(w.to_vec()), q(*c));
        }
        f
    }

    #[test]
    fn deglex_order() {
        assert!(Word(vec![1]) < Word(vec![0, 0]));
        assert!(Word(vec![0, 1]) < Word(vec![1, 0]));
    }

    #[test]
    fn commutative_polynomial_ring_truncated() {
        // x y = y x, x^2 = 0, y^3 = 0: dimension 6.
        let rels = vec![poly(&[(&[1, 0], 1), (&[0, 1], -1)]), poly(&[(&[0, 0], 1)]), poly(&[(&[1, 1, 1], 1)])];
        let sys = RewriteSystem::complete(2, rels, Strategy::Standard, 20, |_| {}).unwrap();
        assert_eq!(sys.standard_words(100).unwrap().len(), 6);
    }

    #[test]
    fn symmetric_group_s3() {
        // Coxeter presentation of S_3: a^2 = b^2 = 1, aba = bab.
        let rels = vec![
            poly(&[(&[0, 0], 1), (&[], -1)]),
            poly(&[(&[1, 1], 1), (&[], -1)]),
            poly(&[(&[0, 1, 0], 1), (&[1, 0, 1], -1)]),
        ];
        for strat in [Strategy::Standard, Strategy::Shuffled(7)] {
            let sys = RewriteSystem::complete(2, rels.clone(), strat, 20, |_| {}).unwrap();
            let nz = Normalizer::new(sys, 100).unwrap();
            assert_eq!(nz.dim(), 6);
            let v = nz.normal_form(&[1, 0, 1, 0, 1, 0]);
            assert_eq!(v, vec![(0, q(1))]);
        }
    }

    #[test]
    fn infinite_quotient_detected() {
        let rels = vec![poly(&[(&[0, 1], 1), (&[1, 0], -1)])];
        let sys = RewriteSystem::complete(2, rels, Strategy::Standard, 20, |_| {}).unwrap();
        assert!(sys.standard_words(50).is_err());
    }
}
