//! Z-Brauer diagrams, generator words, canonical lifts and the normal-form
//! index set.
//!
//! Vertices are numbered 1..n on top and -1..-n on the bottom. The boundary
//! order used for orientation is p_1 < ... < p_n < pbar_n < ... < pbar_1.
//! In a product `v * w` the diagram of `w` is stacked on top of `v`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A perfect matching of the 2n boundary points with an integer winding
/// label per strand.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ZBrauer {
    n: usize,
    /// Internal index: top i -> i-1, bottom i -> n+i-1.
    partner: Vec<usize>,
    /// Winding accumulated when the strand is traversed starting at this vertex.
    wind: Vec<i64>,
}

fn ext(n: usize, v: usize) -> i64 {
    if v < n {
        v as i64 + 1
    } else {
        -((v - n) as i64 + 1)
    }
}

fn int(n: usize, v: i64) -> Result<usize> {
    let k = v.unsigned_abs() as usize;
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("vertex {v} out of range for n = {n}")));
    }
    Ok(if v > 0 { k - 1 } else { n + k - 1 })
}

impl ZBrauer {
    pub fn identity(n: usize) -> Self {
        let mut partner = vec![0; 2 * n];
        for i in 0..n {
            partner[i] = n + i;
            partner[n + i] = i;
        }
        ZBrauer { n, partner, wind: vec![0; 2 * n] }
    }

    /// The crossing g_i (labels zero).
    pub fn transposition(n: usize, i: usize) -> Self {
        let mut d = ZBrauer::identity(n);
        d.partner[i - 1] = n + i;
        d.partner[n + i] = i - 1;
        d.partner[i] = n + i - 1;
        d.partner[n + i - 1] = i;
        d
    }

    /// The tangle e_i: cap on top, cup on the bottom.
    pub fn cup_cap(n: usize, i: usize) -> Self {
        let mut d = ZBrauer::identity(n);
        d.partner[i - 1] = i;
        d.partner[i] = i - 1;
        d.partner[n + i - 1] = n + i;
        d.partner[n + i] = n + i - 1;
        d
    }

    /// Identity with strand 1 winding `k` times (top to bottom).
    pub fn winding(n: usize, k: i64) -> Self {
        let mut d = ZBrauer::identity(n);
        d.wind[0] = k;
        d.wind[n] = -k;
        d
    }

    /// Build from `(v, w, label)` triples with the label oriented v -> w.
    pub fn from_pairs(n: usize, pairs: &[(i64, i64, i64)]) -> Result<Self> {
        let mut partner = vec![usize::MAX; 2 * n];
        let mut wind = vec![0; 2 * n];
        if pairs.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} pairs, got {}", pairs.len())));
        }
        for &(v, w, l) in pairs {
            let (a, b) = (int(n, v)?, int(n, w)?);
            if a == b || partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::InvalidInput("pairs do not form a perfect matching".into()));
            }
            partner[a] = b;
            partner[b] = a;
            wind[a] = l;
            wind[b] = -l;
        }
        Ok(ZBrauer { n, partner, wind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Position in the orientation order p_1 < ... < p_n < pbar_n < ... < pbar_1.
    fn rank(&self, v: usize) -> usize {
        if v < self.n {
            v
        } else {
            2 * self.n - 1 - (v - self.n)
        }
    }

    /// Partner of an externally numbered vertex.
    pub fn partner_of(&self, v: i64) -> Result<i64> {
        Ok(ext(self.n, self.partner[int(self.n, v)?]))
    }

    /// Strands as `(start, end, label)`, each oriented from its lower vertex
    /// in the boundary order, listed by start vertex.
    pub fn strands(&self) -> Vec<(i64, i64, i64)> {
        let mut out: Vec<(usize, i64, i64, i64)> = (0..2 * self.n)
            .filter(|&v| self.rank(v) < self.rank(self.partner[v]))
            .map(|v| (self.rank(v), ext(self.n, v), ext(self.n, self.partner[v]), self.wind[v]))
            .collect();
        out.sort();
        out.into_iter().map(|(_, a, b, l)| (a, b, l)).collect()
    }

    pub fn is_ordinary(&self) -> bool {
        self.wind.iter().all(|&w| w == 0)
    }

    pub fn forget_labels(&self) -> Self {
        ZBrauer { n: self.n, partner: self.partner.clone(), wind: vec![0; 2 * self.n] }
    }

    /// Number of top-to-top arcs (equal to bottom-to-bottom arcs).
    pub fn horizontal_count(&self) -> usize {
        (0..self.n).filter(|&v| self.partner[v] < self.n && v < self.partner[v]).count()
    }

    /// Partner indices listed in boundary order; orders diagrams.
    pub fn code(&self) -> Vec<usize> {
        let mut by_rank = vec![0; 2 * self.n];
        for v in 0..2 * self.n {
            by_rank[self.rank(v)] = self.rank(self.partner[v]);
        }
        by_rank
    }

    /// Whether a strand begins at top vertex p_i.
    pub fn starts_at_top(&self, i: usize) -> bool {
        let v = i - 1;
        self.rank(v) < self.rank(self.partner[v])
    }

    /// Whether a bottom-to-bottom strand ends at pbar_i.
    pub fn bottom_arc_ends_at(&self, i: usize) -> bool {
        let v = self.n + i - 1;
        let w = self.partner[v];
        w >= self.n && self.rank(w) < self.rank(v)
    }

    /// Winding label of the strand through external vertex `v`, oriented
    /// away from `v`.
    pub fn label_from(&self, v: i64) -> Result<i64> {
        Ok(self.wind[int(self.n, v)?])
    }

    /// Pairs of strands whose endpoints alternate around the boundary.
    pub fn interleaving_pairs(&self) -> usize {
        let chords: Vec<(usize, usize)> = (0..2 * self.n)
            .filter(|&v| self.rank(v) < self.rank(self.partner[v]))
            .map(|v| (self.rank(v), self.rank(self.partner[v])))
            .collect();
        let mut count = 0;
        for (i, &(a, b)) in chords.iter().enumerate() {
            for &(c, d) in &chords[i + 1..] {
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    count += 1;
                }
            }
        }
        count
    }

    /// The product `self * top`: `top` is stacked above `self`. Returns the
    /// resulting diagram and the winding of every closed loop removed.
    pub fn compose(&self, top: &ZBrauer) -> (ZBrauer, Vec<i64>) {
        assert_eq!(self.n, top.n, "strand counts differ");
        let n = self.n;
        let lower = self;
        let upper = top;
        let mut partner = vec![usize::MAX; 2 * n];
        let mut wind = vec![0; 2 * n];
        let mut seen = vec![false; n];
        // Walk from an outer vertex. `in_upper` selects the diagram, `v` is a
        // vertex index in that diagram.
        let walk = |mut in_upper: bool, mut v: usize, seen: &mut Vec<bool>| -> (usize, i64) {
            let mut acc = 0;
            loop {
                let d = if in_upper { upper } else { lower };
                acc += d.wind[v];
                let w = d.partner[v];
                if in_upper {
                    if w < n {
                        return (w, acc);
                    }
                    let k = w - n;
                    seen[k] = true;
                    in_upper = false;
                    v = k;
                } else {
                    if w >= n {
                        return (w, acc);
                    }
                    seen[w] = true;
                    in_upper = true;
                    v = n + w;
                }
            }
        };
        for v in 0..2 * n {
            if partner[v] != usize::MAX {
                continue;
            }
            let (w, acc) = if v < n { walk(true, v, &mut seen) } else { walk(false, v, &mut seen) };
            partner[v] = w;
            partner[w] = v;
            wind[v] = acc;
            wind[w] = -acc;
        }
        let mut loops = Vec::new();
        for k in 0..n {
            if seen[k] {
                continue;
            }
            // Leftmost interface point; leave it downward into the lower diagram.
            let mut acc = 0;
            let mut v = k;
            loop {
                seen[v] = true;
                acc += lower.wind[v];
                let w = lower.partner[v];
                debug_assert!(w < n, "loop reached the bottom boundary");
                seen[w] = true;
                acc += upper.wind[n + w];
                let x = upper.partner[n + w];
                debug_assert!(x >= n, "loop reached the top boundary");
                v = x - n;
                if v == k {
                    break;
                }
            }
            loops.push(acc);
        }
        (ZBrauer { n, partner, wind }, loops)
    }

    pub fn to_json(&self) -> ZBrauerJson {
        let strands = self.strands();
        ZBrauerJson {
            n: self.n,
            pairs: strands.iter().map(|&(a, b, _)| [a, b]).collect(),
            labels: strands.iter().map(|&(_, _, l)| l).collect(),
        }
    }

    pub fn from_json(j: &ZBrauerJson) -> Result<Self> {
        if j.pairs.len() != j.labels.len() {
            return Err(Error::Parse("pairs and labels differ in length".into()));
        }
        let triples: Vec<(i64, i64, i64)> = j.pairs.iter().zip(&j.labels).map(|(p, &l)| (p[0], p[1], l)).collect();
        ZBrauer::from_pairs(j.n, &triples)
    }
}

impl fmt::Display for ZBrauer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .strands()
            .into_iter()
            .map(|(a, b, l)| if l == 0 { format!("{a}:{b}") } else { format!("{a}:{b}[{l}]") })
            .collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZBrauerJson {
    pub n: usize,
    pub pairs: Vec<[i64; 2]>,
    pub labels: Vec<i64>,
}

impl Serialize for ZBrauer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ZBrauer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ZBrauer::from_json(&ZBrauerJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// All ordinary Brauer diagrams on n strands, in code order.
pub fn brauer_diagrams(n: usize) -> Vec<ZBrauer> {
    fn rec(free: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(pairs.clone());
            return;
        }
        let a = free.remove(0);
        for k in 0..free.len() {
            let b = free.remove(k);
            pairs.push((a, b));
            rec(free, pairs, out);
            pairs.pop();
            free.insert(k, b);
        }
        free.insert(0, a);
    }
    // Work with boundary ranks, then map to vertex indices.
    let mut free: Vec<usize> = (0..2 * n).collect();
    let mut all = Vec::new();
    rec(&mut free, &mut Vec::new(), &mut all);
    let of_rank = |r: usize| if r < n { r } else { n + (2 * n - 1 - r) };
    let mut out: Vec<ZBrauer> = all
        .into_iter()
        .map(|pairs| {
            let mut partner = vec![0; 2 * n];
            for (a, b) in pairs {
                let (x, y) = (of_rank(a), of_rank(b));
                partner[x] = y;
                partner[y] = x;
            }
            ZBrauer { n, partner, wind: vec![0; 2 * n] }
        })
        .collect();
    out.sort_by_key(|d| d.code());
    out
}

/// A generator of the algebra.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Token {
    /// g_i (sign +1) or g_i^-1 (sign -1).
    G(usize, i8),
    E(usize),
    /// y_1 (+1) or y_1^-1 (-1).
    Y(i8),
}

impl Token {
    pub fn connector(&self, n: usize) -> ZBrauer {
        match *self {
            Token::G(i, _) => ZBrauer::transposition(n, i),
            Token::E(i) => ZBrauer::cup_cap(n, i),
            Token::Y(s) => ZBrauer::winding(n, s as i64),
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let ok = match *self {
            Token::G(i, s) => i >= 1 && i < n && (s == 1 || s == -1),
            Token::E(i) => i >= 1 && i < n,
            Token::Y(s) => n >= 1 && (s == 1 || s == -1),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("token {self} out of range for n = {n}")))
        }
    }

    pub fn inverse(&self) -> Option<Token> {
        match *self {
            Token::G(i, s) => Some(Token::G(i, -s)),
            Token::Y(s) => Some(Token::Y(-s)),
            Token::E(_) => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Token::G(i, 1) => write!(f, "g{i}"),
            Token::G(i, _) => write!(f, "g{i}^-1"),
            Token::E(i) => write!(f, "e{i}"),
            Token::Y(1) => write!(f, "y"),
            Token::Y(_) => write!(f, "y^-1"),
        }
    }
}

/// A word in the generators on n strands.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct GenWord {
    pub n: usize,
    pub tokens: Vec<Token>,
}

impl GenWord {
    pub fn new(n: usize, tokens: Vec<Token>) -> Result<Self> {
        for t in &tokens {
            t.check(n)?;
        }
        Ok(GenWord { n, tokens })
    }

    pub fn empty(n: usize) -> Self {
        GenWord { n, tokens: Vec::new() }
    }

    /// Parse whitespace-separated tokens: `g1`, `g1^-1`, `e2`, `y`, `y^-1`,
    /// `y^3`, `y1` (same as `y`), `yp2^k` for (y'_2)^k and `yj2` for y_2.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for raw in text.split_whitespace() {
            let (head, exp) = match raw.split_once('^') {
                Some((h, e)) => (h, e.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in {raw:?}")))?),
                None => (raw, 1),
            };
            let idx = |prefix: &str| -> Result<usize> {
                head[prefix.len()..].parse::<usize>().map_err(|_| Error::Parse(format!("bad token {raw:?}")))
            };
            if head == "y" || head == "y1" {
                tokens.extend(y_power(exp));
            } else if let Some(rest) = head.strip_prefix("yp") {
                let j: usize = rest.parse().map_err(|_| Error::Parse(format!("bad token {raw:?}")))?;
                if j == 0 || j > n {
                    return Err(Error::InvalidInput(format!("{raw} out of range")));
                }
                tokens.extend(y_prime(j, exp));
            } else if head.starts_with("yj") {
                let j = idx("yj")?;
                if j == 0 || j > n {
                    return Err(Error::InvalidInput(format!("{raw} out of range")));
                }
                for _ in 0..exp.max(0) {
                    tokens.extend(y_plain(j));
                }
                if exp < 0 {
                    return Err(Error::Parse("negative powers of y_j are not supported".into()));
                }
            } else if head.starts_with('g') {
                let i = idx("g")?;
                let s: i8 = if exp < 0 { -1 } else { 1 };
                for _ in 0..exp.unsigned_abs() {
                    tokens.push(Token::G(i, s));
                }
            } else if head.starts_with('e') {
                let i = idx("e")?;
                if exp < 1 {
                    return Err(Error::Parse(format!("e_i has no inverse: {raw:?}")));
                }
                for _ in 0..exp {
                    tokens.push(Token::E(i));
                }
            } else {
                return Err(Error::Parse(format!("unknown token {raw:?}")));
            }
        }
        GenWord::new(n, tokens)
    }

    pub fn concat(&self, other: &GenWord) -> GenWord {
        assert_eq!(self.n, other.n);
        let mut tokens = self.tokens.clone();
        tokens.extend_from_slice(&other.tokens);
        GenWord { n: self.n, tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Connector of the word plus the windings of closed loops formed.
    pub fn connector(&self) -> (ZBrauer, Vec<i64>) {
        connector(self.n, &self.tokens)
    }
}

impl fmt::Display for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tokens.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.tokens.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub fn connector(n: usize, tokens: &[Token]) -> (ZBrauer, Vec<i64>) {
    let mut d = ZBrauer::identity(n);
    let mut loops = Vec::new();
    for t in tokens {
        let (e, l) = d.compose(&t.connector(n));
        d = e;
        loops.extend(l);
    }
    (d, loops)
}

pub fn y_power(k: i64) -> Vec<Token> {
    let s: i8 = if k < 0 { -1 } else { 1 };
    vec![Token::Y(s); k.unsigned_abs() as usize]
}

/// (y'_j)^k = g_{j-1} ... g_1 y^k g_1^-1 ... g_{j-1}^-1.
pub fn y_prime(j: usize, k: i64) -> Vec<Token> {
    if k == 0 {
        return Vec::new();
    }
    let mut out: Vec<Token> = (1..j).rev().map(|i| Token::G(i, 1)).collect();
    out.extend(y_power(k));
    out.extend((1..j).map(|i| Token::G(i, -1)));
    out
}

/// y_j = g_{j-1} ... g_1 y g_1 ... g_{j-1}.
pub fn y_plain(j: usize) -> Vec<Token> {
    let mut out: Vec<Token> = (1..j).rev().map(|i| Token::G(i, 1)).collect();
    out.push(Token::Y(1));
    out.extend((1..j).map(|i| Token::G(i, 1)));
    out
}

/// x'_j = rho^-1 y'_j: the power of rho and the word.
pub fn x_prime(j: usize) -> (i32, Vec<Token>) {
    (-1, y_prime(j, 1))
}

type LiftTable = HashMap<Vec<usize>, Vec<Token>>;

fn lift_table(n: usize) -> std::sync::Arc<LiftTable> {
    static TABLES: OnceLock<Mutex<BTreeMap<usize, std::sync::Arc<LiftTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(t) = tables.lock().get(&n) {
        return t.clone();
    }
    let t = std::sync::Arc::new(build_lift_table(n));
    tables.lock().insert(n, t.clone());
    t
}

/// Least-cost loop-free words reaching each Brauer diagram: fewest
/// crossings, then fewest caps, then lexicographically smallest.
fn build_lift_table(n: usize) -> LiftTable {
    let mut moves: Vec<Token> = Vec::new();
    for i in 1..n {
        moves.push(Token::G(i, 1));
        moves.push(Token::E(i));
    }
    moves.sort();
    let mut best: LiftTable = HashMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0usize, 0usize, Vec::<Token>::new())));
    while let Some(Reverse((g, e, word))) = heap.pop() {
        let (d, _) = connector(n, &word);
        let code = d.code();
        if best.contains_key(&code) {
            continue;
        }
        best.insert(code, word.clone());
        for &t in &moves {
            let (next, loops) = d.compose(&t.connector(n));
            if !loops.is_empty() || best.contains_key(&next.code()) {
                continue;
            }
            let mut w = word.clone();
            w.push(t);
            let (g2, e2) = if matches!(t, Token::G(..)) { (g + 1, e) } else { (g, e + 1) };
            heap.push(Reverse((g2, e2, w)));
        }
    }
    best
}

/// The fixed word T_{d0} realizing an ordinary Brauer diagram.
pub fn canonical_lift(d0: &ZBrauer) -> Result<GenWord> {
    if !d0.is_ordinary() {
        return Err(Error::InvalidInput("canonical lift needs an unlabeled diagram".into()));
    }
    let table = lift_table(d0.n());
    let word = table
        .get(&d0.code())
        .cloned()
        .ok_or_else(|| Error::Invariant(format!("no lift found for {d0}")))?;
    Ok(GenWord { n: d0.n(), tokens: word })
}

/// A word of the spanning set: (y'_1)^{a_1}...(y'_{n-1})^{a_{n-1}} T_{d0}
/// (y'_n)^{b_n}...(y'_1)^{b_1}.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BasisElem {
    pub n: usize,
    pub r: usize,
    pub a: Vec<i64>,
    pub d0: ZBrauer,
    pub b: Vec<i64>,
}

impl BasisElem {
    pub fn identity(n: usize, r: usize) -> Self {
        BasisElem { n, r, a: vec![0; n.saturating_sub(1)], d0: ZBrauer::identity(n), b: vec![0; n] }
    }

    /// Check the slot rule and exponent bounds (r = 0 means unbounded).
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.a.len() != n.saturating_sub(1) || self.b.len() != n || self.d0.n() != n || !self.d0.is_ordinary() {
            return Err(Error::InvalidInput("malformed basis element".into()));
        }
        for (i, &x) in self.a.iter().enumerate() {
            if x != 0 && !self.d0.bottom_arc_ends_at(i + 1) {
                return Err(Error::InvalidInput(format!("a_{} must vanish", i + 1)));
            }
        }
        for (i, &x) in self.b.iter().enumerate() {
            if x != 0 && !self.d0.starts_at_top(i + 1) {
                return Err(Error::InvalidInput(format!("b_{} must vanish", i + 1)));
            }
        }
        if self.r > 0 && self.a.iter().chain(&self.b).any(|&x| x < 0 || x >= self.r as i64) {
            return Err(Error::InvalidInput("exponent outside [0, r)".into()));
        }
        Ok(())
    }

    pub fn word(&self) -> Result<GenWord> {
        let mut tokens = Vec::new();
        for (i, &x) in self.a.iter().enumerate() {
            tokens.extend(y_prime(i + 1, x));
        }
        tokens.extend(canonical_lift(&self.d0)?.tokens);
        for j in (1..=self.n).rev() {
            tokens.extend(y_prime(j, self.b[j - 1]));
        }
        Ok(GenWord { n: self.n, tokens })
    }

    /// The labeled diagram this element lifts.
    pub fn diagram(&self) -> ZBrauer {
        let mut d = self.d0.clone();
        let n = self.n;
        for i in 1..=n {
            if self.b[i - 1] != 0 {
                let v = i - 1;
                let w = d.partner[v];
                d.wind[v] = self.b[i - 1];
                d.wind[w] = -self.b[i - 1];
            }
        }
        for i in 1..n {
            if self.a[i - 1] != 0 {
                let v = n + i - 1;
                let w = d.partner[v];
                // Oriented from the partner (lower in boundary order) into pbar_i.
                d.wind[w] = self.a[i - 1];
                d.wind[v] = -self.a[i - 1];
            }
        }
        d
    }

    fn sort_key(&self) -> (Vec<usize>, &[i64], &[i64]) {
        (self.d0.code(), &self.a, &self.b)
    }
}

impl PartialOrd for BasisElem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BasisElem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.r).cmp(&(other.n, other.r)).then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl fmt::Display for BasisElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.diagram())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElemJson {
    pub n: usize,
    pub r: usize,
    pub a: Vec<i64>,
    pub d0: ZBrauer,
    pub b: Vec<i64>,
}

impl Serialize for BasisElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BasisElemJson { n: self.n, r: self.r, a: self.a.clone(), d0: self.d0.clone(), b: self.b.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BasisElemJson::deserialize(d)?;
        let e = BasisElem { n: j.n, r: j.r, a: j.a, d0: j.d0, b: j.b };
        e.validate().map_err(serde::de::Error::custom)?;
        Ok(e)
    }
}

/// Every spanning-set element for (n, r), ordered by (d0 code, a, b).
pub fn basis_enumerate(n: usize, r: usize) -> Vec<BasisElem> {
    assert!(r >= 1, "cyclotomic enumeration needs r >= 1");
    let mut out = Vec::new();
    for d0 in brauer_diagrams(n) {
        let a_slots: Vec<usize> = (1..n).filter(|&i| d0.bottom_arc_ends_at(i)).collect();
        let b_slots: Vec<usize> = (1..=n).filter(|&i| d0.starts_at_top(i)).collect();
        let slots = a_slots.len() + b_slots.len();
        let total = r.pow(slots as u32);
        let mut group = Vec::with_capacity(total);
        for mut code in 0..total {
            let mut a = vec![0; n.saturating_sub(1)];
            let mut b = vec![0; n];
            for &i in &a_slots {
                a[i - 1] = (code % r) as i64;
                code /= r;
            }
            for &i in &b_slots {
                b[i - 1] = (code % r) as i64;
                code /= r;
            }
            group.push(BasisElem { n, r, a, d0: d0.clone(), b });
        }
        group.sort();
        out.extend(group);
    }
    out
}

/// r^n (2n-1)!!
pub fn bmw_dimension(n: usize, r: usize) -> u128 {
    let mut df: u128 = 1;
    let mut k = 1;
    while k < 2 * n {
        df *= k as u128;
        k += 2;
    }
    (r as u128).pow(n as u32) * df
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_composition() {
        let d = ZBrauer::cup_cap(3, 1).compose(&ZBrauer::transposition(3, 2)).0;
        let (e, loops) = ZBrauer::identity(3).compose(&d);
        assert_eq!(e, d);
        assert!(loops.is_empty());
    }

    #[test]
    fn cup_cap_squared_closes_loop() {
        let e = ZBrauer::cup_cap(2, 1);
        let (d, loops) = e.compose(&e);
        assert_eq!(d, e);
        assert_eq!(loops, vec![0]);
    }

    #[test]
    fn labels_add_along_strand() {
        let a = ZBrauer::from_pairs(1, &[(1, -1, 2)]).unwrap();
        let b = ZBrauer::from_pairs(1, &[(1, -1, -3)]).unwrap();
        let (c, loops) = a.compose(&b);
        assert_eq!(c, ZBrauer::from_pairs(1, &[(1, -1, -1)]).unwrap());
        assert!(loops.is_empty());
    }

    #[test]
    fn winding_loop_is_positive() {
        let w = GenWord::parse(2, "e1 y e1").unwrap();
        let (d, loops) = w.connector();
        assert_eq!(d, ZBrauer::cup_cap(2, 1));
        assert_eq!(loops, vec![1]);
    }

    #[test]
    fn token_connectors() {
        let (d, _) = GenWord::parse(2, "g1").unwrap().connector();
        assert_eq!(d, ZBrauer::transposition(2, 1));
        let (d, _) = GenWord::parse(2, "y").unwrap().connector();
        assert_eq!(d, ZBrauer::from_pairs(2, &[(1, -1, 1), (2, -2, 0)]).unwrap());
    }

    #[test]
    fn small_lifts() {
        assert!(canonical_lift(&ZBrauer::identity(3)).unwrap().is_empty());
        assert_eq!(canonical_lift(&ZBrauer::cup_cap(2, 1)).unwrap().tokens, vec![Token::E(1)]);
        assert_eq!(canonical_lift(&ZBrauer::transposition(2, 1)).unwrap().tokens, vec![Token::G(1, 1)]);
        assert!(canonical_lift(&ZBrauer::winding(2, 1)).is_err());
    }

    #[test]
    fn nested_arcs_need_no_crossing() {
        let d = ZBrauer::from_pairs(4, &[(1, 4, 0), (2, 3, 0), (-1, -2, 0), (-3, -4, 0)]).unwrap();
        let w = canonical_lift(&d).unwrap();
        assert_eq!(w.tokens.iter().filter(|t| matches!(t, Token::G(..))).count(), 0);
        assert_eq!(w.connector(), (d, vec![]));
    }

    #[test]
    fn lifts_round_trip() {
        for n in 0..=5 {
            for d in brauer_diagrams(n) {
                let w = canonical_lift(&d).unwrap();
                let (c, loops) = w.connector();
                assert_eq!(c, d);
                assert!(loops.is_empty());
                let crossings = w.tokens.iter().filter(|t| matches!(t, Token::G(..))).count();
                assert_eq!(crossings, d.interleaving_pairs(), "{d}");
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(basis_enumerate(1, 1).len(), 1);
        assert_eq!(basis_enumerate(1, 3).len(), 3);
        assert_eq!(basis_enumerate(2, 2).len(), 12);
        for n in 1..=4 {
            for r in 1..=3 {
                assert_eq!(basis_enumerate(n, r).len() as u128, bmw_dimension(n, r));
            }
        }
    }

    #[test]
    fn slots_per_diagram() {
        for n in 1..=5 {
            for d in brauer_diagrams(n) {
                let a = (1..n).filter(|&i| d.bottom_arc_ends_at(i)).count();
                let b = (1..=n).filter(|&i| d.starts_at_top(i)).count();
                assert_eq!(a + b, n);
                assert_eq!(a, d.horizontal_count());
            }
        }
    }

    #[test]
    fn basis_word_connector_matches_labels() {
        for e in basis_enumerate(3, 3) {
            let (c, loops) = e.word().unwrap().connector();
            assert!(loops.is_empty());
            assert_eq!(c, e.diagram(), "{e}");
        }
    }

    #[test]
    fn json_round_trip() {
        for e in basis_enumerate(3, 2).into_iter().step_by(7) {
            let s = serde_json::to_string(&e).unwrap();
            let back: BasisElem = serde_json::from_str(&s).unwrap();
            assert_eq!(back, e);
        }
        let d = ZBrauer::from_pairs(2, &[(1, -2, 3), (2, -1, -1)]).unwrap();
        let back: ZBrauer = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
