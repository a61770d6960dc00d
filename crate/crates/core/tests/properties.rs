use std::collections::HashMap;
use std::sync::OnceLock;

use cbmw::algebra::{cond_expect, include, markov_trace, mul};
use cbmw::diagram::{basis_enumerate, connector, ZBrauer};
use cbmw::engine::{mul_basis_with, Bmw};
use cbmw::hecke::{hecke_basis, hecke_mul, HeckeElem, HeckeParams};
use cbmw::params::rat;
use cbmw::rewrite::Strategy as Completion;
use cbmw::ring::{var_u, VAR_Q};
use cbmw::{AlgElem, BasisElem, BraidWord, GenWord, Params, RhoBranch, RingElem, StructureCache, Token};
use num_rational::BigRational;
use proptest::prelude::*;

fn universal(r: usize) -> &'static Params {
    static P: OnceLock<Vec<Params>> = OnceLock::new();
    &P.get_or_init(|| (1..=3).map(|r| Params::universal(r, RhoBranch::default_for(r)).unwrap()).collect())[r - 1]
}

fn basis(n: usize, r: usize) -> &'static [BasisElem] {
    static B: OnceLock<HashMap<(usize, usize), Vec<BasisElem>>> = OnceLock::new();
    let all = B.get_or_init(|| {
        let mut m = HashMap::new();
        for n in 1..=3 {
            for r in 1..=3 {
                m.insert((n, r), basis_enumerate(n, r));
            }
        }
        m
    });
    &all[&(n, r)]
}

fn red(n: usize, text: &str, p: &Params) -> AlgElem {
    cbmw::reduce(&[(RingElem::one(), GenWord::parse(n, text).unwrap())], p).unwrap()
}

fn trace(x: &AlgElem, p: &Params) -> RingElem {
    markov_trace(x, p).unwrap().value
}

// Ring elements: quotients of small Laurent polynomials in q and u1.

fn poly() -> impl Strategy<Value = RingElem> {
    prop::collection::vec((-3i64..=3, -2i32..=2, 0i32..=2), 0..4).prop_map(|terms| {
        let q = RingElem::var(VAR_Q);
        let u = RingElem::var(var_u(1));
        terms.into_iter().fold(RingElem::zero(), |acc, (c, eq, eu)| {
            acc.add(&RingElem::from_int(c).mul(&q.pow(eq).unwrap()).mul(&u.pow(eu).unwrap()))
        })
    })
}

fn ring_elem() -> impl Strategy<Value = RingElem> {
    (poly(), poly().prop_filter("nonzero denominator", |d| !d.is_zero())).prop_map(|(n, d)| n.div(&d).unwrap())
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=5).prop_filter("nonzero", |(a, _)| *a != 0).prop_map(|(a, b)| rat(a, b))
}

// Generator words and algebra elements.

fn token(n: usize) -> impl Strategy<Value = Token> {
    let i = 1..n.max(2);
    prop_oneof![
        i.clone().prop_map(Token::E),
        (i, prop_oneof![Just(1i8), Just(-1i8)]).prop_map(|(i, s)| Token::G(i, s)),
        prop_oneof![Just(1i8), Just(-1i8)].prop_map(Token::Y),
    ]
    .prop_filter("in range", move |t| t.check(n).is_ok())
}

fn word(n: usize, max_len: usize) -> impl Strategy<Value = GenWord> {
    prop::collection::vec(token(n), 0..=max_len).prop_map(move |t| GenWord::new(n, t).unwrap())
}

fn elem(n: usize, r: usize) -> impl Strategy<Value = AlgElem> {
    let size = basis(n, r).len();
    prop::collection::vec((0..size, -3i64..=3), 1..=3).prop_map(move |terms| {
        let p = universal(r);
        let terms = terms.into_iter().map(|(k, c)| (basis(n, r)[k].clone(), RingElem::from_int(c)));
        AlgElem::from_terms(n, r, p.mode(), terms).unwrap()
    })
}

/// Two words on a common random strand count.
fn words(max_len: usize) -> impl Strategy<Value = (usize, GenWord, GenWord)> {
    (1usize..=4).prop_flat_map(move |n| (Just(n), word(n, max_len), word(n, max_len)))
}

/// Closed loops carry no orientation, so their windings are compared up to sign.
fn loop_multiset(v: Vec<i64>) -> Vec<i64> {
    let mut v: Vec<i64> = v.into_iter().map(i64::abs).collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in ring_elem(), b in ring_elem(), c in ring_elem()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        if !a.is_zero() {
            prop_assert!(a.mul(&a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn ring_canonical_form(a in ring_elem()) {
        prop_assert_eq!(a.renormalized(), a.clone());
        let back: RingElem = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn specialization_is_a_homomorphism(a in ring_elem(), b in ring_elem(), q in small_rational(), u in small_rational()) {
        let asg = HashMap::from([(VAR_Q, q), (var_u(1), u)]);
        let (Ok(sa), Ok(sb)) = (a.specialize(&asg), b.specialize(&asg)) else { return Ok(()) };
        prop_assert_eq!(a.add(&b).specialize(&asg).unwrap(), &sa + &sb);
        prop_assert_eq!(a.mul(&b).specialize(&asg).unwrap(), &sa * &sb);
    }

    #[test]
    fn connector_is_multiplicative((n, w1, w2) in words(8)) {
        let (d1, l1) = w1.connector();
        let (d2, l2) = w2.connector();
        let (d, l) = d1.compose(&d2);
        let (whole, lw) = connector(n, &w1.concat(&w2).tokens);
        prop_assert_eq!(whole, d);
        prop_assert_eq!(loop_multiset(lw), loop_multiset([l1, l2, l].concat()));
    }

    #[test]
    fn composition_is_associative((_, ws) in (1usize..=4).prop_flat_map(|n| (Just(n), prop::collection::vec(word(n, 6), 3)))) {
        let [a, b, c] = [0, 1, 2].map(|k| ws[k].connector().0);
        let (ab, l1) = a.compose(&b);
        let (ab_c, l2) = ab.compose(&c);
        let (bc, l3) = b.compose(&c);
        let (a_bc, l4) = a.compose(&bc);
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(loop_multiset([l1, l2].concat()), loop_multiset([l3, l4].concat()));
    }

    #[test]
    fn diagram_json_round_trip((_, w, _) in words(10)) {
        let d = w.connector().0;
        let back: ZBrauer = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn basis_json_round_trip(n in 1usize..=3, r in 1usize..=3, k in any::<prop::sample::Index>()) {
        let b = k.get(basis(n, r)).clone();
        let back: BasisElem = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        prop_assert_eq!(back, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_is_associative(x in elem(2, 2), y in elem(2, 2), z in elem(2, 2)) {
        let p = universal(2);
        let left = mul(&mul(&x, &y, p).unwrap(), &z, p).unwrap();
        let right = mul(&x, &mul(&y, &z, p).unwrap(), p).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn product_is_bilinear(x in elem(2, 2), y in elem(2, 2), z in elem(2, 2)) {
        let p = universal(2);
        let lhs = mul(&x.add(&y).unwrap(), &z, p).unwrap();
        let rhs = mul(&x, &z, p).unwrap().add(&mul(&y, &z, p).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn basis_words_are_normal(n in 1usize..=2, r in 1usize..=3, k in any::<prop::sample::Index>()) {
        let b = k.get(basis(n, r)).clone();
        let x = cbmw::reduce(&[(RingElem::one(), b.word().unwrap())], universal(r)).unwrap();
        prop_assert_eq!(x, AlgElem::basis(b, universal(r).mode()));
    }

    #[test]
    fn element_json_round_trip(x in elem(2, 2)) {
        let back: AlgElem = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn shuffled_completion_agrees(w in word(2, 8)) {
        static ENGINES: OnceLock<Vec<Bmw<RingElem>>> = OnceLock::new();
        let engines = ENGINES.get_or_init(|| {
            [Completion::Standard, Completion::Shuffled(1), Completion::Shuffled(0x5eed)]
                .into_iter()
                .map(|s| Bmw::build(universal(2), 2, s).unwrap())
                .collect()
        });
        let p = universal(2);
        let base = engines[0].to_elem(&engines[0].word_vec(&w.tokens).unwrap(), p.mode()).unwrap();
        prop_assert_eq!(&base, &cbmw::reduce(&[(RingElem::one(), w.clone())], p).unwrap());
        for e in &engines[1..] {
            prop_assert_eq!(e.normalizer().words(), engines[0].normalizer().words());
            prop_assert_eq!(&e.to_elem(&e.word_vec(&w.tokens).unwrap(), p.mode()).unwrap(), &base);
        }
    }

    #[test]
    fn trace_is_symmetric(x in elem(2, 2), y in elem(2, 2)) {
        let p = universal(2);
        prop_assert_eq!(trace(&mul(&x, &y, p).unwrap(), p), trace(&mul(&y, &x, p).unwrap(), p));
    }

    #[test]
    fn markov_properties(b in elem(2, 2), k in 1i64..=3) {
        let p = universal(2);
        let tb = trace(&b, p);
        let ib = include(&b, p).unwrap();
        let d0_inv = p.delta0().inv().unwrap();
        for (text, factor) in [
            ("g2", p.rho().mul(&d0_inv)),
            ("g2^-1", p.rho().inv().unwrap().mul(&d0_inv)),
            ("e2", d0_inv.clone()),
        ] {
            let x = mul(&ib, &red(3, text, p), p).unwrap();
            prop_assert_eq!(trace(&x, p), factor.mul(&tb), "{}", text);
        }
        // The ratio against eps(b) does not depend on b and equals eps(y^k) on one strand.
        let x = mul(&ib, &red(3, &format!("yp3^{k}"), p), p).unwrap();
        let one_strand = trace(&red(1, &format!("y^{k}"), p), p);
        prop_assert_eq!(trace(&x, p), one_strand.mul(&tb));
    }

    #[test]
    fn conditional_expectation_is_a_bimodule_map(a in elem(1, 2), x in elem(2, 2), b in elem(1, 2)) {
        let p = universal(2);
        prop_assert_eq!(cond_expect(&include(&a, p).unwrap(), p).unwrap(), a.clone());
        let sandwich = mul(&mul(&include(&a, p).unwrap(), &x, p).unwrap(), &include(&b, p).unwrap(), p).unwrap();
        let expect = mul(&mul(&a, &cond_expect(&x, p).unwrap(), p).unwrap(), &b, p).unwrap();
        prop_assert_eq!(cond_expect(&sandwich, p).unwrap(), expect);
    }

    #[test]
    fn warm_cache_equals_cold(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let p = universal(2);
        let (x, y) = (i.get(basis(2, 2)), j.get(basis(2, 2)));
        let dir = tempfile::tempdir().unwrap();
        let cold = StructureCache::persistent(dir.path()).unwrap();
        let v = mul_basis_with(x, y, p, &cold).unwrap();
        cold.flush().unwrap();
        let warm = StructureCache::persistent(dir.path()).unwrap();
        prop_assert_eq!(warm.get(p, x, y).unwrap(), Some(v.clone()));
        prop_assert_eq!(mul_basis_with(x, y, p, &warm).unwrap(), v);
    }

    #[test]
    fn params_json_round_trip(r in 1usize..=3, q in small_rational(), u in prop::collection::vec(small_rational(), 3)) {
        let p = universal(r);
        let back: Params = serde_json::from_str(&serde_json::to_string(p).unwrap()).unwrap();
        prop_assert_eq!(&back, p);
        if let Ok(p) = Params::numeric(r, RhoBranch::default_for(r), q, u[..r].to_vec()) {
            let back: Params = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}

// Hecke quotient.

fn hecke_elem(n: usize, r: usize) -> impl Strategy<Value = HeckeElem> {
    let all = hecke_basis(n, r);
    prop::collection::vec((0..all.len(), -3i64..=3), 1..=3).prop_map(move |terms| {
        let mut x = HeckeElem::zero(n, r);
        for (k, c) in terms {
            x.add_term(all[k].clone(), RingElem::from_int(c)).unwrap();
        }
        x
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hecke_product_is_associative(x in hecke_elem(3, 2), y in hecke_elem(3, 2), z in hecke_elem(3, 2)) {
        let hp = HeckeParams::universal(2).unwrap();
        let left = hecke_mul(&hecke_mul(&x, &y, &hp).unwrap(), &z, &hp).unwrap();
        let right = hecke_mul(&x, &hecke_mul(&y, &z, &hp).unwrap(), &hp).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn hecke_json_round_trip(x in hecke_elem(3, 2)) {
        let back: HeckeElem = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert_eq!(back, x);
    }
}

// Link invariants.

fn braid(n: usize, max_len: usize) -> impl Strategy<Value = BraidWord> {
    prop::collection::vec((0..n, any::<bool>()), 0..=max_len).prop_map(move |toks| {
        let tokens = toks
            .into_iter()
            .map(|(k, pos)| {
                let s = if pos { 1 } else { -1 };
                if k == 0 {
                    cbmw::invariants::BraidToken::T(s)
                } else {
                    cbmw::invariants::BraidToken::S(k, s)
                }
            })
            .collect();
        BraidWord::new(n, tokens).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_unknot_multiplies_by_delta0(b in braid(2, 5)) {
        let p = universal(2);
        let v = cbmw::invariants::invariant_values(&b, p).unwrap();
        let w = cbmw::invariants::invariant_values(&b.add_strand(), p).unwrap();
        prop_assert_eq!(w.raw, v.raw);
        prop_assert_eq!(w.normalized, v.normalized.mul(p.delta0()));
    }

    #[test]
    fn markov_moves_preserve_the_invariant(b in braid(2, 5)) {
        let report = cbmw::markov_move_suite(&b, universal(2)).unwrap();
        prop_assert!(report.all_pass(), "{:?}", report.checks.iter().filter(|c| !c.pass).map(|c| &c.label).collect::<Vec<_>>());
    }

    #[test]
    fn braid_json_round_trip(b in braid(3, 8)) {
        let back: BraidWord = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        prop_assert_eq!(&back, &b);
        if !b.tokens.is_empty() {
            prop_assert_eq!(BraidWord::parse(3, &b.to_string()).unwrap(), b);
        }
    }
}
