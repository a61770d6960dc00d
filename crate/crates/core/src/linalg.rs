//! Exact sparse elimination and fraction-free rank.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rewrite::SparseVec;
use crate::ring::{Monomial, Poly, RingElem, Var};
use crate::scalar::Scalar;

/// Row-reduced form of a set of vectors, able to express any vector in
/// their span as a combination of them.
pub struct Echelon<S> {
    /// pivot coordinate -> (reduced vector with leading entry 1, combination)
    pivots: BTreeMap<u32, (SparseVec<S>, Vec<(usize, S)>)>,
    count: usize,
}

fn lead<S>(v: &[(u32, S)]) -> Option<u32> {
    v.last().map(|p| p.0)
}

fn axpy_sorted<S: Scalar>(v: &[(u32, S)], c: &S, w: &[(u32, S)]) -> SparseVec<S> {
    // v + c w, both sorted by index
    let mut out = Vec::with_capacity(v.len() + w.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < w.len() {
        if j >= w.len() || (i < v.len() && v[i].0 < w[j].0) {
            out.push(v[i].clone());
            i += 1;
        } else if i >= v.len() || w[j].0 < v[i].0 {
            out.push((w[j].0, c.mul(&w[j].1)));
            j += 1;
        } else {
            let x = v[i].1.add(&c.mul(&w[j].1));
            if !x.is_zero() {
                out.push((v[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn comb_axpy<S: Scalar>(acc: &mut HashMap<usize, S>, c: &S, w: &[(usize, S)]) {
    for (k, x) in w {
        let t = c.mul(x);
        match acc.get_mut(k) {
            Some(y) => *y = y.add(&t),
            None => {
                acc.insert(*k, t);
            }
        }
    }
}

fn comb_sorted<S: Scalar>(acc: HashMap<usize, S>) -> Vec<(usize, S)> {
    let mut v: Vec<(usize, S)> = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
    v.sort_by_key(|p| p.0);
    v
}

impl<S: Scalar> Echelon<S> {
    /// Fails if the vectors are linearly dependent.
    pub fn new(_dim: usize, vectors: &[SparseVec<S>]) -> Result<Self> {
        let mut e = Echelon { pivots: BTreeMap::new(), count: vectors.len() };
        for (k, v) in vectors.iter().enumerate() {
            let (rest, mut comb) = e.reduce(v);
            let Some(p) = lead(&rest) else {
                return Err(Error::Invariant(format!("vector {k} lies in the span of the earlier ones")));
            };
            // v = sum comb_i basis_i + rest  ->  rest = v - sum comb_i basis_i
            let mut c: HashMap<usize, S> = comb.drain(..).map(|(i, x)| (i, x.neg())).collect();
            c.insert(k, S::one());
            let inv = rest.last().unwrap().1.inv()?;
            let rest: SparseVec<S> = rest.into_iter().map(|(i, x)| (i, x.mul(&inv))).collect();
            let c: Vec<(usize, S)> = comb_sorted(c).into_iter().map(|(i, x)| (i, x.mul(&inv))).collect();
            e.pivots.insert(p, (rest, c));
        }
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Reduce v; returns the remainder and the combination of input vectors
    /// removed.
    fn reduce(&self, v: &[(u32, S)]) -> (SparseVec<S>, Vec<(usize, S)>) {
        let mut cur = v.to_vec();
        let mut done: SparseVec<S> = Vec::new();
        let mut comb = HashMap::new();
        while let Some(p) = lead(&cur) {
            match self.pivots.get(&p) {
                Some((row, c)) => {
                    let x = cur.last().unwrap().1.clone();
                    cur = axpy_sorted(&cur, &x.neg(), row);
                    comb_axpy(&mut comb, &x, c);
                }
                None => {
                    done.push(cur.pop().unwrap());
                }
            }
        }
        done.reverse();
        (done, comb_sorted(comb))
    }

    /// Coordinates of v in terms of the input vectors.
    pub fn solve(&self, v: &[(u32, S)]) -> Result<Vec<(usize, S)>> {
        let (rest, comb) = self.reduce(v);
        if !rest.is_empty() {
            return Err(Error::NotInSpan(format!("{} coordinates remain after elimination", rest.len())));
        }
        Ok(comb)
    }

    pub fn contains(&self, v: &[(u32, S)]) -> bool {
        self.reduce(v).0.is_empty()
    }
}

/// Rank of a dense matrix by fraction-free elimination.
pub fn rank<S: Scalar>(mut m: Vec<Vec<S>>) -> Result<usize> {
    let rows = m.len();
    if rows == 0 {
        return Ok(0);
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = S::one();
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                // Bareiss update; the division is exact.
                let num = m[rank][c].mul(&m[i][j]).sub(&m[i][c].mul(&m[rank][j]));
                m[i][j] = num.mul(&prev.inv()?);
            }
            m[i][c] = S::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

const PRIMES: [u64; 2] = [0x1FFF_FFFF_FFFF_FFFF, 0xFFFF_FFFF_FFFF_FFC5];

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

fn rank_mod(m: &[Vec<BigInt>], p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let r = ((x % &pb) + &pb) % &pb;
                    r.try_into().expect("residue fits in u64")
                })
                .collect()
        })
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][c], p - 2, p);
        for i in rank + 1..rows {
            if a[i][c] == 0 {
                continue;
            }
            let f = ((a[i][c] as u128 * inv as u128) % p as u128) as u64;
            for j in c..cols {
                let t = ((f as u128 * a[rank][j] as u128) % p as u128) as u64;
                a[i][j] = ((a[i][j] as u128 + p as u128 - t as u128) % p as u128) as u64;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Exact rank of an integer matrix. A full rank modulo a prime certifies
/// full rank over the rationals; otherwise fraction-free elimination over
/// the integers decides.
pub fn rank_integer(m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let target = rows.min(cols);
    if PRIMES.iter().any(|&p| rank_mod(&m, p) == target) {
        return target;
    }
    let mut m = m;
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let num = &m[rank][c] * &m[i][j] - &m[i][c] * &m[rank][j];
                m[i][j] = num / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Exact rank of a rational matrix: clear denominators row by row, then
/// rank over the integers.
pub fn rank_rational(m: &[Vec<BigRational>]) -> usize {
    let ints = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    rank_integer(ints)
}

/// Rank over the fraction field of a matrix of rational functions: clear
/// denominators row by row, then eliminate fraction-free over the polynomial
/// ring, where every division is exact and no gcds are needed.
pub fn rank_rational_functions(m: &[Vec<RingElem>]) -> Result<usize> {
    let mut rows: Vec<Vec<Poly>> = Vec::with_capacity(m.len());
    for row in m {
        let mut dens: Vec<&Poly> = Vec::new();
        for x in row {
            if !x.is_zero() && !dens.contains(&x.den()) {
                dens.push(x.den());
            }
        }
        let common = dens.iter().fold(Poly::one(), |acc, d| acc.mul(d));
        let mut out: Vec<Poly> = Vec::with_capacity(row.len());
        for x in row {
            if x.is_zero() {
                out.push(Poly::zero());
                continue;
            }
            let cofactor = common.div_exact(x.den()).ok_or_else(|| Error::Invariant("denominator clearing failed".into()))?;
            out.push(x.num().mul(&cofactor));
        }
        // Laurent exponents: shift the row by a monomial.
        let mut shift: BTreeMap<Var, i32> = BTreeMap::new();
        for p in &out {
            for (mono, _) in p.terms() {
                for &(v, e) in mono.pairs() {
                    let s = shift.entry(v).or_insert(0);
                    *s = (*s).min(e);
                }
            }
        }
        let mono = Monomial::from_pairs(shift.into_iter().filter(|p| p.1 < 0).map(|(v, e)| (v, -e)).collect());
        rows.push(out.into_iter().map(|p| p.mul_monomial(&mono)).collect());
    }
    let nrows = rows.len();
    if nrows == 0 {
        return Ok(0);
    }
    let cols = rows[0].len();
    let target = nrows.min(cols);
    // A specialization can only lower the rank, so reaching full rank at an
    // integer point certifies full rank over the function field.
    let vars: BTreeSet<Var> = rows.iter().flatten().flat_map(|p| p.vars()).collect();
    let mut state = 0x5EED_u64;
    for _ in 0..4 {
        let mut point = HashMap::new();
        for &v in &vars {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            point.insert(v, BigRational::from_integer(BigInt::from(3 + (state >> 33) % 997)));
        }
        let mut ints = Vec::with_capacity(nrows);
        for row in &rows {
            ints.push(row.iter().map(|p| p.eval(&point).map(|x| x.to_integer())).collect::<Result<Vec<_>>>()?);
        }
        if rank_integer(ints) == target {
            return Ok(target);
        }
    }
    let mut rank = 0;
    let mut prev = Poly::one();
    for c in 0..cols {
        let Some(piv) = (rank..nrows).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rank, piv);
        for i in rank + 1..nrows {
            for j in c + 1..cols {
                let num = rows[rank][c].mul(&rows[i][j]).sub(&rows[i][c].mul(&rows[rank][j]));
                rows[i][j] = num
                    .div_exact(&prev)
                    .ok_or_else(|| Error::Invariant("fraction-free elimination hit an inexact division".into()))?;
            }
            rows[i][c] = Poly::zero();
        }
        prev = rows[rank][c].clone();
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    Ok(rank)
}

/// Determinant of a square matrix by fraction-free elimination.
pub fn determinant<S: Scalar>(mut m: Vec<Vec<S>>) -> Result<S> {
    let n = m.len();
    let mut sign = S::one();
    let mut prev = S::one();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !m[i][k].is_zero()) else { return Ok(S::zero()) };
        if piv != k {
            m.swap(k, piv);
            sign = sign.neg();
        }
        let pinv = prev.inv()?;
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.mul(&pinv);
            }
            m[i][k] = S::zero();
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return Ok(S::one());
    }
    Ok(sign.mul(&m[n - 1][n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_int(n)
    }

    #[test]
    fn echelon_solves() {
        let a = vec![(0u32, q(1)), (2, q(1))];
        let b = vec![(1u32, q(2))];
        let e = Echelon::new(3, &[a, b]).unwrap();
        let v = vec![(0u32, q(3)), (1, q(4)), (2, q(3))];
        assert_eq!(e.solve(&v).unwrap(), vec![(0, q(3)), (1, q(2))]);
        assert!(e.solve(&[(0u32, q(1))]).is_err());
        assert!(Echelon::new(3, &[vec![(0u32, q(1))], vec![(0u32, q(2))]]).is_err());
    }

    #[test]
    fn bareiss_rank_and_det() {
        let m = vec![vec![q(2), q(1), q(0)], vec![q(1), q(3), q(1)], vec![q(0), q(1), q(4)]];
        assert_eq!(determinant(m.clone()).unwrap(), q(18));
        assert_eq!(rank(m).unwrap(), 3);
        let s = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(rank(s.clone()).unwrap(), 1);
        assert_eq!(determinant(s).unwrap(), q(0));
    }

    #[test]
    fn integer_and_rational_rank() {
        let m = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(1), q(0), q(1)]];
        assert_eq!(rank_rational(&m), 2);
        let big = BigInt::from(0x1FFF_FFFF_FFFF_FFFFu64);
        // Singular modulo the first prime but not over the integers.
        let m = vec![vec![big.clone(), BigInt::from(0)], vec![BigInt::from(0), BigInt::from(1)]];
        assert_eq!(rank_integer(m), 2);
        let m = vec![vec![big.clone(), big.clone()], vec![big.clone(), big]];
        assert_eq!(rank_integer(m), 1);
    }
}
