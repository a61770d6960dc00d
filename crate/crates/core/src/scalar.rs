//! Coefficient fields the rewriting engine can run over.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ring::RingElem;

pub trait Scalar: Clone + PartialEq + Debug + Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn from_int(c: i64) -> Self;
    /// Convert an exact ring value; numeric fields reject symbolic input.
    fn from_ring(x: &RingElem) -> Result<Self>;
    fn to_ring(&self) -> RingElem;
}

impl Scalar for RingElem {
    fn zero() -> Self {
        RingElem::zero()
    }
    fn one() -> Self {
        RingElem::one()
    }
    fn is_zero(&self) -> bool {
        RingElem::is_zero(self)
    }
    fn is_one(&self) -> bool {
        RingElem::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        RingElem::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RingElem::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RingElem::mul(self, other)
    }
    fn neg(&self) -> Self {
        RingElem::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        RingElem::inv(self)
    }
    fn from_int(c: i64) -> Self {
        RingElem::from_int(c)
    }
    fn from_ring(x: &RingElem) -> Result<Self> {
        Ok(x.clone())
    }
    fn to_ring(&self) -> RingElem {
        self.clone()
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.recip())
        }
    }
    fn from_int(c: i64) -> Self {
        BigRational::from_integer(BigInt::from(c))
    }
    fn from_ring(x: &RingElem) -> Result<Self> {
        x.as_rational()
            .ok_or_else(|| Error::InvalidInput(format!("symbolic value {x} in a numeric context")))
    }
    fn to_ring(&self) -> RingElem {
        RingElem::from_rational(self)
    }
}
