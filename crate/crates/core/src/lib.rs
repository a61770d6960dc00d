//! Exact computations in cyclotomic Birman-Murakami-Wenzl algebras and
//! their Hecke quotients: normal forms, Markov traces, link invariants.

pub mod algebra;
pub mod cache;
pub mod diagram;
pub mod elem;
pub mod engine;
pub mod error;
pub mod hecke;
pub mod invariants;
pub mod linalg;
pub mod params;
pub mod rewrite;
pub mod ring;
pub mod scalar;

pub use cache::StructureCache;
pub use diagram::{BasisElem, GenWord, Token, ZBrauer};
pub use elem::AlgElem;
pub use engine::{mul_basis, reduce};
pub use error::{Error, Result};
pub use hecke::{HeckeBasisElem, HeckeElem, HeckeParams, HeckeWord};
pub use invariants::{invariant, markov_move_suite, BraidWord};
pub use params::{Mode, Params, RhoBranch};
pub use ring::{Monomial, Poly, RingElem, Var};
pub use scalar::Scalar;
