//! A toolkit for deciding equality in the semiring N[X]/(X = 1 + X^2),
//! producing machine-checkable equational derivations, and compiling
//! those derivations into executable bijections between polynomial sets
//! of finite binary trees — including the seven-tuple codec.

pub mod bijections;
pub mod derivations;
pub mod error;
pub mod patterns;
pub mod presentations;
pub mod semiring;
pub mod tree;
pub mod verifier;

pub use error::{Error, ParseError, Result};
