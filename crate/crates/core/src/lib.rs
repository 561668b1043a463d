//! Exact-arithmetic toolkit for intrinsic Diophantine approximation on
//! self-similar sets defined by rational parameters.
//!
//! Everything set-theoretic is computed over arbitrary-precision rationals:
//! membership of rationals in attractors, intrinsic heights, multiplicative
//! order censuses, orbit discrepancies, and desk-scale dimension estimates.

pub mod coding;
pub mod dimension;
pub mod equidistribution;
pub mod error;
pub mod hp;
pub mod ifs;
pub mod membership;
pub mod number_theory;
pub mod rational;

pub use error::{Error, Result};
pub use ifs::{AffineMap, Branch, Interval, RationalIfs};
pub use rational::ExactRational;
