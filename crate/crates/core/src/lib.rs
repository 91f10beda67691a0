//! Exact computer algebra for the centrally extended Lie algebra of
//! differential operators on the circle and its realization by quadratic
//! operators on twisted Heisenberg Fock modules.
//!
//! All arithmetic is over the rationals (or a cyclotomic extension when a
//! root of unity cannot be avoided). There is no floating point anywhere.

pub mod bernoulli;
pub mod cyclotomic;
pub mod diffops;
pub mod error;
pub mod fock;
pub mod poly;
pub mod rational;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use poly::Poly;
pub use rational::{q, Rational};
