//! Finite mappings (one unary function plus unary predicates), their local types, and
//! the construction that approximates a mapping by a realized type measure.

pub mod equivalence;
pub mod compress;
pub mod error;
pub mod fmtp;
pub mod format;
pub mod logic;
pub mod rational;
pub mod realize;
pub mod structure;
pub mod sample;
pub mod types;

pub use error::{Error, Result};
pub use logic::{Formula, Interpretation};
pub use rational::Rational;
pub use structure::{Element, FiniteMapping, Signature};
pub use types::{LocalType, TypeMeasure, TypeSession};
