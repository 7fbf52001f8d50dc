//! First-order formulas over one unary function and unary predicates.

mod ast;
mod eval;
mod interp;
mod parser;

pub use ast::{build_delta, variable_index, Formula, RankKind, Term};
pub use eval::{evaluate, stone_pairing, stone_pairing_with_budget, Compiled, DEFAULT_ASSIGNMENT_BUDGET};
pub use interp::{apply_interpretation, translate, Interpretation};
pub use parser::parse;

use crate::error::Result;

/// Rank of the presented clean form.
pub fn rank(phi: &Formula, kind: RankKind) -> Result<usize> {
    phi.rank(kind)
}
