//! Logical formulas over access requests and the policy-to-formula translation.

mod eval;
mod ir;
mod translate;

pub use eval::{eval_atom, evaluate, simplify};
pub use ir::{AccessRequest, Atom, Formula};
pub use translate::{combine_for_point, translate_conditions, translate_policy, TranslateError};
