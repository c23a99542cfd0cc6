//! Scalar symbolic expressions over the chart variables `x`, `y`.

mod diff;
mod eval;
mod node;
mod parse;
mod poly;
mod print;
mod simplify;
mod zero;

pub use diff::diff;
pub use eval::{eval_at, Compiled, EvalDomainError};
pub use node::{canonical_cmp, Constant, Expr, Func, Kind, Var};
pub use parse::{parse, ParseError};
pub use print::print;
pub use simplify::{simplify, simplify_with_notes, try_simplify, RemovableNote};
pub use zero::{is_zero, probe, Domain, ZeroTestConfig, ZeroVerdict};
