//! Binary-relation calculus over finite algebras.

pub mod binrel;
pub mod closure;
pub mod eval;
pub mod expr;
pub mod parse;
pub mod represent;

pub use binrel::BinRel;
pub use closure::{
    admissible_closure, admissible_closure_naive, all_congruences, check_role, congruence_closure,
    is_admissible, is_congruence, is_tolerance, tolerance_closure, Check, Counterexample,
    Structure, Violation,
};
pub use eval::{
    alternation_chain, check_inclusion, enforce_roles, eval_expr, min_alternation, Alternation,
    Env, InclusionVerdict,
};
pub use expr::{IdentityStatement, Mode, RelExpr, Role};
pub use parse::{parse_expr, parse_roles, parse_statement};
pub use represent::{
    representability_obstruction, representation_search, symmetric_square, Representability,
};
