//! Free algebras, term searches and identity checks for the variety
//! generated by a finite algebra.

pub mod check;
pub mod classify;
pub mod free;
pub mod terms;

pub use check::{
    distributivity_statement, generic_layout, modularity_level, modularity_statement, spectrum,
    variety_congruence_check, variety_relation_check, GenericLayout, LevelReport, VarietyVerdict,
};
pub use free::{clear_free_algebra_cache, free_algebra, projection, FreeAlgebra};
pub use terms::{absorption_check, find_term, Equation, Side, TermSearchKind, TermWitness};
pub use classify::{
    arithmeticity_probe, arithmetic_violation, classify_boolean_reduct, principal_congruences,
    ArithmeticityReport, ClassificationReport,
};
